//! Log-linear correspondence model over parse-tree phrases and symbols.
//!
//! For every phrase (children first) and every symbol the model scores the
//! Boolean correspondence with `p(φ = true) = σ(w · f)`, where `f` are binary
//! indicator features that only fire for the `true` value. Child phrases'
//! true symbols feed the parent's features. At the root exactly one symbol is
//! made true: the highest activation above zero, ties to the lowest index.
//! The result's score is the sum of per-phrase, per-symbol log factors, i.e.
//! the log of the product over all factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Grammar, LanguageError, ParseTree, SemanticSymbol, SymbolKind, SymbolSpace};
use crate::world::{Region, WorldModel};

pub const DEFAULT_MAX_EPOCHS: usize = 1000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Weights(BTreeMap<String, f64>);

impl Weights {
    pub fn get(&self, feature: &str) -> f64 {
        self.0.get(feature).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn set(&mut self, feature: &str, value: f64) -> Result<(), LanguageError> {
        if !value.is_finite() {
            return Err(LanguageError::BadWeights {
                line: 0,
                msg: format!("non-finite weight for `{feature}`"),
            });
        }
        self.0.insert(feature.to_string(), value);
        Ok(())
    }

    fn activation(&self, features: &[String]) -> f64 {
        features.iter().map(|f| self.get(f)).sum()
    }

    fn add(&mut self, features: &[String], delta: f64) {
        for f in features {
            *self.0.entry(f.clone()).or_insert(0.0) += delta;
        }
    }

    /// `feature-id TAB value` per line, sorted by feature id.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| format!("{k}\t{v:?}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Weights, LanguageError> {
        let mut w = Weights::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| LanguageError::BadWeights { line: i + 1, msg: m.to_string() };
            let (k, v) = line.split_once('\t').ok_or_else(|| bad("expected `feature<TAB>value`"))?;
            let v: f64 = v.trim().parse().map_err(|_| bad("value is not a number"))?;
            if !v.is_finite() {
                return Err(bad("value is not finite"));
            }
            w.0.insert(k.to_string(), v);
        }
        Ok(w)
    }
}

/// One factor's outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence {
    pub phrase_index: usize,
    pub symbol_index: usize,
    pub value: bool,
    /// `w · f` for the true value.
    pub activation: f64,
    /// `log p(φ = value)`.
    pub log_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhraseGrounding {
    pub label: String,
    pub text: String,
    pub correspondences: Vec<Correspondence>,
}

impl PhraseGrounding {
    pub fn true_symbols(&self) -> impl Iterator<Item = usize> + '_ {
        self.correspondences.iter().filter(|c| c.value).map(|c| c.symbol_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundingResult {
    pub true_symbol: SemanticSymbol,
    pub symbol_index: usize,
    /// Sum of `log_score` over every phrase and symbol.
    pub score: f64,
    /// Phrases in post-order; the root is last.
    pub phrases: Vec<PhraseGrounding>,
}

impl GroundingResult {
    pub fn root(&self) -> &PhraseGrounding {
        self.phrases.last().expect("at least one phrase")
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn factor_log(activation: f64, value: bool) -> f64 {
    if value {
        log_sigmoid(activation)
    } else {
        log_sigmoid(-activation)
    }
}

const HEAD_TAGS: [&str; 7] = ["VB", "VBN", "VBZ", "TO", "UH", "NN", "NNP"];

fn head_word(phrase: &ParseTree) -> &str {
    let leaves = phrase.leaves();
    for tag in HEAD_TAGS {
        if let Some((_, tok)) = leaves.iter().find(|(t, _)| *t == tag) {
            return tok;
        }
    }
    leaves.first().map(|(_, t)| *t).unwrap_or("")
}

/// Binary indicator features firing for `φ = true` between `phrase` and `symbol`.
pub fn features(
    phrase: &ParseTree,
    symbol: &SemanticSymbol,
    child_kinds: &BTreeSet<SymbolKind>,
    w: &WorldModel,
) -> Vec<String> {
    let kind = symbol.kind();
    let mut out = vec![format!("bias&{kind}"), format!("head={}&{kind}", head_word(phrase))];
    let leaves = phrase.leaves();
    let mentioned: BTreeSet<&str> = leaves
        .iter()
        .filter(|(tag, tok)| *tag == "NNP" && w.region(tok).is_some())
        .map(|(_, tok)| *tok)
        .collect();
    let payload: BTreeSet<&str> = symbol.regions().into_iter().map(|r| r.as_str()).collect();
    if payload.is_subset(&mentioned) {
        out.push(format!("payload-mentioned&{kind}"));
    } else {
        out.push(format!("payload-unmentioned&{kind}"));
    }
    if !mentioned.is_subset(&payload) {
        out.push(format!("extra-region&{kind}"));
    }
    let preps: BTreeSet<&str> = leaves.iter().filter(|(t, _)| *t == "TO").map(|(_, w)| *w).collect();
    for p in preps {
        out.push(format!("prep={p}&{kind}"));
    }
    if child_kinds.is_empty() {
        out.push(format!("child=none&{kind}"));
    }
    for c in child_kinds {
        out.push(format!("child={c}&{kind}"));
    }
    out
}

struct Scored {
    phrases: Vec<PhraseGrounding>,
    /// Features for each root symbol, kept for training updates.
    root_features: Vec<Vec<String>>,
}

fn score_tree(tree: &ParseTree, space: &SymbolSpace, w: &WorldModel, weights: &Weights) -> Scored {
    let mut phrases = Vec::new();
    let mut root_features = Vec::new();
    score_node(tree, space, w, weights, &mut phrases, &mut root_features, true);
    Scored { phrases, root_features }
}

/// Scores `node` and its descendants, returning the node's true symbols.
fn score_node(
    node: &ParseTree,
    space: &SymbolSpace,
    w: &WorldModel,
    weights: &Weights,
    out: &mut Vec<PhraseGrounding>,
    root_features: &mut Vec<Vec<String>>,
    is_root: bool,
) -> Vec<usize> {
    let ParseTree::Phrase { label, children } = node else {
        return Vec::new();
    };
    let mut child_kinds = BTreeSet::new();
    for c in children {
        for j in score_node(c, space, w, weights, out, root_features, false) {
            child_kinds.insert(space.symbols()[j].kind());
        }
    }
    let phrase_index = out.len();
    let mut correspondences = Vec::with_capacity(space.len());
    for (j, sym) in space.symbols().iter().enumerate() {
        let f = features(node, sym, &child_kinds, w);
        let activation = weights.activation(&f);
        let value = activation > 0.0;
        correspondences.push(Correspondence {
            phrase_index,
            symbol_index: j,
            value,
            activation,
            log_score: factor_log(activation, value),
        });
        if is_root {
            root_features.push(f);
        }
    }
    if is_root {
        // exactly one true symbol at the root
        let best = correspondences
            .iter()
            .filter(|c| c.activation > 0.0)
            .fold(None::<&Correspondence>, |best, c| match best {
                Some(b) if b.activation >= c.activation => Some(b),
                _ => Some(c),
            })
            .map(|c| c.symbol_index);
        for c in &mut correspondences {
            c.value = Some(c.symbol_index) == best;
            c.log_score = factor_log(c.activation, c.value);
        }
    }
    let trues = correspondences.iter().filter(|c| c.value).map(|c| c.symbol_index).collect();
    out.push(PhraseGrounding {
        label: label.clone(),
        text: node.text(),
        correspondences,
    });
    trues
}

/// Infers the single true root symbol for a parsed utterance.
pub fn ground(
    tree: &ParseTree,
    space: &SymbolSpace,
    w: &WorldModel,
    weights: &Weights,
) -> Result<GroundingResult, LanguageError> {
    let scored = score_tree(tree, space, w, weights);
    let root = scored
        .phrases
        .last()
        .ok_or_else(|| LanguageError::GroundingFailure(tree.text()))?;
    let symbol_index = root
        .true_symbols()
        .next()
        .ok_or_else(|| LanguageError::GroundingFailure(tree.text()))?;
    let score = scored
        .phrases
        .iter()
        .flat_map(|p| p.correspondences.iter())
        .map(|c| c.log_score)
        .sum();
    Ok(GroundingResult {
        true_symbol: space.symbols()[symbol_index].clone(),
        symbol_index,
        score,
        phrases: scored.phrases,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub utterance: String,
    pub tree: ParseTree,
    /// `None` marks an utterance that must not ground to any symbol.
    pub symbol: Option<SemanticSymbol>,
}

/// Training corpus: `utterance TAB bracketed tree TAB symbol literal` per
/// line, with `none` as the literal for negative examples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn parse(text: &str) -> Result<Corpus, LanguageError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| LanguageError::BadCorpus { line: i + 1, msg: m };
            let cols: Vec<&str> = line.split('\t').collect();
            let [utterance, tree, symbol] = cols.as_slice() else {
                return Err(bad(format!("expected 3 tab-separated columns, found {}", cols.len())));
            };
            let tree = ParseTree::from_bracketed(tree).map_err(|e| bad(e.to_string()))?;
            let symbol = match symbol.trim() {
                "none" => None,
                lit => Some(lit.parse().map_err(|e: LanguageError| bad(e.to_string()))?),
            };
            entries.push(CorpusEntry {
                utterance: utterance.to_string(),
                tree,
                symbol,
            });
        }
        Ok(Corpus { entries })
    }

    pub fn builtin() -> Corpus {
        Corpus::parse(include_str!("../../assets/corpus.tsv")).expect("builtin corpus is valid")
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                let sym = e.symbol.as_ref().map_or("none".to_string(), |s| s.to_string());
                format!("{}\t{}\t{}\n", e.utterance, e.tree, sym)
            })
            .collect()
    }

    /// World over the regions the corpus mentions, in order of first mention.
    pub fn world(&self) -> Result<WorldModel, LanguageError> {
        let mut w = WorldModel::new();
        for e in &self.entries {
            let mut ids: Vec<String> = e
                .tree
                .leaves()
                .into_iter()
                .filter(|(tag, _)| *tag == "NNP")
                .map(|(_, t)| t.to_string())
                .collect();
            if let Some(s) = &e.symbol {
                ids.extend(s.regions().into_iter().map(|r| r.to_string()));
            }
            for id in ids {
                if w.region(&id).is_none() {
                    w = w.add_region(Region::new(&id, &format!("the {id} capsule"))?)?;
                }
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub epochs: usize,
    pub accuracy: f64,
    pub mistakes: Vec<String>,
}

impl fmt::Display for TrainingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "accuracy {:.3} after {} epochs", self.accuracy, self.epochs)?;
        for m in &self.mistakes {
            write!(f, "; {m}")?;
        }
        Ok(())
    }
}

fn evaluate(corpus: &Corpus, space: &SymbolSpace, w: &WorldModel, weights: &Weights) -> (usize, Vec<String>) {
    let mut correct = 0;
    let mut mistakes = Vec::new();
    for e in &corpus.entries {
        let got = ground(&e.tree, space, w, weights).ok().map(|g| g.true_symbol);
        if got == e.symbol {
            correct += 1;
        } else {
            mistakes.push(format!(
                "`{}`: expected {}, got {}",
                e.utterance,
                e.symbol.as_ref().map_or("none".into(), |s| s.to_string()),
                got.map_or("none".into(), |s| s.to_string())
            ));
        }
    }
    (correct, mistakes)
}

/// Fits weights with averaged perceptron updates on each root correspondence.
/// Stops at the first epoch whose averaged weights reproduce every label.
pub fn train(corpus: &Corpus, grammar: &Grammar) -> Result<(Weights, TrainingReport), LanguageError> {
    train_with(corpus, grammar, DEFAULT_MAX_EPOCHS)
}

pub fn train_with(
    corpus: &Corpus,
    grammar: &Grammar,
    max_epochs: usize,
) -> Result<(Weights, TrainingReport), LanguageError> {
    if corpus.entries.is_empty() {
        return Err(LanguageError::EmptyCorpus);
    }
    for (i, e) in corpus.entries.iter().enumerate() {
        let parsed = grammar.parse_utterance(&e.utterance)?;
        if parsed != e.tree {
            return Err(LanguageError::BadCorpus {
                line: i + 1,
                msg: format!("annotation {} differs from grammar parse {parsed}", e.tree),
            });
        }
    }
    let world = corpus.world()?;
    let space = SymbolSpace::instantiate(&world)?;
    let gold: Vec<Option<usize>> = corpus
        .entries
        .iter()
        .map(|e| e.symbol.as_ref().and_then(|s| space.index_of(s)))
        .collect();

    let mut weights = Weights::default();
    let mut sum: BTreeMap<String, f64> = BTreeMap::new();
    let mut steps = 0usize;
    let mut best: Option<(usize, Weights, Vec<String>)> = None;

    for epoch in 1..=max_epochs {
        for (e, g) in corpus.entries.iter().zip(&gold) {
            let scored = score_tree(&e.tree, &space, &world, &weights);
            let root = scored.phrases.last().expect("corpus trees have phrases");
            let mut updates: Vec<(usize, f64)> = Vec::new();
            for c in &root.correspondences {
                let target = Some(c.symbol_index) == *g;
                if target && c.activation <= 0.0 {
                    updates.push((c.symbol_index, 1.0));
                } else if !target && c.activation > 0.0 {
                    updates.push((c.symbol_index, -1.0));
                }
            }
            for (j, delta) in updates {
                weights.add(&scored.root_features[j], delta);
            }
            steps += 1;
            for (k, v) in &weights.0 {
                *sum.entry(k.clone()).or_insert(0.0) += v;
            }
        }
        let averaged = Weights(
            sum.iter()
                .map(|(k, v)| (k.clone(), v / steps as f64))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        );
        let (correct, mistakes) = evaluate(corpus, &space, &world, &averaged);
        if correct == corpus.entries.len() {
            return Ok((
                averaged,
                TrainingReport {
                    epochs: epoch,
                    accuracy: 1.0,
                    mistakes,
                },
            ));
        }
        if best.as_ref().is_none_or(|(c, _, _)| correct > *c) {
            best = Some((correct, averaged, mistakes));
        }
    }
    let (correct, weights, mistakes) = best.expect("at least one epoch");
    Err(LanguageError::NonSeparable(Box::new((
        weights,
        TrainingReport {
            epochs: max_epochs,
            accuracy: correct as f64 / corpus.entries.len() as f64,
            mistakes,
        },
    ))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trained() -> Weights {
        train(&Corpus::builtin(), &Grammar::builtin()).unwrap().0
    }

    fn iss() -> WorldModel {
        WorldModel::from_parts(&["kibo", "harmony", "columbus"], &[], "columbus").unwrap()
    }

    fn ground_text(u: &str, w: &WorldModel, weights: &Weights) -> Result<GroundingResult, LanguageError> {
        let tree = Grammar::builtin().parse_utterance(u)?;
        ground(&tree, &SymbolSpace::instantiate(w)?, w, weights)
    }

    #[test]
    fn builtin_corpus_trains_to_full_accuracy() {
        let (_, report) = train(&Corpus::builtin(), &Grammar::builtin()).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert!(report.epochs <= DEFAULT_MAX_EPOCHS);
    }

    #[test]
    fn grounds_reference_utterances() {
        let weights = trained();
        let w = iss();
        let g = ground_text("the Kibo capsule is connected to the Harmony capsule", &w, &weights).unwrap();
        assert_eq!(g.true_symbol.to_string(), "ConnectivityRelation{harmony, kibo}");
        let g = ground_text("go to the Columbus capsule", &w, &weights).unwrap();
        assert_eq!(g.true_symbol.to_string(), "Action{navigate, columbus}");
    }

    #[test]
    fn root_has_exactly_one_true_and_score_factorizes() {
        let weights = trained();
        let w = iss();
        let g = ground_text("is the harmony capsule connected to the columbus capsule", &w, &weights).unwrap();
        assert_eq!(g.root().true_symbols().count(), 1);
        let total: f64 = g
            .phrases
            .iter()
            .flat_map(|p| &p.correspondences)
            .map(|c| c.log_score)
            .sum();
        assert!((g.score - total).abs() < 1e-12);
        assert!(g.score <= 0.0);
        assert_eq!(g.phrases.len(), 5);
    }

    #[test]
    fn untrained_model_fails_to_ground() {
        let err = ground_text("go to the kibo capsule", &iss(), &Weights::default()).unwrap_err();
        assert!(matches!(err, LanguageError::GroundingFailure(_)));
    }

    #[test]
    fn training_errors() {
        assert!(matches!(
            train(&Corpus::default(), &Grammar::builtin()),
            Err(LanguageError::EmptyCorpus)
        ));
        let bad = Corpus::parse("go to the kibo capsule\t(VP (VB go))\tAction{navigate, kibo}\n").unwrap();
        assert!(matches!(train(&bad, &Grammar::builtin()), Err(LanguageError::BadCorpus { .. })));
        // contradictory labels cannot be fit
        let contradictory = Corpus::parse(
            "go to the kibo capsule\t(VP (VB go) (PP (TO to) (NP (DT the) (NNP kibo) (NN capsule))))\tAction{navigate, kibo}\n\
             go to the kibo capsule\t(VP (VB go) (PP (TO to) (NP (DT the) (NNP kibo) (NN capsule))))\tObject{kibo}\n",
        )
        .unwrap();
        match train_with(&contradictory, &Grammar::builtin(), 20) {
            Err(LanguageError::NonSeparable(b)) => {
                assert!(b.1.accuracy < 1.0);
                assert!(!b.1.mistakes.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weights_file_round_trip() {
        let weights = trained();
        let text = weights.to_text();
        assert_eq!(Weights::parse(&text).unwrap(), weights);
        assert!(Weights::parse("f\tNaN\n").is_err());
        assert!(Weights::parse("f 1.0\n").is_err());
    }

    #[test]
    fn corpus_file_round_trip() {
        let c = Corpus::builtin();
        assert_eq!(Corpus::parse(&c.to_text()).unwrap(), c);
        assert!(Corpus::parse("just one column\n").is_err());
    }

    #[test]
    fn training_is_deterministic() {
        assert_eq!(trained(), trained());
    }
}
