//! Query generation by searching for the phrase that grounds best to a target.

use serde::{Deserialize, Serialize};

use super::{ground, normalize, Grammar, LanguageError, SemanticSymbol, SymbolSpace, Weights};
use crate::world::WorldModel;

const SCORE_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reply {
    Yes,
    No,
    NotAReply,
}

pub fn classify_reply(utterance: &str) -> Reply {
    match normalize(utterance).as_str() {
        "yes" => Reply::Yes,
        "no" => Reply::No,
        _ => Reply::NotAReply,
    }
}

/// Picks, among the grammar's declarative realizations, the one whose
/// grounding equals `target` with the highest score, and renders it as a
/// yes/no question. Equal scores prefer the better-known region (higher
/// degree in `w`) as the subject, then enumeration order.
pub fn generate(
    target: &SemanticSymbol,
    space: &SymbolSpace,
    w: &WorldModel,
    weights: &Weights,
    grammar: &Grammar,
) -> Result<String, LanguageError> {
    let fail = || LanguageError::GenerationFailure(target.to_string());
    if space.index_of(target).is_none() {
        return Err(fail());
    }
    let regions: Vec<&str> = space.regions().iter().map(|r| r.as_str()).collect();
    let mut best: Option<(f64, usize, (String, String))> = None;
    for tree in grammar.enumerate(&regions)? {
        if tree.label() != "S" {
            continue;
        }
        let Ok(g) = ground(&tree, space, w, weights) else {
            continue;
        };
        if &g.true_symbol != target {
            continue;
        }
        let nnps: Vec<&str> = tree
            .leaves()
            .into_iter()
            .filter(|(tag, _)| *tag == "NNP")
            .map(|(_, t)| t)
            .collect();
        let [a, b] = nnps.as_slice() else { continue };
        let degree = w.region(a).map_or(0, |r| w.degree(&r.id));
        let better = match &best {
            None => true,
            Some((s, d, _)) => g.score > s + SCORE_TIE || ((g.score - s).abs() <= SCORE_TIE && degree > *d),
        };
        if better {
            best = Some((g.score, degree, (a.to_string(), b.to_string())));
        }
    }
    let (_, _, (a, b)) = best.ok_or_else(fail)?;
    Ok(format!("is the {a} capsule connected to the {b} capsule?"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{train, Corpus};

    #[test]
    fn replies() {
        assert_eq!(classify_reply("yes"), Reply::Yes);
        assert_eq!(classify_reply("No."), Reply::No);
        assert_eq!(classify_reply("maybe"), Reply::NotAReply);
        assert_eq!(classify_reply("yes no"), Reply::NotAReply);
    }

    #[test]
    fn queries_follow_known_regions() {
        let g = Grammar::builtin();
        let (weights, _) = train(&Corpus::builtin(), &g).unwrap();
        let w = WorldModel::from_parts(&["kibo", "columbus", "harmony"], &[("kibo", "harmony")], "kibo").unwrap();
        let space = SymbolSpace::instantiate(&w).unwrap();
        let q = |a, b| generate(&SemanticSymbol::connectivity(a, b).unwrap(), &space, &w, &weights, &g).unwrap();
        assert_eq!(q("kibo", "columbus"), "is the kibo capsule connected to the columbus capsule?");
        assert_eq!(q("columbus", "harmony"), "is the harmony capsule connected to the columbus capsule?");
        let err = generate(&SemanticSymbol::object("kibo").unwrap(), &space, &w, &Weights::default(), &g);
        assert!(matches!(err, Err(LanguageError::GenerationFailure(_))));
    }
}
