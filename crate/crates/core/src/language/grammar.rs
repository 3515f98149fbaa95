//! Closed-world context-free grammar and a memoized top-down chart parser.
//!
//! Grammar files hold one production per line, `LHS -> RHS...`, with `|`
//! allowed for alternatives. Symbols starting with an uppercase letter are
//! nonterminals; anything else is a terminal word. The terminal `<region>`
//! matches any region identifier that is not itself a grammar word.
//! Terminals may only appear in unary lexical rules (`NN -> capsule`), which
//! become preterminal leaves in the tree. The LHS of the first production is
//! the start symbol; when all its productions are unary its node is dropped
//! from returned trees. A `-TAG` suffix on a nonterminal (`VP-PRED`) keeps
//! productions apart in the grammar but is dropped from tree labels.

use std::collections::{BTreeSet, HashMap};

use super::{normalize, LanguageError, ParseTree};
use crate::world::is_valid_id;

pub const REGION_TERMINAL: &str = "<region>";

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sym {
    Nt(String),
    Word(String),
    Region,
}

#[derive(Debug, Clone)]
struct Production {
    lhs: String,
    rhs: Vec<Sym>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    start: String,
    productions: Vec<Production>,
    by_lhs: HashMap<String, Vec<usize>>,
    vocabulary: BTreeSet<String>,
}

fn tree_label(nt: &str) -> &str {
    nt.split_once('-').map_or(nt, |(base, _)| base)
}

fn is_nonterminal(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Grammar, LanguageError> {
        let mut productions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| LanguageError::Grammar { line: i + 1, msg: m };
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err("expected `LHS -> RHS...`".into()))?;
            let lhs = lhs.trim();
            if !is_nonterminal(lhs) || lhs.contains(char::is_whitespace) {
                return Err(err(format!("left-hand side `{lhs}` must be a single nonterminal")));
            }
            for alt in rhs.split('|') {
                let syms: Vec<Sym> = alt
                    .split_whitespace()
                    .map(|s| {
                        if s == REGION_TERMINAL {
                            Sym::Region
                        } else if is_nonterminal(s) {
                            Sym::Nt(s.to_string())
                        } else {
                            Sym::Word(s.to_string())
                        }
                    })
                    .collect();
                if syms.is_empty() {
                    return Err(err("empty right-hand side".into()));
                }
                if syms.len() > 1 && syms.iter().any(|s| !matches!(s, Sym::Nt(_))) {
                    return Err(err("terminals may only appear in unary lexical rules".into()));
                }
                productions.push(Production {
                    lhs: lhs.to_string(),
                    rhs: syms,
                });
            }
        }
        let start = productions
            .first()
            .map(|p| p.lhs.clone())
            .ok_or(LanguageError::Grammar { line: 0, msg: "no productions".into() })?;
        let mut by_lhs: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, p) in productions.iter().enumerate() {
            by_lhs.entry(p.lhs.clone()).or_default().push(i);
        }
        let mut vocabulary = BTreeSet::new();
        for p in &productions {
            for s in &p.rhs {
                match s {
                    Sym::Nt(n) if !by_lhs.contains_key(n) => {
                        return Err(LanguageError::Grammar {
                            line: 0,
                            msg: format!("nonterminal `{n}` has no productions"),
                        })
                    }
                    Sym::Word(w) => {
                        vocabulary.insert(w.clone());
                    }
                    _ => {}
                }
            }
        }
        let g = Grammar {
            start,
            productions,
            by_lhs,
            vocabulary,
        };
        g.check_not_left_recursive()?;
        Ok(g)
    }

    /// The grammar shipped with the crate.
    pub fn builtin() -> Grammar {
        Grammar::parse(include_str!("../../assets/grammar.cfg")).expect("builtin grammar is valid")
    }

    pub fn start_symbol(&self) -> &str {
        &self.start
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    fn check_not_left_recursive(&self) -> Result<(), LanguageError> {
        fn visit(g: &Grammar, nt: &str, stack: &mut Vec<String>, done: &mut BTreeSet<String>) -> Result<(), LanguageError> {
            if done.contains(nt) {
                return Ok(());
            }
            if stack.iter().any(|s| s == nt) {
                return Err(LanguageError::Grammar {
                    line: 0,
                    msg: format!("left recursion through `{nt}`"),
                });
            }
            stack.push(nt.to_string());
            for &i in &g.by_lhs[nt] {
                if let Some(Sym::Nt(first)) = g.productions[i].rhs.first() {
                    visit(g, first, stack, done)?;
                }
            }
            stack.pop();
            done.insert(nt.to_string());
            Ok(())
        }
        let mut done = BTreeSet::new();
        for nt in self.by_lhs.keys() {
            visit(self, nt, &mut Vec::new(), &mut done)?;
        }
        Ok(())
    }

    fn is_region_word(&self, tok: &str) -> bool {
        is_valid_id(tok) && !self.vocabulary.contains(tok)
    }

    /// Parses an utterance after lowercasing and stripping punctuation.
    pub fn parse_utterance(&self, utterance: &str) -> Result<ParseTree, LanguageError> {
        let norm = normalize(utterance);
        if norm.is_empty() {
            return Err(LanguageError::ParseFailure {
                utterance: utterance.to_string(),
                reason: "empty utterance".into(),
            });
        }
        let tokens: Vec<&str> = norm.split(' ').collect();
        for t in &tokens {
            if !self.vocabulary.contains(*t) && !self.is_region_word(t) {
                return Err(LanguageError::ParseFailure {
                    utterance: utterance.to_string(),
                    reason: format!("word `{t}` is outside the grammar"),
                });
            }
        }
        let mut chart = Chart {
            g: self,
            tokens: &tokens,
            memo: HashMap::new(),
        };
        let parses = chart.parse_nt(&self.start, 0);
        let tree = parses
            .into_iter()
            .find(|(_, end)| *end == tokens.len())
            .map(|(t, _)| t)
            .ok_or_else(|| LanguageError::ParseFailure {
                utterance: utterance.to_string(),
                reason: "no derivation".into(),
            })?;
        Ok(self.strip_start(tree))
    }

    fn strip_start(&self, tree: ParseTree) -> ParseTree {
        let unary_start = self.by_lhs[&self.start]
            .iter()
            .all(|&i| matches!(self.productions[i].rhs.as_slice(), [Sym::Nt(_)]));
        match tree {
            ParseTree::Phrase { mut children, .. } if unary_start && children.len() == 1 => {
                children.pop().expect("one child")
            }
            t => t,
        }
    }

    /// Every sentence the grammar derives with `<region>` ranging over
    /// `regions`, in production order. Fails on recursive grammars.
    pub fn enumerate(&self, regions: &[&str]) -> Result<Vec<ParseTree>, LanguageError> {
        let mut active = Vec::new();
        let trees = self.expand_nt(&self.start, regions, &mut active)?;
        Ok(trees.into_iter().map(|t| self.strip_start(t)).collect())
    }

    fn expand_nt(&self, nt: &str, regions: &[&str], active: &mut Vec<String>) -> Result<Vec<ParseTree>, LanguageError> {
        if active.iter().any(|a| a == nt) {
            return Err(LanguageError::Grammar {
                line: 0,
                msg: format!("cannot enumerate recursive nonterminal `{nt}`"),
            });
        }
        active.push(nt.to_string());
        let mut out = Vec::new();
        for &i in &self.by_lhs[nt] {
            let p = &self.productions[i];
            match p.rhs.as_slice() {
                [Sym::Word(w)] => out.push(ParseTree::terminal(tree_label(nt), w)),
                [Sym::Region] => out.extend(regions.iter().map(|r| ParseTree::terminal(tree_label(nt), r))),
                rhs => {
                    let mut partial: Vec<Vec<ParseTree>> = vec![Vec::new()];
                    for s in rhs {
                        let Sym::Nt(child) = s else { unreachable!("validated at load") };
                        let options = self.expand_nt(child, regions, active)?;
                        partial = partial
                            .into_iter()
                            .flat_map(|prefix| {
                                options.iter().map(move |o| {
                                    let mut v = prefix.clone();
                                    v.push(o.clone());
                                    v
                                })
                            })
                            .collect();
                    }
                    out.extend(partial.into_iter().map(|children| ParseTree::phrase(tree_label(nt), children)));
                }
            }
        }
        active.pop();
        Ok(out)
    }
}

struct Chart<'a> {
    g: &'a Grammar,
    tokens: &'a [&'a str],
    memo: HashMap<(String, usize), Vec<(ParseTree, usize)>>,
}

impl Chart<'_> {
    fn parse_nt(&mut self, nt: &str, pos: usize) -> Vec<(ParseTree, usize)> {
        let key = (nt.to_string(), pos);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut out = Vec::new();
        for &i in &self.g.by_lhs[nt] {
            let rhs = self.g.productions[i].rhs.clone();
            match rhs.as_slice() {
                [Sym::Word(w)] => {
                    if self.tokens.get(pos) == Some(&w.as_str()) {
                        out.push((ParseTree::terminal(tree_label(nt), w), pos + 1));
                    }
                }
                [Sym::Region] => {
                    if let Some(t) = self.tokens.get(pos) {
                        if self.g.is_region_word(t) {
                            out.push((ParseTree::terminal(tree_label(nt), t), pos + 1));
                        }
                    }
                }
                rhs => {
                    let mut partial: Vec<(Vec<ParseTree>, usize)> = vec![(Vec::new(), pos)];
                    for s in rhs {
                        let Sym::Nt(child) = s else { unreachable!("validated at load") };
                        let mut next = Vec::new();
                        for (prefix, at) in partial {
                            for (t, end) in self.parse_nt(child, at) {
                                let mut v = prefix.clone();
                                v.push(t);
                                next.push((v, end));
                            }
                        }
                        partial = next;
                        if partial.is_empty() {
                            break;
                        }
                    }
                    out.extend(
                        partial
                            .into_iter()
                            .map(|(children, end)| (ParseTree::phrase(tree_label(nt), children), end)),
                    );
                }
            }
        }
        self.memo.insert(key, out.clone());
        out
    }
}
