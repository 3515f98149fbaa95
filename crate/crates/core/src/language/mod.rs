//! Grounded language: parsing, symbol grounding, training and generation.

mod generate;
mod grammar;
mod model;
mod symbols;
mod tree;

use thiserror::Error;

use crate::world::{WorldError, WorldModel};

pub use generate::{classify_reply, generate, Reply};
pub use grammar::Grammar;
pub use model::{
    features, ground, train, train_with, Corpus, CorpusEntry, Correspondence, GroundingResult, PhraseGrounding,
    TrainingReport, Weights, DEFAULT_MAX_EPOCHS,
};
pub use symbols::{NavigateAction, SemanticSymbol, SpatialRelation, SymbolKind, SymbolSpace};
pub use tree::ParseTree;

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error("cannot parse `{utterance}`: {reason}")]
    ParseFailure { utterance: String, reason: String },
    #[error("grammar line {line}: {msg}")]
    Grammar { line: usize, msg: String },
    #[error("malformed tree: {0}")]
    BadTree(String),
    #[error("malformed symbol literal `{0}`")]
    BadSymbol(String),
    #[error("corpus line {line}: {msg}")]
    BadCorpus { line: usize, msg: String },
    #[error("weights line {line}: {msg}")]
    BadWeights { line: usize, msg: String },
    #[error("no symbol grounds `{0}`")]
    GroundingFailure(String),
    #[error("no candidate phrase grounds to {0}")]
    GenerationFailure(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("corpus is not separable: {}", .0.1)]
    NonSeparable(Box<(Weights, TrainingReport)>),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// A grammar with trained weights: everything needed to understand and
/// generate utterances against a world.
#[derive(Debug, Clone)]
pub struct LanguageModel {
    pub grammar: Grammar,
    pub weights: Weights,
}

impl LanguageModel {
    pub fn new(grammar: Grammar, weights: Weights) -> Self {
        Self { grammar, weights }
    }

    /// The shipped grammar trained on the shipped corpus.
    pub fn builtin() -> Result<Self, LanguageError> {
        let grammar = Grammar::builtin();
        let (weights, _) = train(&Corpus::builtin(), &grammar)?;
        Ok(Self { grammar, weights })
    }

    pub fn understand(&self, utterance: &str, w: &WorldModel) -> Result<(ParseTree, GroundingResult), LanguageError> {
        let tree = self.grammar.parse_utterance(utterance)?;
        let space = SymbolSpace::instantiate(w)?;
        let g = ground(&tree, &space, w, &self.weights)?;
        Ok((tree, g))
    }

    pub fn query(&self, target: &SemanticSymbol, w: &WorldModel) -> Result<String, LanguageError> {
        let space = SymbolSpace::instantiate(w)?;
        generate(target, &space, w, &self.weights, &self.grammar)
    }
}

/// Lowercases, turns sentence punctuation into spaces and collapses whitespace.
pub fn normalize(utterance: &str) -> String {
    utterance
        .to_lowercase()
        .replace(['?', '.', '!', ','], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Is the Kibo capsule,  connected?"), "is the kibo capsule connected");
        assert_eq!(normalize("?!"), "");
    }
}
