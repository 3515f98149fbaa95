//! `key = value` service configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! grammar = assets/grammar.cfg
//! corpus = assets/corpus.tsv
//! weights = weights.tsv
//! transit_ticks = 3
//! max_props = 24
//! listen = 127.0.0.1:8080
//! persist_dir = sessions
//! seed = 7
//! ```
//!
//! Relative paths are resolved against the configuration file's directory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agent::AgentOptions;
use crate::language::{train, Corpus, Grammar, LanguageError, LanguageModel, Weights};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error(transparent)]
    Language(#[from] LanguageError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub grammar: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub listen: String,
    pub persist_dir: Option<PathBuf>,
    pub agent: AgentOptions,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grammar: None,
            corpus: None,
            weights: None,
            listen: "127.0.0.1:8080".into(),
            persist_dir: None,
            agent: AgentOptions::default(),
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| ConfigError::Syntax { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("`{k}` expects a non-negative integer")));
            match k {
                "grammar" => c.grammar = Some(base.join(v)),
                "corpus" => c.corpus = Some(base.join(v)),
                "weights" => c.weights = Some(base.join(v)),
                "persist_dir" => c.persist_dir = Some(base.join(v)),
                "listen" => c.listen = v.to_string(),
                "transit_ticks" => {
                    let t = num(v)?;
                    if t == 0 || t > u32::MAX as u64 {
                        return Err(err("`transit_ticks` must be at least 1".into()));
                    }
                    c.agent.transit_ticks = t as u32;
                }
                "max_props" => c.agent.max_props = num(v)? as usize,
                "max_ticks" => c.agent.max_ticks = num(v)?,
                "seed" => c.agent.seed = Some(num(v)?),
                _ => return Err(err(format!("unknown key `{k}`"))),
            }
        }
        Ok(c)
    }

    /// Loads and checks that every referenced input file is readable.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let base = path.parent().unwrap_or(Path::new("."));
        let c = Config::parse(&read(path)?, base)?;
        for p in [&c.grammar, &c.corpus, &c.weights].into_iter().flatten() {
            read(p)?;
        }
        Ok(c)
    }

    /// Grammar from file or built in; weights from file, else trained on the
    /// configured (or built-in) corpus.
    pub fn language_model(&self) -> Result<LanguageModel, ConfigError> {
        let grammar = match &self.grammar {
            Some(p) => Grammar::parse(&read(p)?)?,
            None => Grammar::builtin(),
        };
        let weights = match (&self.weights, &self.corpus) {
            (Some(p), _) => Weights::parse(&read(p)?)?,
            (None, Some(p)) => train(&Corpus::parse(&read(p)?)?, &grammar)?.0,
            (None, None) => train(&Corpus::builtin(), &grammar)?.0,
        };
        Ok(LanguageModel::new(grammar, weights))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_relative_to_base() {
        let c = Config::parse("# x\ntransit_ticks = 5\nweights = w.tsv\nseed=3\n", Path::new("/etc/sd")).unwrap();
        assert_eq!(c.agent.transit_ticks, 5);
        assert_eq!(c.agent.seed, Some(3));
        assert_eq!(c.weights.as_deref(), Some(Path::new("/etc/sd/w.tsv")));
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in ["transit_ticks = 0", "colour = blue", "no equals sign", "max_props = -1"] {
            assert!(Config::parse(bad, Path::new(".")).is_err(), "{bad}");
        }
    }

    #[test]
    fn default_language_model_trains() {
        assert!(!Config::default().language_model().unwrap().weights.is_empty());
    }
}
