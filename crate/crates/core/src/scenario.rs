//! Scenario files: a world reference followed by human (`H:`) and, as a
//! golden, robot (`R:`) turns.
//!
//! ```text
//! world: ../worlds/exp2.world
//! H: the kibo capsule is connected to the harmony capsule
//! R: declarative knowledge received and processed
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use similar::TextDiff;
use thiserror::Error;

use crate::agent::{Agent, AgentError, AgentOptions};
use crate::config::{read, ConfigError};
use crate::dialogue::Speaker;
use crate::executor::Trace;
use crate::language::LanguageModel;
use crate::world::{WorldError, WorldModel};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] ConfigError),
    #[error("world file: {0}")]
    World(#[from] WorldError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// The path as written in the header.
    pub world_ref: String,
    pub world: WorldModel,
    pub turns: Vec<(Speaker, String)>,
}

impl Scenario {
    /// Parses scenario text; `load_world` resolves the header's path.
    pub fn parse(
        text: &str,
        load_world: impl FnOnce(&str) -> Result<WorldModel, ScenarioError>,
    ) -> Result<Scenario, ScenarioError> {
        let mut world_ref = None;
        let mut turns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ScenarioError::Syntax {
                line: i + 1,
                msg: msg.to_string(),
            };
            if let Some(p) = line.strip_prefix("world:") {
                if world_ref.is_some() || !turns.is_empty() {
                    return Err(err("`world:` must be the single first record"));
                }
                world_ref = Some(p.trim().to_string());
            } else if let Some(t) = line.strip_prefix("H:") {
                turns.push((Speaker::Human, t.trim().to_string()));
            } else if let Some(t) = line.strip_prefix("R:") {
                turns.push((Speaker::Robot, t.trim().to_string()));
            } else {
                return Err(err("expected `world:`, `H:` or `R:`"));
            }
            if world_ref.is_none() {
                return Err(err("missing `world:` header"));
            }
        }
        let world_ref = world_ref.ok_or(ScenarioError::Syntax {
            line: 0,
            msg: "missing `world:` header".into(),
        })?;
        if !turns.iter().any(|(s, _)| *s == Speaker::Human) {
            return Err(ScenarioError::Syntax {
                line: 0,
                msg: "no human turns".into(),
            });
        }
        let world = load_world(&world_ref)?;
        Ok(Scenario { world_ref, world, turns })
    }

    /// Reads a scenario file; the world path is relative to its directory.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Scenario::parse(&read(path)?, |w| Ok(WorldModel::parse(&read(&base.join(w))?)?))
    }

    pub fn human_turns(&self) -> impl Iterator<Item = &str> {
        self.turns.iter().filter(|(s, _)| *s == Speaker::Human).map(|(_, t)| t.as_str())
    }

    pub fn has_golden(&self) -> bool {
        self.turns.iter().any(|(s, _)| *s == Speaker::Robot)
    }

    pub fn to_text(&self) -> String {
        render(&self.world_ref, self.turns.iter().map(|(s, t)| (*s, t.as_str())))
    }
}

fn render<'a>(world_ref: &str, turns: impl Iterator<Item = (Speaker, &'a str)>) -> String {
    let mut out = format!("world: {world_ref}\n");
    for (s, t) in turns {
        let tag = match s {
            Speaker::Human => "H",
            Speaker::Robot => "R",
        };
        out.push_str(&format!("{tag}: {t}\n"));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    /// The produced transcript in scenario format.
    pub transcript: String,
    pub traces: Vec<Trace>,
    pub specs: Vec<String>,
    /// Unified diff against the golden turns, when they differ.
    pub diff: Option<String>,
    pub agent: Agent,
}

impl ReplayReport {
    pub fn matches_golden(&self) -> bool {
        self.diff.is_none()
    }
}

/// Feeds every human turn through a fresh agent and compares the resulting
/// transcript with the scenario's golden robot turns, if it has any.
pub fn replay(s: &Scenario, lm: Arc<LanguageModel>, options: AgentOptions) -> Result<ReplayReport, ScenarioError> {
    let mut agent = Agent::new("replay", s.world.clone(), lm, options)?;
    for h in s.human_turns() {
        agent.handle(h)?;
    }
    let transcript = render(
        &s.world_ref,
        agent.session().transcript().iter().map(|t| (t.speaker, t.text.as_str())),
    );
    let expected = s.to_text();
    let diff = (s.has_golden() && expected != transcript).then(|| {
        TextDiff::from_lines(&expected, &transcript)
            .unified_diff()
            .header("golden", "replay")
            .to_string()
    });
    Ok(ReplayReport {
        transcript,
        traces: agent.traces().to_vec(),
        specs: agent.specs().to_vec(),
        diff,
        agent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(_: &str) -> Result<WorldModel, ScenarioError> {
        Ok(WorldModel::from_parts(&["kibo", "harmony"], &[], "kibo")?)
    }

    #[test]
    fn parse_and_render() {
        let text = "world: w.world\n# c\nH: go to the kibo capsule\nR: navigating to the kibo capsule\n";
        let s = Scenario::parse(text, world).unwrap();
        assert_eq!(s.to_text(), text.replace("# c\n", ""));
        assert!(s.has_golden());
    }

    #[test]
    fn syntax_errors() {
        assert!(Scenario::parse("H: hi\n", world).is_err());
        assert!(Scenario::parse("world: a\nworld: b\nH: x\n", world).is_err());
        assert!(Scenario::parse("world: a\nQ: x\n", world).is_err());
        assert!(Scenario::parse("world: a\nR: x\n", world).is_err());
    }

    #[test]
    fn golden_mismatch_yields_diff() {
        let lm = Arc::new(LanguageModel::builtin().unwrap());
        let s = Scenario::parse("world: w\nH: go to the kibo capsule\nR: wrong\n", world).unwrap();
        let r = replay(&s, lm.clone(), AgentOptions::default()).unwrap();
        let diff = r.diff.unwrap();
        assert!(diff.contains("-R: wrong"), "{diff}");
        assert!(diff.contains("+R: navigating to the kibo capsule"), "{diff}");
        let ok = Scenario::parse(&r.transcript, world).unwrap();
        assert!(replay(&ok, lm, AgentOptions::default()).unwrap().matches_golden());
    }
}
