//! Session logs as JSON-lines: one `init` record with the starting world
//! and agent options, then one `turn` record per transcript turn.
//! Loading replays the human turns, which restores the whole session.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{Agent, AgentError, AgentOptions};
use crate::dialogue::{Speaker, Turn};
use crate::language::LanguageModel;
use crate::world::{WorldError, WorldModel};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("corrupt session log at line {line}: {msg}")]
    CorruptLog { line: usize, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum Record {
    Init {
        id: String,
        world: String,
        options: AgentOptions,
    },
    Turn {
        speaker: Speaker,
        text: String,
        t: u64,
    },
}

pub fn to_log(agent: &Agent) -> String {
    let mut out = serde_json::to_string(&Record::Init {
        id: agent.session().id.clone(),
        world: agent.initial_world().to_text(),
        options: *agent.options(),
    })
    .expect("record serializes");
    out.push('\n');
    for t in agent.session().transcript() {
        let r = Record::Turn {
            speaker: t.speaker,
            text: t.text.clone(),
            t: t.t,
        };
        out.push_str(&serde_json::to_string(&r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn from_log(text: &str, lm: Arc<LanguageModel>) -> Result<Agent, PersistError> {
    let mut agent: Option<Agent> = None;
    let mut recorded: Vec<Turn> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let corrupt = |msg: String| PersistError::CorruptLog { line: i + 1, msg };
        let rec: Record = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
        match (rec, &agent) {
            (Record::Init { id, world, options }, None) => {
                let w = WorldModel::parse(&world).map_err(|e: WorldError| corrupt(e.to_string()))?;
                agent = Some(Agent::new(&id, w, lm.clone(), options)?);
            }
            (Record::Turn { speaker, text, t }, Some(_)) => {
                if t != recorded.len() as u64 {
                    return Err(corrupt(format!("turn clock {t} out of sequence")));
                }
                recorded.push(Turn { speaker, text, t });
            }
            (Record::Init { .. }, Some(_)) => return Err(corrupt("second init record".into())),
            (Record::Turn { .. }, None) => return Err(corrupt("turn before init record".into())),
        }
    }
    let mut agent = agent.ok_or(PersistError::CorruptLog {
        line: 1,
        msg: "missing init record".into(),
    })?;
    for t in recorded.iter().filter(|t| t.speaker == Speaker::Human) {
        agent.handle(&t.text)?;
    }
    if agent.session().transcript() != recorded.as_slice() {
        let at = agent
            .session()
            .transcript()
            .iter()
            .zip(&recorded)
            .position(|(a, b)| a != b)
            .unwrap_or(recorded.len().min(agent.session().transcript().len()));
        return Err(PersistError::CorruptLog {
            line: at + 2,
            msg: "recorded turn does not match replay".into(),
        });
    }
    Ok(agent)
}

pub fn save(agent: &Agent, path: &Path) -> Result<(), PersistError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, to_log(agent))?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load(path: &Path, lm: Arc<LanguageModel>) -> Result<Agent, PersistError> {
    from_log(&std::fs::read_to_string(path)?, lm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent() -> Agent {
        let w = WorldModel::from_parts(&["kibo", "columbus", "harmony"], &[], "kibo").unwrap();
        let mut a = Agent::new("s1", w, Arc::new(LanguageModel::builtin().unwrap()), AgentOptions::default()).unwrap();
        for u in ["the kibo capsule is connected to the harmony capsule", "go to the columbus capsule", "no", "yes"] {
            a.handle(u).unwrap();
        }
        a
    }

    #[test]
    fn write_load_round_trip() {
        let a = agent();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s1.jsonl");
        save(&a, &p).unwrap();
        let b = load(&p, Arc::new(LanguageModel::builtin().unwrap())).unwrap();
        assert_eq!(b.session().transcript(), a.session().transcript());
        assert_eq!(b.session().world(), a.session().world());
    }

    #[test]
    fn truncated_line_is_named() {
        let log = to_log(&agent());
        let cut = &log[..log.len() - 10];
        let n = cut.lines().count();
        match from_log(cut, Arc::new(LanguageModel::builtin().unwrap())) {
            Err(PersistError::CorruptLog { line, .. }) => assert_eq!(line, n),
            other => panic!("{other:?}"),
        }
    }
}
