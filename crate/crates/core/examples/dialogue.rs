//! Drive the dialogue state machine by hand, including execution events.

use std::sync::Arc;

use synthdialog::dialogue::{DialogueSession, ExecutionEvent};
use synthdialog::language::LanguageModel;
use synthdialog::world::{RegionId, WorldModel};

fn main() -> anyhow::Result<()> {
    let lm = Arc::new(LanguageModel::builtin()?);
    let w = WorldModel::parse(include_str!("../assets/worlds/exp3.world"))?;
    let mut s = DialogueSession::new("demo", w, lm);
    for u in ["the harmony capsule is connected to the columbus capsule", "go to the columbus capsule", "yes"] {
        s.handle_utterance(u)?;
        println!("[{}]", s.phase().name());
    }
    for r in ["harmony", "columbus"] {
        s.on_execution_event(&ExecutionEvent::Entered(RegionId::new(r)?))?;
    }
    s.on_execution_event(&ExecutionEvent::GoalReached)?;
    print!("{}", s.transcript_json_lines());
    Ok(())
}
