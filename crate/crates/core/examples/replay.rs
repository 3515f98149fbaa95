//! Replay every bundled scenario and report golden agreement.

use std::path::Path;
use std::sync::Arc;

use synthdialog::agent::AgentOptions;
use synthdialog::language::LanguageModel;
use synthdialog::scenario::{replay, Scenario};

fn main() -> anyhow::Result<()> {
    let lm = Arc::new(LanguageModel::builtin()?);
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        let s = Scenario::load(&p)?;
        let r = replay(&s, lm.clone(), AgentOptions::default())?;
        let status = if r.matches_golden() { "ok" } else { "MISMATCH" };
        println!("{}: {status}, {} synthesis calls", p.display(), r.agent.session().synthesis_calls());
        if let Some(d) = r.diff {
            print!("{d}");
        }
    }
    Ok(())
}
