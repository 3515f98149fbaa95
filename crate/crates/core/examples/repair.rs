//! Walk the repair queue for an unreachable goal, answering from a hidden truth.

use synthdialog::language::{LanguageModel, NavigateAction, SymbolSpace};
use synthdialog::repair::{NextCandidate, RepairQueue};
use synthdialog::world::{RegionId, WorldModel};

fn main() -> anyhow::Result<()> {
    let lm = LanguageModel::builtin()?;
    let believed = WorldModel::parse(include_str!("../assets/worlds/exp2.world"))?
        .assert_connectivity("kibo", "harmony")?
        .0;
    let truth = believed.assert_connectivity("harmony", "columbus")?.0;
    let goal = NavigateAction {
        goal: RegionId::new("columbus")?,
    };
    let mut q = RepairQueue::start(&believed, &goal, &SymbolSpace::instantiate(&believed)?);
    loop {
        match q.next_candidate(&lm)? {
            NextCandidate::Exhausted => {
                println!("no single link helps");
                break;
            }
            NextCandidate::Candidate(c) => {
                let yes = truth.is_connected(c.relation.a().as_str(), c.relation.b().as_str())?;
                println!("robot: {}\nhuman: {}", c.query_text, if yes { "yes" } else { "no" });
                if yes {
                    let (w, ctl) = q.accept(&c)?;
                    println!("repaired world has {} links, controller {} nodes", w.connectivity().len(), ctl.nodes.len());
                    break;
                }
                q.reject(&c)?;
            }
        }
    }
    println!("synthesis calls: {}", q.synthesis_calls());
    Ok(())
}
