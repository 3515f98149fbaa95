//! Solve the navigation game before and after the missing link is known.

use synthdialog::spec::navigation_spec;
use synthdialog::synth::{synthesize, SynthesisOutcome};
use synthdialog::world::{RegionId, WorldModel};

fn main() -> anyhow::Result<()> {
    let w = WorldModel::parse(include_str!("../assets/worlds/exp2.world"))?
        .assert_connectivity("kibo", "harmony")?
        .0;
    let goal = RegionId::new("columbus")?;
    for w in [w.clone(), w.assert_connectivity("harmony", "columbus")?.0] {
        match synthesize(&navigation_spec(&w, &goal)?)? {
            SynthesisOutcome::Realizable(c) => {
                println!("realizable, {} nodes", c.nodes.len());
                for (from, to) in c.state_graph() {
                    println!("  {from} -> {}", to.into_iter().collect::<Vec<_>>().join(", "));
                }
            }
            SynthesisOutcome::Unrealizable(d) => println!("unrealizable: {d:?}"),
        }
    }
    Ok(())
}
