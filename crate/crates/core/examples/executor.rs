//! Execute a controller in the simulator, with fixed and seeded transit times.

use synthdialog::executor::{run, Simulator};
use synthdialog::spec::navigation_spec;
use synthdialog::synth::synthesize;
use synthdialog::world::{RegionId, WorldModel};

fn main() -> anyhow::Result<()> {
    let w = WorldModel::parse(include_str!("../assets/worlds/exp1.world"))?
        .assert_connectivity("kibo", "harmony")?
        .0
        .assert_connectivity("harmony", "columbus")?
        .0;
    let goal = RegionId::new("kibo")?;
    let c = synthesize(&navigation_spec(&w, &goal)?)?.controller().cloned().expect("realizable");

    let trace = run(&c, &w, &goal, &mut Simulator::new(3)?, 100)?;
    print!("{}", trace.to_json_lines());
    let seeded = run(&c, &w, &goal, &mut Simulator::seeded(5, 42)?, 100)?;
    let path: Vec<String> = seeded.regions().iter().map(|r| r.to_string()).collect();
    println!("seeded: {} in {} ticks", path.join(" -> "), seeded.ticks());
    Ok(())
}
