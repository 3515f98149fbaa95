//! Compile a world file and a goal region into a GR(1) spec.
//!
//! cargo run --example spec -- assets/worlds/exp2.world columbus

use synthdialog::spec::navigation_spec;
use synthdialog::world::{RegionId, WorldModel};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let world = args.next().unwrap_or_else(|| "assets/worlds/iss3.world".into());
    let goal = args.next().unwrap_or_else(|| "kibo".into());
    let w = WorldModel::parse(&std::fs::read_to_string(world)?)?;
    let spec = navigation_spec(&w, &RegionId::new(goal)?)?;
    print!("{}", spec.to_text());
    Ok(())
}
