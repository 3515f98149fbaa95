//! Worlds are values: asserting or hypothesizing connectivity returns a new one.

use synthdialog::world::{ConnectivityRelation, WorldModel};

fn main() -> anyhow::Result<()> {
    let w = WorldModel::parse(include_str!("../assets/worlds/exp2.world"))?;
    let (known, changed) = w.assert_connectivity("kibo", "harmony")?;
    println!("changed: {changed}");
    let hypo = known.hypothesize(&ConnectivityRelation::between("harmony", "columbus")?)?;

    for (name, w) in [("believed", &known), ("hypothetical", &hypo)] {
        let k = w.to_kripke()?;
        let from = w.robot_at().expect("robot placed");
        let reach: Vec<_> = k.reachable(from).into_iter().map(|r| r.to_string()).collect();
        println!("{name}: reachable from {from}: {}", reach.join(", "));
    }
    print!("{}", hypo.to_text());
    Ok(())
}
