//! Independently check a synthesized controller, then break it and check again.

use synthdialog::spec::Gr1Spec;
use synthdialog::synth::{check_controller, synthesize};

fn main() -> anyhow::Result<()> {
    let spec = Gr1Spec::parse(include_str!("../assets/specs/exp1.spec"))?;
    let c = synthesize(&spec)?.controller().cloned().expect("exp1 is realizable");
    println!("{:?}", check_controller(&c, &spec, 32)?);

    let mut broken = c.clone();
    broken.edges.retain(|e| e.from != e.to);
    match check_controller(&broken, &spec, 32) {
        Ok(_) => println!("broken controller unexpectedly passed"),
        Err(e) => println!("broken controller rejected: {e}"),
    }
    Ok(())
}
