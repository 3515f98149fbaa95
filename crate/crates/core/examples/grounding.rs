//! Ground utterances against a three-capsule world.
//!
//! cargo run --example grounding -- "is the kibo capsule connected to the harmony capsule"

use synthdialog::language::LanguageModel;
use synthdialog::world::WorldModel;

fn main() -> anyhow::Result<()> {
    let lm = LanguageModel::builtin()?;
    let w = WorldModel::parse(include_str!("../assets/worlds/iss3.world"))?;
    let mut utterances: Vec<String> = std::env::args().skip(1).collect();
    if utterances.is_empty() {
        utterances = vec![
            "go to the columbus capsule".into(),
            "the kibo capsule is connected to the harmony capsule".into(),
            "is the harmony capsule connected to the columbus capsule?".into(),
        ];
    }
    for u in &utterances {
        let (tree, g) = lm.understand(u, &w)?;
        println!("{u}\n  {tree}\n  -> {} (score {:.3})", g.true_symbol, g.score);
    }
    Ok(())
}
