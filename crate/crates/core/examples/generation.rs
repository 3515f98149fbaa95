//! Render yes/no questions for every connectivity relation and ground them back.

use synthdialog::language::{LanguageModel, SemanticSymbol, SymbolSpace};
use synthdialog::world::WorldModel;

fn main() -> anyhow::Result<()> {
    let lm = LanguageModel::builtin()?;
    let w = WorldModel::parse(include_str!("../assets/worlds/exp3.world"))?
        .assert_connectivity("harmony", "columbus")?
        .0;
    let space = SymbolSpace::instantiate(&w)?;
    for rel in space.connectivity_relations() {
        let target = SemanticSymbol::ConnectivityRelation(rel.clone());
        let q = lm.query(&target, &w)?;
        let (_, back) = lm.understand(&q, &w)?;
        println!("{target}: {q}  [round trip {}]", if back.true_symbol == target { "ok" } else { "FAILED" });
    }
    Ok(())
}
