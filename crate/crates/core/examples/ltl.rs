//! Parse, print, expand and evaluate transition formulas.

use std::collections::BTreeMap;

use synthdialog::ltl::{Ltl, Valuation};

struct Step {
    now: BTreeMap<&'static str, bool>,
    then: BTreeMap<&'static str, bool>,
}

impl Valuation for Step {
    fn current(&self, atom: &str) -> Option<bool> {
        self.now.get(atom).copied()
    }
    fn next(&self, atom: &str) -> Option<bool> {
        self.then.get(atom).copied()
    }
}

fn main() -> anyhow::Result<()> {
    let f = Ltl::parse("in_kibo & go_harmony -> X in_kibo | X in_harmony")?;
    println!("{f}");
    println!("primitive form: {}", f.expand());

    let step = Step {
        now: [("in_kibo", true), ("go_harmony", true), ("in_harmony", false)].into(),
        then: [("in_kibo", false), ("in_harmony", true)].into(),
    };
    println!("holds on kibo -> harmony: {}", f.eval(&step)?);
    println!("G F in_kibo parses as {}", Ltl::parse("G F in_kibo")?);
    Ok(())
}
