//! Train weights on the annotated corpus and print the heaviest features.

use synthdialog::language::{train, Corpus, Grammar};

fn main() -> anyhow::Result<()> {
    let corpus = Corpus::parse(include_str!("../assets/corpus.tsv"))?;
    let (weights, report) = train(&corpus, &Grammar::builtin())?;
    println!("{report}");
    let mut top: Vec<(&str, f64)> = weights.iter().collect();
    top.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    for (f, v) in top.iter().take(10) {
        println!("{v:>8.3}  {f}");
    }
    Ok(())
}
