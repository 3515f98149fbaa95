use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use synthdialog::config::Config;
use synthdialog::language::{train, Corpus, Grammar};
use synthdialog::scenario::{replay, Scenario};
use synthdialog::spec::Gr1Spec;
use synthdialog::synth::{synthesize_with, SynthesisOutcome};
use synthdialog::world::WorldModel;

#[derive(Parser)]
#[command(name = "synthdialog", version, about = "Dialogue-driven controller synthesis for a navigating robot")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario headless and diff against its golden robot turns.
    Replay {
        scenario: PathBuf,
        /// Also print execution traces as JSON lines.
        #[arg(long)]
        traces: bool,
    },
    /// Print the symbol an utterance grounds to.
    Ground {
        utterance: String,
        #[arg(long)]
        world: PathBuf,
    },
    /// Solve a GR(1) spec file.
    Synth {
        spec: PathBuf,
        /// Controller export format.
        #[arg(long, default_value = "text", value_parser = ["text", "json", "dot"])]
        format: String,
    },
    /// Train weights on an annotated corpus.
    Train {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Start the chat service.
    #[cfg(feature = "server")]
    Serve,
}

struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

fn fail(kind: &'static str, e: impl ToString) -> Failure {
    Failure {
        kind,
        message: e.to_string(),
        code: 3,
    }
}

fn read(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| fail("io", format!("{}: {e}", p.display())))
}

fn config(cli: &Option<PathBuf>) -> Result<Config, Failure> {
    match cli {
        Some(p) => Config::load(p).map_err(|e| fail("config", e)),
        None => Ok(Config::default()),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = config(&cli.config)?;
    match cli.cmd {
        Cmd::Replay { scenario, traces } => {
            let s = Scenario::load(&scenario).map_err(|e| fail("scenario", e))?;
            let lm = Arc::new(cfg.language_model().map_err(|e| fail("language", e))?);
            let r = replay(&s, lm, cfg.agent).map_err(|e| fail("replay", e))?;
            print!("{}", r.transcript);
            if traces {
                for t in &r.traces {
                    print!("{}", t.to_json_lines());
                }
            }
            if let Some(d) = &r.diff {
                eprint!("{d}");
                return Err(Failure {
                    kind: "golden_mismatch",
                    message: format!("{} differs from its golden turns", scenario.display()),
                    code: 1,
                });
            }
            Ok(0)
        }
        Cmd::Ground { utterance, world } => {
            let w = WorldModel::parse(&read(&world)?).map_err(|e| fail("world", e))?;
            let lm = cfg.language_model().map_err(|e| fail("language", e))?;
            let (_, g) = lm.understand(&utterance, &w).map_err(|e| fail("grounding", e))?;
            println!("{}", g.true_symbol);
            Ok(0)
        }
        Cmd::Synth { spec, format } => {
            let spec = Gr1Spec::parse(&read(&spec)?).map_err(|e| fail("spec", e))?;
            match synthesize_with(&spec, cfg.agent.max_props).map_err(|e| fail("synthesis", e))? {
                SynthesisOutcome::Realizable(c) => {
                    println!("REALIZABLE");
                    match format.as_str() {
                        "json" => println!("{}", c.to_json()),
                        "dot" => print!("{}", c.to_dot()),
                        _ => print!("{}", c.to_text()),
                    }
                    Ok(0)
                }
                SynthesisOutcome::Unrealizable(d) => {
                    println!("UNREALIZABLE");
                    println!("{}", json!(d));
                    Ok(2)
                }
            }
        }
        Cmd::Train { corpus, output } => {
            let grammar = match &cfg.grammar {
                Some(p) => Grammar::parse(&read(p)?).map_err(|e| fail("grammar", e))?,
                None => Grammar::builtin(),
            };
            let corpus = Corpus::parse(&read(&corpus)?).map_err(|e| fail("corpus", e))?;
            let (w, report) = train(&corpus, &grammar).map_err(|e| fail("training", e))?;
            std::fs::write(&output, w.to_text()).map_err(|e| fail("io", e))?;
            println!("{report}");
            Ok(0)
        }
        #[cfg(feature = "server")]
        Cmd::Serve => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| fail("io", e))?;
            rt.block_on(synthdialog::server::serve(cfg)).map_err(|e| fail("server", e))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
