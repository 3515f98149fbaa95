pub mod language;
pub mod ltl;
pub mod spec;
pub mod world;
pub mod synth;
pub mod executor;
pub mod repair;
pub mod dialogue;
pub mod agent;
pub mod config;
pub mod persist;
pub mod scenario;
#[cfg(feature = "server")]
pub mod server;
