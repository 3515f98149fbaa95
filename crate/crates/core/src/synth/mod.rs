//! Explicit-state GR(1) synthesis.

mod check;
mod fixpoint;
mod game;
mod strategy;

use serde::Serialize;
use thiserror::Error;

use crate::spec::{Gr1Spec, SpecError};

pub use check::{check_controller, CheckReport};
pub use fixpoint::{solve, winning_region, Fixpoint};
pub use game::{build_game, build_game_with, Game, DEFAULT_MAX_PROPS};
pub use strategy::{Controller, ControllerEdge, ControllerNode};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{props} propositions exceed the explicit-state limit of {limit}")]
    StateSpaceTooLarge { props: usize, limit: usize },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("formula outside the GR(1) fragment: {0}")]
    Fragment(String),
    #[error("verification failed: {reason} (trace: {})", trace.join(" -> "))]
    VerificationFailure { reason: String, trace: Vec<String> },
    #[error("malformed controller: {0}")]
    BadController(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Labels of permissible initial states outside the winning region.
    pub losing_initial_states: Vec<String>,
    /// Size of the goal-reaching region per system goal.
    pub goal_region_sizes: Vec<usize>,
    pub winning_states: usize,
    pub total_states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisOutcome {
    Realizable(Controller),
    Unrealizable(Diagnostics),
}

impl SynthesisOutcome {
    pub fn is_realizable(&self) -> bool {
        matches!(self, SynthesisOutcome::Realizable(_))
    }

    pub fn controller(&self) -> Option<&Controller> {
        match self {
            SynthesisOutcome::Realizable(c) => Some(c),
            SynthesisOutcome::Unrealizable(_) => None,
        }
    }
}

/// Realizable only when every permissible initial state is winning.
pub fn synthesize(spec: &Gr1Spec) -> Result<SynthesisOutcome, SynthError> {
    synthesize_with(spec, DEFAULT_MAX_PROPS)
}

pub fn synthesize_with(spec: &Gr1Spec, max_props: usize) -> Result<SynthesisOutcome, SynthError> {
    let g = build_game_with(spec, max_props)?;
    Ok(synthesize_game(&g))
}

pub fn synthesize_game(g: &Game) -> SynthesisOutcome {
    let fp = solve(g);
    let losing: Vec<String> = g
        .initial()
        .iter()
        .filter(|&&s| !fp.z.contains(s))
        .map(|&s| g.label(s))
        .collect();
    if losing.is_empty() && !g.initial().is_empty() {
        SynthesisOutcome::Realizable(strategy::extract(g, &fp))
    } else {
        SynthesisOutcome::Unrealizable(Diagnostics {
            losing_initial_states: losing,
            goal_region_sizes: fp.y.iter().map(|y| y.last().map_or(0, |s| s.count_ones(..))).collect(),
            winning_states: fp.z.count_ones(..),
            total_states: g.num_states(),
        })
    }
}
