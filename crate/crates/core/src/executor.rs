//! Discrete free-flyer simulator and the controller execution loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::{input_prop, INPUT_PREFIX, OUTPUT_PREFIX};
use crate::synth::{Controller, ControllerNode};
use crate::world::{RegionId, WorldError, WorldModel};

pub const DEFAULT_TRANSIT_TICKS: u32 = 3;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("illegal command: {from} is not connected to {to}")]
    IllegalCommand { from: RegionId, to: RegionId },
    #[error("goal not reached within {0} ticks")]
    Timeout(u64),
    #[error("controller has no state for {0}")]
    NoControllerState(String),
    #[error("controller has no response to input {input} in state {state}")]
    NoTransition { state: String, input: String },
    #[error("transit ticks must be at least 1")]
    BadTransitTicks,
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transit {
    pub target: RegionId,
    pub remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimState {
    pub location: RegionId,
    pub transit: Option<Transit>,
    pub tick: u64,
}

impl SimState {
    pub fn at(location: RegionId) -> Self {
        Self {
            location,
            transit: None,
            tick: 0,
        }
    }
}

/// Moves take a fixed number of ticks, or with a seed a random number of
/// ticks in `[1, transit_ticks]` per leg.
#[derive(Debug, Clone)]
pub struct Simulator {
    transit_ticks: u32,
    rng: Option<ChaCha8Rng>,
}

impl Simulator {
    pub fn new(transit_ticks: u32) -> Result<Self, ExecError> {
        if transit_ticks == 0 {
            return Err(ExecError::BadTransitTicks);
        }
        Ok(Self { transit_ticks, rng: None })
    }

    pub fn seeded(transit_ticks: u32, seed: u64) -> Result<Self, ExecError> {
        let mut s = Self::new(transit_ticks)?;
        s.rng = Some(ChaCha8Rng::seed_from_u64(seed));
        Ok(s)
    }

    fn leg_ticks(&mut self) -> u32 {
        match &mut self.rng {
            Some(rng) => rng.random_range(1..=self.transit_ticks),
            None => self.transit_ticks,
        }
    }

    /// Advances one tick under `commanded`; returns the region entered, if any.
    pub fn step(
        &mut self,
        sim: &SimState,
        commanded: &RegionId,
        w: &WorldModel,
    ) -> Result<(SimState, Option<RegionId>), ExecError> {
        let mut next = sim.clone();
        next.tick += 1;
        if commanded == &sim.location {
            next.transit = None;
            return Ok((next, None));
        }
        if !w.is_connected(sim.location.as_str(), commanded.as_str())? {
            return Err(ExecError::IllegalCommand {
                from: sim.location.clone(),
                to: commanded.clone(),
            });
        }
        let remaining = match &sim.transit {
            Some(t) if &t.target == commanded => t.remaining,
            _ => self.leg_ticks(),
        } - 1;
        if remaining == 0 {
            next.location = commanded.clone();
            next.transit = None;
            Ok((next, Some(commanded.clone())))
        } else {
            next.transit = Some(Transit {
                target: commanded.clone(),
                remaining,
            });
            Ok((next, None))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub location: RegionId,
    pub commanded: RegionId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entered: Option<RegionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    /// Regions occupied, starting location first, without repeats.
    pub fn regions(&self) -> Vec<RegionId> {
        let mut out: Vec<RegionId> = self.entries.first().map(|e| e.location.clone()).into_iter().collect();
        out.extend(self.entries.iter().filter_map(|e| e.entered.clone()));
        out
    }

    pub fn ticks(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.tick)
    }

    /// One JSON object per tick.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace entry serializes") + "\n")
            .collect()
    }
}

fn region_of(atoms: &[String], prefix: &str) -> Option<RegionId> {
    match atoms {
        [a] => a.strip_prefix(prefix).and_then(|r| RegionId::new(r).ok()),
        _ => None,
    }
}

fn commanded(node: &ControllerNode) -> Option<RegionId> {
    region_of(&node.outputs, OUTPUT_PREFIX)
}

/// Runs `c` from the robot's current location until it rests at `goal`.
/// Entry 0 is the starting state; each later entry is one tick.
pub fn run(
    c: &Controller,
    w: &WorldModel,
    goal: &RegionId,
    sim: &mut Simulator,
    max_ticks: u64,
) -> Result<Trace, ExecError> {
    let start = w.robot_at().ok_or(WorldError::EmptyWorld)?.clone();
    let sensed = vec![input_prop(start.as_str())];
    let mut node = c
        .find_initial(&sensed)
        .or_else(|| {
            (0..c.nodes.len()).find(|&i| c.nodes[i].inputs == sensed && commanded(&c.nodes[i]).as_ref() == Some(&start))
        })
        .ok_or_else(|| ExecError::NoControllerState(sensed[0].clone()))?;
    let mut state = SimState::at(start);
    let go = |n: usize| commanded(&c.nodes[n]).ok_or_else(|| ExecError::NoControllerState(c.nodes[n].label()));
    let at_goal = |n: usize, s: &SimState| &s.location == goal && go(n).is_ok_and(|g| &g == goal);
    let mut entries = vec![TraceEntry {
        tick: 0,
        location: state.location.clone(),
        commanded: go(node)?,
        entered: None,
    }];
    while !at_goal(node, &state) {
        if state.tick >= max_ticks {
            return Err(ExecError::Timeout(max_ticks));
        }
        let (next, entered) = sim.step(&state, &go(node)?, w)?;
        state = next;
        let input = vec![input_prop(state.location.as_str())];
        node = c.step(node, &input).ok_or_else(|| ExecError::NoTransition {
            state: c.nodes[node].label(),
            input: input[0].clone(),
        })?;
        debug_assert_eq!(region_of(&c.nodes[node].inputs, INPUT_PREFIX).as_ref(), Some(&state.location));
        entries.push(TraceEntry {
            tick: state.tick,
            location: state.location.clone(),
            commanded: go(node)?,
            entered,
        });
    }
    Ok(Trace { entries })
}
