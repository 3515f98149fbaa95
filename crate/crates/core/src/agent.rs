//! Headless driver tying a dialogue session to the simulator: every
//! utterance is handled, and any resulting execution is run to completion.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::dialogue::{DialogueError, DialogueSession, ExecutionEvent, Phase, RobotMessage};
use crate::executor::{self, ExecError, Simulator, Trace, DEFAULT_TRANSIT_TICKS};
use crate::language::LanguageModel;
use crate::spec::navigation_spec;
use crate::synth::{Controller, DEFAULT_MAX_PROPS};
use crate::world::WorldModel;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct AgentOptions {
    pub transit_ticks: u32,
    pub seed: Option<u64>,
    pub max_ticks: u64,
    pub max_props: usize,
}

impl Default for AgentOptions {
    fn default() -> Self {
        Self {
            transit_ticks: DEFAULT_TRANSIT_TICKS,
            seed: None,
            max_ticks: 1000,
            max_props: DEFAULT_MAX_PROPS,
        }
    }
}

/// One entry of the ordered session event stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub payload: Value,
    pub seq: u64,
}

#[derive(Debug, Clone)]
pub struct Agent {
    session: DialogueSession,
    options: AgentOptions,
    sim: Simulator,
    initial_world: WorldModel,
    traces: Vec<Trace>,
    specs: Vec<String>,
    events: Vec<Event>,
    last_controller: Option<Controller>,
}

impl Agent {
    pub fn new(id: &str, world: WorldModel, lm: Arc<LanguageModel>, options: AgentOptions) -> Result<Self, AgentError> {
        let sim = match options.seed {
            Some(seed) => Simulator::seeded(options.transit_ticks, seed)?,
            None => Simulator::new(options.transit_ticks)?,
        };
        Ok(Self {
            session: DialogueSession::new(id, world.clone(), lm).with_max_props(options.max_props),
            options,
            sim,
            initial_world: world,
            traces: Vec::new(),
            specs: Vec::new(),
            events: Vec::new(),
            last_controller: None,
        })
    }

    pub fn session(&self) -> &DialogueSession {
        &self.session
    }

    pub fn options(&self) -> &AgentOptions {
        &self.options
    }

    pub fn initial_world(&self) -> &WorldModel {
        &self.initial_world
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    /// Serialized spec of every command that went on to execute.
    pub fn specs(&self) -> &[String] {
        &self.specs
    }

    /// The most recently executed controller.
    pub fn last_controller(&self) -> Option<&Controller> {
        self.last_controller.as_ref()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    fn emit(&mut self, kind: &'static str, payload: Value) {
        let seq = self.events.len() as u64 + 1;
        self.events.push(Event { kind, payload, seq });
    }

    fn emit_messages(&mut self, msgs: &[RobotMessage]) {
        for m in msgs {
            self.emit("robot", json!({ "kind": m.kind, "text": m.text }));
        }
    }

    /// Handles one human turn. Returns the robot messages it caused, including
    /// the arrival message when a command ran to completion.
    pub fn handle(&mut self, text: &str) -> Result<Vec<RobotMessage>, AgentError> {
        let before = self.session.phase().name();
        self.emit("human", json!({ "text": text }));
        let mut msgs = self.session.handle_utterance(text)?;
        self.emit_messages(&msgs);
        if self.session.phase().name() != before {
            self.emit("phase", json!({ "phase": self.session.phase().name() }));
        }
        if let Phase::Executing { controller, goal } = self.session.phase() {
            let (controller, goal) = (controller.clone(), goal.clone());
            self.last_controller = Some(controller.clone());
            let world = self.session.world().clone();
            if let Ok(spec) = navigation_spec(&world, &goal) {
                self.specs.push(spec.to_text());
            }
            let trace = executor::run(&controller, &world, &goal, &mut self.sim, self.options.max_ticks)?;
            for entry in &trace.entries {
                self.emit("tick", serde_json::to_value(entry).expect("trace entry serializes"));
                if let Some(r) = &entry.entered {
                    self.session.on_execution_event(&ExecutionEvent::Entered(r.clone()))?;
                }
            }
            let done = self.session.on_execution_event(&ExecutionEvent::GoalReached)?;
            self.emit_messages(&done);
            self.emit("phase", json!({ "phase": self.session.phase().name() }));
            msgs.extend(done);
            self.traces.push(trace);
        }
        Ok(msgs)
    }
}
