//! Dialogue state machine: routes grounded utterances to the world model,
//! synthesis, repair queries, and execution.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::{classify_reply, normalize, LanguageModel, NavigateAction, Reply, SemanticSymbol, SymbolSpace};
use crate::repair::{NextCandidate, RepairCandidate, RepairError, RepairQueue};
use crate::spec::{build_spec, SpecError};
use crate::synth::{synthesize_with, Controller, SynthError, SynthesisOutcome, DEFAULT_MAX_PROPS};
use crate::world::{RegionId, WorldError, WorldModel};

pub const ACK: &str = "declarative knowledge received and processed";
pub const NO_PENDING_QUESTION: &str = "there is no pending question";

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("execution event `{0}` while not executing")]
    IllegalEvent(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Human,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    /// Logical clock: the turn's position in the transcript.
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Ack,
    Query,
    Answer,
    Navigating,
    Arrived,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotMessage {
    pub kind: MessageKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecutionEvent {
    Entered(RegionId),
    GoalReached,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Idle,
    AwaitingAnswer {
        queue: RepairQueue,
        candidate: RepairCandidate,
        command: String,
    },
    Executing {
        controller: Controller,
        goal: RegionId,
    },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "Idle",
            Phase::AwaitingAnswer { .. } => "AwaitingAnswer",
            Phase::Executing { .. } => "Executing",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DialogueSession {
    pub id: String,
    world: WorldModel,
    lm: Arc<LanguageModel>,
    phase: Phase,
    transcript: Vec<Turn>,
    synthesis_calls: usize,
    max_props: usize,
}

fn capsule(r: &RegionId) -> String {
    format!("the {r} capsule")
}

impl DialogueSession {
    pub fn new(id: &str, world: WorldModel, lm: Arc<LanguageModel>) -> Self {
        Self {
            id: id.to_string(),
            world,
            lm,
            phase: Phase::Idle,
            transcript: Vec::new(),
            synthesis_calls: 0,
            max_props: DEFAULT_MAX_PROPS,
        }
    }

    pub fn with_max_props(mut self, max_props: usize) -> Self {
        self.max_props = max_props;
        self
    }

    pub fn world(&self) -> &WorldModel {
        &self.world
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn transcript(&self) -> &[Turn] {
        &self.transcript
    }

    pub fn language(&self) -> &LanguageModel {
        &self.lm
    }

    /// Synthesis runs so far, hypothetical ones included.
    pub fn synthesis_calls(&self) -> usize {
        self.synthesis_calls
    }

    /// The controller being executed, if any.
    pub fn controller(&self) -> Option<&Controller> {
        match &self.phase {
            Phase::Executing { controller, .. } => Some(controller),
            _ => None,
        }
    }

    pub fn pending_query(&self) -> Option<&str> {
        match &self.phase {
            Phase::AwaitingAnswer { candidate, .. } => Some(&candidate.query_text),
            _ => None,
        }
    }

    fn push(&mut self, speaker: Speaker, text: &str) {
        let t = self.transcript.len() as u64;
        self.transcript.push(Turn {
            speaker,
            text: text.to_string(),
            t,
        });
    }

    fn say(&mut self, out: &mut Vec<RobotMessage>, kind: MessageKind, text: String) {
        self.push(Speaker::Robot, &text);
        out.push(RobotMessage { kind, text });
    }

    pub fn handle_utterance(&mut self, text: &str) -> Result<Vec<RobotMessage>, DialogueError> {
        self.push(Speaker::Human, text);
        let mut out = Vec::new();
        if let Phase::AwaitingAnswer { .. } = self.phase {
            self.answer(classify_reply(text), &mut out)?;
            return Ok(out);
        }
        if classify_reply(text) != Reply::NotAReply {
            self.say(&mut out, MessageKind::Failure, NO_PENDING_QUESTION.into());
            return Ok(out);
        }
        let not_understood = |s: &mut Self, out: &mut Vec<RobotMessage>| {
            s.say(out, MessageKind::Failure, format!("i did not understand: {text}"));
        };
        let Ok((tree, grounding)) = self.lm.understand(text, &self.world) else {
            not_understood(self, &mut out);
            return Ok(out);
        };
        match (tree.label(), &grounding.true_symbol) {
            ("S", SemanticSymbol::ConnectivityRelation(rel)) => {
                self.world = self.world.assert_connectivity(rel.a().as_str(), rel.b().as_str())?.0;
                self.say(&mut out, MessageKind::Ack, ACK.into());
            }
            ("SQ", SemanticSymbol::ConnectivityRelation(rel)) => {
                let yes = self.world.connectivity().contains(rel);
                self.say(&mut out, MessageKind::Answer, if yes { "yes" } else { "no" }.into());
            }
            ("VP", SemanticSymbol::Action(action)) => {
                let action = action.clone();
                self.command(&action, &normalize(text), &mut out)?;
            }
            _ => not_understood(self, &mut out),
        }
        Ok(out)
    }

    fn command(&mut self, action: &NavigateAction, command: &str, out: &mut Vec<RobotMessage>) -> Result<(), DialogueError> {
        // a new command preempts whatever was running
        self.phase = Phase::Idle;
        let spec = build_spec(&self.world, &SemanticSymbol::Action(action.clone()))?;
        self.synthesis_calls += 1;
        match synthesize_with(&spec, self.max_props)? {
            SynthesisOutcome::Realizable(controller) => self.execute(controller, action.goal.clone(), out),
            SynthesisOutcome::Unrealizable(_) => {
                let space = SymbolSpace::instantiate(&self.world).map_err(RepairError::Language)?;
                let queue = RepairQueue::start(&self.world, action, &space).with_max_props(self.max_props);
                self.advance(queue, command.to_string(), out)?;
            }
        }
        Ok(())
    }

    fn execute(&mut self, controller: Controller, goal: RegionId, out: &mut Vec<RobotMessage>) {
        self.say(out, MessageKind::Navigating, format!("navigating to {}", capsule(&goal)));
        self.phase = Phase::Executing { controller, goal };
    }

    fn advance(&mut self, mut queue: RepairQueue, command: String, out: &mut Vec<RobotMessage>) -> Result<(), DialogueError> {
        let before = queue.synthesis_calls();
        let next = queue.next_candidate(&self.lm)?;
        self.synthesis_calls += queue.synthesis_calls() - before;
        match next {
            NextCandidate::Candidate(candidate) => {
                self.say(out, MessageKind::Query, candidate.query_text.clone());
                self.phase = Phase::AwaitingAnswer {
                    queue,
                    candidate,
                    command,
                };
            }
            NextCandidate::Exhausted => {
                self.phase = Phase::Idle;
                self.say(
                    out,
                    MessageKind::Failure,
                    format!("i cannot find a connectivity change that makes '{command}' achievable"),
                );
            }
        }
        Ok(())
    }

    fn answer(&mut self, reply: Reply, out: &mut Vec<RobotMessage>) -> Result<(), DialogueError> {
        let Phase::AwaitingAnswer {
            mut queue,
            candidate,
            command,
        } = std::mem::replace(&mut self.phase, Phase::Idle)
        else {
            unreachable!("checked by caller");
        };
        match reply {
            Reply::Yes => {
                let (world, controller) = queue.accept(&candidate)?;
                self.world = world;
                self.execute(controller, queue.goal().goal.clone(), out);
            }
            Reply::No => {
                queue.reject(&candidate)?;
                self.advance(queue, command, out)?;
            }
            Reply::NotAReply => {
                self.say(out, MessageKind::Query, candidate.query_text.clone());
                self.phase = Phase::AwaitingAnswer {
                    queue,
                    candidate,
                    command,
                };
            }
        }
        Ok(())
    }

    pub fn on_execution_event(&mut self, event: &ExecutionEvent) -> Result<Vec<RobotMessage>, DialogueError> {
        let Phase::Executing { goal, .. } = &self.phase else {
            return Err(DialogueError::IllegalEvent(format!("{event:?}")));
        };
        let goal = goal.clone();
        let mut out = Vec::new();
        match event {
            ExecutionEvent::Entered(r) => self.world = self.world.set_robot_location(r.as_str())?,
            ExecutionEvent::GoalReached => {
                self.world = self.world.set_robot_location(goal.as_str())?;
                self.phase = Phase::Idle;
                self.say(&mut out, MessageKind::Arrived, format!("arrived at {}", capsule(&goal)));
            }
        }
        Ok(out)
    }

    /// Transcript as JSON-lines `{speaker, text, t}`.
    pub fn transcript_json_lines(&self) -> String {
        self.transcript
            .iter()
            .map(|t| serde_json::to_string(t).expect("turn serializes") + "\n")
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(edges: &[(&str, &str)], robot: &str, order: &[&str]) -> DialogueSession {
        let w = WorldModel::from_parts(order, edges, robot).unwrap();
        DialogueSession::new("t", w, Arc::new(LanguageModel::builtin().unwrap()))
    }

    fn texts(m: &[RobotMessage]) -> Vec<&str> {
        m.iter().map(|m| m.text.as_str()).collect()
    }

    #[test]
    fn declaratives_then_command() {
        let mut s = session(&[], "columbus", &["kibo", "harmony", "columbus"]);
        let a = s.handle_utterance("the Kibo capsule is connected to the Harmony capsule").unwrap();
        assert_eq!(texts(&a), [ACK]);
        s.handle_utterance("the Harmony capsule is connected to the Columbus capsule").unwrap();
        let m = s.handle_utterance("go to the Kibo capsule").unwrap();
        assert_eq!(texts(&m), ["navigating to the kibo capsule"]);
        assert_eq!(s.phase().name(), "Executing");
        assert_eq!(s.synthesis_calls(), 1);
    }

    #[test]
    fn repair_dialogue() {
        let mut s = session(&[], "kibo", &["kibo", "columbus", "harmony"]);
        s.handle_utterance("the kibo capsule is connected to the harmony capsule").unwrap();
        let q1 = s.handle_utterance("go to the Columbus capsule").unwrap();
        assert_eq!(texts(&q1), ["is the kibo capsule connected to the columbus capsule?"]);
        let world_before = s.world().clone();
        let again = s.handle_utterance("maybe").unwrap();
        assert_eq!(texts(&again), texts(&q1));
        let again = s.handle_utterance("the kibo capsule is connected to the columbus capsule").unwrap();
        assert_eq!(texts(&again), texts(&q1));
        assert_eq!(s.world(), &world_before);
        let q2 = s.handle_utterance("no").unwrap();
        assert_eq!(texts(&q2), ["is the harmony capsule connected to the columbus capsule?"]);
        let go = s.handle_utterance("yes").unwrap();
        assert_eq!(texts(&go), ["navigating to the columbus capsule"]);
        assert!(s.world().is_connected("harmony", "columbus").unwrap());
        assert_eq!(s.synthesis_calls(), 3);
        s.on_execution_event(&ExecutionEvent::Entered("harmony".parse().unwrap())).unwrap();
        assert_eq!(s.world().robot_at().unwrap(), "harmony");
        let done = s.on_execution_event(&ExecutionEvent::GoalReached).unwrap();
        assert_eq!(texts(&done), ["arrived at the columbus capsule"]);
        assert!(matches!(
            s.on_execution_event(&ExecutionEvent::GoalReached),
            Err(DialogueError::IllegalEvent(_))
        ));
    }

    #[test]
    fn exhausted_and_misc() {
        let mut s = session(&[], "kibo", &["kibo", "harmony", "columbus"]);
        let q = s.handle_utterance("go to the columbus capsule").unwrap();
        assert_eq!(texts(&q), ["is the kibo capsule connected to the columbus capsule?"]);
        // the other single-link worlds leave columbus out of reach
        let m = s.handle_utterance("no").unwrap();
        assert_eq!(texts(&m), ["i cannot find a connectivity change that makes 'go to the columbus capsule' achievable"]);
        assert_eq!(s.phase().name(), "Idle");
        assert_eq!(texts(&s.handle_utterance("yes").unwrap()), [NO_PENDING_QUESTION]);
        assert_eq!(
            texts(&s.handle_utterance("fly toward the airlock").unwrap()),
            ["i did not understand: fly toward the airlock"]
        );
        assert_eq!(texts(&s.handle_utterance("is the kibo capsule connected to the harmony capsule").unwrap()), ["no"]);
        let t = s.transcript();
        assert!(t.windows(2).all(|w| w[1].t == w[0].t + 1));
        assert_eq!(s.transcript_json_lines().lines().count(), t.len());
    }
}
