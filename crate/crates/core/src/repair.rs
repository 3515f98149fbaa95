//! Hypothetical-world repair: try each missing connectivity relation in
//! symbol-space order and surface the first one that makes the command
//! realizable.

use thiserror::Error;

use crate::language::{LanguageError, LanguageModel, NavigateAction, SemanticSymbol, SymbolSpace};
use crate::spec::{navigation_spec, SpecError};
use crate::synth::{synthesize_with, Controller, SynthError, SynthesisOutcome, DEFAULT_MAX_PROPS};
use crate::world::{ConnectivityRelation, WorldError, WorldModel};

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("candidate {0} is not the one awaiting an answer")]
    StaleCandidate(ConnectivityRelation),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Language(#[from] LanguageError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairCandidate {
    pub relation: ConnectivityRelation,
    pub hypothetical_world: WorldModel,
    pub controller: Controller,
    pub query_text: String,
    position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextCandidate {
    Candidate(RepairCandidate),
    Exhausted,
}

/// What happened to each relation the queue looked at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AlreadyKnown,
    Unrealizable,
    Realizable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairQueue {
    candidates: Vec<ConnectivityRelation>,
    cursor: usize,
    origin: WorldModel,
    goal: NavigateAction,
    pending: Option<usize>,
    synthesis_calls: usize,
    max_props: usize,
    log: Vec<(ConnectivityRelation, Verdict)>,
}

impl RepairQueue {
    pub fn start(w: &WorldModel, goal: &NavigateAction, space: &SymbolSpace) -> RepairQueue {
        RepairQueue {
            candidates: space.connectivity_relations().cloned().collect(),
            cursor: 0,
            origin: w.clone(),
            goal: goal.clone(),
            pending: None,
            synthesis_calls: 0,
            max_props: DEFAULT_MAX_PROPS,
            log: Vec::new(),
        }
    }

    pub fn with_max_props(mut self, max_props: usize) -> Self {
        self.max_props = max_props;
        self
    }

    pub fn candidates(&self) -> &[ConnectivityRelation] {
        &self.candidates
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn origin(&self) -> &WorldModel {
        &self.origin
    }

    pub fn goal(&self) -> &NavigateAction {
        &self.goal
    }

    pub fn synthesis_calls(&self) -> usize {
        self.synthesis_calls
    }

    pub fn log(&self) -> &[(ConnectivityRelation, Verdict)] {
        &self.log
    }

    pub fn next_candidate(&mut self, lm: &LanguageModel) -> Result<NextCandidate, RepairError> {
        self.pending = None;
        while self.cursor < self.candidates.len() {
            let position = self.cursor;
            let rel = self.candidates[position].clone();
            self.cursor += 1;
            if self.origin.connectivity().contains(&rel) {
                self.log.push((rel, Verdict::AlreadyKnown));
                continue;
            }
            let world = self.origin.hypothesize(&rel)?;
            let spec = navigation_spec(&world, &self.goal.goal)?;
            self.synthesis_calls += 1;
            match synthesize_with(&spec, self.max_props)? {
                SynthesisOutcome::Unrealizable(_) => self.log.push((rel, Verdict::Unrealizable)),
                SynthesisOutcome::Realizable(controller) => {
                    self.log.push((rel.clone(), Verdict::Realizable));
                    let query_text = lm.query(&SemanticSymbol::ConnectivityRelation(rel.clone()), &self.origin)?;
                    self.pending = Some(position);
                    return Ok(NextCandidate::Candidate(RepairCandidate {
                        relation: rel,
                        hypothetical_world: world,
                        controller,
                        query_text,
                        position,
                    }));
                }
            }
        }
        Ok(NextCandidate::Exhausted)
    }

    fn take_pending(&mut self, cand: &RepairCandidate) -> Result<(), RepairError> {
        if self.pending != Some(cand.position) || self.candidates.get(cand.position) != Some(&cand.relation) {
            return Err(RepairError::StaleCandidate(cand.relation.clone()));
        }
        self.pending = None;
        Ok(())
    }

    /// The hypothetical world becomes actual; its controller is reused.
    pub fn accept(&mut self, cand: &RepairCandidate) -> Result<(WorldModel, Controller), RepairError> {
        self.take_pending(cand)?;
        Ok((cand.hypothetical_world.clone(), cand.controller.clone()))
    }

    pub fn reject(&mut self, cand: &RepairCandidate) -> Result<(), RepairError> {
        self.take_pending(cand)
    }
}
