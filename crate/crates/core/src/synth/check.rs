//! Independent verification of a controller against its specification.
//!
//! Works from the formulas, not from the game graph: every node must offer
//! exactly one edge per environment input the environment transition
//! relation permits, every edge must satisfy both transition relations, and
//! no reachable cycle may satisfy all environment goals while avoiding a
//! system goal.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{Controller, SynthError};
use crate::ltl::{Ltl, Valuation};
use crate::spec::Gr1Spec;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub nodes_explored: usize,
    pub edges_checked: usize,
    pub bound: usize,
}

struct Pair<'a> {
    cur: &'a BTreeSet<String>,
    nxt: &'a BTreeSet<String>,
    props: &'a BTreeSet<String>,
}

impl Valuation for Pair<'_> {
    fn current(&self, atom: &str) -> Option<bool> {
        self.props.contains(atom).then(|| self.cur.contains(atom))
    }

    fn next(&self, atom: &str) -> Option<bool> {
        self.props.contains(atom).then(|| self.nxt.contains(atom))
    }
}

fn holds(fs: &[Ltl], p: &Pair<'_>) -> Result<bool, SynthError> {
    for f in fs {
        if !f.eval(p).map_err(|e| SynthError::Fragment(e.to_string()))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn fail(reason: String, trace: Vec<String>) -> SynthError {
    SynthError::VerificationFailure { reason, trace }
}

pub fn check_controller(c: &Controller, spec: &Gr1Spec, bound: usize) -> Result<CheckReport, SynthError> {
    let props: BTreeSet<String> = spec.props.all().map(str::to_string).collect();
    let vals: Vec<BTreeSet<String>> = c
        .nodes
        .iter()
        .map(|n| n.inputs.iter().chain(&n.outputs).cloned().collect())
        .collect();
    let empty = BTreeSet::new();
    let nx = spec.props.inputs.len();
    let input_valuations: Vec<BTreeSet<String>> = (0..1u64 << nx)
        .map(|bits| {
            (0..nx)
                .filter(|i| bits >> i & 1 == 1)
                .map(|i| spec.props.inputs[i].clone())
                .collect()
        })
        .collect();

    // initial coverage
    let init = [spec.env_init.clone(), spec.sys_init.clone()].concat();
    for &i in &c.initial {
        if !holds(&init, &Pair { cur: &vals[i], nxt: &empty, props: &props })? {
            return Err(fail("initial node violates the initial conditions".into(), vec![c.nodes[i].label()]));
        }
    }
    let all: Vec<String> = props.iter().cloned().collect();
    if all.len() <= 20 {
        for bits in 0..1u64 << all.len() {
            let v: BTreeSet<String> = (0..all.len()).filter(|i| bits >> i & 1 == 1).map(|i| all[i].clone()).collect();
            if holds(&init, &Pair { cur: &v, nxt: &empty, props: &props })? && !c.initial.iter().any(|&i| vals[i] == v) {
                let label = format!("({})", v.iter().cloned().collect::<Vec<_>>().join(", "));
                return Err(fail("permissible initial state has no initial node".into(), vec![label]));
            }
        }
    }

    // every node, breadth-first from the initial ones
    let mut depth = vec![usize::MAX; c.nodes.len()];
    let mut parent = vec![None; c.nodes.len()];
    let mut queue = VecDeque::new();
    // initial nodes first so counterexample traces start there when possible
    for i in c.initial.iter().copied().chain(0..c.nodes.len()) {
        if depth[i] == usize::MAX {
            depth[i] = 0;
            queue.push_back(i);
        }
    }
    let mut edges_checked = 0;
    let trace_to = |parent: &[Option<usize>], mut n: usize| {
        let mut t = vec![c.nodes[n].label()];
        while let Some(p) = parent[n] {
            t.push(c.nodes[p].label());
            n = p;
        }
        t.reverse();
        t
    };
    while let Some(n) = queue.pop_front() {
        let mut seen_inputs = BTreeSet::new();
        for e in c.edges_from(n) {
            edges_checked += 1;
            let input: BTreeSet<String> = e.input.iter().cloned().collect();
            let mut trace = trace_to(&parent, n);
            trace.push(c.nodes[e.to].label());
            if !seen_inputs.insert(input.clone()) {
                return Err(fail(format!("two edges for input {:?}", e.input), trace));
            }
            let target_inputs: BTreeSet<String> = c.nodes[e.to].inputs.iter().cloned().collect();
            if target_inputs != input {
                return Err(fail("edge input disagrees with its target".into(), trace));
            }
            let pair = Pair { cur: &vals[n], nxt: &vals[e.to], props: &props };
            if !holds(&spec.env_trans, &pair)? {
                return Err(fail("edge violates the environment transition relation".into(), trace));
            }
            if !holds(&spec.sys_trans, &pair)? {
                return Err(fail("edge violates the system transition relation".into(), trace));
            }
            if depth[e.to] == usize::MAX && depth[n] < bound {
                depth[e.to] = depth[n] + 1;
                parent[e.to] = Some(n);
                queue.push_back(e.to);
            }
        }
        for x in &input_valuations {
            let pair = Pair { cur: &vals[n], nxt: x, props: &props };
            if holds(&spec.env_trans, &pair)? && !seen_inputs.contains(x) {
                return Err(fail(
                    format!("no response to permitted input {:?}", x.iter().collect::<Vec<_>>()),
                    trace_to(&parent, n),
                ));
            }
        }
    }
    let reached: Vec<usize> = (0..c.nodes.len()).filter(|&n| depth[n] != usize::MAX).collect();

    // liveness: a fair cycle avoiding a system goal is a counterexample
    let env_live = if spec.env_live.is_empty() { vec![Ltl::True] } else { spec.env_live.clone() };
    let sys_live = if spec.sys_live.is_empty() { vec![Ltl::True] } else { spec.sys_live.clone() };
    let sat = |f: &Ltl, n: usize| holds(std::slice::from_ref(f), &Pair { cur: &vals[n], nxt: &empty, props: &props });
    for goal in &sys_live {
        let mut avoid = vec![false; c.nodes.len()];
        for &n in &reached {
            avoid[n] = !sat(goal, n)?;
        }
        for scc in sccs(c, &avoid) {
            let cyclic = scc.len() > 1 || c.edges_from(scc[0]).any(|e| e.to == scc[0]);
            if !cyclic {
                continue;
            }
            let mut fair = true;
            for je in &env_live {
                let mut any = false;
                for &n in &scc {
                    any |= sat(je, n)?;
                }
                fair &= any;
            }
            if fair {
                let mut trace = trace_to(&parent, scc[0]);
                trace.extend(scc.iter().skip(1).map(|&n| c.nodes[n].label()));
                trace.push(c.nodes[scc[0]].label());
                return Err(fail(format!("system goal `{goal}` can be avoided forever"), trace));
            }
        }
    }
    Ok(CheckReport {
        nodes_explored: reached.len(),
        edges_checked,
        bound,
    })
}

/// Strongly connected components of the subgraph induced by `keep` (Tarjan).
fn sccs(c: &Controller, keep: &[bool]) -> Vec<Vec<usize>> {
    struct T<'a> {
        c: &'a Controller,
        keep: &'a [bool],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl T<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on[v] = true;
            let succ: Vec<usize> = self.c.edges_from(v).map(|e| e.to).filter(|&w| self.keep[w]).collect();
            for w in succ {
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.reverse();
                self.out.push(comp);
            }
        }
    }
    let n = c.nodes.len();
    let mut t = T {
        c,
        keep,
        index: vec![None; n],
        low: vec![0; n],
        on: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if keep[v] && t.index[v].is_none() {
            t.visit(v);
        }
    }
    t.out
}
