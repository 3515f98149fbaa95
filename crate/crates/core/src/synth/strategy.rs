//! Strategy extraction and the controller state machine.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{Fixpoint, Game, SynthError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerNode {
    /// Input propositions true in this state.
    pub inputs: Vec<String>,
    /// Output propositions true in this state.
    pub outputs: Vec<String>,
    /// Index of the system goal currently pursued.
    pub goal: usize,
    /// Distance rank toward that goal (1 = goal or trap level).
    pub rank: usize,
}

impl ControllerNode {
    pub fn label(&self) -> String {
        let atoms: Vec<&str> = self.inputs.iter().chain(&self.outputs).map(String::as_str).collect();
        format!("({})", atoms.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerEdge {
    pub from: usize,
    pub to: usize,
    /// The environment's input valuation (true atoms) that selects this edge.
    pub input: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Controller {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub nodes: Vec<ControllerNode>,
    pub initial: Vec<usize>,
    pub edges: Vec<ControllerEdge>,
}

fn can_reach(g: &Game, within: &FixedBitSet, target: &FixedBitSet) -> FixedBitSet {
    let n = g.num_states();
    let mut preds = vec![Vec::new(); n];
    for s in within.ones() {
        for t in g.successors(s) {
            if within.contains(t) {
                preds[t].push(s);
            }
        }
    }
    let mut seen = FixedBitSet::with_capacity(n);
    let mut queue: VecDeque<usize> = target.ones().filter(|&s| within.contains(s)).collect();
    for &s in &queue {
        seen.insert(s);
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !seen.put(s) {
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Builds a controller node for every winning state, initial states first.
/// Per environment move the system response is chosen by:
/// at a goal state, any winning successor (memory advances);
/// otherwise a successor of strictly lower rank;
/// otherwise one inside the lowest-indexed environment trap holding `s`.
/// Ties prefer successors that keep every environment goal reachable,
/// then lower rank, then the lowest output index.
pub(crate) fn extract(g: &Game, fp: &Fixpoint) -> Controller {
    let n_goals = g.sys_goals().len();
    let friendly = g.env_goals().iter().fold(fp.z.clone(), |mut acc, je| {
        acc.intersect_with(&can_reach(g, &fp.z, je));
        acc
    });
    // among equally good responses keep the current command, so the choice
    // does not depend on the order outputs were declared in
    let key = |s: usize, t: usize, j: usize| {
        (
            !friendly.contains(t),
            fp.rank(j, t).unwrap_or(usize::MAX),
            g.output_index(t) != g.output_index(s),
            g.output_index(t),
        )
    };

    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut initial = Vec::new();
    for &s in g.initial() {
        let id = *ids.entry((s, 0)).or_insert_with(|| {
            order.push((s, 0));
            queue.push_back((s, 0));
            order.len() - 1
        });
        initial.push(id);
    }
    // the remaining winning states follow, so the robot can be tracked from anywhere
    for s in fp.z.ones() {
        ids.entry((s, 0)).or_insert_with(|| {
            order.push((s, 0));
            queue.push_back((s, 0));
            order.len() - 1
        });
    }
    let mut edges = Vec::new();
    while let Some((s, j)) = queue.pop_front() {
        let from = ids[&(s, j)];
        let r = fp.rank(j, s).expect("winning state has a rank");
        for (m, &k) in g.env_moves(s).iter().enumerate() {
            let winning: Vec<usize> = g.sys_moves(s, m).iter().copied().filter(|&t| fp.z.contains(t)).collect();
            let (choices, next_j) = if g.sys_goals()[j].contains(s) {
                (winning, (j + 1) % n_goals)
            } else {
                let lower: Vec<usize> = winning
                    .iter()
                    .copied()
                    .filter(|&t| fp.rank(j, t).is_some_and(|rt| rt < r))
                    .collect();
                if !lower.is_empty() {
                    (lower, j)
                } else {
                    let trap = fp.x[j][r].iter().find(|x| x.contains(s)).expect("state lies in a trap");
                    (winning.into_iter().filter(|&t| trap.contains(t)).collect(), j)
                }
            };
            let t = *choices
                .iter()
                .min_by_key(|&&t| key(s, t, next_j))
                .expect("winning state has a winning response");
            let to = *ids.entry((t, next_j)).or_insert_with(|| {
                order.push((t, next_j));
                queue.push_back((t, next_j));
                order.len() - 1
            });
            edges.push(ControllerEdge {
                from,
                to,
                input: g.true_atoms(g.input_valuation(k)),
            });
        }
    }
    let nodes = order
        .iter()
        .map(|&(s, j)| {
            let (inputs, outputs) = g.true_atoms(g.valuation(s)).into_iter().partition(|a| g.inputs().contains(a));
            ControllerNode {
                inputs,
                outputs,
                goal: j,
                rank: fp.rank(j, s).map_or(0, |r| r + 1),
            }
        })
        .collect();
    Controller {
        inputs: g.inputs().to_vec(),
        outputs: g.outputs().to_vec(),
        nodes,
        initial,
        edges,
    }
}

impl Controller {
    pub fn node(&self, id: usize) -> &ControllerNode {
        &self.nodes[id]
    }

    pub fn edges_from(&self, id: usize) -> impl Iterator<Item = &ControllerEdge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    /// The successor chosen when the environment reports `input` (true atoms).
    pub fn step(&self, id: usize, input: &[String]) -> Option<usize> {
        let want: BTreeSet<&str> = input.iter().map(String::as_str).collect();
        self.edges_from(id)
            .find(|e| e.input.iter().map(String::as_str).collect::<BTreeSet<_>>() == want)
            .map(|e| e.to)
    }

    pub fn find_initial(&self, inputs: &[String]) -> Option<usize> {
        self.initial.iter().copied().find(|&i| self.nodes[i].inputs == inputs)
    }

    /// State labels mapped to successor labels; memory is not shown.
    pub fn state_graph(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut g: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for n in &self.nodes {
            g.entry(n.label()).or_default();
        }
        for e in &self.edges {
            g.entry(self.nodes[e.from].label())
                .or_default()
                .insert(self.nodes[e.to].label());
        }
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("controller serializes")
    }

    pub fn from_json(text: &str) -> Result<Controller, SynthError> {
        let c: Controller = serde_json::from_str(text).map_err(|e| SynthError::BadController(e.to_string()))?;
        c.check_shape()?;
        Ok(c)
    }

    /// Line-oriented form:
    ///
    /// ```text
    /// inputs in_kibo in_harmony
    /// outputs go_kibo go_harmony
    /// node 0 goal 0 rank 1 : in_kibo go_kibo
    /// initial 0
    /// edge 0 -> 0 : in_kibo
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "inputs {}", self.inputs.join(" "));
        let _ = writeln!(out, "outputs {}", self.outputs.join(" "));
        for (i, n) in self.nodes.iter().enumerate() {
            let atoms: Vec<&str> = n.inputs.iter().chain(&n.outputs).map(String::as_str).collect();
            let _ = writeln!(out, "node {i} goal {} rank {} : {}", n.goal, n.rank, atoms.join(" "));
        }
        for i in &self.initial {
            let _ = writeln!(out, "initial {i}");
        }
        for e in &self.edges {
            let _ = writeln!(out, "edge {} -> {} : {}", e.from, e.to, e.input.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Controller, SynthError> {
        let mut c = Controller {
            inputs: Vec::new(),
            outputs: Vec::new(),
            nodes: Vec::new(),
            initial: Vec::new(),
            edges: Vec::new(),
        };
        for (ln, line) in text.lines().enumerate() {
            let bad = || SynthError::BadController(format!("line {}: `{line}`", ln + 1));
            let words: Vec<&str> = line.split_whitespace().collect();
            let num = |w: Option<&&str>| w.and_then(|w| w.parse::<usize>().ok()).ok_or_else(bad);
            let names = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>();
            match words.first().copied() {
                None => {}
                Some("inputs") => c.inputs = names(&words[1..]),
                Some("outputs") => c.outputs = names(&words[1..]),
                Some("node") => {
                    if num(words.get(1))? != c.nodes.len() || words.get(2) != Some(&"goal") || words.get(4) != Some(&"rank") || words.get(6) != Some(&":") {
                        return Err(bad());
                    }
                    let atoms = &words[7..];
                    let (ins, outs): (Vec<&str>, Vec<&str>) = atoms.iter().partition(|a| c.inputs.iter().any(|i| i == *a));
                    c.nodes.push(ControllerNode {
                        inputs: names(&ins),
                        outputs: names(&outs),
                        goal: num(words.get(3))?,
                        rank: num(words.get(5))?,
                    });
                }
                Some("initial") => c.initial.push(num(words.get(1))?),
                Some("edge") => {
                    if words.get(2) != Some(&"->") || words.get(4) != Some(&":") {
                        return Err(bad());
                    }
                    c.edges.push(ControllerEdge {
                        from: num(words.get(1))?,
                        to: num(words.get(3))?,
                        input: names(&words[5..]),
                    });
                }
                Some(_) => return Err(bad()),
            }
        }
        c.check_shape()?;
        Ok(c)
    }

    fn check_shape(&self) -> Result<(), SynthError> {
        let n = self.nodes.len();
        let known = |a: &String| self.inputs.contains(a) || self.outputs.contains(a);
        if self.initial.iter().any(|&i| i >= n) || self.edges.iter().any(|e| e.from >= n || e.to >= n) {
            return Err(SynthError::BadController("node index out of range".into()));
        }
        if self.nodes.iter().any(|nd| !nd.inputs.iter().chain(&nd.outputs).all(known))
            || self.edges.iter().any(|e| !e.input.iter().all(|a| self.inputs.contains(a)))
        {
            return Err(SynthError::BadController("undeclared proposition".into()));
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph controller {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if self.initial.contains(&i) { "doublecircle" } else { "circle" };
            let _ = writeln!(
                out,
                "  n{i} [shape={shape}, label=\"{}\\n{}\"];",
                n.inputs.join(" "),
                n.outputs.join(" ")
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.input.join(" "));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::navigation_spec;
    use crate::synth::{synthesize, SynthesisOutcome};
    use crate::world::{RegionId, WorldModel};

    fn chain_controller() -> Controller {
        let w = WorldModel::from_parts(
            &["kibo", "harmony", "columbus"],
            &[("kibo", "harmony"), ("harmony", "columbus")],
            "columbus",
        )
        .unwrap();
        match synthesize(&navigation_spec(&w, &RegionId::new("kibo").unwrap()).unwrap()).unwrap() {
            SynthesisOutcome::Realizable(c) => c,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn controller_walks_the_chain() {
        let c = chain_controller();
        let g = c.state_graph();
        let succ = |l: &str| g[l].iter().cloned().collect::<Vec<_>>();
        assert_eq!(succ("(in_columbus, go_columbus)"), ["(in_columbus, go_harmony)"]);
        assert_eq!(succ("(in_harmony, go_harmony)"), ["(in_harmony, go_kibo)"]);
        assert_eq!(succ("(in_kibo, go_kibo)"), ["(in_kibo, go_kibo)"]);
        assert_eq!(succ("(in_kibo, go_columbus)"), ["(in_kibo, go_columbus)"]);
        assert_eq!(c.nodes.len(), 9);
        assert_eq!(c.edges.len(), 13);
    }

    #[test]
    fn step_follows_inputs() {
        let c = chain_controller();
        let start = c.initial[0];
        let next = c.step(start, &["in_columbus".into()]).unwrap();
        assert_eq!(c.node(next).label(), "(in_columbus, go_harmony)");
        assert!(c.step(start, &["in_kibo".into()]).is_none());
    }

    #[test]
    fn export_formats_round_trip() {
        let c = chain_controller();
        assert_eq!(Controller::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(Controller::from_text(&c.to_text()).unwrap(), c);
        assert!(c.to_dot().starts_with("digraph controller {"));
        assert!(Controller::from_text("edge 0 -> 9 : in_kibo\n").is_err());
        assert!(Controller::from_text("bogus\n").is_err());
    }
}
