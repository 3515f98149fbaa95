//! Oracles that share no code with the library's solver or grounder.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use synthdialog::language::SemanticSymbol;
use synthdialog::world::WorldModel;

pub const ISS3: &[&str] = &["kibo", "harmony", "columbus"];

/// Every world over `regions` with any set of links, for every robot location.
pub fn all_worlds(regions: &[&str]) -> Vec<WorldModel> {
    let pairs: Vec<(&str, &str)> = (0..regions.len())
        .flat_map(|i| (i + 1..regions.len()).map(move |j| (regions[i], regions[j])))
        .collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << pairs.len()) {
        let links: Vec<(&str, &str)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        for robot in regions {
            out.push(WorldModel::from_parts(regions, &links, robot).unwrap());
        }
    }
    out
}

// ---- navigation game, modelled directly on the world ----

/// Explicit parity game; player 0 (the robot) wins a play iff the highest
/// priority seen infinitely often is even.
pub struct Parity {
    pub owner: Vec<u8>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl Parity {
    fn pred(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.succ.len()];
        for (v, ss) in self.succ.iter().enumerate() {
            for &s in ss {
                p[s].push(v);
            }
        }
        p
    }

    fn attractor(&self, pred: &[Vec<usize>], alive: &[bool], target: &[usize], player: u8) -> Vec<bool> {
        let n = self.succ.len();
        let mut inside = vec![false; n];
        let mut count: Vec<usize> = (0..n)
            .map(|v| self.succ[v].iter().filter(|&&s| alive[s]).count())
            .collect();
        let mut stack: Vec<usize> = Vec::new();
        for &t in target {
            if alive[t] && !inside[t] {
                inside[t] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            for &u in &pred[v] {
                if !alive[u] || inside[u] {
                    continue;
                }
                let take = if self.owner[u] == player {
                    true
                } else {
                    count[u] -= 1;
                    count[u] == 0
                };
                if take {
                    inside[u] = true;
                    stack.push(u);
                }
            }
        }
        inside
    }

    /// Zielonka's recursive algorithm; returns the set won by player 0.
    pub fn solve(&self) -> Vec<bool> {
        let pred = self.pred();
        let alive = vec![true; self.succ.len()];
        self.zielonka(&pred, &alive)[0].clone()
    }

    fn zielonka(&self, pred: &[Vec<usize>], alive: &[bool]) -> [Vec<bool>; 2] {
        let n = self.succ.len();
        let nodes: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        if nodes.is_empty() {
            return [vec![false; n], vec![false; n]];
        }
        let d = nodes.iter().map(|&v| self.priority[v]).max().unwrap();
        let p = (d % 2) as u8;
        let top: Vec<usize> = nodes.iter().copied().filter(|&v| self.priority[v] == d).collect();
        let a = self.attractor(pred, alive, &top, p);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
        let w = self.zielonka(pred, &rest);
        let opp = 1 - p as usize;
        if !w[opp].iter().any(|&x| x) {
            let mut out = [vec![false; n], vec![false; n]];
            out[p as usize] = alive.to_vec();
            return out;
        }
        let won: Vec<usize> = (0..n).filter(|&v| w[opp][v]).collect();
        let b = self.attractor(pred, alive, &won, opp as u8);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let mut w2 = self.zielonka(pred, &rest);
        for v in 0..n {
            if b[v] {
                w2[opp][v] = true;
            }
        }
        w2
    }
}

/// Solves "reach `goal` infinitely often" directly on the world.
///
/// A state is (location, command). The robot may keep a command until it
/// arrives, and otherwise pick its own location or a neighbour. The
/// environment keeps the location or, if the command names a neighbour,
/// moves there. Fairness: for each region r, infinitely often the robot is
/// in r or not commanding r. Returns the verdict from (robot, robot) and the
/// set of winning (location, command) pairs.
pub fn navigation_oracle(w: &WorldModel, goal: &str) -> (bool, BTreeSet<(String, String)>) {
    let regions: Vec<String> = w.region_ids().map(|r| r.to_string()).collect();
    let n = regions.len();
    let linked = |a: usize, b: usize| a != b && w.is_connected(&regions[a], &regions[b]).unwrap();
    let g = regions.iter().position(|r| r == goal).unwrap();

    let mut ids: HashMap<(u8, usize, usize, usize, usize), usize> = HashMap::new();
    let mut game = Parity {
        owner: Vec::new(),
        priority: Vec::new(),
        succ: Vec::new(),
    };
    let mut id = |key, game: &mut Parity| {
        *ids.entry(key).or_insert_with(|| {
            game.owner.push(key.0);
            game.priority.push(0);
            game.succ.push(Vec::new());
            game.owner.len() - 1
        })
    };
    // env nodes (1, loc, cmd, m, 0); robot nodes (0, loc, cmd, m, next_loc)
    for loc in 0..n {
        for cmd in 0..n {
            for m in 0..n {
                let e = id((1, loc, cmd, m, 0), &mut game);
                let fair = loc == m || cmd != m;
                game.priority[e] = if loc == g { 2 } else if fair { 1 } else { 0 };
                let m2 = if fair { (m + 1) % n } else { m };
                let mut moves = vec![loc];
                if linked(loc, cmd) {
                    moves.push(cmd);
                }
                for nl in moves {
                    let r = id((0, loc, cmd, m2, nl), &mut game);
                    game.succ[e].push(r);
                    let cmds: Vec<usize> = if cmd != loc {
                        vec![cmd]
                    } else {
                        (0..n).filter(|&c| c == loc || linked(loc, c)).collect()
                    };
                    for nc in cmds {
                        let t = id((1, nl, nc, m2, 0), &mut game);
                        if !game.succ[r].contains(&t) {
                            game.succ[r].push(t);
                        }
                    }
                }
            }
        }
    }
    assert!(game.succ.iter().all(|s| !s.is_empty()), "oracle game has a dead end");
    let won = game.solve();
    let robot = regions.iter().position(|r| Some(r.as_str()) == w.robot_at().map(|r| r.as_str())).unwrap();
    let verdict = won[ids[&(1, robot, robot, 0, 0)]];
    let region: BTreeSet<(String, String)> = (0..n)
        .flat_map(|l| (0..n).map(move |c| (l, c)))
        .filter(|&(l, c)| won[ids[&(1, l, c, 0, 0)]])
        .map(|(l, c)| (regions[l].clone(), regions[c].clone()))
        .collect();
    (verdict, region)
}

// ---- rule-based grounding ----

/// The symbol an utterance denotes, read off its surface form.
pub fn oracle_symbol(utterance: &str) -> Option<SemanticSymbol> {
    let cleaned: String = utterance.to_lowercase().chars().filter(|c| !matches!(c, '?' | '.' | '!' | ',')).collect();
    let t: Vec<&str> = cleaned.split_whitespace().collect();
    match t.as_slice() {
        ["go", "to", "the", r, "capsule"] => SemanticSymbol::navigate(r).ok(),
        ["the", a, "capsule", "is", "connected", "to", "the", b, "capsule"]
        | ["is", "the", a, "capsule", "connected", "to", "the", b, "capsule"] => {
            SemanticSymbol::connectivity(a, b).ok()
        }
        _ => None,
    }
}

// ---- graphs ----

pub type Graph = BTreeMap<String, BTreeSet<String>>;

pub fn graph(edges: &[(&str, &str)]) -> Graph {
    let mut g = Graph::new();
    for (a, b) in edges {
        g.entry(a.to_string()).or_default().insert(b.to_string());
        g.entry(b.to_string()).or_default();
    }
    g
}

/// Applies a region swap to node labels like `(in_kibo, go_harmony)`.
pub fn relabel(g: &Graph, swap: (&str, &str)) -> Graph {
    let region = |r: &str| {
        if r == swap.0 {
            swap.1.to_string()
        } else if r == swap.1 {
            swap.0.to_string()
        } else {
            r.to_string()
        }
    };
    let f = |label: &str| {
        let inner = label.trim_start_matches('(').trim_end_matches(')');
        let (l, c) = inner.split_once(", ").expect("state label");
        format!(
            "(in_{}, go_{})",
            region(l.trim_start_matches("in_")),
            region(c.trim_start_matches("go_"))
        )
    };
    g.iter().map(|(k, v)| (f(k), v.iter().map(|x| f(x)).collect())).collect()
}

/// Unlabelled directed-graph isomorphism by backtracking.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    let index = |g: &Graph| -> (Vec<String>, Vec<Vec<bool>>) {
        let names: Vec<String> = g.keys().cloned().collect();
        let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut adj = vec![vec![false; names.len()]; names.len()];
        for (k, vs) in g {
            for v in vs {
                adj[pos[k.as_str()]][pos[v.as_str()]] = true;
            }
        }
        (names, adj)
    };
    let (na, aa) = index(a);
    let (nb, ab) = index(b);
    if na.len() != nb.len() {
        return false;
    }
    let n = na.len();
    let sig = |adj: &Vec<Vec<bool>>, v: usize| {
        let out = adj[v].iter().filter(|&&x| x).count();
        let inn = (0..n).filter(|&u| adj[u][v]).count();
        (out, inn, adj[v][v])
    };
    fn go(
        v: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        aa: &[Vec<bool>],
        ab: &[Vec<bool>],
        ok: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        let n = aa.len();
        if v == n {
            return true;
        }
        for t in 0..n {
            if used[t] || !ok(v, t) {
                continue;
            }
            if (0..v).any(|u| aa[u][v] != ab[map[u]][t] || aa[v][u] != ab[t][map[u]]) || aa[v][v] != ab[t][t] {
                continue;
            }
            map.push(t);
            used[t] = true;
            if go(v + 1, map, used, aa, ab, ok) {
                return true;
            }
            map.pop();
            used[t] = false;
        }
        false
    }
    let ok = |v: usize, t: usize| sig(&aa, v) == sig(&ab, t);
    go(0, &mut Vec::new(), &mut vec![false; n], &aa, &ab, &ok)
}

/// The exp1 controller, worked out by hand from the game:
/// chain kibo - harmony - columbus, robot in columbus, goal kibo. Nine
/// states, thirteen transitions.
pub fn chain_fixture() -> Graph {
    let s = |l: &str, c: &str| format!("(in_{l}, go_{c})");
    let e = [
        (("kibo", "kibo"), ("kibo", "kibo")),
        (("kibo", "harmony"), ("kibo", "harmony")),
        (("kibo", "harmony"), ("harmony", "harmony")),
        (("harmony", "harmony"), ("harmony", "kibo")),
        (("harmony", "kibo"), ("harmony", "kibo")),
        (("harmony", "kibo"), ("kibo", "kibo")),
        (("harmony", "columbus"), ("harmony", "columbus")),
        (("harmony", "columbus"), ("columbus", "columbus")),
        (("columbus", "columbus"), ("columbus", "harmony")),
        (("columbus", "harmony"), ("columbus", "harmony")),
        (("columbus", "harmony"), ("harmony", "harmony")),
        (("kibo", "columbus"), ("kibo", "columbus")),
        (("columbus", "kibo"), ("columbus", "kibo")),
    ];
    let owned: Vec<(String, String)> = e.iter().map(|((a, b), (c, d))| (s(a, b), s(c, d))).collect();
    let refs: Vec<(&str, &str)> = owned.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    graph(&refs)
}
