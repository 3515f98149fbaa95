//! The GR(1) winning-region fixpoint
//!
//! `Z = νZ. ⋀_j μY. ⋁_i νX. (Js_j ∧ cpre(Z)) ∨ cpre(Y) ∨ (¬Je_i ∧ cpre(X))`
//!
//! with the intermediate `Y` and `X` sets kept for strategy extraction.

use fixedbitset::FixedBitSet;

use super::Game;

#[derive(Debug, Clone)]
pub struct Fixpoint {
    pub z: FixedBitSet,
    /// `y[j][r]`: states that reach goal `j` within `r + 1` rank steps.
    pub y: Vec<Vec<FixedBitSet>>,
    /// `x[j][r][i]`: the rank-`r` trap for environment goal `i`.
    pub x: Vec<Vec<Vec<FixedBitSet>>>,
    pub z_iterations: usize,
    /// Largest number of iterations any single inner fixpoint took.
    pub max_inner_iterations: usize,
}

impl Fixpoint {
    /// 0-based rank of `s` for goal `j`, if `s` can reach it.
    pub fn rank(&self, j: usize, s: usize) -> Option<usize> {
        self.y[j].iter().position(|y| y.contains(s))
    }
}

pub fn winning_region(g: &Game) -> FixedBitSet {
    solve(g).z
}

pub fn solve(g: &Game) -> Fixpoint {
    let n = g.num_states();
    let mut z = g.all_states();
    let mut z_iterations = 0;
    let mut max_inner = 0;
    loop {
        z_iterations += 1;
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        let before = z.clone();
        for js in g.sys_goals() {
            let mut start = js.clone();
            start.intersect_with(&g.cpre(&z));
            let mut y = FixedBitSet::with_capacity(n);
            let mut y_ranks = Vec::new();
            let mut x_ranks = Vec::new();
            loop {
                let mut base = start.clone();
                base.union_with(&g.cpre(&y));
                let mut x_per_env = Vec::new();
                let mut next_y = FixedBitSet::with_capacity(n);
                for je in g.env_goals() {
                    let mut x = z.clone();
                    let mut it = 0;
                    loop {
                        it += 1;
                        let mut trap = g.cpre(&x);
                        trap.difference_with(je);
                        trap.union_with(&base);
                        if trap == x {
                            break;
                        }
                        x = trap;
                    }
                    max_inner = max_inner.max(it);
                    next_y.union_with(&x);
                    x_per_env.push(x);
                }
                if next_y == y {
                    break;
                }
                y = next_y;
                y_ranks.push(y.clone());
                x_ranks.push(x_per_env);
            }
            max_inner = max_inner.max(y_ranks.len());
            z = y;
            ys.push(y_ranks);
            xs.push(x_ranks);
        }
        if z == before {
            return Fixpoint {
                z,
                y: ys,
                x: xs,
                z_iterations,
                max_inner_iterations: max_inner,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::navigation_spec;
    use crate::synth::build_game;
    use crate::world::{RegionId, WorldModel};

    fn game(edges: &[(&str, &str)], robot: &str, goal: &str) -> Game {
        let w = WorldModel::from_parts(&["kibo", "harmony", "columbus"], edges, robot).unwrap();
        build_game(&navigation_spec(&w, &RegionId::new(goal).unwrap()).unwrap()).unwrap()
    }

    fn labels(g: &Game, set: &FixedBitSet) -> Vec<String> {
        set.ones().map(|s| g.label(s)).collect()
    }

    #[test]
    fn isolated_goal_is_lost() {
        let g = game(&[("kibo", "harmony")], "kibo", "columbus");
        let z = winning_region(&g);
        assert!(!z.contains(g.initial()[0]));
    }

    #[test]
    fn chain_world_ranks() {
        let g = game(&[("kibo", "harmony"), ("harmony", "columbus")], "columbus", "kibo");
        let fp = solve(&g);
        assert_eq!(fp.z.count_ones(..), 9);
        let rank = |l: &str| (0..g.num_states()).find(|&s| g.label(s) == l).and_then(|s| fp.rank(0, s));
        assert_eq!(rank("(in_kibo, go_harmony)"), Some(0));
        assert_eq!(rank("(in_harmony, go_kibo)"), Some(0));
        assert_eq!(rank("(in_harmony, go_harmony)"), Some(1));
        assert_eq!(rank("(in_columbus, go_harmony)"), Some(1));
        assert_eq!(rank("(in_columbus, go_columbus)"), Some(2));
        assert_eq!(rank("(in_harmony, go_columbus)"), Some(2));
        // stuck commanding an unreachable region: the environment's fault
        assert_eq!(rank("(in_columbus, go_kibo)"), Some(0));
        assert!(labels(&g, &fp.z).contains(&"(in_columbus, go_columbus)".to_string()));
    }

    #[test]
    fn iteration_counts_are_bounded() {
        let g = game(&[("kibo", "harmony"), ("harmony", "columbus")], "columbus", "kibo");
        let fp = solve(&g);
        assert!(fp.z_iterations <= g.num_states() + 1);
        assert!(fp.max_inner_iterations <= g.num_states() + 1);
    }
}
