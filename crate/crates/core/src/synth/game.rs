//! Explicit-state game graph for a GR(1) specification.
//!
//! A state is a packed valuation: bit `i` is atom `i`, inputs first. Legal
//! states are the valuations satisfying every next-only conjunct of both
//! transition groups (read without the next operator), which for the
//! navigation template are the exactly-one constraints.

use fixedbitset::FixedBitSet;

use super::SynthError;
use crate::ltl::Ltl;
use crate::spec::Gr1Spec;

pub const DEFAULT_MAX_PROPS: usize = 24;

/// Transition-level formula compiled to bit positions.
#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Const(bool),
    Cur(u32),
    Nxt(u32),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub(crate) fn compile(f: &Ltl, atoms: &[String]) -> Result<Expr, SynthError> {
        Self::compile_at(f, atoms, false)
    }

    fn compile_at(f: &Ltl, atoms: &[String], in_next: bool) -> Result<Expr, SynthError> {
        let c = |g: &Ltl| Self::compile_at(g, atoms, in_next);
        let b = |e: Expr| Box::new(e);
        Ok(match f {
            Ltl::True => Expr::Const(true),
            Ltl::Atom(a) => {
                let i = atoms
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| SynthError::Fragment(format!("undeclared atom `{a}`")))?
                    as u32;
                if in_next {
                    Expr::Nxt(i)
                } else {
                    Expr::Cur(i)
                }
            }
            Ltl::Not(a) => Expr::Not(b(c(a)?)),
            Ltl::And(x, y) => Expr::And(b(c(x)?), b(c(y)?)),
            Ltl::Or(x, y) => Expr::Or(b(c(x)?), b(c(y)?)),
            Ltl::Implies(x, y) => Expr::Or(b(Expr::Not(b(c(x)?))), b(c(y)?)),
            Ltl::Iff(x, y) => {
                let (x, y) = (c(x)?, c(y)?);
                Expr::Or(
                    b(Expr::And(b(x.clone()), b(y.clone()))),
                    b(Expr::And(b(Expr::Not(b(x))), b(Expr::Not(b(y))))),
                )
            }
            Ltl::Next(a) if !in_next => Self::compile_at(a, atoms, true)?,
            Ltl::Next(_) => return Err(SynthError::Fragment(format!("nested next in `{f}`"))),
            Ltl::Until(..) | Ltl::Eventually(_) | Ltl::Always(_) => {
                return Err(SynthError::Fragment(format!("temporal operator in `{f}`")))
            }
        })
    }

    pub(crate) fn eval(&self, cur: u64, nxt: u64) -> bool {
        match self {
            Expr::Const(v) => *v,
            Expr::Cur(i) => cur >> i & 1 == 1,
            Expr::Nxt(i) => nxt >> i & 1 == 1,
            Expr::Not(a) => !a.eval(cur, nxt),
            Expr::And(a, b) => a.eval(cur, nxt) && b.eval(cur, nxt),
            Expr::Or(a, b) => a.eval(cur, nxt) || b.eval(cur, nxt),
        }
    }
}

fn compile_all(fs: &[Ltl], atoms: &[String]) -> Result<Vec<Expr>, SynthError> {
    fs.iter().map(|f| Expr::compile(f, atoms)).collect()
}

fn all_hold(es: &[Expr], cur: u64, nxt: u64) -> bool {
    es.iter().all(|e| e.eval(cur, nxt))
}

#[derive(Debug, Clone)]
pub struct Game {
    atoms: Vec<String>,
    n_inputs: usize,
    /// Legal input valuations (bits `0..n_inputs`).
    xs: Vec<u64>,
    /// Legal output valuations, already shifted into place.
    ys: Vec<u64>,
    /// `(x index, y index)` per state.
    states: Vec<(usize, usize)>,
    lookup: Vec<Option<usize>>,
    env_moves: Vec<Vec<usize>>,
    sys_moves: Vec<Vec<Vec<usize>>>,
    initial: Vec<usize>,
    env_goals: Vec<FixedBitSet>,
    sys_goals: Vec<FixedBitSet>,
}

pub fn build_game(spec: &Gr1Spec) -> Result<Game, SynthError> {
    build_game_with(spec, DEFAULT_MAX_PROPS)
}

pub fn build_game_with(spec: &Gr1Spec, max_props: usize) -> Result<Game, SynthError> {
    spec.validate()?;
    let props = spec.props.len();
    if props > max_props.min(62) {
        return Err(SynthError::StateSpaceTooLarge { props, limit: max_props });
    }
    let atoms: Vec<String> = spec.props.all().map(str::to_string).collect();
    let nx = spec.props.inputs.len();
    let ny = spec.props.outputs.len();

    let static_parts: Vec<Ltl> = spec
        .env_trans
        .iter()
        .chain(&spec.sys_trans)
        .filter(|f| f.is_next_only())
        .map(Ltl::strip_next)
        .collect();
    let only = |f: &Ltl, inputs: bool| f.atoms().iter().all(|a| spec.props.is_input(a) == inputs);
    let x_static = compile_all(
        &static_parts.iter().filter(|f| only(f, true)).cloned().collect::<Vec<_>>(),
        &atoms,
    )?;
    let y_static = compile_all(
        &static_parts.iter().filter(|f| only(f, false)).cloned().collect::<Vec<_>>(),
        &atoms,
    )?;
    let all_static = compile_all(&static_parts, &atoms)?;

    let xs: Vec<u64> = (0..1u64 << nx).filter(|&x| all_hold(&x_static, x, 0)).collect();
    let ys: Vec<u64> = (0..1u64 << ny)
        .map(|y| y << nx)
        .filter(|&y| all_hold(&y_static, y, 0))
        .collect();

    let mut states = Vec::new();
    let mut lookup = vec![None; xs.len() * ys.len()];
    for (xi, &x) in xs.iter().enumerate() {
        for (yi, &y) in ys.iter().enumerate() {
            if all_hold(&all_static, x | y, 0) {
                lookup[xi * ys.len() + yi] = Some(states.len());
                states.push((xi, yi));
            }
        }
    }

    let env_trans = compile_all(&spec.env_trans, &atoms)?;
    let sys_trans = compile_all(&spec.sys_trans, &atoms)?;
    let mut env_moves = Vec::with_capacity(states.len());
    let mut sys_moves = Vec::with_capacity(states.len());
    for &(xi, yi) in &states {
        let cur = xs[xi] | ys[yi];
        let moves: Vec<usize> = (0..xs.len()).filter(|&k| all_hold(&env_trans, cur, xs[k])).collect();
        let responses = moves
            .iter()
            .map(|&k| {
                (0..ys.len())
                    .filter_map(|l| lookup[k * ys.len() + l])
                    .filter(|&t| all_hold(&sys_trans, cur, xs[k] | ys[states[t].1]))
                    .collect()
            })
            .collect();
        env_moves.push(moves);
        sys_moves.push(responses);
    }

    let init = compile_all(&[spec.env_init.clone(), spec.sys_init.clone()].concat(), &atoms)?;
    let valuation = |&(xi, yi): &(usize, usize)| xs[xi] | ys[yi];
    let initial = (0..states.len())
        .filter(|&s| all_hold(&init, valuation(&states[s]), 0))
        .collect();
    let goals = |fs: &[Ltl]| -> Result<Vec<FixedBitSet>, SynthError> {
        let fs: Vec<Ltl> = if fs.is_empty() { vec![Ltl::True] } else { fs.to_vec() };
        compile_all(&fs, &atoms).map(|es| {
            es.iter()
                .map(|e| {
                    let mut set = FixedBitSet::with_capacity(states.len());
                    for (s, st) in states.iter().enumerate() {
                        set.set(s, e.eval(valuation(st), 0));
                    }
                    set
                })
                .collect()
        })
    };
    let env_goals = goals(&spec.env_live)?;
    let sys_goals = goals(&spec.sys_live)?;

    Ok(Game {
        atoms,
        n_inputs: nx,
        xs,
        ys,
        states,
        lookup,
        env_moves,
        sys_moves,
        initial,
        env_goals,
        sys_goals,
    })
}

impl Game {
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn inputs(&self) -> &[String] {
        &self.atoms[..self.n_inputs]
    }

    pub fn outputs(&self) -> &[String] {
        &self.atoms[self.n_inputs..]
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn valuation(&self, s: usize) -> u64 {
        let (xi, yi) = self.states[s];
        self.xs[xi] | self.ys[yi]
    }

    pub fn find(&self, valuation: u64) -> Option<usize> {
        let xi = self.xs.iter().position(|&x| x == valuation & ((1 << self.n_inputs) - 1))?;
        let yi = self.ys.iter().position(|&y| y == valuation >> self.n_inputs << self.n_inputs)?;
        self.lookup[xi * self.ys.len() + yi]
    }

    /// Names of the atoms true in `valuation`, inputs first.
    pub fn true_atoms(&self, valuation: u64) -> Vec<String> {
        (0..self.atoms.len())
            .filter(|i| valuation >> i & 1 == 1)
            .map(|i| self.atoms[i].clone())
            .collect()
    }

    /// `(in_kibo, go_harmony)` style label.
    pub fn label(&self, s: usize) -> String {
        format!("({})", self.true_atoms(self.valuation(s)).join(", "))
    }

    pub fn input_valuation(&self, k: usize) -> u64 {
        self.xs[k]
    }

    pub(crate) fn output_index(&self, s: usize) -> usize {
        self.states[s].1
    }

    /// Input valuations (indices) the environment may choose from `s`.
    pub fn env_moves(&self, s: usize) -> &[usize] {
        &self.env_moves[s]
    }

    /// Successor states the system may pick after the `m`-th environment move.
    pub fn sys_moves(&self, s: usize, m: usize) -> &[usize] {
        &self.sys_moves[s][m]
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.sys_moves[s].iter().flatten().copied()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn env_goals(&self) -> &[FixedBitSet] {
        &self.env_goals
    }

    pub fn sys_goals(&self) -> &[FixedBitSet] {
        &self.sys_goals
    }

    pub fn all_states(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.num_states());
        s.insert_range(..);
        s
    }

    /// States from which, for every environment move, the system has a
    /// response landing in `target`.
    pub fn cpre(&self, target: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.num_states());
        for s in 0..self.num_states() {
            let forced = self.sys_moves[s].iter().all(|resp| resp.iter().any(|&t| target.contains(t)));
            out.set(s, forced);
        }
        out
    }
}
