//! GR(1) specifications: proposition sets, the six formula groups, the
//! navigation template compiled from a world model, and the text format.
//!
//! Text format (UTF-8, LF):
//!
//! ```text
//! [INPUT]
//! in_kibo
//! ...
//! [OUTPUT]
//! go_kibo
//! ...
//! [ENV_INIT]
//! [ENV_TRANS]
//! [ENV_LIVENESS]
//! [SYS_INIT]
//! [SYS_TRANS]
//! [SYS_LIVENESS]
//! ```
//!
//! Each section holds one formula (or proposition) per line. Blank lines and
//! lines starting with `#` are ignored by the parser.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::language::SemanticSymbol;
use crate::ltl::{self, atom, conj, exactly_one, implies, next, not, or, Ltl, LtlSyntaxError};
use crate::world::{RegionId, WorldModel, WorldError};

pub const INPUT_PREFIX: &str = "in_";
pub const OUTPUT_PREFIX: &str = "go_";

const SECTIONS: [&str; 8] = [
    "[INPUT]",
    "[OUTPUT]",
    "[ENV_INIT]",
    "[ENV_TRANS]",
    "[ENV_LIVENESS]",
    "[SYS_INIT]",
    "[SYS_TRANS]",
    "[SYS_LIVENESS]",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("goal must be a navigate action, got {0}")]
    NotAnAction(String),
    #[error("{line}:{column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("atom `{atom}` in {section} is not a declared proposition")]
    UndeclaredAtom { section: &'static str, atom: String },
    #[error("proposition `{0}` declared as both input and output")]
    OverlappingPropositions(String),
    #[error("{section}: {msg}")]
    Fragment { section: &'static str, msg: String },
}

impl From<LtlSyntaxError> for SpecError {
    fn from(e: LtlSyntaxError) -> Self {
        SpecError::Syntax {
            line: e.line,
            column: e.column,
            msg: e.msg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionSet {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl PropositionSet {
    pub fn for_regions<'a>(regions: impl Iterator<Item = &'a RegionId> + Clone) -> Self {
        Self {
            inputs: regions.clone().map(|r| input_prop(r.as_str())).collect(),
            outputs: regions.map(|r| output_prop(r.as_str())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len() + self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_input(&self, p: &str) -> bool {
        self.inputs.iter().any(|i| i == p)
    }

    pub fn is_output(&self, p: &str) -> bool {
        self.outputs.iter().any(|o| o == p)
    }

    /// All propositions, inputs first.
    pub fn all(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().chain(self.outputs.iter()).map(String::as_str)
    }
}

pub fn input_prop(region: &str) -> String {
    format!("{INPUT_PREFIX}{region}")
}

pub fn output_prop(region: &str) -> String {
    format!("{OUTPUT_PREFIX}{region}")
}

/// A GR(1) specification `φe ⇒ φs`. Init and transition groups are
/// conjunctions of their entries; each liveness entry is a separate
/// always-eventually goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gr1Spec {
    pub props: PropositionSet,
    pub env_init: Vec<Ltl>,
    pub env_trans: Vec<Ltl>,
    pub env_live: Vec<Ltl>,
    pub sys_init: Vec<Ltl>,
    pub sys_trans: Vec<Ltl>,
    pub sys_live: Vec<Ltl>,
}

impl Gr1Spec {
    /// Checks atom closure and that each group stays inside the fragment.
    pub fn validate(&self) -> Result<(), SpecError> {
        for p in &self.props.inputs {
            if self.props.is_output(p) {
                return Err(SpecError::OverlappingPropositions(p.clone()));
            }
        }
        let groups: [(&'static str, &Vec<Ltl>, Option<bool>); 6] = [
            ("ENV_INIT", &self.env_init, None),
            ("ENV_TRANS", &self.env_trans, Some(false)),
            ("ENV_LIVENESS", &self.env_live, None),
            ("SYS_INIT", &self.sys_init, None),
            ("SYS_TRANS", &self.sys_trans, Some(true)),
            ("SYS_LIVENESS", &self.sys_live, None),
        ];
        for (section, group, next_allowed) in groups {
            for f in group {
                for a in f.atoms() {
                    if !self.props.all().any(|p| p == a) {
                        return Err(SpecError::UndeclaredAtom {
                            section,
                            atom: a.to_string(),
                        });
                    }
                }
                if has_temporal(f) {
                    return Err(SpecError::Fragment {
                        section,
                        msg: format!("temporal operator in `{f}`"),
                    });
                }
                if has_nested_next(f, false) {
                    return Err(SpecError::Fragment {
                        section,
                        msg: format!("nested next in `{f}`"),
                    });
                }
                let nexts = f.next_atoms();
                match next_allowed {
                    None if !nexts.is_empty() => {
                        return Err(SpecError::Fragment {
                            section,
                            msg: format!("next operator in `{f}`"),
                        })
                    }
                    Some(false) => {
                        if let Some(a) = nexts.iter().find(|a| !self.props.is_input(a)) {
                            return Err(SpecError::Fragment {
                                section,
                                msg: format!("environment cannot constrain next value of output `{a}`"),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
        if self.env_live.is_empty() || self.sys_live.is_empty() {
            return Err(SpecError::Fragment {
                section: if self.env_live.is_empty() { "ENV_LIVENESS" } else { "SYS_LIVENESS" },
                msg: "liveness list is empty (use TRUE)".into(),
            });
        }
        Ok(())
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        [
            &self.env_init,
            &self.env_trans,
            &self.env_live,
            &self.sys_init,
            &self.sys_trans,
            &self.sys_live,
        ]
        .into_iter()
        .flatten()
        .flat_map(|f| f.atoms())
        .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let lines: [Vec<String>; 8] = [
            self.props.inputs.clone(),
            self.props.outputs.clone(),
            self.env_init.iter().map(Ltl::to_string).collect(),
            self.env_trans.iter().map(Ltl::to_string).collect(),
            self.env_live.iter().map(Ltl::to_string).collect(),
            self.sys_init.iter().map(Ltl::to_string).collect(),
            self.sys_trans.iter().map(Ltl::to_string).collect(),
            self.sys_live.iter().map(Ltl::to_string).collect(),
        ];
        for (i, (header, body)) in SECTIONS.iter().zip(lines).enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "{header}");
            for l in body {
                let _ = writeln!(out, "{l}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Gr1Spec, SpecError> {
        let mut sections: [Option<Vec<(usize, usize, &str)>>; 8] = Default::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r').trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                let idx = SECTIONS.iter().position(|s| *s == line).ok_or_else(|| SpecError::Syntax {
                    line: line_no,
                    column: 1,
                    msg: format!("unknown section {line}"),
                })?;
                if sections[idx].is_some() {
                    return Err(SpecError::Syntax {
                        line: line_no,
                        column: 1,
                        msg: format!("duplicate section {line}"),
                    });
                }
                sections[idx] = Some(Vec::new());
                current = Some(idx);
                continue;
            }
            let idx = current.ok_or_else(|| SpecError::Syntax {
                line: line_no,
                column: 1,
                msg: "content before the first section header".into(),
            })?;
            let offset = raw.len() - raw.trim_start().len();
            sections[idx].as_mut().expect("section opened").push((line_no, offset, line));
        }
        let mut take = |i: usize| -> Result<Vec<(usize, usize, &str)>, SpecError> {
            sections[i].take().ok_or_else(|| SpecError::Syntax {
                line: text.lines().count().max(1),
                column: 1,
                msg: format!("missing section {}", SECTIONS[i]),
            })
        };
        let props_of = |lines: Vec<(usize, usize, &str)>| -> Result<Vec<String>, SpecError> {
            lines
                .into_iter()
                .map(|(line, _, p)| {
                    if crate::world::is_valid_id(p) {
                        Ok(p.to_string())
                    } else {
                        Err(SpecError::Syntax {
                            line,
                            column: 1,
                            msg: format!("invalid proposition `{p}`"),
                        })
                    }
                })
                .collect()
        };
        let formulas = |lines: Vec<(usize, usize, &str)>| -> Result<Vec<Ltl>, SpecError> {
            lines
                .into_iter()
                .map(|(line, offset, f)| {
                    ltl::parse_line(f, line).map_err(|mut e| {
                        e.column += offset;
                        SpecError::from(e)
                    })
                })
                .collect()
        };
        let inputs = props_of(take(0)?)?;
        let outputs = props_of(take(1)?)?;
        let or_true = |mut v: Vec<Ltl>| {
            if v.is_empty() {
                v.push(Ltl::True);
            }
            v
        };
        let spec = Gr1Spec {
            props: PropositionSet { inputs, outputs },
            env_init: formulas(take(2)?)?,
            env_trans: formulas(take(3)?)?,
            env_live: or_true(formulas(take(4)?)?),
            sys_init: formulas(take(5)?)?,
            sys_trans: formulas(take(6)?)?,
            sys_live: or_true(formulas(take(7)?)?),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn has_temporal(f: &Ltl) -> bool {
    match f {
        Ltl::Until(..) | Ltl::Eventually(_) | Ltl::Always(_) => true,
        Ltl::True | Ltl::Atom(_) => false,
        Ltl::Not(a) | Ltl::Next(a) => has_temporal(a),
        Ltl::Or(a, b) | Ltl::And(a, b) | Ltl::Implies(a, b) | Ltl::Iff(a, b) => {
            has_temporal(a) || has_temporal(b)
        }
    }
}

fn has_nested_next(f: &Ltl, under: bool) -> bool {
    match f {
        Ltl::Next(a) => under || has_nested_next(a, true),
        Ltl::True | Ltl::Atom(_) => false,
        Ltl::Not(a) | Ltl::Eventually(a) | Ltl::Always(a) => has_nested_next(a, under),
        Ltl::Or(a, b) | Ltl::And(a, b) | Ltl::Implies(a, b) | Ltl::Iff(a, b) | Ltl::Until(a, b) => {
            has_nested_next(a, under) || has_nested_next(b, under)
        }
    }
}

/// `robot`'s proposition true and every other one false, e.g.
/// `!in_kibo & !in_harmony & in_columbus`.
fn one_hot(props: &[String], on: &str) -> Ltl {
    conj(props.iter().map(|p| if p == on { atom(p) } else { not(atom(p)) }))
}

/// Compiles the navigation specification for driving the robot to `goal`.
///
/// Environment: the sensed location is one-hot; while commanded toward a
/// connected region the robot either stays or arrives, otherwise it stays;
/// and every persistent command is eventually obeyed.
/// System: the command is one-hot, is held until arrival, may only be
/// switched to a region adjacent to the current one, and the goal region
/// is visited infinitely often.
pub fn build_spec(w: &WorldModel, goal: &SemanticSymbol) -> Result<Gr1Spec, SpecError> {
    let SemanticSymbol::Action(action) = goal else {
        return Err(SpecError::NotAnAction(goal.to_string()));
    };
    navigation_spec(w, &action.goal)
}

pub fn navigation_spec(w: &WorldModel, goal: &RegionId) -> Result<Gr1Spec, SpecError> {
    let robot = w.robot_at().ok_or(WorldError::EmptyWorld)?.clone();
    if w.region(goal.as_str()).is_none() {
        return Err(WorldError::UnknownRegion(goal.to_string()).into());
    }
    let regions: Vec<&RegionId> = w.region_ids().collect();
    let props = PropositionSet::for_regions(regions.iter().copied());
    let ins = |r: &RegionId| atom(&input_prop(r.as_str()));
    let gos = |r: &RegionId| atom(&output_prop(r.as_str()));

    let env_init = vec![one_hot(&props.inputs, &input_prop(robot.as_str()))];

    let mut env_trans = vec![exactly_one(
        &regions.iter().map(|r| next(ins(r))).collect::<Vec<_>>(),
    )];
    for a in &regions {
        for b in &regions {
            let premise = ltl::and(ins(a), gos(b));
            let conclusion = if a != b && w.is_connected(a.as_str(), b.as_str())? {
                or(next(ins(a)), next(ins(b)))
            } else {
                next(ins(a))
            };
            env_trans.push(implies(premise, conclusion));
        }
    }

    let env_live = regions.iter().map(|b| or(ins(b), not(gos(b)))).collect();

    let sys_init = vec![one_hot(&props.outputs, &output_prop(robot.as_str()))];

    let mut sys_trans = vec![exactly_one(
        &regions.iter().map(|r| next(gos(r))).collect::<Vec<_>>(),
    )];
    for b in &regions {
        sys_trans.push(implies(ltl::and(gos(b), not(ins(b))), next(gos(b))));
    }
    for a in &regions {
        for b in &regions {
            if a != b && !w.is_connected(a.as_str(), b.as_str())? {
                sys_trans.push(implies(ltl::and(ins(a), not(gos(b))), not(next(gos(b)))));
            }
        }
    }

    let sys_live = vec![ins(goal)];

    let spec = Gr1Spec {
        props,
        env_init,
        env_trans,
        env_live,
        sys_init,
        sys_trans,
        sys_live,
    };
    debug_assert!(spec.validate().is_ok());
    Ok(spec)
}
