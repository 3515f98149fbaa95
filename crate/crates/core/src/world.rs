//! Symbolic world model: regions, undirected connectivity and the robot's
//! location, plus the Kripke-structure view used to derive transitions.
//!
//! Worlds are immutable values. Every update returns a fresh `WorldModel`,
//! which is what lets the repair loop branch into hypothetical worlds without
//! touching the one the robot actually believes in.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("region `{0}` already exists")]
    DuplicateRegion(String),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("a region cannot be connected to itself (`{0}`)")]
    SelfConnection(String),
    #[error("relation {0} is already present")]
    AlreadyPresent(ConnectivityRelation),
    #[error("relation {0} is not present")]
    NotPresent(ConnectivityRelation),
    #[error("the world has no regions")]
    EmptyWorld,
    #[error("invalid region id `{0}`: expected [a-z][a-z0-9_]*")]
    InvalidId(String),
    #[error("world file line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Lowercase region identifier, e.g. `kibo`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RegionId(String);

impl RegionId {
    pub fn new(id: impl Into<String>) -> Result<Self, WorldError> {
        let id = id.into();
        if is_valid_id(&id) {
            Ok(Self(id))
        } else {
            Err(WorldError::InvalidId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

impl TryFrom<String> for RegionId {
    type Error = WorldError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<RegionId> for String {
    fn from(r: RegionId) -> String {
        r.0
    }
}

impl FromStr for RegionId {
    type Err = WorldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for RegionId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for RegionId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    pub display_name: String,
}

impl Region {
    pub fn new(id: &str, display_name: &str) -> Result<Self, WorldError> {
        Ok(Self {
            id: RegionId::new(id)?,
            display_name: display_name.to_string(),
        })
    }
}

/// Undirected connection between two distinct regions, stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConnectivityRelation {
    a: RegionId,
    b: RegionId,
}

impl ConnectivityRelation {
    pub fn new(x: RegionId, y: RegionId) -> Result<Self, WorldError> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Ok(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => Err(WorldError::SelfConnection(x.0)),
        }
    }

    pub fn between(x: &str, y: &str) -> Result<Self, WorldError> {
        Self::new(RegionId::new(x)?, RegionId::new(y)?)
    }

    pub fn a(&self) -> &RegionId {
        &self.a
    }

    pub fn b(&self) -> &RegionId {
        &self.b
    }

    pub fn contains(&self, r: &RegionId) -> bool {
        &self.a == r || &self.b == r
    }

    /// The endpoint opposite `r`, if `r` is an endpoint.
    pub fn other(&self, r: &RegionId) -> Option<&RegionId> {
        if &self.a == r {
            Some(&self.b)
        } else if &self.b == r {
            Some(&self.a)
        } else {
            None
        }
    }
}

impl fmt::Display for ConnectivityRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct WorldModel {
    regions: Vec<Region>,
    connectivity: BTreeSet<ConnectivityRelation>,
    robot_at: Option<RegionId>,
}

impl WorldModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a world from region ids (display names derived), relations and
    /// the robot location. Mostly a convenience for fixtures and tests.
    pub fn from_parts(
        regions: &[&str],
        connections: &[(&str, &str)],
        robot_at: &str,
    ) -> Result<Self, WorldError> {
        let mut w = WorldModel::new();
        for r in regions {
            w = w.add_region(Region::new(r, &format!("the {r} capsule"))?)?;
        }
        for (a, b) in connections {
            w = w.assert_connectivity(a, b)?.0;
        }
        w.set_robot_location(robot_at)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_ids(&self) -> impl Iterator<Item = &RegionId> + '_ {
        self.regions.iter().map(|r| &r.id)
    }

    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    /// Position of a region in insertion order.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }

    pub fn connectivity(&self) -> &BTreeSet<ConnectivityRelation> {
        &self.connectivity
    }

    /// Robot location. The first region added is the default until set.
    pub fn robot_at(&self) -> Option<&RegionId> {
        self.robot_at.as_ref()
    }

    fn require(&self, id: &str) -> Result<&RegionId, WorldError> {
        self.region(id)
            .map(|r| &r.id)
            .ok_or_else(|| WorldError::UnknownRegion(id.to_string()))
    }

    pub fn add_region(&self, r: Region) -> Result<WorldModel, WorldError> {
        if self.region(r.id.as_str()).is_some() {
            return Err(WorldError::DuplicateRegion(r.id.0));
        }
        let mut w = self.clone();
        if w.robot_at.is_none() {
            w.robot_at = Some(r.id.clone());
        }
        w.regions.push(r);
        Ok(w)
    }

    pub fn assert_connectivity(&self, a: &str, b: &str) -> Result<(WorldModel, bool), WorldError> {
        let rel = ConnectivityRelation::new(self.require(a)?.clone(), self.require(b)?.clone())?;
        if self.connectivity.contains(&rel) {
            return Ok((self.clone(), false));
        }
        let mut w = self.clone();
        w.connectivity.insert(rel);
        Ok((w, true))
    }

    pub fn is_connected(&self, a: &str, b: &str) -> Result<bool, WorldError> {
        let a = self.require(a)?;
        let b = self.require(b)?;
        Ok(match ConnectivityRelation::new(a.clone(), b.clone()) {
            Ok(rel) => self.connectivity.contains(&rel),
            Err(_) => false,
        })
    }

    /// A copy of this world with one more relation. The receiver is untouched.
    pub fn hypothesize(&self, rel: &ConnectivityRelation) -> Result<WorldModel, WorldError> {
        self.require(rel.a.as_str())?;
        self.require(rel.b.as_str())?;
        if self.connectivity.contains(rel) {
            return Err(WorldError::AlreadyPresent(rel.clone()));
        }
        let mut w = self.clone();
        w.connectivity.insert(rel.clone());
        Ok(w)
    }

    pub fn remove_connectivity(&self, rel: &ConnectivityRelation) -> Result<WorldModel, WorldError> {
        if !self.connectivity.contains(rel) {
            return Err(WorldError::NotPresent(rel.clone()));
        }
        let mut w = self.clone();
        w.connectivity.remove(rel);
        Ok(w)
    }

    pub fn set_robot_location(&self, r: &str) -> Result<WorldModel, WorldError> {
        let id = self.require(r)?.clone();
        let mut w = self.clone();
        w.robot_at = Some(id);
        Ok(w)
    }

    /// Number of known connections touching `r`.
    pub fn degree(&self, r: &RegionId) -> usize {
        self.connectivity.iter().filter(|c| c.contains(r)).count()
    }

    pub fn neighbors<'a>(&'a self, r: &'a RegionId) -> impl Iterator<Item = &'a RegionId> + 'a {
        self.connectivity.iter().filter_map(move |c| c.other(r))
    }

    pub fn to_kripke(&self) -> Result<KripkeStructure, WorldError> {
        let initial = self.robot_at.clone().ok_or(WorldError::EmptyWorld)?;
        let states: Vec<RegionId> = self.region_ids().cloned().collect();
        let mut edges = BTreeSet::new();
        for s in &states {
            edges.insert((s.clone(), s.clone()));
        }
        for c in &self.connectivity {
            edges.insert((c.a.clone(), c.b.clone()));
            edges.insert((c.b.clone(), c.a.clone()));
        }
        Ok(KripkeStructure {
            states,
            edges,
            initial,
        })
    }

    /// Serializes to the line-oriented world file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.regions {
            out.push_str(&format!("region {} \"{}\"\n", r.id, r.display_name));
        }
        for c in &self.connectivity {
            out.push_str(&format!("connect {} {}\n", c.a, c.b));
        }
        if let Some(r) = &self.robot_at {
            out.push_str(&format!("robot {r}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<WorldModel, WorldError> {
        let mut w = WorldModel::new();
        let mut robot: Option<(usize, String)> = None;
        let mut connects = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |msg: &str| WorldError::Syntax {
                line: line_no,
                msg: msg.to_string(),
            };
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match kw {
                "region" => {
                    let (id, name) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| syntax("expected `region <id> \"<display name>\"`"))?;
                    let name = name.trim();
                    let name = name
                        .strip_prefix('"')
                        .and_then(|n| n.strip_suffix('"'))
                        .ok_or_else(|| syntax("display name must be double-quoted"))?;
                    if name.contains('"') {
                        return Err(syntax("display name may not contain quotes"));
                    }
                    w = w.add_region(Region::new(id, name).map_err(|e| syntax(&e.to_string()))?)
                        .map_err(|e| syntax(&e.to_string()))?;
                }
                "connect" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(syntax("expected `connect <id> <id>`"));
                    }
                    connects.push((line_no, parts[0].to_string(), parts[1].to_string()));
                }
                "robot" => {
                    if rest.split_whitespace().count() != 1 {
                        return Err(syntax("expected `robot <id>`"));
                    }
                    robot = Some((line_no, rest.to_string()));
                }
                other => return Err(syntax(&format!("unknown record `{other}`"))),
            }
        }
        for (line, a, b) in connects {
            w = w
                .assert_connectivity(&a, &b)
                .map_err(|e| WorldError::Syntax {
                    line,
                    msg: e.to_string(),
                })?
                .0;
        }
        if let Some((line, r)) = robot {
            w = w.set_robot_location(&r).map_err(|e| WorldError::Syntax {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(w)
    }
}

impl fmt::Display for WorldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Permissible-transition graph over regions. Staying put is always allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeStructure {
    pub states: Vec<RegionId>,
    pub edges: BTreeSet<(RegionId, RegionId)>,
    pub initial: RegionId,
}

impl KripkeStructure {
    pub fn permits(&self, from: &RegionId, to: &RegionId) -> bool {
        self.edges.contains(&(from.clone(), to.clone()))
    }

    pub fn successors<'a>(&'a self, from: &'a RegionId) -> impl Iterator<Item = &'a RegionId> + 'a {
        self.edges
            .iter()
            .filter(move |(a, _)| a == from)
            .map(|(_, b)| b)
    }

    /// States reachable from `from` following edges.
    pub fn reachable(&self, from: &RegionId) -> BTreeSet<RegionId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from.clone()]);
        seen.insert(from.clone());
        while let Some(s) = queue.pop_front() {
            for n in self.successors(&s) {
                if seen.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
            }
        }
        seen
    }
}
