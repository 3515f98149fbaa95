use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LanguageError;
use crate::world::{ConnectivityRelation, RegionId, WorldError, WorldModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Object,
    ConnectivityRelation,
    SpatialRelation,
    Action,
}

impl SymbolKind {
    pub fn name(self) -> &'static str {
        match self {
            SymbolKind::Object => "Object",
            SymbolKind::ConnectivityRelation => "ConnectivityRelation",
            SymbolKind::SpatialRelation => "SpatialRelation",
            SymbolKind::Action => "Action",
        }
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Navigation is the only action verb grounded in this artifact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NavigateAction {
    pub goal: RegionId,
}

/// Declared for completeness of the symbol vocabulary; never instantiated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpatialRelation {
    pub relation: String,
    pub figure: RegionId,
    pub landmark: RegionId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemanticSymbol {
    Object(RegionId),
    ConnectivityRelation(ConnectivityRelation),
    SpatialRelation(SpatialRelation),
    Action(NavigateAction),
}

impl SemanticSymbol {
    pub fn navigate(goal: &str) -> Result<Self, WorldError> {
        Ok(SemanticSymbol::Action(NavigateAction {
            goal: RegionId::new(goal)?,
        }))
    }

    pub fn connectivity(a: &str, b: &str) -> Result<Self, WorldError> {
        Ok(SemanticSymbol::ConnectivityRelation(ConnectivityRelation::between(a, b)?))
    }

    pub fn object(r: &str) -> Result<Self, WorldError> {
        Ok(SemanticSymbol::Object(RegionId::new(r)?))
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            SemanticSymbol::Object(_) => SymbolKind::Object,
            SemanticSymbol::ConnectivityRelation(_) => SymbolKind::ConnectivityRelation,
            SemanticSymbol::SpatialRelation(_) => SymbolKind::SpatialRelation,
            SemanticSymbol::Action(_) => SymbolKind::Action,
        }
    }

    /// Region ids referenced by the payload.
    pub fn regions(&self) -> Vec<&RegionId> {
        match self {
            SemanticSymbol::Object(r) => vec![r],
            SemanticSymbol::ConnectivityRelation(c) => vec![c.a(), c.b()],
            SemanticSymbol::SpatialRelation(s) => vec![&s.figure, &s.landmark],
            SemanticSymbol::Action(a) => vec![&a.goal],
        }
    }
}

impl fmt::Display for SemanticSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticSymbol::Object(r) => write!(f, "Object{{{r}}}"),
            SemanticSymbol::ConnectivityRelation(c) => {
                write!(f, "ConnectivityRelation{{{}, {}}}", c.a(), c.b())
            }
            SemanticSymbol::SpatialRelation(s) => {
                write!(f, "SpatialRelation{{{}, {}, {}}}", s.relation, s.figure, s.landmark)
            }
            SemanticSymbol::Action(a) => write!(f, "Action{{navigate, {}}}", a.goal),
        }
    }
}

impl FromStr for SemanticSymbol {
    type Err = LanguageError;

    /// Parses literals like `Action{navigate, kibo}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LanguageError::BadSymbol(s.to_string());
        let s = s.trim();
        let (kind, rest) = s.split_once('{').ok_or_else(bad)?;
        let body = rest.strip_suffix('}').ok_or_else(bad)?;
        let args: Vec<&str> = body.split(',').map(str::trim).collect();
        let id = |a: &str| RegionId::new(a).map_err(|_| bad());
        match (kind.trim(), args.as_slice()) {
            ("Object", [r]) => Ok(SemanticSymbol::Object(id(r)?)),
            ("ConnectivityRelation", [a, b]) => Ok(SemanticSymbol::ConnectivityRelation(
                ConnectivityRelation::new(id(a)?, id(b)?).map_err(|_| bad())?,
            )),
            ("SpatialRelation", [rel, a, b]) => Ok(SemanticSymbol::SpatialRelation(SpatialRelation {
                relation: rel.to_string(),
                figure: id(a)?,
                landmark: id(b)?,
            })),
            ("Action", ["navigate", g]) => Ok(SemanticSymbol::Action(NavigateAction { goal: id(g)? })),
            _ => Err(bad()),
        }
    }
}

/// The grounded vocabulary instantiated from one world snapshot.
///
/// Order: every Object in region insertion order, then every region pair
/// `(i, j)` with `i < j` in insertion order as a ConnectivityRelation
/// (whether or not the world knows it), then one navigate Action per region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSpace {
    symbols: Vec<SemanticSymbol>,
    regions: Vec<RegionId>,
}

impl SymbolSpace {
    pub fn instantiate(w: &WorldModel) -> Result<SymbolSpace, LanguageError> {
        let regions: Vec<RegionId> = w.region_ids().cloned().collect();
        if regions.is_empty() {
            return Err(LanguageError::World(WorldError::EmptyWorld));
        }
        let mut symbols: Vec<SemanticSymbol> =
            regions.iter().cloned().map(SemanticSymbol::Object).collect();
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                let rel = ConnectivityRelation::new(a.clone(), b.clone())?;
                symbols.push(SemanticSymbol::ConnectivityRelation(rel));
            }
        }
        symbols.extend(
            regions
                .iter()
                .map(|r| SemanticSymbol::Action(NavigateAction { goal: r.clone() })),
        );
        Ok(SymbolSpace { symbols, regions })
    }

    pub fn symbols(&self) -> &[SemanticSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.regions
    }

    pub fn index_of(&self, s: &SemanticSymbol) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }

    pub fn connectivity_relations(&self) -> impl Iterator<Item = &ConnectivityRelation> {
        self.symbols.iter().filter_map(|s| match s {
            SemanticSymbol::ConnectivityRelation(c) => Some(c),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom2(n: usize) -> usize {
        n * n.saturating_sub(1) / 2
    }

    #[test]
    fn symbol_counts_match_enumeration() {
        let names = ["kibo", "harmony", "columbus", "destiny", "unity"];
        for n in 1..=names.len() {
            let w = WorldModel::from_parts(&names[..n], &[], names[0]).unwrap();
            let space = SymbolSpace::instantiate(&w).unwrap();
            let count = |k: SymbolKind| space.symbols().iter().filter(|s| s.kind() == k).count();
            assert_eq!(count(SymbolKind::Object), n);
            assert_eq!(count(SymbolKind::ConnectivityRelation), binom2(n));
            assert_eq!(count(SymbolKind::Action), n);
            assert_eq!(count(SymbolKind::SpatialRelation), 0);
            assert_eq!(space.len(), 2 * n + binom2(n));
        }
    }

    #[test]
    fn three_region_order() {
        let w = WorldModel::from_parts(&["kibo", "columbus", "harmony"], &[("kibo", "harmony")], "kibo").unwrap();
        let space = SymbolSpace::instantiate(&w).unwrap();
        let lits: Vec<String> = space.symbols().iter().map(|s| s.to_string()).collect();
        assert_eq!(
            lits,
            [
                "Object{kibo}",
                "Object{columbus}",
                "Object{harmony}",
                "ConnectivityRelation{columbus, kibo}",
                "ConnectivityRelation{harmony, kibo}",
                "ConnectivityRelation{columbus, harmony}",
                "Action{navigate, kibo}",
                "Action{navigate, columbus}",
                "Action{navigate, harmony}",
            ]
        );
        assert_eq!(SymbolSpace::instantiate(&w).unwrap(), space);
        assert!(SymbolSpace::instantiate(&WorldModel::new()).is_err());
    }

    #[test]
    fn literal_round_trip() {
        for lit in [
            "Object{kibo}",
            "ConnectivityRelation{harmony, kibo}",
            "Action{navigate, kibo}",
            "SpatialRelation{left_of, kibo, harmony}",
        ] {
            assert_eq!(lit.parse::<SemanticSymbol>().unwrap().to_string(), lit);
        }
        assert_eq!(
            "ConnectivityRelation{kibo,harmony}".parse::<SemanticSymbol>().unwrap().to_string(),
            "ConnectivityRelation{harmony, kibo}"
        );
        for bad in ["Object{}", "Action{fly, kibo}", "Thing{kibo}", "ConnectivityRelation{kibo, kibo}", "Object{kibo"] {
            assert!(bad.parse::<SemanticSymbol>().is_err(), "{bad}");
        }
    }
}
