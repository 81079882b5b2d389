//! Atomic probability spaces, events and countable partitions.
//!
//! Two kinds of space are supported. A finite space has explicitly listed
//! atom probabilities. The geometric space has countably many atoms
//! `A_1, A_2, ...` with `P(A_n) = 2^-n`; its truncation `N` fixes how many
//! atoms are scanned explicitly by certificate and sampling routines.
//!
//! Atoms are numbered from 1. Every atom has positive mass, so almost-sure
//! statements reduce to per-atom statements.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::L0Error;
use crate::rational::Rational;

pub const DEFAULT_TRUNCATION: usize = 64;

#[derive(Debug, PartialEq, Eq)]
enum SpaceKind {
    Finite(Vec<Rational>),
    Geometric { truncation: usize },
}

/// The ambient `(Ω, F, P)`. Cheap to clone.
#[derive(Clone, Debug)]
pub struct AtomSpace(Arc<SpaceKind>);

impl PartialEq for AtomSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for AtomSpace {}

impl AtomSpace {
    /// A finite space with the given atom probabilities.
    pub fn finite(probs: Vec<Rational>) -> Result<Self, L0Error> {
        if probs.is_empty() {
            return Err(L0Error::ProbSumNotOne("0".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_positive()) {
            return Err(L0Error::NonPositiveProb(p.to_string()));
        }
        let total = probs.iter().fold(Rational::zero(), |acc, p| acc + p);
        if total != Rational::one() {
            return Err(L0Error::ProbSumNotOne(total.to_string()));
        }
        Ok(AtomSpace(Arc::new(SpaceKind::Finite(probs))))
    }

    /// Uniform finite space with `n` atoms.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "a space needs at least one atom");
        let p = Rational::new(1, n as i64);
        Self::finite(vec![p; n]).expect("uniform probabilities are valid")
    }

    /// The countable space with `P(A_n) = 2^-n`. Panics if `truncation == 0`.
    pub fn geometric(truncation: usize) -> Self {
        assert!(truncation >= 1, "truncation must be at least 1");
        AtomSpace(Arc::new(SpaceKind::Geometric { truncation }))
    }

    pub fn is_countable(&self) -> bool {
        matches!(*self.0, SpaceKind::Geometric { .. })
    }

    /// Number of atoms of a finite space; `None` on the countable space.
    pub fn atom_count(&self) -> Option<usize> {
        match &*self.0 {
            SpaceKind::Finite(p) => Some(p.len()),
            SpaceKind::Geometric { .. } => None,
        }
    }

    /// Explicit scanning depth: the atom count, or `N` on the countable space.
    pub fn truncation(&self) -> usize {
        match &*self.0 {
            SpaceKind::Finite(p) => p.len(),
            SpaceKind::Geometric { truncation } => *truncation,
        }
    }

    pub fn is_valid_atom(&self, index: usize) -> bool {
        index >= 1 && self.atom_count().is_none_or(|n| index <= n)
    }

    pub fn atom_prob(&self, index: usize) -> Result<Rational, L0Error> {
        if !self.is_valid_atom(index) {
            return Err(L0Error::InvalidAtomIndex { index });
        }
        Ok(match &*self.0 {
            SpaceKind::Finite(p) => p[index - 1].clone(),
            SpaceKind::Geometric { .. } => geometric_mass(index),
        })
    }

    /// `P(A_1 ∪ ... ∪ A_n)`.
    pub fn prefix_mass(&self, n: usize) -> Rational {
        match &*self.0 {
            SpaceKind::Finite(p) => p.iter().take(n).fold(Rational::zero(), |a, b| a + b),
            SpaceKind::Geometric { .. } => Rational::one() - geometric_mass(n),
        }
    }

    pub fn event_prob(&self, e: &Event) -> Result<Rational, L0Error> {
        e.validate(self)?;
        let listed = e
            .indices()
            .iter()
            .map(|&i| self.atom_prob(i))
            .try_fold(Rational::zero(), |acc, p| p.map(|p| acc + p))?;
        Ok(match e {
            Event::FiniteSet(_) => listed,
            Event::Cofinite(_) => Rational::one() - listed,
        })
    }

    /// The partition of Ω into its atoms.
    pub fn canonical_partition(&self) -> Partition {
        match &*self.0 {
            SpaceKind::Finite(p) => {
                Partition::Parts((1..=p.len()).map(Event::singleton).collect())
            }
            SpaceKind::Geometric { .. } => Partition::CanonicalSingletons,
        }
    }
}

fn geometric_mass(n: usize) -> Rational {
    Rational::pow2(-(i32::try_from(n).expect("atom index fits in i32")))
}

impl fmt::Display for AtomSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            SpaceKind::Finite(p) => {
                let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "finite:{}", parts.join(","))
            }
            SpaceKind::Geometric { truncation } => write!(f, "geometric:N={truncation}"),
        }
    }
}

impl FromStr for AtomSpace {
    type Err = L0Error;

    /// Parses `finite:1/2,1/4,1/4` or `geometric:N=64` (plain `geometric`
    /// uses the default truncation).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("finite:") {
            let probs = rest
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<Rational>, _>>()?;
            return AtomSpace::finite(probs);
        }
        if s == "geometric" {
            return Ok(AtomSpace::geometric(DEFAULT_TRUNCATION));
        }
        if let Some(rest) = s.strip_prefix("geometric:") {
            let n = rest
                .trim()
                .strip_prefix("N=")
                .and_then(|n| n.trim().parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| L0Error::Parse(format!("bad geometric descriptor {s:?}")))?;
            return Ok(AtomSpace::geometric(n));
        }
        Err(L0Error::Parse(format!("unknown space descriptor {s:?}")))
    }
}

/// An event of the finite/cofinite algebra generated by the atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Event {
    /// The union of the listed atoms.
    FiniteSet(BTreeSet<usize>),
    /// Every atom except the listed ones.
    Cofinite(BTreeSet<usize>),
}

impl Event {
    pub fn empty() -> Self {
        Event::FiniteSet(BTreeSet::new())
    }

    pub fn whole() -> Self {
        Event::Cofinite(BTreeSet::new())
    }

    pub fn singleton(i: usize) -> Self {
        Event::FiniteSet(BTreeSet::from([i]))
    }

    pub fn atoms<I: IntoIterator<Item = usize>>(it: I) -> Self {
        Event::FiniteSet(it.into_iter().collect())
    }

    fn indices(&self) -> &BTreeSet<usize> {
        match self {
            Event::FiniteSet(s) | Event::Cofinite(s) => s,
        }
    }

    pub fn contains(&self, atom: usize) -> bool {
        match self {
            Event::FiniteSet(s) => s.contains(&atom),
            Event::Cofinite(s) => !s.contains(&atom),
        }
    }

    /// Largest atom index mentioned explicitly (0 if none).
    pub fn max_listed(&self) -> usize {
        self.indices().iter().next_back().copied().unwrap_or(0)
    }

    pub fn validate(&self, space: &AtomSpace) -> Result<(), L0Error> {
        match self.indices().iter().find(|&&i| !space.is_valid_atom(i)) {
            Some(&index) => Err(L0Error::InvalidAtomIndex { index }),
            None => Ok(()),
        }
    }

    pub fn complement(&self) -> Event {
        match self {
            Event::FiniteSet(s) => Event::Cofinite(s.clone()),
            Event::Cofinite(s) => Event::FiniteSet(s.clone()),
        }
    }

    pub fn union(&self, other: &Event) -> Event {
        use Event::*;
        match (self, other) {
            (FiniteSet(a), FiniteSet(b)) => FiniteSet(a | b),
            (Cofinite(a), Cofinite(b)) => Cofinite(a & b),
            (FiniteSet(a), Cofinite(b)) | (Cofinite(b), FiniteSet(a)) => Cofinite(b - a),
        }
    }

    pub fn intersection(&self, other: &Event) -> Event {
        self.complement().union(&other.complement()).complement()
    }

    pub fn is_empty_in(&self, space: &AtomSpace) -> bool {
        match (self, space.atom_count()) {
            (Event::FiniteSet(s), _) => s.is_empty(),
            (Event::Cofinite(s), Some(n)) => (1..=n).all(|i| s.contains(&i)),
            (Event::Cofinite(_), None) => false,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        match self {
            Event::FiniteSet(_) => write!(f, "{{{}}}", list.join(",")),
            Event::Cofinite(_) => write!(f, "co{{{}}}", list.join(",")),
        }
    }
}

impl FromStr for Event {
    type Err = L0Error;

    /// `{1,2}` or `co{1,2}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (cofinite, body) = match s.strip_prefix("co") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let inner = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| L0Error::Parse(format!("bad event {s:?}")))?;
        let set = inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| L0Error::Parse(format!("bad atom index {t:?}")))
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(if cofinite {
            Event::Cofinite(set)
        } else {
            Event::FiniteSet(set)
        })
    }
}

/// A countable measurable partition of Ω.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Partition {
    /// Finitely many pairwise disjoint events covering Ω.
    Parts(Vec<Event>),
    /// `{A_n}` on the countable space.
    CanonicalSingletons,
}

impl Partition {
    /// Validates that `events` are pairwise disjoint and cover `space`.
    pub fn from_events(space: &AtomSpace, events: Vec<Event>) -> Result<Self, L0Error> {
        for e in &events {
            e.validate(space)?;
        }
        for (i, a) in events.iter().enumerate() {
            for b in &events[i + 1..] {
                if !a.intersection(b).is_empty_in(space) {
                    return Err(L0Error::NotAPartition(format!("{a} and {b} overlap")));
                }
            }
        }
        let union = events.iter().fold(Event::empty(), |acc, e| acc.union(e));
        if !union.complement().is_empty_in(space) {
            return Err(L0Error::NotAPartition(format!(
                "atoms in {} are not covered",
                union.complement()
            )));
        }
        Ok(Partition::Parts(events))
    }

    /// Index of the part containing `atom`.
    pub fn part_of(&self, atom: usize) -> usize {
        match self {
            Partition::Parts(parts) => parts
                .iter()
                .position(|e| e.contains(atom))
                .expect("partition covers every atom"),
            Partition::CanonicalSingletons => atom - 1,
        }
    }

    /// Sum of the part probabilities: the finite sum for listed parts, the
    /// prefix `1 - 2^-N` plus tail mass `2^-N` for the canonical partition.
    pub fn total_mass(&self, space: &AtomSpace) -> Result<Rational, L0Error> {
        match self {
            Partition::Parts(parts) => parts
                .iter()
                .map(|e| space.event_prob(e))
                .try_fold(Rational::zero(), |acc, p| p.map(|p| acc + p)),
            Partition::CanonicalSingletons => {
                let n = space.truncation();
                let prefix = (1..=n)
                    .map(|i| space.atom_prob(i))
                    .try_fold(Rational::zero(), |acc, p| p.map(|p| acc + p))?;
                let tail = space.event_prob(&Event::Cofinite((1..=n).collect()))?;
                Ok(prefix + tail)
            }
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Parts(parts) => {
                let list: Vec<String> = parts.iter().map(|e| e.to_string()).collect();
                write!(f, "[{}]", list.join(","))
            }
            Partition::CanonicalSingletons => f.write_str("canonical"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn f3() -> AtomSpace {
        AtomSpace::finite(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap()
    }

    #[test]
    fn finite_construction() {
        let s = f3();
        assert_eq!(s.atom_count(), Some(3));
        assert_eq!(s.atom_prob(2).unwrap(), q(1, 4));
        let one = AtomSpace::finite(vec![Rational::one()]).unwrap();
        assert_eq!(one.atom_count(), Some(1));
    }

    #[test]
    fn finite_construction_errors() {
        assert!(matches!(
            AtomSpace::finite(vec![q(1, 2), q(1, 2), q(1, 4)]),
            Err(L0Error::ProbSumNotOne(s)) if s == "5/4"
        ));
        assert!(matches!(
            AtomSpace::finite(vec![q(1, 1), q(0, 1)]),
            Err(L0Error::NonPositiveProb(_))
        ));
        assert!(matches!(
            AtomSpace::finite(vec![q(3, 2), q(-1, 2)]),
            Err(L0Error::NonPositiveProb(_))
        ));
    }

    #[test]
    fn geometric_masses() {
        let g = AtomSpace::geometric(64);
        assert_eq!(g.atom_prob(1).unwrap(), q(1, 2));
        assert_eq!(g.atom_prob(3).unwrap(), q(1, 8));
        assert_eq!(g.prefix_mass(64), Rational::one() - Rational::pow2(-64));
        let direct = (1..=64).fold(Rational::zero(), |a, i| a + g.atom_prob(i).unwrap());
        assert_eq!(direct, g.prefix_mass(64));
        assert!(matches!(g.atom_prob(0), Err(L0Error::InvalidAtomIndex { index: 0 })));
    }

    #[test]
    fn event_probabilities() {
        let s = f3();
        assert_eq!(s.event_prob(&Event::singleton(2)).unwrap(), q(1, 4));
        assert_eq!(s.event_prob(&Event::empty()).unwrap(), Rational::zero());
        let g = AtomSpace::geometric(64);
        let e = Event::Cofinite(BTreeSet::from([1, 2]));
        assert_eq!(g.event_prob(&e).unwrap(), q(1, 4));
        assert!(matches!(
            s.event_prob(&Event::singleton(4)),
            Err(L0Error::InvalidAtomIndex { index: 4 })
        ));
    }

    #[test]
    fn canonical_partitions() {
        let s = f3();
        let p = s.canonical_partition();
        assert_eq!(
            p,
            Partition::Parts(vec![Event::singleton(1), Event::singleton(2), Event::singleton(3)])
        );
        assert_eq!(p.total_mass(&s).unwrap(), Rational::one());
        let g = AtomSpace::geometric(64);
        let p = g.canonical_partition();
        assert_eq!(p, Partition::CanonicalSingletons);
        assert_eq!(p.total_mass(&g).unwrap(), Rational::one());
    }

    #[test]
    fn partition_validation() {
        let s = f3();
        let ok = Partition::from_events(&s, vec![Event::atoms([1]), Event::atoms([2, 3])]);
        assert!(ok.is_ok());
        let overlap = Partition::from_events(&s, vec![Event::atoms([1, 2]), Event::atoms([2, 3])]);
        assert!(matches!(overlap, Err(L0Error::NotAPartition(_))));
        let gap = Partition::from_events(&s, vec![Event::atoms([1])]);
        assert!(matches!(gap, Err(L0Error::NotAPartition(_))));
        let g = AtomSpace::geometric(8);
        let ok = Partition::from_events(
            &g,
            vec![Event::atoms([1, 3]), Event::Cofinite(BTreeSet::from([1, 3]))],
        );
        assert!(ok.is_ok());
        let two_cofinite =
            Partition::from_events(&g, vec![Event::Cofinite(BTreeSet::from([1])), Event::whole()]);
        assert!(two_cofinite.is_err());
    }

    #[test]
    fn descriptors() {
        let s: AtomSpace = "finite:1/2,1/4,1/4".parse().unwrap();
        assert_eq!(s, f3());
        assert_eq!(s.to_string(), "finite:1/2,1/4,1/4");
        let g: AtomSpace = "geometric:N=64".parse().unwrap();
        assert_eq!(g.truncation(), 64);
        assert!(matches!(
            "finite:1/2,1/2,1/4".parse::<AtomSpace>(),
            Err(L0Error::ProbSumNotOne(_))
        ));
        assert!("geometric:N=0".parse::<AtomSpace>().is_err());
        assert!("poisson".parse::<AtomSpace>().is_err());
        let e: Event = "co{1,2}".parse().unwrap();
        assert_eq!(e.to_string(), "co{1,2}");
    }

    #[test]
    fn event_complement_sums_to_one() {
        let g = AtomSpace::geometric(16);
        for e in [
            Event::atoms([1, 5, 9]),
            Event::Cofinite(BTreeSet::from([2, 3])),
            Event::empty(),
            Event::whole(),
        ] {
            let total = g.event_prob(&e).unwrap() + g.event_prob(&e.complement()).unwrap();
            assert_eq!(total, Rational::one());
        }
    }
}
