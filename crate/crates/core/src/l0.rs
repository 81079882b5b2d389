//! The lattice-ordered ring `L⁰` and its extended version `L̄⁰`.
//!
//! On a finite space a random variable is a vector of per-atom values. On the
//! countable space it is eventually constant: an explicit head
//! `(x_1, ..., x_k)` followed by a tail value shared by every atom `> k`. The
//! head is kept normalized (no trailing entries equal to the tail), so
//! structural equality is almost-sure equality.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::L0Error;
use crate::prob_space::{AtomSpace, Event, Partition};
use crate::rational::{ExtRational, Rational};

/// A location in a random variable's representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomRef {
    Atom(usize),
    /// Every atom beyond the explicit head.
    Tail,
}

impl fmt::Display for AtomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomRef::Atom(i) => write!(f, "{i}"),
            AtomRef::Tail => f.write_str("tail"),
        }
    }
}

/// A random variable on an atomic space with values in `T`.
#[derive(Clone, PartialEq, Eq)]
pub struct Rv<T> {
    space: AtomSpace,
    head: Vec<T>,
    tail: Option<T>,
}

/// An element of `L⁰`.
pub type RandomVar = Rv<Rational>;
/// An element of `L̄⁰`.
pub type ExtRandomVar = Rv<ExtRational>;

impl<T: Clone + PartialEq> Rv<T> {
    fn build(space: &AtomSpace, mut head: Vec<T>, tail: Option<T>) -> Self {
        if let Some(t) = &tail {
            while head.last() == Some(t) {
                head.pop();
            }
        }
        Rv { space: space.clone(), head, tail }
    }

    /// Per-atom values on a finite space.
    pub fn from_values(space: &AtomSpace, values: Vec<T>) -> Result<Self, L0Error> {
        match space.atom_count() {
            Some(n) if n == values.len() => Ok(Rv::build(space, values, None)),
            _ => Err(L0Error::SpaceMismatch),
        }
    }

    /// Head and tail on the countable space. On a finite space the head is
    /// padded with the tail value.
    pub fn eventually(space: &AtomSpace, mut head: Vec<T>, tail: T) -> Result<Self, L0Error> {
        match space.atom_count() {
            None => Ok(Rv::build(space, head, Some(tail))),
            Some(n) if head.len() <= n => {
                head.resize(n, tail);
                Ok(Rv::build(space, head, None))
            }
            Some(_) => Err(L0Error::SpaceMismatch),
        }
    }

    pub fn constant(space: &AtomSpace, c: T) -> Self {
        Rv::eventually(space, Vec::new(), c).expect("empty head fits every space")
    }

    /// Builds from a per-atom function over the first `len` atoms plus a tail
    /// value (ignored on finite spaces).
    fn tabulate(space: &AtomSpace, len: usize, f: impl Fn(AtomRef) -> T) -> Self {
        match space.atom_count() {
            Some(n) => Rv::build(space, (1..=n).map(|i| f(AtomRef::Atom(i))).collect(), None),
            None => Rv::build(
                space,
                (1..=len).map(|i| f(AtomRef::Atom(i))).collect(),
                Some(f(AtomRef::Tail)),
            ),
        }
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    pub fn head(&self) -> &[T] {
        &self.head
    }

    pub fn tail(&self) -> Option<&T> {
        self.tail.as_ref()
    }

    /// Number of explicitly stored atoms.
    pub fn explicit_len(&self) -> usize {
        self.head.len()
    }

    /// Value on atom `atom` (1-based). Panics if the atom does not exist.
    pub fn value_at(&self, atom: usize) -> &T {
        assert!(self.space.is_valid_atom(atom), "atom {atom} out of range");
        match &self.tail {
            Some(t) => self.head.get(atom - 1).unwrap_or(t),
            None => &self.head[atom - 1],
        }
    }

    pub fn get(&self, at: AtomRef) -> &T {
        match at {
            AtomRef::Atom(i) => self.value_at(i),
            AtomRef::Tail => self.tail.as_ref().expect("finite spaces have no tail"),
        }
    }

    /// Every distinct location: each explicit atom, plus the tail class.
    pub fn locations(&self) -> Vec<AtomRef> {
        locations_for(&self.space, self.head.len())
    }

    pub fn entries(&self) -> impl Iterator<Item = (AtomRef, &T)> {
        let tail = self.tail.as_ref().map(|t| (AtomRef::Tail, t));
        self.head
            .iter()
            .enumerate()
            .map(|(i, v)| (AtomRef::Atom(i + 1), v))
            .chain(tail)
    }

    pub fn map<U: Clone + PartialEq>(&self, f: impl Fn(&T) -> U) -> Rv<U> {
        Rv::build(&self.space, self.head.iter().map(&f).collect(), self.tail.as_ref().map(&f))
    }

    pub fn try_map<U: Clone + PartialEq>(
        &self,
        f: impl Fn(&T) -> Result<U, L0Error>,
    ) -> Result<Rv<U>, L0Error> {
        let head = self.head.iter().map(&f).collect::<Result<Vec<_>, _>>()?;
        let tail = self.tail.as_ref().map(&f).transpose()?;
        Ok(Rv::build(&self.space, head, tail))
    }

    pub fn same_space<U>(&self, other: &Rv<U>) -> Result<(), L0Error> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(L0Error::SpaceMismatch)
        }
    }

    pub fn try_zip_with<U: Clone + PartialEq, V: Clone + PartialEq>(
        &self,
        other: &Rv<U>,
        f: impl Fn(&T, &U) -> Result<V, L0Error>,
    ) -> Result<Rv<V>, L0Error> {
        self.same_space(other)?;
        let len = self.head.len().max(other.head.len());
        let head = (1..=len)
            .map(|i| f(self.value_at(i), other.value_at(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let tail = match (&self.tail, &other.tail) {
            (Some(a), Some(b)) => Some(f(a, b)?),
            _ => None,
        };
        Ok(Rv::build(&self.space, head, tail))
    }

    pub fn zip_with<U: Clone + PartialEq, V: Clone + PartialEq>(
        &self,
        other: &Rv<U>,
        f: impl Fn(&T, &U) -> V,
    ) -> Result<Rv<V>, L0Error> {
        self.try_zip_with(other, |a, b| Ok(f(a, b)))
    }

    pub fn all(&self, pred: impl Fn(&T) -> bool) -> bool {
        self.head.iter().all(&pred) && self.tail.as_ref().is_none_or(&pred)
    }

    /// `pred` holds on every atom of both operands.
    pub fn all2<U: Clone + PartialEq>(
        &self,
        other: &Rv<U>,
        pred: impl Fn(&T, &U) -> bool,
    ) -> Result<bool, L0Error> {
        self.same_space(other)?;
        let len = self.head.len().max(other.head.len());
        let head_ok = (1..=len).all(|i| pred(self.value_at(i), other.value_at(i)));
        Ok(head_ok
            && match (&self.tail, &other.tail) {
                (Some(a), Some(b)) => pred(a, b),
                _ => true,
            })
    }

    /// First location where `pred` fails.
    pub fn find_violation<U: Clone + PartialEq>(
        &self,
        other: &Rv<U>,
        pred: impl Fn(&T, &U) -> bool,
    ) -> Result<Option<AtomRef>, L0Error> {
        self.same_space(other)?;
        let len = self.head.len().max(other.head.len());
        if let Some(i) = (1..=len).find(|&i| !pred(self.value_at(i), other.value_at(i))) {
            return Ok(Some(AtomRef::Atom(i)));
        }
        Ok(match (&self.tail, &other.tail) {
            (Some(a), Some(b)) if !pred(a, b) => Some(AtomRef::Tail),
            _ => None,
        })
    }

    /// `1_A · self`, with `zero` used off `A`.
    pub fn restrict_with(&self, e: &Event, zero: T) -> Result<Self, L0Error> {
        e.validate(&self.space)?;
        let len = self.head.len().max(e.max_listed());
        let outside_tail = matches!(e, Event::FiniteSet(_));
        Ok(Rv::tabulate(&self.space, len, |at| match at {
            AtomRef::Atom(i) if e.contains(i) => self.value_at(i).clone(),
            AtomRef::Tail if !outside_tail => self.get(AtomRef::Tail).clone(),
            _ => zero.clone(),
        }))
    }

}

fn locations_for(space: &AtomSpace, head_len: usize) -> Vec<AtomRef> {
    match space.atom_count() {
        Some(n) => (1..=n).map(AtomRef::Atom).collect(),
        None => (1..=head_len).map(AtomRef::Atom).chain([AtomRef::Tail]).collect(),
    }
}

impl<T: fmt::Display> fmt::Display for Rv<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.head.iter().map(|v| v.to_string()).collect();
        match &self.tail {
            None => write!(f, "[{}]", items.join(",")),
            Some(t) if items.is_empty() => write!(f, "{t}"),
            Some(t) => write!(f, "<{}|{}>", items.join(","), t),
        }
    }
}

impl<T: fmt::Display> fmt::Debug for Rv<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T> Rv<T>
where
    T: Clone + PartialEq + FromStr<Err = L0Error>,
{
    /// Parses `[1,2,3]` (finite), `<2,3|1>` (head|tail) or a bare scalar
    /// (constant) against `space`.
    pub fn parse(space: &AtomSpace, s: &str) -> Result<Self, L0Error> {
        let s = s.trim();
        let list = |body: &str| -> Result<Vec<T>, L0Error> {
            body.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(T::from_str)
                .collect()
        };
        if let Some(body) = s.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            return Rv::from_values(space, list(body)?);
        }
        if let Some(body) = s.strip_prefix('<').and_then(|b| b.strip_suffix('>')) {
            let (head, tail) = body
                .split_once('|')
                .ok_or_else(|| L0Error::Parse(format!("missing '|' in {s:?}")))?;
            return Rv::eventually(space, list(head)?, T::from_str(tail.trim())?);
        }
        Ok(Rv::constant(space, T::from_str(s)?))
    }
}

impl RandomVar {
    pub fn zero(space: &AtomSpace) -> Self {
        Rv::constant(space, Rational::zero())
    }

    pub fn one(space: &AtomSpace) -> Self {
        Rv::constant(space, Rational::one())
    }

    pub fn constant_q(space: &AtomSpace, c: Rational) -> Self {
        Rv::constant(space, c)
    }

    /// `1_A`.
    pub fn indicator(space: &AtomSpace, e: &Event) -> Result<Self, L0Error> {
        RandomVar::one(space).restrict(e)
    }

    pub fn add(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient; fails if `other` vanishes anywhere.
    pub fn div(&self, other: &Self) -> Result<Self, L0Error> {
        if !other.all(|v| !v.is_zero()) {
            return Err(L0Error::NotStrictlyPositive(format!("divisor {other} has a zero")));
        }
        self.zip_with(other, |a, b| a / b)
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn abs(&self) -> Self {
        self.map(Rational::abs)
    }

    pub fn min(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a.clone().min(b.clone()))
    }

    pub fn max(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a.clone().max(b.clone()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|v| v * c)
    }

    /// `1_A · X`.
    pub fn restrict(&self, e: &Event) -> Result<Self, L0Error> {
        self.restrict_with(e, Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.all(Rational::is_zero)
    }

    /// Membership in `L⁰₊`.
    pub fn is_nonnegative(&self) -> bool {
        self.all(|v| !v.is_negative())
    }

    /// Membership in `L⁰₊₊`.
    pub fn is_strictly_positive(&self) -> bool {
        self.all(Rational::is_positive)
    }

    pub fn to_ext(&self) -> ExtRandomVar {
        self.map(|v| ExtRational::Finite(v.clone()))
    }

    /// Largest absolute value over all atoms.
    pub fn sup_abs(&self) -> Rational {
        self.entries()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// In-place pointwise maximum with `other` (spaces must agree).
    fn max_assign(&mut self, other: &Self) {
        self.merge_assign(other, |mine, theirs| theirs > mine);
    }

    fn min_assign(&mut self, other: &Self) {
        self.merge_assign(other, |mine, theirs| theirs < mine);
    }

    fn merge_assign(&mut self, other: &Self, take: impl Fn(&Rational, &Rational) -> bool) {
        debug_assert!(self.space == other.space);
        if let Some(t) = self.tail.clone() {
            if other.head.len() > self.head.len() {
                self.head.resize(other.head.len(), t);
            }
        }
        for i in 0..self.head.len() {
            let theirs = other.value_at(i + 1);
            if *theirs != self.head[i] && take(&self.head[i], theirs) {
                self.head[i] = theirs.clone();
            }
        }
        if let (Some(mine), Some(theirs)) = (&mut self.tail, &other.tail) {
            if take(mine, theirs) {
                *mine = theirs.clone();
            }
        }
        if let Some(t) = &self.tail {
            while self.head.last() == Some(t) {
                self.head.pop();
            }
        }
    }
}

impl ExtRandomVar {
    pub fn constant_ext(space: &AtomSpace, c: ExtRational) -> Self {
        Rv::constant(space, c)
    }

    pub fn add(&self, other: &Self) -> Result<Self, L0Error> {
        self.try_zip_with(other, |a, b| a.checked_add(b))
    }

    /// Pointwise product with `0 · (±∞) = 0`.
    pub fn mul(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        self.map(ExtRational::neg)
    }

    pub fn abs(&self) -> Self {
        self.map(ExtRational::abs)
    }

    pub fn min(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a.clone().min(b.clone()))
    }

    pub fn max(&self, other: &Self) -> Result<Self, L0Error> {
        self.zip_with(other, |a, b| a.clone().max(b.clone()))
    }

    /// The finite version, if no atom carries an infinite value.
    pub fn to_finite(&self) -> Option<RandomVar> {
        if !self.all(ExtRational::is_finite) {
            return None;
        }
        Some(self.map(|v| v.finite().cloned().expect("checked finite")))
    }
}

/// The a.s. order relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderRel {
    Geq,
    Gt,
}

/// Decides `X ≥ Y`, `X > Y`, or their restrictions to an event `A`
/// (`P(X ≥ Y | A) = 1` and so on). With `A = ∅` the on-`A` variants are
/// vacuously true.
pub fn order<T: Clone + Ord>(
    rel: OrderRel,
    x: &Rv<T>,
    y: &Rv<T>,
    on: Option<&Event>,
) -> Result<bool, L0Error> {
    x.same_space(y)?;
    if let Some(e) = on {
        e.validate(x.space())?;
    }
    let holds = |a: &T, b: &T| match rel {
        // equality is a cheap structural check on normalized values
        OrderRel::Geq => a == b || a >= b,
        OrderRel::Gt => a > b,
    };
    let len = x.explicit_len().max(y.explicit_len()).max(on.map_or(0, Event::max_listed));
    for at in locations_for(x.space(), len) {
        let included = match (on, at) {
            (None, _) => true,
            (Some(e), AtomRef::Atom(i)) => e.contains(i),
            (Some(e), AtomRef::Tail) => matches!(e, Event::Cofinite(_)),
        };
        let (a, b) = match at {
            AtomRef::Atom(i) => (x.value_at(i), y.value_at(i)),
            AtomRef::Tail => (x.get(at), y.get(at)),
        };
        if included && !holds(a, b) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn geq<T: Clone + Ord>(x: &Rv<T>, y: &Rv<T>) -> Result<bool, L0Error> {
    order(OrderRel::Geq, x, y, None)
}

pub fn gt<T: Clone + Ord>(x: &Rv<T>, y: &Rv<T>) -> Result<bool, L0Error> {
    order(OrderRel::Gt, x, y, None)
}

pub fn geq_on<T: Clone + Ord>(x: &Rv<T>, y: &Rv<T>, a: &Event) -> Result<bool, L0Error> {
    order(OrderRel::Geq, x, y, Some(a))
}

pub fn gt_on<T: Clone + Ord>(x: &Rv<T>, y: &Rv<T>, a: &Event) -> Result<bool, L0Error> {
    order(OrderRel::Gt, x, y, Some(a))
}

/// Essential supremum of a finite family: the pointwise maximum. The empty
/// family has supremum `−∞`.
pub fn ess_sup_finite(space: &AtomSpace, family: &[RandomVar]) -> Result<ExtRandomVar, L0Error> {
    let mut acc = ExtRandomVar::constant_ext(space, ExtRational::NegInf);
    for x in family {
        acc = acc.max(&x.to_ext())?;
    }
    Ok(acc)
}

/// Essential infimum of a finite family; `+∞` for the empty family.
pub fn ess_inf_finite(space: &AtomSpace, family: &[RandomVar]) -> Result<ExtRandomVar, L0Error> {
    let negated: Vec<RandomVar> = family.iter().map(RandomVar::neg).collect();
    Ok(ess_sup_finite(space, &negated)?.neg())
}

/// What a sequence family is expected to do; used by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqBehavior {
    Convergent,
    Unbounded,
}

type Generator = Arc<dyn Fn(u64) -> RandomVar + Send + Sync>;

/// A countable family `{Y_n : n ≥ 1}` given by a deterministic generator.
#[derive(Clone)]
pub struct SeqFamily {
    pub name: String,
    space: AtomSpace,
    generator: Generator,
    pub declared_monotone: bool,
    pub expected: Option<SeqBehavior>,
    /// A user-supplied upper bound that must dominate the supremum.
    pub upper_bound: Option<ExtRandomVar>,
}

impl fmt::Debug for SeqFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeqFamily")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("declared_monotone", &self.declared_monotone)
            .finish()
    }
}

impl SeqFamily {
    pub fn new(
        name: impl Into<String>,
        space: &AtomSpace,
        generator: impl Fn(u64) -> RandomVar + Send + Sync + 'static,
    ) -> Self {
        SeqFamily {
            name: name.into(),
            space: space.clone(),
            generator: Arc::new(generator),
            declared_monotone: false,
            expected: None,
            upper_bound: None,
        }
    }

    pub fn monotone(mut self) -> Self {
        self.declared_monotone = true;
        self
    }

    pub fn expecting(mut self, b: SeqBehavior) -> Self {
        self.expected = Some(b);
        self
    }

    pub fn with_upper_bound(mut self, bound: ExtRandomVar) -> Self {
        self.upper_bound = Some(bound);
        self
    }

    pub fn space(&self) -> &AtomSpace {
        &self.space
    }

    /// `Y_n`, checked to live on the family's space.
    pub fn term(&self, n: u64) -> Result<RandomVar, L0Error> {
        let y = (self.generator)(n);
        if y.space() != &self.space {
            return Err(L0Error::SpaceMismatch);
        }
        Ok(y)
    }

    /// `{-Y_n}`.
    pub fn negated(&self) -> SeqFamily {
        let g = Arc::clone(&self.generator);
        SeqFamily {
            name: format!("-({})", self.name),
            space: self.space.clone(),
            generator: Arc::new(move |n| g(n).neg()),
            declared_monotone: self.declared_monotone,
            expected: self.expected,
            upper_bound: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Sup,
    Inf,
}

/// The running extremum `M_n = max(Y_1, ..., Y_n)` (or min), replayable on
/// demand. Checkpoints at `n = 1, 2, 4, ...`, at `⌈depth/2⌉` and at `depth`
/// are kept in memory.
#[derive(Clone, Debug)]
pub struct RunningExtremum {
    family: SeqFamily,
    kind: Extremum,
    depth: u64,
    checkpoints: Vec<(u64, RandomVar)>,
}

impl RunningExtremum {
    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn kind(&self) -> Extremum {
        self.kind
    }

    pub fn checkpoints(&self) -> &[(u64, RandomVar)] {
        &self.checkpoints
    }

    pub fn checkpoint(&self, n: u64) -> Option<&RandomVar> {
        self.checkpoints.iter().find(|(k, _)| *k == n).map(|(_, v)| v)
    }

    /// Regenerates `M_1, M_2, ..., M_depth`.
    pub fn replay(&self) -> impl Iterator<Item = Result<RandomVar, L0Error>> + '_ {
        let mut acc: Option<RandomVar> = None;
        (1..=self.depth).map(move |n| {
            let y = self.family.term(n)?;
            let next = match acc.take() {
                None => y,
                Some(m) => match self.kind {
                    Extremum::Sup => m.max(&y)?,
                    Extremum::Inf => m.min(&y)?,
                },
            };
            acc = Some(next.clone());
            Ok(next)
        })
    }

    /// First index `n` where `M_n` fails to be monotone in the declared
    /// direction relative to `M_{n-1}`, found by full replay.
    pub fn first_monotonicity_violation(&self) -> Result<Option<u64>, L0Error> {
        let mut prev = self.family.term(1)?;
        for n in 2..=self.depth {
            let y = self.family.term(n)?;
            let mut next = prev.clone();
            let ok = match self.kind {
                Extremum::Sup => {
                    next.max_assign(&y);
                    geq(&next, &prev)?
                }
                Extremum::Inf => {
                    next.min_assign(&y);
                    geq(&prev, &next)?
                }
            };
            if !ok {
                return Ok(Some(n));
            }
            prev = next;
        }
        Ok(None)
    }
}

/// Result of a depth-limited essential supremum/infimum computation.
#[derive(Clone, Debug)]
pub struct SeqExtremumResult {
    /// `M_depth`, with `±∞` on atoms flagged unbounded.
    pub value: ExtRandomVar,
    pub witness: RunningExtremum,
    /// `|M_depth − M_⌈depth/2⌉| ≤ tol` on every atom.
    pub converged: bool,
    /// Some atom reached `1/tol` in absolute value.
    pub unbounded: bool,
}

/// Essential supremum of a countable family, truncated at `depth` terms.
pub fn ess_sup_seq(
    family: &SeqFamily,
    depth: u64,
    tol: &Rational,
) -> Result<SeqExtremumResult, L0Error> {
    seq_extremum(family, depth, tol, Extremum::Sup)
}

/// Essential infimum of a countable family, truncated at `depth` terms.
pub fn ess_inf_seq(
    family: &SeqFamily,
    depth: u64,
    tol: &Rational,
) -> Result<SeqExtremumResult, L0Error> {
    seq_extremum(family, depth, tol, Extremum::Inf)
}

fn seq_extremum(
    family: &SeqFamily,
    depth: u64,
    tol: &Rational,
    kind: Extremum,
) -> Result<SeqExtremumResult, L0Error> {
    assert!(depth >= 1, "depth must be at least 1");
    assert!(tol.is_positive(), "tolerance must be positive");
    let half = depth.div_ceil(2);
    let mut checkpoints = Vec::new();
    let mut m = family.term(1)?;
    for n in 1..=depth {
        if n > 1 {
            let y = family.term(n)?;
            match kind {
                Extremum::Sup => m.max_assign(&y),
                Extremum::Inf => m.min_assign(&y),
            }
        }
        if n.is_power_of_two() || n == half || n == depth {
            checkpoints.push((n, m.clone()));
        }
    }
    let at_half = checkpoints
        .iter()
        .find(|(k, _)| *k == half)
        .map(|(_, v)| v.clone())
        .expect("half checkpoint recorded");
    let gap = m.sub(&at_half)?.abs();
    let converged = gap.all(|g| g <= tol);
    let bound = tol.recip().expect("positive tolerance");
    let inf = match kind {
        Extremum::Sup => ExtRational::PosInf,
        Extremum::Inf => ExtRational::NegInf,
    };
    let beyond = |v: &Rational| match kind {
        Extremum::Sup => *v >= bound,
        Extremum::Inf => -v >= bound,
    };
    let unbounded = !m.all(|v| !beyond(v));
    let value = m.map(|v| if beyond(v) { inf.clone() } else { ExtRational::Finite(v.clone()) });
    Ok(SeqExtremumResult {
        value,
        witness: RunningExtremum { family: family.clone(), kind, depth, checkpoints },
        converged,
        unbounded,
    })
}

/// `Σ_n 1_{A_n} X_n` over a finite list of parts; `pieces[n-1]` belongs to
/// part `n`.
pub fn concatenate(partition: &Partition, pieces: &[RandomVar]) -> Result<RandomVar, L0Error> {
    match partition {
        Partition::Parts(parts) if parts.len() == pieces.len() => {
            concatenate_with(partition, |n| pieces[n - 1].clone())
        }
        Partition::Parts(parts) => Err(L0Error::PartitionMismatch(format!(
            "{} parts but {} pieces",
            parts.len(),
            pieces.len()
        ))),
        Partition::CanonicalSingletons => Err(L0Error::PartitionMismatch(
            "the canonical partition needs a piece generator".into(),
        )),
    }
}

/// `Σ_n 1_{A_n} X_n` with pieces given by a generator over part numbers
/// `n ≥ 1`.
///
/// For the canonical partition of the countable space with truncation `N`,
/// the result is representable only if the atom values `X_n(A_n)` are
/// constant for `n > N`; this is checked on the window `N < n ≤ 2N`.
pub fn concatenate_with(
    partition: &Partition,
    piece: impl Fn(usize) -> RandomVar,
) -> Result<RandomVar, L0Error> {
    let first = piece(1);
    let space = first.space().clone();
    match partition {
        Partition::Parts(parts) => {
            let pieces: Vec<RandomVar> =
                std::iter::once(first).chain((2..=parts.len()).map(&piece)).collect();
            for (p, e) in pieces.iter().zip(parts) {
                p.same_space(&pieces[0])?;
                e.validate(&space)?;
            }
            let explicit = pieces
                .iter()
                .map(RandomVar::explicit_len)
                .chain(parts.iter().map(Event::max_listed))
                .max()
                .unwrap_or(0);
            let tail_part = parts.iter().position(|e| matches!(e, Event::Cofinite(_)));
            if space.is_countable() && tail_part.is_none() {
                return Err(L0Error::PartitionMismatch("no part covers the tail".into()));
            }
            Ok(RandomVar::tabulate(&space, explicit, |at| match at {
                AtomRef::Atom(i) => pieces[partition.part_of(i)].value_at(i).clone(),
                AtomRef::Tail => pieces[tail_part.expect("checked")]
                    .get(AtomRef::Tail)
                    .clone(),
            }))
        }
        Partition::CanonicalSingletons => {
            if !space.is_countable() {
                return Err(L0Error::PartitionMismatch(
                    "canonical singletons require the countable space".into(),
                ));
            }
            let n = space.truncation();
            let value_on = |k: usize| -> Result<Rational, L0Error> {
                let p = if k == 1 { first.clone() } else { piece(k) };
                p.same_space(&first)?;
                Ok(p.value_at(k).clone())
            };
            let head = (1..=n).map(value_on).collect::<Result<Vec<_>, _>>()?;
            let tail = value_on(n + 1)?;
            for k in n + 2..=2 * n {
                if value_on(k)? != tail {
                    return Err(L0Error::NotRepresentable(format!(
                        "piece values on atoms {} and {k} differ",
                        n + 1
                    )));
                }
            }
            RandomVar::eventually(&space, head, tail)
        }
    }
}
