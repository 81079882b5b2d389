//! Structured subsets of `L⁰` with exact membership, the convex / absorbent /
//! balanced predicates, countable concatenation closure, and the gauge
//! functional `p_K(X) = ess.inf{Y ∈ L⁰₊ : X ∈ Y·K}`.

use std::fmt;

use crate::error::L0Error;
use crate::l0::{concatenate, concatenate_with, geq, gt, AtomRef, ExtRandomVar, RandomVar};
use crate::prob_space::{AtomSpace, Event, Partition};
use crate::rational::{ExtRational, Rational};
use crate::sampling::Sampler;
use crate::seminorms::{Ball, SeminormFamily};
use crate::verdict::{Verdict, Witness};

#[derive(Clone, PartialEq)]
pub enum L0Set {
    Ball(Ball),
    /// `U_ε`: bounded by `ε` outside finitely many atoms.
    Counterexample { eps: RandomVar },
    /// `{X : |X_i| ≤ r_i for every atom i}`.
    AtomDecomposable { r: RandomVar },
    /// Sets that violate one of the predicates on purpose.
    Degenerate(DegenerateSet),
}

/// Test-only sets that give the predicates failing examples.
#[derive(Clone, PartialEq)]
pub struct DegenerateSet {
    kind: DegenerateKind,
    space: AtomSpace,
}

#[cfg_attr(not(any(test, feature = "testing")), allow(dead_code))]
#[derive(Clone, PartialEq)]
enum DegenerateKind {
    Zero,
    /// The constants `−1` and `1`.
    TwoPoint,
    /// `shift + ball`.
    Translated { shift: Rational, ball: Ball },
}

#[cfg(any(test, feature = "testing"))]
impl DegenerateSet {
    /// `{0}`.
    pub fn zero(space: &AtomSpace) -> L0Set {
        L0Set::Degenerate(DegenerateSet { kind: DegenerateKind::Zero, space: space.clone() })
    }

    /// `{−1, 1}`.
    pub fn two_point(space: &AtomSpace) -> L0Set {
        L0Set::Degenerate(DegenerateSet { kind: DegenerateKind::TwoPoint, space: space.clone() })
    }

    /// `shift + ball`.
    pub fn translated(shift: Rational, ball: Ball) -> L0Set {
        let space = ball.space().clone();
        L0Set::Degenerate(DegenerateSet { kind: DegenerateKind::Translated { shift, ball }, space })
    }
}

impl DegenerateSet {
    fn member(&self, x: &RandomVar) -> Result<bool, L0Error> {
        x.same_space(&RandomVar::zero(&self.space))?;
        match &self.kind {
            DegenerateKind::Zero => Ok(x.is_zero()),
            DegenerateKind::TwoPoint => {
                let one = RandomVar::one(&self.space);
                Ok(*x == one || *x == one.neg())
            }
            DegenerateKind::Translated { shift, ball } => {
                ball.contains(&x.sub(&RandomVar::constant_q(&self.space, shift.clone()))?)
            }
        }
    }
}

impl fmt::Display for DegenerateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DegenerateKind::Zero => f.write_str("zero"),
            DegenerateKind::TwoPoint => f.write_str("two-point"),
            DegenerateKind::Translated { shift, ball } => write!(f, "translated:{shift}+{ball}"),
        }
    }
}

impl L0Set {
    pub fn ball(b: Ball) -> Self {
        L0Set::Ball(b)
    }

    pub fn counterexample(eps: RandomVar) -> Result<Self, L0Error> {
        if !eps.is_strictly_positive() {
            return Err(L0Error::NotStrictlyPositive(format!("radius {eps}")));
        }
        Ok(L0Set::Counterexample { eps })
    }

    pub fn atom_decomposable(r: RandomVar) -> Result<Self, L0Error> {
        if !r.is_nonnegative() {
            return Err(L0Error::Parse(format!("radius {r} has a negative atom")));
        }
        Ok(L0Set::AtomDecomposable { r })
    }

    pub fn space(&self) -> &AtomSpace {
        match self {
            L0Set::Ball(b) => b.space(),
            L0Set::Counterexample { eps } => eps.space(),
            L0Set::AtomDecomposable { r } => r.space(),
            L0Set::Degenerate(d) => &d.space,
        }
    }

    pub fn member(&self, x: &RandomVar) -> Result<bool, L0Error> {
        match self {
            L0Set::Ball(b) => b.contains(x),
            L0Set::Counterexample { eps } => {
                eps.same_space(x)?;
                Ok(match (x.tail(), eps.tail()) {
                    (Some(t), Some(e)) => t.abs() <= *e,
                    _ => true,
                })
            }
            L0Set::AtomDecomposable { r } => geq(r, &x.abs()),
            L0Set::Degenerate(d) => d.member(x),
        }
    }

    /// `c·K` for `c ∈ L⁰₊₊`.
    pub fn scaled(&self, c: &RandomVar) -> Result<Self, L0Error> {
        if !c.is_strictly_positive() {
            return Err(L0Error::NotStrictlyPositive(format!("scale {c}")));
        }
        match self {
            L0Set::Ball(b) => Ok(L0Set::Ball(b.rescaled(c)?)),
            L0Set::Counterexample { eps } => L0Set::counterexample(eps.mul(c)?),
            L0Set::AtomDecomposable { r } => L0Set::atom_decomposable(r.mul(c)?),
            L0Set::Degenerate(_) => {
                Err(L0Error::EngineUnsupported(format!("scaling the test set {self}")))
            }
        }
    }

    /// A member of `K`, built per variant: a random direction scaled inside
    /// the boundary, never by rejection.
    pub fn sample_member(&self, s: &mut Sampler) -> Result<RandomVar, L0Error> {
        let space = self.space().clone();
        match self {
            L0Set::Ball(b) => {
                let d = s.rv(&space);
                let v = b.sup_eval(&d)?;
                let u = s.unit_rv(&space);
                let factor = b.eps().mul(&u)?.zip_with(&v, |a, v| {
                    if v.is_zero() {
                        Rational::one()
                    } else {
                        a / v
                    }
                })?;
                d.mul(&factor)
            }
            L0Set::Counterexample { eps } => {
                let mut x = eps.mul(&s.signed_unit_rv(&space))?;
                if space.is_countable() {
                    let bumps = s.int_in(0, 3);
                    for _ in 0..bumps {
                        let atom = s.int_in(1, space.truncation().min(8) as i64) as usize;
                        let big = eps.value_at(atom) + &Rational::from_int(s.int_in(1, 16));
                        let v = if s.coin(0.5) { big } else { -big };
                        let ind = RandomVar::indicator(&space, &Event::singleton(atom))?;
                        x = x.add(&ind.scale(&(v - x.value_at(atom))))?;
                    }
                }
                Ok(x)
            }
            L0Set::AtomDecomposable { r } => r.mul(&s.signed_unit_rv(&space)),
            L0Set::Degenerate(d) => match &d.kind {
                DegenerateKind::Zero => Ok(RandomVar::zero(&space)),
                DegenerateKind::TwoPoint => {
                    let one = RandomVar::one(&space);
                    Ok(if s.coin(0.5) { one } else { one.neg() })
                }
                DegenerateKind::Translated { shift, ball } => {
                    let inner = L0Set::Ball(ball.clone()).sample_member(s)?;
                    inner.add(&RandomVar::constant_q(&space, shift.clone()))
                }
            },
        }
    }

    pub fn parse(space: &AtomSpace, s: &str) -> Result<Self, L0Error> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("ball:") {
            let (q, eps) = rest
                .rsplit_once(",eps=")
                .ok_or_else(|| L0Error::Parse(format!("ball descriptor {s:?} lacks ,eps=")))?;
            let seminorms = q
                .split('+')
                .map(|t| crate::seminorms::Seminorm::parse(space, t))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(L0Set::Ball(Ball::new(seminorms, RandomVar::parse(space, eps)?)?));
        }
        if let Some(eps) = s.strip_prefix("cex:eps=") {
            return L0Set::counterexample(RandomVar::parse(space, eps)?);
        }
        if let Some(r) = s.strip_prefix("atomdec:r=") {
            return L0Set::atom_decomposable(RandomVar::parse(space, r)?);
        }
        Err(L0Error::Parse(format!("unknown set descriptor {s:?}")))
    }
}

impl fmt::Display for L0Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L0Set::Ball(b) => write!(f, "{b}"),
            L0Set::Counterexample { eps } => write!(f, "cex:eps={eps}"),
            L0Set::AtomDecomposable { r } => write!(f, "atomdec:r={r}"),
            L0Set::Degenerate(d) => write!(f, "{d}"),
        }
    }
}

impl fmt::Debug for L0Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn member(k: &L0Set, x: &RandomVar) -> Result<bool, L0Error> {
    k.member(x)
}

/// For `U_ε`: the atoms where `|X| > ε`, or `None` when that set is infinite
/// (so `X ∉ U_ε`). On other sets, `EngineUnsupported`.
pub fn exception_set(k: &L0Set, x: &RandomVar) -> Result<Option<Vec<usize>>, L0Error> {
    let L0Set::Counterexample { eps } = k else {
        return Err(L0Error::EngineUnsupported(format!("exception set of {k}")));
    };
    if !k.member(x)? {
        return Ok(None);
    }
    let len = match x.space().atom_count() {
        Some(n) => n,
        None => x.explicit_len().max(eps.explicit_len()),
    };
    Ok(Some((1..=len).filter(|&i| x.value_at(i).abs() > *eps.value_at(i)).collect()))
}

/// Is `X ∈ Z·K`? Needs `Z ≥ 0` and `X = 0` wherever `Z = 0`; the quotient
/// `X/Z` (set to 0 where `Z = 0`) must then be a member.
pub fn admissible(k: &L0Set, x: &RandomVar, z: &RandomVar) -> Result<bool, L0Error> {
    if !z.is_nonnegative() || !x.all2(z, |x, z| !z.is_zero() || x.is_zero())? {
        return Ok(false);
    }
    let quotient = x.zip_with(z, |x, z| if z.is_zero() { Rational::zero() } else { x / z })?;
    k.member(&quotient)
}

/// Samples `X₁, X₂ ∈ K` and `0 ≤ Y ≤ 1` and checks `YX₁ + (1−Y)X₂ ∈ K`. The
/// first eight scalars are the constant `1/2`.
pub fn is_l0_convex(k: &L0Set, seed: u64, n: usize) -> Result<Verdict, L0Error> {
    let space = k.space().clone();
    let mut s = Sampler::stream(seed, &format!("convex:{k}"));
    let one = RandomVar::one(&space);
    for i in 0..n {
        let x1 = k.sample_member(&mut s)?;
        let x2 = k.sample_member(&mut s)?;
        let y = if i < 8 {
            RandomVar::constant_q(&space, Rational::new(1, 2))
        } else {
            s.unit_rv(&space)
        };
        let comb = y.mul(&x1)?.add(&one.sub(&y)?.mul(&x2)?)?;
        if !k.member(&comb)? {
            return Ok(Verdict::fail(
                Witness::new("L0-convexity")
                    .with("set", k)
                    .with("X1", &x1)
                    .with("X2", &x2)
                    .with("Y", &y)
                    .with("combination", &comb),
                i + 1,
            ));
        }
    }
    Ok(Verdict::pass(n))
}

/// Samples `X ∈ K` and `|Y| ≤ 1` and checks `YX ∈ K`. The first scalars
/// are the constants `0` and `−1`.
pub fn is_l0_balanced(k: &L0Set, seed: u64, n: usize) -> Result<Verdict, L0Error> {
    let space = k.space().clone();
    let mut s = Sampler::stream(seed, &format!("balanced:{k}"));
    for i in 0..n {
        let x = k.sample_member(&mut s)?;
        let y = match i {
            0 => RandomVar::zero(&space),
            1 => RandomVar::one(&space).neg(),
            _ => s.signed_unit_rv(&space),
        };
        let yx = y.mul(&x)?;
        if !k.member(&yx)? {
            return Ok(Verdict::fail(
                Witness::new("L0-balance").with("set", k).with("X", &x).with("Y", &y),
                i + 1,
            ));
        }
    }
    Ok(Verdict::pass(n))
}

/// A `Y ∈ L⁰₊₊` with `X ∈ Y·K`, checked by `member` before it is returned.
pub fn is_l0_absorbent(k: &L0Set, x: &RandomVar) -> Result<RandomVar, L0Error> {
    let space = k.space().clone();
    let one = RandomVar::one(&space);
    let y = match k {
        L0Set::Ball(b) => b.sup_eval(x)?.div(b.eps())?.add(&one)?,
        L0Set::Counterexample { eps } => x.abs().div(eps)?.max(&one)?,
        L0Set::AtomDecomposable { r } => {
            if !x.all2(r, |x, r| !r.is_zero() || x.is_zero())? {
                return Err(L0Error::NotAbsorbedHere);
            }
            x.abs().zip_with(r, |x, r| if r.is_zero() { Rational::one() } else { x / r + Rational::one() })?
        }
        L0Set::Degenerate(_) => one,
    };
    if k.member(&x.div(&y)?)? {
        Ok(y)
    } else {
        Err(L0Error::NotAbsorbedHere)
    }
}

/// Runs [`is_l0_absorbent`] on `n` sampled points.
pub fn absorbent_verdict(k: &L0Set, seed: u64, n: usize) -> Result<Verdict, L0Error> {
    let mut s = Sampler::stream(seed, &format!("absorbent:{k}"));
    for i in 0..n {
        let x = if i == 0 { RandomVar::one(k.space()) } else { s.rv(k.space()) };
        match is_l0_absorbent(k, &x) {
            Ok(_) => {}
            Err(L0Error::NotAbsorbedHere) => {
                return Ok(Verdict::fail(
                    Witness::new("L0-absorbency").with("set", k).with("X", &x),
                    i + 1,
                ))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Verdict::pass(n))
}

/// Is `X` in the countable concatenation closure of `K`?
///
/// Balls and atom-decomposable sets are closed under pasting. For `U_ε` every
/// `X` is the paste of its atom pieces `1_{A_n}X`, each with exception set
/// `{n}`.
pub fn closure_member(k: &L0Set, x: &RandomVar) -> Result<bool, L0Error> {
    match k {
        L0Set::Counterexample { eps } => {
            eps.same_space(x)?;
            Ok(true)
        }
        _ => k.member(x),
    }
}

/// Pieces for the canonical paste: for `U_ε`, `(ε+1)·1_{A_n}`; otherwise
/// sampled members, with the last sample reused past the truncation.
struct CanonicalPieces {
    bump: Option<RandomVar>,
    samples: Vec<RandomVar>,
}

impl CanonicalPieces {
    fn new(k: &L0Set, s: &mut Sampler) -> Result<Self, L0Error> {
        let space = k.space();
        let count = space.atom_count().unwrap_or(space.truncation() + 1);
        match k {
            L0Set::Counterexample { eps } => Ok(CanonicalPieces {
                bump: Some(eps.add(&RandomVar::one(space))?),
                samples: Vec::new(),
            }),
            _ => Ok(CanonicalPieces {
                bump: None,
                samples: (0..count).map(|_| k.sample_member(s)).collect::<Result<_, _>>()?,
            }),
        }
    }

    fn piece(&self, n: usize) -> RandomVar {
        match &self.bump {
            Some(b) => b.restrict(&Event::singleton(n)).expect("atom of the space"),
            None => self.samples[(n - 1).min(self.samples.len() - 1)].clone(),
        }
    }

    /// Pieces on atoms `1..=count` (the finite space, or the truncation plus
    /// the first reused one).
    fn listed(&self, space: &AtomSpace) -> Vec<RandomVar> {
        let count = space.atom_count().unwrap_or(space.truncation() + 1);
        (1..=count).map(|n| self.piece(n)).collect()
    }
}

fn describe_pieces(k: &L0Set) -> String {
    match k {
        L0Set::Counterexample { eps } => format!("({eps} + 1) * 1_{{A_n}}"),
        _ => "sampled members, one per atom".into(),
    }
}

/// Default number of random finite-partition pastes.
pub const PASTE_SAMPLES: usize = 100;

/// Checks `K = K̄^Π`: a paste over the canonical singleton partition, `pastes`
/// pastes over random finite partitions, then agreement of
/// [`closure_member`] with `member` on `pastes` further points.
///
/// For balls each paste also reproduces `sup‖Σ1_{A_n}X_n‖ = Σ1_{A_n}sup‖X_n‖`.
pub fn is_concat_closed(k: &L0Set, seed: u64, pastes: usize) -> Result<Verdict, L0Error> {
    let space = k.space().clone();
    let mut s = Sampler::stream(seed, &format!("concat:{k}"));
    let gen = CanonicalPieces::new(k, &mut s)?;
    let canonical = space.canonical_partition();
    let paste = match &canonical {
        Partition::CanonicalSingletons => concatenate_with(&canonical, |n| gen.piece(n))?,
        Partition::Parts(_) => concatenate(&canonical, &gen.listed(&space))?,
    };
    let mut run = 1;
    if let Some(w) = check_paste(k, &canonical, &gen.listed(&space), &paste)? {
        return Ok(Verdict::fail(w.with("pieces", describe_pieces(k)), run));
    }
    for _ in 0..pastes {
        run += 1;
        let partition = s.finite_partition(&space);
        let Partition::Parts(parts) = &partition else { unreachable!("sampled partitions are finite") };
        let pieces = (0..parts.len()).map(|_| k.sample_member(&mut s)).collect::<Result<Vec<_>, _>>()?;
        let paste = concatenate(&partition, &pieces)?;
        if let Some(w) = check_paste(k, &partition, &pieces, &paste)? {
            let listed: Vec<String> = pieces.iter().map(|p| p.to_string()).collect();
            return Ok(Verdict::fail(w.with("pieces", listed.join(";")), run));
        }
    }
    for i in 0..pastes {
        let x = if i % 2 == 0 { k.sample_member(&mut s)? } else { s.rv(&space) };
        if closure_member(k, &x)? != k.member(&x)? {
            return Ok(Verdict::fail(
                Witness::new("closure differs from set").with("set", k).with("X", &x),
                run + i + 1,
            ));
        }
    }
    Ok(Verdict::pass(run + pastes))
}

fn check_paste(
    k: &L0Set,
    partition: &Partition,
    pieces: &[RandomVar],
    paste: &RandomVar,
) -> Result<Option<Witness>, L0Error> {
    let fail = |why: &str| {
        Witness::new(format!("concatenation closure: {why}"))
            .with("set", k)
            .with("partition", partition)
            .with("X", paste)
    };
    if let Some(p) = pieces.iter().find(|p| !k.member(p).unwrap_or(false)) {
        return Ok(Some(fail("a piece is not a member").with("piece", p)));
    }
    if let L0Set::Ball(b) = k {
        let norms = pieces.iter().map(|p| b.sup_eval(p)).collect::<Result<Vec<_>, _>>()?;
        let pasted_norms = match partition {
            Partition::CanonicalSingletons => {
                let last = norms.len() - 1;
                concatenate_with(partition, |n| norms[(n - 1).min(last)].clone())?
            }
            Partition::Parts(_) => concatenate(partition, &norms)?,
        };
        let direct = b.sup_eval(paste)?;
        if direct != pasted_norms || !geq(b.eps(), &direct)? {
            return Ok(Some(fail("seminorm of the paste").with("norm", &direct)));
        }
    }
    if !k.member(paste)? {
        return Ok(Some(fail("paste of members is not a member")));
    }
    Ok(None)
}

/// Which gauge engine to run.
#[derive(Clone, Debug, PartialEq)]
pub enum GaugeEngine {
    Symbolic,
    /// Per-atom bisection to width `2^-tol_exp`; finite spaces, balls and
    /// atom-decomposable sets only.
    Bisection { tol_exp: u32 },
}

impl GaugeEngine {
    pub fn bisection() -> Self {
        GaugeEngine::Bisection { tol_exp: DEFAULT_TOL_EXP }
    }
}

pub const DEFAULT_TOL_EXP: u32 = 40;

/// Upper search limit of the bisection engine is `2^64`.
const BISECTION_CEILING_EXP: i32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineTag {
    Symbolic,
    Bisection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeResult {
    /// The symbolic value, or the upper end of the enclosure.
    pub value: ExtRandomVar,
    /// `(lower, upper)` bounds from bisection.
    pub enclosure: Option<(ExtRandomVar, ExtRandomVar)>,
    pub engine: EngineTag,
    pub witness: Option<GaugeWitnessSeq>,
}

/// `Z_n` with `X ∈ Z_n·K` and `Z_n ↘ p_K(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeWitnessSeq {
    kind: WitnessKind,
}

#[derive(Clone, Debug, PartialEq)]
enum WitnessKind {
    /// `1/n`.
    Reciprocal(AtomSpace),
    /// `p + 1/n`.
    Offset(RandomVar),
    /// `1/n` on atoms `1..=n`, `ceiling` elsewhere.
    Staircase(RandomVar),
}

impl GaugeWitnessSeq {
    /// `Z_n`, `n ≥ 1`.
    pub fn term(&self, n: u64) -> RandomVar {
        assert!(n >= 1, "terms start at 1");
        let inv = Rational::new(1, n as i64);
        match &self.kind {
            WitnessKind::Reciprocal(space) => RandomVar::constant_q(space, inv),
            WitnessKind::Offset(p) => p.add(&RandomVar::constant_q(p.space(), inv)).expect("same space"),
            WitnessKind::Staircase(ceiling) => {
                let space = ceiling.space();
                let n = n as usize;
                let len = match space.atom_count() {
                    Some(count) => count,
                    None => n.max(ceiling.explicit_len()),
                };
                let head = (1..=len)
                    .map(|i| if i <= n { inv.clone() } else { ceiling.value_at(i).clone() })
                    .collect();
                match ceiling.tail() {
                    Some(t) => RandomVar::eventually(space, head, t.clone()),
                    None => RandomVar::from_values(space, head),
                }
                .expect("head matches the space")
            }
        }
    }
}

pub fn gauge(k: &L0Set, x: &RandomVar, engine: &GaugeEngine) -> Result<GaugeResult, L0Error> {
    x.same_space(&RandomVar::zero(k.space()))?;
    match engine {
        GaugeEngine::Symbolic => {
            let value = symbolic_gauge(k, x)?;
            let witness = gauge_witness_seq(k, x).ok();
            Ok(GaugeResult { value, enclosure: None, engine: EngineTag::Symbolic, witness })
        }
        GaugeEngine::Bisection { tol_exp } => {
            let (lo, hi) = bisection_gauge(k, x, *tol_exp)?;
            Ok(GaugeResult {
                value: hi.clone(),
                enclosure: Some((lo, hi)),
                engine: EngineTag::Bisection,
                witness: None,
            })
        }
    }
}

fn symbolic_gauge(k: &L0Set, x: &RandomVar) -> Result<ExtRandomVar, L0Error> {
    let space = k.space();
    if x.is_zero() {
        return Ok(ExtRandomVar::constant_ext(space, ExtRational::zero()));
    }
    match k {
        L0Set::Ball(b) => Ok(b.sup_eval(x)?.div(b.eps())?.to_ext()),
        L0Set::AtomDecomposable { r } => x.abs().zip_with(r, |x, r| {
            if !r.is_zero() {
                ExtRational::Finite(x / r)
            } else if x.is_zero() {
                ExtRational::zero()
            } else {
                ExtRational::PosInf
            }
        }),
        L0Set::Counterexample { .. } => Ok(ExtRandomVar::constant_ext(space, ExtRational::zero())),
        L0Set::Degenerate(_) => {
            Err(L0Error::EngineUnsupported(format!("symbolic gauge of the test set {k}")))
        }
    }
}

/// Per-atom enclosure `[lo, hi]` of the gauge: `hi` is an admissible radius
/// and `lo` is either 0 or inadmissible, found by doubling from 1 and then
/// halving until `hi − lo ≤ 2^-tol_exp`.
fn bisection_gauge(
    k: &L0Set,
    x: &RandomVar,
    tol_exp: u32,
) -> Result<(ExtRandomVar, ExtRandomVar), L0Error> {
    let space = k.space();
    let Some(n) = space.atom_count() else {
        return Err(L0Error::EngineUnsupported("bisection needs a finite space".into()));
    };
    if !matches!(k, L0Set::Ball(_) | L0Set::AtomDecomposable { .. }) {
        return Err(L0Error::EngineUnsupported(format!(
            "bisection needs atom-local membership, {k} is not"
        )));
    }
    let tol = Rational::pow2(-(tol_exp as i32));
    let ceiling = Rational::pow2(BISECTION_CEILING_EXP);
    let mut lows = Vec::with_capacity(n);
    let mut highs = Vec::with_capacity(n);
    for i in 1..=n {
        let xi = x.restrict(&Event::singleton(i))?;
        if xi.is_zero() {
            lows.push(ExtRational::zero());
            highs.push(ExtRational::zero());
            continue;
        }
        let admits = |t: &Rational| -> Result<bool, L0Error> {
            k.member(&xi.scale(&t.recip().expect("positive radius")))
        };
        let mut lo = Rational::zero();
        let mut hi = Rational::one();
        let mut unbounded = false;
        while !admits(&hi)? {
            lo = hi.clone();
            if hi >= ceiling {
                unbounded = true;
                break;
            }
            hi = &hi * &Rational::from_int(2);
        }
        if unbounded {
            lows.push(ExtRational::Finite(lo));
            highs.push(ExtRational::PosInf);
            continue;
        }
        let half = Rational::new(1, 2);
        while &hi - &lo > tol {
            let mid = (&lo + &hi) * &half;
            if admits(&mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lows.push(ExtRational::Finite(lo));
        highs.push(ExtRational::Finite(hi));
    }
    Ok((ExtRandomVar::from_values(space, lows)?, ExtRandomVar::from_values(space, highs)?))
}

/// Does `value` lie in `[lo, hi]` on every atom?
pub fn enclosure_contains(
    (lo, hi): &(ExtRandomVar, ExtRandomVar),
    value: &ExtRandomVar,
) -> Result<bool, L0Error> {
    Ok(geq(value, lo)? && geq(hi, value)?)
}

pub fn gauge_witness_seq(k: &L0Set, x: &RandomVar) -> Result<GaugeWitnessSeq, L0Error> {
    let space = k.space();
    if x.is_zero() {
        return Ok(GaugeWitnessSeq { kind: WitnessKind::Reciprocal(space.clone()) });
    }
    let kind = match k {
        L0Set::Ball(_) | L0Set::AtomDecomposable { .. } => {
            let p = symbolic_gauge(k, x)?
                .to_finite()
                .ok_or_else(|| L0Error::NotFinite(format!("gauge of {x} in {k}")))?;
            WitnessKind::Offset(p)
        }
        L0Set::Counterexample { eps } => {
            let ceiling = x.abs().div(eps)?.max(&RandomVar::one(space))?.add(&RandomVar::one(space))?;
            WitnessKind::Staircase(ceiling)
        }
        L0Set::Degenerate(_) => {
            return Err(L0Error::EngineUnsupported(format!("witness sequence for {k}")))
        }
    };
    Ok(GaugeWitnessSeq { kind })
}

/// `Y ∈ L⁰₊₊` with `Y = delta` on atom `m` and `max(1, 1/ε)` elsewhere, such
/// that `1/Y ∈ U_ε` with exception set inside `{m}`. Certifies that the
/// gauge of the constant 1 is at most `delta` on atom `m`.
pub fn small_gauge_witness(k: &L0Set, m: usize, delta: &Rational) -> Result<RandomVar, L0Error> {
    let L0Set::Counterexample { eps } = k else {
        return Err(L0Error::EngineUnsupported(format!("small gauge witness for {k}")));
    };
    let space = k.space();
    if m == 0 || m > space.truncation() || !space.is_valid_atom(m) {
        return Err(L0Error::InvalidAtomIndex { index: m });
    }
    if !delta.is_positive() {
        return Err(L0Error::NotStrictlyPositive(format!("delta {delta}")));
    }
    let one = RandomVar::one(space);
    let base = one.div(eps)?.max(&one)?;
    let at_m = RandomVar::indicator(space, &Event::singleton(m))?;
    let y = base.add(&at_m.scale(&(delta - base.value_at(m))))?;
    let x = one.div(&y)?;
    match exception_set(k, &x)? {
        Some(ex) if ex.iter().all(|&i| i == m) => Ok(y),
        _ => Err(L0Error::NotAbsorbedHere),
    }
}

/// A sufficient interior test: `sup_Q‖X‖ < ε` strictly on every atom. Only
/// defined for balls whose seminorms all belong to `fam`.
pub fn certified_interior(u: &L0Set, x: &RandomVar, fam: &SeminormFamily) -> Result<bool, L0Error> {
    match u {
        L0Set::Ball(b) if b.seminorms().iter().all(|s| fam.contains(s)) => gt(b.eps(), &b.sup_eval(x)?),
        _ => Err(L0Error::EngineUnsupported(format!(
            "interior certificate for {u} in the topology of {}",
            fam.name
        ))),
    }
}

/// `B* = {atoms i : 1_{A_i}X ∉ 1_{A_i}U}`; passes iff the gauge is `≥ 1` on
/// `B*`.
pub fn outside_lower_bound_check(u: &L0Set, x: &RandomVar) -> Result<Verdict, L0Error> {
    let inside: crate::l0::Rv<bool> = match u {
        L0Set::Ball(b) => b.sup_eval(x)?.zip_with(b.eps(), |v, e| v <= e)?,
        L0Set::AtomDecomposable { r } => x.abs().zip_with(r, |v, r| v <= r)?,
        L0Set::Counterexample { eps } => eps.map(|_| true),
        L0Set::Degenerate(_) => {
            return Err(L0Error::EngineUnsupported(format!("local membership in {u}")))
        }
    };
    let g = symbolic_gauge(u, x)?;
    let one = Rational::one();
    match inside.find_violation(&g, |inside, g| *inside || *g >= one)? {
        None => Ok(Verdict::pass(1)),
        Some(at) => Ok(Verdict::fail(
            Witness::new("gauge below 1 outside the set")
                .with("set", u)
                .with("X", x)
                .with("atom", at)
                .with("gauge", &g),
            1,
        )),
    }
}

/// The atoms of `B*` in the explicit region, plus whether the tail class
/// belongs to it.
pub fn outside_atoms(u: &L0Set, x: &RandomVar) -> Result<Vec<AtomRef>, L0Error> {
    let locs = x.locations();
    let mut out = Vec::new();
    for at in locs {
        let e = match at {
            AtomRef::Atom(i) => Event::singleton(i),
            AtomRef::Tail => Event::Cofinite((1..=x.explicit_len()).collect()),
        };
        if !u.member(&x.restrict(&e)?)? {
            out.push(at);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::seminorms::Seminorm;

    fn rv(space: &AtomSpace, s: &str) -> RandomVar {
        RandomVar::parse(space, s).unwrap()
    }

    fn geo() -> AtomSpace {
        AtomSpace::geometric(64)
    }

    fn cex1(space: &AtomSpace) -> L0Set {
        L0Set::counterexample(RandomVar::one(space)).unwrap()
    }

    fn f3() -> AtomSpace {
        AtomSpace::uniform(3)
    }

    #[test]
    fn membership_examples() {
        let g = geo();
        let u = cex1(&g);
        assert!(u.member(&rv(&g, "<5|1/2>")).unwrap());
        assert_eq!(exception_set(&u, &rv(&g, "<5|1/2>")).unwrap(), Some(vec![1]));
        assert!(!u.member(&rv(&g, "2")).unwrap());
        assert_eq!(exception_set(&u, &rv(&g, "2")).unwrap(), None);
        let s = f3();
        let b = L0Set::Ball(Ball::abs(rv(&s, "1")).unwrap());
        assert!(b.member(&rv(&s, "[1,1,1]")).unwrap());
        assert!(L0Set::atom_decomposable(rv(&s, "[1,0,2]")).unwrap().member(&rv(&s, "[-1,0,2]")).unwrap());
    }

    #[test]
    fn descriptors_round_trip() {
        let s = f3();
        for d in ["ball:abs,eps=1", "ball:abs+weighted:[1,2,0],eps=[1,1,2]", "atomdec:r=[1,2,3]", "cex:eps=1"] {
            let k = L0Set::parse(&s, d).unwrap();
            assert_eq!(L0Set::parse(&s, &k.to_string()).unwrap(), k);
        }
        let g = geo();
        assert_eq!(L0Set::parse(&g, "ball:abs,eps=<2|1>").unwrap().to_string(), "ball:abs,eps=<2|1>");
        assert_eq!(L0Set::parse(&g, "cex:eps=1").unwrap().to_string(), "cex:eps=1");
        let nested = L0Set::parse(&s, "ball:gauge:ball:abs,eps=2,eps=1").unwrap();
        let L0Set::Ball(b) = &nested else { panic!() };
        assert!(matches!(b.seminorms()[0], Seminorm::GaugeOf(_)));
        assert!(L0Set::parse(&s, "cex:eps=[1,0,1]").is_err());
        assert!(L0Set::parse(&s, "disk:eps=1").is_err());
    }

    #[test]
    fn predicates_on_structured_sets() {
        let g = geo();
        let sets = [
            L0Set::Ball(Ball::abs(rv(&g, "<2,1|1/2>")).unwrap()),
            cex1(&g),
            L0Set::counterexample(rv(&g, "<2|1/2>")).unwrap(),
        ];
        for k in &sets {
            assert!(is_l0_convex(k, 5, 100).unwrap().passed, "{k}");
            assert!(is_l0_balanced(k, 5, 100).unwrap().passed, "{k}");
            assert!(absorbent_verdict(k, 5, 100).unwrap().passed, "{k}");
        }
        let s = f3();
        let ad = L0Set::atom_decomposable(rv(&s, "[1,0,2]")).unwrap();
        assert!(is_l0_convex(&ad, 5, 100).unwrap().passed);
        assert!(is_l0_balanced(&ad, 5, 100).unwrap().passed);
        assert_eq!(is_l0_absorbent(&ad, &rv(&s, "[1,1,0]")), Err(L0Error::NotAbsorbedHere));
    }

    #[test]
    fn absorbent_examples() {
        let s = f3();
        let b = L0Set::Ball(Ball::abs(rv(&s, "1")).unwrap());
        assert_eq!(is_l0_absorbent(&b, &rv(&s, "[4,2,0]")).unwrap(), rv(&s, "[5,3,1]"));
        let g = geo();
        let u = L0Set::counterexample(rv(&g, "<2|1/2>")).unwrap();
        let x = rv(&g, "<-6,1|3>");
        let y = is_l0_absorbent(&u, &x).unwrap();
        assert_eq!(y, x.abs().div(&rv(&g, "<2|1/2>")).unwrap().max(&RandomVar::one(&g)).unwrap());
        assert_eq!(is_l0_absorbent(&DegenerateSet::zero(&s), &RandomVar::one(&s)), Err(L0Error::NotAbsorbedHere));
    }

    #[test]
    fn degenerate_sets_fail_their_predicates() {
        let s = f3();
        let v = is_l0_convex(&DegenerateSet::two_point(&s), 1, 50).unwrap();
        assert!(!v.passed);
        let w = v.witness.unwrap();
        assert_eq!(w.rv(&s, "Y").unwrap(), RandomVar::constant_q(&s, q(1, 2)));
        assert!(w.rv(&s, "combination").unwrap().is_zero());

        let t = DegenerateSet::translated(Rational::one(), Ball::abs(rv(&s, "1/2")).unwrap());
        let v = is_l0_balanced(&t, 1, 50).unwrap();
        assert!(!v.passed);
        assert!(v.witness.unwrap().rv(&s, "Y").unwrap().is_zero());
    }

    #[test]
    fn closure_examples() {
        let g = geo();
        let u = cex1(&g);
        assert!(closure_member(&u, &rv(&g, "2")).unwrap());
        let mut smp = Sampler::new(9);
        for _ in 0..50 {
            let x = smp.rv(&g);
            assert!(closure_member(&u, &x).unwrap());
            // each atom piece 1_{A_n}X is a member with exceptions inside {n}
            for n in 1..=8 {
                let piece = x.restrict(&Event::singleton(n)).unwrap();
                let ex = exception_set(&u, &piece).unwrap().unwrap();
                assert!(ex.iter().all(|&i| i == n));
            }
        }
        let b = L0Set::Ball(Ball::abs(rv(&g, "1")).unwrap());
        assert!(!closure_member(&b, &rv(&g, "<0|2>")).unwrap());
    }

    #[test]
    fn concatenation_closedness() {
        let g = geo();
        let v = is_concat_closed(&cex1(&g), 1, PASTE_SAMPLES).unwrap();
        assert!(!v.passed);
        let w = v.witness.unwrap();
        assert_eq!(w.rv(&g, "X").unwrap(), RandomVar::constant_q(&g, Rational::from_int(2)));
        assert_eq!(w.field("partition").unwrap(), "canonical");

        let b = L0Set::Ball(Ball::abs(rv(&g, "1")).unwrap());
        assert!(is_concat_closed(&b, 1, PASTE_SAMPLES).unwrap().passed);
        let s = f3();
        let ad = L0Set::atom_decomposable(rv(&s, "[1,2,3]")).unwrap();
        assert!(is_concat_closed(&ad, 1, PASTE_SAMPLES).unwrap().passed);
    }

    #[test]
    fn gauge_examples() {
        let s = f3();
        let b = L0Set::Ball(Ball::abs(rv(&s, "2")).unwrap());
        let x = rv(&s, "[4,2,0]");
        let sym = gauge(&b, &x, &GaugeEngine::Symbolic).unwrap();
        assert_eq!(sym.value, rv(&s, "[2,1,0]").to_ext());
        let bis = gauge(&b, &x, &GaugeEngine::bisection()).unwrap();
        let enc = bis.enclosure.unwrap();
        assert!(enclosure_contains(&enc, &sym.value).unwrap());
        let width = enc.1.to_finite().unwrap().sub(&enc.0.to_finite().unwrap()).unwrap();
        assert!(width.all(|w| *w <= Rational::pow2(-40)));

        let g = geo();
        let one = RandomVar::one(&g);
        assert!(gauge(&cex1(&g), &one, &GaugeEngine::Symbolic).unwrap().value.all(|v| v.is_finite() && *v == Rational::zero()));
        assert_eq!(
            gauge(&cex1(&g), &one, &GaugeEngine::bisection()).unwrap_err(),
            L0Error::EngineUnsupported("bisection needs a finite space".into())
        );
        let zero = RandomVar::zero(&s);
        assert!(gauge(&b, &zero, &GaugeEngine::Symbolic).unwrap().value.to_finite().unwrap().is_zero());

        let ad = L0Set::atom_decomposable(rv(&s, "[1,0,0]")).unwrap();
        let gv = gauge(&ad, &rv(&s, "[3,0,1]"), &GaugeEngine::Symbolic).unwrap().value;
        assert_eq!(gv.to_string(), "[3,0,+inf]");
        let bis = gauge(&ad, &rv(&s, "[3,0,1]"), &GaugeEngine::bisection()).unwrap();
        assert!(enclosure_contains(&bis.enclosure.unwrap(), &gv).unwrap());
    }

    #[test]
    fn witness_sequences() {
        let s = f3();
        let b = L0Set::Ball(Ball::abs(rv(&s, "2")).unwrap());
        let x = rv(&s, "[4,2,0]");
        let z = gauge_witness_seq(&b, &x).unwrap();
        assert_eq!(z.term(2), rv(&s, "[5/2,3/2,1/2]"));

        let g = geo();
        let u = cex1(&g);
        let one = RandomVar::one(&g);
        let z = gauge_witness_seq(&u, &one).unwrap();
        let mut prev: Option<RandomVar> = None;
        for n in 1..=40 {
            let zn = z.term(n);
            assert!(admissible(&u, &one, &zn).unwrap());
            let ex = exception_set(&u, &one.div(&zn).unwrap()).unwrap().unwrap();
            assert!(ex.iter().all(|&i| i <= n as usize));
            if let Some(p) = prev {
                assert!(geq(&p, &zn).unwrap());
            }
            prev = Some(zn);
        }
        let z0 = gauge_witness_seq(&u, &RandomVar::zero(&g)).unwrap();
        assert_eq!(z0.term(4), RandomVar::constant_q(&g, q(1, 4)));
    }

    #[test]
    fn small_witness_examples() {
        let g = geo();
        let u = cex1(&g);
        let y = small_gauge_witness(&u, 1, &Rational::pow2(-10)).unwrap();
        assert_eq!(y.to_string(), "<1/1024|1>");
        assert!(u.member(&RandomVar::one(&g).div(&y).unwrap()).unwrap());
        let y = small_gauge_witness(&u, 3, &Rational::pow2(-20)).unwrap();
        assert_eq!(*y.value_at(3), Rational::pow2(-20));
        assert_eq!(*y.value_at(2), Rational::one());
        assert_eq!(small_gauge_witness(&u, 2, &Rational::one()).unwrap(), RandomVar::one(&g));
        let u2 = L0Set::counterexample(rv(&g, "<2|1/2>")).unwrap();
        let y = small_gauge_witness(&u2, 5, &Rational::pow2(-20)).unwrap();
        assert!(u2.member(&RandomVar::one(&g).div(&y).unwrap()).unwrap());
        assert!(small_gauge_witness(&u, 65, &Rational::one()).is_err());
    }

    #[test]
    fn interior_and_outside_examples() {
        let s = f3();
        let fam = SeminormFamily::abs();
        let b = L0Set::Ball(Ball::abs(rv(&s, "1")).unwrap());
        assert!(certified_interior(&b, &rv(&s, "[1/2,1/2,1/2]"), &fam).unwrap());
        assert!(!certified_interior(&b, &rv(&s, "[1,1/2,1/2]"), &fam).unwrap());
        assert!(certified_interior(&b, &RandomVar::zero(&s), &fam).unwrap());
        assert!(certified_interior(&cex1(&s), &RandomVar::zero(&s), &fam).is_err());

        assert!(outside_lower_bound_check(&b, &rv(&s, "[2,2,2]")).unwrap().passed);
        assert_eq!(outside_atoms(&b, &rv(&s, "[2,2,2]")).unwrap().len(), 3);
        assert!(outside_lower_bound_check(&b, &rv(&s, "[2,1/2,1/2]")).unwrap().passed);
        assert_eq!(outside_atoms(&b, &rv(&s, "[2,1/2,1/2]")).unwrap(), vec![AtomRef::Atom(1)]);
        assert!(outside_atoms(&b, &rv(&s, "[1,0,1]")).unwrap().is_empty());
    }
}
