//! `L⁰`-seminorms, the neighborhoods `U_{Q,ε}`, and sequential convergence
//! in the topologies they induce.
//!
//! The induced topology quantifies over every `ε ∈ L⁰₊₊`, which cannot be
//! enumerated. Convergence is therefore checked against an explicit probe set
//! of radii (see [`default_probes`]); a `true` answer is relative to those
//! probes, a `false` answer comes with the refuting probe and index.

use std::fmt;

use crate::error::L0Error;
use crate::l0::{geq, RandomVar, SeqFamily};
use crate::prob_space::AtomSpace;
use crate::rational::Rational;
use crate::sampling::Sampler;
use crate::sets::{gauge, GaugeEngine, L0Set};
use crate::verdict::{Verdict, Witness};

#[derive(Clone, PartialEq)]
pub enum Seminorm {
    /// `X ↦ |X|`.
    AbsValue,
    /// `X ↦ |w·X|` for a fixed `w ≥ 0`.
    Weighted(RandomVar),
    /// The gauge of a convex, absorbent, balanced set.
    GaugeOf(Box<L0Set>),
}

impl Seminorm {
    pub fn weighted(w: RandomVar) -> Result<Self, L0Error> {
        if !w.is_nonnegative() {
            return Err(L0Error::Parse(format!("weight {w} has a negative atom")));
        }
        Ok(Seminorm::Weighted(w))
    }

    pub fn gauge_of(set: L0Set) -> Self {
        Seminorm::GaugeOf(Box::new(set))
    }

    pub fn eval(&self, x: &RandomVar) -> Result<RandomVar, L0Error> {
        match self {
            Seminorm::AbsValue => Ok(x.abs()),
            Seminorm::Weighted(w) => Ok(w.mul(x)?.abs()),
            Seminorm::GaugeOf(set) => {
                let g = gauge(set, x, &GaugeEngine::Symbolic)?;
                g.value
                    .to_finite()
                    .ok_or_else(|| L0Error::NotFinite(format!("gauge of {x} is {}", g.value)))
            }
        }
    }

    pub fn parse(space: &AtomSpace, s: &str) -> Result<Self, L0Error> {
        let s = s.trim();
        if s == "abs" {
            return Ok(Seminorm::AbsValue);
        }
        if let Some(w) = s.strip_prefix("weighted:") {
            return Seminorm::weighted(RandomVar::parse(space, w)?);
        }
        if let Some(set) = s.strip_prefix("gauge:") {
            return Ok(Seminorm::gauge_of(L0Set::parse(space, set)?));
        }
        Err(L0Error::Parse(format!("unknown seminorm {s:?}")))
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seminorm::AbsValue => f.write_str("abs"),
            Seminorm::Weighted(w) => write!(f, "weighted:{w}"),
            Seminorm::GaugeOf(set) => write!(f, "gauge:{set}"),
        }
    }
}

impl fmt::Debug for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Anything that maps `L⁰` into `L⁰`; lets the axiom checker run on
/// candidate maps that are not seminorms.
pub trait L0Map {
    fn apply(&self, x: &RandomVar) -> Result<RandomVar, L0Error>;
}

impl L0Map for Seminorm {
    fn apply(&self, x: &RandomVar) -> Result<RandomVar, L0Error> {
        self.eval(x)
    }
}

/// Adapts a closure to [`L0Map`].
pub struct FnMap<F>(pub F);

impl<F: Fn(&RandomVar) -> Result<RandomVar, L0Error>> L0Map for FnMap<F> {
    fn apply(&self, x: &RandomVar) -> Result<RandomVar, L0Error> {
        (self.0)(x)
    }
}

/// `U_{Q,ε} = {X : sup_{‖·‖∈Q} ‖X‖ ≤ ε}`.
#[derive(Clone, PartialEq)]
pub struct Ball {
    seminorms: Vec<Seminorm>,
    eps: RandomVar,
}

impl Ball {
    pub fn new(seminorms: Vec<Seminorm>, eps: RandomVar) -> Result<Self, L0Error> {
        if seminorms.is_empty() {
            return Err(L0Error::Parse("a ball needs at least one seminorm".into()));
        }
        if !eps.is_strictly_positive() {
            return Err(L0Error::NotStrictlyPositive(format!("radius {eps}")));
        }
        Ok(Ball { seminorms, eps })
    }

    /// `B_ε`, the ball of `|·|`.
    pub fn abs(eps: RandomVar) -> Result<Self, L0Error> {
        Ball::new(vec![Seminorm::AbsValue], eps)
    }

    pub fn seminorms(&self) -> &[Seminorm] {
        &self.seminorms
    }

    pub fn eps(&self) -> &RandomVar {
        &self.eps
    }

    pub fn space(&self) -> &AtomSpace {
        self.eps.space()
    }

    /// `sup_{‖·‖∈Q} ‖X‖`.
    pub fn sup_eval(&self, x: &RandomVar) -> Result<RandomVar, L0Error> {
        let mut acc = self.seminorms[0].eval(x)?;
        for s in &self.seminorms[1..] {
            acc = acc.max(&s.eval(x)?)?;
        }
        Ok(acc)
    }

    pub fn contains(&self, x: &RandomVar) -> Result<bool, L0Error> {
        geq(&self.eps, &self.sup_eval(x)?)
    }

    /// The same seminorms with radius `c·ε`.
    pub fn rescaled(&self, c: &RandomVar) -> Result<Self, L0Error> {
        Ball::new(self.seminorms.clone(), self.eps.mul(c)?)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q: Vec<String> = self.seminorms.iter().map(|s| s.to_string()).collect();
        write!(f, "ball:{},eps={}", q.join("+"), self.eps)
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn ball_member(b: &Ball, x: &RandomVar) -> Result<bool, L0Error> {
    b.contains(x)
}

/// A named family `𝒫` of seminorms.
#[derive(Clone, Debug, PartialEq)]
pub struct SeminormFamily {
    pub name: String,
    seminorms: Vec<Seminorm>,
}

impl SeminormFamily {
    pub fn new(name: impl Into<String>, seminorms: Vec<Seminorm>) -> Result<Self, L0Error> {
        if seminorms.is_empty() {
            return Err(L0Error::Parse("a seminorm family must be nonempty".into()));
        }
        Ok(SeminormFamily { name: name.into(), seminorms })
    }

    pub fn abs() -> Self {
        SeminormFamily { name: "abs".into(), seminorms: vec![Seminorm::AbsValue] }
    }

    pub fn seminorms(&self) -> &[Seminorm] {
        &self.seminorms
    }

    pub fn contains(&self, s: &Seminorm) -> bool {
        self.seminorms.contains(s)
    }

    /// `U_{𝒫,ε}` with `Q` the whole (finite) family; the smallest of the
    /// basic neighborhoods for this radius.
    pub fn ball(&self, eps: RandomVar) -> Result<Ball, L0Error> {
        Ball::new(self.seminorms.clone(), eps)
    }
}

/// A topology on `L⁰` given by a neighborhood base of 0 indexed by radii.
#[derive(Clone, Debug, PartialEq)]
pub enum Topology {
    /// Induced by a family of seminorms.
    Seminorms(SeminormFamily),
    /// Generated by `{U_ε : ε ∈ L⁰₊₊}`, the sets bounded by `ε` off a finite
    /// set of atoms.
    CounterexampleBase,
}

impl Topology {
    pub fn abs() -> Self {
        Topology::Seminorms(SeminormFamily::abs())
    }

    /// The basic neighborhood of 0 with radius `eps`.
    pub fn neighborhood(&self, eps: &RandomVar) -> Result<L0Set, L0Error> {
        match self {
            Topology::Seminorms(fam) => Ok(L0Set::Ball(fam.ball(eps.clone())?)),
            Topology::CounterexampleBase => L0Set::counterexample(eps.clone()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Topology::Seminorms(f) => format!("seminorms:{}", f.name),
            Topology::CounterexampleBase => "counterexample-base".into(),
        }
    }
}

impl From<SeminormFamily> for Topology {
    fn from(f: SeminormFamily) -> Self {
        Topology::Seminorms(f)
    }
}

/// Constants `1, 1/2, 2^-10, 2^-20` and the non-constant `<1|2^-20>`.
pub fn default_probes(space: &AtomSpace) -> Vec<RandomVar> {
    let mut probes: Vec<RandomVar> = [0, -1, -10, -20]
        .into_iter()
        .map(|k| RandomVar::constant_q(space, Rational::pow2(k)))
        .collect();
    probes.push(
        RandomVar::eventually(space, vec![Rational::one()], Rational::pow2(-20))
            .expect("single-entry head fits every space"),
    );
    probes
}

/// Outcome of a probe-relative convergence check.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    /// `(probe index, term index)` of the first refutation found.
    pub refuted_at: Option<(usize, u64)>,
}

/// Does `X_n → X`? For every probe `ε`, every term with index in
/// `[⌈depth/2⌉, depth]` must satisfy `X_n − X ∈ U_ε`.
pub fn seq_convergence(
    seq: &SeqFamily,
    x: &RandomVar,
    topology: &Topology,
    depth: u64,
    probes: &[RandomVar],
) -> Result<Convergence, L0Error> {
    assert!(depth >= 1, "depth must be at least 1");
    let hoods = probes
        .iter()
        .map(|p| {
            if !p.is_strictly_positive() {
                return Err(L0Error::NotStrictlyPositive(format!("probe {p}")));
            }
            topology.neighborhood(p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    for n in (depth.div_ceil(2)..=depth).rev() {
        let diff = seq.term(n)?.sub(x)?;
        for (k, hood) in hoods.iter().enumerate() {
            if !hood.member(&diff)? {
                return Ok(Convergence { converged: false, refuted_at: Some((k, n)) });
            }
        }
    }
    Ok(Convergence { converged: true, refuted_at: None })
}

pub fn seq_converges(
    seq: &SeqFamily,
    x: &RandomVar,
    topology: &Topology,
    depth: u64,
    probes: &[RandomVar],
) -> Result<bool, L0Error> {
    Ok(seq_convergence(seq, x, topology, depth, probes)?.converged)
}

/// Verdicts for the seminorm axioms and, separately, the norm axiom.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub seminorm: Verdict,
    pub norm: Verdict,
}

/// Samples `(Y, X₁, X₂)` and checks `‖YX‖ = |Y|‖X‖`, `‖X₁+X₂‖ ≤ ‖X₁‖+‖X₂‖`
/// and `‖X‖ ≥ 0` exactly; separately checks `‖X‖ = 0 ⇒ X = 0`. The first
/// scalars tried are the constants `−1, 0, 1/2, 2`.
pub fn check_seminorm_axioms(
    map: &dyn L0Map,
    space: &AtomSpace,
    seed: u64,
    n_samples: usize,
) -> Result<AxiomReport, L0Error> {
    let mut s = Sampler::stream(seed, "seminorm-axioms");
    let fixed = [Rational::from_int(-1), Rational::zero(), Rational::new(1, 2), Rational::from_int(2)];
    let mut seminorm_failure = None;
    let mut norm_failure = None;
    for i in 0..n_samples {
        let y = match fixed.get(i) {
            Some(c) => RandomVar::constant_q(space, c.clone()),
            None => s.rv(space),
        };
        let x1 = s.rv(space);
        let x2 = s.rv(space);
        let n1 = map.apply(&x1)?;
        if seminorm_failure.is_none() {
            let lhs = map.apply(&y.mul(&x1)?)?;
            let rhs = y.abs().mul(&n1)?;
            if !n1.is_nonnegative() {
                seminorm_failure = Some(Witness::new("nonnegativity").with("X", &x1).with("value", &n1));
            } else if lhs != rhs {
                seminorm_failure = Some(
                    Witness::new("homogeneity")
                        .with("Y", &y)
                        .with("X", &x1)
                        .with("lhs", &lhs)
                        .with("rhs", &rhs),
                );
            } else {
                let lhs = map.apply(&x1.add(&x2)?)?;
                let rhs = n1.add(&map.apply(&x2)?)?;
                if !geq(&rhs, &lhs)? {
                    seminorm_failure = Some(
                        Witness::new("subadditivity")
                            .with("X1", &x1)
                            .with("X2", &x2)
                            .with("lhs", &lhs)
                            .with("rhs", &rhs),
                    );
                }
            }
        }
        if norm_failure.is_none() && n1.is_zero() && !x1.is_zero() {
            norm_failure = Some(Witness::new("definiteness").with("X", &x1));
        }
        if seminorm_failure.is_some() && norm_failure.is_some() {
            break;
        }
    }
    let to_verdict = |w: Option<Witness>| match w {
        Some(w) => Verdict::fail(w, n_samples),
        None => Verdict::pass(n_samples),
    };
    Ok(AxiomReport { seminorm: to_verdict(seminorm_failure), norm: to_verdict(norm_failure) })
}

/// Depth used for the sampled sequences of the continuity check.
pub const CONTINUITY_DEPTH: u64 = 192;

/// Geometric decay rates for sampled convergent sequences.
fn decay_rate(s: &mut Sampler) -> Rational {
    [Rational::new(1, 2), Rational::new(2, 3), Rational::new(3, 4)][s.index(3)].clone()
}

fn decaying(space: &AtomSpace, base: RandomVar, dir: RandomVar, rate: Rational, name: &str) -> SeqFamily {
    let _ = space;
    let name = format!("{name} = {base} + ({rate})^n * {dir}");
    let space = base.space().clone();
    SeqFamily::new(name, &space, move |n| {
        let mut factor = Rational::one();
        for _ in 0..n {
            factor = factor * &rate;
        }
        base.add(&dir.scale(&factor)).expect("same space")
    })
}

/// Sequential continuity of `(X, X') ↦ X + X'` and `(Y, X) ↦ YX`: samples
/// `X_n → X`, `X'_n → X'` in `topology` and `Y_n → Y` in `|·|`, then checks
/// `X_n + X'_n → X + X'` and `Y_n X_n → Y X` against the probe set.
///
/// For the counterexample base the sampled sequences may also carry a fixed
/// bump on one atom, which every `U_ε` absorbs.
pub fn verify_module_continuity(
    topology: &Topology,
    space: &AtomSpace,
    seed: u64,
    n_samples: usize,
) -> Result<Verdict, L0Error> {
    let mut s = Sampler::stream(seed, &format!("continuity:{}", topology.name()));
    let probes = default_probes(space);
    let abs = Topology::abs();
    for i in 0..n_samples {
        let x = s.rv(space);
        let x2 = s.rv(space);
        let y = s.rv(space);
        let mut base_x = x.clone();
        if *topology == Topology::CounterexampleBase && space.is_countable() && s.coin(0.5) {
            let atom = s.int_in(1, space.truncation() as i64) as usize;
            let bump = RandomVar::indicator(space, &crate::prob_space::Event::singleton(atom))?
                .scale(&Rational::from_int(s.int_in(-64, 64)));
            base_x = x.add(&bump)?;
        }
        let xs = decaying(space, base_x, s.rv(space), decay_rate(&mut s), "X_n");
        let x2s = decaying(space, x2.clone(), s.rv(space), decay_rate(&mut s), "X'_n");
        let ys = decaying(space, y.clone(), s.rv(space), decay_rate(&mut s), "Y_n");
        let premises = [
            (&xs, &x, topology),
            (&x2s, &x2, topology),
            (&ys, &y, &abs),
        ];
        for (seq, limit, top) in premises {
            if !seq_converges(seq, limit, top, CONTINUITY_DEPTH, &probes)? {
                return Ok(Verdict::fail(
                    Witness::new("sampled premise does not converge")
                        .with("sequence", &seq.name)
                        .with("limit", limit),
                    i + 1,
                ));
            }
        }
        let (xa, xb) = (xs.clone(), x2s.clone());
        let sum = SeqFamily::new("X_n + X'_n", space, move |n| {
            xa.term(n).and_then(|a| a.add(&xb.term(n)?)).expect("same space")
        });
        let (ya, xa) = (ys.clone(), xs.clone());
        let prod = SeqFamily::new("Y_n X_n", space, move |n| {
            ya.term(n).and_then(|a| a.mul(&xa.term(n)?)).expect("same space")
        });
        let checks = [("addition", sum, x.add(&x2)?), ("scalar multiplication", prod, y.mul(&x)?)];
        for (op, seq, limit) in checks {
            let c = seq_convergence(&seq, &limit, topology, CONTINUITY_DEPTH, &probes)?;
            if let Some((probe, n)) = c.refuted_at {
                return Ok(Verdict::fail(
                    Witness::new(format!("continuity of {op}"))
                        .with("X", &x)
                        .with("X_n", &xs.name)
                        .with("X'_n", &x2s.name)
                        .with("Y_n", &ys.name)
                        .with("limit", &limit)
                        .with("probe", &probes[probe])
                        .with("n", n),
                    i + 1,
                ));
            }
        }
    }
    Ok(Verdict::pass(n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::Event;
    use crate::rational::q;

    fn f3() -> AtomSpace {
        AtomSpace::finite(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap()
    }

    fn rv(space: &AtomSpace, s: &str) -> RandomVar {
        RandomVar::parse(space, s).unwrap()
    }

    #[test]
    fn evaluation() {
        let s = f3();
        assert_eq!(Seminorm::AbsValue.eval(&rv(&s, "[-1,2,0]")).unwrap(), rv(&s, "[1,2,0]"));
        let w = Seminorm::weighted(rv(&s, "[2,1,1]")).unwrap();
        assert_eq!(w.eval(&rv(&s, "[1,1,1]")).unwrap(), rv(&s, "[2,1,1]"));
        let g = Seminorm::gauge_of(L0Set::Ball(Ball::abs(rv(&s, "2")).unwrap()));
        assert_eq!(g.eval(&rv(&s, "[4,2,0]")).unwrap(), rv(&s, "[2,1,0]"));
        assert!(Seminorm::weighted(rv(&s, "[1,-1,0]")).is_err());
    }

    #[test]
    fn ball_membership() {
        let s = f3();
        let b = Ball::abs(rv(&s, "1")).unwrap();
        assert!(ball_member(&b, &rv(&s, "[1,1,1]")).unwrap());
        let g = AtomSpace::geometric(64);
        let bg = Ball::abs(rv(&g, "1")).unwrap();
        assert!(!ball_member(&bg, &rv(&g, "<2|0>")).unwrap());
        let two = Ball::new(
            vec![Seminorm::AbsValue, Seminorm::weighted(rv(&s, "[2,1,1]")).unwrap()],
            rv(&s, "1"),
        )
        .unwrap();
        assert!(ball_member(&two, &rv(&s, "[1/2,1,1]")).unwrap());
        assert!(!ball_member(&two, &rv(&s, "[3/4,1,1]")).unwrap());
        assert!(Ball::abs(rv(&s, "[1,0,1]")).is_err());
    }

    #[test]
    fn membership_is_scale_invariant() {
        let g = AtomSpace::geometric(16);
        let mut smp = Sampler::new(11);
        let fam = [Seminorm::AbsValue, Seminorm::weighted(rv(&g, "<2,0,1|1/2>")).unwrap()];
        for _ in 0..200 {
            let eps = smp.positive_rv(&g);
            let x = smp.rv(&g);
            let c = smp.positive(&Rational::from_int(4));
            let b = Ball::new(fam.to_vec(), eps.clone()).unwrap();
            let scaled = Ball::new(fam.to_vec(), eps.scale(&c.recip().unwrap())).unwrap();
            assert_eq!(
                b.contains(&x).unwrap(),
                scaled.contains(&x.scale(&c.recip().unwrap())).unwrap()
            );
        }
    }

    #[test]
    fn axiom_checker() {
        let s = AtomSpace::uniform(4);
        let r = check_seminorm_axioms(&Seminorm::AbsValue, &s, 42, 200).unwrap();
        assert!(r.seminorm.passed && r.norm.passed);

        let zero = FnMap(|x: &RandomVar| Ok(RandomVar::zero(x.space())));
        let r = check_seminorm_axioms(&zero, &s, 42, 200).unwrap();
        assert!(r.seminorm.passed);
        assert!(!r.norm.passed);
        let w = r.norm.witness.unwrap();
        assert!(!w.rv(&s, "X").unwrap().is_zero());

        let pos = FnMap(|x: &RandomVar| x.max(&RandomVar::zero(x.space())));
        let r = check_seminorm_axioms(&pos, &s, 42, 200).unwrap();
        let w = r.seminorm.witness.expect("positive part is not homogeneous");
        assert_eq!(w.check, "homogeneity");
        assert_eq!(w.rv(&s, "Y").unwrap(), RandomVar::constant_q(&s, Rational::from_int(-1)));
    }

    #[test]
    fn convergence_probes() {
        let g = AtomSpace::geometric(64);
        let probes = default_probes(&g);
        let x = rv(&g, "<3,1|-1/2>");
        let (gg, xx) = (g.clone(), x.clone());
        let shrink = SeqFamily::new("X + 1/n", &g, move |n| {
            xx.add(&RandomVar::constant_q(&gg, Rational::new(1, n as i64))).unwrap()
        });
        assert!(seq_converges(&shrink, &x, &Topology::abs(), 1 << 21, &probes).unwrap());
        assert!(!seq_converges(&shrink, &x, &Topology::abs(), 1 << 12, &probes).unwrap());

        let gg = g.clone();
        let bumps = SeqFamily::new("1_{A_n}", &g, move |n| {
            RandomVar::indicator(&gg, &Event::singleton(n as usize)).unwrap()
        });
        let half = [RandomVar::constant_q(&g, q(1, 2))];
        let zero = RandomVar::zero(&g);
        assert!(!seq_converges(&bumps, &zero, &Topology::abs(), 256, &half).unwrap());
        // A single moving bump stays inside every U_ε.
        assert!(seq_converges(&bumps, &zero, &Topology::CounterexampleBase, 256, &half).unwrap());

        let xx = x.clone();
        let constant = SeqFamily::new("X", &g, move |_| xx.clone());
        assert!(seq_converges(&constant, &x, &Topology::abs(), 8, &probes).unwrap());
    }

    #[test]
    fn convergence_ignores_a_single_far_atom_change() {
        let g = AtomSpace::geometric(8);
        let probes = default_probes(&g);
        let x = RandomVar::zero(&g);
        let gg = g.clone();
        let base = SeqFamily::new("2^-n", &g, move |n| {
            RandomVar::constant_q(&gg, Rational::pow2(-(n as i32)))
        });
        let gg = g.clone();
        let perturbed = SeqFamily::new("2^-n, modified once", &g, move |n| {
            let v = RandomVar::constant_q(&gg, Rational::pow2(-(n as i32)));
            if n == 1 {
                v.add(&RandomVar::indicator(&gg, &Event::singleton(20)).unwrap()).unwrap()
            } else {
                v
            }
        });
        for depth in [2, 16, 64, 128] {
            assert_eq!(
                seq_converges(&base, &x, &Topology::abs(), depth, &probes).unwrap(),
                seq_converges(&perturbed, &x, &Topology::abs(), depth, &probes).unwrap()
            );
        }
    }

    #[test]
    fn module_continuity() {
        let s = AtomSpace::uniform(3);
        assert!(verify_module_continuity(&Topology::abs(), &s, 1, 20).unwrap().passed);
        let fam = SeminormFamily::new(
            "weighted",
            vec![Seminorm::weighted(rv(&s, "[2,0,1/3]")).unwrap(), Seminorm::AbsValue],
        )
        .unwrap();
        assert!(verify_module_continuity(&fam.into(), &s, 2, 20).unwrap().passed);
        let g = AtomSpace::geometric(16);
        assert!(verify_module_continuity(&Topology::CounterexampleBase, &g, 3, 20).unwrap().passed);
    }
}
