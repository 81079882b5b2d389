//! Verification harness: each statement becomes a report of checks, each
//! check carries the outcome it is expected to have, and every failure
//! carries a witness that can be replayed with [`replay_witness`].

use serde::Serialize;

use crate::error::L0Error;
use crate::l0::{concatenate_with, ess_sup_seq, geq, ExtRandomVar, RandomVar, SeqBehavior, SeqFamily};
use crate::prob_space::{AtomSpace, Event, Partition};
use crate::rational::{ExtRational, Rational};
use crate::sampling::{derive_seed, Sampler};
use crate::seminorms::{
    check_seminorm_axioms, verify_module_continuity, Ball, Seminorm, SeminormFamily, Topology,
};
use crate::sets::{
    absorbent_verdict, admissible, certified_interior, enclosure_contains, exception_set, gauge,
    gauge_witness_seq, is_concat_closed, is_l0_absorbent, is_l0_balanced, is_l0_convex,
    small_gauge_witness, GaugeEngine, L0Set,
};
use crate::verdict::{Verdict, Witness};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub space: String,
    pub seed: u64,
    pub truncation: usize,
    pub tol_exp: u32,
    pub epsilon: String,
    pub samples: usize,
    pub oracle_samples: usize,
    pub axiom_samples: usize,
    pub pastes: usize,
    pub ess_sup_depth: u64,
    pub ess_sup_tol_exp: u32,
    pub continuity_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            space: AtomSpace::geometric(crate::prob_space::DEFAULT_TRUNCATION).to_string(),
            seed: 42,
            truncation: crate::prob_space::DEFAULT_TRUNCATION,
            tol_exp: crate::sets::DEFAULT_TOL_EXP,
            epsilon: "1".into(),
            samples: 500,
            oracle_samples: 200,
            axiom_samples: 1000,
            pastes: crate::sets::PASTE_SAMPLES,
            ess_sup_depth: 1 << 20,
            ess_sup_tol_exp: 20,
            continuity_samples: 20,
        }
    }
}

impl Config {
    pub fn atom_space(&self) -> Result<AtomSpace, L0Error> {
        self.space.parse()
    }

    /// The countable space used by the counterexample.
    pub fn geometric(&self) -> AtomSpace {
        AtomSpace::geometric(self.truncation)
    }

    fn sub_seed(&self, label: &str) -> u64 {
        derive_seed(self.seed, label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Expect,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl Check {
    pub fn as_expected(&self) -> bool {
        self.verdict.passed == (self.expected == Expect::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub statement: String,
    /// Every check came out as expected.
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Certificates recorded alongside the checks.
    pub witnesses: Vec<Witness>,
    pub config: Config,
    pub paper_anchor: String,
    pub notes: Vec<String>,
}

impl Report {
    fn new(statement: &str, anchor: &str, config: &Config) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            statement: statement.into(),
            passed: true,
            checks: Vec::new(),
            witnesses: Vec::new(),
            config: config.clone(),
            paper_anchor: anchor.into(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, expected: Expect, verdict: Verdict) {
        let c = Check { name: name.into(), expected, verdict };
        self.passed &= c.as_expected();
        self.checks.push(c);
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Families for the default essential supremum run.
pub fn default_ess_sup_families(space: &AtomSpace) -> Vec<SeqFamily> {
    let one = ExtRandomVar::constant_ext(space, ExtRational::Finite(Rational::one()));
    let s = space.clone();
    let recip = SeqFamily::new("1 - 1/n", space, move |n| {
        RandomVar::constant_q(&s, Rational::one() - Rational::new(1, n as i64))
    })
    .monotone()
    .expecting(SeqBehavior::Convergent)
    .with_upper_bound(one.clone());
    let s = space.clone();
    let linear = SeqFamily::new("n", space, move |n| RandomVar::constant_q(&s, Rational::from_int(n as i64)))
        .monotone()
        .expecting(SeqBehavior::Unbounded);
    let s = space.clone();
    let cap = space.atom_count().unwrap_or(space.truncation());
    let exhaustion = SeqFamily::new("1_{A_1 + ... + A_n}", space, move |n| {
        RandomVar::indicator(&s, &Event::atoms(1..=(n as usize).min(cap))).expect("atoms of the space")
    })
    .monotone()
    .expecting(SeqBehavior::Convergent)
    .with_upper_bound(one);
    vec![recip, linear, exhaustion]
}

/// `count` seeded families: convergent ones of several shapes and divergent
/// ones, cycling through the shapes.
pub fn sampled_families(space: &AtomSpace, seed: u64, count: usize) -> Vec<SeqFamily> {
    let mut s = Sampler::stream(seed, "ess-sup-families");
    let cap = space.atom_count().unwrap_or(space.truncation());
    (0..count)
        .map(|i| {
            let c = s.rational();
            let a = s.positive(&Rational::one());
            let sp = space.clone();
            match i % 8 {
                0 => SeqFamily::new(format!("{c} - ({a})/n"), space, move |n| {
                    RandomVar::constant_q(&sp, &c - &(&a * &Rational::new(1, n as i64)))
                })
                .expecting(SeqBehavior::Convergent),
                1 => SeqFamily::new(format!("{c} - ({a})/n^2"), space, move |n| {
                    let n = n as i64;
                    RandomVar::constant_q(&sp, &c - &(&a * &Rational::new(1, n * n)))
                })
                .expecting(SeqBehavior::Convergent),
                2 => SeqFamily::new(format!("{c} - ({a}) 2^-min(n,60)"), space, move |n| {
                    RandomVar::constant_q(&sp, &c - &(&a * &Rational::pow2(-(n.min(60) as i32))))
                })
                .expecting(SeqBehavior::Convergent),
                3 => SeqFamily::new(format!("{c} + (-1)^n ({a})/n"), space, move |n| {
                    let sign = if n % 2 == 0 { 1 } else { -1 };
                    RandomVar::constant_q(&sp, &c + &(&a * &Rational::new(sign, n as i64)))
                })
                .expecting(SeqBehavior::Convergent),
                4 => {
                    let c2 = s.rational();
                    let t = s.rational();
                    SeqFamily::new(format!("<{c} - ({a})/n, {c2} - ({a})/2n | {t} - ({a})/n>"), space, move |n| {
                        let d = &a * &Rational::new(1, n as i64);
                        let half = &d * &Rational::new(1, 2);
                        RandomVar::eventually(&sp, vec![&c - &d, &c2 - &half], &t - &d).expect("short head")
                    })
                    .expecting(SeqBehavior::Convergent)
                }
                5 => {
                    let w = a.clone();
                    SeqFamily::new(format!("({w}) 1_{{A_1 + ... + A_min(n,{cap})}}"), space, move |n| {
                        RandomVar::indicator(&sp, &Event::atoms(1..=(n as usize).min(cap)))
                            .expect("atoms of the space")
                            .scale(&w)
                    })
                    .expecting(SeqBehavior::Convergent)
                }
                6 => {
                    let slope = Rational::from_int(s.int_in(2, 5));
                    SeqFamily::new(format!("{c} + {slope} n"), space, move |n| {
                        RandomVar::constant_q(&sp, &c + &(&slope * &Rational::from_int(n as i64)))
                    })
                    .expecting(SeqBehavior::Unbounded)
                }
                _ => {
                    let k = s.int_in(1, cap.min(8) as i64) as usize;
                    SeqFamily::new(format!("n 1_{{A_{k}}}"), space, move |n| {
                        RandomVar::indicator(&sp, &Event::singleton(k))
                            .expect("atom of the space")
                            .scale(&Rational::from_int(n as i64))
                    })
                    .expecting(SeqBehavior::Unbounded)
                }
            }
        })
        .collect()
}

/// Per family: the running maximum is non-decreasing (full replay with fresh
/// arithmetic), dominates every inspected term, matches the declared
/// behavior, and is dominated by any supplied upper bound.
pub fn verify_ess_sup(families: &[SeqFamily], config: &Config) -> Result<Report, L0Error> {
    let mut report = Report::new(
        "prop-ess-sup",
        "Y* = ess.sup of an upward directed family is the a.s. limit of a non-decreasing sequence from the family",
        config,
    );
    let depth = config.ess_sup_depth;
    let tol = Rational::pow2(-(config.ess_sup_tol_exp as i32));
    for fam in families {
        let r = ess_sup_seq(fam, depth, &tol)?;
        let top = r.witness.checkpoint(depth).expect("depth checkpoint").clone();
        let mut prev: Option<RandomVar> = None;
        let mut monotone = Verdict::pass(depth as usize);
        let mut bounds = Verdict::pass(depth as usize);
        for n in 1..=depth {
            let y = fam.term(n)?;
            let m = match &prev {
                None => y.clone(),
                Some(p) => p.max(&y)?,
            };
            if let Some(p) = &prev {
                if monotone.passed && !geq(&m, p)? {
                    monotone = Verdict::fail(
                        Witness::new("running maximum decreases").with("family", &fam.name).with("n", n),
                        n as usize,
                    );
                }
            }
            if bounds.passed && !geq(&top, &y)? {
                bounds = Verdict::fail(
                    Witness::new("supremum below a term").with("family", &fam.name).with("n", n).with("term", &y),
                    n as usize,
                );
            }
            prev = Some(m);
        }
        report.check(format!("{}: running maximum is non-decreasing", fam.name), Expect::Pass, monotone);
        report.check(format!("{}: value dominates every inspected term", fam.name), Expect::Pass, bounds);
        if let Some(b) = fam.expected {
            let ok = match b {
                SeqBehavior::Convergent => r.converged && !r.unbounded,
                SeqBehavior::Unbounded => r.unbounded,
            };
            let w = Witness::new(format!("{b:?}"))
                .with("family", &fam.name)
                .with("value", &r.value)
                .with("converged", r.converged)
                .with("unbounded", r.unbounded);
            let v = if ok { Verdict::pass(1) } else { Verdict::fail(w, 1) };
            report.check(format!("{}: behaves as declared ({b:?})", fam.name), Expect::Pass, v);
        }
        if let Some(bound) = &fam.upper_bound {
            let v = if geq(bound, &r.value)? {
                Verdict::pass(1)
            } else {
                Verdict::fail(
                    Witness::new("upper bound below supremum")
                        .with("family", &fam.name)
                        .with("bound", bound)
                        .with("value", &r.value),
                    1,
                )
            };
            report.check(format!("{}: supplied upper bound dominates", fam.name), Expect::Pass, v);
        }
        report.witnesses.push(
            Witness::new("ess.sup")
                .with("family", &fam.name)
                .with("depth", depth)
                .with("value", &r.value)
                .with("converged", r.converged)
                .with("unbounded", r.unbounded),
        );
    }
    report.note("directedness of the families is not checked; the running maximum is a valid witness for any countable family");
    Ok(report)
}

fn fail_or_pass(failure: Option<Witness>, n: usize) -> Verdict {
    match failure {
        Some(w) => Verdict::fail(w, n),
        None => Verdict::pass(n),
    }
}

fn symbolic(k: &L0Set, x: &RandomVar) -> Result<ExtRandomVar, L0Error> {
    Ok(gauge(k, x, &GaugeEngine::Symbolic)?.value)
}

/// The gauge properties: localization, strictly positive candidates,
/// homogeneity for `Y ≥ 0`, subadditivity, the witness sequence, and
/// homogeneity for all `Y` when `K` is balanced; then the seminorm axioms
/// for `GaugeOf(K)`.
///
/// Errors with `PrerequisiteFailed` unless `K` is convex and absorbent.
pub fn verify_gauge_properties(k: &L0Set, config: &Config) -> Result<Report, L0Error> {
    let label = format!("gauge:{k}");
    let seed = config.sub_seed(&label);
    let n = config.samples;
    let convex = is_l0_convex(k, seed, n)?;
    let absorbent = absorbent_verdict(k, seed, n)?;
    for (what, v) in [("convex", &convex), ("absorbent", &absorbent)] {
        if !v.passed {
            let w = v.witness.as_ref().map(|w| serde_json::to_string(w).expect("serializes"));
            return Err(L0Error::PrerequisiteFailed(format!(
                "{k} is not L0-{what}: {}",
                w.unwrap_or_default()
            )));
        }
    }
    let balanced = is_l0_balanced(k, seed, n)?;
    let mut report = Report::new(
        "prop-gauge-props",
        "p_K(X) = ess.inf{Y in L0_+ : X in YK}; p_K is an L0-seminorm",
        config,
    );
    report.check(format!("{k} is L0-convex"), Expect::Pass, convex);
    report.check(format!("{k} is L0-absorbent"), Expect::Pass, absorbent);
    report.check(format!("{k} is L0-balanced"), Expect::Pass, balanced.clone());

    let space = k.space().clone();
    let mut s = Sampler::stream(seed, "gauge-properties");
    let mut fails: [Option<Witness>; 6] = Default::default();
    let witness_terms = 16u64;
    for i in 0..n {
        let x = if i % 2 == 0 { k.sample_member(&mut s)?.scale(&Rational::from_int(s.int_in(1, 4))) } else { s.rv(&space) };
        let y = s.rv(&space);
        let a = s.event(&space);
        let gx = symbolic(k, &x)?;

        if fails[0].is_none() {
            let lhs = symbolic(k, &x.restrict(&a)?)?.restrict_with(&a, ExtRational::zero())?;
            let rhs = gx.restrict_with(&a, ExtRational::zero())?;
            if lhs != rhs {
                fails[0] = Some(Witness::new("localization").with("set", k).with("X", &x).with("A", &a));
            }
        }
        if fails[1].is_none() {
            if let Some(w) = positive_candidates_violation(k, &x, &gx, config.tol_exp)? {
                fails[1] = Some(w);
            }
        }
        if fails[2].is_none() {
            let yp = y.abs();
            if symbolic(k, &yp.mul(&x)?)? != yp.to_ext().mul(&gx)? {
                fails[2] = Some(Witness::new("positive homogeneity").with("set", k).with("X", &x).with("Y", &yp));
            }
        }
        if fails[3].is_none() {
            let x2 = s.rv(&space);
            let sum = symbolic(k, &x.add(&x2)?)?;
            let bound = gx.add(&symbolic(k, &x2)?)?;
            if !geq(&bound, &sum)? {
                fails[3] = Some(Witness::new("subadditivity").with("set", k).with("X1", &x).with("X2", &x2));
            }
        }
        if fails[4].is_none() {
            let seq = gauge_witness_seq(k, &x)?;
            let mut prev: Option<RandomVar> = None;
            for t in 1..=witness_terms {
                let z = seq.term(t);
                let decreasing = prev.as_ref().map_or(Ok(true), |p| geq(p, &z))?;
                if !decreasing || !admissible(k, &x, &z)? {
                    fails[4] = Some(
                        Witness::new("witness sequence").with("set", k).with("X", &x).with("n", t).with("Z_n", &z),
                    );
                    break;
                }
                prev = Some(z);
            }
        }
        if fails[5].is_none() && balanced.passed && symbolic(k, &y.mul(&x)?)? != y.abs().to_ext().mul(&gx)? {
            fails[5] = Some(Witness::new("absolute homogeneity").with("set", k).with("X", &x).with("Y", &y));
        }
    }
    let names = [
        "1: localization 1_A p(1_A X) = 1_A p(X)",
        "2: strictly positive candidates give the same gauge",
        "3: p(YX) = Y p(X) for Y >= 0",
        "4: p(X + X') <= p(X) + p(X')",
        "5: Z_n non-increasing and admissible",
        "6: p(YX) = |Y| p(X) for balanced K",
    ];
    for (i, (name, f)) in names.iter().zip(fails).enumerate() {
        if i == 5 && !balanced.passed {
            report.note("item 6 skipped: K is not balanced");
            continue;
        }
        report.check(*name, Expect::Pass, fail_or_pass(f, n));
    }
    let axioms = check_seminorm_axioms(&Seminorm::gauge_of(k.clone()), &space, seed, config.axiom_samples)?;
    report.check(format!("gauge:{k} satisfies the seminorm axioms"), Expect::Pass, axioms.seminorm);
    report.note(format!("gauge:{k} separates points on the samples: {}", axioms.norm.passed));
    Ok(report)
}

/// Strictly positive admissible candidates reach the gauge: on finite spaces
/// the bisection engine (which only tries `t > 0`) must enclose the symbolic
/// value where both apply; everywhere, `Z_n > 0` from the witness sequence
/// must lie within `1/n` of the gauge on atoms `1..=n`.
fn positive_candidates_violation(
    k: &L0Set,
    x: &RandomVar,
    gx: &ExtRandomVar,
    tol_exp: u32,
) -> Result<Option<Witness>, L0Error> {
    let fail = || Witness::new("strictly positive candidates").with("set", k).with("X", x);
    if k.space().atom_count().is_some() && !matches!(k, L0Set::Counterexample { .. }) {
        let r = gauge(k, x, &GaugeEngine::Bisection { tol_exp })?;
        if !enclosure_contains(r.enclosure.as_ref().expect("bisection encloses"), gx)? {
            return Ok(Some(fail()));
        }
    }
    let Some(p) = gx.to_finite() else { return Ok(None) };
    let seq = gauge_witness_seq(k, x)?;
    let span = k.space().atom_count().unwrap_or(k.space().truncation());
    for n in [1u64, 2, 8, 32] {
        let z = seq.term(n);
        let close = (1..=span.min(n as usize))
            .all(|i| z.value_at(i) - p.value_at(i) <= Rational::new(1, n as i64));
        if !z.is_strictly_positive() || !close || !admissible(k, x, &z)? {
            return Ok(Some(fail().with("n", n).with("Z_n", &z)));
        }
    }
    Ok(None)
}

/// Symbolic gauge against bisection enclosures on random finite spaces with
/// at most six atoms; balls and atom-decomposable sets alternate.
pub fn verify_gauge_oracle(config: &Config) -> Result<Report, L0Error> {
    let mut report = Report::new(
        "gauge-oracle-agreement",
        "p_K(X) = ess.inf{Y in L0_+ : X in YK}",
        config,
    );
    let mut s = Sampler::stream(config.sub_seed("gauge-oracle"), "pairs");
    let tol = Rational::pow2(-(config.tol_exp as i32));
    let engine = GaugeEngine::Bisection { tol_exp: config.tol_exp };
    let mut failure = None;
    for i in 0..config.oracle_samples {
        let atoms = s.int_in(1, 6) as usize;
        let weights: Vec<Rational> = (0..atoms).map(|_| s.positive(&Rational::one())).collect();
        let total = weights.iter().fold(Rational::zero(), |acc, w| acc + w);
        let space = AtomSpace::finite(weights.iter().map(|w| w / &total).collect())?;
        let k = if i % 2 == 0 {
            let mut q = vec![Seminorm::AbsValue];
            if s.coin(0.5) {
                q.push(Seminorm::weighted(s.nonnegative_rv(&space))?);
            }
            L0Set::Ball(Ball::new(q, s.positive_rv(&space))?)
        } else {
            L0Set::atom_decomposable(s.positive_rv(&space))?
        };
        let x = s.rv(&space);
        let sym = gauge(&k, &x, &GaugeEngine::Symbolic)?.value;
        let enc = gauge(&k, &x, &engine)?.enclosure.expect("bisection encloses");
        let width = enc.1.to_finite().and_then(|hi| hi.sub(&enc.0.to_finite()?).ok());
        let narrow = width.is_some_and(|w| w.all(|v| *v <= tol));
        if !narrow || !enclosure_contains(&enc, &sym)? {
            failure = Some(
                Witness::new("oracle disagreement")
                    .with("space", &space)
                    .with("set", &k)
                    .with("X", &x)
                    .with("symbolic", &sym)
                    .with("lower", &enc.0)
                    .with("upper", &enc.1),
            );
            break;
        }
    }
    report.check(
        format!("symbolic gauge inside bisection enclosure of width <= 2^-{}", config.tol_exp),
        Expect::Pass,
        fail_or_pass(failure, config.oracle_samples),
    );
    Ok(report)
}

/// A point on the boundary of `K` (where the radius allows).
fn boundary_point(k: &L0Set, s: &mut Sampler) -> Result<RandomVar, L0Error> {
    let space = k.space().clone();
    let sign = if s.coin(0.5) { Rational::one() } else { -Rational::one() };
    match k {
        L0Set::Ball(b) => {
            let d = s.rv(&space);
            let v = b.sup_eval(&d)?;
            let f = b.eps().zip_with(&v, |e, v| if v.is_zero() { Rational::one() } else { e / v })?;
            d.mul(&f)
        }
        L0Set::Counterexample { eps } => Ok(eps.scale(&sign)),
        L0Set::AtomDecomposable { r } => Ok(r.scale(&sign)),
        L0Set::Degenerate(_) => k.sample_member(s),
    }
}

/// `radius + 1`, the canonical point just outside `K`.
fn just_outside(k: &L0Set) -> Result<RandomVar, L0Error> {
    let one = RandomVar::one(k.space());
    match k {
        L0Set::Ball(b) => b.eps().add(&one),
        L0Set::Counterexample { eps } => eps.add(&one),
        L0Set::AtomDecomposable { r } => r.add(&one),
        L0Set::Degenerate(_) => Ok(one.scale(&Rational::from_int(2))),
    }
}

/// Whether `K` is documented to be closed under countable concatenations:
/// `U_ε` on the countable space is not, every other structured set is.
fn documented_concat_closed(k: &L0Set) -> bool {
    !(matches!(k, L0Set::Counterexample { .. }) && k.space().is_countable())
}

/// The chain `interior ⇒ p < 1 ⇒ member ⇒ p ≤ 1`, link by link. For sets that
/// are not concatenation-closed the middle link is expected to break.
pub fn verify_sandwich(u: &L0Set, fam: &SeminormFamily, config: &Config) -> Result<Report, L0Error> {
    let mut report = Report::new(
        "prop-sandwich",
        "interior of U is inside {p_U < 1}, which is inside U, which is inside {p_U <= 1}",
        config,
    );
    let closed = documented_concat_closed(u);
    let mut s = Sampler::stream(config.sub_seed(&format!("sandwich:{u}")), "points");
    let space = u.space().clone();
    let one = Rational::one();
    let mut links: [Option<Witness>; 3] = Default::default();
    let mut interior_supported = true;
    for i in 0..config.samples {
        let x = match i {
            0 => just_outside(u)?,
            1 => boundary_point(u, &mut s)?,
            _ => match i % 3 {
                0 => u.sample_member(&mut s)?,
                1 => s.rv(&space),
                _ => u.sample_member(&mut s)?.scale(&s.positive(&Rational::from_int(2))),
            },
        };
        let g = symbolic(u, &x)?;
        let below = g.all(|v| *v < one);
        let member = u.member(&x)?;
        if links[0].is_none() && interior_supported {
            match certified_interior(u, &x, fam) {
                Ok(true) if !below => {
                    links[0] = Some(Witness::new("sandwich: interior outside {p < 1}").with("set", u).with("X", &x))
                }
                Ok(_) => {}
                Err(L0Error::EngineUnsupported(_)) => interior_supported = false,
                Err(e) => return Err(e),
            }
        }
        if links[1].is_none() && below && !member {
            links[1] = Some(
                Witness::new("sandwich: {p < 1} not inside U").with("set", u).with("X", &x).with("gauge", &g),
            );
        }
        if links[2].is_none() && member && !g.all(|v| *v <= one) {
            links[2] = Some(Witness::new("sandwich: U not inside {p <= 1}").with("set", u).with("X", &x).with("gauge", &g));
        }
    }
    let [l0, l1, l2] = links;
    if interior_supported {
        report.check("certified interior => p < 1", Expect::Pass, fail_or_pass(l0, config.samples));
    } else {
        report.note(format!("{u} is not a ball of {}; no interior certificate", fam.name));
    }
    let middle = if closed { Expect::Pass } else { Expect::Fail };
    report.check("p < 1 => member", middle, fail_or_pass(l1, config.samples));
    report.check("member => p <= 1", Expect::Pass, fail_or_pass(l2, config.samples));
    if !closed {
        report.note(format!("{u} is not closed under countable concatenations, so the middle inclusion may fail"));
    }
    Ok(report)
}

/// Forward: balls of `fam` are concatenation-closed (sampled radii).
/// Reverse: for each base set with all four properties, `U ⊂ {p_U ≤ 1}`,
/// `{p_U ≤ 1/2} ⊂ U`, and `p_{εU} = p_U/ε`.
pub fn verify_characterization(base: &[L0Set], fam: &SeminormFamily, config: &Config) -> Result<Report, L0Error> {
    let mut report = Report::new(
        "thm-characterization",
        "a locally L0-convex topology is induced by L0-seminorms iff it has a base of L0-convex, absorbent, balanced sets closed under countable concatenations",
        config,
    );
    let Some(first) = base.first() else {
        return Err(L0Error::Parse("empty base".into()));
    };
    let space = first.space().clone();
    let mut s = Sampler::stream(config.sub_seed("characterization"), "radii");
    for j in 0..3 {
        let eps = if j == 0 { RandomVar::one(&space) } else { s.positive_rv(&space) };
        let ball = L0Set::Ball(fam.ball(eps)?);
        let v = is_concat_closed(&ball, config.sub_seed(&format!("forward:{ball}")), config.pastes)?;
        report.check(format!("forward: {ball} is closed under countable concatenations"), Expect::Pass, v);
    }
    for u in base {
        let seed = config.sub_seed(&format!("reverse:{u}"));
        let closed = documented_concat_closed(u);
        let conditions = [
            ("L0-convex", is_l0_convex(u, seed, config.samples)?),
            ("L0-absorbent", absorbent_verdict(u, seed, config.samples)?),
            ("L0-balanced", is_l0_balanced(u, seed, config.samples)?),
        ];
        let mut all = true;
        for (what, v) in conditions {
            all &= v.passed;
            report.check(format!("base {u}: {what}"), Expect::Pass, v);
        }
        let cc = is_concat_closed(u, seed, config.pastes)?;
        all &= cc.passed;
        let expect = if closed { Expect::Pass } else { Expect::Fail };
        report.check(format!("base {u}: closed under countable concatenations"), expect, cc);

        let mut smp = Sampler::stream(seed, "reverse");
        let mut inside = None;
        let mut half = None;
        let mut scaling = None;
        let half_q = Rational::new(1, 2);
        for i in 0..config.samples {
            let m = u.sample_member(&mut smp)?;
            if inside.is_none() && !symbolic(u, &m)?.all(|v| *v <= Rational::one()) {
                inside = Some(Witness::new("U not inside {p_U <= 1}").with("set", u).with("X", &m));
            }
            let x = if i == 0 { just_outside(u)? } else { smp.rv(&space) };
            let g = symbolic(u, &x)?;
            let t = smp.unit();
            // rescale to p_U = t/2 where the gauge is positive and finite; zero where infinite
            let f = g.map(|v| match v {
                ExtRational::Finite(q) if q.is_zero() => Rational::one(),
                ExtRational::Finite(q) => &(&t * &half_q) / q,
                _ => Rational::zero(),
            });
            let xh = x.mul(&f)?;
            if half.is_none() && symbolic(u, &xh)?.all(|v| *v <= half_q) && !u.member(&xh)? {
                half = Some(Witness::new("{p_U <= 1/2} not inside U").with("set", u).with("X", &xh));
            }
            let eps = smp.positive_rv(&space);
            if scaling.is_none() {
                let lhs = symbolic(&u.scaled(&eps)?, &x)?;
                let rhs = g.mul(&eps.map(|e| ExtRational::Finite(e.recip().expect("positive"))))?;
                if lhs != rhs {
                    scaling = Some(Witness::new("p_{eps U} != p_U / eps").with("set", u).with("X", &x).with("eps", &eps));
                }
            }
        }
        let n = config.samples;
        report.check(format!("reverse {u}: U inside {{p_U <= 1}}"), Expect::Pass, fail_or_pass(inside, n));
        let expect = if all || closed { Expect::Pass } else { Expect::Fail };
        report.check(format!("reverse {u}: {{p_U <= 1/2}} inside U"), expect, fail_or_pass(half, n));
        report.check(format!("reverse {u}: p_(eps U) = p_U / eps"), Expect::Pass, fail_or_pass(scaling, n));
    }
    Ok(report)
}

/// Sequential continuity of the module operations for the `|·|` topology
/// and for the counterexample base.
pub fn verify_continuity(config: &Config) -> Result<Report, L0Error> {
    let mut report = Report::new(
        "defn-topological-module",
        "(X, X') -> X + X' and (Y, X) -> YX are continuous",
        config,
    );
    let space = config.atom_space()?;
    let g = config.geometric();
    let n = config.continuity_samples;
    let seed = config.sub_seed("continuity");
    report.check(
        "|.| topology",
        Expect::Pass,
        verify_module_continuity(&Topology::abs(), &space, seed, n)?,
    );
    report.check(
        "counterexample base",
        Expect::Pass,
        verify_module_continuity(&Topology::CounterexampleBase, &g, seed, n)?,
    );
    report.note("convergence is checked against the default probe radii 1, 1/2, 2^-10, 2^-20, <1|2^-20>");
    Ok(report)
}

/// The full counterexample on the countable space: (a) `U_ε` is convex,
/// absorbent, balanced; (b) the pieces `(ε+1)1_{A_n}` are members but their
/// paste is not; (c) per-atom certificates that the gauge of 1 is at most
/// `2^-20` on every atom up to the truncation; (d) `ε + 1` has gauge 0 yet
/// lies outside `U_ε`.
pub fn run_counterexample(eps: &RandomVar, config: &Config) -> Result<Report, L0Error> {
    let space = eps.space().clone();
    if !space.is_countable() {
        return Err(L0Error::EngineUnsupported("the counterexample needs the countable space".into()));
    }
    let u = L0Set::counterexample(eps.clone())?;
    let mut report = Report::new(
        "example-counterexample",
        "U_eps = {X : exists finite I with |X 1_{A_i}| <= eps for i not in I}; p_U = 0 and U_eps is not closed under countable concatenations",
        config,
    );
    let seed = config.sub_seed("counterexample");
    report.check("(a) U_eps is L0-convex", Expect::Pass, is_l0_convex(&u, seed, config.samples)?);
    report.check("(a) U_eps is L0-absorbent", Expect::Pass, absorbent_verdict(&u, seed, config.samples)?);
    report.check("(a) U_eps is L0-balanced", Expect::Pass, is_l0_balanced(&u, seed, config.samples)?);

    let n = space.truncation();
    let bump = eps.add(&RandomVar::one(&space))?;
    let piece = |k: usize| bump.restrict(&Event::singleton(k)).expect("atom of the space");
    let mut bad_piece = None;
    for k in 1..=2 * n {
        let p = piece(k);
        if exception_set(&u, &p)? != Some(if p.value_at(k) > eps.value_at(k) { vec![k] } else { vec![] }) {
            bad_piece = Some(Witness::new("piece outside U_eps").with("set", &u).with("n", k).with("piece", &p));
            break;
        }
    }
    report.check(
        format!("(b) every piece (eps+1) 1_(A_n), n <= {}, is in U_eps", 2 * n),
        Expect::Pass,
        fail_or_pass(bad_piece, 2 * n),
    );
    let paste = concatenate_with(&Partition::CanonicalSingletons, piece)?;
    let paste_member = u.member(&paste)?;
    let w = Witness::new("concatenation closure: paste of members is not a member")
        .with("set", &u)
        .with("partition", Partition::CanonicalSingletons)
        .with("pieces", format!("({eps} + 1) * 1_{{A_n}}"))
        .with("X", &paste);
    let v = if paste_member && paste == bump { Verdict::pass(1) } else { Verdict::fail(w, 1) };
    report.check("(b) the paste eps+1 is in U_eps", Expect::Fail, v);
    report.check(
        "(b) U_eps is closed under countable concatenations",
        Expect::Fail,
        is_concat_closed(&u, seed, config.pastes)?,
    );

    let delta = Rational::pow2(-20);
    let one = RandomVar::one(&space);
    let mut bad_atom = None;
    for m in 1..=n {
        let y = small_gauge_witness(&u, m, &delta)?;
        let ok = *y.value_at(m) <= delta && y.is_strictly_positive() && u.member(&one.div(&y)?)?;
        if !ok {
            bad_atom = Some(Witness::new("small gauge certificate").with("set", &u).with("m", m).with("Y", &y));
            break;
        }
        report.witnesses.push(
            Witness::new("per-atom gauge of 1 at most delta")
                .with("m", m)
                .with("delta", &delta)
                .with("Y", &y),
        );
    }
    report.check(
        format!("(c) gauge of 1 is at most 2^-20 on atoms 1..={n}"),
        Expect::Pass,
        fail_or_pass(bad_atom, n),
    );
    let g1 = symbolic(&u, &one)?;
    let zero = ExtRandomVar::constant_ext(&space, ExtRational::zero());
    let v = if g1 == zero {
        Verdict::pass(1)
    } else {
        Verdict::fail(Witness::new("gauge of 1").with("value", &g1), 1)
    };
    report.check("(c) symbolic gauge of 1 is 0", Expect::Pass, v);
    report.note(format!(
        "(c) is certified on atoms 1..={n}; p(X) = |X| p(1) extends it to every X by homogeneity"
    ));

    let gx = symbolic(&u, &bump)?;
    let below = gx.all(|v| *v < Rational::one());
    let member = u.member(&bump)?;
    let w = Witness::new("sandwich: {p < 1} not inside U").with("set", &u).with("X", &bump).with("gauge", &gx);
    let v = if below && !member { Verdict::fail(w, 1) } else { Verdict::pass(1) };
    report.check("(d) {p_U < 1} inside U_eps", Expect::Fail, v);
    report.note("only the canonical base {U_eps} is checked; other bases of the same topology are not examined");
    Ok(report)
}

/// Which statements a run covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    EssSup,
    Gauge,
    Sandwich,
    Characterization,
    Counterexample,
}

impl std::str::FromStr for Suite {
    type Err = L0Error;

    fn from_str(s: &str) -> Result<Self, L0Error> {
        Ok(match s {
            "all" => Suite::All,
            "ess-sup" => Suite::EssSup,
            "gauge" => Suite::Gauge,
            "sandwich" => Suite::Sandwich,
            "characterization" => Suite::Characterization,
            "counterexample" => Suite::Counterexample,
            other => return Err(L0Error::Parse(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub passed: bool,
    pub config: Config,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// `head` then `tail`, with the head cut to fit small finite spaces.
fn fitted(space: &AtomSpace, mut head: Vec<Rational>, tail: Rational) -> Result<RandomVar, L0Error> {
    head.truncate(space.atom_count().unwrap_or(head.len()));
    RandomVar::eventually(space, head, tail)
}

/// Structured sets used by the gauge, sandwich and characterization suites.
fn structured_sets(space: &AtomSpace, eps: &RandomVar) -> Result<Vec<L0Set>, L0Error> {
    let two = RandomVar::constant_q(space, Rational::from_int(2));
    let r = fitted(space, vec![Rational::one(), Rational::from_int(2)], Rational::new(1, 2))?;
    let w = fitted(space, vec![Rational::from_int(2), Rational::zero()], Rational::one())?;
    Ok(vec![
        L0Set::Ball(Ball::abs(two)?),
        L0Set::counterexample(eps.clone())?,
        L0Set::atom_decomposable(r)?,
        L0Set::Ball(Ball::new(vec![Seminorm::AbsValue, Seminorm::weighted(w)?], eps.clone())?),
    ])
}

pub fn run_suite(suite: Suite, config: &Config) -> Result<SuiteReport, L0Error> {
    let space = config.atom_space()?;
    let eps = RandomVar::parse(&space, &config.epsilon)?;
    let geo = config.geometric();
    let geo_eps = RandomVar::parse(&geo, &config.epsilon)?;
    let fam = SeminormFamily::abs();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut reports = Vec::new();
    if wants(Suite::EssSup) {
        reports.push(verify_ess_sup(&default_ess_sup_families(&space), config)?);
    }
    if wants(Suite::Gauge) {
        for k in structured_sets(&space, &eps)? {
            reports.push(verify_gauge_properties(&k, config)?);
        }
        reports.push(verify_gauge_oracle(config)?);
    }
    if wants(Suite::Sandwich) {
        for k in structured_sets(&space, &eps)? {
            reports.push(verify_sandwich(&k, &fam, config)?);
        }
    }
    if wants(Suite::Characterization) {
        let base = structured_sets(&space, &eps)?;
        reports.push(verify_characterization(&base, &fam, config)?);
        reports.push(verify_continuity(config)?);
    }
    if wants(Suite::Counterexample) {
        reports.push(run_counterexample(&geo_eps, config)?);
    }
    let name = match suite {
        Suite::All => "all",
        Suite::EssSup => "ess-sup",
        Suite::Gauge => "gauge",
        Suite::Sandwich => "sandwich",
        Suite::Characterization => "characterization",
        Suite::Counterexample => "counterexample",
    };
    Ok(SuiteReport {
        schema: SCHEMA_VERSION,
        suite: name.into(),
        passed: reports.iter().all(|r| r.passed),
        config: config.clone(),
        reports,
    })
}

/// Re-runs the single check named by a failure witness on `space`. Returns
/// `true` when the violation is reproduced.
pub fn replay_witness(space: &AtomSpace, w: &Witness) -> Result<bool, L0Error> {
    let set = || L0Set::parse(space, w.field("set")?);
    let rv = |key: &str| w.rv(space, key);
    match w.check.as_str() {
        "L0-convexity" => {
            let (x1, x2, y) = (rv("X1")?, rv("X2")?, rv("Y")?);
            let comb = y.mul(&x1)?.add(&RandomVar::one(space).sub(&y)?.mul(&x2)?)?;
            let k = set()?;
            Ok(k.member(&x1)? && k.member(&x2)? && !k.member(&comb)?)
        }
        "L0-balance" => {
            let k = set()?;
            let (x, y) = (rv("X")?, rv("Y")?);
            Ok(k.member(&x)? && !k.member(&y.mul(&x)?)?)
        }
        "L0-absorbency" => Ok(matches!(is_l0_absorbent(&set()?, &rv("X")?), Err(L0Error::NotAbsorbedHere))),
        "concatenation closure: paste of members is not a member" => {
            let k = set()?;
            let x = rv("X")?;
            Ok(!k.member(&x)? && crate::sets::closure_member(&k, &x)?)
        }
        "sandwich: {p < 1} not inside U" | "{p_U <= 1/2} not inside U" => {
            let k = set()?;
            let x = rv("X")?;
            let bound = if w.check.starts_with("sandwich") { Rational::one() } else { Rational::new(1, 2) };
            let g = symbolic(&k, &x)?;
            let below = if w.check.starts_with("sandwich") { g.all(|v| *v < bound) } else { g.all(|v| *v <= bound) };
            Ok(below && !k.member(&x)?)
        }
        other => Err(L0Error::Parse(format!("no replay for check {other:?}"))),
    }
}
