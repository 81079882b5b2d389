use proptest::prelude::*;

use l0lab::l0::{concatenate, ess_sup_finite, geq, RandomVar};
use l0lab::prob_space::{AtomSpace, Event, Partition};
use l0lab::rational::{ExtRational, Rational};
use l0lab::seminorms::{Ball, Seminorm};
use l0lab::sets::{gauge, GaugeEngine, L0Set};

const N: usize = 16;

fn geo() -> AtomSpace {
    AtomSpace::geometric(N)
}

fn rational() -> impl Strategy<Value = Rational> + Clone {
    (-40i64..=40, 1i64..=8).prop_map(|(n, d)| Rational::new(n, d))
}

fn positive() -> impl Strategy<Value = Rational> + Clone {
    (1i64..=40, 1i64..=8).prop_map(|(n, d)| Rational::new(n, d))
}

fn rv_from(values: impl Strategy<Value = Rational> + Clone) -> impl Strategy<Value = RandomVar> {
    (prop::collection::vec(values.clone(), 0..8), values)
        .prop_map(|(head, tail)| RandomVar::eventually(&geo(), head, tail).unwrap())
}

fn rv() -> impl Strategy<Value = RandomVar> {
    rv_from(rational())
}

fn event() -> impl Strategy<Value = Event> {
    (prop::collection::btree_set(1usize..=10, 0..5), any::<bool>()).prop_map(|(atoms, co)| {
        if co {
            Event::Cofinite(atoms)
        } else {
            Event::FiniteSet(atoms)
        }
    })
}

/// Atoms that cover every explicit entry plus one tail atom.
fn window(xs: &[&RandomVar]) -> usize {
    xs.iter().map(|x| x.explicit_len()).max().unwrap_or(0) + 12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_laws(x in rv(), y in rv(), z in rv()) {
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        prop_assert!(x.sub(&x).unwrap().is_zero());
        for a in 1..=window(&[&x, &y]) {
            prop_assert_eq!(x.mul(&y).unwrap().value_at(a).clone(), x.value_at(a) * y.value_at(a));
        }
    }

    #[test]
    fn representation_is_canonical(head in prop::collection::vec(rational(), 0..6), tail in rational(), pad in 0usize..5) {
        let mut padded = head.clone();
        padded.extend(std::iter::repeat_n(tail.clone(), pad));
        let a = RandomVar::eventually(&geo(), head, tail.clone()).unwrap();
        let b = RandomVar::eventually(&geo(), padded, tail).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(RandomVar::parse(&geo(), &a.to_string()).unwrap(), a);
    }

    #[test]
    fn lattice_order(x in rv(), y in rv()) {
        let hi = x.max(&y).unwrap();
        let lo = x.min(&y).unwrap();
        prop_assert!(geq(&hi, &x).unwrap() && geq(&hi, &y).unwrap());
        prop_assert!(geq(&x, &lo).unwrap() && geq(&y, &lo).unwrap());
        prop_assert_eq!(hi.add(&lo).unwrap(), x.add(&y).unwrap());
        if geq(&x, &y).unwrap() && geq(&y, &x).unwrap() {
            prop_assert_eq!(&x, &y);
        }
    }

    #[test]
    fn finite_ess_sup_is_pointwise_max(family in prop::collection::vec(rv(), 1..6)) {
        let s = ess_sup_finite(&geo(), &family).unwrap();
        let refs: Vec<&RandomVar> = family.iter().collect();
        for a in 1..=window(&refs) {
            let best = family.iter().map(|x| x.value_at(a).clone()).max().unwrap();
            prop_assert_eq!(s.value_at(a).clone(), ExtRational::Finite(best));
        }
    }

    #[test]
    fn pasting_takes_each_atom_from_its_part(
        cut in prop::collection::btree_set(1usize..=10, 0..6),
        x in rv(),
        y in rv(),
    ) {
        let first = Event::FiniteSet(cut.clone());
        let rest = first.complement();
        let p = Partition::from_events(&geo(), vec![first, rest]).unwrap();
        let paste = concatenate(&p, &[x.clone(), y.clone()]).unwrap();
        for a in 1..=window(&[&x, &y]) {
            let want = if cut.contains(&a) { x.value_at(a) } else { y.value_at(a) };
            prop_assert_eq!(paste.value_at(a), want);
        }
    }

    #[test]
    fn ball_gauge_laws(x in rv(), y in rv(), c in rv(), eps in rv_from(positive()), a in event()) {
        let k = L0Set::Ball(Ball::abs(eps.clone()).unwrap());
        let g = |v: &RandomVar| gauge(&k, v, &GaugeEngine::Symbolic).unwrap().value;
        let zero = ExtRational::zero();
        prop_assert_eq!(
            g(&x.restrict(&a).unwrap()).restrict_with(&a, zero.clone()).unwrap(),
            g(&x).restrict_with(&a, zero).unwrap()
        );
        prop_assert!(geq(&g(&x).add(&g(&y)).unwrap(), &g(&x.add(&y).unwrap())).unwrap());
        prop_assert_eq!(g(&c.mul(&x).unwrap()), c.abs().to_ext().mul(&g(&x)).unwrap());
        // membership agrees with the gauge on closed balls
        let inside = g(&x).all(|v| *v <= Rational::one());
        prop_assert_eq!(k.member(&x).unwrap(), inside);
    }

    #[test]
    fn counterexample_membership(x in rv(), eps in rv_from(positive())) {
        let u = L0Set::counterexample(eps.clone()).unwrap();
        let far = window(&[&x, &eps]);
        let oracle = x.value_at(far).abs() <= *eps.value_at(far);
        prop_assert_eq!(u.member(&x).unwrap(), oracle);
        // any change on finitely many atoms keeps the answer
        let bump = RandomVar::indicator(&geo(), &Event::atoms([1, 3])).unwrap().scale(&Rational::from_int(1000));
        prop_assert_eq!(u.member(&x.add(&bump).unwrap()).unwrap(), oracle);
    }

    #[test]
    fn weighted_ball_membership_scales(x in rv(), w in rv_from(positive()), eps in rv_from(positive()), c in positive()) {
        let q = vec![Seminorm::AbsValue, Seminorm::weighted(w).unwrap()];
        let b = Ball::new(q.clone(), eps.clone()).unwrap();
        let scaled = Ball::new(q, eps.scale(&c)).unwrap();
        prop_assert_eq!(b.contains(&x).unwrap(), scaled.contains(&x.scale(&c)).unwrap());
    }

    #[test]
    fn set_descriptors_round_trip(eps in rv_from(positive()), r in rv_from(positive())) {
        for k in [
            L0Set::Ball(Ball::abs(eps.clone()).unwrap()),
            L0Set::counterexample(eps).unwrap(),
            L0Set::atom_decomposable(r).unwrap(),
        ] {
            prop_assert_eq!(L0Set::parse(&geo(), &k.to_string()).unwrap(), k);
        }
    }
}
