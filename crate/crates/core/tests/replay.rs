use l0lab::prob_space::AtomSpace;
use l0lab::sets::{is_concat_closed, is_l0_absorbent, is_l0_balanced, is_l0_convex, DegenerateSet};
use l0lab::theorems::{replay_witness, run_suite, Config, Suite};
use l0lab::verdict::Witness;
use l0lab::{L0Error, RandomVar};

const REPLAYABLE: [&str; 6] = [
    "L0-convexity",
    "L0-balance",
    "L0-absorbency",
    "concatenation closure: paste of members is not a member",
    "sandwich: {p < 1} not inside U",
    "{p_U <= 1/2} not inside U",
];

fn failing_witnesses(suite: Suite) -> (AtomSpace, Vec<Witness>) {
    let config = Config::default();
    let report = run_suite(suite, &config).unwrap();
    let space = config.atom_space().unwrap();
    let mut found = Vec::new();
    for r in &report.reports {
        for c in &r.checks {
            if let Some(w) = &c.verdict.witness {
                if !c.verdict.passed {
                    found.push(w.clone());
                }
            }
        }
        found.extend(r.witnesses.iter().cloned());
    }
    found.retain(|w| REPLAYABLE.contains(&w.check.as_str()));
    (space, found)
}

#[test]
fn counterexample_witnesses_replay() {
    let (space, ws) = failing_witnesses(Suite::Counterexample);
    assert!(!ws.is_empty());
    for w in &ws {
        assert!(replay_witness(&space, w).unwrap(), "{w:?}");
    }
}

#[test]
fn sandwich_and_characterization_witnesses_replay() {
    for suite in [Suite::Sandwich, Suite::Characterization] {
        let (space, ws) = failing_witnesses(suite);
        for w in &ws {
            assert!(replay_witness(&space, w).unwrap(), "{w:?}");
        }
    }
}

#[test]
fn degenerate_sets_produce_valid_witnesses() {
    let space = AtomSpace::uniform(3);
    let one = RandomVar::one(&space);
    let two_point = DegenerateSet::two_point(&space);
    let v = is_l0_convex(&two_point, 1, 50).unwrap();
    assert!(!v.passed);
    // degenerate sets have no descriptor, so the witness is checked by hand
    let w = v.witness.as_ref().unwrap();
    let (x1, x2, y) = (w.rv(&space, "X1").unwrap(), w.rv(&space, "X2").unwrap(), w.rv(&space, "Y").unwrap());
    let comb = y.mul(&x1).unwrap().add(&one.sub(&y).unwrap().mul(&x2).unwrap()).unwrap();
    assert!(two_point.member(&x1).unwrap() && two_point.member(&x2).unwrap());
    assert!(!two_point.member(&comb).unwrap());

    let zero = DegenerateSet::zero(&space);
    assert!(is_l0_convex(&zero, 1, 50).unwrap().passed);
    assert!(is_l0_balanced(&zero, 1, 50).unwrap().passed);
    assert!(matches!(is_l0_absorbent(&zero, &one), Err(L0Error::NotAbsorbedHere)));
    assert!(is_concat_closed(&zero, 1, 20).unwrap().passed);
}

#[test]
fn tampered_witnesses_do_not_replay() {
    let (space, ws) = failing_witnesses(Suite::Counterexample);
    let w = ws
        .iter()
        .find(|w| w.check == "sandwich: {p < 1} not inside U")
        .expect("a sandwich certificate")
        .clone();
    let inside = w.clone().with("X", RandomVar::zero(&space));
    assert!(!replay_witness(&space, &inside).unwrap());
    let unknown = Witness::new("something else");
    assert!(replay_witness(&space, &unknown).is_err());
}
