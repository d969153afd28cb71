use entangle_order::family::{estimate_r, validate_family, FamilyKind, TailFamily, ValidationPlan};
use entangle_order::log_oscillation::{
    find_shift, reproduce_incomparability, xi_r_tail, LogOscillationFamily, ReproduceConfig,
};
use entangle_order::order::{chain_monotones, transitive_closure, Chain};
use entangle_order::slocc::{certify_incomparable, ratio_trend, Schedule, Verdict};
use entangle_order::spectra::{validate_tail, Generator, IndexRange, TailSequence};

fn default_family() -> LogOscillationFamily {
    LogOscillationFamily::new(0.5, 1.0, 2.0).unwrap()
}

#[test]
fn element_above_the_chain_takes_the_top_value() {
    let labels = ["x1", "x2", "x3", "psi"].iter().map(|s| s.to_string()).collect();
    let p = transitive_closure(labels, &[(3, 2), (2, 1), (1, 0)]).unwrap();
    let c = Chain::new(&p, vec![0, 1, 2], vec![1.0, 2.0, 3.0]).unwrap();
    let v = chain_monotones(&p, &c);
    assert_eq!((v.r_minus[3], v.r_plus[3]), (3.0, 3.0));
    for (i, r) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        assert_eq!((v.r_minus[i], v.r_plus[i]), (r, r));
    }
}

#[test]
fn squeezed_state_does_not_reach_family_members() {
    let fam = default_family();
    let psi = TailSequence::generated(fam.squeezed());
    for r in [1.0, 1.5, 2.0] {
        let xi = TailSequence::generated(fam.member(r));
        let rep = ratio_trend(&psi, &xi, &Schedule::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotConvertible, "r = {r}");
        let mins = rep.minima();
        assert!(mins.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn one_way_pairs_are_not_certified() {
    let fast = TailSequence::generated(Generator::Exponential { rate: 2.0 });
    let slow = TailSequence::generated(Generator::Exponential { rate: 1.0 });
    let s = Schedule::default();
    assert!(!certify_incomparable(&fast, &slow, &s).unwrap().is_certified());
    assert!(!certify_incomparable(&fast, &fast, &s).unwrap().is_certified());
}

#[test]
fn family_members_are_valid_tails() {
    let fam = default_family();
    let range = IndexRange::geometric(1_000_000, 64);
    for r in [1.0, 1.25, 1.5, 1.75, 2.0] {
        let rep = validate_tail(&TailSequence::generated(fam.member(r)), &range);
        assert!(rep.is_valid(), "r = {r}: {rep:?}");
        assert_eq!(xi_r_tail(&fam, r, 0), 0.0);
    }
}

#[test]
fn default_family_satisfies_the_three_conditions() {
    let fam = default_family();
    let f = fam.as_tail_family(5);
    assert_eq!(f.grid, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    let v = validate_family(&f, &Schedule::default(), &ValidationPlan::default()).unwrap();
    assert!(v.condition_i && v.condition_ii && v.condition_iii, "{:?}", v.pairs);
}

#[test]
fn exponential_family_is_ordered_by_r() {
    let f = TailFamily::new(FamilyKind::Exponential, 1.0, 2.0, 5).unwrap();
    let v = validate_family(&f, &Schedule::default(), &ValidationPlan::default()).unwrap();
    assert!(v.passed());
    for p in &v.pairs {
        let want = if p.r_a > p.r_b { Verdict::Convertible } else { Verdict::NotConvertible };
        assert_eq!(p.verdict, want, "{p:?}");
    }
}

#[test]
fn member_of_a_family_is_located() {
    let f = TailFamily::new(FamilyKind::Exponential, 1.0, 2.0, 9).unwrap();
    let psi = f.member_tail(1.375).unwrap();
    let e = estimate_r(&f, &psi, &Schedule::default(), 3).unwrap();
    let step = f.grid[1] - f.grid[0];
    assert!((e.r_minus_hat - 1.375).abs() <= step);
    assert!((e.r_plus_hat - 1.375).abs() <= step);
}

#[test]
fn wider_interval_needs_at_least_the_same_shift() {
    let narrow = find_shift(1.0, 2.0, 1e6).unwrap();
    let wide = find_shift(1.0, 3.0, 1e6).unwrap();
    assert!(wide >= narrow);
}

#[test]
fn short_horizon_is_inconclusive() {
    let cfg = ReproduceConfig {
        horizon_decades: 3,
        ..ReproduceConfig::default()
    };
    let rep = reproduce_incomparability(&cfg).unwrap();
    assert!(!rep.reproduced);
    assert!(rep.members.iter().all(|m| !m.certification.is_certified()));
    for m in &rep.members {
        let (f, b) = m.certification.reports();
        assert_eq!(f.verdict, Verdict::Inconclusive);
        assert_eq!(b.verdict, Verdict::Inconclusive);
    }
}

#[test]
fn degenerate_interval_collapses() {
    let cfg = ReproduceConfig {
        r_lo: 1.5,
        r_hi: 1.5,
        ..ReproduceConfig::default()
    };
    let rep = reproduce_incomparability(&cfg).unwrap();
    assert_eq!(rep.members.len(), 1);
    assert_eq!((rep.estimate.r_minus_hat, rep.estimate.r_plus_hat), (1.5, 1.5));
    assert!(rep.reproduced);
}
