mod common;

use entangle_order::log_oscillation::ModifierEval;
use entangle_order::order::{chain_monotones, quotient, random_chain, random_preorder, verify_monotone_laws};
use entangle_order::slocc::{
    locc_convertible, max_conversion_probability, ratio_trend, ratio_trend_pair, slocc_convertible_finite, table_row_a,
    Schedule, Verdict, TAU_MAJ,
};
use entangle_order::spectra::{
    spectrum_from_tail, tail_sums, validate_tail, Generator, IndexRange, SchmidtSpectrum, TailSequence, TAU_ROUND,
};
use entangle_order::Exec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{coarsened, majorized_by, spectrum};

fn lambdas(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, 1..=max_dim).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tail_round_trip(l in lambdas(16)) {
        let s = spectrum(&l);
        let back = spectrum_from_tail(&tail_sums(&s), l.len(), false).unwrap();
        prop_assert_eq!(back.len(), l.len());
        for (a, b) in back.lambdas().iter().zip(&l) {
            prop_assert!((a - b).abs() <= TAU_ROUND);
        }
    }

    #[test]
    fn tail_of_a_spectrum_is_valid(l in lambdas(16)) {
        let g = tail_sums(&spectrum(&l));
        let rep = validate_tail(&g, &IndexRange::upto(20));
        prop_assert!(rep.is_valid(), "{:?}", rep);
    }

    #[test]
    fn log_tail_matches_naive_sum(l in lambdas(16)) {
        let g = tail_sums(&spectrum(&l));
        for n in 0..l.len() {
            let naive: f64 = l[n..].iter().rev().sum();
            let got = g.log_at(n as u64).exp();
            prop_assert!(((got - naive) / naive).abs() <= 1e-12);
        }
        prop_assert_eq!(g.log_at(l.len() as u64), f64::NEG_INFINITY);
    }

    #[test]
    fn locc_is_a_preorder(a in lambdas(8), b in lambdas(8), c in lambdas(8)) {
        let (sa, sb, sc) = (spectrum(&a), spectrum(&b), spectrum(&c));
        prop_assert!(locc_convertible(&sa, &sa));
        if locc_convertible(&sa, &sb) && locc_convertible(&sb, &sc) {
            prop_assert!(locc_convertible(&sa, &sc));
        }
    }

    #[test]
    fn coarse_graining_is_reachable(a in lambdas(10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = coarsened(&mut rng, &a);
        prop_assert!(locc_convertible(&spectrum(&a), &spectrum(&b)));
    }

    #[test]
    fn criteria_are_consistent(a in lambdas(10), b in lambdas(10)) {
        let (psi, phi) = (spectrum(&a), spectrum(&b));
        let l = locc_convertible(&psi, &phi);
        prop_assert_eq!(l, majorized_by(&a, &b, TAU_MAJ));
        if l {
            prop_assert!(slocc_convertible_finite(&psi, &phi));
        }
        let p = max_conversion_probability(&psi, &phi);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p == 1.0, l);
        let v = ratio_trend(&tail_sums(&psi), &tail_sums(&phi), &Schedule::default()).unwrap().verdict;
        prop_assert_eq!(v == Verdict::Convertible, slocc_convertible_finite(&psi, &phi));
    }

    #[test]
    fn row_a_is_ordered(l in lambdas(10)) {
        let s = spectrum(&l);
        let (lo, hi) = table_row_a(&s);
        prop_assert!(lo <= hi);
        let flat = SchmidtSpectrum::maximally_entangled(hi);
        let equivalent = locc_convertible(&s, &flat) && locc_convertible(&flat, &s);
        prop_assert_eq!(lo == hi, equivalent);
    }

    #[test]
    fn monotone_laws_hold(seed in any::<u64>(), len in 1usize..=8, density in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_preorder(len, density, &mut rng);
        prop_assert!(quotient(&p).poset.is_antisymmetric());
        let c = random_chain(&p, false, &mut rng);
        let v = chain_monotones(&p, &c);
        for (&m, &r) in c.members.iter().zip(&c.params) {
            prop_assert_eq!((v.r_minus[m], v.r_plus[m]), (r, r));
        }
        let rep = verify_monotone_laws(&p, &c, 20, &mut rng);
        prop_assert!(rep.holds(), "{:?}", rep.violations);
    }

    #[test]
    fn modifier_identities(log_x in 1.0f64..40.0, r in 0.5f64..3.0) {
        let e = ModifierEval::at_log(log_x, r);
        prop_assert_eq!(e.m, e.p - e.p_prime);
        prop_assert_eq!(e.c, e.p - 2.0 * e.p_prime + e.p_double_prime);
    }

    #[test]
    fn exponential_ratio_verdicts(a in 0.2f64..3.0, b in 0.2f64..3.0) {
        prop_assume!((a - b).abs() > 0.05);
        let ga = TailSequence::generated(Generator::Exponential { rate: a });
        let gb = TailSequence::generated(Generator::Exponential { rate: b });
        // monotone ratios need only a sparse sample
        let s = Schedule { samples_per_unit: 0.05, ..Schedule::default() };
        let (fwd, bwd) = ratio_trend_pair(&ga, &gb, &s).unwrap();
        let (slow, fast) = if a < b { (&fwd, &bwd) } else { (&bwd, &fwd) };
        prop_assert_eq!(slow.verdict, Verdict::Convertible);
        prop_assert_eq!(fast.verdict, Verdict::NotConvertible);
        prop_assert!(fwd.windows.windows(2).all(|w| w[0].log1p_lo < w[1].log1p_lo && w[0].n_lo <= w[1].n_lo));
    }
}

#[test]
fn trend_reports_do_not_depend_on_strategy() {
    let a = TailSequence::generated(Generator::LogOscillation { q: 0.5, r: 1.3, shift: 3.0 });
    let b = TailSequence::generated(Generator::Squeezed { q: 0.5 });
    let run = |exec| {
        let s = Schedule { exec, ..Schedule::with_decades(4) };
        serde_json::to_string(&ratio_trend_pair(&a, &b, &s).unwrap()).unwrap()
    };
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
}
