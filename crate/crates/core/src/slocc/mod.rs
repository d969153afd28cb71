//! Single-copy convertibility criteria.
//!
//! - LOCC, finite rank: majorization of Schmidt spectra.
//! - SLOCC, finite rank: Schmidt rank may not increase.
//! - SLOCC, any rank: `ψ → φ` with nonzero probability iff
//!   `inf_n g_ψ(n)/g_φ(n) > 0`. For infinite-rank tails this is answered with
//!   windowed trend evidence, see [`trend`].

pub mod trend;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{schmidt_rank, tail_sums, SchmidtSpectrum, TailSequence};

pub use trend::{
    classify_minima, generator_log_ratio, MinimaClass, Schedule, TrendWindow, Verdict, DEFAULT_HORIZON_DECADES,
    DEFAULT_SAMPLES_PER_UNIT, RHO_TREND, SMALL_RATIO, STABLE_FRACTION, TREND_WINDOWS,
};

/// Absolute tolerance on partial-sum comparisons; ties count as satisfied.
pub const TAU_MAJ: f64 = 1e-12;

fn tail_values(s: &SchmidtSpectrum) -> Vec<f64> {
    match tail_sums(s) {
        TailSequence::Finite { log_g } => log_g.into_iter().map(f64::exp).collect(),
        TailSequence::Generated { .. } => unreachable!("tail_sums of a spectrum is finite"),
    }
}

/// Deterministic conversion `ψ → φ`: every tail of ψ dominates the matching
/// tail of φ, `g_ψ(k) ≥ g_φ(k)` for all k.
pub fn locc_convertible(psi: &SchmidtSpectrum, phi: &SchmidtSpectrum) -> bool {
    let gp = tail_values(psi);
    let gf = tail_values(phi);
    let len = gp.len().max(gf.len());
    (0..len).all(|k| {
        let a = gp.get(k).copied().unwrap_or(0.0);
        let b = gf.get(k).copied().unwrap_or(0.0);
        a >= b - TAU_MAJ
    })
}

/// Stochastic conversion between finite-rank states.
pub fn slocc_convertible_finite(psi: &SchmidtSpectrum, phi: &SchmidtSpectrum) -> bool {
    schmidt_rank(psi) >= schmidt_rank(phi)
}

/// Largest success probability of `ψ → φ`, `min_n g_ψ(n)/g_φ(n)` clipped to
/// `[0, 1]`. Indices where `g_ψ(n) ≥ g_φ(n)` within [`TAU_MAJ`] contribute 1,
/// so the result is exactly one iff [`locc_convertible`] holds.
pub fn max_conversion_probability(psi: &SchmidtSpectrum, phi: &SchmidtSpectrum) -> f64 {
    if schmidt_rank(psi) < schmidt_rank(phi) {
        return 0.0;
    }
    let gp = tail_values(psi);
    let gf = tail_values(phi);
    gf.iter()
        .enumerate()
        .map(|(n, &b)| {
            let a = gp[n];
            if a >= b - TAU_MAJ {
                1.0
            } else {
                a / b
            }
        })
        .fold(1.0, f64::min)
}

/// [`max_conversion_probability`] for tails, minimizing over `n < cutoff`
/// (and over the support of φ for finite tails).
pub fn max_conversion_probability_tails(psi: &TailSequence, phi: &TailSequence, cutoff: u64) -> f64 {
    let end = phi.rank().map_or(cutoff, |r| (r as u64).min(cutoff));
    (0..end)
        .map(|n| {
            let lb = phi.log_at(n);
            let la = psi.log_at(n);
            if lb == f64::NEG_INFINITY {
                1.0
            } else {
                (la - lb).exp().min(1.0)
            }
        })
        .fold(1.0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `ψ → φ`, ratio `g_ψ/g_φ`.
    PsiToPhi,
    /// `φ → ψ`, ratio `g_φ/g_ψ`.
    PhiToPsi,
}

/// Evidence for or against `g_ψ(n)/g_φ(n) ≥ ε > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub direction: Direction,
    /// True for finite tails, where the infimum is computed exactly.
    pub exact: bool,
    pub windows: Vec<TrendWindow>,
    pub verdict: Verdict,
    pub decaying: bool,
}

impl TrendReport {
    pub fn minima(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.window_min_log_ratio).collect()
    }

    pub fn maxima(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.window_max_log_ratio).collect()
    }

    fn from_windows(direction: Direction, windows: Vec<TrendWindow>) -> Self {
        let minima: Vec<f64> = windows.iter().map(|w| w.window_min_log_ratio).collect();
        let class = classify_minima(&minima);
        Self {
            direction,
            exact: false,
            windows,
            verdict: class.verdict,
            decaying: class.decaying,
        }
    }
}

fn exact_windows(psi: &[f64], phi: &[f64]) -> (Vec<TrendWindow>, bool) {
    let mut windows: Vec<TrendWindow> = Vec::new();
    let mut bounded = true;
    for (n, &lb) in phi.iter().enumerate() {
        let la = psi.get(n).copied().unwrap_or(f64::NEG_INFINITY);
        let v = la - lb;
        if v == f64::NEG_INFINITY {
            bounded = false;
        }
        let ell = (n as f64).ln_1p();
        let decade = if ell <= 10.0 { 0 } else { ell.log10().ceil() as u32 - 1 };
        match windows.last_mut() {
            Some(w) if w.decade == decade => {
                w.n_hi = n as f64;
                w.log1p_hi = ell;
                w.samples += 1;
                w.window_min_log_ratio = w.window_min_log_ratio.min(v);
                w.window_max_log_ratio = w.window_max_log_ratio.max(v);
            }
            _ => windows.push(TrendWindow {
                decade,
                n_lo: n as f64,
                n_hi: n as f64,
                log1p_lo: ell,
                log1p_hi: ell,
                samples: 1,
                window_min_log_ratio: v,
                window_max_log_ratio: v,
            }),
        }
    }
    (windows, bounded)
}

fn finite_report(direction: Direction, psi: &[f64], phi: &[f64]) -> TrendReport {
    let (windows, bounded) = exact_windows(psi, phi);
    TrendReport {
        direction,
        exact: true,
        windows,
        verdict: if bounded { Verdict::Convertible } else { Verdict::NotConvertible },
        decaying: false,
    }
}

fn check_schedule(tails: &[&TailSequence], schedule: &Schedule) -> Result<()> {
    if schedule.decades == 0 || !(schedule.samples_per_unit > 0.0) {
        return Err(Error::Parameter("schedule needs at least one decade and a positive density".into()));
    }
    let requested = schedule.max_log1p();
    for t in tails {
        if let Some(g) = t.generator() {
            g.validate()?;
            let limit = g.max_log_index();
            if requested > limit {
                return Err(Error::ScheduleExceedsValidity { requested, limit });
            }
        }
    }
    Ok(())
}

/// Windowed evidence for `ψ → φ` under SLOCC.
///
/// Both tails must be finite (answered exactly; positions where `g_φ(n) = 0`
/// impose no constraint) or both generated (sampled over `schedule`).
pub fn ratio_trend(g_psi: &TailSequence, g_phi: &TailSequence, schedule: &Schedule) -> Result<TrendReport> {
    Ok(ratio_trend_pair(g_psi, g_phi, schedule)?.0)
}

/// [`ratio_trend`] for `ψ → φ` and `φ → ψ` from one pass over the samples.
pub fn ratio_trend_pair(
    g_psi: &TailSequence,
    g_phi: &TailSequence,
    schedule: &Schedule,
) -> Result<(TrendReport, TrendReport)> {
    match (g_psi, g_phi) {
        (TailSequence::Finite { log_g: a }, TailSequence::Finite { log_g: b }) => Ok((
            finite_report(Direction::PsiToPhi, a, b),
            finite_report(Direction::PhiToPsi, b, a),
        )),
        (TailSequence::Generated { generator: a }, TailSequence::Generated { generator: b }) => {
            check_schedule(&[g_psi, g_phi], schedule)?;
            let forward = trend::sampled_windows(a, b, schedule);
            let backward = forward.iter().map(TrendWindow::reversed).collect();
            Ok((
                TrendReport::from_windows(Direction::PsiToPhi, forward),
                TrendReport::from_windows(Direction::PhiToPsi, backward),
            ))
        }
        _ => Err(Error::Unsupported(
            "tail-ratio trend needs both tails finite or both generated".into(),
        )),
    }
}

/// Two-sided evidence that neither state converts to the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncomparabilityCertificate {
    pub forward: TrendReport,
    pub backward: TrendReport,
    /// Window minima of `ln(g_ψ/g_φ)` and of `ln(g_φ/g_ψ)`, decade by decade.
    #[serde(with = "crate::numeric::ext_f64::vec")]
    pub forward_minima: Vec<f64>,
    #[serde(with = "crate::numeric::ext_f64::vec")]
    pub backward_minima: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification {
    Certified(IncomparabilityCertificate),
    NotCertified { forward: TrendReport, backward: TrendReport },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }

    pub fn reports(&self) -> (&TrendReport, &TrendReport) {
        match self {
            Certification::Certified(c) => (&c.forward, &c.backward),
            Certification::NotCertified { forward, backward } => (forward, backward),
        }
    }
}

/// Run [`ratio_trend`] both ways; certify only when both directions are
/// classified not convertible.
pub fn certify_incomparable(g_psi: &TailSequence, g_phi: &TailSequence, schedule: &Schedule) -> Result<Certification> {
    let (forward, backward) = ratio_trend_pair(g_psi, g_phi, schedule)?;
    if forward.verdict == Verdict::NotConvertible && backward.verdict == Verdict::NotConvertible {
        Ok(Certification::Certified(IncomparabilityCertificate {
            forward_minima: forward.minima(),
            backward_minima: backward.minima(),
            forward,
            backward,
        }))
    } else {
        Ok(Certification::NotCertified { forward, backward })
    }
}

/// Monotone pair of `ψ` against the chain of maximally entangled states
/// under deterministic LOCC, in dimension units: `(⌊1/λ₀⌋, rank)`.
///
/// `ψ → ME_k` iff `λ₀ ≤ 1/k`, and `ME_k → ψ` iff `k ≥ rank(ψ)`.
pub fn table_row_a(psi: &SchmidtSpectrum) -> (usize, usize) {
    let rank = schmidt_rank(psi);
    let lambda0 = psi.log_lambdas()[0].exp();
    let mut k = ((1.0 / lambda0).floor() as usize).clamp(1, rank);
    // majorization ties are satisfied within TAU_MAJ
    while k < rank && lambda0 <= 1.0 / (k + 1) as f64 + TAU_MAJ {
        k += 1;
    }
    while k > 1 && lambda0 > 1.0 / k as f64 + TAU_MAJ {
        k -= 1;
    }
    (k, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Generator;

    fn spec(l: &[f64]) -> SchmidtSpectrum {
        SchmidtSpectrum::new(l).unwrap()
    }

    #[test]
    fn bell_and_product() {
        let bell = spec(&[0.5, 0.5]);
        let prod = SchmidtSpectrum::product();
        assert!(locc_convertible(&bell, &prod));
        assert!(!locc_convertible(&prod, &bell));
        assert_eq!(max_conversion_probability(&bell, &bell), 1.0);
        assert_eq!(max_conversion_probability(&prod, &bell), 0.0);
    }

    #[test]
    fn rank_criterion() {
        let r3 = spec(&[0.5, 0.3, 0.2]);
        let r2 = spec(&[0.9, 0.1]);
        assert!(slocc_convertible_finite(&r3, &r2));
        assert!(!slocc_convertible_finite(&r2, &r3));
    }

    #[test]
    fn conversion_probability_is_the_tail_ratio_minimum() {
        // g_ψ = [1, .4, .1], g_φ = [1, .5, .2]: ratios .8 and .5
        let psi = spec(&[0.6, 0.3, 0.1]);
        let phi = spec(&[0.5, 0.3, 0.2]);
        assert!((max_conversion_probability(&psi, &phi) - 0.5).abs() < 1e-12);
        let p = max_conversion_probability_tails(&tail_sums(&psi), &tail_sums(&phi), 100);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn row_a_examples() {
        for k in 1..=9 {
            assert_eq!(table_row_a(&SchmidtSpectrum::maximally_entangled(k)), (k, k));
        }
        assert_eq!(table_row_a(&spec(&[0.4, 0.3, 0.3])), (2, 3));
        assert_eq!(table_row_a(&spec(&[0.5, 0.25, 0.25])), (2, 3));
        assert_eq!(table_row_a(&spec(&[0.9, 0.05, 0.05])), (1, 3));
    }

    #[test]
    fn finite_trend_matches_rank() {
        let s = Schedule::default();
        let a = tail_sums(&spec(&[0.5, 0.3, 0.2]));
        let b = tail_sums(&spec(&[0.9, 0.1]));
        assert_eq!(ratio_trend(&a, &b, &s).unwrap().verdict, Verdict::Convertible);
        assert_eq!(ratio_trend(&b, &a, &s).unwrap().verdict, Verdict::NotConvertible);
    }

    #[test]
    fn identical_generated_tails_convert() {
        let g = TailSequence::generated(Generator::Squeezed { q: 0.5 });
        let r = ratio_trend(&g, &g, &Schedule::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Convertible);
        assert!(r.windows.iter().all(|w| w.window_min_log_ratio == 0.0 && w.window_max_log_ratio == 0.0));
    }

    #[test]
    fn faster_decay_does_not_convert() {
        let fast = TailSequence::generated(Generator::Exponential { rate: 2.0 });
        let slow = TailSequence::generated(Generator::Exponential { rate: 1.0 });
        let s = Schedule::default();
        let r = ratio_trend(&fast, &slow, &s).unwrap();
        assert_eq!(r.verdict, Verdict::NotConvertible);
        let mins = r.minima();
        assert!(mins.windows(2).all(|p| p[1] <= p[0]));
        assert_eq!(ratio_trend(&slow, &fast, &s).unwrap().verdict, Verdict::Convertible);
        assert!(!certify_incomparable(&fast, &slow, &s).unwrap().is_certified());
        assert!(!certify_incomparable(&slow, &slow, &s).unwrap().is_certified());
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let fin = tail_sums(&spec(&[0.5, 0.5]));
        let gen = TailSequence::generated(Generator::Squeezed { q: 0.5 });
        assert!(matches!(ratio_trend(&fin, &gen, &Schedule::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn schedule_validity_limit() {
        let osc = TailSequence::generated(Generator::LogOscillation { q: 0.5, r: 1.0, shift: 3.0 });
        let sq = TailSequence::generated(Generator::Squeezed { q: 0.5 });
        let err = ratio_trend(&sq, &osc, &Schedule::with_decades(7)).unwrap_err();
        assert!(matches!(err, Error::ScheduleExceedsValidity { .. }));
    }
}
