//! Windowed evidence for the asymptotic tail-ratio criterion.
//!
//! SLOCC convertibility of infinite-rank states turns on whether
//! `g_ψ(n)/g_φ(n)` stays bounded away from zero as `n → ∞`. That cannot be
//! decided from finitely many samples, so the ratio is summarized per window
//! and the sequence of window extremes is classified into a three-valued
//! verdict.
//!
//! Windows are decades of `ℓ = ln(1 + n)`: `[0, 10]`, `(10, 100]`, …,
//! `(10^{D-1}, 10^D]`. Ratios that oscillate in `ln n` (as the log-oscillating
//! family does) complete many periods inside every such window, while plain
//! exponential or power-law ratios change monotonically across them.

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::numeric::ext_f64;
use crate::spectra::{Generator, IndexPoint};

/// Window extremes must shrink by at least this factor per decade.
pub const RHO_TREND: f64 = 2.0;
/// Number of consecutive final decades the rule must hold over.
pub const TREND_WINDOWS: usize = 4;
/// A decaying minimum must end below this ratio.
pub const SMALL_RATIO: f64 = 1e-3;
/// Bounded minima may not fall by more than this fraction across the final windows.
pub const STABLE_FRACTION: f64 = 0.10;

pub const DEFAULT_HORIZON_DECADES: u32 = 5;
/// Samples per unit of `ln(1+n)`; 12 gives about 75 per `2π` oscillation.
pub const DEFAULT_SAMPLES_PER_UNIT: f64 = 12.0;
/// Every index up to this one is sampled in the first window.
const DENSE_PREFIX: u64 = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    /// Number of decade windows; the last ends at `ln(1+n) = 10^decades`.
    pub decades: u32,
    pub samples_per_unit: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            decades: DEFAULT_HORIZON_DECADES,
            samples_per_unit: DEFAULT_SAMPLES_PER_UNIT,
            exec: Exec::default(),
        }
    }
}

impl Schedule {
    pub fn with_decades(decades: u32) -> Self {
        Self {
            decades,
            ..Self::default()
        }
    }

    /// `ln(1+n)` bounds of window `k`.
    pub fn window_bounds(&self, k: u32) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { 10f64.powi(k as i32) };
        (lo, 10f64.powi(k as i32 + 1))
    }

    pub fn max_log1p(&self) -> f64 {
        10f64.powi(self.decades as i32)
    }

    /// Window index of `ln(1+n) = ell`.
    pub fn window_of(&self, ell: f64) -> Option<u32> {
        if !(ell >= 0.0) || ell > self.max_log1p() {
            return None;
        }
        if ell <= 10.0 {
            return Some(0);
        }
        let mut k = ell.log10().ceil() as i64 - 1;
        // guard against log10 rounding at exact powers of ten
        while k > 0 && ell <= 10f64.powi(k as i32) {
            k -= 1;
        }
        while ell > 10f64.powi(k as i32 + 1) {
            k += 1;
        }
        u32::try_from(k).ok().filter(|&k| k < self.decades)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convertible,
    NotConvertible,
    Inconclusive,
}

/// Extremes of `ln(g_ψ/g_φ)` over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendWindow {
    pub decade: u32,
    #[serde(with = "ext_f64")]
    pub n_lo: f64,
    #[serde(with = "ext_f64")]
    pub n_hi: f64,
    pub log1p_lo: f64,
    pub log1p_hi: f64,
    pub samples: usize,
    #[serde(with = "ext_f64")]
    pub window_min_log_ratio: f64,
    #[serde(with = "ext_f64")]
    pub window_max_log_ratio: f64,
}

impl TrendWindow {
    /// The same window seen from the reverse ratio.
    pub fn reversed(&self) -> Self {
        Self {
            window_min_log_ratio: -self.window_max_log_ratio,
            window_max_log_ratio: -self.window_min_log_ratio,
            ..self.clone()
        }
    }
}

/// Outcome of the minima rules on a sequence of window minima (log ratios).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaClass {
    pub verdict: Verdict,
    /// The last [`TREND_WINDOWS`] minima strictly decrease, whether or not
    /// fast enough for a `NotConvertible` verdict.
    pub decaying: bool,
}

/// Classify a sequence of window minima of `ln(ratio)`.
///
/// - `NotConvertible` when each of the last [`TREND_WINDOWS`] minima is at
///   most `1/RHO_TREND` times its predecessor and the last is below
///   [`SMALL_RATIO`];
/// - `Convertible` when none of the last [`TREND_WINDOWS`] minima falls more
///   than [`STABLE_FRACTION`] below the first of them (bounded below; growth
///   is allowed);
/// - `Inconclusive` otherwise, including too few windows.
pub fn classify_minima(minima: &[f64]) -> MinimaClass {
    let w = TREND_WINDOWS;
    let k = minima.len();
    if k < w || minima.iter().any(|m| m.is_nan()) {
        return MinimaClass {
            verdict: Verdict::Inconclusive,
            decaying: false,
        };
    }
    let halving = RHO_TREND.ln();
    let has_transitions = k > w;
    let tail_pairs = || minima[k - w - 1..].windows(2);

    let decaying = has_transitions
        && tail_pairs().all(|p| p[1] < p[0] || (p[1] == f64::NEG_INFINITY && p[0] == f64::NEG_INFINITY));
    let shrinking = has_transitions
        && tail_pairs().all(|p| p[1] == f64::NEG_INFINITY || p[1] <= p[0] - halving)
        && minima[k - 1] < SMALL_RATIO.ln();
    if shrinking {
        return MinimaClass {
            verdict: Verdict::NotConvertible,
            decaying: true,
        };
    }

    let last = &minima[k - w..];
    let floor = last[0] + (1.0 - STABLE_FRACTION).ln();
    let bounded = last[0] > f64::NEG_INFINITY && last.iter().all(|&m| m >= floor);
    MinimaClass {
        verdict: if bounded { Verdict::Convertible } else { Verdict::Inconclusive },
        decaying: decaying && !bounded,
    }
}

/// `ln(g_a(n)/g_b(n))` for two generators, with shared exponential rates
/// cancelled exactly.
pub fn generator_log_ratio(a: &Generator, b: &Generator, at: IndexPoint) -> f64 {
    if at.n() == 0.0 {
        return a.log_envelope(at) - b.log_envelope(at);
    }
    let rate_gap = a.decay_rate() - b.decay_rate();
    let linear = if rate_gap == 0.0 { 0.0 } else { -rate_gap * at.n() };
    linear + (a.log_envelope(at) - b.log_envelope(at))
}

/// Sample both generators over every window of the schedule.
pub(crate) fn sampled_windows(a: &Generator, b: &Generator, schedule: &Schedule) -> Vec<TrendWindow> {
    (0..schedule.decades)
        .map(|k| {
            let (lo, hi) = schedule.window_bounds(k);
            let count = (((hi - lo) * schedule.samples_per_unit).ceil() as usize).max(1);
            let mut extra: Vec<IndexPoint> = a.critical_points(lo, hi);
            extra.extend(b.critical_points(lo, hi));
            if k == 0 {
                let last = hi.exp_m1().min(DENSE_PREFIX as f64) as u64;
                extra.extend((0..=last).map(IndexPoint::at));
            }
            let uniform = count + 1;
            let point = |i: usize| {
                if i < uniform {
                    IndexPoint::from_log1p(lo + (hi - lo) * i as f64 / count as f64)
                } else {
                    extra[i - uniform]
                }
            };
            let (min, max) = schedule.exec.fold_range(
                uniform + extra.len(),
                (f64::INFINITY, f64::NEG_INFINITY),
                |i| {
                    let v = generator_log_ratio(a, b, point(i));
                    (v, v)
                },
                |x, y| (nan_min(x.0, y.0), nan_max(x.1, y.1)),
            );
            let n_at = |ell: f64| IndexPoint::from_log1p(ell).n();
            TrendWindow {
                decade: k,
                n_lo: n_at(lo),
                n_hi: n_at(hi),
                log1p_lo: lo,
                log1p_hi: hi,
                samples: uniform + extra.len(),
                window_min_log_ratio: min,
                window_max_log_ratio: max,
            }
        })
        .collect()
}

// NaN-propagating min/max so a bad evaluation cannot hide inside a window.
fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
