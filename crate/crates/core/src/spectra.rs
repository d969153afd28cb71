//! Schmidt spectra and tail sequences.
//!
//! A pure bipartite state is characterized by its nonincreasing Schmidt
//! coefficients `λ_i`, or equivalently by the tail function
//! `g(n) = Σ_{i≥n} λ_i`. Tails of infinite-rank states underflow double
//! precision quickly (`q^{2n}` is gone near `n ≈ 500` for `q = 0.5`), so every
//! value here is stored as a natural logarithm and ratios are formed by
//! subtracting logs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log_oscillation;
use crate::numeric::{log1m_exp, log1p_index, log_add_exp};

/// Input normalization tolerance, `|Σλ - 1|`.
pub const TAU_NORM: f64 = 1e-9;
/// Round-trip tolerance between spectra and tails.
pub const TAU_ROUND: f64 = 1e-12;
/// Relative margin required between adjacent tail values for strictness.
pub const STRICT_MARGIN: f64 = 1e-14;
/// Relative slack on the convexity inequality; equality is allowed and
/// log-domain round-off must not turn a tie into a violation.
pub const CONVEX_SLACK: f64 = 1e-12;

/// Largest index for which `n + 2` is still exact in an f64.
const EXACT_INDEX_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52

/// Nonincreasing Schmidt coefficients, stored as `ln λ_i`.
///
/// A spectrum is either *complete* (sums to one within [`TAU_NORM`]) or a
/// *truncated* prefix of an infinite spectrum (sums to at most one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    log_lambdas: Vec<f64>,
    complete: bool,
}

impl SchmidtSpectrum {
    /// Build a complete spectrum from linear coefficients. Trailing zeros are
    /// trimmed.
    pub fn new(lambdas: &[f64]) -> Result<Self> {
        for (i, &l) in lambdas.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidSpectrum(format!(
                    "coefficient {i} is {l}, expected a finite non-negative number"
                )));
            }
        }
        Self::from_log(lambdas.iter().map(|l| l.ln()).collect())
    }

    /// Build a complete spectrum from `ln λ_i`.
    pub fn from_log(log_lambdas: Vec<f64>) -> Result<Self> {
        let s = Self::checked(log_lambdas)?;
        let total = s.log_total().exp();
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::InvalidSpectrum(format!(
                "coefficients sum to {total}, expected 1 within {TAU_NORM:e}"
            )));
        }
        Ok(Self { complete: true, ..s })
    }

    /// Build the leading part of a longer spectrum; the sum may fall short of one.
    pub fn truncated_from_log(log_lambdas: Vec<f64>) -> Result<Self> {
        let s = Self::checked(log_lambdas)?;
        let total = s.log_total().exp();
        if total > 1.0 + TAU_NORM {
            return Err(Error::InvalidSpectrum(format!("coefficients sum to {total} > 1")));
        }
        let complete = (total - 1.0).abs() <= TAU_NORM;
        Ok(Self { complete, ..s })
    }

    fn checked(mut log_lambdas: Vec<f64>) -> Result<Self> {
        while log_lambdas.last() == Some(&f64::NEG_INFINITY) {
            log_lambdas.pop();
        }
        if log_lambdas.is_empty() {
            return Err(Error::InvalidSpectrum("no nonzero coefficients".into()));
        }
        for (i, &l) in log_lambdas.iter().enumerate() {
            if l.is_nan() || l == f64::NEG_INFINITY {
                return Err(Error::InvalidSpectrum(format!(
                    "coefficient {i} is zero or undefined before the last nonzero entry"
                )));
            }
            if l > TAU_NORM {
                return Err(Error::InvalidSpectrum(format!("coefficient {i} exceeds 1")));
            }
        }
        if let Some(i) = log_lambdas.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidSpectrum(format!(
                "coefficients increase between index {i} and {}",
                i + 1
            )));
        }
        Ok(Self { log_lambdas, complete: false })
    }

    /// Maximally entangled state of Schmidt rank `k`.
    pub fn maximally_entangled(k: usize) -> Self {
        assert!(k > 0, "rank must be positive");
        Self {
            log_lambdas: vec![-(k as f64).ln(); k],
            complete: true,
        }
    }

    pub fn product() -> Self {
        Self::maximally_entangled(1)
    }

    pub fn log_lambdas(&self) -> &[f64] {
        &self.log_lambdas
    }

    /// Linear coefficients; entries below the f64 range come back as zero.
    pub fn lambdas(&self) -> Vec<f64> {
        self.log_lambdas.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log_lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_lambdas.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn log_total(&self) -> f64 {
        self.log_lambdas
            .iter()
            .rev()
            .fold(f64::NEG_INFINITY, |acc, &l| log_add_exp(acc, l))
    }
}

/// Number of strictly positive coefficients.
pub fn schmidt_rank(s: &SchmidtSpectrum) -> usize {
    s.len()
}

/// Entanglement entropy `-Σ λ log₂ λ`, in bits.
pub fn entropy(s: &SchmidtSpectrum) -> f64 {
    let nats: f64 = s
        .log_lambdas
        .iter()
        .map(|&l| {
            let lambda = l.exp();
            if lambda == 0.0 {
                0.0
            } else {
                -lambda * l
            }
        })
        .sum();
    nats / std::f64::consts::LN_2
}

/// Leading `count` coefficients of the two-mode squeezed state,
/// `λ_n = (1 - q²) q^{2n}`. The result is not renormalized.
pub fn squeezed_state_spectrum(q: f64, count: usize) -> Result<SchmidtSpectrum> {
    check_q(q)?;
    if count == 0 {
        return Err(Error::Parameter("coefficient count must be positive".into()));
    }
    let log_head = (-q * q).ln_1p();
    let log_q2 = 2.0 * q.ln();
    let logs = (0..count).map(|n| log_head + n as f64 * log_q2).collect();
    SchmidtSpectrum::truncated_from_log(logs)
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("squeezing parameter q = {q} must lie in (0, 1)")))
    }
}

/// A sample position `n`, carried together with `ln n` so that indices far
/// beyond the f64 range (`n = e^{10^4}`) can still be addressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPoint {
    n: f64,
    ln_n: f64,
}

impl IndexPoint {
    pub fn at(n: u64) -> Self {
        let n = n as f64;
        Self { n, ln_n: n.ln() }
    }

    /// The point with `ln n = ln_n`, rounded to the nearest integer where
    /// integers are representable.
    pub fn from_ln(ln_n: f64) -> Self {
        let n = ln_n.exp();
        if n < EXACT_INDEX_LIMIT {
            let rounded = n.round();
            Self { n: rounded, ln_n: rounded.ln() }
        } else {
            Self { n, ln_n }
        }
    }

    /// The point with `ln(1 + n) = ell`.
    pub fn from_log1p(ell: f64) -> Self {
        if ell < 36.0 {
            let n = ell.exp_m1();
            if n < EXACT_INDEX_LIMIT {
                return Self::at(n.round() as u64);
            }
        }
        // ln n = ell + ln(1 - e^{-ell})
        Self::from_ln(ell + (-(-ell).exp()).ln_1p())
    }

    /// `n`, possibly `+inf` when it exceeds the f64 range.
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn ln_n(&self) -> f64 {
        self.ln_n
    }

    /// `ln(1 + n)`, the coordinate the trend windows are laid out in.
    pub fn log1p(&self) -> f64 {
        log1p_index(self.n, self.ln_n)
    }

    /// The integer index, when it is small enough to be exact.
    pub fn as_u64(&self) -> Option<u64> {
        (self.n < EXACT_INDEX_LIMIT).then_some(self.n as u64)
    }

    /// `n + k`, when still exact.
    pub fn offset(&self, k: u64) -> Option<Self> {
        self.as_u64().map(|n| Self::at(n + k))
    }
}

/// Closed-form tail generators for infinite-rank states.
///
/// Every generator has the shape `ln g(n) = -rate·n + envelope(n)` with a
/// sub-exponential envelope. Ratios between generators subtract the two
/// parts separately, so a shared exponential rate cancels exactly even when
/// `rate·n` itself is far beyond the f64 range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Two-mode squeezed state, `g(n) = q^{2n}`.
    Squeezed { q: f64 },
    /// `g(n) = e^{-rate·n}`.
    Exponential { rate: f64 },
    /// `g(n) = e^{-rate·n} (1 + n)^{-exponent}`.
    PowerLaw { rate: f64, exponent: f64 },
    /// `g(n) ∝ p_r(Δ·n + shift) q^{2n}` with `Δ = -ln q²`; see
    /// [`crate::log_oscillation`].
    #[serde(alias = "paper_log_oscillation")]
    LogOscillation { q: f64, r: f64, shift: f64 },
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Generator::Squeezed { q } => check_q(q),
            Generator::Exponential { rate } => check_positive("rate", rate),
            Generator::PowerLaw { rate, exponent } => {
                let ok = rate.is_finite()
                    && exponent.is_finite()
                    && rate >= 0.0
                    && exponent >= 0.0
                    && (rate > 0.0 || exponent > 0.0);
                if ok {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "power law needs rate >= 0 and exponent >= 0, not both zero (got {rate}, {exponent})"
                    )))
                }
            }
            Generator::LogOscillation { q, r, shift } => {
                check_q(q)?;
                check_positive("r", r)?;
                if shift.is_finite() && shift > 1.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("shift {shift} must exceed 1")))
                }
            }
        }
    }

    /// Exponential decay rate per index.
    pub fn decay_rate(&self) -> f64 {
        match *self {
            Generator::Squeezed { q } | Generator::LogOscillation { q, .. } => -2.0 * q.ln(),
            Generator::Exponential { rate } | Generator::PowerLaw { rate, .. } => rate,
        }
    }

    /// Sub-exponential part of `ln g(n)`; zero at `n = 0`.
    pub fn log_envelope(&self, at: IndexPoint) -> f64 {
        match *self {
            Generator::Squeezed { .. } | Generator::Exponential { .. } => 0.0,
            Generator::PowerLaw { exponent, .. } => {
                if exponent == 0.0 {
                    0.0
                } else {
                    -exponent * at.log1p()
                }
            }
            Generator::LogOscillation { q, r, shift } => {
                let step = -2.0 * q.ln();
                let log_x = log_oscillation::log_argument(step, shift, at);
                log_oscillation::ln_p_at_log(log_x, r) - log_oscillation::ln_p_at_log(shift.ln(), r)
            }
        }
    }

    /// `ln g(n)`.
    pub fn log_tail(&self, at: IndexPoint) -> f64 {
        let linear = if at.n() == 0.0 { 0.0 } else { -self.decay_rate() * at.n() };
        linear + self.log_envelope(at)
    }

    /// `ln g(n + k) - ln g(n)`, formed without the large linear terms.
    pub fn log_step(&self, at: IndexPoint, k: u64) -> Option<f64> {
        let next = at.offset(k)?;
        Some(-self.decay_rate() * k as f64 + self.log_envelope(next) - self.log_envelope(at))
    }

    /// Largest `ln(1 + n)` at which evaluation is numerically meaningful.
    ///
    /// For the oscillating generator, resolving `1 + sin(ln x)` near its
    /// zeros needs `ln x` to carry absolute precision well below `L^{-(r+3)/2}`.
    pub fn max_log_index(&self) -> f64 {
        match self {
            Generator::LogOscillation { .. } => 1e6,
            _ => f64::INFINITY,
        }
    }

    /// Extra sample points where the envelope attains its local extremes,
    /// within `ln(1+n) ∈ [ell_lo, ell_hi]`.
    pub fn critical_points(&self, ell_lo: f64, ell_hi: f64) -> Vec<IndexPoint> {
        match *self {
            Generator::LogOscillation { q, shift, .. } => {
                log_oscillation::extremal_indices(-2.0 * q.ln(), shift, ell_lo, ell_hi)
            }
            _ => Vec::new(),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be positive and finite")))
    }
}

/// The tail function `g(n)` of a state, in log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailSequence {
    /// `ln g(n)` for `n < rank`; `g(n) = 0` beyond.
    Finite { log_g: Vec<f64> },
    Generated { generator: Generator },
}

impl TailSequence {
    /// Trailing `-inf` entries are dropped.
    pub fn finite_from_log(mut log_g: Vec<f64>) -> Self {
        while log_g.last() == Some(&f64::NEG_INFINITY) {
            log_g.pop();
        }
        TailSequence::Finite { log_g }
    }

    /// From linear tail values; trailing zeros are dropped.
    pub fn finite_from_values(g: &[f64]) -> Self {
        Self::finite_from_log(g.iter().map(|v| v.ln()).collect())
    }

    pub fn generated(generator: Generator) -> Self {
        TailSequence::Generated { generator }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TailSequence::Finite { .. })
    }

    pub fn generator(&self) -> Option<&Generator> {
        match self {
            TailSequence::Generated { generator } => Some(generator),
            TailSequence::Finite { .. } => None,
        }
    }

    /// Number of positive tail values for finite tails.
    pub fn rank(&self) -> Option<usize> {
        match self {
            TailSequence::Finite { log_g } => Some(log_g.len()),
            TailSequence::Generated { .. } => None,
        }
    }

    pub fn log_at(&self, n: u64) -> f64 {
        self.log_at_point(IndexPoint::at(n))
    }

    pub fn log_at_point(&self, at: IndexPoint) -> f64 {
        match self {
            TailSequence::Finite { log_g } => match at.as_u64() {
                Some(n) if (n as usize) < log_g.len() => log_g[n as usize],
                _ => f64::NEG_INFINITY,
            },
            TailSequence::Generated { generator } => generator.log_tail(at),
        }
    }

    /// `ln g(n + k) - ln g(n)`.
    pub fn log_step(&self, n: u64, k: u64) -> f64 {
        match self {
            TailSequence::Finite { .. } => self.log_at(n + k) - self.log_at(n),
            TailSequence::Generated { generator } => generator
                .log_step(IndexPoint::at(n), k)
                .unwrap_or(f64::NAN),
        }
    }
}

/// Tail sums of a spectrum, accumulated from the smallest coefficient up.
pub fn tail_sums(s: &SchmidtSpectrum) -> TailSequence {
    let mut log_g = vec![0.0; s.len()];
    let mut acc = f64::NEG_INFINITY;
    for (i, &l) in s.log_lambdas().iter().enumerate().rev() {
        acc = log_add_exp(acc, l);
        log_g[i] = acc;
    }
    TailSequence::Finite { log_g }
}

/// Indices at which [`validate_tail`] evaluates the four conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexRange {
    /// `start..end`.
    Contiguous { start: u64, end: u64 },
    /// Sorted sample indices.
    Points { points: Vec<u64> },
}

impl IndexRange {
    pub fn upto(end: u64) -> Self {
        IndexRange::Contiguous { start: 0, end }
    }

    /// Geometric samples in `[0, max]`, `per_decade` points per factor of ten,
    /// always including `0..=16`.
    pub fn geometric(max: u64, per_decade: usize) -> Self {
        let mut points: Vec<u64> = (0..=16.min(max)).collect();
        let ratio = 10f64.powf(1.0 / per_decade as f64);
        let mut v = 16.0;
        while v <= max as f64 {
            points.push(v.round() as u64);
            v *= ratio;
        }
        points.push(max);
        points.sort_unstable();
        points.dedup();
        IndexRange::Points { points }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            IndexRange::Contiguous { start, end } => Box::new(*start..*end),
            IndexRange::Points { points } => Box::new(points.iter().copied()),
        }
    }
}

/// Outcome of checking positivity, strict monotonicity, convexity and
/// normalization of a tail sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub positivity_ok: bool,
    pub monotonicity_ok: bool,
    pub convexity_ok: bool,
    pub normalization_ok: bool,
    pub first_violation: Option<u64>,
    pub points_checked: usize,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.positivity_ok && self.monotonicity_ok && self.convexity_ok && self.normalization_ok
    }

    fn flag(&mut self, n: u64) {
        self.first_violation = Some(self.first_violation.map_or(n, |f| f.min(n)));
    }
}

/// Check the four conditions pointwise on `range`. Normalization is only
/// examined when `n = 0` is in the range. For finite tails, indices at or
/// beyond the rank are identically zero and carry no conditions.
pub fn validate_tail(g: &TailSequence, range: &IndexRange) -> ValidityReport {
    let mut report = ValidityReport {
        positivity_ok: true,
        monotonicity_ok: true,
        convexity_ok: true,
        normalization_ok: true,
        first_violation: None,
        points_checked: 0,
    };
    let strict_step = (-STRICT_MARGIN).ln_1p();
    for n in range.iter() {
        if let Some(rank) = g.rank() {
            if n >= rank as u64 {
                continue;
            }
        } else if n as f64 >= EXACT_INDEX_LIMIT {
            continue;
        }
        report.points_checked += 1;

        let here = g.log_at(n);
        if n == 0 && !(here.abs() <= TAU_NORM) {
            report.normalization_ok = false;
            report.flag(0);
        }
        if !(here > f64::NEG_INFINITY && here.is_finite()) {
            report.positivity_ok = false;
            report.flag(n);
            continue;
        }
        let s1 = g.log_step(n, 1);
        if !(s1 < strict_step) {
            report.monotonicity_ok = false;
            report.flag(n);
        }
        let convex_applies = g.rank().map_or(true, |rank| n + 2 <= rank as u64);
        if convex_applies {
            let s2 = g.log_step(n, 2);
            // g(n+1)/g(n) <= (1 + g(n+2)/g(n)) / 2
            if !(s1.exp() <= 0.5 * (1.0 + s2.exp()) + CONVEX_SLACK) {
                report.convexity_ok = false;
                report.flag(n);
            }
        }
    }
    report
}

/// Recover the first `count` Schmidt coefficients `λ_n = g(n) - g(n+1)`.
///
/// With `renormalize`, the recovered coefficients are rescaled to sum to one.
/// Without it, a tail of longer support yields a truncated spectrum.
pub fn spectrum_from_tail(g: &TailSequence, count: usize, renormalize: bool) -> Result<SchmidtSpectrum> {
    let report = validate_tail(g, &IndexRange::upto(count as u64));
    if !report.is_valid() {
        return Err(Error::InvalidTail(report));
    }
    let len = g.rank().map_or(count, |rank| rank.min(count));
    let mut logs: Vec<f64> = (0..len as u64)
        .map(|n| g.log_at(n) + log1m_exp(g.log_step(n, 1)))
        .collect();
    if renormalize {
        let total = logs.iter().rev().fold(f64::NEG_INFINITY, |a, &l| log_add_exp(a, l));
        logs.iter_mut().for_each(|l| *l -= total);
    }
    SchmidtSpectrum::truncated_from_log(logs)
}
