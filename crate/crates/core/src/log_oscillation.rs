//! The log-oscillating modifier and the incomparable family built from it.
//!
//! The modifier is
//!
//! ```text
//! p_r(x) = (ln x)^r (sin(ln x) + 1) + (ln x)^{-1},    x > 1,
//! ```
//!
//! and the family member `ξ_r` has tail `d_r(x) = p_r(x + x₀) e^{-x}`, sampled
//! at `x = Δ·n` with `Δ = -ln q²` so that `e^{-Δn} = q^{2n}` is exactly the
//! tail of the two-mode squeezed state. `d_r` is a valid tail beyond the shift
//! `x₀` when `m_r = p - p' > 0` and `c_r = p - 2p' + p'' ≥ 0` there.
//!
//! Against the squeezed state the tail ratio is `1/p_r`, which oscillates
//! with a multiplicative period `e^{2π}` in `x`: its minima `≈ 1/(2 L^r)` go to
//! zero and its maxima `≈ L` (at `sin L = -1`) grow without bound, where
//! `L = ln x`. Neither state converts to the other.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::family::{self, FamilyKind, FamilyMonotoneEstimate, FamilyValidation, TailFamily, ValidationPlan};
use crate::slocc::{self, Certification, Schedule};
use crate::spectra::{Generator, IndexPoint, TailSequence};

/// `p_r(x)`. Natural logarithm throughout.
pub fn p_r(x: f64, r: f64) -> Result<f64> {
    check_x(x)?;
    Ok(p_at_log(x.ln(), r))
}

fn check_x(x: f64) -> Result<()> {
    if x > 1.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("p_r needs x > 1 (got {x})")))
    }
}

fn p_at_log(log_x: f64, r: f64) -> f64 {
    log_x.powf(r) * (log_x.sin() + 1.0) + log_x.recip()
}

/// `ln p_r(x)` from `ln x`.
pub fn ln_p_at_log(log_x: f64, r: f64) -> f64 {
    p_at_log(log_x, r).ln()
}

/// `ln(Δ·n + shift)` for an index that may be beyond the f64 range.
pub(crate) fn log_argument(step: f64, shift: f64, at: IndexPoint) -> f64 {
    let n = at.n();
    if n == 0.0 {
        return shift.ln();
    }
    let x = step * n;
    if x.is_finite() && x < 1e300 {
        (x + shift).ln()
    } else {
        at.ln_n() + step.ln() + (shift * (-at.ln_n()).exp() / step).ln_1p()
    }
}

/// `p_r` and its first two derivatives at one point, together with the
/// monotonicity and convexity witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifierEval {
    pub p: f64,
    pub p_prime: f64,
    pub p_double_prime: f64,
    /// `p - p'`
    pub m: f64,
    /// `p - 2p' + p''`
    pub c: f64,
}

impl ModifierEval {
    /// Evaluate at `x = e^{log_x}`.
    ///
    /// With `L = ln x`, `S = sin L + 1` and `P₁ = dp/dL`, `P₂ = d²p/dL²`:
    /// `p' = P₁/x` and `p'' = (P₂ - P₁)/x²`.
    pub fn at_log(log_x: f64, r: f64) -> Self {
        let l = log_x;
        let (sin, cos) = l.sin_cos();
        let s = sin + 1.0;
        let lr = l.powf(r);
        let lr1 = l.powf(r - 1.0);
        let lr2 = l.powf(r - 2.0);

        let p = lr * s + l.recip();
        let dp_dl = r * lr1 * s + lr * cos - l.powi(-2);
        let d2p_dl2 = r * (r - 1.0) * lr2 * s + 2.0 * r * lr1 * cos - lr * sin + 2.0 * l.powi(-3);

        let inv_x = (-l).exp();
        let p_prime = dp_dl * inv_x;
        let p_double_prime = (d2p_dl2 - dp_dl) * inv_x * inv_x;
        Self {
            p,
            p_prime,
            p_double_prime,
            m: p - p_prime,
            c: p - 2.0 * p_prime + p_double_prime,
        }
    }
}

pub fn p_r_derivatives(x: f64, r: f64) -> Result<ModifierEval> {
    check_x(x)?;
    Ok(ModifierEval::at_log(x.ln(), r))
}

/// Sampling plan for [`find_shift_with`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftSearch {
    /// Candidate shifts are `e^{1 + k/candidates_per_unit}`, `k = 0, 1, …`.
    pub candidates_per_unit: u32,
    /// Geometric x-samples per unit of `ln x`.
    pub samples_per_unit: u32,
    /// Number of r values checked across `[r_lo, r_hi]`.
    pub r_points: usize,
    /// Upper end of the verified x range.
    pub x_verify: f64,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        Self {
            candidates_per_unit: 16,
            samples_per_unit: 64,
            r_points: 21,
            x_verify: 1e12,
        }
    }
}

impl ShiftSearch {
    pub fn denser(&self, factor: u32) -> Self {
        Self {
            samples_per_unit: self.samples_per_unit * factor,
            r_points: (self.r_points - 1) * factor as usize + 1,
            ..self.clone()
        }
    }
}

fn r_grid(r_lo: f64, r_hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || r_lo == r_hi {
        return vec![r_lo];
    }
    (0..points)
        .map(|i| r_lo + (r_hi - r_lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Sample values of `ln x` in `[log_lo, log_hi]`: a uniform grid plus every
/// `kπ/2`, where sin and cos of `ln x` take their extreme values.
fn log_x_samples(log_lo: f64, log_hi: f64, per_unit: u32) -> Vec<f64> {
    let count = ((log_hi - log_lo) * per_unit as f64).ceil() as usize;
    let mut v: Vec<f64> = (0..=count)
        .map(|i| log_lo + (log_hi - log_lo) * i as f64 / count.max(1) as f64)
        .collect();
    let k_lo = (log_lo / FRAC_PI_2).ceil() as i64;
    let k_hi = (log_hi / FRAC_PI_2).floor() as i64;
    v.extend((k_lo..=k_hi).map(|k| k as f64 * FRAC_PI_2));
    v.sort_by(f64::total_cmp);
    v
}

fn violates(log_x: f64, r: f64) -> bool {
    let e = ModifierEval::at_log(log_x, r);
    !(e.p > 0.0 && e.m > 0.0 && e.c >= 0.0)
}

/// First sampled `(x, r)` in `[x0, x_verify]` where `p_r > 0`, `m_r > 0` or
/// `c_r ≥ 0` fails.
pub fn verify_shift(r_lo: f64, r_hi: f64, x0: f64, plan: &ShiftSearch) -> Option<(f64, f64)> {
    let rs = r_grid(r_lo, r_hi, plan.r_points);
    log_x_samples(x0.ln(), plan.x_verify.ln(), plan.samples_per_unit)
        .into_iter()
        .find_map(|lx| rs.iter().find(|&&r| violates(lx, r)).map(|&r| (lx.exp(), r)))
}

/// Smallest candidate shift `x₀` such that `m_r(x) > 0` and `c_r(x) ≥ 0` at
/// every sampled `x ∈ [x₀, x_verify]` and every sampled `r ∈ [r_lo, r_hi]`.
pub fn find_shift(r_lo: f64, r_hi: f64, x_max_search: f64) -> Result<f64> {
    find_shift_with(r_lo, r_hi, x_max_search, &ShiftSearch::default())
}

pub fn find_shift_with(r_lo: f64, r_hi: f64, x_max_search: f64, plan: &ShiftSearch) -> Result<f64> {
    if !(r_lo > 0.0 && r_lo <= r_hi && r_hi.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < r_lo <= r_hi < inf (got {r_lo}, {r_hi})"
        )));
    }
    let rs = r_grid(r_lo, r_hi, plan.r_points);
    let samples = log_x_samples(1.0, plan.x_verify.ln(), plan.samples_per_unit);
    let last_bad = samples
        .iter()
        .rev()
        .find(|&&lx| rs.iter().any(|&r| violates(lx, r)))
        .copied();
    let per_unit = plan.candidates_per_unit as f64;
    let log_x0 = match last_bad {
        None => 1.0,
        Some(lx) => 1.0 + (((lx - 1.0) * per_unit).floor() + 1.0) / per_unit,
    };
    let x0 = log_x0.exp();
    if x0 > x_max_search || x0 > plan.x_verify {
        return Err(Error::NoShift(x_max_search.min(plan.x_verify)));
    }
    Ok(x0)
}

/// The discretized family `ξ_r`, `r ∈ [r_lo, r_hi]`, paired with the squeezed
/// state of parameter `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogOscillationFamily {
    pub q: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Step in x per Schmidt index, `-ln q²`.
    pub delta: f64,
    pub shift: f64,
}

impl LogOscillationFamily {
    /// Build the family, searching for the shift with the default plan.
    pub fn new(q: f64, r_lo: f64, r_hi: f64) -> Result<Self> {
        let shift = find_shift(r_lo, r_hi, 1e6)?;
        Self::with_shift(q, r_lo, r_hi, shift)
    }

    pub fn with_shift(q: f64, r_lo: f64, r_hi: f64, shift: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Parameter(format!("q = {q} must lie in (0, 1)")));
        }
        if !(r_lo > 0.0 && r_lo <= r_hi && r_hi.is_finite()) {
            return Err(Error::Parameter(format!(
                "need 0 < r_lo <= r_hi < inf (got {r_lo}, {r_hi})"
            )));
        }
        if !(shift > 1.0 && shift.is_finite()) {
            return Err(Error::Parameter(format!("shift {shift} must exceed 1")));
        }
        Ok(Self {
            q,
            r_lo,
            r_hi,
            delta: -2.0 * q.ln(),
            shift,
        })
    }

    pub fn member(&self, r: f64) -> Generator {
        Generator::LogOscillation {
            q: self.q,
            r,
            shift: self.shift,
        }
    }

    pub fn squeezed(&self) -> Generator {
        Generator::Squeezed { q: self.q }
    }

    pub fn as_tail_family(&self, grid_points: usize) -> TailFamily {
        TailFamily::new(
            FamilyKind::LogOscillation {
                q: self.q,
                shift: Some(self.shift),
            },
            self.r_lo,
            self.r_hi,
            grid_points,
        )
        .expect("family parameters were validated at construction")
    }
}

/// `ln d_r(n)`, normalized so that `n = 0` gives zero.
pub fn xi_r_tail(fam: &LogOscillationFamily, r: f64, n: u64) -> f64 {
    fam.member(r).log_tail(IndexPoint::at(n))
}

/// Indices whose argument `x = Δn + shift` sits at an odd multiple of π/2 in
/// `ln x`, within `ln(1+n) ∈ [ell_lo, ell_hi]`.
pub(crate) fn extremal_indices(step: f64, shift: f64, ell_lo: f64, ell_hi: f64) -> Vec<IndexPoint> {
    let l_lo = log_argument(step, shift, IndexPoint::from_log1p(ell_lo));
    let l_hi = log_argument(step, shift, IndexPoint::from_log1p(ell_hi));
    let k_lo = ((l_lo / FRAC_PI_2 - 1.0) / 2.0).ceil().max(0.0) as i64;
    let k_hi = ((l_hi / FRAC_PI_2 - 1.0) / 2.0).floor() as i64;
    let log_shift = shift.ln();
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let l = (2 * k + 1) as f64 * FRAC_PI_2;
        if l <= log_shift {
            continue;
        }
        // ln(e^L - shift) - ln Δ
        let ln_n = l + (-(log_shift - l).exp()).ln_1p() - step.ln();
        let at = IndexPoint::from_ln(ln_n);
        let ell = at.log1p();
        if ell >= ell_lo && ell <= ell_hi {
            out.push(at);
        }
    }
    out
}

/// Parameters of [`reproduce_incomparability`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub q: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub horizon_decades: u32,
    pub grid_points: usize,
    pub samples_per_unit: f64,
    pub refine_rounds: u32,
    /// Largest index at which member validity is checked pointwise.
    pub validity_max_n: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        let q: f64 = 0.5;
        Self {
            q,
            r_lo: 1.0,
            r_hi: 2.0,
            horizon_decades: slocc::DEFAULT_HORIZON_DECADES,
            grid_points: 5,
            samples_per_unit: slocc::DEFAULT_SAMPLES_PER_UNIT,
            refine_rounds: family::DEFAULT_REFINE_ROUNDS,
            // x = Δn + shift up to 1e12
            validity_max_n: (1e12 / (-2.0 * q.ln())) as u64,
            exec: Exec::default(),
        }
    }
}

impl ReproduceConfig {
    pub fn schedule(&self) -> Schedule {
        Schedule {
            decades: self.horizon_decades,
            samples_per_unit: self.samples_per_unit,
            exec: self.exec,
        }
    }
}

/// Per-r outcome of the two-sided convertibility test against the squeezed state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberOutcome {
    pub r: f64,
    pub certification: Certification,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reproduction {
    pub config: ReproduceConfig,
    pub family: LogOscillationFamily,
    pub validation: FamilyValidation,
    pub members: Vec<MemberOutcome>,
    pub estimate: FamilyMonotoneEstimate,
    /// Every grid member certified incomparable and the estimate equals
    /// `(r_lo, r_hi)`.
    pub reproduced: bool,
}

/// Build the squeezed state and the family `ξ_r`, certify incomparability
/// for every grid r, and estimate the monotone pair of the squeezed state.
pub fn reproduce_incomparability(config: &ReproduceConfig) -> Result<Reproduction> {
    let fam = LogOscillationFamily::new(config.q, config.r_lo, config.r_hi)?;
    let schedule = config.schedule();
    let tail_family = fam.as_tail_family(config.grid_points);
    let psi = TailSequence::generated(fam.squeezed());

    let plan = ValidationPlan {
        max_n: config.validity_max_n,
        per_decade: 64,
    };
    let validation = family::validate_family(&tail_family, &schedule, &plan)?;

    let members = tail_family
        .grid
        .iter()
        .map(|&r| {
            let xi = TailSequence::generated(fam.member(r));
            slocc::certify_incomparable(&psi, &xi, &schedule).map(|certification| MemberOutcome { r, certification })
        })
        .collect::<Result<Vec<_>>>()?;

    let estimate = family::estimate_r(&tail_family, &psi, &schedule, config.refine_rounds)?;
    let reproduced = members.iter().all(|m| m.certification.is_certified())
        && estimate.r_minus_hat == config.r_lo
        && estimate.r_plus_hat == config.r_hi;

    Ok(Reproduction {
        config: config.clone(),
        family: fam,
        validation,
        members,
        estimate,
        reproduced,
    })
}
