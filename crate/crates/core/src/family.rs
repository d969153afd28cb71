//! Real-parameterized tail families and the monotone pair they induce.
//!
//! A family `r ↦ ξ_r` over `A = [r_lo, r_hi]` is usable as a chain when every
//! member is a valid tail (strictly decreasing, convex) and members are
//! ordered: `g_{ξ_a}/g_{ξ_b}` is bounded below exactly when `ξ_a` sits above
//! `ξ_b`. For a state `ψ` the monotones are then
//!
//! ```text
//! R⁻(ψ) = inf { r ∈ A : liminf g_ψ/g_{ξ_r} = 0 }
//! R⁺(ψ) = inf { r ∈ A : limsup g_ψ/g_{ξ_r} < ∞ }
//! ```
//!
//! Both limits are classified with the windowed trend rules of
//! [`crate::slocc::trend`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log_oscillation;
use crate::slocc::{ratio_trend_pair, Schedule, TrendReport, Verdict};
use crate::spectra::{validate_tail, Generator, IndexRange, TailSequence, ValidityReport};

pub const DEFAULT_GRID_POINTS: usize = 9;
pub const DEFAULT_REFINE_ROUNDS: u32 = 3;
/// Upper bound handed to the shift search when a descriptor omits the shift.
pub const SHIFT_SEARCH_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `ξ_r` with tail `∝ p_r(Δn + shift) q^{2n}`. A missing shift is searched for.
    #[serde(alias = "paper_log_oscillation")]
    LogOscillation { q: f64, shift: Option<f64> },
    /// `g_r(n) = e^{-rate·n} (1+n)^{-r}`.
    PowerLaw { rate: f64 },
    /// `g_r(n) = e^{-n/r}`.
    Exponential,
}

/// Which way the parameter runs along the conversion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Larger r has the heavier tail and converts to smaller r.
    Ascending,
    /// Larger r has the lighter tail.
    Descending,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Ascending => 1.0,
            Orientation::Descending => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFamily {
    pub kind: FamilyKind,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Evenly spaced sample of `[r_lo, r_hi]`, ascending.
    pub grid: Vec<f64>,
}

impl TailFamily {
    pub fn new(kind: FamilyKind, r_lo: f64, r_hi: f64, grid_points: usize) -> Result<Self> {
        if !(r_lo.is_finite() && r_hi.is_finite() && r_lo <= r_hi) {
            return Err(Error::Parameter(format!(
                "need finite r_lo <= r_hi (got {r_lo}, {r_hi})"
            )));
        }
        if grid_points == 0 {
            return Err(Error::Parameter("grid needs at least one point".into()));
        }
        let kind = match kind {
            FamilyKind::LogOscillation { q, shift: None } => FamilyKind::LogOscillation {
                q,
                shift: Some(log_oscillation::find_shift(r_lo, r_hi, SHIFT_SEARCH_LIMIT)?),
            },
            k => k,
        };
        let grid = if grid_points == 1 || r_lo == r_hi {
            vec![r_lo]
        } else {
            (0..grid_points)
                .map(|i| {
                    if i + 1 == grid_points {
                        r_hi
                    } else {
                        r_lo + (r_hi - r_lo) * i as f64 / (grid_points - 1) as f64
                    }
                })
                .collect()
        };
        let fam = Self { kind, r_lo, r_hi, grid };
        fam.member(r_lo)?.validate()?;
        fam.member(r_hi)?.validate()?;
        Ok(fam)
    }

    pub fn orientation(&self) -> Orientation {
        match self.kind {
            FamilyKind::PowerLaw { .. } => Orientation::Descending,
            FamilyKind::LogOscillation { .. } | FamilyKind::Exponential => Orientation::Ascending,
        }
    }

    pub fn member(&self, r: f64) -> Result<Generator> {
        let g = match self.kind {
            FamilyKind::LogOscillation { q, shift } => Generator::LogOscillation {
                q,
                r,
                shift: shift.ok_or_else(|| Error::Parameter("family shift was not resolved".into()))?,
            },
            FamilyKind::PowerLaw { rate } => Generator::PowerLaw { rate, exponent: r },
            FamilyKind::Exponential => {
                if !(r > 0.0) {
                    return Err(Error::Parameter(format!("exponential family needs r > 0 (got {r})")));
                }
                Generator::Exponential { rate: 1.0 / r }
            }
        };
        g.validate()?;
        Ok(g)
    }

    pub fn member_tail(&self, r: f64) -> Result<TailSequence> {
        self.member(r).map(TailSequence::generated)
    }
}

/// Index samples for the pointwise conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationPlan {
    pub max_n: u64,
    pub per_decade: usize,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        Self {
            max_n: 1_000_000,
            per_decade: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberValidity {
    pub r: f64,
    pub report: ValidityReport,
}

/// Ordering check for one ordered pair of grid members.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairCheck {
    pub r_a: f64,
    pub r_b: f64,
    /// `ξ_{r_a}` sits above `ξ_{r_b}` under the family orientation.
    pub expect_bounded: bool,
    pub verdict: Verdict,
    pub decaying: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyValidation {
    pub orientation: Orientation,
    pub members: Vec<MemberValidity>,
    pub pairs: Vec<PairCheck>,
    /// Every member strictly positive and strictly decreasing.
    pub condition_i: bool,
    /// Every member convex.
    pub condition_ii: bool,
    /// Every pair ordered as the orientation requires.
    pub condition_iii: bool,
}

impl FamilyValidation {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii
    }
}

fn pair_check(r_a: f64, r_b: f64, orientation: Orientation, report: &TrendReport) -> PairCheck {
    let expect_bounded = orientation.sign() * (r_a - r_b) >= 0.0;
    let ok = if expect_bounded {
        report.verdict == Verdict::Convertible
    } else {
        report.verdict == Verdict::NotConvertible || report.decaying
    };
    PairCheck {
        r_a,
        r_b,
        expect_bounded,
        verdict: report.verdict,
        decaying: report.decaying,
        ok,
    }
}

/// Check conditions I and II pointwise on `plan` for every grid member, and
/// condition III with [`ratio_trend_pair`] on every pair of grid members.
///
/// A pair expected to be unbounded passes when its minima are classified not
/// convertible or at least strictly decaying; slowly separating members (a
/// ratio falling like a small power of `ln n`) cannot reach the faster rule
/// within any practical horizon.
pub fn validate_family(f: &TailFamily, schedule: &Schedule, plan: &ValidationPlan) -> Result<FamilyValidation> {
    let range = IndexRange::geometric(plan.max_n, plan.per_decade);
    let tails = f
        .grid
        .iter()
        .map(|&r| f.member_tail(r))
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<MemberValidity> = schedule
        .exec
        .map_slice(&tails, |t| validate_tail(t, &range))
        .into_iter()
        .zip(&f.grid)
        .map(|(report, &r)| MemberValidity { r, report })
        .collect();

    let orientation = f.orientation();
    let mut pairs = Vec::new();
    for i in 0..tails.len() {
        for j in i + 1..tails.len() {
            let (fwd, bwd) = ratio_trend_pair(&tails[i], &tails[j], schedule)?;
            pairs.push(pair_check(f.grid[i], f.grid[j], orientation, &fwd));
            pairs.push(pair_check(f.grid[j], f.grid[i], orientation, &bwd));
        }
    }
    Ok(FamilyValidation {
        orientation,
        condition_i: members
            .iter()
            .all(|m| m.report.positivity_ok && m.report.monotonicity_ok),
        condition_ii: members.iter().all(|m| m.report.convexity_ok),
        condition_iii: pairs.iter().all(|p| p.ok),
        members,
        pairs,
    })
}

/// Limit classification of `g_ψ/g_{ξ_r}` at one parameter value. `None`
/// means the trend rules were inconclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RClassification {
    pub r: f64,
    pub liminf_zero: Option<bool>,
    pub limsup_infinite: Option<bool>,
    pub forward: TrendReport,
    pub backward: TrendReport,
    /// Added by boundary bisection rather than taken from the initial grid.
    pub refined: bool,
}

fn definite(v: Verdict) -> Option<bool> {
    match v {
        Verdict::NotConvertible => Some(true),
        Verdict::Convertible => Some(false),
        Verdict::Inconclusive => None,
    }
}

fn classify(f: &TailFamily, psi: &TailSequence, r: f64, schedule: &Schedule, refined: bool) -> Result<RClassification> {
    let xi = f.member_tail(r)?;
    let (forward, backward) = ratio_trend_pair(psi, &xi, schedule)?;
    Ok(RClassification {
        r,
        // liminf g_ψ/g_ξ = 0 is ψ ↛ ξ; limsup g_ψ/g_ξ = ∞ is ξ ↛ ψ
        liminf_zero: definite(forward.verdict),
        limsup_infinite: definite(backward.verdict),
        forward,
        backward,
        refined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum Confidence {
    Definite,
    /// Some grid values were inconclusive; they were left out of the infima.
    Partial { inconclusive: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyMonotoneEstimate {
    pub r_minus_hat: f64,
    pub r_plus_hat: f64,
    pub orientation: Orientation,
    /// Sorted by r.
    pub table: Vec<RClassification>,
    pub confidence: Confidence,
    /// Both classifications switch at most once along the order, in the
    /// expected direction.
    pub monotone_classification: bool,
}

/// In order coordinates `t = ±r` (larger t higher in the order), both
/// `liminf_zero` and `limsup_finite` are false below a threshold and true
/// above it. Returns the smallest t classified true and, if any, the largest
/// t classified false below it.
fn bracket(points: &[(f64, Option<bool>)]) -> (Option<f64>, Option<f64>) {
    let first_true = points.iter().find(|p| p.1 == Some(true)).map(|p| p.0);
    let last_false = points
        .iter()
        .filter(|p| p.1 == Some(false) && first_true.is_none_or(|t| p.0 < t))
        .map(|p| p.0)
        .next_back();
    (first_true, last_false)
}

fn switches_once(points: &[(f64, Option<bool>)]) -> bool {
    let seq: Vec<bool> = points.iter().filter_map(|p| p.1).collect();
    seq.windows(2).all(|w| w[0] <= w[1])
}

fn in_order(table: &[RClassification], sign: f64, pick: impl Fn(&RClassification) -> Option<bool>) -> Vec<(f64, Option<bool>)> {
    let mut v: Vec<(f64, Option<bool>)> = table.iter().map(|c| (sign * c.r, pick(c))).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Estimate `(R⁻(ψ), R⁺(ψ))` over the family grid, refining each
/// classification boundary by `refine_rounds` bisection steps.
///
/// `R⁻` is the largest sampled parameter that `ψ` converts to (the lower end
/// of its bisection bracket) and `R⁺` the smallest sampled parameter that
/// converts to `ψ`. Empty sets give the lower and upper end of `A`
/// respectively. For a descending family the pair is mapped back to r and
/// returned as `(smaller, larger)`.
pub fn estimate_r(f: &TailFamily, psi: &TailSequence, schedule: &Schedule, refine_rounds: u32) -> Result<FamilyMonotoneEstimate> {
    let orientation = f.orientation();
    let sign = orientation.sign();
    let mut table = schedule
        .exec
        .map_slice(&f.grid, |&r| classify(f, psi, r, schedule, false))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let liminf_zero = |c: &RClassification| c.liminf_zero;
    let limsup_finite = |c: &RClassification| c.limsup_infinite.map(|v| !v);
    let pickers: [&dyn Fn(&RClassification) -> Option<bool>; 2] = [&liminf_zero, &limsup_finite];

    for pick in pickers {
        for _ in 0..refine_rounds {
            let points = in_order(&table, sign, pick);
            let (Some(t_true), Some(t_false)) = bracket(&points) else { break };
            let mid = 0.5 * (t_true + t_false);
            if mid == t_true || mid == t_false {
                break;
            }
            let c = classify(f, psi, sign * mid, schedule, true)?;
            let stop = pick(&c).is_none();
            table.push(c);
            if stop {
                break;
            }
        }
    }
    table.sort_by(|a, b| a.r.total_cmp(&b.r));

    let (t_lo, t_hi) = if sign > 0.0 { (f.r_lo, f.r_hi) } else { (-f.r_hi, -f.r_lo) };
    // R⁻ = sup { t : ψ → ξ_t }, R⁺ = inf { t : ξ_t → ψ }, each over the samples
    let minus_t = bracket(&in_order(&table, sign, liminf_zero)).1.unwrap_or(t_lo);
    let plus_t = bracket(&in_order(&table, sign, limsup_finite)).0.unwrap_or(t_hi);
    let monotone_classification =
        switches_once(&in_order(&table, sign, liminf_zero)) && switches_once(&in_order(&table, sign, limsup_finite));

    let (r_minus_hat, r_plus_hat) = if sign > 0.0 {
        (minus_t, plus_t)
    } else {
        (-plus_t, -minus_t)
    };
    let inconclusive = table
        .iter()
        .filter(|c| c.liminf_zero.is_none() || c.limsup_infinite.is_none())
        .count();
    Ok(FamilyMonotoneEstimate {
        r_minus_hat,
        r_plus_hat,
        orientation,
        table,
        confidence: if inconclusive == 0 {
            Confidence::Definite
        } else {
            Confidence::Partial { inconclusive }
        },
        monotone_classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_even_and_ends_exactly() {
        let f = TailFamily::new(FamilyKind::PowerLaw { rate: 1.0 }, 0.5, 2.0, 9).unwrap();
        assert_eq!(f.grid.len(), 9);
        assert_eq!(f.grid[0], 0.5);
        assert_eq!(f.grid[8], 2.0);
        assert!((f.grid[1] - 0.6875).abs() < 1e-15);
        assert!(TailFamily::new(FamilyKind::Exponential, 2.0, 1.0, 3).is_err());
        assert!(TailFamily::new(FamilyKind::Exponential, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn exponential_family_is_ordered() {
        let f = TailFamily::new(FamilyKind::Exponential, 1.0, 2.0, 3).unwrap();
        let v = validate_family(&f, &Schedule::default(), &ValidationPlan::default()).unwrap();
        assert!(v.passed(), "{v:?}");
        assert_eq!(v.pairs.len(), 6);
    }

    #[test]
    fn single_member_family() {
        let f = TailFamily::new(FamilyKind::Exponential, 1.5, 1.5, 5).unwrap();
        assert_eq!(f.grid, vec![1.5]);
        let v = validate_family(&f, &Schedule::default(), &ValidationPlan::default()).unwrap();
        assert!(v.pairs.is_empty() && v.passed());
    }

    #[test]
    fn member_of_exponential_family() {
        let f = TailFamily::new(FamilyKind::Exponential, 1.0, 2.0, 5).unwrap();
        let psi = f.member_tail(1.5).unwrap();
        let e = estimate_r(&f, &psi, &Schedule::default(), DEFAULT_REFINE_ROUNDS).unwrap();
        assert_eq!(e.confidence, Confidence::Definite);
        assert!(e.monotone_classification);
        assert!((e.r_minus_hat - 1.5).abs() <= 0.25, "{}", e.r_minus_hat);
        assert!((e.r_plus_hat - 1.5).abs() <= 0.25, "{}", e.r_plus_hat);
        assert!(e.r_minus_hat <= e.r_plus_hat);
    }

    #[test]
    fn bracket_finds_the_switch() {
        let pts = [(0.0, Some(false)), (1.0, None), (2.0, Some(false)), (3.0, Some(true)), (4.0, Some(true))];
        assert_eq!(bracket(&pts), (Some(3.0), Some(2.0)));
        assert_eq!(bracket(&[(0.0, Some(false))]), (None, Some(0.0)));
        assert!(switches_once(&pts));
        assert!(!switches_once(&[(0.0, Some(true)), (1.0, Some(false))]));
    }
}
