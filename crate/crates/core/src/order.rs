//! Finite preorders, embedded chains and the extremal monotone pair.
//!
//! A chain `ξ_{r_1}, …, ξ_{r_m}` has strictly increasing parameters and is
//! oriented so that `ξ_{r_i} → ξ_{r_j}` iff `r_i ≥ r_j`: a larger parameter
//! sits higher and converts to everything below it. For an element ψ
//!
//! ```text
//! r⁻(ψ) = max { r_i : ψ → ξ_{r_i} }   (min r if none)
//! r⁺(ψ) = min { r_i : ξ_{r_i} → ψ }   (max r if none)
//! ```
//!
//! Everything here is exhaustive and exact, which makes it the reference for
//! the laws the pair obeys.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// A reflexive, transitive relation on `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePoset {
    pub labels: Vec<String>,
    reach: Vec<Vec<bool>>,
}

/// Smallest reflexive-transitive relation containing `edges`.
pub fn transitive_closure(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<FinitePoset> {
    let n = labels.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::InvalidPoset(format!("edge ({a}, {b}) outside {n} elements")));
        }
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    Ok(FinitePoset { labels, reach })
}

impl FinitePoset {
    /// Unlabeled closure, elements named by index.
    pub fn from_edges(len: usize, edges: &[(usize, usize)]) -> Result<Self> {
        transitive_closure((0..len).map(|i| i.to_string()).collect(), edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn reaches(&self, a: usize, b: usize) -> bool {
        self.reach[a][b]
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.reach[a][b] && self.reach[b][a]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.reach[a][b] || self.reach[b][a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.len()).all(|a| (0..a).all(|b| !self.equivalent(a, b)))
    }

    /// Any two elements are comparable.
    pub fn is_total(&self) -> bool {
        (0..self.len()).all(|a| (0..a).all(|b| self.comparable(a, b)))
    }

    /// All pairs `(a, b)`, `a ≠ b`, with `a → b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && self.reach[a][b])
            .collect()
    }

    /// Number of elements `a` reaches, itself included.
    fn down_size(&self, a: usize) -> usize {
        self.reach[a].iter().filter(|&&r| r).count()
    }
}

/// Mutual-reachability classes and the partial order they carry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quotient {
    pub poset: FinitePoset,
    /// Members of each class, ascending.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
}

pub fn quotient(p: &FinitePoset) -> Quotient {
    let n = p.len();
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if class_of[a] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (a..n).filter(|&b| p.equivalent(a, b)).collect();
        for &m in &members {
            class_of[m] = classes.len();
        }
        classes.push(members);
    }
    let k = classes.len();
    let reach = (0..k)
        .map(|i| (0..k).map(|j| p.reaches(classes[i][0], classes[j][0])).collect())
        .collect();
    let labels = classes
        .iter()
        .map(|c| c.iter().map(|&m| p.labels[m].as_str()).collect::<Vec<_>>().join("~"))
        .collect();
    Quotient {
        poset: FinitePoset { labels, reach },
        classes,
        class_of,
    }
}

/// A totally ordered subset with strictly increasing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub members: Vec<usize>,
    pub params: Vec<f64>,
}

impl Chain {
    /// Check that `ξ_{r_i} → ξ_{r_j}` holds exactly when `r_i ≥ r_j`.
    pub fn new(p: &FinitePoset, members: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if members.is_empty() || members.len() != params.len() {
            return Err(Error::InvalidChain(format!(
                "{} members with {} parameters",
                members.len(),
                params.len()
            )));
        }
        if let Some(&m) = members.iter().find(|&&m| m >= p.len()) {
            return Err(Error::InvalidChain(format!("member {m} outside the poset")));
        }
        if !params.iter().all(|r| r.is_finite()) || params.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidChain("parameters must be finite and strictly increasing".into()));
        }
        for i in 0..members.len() {
            for j in 0..members.len() {
                let expected = params[i] >= params[j];
                if p.reaches(members[i], members[j]) != expected {
                    return Err(Error::InvalidChain(format!(
                        "{} (r = {}) {} {} (r = {})",
                        p.labels[members[i]],
                        params[i],
                        if expected { "does not reach" } else { "reaches" },
                        p.labels[members[j]],
                        params[j]
                    )));
                }
            }
        }
        Ok(Self { members, params })
    }

    pub fn min_param(&self) -> f64 {
        self.params[0]
    }

    pub fn max_param(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    pub fn param_of(&self, element: usize) -> Option<f64> {
        self.members.iter().position(|&m| m == element).map(|i| self.params[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneValues {
    pub r_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
}

pub fn chain_monotones(p: &FinitePoset, c: &Chain) -> MonotoneValues {
    let pairs = c.members.iter().zip(&c.params);
    let r_minus = (0..p.len())
        .map(|psi| {
            pairs
                .clone()
                .filter(|(&m, _)| p.reaches(psi, m))
                .map(|(_, &r)| r)
                .fold(c.min_param(), f64::max)
        })
        .collect();
    let r_plus = (0..p.len())
        .map(|psi| {
            pairs
                .clone()
                .filter(|(&m, _)| p.reaches(m, psi))
                .map(|(_, &r)| r)
                .fold(c.max_param(), f64::min)
        })
        .collect();
    MonotoneValues { r_minus, r_plus }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `r⁻ ≤ r⁺`
    Ordered,
    /// `ψ → φ ⇒ r⁻(ψ) ≥ r⁻(φ)`
    MonotoneMinus,
    /// `ψ → φ ⇒ r⁺(ψ) ≥ r⁺(φ)`
    MonotonePlus,
    /// `r⁺(φ) < r⁻(ψ) ⇒ ψ → φ`
    Separation,
    /// `r⁻ ≤ R₀ ≤ r⁺` for every monotone `R₀` pinned to the chain
    Sandwich,
    /// In a total preorder `r⁻ = r⁺`, except for an element strictly between
    /// two neighbouring chain members, where they are those neighbours.
    Totality,
    /// ψ is incomparable to every `ξ_r` with `r⁻ < r < r⁺`
    Incomparability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub law: Law,
    pub elements: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub values: MonotoneValues,
    pub total: bool,
    pub monotones_sampled: usize,
    pub violations: Vec<Violation>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A random order-reversing map into `[min r, max r]` that agrees with the
/// chain parameters on chain members and is constant on classes.
///
/// Classes are assigned bottom-up; each draws from the interval left open by
/// what it reaches and by the chain members reaching it, with a quarter of
/// the draws landing on each endpoint so ties get exercised.
pub fn random_monotone<R: Rng>(p: &FinitePoset, c: &Chain, rng: &mut R) -> Vec<f64> {
    let q = quotient(p);
    let k = q.classes.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| q.poset.down_size(i));
    let mut value: Vec<Option<f64>> = vec![None; k];
    for &cls in &order {
        let pinned = q.classes[cls].iter().find_map(|&m| c.param_of(m));
        let v = match pinned {
            Some(r) => r,
            None => {
                let lo = (0..k)
                    .filter(|&d| d != cls && q.poset.reaches(cls, d))
                    .filter_map(|d| value[d])
                    .fold(c.min_param(), f64::max);
                let hi = c
                    .members
                    .iter()
                    .zip(&c.params)
                    .filter(|(&m, _)| p.reaches(m, q.classes[cls][0]))
                    .map(|(_, &r)| r)
                    .fold(c.max_param(), f64::min);
                match rng.random_range(0..4) {
                    0 => lo,
                    1 => hi,
                    _ => rng.random_range(lo..=hi),
                }
            }
        };
        value[cls] = Some(v);
    }
    (0..p.len()).map(|a| value[q.class_of[a]].unwrap_or(f64::NAN)).collect()
}

/// Check every law on `(p, c)`, drawing `trials_r0` monotones for the
/// sandwich law.
pub fn verify_monotone_laws<R: Rng>(p: &FinitePoset, c: &Chain, trials_r0: usize, rng: &mut R) -> LawReport {
    let v = chain_monotones(p, c);
    let (lo, hi) = (&v.r_minus, &v.r_plus);
    let n = p.len();
    let mut violations = Vec::new();
    let mut flag = |law: Law, elements: Vec<usize>, detail: String| violations.push(Violation { law, elements, detail });

    for a in 0..n {
        if lo[a] > hi[a] {
            flag(Law::Ordered, vec![a], format!("r- = {} > r+ = {}", lo[a], hi[a]));
        }
        for (&m, &r) in c.members.iter().zip(&c.params) {
            if lo[a] < r && r < hi[a] && p.comparable(a, m) {
                flag(Law::Incomparability, vec![a, m], format!("comparable to chain member at r = {r}"));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if p.reaches(a, b) {
                if lo[a] < lo[b] {
                    flag(Law::MonotoneMinus, vec![a, b], format!("{} < {}", lo[a], lo[b]));
                }
                if hi[a] < hi[b] {
                    flag(Law::MonotonePlus, vec![a, b], format!("{} < {}", hi[a], hi[b]));
                }
            } else if hi[b] < lo[a] {
                flag(Law::Separation, vec![a, b], format!("r+ = {} < r- = {} without a -> b", hi[b], lo[a]));
            }
        }
    }

    let total = p.is_total();
    if total {
        for a in 0..n {
            if lo[a] == hi[a] {
                continue;
            }
            let between_neighbours = c.params.windows(2).any(|w| w[0] == lo[a] && w[1] == hi[a])
                && !c.members.iter().any(|&m| p.equivalent(a, m));
            if !between_neighbours {
                flag(Law::Totality, vec![a], format!("r- = {} != r+ = {}", lo[a], hi[a]));
            }
        }
    }

    for _ in 0..trials_r0 {
        let r0 = random_monotone(p, c, rng);
        for a in 0..n {
            if !(lo[a] <= r0[a] && r0[a] <= hi[a]) {
                flag(Law::Sandwich, vec![a], format!("R0 = {} outside [{}, {}]", r0[a], lo[a], hi[a]));
            }
        }
    }

    LawReport {
        values: v,
        total,
        monotones_sampled: trials_r0,
        violations,
    }
}

/// Erdős–Rényi relation on `len` elements with edge probability `density`,
/// closed.
pub fn random_preorder<R: Rng>(len: usize, density: f64, rng: &mut R) -> FinitePoset {
    let edges: Vec<(usize, usize)> = (0..len)
        .flat_map(|a| (0..len).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .filter(|_| rng.random_bool(density))
        .collect();
    FinitePoset::from_edges(len, &edges).expect("edges are in range")
}

/// Random total preorder: elements placed on random levels, higher levels
/// reaching lower ones.
pub fn random_total_preorder<R: Rng>(len: usize, rng: &mut R) -> FinitePoset {
    let levels: Vec<usize> = (0..len).map(|_| rng.random_range(0..len.max(1))).collect();
    let edges: Vec<(usize, usize)> = (0..len)
        .flat_map(|a| (0..len).map(move |b| (a, b)))
        .filter(|&(a, b)| levels[a] >= levels[b])
        .collect();
    FinitePoset::from_edges(len, &edges).expect("edges are in range")
}

/// Random chain: a random maximal set of pairwise strictly comparable
/// classes, one representative each, with random increasing parameters.
/// With `every_class`, the poset must be total and each class contributes.
pub fn random_chain<R: Rng>(p: &FinitePoset, every_class: bool, rng: &mut R) -> Chain {
    let q = quotient(p);
    let mut order: Vec<usize> = (0..q.classes.len()).collect();
    order.shuffle(rng);
    let mut picked: Vec<usize> = Vec::new();
    for cls in order {
        if every_class || picked.iter().all(|&o| q.poset.comparable(cls, o)) {
            if every_class || rng.random_bool(0.8) || picked.is_empty() {
                picked.push(cls);
            }
        }
    }
    // lower classes reach fewer classes and get smaller parameters
    picked.sort_by_key(|&cls| q.poset.down_size(cls));
    let members: Vec<usize> = picked
        .iter()
        .map(|&cls| *q.classes[cls].choose(rng).expect("classes are nonempty"))
        .collect();
    let mut r = rng.random_range(-2.0..2.0);
    let params = members
        .iter()
        .map(|_| {
            let v = r;
            r += rng.random_range(0.1..1.0);
            v
        })
        .collect();
    Chain::new(p, members, params).expect("picked classes are pairwise comparable")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomLawConfig {
    pub trials: usize,
    pub max_elements: usize,
    pub monotones_per_trial: usize,
    pub seed: u64,
    /// Every `total_every`-th trial uses a total preorder whose chain meets
    /// every class; zero disables.
    pub total_every: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for RandomLawConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            max_elements: 8,
            monotones_per_trial: 20,
            seed: 0,
            total_every: 10,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub elements: usize,
    pub density: Option<f64>,
    pub total: bool,
    pub chain_len: usize,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomLawSummary {
    pub config: RandomLawConfig,
    pub trials: usize,
    pub total_trials: usize,
    pub violations: usize,
    /// Trials with at least one violation.
    pub failures: Vec<TrialOutcome>,
}

/// Random preorders with random chains; trial `i` is seeded from
/// `(seed, i)` alone, so results do not depend on scheduling.
pub fn random_law_trials(config: &RandomLawConfig) -> RandomLawSummary {
    let outcomes = config.exec.map_range(config.trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let len = rng.random_range(1..=config.max_elements.max(1));
        let total = config.total_every > 0 && i % config.total_every == config.total_every - 1;
        let (p, density) = if total {
            (random_total_preorder(len, &mut rng), None)
        } else {
            let d = 0.1 * (1 + i % 9) as f64;
            (random_preorder(len, d, &mut rng), Some(d))
        };
        let c = random_chain(&p, total, &mut rng);
        let report = verify_monotone_laws(&p, &c, config.monotones_per_trial, &mut rng);
        TrialOutcome {
            trial: i,
            elements: len,
            density,
            total: report.total,
            chain_len: c.members.len(),
            violations: report.violations,
        }
    });
    RandomLawSummary {
        config: config.clone(),
        trials: outcomes.len(),
        total_trials: outcomes.iter().filter(|o| o.total).count(),
        violations: outcomes.iter().map(|o| o.violations.len()).sum(),
        failures: outcomes.into_iter().filter(|o| !o.violations.is_empty()).collect(),
    }
}
