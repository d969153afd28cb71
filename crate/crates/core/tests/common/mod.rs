#![allow(dead_code)]

use entangle_order::spectra::SchmidtSpectrum;
use rand::Rng;

/// Partial sums `Σ_{i<k} λ_i` for `k = 1..=len`, summed left to right.
pub fn partial_sums(l: &[f64]) -> Vec<f64> {
    l.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// `a ≺ b` straight from the definition: every leading partial sum of `a`
/// is at most that of `b`, padding the shorter one with its total.
pub fn majorized_by(a: &[f64], b: &[f64], tol: f64) -> bool {
    let pa = partial_sums(a);
    let pb = partial_sums(b);
    let len = pa.len().max(pb.len());
    (0..len).all(|k| {
        let x = pa.get(k).or(pa.last()).copied().unwrap_or(0.0);
        let y = pb.get(k).or(pb.last()).copied().unwrap_or(0.0);
        x <= y + tol
    })
}

fn normalized_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Random spectrum of dimension `1..=max_dim`, drawn from one of three
/// shapes: continuous, dyadic (exact ties), or peaked.
pub fn random_lambdas<R: Rng>(rng: &mut R, max_dim: usize) -> Vec<f64> {
    let d = rng.random_range(1..=max_dim);
    match rng.random_range(0..3) {
        0 => normalized_desc((0..d).map(|_| rng.random_range(0.01..1.0)).collect()),
        1 => {
            // multiples of 1/64 are exact and so are their sums
            let mut units = vec![1u32; d];
            for _ in d..64 {
                units[rng.random_range(0..d)] += 1;
            }
            let mut v: Vec<f64> = units.iter().map(|&u| u as f64 / 64.0).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
        _ => {
            let head = rng.random_range(0.3..0.95);
            let mut v = vec![head];
            let rest = normalized_desc((1..d).map(|_| rng.random_range(0.01..1.0)).collect());
            v.extend(rest.iter().map(|x| x * (1.0 - head)));
            if d == 1 {
                v = vec![1.0];
            }
            normalized_desc(v)
        }
    }
}

/// Merge random adjacent coefficients of `a` and move mass upward, giving a
/// spectrum that majorizes `a`.
pub fn coarsened<R: Rng>(rng: &mut R, a: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    for _ in 0..rng.random_range(0..3) {
        if v.len() > 1 {
            let i = rng.random_range(0..v.len() - 1);
            let moved = v[i + 1] * rng.random_range(0.0..=1.0);
            v[i] += moved;
            v[i + 1] -= moved;
            v.sort_by(|a, b| b.total_cmp(a));
            while v.last() == Some(&0.0) {
                v.pop();
            }
        }
    }
    v
}

/// A related pair: independent, or the second derived from the first.
pub fn random_pair<R: Rng>(rng: &mut R, max_dim: usize) -> (Vec<f64>, Vec<f64>) {
    let a = random_lambdas(rng, max_dim);
    match rng.random_range(0..4) {
        0 => {
            let b = coarsened(rng, &a);
            (a, b)
        }
        1 => {
            let b = coarsened(rng, &a);
            (b, a)
        }
        2 => (a.clone(), a),
        _ => (a, random_lambdas(rng, max_dim)),
    }
}

pub fn spectrum(l: &[f64]) -> SchmidtSpectrum {
    SchmidtSpectrum::new(l).expect("test spectra are valid")
}
