#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sparse_bregman::{ProbVector, SubProbVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat Dirichlet draw via normalized exponentials.
pub fn dirichlet(rng: &mut impl Rng, v: usize) -> ProbVector {
    let w: Vec<f64> = (0..v).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-12).collect();
    let s: f64 = w.iter().sum();
    ProbVector::new(w.into_iter().map(|x| x / s).collect()).unwrap()
}

/// Softmax of Gaussian-ish logits with the given spread, shaped like a
/// language model's next-token distribution.
pub fn peaked(rng: &mut impl Rng, v: usize, spread: f64) -> ProbVector {
    let logits: Vec<f64> = (0..v)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            spread * (-2.0 * (1.0 - a).ln()).sqrt() * (std::f64::consts::TAU * b).cos()
        })
        .collect();
    sparse_bregman::logits_to_probs(&logits, 1.0).unwrap()
}

/// Random sub-probability vector with total mass in `[lo, hi)`.
pub fn sub_prob(rng: &mut impl Rng, k: usize, lo: f64, hi: f64) -> SubProbVector {
    let p = dirichlet(rng, k);
    let mass = rng.gen_range(lo..hi);
    SubProbVector::new(p.as_slice().iter().map(|x| x * mass).collect()).unwrap()
}

/// Indices of `p` by decreasing value, lowest index first on ties.
pub fn order_desc(p: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
