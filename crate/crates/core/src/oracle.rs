//! Brute-force reference implementations for tests.
//!
//! Nothing here touches the closed-form renormalizers, the prefix-sum cost
//! model or the k search: supports are enumerated exhaustively, divergences
//! are summed over all `V` coordinates, and multipliers are found by dense
//! scans.

use crate::decoder::{cost_at_k, DecodeConfig, Mode};
use crate::error::{Error, Result};
use crate::generators::{Generator, Slope};
use crate::renorm_dual::renorm_dual;
use crate::renorm_primal::renorm_primal_generic_with;
use crate::simplex::{ProbVector, SubProbVector};

/// Largest `V` the exhaustive support search accepts.
pub const MAX_BRUTE_FORCE_V: usize = 12;

/// `d(a, b)` straight from the definition, using `φ'(b)`.
fn div(g: &Generator, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let phi_a = g.phi(a).expect("a in [0, 1]");
    let phi_b = g.phi(b).expect("b in [0, 1]");
    match g.f(b).expect("b in [0, 1]") {
        Slope::Finite(fb) => phi_a - phi_b - fb * (a - b),
        Slope::NegInfinity => f64::INFINITY,
    }
}

/// Objective of the sparse problem for the given support, with the kept
/// entries renormalized by the generic (root-finding) maps.
pub fn support_cost(p: &ProbVector, support: &[usize], cfg: &DecodeConfig) -> Result<f64> {
    let probs = p.as_slice();
    let x = SubProbVector::new(support.iter().map(|&i| probs[i]).collect())?;
    let g = &cfg.generator;
    let renormed = match cfg.mode {
        Mode::Primal => renorm_primal_generic_with(g, &x, &cfg.tol)?,
        Mode::Dual => renorm_dual(g, &x, &cfg.tol)?,
    };
    let mut estimate = vec![0.0; probs.len()];
    for (&i, &q) in support.iter().zip(&renormed.probs) {
        estimate[i] = q;
    }
    let divergence: f64 = estimate
        .iter()
        .zip(probs)
        .map(|(&e, &q)| match cfg.mode {
            Mode::Primal => div(g, e, q),
            Mode::Dual => div(g, q, e),
        })
        .sum();
    Ok(divergence + cfg.lambda * support.len() as f64)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Minimum-cost support of size `k` over all `C(V, k)` candidates. Returns
/// every support within `1e-12` of the minimum as well, first one being the
/// lexicographically smallest.
pub fn brute_force_best_support(p: &ProbVector, k: usize, cfg: &DecodeConfig) -> Result<(Vec<usize>, f64)> {
    let (all, cost) = brute_force_optimal_supports(p, k, cfg)?;
    Ok((all.into_iter().next().expect("at least one support"), cost))
}

/// All supports whose cost is within `1e-12` of the minimum.
pub fn brute_force_optimal_supports(
    p: &ProbVector,
    k: usize,
    cfg: &DecodeConfig,
) -> Result<(Vec<Vec<usize>>, f64)> {
    let v = p.len();
    if v > MAX_BRUTE_FORCE_V {
        return Err(Error::Size {
            size: v,
            limit: MAX_BRUTE_FORCE_V,
        });
    }
    if k == 0 || k > v {
        return Err(Error::Range {
            what: "k",
            value: k,
            lo: 1,
            hi: v,
        });
    }
    cfg.validate()?;
    let mut scored = Vec::new();
    for support in combinations(v, k) {
        // A support of all-zero entries has nothing to renormalize.
        if support.iter().all(|&i| p.as_slice()[i] == 0.0) {
            continue;
        }
        let c = support_cost(p, &support, cfg)?;
        scored.push((support, c));
    }
    let best = scored.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
    let optimal = scored
        .into_iter()
        .filter(|(_, c)| *c <= best + 1e-12)
        .map(|(s, _)| s)
        .collect();
    Ok((optimal, best))
}

/// Evaluates `cost(k)` for every admissible `k` and returns the smallest
/// minimizer.
pub fn linear_scan_k_star(p: &ProbVector, cfg: &DecodeConfig) -> Result<(usize, f64)> {
    let cap = cfg.k_cap(p.len());
    let mut best = (0, f64::INFINITY);
    for k in 1..=cap {
        let (c, _) = cost_at_k(p, k, cfg)?;
        if c < best.1 {
            best = (k, c);
        }
    }
    Ok(best)
}

/// Plain bisection for the dual coordinate `φ''(y)(y - x) = ν` on `[x, 1]`.
fn dual_coordinate(g: &Generator, x: f64, nu: f64) -> f64 {
    let psi = |y: f64| {
        if y <= x {
            -nu
        } else {
            g.d2phi(y).expect("y > 0") * (y - x) - nu
        }
    };
    if psi(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut a, mut b) = (x, 1.0);
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if psi(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sum of the renormalized entries at multiplier `nu`.
pub fn mass_at(g: &Generator, x: &SubProbVector, mode: Mode, nu: f64) -> f64 {
    match mode {
        Mode::Primal => x
            .as_slice()
            .iter()
            .map(|&xi| g.f_inv_ext(g.f(xi).expect("xi in [0, 1]").shifted(nu)))
            .sum(),
        Mode::Dual => x.as_slice().iter().map(|&xi| dual_coordinate(g, xi, nu)).sum(),
    }
}

/// The admissible multiplier range: `[0, f(1) - f(max x)]` for primal,
/// `[0, φ''(1)(1 - max x)]` for dual.
pub fn nu_range(g: &Generator, x: &SubProbVector, mode: Mode) -> Result<f64> {
    let max = x.max();
    match mode {
        Mode::Primal => {
            let hi = g.f(1.0)?.finite().expect("f(1) finite");
            let lo = g.f(max)?.finite().expect("max > 0");
            Ok(hi - lo)
        }
        Mode::Dual => {
            if !g.is_dual_valid() {
                return Err(Error::Generator(format!("{g} is not dual valid")));
            }
            Ok(g.d2phi(1.0)? * (1.0 - max))
        }
    }
}

/// Result of a dense scan of `Σ T_i(ν) - 1` over the admissible range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScan {
    /// First grid point with a nonnegative residual.
    pub crossing: f64,
    pub sign_changes: usize,
    pub step: f64,
}

/// Scans `ν = 0, step, 2·step, …` up to the top of the admissible range.
pub fn nu_grid(g: &Generator, x: &SubProbVector, mode: Mode, step: f64) -> Result<GridScan> {
    if !(step > 0.0) {
        return Err(Error::Input("step must be positive".into()));
    }
    let hi = nu_range(g, x, mode)?;
    let n = (hi / step).ceil() as usize;
    let mut crossing = None;
    let mut sign_changes = 0;
    let mut prev_nonneg = None;
    for i in 0..=n {
        let nu = (i as f64 * step).min(hi);
        let nonneg = mass_at(g, x, mode, nu) - 1.0 >= 0.0;
        if prev_nonneg.is_some_and(|p| p != nonneg) {
            sign_changes += 1;
        }
        if nonneg && crossing.is_none() {
            crossing = Some(nu);
        }
        prev_nonneg = Some(nonneg);
    }
    Ok(GridScan {
        crossing: crossing.unwrap_or(hi),
        sign_changes,
        step,
    })
}

/// The grid crossing of [`nu_grid`]; fails if the residual changes sign
/// more than once.
pub fn nu_grid_scan(g: &Generator, x: &SubProbVector, mode: Mode, step: f64) -> Result<f64> {
    let scan = nu_grid(g, x, mode, step)?;
    if scan.sign_changes > 1 {
        return Err(Error::MultipleCrossings(scan.sign_changes));
    }
    Ok(scan.crossing)
}
