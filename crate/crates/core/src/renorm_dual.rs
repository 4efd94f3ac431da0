//! Dual Bregman renormalization.
//!
//! Each output coordinate `y_i` solves `φ''(y)(y - x_i) = ν` on `[x_i, 1]`,
//! and ν is chosen so the outputs sum to one. Both levels are monotone root
//! problems: the inner residual is nondecreasing in `y` for dual-valid
//! generators, and `G(ν) = Σ y_i(ν)` is strictly increasing on `(0, M]` with
//! `M = φ''(1)(1 - max x)`.

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::renorm_primal::tighten_floor;
use crate::rootfind::{newton_in_bracket, solve_monotone, Bracket, RootMethod, Tolerances};
use crate::simplex::{RenormResult, SubProbVector};

/// One coordinate of the nested solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualInnerProblem {
    pub x_i: f64,
    pub nu: f64,
}

impl DualInnerProblem {
    /// `Ψ(x, y, ν) = φ''(y)(y - x) - ν`.
    pub fn residual(&self, g: &Generator, y: f64) -> f64 {
        lifted(g, self.x_i, y) - self.nu
    }
}

/// `φ''(y)(y - x)`, taken as 0 at `y = x` (this also covers `x = y = 0`,
/// where `y φ''(y) → 0` for dual-valid generators).
fn lifted(g: &Generator, x: f64, y: f64) -> f64 {
    if y <= x {
        0.0
    } else {
        g.curvature_unchecked(y) * (y - x)
    }
}

/// Solves the inner problem for `y ∈ [x_i, 1]`.
pub fn dual_inner_solve(g: &Generator, p: &DualInnerProblem, tol: f64) -> Result<f64> {
    dual_inner_solve_with(g, p, tol, RootMethod::default())
}

pub fn dual_inner_solve_with(
    g: &Generator,
    p: &DualInnerProblem,
    tol: f64,
    method: RootMethod,
) -> Result<f64> {
    if !g.is_dual_valid() {
        return Err(Error::Generator(format!("{g} is not dual valid")));
    }
    if !(0.0..=1.0).contains(&p.x_i) {
        return Err(Error::Domain {
            what: "dual inner x_i",
            value: p.x_i,
        });
    }
    let bound = g.curvature_unchecked(1.0) * (1.0 - p.x_i);
    if !(p.nu >= 0.0) || p.nu > bound {
        return Err(Error::Bracket {
            f_lo: -p.nu,
            f_hi: bound - p.nu,
        });
    }
    inner_root(g, p.x_i, p.nu, tol, method)
}

fn inner_root(g: &Generator, x: f64, nu: f64, tol: f64, method: RootMethod) -> Result<f64> {
    inner_root_warm(g, x, nu, tol, method, None)
}

/// Inner solve, optionally seeded with the solution `(ν', y')` of another
/// multiplier. Since `y(ν)` is increasing, `y'` bounds the root from below
/// when `ν' < ν` and from above otherwise.
fn inner_root_warm(
    g: &Generator,
    x: f64,
    nu: f64,
    tol: f64,
    method: RootMethod,
    hint: Option<(f64, f64)>,
) -> Result<f64> {
    if nu == 0.0 {
        return Ok(x);
    }
    if nu >= g.curvature_unchecked(1.0) * (1.0 - x) {
        return Ok(1.0);
    }
    if method == RootMethod::Bisection {
        let bracket = Bracket::new(x, 1.0, tol)?;
        return Ok(solve_monotone(|y| lifted(g, x, y) - nu, &bracket, method)?.x);
    }
    let a = g.alpha_value();
    if a == 2.0 {
        // φ'' ≡ 1
        return Ok((x + nu).min(1.0));
    }
    if x > 0.0 {
        // h(y) = φ''(y)(y - x) grows at least like min(φ''(x), φ''(1))(y - x)
        // on [x, 1], so the root is within this distance of x.
        let c = g.curvature_unchecked(x);
        let reach = nu / c.min(g.curvature_unchecked(1.0));
        if reach <= tol {
            return Ok(x + nu / c);
        }
    }
    let (mut lo, mut hi) = (x, 1.0f64);
    let start = match hint {
        Some((nu_h, y_h)) => {
            if nu_h < nu {
                lo = lo.max(y_h);
            } else {
                hi = hi.min(y_h);
            }
            // First-order prediction along the solution path.
            y_h + log_sensitivity(g, x, y_h) * (nu.ln() - nu_h.ln())
        }
        None if x > 0.0 => x + nu / g.curvature_unchecked(x),
        // y^(α-1) = ν on a zero entry.
        None => nu.powf(1.0 / (a - 1.0)),
    };
    if hi - lo <= tol {
        return Ok(0.5 * (lo + hi));
    }
    // ln φ''(y) + ln(y - x) - ln ν is increasing and concave on (x, 1], which
    // suits Newton far better than the raw residual.
    let ln_nu = nu.ln();
    let residual = |y: f64| {
        if y <= x {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let (lc, dlc) = g.log_curvature_unchecked(y);
        (lc + (y - x).ln() - ln_nu, dlc + 1.0 / (y - x))
    };
    let bracket = Bracket::new(lo, hi, tol)?;
    Ok(newton_in_bracket(residual, &bracket, start)?.x.clamp(x, 1.0))
}

/// `d y / d ln ν` at an interior solution `y` of the inner problem.
fn log_sensitivity(g: &Generator, x: f64, y: f64) -> f64 {
    if y <= x || y >= 1.0 {
        return 0.0;
    }
    let (_, dlc) = g.log_curvature_unchecked(y);
    1.0 / (dlc + 1.0 / (y - x))
}

/// Dual renormalization of `x` for a dual-valid generator.
pub fn renorm_dual(g: &Generator, x: &SubProbVector, tol: &Tolerances) -> Result<RenormResult> {
    if !g.is_dual_valid() {
        return Err(Error::Generator(format!("{g} is not dual valid")));
    }
    if x.sum() <= 0.0 {
        return Err(Error::Input("all entries are zero".into()));
    }
    if x.is_on_simplex() {
        return Ok(RenormResult::identity(x));
    }
    let entries = x.as_slice();
    let solve_all = |nu: f64, hint: Option<(f64, &[f64])>| -> Result<Vec<f64>> {
        entries
            .iter()
            .enumerate()
            .map(|(i, &xi)| inner_root_warm(g, xi, nu, tol.inner, tol.method, hint.map(|(n, ys)| (n, ys[i]))))
            .collect()
    };
    let mass = |nu: f64| -> f64 { solve_all(nu, None).map_or(f64::NAN, |ys| ys.iter().sum()) };

    let nu_hi = g.curvature_unchecked(1.0) * (1.0 - x.max());
    if !(nu_hi > f64::MIN_POSITIVE) {
        return Ok(RenormResult::identity(x));
    }
    // Some entry rises by at least h = (1 - Σx) / k, and φ''(y)(y - x) is
    // nondecreasing in y, which bounds ν from below.
    let h = (1.0 - x.sum()) / x.len() as f64;
    let floor = entries
        .iter()
        .filter(|&&xi| xi + h <= 1.0)
        .map(|&xi| g.curvature_unchecked(xi + h) * h)
        .fold(f64::INFINITY, f64::min);

    if tol.method == RootMethod::Bisection {
        if mass(f64::MIN_POSITIVE) >= 1.0 {
            return Ok(RenormResult::identity(x));
        }
        // At ν = M the largest coordinate saturates at 1, so G(M) ≥ 1 up to
        // the inner tolerance; accept M itself if rounding leaves G just short.
        if mass(nu_hi) < 1.0 {
            return Ok(RenormResult {
                probs: solve_all(nu_hi, None)?,
                nu: nu_hi,
            });
        }
        let nu_lo = tighten_floor(floor, f64::MIN_POSITIVE, |nu| mass(nu) < 1.0);
        let (ln_lo, ln_hi) = (nu_lo.ln(), nu_hi.ln());
        let at = |s: f64| endpoint_exact(s, ln_lo, ln_hi, nu_lo, nu_hi);
        let bracket = Bracket::new(ln_lo, ln_hi, tol.outer)?;
        let nu = at(solve_monotone(|s| mass(at(s)) - 1.0, &bracket, tol.method)?.x);
        return Ok(RenormResult {
            probs: solve_all(nu, None)?,
            nu,
        });
    }

    // Newton on ln ν from the floor, seeding each sweep of inner solves with
    // the last one. No sign checks up front: if rounding puts the root past an
    // end, the iterates just settle on that end.
    let nu_lo = if floor.is_finite() && floor > f64::MIN_POSITIVE {
        (floor * (1.0 - 1e-9)).clamp(f64::MIN_POSITIVE, nu_hi)
    } else {
        f64::MIN_POSITIVE
    };
    if nu_lo >= nu_hi {
        return Ok(RenormResult {
            probs: solve_all(nu_hi, None)?,
            nu: nu_hi,
        });
    }
    let (ln_lo, ln_hi) = (nu_lo.ln(), nu_hi.ln());
    let at = |s: f64| endpoint_exact(s, ln_lo, ln_hi, nu_lo, nu_hi);
    let bracket = Bracket::new(ln_lo, ln_hi, tol.outer)?;
    let mut last: Option<(f64, Vec<f64>)> = None;
    let outer = |s: f64| {
        let nu = at(s);
        let ys = match solve_all(nu, last.as_ref().map(|(n, ys)| (*n, ys.as_slice()))) {
            Ok(ys) => ys,
            Err(_) => return (f64::NAN, f64::NAN),
        };
        let value = ys.iter().sum::<f64>() - 1.0;
        let slope = entries.iter().zip(&ys).map(|(&xi, &y)| log_sensitivity(g, xi, y)).sum();
        last = Some((nu, ys));
        (value, slope)
    };
    let nu = at(newton_in_bracket(outer, &bracket, ln_lo)?.x);
    let probs = match last {
        Some((n, ys)) if n == nu => ys,
        other => solve_all(nu, other.as_ref().map(|(n, ys)| (*n, ys.as_slice())))?,
    };
    Ok(RenormResult { probs, nu })
}

/// Endpoints map back exactly; exp(ln ν) may round across the root.
fn endpoint_exact(s: f64, ln_lo: f64, ln_hi: f64, lo: f64, hi: f64) -> f64 {
    if s <= ln_lo {
        lo
    } else if s >= ln_hi {
        hi
    } else {
        s.exp()
    }
}
