//! Primal Bregman renormalization `[T(x)]_i = f⁻¹(f(x_i) + ν)`.
//!
//! The generic path solves for ν numerically. α ∈ {1, 1.5, 2} and the two
//! limits have closed forms that need no root finding.

use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorKind, Slope};
use crate::rootfind::{solve_monotone, Bracket, Tolerances};
use crate::simplex::{RenormResult, SubProbVector};

const CLOSED_FORM_SNAP: f64 = 1e-12;

/// Primal renormalization with the fastest applicable method.
pub fn renorm_primal(g: &Generator, x: &SubProbVector, tol: &Tolerances) -> Result<RenormResult> {
    match g.kind() {
        GeneratorKind::Shannon => renorm_alpha1(x),
        GeneratorKind::AlphaEntropy(a) if (a - 1.5).abs() < CLOSED_FORM_SNAP => Ok(renorm_alpha15(x)),
        GeneratorKind::AlphaEntropy(a) if (a - 2.0).abs() < CLOSED_FORM_SNAP => Ok(renorm_alpha2(x)),
        GeneratorKind::AlphaEntropy(_) => renorm_primal_generic_with(g, x, tol),
        GeneratorKind::LimitPlusInfinity => Ok(renorm_waterfill(x)),
        GeneratorKind::LimitMinusInfinity => renorm_minus_inf(x),
    }
}

/// Generic root-finding path with default tolerances.
pub fn renorm_primal_generic(g: &Generator, x: &SubProbVector) -> Result<RenormResult> {
    renorm_primal_generic_with(g, x, &Tolerances::default())
}

/// Solves `Σ f⁻¹(f(x_i) + ν) = 1` for ν on `(0, f(1) - f(max x)]`.
///
/// The search runs over `ln ν` so that `tol.outer` bounds the relative error
/// of ν. For large α the multiplier is many orders of magnitude below the
/// bracket width, and an absolute tolerance would not resolve it.
pub fn renorm_primal_generic_with(
    g: &Generator,
    x: &SubProbVector,
    tol: &Tolerances,
) -> Result<RenormResult> {
    if !g.is_primal_valid() {
        return Err(Error::Generator(format!("{g} is not primal valid")));
    }
    if x.is_on_simplex() {
        return Ok(RenormResult::identity(x));
    }
    let slopes: Vec<Slope> = x.as_slice().iter().map(|&v| g.slope_unchecked(v)).collect();
    let mass = |nu: f64| -> f64 { slopes.iter().map(|s| g.f_inv_ext(s.shifted(nu))).sum() };

    let f_max = g
        .slope_unchecked(x.max())
        .finite()
        .expect("max entry is positive");
    let f_one = g.slope_unchecked(1.0).finite().expect("f(1) is finite");
    let nu_hi = f_one - f_max;
    let nu_lo = f64::MIN_POSITIVE;
    if !(nu_hi > nu_lo) || mass(nu_lo) >= 1.0 {
        return Ok(RenormResult::identity(x));
    }

    // At ν = f(1) - f(max) the largest entry reaches 1 on its own, so the
    // mass there is at least 1 up to rounding. Accept the endpoint if
    // rounding leaves it just short.
    if mass(nu_hi) < 1.0 {
        let probs = slopes.iter().map(|s| g.f_inv_ext(s.shifted(nu_hi))).collect();
        return Ok(RenormResult { probs, nu: nu_hi });
    }
    // Some entry absorbs at least h = (1 - Σx) / k of the deficit, so ν is at
    // least the smallest slope increase over a step of h.
    let h = (1.0 - x.sum()) / x.len() as f64;
    let floor = x
        .as_slice()
        .iter()
        .zip(&slopes)
        .filter(|(&xi, _)| xi + h <= 1.0)
        .filter_map(|(&xi, s)| Some(g.slope_unchecked(xi + h).finite()? - s.finite()?))
        .fold(f64::INFINITY, f64::min);
    let nu_lo = tighten_floor(floor, nu_lo, |nu| mass(nu) < 1.0);
    let (ln_lo, ln_hi) = (nu_lo.ln(), nu_hi.ln());
    // Endpoints map back exactly; exp(ln ν) may round across the root.
    let at = |s: f64| {
        if s <= ln_lo {
            nu_lo
        } else if s >= ln_hi {
            nu_hi
        } else {
            s.exp()
        }
    };
    let bracket = Bracket::new(ln_lo, ln_hi, tol.outer)?;
    let root = solve_monotone(|s| mass(at(s)) - 1.0, &bracket, tol.method)?;
    let nu = at(root.x);
    let probs = slopes.iter().map(|s| g.f_inv_ext(s.shifted(nu))).collect();
    Ok(RenormResult { probs, nu })
}

/// Sum division, i.e. classic top-k. ν is reported as `ln(1/Σx)`.
pub fn renorm_alpha1(x: &SubProbVector) -> Result<RenormResult> {
    let s = x.sum();
    if s <= 0.0 {
        return Err(Error::Input("all entries are zero".into()));
    }
    if x.is_on_simplex() {
        return Ok(RenormResult::identity(x));
    }
    Ok(RenormResult {
        probs: x.as_slice().iter().map(|v| v / s).collect(),
        nu: -s.ln(),
    })
}

/// Closed form for α = 1.5: `(√x_i + (√(r² + k(1-s)) - r)/k)²` with
/// `r = Σ√x_j`, `s = Σx_j`. Here `f(x) = 2√x`, so ν is twice the shift.
pub fn renorm_alpha15(x: &SubProbVector) -> RenormResult {
    if x.is_on_simplex() {
        return RenormResult::identity(x);
    }
    let k = x.len() as f64;
    let s = x.sum();
    let r: f64 = x.as_slice().iter().map(|v| v.sqrt()).sum();
    let shift = ((r * r + k * (1.0 - s)).sqrt() - r) / k;
    RenormResult {
        probs: x
            .as_slice()
            .iter()
            .map(|v| {
                let t = v.sqrt() + shift;
                t * t
            })
            .collect(),
        nu: 2.0 * shift,
    }
}

/// Closed form for α = 2: a uniform additive shift `(1 - s)/k`.
pub fn renorm_alpha2(x: &SubProbVector) -> RenormResult {
    if x.is_on_simplex() {
        return RenormResult::identity(x);
    }
    let shift = (1.0 - x.sum()) / x.len() as f64;
    RenormResult {
        probs: x.as_slice().iter().map(|v| v + shift).collect(),
        nu: shift,
    }
}

/// α → ∞: raise every entry below the water level ν to ν.
pub fn renorm_waterfill(x: &SubProbVector) -> RenormResult {
    if x.is_on_simplex() {
        return RenormResult::identity(x);
    }
    let mut sorted = x.as_slice().to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = sorted.len();
    let mut kept_mass = 0.0;
    let mut level = None;
    for (m, &v) in sorted.iter().enumerate() {
        let candidate = (1.0 - kept_mass) / (k - m) as f64;
        if v <= candidate {
            level = Some(candidate);
            break;
        }
        kept_mass += v;
    }
    // Total mass below 1 guarantees some entry sits under the level.
    let nu = level.expect("sub-probability input has a water level");
    RenormResult {
        probs: x.as_slice().iter().map(|&v| v.max(nu)).collect(),
        nu,
    }
}

/// α → -∞: the whole deficit goes to the unique largest entry. ν is reported
/// as that deficit.
pub fn renorm_minus_inf(x: &SubProbVector) -> Result<RenormResult> {
    if x.is_on_simplex() {
        return Ok(RenormResult::identity(x));
    }
    let max = x.max();
    let mut winners = x.as_slice().iter().enumerate().filter(|(_, v)| **v == max);
    let (arg, _) = winners.next().expect("non-empty");
    if winners.next().is_some() {
        return Err(Error::Tie);
    }
    let deficit = 1.0 - x.sum();
    let mut probs = x.as_slice().to_vec();
    probs[arg] += deficit;
    Ok(RenormResult { probs, nu: deficit })
}

/// `floor` shaved for rounding, if it is a usable lower end for the ν
/// bracket; otherwise `fallback`.
pub(crate) fn tighten_floor(floor: f64, fallback: f64, below_root: impl Fn(f64) -> bool) -> f64 {
    let nu = floor * (1.0 - 1e-9);
    if nu.is_finite() && nu > fallback && below_root(nu) {
        nu
    } else {
        fallback
    }
}
