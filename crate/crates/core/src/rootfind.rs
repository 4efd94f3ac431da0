//! Scalar root finding for nondecreasing functions on a bracket.
//!
//! Plain bisection is the reference method. [`RootMethod::Bracketed`] adds an
//! Illinois-style secant step that always stays inside the current bracket and
//! falls back to bisection whenever the bracket stops halving, so it keeps
//! bisection's guarantees while needing far fewer evaluations on smooth
//! functions.

use crate::error::{Error, Result};

/// Default tolerance for Lagrange multiplier solves.
pub const OUTER_TOL: f64 = 1e-12;
/// Default tolerance for the per-coordinate solves nested inside a ν solve.
pub const INNER_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub tol_x: f64,
    pub max_iter: usize,
}

impl Bracket {
    /// Builds a bracket whose iteration budget is enough for bisection to
    /// reach `tol_x`.
    pub fn new(lo: f64, hi: f64, tol_x: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Input(format!("invalid bracket [{lo}, {hi}]")));
        }
        if !(tol_x > 0.0) {
            return Err(Error::Input(format!("tolerance must be positive, got {tol_x}")));
        }
        Ok(Self {
            lo,
            hi,
            tol_x,
            max_iter: bisection_iterations(hi - lo, tol_x) + 2,
        })
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `ceil(log2(width / tol))`, the number of halvings bisection needs.
pub fn bisection_iterations(width: f64, tol: f64) -> usize {
    if width <= tol {
        0
    } else {
        (width / tol).log2().ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMethod {
    Bisection,
    #[default]
    Bracketed,
}

/// Tolerances and method for the ν solves of the renormalizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Width of the final bracket on `ln ν`, i.e. a relative tolerance on ν.
    pub outer: f64,
    /// Absolute tolerance of the per-coordinate dual solves.
    pub inner: f64,
    pub method: RootMethod,
}

impl Tolerances {
    /// Outer tolerance `tol`, inner ten times tighter.
    pub fn with_outer(tol: f64) -> Self {
        Self {
            outer: tol,
            inner: tol / 10.0,
            ..Self::default()
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            outer: OUTER_TOL,
            inner: INNER_TOL,
            method: RootMethod::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Loop iterations, not counting the two endpoint evaluations.
    pub iterations: usize,
}

/// Finds the crossing of a nondecreasing `f` with `f(lo) <= 0 <= f(hi)` by
/// bisection.
pub fn bisect_monotone<F: FnMut(f64) -> f64>(f: F, bracket: &Bracket) -> Result<f64> {
    bisect_monotone_counted(f, bracket).map(|r| r.x)
}

pub fn bisect_monotone_counted<F: FnMut(f64) -> f64>(mut f: F, b: &Bracket) -> Result<Root> {
    let f_lo = f(b.lo);
    let f_hi = f(b.hi);
    check_sign(f_lo, f_hi)?;
    if f_lo == 0.0 {
        return Ok(Root { x: b.lo, iterations: 0 });
    }
    let (mut lo, mut hi) = (b.lo, b.hi);
    let mut iterations = 0;
    while hi - lo > b.tol_x {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket is down to adjacent floats.
            break;
        }
        if iterations == b.max_iter {
            return Err(Error::Convergence(b.max_iter));
        }
        iterations += 1;
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}

/// Root of a nondecreasing function with the chosen method.
pub fn solve_monotone<F: FnMut(f64) -> f64>(f: F, b: &Bracket, method: RootMethod) -> Result<Root> {
    match method {
        RootMethod::Bisection => bisect_monotone_counted(f, b),
        RootMethod::Bracketed => bracketed_secant(f, b),
    }
}

fn check_sign(f_lo: f64, f_hi: f64) -> Result<()> {
    if f_lo <= 0.0 && f_hi >= 0.0 {
        Ok(())
    } else {
        Err(Error::Bracket { f_lo, f_hi })
    }
}

/// Illinois secant on a shrinking bracket, with a bisection step forced
/// whenever two consecutive steps fail to halve the bracket.
fn bracketed_secant<F: FnMut(f64) -> f64>(mut f: F, b: &Bracket) -> Result<Root> {
    let f_lo = f(b.lo);
    let f_hi = f(b.hi);
    check_sign(f_lo, f_hi)?;
    if f_lo == 0.0 {
        return Ok(Root { x: b.lo, iterations: 0 });
    }
    let (mut lo, mut hi) = (b.lo, b.hi);
    // Interpolation weights; the Illinois rule halves the one on a stale side.
    let (mut w_lo, mut w_hi) = (f_lo, f_hi);
    let mut last_side = 0i8;
    let budget = 4 * b.max_iter + 8;
    let mut iterations = 0;
    let mut checkpoint = hi - lo;
    let mut since_checkpoint = 0;
    let mut force_bisect = false;

    while hi - lo > b.tol_x {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if iterations == budget {
            return Err(Error::Convergence(budget));
        }
        iterations += 1;

        let mut x = mid;
        if !force_bisect && w_hi > w_lo {
            let s = lo - w_lo * width / (w_hi - w_lo);
            if s > lo && s < hi {
                x = s;
            }
        }
        force_bisect = false;
        let margin = 0.5 * b.tol_x;
        x = x.clamp(lo + margin, hi - margin);

        let fx = f(x);
        if fx == 0.0 {
            return Ok(Root { x, iterations });
        }
        if fx < 0.0 {
            lo = x;
            w_lo = fx;
            if last_side == -1 {
                w_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            w_hi = fx;
            if last_side == 1 {
                w_lo *= 0.5;
            }
            last_side = 1;
        }

        since_checkpoint += 1;
        if since_checkpoint == 2 {
            if hi - lo > 0.5 * checkpoint {
                force_bisect = true;
            }
            checkpoint = hi - lo;
            since_checkpoint = 0;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}

/// Safeguarded Newton for a nondecreasing `f` on a bracket known to satisfy
/// `f(lo) <= 0 <= f(hi)`; `f` returns the value and the derivative. Steps
/// that leave the bracket or fail to shrink fast enough are replaced by
/// bisection. Stops once a step is below `tol_x` or the bracket is.
pub fn newton_in_bracket<F: FnMut(f64) -> (f64, f64)>(mut f: F, b: &Bracket, x0: f64) -> Result<Root> {
    let (mut lo, mut hi) = (b.lo, b.hi);
    let mut x = if x0 >= lo && x0 <= hi { x0 } else { 0.5 * (lo + hi) };
    let mut step_old = hi - lo;
    let mut step = step_old;
    let budget = 4 * b.max_iter + 8;
    for iterations in 1..=budget {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(Root { x, iterations });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let usable = fx.is_finite()
            && dfx.is_finite()
            && dfx > 0.0
            && newton > lo
            && newton < hi
            && 2.0 * fx.abs() <= step_old.abs() * dfx;
        step_old = step;
        if usable {
            step = newton - x;
            x = newton;
        } else {
            step = 0.5 * (hi - lo);
            x = lo + step;
            if x <= lo || x >= hi {
                return Ok(Root { x, iterations });
            }
        }
        if step.abs() <= b.tol_x || hi - lo <= b.tol_x {
            return Ok(Root { x, iterations });
        }
    }
    Err(Error::Convergence(budget))
}
