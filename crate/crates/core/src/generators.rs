//! Bregman generators from the Tsallis α-entropy family.
//!
//! For `α ∉ {0, 1}` the generator is `φ(x) = x^α / (α(α-1))` on `[0, 1]`, with
//! derivative `f(x) = x^(α-1) / (α-1)` and curvature `φ''(x) = x^(α-2)`. The
//! Shannon generator `φ(x) = x log x` is the `α → 1` member. The two limit
//! kinds (`α = ±∞`) have no usable `φ`; they only exist through their closed
//! form renormalizers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// α values this close to 1 are treated as Shannon.
pub const SHANNON_SNAP: f64 = 1e-9;

/// The value of `f = φ'` on `[0, 1]`, which is `-∞` at zero for singular
/// generators. The infinite case is only ever compared, never used in
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    NegInfinity,
    Finite(f64),
}

impl Slope {
    /// Shift by a finite amount; `-∞` absorbs the shift.
    pub fn shifted(self, by: f64) -> Slope {
        match self {
            Slope::NegInfinity => Slope::NegInfinity,
            Slope::Finite(v) => Slope::Finite(v + by),
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Slope::NegInfinity => None,
            Slope::Finite(v) => Some(v),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Slope::NegInfinity, Slope::NegInfinity) => Some(Ordering::Equal),
            (Slope::NegInfinity, Slope::Finite(_)) => Some(Ordering::Less),
            (Slope::Finite(_), Slope::NegInfinity) => Some(Ordering::Greater),
            (Slope::Finite(a), Slope::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for Slope {
    fn from(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            Slope::NegInfinity
        } else {
            Slope::Finite(v)
        }
    }
}

/// `x^e` with exact shortcuts for the exponents the common generators hit.
fn pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 1.5 {
        x * x.sqrt()
    } else if e == 3.0 {
        x * x * x
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `α ∉ {0, 1}`, finite.
    AlphaEntropy(f64),
    Shannon,
    LimitPlusInfinity,
    LimitMinusInfinity,
}

/// Which Bregman generator is in force. Immutable value data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
}

impl Generator {
    /// Builds the α-entropy generator. `α` within [`SHANNON_SNAP`] of 1 becomes
    /// Shannon and `±∞` become the limit kinds.
    pub fn alpha(alpha: f64) -> Result<Self> {
        if alpha.is_nan() {
            return Err(Error::Generator("alpha is NaN".into()));
        }
        if alpha == f64::INFINITY {
            return Ok(Self::plus_infinity());
        }
        if alpha == f64::NEG_INFINITY {
            return Ok(Self::minus_infinity());
        }
        if alpha == 0.0 {
            return Err(Error::Generator("alpha = 0 has no α-entropy generator".into()));
        }
        if (alpha - 1.0).abs() < SHANNON_SNAP {
            return Ok(Self::shannon());
        }
        Ok(Self {
            kind: GeneratorKind::AlphaEntropy(alpha),
        })
    }

    pub const fn shannon() -> Self {
        Self {
            kind: GeneratorKind::Shannon,
        }
    }

    pub const fn plus_infinity() -> Self {
        Self {
            kind: GeneratorKind::LimitPlusInfinity,
        }
    }

    pub const fn minus_infinity() -> Self {
        Self {
            kind: GeneratorKind::LimitMinusInfinity,
        }
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// The α parameter, with Shannon reported as 1.
    pub fn alpha_value(&self) -> f64 {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => a,
            GeneratorKind::Shannon => 1.0,
            GeneratorKind::LimitPlusInfinity => f64::INFINITY,
            GeneratorKind::LimitMinusInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(
            self.kind,
            GeneratorKind::LimitPlusInfinity | GeneratorKind::LimitMinusInfinity
        )
    }

    /// Convex and C¹ on `[0, 1]`, strictly convex inside.
    pub fn is_primal_valid(&self) -> bool {
        matches!(
            self.kind,
            GeneratorKind::AlphaEntropy(_) | GeneratorKind::Shannon
        )
    }

    /// Only `α > 1` satisfies the dual validity conditions.
    pub fn is_dual_valid(&self) -> bool {
        matches!(self.kind, GeneratorKind::AlphaEntropy(a) if a > 1.0)
    }

    /// Whether `f(0) = -∞`.
    pub fn is_singular_at_zero(&self) -> bool {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => a < 1.0,
            GeneratorKind::Shannon => true,
            _ => false,
        }
    }

    fn require_smooth(&self) -> Result<()> {
        if self.is_limit() {
            Err(Error::UnsupportedGenerator(self.to_string()))
        } else {
            Ok(())
        }
    }

    fn check_unit(what: &'static str, x: f64) -> Result<()> {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain { what, value: x })
        }
    }

    /// `φ(x)`, with `φ(0) = 0` for Shannon and `+∞` for `α < 0`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        self.require_smooth()?;
        Self::check_unit("phi", x)?;
        Ok(self.phi_unchecked(x))
    }

    /// `f(x) = φ'(x)`.
    pub fn f(&self, x: f64) -> Result<Slope> {
        self.require_smooth()?;
        Self::check_unit("f", x)?;
        Ok(self.slope_unchecked(x))
    }

    /// Inverse of `f` extended to the whole line by clamping to `[0, 1]`.
    ///
    /// Limit kinds have no `f`; for them this returns the clamp of `y` alone.
    pub fn f_inv_ext(&self, y: Slope) -> f64 {
        match y {
            Slope::NegInfinity => 0.0,
            Slope::Finite(v) if v.is_nan() => 0.0,
            Slope::Finite(v) => self.inv_slope_unchecked(v),
        }
    }

    /// `φ''(x)`; errors at 0 when the curvature is singular there.
    pub fn d2phi(&self, x: f64) -> Result<f64> {
        self.require_smooth()?;
        Self::check_unit("d2phi", x)?;
        if x == 0.0 {
            return match self.kind {
                GeneratorKind::AlphaEntropy(a) if a == 2.0 => Ok(1.0),
                GeneratorKind::AlphaEntropy(a) if a > 2.0 => Ok(0.0),
                _ => Err(Error::Domain {
                    what: "d2phi (singular at 0)",
                    value: x,
                }),
            };
        }
        Ok(self.curvature_unchecked(x))
    }

    /// One-dimensional Bregman divergence `φ(x) - φ(y) - φ'(y)(x - y)`.
    pub fn bregman_div(&self, x: f64, y: f64) -> Result<f64> {
        self.require_smooth()?;
        Self::check_unit("bregman_div x", x)?;
        Self::check_unit("bregman_div y", y)?;
        if x == y {
            return Ok(0.0);
        }
        match self.slope_unchecked(y) {
            Slope::NegInfinity => Err(Error::Domain {
                what: "bregman_div y (f(y) = -inf)",
                value: y,
            }),
            Slope::Finite(fy) => Ok(self.div_with_slope(x, y, fy)),
        }
    }

    /// Legendre dual `φ*(y) = y·x - φ(x)` with `x = f_inv_ext(y)`.
    pub fn conj(&self, y: f64) -> Result<f64> {
        self.require_smooth()?;
        if !y.is_finite() {
            return Err(Error::Domain { what: "conj", value: y });
        }
        let x = self.inv_slope_unchecked(y);
        Ok(y * x - self.phi_unchecked(x))
    }

    /// Primal tail contribution `d(0, y)` of a dropped coordinate.
    pub(crate) fn primal_tail(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        match self.slope_unchecked(y) {
            Slope::Finite(fy) => self.div_with_slope(0.0, y, fy),
            Slope::NegInfinity => f64::INFINITY,
        }
    }

    /// Dual tail contribution `d(y, 0) = φ(y)`, which relies on `φ'(0) = 0`.
    pub(crate) fn dual_tail(&self, y: f64) -> f64 {
        debug_assert_eq!(self.slope_unchecked(0.0), Slope::Finite(0.0));
        self.phi_unchecked(y)
    }

    pub(crate) fn div_with_slope(&self, x: f64, y: f64, fy: f64) -> f64 {
        let d = self.phi_unchecked(x) - self.phi_unchecked(y) - fy * (x - y);
        // Rounding can push a tiny divergence below zero.
        if d < 0.0 {
            0.0
        } else {
            d
        }
    }

    pub(crate) fn phi_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => {
                if x == 0.0 {
                    if a < 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    pow(x, a) / (a * (a - 1.0))
                }
            }
            GeneratorKind::Shannon => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            _ => f64::NAN,
        }
    }

    pub(crate) fn slope_unchecked(&self, x: f64) -> Slope {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => {
                if x == 0.0 {
                    if a < 1.0 {
                        Slope::NegInfinity
                    } else {
                        Slope::Finite(0.0)
                    }
                } else {
                    Slope::Finite(pow(x, a - 1.0) / (a - 1.0))
                }
            }
            GeneratorKind::Shannon => {
                if x == 0.0 {
                    Slope::NegInfinity
                } else {
                    Slope::Finite(x.ln() + 1.0)
                }
            }
            _ => Slope::Finite(f64::NAN),
        }
    }

    pub(crate) fn inv_slope_unchecked(&self, y: f64) -> f64 {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => {
                let am1 = a - 1.0;
                if y >= 1.0 / am1 {
                    return 1.0;
                }
                let base = am1 * y;
                if base <= 0.0 {
                    // Only reachable for α > 1 below f(0) = 0.
                    return 0.0;
                }
                base.powf(1.0 / am1).clamp(0.0, 1.0)
            }
            GeneratorKind::Shannon => {
                if y >= 1.0 {
                    1.0
                } else {
                    (y - 1.0).exp()
                }
            }
            _ => y.clamp(0.0, 1.0),
        }
    }

    pub(crate) fn curvature_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => pow(x, a - 2.0),
            GeneratorKind::Shannon => 1.0 / x,
            _ => f64::NAN,
        }
    }

    /// `ln φ''(x)` and its derivative `φ'''(x) / φ''(x)`, for `x > 0`.
    pub(crate) fn log_curvature_unchecked(&self, x: f64) -> (f64, f64) {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => ((a - 2.0) * x.ln(), (a - 2.0) / x),
            GeneratorKind::Shannon => (-x.ln(), -1.0 / x),
            _ => (f64::NAN, f64::NAN),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::AlphaEntropy(a) => write!(f, "alpha={a}"),
            GeneratorKind::Shannon => f.write_str("shannon"),
            GeneratorKind::LimitPlusInfinity => f.write_str("inf"),
            GeneratorKind::LimitMinusInfinity => f.write_str("-inf"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Accepts `shannon`, `inf`, `+inf`, `-inf` or a real number.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shannon" => Ok(Self::shannon()),
            "inf" | "+inf" | "infinity" => Ok(Self::plus_infinity()),
            "-inf" | "-infinity" => Ok(Self::minus_infinity()),
            other => {
                let a: f64 = other
                    .parse()
                    .map_err(|_| Error::Generator(format!("cannot parse alpha {s:?}")))?;
                Self::alpha(a)
            }
        }
    }
}
