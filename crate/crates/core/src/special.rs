//! Physicists' Hermite polynomials and the gaussian derivative identities
//! built on them.
//!
//! Every analytic flow expression in the crate reduces to odd derivatives of
//! `exp(-a u^2)`, which are Hermite polynomials times the gaussian, and to the
//! odd part of the Hermite generating function
//! `sum_n H_n(x) t^n / n! = exp(2xt - t^2)`.

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

/// Highest Hermite order supported anywhere in the crate (η ≤ 30 in the flow series).
pub const MAX_HERMITE_ORDER: usize = 61;

// ln(f64::MAX)
const LN_MAX: f64 = 709.78;

/// Forward-recurrence evaluator for `H_n(x)` up to a fixed order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteEvaluator {
    max_order: usize,
}

impl Default for HermiteEvaluator {
    fn default() -> Self {
        Self {
            max_order: MAX_HERMITE_ORDER,
        }
    }
}

impl HermiteEvaluator {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order > MAX_HERMITE_ORDER {
            return Err(Error::OrderTooHigh {
                order: max_order,
                max: MAX_HERMITE_ORDER,
            });
        }
        Ok(Self { max_order })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `H_n(x)` by the three-term recurrence `H_{n+1} = 2x H_n - 2n H_{n-1}`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n, x)?;
        let (mut prev, mut cur) = (1.0, 2.0 * x);
        if n == 0 {
            return Ok(prev);
        }
        for m in 1..n {
            let next = 2.0 * x * cur - 2.0 * m as f64 * prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// `H_0(x) ..= H_n(x)` in one pass.
    pub fn table(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        self.check(n, x)?;
        let mut out = Vec::with_capacity(n + 1);
        out.push(1.0);
        if n >= 1 {
            out.push(2.0 * x);
        }
        for m in 1..n {
            out.push(2.0 * x * out[m] - 2.0 * m as f64 * out[m - 1]);
        }
        Ok(out)
    }

    fn check(&self, n: usize, x: f64) -> Result<()> {
        if n > self.max_order {
            return Err(Error::OrderTooHigh {
                order: n,
                max: self.max_order,
            });
        }
        ensure_finite("x", x)
    }
}

/// `H_n(x)` with the default (maximal) evaluator.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    HermiteEvaluator::default().eval(n, x)
}

/// Closed form of the odd Hermite series
/// `sum_{η≥0} t^{2η+1} / (2η+1)! · H_{2η+1}(x) = exp(-t²) · sinh(2xt)`.
///
/// `t` may be any complex number; the flow expressions only use real or
/// purely imaginary values. For `t = i s` the result is `i · exp(s²) · sin(2xs)`.
pub fn odd_hermite_generating(t: Complex64, x: f64) -> Result<Complex64> {
    ensure_finite("x", x)?;
    if !(t.re.is_finite() && t.im.is_finite()) {
        return Err(Error::InvalidInput(format!("t must be finite, got {t}")));
    }
    // |exp(-t²)| = exp(im² - re²); |sinh(2xt)| ≤ exp(|2x re|).
    let log_magnitude = t.im * t.im - t.re * t.re + (2.0 * x * t.re).abs();
    if log_magnitude > LN_MAX {
        return Err(Error::Range {
            what: "exp(-t^2)·sinh(2xt)",
            magnitude: log_magnitude.exp(),
        });
    }
    let value = (-t * t).exp() * (2.0 * x * t).sinh();
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Range {
            what: "exp(-t^2)·sinh(2xt)",
            magnitude: log_magnitude.exp(),
        })
    }
}

/// `∂_u^n exp(-a u²) = (-1)^n a^{n/2} H_n(√a u) exp(-a u²)` for odd `n`.
pub fn gaussian_odd_derivative(a: f64, order: usize, u: f64) -> Result<f64> {
    if order.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "gaussian_odd_derivative requires an odd order, got {order}"
        )));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "gaussian exponent must be positive, got {a}"
        )));
    }
    let root = a.sqrt();
    let h = hermite(order, root * u)?;
    Ok(-root.powi(order as i32) * h * (-a * u * u).exp())
}

/// All derivatives `∂_u^n exp(-a u²)` for `n = 0 ..= max_order`.
///
/// Uses the Hermite recurrence with the gaussian factor folded in from the
/// start, `D_{n+1} = -2au D_n - 2na D_{n-1}`, so values stay bounded on the
/// working domain instead of forming large `H_n` and tiny exponentials
/// separately.
pub fn gaussian_derivatives(a: f64, u: f64, max_order: usize) -> Result<Vec<f64>> {
    if max_order > MAX_HERMITE_ORDER {
        return Err(Error::OrderTooHigh {
            order: max_order,
            max: MAX_HERMITE_ORDER,
        });
    }
    ensure_finite("u", u)?;
    let mut out = Vec::with_capacity(max_order + 1);
    out.push((-a * u * u).exp());
    if max_order >= 1 {
        out.push(-2.0 * a * u * out[0]);
    }
    for n in 1..max_order {
        out.push(-2.0 * a * u * out[n] - 2.0 * n as f64 * a * out[n - 1]);
    }
    Ok(out)
}

/// Ratios `∂_u^n g / g` for `g = exp(-a u²)`, i.e. `(-1)^n a^{n/2} H_n(√a u)`.
pub(crate) fn gaussian_derivative_ratios(a: f64, u: f64, max_order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(1.0);
    if max_order >= 1 {
        out.push(-2.0 * a * u);
    }
    for n in 1..max_order {
        out.push(-2.0 * a * u * out[n] - 2.0 * n as f64 * a * out[n - 1]);
    }
    out
}
