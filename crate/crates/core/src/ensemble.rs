//! Centered gaussian Wigner functions `√(ab)/π · exp(-a x² - b k²)`.
//!
//! `a = b = α²` is the isotropic ensemble; `a = e^{2ζ}`, `b = e^{-2ζ}` the
//! squeezed one. Both forms share this type.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::hamiltonian::UnitsMap;
use crate::special::{gaussian_derivatives, MAX_HERMITE_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    a: f64,
    b: f64,
}

impl GaussianEnsemble {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("x exponent", a), ("k exponent", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { a, b })
    }

    /// `(α²/π) exp(-α²(x² + k²))`
    pub fn isotropic(alpha: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        Self::new(alpha * alpha, alpha * alpha)
    }

    /// `(1/π) exp(-(e^{2ζ} x² + e^{-2ζ} k²))`
    pub fn squeezed(zeta: f64) -> Result<Self> {
        ensure_finite("zeta", zeta)?;
        Self::new((2.0 * zeta).exp(), (-2.0 * zeta).exp())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Squeeze parameter when the ensemble is a minimum-uncertainty (`ab = 1`) state.
    pub fn zeta(&self) -> Option<f64> {
        ((self.a * self.b - 1.0).abs() <= 1e-12).then(|| 0.5 * self.a.ln())
    }

    pub fn normalization(&self) -> f64 {
        (self.a * self.b).sqrt() / PI
    }

    /// Evaluated as a product of the two separable factors, which is how
    /// every derivative table in the crate builds `W`.
    pub fn eval(&self, x: f64, k: f64) -> f64 {
        self.normalization() * (-self.a * x * x).exp() * (-self.b * k * k).exp()
    }

    /// `∂_x^{order_x} ∂_k^{order_k} W` from the Hermite factors of each variable.
    pub fn partial(&self, order_x: usize, order_k: usize, x: f64, k: f64) -> Result<f64> {
        if order_x + order_k > MAX_HERMITE_ORDER {
            return Err(Error::OrderTooHigh {
                order: order_x + order_k,
                max: MAX_HERMITE_ORDER,
            });
        }
        let dx = gaussian_derivatives(self.a, x, order_x)?;
        let dk = gaussian_derivatives(self.b, k, order_k)?;
        Ok(self.normalization() * dx[order_x] * dk[order_k])
    }

    /// Same ensemble with the roles of `x` and `k` exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
        }
    }

    /// Position and momentum marginals.
    pub fn marginals(&self) -> (Marginal, Marginal) {
        (Marginal { exponent: self.a }, Marginal { exponent: self.b })
    }

    /// The ensemble in physical coordinates; requires the ζ form (`ab = 1`).
    pub fn physical_form(&self, units: UnitsMap) -> Result<PhysicalGaussian> {
        let zeta = self.zeta().ok_or_else(|| {
            Error::InvalidInput(format!(
                "physical form needs a squeezed ensemble with ab = 1, got a={} b={}",
                self.a, self.b
            ))
        })?;
        Ok(PhysicalGaussian { zeta, units })
    }
}

/// One-dimensional marginal density `√(c/π) exp(-c u²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    exponent: f64,
}

impl Marginal {
    pub fn density(&self, u: f64) -> f64 {
        (self.exponent / PI).sqrt() * (-self.exponent * u * u).exp()
    }

    pub fn variance(&self) -> f64 {
        0.5 / self.exponent
    }
}

/// `G_ζ(q, p) = (1/πħ) exp[-(1/ħ)(e^{2ζ} q²/A² + e^{-2ζ} A² p²)]`,
/// with `A = (mω)^{-1/2}` so that `ħ·G_ζ(q, p)` equals the dimensionless
/// ensemble at the mapped point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalGaussian {
    zeta: f64,
    units: UnitsMap,
}

impl PhysicalGaussian {
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn units(&self) -> UnitsMap {
        self.units
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        let hbar = self.units.planck();
        let width_sq = (self.units.mass() * self.units.angular_frequency()).recip();
        let exponent = (2.0 * self.zeta).exp() * q * q / width_sq
            + (-2.0 * self.zeta).exp() * width_sq * p * p;
        (-exponent / hbar).exp() / (PI * hbar)
    }
}
