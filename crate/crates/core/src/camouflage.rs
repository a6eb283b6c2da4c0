//! The cosh/cos Hamiltonian family whose squeezed gaussian ensemble has a
//! stationary quantum Wigner flow.
//!
//! ```text
//! V(x) = λ₁ cosh(ν₁x) + λ₂ cos(ν₂x)
//! K(k) = γ₁ cosh(μ₁k) + γ₂ cos(μ₂k)
//! ```
//!
//! With `μ₁ = e^{-2ζ}ν₂` and `μ₂ = e^{-2ζ}ν₁` the divergence of the quantum
//! current for `G_ζ` collapses to
//!
//! ```text
//! ∇·J = 2[ sin(μ₂k) sinh(ν₁x) (γ₂e^{-ν₁μ₂/4} + λ₁e^{+ν₁μ₂/4})
//!        - sinh(μ₁k) sin(ν₂x) (γ₁e^{+ν₂μ₁/4} + λ₂e^{-ν₂μ₁/4}) ] G_ζ(x, k)
//! ```
//!
//! and both brackets vanish for `λ₁ = -γ₂e^{-ν₁μ₂/2}`, `λ₂ = -γ₁e^{+ν₂μ₁/2}`.
//! The classical part of the flow is not stationary on its own; the quantum
//! corrections are what cancel it.

use serde::{Deserialize, Serialize};

use crate::ensemble::GaussianEnsemble;
use crate::error::{ensure_finite, Error, Result};
use crate::flow::{self, TruncationPolicy};
use crate::grid::{try_sweep, PhaseSpaceGrid};
use crate::hamiltonian::{SeparableHamiltonian, Term};

/// Default bound on `|ζ|`; cos frequencies scale as `e^{±2ζ}`.
pub const MAX_ABS_ZETA: f64 = 1.5;

/// Default certification tolerance for `max |∇·J|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Minimum grid nodes per period of a cos term.
pub const MIN_POINTS_PER_OSCILLATION: f64 = 8.0;

/// Relative tolerance for the frequency constraint check.
const FREQUENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CamouflageParams {
    pub zeta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Replacement potential amplitudes; used to probe the necessity of the
/// stationarity solution. Frequencies cannot be overridden.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaOverride {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

/// Derives `μ₁, μ₂, λ₁, λ₂` from the free parameters, with `|ζ| ≤ 1.5`.
pub fn solve_constraints(
    zeta: f64,
    gamma1: f64,
    gamma2: f64,
    nu1: f64,
    nu2: f64,
) -> Result<CamouflageParams> {
    CamouflageParams::solve(zeta, gamma1, gamma2, nu1, nu2, MAX_ABS_ZETA)
}

impl CamouflageParams {
    /// As [`solve_constraints`] with a caller-chosen bound on `|ζ|`.
    pub fn solve(
        zeta: f64,
        gamma1: f64,
        gamma2: f64,
        nu1: f64,
        nu2: f64,
        max_abs_zeta: f64,
    ) -> Result<Self> {
        ensure_finite("zeta", zeta)?;
        ensure_finite("gamma1", gamma1)?;
        ensure_finite("gamma2", gamma2)?;
        if zeta.abs() > max_abs_zeta {
            return Err(Error::InvalidInput(format!(
                "|zeta| = {} exceeds the bound {max_abs_zeta}",
                zeta.abs()
            )));
        }
        for (name, nu) in [("nu1", nu1), ("nu2", nu2)] {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be a positive frequency, got {nu}"
                )));
            }
        }
        let squeeze = (-2.0 * zeta).exp();
        let mu1 = squeeze * nu2;
        let mu2 = squeeze * nu1;
        Ok(Self {
            zeta,
            gamma1,
            gamma2,
            nu1,
            nu2,
            mu1,
            mu2,
            lambda1: -gamma2 * (-nu1 * mu2 / 2.0).exp(),
            lambda2: -gamma1 * (nu2 * mu1 / 2.0).exp(),
        })
    }

    /// The one-parameter family
    /// `V = -e^{-e^{-2ζ}/2} cosh(x) - γ cos(e^{2ζ}x)`,
    /// `K = γ e^{-e^{2ζ}/2} cosh(k) + cos(e^{-2ζ}k)`.
    pub fn simplified(zeta: f64, gamma: f64) -> Result<Self> {
        Self::simplified_with_bound(zeta, gamma, MAX_ABS_ZETA)
    }

    pub fn simplified_with_bound(zeta: f64, gamma: f64, max_abs_zeta: f64) -> Result<Self> {
        ensure_finite("gamma", gamma)?;
        ensure_finite("zeta", zeta)?;
        let gamma1 = gamma * (-(2.0 * zeta).exp() / 2.0).exp();
        Self::solve(zeta, gamma1, 1.0, 1.0, (2.0 * zeta).exp(), max_abs_zeta)
    }

    pub fn with_override(mut self, over: LambdaOverride) -> Self {
        if let Some(l1) = over.lambda1 {
            self.lambda1 = l1;
        }
        if let Some(l2) = over.lambda2 {
            self.lambda2 = l2;
        }
        self
    }

    /// The matched squeezed ensemble `G_ζ`.
    pub fn ensemble(&self) -> GaussianEnsemble {
        GaussianEnsemble::squeezed(self.zeta).expect("zeta validated at construction")
    }

    pub fn build_hamiltonian(&self) -> SeparableHamiltonian {
        SeparableHamiltonian::new(
            vec![
                Term::cosh(self.gamma1, self.mu1),
                Term::cos(self.gamma2, self.mu2),
            ],
            vec![
                Term::cosh(self.lambda1, self.nu1),
                Term::cos(self.lambda2, self.nu2),
            ],
        )
        .expect("camouflage terms are valid")
    }

    /// Checks `μ₁ = e^{-2ζ}ν₂`, `μ₂ = e^{-2ζ}ν₁`.
    pub fn check_frequency_constraint(&self) -> Result<()> {
        let squeeze = (-2.0 * self.zeta).exp();
        for (name, mu, nu) in [("mu1", self.mu1, self.nu2), ("mu2", self.mu2, self.nu1)] {
            let expected = squeeze * nu;
            if (mu - expected).abs() > FREQUENCY_TOL * expected.abs().max(1.0) {
                return Err(Error::Contract(format!(
                    "{name} = {mu} breaks the frequency constraint (expected {expected})"
                )));
            }
        }
        Ok(())
    }

    /// Requires at least [`MIN_POINTS_PER_OSCILLATION`] nodes per period of
    /// each cos term along its axis.
    pub fn check_grid_resolution(&self, grid: &PhaseSpaceGrid) -> Result<()> {
        for (name, freq, spacing) in [
            ("nu2", self.nu2, grid.x().spacing()),
            ("mu2", self.mu2, grid.k().spacing()),
        ] {
            let per_period = 2.0 * std::f64::consts::PI / (freq * spacing);
            if per_period < MIN_POINTS_PER_OSCILLATION {
                return Err(Error::GridTooSmall(format!(
                    "{name} = {freq:.4} gives {per_period:.2} points per oscillation \
                     (need {MIN_POINTS_PER_OSCILLATION}); refine the grid"
                )));
            }
        }
        Ok(())
    }

    /// The two bracket coefficients of the closed-form divergence,
    /// `(γ₂e^{-ν₁μ₂/4} + λ₁e^{ν₁μ₂/4}, γ₁e^{ν₂μ₁/4} + λ₂e^{-ν₂μ₁/4})`.
    pub fn residual_coefficients(&self) -> (f64, f64) {
        let p = self.nu1 * self.mu2 / 4.0;
        let q = self.nu2 * self.mu1 / 4.0;
        (
            self.gamma2 * (-p).exp() + self.lambda1 * p.exp(),
            self.gamma1 * q.exp() + self.lambda2 * (-q).exp(),
        )
    }

    /// Closed-form `∇·J^ζ` at `(x, k)`, evaluated term by term as written.
    pub fn divergence(&self, x: f64, k: f64, over: Option<LambdaOverride>) -> Result<f64> {
        self.check_frequency_constraint()?;
        ensure_finite("x", x)?;
        ensure_finite("k", k)?;
        let p = match over {
            Some(o) => self.with_override(o),
            None => *self,
        };
        let e1 = p.nu1 * p.mu2 / 4.0;
        let e2 = p.nu2 * p.mu1 / 4.0;
        let first = (p.mu2 * k).sin()
            * (p.nu1 * x).sinh()
            * (p.gamma2 * (-e1).exp() + p.lambda1 * e1.exp());
        let second = (p.mu1 * k).sinh()
            * (p.nu2 * x).sin()
            * (p.gamma1 * e2.exp() + p.lambda2 * (-e2).exp());
        Ok(2.0 * (first - second) * self.ensemble().eval(x, k))
    }
}

/// Camouflage divergence as a free function.
pub fn camouflage_divergence(
    params: &CamouflageParams,
    x: f64,
    k: f64,
    over: Option<LambdaOverride>,
) -> Result<f64> {
    params.divergence(x, k, over)
}

/// Location and size of the largest `|∇·J|` found by one evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMaximum {
    pub max_abs: f64,
    pub x: f64,
    pub k: f64,
}

impl PathMaximum {
    fn update(&mut self, value: f64, x: f64, k: f64) {
        if value.abs() > self.max_abs {
            *self = Self {
                max_abs: value.abs(),
                x,
                k,
            };
        }
    }
}

impl Default for PathMaximum {
    fn default() -> Self {
        Self {
            max_abs: 0.0,
            x: f64::NAN,
            k: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCertificate {
    pub params: CamouflageParams,
    pub grid: PhaseSpaceGrid,
    pub tolerance: f64,
    /// The bracket formula.
    pub closed_form: PathMaximum,
    /// Per-term resummation through the Hermite generating function.
    pub generating: PathMaximum,
    /// Truncated ħ-series.
    pub series: PathMaximum,
    /// Divergence of the classical Liouville currents for the same ensemble.
    pub classical: PathMaximum,
    pub max_pairwise_disagreement: f64,
    pub series_nonconverged_points: usize,
    pub series_terms_used_min: usize,
    pub series_terms_used_max: usize,
    pub series_terms_used_mean: f64,
    pub quantum_stationary: bool,
    pub classical_stationary: bool,
    pub certified: bool,
}

struct NodeRecord {
    x: f64,
    k: f64,
    closed: f64,
    generating: f64,
    series: f64,
    classical: f64,
    terms_used: usize,
    converged: bool,
}

/// Evaluates `∇·J^ζ` on every grid node by three independent routes and
/// certifies stationarity when all three stay within `tolerance` and the
/// series converged everywhere.
pub fn stationarity_certificate(
    params: &CamouflageParams,
    grid: &PhaseSpaceGrid,
    policy: &TruncationPolicy,
    tolerance: f64,
) -> Result<StationarityCertificate> {
    policy.validate()?;
    params.check_frequency_constraint()?;
    let h = params.build_hamiltonian();
    let w = params.ensemble();
    let records = try_sweep(grid, |x, k| {
        let closed = params.divergence(x, k, None)?;
        let generating = flow::div_j_closed_form(&w, &h, x, k)?;
        let (series, diag) = flow::stationarity_quantifier(&w, &h, x, k, policy)?;
        let classical = flow::classical_divergence(&w, &h, x, k)?;
        Ok(NodeRecord {
            x,
            k,
            closed,
            generating,
            series,
            classical,
            terms_used: diag.terms_used,
            converged: diag.converged,
        })
    })?;

    let mut closed_form = PathMaximum::default();
    let mut generating = PathMaximum::default();
    let mut series = PathMaximum::default();
    let mut classical = PathMaximum::default();
    let mut disagreement: f64 = 0.0;
    let mut nonconverged = 0;
    let (mut tmin, mut tmax, mut tsum) = (usize::MAX, 0, 0usize);
    for r in &records {
        closed_form.update(r.closed, r.x, r.k);
        generating.update(r.generating, r.x, r.k);
        series.update(r.series, r.x, r.k);
        classical.update(r.classical, r.x, r.k);
        disagreement = disagreement
            .max((r.closed - r.generating).abs())
            .max((r.closed - r.series).abs())
            .max((r.generating - r.series).abs());
        if !r.converged {
            nonconverged += 1;
        }
        tmin = tmin.min(r.terms_used);
        tmax = tmax.max(r.terms_used);
        tsum += r.terms_used;
    }
    let quantum_stationary = [closed_form, generating, series]
        .iter()
        .all(|m| m.max_abs <= tolerance);
    Ok(StationarityCertificate {
        params: *params,
        grid: *grid,
        tolerance,
        closed_form,
        generating,
        series,
        classical,
        max_pairwise_disagreement: disagreement,
        series_nonconverged_points: nonconverged,
        series_terms_used_min: tmin,
        series_terms_used_max: tmax,
        series_terms_used_mean: tsum as f64 / records.len() as f64,
        quantum_stationary,
        classical_stationary: classical.max_abs <= tolerance,
        certified: quantum_stationary && nonconverged == 0,
    })
}
