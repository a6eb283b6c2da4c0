//! Wigner currents and their divergence for gaussian ensembles.
//!
//! In dimensionless units the currents are the ħ-series
//!
//! ```text
//! J_x = +Σ_η (i/2)^{2η} / (2η+1)! · ∂_k^{2η+1}K · ∂_x^{2η} W
//! J_k = -Σ_η (i/2)^{2η} / (2η+1)! · ∂_x^{2η+1}V · ∂_k^{2η} W
//! ```
//!
//! and `∇·J = -∂_t W` is the stationarity quantifier. The factor
//! `(i/2)^{2η} = (-1)^η / 4^η` is carried as a real coefficient; every
//! term is real.
//!
//! For cosh/cos terms the odd-derivative series resums through the odd
//! Hermite generating function (see [`div_j_closed_form`]).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::GaussianEnsemble;
use crate::error::{ensure_finite, Error, Result};
use crate::hamiltonian::{SeparableHamiltonian, Term};
use crate::special::{
    gaussian_derivative_ratios, gaussian_derivatives, odd_hermite_generating, MAX_HERMITE_ORDER,
};

/// Largest η any series may reach (Hermite order 2η+1 ≤ 61).
pub const MAX_ETA: usize = (MAX_HERMITE_ORDER - 1) / 2;

/// Points with `W < MASK_RATIO · max W` are not evaluated by the
/// Liouvillianity quantifier.
pub const MASK_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub eta_max: usize,
    pub term_rel_tol: f64,
    pub term_abs_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            eta_max: 30,
            term_rel_tol: 1e-14,
            term_abs_tol: 1e-300,
        }
    }
}

impl TruncationPolicy {
    pub fn with_eta_max(eta_max: usize) -> Result<Self> {
        let policy = Self {
            eta_max,
            ..Self::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_max < 1 || self.eta_max > MAX_ETA {
            return Err(Error::InvalidInput(format!(
                "eta_max must lie in 1..={MAX_ETA}, got {}",
                self.eta_max
            )));
        }
        if !(self.term_rel_tol > 0.0 && self.term_abs_tol > 0.0) {
            return Err(Error::InvalidInput(
                "truncation tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    fn max_order(&self) -> usize {
        2 * self.eta_max + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub terms_used: usize,
    pub last_term_magnitude: f64,
    pub converged: bool,
}

impl FlowDiagnostics {
    fn merge(self, other: Self) -> Self {
        Self {
            terms_used: self.terms_used.max(other.terms_used),
            last_term_magnitude: self.last_term_magnitude.max(other.last_term_magnitude),
            converged: self.converged && other.converged,
        }
    }
}

/// `(-1)^η / (4^η (2η+1)!)` for η = 0 ..= MAX_ETA.
fn series_coefficients() -> &'static [f64; MAX_ETA + 1] {
    static COEFFS: std::sync::OnceLock<[f64; MAX_ETA + 1]> = std::sync::OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; MAX_ETA + 1];
        c[0] = 1.0;
        for eta in 1..=MAX_ETA {
            let n = 2 * eta + 1;
            c[eta] = -c[eta - 1] / (4.0 * ((n - 1) * n) as f64);
        }
        c
    })
}

/// Number of η values whose odd derivative order 2η+1 can be nonzero.
fn eta_limit(highest_odd_order: Option<usize>) -> Option<usize> {
    highest_odd_order.map(|h| if h == 0 { 0 } else { h.div_ceil(2) })
}

fn combine_limits(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    }
}

/// Sums `term(first) + term(first + 1) + ...` under the policy.
///
/// A series is converged when two consecutive terms fall below the relative
/// tolerance (scaled by the larger of the partial sum and the largest term
/// seen) or the absolute floor, or when the Hamiltonian has no further
/// nonzero derivatives.
fn sum_series(
    policy: &TruncationPolicy,
    first: usize,
    limit: Option<usize>,
    mut term: impl FnMut(usize) -> f64,
) -> (f64, FlowDiagnostics) {
    let cap = policy.eta_max + 1;
    let end = limit.map_or(cap, |l| l.min(cap));
    let exhausted = limit.is_some_and(|l| l <= cap);
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut small_run = 0;
    let mut diag = FlowDiagnostics {
        terms_used: 0,
        last_term_magnitude: 0.0,
        converged: false,
    };
    for eta in first..end {
        let t = term(eta);
        sum += t;
        largest = largest.max(t.abs());
        diag.terms_used += 1;
        diag.last_term_magnitude = t.abs();
        let scale = sum.abs().max(largest);
        if t.abs() <= policy.term_abs_tol || t.abs() <= policy.term_rel_tol * scale {
            small_run += 1;
            if small_run >= 2 {
                diag.converged = true;
                break;
            }
        } else {
            small_run = 0;
        }
    }
    if exhausted {
        diag.converged = true;
    }
    (sum, diag)
}

/// Gaussian derivative tables at one phase-space point.
struct PointState {
    dx: Vec<f64>,
    dk: Vec<f64>,
    norm: f64,
}

impl PointState {
    fn new(w: &GaussianEnsemble, x: f64, k: f64, max_order: usize) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("k", k)?;
        Ok(Self {
            dx: gaussian_derivatives(w.a(), x, max_order)?,
            dk: gaussian_derivatives(w.b(), k, max_order)?,
            norm: w.normalization(),
        })
    }

    fn w_partial(&self, ox: usize, ok: usize) -> f64 {
        self.norm * self.dx[ox] * self.dk[ok]
    }
}

/// The η-th terms `(J_x^(η), J_k^(η))` of the current series.
pub fn current_terms(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    eta: usize,
) -> Result<(f64, f64)> {
    if eta > MAX_ETA {
        return Err(Error::OrderTooHigh {
            order: 2 * eta + 1,
            max: MAX_HERMITE_ORDER,
        });
    }
    let state = PointState::new(w, x, k, 2 * eta)?;
    let c = series_coefficients()[eta];
    let n = 2 * eta + 1;
    Ok((
        c * h.kinetic_odd_derivative(n, k)? * state.w_partial(2 * eta, 0),
        -c * h.potential_odd_derivative(n, x)? * state.w_partial(0, 2 * eta),
    ))
}

/// `J_x` at `(x, k)`.
pub fn current_x_series(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, FlowDiagnostics)> {
    policy.validate()?;
    let state = PointState::new(w, x, k, policy.max_order())?;
    let c = series_coefficients();
    let limit = eta_limit(h.kinetic_highest_odd_order());
    Ok(sum_series(policy, 0, limit, |eta| {
        let n = 2 * eta + 1;
        c[eta] * kinetic_derivative(h, n, k) * state.w_partial(2 * eta, 0)
    }))
}

/// `J_k` at `(x, k)`.
pub fn current_k_series(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, FlowDiagnostics)> {
    policy.validate()?;
    let state = PointState::new(w, x, k, policy.max_order())?;
    let c = series_coefficients();
    let limit = eta_limit(h.potential_highest_odd_order());
    Ok(sum_series(policy, 0, limit, |eta| {
        let n = 2 * eta + 1;
        -c[eta] * potential_derivative(h, n, x) * state.w_partial(0, 2 * eta)
    }))
}

/// `∂_x J_x`, the kinetic contribution to `∇·J`.
pub fn div_jx_series(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, FlowDiagnostics)> {
    policy.validate()?;
    let state = PointState::new(w, x, k, policy.max_order())?;
    let c = series_coefficients();
    let limit = eta_limit(h.kinetic_highest_odd_order());
    Ok(sum_series(policy, 0, limit, |eta| {
        let n = 2 * eta + 1;
        c[eta] * kinetic_derivative(h, n, k) * state.w_partial(n, 0)
    }))
}

/// `∂_k J_k`, the potential contribution to `∇·J`.
pub fn div_jk_series(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, FlowDiagnostics)> {
    policy.validate()?;
    let state = PointState::new(w, x, k, policy.max_order())?;
    let c = series_coefficients();
    let limit = eta_limit(h.potential_highest_odd_order());
    Ok(sum_series(policy, 0, limit, |eta| {
        let n = 2 * eta + 1;
        -c[eta] * potential_derivative(h, n, x) * state.w_partial(0, n)
    }))
}

/// `∇·J = ∂_x J_x + ∂_k J_k = -∂_t W`; zero where the Wigner function is stationary.
pub fn stationarity_quantifier(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<(f64, FlowDiagnostics)> {
    let (jx, dx) = div_jx_series(w, h, x, k, policy)?;
    let (jk, dk) = div_jk_series(w, h, x, k, policy)?;
    Ok((jx + jk, dx.merge(dk)))
}

/// `∇·J` resummed term by term through the odd Hermite generating function.
///
/// Each cosh/cos term factorizes as `∂^{2η+1} term = σ^{2η+1} κ(u)`, which
/// turns the kinetic contribution into
/// `Re[2i κ(k) W G(iσ√a/2, √a x)]` and the potential contribution into
/// `Re[-2i υ(x) W G(iσ√b/2, √b k)]`, with `G(t, y) = e^{-t²} sinh(2yt)`.
pub fn div_j_closed_form(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
) -> Result<f64> {
    ensure_finite("x", x)?;
    ensure_finite("k", k)?;
    let g = w.eval(x, k);
    let (ra, rb) = (w.a().sqrt(), w.b().sqrt());
    let i = Complex64::i();
    let mut total = 0.0;
    for term in h.kinetic_terms() {
        let (scale, carrier) = factorize(term, k)?;
        let gen = odd_hermite_generating(i * scale * ra / 2.0, ra * x)?;
        total += (2.0 * i * carrier * gen).re * g;
    }
    for term in h.potential_terms() {
        let (scale, carrier) = factorize(term, x)?;
        let gen = odd_hermite_generating(i * scale * rb / 2.0, rb * k)?;
        total += (-2.0 * i * carrier * gen).re * g;
    }
    Ok(total)
}

fn factorize(term: &Term, u: f64) -> Result<(Complex64, Complex64)> {
    term.odd_factorization(u)
        .ok_or_else(|| Error::UnsupportedTerm(term.name().to_string()))
}

/// Classical Liouville currents `((∂_k H) W, -(∂_x H) W)`.
pub fn classical_currents(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
) -> Result<(f64, f64)> {
    let (vx, vk) = h.classical_velocity(x, k)?;
    let value = w.eval(x, k);
    Ok((vx * value, vk * value))
}

/// Divergence of the classical currents, `∂_k K · ∂_x W - ∂_x V · ∂_k W`.
pub fn classical_divergence(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
) -> Result<f64> {
    let (vx, vk) = h.classical_velocity(x, k)?;
    Ok(vx * w.partial(1, 0, x, k)? + vk * w.partial(0, 1, x, k)?)
}

/// `∇·w` for `w = J/W`, the quantum (η ≥ 1) part of the flow:
///
/// ```text
/// Σ_{η≥1} (-1)^η / (4^η (2η+1)!) { ∂^{2η+1}K · ∂_x[∂_x^{2η}W / W] - ∂^{2η+1}V · ∂_k[∂_k^{2η}W / W] }
/// ```
///
/// The inner derivative uses the quotient rule
/// `∂_x[∂^{2η}W / W] = ∂^{2η+1}W / W - (∂W / W)(∂^{2η}W / W)`, and for a
/// gaussian each ratio is a Hermite polynomial, so no division by `W` is
/// performed. Returns `None` at masked points where `W < 1e-12 · max W`.
pub fn liouvillianity_quantifier(
    w: &GaussianEnsemble,
    h: &SeparableHamiltonian,
    x: f64,
    k: f64,
    policy: &TruncationPolicy,
) -> Result<Option<(f64, FlowDiagnostics)>> {
    policy.validate()?;
    ensure_finite("x", x)?;
    ensure_finite("k", k)?;
    if w.eval(x, k) < MASK_RATIO * w.normalization() {
        return Ok(None);
    }
    let max_order = policy.max_order();
    let rx = gaussian_derivative_ratios(w.a(), x, max_order);
    let rk = gaussian_derivative_ratios(w.b(), k, max_order);
    let c = series_coefficients();
    let limit = combine_limits(
        eta_limit(h.kinetic_highest_odd_order()),
        eta_limit(h.potential_highest_odd_order()),
    );
    Ok(Some(sum_series(policy, 1, limit, |eta| {
        let n = 2 * eta + 1;
        let qx = rx[n] - rx[1] * rx[n - 1];
        let qk = rk[n] - rk[1] * rk[n - 1];
        c[eta] * (kinetic_derivative(h, n, k) * qx - potential_derivative(h, n, x) * qk)
    })))
}

fn kinetic_derivative(h: &SeparableHamiltonian, order: usize, k: f64) -> f64 {
    h.kinetic_terms()
        .iter()
        .map(|t| t.odd_derivative_unchecked(order, k))
        .sum()
}

fn potential_derivative(h: &SeparableHamiltonian, order: usize, x: f64) -> f64 {
    h.potential_terms()
        .iter()
        .map(|t| t.odd_derivative_unchecked(order, x))
        .sum()
}
