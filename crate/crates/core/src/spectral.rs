//! Sampled wavefunctions, the discrete Weyl-Wigner transform and
//! pseudospectral application of `K(p̂) + V(x̂)`.
//!
//! Conventions: `p̂ = -i d/dx`, `φ(k) = (2π)^{-1/2} ∫ψ(x) e^{-ikx} dx` and
//! `W(x, k) = π^{-1} ∫ds e^{2iks} ψ(x - s) ψ*(x + s)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::camouflage::CamouflageParams;
use crate::error::{ensure_finite, Error, Result};
use crate::grid::{Axis, PhaseSpaceGrid, ScalarField};
use crate::hamiltonian::SeparableHamiltonian;

/// Edge density must stay below this fraction of the peak density.
pub const TAIL_RATIO: f64 = 1e-12;

/// Relative noise level above which operator output is flagged.
pub const PRECISION_WARNING_RATIO: f64 = 1e-8;

/// Allowed mismatch between the momentum marginal and `|φ(k)|²`.
pub const MARGINAL_TOL: f64 = 1e-8;

/// Default spectral axis: `[-12, 12)` with 2048 points.
pub fn default_spectral_axis() -> Axis {
    Axis::symmetric(12.0, 2048).expect("static axis is valid")
}

/// Complex samples on a position axis, normalized so `Σ|ψ|² dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    axis: Axis,
    samples: Vec<Complex64>,
    raw_norm: f64,
}

impl Wavefunction {
    /// Normalizes `samples` and checks tail containment on `|ψ|²`.
    pub fn from_samples(axis: Axis, mut samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != axis.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for an axis of {} points",
                samples.len(),
                axis.len()
            )));
        }
        if samples
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite wavefunction sample".into()));
        }
        let dx = axis.spacing();
        let raw_norm = (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
        if raw_norm == 0.0 {
            return Err(Error::InvalidInput(
                "wavefunction is identically zero".into(),
            ));
        }
        let peak = samples.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let edge = samples[0]
            .norm_sqr()
            .max(samples[samples.len() - 1].norm_sqr());
        if edge >= TAIL_RATIO * peak {
            return Err(Error::GridTooSmall(format!(
                "edge density is {:.3e} of the peak (limit {TAIL_RATIO:e}); widen the axis",
                edge / peak
            )));
        }
        for z in &mut samples {
            *z /= raw_norm;
        }
        Ok(Self {
            axis,
            samples,
            raw_norm,
        })
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// L2 norm of the samples before normalization.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.samples, self.axis.spacing())
    }

    /// `(∫x|ψ|², ∫x²|ψ|² - mean²)`.
    pub fn position_moments(&self) -> (f64, f64) {
        let dx = self.axis.spacing();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (x, z) in self.axis.points().zip(&self.samples) {
            let p = z.norm_sqr() * dx;
            m1 += x * p;
            m2 += x * x * p;
        }
        (m1, m2 - m1 * m1)
    }

    /// `φ(k)` by direct quadrature.
    pub fn momentum_amplitude(&self, k: f64) -> Complex64 {
        let dx = self.axis.spacing();
        let s: Complex64 = self
            .axis
            .points()
            .zip(&self.samples)
            .map(|(x, z)| z * Complex64::from_polar(1.0, -k * x))
            .sum();
        s * dx / (2.0 * PI).sqrt()
    }
}

/// `ψ_ζ(x) = (e^{2ζ}/π)^{1/4} exp(-e^{2ζ}x²/2)` sampled on `axis`.
pub fn squeezed_vacuum_wavefunction(zeta: f64, axis: &Axis) -> Result<Wavefunction> {
    ensure_finite("zeta", zeta)?;
    let a = (2.0 * zeta).exp();
    let c = (a / PI).powf(0.25);
    let samples = axis
        .points()
        .map(|x| Complex64::new(c * (-0.5 * a * x * x).exp(), 0.0))
        .collect();
    Wavefunction::from_samples(*axis, samples)
}

fn l2_norm(v: &[Complex64], dx: f64) -> f64 {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerTransform {
    /// `W` on the wavefunction's x-axis times the FFT-natural k-axis
    /// (`dk = π/(N dx)`, `k_j = j·dk` for `j = -N/2 .. N/2-1`).
    pub field: ScalarField,
    /// Largest `|Im W|` before the real part is taken.
    pub max_imaginary: f64,
    /// `max_x |∫W dk - |ψ(x)|²|`.
    pub x_marginal_error: f64,
    /// `max_k |∫W dx - |φ(k)|²|`.
    pub k_marginal_error: f64,
    /// `∬W dx dk`.
    pub total: f64,
}

/// Discrete Wigner transform: trapezoid quadrature in the shift variable
/// on grid-aligned shifts, evaluated for all k at once by FFT.
///
/// Both marginals are checked; a momentum-marginal mismatch above
/// [`MARGINAL_TOL`] indicates aliasing and is returned as an error.
pub fn wigner_transform(psi: &Wavefunction) -> Result<WignerTransform> {
    let axis = psi.axis();
    let n = axis.len();
    let dx = axis.spacing();
    let dk = PI / (n as f64 * dx);
    let half = (n / 2) as i64;
    let k_axis = Axis::new(-(half as f64) * dk, (n as i64 - half) as f64 * dk, n)?;
    let grid = PhaseSpaceGrid::new(*axis, k_axis);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let s = psi.samples();

    let mut values = vec![0.0; n * n];
    let mut max_imaginary: f64 = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for (m, slot) in buf.iter_mut().enumerate() {
            // shift index in [-N/2, N/2)
            let shift = if (m as i64) < half {
                m as i64
            } else {
                m as i64 - n as i64
            };
            let lo = i as i64 - shift;
            let hi = i as i64 + shift;
            *slot = if lo >= 0 && hi >= 0 && (lo as usize) < n && (hi as usize) < n {
                s[lo as usize] * s[hi as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (jj, z) in buf.iter().enumerate() {
            // frequency index jj maps to k-axis slot
            let j = (jj + half as usize) % n;
            let w = z * (dx / PI);
            max_imaginary = max_imaginary.max(w.im.abs());
            values[i * n + j] = w.re;
        }
    }

    let mut x_marginal_error: f64 = 0.0;
    for (i, z) in s.iter().enumerate() {
        let row: f64 = values[i * n..(i + 1) * n].iter().sum::<f64>() * dk;
        x_marginal_error = x_marginal_error.max((row - z.norm_sqr()).abs());
    }
    let mut k_marginal_error: f64 = 0.0;
    for j in 0..n {
        let col: f64 = (0..n).map(|i| values[i * n + j]).sum::<f64>() * dx;
        let direct = psi.momentum_amplitude(k_axis.point(j)).norm_sqr();
        k_marginal_error = k_marginal_error.max((col - direct).abs());
    }
    if k_marginal_error > MARGINAL_TOL || x_marginal_error > MARGINAL_TOL {
        return Err(Error::Resolution(format!(
            "Wigner marginals disagree with direct quadrature (x: {x_marginal_error:.3e}, \
             k: {k_marginal_error:.3e}); refine the position axis"
        )));
    }
    let total = values.iter().sum::<f64>() * dx * dk;
    Ok(WignerTransform {
        field: ScalarField::from_values(grid, values)?,
        max_imaginary,
        x_marginal_error,
        k_marginal_error,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Drop momentum components below the noise floor of `ψ̂` before
    /// multiplying by `K(k)`.
    pub filter: bool,
    /// Zero-padding factor applied to the position axis (1 = none).
    pub padding: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            filter: true,
            padding: 2,
        }
    }
}

/// `K(p̂)ψ`, `V(x̂)ψ` and their sum on the wavefunction's axis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorOutput {
    pub kinetic: Vec<Complex64>,
    pub potential: Vec<Complex64>,
    pub total: Vec<Complex64>,
    /// Momentum components dropped by the noise filter.
    pub filtered_modes: usize,
    pub warnings: Vec<String>,
}

/// Applies `K(p̂) + V(x̂)` to `ψ`: `V` pointwise, `K` by multiplication in
/// momentum space.
///
/// `cosh` kinetic terms amplify the roundoff floor of `ψ̂` exponentially in
/// `|k|`. The estimated amplified noise is compared against the kinetic
/// output and a warning is attached when it exceeds
/// [`PRECISION_WARNING_RATIO`].
pub fn apply_operator_function(
    h: &SeparableHamiltonian,
    psi: &Wavefunction,
    opts: &SpectralOptions,
) -> Result<OperatorOutput> {
    if opts.padding == 0 {
        return Err(Error::InvalidInput(
            "padding factor must be at least 1".into(),
        ));
    }
    let axis = psi.axis();
    let n = axis.len();
    let dx = axis.spacing();
    let big = n * opts.padding;
    let offset = (big - n) / 2;

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(big);
    let inverse = planner.plan_fft_inverse(big);

    let mut buf = vec![Complex64::new(0.0, 0.0); big];
    buf[offset..offset + n].copy_from_slice(psi.samples());
    forward.process(&mut buf);

    let dk = 2.0 * PI / (big as f64 * dx);
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge = psi.samples()[0].norm().max(psi.samples()[n - 1].norm());
    let max_amp = psi.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = if opts.filter {
        (1e-15f64).max(10.0 * edge / max_amp) * peak
    } else {
        0.0
    };

    let mut filtered_modes = 0;
    let mut max_multiplier: f64 = 0.0;
    let mut retained = 0usize;
    for (idx, z) in buf.iter_mut().enumerate() {
        let j = if idx < big / 2 {
            idx as f64
        } else {
            idx as f64 - big as f64
        };
        if opts.filter && z.norm() < floor {
            *z = Complex64::new(0.0, 0.0);
            filtered_modes += 1;
            continue;
        }
        let kv = h.kinetic(j * dk);
        max_multiplier = max_multiplier.max(kv.abs());
        retained += 1;
        *z *= kv;
    }
    let spectral_norm = (buf.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let noise = f64::EPSILON * peak * max_multiplier * (retained as f64).sqrt();

    inverse.process(&mut buf);
    let scale = 1.0 / big as f64;
    let kinetic: Vec<Complex64> = buf[offset..offset + n].iter().map(|z| z * scale).collect();
    let potential: Vec<Complex64> = axis
        .points()
        .zip(psi.samples())
        .map(|(x, z)| z * h.potential(x))
        .collect();
    let total = kinetic.iter().zip(&potential).map(|(a, b)| a + b).collect();

    let mut warnings = Vec::new();
    if !noise.is_finite()
        || !spectral_norm.is_finite()
        || noise > PRECISION_WARNING_RATIO * spectral_norm
    {
        warnings.push(format!(
            "momentum-space amplification of roundoff (estimated {:.3e} relative to the \
             kinetic output) exceeds {PRECISION_WARNING_RATIO:e}",
            noise / spectral_norm
        ));
    }
    Ok(OperatorOutput {
        kinetic,
        potential,
        total,
        filtered_modes,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeReport {
    /// `‖H̃ψ_ζ‖ / (‖K̃ψ_ζ‖ + ‖Ṽψ_ζ‖)`.
    pub residual: f64,
    pub kinetic_norm: f64,
    pub potential_norm: f64,
    pub axis: Axis,
    pub warnings: Vec<String>,
}

/// Relative residual of `H̃ψ_ζ` for the camouflage Hamiltonian.
pub fn zero_mode_residual(
    params: &CamouflageParams,
    axis: &Axis,
    opts: &SpectralOptions,
) -> Result<ZeroModeReport> {
    params.check_frequency_constraint()?;
    let psi = squeezed_vacuum_wavefunction(params.zeta, axis)?;
    let out = apply_operator_function(&params.build_hamiltonian(), &psi, opts)?;
    let dx = axis.spacing();
    let kinetic_norm = l2_norm(&out.kinetic, dx);
    let potential_norm = l2_norm(&out.potential, dx);
    let residual = l2_norm(&out.total, dx) / (kinetic_norm + potential_norm);
    Ok(ZeroModeReport {
        residual,
        kinetic_norm,
        potential_norm,
        axis: *axis,
        warnings: out.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camouflage::LambdaOverride;
    use crate::ensemble::GaussianEnsemble;
    use crate::hamiltonian::Term;
    use approx::assert_relative_eq;

    fn max_diff(a: &[Complex64], b: impl Iterator<Item = Complex64>) -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_samples() {
        let axis = default_spectral_axis();
        let psi = squeezed_vacuum_wavefunction(0.0, &axis).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((psi.raw_norm() - 1.0).abs() < 1e-12);
        for (x, z) in axis.points().zip(psi.samples()).step_by(97) {
            assert_relative_eq!(
                z.re,
                PI.powf(-0.25) * (-x * x / 2.0).exp(),
                max_relative = 1e-12
            );
        }
        let squeezed = squeezed_vacuum_wavefunction(0.5, &axis).unwrap();
        let (mean, var) = squeezed.position_moments();
        assert!(mean.abs() < 1e-12);
        assert!((var - 0.5 / 1f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn narrow_axis_is_refused() {
        let axis = Axis::symmetric(4.0, 256).unwrap();
        let err = squeezed_vacuum_wavefunction(-0.5, &axis).unwrap_err();
        assert!(matches!(err, Error::GridTooSmall(_)), "{err}");
        assert!(squeezed_vacuum_wavefunction(-0.5, &default_spectral_axis()).is_ok());
    }

    #[test]
    fn transform_round_trip() {
        let axis = Axis::symmetric(12.0, 512).unwrap();
        let psi = squeezed_vacuum_wavefunction(0.3, &axis).unwrap();
        let mut planner = FftPlanner::<f64>::new();
        let mut buf = psi.samples().to_vec();
        planner.plan_fft_forward(512).process(&mut buf);
        planner.plan_fft_inverse(512).process(&mut buf);
        let back: Vec<_> = buf.iter().map(|z| z / 512.0).collect();
        assert!(max_diff(&back, psi.samples().iter().copied()) < 1e-12);
    }

    #[test]
    fn wigner_of_vacuum() {
        let axis = Axis::symmetric(10.0, 256).unwrap();
        let psi = squeezed_vacuum_wavefunction(0.0, &axis).unwrap();
        let wt = wigner_transform(&psi).unwrap();
        let g = GaussianEnsemble::isotropic(1.0).unwrap();
        let grid = wt.field.grid();
        let mut err: f64 = 0.0;
        for idx in 0..grid.len() {
            let (x, k) = grid.node(idx);
            err = err.max((wt.field.values()[idx] - g.eval(x, k)).abs());
        }
        assert!(err < 1e-8, "{err}");
        assert!(wt.max_imaginary <= 1e-12);
        assert!((wt.total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn wigner_detects_undersampling() {
        // A fast carrier is not resolved by the shift quadrature.
        let axis = Axis::symmetric(10.0, 64).unwrap();
        let samples = axis
            .points()
            .map(|x| Complex64::from_polar((-x * x).exp(), 9.0 * x))
            .collect();
        let psi = Wavefunction::from_samples(axis, samples).unwrap();
        assert!(matches!(wigner_transform(&psi), Err(Error::Resolution(_))));
    }

    #[test]
    fn harmonic_ground_state() {
        let axis = default_spectral_axis();
        let psi = squeezed_vacuum_wavefunction(0.0, &axis).unwrap();
        let out = apply_operator_function(
            &SeparableHamiltonian::harmonic(),
            &psi,
            &SpectralOptions::default(),
        )
        .unwrap();
        let err = max_diff(&out.total, psi.samples().iter().map(|z| z * 0.5));
        assert!(err <= 1e-10, "{err}");
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn shift_identities() {
        let axis = default_spectral_axis();
        let psi = squeezed_vacuum_wavefunction(0.0, &axis).unwrap();
        let opts = SpectralOptions::default();
        let cosh = SeparableHamiltonian::new(vec![Term::cosh(1.0, 1.0)], vec![]).unwrap();
        let out = apply_operator_function(&cosh, &psi, &opts).unwrap();
        let expected = axis
            .points()
            .zip(psi.samples())
            .map(|(x, z)| z * (0.5f64.exp() * x.cos()));
        assert!(max_diff(&out.kinetic, expected) <= 1e-8);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);

        let cos = SeparableHamiltonian::new(vec![Term::cos(1.0, 1.0)], vec![]).unwrap();
        let out = apply_operator_function(&cos, &psi, &opts).unwrap();
        let expected = axis
            .points()
            .zip(psi.samples())
            .map(|(x, z)| z * ((-0.5f64).exp() * x.cosh()));
        assert!(max_diff(&out.kinetic, expected) <= 1e-8);
    }

    #[test]
    fn unfiltered_cosh_is_flagged() {
        let axis = default_spectral_axis();
        let psi = squeezed_vacuum_wavefunction(0.0, &axis).unwrap();
        let cosh = SeparableHamiltonian::new(vec![Term::cosh(1.0, 1.0)], vec![]).unwrap();
        let opts = SpectralOptions {
            filter: false,
            ..SpectralOptions::default()
        };
        let out = apply_operator_function(&cosh, &psi, &opts).unwrap();
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn zero_mode_examples() {
        let axis = default_spectral_axis();
        let opts = SpectralOptions::default();
        let p = CamouflageParams::simplified(0.0, 1.0).unwrap();
        let r = zero_mode_residual(&p, &axis, &opts).unwrap();
        assert!(r.residual <= 1e-8, "{r:?}");
        assert!(r.warnings.is_empty());

        let bad = p.with_override(LambdaOverride {
            lambda1: None,
            lambda2: Some(p.lambda2 + 0.1),
        });
        let r = zero_mode_residual(&bad, &axis, &opts).unwrap();
        assert!(r.residual >= 1e-3, "{r:?}");

        let p = CamouflageParams::simplified(0.6, 2.0).unwrap();
        let r = zero_mode_residual(&p, &axis, &opts).unwrap();
        assert!(r.residual <= 1e-7, "{r:?}");
    }
}
