//! Separable Hamiltonians `H(x, k) = K(k) + V(x)` built from analytic terms
//! with exact derivatives of every odd order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub const MAX_MONOMIAL_POWER: u32 = 8;

/// One analytic term of `K(k)` or `V(x)` in its own variable `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Term {
    /// `amplitude · cosh(frequency · u)`
    Cosh { amplitude: f64, frequency: f64 },
    /// `amplitude · cos(frequency · u)`
    Cos { amplitude: f64, frequency: f64 },
    /// `amplitude · u^power`
    Monomial { amplitude: f64, power: u32 },
}

impl Term {
    pub fn cosh(amplitude: f64, frequency: f64) -> Self {
        Term::Cosh {
            amplitude,
            frequency,
        }
    }

    pub fn cos(amplitude: f64, frequency: f64) -> Self {
        Term::Cos {
            amplitude,
            frequency,
        }
    }

    pub fn monomial(amplitude: f64, power: u32) -> Self {
        Term::Monomial { amplitude, power }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Term::Cosh {
                amplitude,
                frequency,
            }
            | Term::Cos {
                amplitude,
                frequency,
            } => {
                ensure_finite("term amplitude", amplitude)?;
                ensure_finite("term frequency", frequency)?;
                if frequency == 0.0 {
                    return Err(Error::InvalidInput(
                        "cosh/cos term frequency must be nonzero".into(),
                    ));
                }
            }
            Term::Monomial { amplitude, power } => {
                ensure_finite("term amplitude", amplitude)?;
                if power > MAX_MONOMIAL_POWER {
                    return Err(Error::InvalidInput(format!(
                        "monomial power {power} exceeds {MAX_MONOMIAL_POWER}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Term::Cosh {
                amplitude,
                frequency,
            } => amplitude * (frequency * u).cosh(),
            Term::Cos {
                amplitude,
                frequency,
            } => amplitude * (frequency * u).cos(),
            Term::Monomial { amplitude, power } => amplitude * u.powi(power as i32),
        }
    }

    /// Exact odd derivative `∂_u^order` of the term.
    pub fn odd_derivative(&self, order: usize, u: f64) -> Result<f64> {
        if order.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "only odd derivative orders are defined, got {order}"
            )));
        }
        Ok(self.odd_derivative_unchecked(order, u))
    }

    pub(crate) fn odd_derivative_unchecked(&self, order: usize, u: f64) -> f64 {
        let eta = order / 2;
        match *self {
            Term::Cosh {
                amplitude,
                frequency,
            } => amplitude * frequency.powi(order as i32) * (frequency * u).sinh(),
            Term::Cos {
                amplitude,
                frequency,
            } => {
                let sign = if eta.is_multiple_of(2) { -1.0 } else { 1.0 };
                sign * amplitude * frequency.powi(order as i32) * (frequency * u).sin()
            }
            Term::Monomial { amplitude, power } => {
                let power = power as usize;
                if order > power {
                    return 0.0;
                }
                let falling: f64 = ((power - order + 1)..=power).map(|m| m as f64).product();
                amplitude * falling * u.powi((power - order) as i32)
            }
        }
    }

    /// Highest odd derivative order that is not identically zero, or `None`
    /// when every odd order contributes.
    pub fn highest_odd_order(&self) -> Option<usize> {
        match *self {
            Term::Cosh { .. } | Term::Cos { .. } => None,
            Term::Monomial { power, .. } => {
                let p = power as usize;
                Some(if p == 0 {
                    0
                } else if p % 2 == 1 {
                    p
                } else {
                    p - 1
                })
            }
        }
    }

    /// Factorization `∂_u^{2η+1} term = scale^{2η+1} · carrier(u)` valid for
    /// every η. Monomials have no such form.
    ///
    /// cosh: `scale = μ`, `carrier = A sinh(μu)`.
    /// cos: `scale = iμ`, `carrier = iA sin(μu)`, since
    /// `(-1)^{η+1} μ^{2η+1} = i (iμ)^{2η+1}`.
    pub fn odd_factorization(&self, u: f64) -> Option<(Complex64, Complex64)> {
        match *self {
            Term::Cosh {
                amplitude,
                frequency,
            } => Some((
                Complex64::new(frequency, 0.0),
                Complex64::new(amplitude * (frequency * u).sinh(), 0.0),
            )),
            Term::Cos {
                amplitude,
                frequency,
            } => Some((
                Complex64::new(0.0, frequency),
                Complex64::new(0.0, amplitude * (frequency * u).sin()),
            )),
            Term::Monomial { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Term::Cosh { .. } => "cosh",
            Term::Cos { .. } => "cos",
            Term::Monomial { .. } => "monomial",
        }
    }
}

/// `K(k) + V(x)`; cross terms are not representable, so `∂²H/∂x∂k ≡ 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeparableHamiltonian {
    kinetic: Vec<Term>,
    potential: Vec<Term>,
}

impl SeparableHamiltonian {
    pub fn new(kinetic: Vec<Term>, potential: Vec<Term>) -> Result<Self> {
        for term in kinetic.iter().chain(&potential) {
            term.validate()?;
        }
        Ok(Self { kinetic, potential })
    }

    /// `k²/2 + x²/2`
    pub fn harmonic() -> Self {
        Self {
            kinetic: vec![Term::monomial(0.5, 2)],
            potential: vec![Term::monomial(0.5, 2)],
        }
    }

    pub fn kinetic_terms(&self) -> &[Term] {
        &self.kinetic
    }

    pub fn potential_terms(&self) -> &[Term] {
        &self.potential
    }

    pub fn kinetic(&self, k: f64) -> f64 {
        self.kinetic.iter().map(|t| t.value(k)).sum()
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.potential.iter().map(|t| t.value(x)).sum()
    }

    pub fn eval(&self, x: f64, k: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        ensure_finite("k", k)?;
        Ok(self.kinetic(k) + self.potential(x))
    }

    pub fn kinetic_odd_derivative(&self, order: usize, k: f64) -> Result<f64> {
        sum_odd(&self.kinetic, order, k)
    }

    pub fn potential_odd_derivative(&self, order: usize, x: f64) -> Result<f64> {
        sum_odd(&self.potential, order, x)
    }

    /// Classical phase-space velocity `(∂_k K, -∂_x V)`.
    pub fn classical_velocity(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        ensure_finite("x", x)?;
        ensure_finite("k", k)?;
        Ok((
            sum_odd(&self.kinetic, 1, k)?,
            -sum_odd(&self.potential, 1, x)?,
        ))
    }

    /// Whether every term admits the cosh/cos odd-derivative factorization.
    pub fn is_factorizable(&self) -> bool {
        self.kinetic
            .iter()
            .chain(&self.potential)
            .all(|t| t.odd_factorization(0.0).is_some())
    }

    pub(crate) fn kinetic_highest_odd_order(&self) -> Option<usize> {
        highest_odd_order(&self.kinetic)
    }

    pub(crate) fn potential_highest_odd_order(&self) -> Option<usize> {
        highest_odd_order(&self.potential)
    }
}

fn sum_odd(terms: &[Term], order: usize, u: f64) -> Result<f64> {
    if order.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "only odd derivative orders are defined, got {order}"
        )));
    }
    Ok(terms
        .iter()
        .map(|t| t.odd_derivative_unchecked(order, u))
        .sum())
}

fn highest_odd_order(terms: &[Term]) -> Option<usize> {
    terms
        .iter()
        .map(Term::highest_odd_order)
        .try_fold(0, |acc, t| t.map(|t| acc.max(t)))
}

/// Mass, angular frequency and ħ; maps physical `(q, p)` to the dimensionless
/// `x = (mω/ħ)^{1/2} q`, `k = (mωħ)^{-1/2} p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsMap {
    mass: f64,
    angular_frequency: f64,
    planck: f64,
}

impl UnitsMap {
    pub fn new(mass: f64, angular_frequency: f64, planck: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("angular frequency", angular_frequency),
            ("planck constant", planck),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            mass,
            angular_frequency,
            planck,
        })
    }

    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            angular_frequency: 1.0,
            planck: 1.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn angular_frequency(&self) -> f64 {
        self.angular_frequency
    }

    pub fn planck(&self) -> f64 {
        self.planck
    }

    fn position_scale(&self) -> f64 {
        (self.mass * self.angular_frequency / self.planck).sqrt()
    }

    fn momentum_scale(&self) -> f64 {
        (self.mass * self.angular_frequency * self.planck)
            .sqrt()
            .recip()
    }

    pub fn to_dimensionless(&self, q: f64, p: f64) -> (f64, f64) {
        (q * self.position_scale(), p * self.momentum_scale())
    }

    pub fn to_physical(&self, x: f64, k: f64) -> (f64, f64) {
        (x / self.position_scale(), k / self.momentum_scale())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn camouflage_zero() -> SeparableHamiltonian {
        let e = (-0.5f64).exp();
        SeparableHamiltonian::new(
            vec![Term::cosh(e, 1.0), Term::cos(1.0, 1.0)],
            vec![Term::cosh(-e, 1.0), Term::cos(-1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn odd_derivative_examples() {
        let c = Term::cosh(1.0, 1.0);
        assert_relative_eq!(c.odd_derivative(1, 0.5).unwrap(), 0.5f64.sinh());
        assert_relative_eq!(0.5f64.sinh(), 0.521_10, epsilon = 1e-5);

        let kinetic = Term::monomial(0.5, 2);
        let p = 1.7;
        assert_relative_eq!(kinetic.odd_derivative(1, p).unwrap(), p);
        assert_eq!(kinetic.odd_derivative(3, p).unwrap(), 0.0);

        // d³/du³ cos(2u) = 8 sin(2u)
        let cos = Term::cos(1.0, 2.0);
        assert_relative_eq!(cos.odd_derivative(3, 0.3).unwrap(), 8.0 * 0.6f64.sin());
        assert_relative_eq!(8.0 * 0.6f64.sin(), 4.517_14, epsilon = 1e-5);
        assert_relative_eq!(cos.odd_derivative(1, 0.3).unwrap(), -2.0 * 0.6f64.sin());

        // u⁵: fifth derivative 120, third 60u².
        let quint = Term::monomial(2.0, 5);
        assert_relative_eq!(quint.odd_derivative(5, 0.9).unwrap(), 240.0);
        assert_relative_eq!(quint.odd_derivative(3, 0.9).unwrap(), 120.0 * 0.81);
    }

    #[test]
    fn even_orders_are_rejected() {
        assert!(matches!(
            Term::cosh(1.0, 1.0).odd_derivative(2, 0.0),
            Err(Error::Contract(_))
        ));
        assert!(SeparableHamiltonian::harmonic()
            .kinetic_odd_derivative(0, 1.0)
            .is_err());
    }

    #[test]
    fn term_validation() {
        assert!(Term::cos(1.0, 0.0).validate().is_err());
        assert!(Term::monomial(1.0, 9).validate().is_err());
        assert!(Term::cosh(f64::INFINITY, 1.0).validate().is_err());
        assert!(SeparableHamiltonian::new(vec![Term::monomial(1.0, 12)], vec![]).is_err());
    }

    #[test]
    fn highest_odd_orders() {
        let h = SeparableHamiltonian::harmonic();
        assert_eq!(h.kinetic_highest_odd_order(), Some(1));
        let mixed = SeparableHamiltonian::new(
            vec![Term::monomial(1.0, 4), Term::monomial(1.0, 7)],
            vec![Term::cos(1.0, 1.0)],
        )
        .unwrap();
        assert_eq!(mixed.kinetic_highest_odd_order(), Some(7));
        assert_eq!(mixed.potential_highest_odd_order(), None);
        assert_eq!(
            SeparableHamiltonian::default().kinetic_highest_odd_order(),
            Some(0)
        );
    }

    #[test]
    fn factorization_reproduces_derivatives() {
        for term in [Term::cosh(1.3, 0.7), Term::cos(-0.4, 1.9)] {
            let (scale, carrier) = term.odd_factorization(0.8).unwrap();
            for eta in 0..10 {
                let n = 2 * eta + 1;
                let via = scale.powu(n as u32) * carrier;
                assert!(via.im.abs() < 1e-12 * via.re.abs().max(1.0));
                assert_relative_eq!(
                    via.re,
                    term.odd_derivative(n, 0.8).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
        assert!(Term::monomial(1.0, 2).odd_factorization(0.0).is_none());
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(
            SeparableHamiltonian::default().eval(0.3, -2.0).unwrap(),
            0.0
        );
        assert_eq!(
            SeparableHamiltonian::harmonic().eval(1.0, 1.0).unwrap(),
            1.0
        );
        assert!(camouflage_zero().eval(0.0, 0.0).unwrap().abs() < 1e-15);
        assert!(SeparableHamiltonian::harmonic()
            .eval(f64::NAN, 0.0)
            .is_err());
    }

    #[test]
    fn classical_velocity_examples() {
        let h = SeparableHamiltonian::harmonic();
        assert_eq!(h.classical_velocity(1.0, 2.0).unwrap(), (2.0, -1.0));
        assert_eq!(h.classical_velocity(0.0, 0.0).unwrap(), (0.0, 0.0));

        let cam = camouflage_zero();
        let (x, k, step) = (0.5, 0.5, 1e-4);
        let dk = (cam.eval(x, k + step).unwrap() - cam.eval(x, k - step).unwrap()) / (2.0 * step);
        let dx = (cam.eval(x + step, k).unwrap() - cam.eval(x - step, k).unwrap()) / (2.0 * step);
        let (vx, vk) = cam.classical_velocity(x, k).unwrap();
        assert_relative_eq!(vx, dk, max_relative = 1e-6);
        assert_relative_eq!(vk, -dx, max_relative = 1e-6);
    }

    #[test]
    fn units_examples() {
        let any = UnitsMap::new(3.0, 0.2, 1.7).unwrap();
        assert_eq!(any.to_dimensionless(0.0, 0.0), (0.0, 0.0));
        assert_eq!(UnitsMap::natural().to_dimensionless(1.0, 1.0), (1.0, 1.0));
        let u = UnitsMap::new(2.0, 1.0, 1.0).unwrap();
        let (x, k) = u.to_dimensionless(2.0, 3.0);
        assert_relative_eq!(x, 2.0 * 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(k, 3.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert!(UnitsMap::new(0.0, 1.0, 1.0).is_err());
        assert!(UnitsMap::new(1.0, -1.0, 1.0).is_err());
        assert!(UnitsMap::new(1.0, 1.0, f64::NAN).is_err());
    }

    // Second derivative by a centered stencil with two Richardson passes.
    fn fd_second(f: &dyn Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        let central = |h: f64| (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h);
        let (d1, d2, d3) = (central(h), central(h / 2.0), central(h / 4.0));
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d3 - d2) / 3.0;
        (16.0 * r2 - r1) / 15.0
    }

    fn fd_first(f: &dyn Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        let central = |h: f64| (f(u + h) - f(u - h)) / (2.0 * h);
        let (d1, d2) = (central(h), central(h / 2.0));
        (4.0 * d2 - d1) / 3.0
    }

    // Magnitude of the derivative envelope, so zero crossings of sin/sinh do
    // not turn an absolute agreement into a relative failure.
    fn term_scale(term: &Term, n: usize, u: f64) -> f64 {
        match *term {
            Term::Cosh {
                amplitude,
                frequency,
            } => (amplitude * frequency.powi(n as i32) * (frequency * u).cosh()).abs(),
            Term::Cos {
                amplitude,
                frequency,
            } => (amplitude * frequency.powi(n as i32)).abs(),
            Term::Monomial { amplitude, power } => {
                (amplitude * (1..=power).map(|m| m as f64).product::<f64>()).abs()
                    * (1.0 + u.abs()).powi(power as i32)
            }
        }
    }

    // Order 1 is checked against the value function; each higher odd order
    // against the second difference of the order two below it.
    #[test]
    fn odd_derivatives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let terms = [
            Term::cosh(0.8, 1.0),
            Term::cosh(-1.2, 0.6),
            Term::cos(1.0, 1.0),
            Term::cos(0.7, 1.3),
            Term::monomial(0.5, 2),
            Term::monomial(-0.3, 5),
            Term::monomial(0.1, 8),
        ];
        for term in terms {
            for _ in 0..20 {
                let u: f64 = rng.gen_range(-3.0..3.0);
                for eta in 0..=14 {
                    let n = 2 * eta + 1;
                    let exact = term.odd_derivative(n, u).unwrap();
                    let fd = if n == 1 {
                        fd_first(&|v| term.value(v), u, 1e-2)
                    } else {
                        fd_second(&|v| term.odd_derivative(n - 2, v).unwrap(), u, 2e-2)
                    };
                    let scale = exact.abs().max(term_scale(&term, n, u));
                    assert!(
                        (fd - exact).abs() <= 1e-5 * scale,
                        "{term:?} n={n} u={u}: fd={fd} exact={exact}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn separability(x in -5.0f64..5.0, k in -5.0f64..5.0) {
            let h = camouflage_zero();
            let d = h.eval(x, k).unwrap() - h.eval(x, 0.0).unwrap() - h.eval(0.0, k).unwrap()
                + h.eval(0.0, 0.0).unwrap();
            prop_assert!(d.abs() < 1e-12 * (1.0 + h.eval(x, k).unwrap().abs()));
        }

        #[test]
        fn units_round_trip(m in 0.1f64..10.0, w in 0.1f64..10.0, hb in 0.01f64..3.0,
                            q in -50.0f64..50.0, p in -50.0f64..50.0) {
            let units = UnitsMap::new(m, w, hb).unwrap();
            let (x, k) = units.to_dimensionless(q, p);
            let (q2, p2) = units.to_physical(x, k);
            prop_assert!((q2 - q).abs() <= 1e-14 * q.abs().max(1e-300) * 4.0);
            prop_assert!((p2 - p).abs() <= 1e-14 * p.abs().max(1e-300) * 4.0);
        }
    }
}
