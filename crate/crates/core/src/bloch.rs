//! Bloch-vector state and ensemble parameter types.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Slack allowed on `|m| ≤ 1` for integrated states.
pub const NORM_SLACK: f64 = 1e-6;

/// Bloch vector `(m_x, m_y, m_z)` of one representative two-level system,
/// `ρ = (1 + m·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    /// The recurring starting point `(−0.5, 0.4, 0.1)`.
    pub const DEFAULT_INITIAL: BlochVector = BlochVector { x: -0.5, y: 0.4, z: 0.1 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Distance from the z axis, `√(m_x² + m_y²) = 2|<σ⁺>|`.
    pub fn planar_radius(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Mean amplitude `<σ⁺> = (m_x + i m_y)/2`.
    pub fn sigma_plus(self) -> Complex64 {
        Complex64::new(0.5 * self.x, 0.5 * self.y)
    }

    /// Inverse of [`BlochVector::sigma_plus`] for the transverse part.
    pub fn from_sigma_plus(sp: Complex64, z: f64) -> Self {
        Self::new(2.0 * sp.re, 2.0 * sp.im, z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `|m| ≤ 1 + NORM_SLACK`.
    pub fn is_physical(self) -> bool {
        self.is_finite() && self.norm() <= 1.0 + NORM_SLACK
    }

    pub fn max_abs_diff(self, other: BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, rhs: BlochVector) -> BlochVector {
        BlochVector::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for BlochVector {
    fn add_assign(&mut self, rhs: BlochVector) {
        *self = *self + rhs;
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, rhs: BlochVector) -> BlochVector {
        BlochVector::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<BlochVector> for f64 {
    type Output = BlochVector;
    fn mul(self, rhs: BlochVector) -> BlochVector {
        BlochVector::new(self * rhs.x, self * rhs.y, self * rhs.z)
    }
}

/// Physical parameters of a single ensemble.
///
/// `coupling` is the all-to-all strength `V` and `theta` its phase. The
/// rates `gamma_plus`/`gamma_minus` are the local gain and damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub omega0: f64,
    pub coupling: f64,
    pub theta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl EnsembleParams {
    pub fn new(
        omega0: f64,
        coupling: f64,
        theta: f64,
        gamma_plus: f64,
        gamma_minus: f64,
    ) -> Result<Self> {
        let p = Self { omega0, coupling, theta, gamma_plus, gamma_minus };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the ratio parametrization: `coupling_ratio` is
    /// `V/(γ₊+γ₋)`, `gain_ratio` is `γ₊/γ₋` (may be `+∞` for pure gain), and
    /// `gamma_sum` fixes the unit `γ₊+γ₋`.
    pub fn from_ratios(
        omega0: f64,
        coupling_ratio: f64,
        theta: f64,
        gain_ratio: f64,
        gamma_sum: f64,
    ) -> Result<Self> {
        let (gamma_plus, gamma_minus) = split_rates(gain_ratio, gamma_sum)?;
        Self::new(omega0, coupling_ratio * gamma_sum, theta, gamma_plus, gamma_minus)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega0, self.coupling, self.theta, self.gamma_plus, self.gamma_minus];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if self.coupling < 0.0 {
            return Err(Error::InvalidParams(format!("coupling V = {} < 0", self.coupling)));
        }
        if self.theta.abs() > std::f64::consts::PI + 1e-12 {
            return Err(Error::InvalidParams(format!("theta = {} outside [-π, π]", self.theta)));
        }
        validate_rates(self.gamma_plus, self.gamma_minus)
    }

    /// `γ₊ + γ₋`.
    pub fn gamma_sum(&self) -> f64 {
        self.gamma_plus + self.gamma_minus
    }

    /// `γ₊/γ₋`, infinite when `γ₋ = 0`.
    pub fn gain_ratio(&self) -> f64 {
        self.gamma_plus / self.gamma_minus
    }

    /// z component of the dissipative fixed point, `(γ₊−γ₋)/(γ₊+γ₋)`.
    pub fn stationary_z(&self) -> f64 {
        (self.gamma_plus - self.gamma_minus) / self.gamma_sum()
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }
}

/// Splits `γ₊+γ₋ = gamma_sum` according to `γ₊/γ₋ = gain_ratio`.
pub fn split_rates(gain_ratio: f64, gamma_sum: f64) -> Result<(f64, f64)> {
    if !(gamma_sum.is_finite() && gamma_sum > 0.0) {
        return Err(Error::InvalidParams(format!("gamma sum {gamma_sum} must be positive")));
    }
    if gain_ratio.is_nan() || gain_ratio < 0.0 {
        return Err(Error::InvalidParams(format!("gain ratio {gain_ratio} must be ≥ 0")));
    }
    if gain_ratio.is_infinite() {
        return Ok((gamma_sum, 0.0));
    }
    let gamma_minus = gamma_sum / (1.0 + gain_ratio);
    Ok((gamma_sum - gamma_minus, gamma_minus))
}

fn validate_rates(gamma_plus: f64, gamma_minus: f64) -> Result<()> {
    if gamma_plus < 0.0 || gamma_minus < 0.0 {
        return Err(Error::InvalidParams(format!(
            "rates must be non-negative (γ₊ = {gamma_plus}, γ₋ = {gamma_minus})"
        )));
    }
    if gamma_plus + gamma_minus <= 0.0 {
        return Err(Error::InvalidParams("γ₊ + γ₋ must be positive".into()));
    }
    Ok(())
}

/// Phase convention of the inter-group mean field seen by group B.
///
/// Group A is always driven by `<σ⁻_B> e^{iθ_AB}`. With `Shared`, group B is
/// driven by `<σ⁻_A> e^{iθ_AB}` as well, so the cross coupling carries the
/// same dissipative character as the intra-group term. With `Conjugate`, B sees
/// `<σ⁻_A> e^{−iθ_AB}`, the Hermitian-conjugate pairing; the phase is then a
/// gauge and the cross coupling is purely reactive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossPhase {
    #[default]
    Shared,
    Conjugate,
}

/// Parameters of two coupled ensembles in the frame rotating at their mean
/// natural frequency. Group A rotates at `+δ/2`, group B at `−δ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGroupParams {
    pub delta: f64,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub coupling_ab: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_ab: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub cross_phase: CrossPhase,
}

impl TwoGroupParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta,
            self.coupling_a,
            self.coupling_b,
            self.coupling_ab,
            self.theta_a,
            self.theta_b,
            self.theta_ab,
            self.gamma_plus,
            self.gamma_minus,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        for (name, v) in [("V_A", self.coupling_a), ("V_B", self.coupling_b), ("V_AB", self.coupling_ab)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("coupling {name} = {v} < 0")));
            }
        }
        validate_rates(self.gamma_plus, self.gamma_minus)
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma_plus + self.gamma_minus
    }

    /// Single-ensemble parameters of group A with the cross coupling removed.
    pub fn group_a(&self) -> EnsembleParams {
        EnsembleParams {
            omega0: 0.5 * self.delta,
            coupling: self.coupling_a,
            theta: self.theta_a,
            gamma_plus: self.gamma_plus,
            gamma_minus: self.gamma_minus,
        }
    }

    pub fn group_b(&self) -> EnsembleParams {
        EnsembleParams {
            omega0: -0.5 * self.delta,
            coupling: self.coupling_b,
            theta: self.theta_b,
            gamma_plus: self.gamma_plus,
            gamma_minus: self.gamma_minus,
        }
    }

    /// Phase of the cross term entering group B's equations.
    pub fn theta_ba(&self) -> f64 {
        match self.cross_phase {
            CrossPhase::Shared => self.theta_ab,
            CrossPhase::Conjugate => -self.theta_ab,
        }
    }

    /// Symmetric pair in units of `γ₊`:
    /// `γ₊/γ₋ = gain_ratio`, `V_A = V_B = coupling_over_gain·γ₊`,
    /// `V_AB = V/intra_over_cross`, every phase `π/2`, detuning `δ`.
    pub fn symmetric(
        gamma_plus: f64,
        gain_ratio: f64,
        coupling_over_gain: f64,
        intra_over_cross: f64,
        delta: f64,
    ) -> Self {
        let v = coupling_over_gain * gamma_plus;
        let half_pi = std::f64::consts::FRAC_PI_2;
        Self {
            delta,
            coupling_a: v,
            coupling_b: v,
            coupling_ab: v / intra_over_cross,
            theta_a: half_pi,
            theta_b: half_pi,
            theta_ab: half_pi,
            gamma_plus,
            gamma_minus: gamma_plus / gain_ratio,
            cross_phase: CrossPhase::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_plus_is_half_transverse_amplitude() {
        let m = BlochVector::new(-0.5, 0.4, 0.1);
        let sp = m.sigma_plus();
        assert_eq!(sp, Complex64::new(-0.25, 0.2));
        assert!((2.0 * sp.norm() - m.planar_radius()).abs() < 1e-15);
        assert_eq!(BlochVector::from_sigma_plus(sp, 0.1), m);
    }

    #[test]
    fn closed_system_is_rejected() {
        let err = EnsembleParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn negative_coupling_is_rejected() {
        assert!(EnsembleParams::new(1.0, -0.1, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ratio_parametrization() {
        let p = EnsembleParams::from_ratios(1.0, 1.0, 0.5, 5.0, 1.0).unwrap();
        assert!((p.gamma_plus - 5.0 / 6.0).abs() < 1e-15);
        assert!((p.gamma_minus - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.gamma_sum() - 1.0).abs() < 1e-15);
        assert!((p.stationary_z() - 2.0 / 3.0).abs() < 1e-15);

        let pure_gain = EnsembleParams::from_ratios(1.0, 0.0, 0.0, f64::INFINITY, 2.0).unwrap();
        assert_eq!((pure_gain.gamma_plus, pure_gain.gamma_minus), (2.0, 0.0));
        assert_eq!(pure_gain.stationary_z(), 1.0);
    }

    #[test]
    fn two_group_validation() {
        let mut p = TwoGroupParams::symmetric(1.0, 5.0, 6.0, 6.0, 0.1);
        assert!(p.validate().is_ok());
        assert!((p.coupling_ab - 1.0).abs() < 1e-15);
        p.coupling_ab = -1.0;
        assert!(p.validate().is_err());
        p.coupling_ab = 1.0;
        p.gamma_plus = 0.0;
        p.gamma_minus = 0.0;
        assert!(p.validate().is_err());
    }
}
