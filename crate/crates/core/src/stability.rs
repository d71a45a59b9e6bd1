//! Linear stability of the dissipative fixed point and the closed-form limit
//! cycle that replaces it once the fixed point is unstable.
//!
//! At `m^s = (0, 0, m_z^s)` the Jacobian of the mean-field flow is block
//! diagonal: `m_z` relaxes at `−(γ₊+γ₋)` and the transverse block has the
//! complex pair `V m_z^s sin θ − (γ₊+γ₋)/2 ∓ i(V m_z^s cos θ − ω₀)`. Everything
//! below is evaluated in closed form; no general eigensolver is needed.

use num_complex::Complex64;

use crate::bloch::{BlochVector, EnsembleParams};
use crate::dynamics::phase_sin_cos;
use crate::error::{Error, Result};

/// `sin θ` values with smaller magnitude are treated as zero.
const SIN_EPS: f64 = 1e-14;

pub fn fixed_point(p: &EnsembleParams) -> BlochVector {
    BlochVector::new(0.0, 0.0, p.stationary_z())
}

/// Jacobian of the mean-field flow at the dissipative fixed point, row-major.
pub fn jacobian_at_fixed_point(p: &EnsembleParams) -> [[f64; 3]; 3] {
    let mz = p.stationary_z();
    let (s, c) = p.theta.sin_cos();
    let diag = p.coupling * mz * s - 0.5 * p.gamma_sum();
    let off = p.coupling * mz * c - p.omega0;
    [[diag, off, 0.0], [-off, diag, 0.0], [0.0, 0.0, -p.gamma_sum()]]
}

/// Real part of the transverse eigenpair, `V m_z^s sin θ − (γ₊+γ₋)/2`.
pub fn growth_rate(p: &EnsembleParams) -> f64 {
    p.coupling * p.stationary_z() * phase_sin_cos(p.theta).0 - 0.5 * p.gamma_sum()
}

/// Eigenvalues `(λ₁, λ₂, λ₃)` of [`jacobian_at_fixed_point`].
pub fn jacobian_eigenvalues(p: &EnsembleParams) -> [Complex64; 3] {
    let re = growth_rate(p);
    let im = p.coupling * p.stationary_z() * phase_sin_cos(p.theta).1 - p.omega0;
    [
        Complex64::new(-p.gamma_sum(), 0.0),
        Complex64::new(re, -im),
        Complex64::new(re, im),
    ]
}

/// The fixed point is unstable (and the ensemble synchronizes) iff the
/// largest real part is strictly positive. A marginal zero counts as stable.
pub fn is_synchronized(p: &EnsembleParams) -> bool {
    growth_rate(p) > 0.0
}

/// Critical coupling for fixed phase and gain ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalCoupling {
    /// Synchronized for `V/(γ₊+γ₋)` strictly above this value.
    Finite(f64),
    /// The fixed point is stable for every coupling.
    Never,
}

impl CriticalCoupling {
    pub fn value(self) -> Option<f64> {
        match self {
            CriticalCoupling::Finite(v) => Some(v),
            CriticalCoupling::Never => None,
        }
    }
}

/// Critical `V/(γ₊+γ₋)` at phase `theta` and gain ratio `γ₊/γ₋`.
///
/// Solves `V m_z^s sin θ = (γ₊+γ₋)/2`, i.e.
/// `V_c/(γ₊+γ₋) = (ρ+1)/(2 (ρ−1) sin θ)` with `ρ = γ₊/γ₋`.
pub fn synchronization_boundary(theta: f64, gain_ratio: f64) -> Result<CriticalCoupling> {
    if !(gain_ratio > 0.0) {
        return Err(Error::InvalidInput(format!("gain ratio {gain_ratio} must be positive")));
    }
    let s = phase_sin_cos(theta).0;
    if s.abs() < SIN_EPS {
        return Err(Error::DegeneratePhase);
    }
    let mz = if gain_ratio.is_infinite() { 1.0 } else { (gain_ratio - 1.0) / (gain_ratio + 1.0) };
    let drive = mz * s;
    if drive > 0.0 {
        Ok(CriticalCoupling::Finite(0.5 / drive))
    } else {
        Ok(CriticalCoupling::Never)
    }
}

/// Steady rotation `m = (r cos φ(t), r sin φ(t), C_z)` with `φ̇ = omega_sync`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCycle {
    pub c_z: f64,
    pub radius: f64,
    pub omega_sync: f64,
    /// `ω₀ − omega_sync = cot θ · (γ₊+γ₋)/2`.
    pub delta_omega: f64,
}

impl LimitCycle {
    /// Point on the cycle at rotation angle `phi`.
    pub fn point(&self, phi: f64) -> BlochVector {
        BlochVector::new(self.radius * phi.cos(), self.radius * phi.sin(), self.c_z)
    }

    /// `|<σ⁺>|` on the cycle.
    pub fn amplitude(&self) -> f64 {
        0.5 * self.radius
    }
}

/// Closed-form limit cycle, `None` when the dissipative fixed point is stable.
///
/// `C_z = (γ₊+γ₋)/(2V sin θ)` and `r² = 2C_z(m_z^s − C_z)`. The radius is
/// evaluated as `r² = (γ₊+γ₋)·g/(V sin θ)²` with `g` the growth rate, which is
/// algebraically identical and makes existence agree exactly with the
/// eigenvalue verdict.
pub fn analytic_limit_cycle(p: &EnsembleParams) -> Result<Option<LimitCycle>> {
    let s = phase_sin_cos(p.theta).0;
    if s.abs() < SIN_EPS {
        return Err(Error::DegeneratePhase);
    }
    let g = growth_rate(p);
    if !(g > 0.0) {
        return Ok(None);
    }
    let vs = p.coupling * s;
    let gamma = p.gamma_sum();
    let c_z = gamma / (2.0 * vs);
    let radius = (gamma * g / (vs * vs)).sqrt();
    let delta_omega = 0.5 * gamma * phase_sin_cos(p.theta).1 / s;
    Ok(Some(LimitCycle { c_z, radius, omega_sync: p.omega0 - delta_omega, delta_omega }))
}

/// Synchronization frequency `ω₀ − cot θ·(γ₊+γ₋)/2`, independent of whether
/// the cycle exists.
pub fn synchronization_frequency(p: &EnsembleParams) -> Result<f64> {
    let s = phase_sin_cos(p.theta).0;
    if s.abs() < SIN_EPS {
        return Err(Error::DegeneratePhase);
    }
    Ok(p.omega0 - 0.5 * p.gamma_sum() * phase_sin_cos(p.theta).1 / s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub fixed_point: BlochVector,
    pub eigenvalues: [Complex64; 3],
    pub synchronized: bool,
    pub limit_cycle: Option<LimitCycle>,
    pub note: Option<String>,
}

pub fn stability_report(p: &EnsembleParams) -> StabilityReport {
    let eigenvalues = jacobian_eigenvalues(p);
    let max_re = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let (limit_cycle, note) = match analytic_limit_cycle(p) {
        Ok(c) => (c, None),
        Err(e) => (None, Some(e.to_string())),
    };
    StabilityReport {
        fixed_point: fixed_point(p),
        eigenvalues,
        synchronized: max_re > 0.0 && limit_cycle.is_some(),
        limit_cycle,
        note,
    }
}
