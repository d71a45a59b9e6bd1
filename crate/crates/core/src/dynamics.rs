//! Right-hand sides of the mean-field Bloch flows.
//!
//! The single-ensemble flow splits into three parts,
//!
//! ```text
//! ṁ(θ) = ṁ_H0 + ṁ_int(θ) + ṁ_L
//! ```
//!
//! a rotation about z at `ω₀`, the phase-dependent interaction and the local
//! gain/damping. The interaction obeys
//! `ṁ_int(θ) = cos θ · ṁ_int(0) + sin θ · ṁ_int(π/2)`: the cosine part rotates
//! about z at a rate `V m_z`, the sine part pushes the state towards one pole
//! and changes `m_z`.

use crate::bloch::{BlochVector, EnsembleParams, TwoGroupParams};

/// Coherent rotation about z at angular frequency `omega0`.
pub fn rhs_coherent(m: BlochVector, omega0: f64) -> BlochVector {
    BlochVector::new(-omega0 * m.y, omega0 * m.x, 0.0)
}

/// Local gain `γ₊` and damping `γ₋`: transverse contraction at `(γ₊+γ₋)/2`
/// and relaxation of `m_z` towards `(γ₊−γ₋)/(γ₊+γ₋)`.
pub fn rhs_dissipative(m: BlochVector, gamma_plus: f64, gamma_minus: f64) -> BlochVector {
    let half_sum = 0.5 * (gamma_plus + gamma_minus);
    BlochVector::new(
        -half_sum * m.x,
        -half_sum * m.y,
        gamma_plus * (1.0 - m.z) - gamma_minus * (1.0 + m.z),
    )
}

/// Non-interacting flow.
pub fn rhs_bare(m: BlochVector, p: &EnsembleParams) -> BlochVector {
    let half_sum = 0.5 * p.gamma_sum();
    BlochVector::new(
        -p.omega0 * m.y - half_sum * m.x,
        p.omega0 * m.x - half_sum * m.y,
        p.gamma_plus * (1.0 - m.z) - p.gamma_minus * (1.0 + m.z),
    )
}

/// `(sin θ, cos θ)`, exact at the quadrature angles `0, ±π/2, ±π` given as
/// the nearest doubles.
pub fn phase_sin_cos(theta: f64) -> (f64, f64) {
    use std::f64::consts::{FRAC_PI_2, PI};
    if theta == 0.0 {
        (0.0, 1.0)
    } else if theta == FRAC_PI_2 {
        (1.0, 0.0)
    } else if theta == -FRAC_PI_2 {
        (-1.0, 0.0)
    } else if theta.abs() == PI {
        (0.0, -1.0)
    } else {
        theta.sin_cos()
    }
}

/// Interaction-only flow at coupling `v` and phase `theta`.
pub fn rhs_interaction(m: BlochVector, v: f64, theta: f64) -> BlochVector {
    let (s, c) = phase_sin_cos(theta);
    BlochVector::new(
        v * m.z * (m.y * c + m.x * s),
        -v * m.z * (m.x * c - m.y * s),
        -v * (m.x * m.x + m.y * m.y) * s,
    )
}

/// Interaction flow of a state `m` driven by the mean amplitude of another
/// ensemble with Bloch vector `field`. Reduces to [`rhs_interaction`] when
/// `field == m`.
pub fn rhs_cross(m: BlochVector, field: BlochVector, v: f64, theta: f64) -> BlochVector {
    let (s, c) = phase_sin_cos(theta);
    // effective transverse field; ṁ = h × m with h_z = 0
    let hx = v * (field.x * c - field.y * s);
    let hy = v * (field.y * c + field.x * s);
    BlochVector::new(hy * m.z, -hx * m.z, hx * m.y - hy * m.x)
}

/// Full nonlinear mean-field flow of one ensemble.
pub fn rhs_meanfield(m: BlochVector, p: &EnsembleParams) -> BlochVector {
    rhs_bare(m, p) + rhs_interaction(m, p.coupling, p.theta)
}

/// Coupled flows of two ensembles; returns `(ṁ_A, ṁ_B)`.
pub fn rhs_twogroup(
    ma: BlochVector,
    mb: BlochVector,
    p: &TwoGroupParams,
) -> (BlochVector, BlochVector) {
    let da = rhs_meanfield(ma, &p.group_a()) + rhs_cross(ma, mb, p.coupling_ab, p.theta_ab);
    let db = rhs_meanfield(mb, &p.group_b()) + rhs_cross(mb, ma, p.coupling_ab, p.theta_ba());
    (da, db)
}

/// Selectable flow, used where a caller picks a right-hand side by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    MeanField,
    Bare,
    Interaction,
    Coherent,
    Dissipative,
    /// Interaction plus dissipation without the bare rotation.
    InteractionDissipative,
}

impl FlowKind {
    pub fn eval(self, m: BlochVector, p: &EnsembleParams) -> BlochVector {
        match self {
            FlowKind::MeanField => rhs_meanfield(m, p),
            FlowKind::Bare => rhs_bare(m, p),
            FlowKind::Interaction => rhs_interaction(m, p.coupling, p.theta),
            FlowKind::Coherent => rhs_coherent(m, p.omega0),
            FlowKind::Dissipative => rhs_dissipative(m, p.gamma_plus, p.gamma_minus),
            FlowKind::InteractionDissipative => {
                rhs_interaction(m, p.coupling, p.theta)
                    + rhs_dissipative(m, p.gamma_plus, p.gamma_minus)
            }
        }
    }
}
