//! Exact Lindblad evolution of a small ensemble, the ground truth the
//! mean-field flow is checked against.
//!
//! Basis states are bit strings: bit `i` of the index is 1 when site `i` is
//! excited (`σᵢ^z = +1`). Density matrices are dense and row-major; the
//! Liouvillian is applied without forming a superoperator, using sparse
//! ladder operators, so memory stays at a few copies of the state.
//!
//! Two models of the pair interaction are available, see [`PairCoupling`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bloch::{BlochVector, EnsembleParams};
use crate::error::{Error, Result};
use crate::integrate::{solve, IntegratorControls};

/// Largest number of sites accepted (Hilbert dimension 256).
pub const MAX_SITES: usize = 8;
/// Most negative eigenvalue tolerated before an evolution is aborted.
pub const POSITIVITY_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the all-to-all pair term is represented at finite N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCoupling {
    /// `H_int = (V/N) Σ_{i<j} (σᵢ⁺σⱼ⁻ e^{iθ} + h.c.)` taken literally. This
    /// Hamiltonian commutes with the total `S^z`, so for `sin θ ≠ 0` its
    /// dynamics does not approach the mean-field flow, whose interaction
    /// changes `m_z`.
    #[default]
    Hamiltonian,
    /// Exchange `(V cos θ/N) Σ_{i<j} (σᵢ⁺σⱼ⁻ + h.c.)` plus a collective
    /// dissipator `(2V|sin θ|/N) D[S^∓]`, with `S⁻` for `sin θ > 0` and `S⁺`
    /// otherwise. Its mean-field limit is exactly the nonlinear flow, and
    /// deviations shrink as `1/N`.
    Collective,
}

/// Sparse operator as `(row, col, value)` triplets.
#[derive(Debug, Clone, Default)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn push(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries.push((row, col, v));
    }

    fn adjoint(&self) -> SparseOp {
        SparseOp { entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect() }
    }

    /// `self† · self`, merged into unique triplets.
    fn adjoint_times_self(&self, dim: usize) -> SparseOp {
        // columns of self grouped by row
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in &self.entries {
            by_row[r].push((c, v));
        }
        let mut acc = std::collections::BTreeMap::new();
        for row in &by_row {
            for &(a, va) in row {
                for &(b, vb) in row {
                    *acc.entry((a, b)).or_insert(ZERO) += va.conj() * vb;
                }
            }
        }
        SparseOp { entries: acc.into_iter().filter(|(_, v)| v.norm() > 0.0).map(|((a, b), v)| (a, b, v)).collect() }
    }

    /// `out += coeff · self · rho`
    fn left_mul_add(&self, rho: &[Complex64], out: &mut [Complex64], dim: usize, coeff: Complex64) {
        for &(r, c, v) in &self.entries {
            let w = coeff * v;
            let src = &rho[c * dim..(c + 1) * dim];
            let dst = &mut out[r * dim..(r + 1) * dim];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }

    /// `out += coeff · rho · self`
    fn right_mul_add(&self, rho: &[Complex64], out: &mut [Complex64], dim: usize, coeff: Complex64) {
        for &(k, c, v) in &self.entries {
            let w = coeff * v;
            for r in 0..dim {
                out[r * dim + c] += w * rho[r * dim + k];
            }
        }
    }
}

/// Density matrix of `sites` two-level systems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: usize,
    dim: usize,
    data: Vec<Complex64>,
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 {
        return Err(Error::InvalidInput("need at least one site".into()));
    }
    if sites > MAX_SITES {
        return Err(Error::DimensionTooLarge { sites, max: MAX_SITES });
    }
    Ok(())
}

impl DensityMatrix {
    pub fn from_data(sites: usize, data: Vec<Complex64>) -> Result<Self> {
        check_sites(sites)?;
        let dim = 1usize << sites;
        if data.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { sites, dim, data })
    }

    /// Single-site state in the (down, up) basis.
    fn single(m: BlochVector) -> [[Complex64; 2]; 2] {
        let coh = Complex64::new(0.5 * m.x, 0.5 * m.y);
        [
            [Complex64::new(0.5 * (1.0 - m.z), 0.0), coh],
            [coh.conj(), Complex64::new(0.5 * (1.0 + m.z), 0.0)],
        ]
    }

    /// `ρ₁^{⊗N}` for the single-site Bloch vector `m`.
    pub fn product(m: BlochVector, sites: usize) -> Result<Self> {
        Self::product_of(&vec![m; sites])
    }

    /// `ρ₁ ⊗ ρ₂ ⊗ …`, site `i` taking `states[i]`.
    pub fn product_of(states: &[BlochVector]) -> Result<Self> {
        let sites = states.len();
        check_sites(sites)?;
        if let Some(m) = states.iter().find(|m| !m.is_physical()) {
            return Err(Error::InvalidInput(format!("{m:?} is not a valid Bloch vector")));
        }
        let singles: Vec<_> = states.iter().map(|&m| Self::single(m)).collect();
        let dim = 1usize << sites;
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                data[a * dim + b] = singles
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (i, s)| acc * s[(a >> i) & 1][(b >> i) & 1]);
            }
        }
        Ok(Self { sites, dim, data })
    }

    pub fn maximally_mixed(sites: usize) -> Result<Self> {
        Self::product(BlochVector::ZERO, sites)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|a| self.get(a, a)).sum()
    }

    /// `max |ρ_ab − conj(ρ_ba)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in a..self.dim {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let m = DMatrix::from_fn(n, n, |r, c| 0.5 * (self.get(r, c) + self.get(c, r).conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `<σᵢ⁺> = Tr(ρ σᵢ⁺)`.
    pub fn sigma_plus(&self, site: usize) -> Complex64 {
        let bit = 1usize << site;
        (0..self.dim).filter(|b| b & bit == 0).map(|b| self.get(b, b | bit)).sum()
    }

    pub fn sigma_z(&self, site: usize) -> f64 {
        let bit = 1usize << site;
        (0..self.dim)
            .map(|a| if a & bit != 0 { self.get(a, a).re } else { -self.get(a, a).re })
            .sum()
    }

    /// Bloch vector of the reduced state of one site.
    pub fn site_bloch(&self, site: usize) -> BlochVector {
        BlochVector::from_sigma_plus(self.sigma_plus(site), self.sigma_z(site))
    }

    /// Site average `(1/N) Σᵢ <σᵢ⁺>`.
    pub fn mean_sigma_plus(&self) -> Complex64 {
        (0..self.sites).map(|i| self.sigma_plus(i)).sum::<Complex64>() / self.sites as f64
    }
}

struct Jump {
    rate: f64,
    op: SparseOp,
    op_dag: SparseOp,
    op_dag_op: SparseOp,
}

impl Jump {
    fn new(rate: f64, op: SparseOp, dim: usize) -> Self {
        let op_dag = op.adjoint();
        let op_dag_op = op.adjoint_times_self(dim);
        Self { rate, op, op_dag, op_dag_op }
    }
}

/// Generator of the finite-N master equation.
pub struct ExactModel {
    sites: usize,
    dim: usize,
    hamiltonian: SparseOp,
    jumps: Vec<Jump>,
}

fn lowering(site: usize, dim: usize) -> SparseOp {
    let bit = 1usize << site;
    let mut op = SparseOp::default();
    for c in (0..dim).filter(|c| c & bit != 0) {
        op.push(c ^ bit, c, Complex64::new(1.0, 0.0));
    }
    op
}

impl ExactModel {
    pub fn new(p: &EnsembleParams, sites: usize, coupling: PairCoupling) -> Result<Self> {
        p.validate()?;
        check_sites(sites)?;
        let dim = 1usize << sites;
        let n = sites as f64;

        let (hop, collective) = match coupling {
            PairCoupling::Hamiltonian => (Complex64::from_polar(p.coupling / n, p.theta), None),
            PairCoupling::Collective => {
                let (s, c) = p.theta.sin_cos();
                let kappa = 2.0 * p.coupling * s.abs() / n;
                (Complex64::new(p.coupling * c / n, 0.0), (kappa > 0.0).then_some((kappa, s > 0.0)))
            }
        };

        let mut hamiltonian = SparseOp::default();
        for a in 0..dim {
            let up = a.count_ones() as f64;
            let e = 0.5 * p.omega0 * (2.0 * up - n);
            if e != 0.0 {
                hamiltonian.push(a, a, Complex64::new(e, 0.0));
            }
        }
        if hop != ZERO {
            for i in 0..sites {
                for j in (i + 1)..sites {
                    let (bi, bj) = (1usize << i, 1usize << j);
                    for c in 0..dim {
                        // σᵢ⁺σⱼ⁻ e^{iθ}: i down → up, j up → down
                        if c & bi == 0 && c & bj != 0 {
                            hamiltonian.push(c ^ bi ^ bj, c, hop);
                        }
                        // h.c.: σᵢ⁻σⱼ⁺ e^{−iθ}
                        if c & bi != 0 && c & bj == 0 {
                            hamiltonian.push(c ^ bi ^ bj, c, hop.conj());
                        }
                    }
                }
            }
        }

        let mut jumps = Vec::new();
        for i in 0..sites {
            let lower = lowering(i, dim);
            if p.gamma_minus > 0.0 {
                jumps.push(Jump::new(p.gamma_minus, lower.clone(), dim));
            }
            if p.gamma_plus > 0.0 {
                jumps.push(Jump::new(p.gamma_plus, lower.adjoint(), dim));
            }
        }
        if let Some((kappa, decay)) = collective {
            let mut s_minus = SparseOp::default();
            for i in 0..sites {
                s_minus.entries.extend(lowering(i, dim).entries);
            }
            let op = if decay { s_minus } else { s_minus.adjoint() };
            jumps.push(Jump::new(kappa, op, dim));
        }
        Ok(Self { sites, dim, hamiltonian, jumps })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `L[ρ]` into `out`; `scratch` must hold `dim²` entries.
    fn apply_into(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let dim = self.dim;
        out.fill(ZERO);
        let i = Complex64::new(0.0, 1.0);
        self.hamiltonian.left_mul_add(rho, out, dim, -i);
        self.hamiltonian.right_mul_add(rho, out, dim, i);
        for jump in &self.jumps {
            let g = Complex64::new(jump.rate, 0.0);
            // L ρ L†
            scratch.fill(ZERO);
            jump.op_dag.right_mul_add(rho, scratch, dim, Complex64::new(1.0, 0.0));
            jump.op.left_mul_add(scratch, out, dim, g);
            jump.op_dag_op.left_mul_add(rho, out, dim, -0.5 * g);
            jump.op_dag_op.right_mul_add(rho, out, dim, -0.5 * g);
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.sites != self.sites {
            return Err(Error::InvalidInput(format!(
                "state has {} sites, model has {}",
                rho.sites, self.sites
            )));
        }
        let mut out = vec![ZERO; self.dim * self.dim];
        let mut scratch = vec![ZERO; self.dim * self.dim];
        self.apply_into(&rho.data, &mut out, &mut scratch);
        Ok(DensityMatrix { sites: self.sites, dim: self.dim, data: out })
    }
}

/// Time derivative `−i[H, ρ] + Σᵢ (γ₊D[σᵢ⁺] + γ₋D[σᵢ⁻])ρ` with the literal
/// pair Hamiltonian.
pub fn liouvillian_apply(rho: &DensityMatrix, p: &EnsembleParams) -> Result<DensityMatrix> {
    ExactModel::new(p, rho.sites(), PairCoupling::Hamiltonian)?.apply(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub coupling: PairCoupling,
    pub integrator: IntegratorControls,
    /// Abort when the smallest eigenvalue falls below `-positivity_tol`.
    pub positivity_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            coupling: PairCoupling::default(),
            integrator: IntegratorControls::adaptive(1e-10, 1e-12),
            positivity_tol: POSITIVITY_TOL,
        }
    }
}

/// Observables and invariant checks at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSample {
    pub sigma_plus: Vec<Complex64>,
    pub sigma_z: Vec<f64>,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl ExactSample {
    pub fn mean_sigma_plus(&self) -> Complex64 {
        self.sigma_plus.iter().sum::<Complex64>() / self.sigma_plus.len() as f64
    }

    pub fn mean_sigma_z(&self) -> f64 {
        self.sigma_z.iter().sum::<f64>() / self.sigma_z.len() as f64
    }

    /// Site-averaged Bloch vector.
    pub fn mean_bloch(&self) -> BlochVector {
        BlochVector::from_sigma_plus(self.mean_sigma_plus(), self.mean_sigma_z())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvolution {
    pub t0: f64,
    pub dt_sample: f64,
    pub samples: Vec<ExactSample>,
    pub final_state: DensityMatrix,
}

impl ExactEvolution {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }
}

fn observe(rho: &DensityMatrix) -> ExactSample {
    ExactSample {
        sigma_plus: (0..rho.sites).map(|i| rho.sigma_plus(i)).collect(),
        sigma_z: (0..rho.sites).map(|i| rho.sigma_z(i)).collect(),
        trace_error: (rho.trace() - Complex64::new(1.0, 0.0)).norm(),
        hermiticity_error: rho.hermiticity_error(),
        min_eigenvalue: rho.min_eigenvalue(),
    }
}

fn pack(data: &[Complex64], out: &mut [f64]) {
    for (k, z) in data.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unpack(y: &[f64], out: &mut [Complex64]) {
    for (k, z) in out.iter_mut().enumerate() {
        *z = Complex64::new(y[2 * k], y[2 * k + 1]);
    }
}

/// Integrates the exact master equation from `rho0`, recording per-site
/// `<σ⁺>` and `<σ^z>` and the trace, Hermiticity and positivity diagnostics.
pub fn evolve_exact(
    rho0: &DensityMatrix,
    p: &EnsembleParams,
    t_end: f64,
    dt_sample: f64,
    options: &OracleOptions,
) -> Result<ExactEvolution> {
    let model = ExactModel::new(p, rho0.sites(), options.coupling)?;
    let dim2 = model.dim * model.dim;
    let mut y0 = vec![0.0; 2 * dim2];
    pack(&rho0.data, &mut y0);

    let mut rho_buf = vec![ZERO; dim2];
    let mut out_buf = vec![ZERO; dim2];
    let mut scratch = vec![ZERO; dim2];
    let mut samples = Vec::new();
    let mut current = rho0.clone();
    solve(
        |y, dy| {
            unpack(y, &mut rho_buf);
            model.apply_into(&rho_buf, &mut out_buf, &mut scratch);
            pack(&out_buf, dy);
        },
        &y0,
        t_end,
        dt_sample,
        &options.integrator,
        |_, t, y| {
            unpack(y, &mut current.data);
            let sample = observe(&current);
            if sample.min_eigenvalue < -options.positivity_tol {
                return Err(Error::PositivityBreach { t, min_eigenvalue: sample.min_eigenvalue });
            }
            samples.push(sample);
            Ok(())
        },
    )?;
    Ok(ExactEvolution { t0: 0.0, dt_sample, samples, final_state: current })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rhs_bare;

    fn params(omega0: f64, v: f64, theta: f64, gp: f64, gm: f64) -> EnsembleParams {
        EnsembleParams::new(omega0, v, theta, gp, gm).unwrap()
    }

    #[test]
    fn product_state_marginals() {
        let m = BlochVector::new(-0.5, 0.4, 0.1);
        let rho = DensityMatrix::product(m, 3).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        for i in 0..3 {
            assert!(rho.site_bloch(i).max_abs_diff(m) < 1e-15);
        }
        assert!(rho.hermiticity_error() < 1e-16);
        assert!(rho.min_eigenvalue() > -1e-14);
    }

    #[test]
    fn too_many_sites() {
        assert_eq!(
            DensityMatrix::maximally_mixed(9).unwrap_err(),
            Error::DimensionTooLarge { sites: 9, max: 8 }
        );
        let p = params(1.0, 1.0, 0.0, 1.0, 1.0);
        assert!(matches!(ExactModel::new(&p, 9, PairCoupling::Hamiltonian), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn single_site_reproduces_bare_flow() {
        let p = params(1.0, 3.0, 0.7, 0.2, 1.0);
        let m = BlochVector::new(-0.5, 0.4, 0.1);
        let rho = DensityMatrix::product(m, 1).unwrap();
        let d = liouvillian_apply(&rho, &p).unwrap();
        let dm = d.site_bloch(0);
        assert!(dm.max_abs_diff(rhs_bare(m, &p)) < 1e-15, "{dm:?}");
    }

    #[test]
    fn mixed_state_is_stationary_for_balanced_rates() {
        let p = params(1.3, 0.0, 0.0, 0.6, 0.6);
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let d = liouvillian_apply(&rho, &p).unwrap();
        assert!(d.data().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn derivative_is_traceless_and_hermitian() {
        let states = [
            BlochVector::new(0.3, -0.1, 0.5),
            BlochVector::new(-0.6, 0.2, -0.2),
        ];
        let rho = DensityMatrix::product_of(&states).unwrap();
        for coupling in [PairCoupling::Hamiltonian, PairCoupling::Collective] {
            for theta in [-2.0, 0.0, 0.9] {
                let p = params(0.8, 1.7, theta, 0.3, 0.9);
                let d = ExactModel::new(&p, 2, coupling).unwrap().apply(&rho).unwrap();
                assert!(d.trace().norm() < 1e-12);
                assert!(d.hermiticity_error() < 1e-14);
            }
        }
    }

    #[test]
    fn couplings_agree_at_zero_phase() {
        let rho = DensityMatrix::product(BlochVector::new(0.3, -0.1, 0.5), 3).unwrap();
        let p = params(0.8, 1.7, 0.0, 0.3, 0.9);
        let a = ExactModel::new(&p, 3, PairCoupling::Hamiltonian).unwrap().apply(&rho).unwrap();
        let b = ExactModel::new(&p, 3, PairCoupling::Collective).unwrap().apply(&rho).unwrap();
        let worst = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-15);
    }
}
