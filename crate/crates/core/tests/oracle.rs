use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use tlsync_core::dynamics::{rhs_bare, rhs_meanfield};
use tlsync_core::integrate::integrate;
use tlsync_core::oracle::*;
use tlsync_core::{BlochVector, EnsembleParams, Error, IntegratorControls};

fn random_state(sites: usize, rng: &mut StdRng) -> DensityMatrix {
    let dim = 1usize << sites;
    let a: Vec<Complex64> =
        (0..dim * dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    // ρ = A A† / Tr(A A†)
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            rho[r * dim + c] = (0..dim).map(|k| a[r * dim + k] * a[c * dim + k].conj()).sum();
        }
    }
    let tr: f64 = (0..dim).map(|k| rho[k * dim + k].re).sum();
    DensityMatrix::from_data(sites, rho.into_iter().map(|z| z / tr).collect()).unwrap()
}

fn reference() -> EnsembleParams {
    EnsembleParams::from_ratios(1.0, 1.0, FRAC_PI_2, 5.0, 1.0).unwrap()
}

#[test]
fn single_site_derivative_matches_worked_value() {
    let p = EnsembleParams::new(1.0, 0.0, 0.0, 0.2, 1.0).unwrap();
    let rho = DensityMatrix::product(BlochVector::new(-0.5, 0.4, 0.1), 1).unwrap();
    let d = liouvillian_apply(&rho, &p).unwrap().site_bloch(0);
    assert!(d.max_abs_diff(BlochVector::new(-0.1, -0.74, -0.92)) < 1e-15, "{d:?}");
}

#[test]
fn random_states_give_traceless_hermitian_derivatives() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let rho = random_state(2, &mut rng);
        let p = EnsembleParams::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(0.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.01..1.0),
        )
        .unwrap();
        let d = liouvillian_apply(&rho, &p).unwrap();
        assert!(d.trace().norm() < 1e-12);
        assert!(d.hermiticity_error() < 1e-12);
    }
}

#[test]
fn oversized_systems_are_rejected() {
    let p = reference();
    assert!(matches!(DensityMatrix::product(BlochVector::ZERO, 9), Err(Error::DimensionTooLarge { sites: 9, max: 8 })));
    let rho = DensityMatrix::product(BlochVector::ZERO, 8).unwrap();
    assert_eq!(rho.dim(), 256);
    assert!(ExactModel::new(&p, 8, PairCoupling::Hamiltonian).is_ok());
}

#[test]
fn single_site_follows_bare_flow() {
    let p = EnsembleParams::new(1.3, 2.0, 0.4, 0.6, 0.3).unwrap();
    let m0 = BlochVector::DEFAULT_INITIAL;
    let controls = IntegratorControls::adaptive(1e-11, 1e-12);
    let mf = integrate(|m| rhs_bare(m, &p), m0, 8.0, 0.1, &controls).unwrap();
    let options = OracleOptions { integrator: controls, ..OracleOptions::default() };
    let exact = evolve_exact(&DensityMatrix::product(m0, 1).unwrap(), &p, 8.0, 0.1, &options).unwrap();
    assert_eq!(exact.samples.len(), mf.len());
    for (s, m) in exact.samples.iter().zip(mf.group(0)) {
        assert!(s.mean_bloch().max_abs_diff(*m) < 1e-9);
    }
}

fn max_site_spread(s: &ExactSample) -> f64 {
    let first = BlochVector::from_sigma_plus(s.sigma_plus[0], s.sigma_z[0]);
    (1..s.sigma_z.len())
        .map(|i| first.max_abs_diff(BlochVector::from_sigma_plus(s.sigma_plus[i], s.sigma_z[i])))
        .fold(0.0, f64::max)
}

#[test]
fn invariants_hold_along_evolution() {
    for coupling in [PairCoupling::Hamiltonian, PairCoupling::Collective] {
        for sites in [2, 4] {
            let options = OracleOptions { coupling, ..OracleOptions::default() };
            let rho = DensityMatrix::product(BlochVector::DEFAULT_INITIAL, sites).unwrap();
            let ev = evolve_exact(&rho, &reference(), 5.0, 0.1, &options).unwrap();
            for s in &ev.samples {
                assert!(s.trace_error < 1e-9);
                assert!(s.hermiticity_error < 1e-10);
                assert!(s.min_eigenvalue > -1e-8);
            }
        }
    }
}

#[test]
fn symmetric_models_keep_sites_identical() {
    let rho = DensityMatrix::product(BlochVector::DEFAULT_INITIAL, 4).unwrap();
    let zero_phase = EnsembleParams::from_ratios(1.0, 1.0, 0.0, 5.0, 1.0).unwrap();
    for (p, coupling) in [(reference(), PairCoupling::Collective), (zero_phase, PairCoupling::Hamiltonian)] {
        let options = OracleOptions { coupling, ..OracleOptions::default() };
        let ev = evolve_exact(&rho, &p, 5.0, 0.1, &options).unwrap();
        assert!(ev.samples.iter().all(|s| max_site_spread(s) < 1e-9));
    }
}

// Ordering the pairs i < j makes e^{iθ} a directed hop, so the literal
// Hamiltonian singles out site order unless sin θ = 0.
#[test]
fn ordered_pair_phase_breaks_site_symmetry() {
    let rho = DensityMatrix::product(BlochVector::DEFAULT_INITIAL, 3).unwrap();
    let ev = evolve_exact(&rho, &reference(), 5.0, 0.1, &OracleOptions::default()).unwrap();
    assert!(ev.samples.iter().map(max_site_spread).fold(0.0, f64::max) > 1e-3);
}

#[test]
fn uncoupled_pair_stays_product() {
    let p = EnsembleParams::new(0.9, 0.0, 0.0, 0.3, 0.7).unwrap();
    let (a, b) = (BlochVector::new(0.5, 0.1, -0.2), BlochVector::new(-0.3, 0.6, 0.4));
    let rho = DensityMatrix::product_of(&[a, b]).unwrap();
    let ev = evolve_exact(&rho, &p, 3.0, 0.5, &OracleOptions::default()).unwrap();
    let fin = &ev.final_state;
    let (ma, mb) = (fin.site_bloch(0), fin.site_bloch(1));
    let product = DensityMatrix::product_of(&[ma, mb]).unwrap();
    let worst = fin.data().iter().zip(product.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-9);
    let alone = integrate(|m| rhs_bare(m, &p), a, 3.0, 0.5, &IntegratorControls::default()).unwrap();
    assert!(ma.max_abs_diff(alone.last(0)) < 1e-8);
}

#[test]
fn exchange_model_approaches_meanfield() {
    // at θ = 0 both pair models coincide and converge
    let p = EnsembleParams::from_ratios(1.0, 1.0, 0.0, 5.0, 1.0).unwrap();
    let m0 = BlochVector::DEFAULT_INITIAL;
    let mf = integrate(|m| rhs_meanfield(m, &p), m0, 5.0, 0.05, &IntegratorControls::default()).unwrap();
    let deviation = |sites: usize| {
        let ev = evolve_exact(&DensityMatrix::product(m0, sites).unwrap(), &p, 5.0, 0.05, &OracleOptions::default())
            .unwrap();
        ev.samples
            .iter()
            .zip(mf.group(0))
            .map(|(s, m)| (s.mean_sigma_plus() - m.sigma_plus()).norm())
            .fold(0.0, f64::max)
    };
    let devs: Vec<f64> = [1, 2, 4].into_iter().map(deviation).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

#[test]
fn negative_eigenvalues_abort() {
    let options = OracleOptions { positivity_tol: -1.0, ..OracleOptions::default() };
    let rho = DensityMatrix::product(BlochVector::DEFAULT_INITIAL, 1).unwrap();
    let err = evolve_exact(&rho, &reference(), 1.0, 0.1, &options).unwrap_err();
    assert!(matches!(err, Error::PositivityBreach { .. }));
}
