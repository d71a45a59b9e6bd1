use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use tlsync_core::dynamics::rhs_meanfield;
use tlsync_core::integrate::integrate;
use tlsync_core::stability::*;
use tlsync_core::{BlochVector, EnsembleParams, IntegratorControls};

fn finite_difference_jacobian(p: &EnsembleParams, at: BlochVector, h: f64) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for col in 0..3 {
        let mut e = [0.0; 3];
        e[col] = h;
        let e = BlochVector::from_array(e);
        let d = (rhs_meanfield(at + e, p) + -rhs_meanfield(at + -e, p)).to_array();
        for row in 0..3 {
            j[(row, col)] = d[row] / (2.0 * h);
        }
    }
    j
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn params() -> impl Strategy<Value = EnsembleParams> {
    (-3.0..3.0f64, 0.0..5.0f64, -PI..PI, 0.01..2.0f64, 0.01..2.0f64)
        .prop_map(|(w, v, th, gp, gm)| EnsembleParams::new(w, v, th, gp, gm).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn jacobian_matches_finite_differences(p in params()) {
        let fd = finite_difference_jacobian(&p, fixed_point(&p), 1e-6);
        let j = jacobian_at_fixed_point(&p);
        for r in 0..3 {
            for c in 0..3 {
                prop_assert!((fd[(r, c)] - j[r][c]).abs() < 1e-6, "({r},{c}): {} vs {}", fd[(r, c)], j[r][c]);
            }
        }
        let numeric = sorted(fd.complex_eigenvalues().iter().copied().collect());
        let closed = sorted(jacobian_eigenvalues(&p).to_vec());
        for (a, b) in numeric.iter().zip(&closed) {
            prop_assert!((a - b).norm() < 1e-5, "{numeric:?} vs {closed:?}");
        }
    }

    #[test]
    fn cycle_is_self_consistent(
        w in -3.0..3.0f64,
        theta in 0.05..(PI - 0.05),
        ratio in 1.2..50.0f64,
        excess in 1.05..10.0f64,
        phi in 0.0..2.0 * PI,
        flip in any::<bool>(),
    ) {
        // mirrored draws cover the lower hemisphere
        let (theta, ratio) = if flip { (-theta, 1.0 / ratio) } else { (theta, ratio) };
        let vc = synchronization_boundary(theta, ratio).unwrap().value().unwrap();
        let p = EnsembleParams::from_ratios(w, vc * excess, theta, ratio, 1.0).unwrap();
        let cycle = analytic_limit_cycle(&p).unwrap().unwrap();
        prop_assert!(cycle.radius > 0.0 && cycle.c_z.abs() < 1.0);
        prop_assert!(cycle.c_z.powi(2) + cycle.radius.powi(2) <= 1.0 + 1e-6);
        let m = cycle.point(phi);
        let d = rhs_meanfield(m, &p);
        let scale = p.coupling + p.gamma_sum() + cycle.omega_sync.abs();
        prop_assert!(d.z.abs() <= 1e-10 * scale, "ż = {}", d.z);
        let w = cycle.omega_sync;
        prop_assert!((d.x + w * m.y).abs() <= 1e-10 * scale);
        prop_assert!((d.y - w * m.x).abs() <= 1e-10 * scale);
    }

    #[test]
    fn verdict_is_mirror_symmetric(v in 0.0..3.0f64, log_ratio in -2.0..2.0f64, theta in -PI..PI) {
        let ratio = 10f64.powf(log_ratio);
        let a = EnsembleParams::from_ratios(1.0, v, theta, ratio, 1.0).unwrap();
        let b = EnsembleParams::from_ratios(1.0, v, -theta, 1.0 / ratio, 1.0).unwrap();
        prop_assume!(growth_rate(&a).abs() > 1e-12);
        prop_assert_eq!(is_synchronized(&a), is_synchronized(&b));
    }

    #[test]
    fn cycle_presence_matches_eigenvalues(p in params()) {
        prop_assume!(p.theta.sin().abs() > 1e-9);
        let report = stability_report(&p);
        let max_re = report.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(report.synchronized, max_re > 0.0);
        prop_assert_eq!(report.limit_cycle.is_some(), report.synchronized);
    }
}

#[test]
fn boundary_agrees_with_spectrum_on_grid() {
    for theta in [FRAC_PI_2, -FRAC_PI_2] {
        for i in 0..50 {
            let ratio = 10f64.powf(-1.0 + 3.0 * i as f64 / 49.0);
            let boundary = synchronization_boundary(theta, ratio).unwrap();
            for j in 0..50 {
                let v = 3.0 * j as f64 / 49.0;
                let p = EnsembleParams::from_ratios(1.0, v, theta, ratio, 1.0).unwrap();
                let closed = match boundary {
                    CriticalCoupling::Finite(vc) if (v - vc).abs() < 1e-12 => continue,
                    CriticalCoupling::Finite(vc) => v > vc,
                    CriticalCoupling::Never => false,
                };
                let max_re = jacobian_eigenvalues(&p).iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(max_re > 0.0, closed, "θ={theta} ρ={ratio} V={v}");
            }
        }
    }
}

#[test]
fn bisection_recovers_critical_coupling() {
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let p = EnsembleParams::from_ratios(1.0, mid, FRAC_PI_2, 5.0, 1.0).unwrap();
        if growth_rate(&p) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let vc = synchronization_boundary(FRAC_PI_2, 5.0).unwrap().value().unwrap();
    assert!((hi - 0.75).abs() < 1e-12);
    assert!((vc - 0.75).abs() < 1e-15);
}

#[test]
fn stationary_point_from_long_integration() {
    let p = EnsembleParams::from_ratios(0.8, 0.0, 0.0, 5.0, 1.0).unwrap();
    assert!((fixed_point(&p).z - 2.0 / 3.0).abs() < 1e-15);
    let traj = integrate(|m| rhs_meanfield(m, &p), BlochVector::DEFAULT_INITIAL, 40.0, 1.0, &IntegratorControls::default())
        .unwrap();
    assert!(traj.last(0).max_abs_diff(fixed_point(&p)) < 1e-8);
}

#[test]
fn integration_converges_to_the_analytic_cycle() {
    let cases = [(1.0, 1.0, FRAC_PI_2, 5.0), (2.0, 3.0, PI / 3.0, 4.0), (0.5, 2.0, -2.0, 0.2)];
    for (w, v, theta, ratio) in cases {
        let p = EnsembleParams::from_ratios(w, v, theta, ratio, 1.0).unwrap();
        let cycle = analytic_limit_cycle(&p).unwrap().expect("synchronized");
        let traj = integrate(|m| rhs_meanfield(m, &p), BlochVector::DEFAULT_INITIAL, 300.0, 0.1, &IntegratorControls::default())
            .unwrap();
        for m in &traj.group(0)[2500..] {
            assert!((m.z - cycle.c_z).abs() < 1e-4, "{m:?} vs C_z {}", cycle.c_z);
            assert!((2.0 * m.sigma_plus().norm() - cycle.radius).abs() < 1e-3);
        }
    }
}

#[test]
fn shift_stays_within_coupling_band() {
    for k in 1..20 {
        let theta = PI * k as f64 / 20.0;
        let p = EnsembleParams::from_ratios(1.0, 5.0, theta, 5.0, 1.0).unwrap();
        if let Some(c) = analytic_limit_cycle(&p).unwrap() {
            assert!(c.delta_omega.abs() <= p.coupling);
        }
    }
}
