use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use proptest::prelude::*;
use tlsync_core::dynamics::rhs_meanfield;
use tlsync_core::integrate::integrate;
use tlsync_core::spectral::*;
use tlsync_core::stability::{analytic_limit_cycle, synchronization_frequency};
use tlsync_core::{BlochVector, EnsembleParams, Error, IntegratorControls, Trajectory};

fn tone(omega: f64, amp: f64, dt: f64, n: usize, perturb: f64) -> Trajectory {
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            let jitter = Complex64::new((1.7 * k as f64).sin(), (2.3 * k as f64).cos()) * (perturb * amp);
            BlochVector::from_sigma_plus(Complex64::from_polar(amp, omega * t) + jitter, 0.0)
        })
        .collect();
    Trajectory::new(0.0, dt, vec![samples]).unwrap()
}

fn run(p: &EnsembleParams, t_end: f64) -> Trajectory {
    integrate(|m| rhs_meanfield(m, p), BlochVector::DEFAULT_INITIAL, t_end, 0.1, &IntegratorControls::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parseval_holds(omega in -5.0..5.0f64, n in 300usize..3000, hann in any::<bool>(), perturb in 0.0..0.5f64) {
        let window = if hann { Window::Hann } else { Window::Rectangular };
        let traj = tone(omega, 0.3, 0.1, n, perturb);
        let s = spectrum(&traj.series(0), 0.0, window).unwrap();
        let e = windowed_energy(&traj.series(0), 0.0, window).unwrap();
        prop_assert!((s.energy() - e).abs() <= 1e-8 * e);
    }

    #[test]
    fn tone_frequency_is_recovered(omega in -4.0..4.0f64, n in 512usize..4096) {
        let traj = tone(omega, 0.2, 0.1, n, 0.01);
        let s = spectrum(&traj.series(0), 0.0, Window::Hann).unwrap();
        prop_assume!((omega / s.resolution).abs() > 2.0);
        let w = dominant_frequency(&s).unwrap();
        prop_assert!((w - omega).abs() < 0.1 * s.resolution, "{w} vs {omega}, bin {}", s.resolution);
    }

    // The log-parabola fits the Dirichlet kernel less well than the Hann
    // lobe; a dense sweep puts the worst case at 0.29 bin.
    #[test]
    fn rectangular_tone_within_three_tenths_bin(omega in -4.0..4.0f64, n in 512usize..4096) {
        let traj = tone(omega, 0.2, 0.1, n, 0.01);
        let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
        prop_assume!((omega / s.resolution).abs() > 2.0);
        let w = dominant_frequency(&s).unwrap();
        prop_assert!((w - omega).abs() < 0.3 * s.resolution, "{w} vs {omega}, bin {}", s.resolution);
    }
}

#[test]
fn spectrum_grid_is_uniform_and_increasing() {
    let traj = tone(1.0, 0.2, 0.05, 1000, 0.0);
    let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
    assert_eq!(s.len(), 1024);
    for w in s.omega.windows(2) {
        assert!(((w[1] - w[0]) - s.resolution).abs() < 1e-12);
    }
    assert!(s.magnitude.iter().all(|&m| m >= 0.0));
    assert_eq!(s.omega[s.dc_index], 0.0);
}

#[test]
fn fixed_point_has_no_order() {
    let samples = vec![BlochVector::new(0.0, 0.0, 2.0 / 3.0); 400];
    let traj = Trajectory::new(0.0, 0.1, vec![samples]).unwrap();
    assert_eq!(order_parameter(&traj.series(0), 0.5).unwrap(), 0.0);
    let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
    assert!(matches!(dominant_frequency(&s), Err(Error::NoDominantLine { .. })));
}

#[test]
fn order_parameter_of_reference_cycle() {
    let p = EnsembleParams::from_ratios(1.0, 1.0, FRAC_PI_2, 5.0, 1.0).unwrap();
    let r = analytic_limit_cycle(&p).unwrap().unwrap().radius;
    let order = order_parameter(&run(&p, 400.0).series(0), 0.5).unwrap();
    assert!((order - 0.2041).abs() < 1e-3);
    assert!((order - 0.5 * r).abs() < 1e-6);
}

#[test]
fn order_parameter_vanishes_below_boundary() {
    let p = EnsembleParams::from_ratios(1.0, 0.375, FRAC_PI_2, 5.0, 1.0).unwrap();
    assert!(order_parameter(&run(&p, 400.0).series(0), 0.5).unwrap() < 1e-4);
}

// The cycle radius peaks at V = 2V_c, so the rise is checked on (V_c, 2V_c].
#[test]
fn order_parameter_onset_is_monotone() {
    let couplings = [0.3, 0.5, 0.7, 0.76, 0.8, 0.9, 1.0, 1.2, 1.5];
    let orders: Vec<f64> = couplings
        .iter()
        .map(|&v| {
            let p = EnsembleParams::from_ratios(1.0, v, FRAC_PI_2, 5.0, 1.0).unwrap();
            order_parameter(&run(&p, 1500.0).series(0), 0.5).unwrap()
        })
        .collect();
    for (v, o) in couplings.iter().zip(&orders) {
        if *v < 0.75 {
            assert!(*o < 1e-4, "V={v}: {o}");
        }
    }
    let above: Vec<f64> = couplings.iter().zip(&orders).filter(|(v, _)| **v > 0.75).map(|(_, o)| *o).collect();
    assert!(above[0] > 1e-3);
    assert!(above.windows(2).all(|w| w[1] > w[0]), "{orders:?}");

    let beyond = EnsembleParams::from_ratios(1.0, 2.0, FRAC_PI_2, 5.0, 1.0).unwrap();
    let past_peak = order_parameter(&run(&beyond, 400.0).series(0), 0.5).unwrap();
    assert!(past_peak < *above.last().unwrap());
}

#[test]
fn shifted_line_at_quarter_phase() {
    let p = EnsembleParams::from_ratios(2.0, 5.0, FRAC_PI_4, 5.0, 1.0).unwrap();
    let traj = run(&p, 600.0);
    let s = spectrum(&traj.series(0), 0.5, Window::Rectangular).unwrap();
    let w = dominant_frequency(&s).unwrap();
    let expected = synchronization_frequency(&p).unwrap();
    assert!((expected - 1.5).abs() < 1e-12);
    assert!((w - expected).abs() < s.resolution, "{w} vs {expected}");
}

#[test]
fn short_windows_are_rejected() {
    let traj = tone(1.0, 0.2, 0.1, 300, 0.0);
    assert!(matches!(
        spectrum(&traj.series(0), 0.5, Window::Rectangular),
        Err(Error::WindowTooShort { needed: 256, available: 150 })
    ));
    assert!(order_parameter(&traj.series(0), 1.0).is_err());
}
