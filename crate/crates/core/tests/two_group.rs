use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use tlsync_core::spectral::dominant_frequency;
use tlsync_core::spectral::spectrum_with_carrier;
use tlsync_core::two_group::*;
use tlsync_core::TwoGroupParams;

/// Reference detuned pair in units of `γ₊`.
fn detuned(delta: f64) -> TwoGroupParams {
    TwoGroupParams::symmetric(1.0, 5.0, 6.0, 6.0, delta)
}

fn phase_switch(theta_a: f64) -> TwoGroupParams {
    TwoGroupParams { theta_a, ..TwoGroupParams::symmetric(1.0, 5.0, 6.0, 3.0, 1.0) }
}

fn verdict(p: &TwoGroupParams) -> SyncVerdict {
    classify(p, &RunControls::default()).unwrap().verdict
}

#[test]
fn zero_detuning_locks() {
    let c = classify(&detuned(0.0), &RunControls::default()).unwrap();
    assert_eq!(c.verdict, SyncVerdict::Full);
    assert_eq!(c.locked_difference(), Some(0.0));
    assert!(c.resolution <= 0.02);
}

#[test]
fn small_detuning_locks_large_detuning_splits() {
    assert_eq!(verdict(&detuned(0.1)), SyncVerdict::Full);
    let run = RunControls::default();
    let c = classify(&detuned(0.5), &run).unwrap();
    assert_eq!(c.verdict, SyncVerdict::Partial);
    assert!(c.delta_omega_ab.unwrap() > 0.0);

    let traj = simulate(&detuned(0.5), &run).unwrap();
    let line = |g| {
        let s = spectrum_with_carrier(&traj.series(g), run.transient_fraction, run.window, run.carrier).unwrap();
        dominant_frequency(&s).unwrap()
    };
    assert!((line(0) - line(1)).abs() > c.resolution);
}

#[test]
fn phase_of_group_a_switches_to_full() {
    assert_eq!(verdict(&phase_switch(FRAC_PI_2)), SyncVerdict::Partial);
    assert_eq!(verdict(&phase_switch(-FRAC_PI_2)), SyncVerdict::Full);
}

#[test]
fn difference_is_odd_in_detuning() {
    let run = RunControls::default();
    for delta in [0.3, 0.6, 1.0] {
        let plus = classify(&detuned(delta), &run).unwrap();
        let minus = classify(&detuned(-delta), &run).unwrap();
        let (a, b) = (plus.locked_difference().unwrap(), minus.locked_difference().unwrap());
        assert!((a + b).abs() < 2.0 * plus.resolution, "δ={delta}: {a} vs {b}");
    }
}

#[test]
fn decoupled_groups_keep_their_own_frequencies() {
    let run = RunControls::default();
    let delta = 0.8;
    let p = TwoGroupParams { coupling_ab: 0.0, theta_a: FRAC_PI_3, ..detuned(delta) };
    let c = classify(&p, &run).unwrap();
    assert_eq!(c.verdict, SyncVerdict::Partial);
    let shift = 0.5 * p.gamma_sum() / FRAC_PI_3.tan();
    assert!((c.omega_a.unwrap() - (0.5 * delta - shift)).abs() < c.resolution);
    assert!((c.omega_b.unwrap() + 0.5 * delta).abs() < c.resolution);
}

#[test]
fn locked_cells_stay_locked_with_stronger_cross_coupling() {
    let deltas: Vec<f64> = (0..9).map(|k| 0.075 * k as f64).collect();
    let couplings = [0.5, 1.0, 1.5, 2.0];
    let map = arnold_tongue(&detuned(0.0), &deltas, &couplings, &RunControls::default()).unwrap();
    let full = |i: usize, j: usize| matches!(&map.cells[i][j], Ok(c) if c.verdict == SyncVerdict::Full);
    for i in 1..couplings.len() {
        for j in 0..deltas.len() {
            if full(i - 1, j) {
                assert!(full(i, j), "V_AB={} δ={} unlocked", couplings[i], deltas[j]);
            }
        }
        assert!(map.locked_width(i) >= map.locked_width(i - 1));
    }
    for i in 0..couplings.len() {
        assert!(full(i, 0));
    }
}

#[test]
fn uncoupled_row_never_locks_off_zero() {
    let deltas = [0.0, 0.2, 0.4];
    let map = arnold_tongue(&detuned(0.0), &deltas, &[0.0], &RunControls::default()).unwrap();
    for (j, cell) in map.cells[0].iter().enumerate().skip(1) {
        let c = cell.as_ref().unwrap();
        assert_eq!(c.verdict, SyncVerdict::Partial, "δ={}", deltas[j]);
        assert!(c.delta_omega_ab.unwrap().abs() > 0.0);
    }
}

#[test]
fn phase_tuning_moves_the_window() {
    let deltas: Vec<f64> = (0..33).map(|k| -0.6 + 0.05 * k as f64).collect();
    let curves =
        phase_tuning_scan(&detuned(0.0), &[FRAC_PI_2, FRAC_PI_4], &deltas, &RunControls::default()).unwrap();
    let centered = curves[0].window_center().unwrap();
    let shifted = curves[1].window_center().unwrap();
    assert!(centered.abs() < 0.05, "{centered}");
    let expected = 0.5 * detuned(0.0).gamma_sum() / FRAC_PI_4.tan();
    assert!((shifted - expected).abs() < 0.1, "{shifted} vs {expected}");
}

#[test]
fn empty_grids_are_rejected() {
    assert!(arnold_tongue(&detuned(0.0), &[], &[1.0], &RunControls::default()).is_err());
    assert!(arnold_tongue(&detuned(0.0), &[0.2, 0.1], &[1.0], &RunControls::default()).is_err());
    assert!(phase_tuning_scan(&detuned(0.0), &[], &[0.0], &RunControls::default()).is_err());
}
