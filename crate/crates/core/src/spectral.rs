//! Synchronization observables computed from sampled trajectories.
//!
//! Spectra are taken of the complex amplitude `<σ⁺>(t) = (m_x + i m_y)/2`, so
//! the sense of rotation is kept: a counter-clockwise rotation at `ω` shows up
//! at `+ω`. Frequencies are angular throughout.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::integrate::Series;

/// Minimum retained samples for [`order_parameter`].
pub const MIN_ORDER_SAMPLES: usize = 32;
/// Minimum retained samples for [`spectrum`].
pub const MIN_SPECTRUM_SAMPLES: usize = 256;
/// Order-parameter level separating synchronized from unsynchronized runs.
pub const DEFAULT_SYNC_THRESHOLD: f64 = 1e-3;
/// A dominant line must exceed the median magnitude by this factor.
pub const LINE_CONTRAST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn weight(self, n: usize, len: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => {
                if len < 2 {
                    1.0
                } else {
                    let x = std::f64::consts::PI * n as f64 / (len - 1) as f64;
                    x.sin().powi(2)
                }
            }
        }
    }
}

/// Transient to discard: the larger of `max(20/(γ₊+γ₋), 40π/|ω₀|)` and half
/// the run, as a fraction of `t_end`. Returns a value above 1 when the run is
/// too short to leave anything.
pub fn default_transient_fraction(gamma_sum: f64, omega0: f64, t_end: f64) -> f64 {
    let mut t = 20.0 / gamma_sum;
    if omega0 != 0.0 {
        t = t.max(40.0 * std::f64::consts::PI / omega0.abs());
    }
    (t / t_end).max(0.5)
}

fn retained<'a>(series: &Series<'a>, transient_fraction: f64) -> Result<(usize, &'a [crate::BlochVector])> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::InvalidInput(format!(
            "transient fraction {transient_fraction} must lie in [0, 1)"
        )));
    }
    let start = (series.len() as f64 * transient_fraction).floor() as usize;
    Ok((start, &series.samples[start.min(series.len())..]))
}

/// Time average of `|<σ⁺>|` over the post-transient part of the series.
///
/// The caller is responsible for making the retained window long compared to
/// the oscillation period; only a minimum sample count is enforced.
pub fn order_parameter(series: &Series<'_>, transient_fraction: f64) -> Result<f64> {
    let (_, tail) = retained(series, transient_fraction)?;
    if tail.len() < MIN_ORDER_SAMPLES {
        return Err(Error::WindowTooShort { needed: MIN_ORDER_SAMPLES, available: tail.len() });
    }
    let sum: f64 = tail.iter().map(|m| m.sigma_plus().norm()).sum();
    Ok(sum / tail.len() as f64)
}

/// Magnitude spectrum on an increasing angular-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Grid spacing `2π/(n_fft·dt)`.
    pub resolution: f64,
    /// Index of the zero-frequency bin of the transformed signal; it lies at
    /// `−carrier` on the reported grid and is skipped by the peak search.
    pub dc_index: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Sum of squared magnitudes. With the `1/√n` normalization this equals
    /// the energy of the windowed signal.
    pub fn energy(&self) -> f64 {
        self.magnitude.iter().map(|m| m * m).sum()
    }
}

/// Spectrum of `<σ⁺>(t)` over the post-transient window.
pub fn spectrum(series: &Series<'_>, transient_fraction: f64, window: Window) -> Result<Spectrum> {
    spectrum_with_carrier(series, transient_fraction, window, 0.0)
}

/// Like [`spectrum`], but the signal is multiplied by `e^{i·carrier·t}` before
/// the transform and the grid is shifted back by `carrier`. A line at `ω`
/// therefore stays at `ω`, while the excluded zero bin moves to `−carrier`.
/// Useful when a line of interest may sit at or near zero frequency.
pub fn spectrum_with_carrier(
    series: &Series<'_>,
    transient_fraction: f64,
    window: Window,
    carrier: f64,
) -> Result<Spectrum> {
    let (start, tail) = retained(series, transient_fraction)?;
    let len = tail.len();
    if len < MIN_SPECTRUM_SAMPLES {
        return Err(Error::WindowTooShort { needed: MIN_SPECTRUM_SAMPLES, available: len });
    }
    let n = len.next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, m) in tail.iter().enumerate() {
        let t = series.time(start + k);
        let rot = Complex64::from_polar(1.0, carrier * t);
        buf[k] = m.sigma_plus() * rot * window.weight(k, len);
    }
    fft_forward(n).process(&mut buf);

    let norm = 1.0 / (n as f64).sqrt();
    let resolution = 2.0 * std::f64::consts::PI / (n as f64 * series.dt);
    let half = n / 2;
    let mut omega = Vec::with_capacity(n);
    let mut magnitude = Vec::with_capacity(n);
    // fftshift: bins n/2..n are the negative frequencies
    for i in (half..n).chain(0..half) {
        let k = i as f64 - if i >= half { n as f64 } else { 0.0 };
        omega.push(k * resolution - carrier);
        magnitude.push(buf[i].norm() * norm);
    }
    Ok(Spectrum { omega, magnitude, resolution, dc_index: n - half })
}

fn fft_forward(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

/// Energy of the windowed post-transient signal, the reference for Parseval
/// checks of [`spectrum`].
pub fn windowed_energy(series: &Series<'_>, transient_fraction: f64, window: Window) -> Result<f64> {
    let (_, tail) = retained(series, transient_fraction)?;
    Ok(tail
        .iter()
        .enumerate()
        .map(|(k, m)| (m.sigma_plus() * window.weight(k, tail.len())).norm_sqr())
        .sum())
}

/// Location of the strongest line, refined by a three-point parabola through
/// the log-magnitudes around the peak bin.
pub fn dominant_frequency(s: &Spectrum) -> Result<f64> {
    let mut peak = None;
    for (i, &m) in s.magnitude.iter().enumerate() {
        if i == s.dc_index {
            continue;
        }
        match peak {
            Some((_, best)) if m <= best => {}
            _ => peak = Some((i, m)),
        }
    }
    let (i, peak_mag) = peak.ok_or(Error::NoDominantLine { contrast: 0.0 })?;

    let mut sorted: Vec<f64> = s.magnitude.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let contrast = if median > 0.0 { peak_mag / median } else { f64::INFINITY };
    if !(peak_mag > 0.0) || contrast <= LINE_CONTRAST {
        return Err(Error::NoDominantLine { contrast });
    }

    let mut omega = s.omega[i];
    if i > 0 && i + 1 < s.len() {
        let floor = f64::MIN_POSITIVE;
        let a = s.magnitude[i - 1].max(floor).ln();
        let b = peak_mag.ln();
        let c = s.magnitude[i + 1].max(floor).ln();
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            let offset = 0.5 * (a - c) / denom;
            if offset.abs() <= 0.5 {
                omega += offset * s.resolution;
            }
        }
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochVector;
    use crate::integrate::Trajectory;
    use std::f64::consts::PI;

    fn tone(omega: f64, r: f64, dt: f64, n: usize) -> Trajectory {
        let samples =
            (0..n).map(|k| BlochVector::new(r * (omega * k as f64 * dt).cos(), r * (omega * k as f64 * dt).sin(), 0.0)).collect();
        Trajectory::new(0.0, dt, vec![samples]).unwrap()
    }

    #[test]
    fn order_parameter_of_fixed_point_is_zero() {
        let traj = Trajectory::new(0.0, 0.1, vec![vec![BlochVector::new(0.0, 0.0, 0.4); 100]]).unwrap();
        assert_eq!(order_parameter(&traj.series(0), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn order_parameter_of_tone_is_half_radius() {
        let traj = tone(1.3, 0.4, 0.05, 1000);
        let op = order_parameter(&traj.series(0), 0.5).unwrap();
        assert!((op - 0.2).abs() < 1e-12);
    }

    #[test]
    fn short_windows_are_rejected() {
        let traj = tone(1.0, 0.4, 0.1, 300);
        assert!(matches!(order_parameter(&traj.series(0), 0.95), Err(Error::WindowTooShort { .. })));
        assert!(matches!(
            spectrum(&traj.series(0), 0.5, Window::Rectangular),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(order_parameter(&traj.series(0), 1.0).is_err());
    }

    #[test]
    fn pure_tone_peak() {
        let omega = 1.234;
        let traj = tone(omega, 0.3, 0.05, 4000);
        for window in [Window::Rectangular, Window::Hann] {
            let s = spectrum(&traj.series(0), 0.0, window).unwrap();
            assert!(s.omega.windows(2).all(|w| w[1] > w[0]));
            assert!(s.magnitude.iter().all(|&m| m >= 0.0));
            let found = dominant_frequency(&s).unwrap();
            assert!((found - omega).abs() <= 0.5 * s.resolution, "{found} vs {omega}");
        }
    }

    #[test]
    fn negative_rotation_is_negative_frequency() {
        let traj = tone(-0.8, 0.3, 0.05, 2048);
        let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
        assert!((dominant_frequency(&s).unwrap() + 0.8).abs() < s.resolution);
    }

    #[test]
    fn carrier_keeps_line_position() {
        let traj = tone(0.0, 0.3, 0.05, 2048);
        let plain = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
        assert!(dominant_frequency(&plain).map_or(true, |w| w.abs() > plain.resolution));
        let shifted = spectrum_with_carrier(&traj.series(0), 0.0, Window::Rectangular, 3.0).unwrap();
        assert!((shifted.omega[shifted.dc_index] + 3.0).abs() < 1e-12);
        assert!(dominant_frequency(&shifted).unwrap().abs() < shifted.resolution);
    }

    #[test]
    fn dc_bin_sits_at_zero_without_carrier() {
        let traj = tone(1.0, 0.3, 0.1, 512);
        let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
        assert_eq!(s.omega[s.dc_index], 0.0);
        assert!((s.resolution - 2.0 * PI / (512.0 * 0.1)).abs() < 1e-15);
    }

    #[test]
    fn flat_spectrum_has_no_line() {
        let mut samples = vec![BlochVector::ZERO; 512];
        samples[0] = BlochVector::new(0.2, 0.0, 0.0);
        let traj = Trajectory::new(0.0, 0.1, vec![samples]).unwrap();
        let s = spectrum(&traj.series(0), 0.0, Window::Rectangular).unwrap();
        assert!(matches!(dominant_frequency(&s), Err(Error::NoDominantLine { .. })));
    }

    #[test]
    fn transient_default() {
        assert_eq!(default_transient_fraction(1.0, 1.0, 1000.0), 0.5);
        let f = default_transient_fraction(1.0, 0.1, 1000.0);
        assert!((f - 0.4 * PI * 1000.0 / 1000.0).abs() < 1e-12);
    }
}
