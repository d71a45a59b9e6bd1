//! Two detuned ensembles: classification into full, partial or no
//! synchronization, Arnold-tongue maps and phase-tuning scans.
//!
//! Each run integrates the coupled mean-field flow, takes the spectrum of
//! `<σ⁺_A>(t)` and `<σ⁺_B>(t)` and compares their dominant lines. Two lines
//! closer than the spectral resolution of the run count as one.
//!
//! Grid cells are independent; they are evaluated on the rayon pool and
//! collected in grid order, so results do not depend on scheduling.

use rayon::prelude::*;

use crate::bloch::{BlochVector, TwoGroupParams};
use crate::dynamics::rhs_twogroup;
use crate::error::{Error, Result};
use crate::integrate::{integrate_pair, IntegratorControls, Series, Trajectory};
use crate::spectral::{
    dominant_frequency, order_parameter, spectrum_with_carrier, Window, DEFAULT_SYNC_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunControls {
    pub t_end: f64,
    pub dt_sample: f64,
    pub integrator: IntegratorControls,
    pub transient_fraction: f64,
    pub window: Window,
    /// Heterodyne offset applied before the transform, see
    /// [`spectrum_with_carrier`]. Locked pairs often oscillate near zero
    /// frequency in the rotating frame, where the excluded DC bin would hide
    /// them.
    pub carrier: f64,
    /// Groups whose order parameter stays below this have no line.
    pub sync_threshold: f64,
    pub initial_a: BlochVector,
    pub initial_b: BlochVector,
}

impl Default for RunControls {
    fn default() -> Self {
        Self {
            t_end: 1000.0,
            dt_sample: 0.1,
            integrator: IntegratorControls::default(),
            transient_fraction: 0.5,
            window: Window::Rectangular,
            carrier: 5.0,
            sync_threshold: DEFAULT_SYNC_THRESHOLD,
            initial_a: BlochVector::DEFAULT_INITIAL,
            initial_b: BlochVector::new(0.4, -0.5, 0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncVerdict {
    /// One common dominant frequency.
    Full,
    /// Both groups oscillate, at different frequencies.
    Partial,
    /// At least one group has no dominant line.
    None,
}

impl SyncVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SyncVerdict::Full => "full",
            SyncVerdict::Partial => "partial",
            SyncVerdict::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncClassification {
    pub verdict: SyncVerdict,
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    /// Measured `ω_A − ω_B` when both lines exist.
    pub delta_omega_ab: Option<f64>,
    pub resolution: f64,
}

impl SyncClassification {
    /// `ω_A − ω_B` with locked pairs reported as exactly zero.
    pub fn locked_difference(&self) -> Option<f64> {
        match self.verdict {
            SyncVerdict::Full => Some(0.0),
            _ => self.delta_omega_ab,
        }
    }
}

pub fn simulate(p: &TwoGroupParams, run: &RunControls) -> Result<Trajectory> {
    p.validate()?;
    integrate_pair(
        |a, b| rhs_twogroup(a, b, p),
        (run.initial_a, run.initial_b),
        run.t_end,
        run.dt_sample,
        &run.integrator,
    )
}

fn group_line(series: &Series<'_>, run: &RunControls) -> Result<(Option<f64>, f64)> {
    let s = spectrum_with_carrier(series, run.transient_fraction, run.window, run.carrier)?;
    if order_parameter(series, run.transient_fraction)? < run.sync_threshold {
        return Ok((None, s.resolution));
    }
    match dominant_frequency(&s) {
        Ok(w) => Ok((Some(w), s.resolution)),
        Err(Error::NoDominantLine { .. }) => Ok((None, s.resolution)),
        Err(e) => Err(e),
    }
}

/// Applies the classification rule to an already integrated pair.
pub fn classify_trajectory(traj: &Trajectory, run: &RunControls) -> Result<SyncClassification> {
    if traj.n_groups() != 2 {
        return Err(Error::InvalidInput("expected a two-group trajectory".into()));
    }
    let (omega_a, resolution) = group_line(&traj.series(0), run)?;
    let (omega_b, _) = group_line(&traj.series(1), run)?;
    let delta_omega_ab = match (omega_a, omega_b) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let verdict = match delta_omega_ab {
        Some(d) if d.abs() < resolution => SyncVerdict::Full,
        Some(_) => SyncVerdict::Partial,
        None => SyncVerdict::None,
    };
    Ok(SyncClassification { verdict, omega_a, omega_b, delta_omega_ab, resolution })
}

pub fn classify(p: &TwoGroupParams, run: &RunControls) -> Result<SyncClassification> {
    classify_trajectory(&simulate(p, run)?, run)
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

pub type CellOutcome = Result<SyncClassification>;

/// `ω_A − ω_B` over a (`V_AB`, `δ`) grid.
#[derive(Debug, Clone)]
pub struct TongueMap {
    pub deltas: Vec<f64>,
    pub couplings: Vec<f64>,
    /// Row `i` holds the cells for `couplings[i]`, one per detuning.
    pub cells: Vec<Vec<CellOutcome>>,
}

impl TongueMap {
    pub fn row(&self, i: usize) -> &[CellOutcome] {
        &self.cells[i]
    }

    /// Locked detuning interval of row `i`, see [`locked_interval`].
    pub fn locked_interval(&self, i: usize) -> Option<(f64, f64)> {
        locked_interval(&self.deltas, &self.cells[i])
    }

    pub fn locked_width(&self, i: usize) -> f64 {
        self.locked_interval(i).map_or(0.0, |(lo, hi)| hi - lo)
    }
}

pub fn arnold_tongue(
    p_base: &TwoGroupParams,
    delta_grid: &[f64],
    vab_grid: &[f64],
    run: &RunControls,
) -> Result<TongueMap> {
    check_grid("detuning", delta_grid)?;
    check_grid("cross coupling", vab_grid)?;
    let jobs: Vec<(usize, usize)> =
        (0..vab_grid.len()).flat_map(|i| (0..delta_grid.len()).map(move |j| (i, j))).collect();
    let flat: Vec<CellOutcome> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let p = TwoGroupParams { delta: delta_grid[j], coupling_ab: vab_grid[i], ..*p_base };
            classify(&p, run)
        })
        .collect();
    let cells = flat.chunks(delta_grid.len()).map(<[_]>::to_vec).collect();
    Ok(TongueMap { deltas: delta_grid.to_vec(), couplings: vab_grid.to_vec(), cells })
}

/// Extent of the contiguous run of fully locked cells, with each end placed
/// half-way to the neighbouring unlocked cell (or at the grid end).
///
/// When several runs exist, the one containing the detuning of smallest
/// magnitude is preferred, then the longest.
pub fn locked_interval(deltas: &[f64], cells: &[CellOutcome]) -> Option<(f64, f64)> {
    let full: Vec<bool> = cells
        .iter()
        .map(|c| matches!(c, Ok(SyncClassification { verdict: SyncVerdict::Full, .. })))
        .collect();
    let mut runs = Vec::new();
    let mut start = None;
    for (k, &f) in full.iter().chain(std::iter::once(&false)).enumerate() {
        match (f, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    let closest = (0..deltas.len()).min_by(|&a, &b| deltas[a].abs().total_cmp(&deltas[b].abs()))?;
    let (lo, hi) = runs
        .iter()
        .copied()
        .find(|&(s, e)| s <= closest && closest <= e)
        .or_else(|| runs.iter().copied().max_by_key(|&(s, e)| e - s))?;
    let left = if lo == 0 { deltas[0] } else { 0.5 * (deltas[lo - 1] + deltas[lo]) };
    let last = deltas.len() - 1;
    let right = if hi == last { deltas[last] } else { 0.5 * (deltas[hi] + deltas[hi + 1]) };
    Some((left, right))
}

/// Classification curve over detuning for one value of `θ_A`.
#[derive(Debug, Clone)]
pub struct TuningCurve {
    pub theta_a: f64,
    pub deltas: Vec<f64>,
    pub cells: Vec<CellOutcome>,
}

impl TuningCurve {
    /// Centre of the full-synchronization window, taken as the longest run
    /// of locked cells.
    pub fn window_center(&self) -> Option<f64> {
        let full: Vec<bool> = self
            .cells
            .iter()
            .map(|c| matches!(c, Ok(SyncClassification { verdict: SyncVerdict::Full, .. })))
            .collect();
        let mut best: Option<(usize, usize)> = None;
        let mut k = 0;
        while k < full.len() {
            if full[k] {
                let s = k;
                while k + 1 < full.len() && full[k + 1] {
                    k += 1;
                }
                if best.is_none_or(|(bs, be)| k - s > be - bs) {
                    best = Some((s, k));
                }
            }
            k += 1;
        }
        let (s, e) = best?;
        let d = &self.deltas;
        let left = if s == 0 { d[0] } else { 0.5 * (d[s - 1] + d[s]) };
        let right = if e + 1 == d.len() { d[e] } else { 0.5 * (d[e] + d[e + 1]) };
        Some(0.5 * (left + right))
    }
}

pub fn phase_tuning_scan(
    p_base: &TwoGroupParams,
    theta_a_values: &[f64],
    delta_grid: &[f64],
    run: &RunControls,
) -> Result<Vec<TuningCurve>> {
    if theta_a_values.is_empty() {
        return Err(Error::InvalidInput("no θ_A values".into()));
    }
    check_grid("detuning", delta_grid)?;
    let jobs: Vec<(usize, usize)> = (0..theta_a_values.len())
        .flat_map(|i| (0..delta_grid.len()).map(move |j| (i, j)))
        .collect();
    let flat: Vec<CellOutcome> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let p = TwoGroupParams { delta: delta_grid[j], theta_a: theta_a_values[i], ..*p_base };
            classify(&p, run)
        })
        .collect();
    Ok(flat
        .chunks(delta_grid.len())
        .zip(theta_a_values)
        .map(|(cells, &theta_a)| TuningCurve { theta_a, deltas: delta_grid.to_vec(), cells: cells.to_vec() })
        .collect())
}
