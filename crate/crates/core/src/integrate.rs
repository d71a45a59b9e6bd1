//! Time integration with uniformly sampled output.
//!
//! Two drivers are provided: an adaptive Dormand–Prince 5(4) pair with an
//! RMS error norm, and classical RK4 with a fixed number of substeps per
//! sample interval. The fixed-step driver performs exactly the same floating
//! point operations for a given input, so sweeps built on it are bit-for-bit
//! reproducible.
//!
//! All flows here are autonomous; the right-hand side only sees the state.

use crate::bloch::{BlochVector, NORM_SLACK};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adaptive,
    FixedRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControls {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step the adaptive controller may take before giving up.
    pub min_step: f64,
    /// Upper bound on the adaptive step.
    pub max_step: f64,
    /// RK4 steps per sample interval in fixed-step mode.
    pub substeps: usize,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        Self {
            method: Method::Adaptive,
            rtol: 1e-9,
            atol: 1e-9,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            substeps: 10,
        }
    }
}

impl IntegratorControls {
    pub fn fixed(substeps: usize) -> Self {
        Self { method: Method::FixedRk4, substeps, ..Self::default() }
    }

    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Adaptive => {
                if !(self.rtol > 0.0 && self.atol > 0.0) {
                    return Err(Error::InvalidInput("tolerances must be positive".into()));
                }
                if !(self.min_step > 0.0 && self.max_step > self.min_step) {
                    return Err(Error::InvalidInput("need 0 < min_step < max_step".into()));
                }
            }
            Method::FixedRk4 => {
                if self.substeps == 0 {
                    return Err(Error::InvalidInput("substeps must be ≥ 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Number of samples `t = k·dt_sample` with `t ≤ t_end`, including `t = 0`.
pub fn sample_count(t_end: f64, dt_sample: f64) -> usize {
    let k = (t_end / dt_sample + 1e-9).floor();
    if k.is_finite() && k >= 0.0 {
        (k as usize).saturating_add(1)
    } else {
        1
    }
}

/// Integrates `ẏ = rhs(y)` from `y0` and calls `observe(k, t_k, y(t_k))` at
/// every sample time `t_k = k·dt_sample ≤ t_end`, starting with `k = 0`.
pub fn solve<F, O>(
    mut rhs: F,
    y0: &[f64],
    t_end: f64,
    dt_sample: f64,
    controls: &IntegratorControls,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]),
    O: FnMut(usize, f64, &[f64]) -> Result<()>,
{
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end = {t_end} must be positive")));
    }
    if !(dt_sample > 0.0 && dt_sample <= t_end) {
        return Err(Error::InvalidInput(format!(
            "dt_sample = {dt_sample} must lie in (0, t_end]"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial state is not finite".into()));
    }
    controls.validate()?;

    let n = sample_count(t_end, dt_sample);
    let mut y = y0.to_vec();
    observe(0, 0.0, &y)?;
    match controls.method {
        Method::FixedRk4 => {
            let mut rk = Rk4::new(y.len());
            let h = dt_sample / controls.substeps as f64;
            for k in 1..n {
                for _ in 0..controls.substeps {
                    rk.step(&mut rhs, &mut y, h);
                }
                let t = k as f64 * dt_sample;
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::StepFailure { t, step: h, reason: "non-finite state".into() });
                }
                observe(k, t, &y)?;
            }
        }
        Method::Adaptive => {
            let mut dp = DormandPrince::new(y.len(), controls);
            dp.prime(&mut rhs, &y, dt_sample);
            let mut t = 0.0;
            for k in 1..n {
                let target = k as f64 * dt_sample;
                dp.advance(&mut rhs, &mut y, &mut t, target)?;
                observe(k, target, &y)?;
            }
        }
    }
    Ok(())
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }

    fn step<F: FnMut(&[f64], &mut [f64])>(&mut self, rhs: &mut F, y: &mut [f64], h: f64) {
        rhs(y, &mut self.k1);
        stage(&mut self.tmp, y, 0.5 * h, &self.k1);
        rhs(&self.tmp, &mut self.k2);
        stage(&mut self.tmp, y, 0.5 * h, &self.k2);
        rhs(&self.tmp, &mut self.k3);
        stage(&mut self.tmp, y, h, &self.k3);
        rhs(&self.tmp, &mut self.k4);
        let ks = self.k1.iter().zip(&self.k2).zip(&self.k3).zip(&self.k4);
        for (yi, (((k1, k2), k3), k4)) in y.iter_mut().zip(ks) {
            *yi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
}

fn stage(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DormandPrince {
    rtol: f64,
    atol: f64,
    min_step: f64,
    max_step: f64,
    h: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl DormandPrince {
    fn new(n: usize, c: &IntegratorControls) -> Self {
        Self {
            rtol: c.rtol,
            atol: c.atol,
            min_step: c.min_step,
            max_step: c.max_step,
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }

    /// Evaluates the first stage and picks a starting step.
    fn prime<F: FnMut(&[f64], &mut [f64])>(&mut self, rhs: &mut F, y: &[f64], dt_sample: f64) {
        rhs(y, &mut self.k[0]);
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let n = y.len().max(1) as f64;
        let d0 = (y.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0].iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        self.h = h0.min(dt_sample).min(self.max_step).max(self.min_step);
    }

    fn advance<F: FnMut(&[f64], &mut [f64])>(
        &mut self,
        rhs: &mut F,
        y: &mut [f64],
        t: &mut f64,
        target: f64,
    ) -> Result<()> {
        let n = y.len();
        let mut rejected = false;
        while *t < target {
            let remaining = target - *t;
            let snap = remaining <= self.h * (1.0 + 1e-10);
            let h = if snap { remaining } else { self.h };

            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            for i in 0..n {
                self.tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(&self.tmp, k2);
            for i in 0..n {
                self.tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(&self.tmp, k3);
            for i in 0..n {
                self.tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(&self.tmp, k4);
            for i in 0..n {
                self.tmp[i] =
                    y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(&self.tmp, k5);
            for i in 0..n {
                self.tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(&self.tmp, k6);
            for i in 0..n {
                self.y_new[i] = y[i]
                    + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(&self.y_new, k7);

            let mut acc = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(self.y_new[i].abs());
                acc += (e / sc) * (e / sc);
            }
            let err = (acc / n.max(1) as f64).sqrt();

            if !err.is_finite() {
                return Err(Error::StepFailure { t: *t, step: h, reason: "non-finite error estimate".into() });
            }

            if err <= 1.0 {
                *t = if snap { target } else { *t + h };
                y.copy_from_slice(&self.y_new);
                // first-same-as-last
                std::mem::swap(k1, k7);
                let mut fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                fac = fac.clamp(0.2, 5.0);
                if rejected {
                    fac = fac.min(1.0);
                }
                rejected = false;
                // a step shortened to land on the sample time says nothing
                // about the natural step size
                if !snap || h >= self.h {
                    self.h = (h * fac).min(self.max_step);
                }
            } else {
                rejected = true;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                self.h = h * fac;
                if self.h < self.min_step {
                    return Err(Error::StepFailure {
                        t: *t,
                        step: self.h,
                        reason: format!("tolerance not met (error ratio {err:.3e})"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Uniformly sampled time series of one or more ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt_sample: f64,
    groups: Vec<Vec<BlochVector>>,
}

/// Borrowed single-ensemble view of a [`Trajectory`].
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub t0: f64,
    pub dt: f64,
    pub samples: &'a [BlochVector],
}

impl Series<'_> {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl Trajectory {
    pub fn new(t0: f64, dt_sample: f64, groups: Vec<Vec<BlochVector>>) -> Result<Self> {
        if groups.is_empty() || groups[0].is_empty() {
            return Err(Error::InvalidInput("trajectory must be non-empty".into()));
        }
        if groups.iter().any(|g| g.len() != groups[0].len()) {
            return Err(Error::InvalidInput("groups must have equal length".into()));
        }
        if !(dt_sample > 0.0) {
            return Err(Error::InvalidInput("dt_sample must be positive".into()));
        }
        Ok(Self { t0, dt_sample, groups })
    }

    pub fn len(&self) -> usize {
        self.groups[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }

    pub fn group(&self, g: usize) -> &[BlochVector] {
        &self.groups[g]
    }

    pub fn series(&self, g: usize) -> Series<'_> {
        Series { t0: self.t0, dt: self.dt_sample, samples: &self.groups[g] }
    }

    pub fn last(&self, g: usize) -> BlochVector {
        *self.groups[g].last().expect("non-empty")
    }
}

fn check_initial(m: BlochVector) -> Result<()> {
    if !m.is_physical() {
        return Err(Error::InvalidInput(format!("initial state {m:?} is outside the unit ball")));
    }
    Ok(())
}

fn check_sample(t: f64, m: BlochVector) -> Result<()> {
    let norm = m.norm();
    if !(norm <= 1.0 + NORM_SLACK) {
        return Err(Error::NormBound { t, norm });
    }
    Ok(())
}

/// Integrates a single-ensemble flow.
pub fn integrate<F>(
    rhs: F,
    m0: BlochVector,
    t_end: f64,
    dt_sample: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory>
where
    F: Fn(BlochVector) -> BlochVector,
{
    check_initial(m0)?;
    let mut samples = Vec::with_capacity(sample_count(t_end, dt_sample).min(1 << 16));
    solve(
        |y, dy| {
            let d = rhs(BlochVector::new(y[0], y[1], y[2]));
            dy.copy_from_slice(&d.to_array());
        },
        &m0.to_array(),
        t_end,
        dt_sample,
        controls,
        |_, t, y| {
            let m = BlochVector::new(y[0], y[1], y[2]);
            check_sample(t, m)?;
            samples.push(m);
            Ok(())
        },
    )?;
    Trajectory::new(0.0, dt_sample, vec![samples])
}

/// Integrates a coupled pair of ensembles; group 0 is A, group 1 is B.
pub fn integrate_pair<F>(
    rhs: F,
    m0: (BlochVector, BlochVector),
    t_end: f64,
    dt_sample: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory>
where
    F: Fn(BlochVector, BlochVector) -> (BlochVector, BlochVector),
{
    check_initial(m0.0)?;
    check_initial(m0.1)?;
    let cap = sample_count(t_end, dt_sample).min(1 << 16);
    let (mut a, mut b) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    let y0 = [m0.0.x, m0.0.y, m0.0.z, m0.1.x, m0.1.y, m0.1.z];
    solve(
        |y, dy| {
            let (da, db) = rhs(
                BlochVector::new(y[0], y[1], y[2]),
                BlochVector::new(y[3], y[4], y[5]),
            );
            dy[..3].copy_from_slice(&da.to_array());
            dy[3..].copy_from_slice(&db.to_array());
        },
        &y0,
        t_end,
        dt_sample,
        controls,
        |_, t, y| {
            let ma = BlochVector::new(y[0], y[1], y[2]);
            let mb = BlochVector::new(y[3], y[4], y[5]);
            check_sample(t, ma)?;
            check_sample(t, mb)?;
            a.push(ma);
            b.push(mb);
            Ok(())
        },
    )?;
    Trajectory::new(0.0, dt_sample, vec![a, b])
}
