//! What each mode computes and which columns it writes.

use rayon::prelude::*;
use tlsync_core::dynamics::rhs_meanfield;
use tlsync_core::integrate::integrate;
use tlsync_core::oracle::{evolve_exact, DensityMatrix, OracleOptions};
use tlsync_core::spectral::{default_transient_fraction, dominant_frequency, order_parameter, spectrum_with_carrier};
use tlsync_core::stability::{
    analytic_limit_cycle, is_synchronized, stability_report, synchronization_boundary, synchronization_frequency,
    CriticalCoupling,
};
use tlsync_core::two_group::{classify, classify_trajectory, simulate, SyncClassification};
use tlsync_core::{BlochVector, EnsembleParams, Trajectory};

use crate::config::{grid_indices, Axis, Config, EnsemblePoint, Mode};
use crate::error::CliError;
use crate::format::{flag, num, opt};
use crate::svg::{Heatmap, LinePlot};

pub type RowFn<'a> = Box<dyn Fn(&[usize]) -> Vec<String> + Sync + 'a>;

/// A mode whose rows come from independent grid cells.
pub struct Grid<'a> {
    pub columns: Vec<String>,
    pub axes: Vec<Axis>,
    pub cells: Vec<Vec<usize>>,
    pub eval: RowFn<'a>,
    pub value_column: &'static str,
    pub overlay: Vec<(f64, f64)>,
}

/// A mode that produces one run, with scalar results in the header.
pub struct Single {
    pub results: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Option<LinePlot>,
}

pub enum Job<'a> {
    Grid(Grid<'a>),
    Single(Single),
}

pub fn units(mode: Mode) -> Vec<(&'static str, &'static str)> {
    if mode.uses_two_groups() {
        vec![
            ("rates", "delta, coupling, coupling_ab and gamma_plus share one rate unit"),
            ("time", "inverse rate unit"),
            ("frequency", "angular, rate unit, rotating frame"),
            ("theta", "rad"),
        ]
    } else {
        vec![
            ("coupling", "V/(gamma_plus+gamma_minus)"),
            ("gain_ratio", "gamma_plus/gamma_minus"),
            ("omega0", "angular, same rate unit as gamma_sum"),
            ("time", "inverse rate unit of gamma_sum"),
            ("frequency", "angular, same rate unit as gamma_sum"),
            ("theta", "rad"),
        ]
    }
}

pub fn plan<'a>(cfg: &'a Config, pool: &rayon::ThreadPool) -> Result<Job<'a>, CliError> {
    match cfg.mode() {
        Mode::Simulate => simulate_single(cfg).map(Job::Single),
        Mode::Flowfield => flowfield(cfg).map(Job::Single),
        Mode::TwoGroup => two_group_single(cfg).map(Job::Single),
        Mode::Oracle => oracle(cfg, pool).map(Job::Single),
        Mode::Stability => grid(cfg, STABILITY_COLUMNS, "growth_rate", stability_cell),
        Mode::PhaseDiagram => {
            let mut g = grid(cfg, PHASE_COLUMNS, "order_parameter", phase_cell)?;
            if let Job::Grid(g) = &mut g {
                g.overlay = boundary_overlay(cfg, &g.axes);
            }
            Ok(g)
        }
        Mode::FreqShift => grid(cfg, FREQ_COLUMNS, "delta_omega_over_v", freq_cell),
        Mode::Arnold | Mode::PhaseTuning => grid(cfg, CLASSIFY_COLUMNS, "locked_difference", classify_cell),
    }
}

type CellFn = fn(&Config, &[Axis], &[usize]) -> Result<Vec<String>, (Vec<String>, &'static str)>;

/// Axis values, then the mode's columns, then an error code. A failed cell
/// fills the value columns with what it has (usually `nan`).
fn grid<'a>(cfg: &'a Config, columns: &[&str], value_column: &'static str, cell: CellFn) -> Result<Job<'a>, CliError> {
    let axes = cfg.axes()?;
    let cells = grid_indices(&axes);
    let mut header: Vec<String> = axes.iter().map(|a| a.name.to_string()).collect();
    header.extend(columns.iter().map(|c| c.to_string()));
    header.push("error".into());
    let axes_eval = axes.clone();
    let eval = move |index: &[usize]| {
        let mut row: Vec<String> = axes_eval.iter().zip(index).map(|(a, &k)| num(a.values[k])).collect();
        match cell(cfg, &axes_eval, index) {
            Ok(values) => {
                row.extend(values);
                row.push(String::new());
            }
            Err((values, code)) => {
                row.extend(values);
                row.push(code.into());
            }
        }
        row
    };
    Ok(Job::Grid(Grid { columns: header, axes, cells, eval: Box::new(eval), value_column, overlay: Vec::new() }))
}

fn nans(n: usize) -> Vec<String> {
    vec!["nan".to_string(); n]
}

fn critical(theta: f64, gain_ratio: f64) -> f64 {
    match synchronization_boundary(theta, gain_ratio) {
        Ok(CriticalCoupling::Finite(v)) => v,
        Ok(CriticalCoupling::Never) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

fn transient(cfg: &Config, pt: &EnsemblePoint) -> f64 {
    cfg.run
        .transient_fraction
        .unwrap_or_else(|| default_transient_fraction(pt.gamma_sum, pt.omega0, cfg.run.t_end()))
}

fn run_ensemble(cfg: &Config, p: &EnsembleParams) -> tlsync_core::Result<Trajectory> {
    integrate(|m| rhs_meanfield(m, p), cfg.run.initial(), cfg.run.t_end(), cfg.run.dt_sample, &cfg.run.integrator())
}

/// Dominant line of group `g`, after the configured carrier shift.
fn line(cfg: &Config, traj: &Trajectory, g: usize, tf: f64) -> tlsync_core::Result<(f64, f64)> {
    let s = spectrum_with_carrier(&traj.series(g), tf, cfg.run.window(), cfg.run.carrier)?;
    Ok((dominant_frequency(&s)?, s.resolution))
}

const STABILITY_COLUMNS: &[&str] = &[
    "fixed_x",
    "fixed_y",
    "fixed_z",
    "eig1_re",
    "eig1_im",
    "eig2_re",
    "eig2_im",
    "eig3_re",
    "eig3_im",
    "growth_rate",
    "synchronized",
    "critical_coupling",
    "c_z",
    "radius",
    "omega_sync",
    "delta_omega",
];

fn stability_cell(cfg: &Config, axes: &[Axis], index: &[usize]) -> Result<Vec<String>, (Vec<String>, &'static str)> {
    let pt = cfg.ensemble.at(axes, index);
    let p = pt.params().map_err(|e| (nans(STABILITY_COLUMNS.len()), e.code()))?;
    let r = stability_report(&p);
    let mut out: Vec<String> = r.fixed_point.to_array().iter().map(|&v| num(v)).collect();
    for l in r.eigenvalues {
        out.push(num(l.re));
        out.push(num(l.im));
    }
    out.push(num(r.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)));
    out.push(flag(r.synchronized));
    out.push(num(critical(pt.theta, pt.gain_ratio)));
    match r.limit_cycle {
        Some(c) => out.extend([c.c_z, c.radius, c.omega_sync, c.delta_omega].map(num)),
        None => out.extend(nans(4)),
    }
    Ok(out)
}

const PHASE_COLUMNS: &[&str] = &["order_parameter", "synchronized", "analytic_synchronized", "critical_coupling"];

fn phase_cell(cfg: &Config, axes: &[Axis], index: &[usize]) -> Result<Vec<String>, (Vec<String>, &'static str)> {
    let pt = cfg.ensemble.at(axes, index);
    let p = pt.params().map_err(|e| (nans(PHASE_COLUMNS.len()), e.code()))?;
    let tail = [flag(is_synchronized(&p)), num(critical(pt.theta, pt.gain_ratio))];
    let order = run_ensemble(cfg, &p).and_then(|traj| order_parameter(&traj.series(0), transient(cfg, &pt)));
    match order {
        Ok(order) => {
            let mut out = vec![num(order), flag(order >= cfg.run.sync_threshold)];
            out.extend(tail);
            Ok(out)
        }
        Err(e) => {
            let mut out = nans(2);
            out.extend(tail);
            Err((out, e.code()))
        }
    }
}

const FREQ_COLUMNS: &[&str] = &[
    "order_parameter",
    "synchronized",
    "analytic_synchronized",
    "omega_sync",
    "delta_omega",
    "predicted_delta_omega",
    "delta_omega_over_v",
    "predicted_over_v",
    "resolution",
];

/// Measured shift `ω₀ − ω` of the dominant line, left as `nan` for cells
/// whose order parameter stays under the threshold.
fn freq_cell(cfg: &Config, axes: &[Axis], index: &[usize]) -> Result<Vec<String>, (Vec<String>, &'static str)> {
    let pt = cfg.ensemble.at(axes, index);
    let p = pt.params().map_err(|e| (nans(FREQ_COLUMNS.len()), e.code()))?;
    let v = p.coupling;
    let per_v = |x: f64| if v > 0.0 { x / v } else { f64::NAN };
    let predicted = synchronization_frequency(&p).map(|w| p.omega0 - w).unwrap_or(f64::NAN);
    let analytic = flag(is_synchronized(&p));
    let tf = transient(cfg, &pt);
    let fail = |code: &'static str| {
        let mut out = nans(2);
        out.push(analytic.clone());
        out.extend([f64::NAN, f64::NAN, predicted, f64::NAN, per_v(predicted), f64::NAN].map(num));
        (out, code)
    };
    let traj = run_ensemble(cfg, &p).map_err(|e| fail(e.code()))?;
    let order = order_parameter(&traj.series(0), tf).map_err(|e| fail(e.code()))?;
    let synchronized = order >= cfg.run.sync_threshold;
    let (omega, resolution) = if synchronized {
        let (w, res) = line(cfg, &traj, 0, tf).map_err(|e| {
            let (mut out, code) = fail(e.code());
            out[0] = num(order);
            out[1] = flag(true);
            (out, code)
        })?;
        (w, res)
    } else {
        (f64::NAN, f64::NAN)
    };
    let measured = p.omega0 - omega;
    Ok(vec![
        num(order),
        flag(synchronized),
        analytic,
        num(omega),
        num(measured),
        num(predicted),
        num(per_v(measured)),
        num(per_v(predicted)),
        num(resolution),
    ])
}

const CLASSIFY_COLUMNS: &[&str] =
    &["verdict", "omega_a", "omega_b", "delta_omega_ab", "locked_difference", "resolution"];

fn classification_columns(c: &SyncClassification) -> Vec<String> {
    vec![
        c.verdict.as_str().to_string(),
        opt(c.omega_a),
        opt(c.omega_b),
        opt(c.delta_omega_ab),
        opt(c.locked_difference()),
        num(c.resolution),
    ]
}

fn classify_cell(cfg: &Config, axes: &[Axis], index: &[usize]) -> Result<Vec<String>, (Vec<String>, &'static str)> {
    let fail = |code| (nans(CLASSIFY_COLUMNS.len()), code);
    let p = cfg.two_group.at(axes, index).map_err(|_| fail("invalid_params"))?;
    let c = classify(&p, &cfg.run.two_group_controls()).map_err(|e| fail(e.code()))?;
    Ok(classification_columns(&c))
}

/// Critical coupling drawn over a coupling × gain-ratio map.
fn boundary_overlay(cfg: &Config, axes: &[Axis]) -> Vec<(f64, f64)> {
    if axes.len() != 2 || axes[0].name != "coupling" || axes[1].name != "gain_ratio" {
        return Vec::new();
    }
    (0..axes[1].values.len())
        .filter_map(|j| {
            let pt = cfg.ensemble.at(axes, &[0, j]);
            let vc = critical(pt.theta, pt.gain_ratio);
            vc.is_finite().then_some((vc, j as f64))
        })
        .collect()
}

fn point(cfg: &Config) -> Result<(EnsemblePoint, EnsembleParams), CliError> {
    let pt = cfg.ensemble.at(&[], &[]);
    let p = pt.params()?;
    Ok((pt, p))
}

fn bloch_cells(m: BlochVector) -> [String; 3] {
    m.to_array().map(num)
}

fn simulate_single(cfg: &Config) -> Result<Single, CliError> {
    let (pt, p) = point(cfg)?;
    let traj = run_ensemble(cfg, &p)?;
    let tf = transient(cfg, &pt);
    let mut results = vec![("transient_fraction".to_string(), num(tf))];
    let order = order_parameter(&traj.series(0), tf);
    results.push(("order_parameter".into(), order.as_ref().map_or_else(|e| e.code().to_string(), |&o| num(o))));
    let synchronized = matches!(order, Ok(o) if o >= cfg.run.sync_threshold);
    results.push(("synchronized".into(), flag(synchronized)));
    let measured = if synchronized {
        line(cfg, &traj, 0, tf).map_or_else(|e| e.code().to_string(), |(w, _)| num(w))
    } else {
        "nan".into()
    };
    results.push(("dominant_frequency".into(), measured));
    results.push(("analytic_synchronized".into(), flag(is_synchronized(&p))));
    results.push(("critical_coupling".into(), num(critical(pt.theta, pt.gain_ratio))));
    let cycle = analytic_limit_cycle(&p).ok().flatten();
    results.push(("omega_sync".into(), opt(cycle.map(|c| c.omega_sync))));
    results.push(("c_z".into(), opt(cycle.map(|c| c.c_z))));
    results.push(("radius".into(), opt(cycle.map(|c| c.radius))));

    let columns = ["t", "x", "y", "z", "re_sigma_plus", "im_sigma_plus", "amplitude"].map(String::from).to_vec();
    let rows = traj
        .group(0)
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let sp = m.sigma_plus();
            let mut r = vec![num(traj.time(k))];
            r.extend(bloch_cells(*m));
            r.extend([sp.re, sp.im, sp.norm()].map(num));
            r
        })
        .collect();
    let series = |f: fn(&BlochVector) -> f64| traj.group(0).iter().enumerate().map(|(k, m)| (traj.time(k), f(m))).collect();
    let plot = LinePlot {
        title: "mean-field trajectory".into(),
        x_label: "t".into(),
        y_label: "value".into(),
        series: vec![
            ("|<sigma+>|".into(), series(|m| m.sigma_plus().norm())),
            ("m_z".into(), series(|m| m.z)),
        ],
    };
    Ok(Single { results, columns, rows, plot: Some(plot) })
}

fn flowfield(cfg: &Config) -> Result<Single, CliError> {
    let (_, p) = point(cfg)?;
    let f = &cfg.flowfield;
    let kind = f.flow.kind();
    let mut rows = Vec::new();
    let mut push = |label: &str, t: f64, m: BlochVector| {
        let mut r = vec![label.to_string(), num(t)];
        r.extend(bloch_cells(m));
        r.extend(bloch_cells(kind.eval(m, &p)));
        rows.push(r);
    };
    for i in 0..f.polar {
        let polar = std::f64::consts::PI * (i as f64 + 0.5) / f.polar as f64;
        for j in 0..f.azimuth {
            let az = 2.0 * std::f64::consts::PI * j as f64 / f.azimuth as f64;
            let m = BlochVector::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
            push("field", f64::NAN, BlochVector::from_array(m.to_array().map(|c| c * f.radius)));
        }
    }
    let traj = integrate(|m| kind.eval(m, &p), cfg.run.initial(), cfg.run.t_end(), cfg.run.dt_sample, &cfg.run.integrator())?;
    for (k, m) in traj.group(0).iter().enumerate() {
        push("trajectory", traj.time(k), *m);
    }
    let columns = ["kind", "t", "x", "y", "z", "dx", "dy", "dz"].map(String::from).to_vec();
    let plot = LinePlot {
        title: "trajectory, x-y projection".into(),
        x_label: "m_x".into(),
        y_label: "m_y".into(),
        series: vec![("trajectory".into(), traj.group(0).iter().map(|m| (m.x, m.y)).collect())],
    };
    let results = vec![("samples".into(), traj.len().to_string())];
    Ok(Single { results, columns, rows, plot: Some(plot) })
}

fn two_group_single(cfg: &Config) -> Result<Single, CliError> {
    let p = cfg.two_group.at(&[], &[]).map_err(|e| CliError::config("two_group", e))?;
    let run = cfg.run.two_group_controls();
    let traj = simulate(&p, &run)?;
    let mut results = Vec::new();
    for (g, name) in [(0, "a"), (1, "b")] {
        let order = order_parameter(&traj.series(g), run.transient_fraction);
        results.push((format!("order_{name}"), order.map_or_else(|e| e.code().to_string(), num)));
    }
    match classify_trajectory(&traj, &run) {
        Ok(c) => {
            let keys = ["verdict", "omega_a", "omega_b", "delta_omega_ab", "locked_difference", "resolution"];
            results.extend(keys.iter().map(|k| k.to_string()).zip(classification_columns(&c)));
        }
        Err(e) => results.push(("verdict".into(), e.code().to_string())),
    }
    let columns = ["t", "a_x", "a_y", "a_z", "b_x", "b_y", "b_z"].map(String::from).to_vec();
    let rows = (0..traj.len())
        .map(|k| {
            let mut r = vec![num(traj.time(k))];
            r.extend(bloch_cells(traj.group(0)[k]));
            r.extend(bloch_cells(traj.group(1)[k]));
            r
        })
        .collect();
    let series = |g: usize| traj.group(g).iter().enumerate().map(|(k, m)| (traj.time(k), m.x)).collect();
    let plot = LinePlot {
        title: "two groups, Re<sigma+> x 2".into(),
        x_label: "t".into(),
        y_label: "m_x".into(),
        series: vec![("A".into(), series(0)), ("B".into(), series(1))],
    };
    Ok(Single { results, columns, rows, plot: Some(plot) })
}

fn oracle(cfg: &Config, pool: &rayon::ThreadPool) -> Result<Single, CliError> {
    let (_, p) = point(cfg)?;
    let run = &cfg.run;
    let mf = run_ensemble(cfg, &p)?;
    let options = OracleOptions {
        coupling: cfg.oracle.coupling(),
        integrator: run.integrator(),
        positivity_tol: cfg.oracle.positivity_tol,
    };
    let evolutions: Vec<_> = pool.install(|| {
        cfg.oracle
            .sites
            .par_iter()
            .map(|&n| {
                let rho = DensityMatrix::product(run.initial(), n)?;
                evolve_exact(&rho, &p, run.t_end(), run.dt_sample, &options)
            })
            .collect()
    });
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (&n, ev) in cfg.oracle.sites.iter().zip(evolutions) {
        let ev = match ev {
            Ok(ev) => ev,
            Err(e) => {
                results.push((format!("error.n{n}"), e.code().to_string()));
                continue;
            }
        };
        let mut sup = 0.0f64;
        let mut worst_trace = 0.0f64;
        let mut min_eig = f64::INFINITY;
        let mut curve = Vec::new();
        for (k, (s, m)) in ev.samples.iter().zip(mf.group(0)).enumerate() {
            let deviation = (s.mean_sigma_plus() - m.sigma_plus()).norm();
            sup = sup.max(deviation);
            worst_trace = worst_trace.max(s.trace_error);
            min_eig = min_eig.min(s.min_eigenvalue);
            curve.push((ev.time(k), deviation));
            let mut r = vec![n.to_string(), num(ev.time(k))];
            r.extend(bloch_cells(s.mean_bloch()));
            r.extend(bloch_cells(*m));
            r.extend([deviation, s.trace_error, s.hermiticity_error, s.min_eigenvalue].map(num));
            rows.push(r);
        }
        results.push((format!("sup_deviation.n{n}"), num(sup)));
        results.push((format!("max_trace_error.n{n}"), num(worst_trace)));
        results.push((format!("min_eigenvalue.n{n}"), num(min_eig)));
        series.push((format!("N = {n}"), curve));
    }
    let columns = [
        "sites",
        "t",
        "exact_x",
        "exact_y",
        "exact_z",
        "meanfield_x",
        "meanfield_y",
        "meanfield_z",
        "deviation",
        "trace_error",
        "hermiticity_error",
        "min_eigenvalue",
    ]
    .map(String::from)
    .to_vec();
    let plot = LinePlot {
        title: "|<sigma+>exact - <sigma+>mean-field|".into(),
        x_label: "t".into(),
        y_label: "deviation".into(),
        series,
    };
    Ok(Single { results, columns, rows, plot: Some(plot) })
}

/// Heatmap (two axes) or curve (one axis) of a finished grid.
pub fn grid_plot(mode: Mode, grid: &Grid<'_>, rows: &[Vec<String>]) -> Option<crate::Plot> {
    let col = grid.columns.iter().position(|c| c == grid.value_column)?;
    let value = |r: &Vec<String>| r.get(col).and_then(|s| s.parse::<f64>().ok()).unwrap_or(f64::NAN);
    let title = format!("{}: {}", mode.name(), grid.value_column);
    match grid.axes.as_slice() {
        [a] => Some(crate::Plot::Line(LinePlot {
            title,
            x_label: a.name.into(),
            y_label: grid.value_column.into(),
            series: vec![(grid.value_column.into(), a.values.iter().copied().zip(rows.iter().map(value)).collect())],
        })),
        [a, b] => {
            let ny = b.values.len();
            let z = rows.chunks(ny).map(|chunk| chunk.iter().map(value).collect()).collect();
            Some(crate::Plot::Heatmap(Heatmap {
                title,
                x_label: a.name.into(),
                y_label: b.name.into(),
                x: a.values.clone(),
                y: b.values.clone(),
                z,
                overlay: grid.overlay.clone(),
            }))
        }
        _ => None,
    }
}
