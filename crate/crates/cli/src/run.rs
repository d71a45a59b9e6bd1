//! Loading, resuming and writing a sweep.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Config, Mode};
use crate::error::CliError;
use crate::format;
use crate::modes::{self, Grid, Job, Single};
use crate::Plot;

#[derive(Debug, Clone, Default)]
pub struct Invocation {
    /// Mode named on the command line; `None` takes it from the config.
    pub mode: Option<Mode>,
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub threads: Option<usize>,
    pub resume: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mode: Mode,
    pub rows: usize,
    /// Rows taken over from an earlier partial run.
    pub resumed: usize,
    /// Cells whose error column is set.
    pub failed_cells: usize,
}

pub fn load(inv: &Invocation) -> Result<Config, CliError> {
    let text = match &inv.config {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| CliError::config(path.display().to_string(), format!("cannot read: {e}")))?,
        ),
        None => None,
    };
    let origin = inv.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let cfg = Config::load(text.as_deref().map(|t| (t, origin.as_str())), &inv.overrides)?;
    cfg.resolve(inv.mode)
}

/// One-paragraph description of what a run would do, for `--check`.
pub fn describe(cfg: &Config) -> Result<String, CliError> {
    let axes = cfg.axes()?;
    let mut out = format!("mode {}: ok\n", cfg.mode().name());
    for a in &axes {
        out.push_str(&format!(
            "axis {}: {} values from {} to {}\n",
            a.name,
            a.values.len(),
            format::num(a.values[0]),
            format::num(*a.values.last().expect("non-empty axis"))
        ));
    }
    let cells: usize = axes.iter().map(|a| a.values.len()).product();
    out.push_str(&format!("cells: {cells}\n"));
    Ok(out)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// Runs a loaded configuration. Output goes to `inv.csv` (or the config's
/// `output.csv`), else to `stdout`.
pub fn execute(cfg: &Config, inv: &Invocation, stdout: &mut dyn Write) -> Result<Summary, CliError> {
    let csv = inv.csv.clone().or_else(|| cfg.output.csv.as_ref().map(PathBuf::from));
    let svg = inv.svg.clone().or_else(|| cfg.output.svg.as_ref().map(PathBuf::from));
    if inv.resume && csv.is_none() {
        return Err(CliError::config("output.csv", "--resume needs an output file"));
    }
    let pool = pool(inv.threads.or(cfg.threads))?;
    let mode = cfg.mode();
    let echo = cfg.echo();
    let units = modes::units(mode);
    match modes::plan(cfg, &pool)? {
        Job::Single(single) => {
            let text = single_text(&echo, &units, &single);
            match &csv {
                Some(path) => fs::write(path, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            if let (Some(path), Some(plot)) = (&svg, single.plot) {
                fs::write(path, plot.render())?;
            }
            Ok(Summary { mode, rows: single.rows.len(), resumed: 0, failed_cells: 0 })
        }
        Job::Grid(grid) => {
            let header = format::header(&echo, &units, &[], &grid.columns);
            let (rows, resumed) = match &csv {
                Some(path) => {
                    let (mut file, done) = open_output(path, &header, inv.resume)?;
                    let resumed = done.len();
                    (stream(&grid, &pool, done, &mut file)?, resumed)
                }
                None => {
                    let mut out = io::BufWriter::new(&mut *stdout);
                    out.write_all(header.as_bytes())?;
                    let rows = stream(&grid, &pool, Vec::new(), &mut out)?;
                    out.flush()?;
                    (rows, 0)
                }
            };
            if let Some(path) = &svg {
                if let Some(plot) = modes::grid_plot(mode, &grid, &rows) {
                    fs::write(path, plot.render())?;
                }
            }
            let failed_cells = rows.iter().filter(|r| r.last().is_some_and(|e| !e.is_empty())).count();
            Ok(Summary { mode, rows: rows.len(), resumed, failed_cells })
        }
    }
}

fn single_text(echo: &[String], units: &[(&str, &str)], single: &Single) -> String {
    let mut text = format::header(echo, units, &single.results, &single.columns);
    for r in &single.rows {
        text.push_str(&format::row(r));
    }
    text
}

/// Opens the output for writing. On resume the existing header must match
/// byte for byte; complete rows are kept and a torn last line is dropped.
fn open_output(path: &Path, header: &str, resume: bool) -> Result<(File, Vec<Vec<String>>), CliError> {
    if resume && path.exists() {
        let existing = fs::read_to_string(path)?;
        let body = existing.strip_prefix(header).ok_or_else(|| {
            CliError::config(path.display().to_string(), "existing file was produced by a different configuration")
        })?;
        let complete = body.rfind('\n').map_or(0, |k| k + 1);
        let done: Vec<Vec<String>> =
            body[..complete].lines().map(|l| l.split(',').map(String::from).collect()).collect();
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len((header.len() + complete) as u64)?;
        let mut file = OpenOptions::new().append(true).open(path)?;
        file.flush()?;
        return Ok((file, done));
    }
    let mut file = File::create(path)?;
    file.write_all(header.as_bytes())?;
    file.flush()?;
    Ok((file, Vec::new()))
}

/// Evaluates the remaining cells in parallel batches and writes rows in grid
/// order, flushing after each one.
fn stream(grid: &Grid<'_>, pool: &rayon::ThreadPool, mut rows: Vec<Vec<String>>, out: &mut dyn Write) -> Result<Vec<Vec<String>>, CliError> {
    let start = rows.len().min(grid.cells.len());
    let batch = 4 * pool.current_num_threads().max(1);
    for chunk in grid.cells[start..].chunks(batch) {
        let computed: Vec<Vec<String>> = pool.install(|| chunk.par_iter().map(|idx| (grid.eval)(idx)).collect());
        for r in computed {
            out.write_all(format::row(&r).as_bytes())?;
            out.flush()?;
            rows.push(r);
        }
    }
    Ok(rows)
}

/// Reads the configuration echoed into an output file.
pub fn config_of_output(path: &Path) -> Result<Config, CliError> {
    crate::config::config_from_header(&fs::read_to_string(path)?)
}

impl Plot {
    pub fn render(&self) -> String {
        match self {
            Plot::Heatmap(h) => h.render(),
            Plot::Line(l) => l.render(),
        }
    }
}
