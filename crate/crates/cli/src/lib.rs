//! Parameter sweeps over the mean-field synchronization model, driven by TOML
//! configuration and written as commented CSV.

pub mod config;
pub mod error;
pub mod format;
pub mod modes;
pub mod run;
pub mod svg;

pub use config::{Config, Mode};
pub use error::CliError;
pub use run::{execute, load, Invocation, Summary};

pub enum Plot {
    Heatmap(svg::Heatmap),
    Line(svg::LinePlot),
}
