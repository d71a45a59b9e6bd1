#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use tlsync_cli::{execute, load, Invocation, Mode, Summary};

/// Runs a mode in-process with `--set` style overrides, writing `name.csv`
/// into `dir`.
pub fn run(dir: &Path, name: &str, mode: Mode, overrides: &[&str], threads: Option<usize>) -> (PathBuf, Summary) {
    let csv = dir.join(format!("{name}.csv"));
    let inv = Invocation {
        mode: Some(mode),
        overrides: overrides.iter().map(|s| s.to_string()).collect(),
        csv: Some(csv.clone()),
        threads,
        ..Invocation::default()
    };
    let cfg = load(&inv).expect("valid config");
    let summary = execute(&cfg, &inv, &mut std::io::sink()).expect("run succeeds");
    (csv, summary)
}

/// Parsed output: `# result.` entries and columns by name.
pub struct Table {
    pub results: HashMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Table {
        let text = std::fs::read_to_string(path).unwrap();
        let mut results = HashMap::new();
        let mut lines = text.lines();
        let mut columns = Vec::new();
        for line in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("# result.") {
                let (k, v) = rest.split_once(" = ").unwrap();
                results.insert(k.to_string(), v.to_string());
            } else if !line.starts_with('#') {
                columns = line.split(',').map(String::from).collect();
                break;
            }
        }
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Table { results, columns, rows }
    }

    pub fn col(&self, name: &str) -> usize {
        self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    pub fn text(&self, row: usize, name: &str) -> &str {
        &self.rows[row][self.col(name)]
    }

    pub fn num(&self, row: usize, name: &str) -> f64 {
        self.text(row, name).parse().unwrap()
    }

    pub fn result(&self, key: &str) -> f64 {
        self.results[key].parse().unwrap()
    }
}
