//! Long-format tables, run metadata and the shared sweep helpers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rdnet_core::equilibrium::{phi_lower_bound, POSITIVITY_FLOOR, RESIDUAL_TOLERANCE};
use rdnet_core::stability::{STABILITY_TOL, THRESHOLD_TOL};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ExperimentId;

/// Relative margin above the cost lower bound used wherever a sweep sits at
/// the bound itself.
pub const BOUND_MARGIN: f64 = 1e-9;

/// `phi` used for "at the bound" runs.
pub fn phi_at_bound(n: usize) -> f64 {
    phi_lower_bound(n) * (1.0 + BOUND_MARGIN)
}

/// Text form of a float that round-trips exactly.
pub fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// `k / denom` for `k` in `lo..=hi`, so that grid points like 0.1 are exact.
pub fn ratio_grid(lo: u32, hi: u32, denom: u32) -> Vec<f64> {
    (lo..=hi).map(|k| f64::from(k) / f64::from(denom)).collect()
}

/// `points` values spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn geom_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

pub fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec(format!("{name} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpec(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

pub fn check_replications(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidSpec("replications must be at least 1".into()));
    }
    Ok(())
}

/// Sample mean and unbiased standard deviation (`NaN` below two samples).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Runs `f` on a dedicated pool; `threads == 0` lets rayon choose.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// CSV table whose first two columns are always `experiment,seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    experiment: ExperimentId,
    seed: u64,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(experiment: ExperimentId, seed: u64, columns: &[&'static str]) -> Self {
        Self {
            experiment,
            seed,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header including the leading `experiment,seed`.
    pub fn header(&self) -> Vec<&str> {
        let mut h = vec!["experiment", "seed"];
        h.extend(self.columns.iter().copied());
        h
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        let id = self.experiment.as_str();
        let seed = self.seed.to_string();
        for row in &self.rows {
            w.write_record(
                [id, seed.as_str()]
                    .into_iter()
                    .chain(row.iter().map(String::as_str)),
            )?;
        }
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDoc {
    pub name: &'static str,
    pub description: &'static str,
}

pub fn columns(docs: &[(&'static str, &'static str)]) -> Vec<ColumnDoc> {
    docs.iter()
        .map(|&(name, description)| ColumnDoc { name, description })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    pub alpha: f64,
    pub c_bar: f64,
    pub markup: f64,
    pub phi: &'static str,
    pub bound_margin: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            c_bar: 1.0,
            markup: 1.0,
            phi: "cost lower bound for the run's n, times (1 + bound_margin)",
            bound_margin: BOUND_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub stability: f64,
    pub threshold: f64,
    pub residual: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stability: STABILITY_TOL,
            threshold: THRESHOLD_TOL,
            residual: RESIDUAL_TOLERANCE,
            positivity: POSITIVITY_FLOOR,
        }
    }
}

/// Machine-readable description of a run, written next to its CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: &'static str,
    pub description: &'static str,
    pub seed: u64,
    pub rng: &'static str,
    pub defaults: Defaults,
    pub tolerances: Tolerances,
    pub replications: Option<usize>,
    pub grids: BTreeMap<&'static str, serde_json::Value>,
    pub columns: Vec<ColumnDoc>,
    pub raw_columns: Option<Vec<ColumnDoc>>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(id: ExperimentId, seed: u64, description: &'static str) -> Self {
        Self {
            experiment: id.as_str(),
            description,
            seed,
            rng: rdnet_core::rng::RNG_NAME,
            defaults: Defaults::default(),
            tolerances: Tolerances::default(),
            replications: None,
            grids: BTreeMap::new(),
            columns: Vec::new(),
            raw_columns: None,
            notes: Vec::new(),
        }
    }

    pub fn grid(mut self, name: &'static str, value: impl Serialize) -> Self {
        self.grids.insert(
            name,
            serde_json::to_value(value).expect("grid values serialize"),
        );
        self
    }
}

/// Everything one experiment run emits.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub raw: Option<Table>,
    pub manifest: Manifest,
}

impl ExperimentOutput {
    /// Writes `<id>.csv`, `<id>.manifest.json` and, when present,
    /// `<id>_raw.csv` into `dir`; returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let id = self.manifest.experiment;
        let mut written = Vec::new();
        let main = dir.join(format!("{id}.csv"));
        fs::write(&main, self.table.to_csv()?)?;
        written.push(main);
        if let Some(raw) = &self.raw {
            let path = dir.join(format!("{id}_raw.csv"));
            fs::write(&path, raw.to_csv()?)?;
            written.push(path);
        }
        let path = dir.join(format!("{id}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}
