//! CSV reports written by the drivers.
//!
//! `report.csv` has one row per solve with the columns of [`ReportRow`];
//! `fits.csv` one row per regression ([`FitRow`]); `lineout.csv` the sampled
//! scalar flux of the diffusion-limit driver ([`LineoutRow`]); `checks.csv`
//! the built-in checks. Columns whose names start with `t_` are wall times in
//! seconds; all other columns are reproducible.

use super::config::Config;
use crate::Result;
use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct ReportRow {
    pub driver: String,
    pub method: String,
    pub p: usize,
    /// Refinement level as listed in the configuration.
    pub mesh: usize,
    pub epsilon: Option<f64>,
    pub fixup: bool,
    pub h: f64,
    pub unknowns: usize,
    pub outer_iterations: Option<usize>,
    pub converged: Option<bool>,
    pub inner_avg: f64,
    pub inner_min: usize,
    pub inner_max: usize,
    pub err_phi: Option<f64>,
    pub err_phi_proj: Option<f64>,
    pub err_j: Option<f64>,
    pub balance: Option<f64>,
    pub fixups: Option<usize>,
    pub t_sweep: f64,
    pub t_closure: f64,
    pub t_rhs: f64,
    pub t_solve: f64,
    pub t_total: f64,
}

impl ReportRow {
    /// Sets the inner iteration statistics.
    pub fn inner(&mut self, its: &[usize]) {
        if its.is_empty() {
            return;
        }
        self.inner_avg = its.iter().sum::<usize>() as f64 / its.len() as f64;
        self.inner_min = *its.iter().min().unwrap();
        self.inner_max = *its.iter().max().unwrap();
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FitRow {
    pub driver: String,
    pub method: String,
    pub p: usize,
    pub quantity: String,
    pub order: f64,
    pub constant: f64,
    pub residual: f64,
    /// Refinement levels used, separated by spaces.
    pub levels: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LineoutRow {
    pub method: String,
    pub p: usize,
    pub mesh: usize,
    pub epsilon: f64,
    pub x: f64,
    pub varphi: f64,
}

/// A built-in pass/fail check of a driver.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: Config,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitRow>,
    pub lineout: Vec<LineoutRow>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(config: Config) -> Self {
        RunReport {
            config,
            rows: Vec::new(),
            fits: Vec::new(),
            lineout: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Header echoed at the top of `effective-config.txt`.
    pub fn header(&self) -> String {
        let c = &self.config;
        let mut h = format!("# smm-rad2d {} driver\n", c.driver);
        if c.driver == super::Driver::Mms {
            h.push_str(&format!(
                "# manufactured solution with sigma_t = {}, sigma_s = {}\n",
                c.mms.sigma_t, c.mms.sigma_s
            ));
        }
        h
    }

    /// Writes `report.csv`, `fits.csv`, `checks.csv`, `effective-config.txt`
    /// and, when present, `lineout.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        write_csv(dir.join("report.csv"), &self.rows)?;
        write_csv(dir.join("fits.csv"), &self.fits)?;
        write_csv(dir.join("checks.csv"), &self.checks)?;
        if !self.lineout.is_empty() {
            write_csv(dir.join("lineout.csv"), &self.lineout)?;
        }
        fs::write(
            dir.join("effective-config.txt"),
            format!("{}{}", self.header(), self.config.to_toml()),
        )?;
        Ok(())
    }
}

fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e.to_string()))
}
