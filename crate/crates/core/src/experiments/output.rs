//! CSV energy streams and JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::diagnostics::EnergyRecord;
use crate::error::Result;

pub const CSV_HEADER: &str = "t,E,D,v_l2,gradv_l2,fhat_max";

/// Energy records as CSV in the fixed column order, shortest round-trip formatting.
pub fn energy_csv(records: &[EnergyRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            r.t, r.energy, r.dissipation, r.v_l2, r.gradv_l2, r.fhat_max
        );
    }
    out
}

pub fn write_energy_csv(path: &Path, records: &[EnergyRecord]) -> Result<()> {
    fs::write(path, energy_csv(records))?;
    Ok(())
}

/// Parse a CSV written by [`energy_csv`]. The filtered-energy column `u_l2`
/// is not stored and comes back as zero.
pub fn read_energy_csv(text: &str) -> Result<Vec<EnergyRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(crate::Error::Config(format!("unexpected CSV header {other:?}")));
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let xs = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| crate::Error::Config(format!("bad CSV row `{line}`: {e}")))?;
            if xs.len() != 6 {
                return Err(crate::Error::Config(format!("CSV row `{line}` has {} columns", xs.len())));
            }
            Ok(EnergyRecord {
                t: xs[0],
                energy: xs[1],
                dissipation: xs[2],
                v_l2: xs[3],
                gradv_l2: xs[4],
                fhat_max: xs[5],
                u_l2: 0.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    BlowUp,
}

/// One asserted comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable pass condition.
    pub requirement: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value <= bound, value, requirement: format!("<= {bound:e}") }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value >= bound, value, requirement: format!(">= {bound}") }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= lo && value <= hi,
            value,
            requirement: format!("in [{lo}, {hi}]"),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, requirement: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value: if passed { 1.0 } else { 0.0 }, requirement: requirement.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub spacing: f64,
    pub resolved_modes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub version: String,
    pub status: Status,
    pub config: ExperimentConfig,
    pub grid: GridSummary,
    pub fit_windows: Vec<(String, f64, f64)>,
    /// Why long-time behaviour on a periodic box differs from the whole space.
    pub box_caveat: String,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
    pub details: Value,
}

pub const BOX_CAVEAT: &str = "Runs use a periodic box. Once the decay has drained all modes except the \
lowest, energy decays exponentially at rate 2 nu (2 pi / L)^(2 beta); power-law fits are meaningful \
only inside the reported window, before that regime.";

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        let g = config.grid;
        let (spacing, resolved) = match config.grid.build() {
            Ok(grid) => (grid.spacing(), (0..grid.len()).filter(|&i| grid.is_resolved(i)).count()),
            Err(_) => (f64::NAN, 0),
        };
        Self {
            scenario: config.scenario.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: Status::Pass,
            config: config.clone(),
            grid: GridSummary { dim: g.dim, n: g.n, length: g.length, spacing, resolved_modes: resolved },
            fit_windows: Vec::new(),
            box_caveat: BOX_CAVEAT.to_string(),
            checks: Vec::new(),
            warnings: Vec::new(),
            failure: None,
            details: Value::Null,
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.passed && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.checks.push(check);
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.failure.get_or_insert(reason.into());
    }

    pub fn blow_up(&mut self, reason: impl Into<String>) {
        self.status = Status::BlowUp;
        self.failure = Some(reason.into());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let records = vec![
            EnergyRecord { t: 0.0, energy: 1.0 / 3.0, dissipation: 2e-300, v_l2: 0.1, gradv_l2: 7.0, fhat_max: 1e10, u_l2: 0.5 },
            EnergyRecord { t: 0.1, energy: 0.2, dissipation: 0.0, v_l2: 0.3, gradv_l2: 0.4, fhat_max: 0.5, u_l2: 0.5 },
        ];
        let text = energy_csv(&records);
        assert!(text.starts_with("t,E,D,v_l2,gradv_l2,fhat_max\n"));
        let back = read_energy_csv(&text).unwrap();
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
            assert_eq!(a.dissipation.to_bits(), b.dissipation.to_bits());
            assert_eq!(a.fhat_max.to_bits(), b.fhat_max.to_bits());
        }
        assert!(read_energy_csv("a,b\n").is_err());
    }

    #[test]
    fn checks_drive_status() {
        assert!(Check::at_most("x", 1.0, 1.0).passed);
        assert!(!Check::at_least("x", 0.5, 1.0).passed);
        assert!(Check::within("x", -2.0, -2.5, -1.5).passed);
        assert!(!Check::within("x", -1.0, -2.5, -1.5).passed);
    }
}
