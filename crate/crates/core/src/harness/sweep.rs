use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::netsim::{DriftSpec, SimConfig};
use crate::protocol::{measure_radio_cost, run_pipeline};
use crate::seed::derive;

/// A grid of configurations, each run `trials` times.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub d: Vec<usize>,
    pub beta: Vec<f64>,
    pub exclusive: Vec<bool>,
    /// `None` runs without drift.
    pub drift_c: Vec<Option<f64>>,
    pub trials: usize,
    pub seed: u64,
    /// Settings shared by every cell.
    pub base: SimConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.d.is_empty() || self.beta.is_empty() || self.exclusive.is_empty() || self.drift_c.is_empty() {
            bail!("every grid needs at least one value");
        }
        for cfg in self.cells() {
            cfg.validate().with_context(|| format!("grid cell d={} beta={:?}", cfg.d, cfg.beta))?;
        }
        Ok(())
    }

    /// Grid cells in `d`, `beta`, `exclusive`, `drift` order.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &d in &self.d {
            for &beta in &self.beta {
                for &exclusive in &self.exclusive {
                    for &drift_c in &self.drift_c {
                        let tau_trans = self.base.drift.map_or(1.0, |s| s.tau_trans);
                        out.push(SimConfig {
                            d,
                            n: None,
                            beta: Some(beta),
                            exclusive,
                            drift: drift_c.map(|c| DriftSpec { c, tau_trans }),
                            ..self.base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

/// Aggregate of one grid cell. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRecord {
    pub cell: usize,
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    pub beta: f64,
    pub exclusive: bool,
    pub drift_c: Option<f64>,
    pub trials: usize,
    pub success_rate: f64,
    pub connected_rate: f64,
    pub mean_max_cost: f64,
    pub max_cost: usize,
    pub mean_diameter: Option<f64>,
    pub rounds: usize,
    pub wall_ms: Option<u128>,
}

struct TrialRow {
    success: bool,
    connected: bool,
    max_cost: usize,
    diameter: Option<usize>,
    n: usize,
    rounds: usize,
}

/// Runs every cell `trials` times. Trial `k` of cell `c` uses the seed
/// `derive(root, [c, k])`; rows come back in cell order whatever the
/// scheduling.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SummaryRecord>> {
    spec.validate()?;
    let cells = spec.cells();
    cells
        .iter()
        .enumerate()
        .map(|(cell, cfg)| {
            let started = Instant::now();
            let rows: Vec<TrialRow> = (0..spec.trials)
                .into_par_iter()
                .map(|k| {
                    let seed = derive(spec.seed, &[cell as u64, k as u64]);
                    let r = run_pipeline(&SimConfig { seed, ..cfg.clone() }, None)?;
                    Ok(TrialRow {
                        success: r.success(),
                        connected: r.stats.connected,
                        max_cost: measure_radio_cost(&r).max,
                        diameter: r.stats.diameter,
                        n: r.params.n,
                        rounds: r.rounds_used(),
                    })
                })
                .collect::<Result<_>>()?;
            let t = rows.len() as f64;
            let diameters: Vec<f64> = rows.iter().filter_map(|r| r.diameter.map(|x| x as f64)).collect();
            Ok(SummaryRecord {
                cell,
                seed: spec.seed,
                d: cfg.d,
                n: rows[0].n,
                beta: cfg.beta.expect("cells set beta"),
                exclusive: cfg.exclusive,
                drift_c: cfg.drift.map(|s| s.c),
                trials: rows.len(),
                success_rate: rows.iter().filter(|r| r.success).count() as f64 / t,
                connected_rate: rows.iter().filter(|r| r.connected).count() as f64 / t,
                mean_max_cost: rows.iter().map(|r| r.max_cost as f64).sum::<f64>() / t,
                max_cost: rows.iter().map(|r| r.max_cost).max().unwrap_or(0),
                mean_diameter: (!diameters.is_empty())
                    .then(|| diameters.iter().sum::<f64>() / diameters.len() as f64),
                rounds: rows[0].rounds,
                wall_ms: Some(started.elapsed().as_millis()),
            })
        })
        .collect()
}

/// Writes records as CSV with a header row. Wall-clock is blanked unless
/// `timing`, so identical seeds give identical bytes.
pub fn write_csv<W: Write>(records: &[SummaryRecord], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let mut r = r.clone();
        if !timing {
            r.wall_ms = None;
        }
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[SummaryRecord], path: &Path, timing: bool) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(records, file, timing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            d: vec![64],
            beta: vec![0.5],
            exclusive: vec![false],
            drift_c: vec![None],
            trials,
            seed: 11,
            base: SimConfig::default(),
        }
    }

    #[test]
    fn one_cell_one_record() {
        let recs = run_sweep(&spec(1)).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].trials, 1);
        assert!((0.0..=1.0).contains(&recs[0].success_rate));
    }

    #[test]
    fn csv_is_reproducible() {
        let s = ExperimentSpec { exclusive: vec![false, true], drift_c: vec![None, Some(2.0)], ..spec(3) };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&run_sweep(&s).unwrap(), &mut a, false).unwrap();
        write_csv(&run_sweep(&s).unwrap(), &mut b, false).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("cell,seed,d,n,beta,exclusive,drift_c,trials,success_rate,"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(run_sweep(&spec(0)).is_err());
        assert!(run_sweep(&ExperimentSpec { d: vec![], ..spec(1) }).is_err());
        assert!(run_sweep(&ExperimentSpec { beta: vec![-1.0], ..spec(1) }).is_err());
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let recs = run_sweep(&spec(1)).unwrap();
        assert!(write_csv_file(&recs, Path::new("/nonexistent-dir/out.csv"), false).is_err());
    }
}
