//! Seed ensembles over additional-agent populations.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agents::AdditionalKind;
use crate::error::{Error, Result};
use crate::harness::output::{self, PriceFormat};
use crate::rng::derive_seed;
use crate::sim::{run_simulation_with, RunOptions, RunResult, SimConfig};

/// Caps the sweep worker count; absent means all available cores.
pub const THREADS_ENV: &str = "CDA_ABM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    /// Non-empty, strictly ascending.
    pub na_values: Vec<u32>,
    pub aa_kinds: Vec<AdditionalKind>,
    /// Non-empty, distinct.
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    /// Also write per-run price and ledger files.
    pub write_runs: bool,
    /// Stride of per-run price files.
    pub stride: u64,
}

impl SweepSpec {
    pub fn new(base: SimConfig, na_values: Vec<u32>, aa_kinds: Vec<AdditionalKind>, seeds: Vec<u64>) -> Self {
        Self {
            base,
            na_values,
            aa_kinds,
            seeds,
            out_dir: None,
            write_runs: false,
            stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.na_values.is_empty() || self.na_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "na_values must be non-empty and strictly ascending".into(),
            ));
        }
        if self.aa_kinds.is_empty() {
            return Err(Error::InvalidConfig("aa_kinds must be non-empty".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if self.seeds.is_empty() || seeds.len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be non-empty and distinct".into()));
        }
        Ok(())
    }

    /// Run seed for one cell: SHA-256 over (kind label, base seed, n_a,
    /// seed). Adding grid points never changes existing cells.
    pub fn cell_seed(&self, kind: AdditionalKind, n_a: u32, seed: u64) -> u64 {
        derive_seed(kind.label(), &[self.base.seed, n_a as u64, seed])
    }

    pub fn cell_config(&self, kind: AdditionalKind, n_a: u32, seed: u64) -> SimConfig {
        SimConfig {
            seed: self.cell_seed(kind, n_a, seed),
            ..self.base.with_additional(kind, n_a)
        }
    }

    fn grid(&self) -> Vec<(AdditionalKind, u32, u64)> {
        let mut kinds = self.aa_kinds.clone();
        kinds.sort();
        kinds.dedup();
        let mut cells = Vec::new();
        for &kind in &kinds {
            for &n_a in &self.na_values {
                for &seed in &self.seeds {
                    cells.push((kind, n_a, seed));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub kind: AdditionalKind,
    pub n_a: u32,
    /// Entry of [`SweepSpec::seeds`].
    pub seed: u64,
    /// Seed actually passed to the simulation.
    pub run_seed: u64,
    pub result: RunResult,
}

/// Aggregates of one `(kind, n_a)` grid point.
///
/// Per-agent quantities are first averaged over the agents of each run, then
/// over seeds. They are `None` when `n_a = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub aa_kind: AdditionalKind,
    pub n_a: u32,
    pub mean_profit_per_aa: Option<f64>,
    pub mean_total_profit: Option<f64>,
    pub mean_trades_per_aa: Option<f64>,
    /// Standard error over seeds of the per-run mean profit.
    pub std_err_profit: Option<f64>,
    /// Mean over seeds of the per-run mid-price sample std.
    pub price_std: f64,
    pub price_mean: f64,
    pub n_seeds: usize,
}

pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs every `(kind, n_a, seed)` cell; results come back in grid order
/// regardless of scheduling.
pub fn run_cells(spec: &SweepSpec, options: RunOptions) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        spec.grid()
            .into_par_iter()
            .map(|(kind, n_a, seed)| {
                let config = spec.cell_config(kind, n_a, seed);
                let result = run_simulation_with::<f64>(&config, options)?;
                Ok(SweepCell {
                    kind,
                    n_a,
                    seed,
                    run_seed: config.seed,
                    result,
                })
            })
            .collect()
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_err(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// One row per `(kind, n_a)`, sorted by kind then `n_a`.
pub fn aggregate(cells: &[SweepCell]) -> Vec<SweepRow> {
    let mut keys: Vec<(AdditionalKind, u32)> = cells.iter().map(|c| (c.kind, c.n_a)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(kind, n_a)| {
            let runs: Vec<&RunResult> = cells
                .iter()
                .filter(|c| c.kind == kind && c.n_a == n_a)
                .map(|c| &c.result)
                .collect();
            let profits: Vec<f64> = runs.iter().filter_map(|r| r.mean_profit_per_aa()).collect();
            let totals: Vec<f64> = runs
                .iter()
                .filter(|r| !r.additional.is_empty())
                .map(|r| r.total_profit())
                .collect();
            let trades: Vec<f64> = runs.iter().filter_map(|r| r.mean_trades_per_aa()).collect();
            let stds: Vec<f64> = runs.iter().map(|r| r.price_stats.std()).collect();
            let means: Vec<f64> = runs.iter().map(|r| r.price_stats.mean).collect();
            let defined = !profits.is_empty();
            SweepRow {
                aa_kind: kind,
                n_a,
                mean_profit_per_aa: defined.then(|| mean(&profits)),
                mean_total_profit: defined.then(|| mean(&totals)),
                mean_trades_per_aa: defined.then(|| mean(&trades)),
                std_err_profit: defined.then(|| std_err(&profits)),
                price_std: mean(&stds),
                price_mean: mean(&means),
                n_seeds: runs.len(),
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "aa_kind",
    "n_a",
    "mean_profit_per_aa",
    "mean_total_profit",
    "mean_trades_per_aa",
    "std_err_profit",
    "price_std",
    "price_mean",
    "n_seeds",
];

pub fn write_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.aa_kind.label().to_string(),
                r.n_a.to_string(),
                opt(r.mean_profit_per_aa),
                opt(r.mean_total_profit),
                opt(r.mean_trades_per_aa),
                opt(r.std_err_profit),
                format!("{:.6}", r.price_std),
                format!("{:.6}", r.price_mean),
                r.n_seeds.to_string(),
            ]
        })
        .collect();
    output::write_rows(path, &SUMMARY_HEADER, &records)
}

/// Fails unless `dir` exists (creating it if needed) and accepts files.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".cda-abm-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn cell_stem(cell: &SweepCell) -> String {
    format!("{}_{}_{}", cell.kind.label(), cell.n_a, cell.seed)
}

/// Runs the sweep and, when `out_dir` is set, writes `sweep_summary.csv`
/// (plus per-run files when `write_runs`). The output directory is checked
/// before any simulation starts.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    Ok(run_sweep_detailed(spec)?.0)
}

pub fn run_sweep_detailed(spec: &SweepSpec) -> Result<(Vec<SweepRow>, Vec<SweepCell>)> {
    spec.validate()?;
    if let Some(dir) = &spec.out_dir {
        ensure_writable(dir)?;
    }
    let options = RunOptions {
        record_prices: spec.write_runs && spec.out_dir.is_some(),
        ..RunOptions::summary()
    };
    let mut cells = run_cells(spec, options)?;
    let rows = aggregate(&cells);
    if let Some(dir) = &spec.out_dir {
        let fmt = PriceFormat::new(&spec.base);
        if spec.write_runs {
            for cell in &mut cells {
                let stem = cell_stem(cell);
                if let Some(prices) = cell.result.prices.take() {
                    output::write_prices(
                        &dir.join(format!("prices_{stem}.csv")),
                        &prices,
                        spec.stride,
                        fmt,
                    )?;
                }
                output::write_ledger(
                    &dir.join(format!("ledger_{stem}.csv")),
                    &cell.result.additional,
                    fmt,
                )?;
            }
        }
        write_summary(&dir.join("sweep_summary.csv"), &rows)?;
    }
    Ok((rows, cells))
}

/// Runs `config` with `seed` and writes its `(t, P^t)` series to `path`.
/// Returns the run and the number of rows written.
pub fn emit_timeseries(config: &SimConfig, seed: u64, path: &Path, stride: u64) -> Result<(RunResult, usize)> {
    let config = SimConfig {
        seed,
        ..config.clone()
    };
    config.validate()?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_writable(parent)?;
    }
    let options = RunOptions {
        record_prices: true,
        ..RunOptions::summary()
    };
    let mut result = run_simulation_with::<f64>(&config, options)?;
    let prices = result.prices.take().unwrap_or_default();
    let rows = output::write_prices(path, &prices, stride, PriceFormat::new(&config))?;
    Ok((result, rows))
}
