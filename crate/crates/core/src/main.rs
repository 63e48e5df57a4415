use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cda_abm::agents::AdditionalKind;
use cda_abm::harness::output::{self, PriceFormat};
use cda_abm::harness::{self, parse_config, parse_kind, ConfigFile, SweepSpec};
use cda_abm::sim::{run_simulation_with, RunOptions, RunResult};
use cda_abm::{Error, Result};

#[derive(Parser)]
#[command(name = "cda-abm", version, about = "Artificial market simulator with additional fundamental/technical agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write prices.csv and ledger.csv.
    Run(RunArgs),
    /// Run a seed ensemble over additional-agent counts and write sweep_summary.csv.
    Sweep(SweepArgs),
    /// Run the matching-oracle, conservation and determinism checks.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-length profile (t_e = 2e7) instead of the scaled one.
    #[arg(long)]
    paper_scale: bool,
    /// Total normal-agent steps.
    #[arg(long)]
    te: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every stride-th price.
    #[arg(long)]
    stride: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    /// none, afa or ata.
    #[arg(long)]
    kind: Option<String>,
    /// Number of additional agents.
    #[arg(long)]
    na: Option<u32>,
    /// Also write trades.csv.
    #[arg(long)]
    trades: bool,
    /// Evaluate agent expectations in single precision.
    #[arg(long)]
    f32: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Use seeds 1..=N.
    #[arg(long, conflicts_with = "seeds")]
    n_seeds: Option<u64>,
    /// Base seed mixed into every cell seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated kinds (afa, ata).
    #[arg(long, value_delimiter = ',')]
    kind: Option<Vec<String>>,
    /// Comma-separated additional-agent counts.
    #[arg(long, value_delimiter = ',')]
    na: Option<Vec<u32>>,
    /// Also write per-run price and ledger files.
    #[arg(long)]
    write_runs: bool,
}

fn load(common: &Common) -> Result<ConfigFile> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let mut cfg = parse_config(&text)?;
            if common.paper_scale {
                let paper = parse_config(&format!("profile = paper\n{text}"))?;
                cfg.sim = paper.sim;
            }
            cfg
        }
        None if common.paper_scale => parse_config("profile = paper")?,
        None => ConfigFile::default(),
    };
    if let Some(te) = common.te {
        cfg.sim.t_end = te;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(stride) = common.stride {
        cfg.stride = Some(stride);
    }
    Ok(cfg)
}

fn print_result(r: &RunResult, fmt: PriceFormat) {
    println!(
        "steps={} na_orders={} trades={} shares={} price_mean={:.4} price_std={:.4} price_min={:.2} price_max={:.2} final={}",
        r.steps,
        r.na_orders,
        r.trades,
        r.shares_traded,
        r.price_stats.mean,
        r.price_stats.std(),
        r.price_stats.min,
        r.price_stats.max,
        fmt.format(r.final_price),
    );
    if let (Some(p), Some(t)) = (r.mean_profit_per_aa(), r.mean_trades_per_aa()) {
        println!(
            "additional={} kind={} mean_profit_per_aa={:.4} total_profit={:.4} mean_trades_per_aa={:.4}",
            r.additional.len(),
            r.aa_kind.map(|k| k.label()).unwrap_or("none"),
            p,
            r.total_profit(),
            t
        );
    }
    if let Some(d) = &r.trade_digest {
        println!("trade_log_count={} trade_log_sha256={}", d.count, d.checksum);
    }
    if let Some(d) = &r.price_digest {
        println!("price_series_count={} price_series_sha256={}", d.count, d.checksum);
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(kind) = &args.kind {
        cfg.sim.aa_kind = parse_kind(kind).map_err(Error::InvalidConfig)?;
    }
    if let Some(na) = args.na {
        cfg.sim.n_additional = na;
    }
    let config = cfg.sim;
    let options = RunOptions {
        record_prices: true,
        record_trades: args.trades,
        digest: true,
        audit: false,
    };
    let out = cfg.out.unwrap_or_else(|| PathBuf::from("."));
    harness::sweep::ensure_writable(&out)?;
    let mut result = if args.f32 {
        run_simulation_with::<f32>(&config, options)?
    } else {
        run_simulation_with::<f64>(&config, options)?
    };
    let fmt = PriceFormat::new(&config);
    let prices = result.prices.take().unwrap_or_default();
    output::write_prices(&out.join("prices.csv"), &prices, cfg.stride.unwrap_or(1), fmt)?;
    output::write_ledger(&out.join("ledger.csv"), &result.additional, fmt)?;
    if let Some(trades) = result.trade_log.take() {
        output::write_trades(&out.join("trades.csv"), &trades, fmt)?;
    }
    print_result(&result, fmt);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    let kinds = match &args.kind {
        Some(list) => list
            .iter()
            .map(|k| parse_kind(k))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::InvalidConfig)?
            .into_iter()
            .flatten()
            .collect(),
        None => cfg
            .aa_kinds
            .clone()
            .unwrap_or(vec![AdditionalKind::Fundamental, AdditionalKind::Technical]),
    };
    let seeds = match (args.seeds, args.n_seeds) {
        (Some(s), _) => s,
        (None, Some(n)) => (1..=n).collect(),
        (None, None) => cfg.seeds.clone().unwrap_or_else(|| (1..=30).collect()),
    };
    let na_values = args
        .na
        .or(cfg.na_values.clone())
        .unwrap_or_else(|| vec![0, 1, 20, 40, 60, 80, 99]);
    let mut spec = SweepSpec::new(cfg.sim, na_values, kinds, seeds);
    spec.out_dir = Some(cfg.out.unwrap_or_else(|| PathBuf::from(".")));
    spec.write_runs = args.write_runs || cfg.write_runs.unwrap_or(false);
    spec.stride = cfg.stride.unwrap_or(1);
    let rows = harness::run_sweep(&spec)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    for r in &rows {
        println!(
            "{} n_a={} profit/aa={} trades/aa={} price_std={:.4} seeds={}",
            r.aa_kind.label(),
            r.n_a,
            opt(r.mean_profit_per_aa),
            opt(r.mean_trades_per_aa),
            r.price_std,
            r.n_seeds
        );
    }
    if let Some(dir) = &spec.out_dir {
        println!("wrote {}", Path::new(dir).join("sweep_summary.csv").display());
    }
    Ok(())
}

fn cmd_validate(seed: u64) -> bool {
    let outcomes = harness::validate::run_suite(seed);
    for o in &outcomes {
        println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    outcomes.iter().all(|o| o.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate { seed } => {
            return if cmd_validate(seed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
