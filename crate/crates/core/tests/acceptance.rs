//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs on the scaled profile (n = 1000, t_e = 2·10⁶ unless stated).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cda_abm::agents::{decide_order, expected_return, sample_normal_agent, technical_term_active, AdditionalKind};
use cda_abm::harness::validate::{compare_with_reference, random_order_stream};
use cda_abm::harness::{run_cells, SweepCell, SweepSpec};
use cda_abm::matching::{round_to_tick, AgentId, Order, OrderBook, TickPrice};
use cda_abm::rng;
use cda_abm::sim::{run_simulation_with, RunOptions, RunResult, SeriesStats, SimConfig};
use rand::Rng;
use rand_distr::{Open01, StandardNormal};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn scaled(seed: u64) -> SimConfig {
    SimConfig {
        seed,
        ..SimConfig::scaled()
    }
}

fn audited() -> RunOptions {
    RunOptions {
        audit: true,
        ..RunOptions::summary()
    }
}

fn run(config: &SimConfig, options: RunOptions) -> RunResult {
    run_simulation_with::<f64>(config, options).expect("valid configuration")
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let events = random_order_stream(1, 10_000, 1_000_000, 0.0);
    let result = compare_with_reference(&events);
    let elapsed = start.elapsed();
    match result {
        Ok(log) => outcome(
            elapsed < Duration::from_secs(5),
            format!("{} trades identical in {:.2}s (limit 5s)", log.len(), elapsed.as_secs_f64()),
        ),
        Err(e) => outcome(false, e),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let config = SimConfig {
        t_end: 1_000_000,
        ..scaled(7)
    }
    .with_additional(AdditionalKind::Technical, 99);
    let r = run(
        &config,
        RunOptions {
            record_trades: true,
            audit: true,
            ..RunOptions::summary()
        },
    );
    let elapsed = start.elapsed();
    let audit = r.audit.as_ref().unwrap();
    let log = r.trade_log.as_ref().unwrap();
    let agents = (config.n_agents + config.n_additional) as usize;
    let mut shares = vec![0i64; agents];
    let mut cash = vec![0i64; agents];
    let mut per_trade_ok = true;
    for t in log {
        let value = t.price.ticks() * t.size as i64;
        let (db, ds) = (t.size as i64, -(t.size as i64));
        let (cb, cs) = (-value, value);
        per_trade_ok &= db + ds == 0 && cb + cs == 0;
        shares[t.buyer.0 as usize] += db;
        shares[t.seller.0 as usize] += ds;
        cash[t.buyer.0 as usize] += cb;
        cash[t.seller.0 as usize] += cs;
    }
    let totals_ok = shares.iter().sum::<i64>() == 0 && cash.iter().sum::<i64>() == 0;
    let passed = per_trade_ok
        && totals_ok
        && audit.is_clean()
        && r.steps == config.t_end
        && elapsed < Duration::from_secs(30);
    outcome(
        passed,
        format!(
            "{} trades, {} events checked, {} age sweeps, violations {:?}, {:.1}s (limit 30s)",
            log.len(),
            audit.events_checked,
            audit.age_sweeps,
            audit.violations,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let config = scaled(42).with_additional(AdditionalKind::Technical, 99);
    let opts = RunOptions {
        digest: true,
        ..RunOptions::summary()
    };
    let a = run(&config, opts);
    let b = run(&config, opts);
    let same = a.trade_digest == b.trade_digest && a.price_digest == b.price_digest && a == b;
    outcome(
        same,
        format!(
            "trade log {} / price series {}",
            a.trade_digest.unwrap().checksum,
            a.price_digest.unwrap().checksum
        ),
    )
}

struct PairedRuns {
    seeds: Vec<u64>,
    baseline: Vec<RunResult>,
    fundamental: Vec<RunResult>,
    technical: Vec<RunResult>,
}

fn paired_runs() -> PairedRuns {
    let seeds: Vec<u64> = (1..=10).collect();
    let mut runs = PairedRuns {
        seeds: seeds.clone(),
        baseline: Vec::new(),
        fundamental: Vec::new(),
        technical: Vec::new(),
    };
    for &seed in &seeds {
        let base = scaled(seed);
        runs.baseline.push(run(&base.without_additional(), RunOptions::summary()));
        runs.fundamental
            .push(run(&base.with_additional(AdditionalKind::Fundamental, 99), audited()));
        runs.technical
            .push(run(&base.with_additional(AdditionalKind::Technical, 99), audited()));
    }
    runs
}

fn criterion_4(p: &PairedRuns) -> Outcome {
    let mut events = 0;
    let mut violations = Vec::new();
    let mut final_ok = true;
    for r in p.fundamental.iter().chain(&p.technical) {
        let audit = r.audit.as_ref().unwrap();
        events += audit.events_checked;
        violations.extend(audit.violations.iter().filter(|v| v.contains("position")).cloned());
        final_ok &= r.additional.iter().all(|a| (-1..=1).contains(&a.position));
    }
    outcome(
        violations.is_empty() && final_ok,
        format!("{} runs, {events} events checked, violations {violations:?}", p.fundamental.len() * 2),
    )
}

fn paired_std(p: &PairedRuns, with: &[RunResult], smaller: bool) -> Outcome {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for ((seed, b), w) in p.seeds.iter().zip(&p.baseline).zip(with) {
        let (sb, sw) = (b.price_stats.std(), w.price_stats.std());
        if (smaller && sw < sb) || (!smaller && sw > sb) {
            wins += 1;
        }
        pairs.push(format!("{seed}:{sw:.2}/{sb:.2}"));
    }
    outcome(wins >= 9, format!("{wins}/10 pairs (need 9); with/without std {}", pairs.join(" ")))
}

struct Sweeps {
    na: Vec<u32>,
    cells: Vec<SweepCell>,
}

fn sweeps() -> Sweeps {
    let na = vec![1, 20, 40, 60, 80, 99];
    let spec = SweepSpec::new(
        scaled(1),
        na.clone(),
        vec![AdditionalKind::Fundamental, AdditionalKind::Technical],
        (1..=30).collect(),
    );
    let cells = run_cells(&spec, RunOptions::summary()).expect("sweep");
    Sweeps { na, cells }
}

impl Sweeps {
    fn mean_over_seeds(&self, kind: AdditionalKind, f: impl Fn(&RunResult) -> f64) -> Vec<f64> {
        self.na
            .iter()
            .map(|&n_a| {
                let v: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| c.kind == kind && c.n_a == n_a)
                    .map(|c| f(&c.result))
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect()
    }

    fn profits(&self, kind: AdditionalKind) -> Vec<f64> {
        self.mean_over_seeds(kind, |r| r.mean_profit_per_aa().unwrap())
    }

    fn trades(&self, kind: AdditionalKind) -> Vec<f64> {
        self.mean_over_seeds(kind, |r| r.mean_trades_per_aa().unwrap())
    }
}

fn fmt_series(na: &[u32], v: &[f64]) -> String {
    na.iter()
        .zip(v)
        .map(|(n, x)| format!("{n}:{x:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_7(s: &Sweeps) -> Outcome {
    let profit = s.profits(AdditionalKind::Technical);
    let x: Vec<f64> = s.na.iter().map(|&n| n as f64).collect();
    let rho = spearman(&x, &profit);
    let last = *profit.last().unwrap();
    outcome(
        rho > 0.8 && last > 0.0,
        format!("spearman {rho:.3} (> 0.8), profit at 99 = {last:.2} (> 0); {}", fmt_series(&s.na, &profit)),
    )
}

fn criterion_8(s: &Sweeps) -> Outcome {
    let profit = s.profits(AdditionalKind::Fundamental);
    let x: Vec<f64> = s.na.iter().map(|&n| n as f64).collect();
    let rho = spearman(&x, &profit);
    let (first, last) = (profit[0], *profit.last().unwrap());
    outcome(
        last < first && rho < 0.0,
        format!("spearman {rho:.3} (< 0), profit 99 = {last:.2} < profit 1 = {first:.2}; {}", fmt_series(&s.na, &profit)),
    )
}

fn criterion_9(s: &Sweeps) -> Outcome {
    let trades = s.trades(AdditionalKind::Technical);
    let at = |n: u32| trades[s.na.iter().position(|&x| x == n).unwrap()];
    let (t1, t20, t40, t99) = (at(1), at(20), at(40), at(99));
    let drop = (t1 - t20) / t1;
    let plateau = (t99 - t40).abs() / t40;
    outcome(
        t20 < 0.8 * t1 && plateau < drop,
        format!(
            "trades@20 {t20:.2} < 0.8 x trades@1 {t1:.2}; relative change 40..99 {plateau:.3} < drop 1..20 {drop:.3}; {}",
            fmt_series(&s.na, &trades)
        ),
    )
}

/// Normal agents only, assembled from the matching and agent primitives
/// without the simulation driver's scheduling or additional-agent code.
fn normal_agents_only(config: &SimConfig) -> (SeriesStats, u64) {
    let n = config.n_agents as usize;
    let mut agents: Vec<_> = (0..n as u64)
        .map(|j| {
            let mut r = rng::stream(config.seed, j);
            let params = sample_normal_agent::<f64, _>(&mut r, &config.bounds());
            (params, r)
        })
        .collect();
    let fundamental = config.fundamental_ticks();
    let tick = config.tick_size;
    let mut book = OrderBook::new();
    let mut history = vec![fundamental];
    let mut last_trade: Option<TickPrice> = None;
    let mut trades = 0u64;
    let mut stats = SeriesStats::new();
    for t in 1..=config.t_end {
        book.expire_orders(t);
        let j = ((t - 1) % n as u64) as usize;
        let (params, r) = &mut agents[j];
        let prev = history[(t - 1) as usize].ticks() as f64 * tick;
        let lagged = technical_term_active(t, params.tau)
            .then(|| history[(t - params.tau - 1) as usize].ticks() as f64 * tick);
        let eps = r.sample::<f64, _>(StandardNormal) * config.noise_std();
        let rho: f64 = r.sample(Open01);
        let er = expected_return(params, config.fundamental, prev, lagged, eps);
        if let Some(intent) = decide_order(prev, er, rho, config.price_spread, t, config.t_c, config.fundamental) {
            let fills = book.submit_limit(Order {
                id: t,
                side: intent.side,
                price: round_to_tick(intent.price, intent.side, tick),
                size: 1,
                owner: AgentId(j as u32),
                placed_at: t,
                expires_at: Some(t + config.t_c),
            });
            trades += fills.len() as u64;
            if let Some(last) = fills.last() {
                last_trade = Some(last.price);
            }
        }
        let mid = book.mid_price(last_trade.unwrap_or(fundamental));
        stats.push(mid.ticks() as f64 * tick);
        history.push(mid);
    }
    (stats, trades)
}

fn criterion_10() -> Outcome {
    let config = SimConfig {
        t_end: 1_000_000,
        ..scaled(42)
    }
    .without_additional();
    let full = run(&config, RunOptions::summary());
    let (stats, trades) = normal_agents_only(&config);
    let rate = trades as f64 / config.t_end as f64;
    let same = full.price_stats == stats && full.trades == trades && full.trade_rate() == rate;
    outcome(
        same,
        format!(
            "std {:.6} vs {:.6}, mean {:.6} vs {:.6}, trade rate {:.6} vs {:.6}",
            full.price_stats.std(),
            stats.std(),
            full.price_stats.mean,
            stats.mean,
            full.trade_rate(),
            rate
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:>2} [{}] {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };

    report(1, "matching oracle equivalence", criterion_1());
    report(2, "conservation and book invariants", criterion_2());
    report(3, "determinism", criterion_3());

    let paired = paired_runs();
    report(4, "additional agent position bound", criterion_4(&paired));
    report(5, "fundamental agents stabilise prices", paired_std(&paired, &paired.fundamental, true));
    report(6, "technical agents destabilise prices", paired_std(&paired, &paired.technical, false));

    let sweeps = sweeps();
    report(7, "technical agent profit rises with n_a", criterion_7(&sweeps));
    report(8, "fundamental agent profit falls with n_a", criterion_8(&sweeps));
    report(9, "technical agent trade-count shape", criterion_9(&sweeps));

    report(10, "reduction to normal agents only", criterion_10());

    let failed = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.0}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
