//! Invariant suite run by the `validate` subcommand.

use rand::Rng;

use crate::agents::AdditionalKind;
use crate::matching::{AgentId, Order, OrderBook, Side, TickPrice, Time, Trade};
use crate::reference::ReferenceMatcher;
use crate::rng;
use crate::sim::{run_simulation_with, RunOptions, SimConfig};

#[derive(Debug, Clone)]
pub enum StreamEvent {
    Limit(Order),
    Marketable {
        side: Side,
        size: u32,
        owner: AgentId,
        time: Time,
    },
}

impl StreamEvent {
    pub fn time(&self) -> Time {
        match self {
            StreamEvent::Limit(o) => o.placed_at,
            StreamEvent::Marketable { time, .. } => *time,
        }
    }
}

/// Random limit orders with prices uniform within ±5% of `center` ticks,
/// random sides, sizes 1–2 and lifetimes of 1–2000 steps. With
/// `marketable_share > 0` some events are marketable orders instead.
pub fn random_order_stream(seed: u64, count: usize, center: i64, marketable_share: f64) -> Vec<StreamEvent> {
    let mut r = rng::stream(seed, 0);
    let half_width = center / 20;
    let mut t: Time = 0;
    (0..count)
        .map(|i| {
            t += r.random_range(0..=1);
            let side = if r.random_bool(0.5) { Side::Buy } else { Side::Sell };
            let size = r.random_range(1..=2);
            let owner = AgentId(r.random_range(0..50));
            if r.random_bool(marketable_share) {
                StreamEvent::Marketable {
                    side,
                    size,
                    owner,
                    time: t,
                }
            } else {
                let price = TickPrice::new(r.random_range(center - half_width..=center + half_width));
                StreamEvent::Limit(Order {
                    id: i as u64 + 1,
                    side,
                    price,
                    size,
                    owner,
                    placed_at: t,
                    expires_at: Some(t + r.random_range(1..=2000)),
                })
            }
        })
        .collect()
}

/// Replays `events` through the book and the reference matcher, expiring
/// both at each event's time. Returns the trade log on agreement, or the
/// index and description of the first divergence.
pub fn compare_with_reference(events: &[StreamEvent]) -> Result<Vec<Trade>, String> {
    let mut book = OrderBook::new();
    let mut oracle = ReferenceMatcher::new();
    let mut log = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        let now = ev.time();
        let a = book.expire_orders(now);
        let b = oracle.expire(now);
        if a != b {
            return Err(format!("event {i}: expired {a} vs reference {b}"));
        }
        let (got, want) = match ev {
            StreamEvent::Limit(o) => (book.submit_limit(o.clone()), oracle.submit_limit(o.clone())),
            StreamEvent::Marketable {
                side,
                size,
                owner,
                time,
            } => (
                book.submit_marketable(*side, *size, *owner, *time),
                oracle.submit_marketable(*side, *size, *owner, *time),
            ),
        };
        if got != want {
            return Err(format!("event {i}: trades {got:?} vs reference {want:?}"));
        }
        if book.best_bid() != oracle.best_bid() || book.best_ask() != oracle.best_ask() {
            return Err(format!("event {i}: best quotes differ from reference"));
        }
        if let (Some(bid), Some(ask)) = (book.best_bid(), book.best_ask()) {
            if bid >= ask {
                return Err(format!("event {i}: crossed book {bid} / {ask}"));
            }
        }
        if book.len() != oracle.len() {
            return Err(format!("event {i}: {} resting vs reference {}", book.len(), oracle.len()));
        }
        log.extend(got);
    }
    Ok(log)
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<String, String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

/// Small configuration the suite runs the audited simulations on.
pub fn small_config(seed: u64) -> SimConfig {
    SimConfig {
        n_agents: 200,
        tau_max: 2_000,
        t_c: 2_000,
        ta: 5_000,
        t_end: 100_000,
        seed,
        ..SimConfig::scaled()
    }
}

pub fn run_suite(seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(check("limit-order oracle equivalence", {
        let events = random_order_stream(seed, 10_000, 1_000_000, 0.0);
        compare_with_reference(&events).map(|log| format!("{} trades identical", log.len()))
    }));

    out.push(check("marketable-order oracle equivalence", {
        let events = random_order_stream(seed ^ 0x5eed, 10_000, 1_000_000, 0.2);
        compare_with_reference(&events).map(|log| format!("{} trades identical", log.len()))
    }));

    let base = small_config(seed);
    for (name, config) in [
        ("audit: no additional agents", base.without_additional()),
        ("audit: fundamental agents", base.with_additional(AdditionalKind::Fundamental, 99)),
        ("audit: technical agents", base.with_additional(AdditionalKind::Technical, 99)),
    ] {
        out.push(check(name, {
            match run_simulation_with::<f64>(&config, RunOptions::full()) {
                Err(e) => Err(e.to_string()),
                Ok(r) => {
                    let audit = r.audit.unwrap_or_default();
                    let log = r.trade_log.unwrap_or_default();
                    let bought: u64 = log.iter().map(|t| t.size as u64).sum();
                    if !audit.is_clean() {
                        Err(audit.violations.join("; "))
                    } else if bought != r.shares_traded {
                        Err(format!("shares {bought} vs counted {}", r.shares_traded))
                    } else if r.steps != config.t_end {
                        Err(format!("{} steps, expected {}", r.steps, config.t_end))
                    } else {
                        Ok(format!(
                            "{} events, {} trades, positions within bounds",
                            audit.events_checked, r.trades
                        ))
                    }
                }
            }
        }));
    }

    out.push(check("determinism", {
        let config = base.with_additional(AdditionalKind::Technical, 20);
        let opts = RunOptions {
            digest: true,
            ..RunOptions::summary()
        };
        match (
            run_simulation_with::<f64>(&config, opts),
            run_simulation_with::<f64>(&config, opts),
        ) {
            (Ok(a), Ok(b)) if a == b => Ok(format!(
                "trade log {}",
                a.trade_digest.map(|d| d.checksum).unwrap_or_default()
            )),
            (Ok(_), Ok(_)) => Err("repeated run differs".into()),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        }
    }));

    out
}
