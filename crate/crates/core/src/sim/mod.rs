//! Simulation clock, agent scheduling, accounting and the run loop.
//!
//! The clock advances only on normal-agent orders. Normal agents act in a
//! fixed cycle `1..=n`. After the agent at loop slot `s` has acted, every
//! active additional agent assigned to slot `s` acts with a marketable order
//! inside the same step. The mid-price `P^t` is recorded once all activity of
//! step `t` is done.

pub mod config;
pub mod history;
pub mod schedule;
pub mod stats;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use sha2::{Digest, Sha256};

use crate::agents::{
    afa_decide, ata_decide, decide_order, expected_return, sample_normal_agent,
    technical_term_active, AaAction, AdditionalAgentState, AdditionalKind, NormalAgentParams,
};
use crate::error::Result;
use crate::matching::{round_to_tick, AgentId, Order, OrderBook, Side, TickPrice, Time, Trade};
use crate::rng::{self, SimRng};
use crate::scalar::Scalar;

pub use config::{Activation, SimConfig};
pub use history::PriceHistory;
pub use schedule::{build_schedule, Schedule, ScheduleEntry};
pub use stats::SeriesStats;

/// What a run records beyond the summary statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Keep the full mid-price series `P^1..=P^{t_end}`.
    pub record_prices: bool,
    /// Keep every trade.
    pub record_trades: bool,
    /// Compute trade-log and price-series checksums.
    pub digest: bool,
    /// Check book and accounting invariants while running.
    pub audit: bool,
}

impl RunOptions {
    pub fn summary() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self {
            record_prices: true,
            record_trades: true,
            digest: true,
            audit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AaOutcome {
    /// 1-based order of addition.
    pub index: u32,
    pub kind: AdditionalKind,
    pub profit_ticks: i64,
    /// Profit in currency: cash plus holdings valued at the fundamental.
    pub profit: f64,
    pub trades: u64,
    pub position: i32,
    pub slot: u32,
}

/// Digest of an append-only log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogDigest {
    pub count: u64,
    /// Lowercase hex SHA-256.
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    pub events_checked: u64,
    pub age_sweeps: u64,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, msg: String) {
        // Enough to diagnose; a broken invariant usually repeats every step.
        if self.violations.len() < 32 {
            self.violations.push(msg);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub steps: u64,
    /// Normal-agent orders actually placed (exact ties place none).
    pub na_orders: u64,
    /// All trades, normal and additional.
    pub trades: u64,
    pub shares_traded: u64,
    pub aa_kind: Option<AdditionalKind>,
    pub additional: Vec<AaOutcome>,
    /// Statistics of `P^1..=P^{t_end}` in currency.
    pub price_stats: SeriesStats,
    pub final_price: TickPrice,
    pub prices: Option<Vec<TickPrice>>,
    pub trade_log: Option<Vec<Trade>>,
    pub trade_digest: Option<LogDigest>,
    pub price_digest: Option<LogDigest>,
    pub audit: Option<AuditReport>,
    /// Resting orders left at the end.
    pub final_resting: usize,
}

impl RunResult {
    pub fn trade_rate(&self) -> f64 {
        self.trades as f64 / self.steps as f64
    }

    /// Mean profit per additional agent, `None` without additional agents.
    pub fn mean_profit_per_aa(&self) -> Option<f64> {
        (!self.additional.is_empty()).then(|| {
            self.additional.iter().map(|a| a.profit).sum::<f64>() / self.additional.len() as f64
        })
    }

    pub fn total_profit(&self) -> f64 {
        self.additional.iter().map(|a| a.profit).sum()
    }

    pub fn mean_trades_per_aa(&self) -> Option<f64> {
        (!self.additional.is_empty()).then(|| {
            self.additional.iter().map(|a| a.trades as f64).sum::<f64>()
                / self.additional.len() as f64
        })
    }
}

struct NormalAgent<F> {
    params: NormalAgentParams<F>,
    rng: SimRng,
}

/// Per-agent shares and cash (ticks) for every participant.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    pub positions: Vec<i64>,
    pub cash: Vec<i64>,
}

impl Ledger {
    fn new(agents: usize) -> Self {
        Self {
            positions: vec![0; agents],
            cash: vec![0; agents],
        }
    }

    #[inline]
    fn book(&mut self, trade: &Trade) {
        let shares = trade.size as i64;
        let value = trade.price.ticks() * shares;
        let b = trade.buyer.0 as usize;
        let s = trade.seller.0 as usize;
        self.positions[b] += shares;
        self.cash[b] -= value;
        self.positions[s] -= shares;
        self.cash[s] += value;
    }

    pub fn total_position(&self) -> i64 {
        self.positions.iter().sum()
    }

    pub fn total_cash(&self) -> i64 {
        self.cash.iter().sum()
    }
}

/// A single market run, generic over the scalar used for the normal agents'
/// expectation arithmetic.
pub struct Simulation<F: Scalar> {
    config: SimConfig,
    book: OrderBook,
    history: PriceHistory,
    agents: Vec<NormalAgent<F>>,
    additional: Vec<AdditionalAgentState>,
    by_slot: Vec<Vec<usize>>,
    ledger: Ledger,
    fundamental: TickPrice,
    fundamental_f: F,
    tick_f: F,
    spread_f: F,
    noise_std: f64,
    t: Time,
    next_order_id: u64,
    last_trade: Option<TickPrice>,
    na_orders: u64,
    trades: u64,
    shares_traded: u64,
    price_stats: SeriesStats,
    prices: Option<Vec<TickPrice>>,
    trade_log: Option<Vec<Trade>>,
    trade_hash: Option<Sha256>,
    price_hash: Option<Sha256>,
    audit: Option<AuditReport>,
    scratch: Vec<Trade>,
}

impl<F: Scalar> Simulation<F> {
    pub fn new(config: SimConfig, options: RunOptions) -> Result<Self> {
        config.validate()?;
        let n = config.n_agents;
        let bounds = config.bounds();
        let agents = (0..n as u64)
            .map(|j| {
                let mut rng = rng::stream(config.seed, j);
                let params = sample_normal_agent(&mut rng, &bounds);
                NormalAgent { params, rng }
            })
            .collect();

        let n_additional = config.active_additional();
        let schedule = build_schedule(
            &mut rng::stream(config.seed, rng::SCHEDULE_STREAM),
            n,
            n_additional,
            config.activation,
        );
        let additional = match config.aa_kind {
            Some(kind) => schedule
                .entries
                .iter()
                .map(|e| AdditionalAgentState::new(kind, e.slot, e.activation_loop))
                .collect(),
            None => Vec::new(),
        };
        let by_slot = schedule.by_slot(n);

        let fundamental = config.fundamental_ticks();
        let lookback = config.tau_max.max(config.ta);
        let capacity_hint = if options.record_prices {
            config.t_end as usize
        } else {
            0
        };
        Ok(Self {
            book: OrderBook::new(),
            history: PriceHistory::new(fundamental, lookback),
            agents,
            additional,
            by_slot,
            ledger: Ledger::new(n as usize + n_additional as usize),
            fundamental,
            fundamental_f: F::of(config.fundamental),
            tick_f: F::of(config.tick_size),
            spread_f: F::of(config.price_spread),
            noise_std: config.noise_std(),
            t: 0,
            next_order_id: 1,
            last_trade: None,
            na_orders: 0,
            trades: 0,
            shares_traded: 0,
            price_stats: SeriesStats::new(),
            prices: options.record_prices.then(|| Vec::with_capacity(capacity_hint)),
            trade_log: options.record_trades.then(Vec::new),
            trade_hash: options.digest.then(Sha256::new),
            price_hash: options.digest.then(Sha256::new),
            audit: options.audit.then(AuditReport::default),
            scratch: Vec::with_capacity(4),
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn history(&self) -> &PriceHistory {
        &self.history
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn additional(&self) -> &[AdditionalAgentState] {
        &self.additional
    }

    pub fn normal_params(&self) -> impl Iterator<Item = &NormalAgentParams<F>> + '_ {
        self.agents.iter().map(|a| &a.params)
    }

    /// Time of the last completed step.
    pub fn now(&self) -> Time {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.config.t_end
    }

    /// Runs one normal-agent step and the additional agents at its slot.
    /// Returns the recorded mid-price.
    pub fn step(&mut self) -> Result<TickPrice> {
        let t = self.t + 1;
        let n = self.config.n_agents as u64;
        let slot = ((t - 1) % n) as usize + 1;
        let loop_index = (t - 1) / n + 1;

        self.book.expire_orders(t);
        if let Some(audit) = self.audit.as_mut() {
            if t % n == 0 {
                audit.age_sweeps += 1;
                let t_c = self.config.t_c;
                if let Some(o) = self.book.resting_orders().find(|o| t - o.placed_at >= t_c) {
                    audit.flag(format!(
                        "t={t}: order {} placed at {} still resting",
                        o.id, o.placed_at
                    ));
                }
            }
        }

        self.normal_agent_acts(t, slot - 1);
        self.check_event(t);

        for i in 0..self.by_slot[slot].len() {
            let k = self.by_slot[slot][i];
            if self.additional[k].activation_loop <= loop_index {
                self.additional_agent_acts(t, k);
                self.check_event(t);
            }
        }

        let mid = self
            .book
            .mid_price(self.last_trade.unwrap_or(self.fundamental));
        self.history.record(t, mid)?;
        self.t = t;
        self.price_stats
            .push(mid.to_currency(self.config.tick_size));
        if let Some(prices) = self.prices.as_mut() {
            prices.push(mid);
        }
        if let Some(h) = self.price_hash.as_mut() {
            h.update(mid.ticks().to_le_bytes());
        }
        Ok(mid)
    }

    fn normal_agent_acts(&mut self, t: Time, j: usize) {
        let prev_ticks = self.history.latest();
        let agent = &mut self.agents[j];
        let tau = agent.params.tau;
        let lagged = if technical_term_active(t, tau) {
            self.history.get(t - tau - 1)
        } else {
            None
        };
        let eps: f64 = agent.rng.sample::<f64, _>(StandardNormal) * self.noise_std;
        let rho: f64 = agent.rng.sample(Open01);

        let tick = self.tick_f;
        let to_f = |p: TickPrice| F::of(p.ticks() as f64) * tick;
        let prev = to_f(prev_ticks);
        let r = expected_return(
            &agent.params,
            self.fundamental_f,
            prev,
            lagged.map(to_f),
            F::of(eps),
        );
        let Some(intent) = decide_order(
            prev,
            r,
            F::of(rho),
            self.spread_f,
            t,
            self.config.t_c,
            self.fundamental_f,
        ) else {
            return;
        };
        let order = Order {
            id: self.next_order_id,
            side: intent.side,
            price: round_to_tick(intent.price, intent.side, tick),
            size: intent.size,
            owner: AgentId(j as u32),
            placed_at: t,
            expires_at: Some(t + self.config.t_c),
        };
        self.next_order_id += 1;
        self.na_orders += 1;
        let mut fills = std::mem::take(&mut self.scratch);
        fills.clear();
        self.book.submit_limit_into(order, &mut fills);
        self.settle(&fills);
        self.scratch = fills;
    }

    fn additional_agent_acts(&mut self, t: Time, k: usize) {
        let state = &self.additional[k];
        let ask = self.book.best_ask();
        let bid = self.book.best_bid();
        let action = match state.kind {
            AdditionalKind::Fundamental => afa_decide(ask, bid, self.fundamental, state.position),
            AdditionalKind::Technical => {
                let lagged = if t >= self.config.ta {
                    self.history.get(t - self.config.ta)
                } else {
                    None
                };
                ata_decide(ask, bid, lagged, state.position)
            }
        };
        let (side, size) = match action {
            AaAction::Buy(n) => (Side::Buy, n),
            AaAction::Sell(n) => (Side::Sell, n),
            AaAction::Hold => return,
        };
        let owner = AgentId(self.config.n_agents + k as u32);
        let mut fills = std::mem::take(&mut self.scratch);
        fills.clear();
        self.book
            .submit_marketable_into(side, size, owner, t, &mut fills);
        self.additional[k].apply_fills(side, &fills);
        self.settle(&fills);
        self.scratch = fills;
    }

    fn settle(&mut self, fills: &[Trade]) {
        for trade in fills {
            self.ledger.book(trade);
            self.trades += 1;
            self.shares_traded += trade.size as u64;
            self.last_trade = Some(trade.price);
            if let Some(h) = self.trade_hash.as_mut() {
                h.update(trade.time.to_le_bytes());
                h.update(trade.price.ticks().to_le_bytes());
                h.update(trade.size.to_le_bytes());
                h.update(trade.buyer.0.to_le_bytes());
                h.update(trade.seller.0.to_le_bytes());
                h.update(trade.maker_order.to_le_bytes());
            }
            if let Some(log) = self.trade_log.as_mut() {
                log.push(*trade);
            }
        }
    }

    fn check_event(&mut self, t: Time) {
        let Some(audit) = self.audit.as_mut() else {
            return;
        };
        audit.events_checked += 1;
        if let (Some(b), Some(a)) = (self.book.best_bid(), self.book.best_ask()) {
            if b >= a {
                audit.flag(format!("t={t}: crossed book bid {b} ask {a}"));
            }
        }
        for (k, aa) in self.additional.iter().enumerate() {
            if !(-1..=1).contains(&aa.position) {
                audit.flag(format!("t={t}: additional agent {} at position {}", k + 1, aa.position));
            }
        }
    }

    /// Runs the remaining steps and summarises.
    pub fn run(mut self) -> Result<RunResult> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(mut self) -> RunResult {
        let n = self.config.n_agents as usize;
        if let Some(audit) = self.audit.as_mut() {
            if self.ledger.total_position() != 0 {
                audit.flag(format!("shares not conserved: {}", self.ledger.total_position()));
            }
            if self.ledger.total_cash() != 0 {
                audit.flag(format!("cash not conserved: {}", self.ledger.total_cash()));
            }
            for (k, aa) in self.additional.iter().enumerate() {
                if self.ledger.positions[n + k] != aa.position as i64
                    || self.ledger.cash[n + k] != aa.cash
                {
                    audit.flag(format!("additional agent {} ledger mismatch", k + 1));
                }
            }
            let t = self.t;
            let t_c = self.config.t_c;
            if let Some(o) = self.book.resting_orders().find(|o| t - o.placed_at >= t_c) {
                audit.flag(format!("final book holds order {} placed at {}", o.id, o.placed_at));
            }
        }
        let tick_size = self.config.tick_size;
        let fundamental = self.fundamental;
        let additional = self
            .additional
            .iter()
            .enumerate()
            .map(|(k, aa)| {
                let profit_ticks = aa.mark_to_fundamental(fundamental);
                AaOutcome {
                    index: k as u32 + 1,
                    kind: aa.kind,
                    profit_ticks,
                    profit: profit_ticks as f64 * tick_size,
                    trades: aa.trades,
                    position: aa.position,
                    slot: aa.slot,
                }
            })
            .collect();
        let hex = |h: Sha256| {
            h.finalize()
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect::<String>()
        };
        RunResult {
            seed: self.config.seed,
            steps: self.t,
            na_orders: self.na_orders,
            trades: self.trades,
            shares_traded: self.shares_traded,
            aa_kind: self.config.aa_kind.filter(|_| !self.additional.is_empty()),
            additional,
            price_stats: self.price_stats,
            final_price: self.history.latest(),
            prices: self.prices,
            trade_log: self.trade_log,
            trade_digest: self.trade_hash.map(|h| LogDigest {
                count: self.trades,
                checksum: hex(h),
            }),
            price_digest: self.price_hash.map(|h| LogDigest {
                count: self.t,
                checksum: hex(h),
            }),
            audit: self.audit,
            final_resting: self.book.len(),
        }
    }
}

/// Runs `config` to completion with `f64` agent arithmetic.
pub fn run_simulation(config: &SimConfig) -> Result<RunResult> {
    run_simulation_with::<f64>(config, RunOptions::summary())
}

pub fn run_simulation_with<F: Scalar>(config: &SimConfig, options: RunOptions) -> Result<RunResult> {
    Simulation::<F>::new(config.clone(), options)?.run()
}

/// Cash plus holdings valued at the fundamental, in currency.
pub fn mark_to_fundamental(state: &AdditionalAgentState, config: &SimConfig) -> f64 {
    state.mark_to_fundamental(config.fundamental_ticks()) as f64 * config.tick_size
}
