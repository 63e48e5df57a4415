//! Continuous double auction: tick-aligned prices, a price-time priority
//! limit order book and time-based order expiry.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;

use num_traits::Float;

/// Largest representable tick count. Raw prices above this saturate.
pub const MAX_TICKS: i64 = 1 << 52;

/// Price expressed as an integer number of ticks.
///
/// Always at least one tick; the currency value is `ticks * tick_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickPrice(i64);

impl TickPrice {
    pub const MIN: TickPrice = TickPrice(1);

    /// Panics if `ticks < 1`.
    pub fn new(ticks: i64) -> Self {
        assert!(ticks >= 1, "tick price must be positive, got {ticks}");
        TickPrice(ticks)
    }

    #[inline]
    pub fn ticks(self) -> i64 {
        self.0
    }

    pub fn to_currency<F: Float>(self, tick_size: F) -> F {
        F::from(self.0).unwrap_or_else(F::infinity) * tick_size
    }
}

impl fmt::Display for TickPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}t", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

/// Identifier of a trading agent. Normal agents occupy `0..n`, additional
/// agents follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u32);

pub type OrderId = u64;

/// Simulation time, advanced once per normal-agent order.
pub type Time = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub id: OrderId,
    pub side: Side,
    pub price: TickPrice,
    pub size: u32,
    pub owner: AgentId,
    pub placed_at: Time,
    /// `None` never expires.
    pub expires_at: Option<Time>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trade {
    pub buyer: AgentId,
    pub seller: AgentId,
    /// Always the resting (maker) order's price.
    pub price: TickPrice,
    pub size: u32,
    pub time: Time,
    pub maker_order: OrderId,
    /// `None` for marketable orders, which never get an id.
    pub taker_order: Option<OrderId>,
}

/// Rounds a raw currency price onto the tick grid: buys round down, sells
/// round up. Results below one tick clamp to one tick.
///
/// Values within a few ulps of a grid point are treated as lying on it, so
/// that `10000.00 / 0.01` does not drift to the neighbouring tick.
pub fn round_to_tick<F: Float>(raw_price: F, side: Side, tick_size: F) -> TickPrice {
    let x = raw_price / tick_size;
    if x.is_nan() {
        return TickPrice::MIN;
    }
    let nearest = x.round();
    let snap = x.abs() * F::epsilon() * F::from(4.0).unwrap();
    let rounded = if (x - nearest).abs() <= snap {
        nearest
    } else {
        match side {
            Side::Buy => x.floor(),
            Side::Sell => x.ceil(),
        }
    };
    let ticks = rounded.to_i64().unwrap_or(if rounded > F::zero() { MAX_TICKS } else { 1 });
    TickPrice(ticks.clamp(1, MAX_TICKS))
}

/// Midpoint of two prices on the tick grid, ties rounded up.
#[inline]
pub fn midpoint(bid: TickPrice, ask: TickPrice) -> TickPrice {
    TickPrice((bid.0 + ask.0 + 1).div_euclid(2))
}

#[derive(Debug, Default)]
struct Level {
    orders: VecDeque<Order>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct ExpiryKey {
    expires_at: Time,
    id: OrderId,
    price: TickPrice,
    side: Side,
}

/// Price-time priority order book.
#[derive(Debug, Default)]
pub struct OrderBook {
    bids: BTreeMap<TickPrice, Level>,
    asks: BTreeMap<TickPrice, Level>,
    expiry: BinaryHeap<Reverse<ExpiryKey>>,
    resting: usize,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<TickPrice> {
        self.bids.last_key_value().map(|(p, _)| *p)
    }

    pub fn best_ask(&self) -> Option<TickPrice> {
        self.asks.first_key_value().map(|(p, _)| *p)
    }

    /// Mid-price rounded half up, or `fallback` when either side is empty.
    pub fn mid_price(&self, fallback: TickPrice) -> TickPrice {
        match (self.best_bid(), self.best_ask()) {
            (Some(b), Some(a)) => midpoint(b, a),
            _ => fallback,
        }
    }

    /// Number of resting orders.
    pub fn len(&self) -> usize {
        self.resting
    }

    pub fn is_empty(&self) -> bool {
        self.resting == 0
    }

    /// Total resting shares on one side.
    pub fn depth(&self, side: Side) -> u64 {
        let levels = match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        };
        levels
            .values()
            .flat_map(|l| l.orders.iter())
            .map(|o| o.size as u64)
            .sum()
    }

    /// Resting orders, bids best-first then asks best-first.
    pub fn resting_orders(&self) -> impl Iterator<Item = &Order> + '_ {
        self.bids
            .values()
            .rev()
            .flat_map(|l| l.orders.iter())
            .chain(self.asks.values().flat_map(|l| l.orders.iter()))
    }

    /// Earliest expiry among resting orders that can expire.
    pub fn next_expiry(&self) -> Option<Time> {
        self.resting_orders().filter_map(|o| o.expires_at).min()
    }

    /// Matches `order` against the opposite side and rests any remainder.
    pub fn submit_limit(&mut self, order: Order) -> Vec<Trade> {
        let mut trades = Vec::new();
        self.submit_limit_into(order, &mut trades);
        trades
    }

    /// As [`OrderBook::submit_limit`], appending trades to `trades`.
    pub fn submit_limit_into(&mut self, mut order: Order, trades: &mut Vec<Trade>) {
        debug_assert!(order.size >= 1);
        let filled = self.take(
            order.side,
            order.size,
            Some(order.price),
            order.owner,
            order.placed_at,
            Some(order.id),
            trades,
        );
        order.size -= filled;
        if order.size > 0 {
            self.rest(order);
        }
    }

    /// Fills up to `size` shares against the opposite side, best price first.
    /// Any unfilled remainder is discarded.
    pub fn submit_marketable(
        &mut self,
        side: Side,
        size: u32,
        owner: AgentId,
        time: Time,
    ) -> Vec<Trade> {
        let mut trades = Vec::new();
        self.submit_marketable_into(side, size, owner, time, &mut trades);
        trades
    }

    /// Returns the number of shares filled.
    pub fn submit_marketable_into(
        &mut self,
        side: Side,
        size: u32,
        owner: AgentId,
        time: Time,
        trades: &mut Vec<Trade>,
    ) -> u32 {
        self.take(side, size, None, owner, time, None, trades)
    }

    /// Removes every resting order with `expires_at <= now`.
    pub fn expire_orders(&mut self, now: Time) -> usize {
        let mut removed = 0;
        while let Some(Reverse(key)) = self.expiry.peek().copied() {
            if key.expires_at > now {
                break;
            }
            self.expiry.pop();
            if self.remove_resting(key.side, key.price, key.id) {
                removed += 1;
            }
        }
        removed
    }

    fn rest(&mut self, order: Order) {
        if let Some(expires_at) = order.expires_at {
            self.expiry.push(Reverse(ExpiryKey {
                expires_at,
                id: order.id,
                price: order.price,
                side: order.side,
            }));
        }
        let levels = match order.side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        levels.entry(order.price).or_default().orders.push_back(order);
        self.resting += 1;
    }

    fn remove_resting(&mut self, side: Side, price: TickPrice, id: OrderId) -> bool {
        let levels = match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        let Some(level) = levels.get_mut(&price) else {
            return false;
        };
        let Some(pos) = level.orders.iter().position(|o| o.id == id) else {
            return false;
        };
        level.orders.remove(pos);
        if level.orders.is_empty() {
            levels.remove(&price);
        }
        self.resting -= 1;
        true
    }

    /// Walks the opposite side while it crosses `limit` (unbounded for
    /// `None`). Returns shares filled.
    #[allow(clippy::too_many_arguments)]
    fn take(
        &mut self,
        side: Side,
        size: u32,
        limit: Option<TickPrice>,
        owner: AgentId,
        time: Time,
        taker_order: Option<OrderId>,
        trades: &mut Vec<Trade>,
    ) -> u32 {
        let mut remaining = size;
        while remaining > 0 {
            let mut entry = match side {
                Side::Buy => match self.asks.first_entry() {
                    Some(e) if limit.is_none_or(|l| *e.key() <= l) => e,
                    _ => break,
                },
                Side::Sell => match self.bids.last_entry() {
                    Some(e) if limit.is_none_or(|l| *e.key() >= l) => e,
                    _ => break,
                },
            };
            let level = entry.get_mut();
            let maker = level
                .orders
                .front_mut()
                .expect("empty price levels are removed eagerly");
            let fill = remaining.min(maker.size);
            let (buyer, seller) = match side {
                Side::Buy => (owner, maker.owner),
                Side::Sell => (maker.owner, owner),
            };
            trades.push(Trade {
                buyer,
                seller,
                price: maker.price,
                size: fill,
                time,
                maker_order: maker.id,
                taker_order,
            });
            maker.size -= fill;
            remaining -= fill;
            if maker.size == 0 {
                level.orders.pop_front();
                self.resting -= 1;
                if level.orders.is_empty() {
                    entry.remove();
                }
            }
        }
        size - remaining
    }
}
