//! Brute-force reference matcher.
//!
//! Keeps resting orders in one flat list and rescans it for every fill. It
//! shares only the data types with [`crate::matching::OrderBook`] and exists
//! to check the book's trade log.

use crate::matching::{AgentId, Order, Side, Time, TickPrice, Trade};

#[derive(Debug, Default, Clone)]
pub struct ReferenceMatcher {
    // (arrival sequence, order)
    resting: Vec<(u64, Order)>,
    arrivals: u64,
}

impl ReferenceMatcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.resting.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resting.is_empty()
    }

    pub fn best_bid(&self) -> Option<TickPrice> {
        self.resting
            .iter()
            .filter(|(_, o)| o.side == Side::Buy)
            .map(|(_, o)| o.price)
            .max()
    }

    pub fn best_ask(&self) -> Option<TickPrice> {
        self.resting
            .iter()
            .filter(|(_, o)| o.side == Side::Sell)
            .map(|(_, o)| o.price)
            .min()
    }

    pub fn expire(&mut self, now: Time) -> usize {
        let before = self.resting.len();
        self.resting
            .retain(|(_, o)| o.expires_at.is_none_or(|e| e > now));
        before - self.resting.len()
    }

    /// Index of the best resting order facing a taker on `side`.
    fn best_counterparty(&self, side: Side) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, (seq, o)) in self.resting.iter().enumerate() {
            if o.side == side {
                continue;
            }
            let better = match best {
                None => true,
                Some(j) => {
                    let (bseq, b) = &self.resting[j];
                    let price_better = match side {
                        Side::Buy => o.price < b.price,
                        Side::Sell => o.price > b.price,
                    };
                    price_better
                        || (o.price == b.price && (o.placed_at, *seq) < (b.placed_at, *bseq))
                }
            };
            if better {
                best = Some(i);
            }
        }
        best
    }

    fn fill(
        &mut self,
        side: Side,
        mut remaining: u32,
        limit: Option<TickPrice>,
        owner: AgentId,
        time: Time,
        taker_order: Option<u64>,
    ) -> (Vec<Trade>, u32) {
        let mut trades = Vec::new();
        while remaining > 0 {
            let Some(i) = self.best_counterparty(side) else {
                break;
            };
            let maker = &mut self.resting[i].1;
            let crosses = match (side, limit) {
                (_, None) => true,
                (Side::Buy, Some(l)) => maker.price <= l,
                (Side::Sell, Some(l)) => maker.price >= l,
            };
            if !crosses {
                break;
            }
            let size = remaining.min(maker.size);
            let (buyer, seller) = match side {
                Side::Buy => (owner, maker.owner),
                Side::Sell => (maker.owner, owner),
            };
            trades.push(Trade {
                buyer,
                seller,
                price: maker.price,
                size,
                time,
                maker_order: maker.id,
                taker_order,
            });
            maker.size -= size;
            remaining -= size;
            if maker.size == 0 {
                self.resting.remove(i);
            }
        }
        (trades, remaining)
    }

    pub fn submit_limit(&mut self, mut order: Order) -> Vec<Trade> {
        let (trades, remaining) = self.fill(
            order.side,
            order.size,
            Some(order.price),
            order.owner,
            order.placed_at,
            Some(order.id),
        );
        if remaining > 0 {
            order.size = remaining;
            self.resting.push((self.arrivals, order));
        }
        self.arrivals += 1;
        trades
    }

    pub fn submit_marketable(
        &mut self,
        side: Side,
        size: u32,
        owner: AgentId,
        time: Time,
    ) -> Vec<Trade> {
        self.fill(side, size, None, owner, time, None).0
    }
}
