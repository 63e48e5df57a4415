use crate::error::{Error, Result};
use crate::matching::{TickPrice, Time};

/// Fixed-window record of the mid-price series `P^0, P^1, ...`.
///
/// `P^t` is recorded exactly once per step, in order.
#[derive(Debug, Clone)]
pub struct PriceHistory {
    ring: Vec<TickPrice>,
    /// Time of the latest recorded price.
    now: Time,
}

impl PriceHistory {
    /// Starts the series with `P^0 = initial` and keeps at least
    /// `lookback + 1` prices.
    pub fn new(initial: TickPrice, lookback: u64) -> Self {
        let capacity = (lookback as usize).saturating_add(2);
        Self {
            ring: vec![initial; capacity],
            now: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.ring.len()
    }

    pub fn now(&self) -> Time {
        self.now
    }

    #[inline]
    pub fn latest(&self) -> TickPrice {
        self.ring[(self.now % self.ring.len() as u64) as usize]
    }

    /// `P^t`, if it has been recorded and is still inside the window.
    #[inline]
    pub fn get(&self, t: Time) -> Option<TickPrice> {
        if t > self.now || self.now - t >= self.ring.len() as u64 {
            return None;
        }
        Some(self.ring[(t % self.ring.len() as u64) as usize])
    }

    /// Records `P^t`; `t` must be the step after the latest one.
    #[inline]
    pub fn record(&mut self, t: Time, price: TickPrice) -> Result<()> {
        if t != self.now + 1 {
            return Err(Error::History(format!(
                "recording step {t} after step {}",
                self.now
            )));
        }
        let cap = self.ring.len() as u64;
        self.ring[(t % cap) as usize] = price;
        self.now = t;
        Ok(())
    }
}
