//! Normal-agent expectation rule and the additional fundamental/technical
//! agent strategies.
//!
//! Everything here is a pure function of its inputs; randomness is drawn by
//! the caller and passed in.

use rand::Rng;
use rand_distr::Open01;

use crate::matching::{Side, TickPrice, Trade, Time};
use crate::scalar::Scalar;

/// Per-agent weights and technical lookback, fixed at simulation start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalAgentParams<F> {
    /// Fundamental weight.
    pub w1: F,
    /// Technical (historical return) weight.
    pub w2: F,
    /// Noise weight.
    pub w3: F,
    /// Lookback of the technical term, in steps.
    pub tau: u64,
}

impl<F: Scalar> NormalAgentParams<F> {
    pub fn weight_sum(&self) -> F {
        self.w1 + self.w2 + self.w3
    }
}

/// Upper bounds of the normal-agent parameter distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalAgentBounds {
    pub w1_max: f64,
    pub w2_max: f64,
    pub w3_max: f64,
    pub tau_max: u64,
}

/// Draws weights uniformly on `(0, w_max)` and `tau` uniformly on
/// `1..=tau_max`.
pub fn sample_normal_agent<F: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    bounds: &NormalAgentBounds,
) -> NormalAgentParams<F> {
    let w1: f64 = rng.sample(Open01);
    let w2: f64 = rng.sample(Open01);
    let w3: f64 = rng.sample(Open01);
    let tau = rng.random_range(1..=bounds.tau_max.max(1));
    NormalAgentParams {
        w1: F::of(w1 * bounds.w1_max),
        w2: F::of(w2 * bounds.w2_max),
        w3: F::of(w3 * bounds.w3_max),
        tau,
    }
}

/// Whether the technical term has a defined lagged price at step `t`.
///
/// The step-`t` rule reads `P^{t-1}` and `P^{t-tau-1}`; the latter exists
/// once `t - tau - 1 >= 0`.
#[inline]
pub fn technical_term_active(t: Time, tau: u64) -> bool {
    t > tau
}

/// Weighted mix of fundamental, technical and noise log-returns.
///
/// `lagged` is `None` while the technical lookback reaches before the start
/// of the price series; the technical term is then zero but its weight still
/// counts in the normalisation.
#[inline]
pub fn expected_return<F: Scalar>(
    params: &NormalAgentParams<F>,
    fundamental: F,
    prev: F,
    lagged: Option<F>,
    epsilon: F,
) -> F {
    let fundamental_term = params.w1 * (fundamental / prev).ln();
    let technical_term = match lagged {
        Some(lagged) => params.w2 * (prev / lagged).ln(),
        None => F::zero(),
    };
    (fundamental_term + technical_term + params.w3 * epsilon) / params.weight_sum()
}

/// A normal agent's one-share limit order before tick rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderIntent<F> {
    pub side: Side,
    pub price: F,
    pub size: u32,
}

/// Expected price, scattered order price and direction.
///
/// Outside warm-up the agent buys when its order price is below the expected
/// price and sells when above. During warm-up (`t < t_c`) the comparison is
/// against the fundamental value instead. An exact tie places no order.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn decide_order<F: Scalar>(
    prev: F,
    expected_return: F,
    rho: F,
    spread: F,
    t: Time,
    t_c: Time,
    fundamental: F,
) -> Option<OrderIntent<F>> {
    let expected = prev * expected_return.exp();
    let two = F::one() + F::one();
    let price = expected + spread * (two * rho - F::one());
    let reference = if t < t_c { fundamental } else { expected };
    let side = if reference > price {
        Side::Buy
    } else if reference < price {
        Side::Sell
    } else {
        return None;
    };
    Some(OrderIntent {
        side,
        price,
        size: 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdditionalKind {
    /// Buys below and sells above the fundamental value.
    Fundamental,
    /// Buys above and sells below the mid-price `ta` steps ago.
    Technical,
}

impl AdditionalKind {
    pub fn label(self) -> &'static str {
        match self {
            AdditionalKind::Fundamental => "afa",
            AdditionalKind::Technical => "ata",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AaAction {
    Buy(u32),
    Sell(u32),
    Hold,
}

impl AaAction {
    fn buy_to_long(position: i32) -> Self {
        match position {
            p if p >= 1 => AaAction::Hold,
            0 => AaAction::Buy(1),
            _ => AaAction::Buy(2),
        }
    }

    fn sell_to_short(position: i32) -> Self {
        match position {
            p if p <= -1 => AaAction::Hold,
            0 => AaAction::Sell(1),
            _ => AaAction::Sell(2),
        }
    }
}

/// Fundamental rule: go long one share when the best ask is below the
/// fundamental value, short one share when the best bid is above it.
pub fn afa_decide(
    best_ask: Option<TickPrice>,
    best_bid: Option<TickPrice>,
    fundamental: TickPrice,
    position: i32,
) -> AaAction {
    if best_ask.is_some_and(|a| a < fundamental) {
        AaAction::buy_to_long(position)
    } else if best_bid.is_some_and(|b| b > fundamental) {
        AaAction::sell_to_short(position)
    } else {
        AaAction::Hold
    }
}

/// Technical rule: go long one share when the best ask is above the lagged
/// mid-price, short one share when the best bid is below it. `lagged` is
/// `None` until `ta` steps of history exist.
pub fn ata_decide(
    best_ask: Option<TickPrice>,
    best_bid: Option<TickPrice>,
    lagged: Option<TickPrice>,
    position: i32,
) -> AaAction {
    let Some(lagged) = lagged else {
        return AaAction::Hold;
    };
    if best_ask.is_some_and(|a| a > lagged) {
        AaAction::buy_to_long(position)
    } else if best_bid.is_some_and(|b| b < lagged) {
        AaAction::sell_to_short(position)
    } else {
        AaAction::Hold
    }
}

/// Book-keeping of one additional agent. Cash is in ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditionalAgentState {
    pub kind: AdditionalKind,
    pub position: i32,
    pub cash: i64,
    /// Executed marketable orders (an order filling two shares counts once).
    pub trades: u64,
    /// Loop position, `1..=n`, at which the agent acts.
    pub slot: u32,
    /// First loop in which the agent acts.
    pub activation_loop: u64,
}

impl AdditionalAgentState {
    pub fn new(kind: AdditionalKind, slot: u32, activation_loop: u64) -> Self {
        Self {
            kind,
            position: 0,
            cash: 0,
            trades: 0,
            slot,
            activation_loop,
        }
    }

    /// Books the fills of one marketable order placed by this agent.
    pub fn apply_fills(&mut self, side: Side, fills: &[Trade]) {
        if fills.is_empty() {
            return;
        }
        for fill in fills {
            let shares = fill.size as i64;
            let value = fill.price.ticks() * shares;
            match side {
                Side::Buy => {
                    self.position += shares as i32;
                    self.cash -= value;
                }
                Side::Sell => {
                    self.position -= shares as i32;
                    self.cash += value;
                }
            }
        }
        self.trades += 1;
    }

    /// Cash plus holdings valued at the fundamental price, in ticks.
    pub fn mark_to_fundamental(&self, fundamental: TickPrice) -> i64 {
        self.cash + self.position as i64 * fundamental.ticks()
    }
}
