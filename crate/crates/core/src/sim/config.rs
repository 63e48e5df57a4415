use crate::agents::{AdditionalKind, NormalAgentBounds};
use crate::error::{Error, Result};
use crate::matching::{round_to_tick, Side, TickPrice};

/// When additional agents start acting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    /// Agent `k` joins in loop `k`.
    #[default]
    OnePerLoop,
    /// Every agent acts from the first loop.
    AllAtStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Minimum price increment, in currency.
    pub tick_size: f64,
    /// Fundamental value, in currency.
    pub fundamental: f64,
    /// Number of normal agents.
    pub n_agents: u32,
    pub w1_max: f64,
    pub w2_max: f64,
    pub w3_max: f64,
    pub tau_max: u64,
    /// Noise scale. A standard deviation unless `sigma_is_variance`.
    pub sigma_eps: f64,
    pub sigma_is_variance: bool,
    /// Half-width of the order price scatter, in currency.
    pub price_spread: f64,
    /// Order lifetime and warm-up length, in steps.
    pub t_c: u64,
    /// Number of additional agents; ignored while `aa_kind` is `None`.
    pub n_additional: u32,
    pub aa_kind: Option<AdditionalKind>,
    /// Technical agents' lookback, in steps.
    pub ta: u64,
    /// Total number of normal-agent orders.
    pub t_end: u64,
    pub seed: u64,
    pub activation: Activation,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::scaled()
    }
}

impl SimConfig {
    /// Full-size parameterisation: 2·10⁷ steps.
    pub fn paper_scale() -> Self {
        Self {
            tick_size: 0.01,
            fundamental: 10_000.0,
            n_agents: 1_000,
            w1_max: 1.0,
            w2_max: 100.0,
            w3_max: 1.0,
            tau_max: 10_000,
            sigma_eps: 0.03,
            sigma_is_variance: false,
            price_spread: 1_000.0,
            t_c: 10_000,
            n_additional: 99,
            aa_kind: None,
            ta: 100_000,
            t_end: 20_000_000,
            seed: 1,
            activation: Activation::OnePerLoop,
        }
    }

    /// Desk-scale profile: same parameters, one tenth of the steps.
    pub fn scaled() -> Self {
        Self {
            t_end: 2_000_000,
            ..Self::paper_scale()
        }
    }

    /// Same configuration without additional agents.
    pub fn without_additional(&self) -> Self {
        Self {
            n_additional: 0,
            aa_kind: None,
            ..self.clone()
        }
    }

    pub fn with_additional(&self, kind: AdditionalKind, n: u32) -> Self {
        Self {
            n_additional: n,
            aa_kind: Some(kind),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tick_size", self.tick_size),
            ("fundamental", self.fundamental),
            ("w1_max", self.w1_max),
            ("w2_max", self.w2_max),
            ("w3_max", self.w3_max),
            ("sigma_eps", self.sigma_eps),
            ("price_spread", self.price_spread),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_agents == 0 {
            return Err(Error::InvalidConfig("n_agents must be positive".into()));
        }
        for (name, v) in [("tau_max", self.tau_max), ("t_c", self.t_c), ("ta", self.ta)] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.t_end < self.n_agents as u64 {
            return Err(Error::InvalidConfig(format!(
                "t_end ({}) must be at least n_agents ({})",
                self.t_end, self.n_agents
            )));
        }
        if self.fundamental_ticks().ticks() < 2 {
            return Err(Error::InvalidConfig("fundamental must span at least two ticks".into()));
        }
        Ok(())
    }

    pub fn bounds(&self) -> NormalAgentBounds {
        NormalAgentBounds {
            w1_max: self.w1_max,
            w2_max: self.w2_max,
            w3_max: self.w3_max,
            tau_max: self.tau_max,
        }
    }

    pub fn noise_std(&self) -> f64 {
        if self.sigma_is_variance {
            self.sigma_eps.sqrt()
        } else {
            self.sigma_eps
        }
    }

    pub fn fundamental_ticks(&self) -> TickPrice {
        // Buy and sell rounding agree for an on-grid value.
        round_to_tick(self.fundamental, Side::Buy, self.tick_size)
    }

    /// Additional agents that actually take part.
    pub fn active_additional(&self) -> u32 {
        if self.aa_kind.is_some() {
            self.n_additional
        } else {
            0
        }
    }

    /// Number of decimals needed to print prices on the tick grid.
    pub fn price_decimals(&self) -> usize {
        let mut decimals = 0;
        let mut scaled = self.tick_size;
        while decimals < 12 && (scaled - scaled.round()).abs() > 1e-9 * scaled.abs().max(1.0) {
            scaled *= 10.0;
            decimals += 1;
        }
        decimals
    }
}
