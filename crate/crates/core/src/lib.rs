//! Deterministic agent-based market simulator.
//!
//! A single continuous double auction is driven by `n` normal agents that
//! mix fundamental, technical and noise expectations, optionally joined by
//! additional agents that follow a one-parameter fundamental or technical
//! rule while holding at most one share long or short.
//!
//! Prices and cash are integer ticks. The agents' expectation arithmetic is
//! generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the usual
//! choice.

pub mod agents;
pub mod error;
pub mod harness;
pub mod matching;
pub mod reference;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use agents::{AaAction, AdditionalAgentState, AdditionalKind, NormalAgentBounds, OrderIntent};
pub use error::{Error, Result};
pub use matching::{AgentId, Order, OrderBook, Side, TickPrice, Time, Trade};
pub use scalar::Scalar;
pub use sim::{run_simulation, run_simulation_with, RunOptions, RunResult, SimConfig};

pub type NormalAgentParams = agents::NormalAgentParams<f64>;
pub type NormalAgentParams32 = agents::NormalAgentParams<f32>;
pub type Simulation = sim::Simulation<f64>;
pub type Simulation32 = sim::Simulation<f32>;
