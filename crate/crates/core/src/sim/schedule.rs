//! When each additional agent acts.
//!
//! Agents join one at a time. Each gets a uniformly random slot in the
//! normal-agent loop; it first acts at that slot of its activation loop and
//! then at the same slot in every later loop.

use rand::Rng;

use super::config::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    /// First loop (1-based) in which the agent acts.
    pub activation_loop: u64,
    /// Position within the loop, `1..=n`: the agent acts right after normal
    /// agent `slot`.
    pub slot: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Agent indices per slot, ascending within each slot. Index 0 is unused.
    pub fn by_slot(&self, n: u32) -> Vec<Vec<usize>> {
        let mut slots = vec![Vec::new(); n as usize + 1];
        for (k, e) in self.entries.iter().enumerate() {
            slots[e.slot as usize].push(k);
        }
        slots
    }
}

/// Draws one slot per agent, in agent order, from `rng`.
pub fn build_schedule<R: Rng + ?Sized>(
    rng: &mut R,
    n: u32,
    n_additional: u32,
    activation: Activation,
) -> Schedule {
    let entries = (1..=n_additional as u64)
        .map(|k| ScheduleEntry {
            activation_loop: match activation {
                Activation::OnePerLoop => k,
                Activation::AllAtStart => 1,
            },
            slot: rng.random_range(1..=n),
        })
        .collect();
    Schedule { entries }
}
