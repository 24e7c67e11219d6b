use std::fmt;

use rayon::prelude::*;

use super::{table_bit, truth_table, StateVector, SystemModel};
use crate::scalar::Real;

/// A state where switching one component on makes the system fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// State with the component failed, in which the system works.
    pub state: StateVector,
    /// Index of the component whose repair breaks the system.
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceReport {
    pub coherent: bool,
    /// First violation in state-enumeration order, if any.
    pub counterexample: Option<Counterexample>,
    pub states_checked: u64,
}

impl fmt::Display for CoherenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "coherent ({} states checked)", self.states_checked),
            Some(c) => {
                let bits: String = c
                    .state
                    .bits()
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                write!(
                    f,
                    "not coherent: phi({bits}) = 1 but repairing component {} makes it 0",
                    c.component
                )
            }
        }
    }
}

/// Exhaustively checks that φ is non-decreasing in every component.
pub fn check_coherence<T: Real>(model: &SystemModel<T>) -> CoherenceReport {
    let table = truth_table(model);
    coherence_of_table(model.num_components(), &table)
}

pub(crate) fn coherence_of_table(n: usize, table: &[u64]) -> CoherenceReport {
    let states = 1u64 << n;
    let hit = (0..states).into_par_iter().find_map_first(|s| {
        if !table_bit(table, s) {
            return None;
        }
        (0..n)
            .find(|&i| s >> i & 1 == 0 && !table_bit(table, s | 1 << i))
            .map(|i| (s, i))
    });
    CoherenceReport {
        coherent: hit.is_none(),
        counterexample: hit.map(|(s, i)| Counterexample {
            state: StateVector::from_mask(s, n),
            component: i,
        }),
        states_checked: states,
    }
}
