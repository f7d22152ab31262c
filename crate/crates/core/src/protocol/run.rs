use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alphabet::AlphabetConfig;
use super::regions::{decode, relative_coincidence, Decision, DecisionRegions};
use crate::error::{invalid, Result};
use crate::photonics::{simulate_interval_with, IntervalCounts, PairCoupling, Physics};
use crate::seed::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub index: usize,
    pub symbol_sent: usize,
    pub counts: IntervalCounts,
    pub relative: f64,
    pub decoded: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRunReport {
    pub sent: Vec<usize>,
    pub recovered: Vec<Decision>,
    pub records: Vec<IntervalRecord>,
    pub error_count: usize,
    pub erasure_count: usize,
    pub elapsed_simulated_time: f64,
}

impl ProtocolRunReport {
    pub fn correct_count(&self) -> usize {
        self.recovered
            .iter()
            .zip(&self.sent)
            .filter(|(r, &s)| **r == Decision::Symbol(s))
            .count()
    }

    pub fn len(&self) -> usize {
        self.sent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sent.is_empty()
    }

    /// Mean total coincidences per interval.
    pub fn mean_count(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.counts.total() as f64).sum::<f64>() / self.records.len() as f64
    }

    fn from_records(records: Vec<IntervalRecord>, tau: f64) -> Self {
        let sent: Vec<usize> = records.iter().map(|r| r.symbol_sent).collect();
        let recovered: Vec<Decision> = records.iter().map(|r| r.decoded).collect();
        let erasure_count = recovered.iter().filter(|d| **d == Decision::Erasure).count();
        let error_count = recovered
            .iter()
            .zip(&sent)
            .filter(|(d, &s)| matches!(d, Decision::Symbol(k) if *k != s))
            .count();
        Self {
            elapsed_simulated_time: tau * sent.len() as f64,
            sent,
            recovered,
            records,
            error_count,
            erasure_count,
        }
    }
}

/// How intervals are scheduled. Both modes give identical reports because
/// interval `i` always draws from `seeds.rng(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// Sends `keys` one symbol per τ interval: Bob sets his SLM to the symbol's
/// angle, Alice counts coincidences, normalizes by `c_max` and decodes.
#[allow(clippy::too_many_arguments)]
pub fn run_protocol<C: PairCoupling>(
    keys: &[usize],
    alphabet: &AlphabetConfig<f64>,
    physics: &Physics,
    coupling: &C,
    regions: &DecisionRegions<f64>,
    c_max: f64,
    seeds: &SeedStream,
    execution: Execution,
) -> Result<ProtocolRunReport> {
    if !(c_max.is_finite() && c_max > 0.0) {
        return invalid(format!("c_max must be > 0, got {c_max}"));
    }
    if regions.n_symbols() != alphabet.n_symbols() {
        return invalid(format!(
            "{} regions for a {}-symbol alphabet",
            regions.n_symbols(),
            alphabet.n_symbols()
        ));
    }
    let alice = alphabet.alice_state();
    let tau = alphabet.tau();
    let step = |(index, &symbol): (usize, &usize)| -> Result<IntervalRecord> {
        let slm_b = alphabet.encode(symbol)?;
        let counts = simulate_interval_with(physics, coupling, &alice, &slm_b, tau, &mut seeds.rng(index as u64))?;
        let relative = relative_coincidence(&counts, c_max)?;
        Ok(IntervalRecord {
            index,
            symbol_sent: symbol,
            counts,
            relative,
            decoded: decode(relative, regions),
        })
    };
    let records: Vec<IntervalRecord> = match execution {
        Execution::Sequential => keys.iter().enumerate().map(step).collect::<Result<_>>()?,
        Execution::Parallel => keys.par_iter().enumerate().map(step).collect::<Result<_>>()?,
    };
    Ok(ProtocolRunReport::from_records(records, tau))
}
