//! The key-distribution protocol: alphabet construction, symbol encoding,
//! interval-wise coincidence measurement, relative coincidence and decoding
//! against decision regions.
//!
//! No classical message flows between Alice and Bob anywhere in this
//! module; calibration data is produced and consumed on Alice's side only.

mod alphabet;
mod rate;
mod regions;
mod run;

pub use alphabet::{alphabet_angles, AlphabetConfig};
pub use rate::{key_rate, key_rate_from_coincidence_rate, KeyRate};
pub use regions::{
    calibrate_regions, decode, default_regions, relative_coincidence, Decision, DecisionRegions,
    Region, RegionCalibration, DEFAULT_CALIBRATION_SLACK, DEFAULT_K_SIGMA, DEFAULT_SLACK,
    MIN_TRAINING_SAMPLES,
};
pub use run::{run_protocol, Execution, IntervalRecord, ProtocolRunReport};

use crate::error::{invalid, Result};
use crate::photonics::{calibrate_max, simulate_intervals, IdealProjection, PairCoupling, Physics};
use crate::seed::{runs, SeedStream};

/// Intervals averaged by [`Experiment::calibrate_c_max`] unless told otherwise.
pub const DEFAULT_CALIBRATION_INTERVALS: usize = 1000;

/// A configured link: alphabet, physical layer, pair coupling (ideal or
/// attacked) and master seed. All random streams derive from the seed.
#[derive(Debug, Clone)]
pub struct Experiment<C = IdealProjection> {
    pub alphabet: AlphabetConfig<f64>,
    pub physics: Physics,
    pub coupling: C,
    pub master_seed: u64,
    pub execution: Execution,
}

impl Experiment<IdealProjection> {
    pub fn new(alphabet: AlphabetConfig<f64>, physics: Physics, master_seed: u64) -> Self {
        Self {
            alphabet,
            physics,
            coupling: IdealProjection,
            master_seed,
            execution: Execution::Parallel,
        }
    }
}

impl<C: PairCoupling> Experiment<C> {
    pub fn with_coupling<D: PairCoupling>(self, coupling: D) -> Experiment<D> {
        Experiment {
            alphabet: self.alphabet,
            physics: self.physics,
            coupling,
            master_seed: self.master_seed,
            execution: self.execution,
        }
    }

    pub fn with_physics(mut self, physics: Physics) -> Self {
        self.physics = physics;
        self
    }

    /// Mean count with Bob's SLM aligned to Alice's (`Δθ = 0`).
    pub fn calibrate_c_max(&self, n_intervals: usize) -> Result<f64> {
        calibrate_max(
            &self.physics,
            &self.alphabet.alice_state(),
            n_intervals,
            self.alphabet.tau(),
            &SeedStream::new(self.master_seed, runs::CALIBRATE_MAX),
        )
    }

    /// Relative coincidences for `samples_per_symbol` intervals of each symbol.
    pub fn training(&self, samples_per_symbol: usize, c_max: f64) -> Result<Vec<Vec<f64>>> {
        if !(c_max.is_finite() && c_max > 0.0) {
            return invalid(format!("c_max must be > 0, got {c_max}"));
        }
        let alice = self.alphabet.alice_state();
        (0..self.alphabet.n_symbols())
            .map(|k| {
                let slm_b = self.alphabet.encode(k)?;
                let seeds = SeedStream::new(self.master_seed, runs::TRAINING + k as u64);
                let counts = simulate_intervals(
                    &self.physics,
                    &self.coupling,
                    &alice,
                    &slm_b,
                    self.alphabet.tau(),
                    samples_per_symbol,
                    &seeds,
                )?;
                Ok(counts.iter().map(|c| c.total() as f64 / c_max).collect())
            })
            .collect()
    }

    pub fn calibrate_regions(
        &self,
        samples_per_symbol: usize,
        c_max: f64,
        k_sigma: f64,
        slack: f64,
    ) -> Result<RegionCalibration<f64>> {
        if samples_per_symbol < MIN_TRAINING_SAMPLES {
            return invalid(format!(
                "{samples_per_symbol} samples per symbol; at least {MIN_TRAINING_SAMPLES} required"
            ));
        }
        calibrate_regions(&self.training(samples_per_symbol, c_max)?, k_sigma, slack)
    }

    pub fn run(&self, keys: &[usize], regions: &DecisionRegions<f64>, c_max: f64) -> Result<ProtocolRunReport> {
        run_protocol(
            keys,
            &self.alphabet,
            &self.physics,
            &self.coupling,
            regions,
            c_max,
            &SeedStream::new(self.master_seed, runs::PROTOCOL),
            self.execution,
        )
    }
}
