//! Stochastic physical layer: pair generation, intensity noise, channel loss,
//! SLM projection, detector efficiency, dark counts and per-interval
//! coincidence counting.
//!
//! One interval draws, in this order: a truncated Gaussian source gain, a
//! Poisson pair count, the true coincidences, both singles counts and the
//! accidental coincidences.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::oam::{coincidence_probability, BiphotonState, SectorState};
use crate::seed::SeedStream;

/// Mean coincidence count per interval at `Δθ = 0` for the default models.
pub const DEFAULT_MAX_COUNT: f64 = 561.0;
pub const DEFAULT_TAU: f64 = 1.0;
pub const DEFAULT_EFFICIENCY: f64 = 0.6;
pub const DEFAULT_TRANSMITTANCE: f64 = 0.9;
pub const DEFAULT_DARK_RATE: f64 = 100.0;
pub const DEFAULT_WINDOW: f64 = 10e-9;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pair_rate: f64,
    intensity_noise_sigma: f64,
    biphoton: BiphotonState<f64>,
}

impl SourceModel {
    pub fn new(pair_rate: f64, intensity_noise_sigma: f64, biphoton: BiphotonState<f64>) -> Result<Self> {
        if !(pair_rate.is_finite() && pair_rate > 0.0) {
            return invalid(format!("pair_rate must be > 0, got {pair_rate}"));
        }
        if !(0.0..=0.5).contains(&intensity_noise_sigma) {
            return invalid(format!(
                "intensity_noise_sigma must lie in [0, 0.5], got {intensity_noise_sigma}"
            ));
        }
        Ok(Self {
            pair_rate,
            intensity_noise_sigma,
            biphoton,
        })
    }

    pub fn pair_rate(&self) -> f64 {
        self.pair_rate
    }

    pub fn intensity_noise_sigma(&self) -> f64 {
        self.intensity_noise_sigma
    }

    pub fn biphoton(&self) -> &BiphotonState<f64> {
        &self.biphoton
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    transmittance: f64,
    siphon_fraction: f64,
}

impl ChannelModel {
    pub fn new(transmittance: f64, siphon_fraction: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return invalid(format!("transmittance must lie in (0, 1], got {transmittance}"));
        }
        if !(0.0..1.0).contains(&siphon_fraction) {
            return invalid(format!("siphon_fraction must lie in [0, 1), got {siphon_fraction}"));
        }
        Ok(Self {
            transmittance,
            siphon_fraction,
        })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn siphon_fraction(&self) -> f64 {
        self.siphon_fraction
    }

    pub fn with_siphon(self, siphon_fraction: f64) -> Result<Self> {
        Self::new(self.transmittance, siphon_fraction)
    }

    /// Transmittance after photons removed by an adversary.
    pub fn effective(&self) -> f64 {
        self.transmittance * (1.0 - self.siphon_fraction)
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            transmittance: DEFAULT_TRANSMITTANCE,
            siphon_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    efficiency: f64,
    dark_rate: f64,
    coincidence_window: f64,
}

impl DetectorModel {
    /// A zero coincidence window is accepted and switches accidentals off.
    pub fn new(efficiency: f64, dark_rate: f64, coincidence_window: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return invalid(format!("efficiency must lie in (0, 1], got {efficiency}"));
        }
        if !(dark_rate.is_finite() && dark_rate >= 0.0) {
            return invalid(format!("dark_rate must be >= 0, got {dark_rate}"));
        }
        if !(coincidence_window.is_finite() && coincidence_window >= 0.0) {
            return invalid(format!(
                "coincidence_window must be >= 0, got {coincidence_window}"
            ));
        }
        Ok(Self {
            efficiency,
            dark_rate,
            coincidence_window,
        })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn dark_rate(&self) -> f64 {
        self.dark_rate
    }

    pub fn coincidence_window(&self) -> f64 {
        self.coincidence_window
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: DEFAULT_EFFICIENCY,
            dark_rate: DEFAULT_DARK_RATE,
            coincidence_window: DEFAULT_WINDOW,
        }
    }
}

/// Everything between the crystal and the coincidence counter.
///
/// Detector A sees the signal photon, which never leaves Alice's site;
/// detector B sees the idler after its round trip through the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub source: SourceModel,
    pub channel: ChannelModel,
    pub det_a: DetectorModel,
    pub det_b: DetectorModel,
}

impl Physics {
    /// Probability that an emitted pair reaches both detectors and registers.
    pub fn pair_detection_probability(&self) -> f64 {
        self.det_a.efficiency * self.det_b.efficiency * self.channel.effective()
    }

    /// Mean true coincidences per interval at `Δθ = 0` with unit gain.
    pub fn expected_max_count(&self, tau: f64) -> f64 {
        self.source.pair_rate * tau * self.pair_detection_probability()
    }

    /// Rescales the pair rate so [`Physics::expected_max_count`] equals `count`.
    pub fn with_expected_max_count(mut self, count: f64, tau: f64) -> Result<Self> {
        let rate = count / (tau * self.pair_detection_probability());
        self.source = SourceModel::new(rate, self.source.intensity_noise_sigma, self.source.biphoton)?;
        Ok(self)
    }

    pub fn with_channel(mut self, channel: ChannelModel) -> Self {
        self.channel = channel;
        self
    }

    fn coincidence_window(&self) -> f64 {
        self.det_a.coincidence_window.max(self.det_b.coincidence_window)
    }

    fn singles_rates(&self, gain: f64) -> (f64, f64) {
        let emitted = self.source.pair_rate * gain;
        (
            emitted * self.det_a.efficiency + self.det_a.dark_rate,
            emitted * self.det_b.efficiency * self.channel.effective() + self.det_b.dark_rate,
        )
    }
}

impl Default for Physics {
    /// Default models: 561 expected coincidences per 1 s interval at `Δθ = 0`.
    fn default() -> Self {
        let channel = ChannelModel::default();
        let det = DetectorModel::default();
        let pair_rate =
            DEFAULT_MAX_COUNT / (DEFAULT_TAU * det.efficiency * det.efficiency * channel.effective());
        Self {
            source: SourceModel::new(pair_rate, DEFAULT_NOISE_SIGMA, BiphotonState::default())
                .expect("default source is valid"),
            channel,
            det_a: det,
            det_b: det,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalCounts {
    /// Pairs generated by the source during the interval.
    pub pairs_emitted: u64,
    pub true_coincidences: u64,
    pub accidental_coincidences: u64,
    pub singles_a: u64,
    pub singles_b: u64,
    pub tau: f64,
}

impl IntervalCounts {
    pub fn total(&self) -> u64 {
        self.true_coincidences + self.accidental_coincidences
    }
}

/// How a pair that reached both SLMs is projected onto the prepared states.
///
/// The ideal model is the cos² law; the adversary module supplies
/// attacked variants.
pub trait PairCoupling: Sync {
    fn pair_probability<R: Rng + ?Sized>(
        &self,
        slm_a: &SectorState<f64>,
        slm_b: &SectorState<f64>,
        rng: &mut R,
    ) -> Result<f64>;

    /// True when `pair_probability` never touches the rng, which lets the
    /// simulator draw all pairs of an interval as one binomial.
    fn is_deterministic(&self) -> bool;
}

/// Undisturbed projection: `cos²(ℓΔθ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealProjection;

impl PairCoupling for IdealProjection {
    fn pair_probability<R: Rng + ?Sized>(
        &self,
        slm_a: &SectorState<f64>,
        slm_b: &SectorState<f64>,
        _rng: &mut R,
    ) -> Result<f64> {
        coincidence_probability(slm_a, slm_b)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 || !mean.is_finite() {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// One τ interval with the ideal projection.
pub fn simulate_interval<R: Rng + ?Sized>(
    physics: &Physics,
    slm_a: &SectorState<f64>,
    slm_b: &SectorState<f64>,
    tau: f64,
    rng: &mut R,
) -> Result<IntervalCounts> {
    simulate_interval_with(physics, &IdealProjection, slm_a, slm_b, tau, rng)
}

/// One τ interval with an arbitrary pair coupling.
///
/// A source whose biphoton lacks the `±ℓ` modes produces no true
/// coincidences.
pub fn simulate_interval_with<R: Rng + ?Sized, C: PairCoupling>(
    physics: &Physics,
    coupling: &C,
    slm_a: &SectorState<f64>,
    slm_b: &SectorState<f64>,
    tau: f64,
    rng: &mut R,
) -> Result<IntervalCounts> {
    if !(tau.is_finite() && tau > 0.0) {
        return invalid(format!("tau must be > 0, got {tau}"));
    }
    if slm_a.ell() != slm_b.ell() {
        return invalid(format!("mismatched ell: {} vs {}", slm_a.ell(), slm_b.ell()));
    }

    let sigma = physics.source.intensity_noise_sigma;
    let raw_gain = Normal::new(1.0, sigma)
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
        .sample(rng);
    let gain = raw_gain.max(0.0);

    let pairs_emitted = poisson(physics.source.pair_rate * tau * gain, rng);
    let detect = if physics.source.biphoton.supports(slm_a.ell()) {
        physics.pair_detection_probability()
    } else {
        0.0
    };

    let true_coincidences = if coupling.is_deterministic() {
        let p = (detect * coupling.pair_probability(slm_a, slm_b, rng)?).clamp(0.0, 1.0);
        Binomial::new(pairs_emitted, p)
            .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
            .sample(rng)
    } else {
        let mut hits = 0;
        for _ in 0..pairs_emitted {
            let p = detect * coupling.pair_probability(slm_a, slm_b, rng)?;
            if rng.random::<f64>() < p {
                hits += 1;
            }
        }
        hits
    };

    let (rate_a, rate_b) = physics.singles_rates(gain);
    let singles_a = poisson(rate_a * tau, rng);
    let singles_b = poisson(rate_b * tau, rng);
    let accidental_coincidences = poisson(rate_a * rate_b * physics.coincidence_window() * tau, rng);

    Ok(IntervalCounts {
        pairs_emitted,
        true_coincidences,
        accidental_coincidences,
        singles_a,
        singles_b,
        tau,
    })
}

/// Runs `n` intervals, interval `i` on stream `seeds.rng(i)`, in parallel.
pub fn simulate_intervals<C: PairCoupling>(
    physics: &Physics,
    coupling: &C,
    slm_a: &SectorState<f64>,
    slm_b: &SectorState<f64>,
    tau: f64,
    n: usize,
    seeds: &SeedStream,
) -> Result<Vec<IntervalCounts>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_interval_with(physics, coupling, slm_a, slm_b, tau, &mut seeds.rng(i)))
        .collect()
}

/// Mean total coincidence count at `Δθ = 0`: the relative-coincidence
/// denominator.
pub fn calibrate_max(
    physics: &Physics,
    slm: &SectorState<f64>,
    n_intervals: usize,
    tau: f64,
    seeds: &SeedStream,
) -> Result<f64> {
    if n_intervals == 0 {
        return invalid("calibration needs at least one interval");
    }
    let counts = simulate_intervals(physics, &IdealProjection, slm, slm, tau, n_intervals, seeds)?;
    Ok(mean_total(&counts))
}

pub fn mean_total(counts: &[IntervalCounts]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    counts.iter().map(|c| c.total() as f64).sum::<f64>() / counts.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta_b: f64,
    pub mean_count: f64,
    /// Standard error of `mean_count` (0 for a single interval).
    pub std_err: f64,
}

/// Mean coincidences at each Bob angle, `n_per_point` intervals per point.
///
/// Point `p` uses run `seed::runs::SWEEP + p` under `master_seed`, so two
/// sweeps with the same seed see paired random streams.
#[allow(clippy::too_many_arguments)]
pub fn sweep_coincidences<C: PairCoupling>(
    physics: &Physics,
    coupling: &C,
    theta_a: &SectorState<f64>,
    theta_b_grid: &[f64],
    tau: f64,
    n_per_point: usize,
    master_seed: u64,
) -> Result<Vec<SweepPoint>> {
    if theta_b_grid.is_empty() {
        return invalid("sweep grid is empty");
    }
    if n_per_point == 0 {
        return invalid("sweep needs at least one interval per point");
    }
    theta_b_grid
        .iter()
        .enumerate()
        .map(|(p, &theta_b)| {
            let slm_b = SectorState::new(theta_a.ell() as i32, theta_b)?;
            let seeds = SeedStream::new(master_seed, crate::seed::runs::SWEEP + p as u64);
            let counts = simulate_intervals(physics, coupling, theta_a, &slm_b, tau, n_per_point, &seeds)?;
            let n = counts.len() as f64;
            let mean = mean_total(&counts);
            let std_err = if counts.len() > 1 {
                let var = counts
                    .iter()
                    .map(|c| (c.total() as f64 - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            Ok(SweepPoint {
                theta_b,
                mean_count: mean,
                std_err,
            })
        })
        .collect()
}

/// Evenly spaced Bob angles over one period `[0, π/ℓ)`.
pub fn period_grid(points: usize, ell: u32) -> Vec<f64> {
    let period = std::f64::consts::PI / f64::from(ell.max(1));
    (0..points)
        .map(|k| period * k as f64 / points as f64)
        .collect()
}
