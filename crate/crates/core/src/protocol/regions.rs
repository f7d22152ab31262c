use serde::{Deserialize, Serialize};

use crate::analysis::{fit_gaussian, GaussianFit};
use crate::error::{invalid, Error, Result};
use crate::photonics::IntervalCounts;
use crate::scalar::Scalar;

/// Headroom above relative coincidence 1 allowed for the fixed three-symbol regions.
pub const DEFAULT_SLACK: f64 = 0.1;
/// Headroom used when regions are calibrated from training data.
pub const DEFAULT_CALIBRATION_SLACK: f64 = 0.25;
pub const DEFAULT_K_SIGMA: f64 = 4.0;
pub const MIN_TRAINING_SAMPLES: usize = 30;

/// Total coincidences over the calibrated maximum.
pub fn relative_coincidence<T: Scalar>(counts: &IntervalCounts, c_max: T) -> Result<T> {
    if !(c_max.is_finite() && c_max > T::zero()) {
        return invalid(format!("c_max must be > 0, got {c_max}"));
    }
    Ok(T::from_count(counts.total()) / c_max)
}

/// Decoder output: a key symbol, or an erasure for values in no region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Symbol(usize),
    Erasure,
}

impl Decision {
    pub fn symbol(self) -> Option<usize> {
        match self {
            Decision::Symbol(k) => Some(k),
            Decision::Erasure => None,
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Symbol(k) => write!(f, "{k}"),
            Decision::Erasure => f.write_str("erasure"),
        }
    }
}

/// Closed interval `[lo, hi]` on relative coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// One closed interval per symbol, ordered, with strictly positive gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRegions<T> {
    regions: Vec<Region<T>>,
    slack: T,
}

impl<T: Scalar> DecisionRegions<T> {
    pub fn new(regions: Vec<Region<T>>, slack: T) -> Result<Self> {
        if regions.is_empty() {
            return invalid("at least one region is required");
        }
        if !(slack.is_finite() && slack >= T::zero()) {
            return invalid("slack must be >= 0");
        }
        for (k, r) in regions.iter().enumerate() {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                return invalid(format!("region {k} is not a valid interval"));
            }
        }
        if regions[0].lo < T::zero() {
            return invalid("lowest region must start at or above 0");
        }
        if regions[regions.len() - 1].hi > T::one() + slack {
            return invalid("highest region exceeds 1 + slack");
        }
        for k in 1..regions.len() {
            if regions[k].lo <= regions[k - 1].hi {
                return Err(Error::CalibrationFailure {
                    lower: k - 1,
                    upper: k,
                });
            }
        }
        Ok(Self { regions, slack })
    }

    pub fn regions(&self) -> &[Region<T>] {
        &self.regions
    }

    pub fn slack(&self) -> T {
        self.slack
    }

    pub fn n_symbols(&self) -> usize {
        self.regions.len()
    }
}

/// The fixed three-symbol regions `[0,0.05]`, `[0.40,0.57]`,
/// `[0.70,1.10]` (the last one widened by the default slack).
pub fn default_regions<T: Scalar>(n_symbols: usize) -> Result<DecisionRegions<T>> {
    if n_symbols != 3 {
        return Err(Error::Unsupported(format!(
            "no fixed regions for {n_symbols} symbols; calibrate instead"
        )));
    }
    let r = |lo: f64, hi: f64| Region {
        lo: T::lit(lo),
        hi: T::lit(hi),
    };
    DecisionRegions::new(
        vec![r(0.0, 0.05), r(0.40, 0.57), r(0.70, 1.0 + DEFAULT_SLACK)],
        T::lit(DEFAULT_SLACK),
    )
}

/// Regions plus the per-symbol fits they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCalibration<T> {
    pub regions: DecisionRegions<T>,
    pub fits: Vec<GaussianFit<T>>,
}

/// Region `k` spans `μ_k ± k_sigma·σ_k`, widened to cover every training
/// sample of symbol `k`, then clipped to `[0, 1 + slack]`.
///
/// Touching or overlapping neighbours fail with
/// [`Error::CalibrationFailure`] naming the pair.
pub fn calibrate_regions<T: Scalar>(
    training: &[Vec<T>],
    k_sigma: T,
    slack: T,
) -> Result<RegionCalibration<T>> {
    if training.len() < 2 {
        return invalid("calibration needs at least two symbols");
    }
    if !(k_sigma.is_finite() && k_sigma > T::zero()) {
        return invalid("k_sigma must be > 0");
    }
    if let Some((k, s)) = training
        .iter()
        .enumerate()
        .find(|(_, s)| s.len() < MIN_TRAINING_SAMPLES)
    {
        return invalid(format!(
            "symbol {k} has {} training samples; at least {MIN_TRAINING_SAMPLES} required",
            s.len()
        ));
    }
    let ceiling = T::one() + slack;
    let mut fits = Vec::with_capacity(training.len());
    let mut regions = Vec::with_capacity(training.len());
    for samples in training {
        let fit = fit_gaussian(samples)?;
        let (min, max) = samples
            .iter()
            .fold((samples[0], samples[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let lo = (fit.mu - k_sigma * fit.sigma).min(min).max(T::zero());
        let hi = (fit.mu + k_sigma * fit.sigma).max(max).min(ceiling);
        regions.push(Region { lo, hi });
        fits.push(fit);
    }
    for k in 1..fits.len() {
        if fits[k].mu <= fits[k - 1].mu {
            return Err(Error::CalibrationFailure {
                lower: k - 1,
                upper: k,
            });
        }
    }
    let regions = DecisionRegions::new(regions, slack)?;
    Ok(RegionCalibration { regions, fits })
}

/// Symbol whose region contains `relative`, or [`Decision::Erasure`].
pub fn decode<T: Scalar>(relative: T, regions: &DecisionRegions<T>) -> Decision {
    regions
        .regions
        .iter()
        .position(|r| r.contains(relative))
        .map_or(Decision::Erasure, Decision::Symbol)
}
