//! Simulator and analysis toolkit for large-alphabet quantum key
//! distribution over OAM-entangled photon pairs.
//!
//! Bob encodes each key symbol as the orientation of a sector-state
//! hologram acting on the idler photon; Alice, who keeps the signal photon
//! behind a fixed hologram, reads the symbol back from the coincidence rate
//! accumulated over one interval. The crate is split into:
//!
//! * [`oam`]: sector states, entangled pairs and the cos² coincidence law,
//!   generic over the float type;
//! * [`photonics`]: the stochastic physical layer (source, channel,
//!   detectors, coincidence counting);
//! * [`protocol`]: alphabet, encoding, decision regions, decoding and the
//!   run loop;
//! * [`adversary`]: intercept-resend, man-in-the-middle and photon-siphon
//!   models plus visibility-based detection;
//! * [`analysis`]: histograms, Gaussian cluster fits and the cos² fringe fit.
//!
//! The math modules are generic over [`Scalar`] (`f32`/`f64`). The aliases
//! below fix the scalar to `f64`, which is what the simulator uses.

pub mod adversary;
pub mod analysis;
mod error;
pub mod oam;
pub mod photonics;
pub mod protocol;
mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar used by the physical-layer simulation.
pub type Real = f64;

pub type ModeAmplitudes = oam::ModeAmplitudes<Real>;
pub type SectorState = oam::SectorState<Real>;
pub type BiphotonState = oam::BiphotonState<Real>;
pub type AlphabetConfig = protocol::AlphabetConfig<Real>;
pub type DecisionRegions = protocol::DecisionRegions<Real>;
pub type Region = protocol::Region<Real>;
pub type RegionCalibration = protocol::RegionCalibration<Real>;
pub type KeyRate = protocol::KeyRate<Real>;
pub type Histogram = analysis::Histogram<Real>;
pub type GaussianFit = analysis::GaussianFit<Real>;
pub type CosSquaredFit = analysis::CosSquaredFit<Real>;

pub type SectorStateF32 = oam::SectorState<f32>;
pub type ModeAmplitudesF32 = oam::ModeAmplitudes<f32>;
pub type BiphotonStateF32 = oam::BiphotonState<f32>;
