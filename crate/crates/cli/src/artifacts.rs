//! Artifact writers. Every CSV has a header row; JSON is pretty-printed
//! with fields in declaration order so identical runs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use oamqkd_core::adversary::AttackConfig;
use oamqkd_core::analysis::{CosSquaredFit, GaussianFit, Histogram};
use oamqkd_core::photonics::SweepPoint;
use oamqkd_core::protocol::{DecisionRegions, IntervalRecord};
use serde::Serialize;

use crate::commands::CliError;
use crate::config::ScenarioConfig;

/// Number of leading records copied to `trace.csv`.
pub const TRACE_LEN: usize = 100;

/// `x` with six significant digits in fixed notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Rounds to three decimals and drops trailing zeros: `5`, `1.585`.
pub fn short(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Csv {
        path: path.to_path_buf(),
        source: e,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::Json)?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

pub fn write_records(path: &Path, records: &[IntervalRecord]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["index", "symbol_sent", "counts_total", "relative", "decoded"])
        .map_err(csv_err(path))?;
    for r in records {
        w.write_record([
            r.index.to_string(),
            r.symbol_sent.to_string(),
            r.counts.total().to_string(),
            sig6(r.relative),
            r.decoded.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// First [`TRACE_LEN`] records against reduced time `t/τ`.
pub fn write_trace(path: &Path, records: &[IntervalRecord]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["reduced_time", "symbol_sent", "relative"])
        .map_err(csv_err(path))?;
    for r in records.iter().take(TRACE_LEN) {
        w.write_record([(r.index + 1).to_string(), r.symbol_sent.to_string(), sig6(r.relative)])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_sweep(path: &Path, sweep: &[SweepPoint]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["theta_b", "mean_count", "std_err"]).map_err(csv_err(path))?;
    for p in sweep {
        w.write_record([p.theta_b.to_string(), p.mean_count.to_string(), p.std_err.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_clusters(path: &Path, training: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["symbol", "relative"]).map_err(csv_err(path))?;
    for (k, samples) in training.iter().enumerate() {
        for v in samples {
            w.write_record([k.to_string(), sig6(*v)]).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_histograms(path: &Path, hists: &[Histogram<f64>]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["symbol", "bin_lo", "bin_hi", "count", "frequency"])
        .map_err(csv_err(path))?;
    for (k, h) in hists.iter().enumerate() {
        let freq = h.frequencies();
        for (b, &count) in h.counts.iter().enumerate() {
            w.write_record([
                k.to_string(),
                sig6(h.bin_edges[b]),
                sig6(h.bin_edges[b + 1]),
                count.to_string(),
                sig6(freq[b]),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionEntry {
    pub symbol: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterEntry {
    pub symbol: usize,
    pub mu: f64,
    pub sigma: f64,
    pub n_samples: usize,
}

pub fn region_entries(regions: &DecisionRegions<f64>) -> Vec<RegionEntry> {
    regions
        .regions()
        .iter()
        .enumerate()
        .map(|(symbol, r)| RegionEntry { symbol, lo: r.lo, hi: r.hi })
        .collect()
}

pub fn cluster_entries(fits: &[GaussianFit<f64>]) -> Vec<ClusterEntry> {
    fits.iter()
        .enumerate()
        .map(|(symbol, f)| ClusterEntry {
            symbol,
            mu: f.mu,
            sigma: f.sigma,
            n_samples: f.n_samples,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub config: &'a ScenarioConfig,
    pub c_max: f64,
    pub regions: Vec<RegionEntry>,
    /// Gaussian fits behind calibrated regions; empty for the fixed regions.
    pub clusters: Vec<ClusterEntry>,
    pub n_sent: usize,
    pub correct_count: usize,
    pub error_count: usize,
    pub erasure_count: usize,
    pub mean_count: f64,
    pub elapsed_simulated_time_s: f64,
    pub symbols_per_second: f64,
    pub bits_per_second: f64,
}

#[derive(Debug, Serialize)]
pub struct RegionsArtifact {
    pub c_max: f64,
    pub samples_per_symbol: usize,
    pub k_sigma: f64,
    pub slack: f64,
    pub regions: Vec<RegionEntry>,
    pub clusters: Vec<ClusterEntry>,
}

#[derive(Debug, Serialize)]
pub struct FitArtifact {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub r_squared: f64,
    pub ell: u32,
    pub visibility: f64,
}

impl From<&CosSquaredFit<f64>> for FitArtifact {
    fn from(f: &CosSquaredFit<f64>) -> Self {
        Self {
            amplitude: f.amplitude,
            phase: f.phase,
            offset: f.offset,
            r_squared: f.r_squared,
            ell: f.ell,
            visibility: f.visibility(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VisibilityArtifact {
    pub attack: AttackConfig,
    pub n_points: usize,
    pub intervals_per_point: usize,
    pub visibility: f64,
    pub threshold: f64,
    pub detected: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.519), "0.519000");
        assert_eq!(sig6(0.0071301), "0.00713010");
        assert_eq!(sig6(1.05), "1.05000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456.7), "123457");
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(5.000000000001), "5");
        assert_eq!(short(3f64.log2()), "1.585");
        assert_eq!(short(10.0), "10");
        assert_eq!(short(0.0), "0");
    }
}
