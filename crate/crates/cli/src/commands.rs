use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use oamqkd_core::adversary::{
    detect_eavesdropping, AccessPoint, AttackConfig, BasisStrategy, DEFAULT_DETECTION_THRESHOLD,
};
use oamqkd_core::analysis::{fit_cos_squared, histogram};
use oamqkd_core::photonics::{period_grid, sweep_coincidences};
use oamqkd_core::protocol::{
    default_regions, key_rate, key_rate_from_coincidence_rate, DecisionRegions, Experiment,
};
use oamqkd_core::seed::{runs, SeedStream};
use oamqkd_core::Error as CoreError;
use rand::Rng;
use thiserror::Error;

use crate::artifacts::{self, short, FitArtifact, RegionsArtifact, RunSummary, VisibilityArtifact};
use crate::config::{load_config, Angle, ConfigError, Format, RegionSource, ScenarioConfig};

/// Pairs per sweep point aimed for when `--intervals` is not given.
pub const SWEEP_TARGET_PAIRS: f64 = 1e5;
/// Bins per symbol in `histogram.csv`.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("json encoding failed: {0}")]
    Json(serde_json::Error),
}

impl CliError {
    /// 3 for overlapping regions, 4 for a failed fringe fit, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::CalibrationFailure { .. }) => 3,
            CliError::Core(CoreError::FitFailure(_)) => 4,
            _ => 1,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// The run finished but some symbols were decoded wrongly.
    DecodeErrors,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::DecodeErrors => 2,
        }
    }
}

fn parse_angle_arg(s: &str) -> Result<Angle, String> {
    Angle::parse(s)
}

/// Comma-separated key symbols from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyList(pub Vec<usize>);

fn parse_keys(s: &str) -> Result<KeyList, String> {
    if s.trim().is_empty() {
        return Ok(KeyList(Vec::new()));
    }
    s.split(',')
        .map(|k| k.trim().parse::<usize>().map_err(|_| format!("bad key symbol {k:?}")))
        .collect::<Result<_, _>>()
        .map(KeyList)
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `run.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated key symbols, e.g. `0,1,1,2`; overrides the config.
    #[arg(long, value_parser = parse_keys)]
    pub keys: Option<KeyList>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    None,
    InterceptResend,
    ManInMiddle,
    PhotonSiphon,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub points: usize,
    /// Attack applied during the sweep; defaults to the config's.
    #[arg(long, value_enum)]
    pub attack: Option<AttackArg>,
    /// Fixed projection angle for Eve (uniform per pair when absent).
    #[arg(long, value_parser = parse_angle_arg)]
    pub phi: Option<Angle>,
    /// Siphon fraction for `photon-siphon`.
    #[arg(long)]
    pub siphon: Option<f64>,
    #[arg(long, value_enum, default_value = "atb")]
    pub location: LocationArg,
    /// Intervals per point; by default enough for about 1e5 emitted pairs.
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DETECTION_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LocationArg {
    Atb,
    Bta,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub samples_per_symbol: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KeyrateArgs {
    /// Interval per symbol in seconds.
    #[arg(long)]
    pub tau: f64,
    /// Alphabet size N.
    #[arg(long)]
    pub alphabet: usize,
    /// Lowest coincidence rate (counts/s) for the range table.
    #[arg(long, requires_all = ["rate_max", "counts_per_symbol"])]
    pub rate_min: Option<f64>,
    #[arg(long, requires_all = ["rate_min", "counts_per_symbol"])]
    pub rate_max: Option<f64>,
    /// Coincidences needed per symbol.
    #[arg(long, requires_all = ["rate_min", "rate_max"])]
    pub counts_per_symbol: Option<f64>,
}

fn experiment(cfg: &ScenarioConfig) -> Result<Experiment<AttackConfig>, CliError> {
    let attack = cfg.attack()?;
    let physics = attack.apply(&cfg.physics()?)?;
    Ok(Experiment::new(cfg.alphabet()?, physics, cfg.run.master_seed).with_coupling(attack))
}

fn c_max(cfg: &ScenarioConfig, exp: &Experiment<AttackConfig>) -> Result<f64, CliError> {
    match cfg.run.c_max_override {
        Some(c) => Ok(c),
        None => Ok(exp.calibrate_c_max(cfg.run.calibration_intervals)?),
    }
}

fn keys_for(cfg: &ScenarioConfig) -> Vec<usize> {
    if let Some(keys) = &cfg.run.keys {
        return keys.clone();
    }
    let n = cfg.alphabet.n_symbols;
    let mut rng = SeedStream::new(cfg.run.master_seed, runs::KEYS).rng(0);
    (0..cfg.run.n_keys).map(|_| rng.random_range(0..n)).collect()
}

fn report_time(what: &str, start: Instant) {
    eprintln!("{what}: {:.3} s wall time", start.elapsed().as_secs_f64());
}

pub fn cmd_run(args: &RunArgs) -> Result<ExitStatus, CliError> {
    let start = Instant::now();
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(keys) = &args.keys {
        cfg.run.keys = Some(keys.0.clone());
        cfg.validate()?;
    }
    let exp = experiment(&cfg)?;
    let c_max = c_max(&cfg, &exp)?;
    let (regions, clusters): (DecisionRegions<f64>, _) = match cfg.run.regions {
        RegionSource::Fixed => (default_regions(cfg.alphabet.n_symbols)?, Vec::new()),
        RegionSource::Calibrated => {
            let cal = exp.calibrate_regions(
                cfg.run.training_samples_per_symbol,
                c_max,
                cfg.run.k_sigma,
                cfg.run.slack,
            )?;
            (cal.regions, artifacts::cluster_entries(&cal.fits))
        }
    };
    let keys = keys_for(&cfg);
    let report = exp.run(&keys, &regions, c_max)?;
    let rate = key_rate(exp.alphabet.tau(), exp.alphabet.n_symbols())?;

    let dir = cfg.output_dir(args.out.as_deref());
    artifacts::ensure_dir(&dir)?;
    if cfg.wants(Format::Csv) {
        artifacts::write_records(&dir.join("records.csv"), &report.records)?;
        artifacts::write_trace(&dir.join("trace.csv"), &report.records)?;
    }
    if cfg.wants(Format::Json) {
        let summary = RunSummary {
            config: &cfg,
            c_max,
            regions: artifacts::region_entries(&regions),
            clusters,
            n_sent: report.len(),
            correct_count: report.correct_count(),
            error_count: report.error_count,
            erasure_count: report.erasure_count,
            mean_count: report.mean_count(),
            elapsed_simulated_time_s: report.elapsed_simulated_time,
            symbols_per_second: rate.symbols_per_second,
            bits_per_second: rate.bits_per_second,
        };
        artifacts::write_json(&dir.join("summary.json"), &summary)?;
    }
    eprintln!(
        "{} keys: {} correct, {} errors, {} erasures (c_max {:.3})",
        report.len(),
        report.correct_count(),
        report.error_count,
        report.erasure_count,
        c_max
    );
    report_time("run", start);
    Ok(if report.error_count > 0 {
        ExitStatus::DecodeErrors
    } else {
        ExitStatus::Success
    })
}

fn sweep_attack(cfg: &ScenarioConfig, args: &SweepArgs) -> Result<AttackConfig, CliError> {
    let Some(kind) = args.attack else {
        if args.phi.is_some() || args.siphon.is_some() {
            return Err(CliError::Usage("--phi and --siphon need --attack".into()));
        }
        return Ok(cfg.attack()?);
    };
    let basis = match &args.phi {
        Some(phi) => BasisStrategy::Fixed(phi.radians),
        None => BasisStrategy::UniformRandomPerPair,
    };
    let location = match args.location {
        LocationArg::Atb => AccessPoint::Atb,
        LocationArg::Bta => AccessPoint::Bta,
    };
    let needs_phi = matches!(kind, AttackArg::InterceptResend | AttackArg::ManInMiddle);
    if args.phi.is_some() && !needs_phi {
        return Err(CliError::Usage("--phi applies to intercept-resend and man-in-middle".into()));
    }
    if args.siphon.is_some() && kind != AttackArg::PhotonSiphon {
        return Err(CliError::Usage("--siphon applies to photon-siphon".into()));
    }
    Ok(match kind {
        AttackArg::None => AttackConfig::none(),
        AttackArg::InterceptResend => AttackConfig::intercept_resend(basis, location)?,
        AttackArg::ManInMiddle => AttackConfig::man_in_middle(basis, location)?,
        AttackArg::PhotonSiphon => {
            let f = args
                .siphon
                .ok_or_else(|| CliError::Usage("photon-siphon needs --siphon <fraction>".into()))?;
            AttackConfig::photon_siphon(f, location)?
        }
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<ExitStatus, CliError> {
    let start = Instant::now();
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if args.points < 2 {
        return Err(CliError::Usage(format!("--points ≥ 2 (got {})", args.points)));
    }
    let attack = sweep_attack(&cfg, args)?;
    let alphabet = cfg.alphabet()?;
    let physics = attack.apply(&cfg.physics()?)?;
    let tau = alphabet.tau();
    let intervals = match args.intervals {
        Some(0) => return Err(CliError::Usage("--intervals ≥ 1".into())),
        Some(n) => n,
        None => (SWEEP_TARGET_PAIRS / (physics.source.pair_rate() * tau)).ceil().max(1.0) as usize,
    };
    let grid = period_grid(args.points, alphabet.ell());
    let sweep = sweep_coincidences(
        &physics,
        &attack,
        &alphabet.alice_state(),
        &grid,
        tau,
        intervals,
        cfg.run.master_seed,
    )?;
    let detection = detect_eavesdropping(&sweep, args.threshold)?;

    let dir = cfg.output_dir(args.out.as_deref());
    artifacts::ensure_dir(&dir)?;
    if cfg.wants(Format::Csv) {
        artifacts::write_sweep(&dir.join("sweep.csv"), &sweep)?;
    }
    if cfg.wants(Format::Json) {
        let vis = VisibilityArtifact {
            attack,
            n_points: sweep.len(),
            intervals_per_point: intervals,
            visibility: detection.visibility,
            threshold: detection.threshold,
            detected: detection.detected,
        };
        artifacts::write_json(&dir.join("visibility.json"), &vis)?;
    }
    eprintln!(
        "visibility {:.4} (threshold {}): {}",
        detection.visibility,
        detection.threshold,
        if detection.detected { "eavesdropper detected" } else { "no eavesdropper detected" }
    );
    let points: Vec<(f64, f64)> = sweep.iter().map(|p| (p.theta_b, p.mean_count)).collect();
    let fit = fit_cos_squared(&points, alphabet.ell())?;
    if cfg.wants(Format::Json) {
        artifacts::write_json(&dir.join("fit.json"), &FitArtifact::from(&fit))?;
    }
    eprintln!("fit r² {:.5}, phase {:.5}", fit.r_squared, fit.phase);
    report_time("sweep", start);
    Ok(ExitStatus::Success)
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<ExitStatus, CliError> {
    let start = Instant::now();
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    let min = oamqkd_core::protocol::MIN_TRAINING_SAMPLES;
    if args.samples_per_symbol < min {
        return Err(CliError::Usage(format!(
            "--samples-per-symbol ≥ {min} (got {})",
            args.samples_per_symbol
        )));
    }
    let exp = experiment(&cfg)?;
    let c_max = c_max(&cfg, &exp)?;
    let training = exp.training(args.samples_per_symbol, c_max)?;

    let dir = cfg.output_dir(args.out.as_deref());
    artifacts::ensure_dir(&dir)?;
    if cfg.wants(Format::Csv) {
        artifacts::write_clusters(&dir.join("clusters.csv"), &training)?;
        let hists = training
            .iter()
            .map(|s| histogram(s, HISTOGRAM_BINS))
            .collect::<Result<Vec<_>, _>>()?;
        artifacts::write_histograms(&dir.join("histogram.csv"), &hists)?;
    }
    let cal = oamqkd_core::protocol::calibrate_regions(&training, cfg.run.k_sigma, cfg.run.slack)?;
    if cfg.wants(Format::Json) {
        let art = RegionsArtifact {
            c_max,
            samples_per_symbol: args.samples_per_symbol,
            k_sigma: cfg.run.k_sigma,
            slack: cfg.run.slack,
            regions: artifacts::region_entries(&cal.regions),
            clusters: artifacts::cluster_entries(&cal.fits),
        };
        artifacts::write_json(&dir.join("regions.json"), &art)?;
    }
    for (k, r) in cal.regions.regions().iter().enumerate() {
        eprintln!("symbol {k}: [{:.4}, {:.4}]", r.lo, r.hi);
    }
    report_time("calibrate", start);
    Ok(ExitStatus::Success)
}

/// Lines printed by `keyrate`.
pub fn keyrate_lines(args: &KeyrateArgs) -> Result<Vec<String>, CliError> {
    let rate = key_rate(args.tau, args.alphabet)?;
    let bits = (args.alphabet as f64).log2();
    let mut lines = vec![
        format!("alphabet {} ({} bits/symbol), tau {} s", args.alphabet, short(bits), short(args.tau)),
        format!("{} symbols/s", short(rate.symbols_per_second)),
        format!("{} bps", short(rate.bits_per_second)),
    ];
    if let (Some(lo), Some(hi), Some(cps)) = (args.rate_min, args.rate_max, args.counts_per_symbol) {
        if lo > hi {
            return Err(CliError::Usage("--rate-min must not exceed --rate-max".into()));
        }
        let a = key_rate_from_coincidence_rate(lo, cps, args.alphabet)?;
        let b = key_rate_from_coincidence_rate(hi, cps, args.alphabet)?;
        lines.push(format!(
            "coincidence rate {} to {} counts/s at {} counts/symbol: {} to {} symbols/s, {} to {} bps",
            short(lo),
            short(hi),
            short(cps),
            short(a.symbols_per_second),
            short(b.symbols_per_second),
            short(a.bits_per_second),
            short(b.bits_per_second)
        ));
    }
    Ok(lines)
}

pub fn cmd_keyrate(args: &KeyrateArgs) -> Result<ExitStatus, CliError> {
    for line in keyrate_lines(args)? {
        println!("{line}");
    }
    Ok(ExitStatus::Success)
}
