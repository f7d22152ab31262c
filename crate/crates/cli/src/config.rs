//! Scenario files: JSON with every section optional, unknown keys rejected,
//! and angles given either as radians or as `"pi/k"`-style strings.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use oamqkd_core::adversary::{AccessPoint, AttackConfig, AttackKind, BasisStrategy};
use oamqkd_core::oam::{BiphotonState, DEFAULT_LMAX};
use oamqkd_core::photonics::{
    ChannelModel, DetectorModel, Physics, SourceModel, DEFAULT_DARK_RATE, DEFAULT_EFFICIENCY,
    DEFAULT_MAX_COUNT, DEFAULT_NOISE_SIGMA, DEFAULT_TRANSMITTANCE, DEFAULT_WINDOW,
};
use oamqkd_core::protocol::{
    AlphabetConfig, DEFAULT_CALIBRATION_INTERVALS, DEFAULT_CALIBRATION_SLACK, DEFAULT_K_SIGMA,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "OAMQKD_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    /// serde_json reports the line, column and offending field.
    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Angle in radians that remembers how it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    pub radians: f64,
    text: Option<String>,
}

impl Angle {
    pub fn radians(radians: f64) -> Self {
        Self { radians, text: None }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        parse_angle(s).map(|radians| Self {
            radians,
            text: Some(s.trim().to_string()),
        })
    }
}

/// Accepts plain numbers and `[sign][coef][*]pi[/den]`, e.g. `pi/4`,
/// `-pi/2`, `3pi/4`, `0.5*pi`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return finite(v, s);
    }
    let Some(pos) = t.find("pi").or_else(|| t.find('π')) else {
        return Err(format!("cannot parse angle {s:?}"));
    };
    let tok_len = if t[pos..].starts_with("pi") { 2 } else { 'π'.len_utf8() };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + tok_len..];
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad coefficient in angle {s:?}"))?,
    };
    let den = if tail.is_empty() {
        1.0
    } else if let Some(d) = tail.strip_prefix('/') {
        d.parse::<f64>().map_err(|_| format!("bad denominator in angle {s:?}"))?
    } else {
        return Err(format!("cannot parse angle {s:?}"));
    };
    if den == 0.0 {
        return Err(format!("zero denominator in angle {s:?}"));
    }
    finite(coef * PI / den, s)
}

fn finite(v: f64, s: &str) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {s:?} is not finite"))
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct AngleVisitor;
        impl Visitor<'_> for AngleVisitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or a string such as \"pi/4\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
                Ok(Angle::radians(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
                Ok(Angle::radians(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angle, E> {
                Ok(Angle::radians(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Angle, E> {
                Angle::parse(v).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(AngleVisitor)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => serializer.serialize_str(t),
            None => serializer.serialize_f64(self.radians),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphabetSection {
    pub n_symbols: usize,
    pub ell: i64,
    pub theta_a: Angle,
    pub tau_seconds: f64,
    /// Bob's angles; derived from the equal-spacing rule when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_map: Option<Vec<Angle>>,
}

impl Default for AlphabetSection {
    fn default() -> Self {
        Self {
            n_symbols: 3,
            ell: 1,
            theta_a: Angle::parse("pi/2").expect("literal"),
            tau_seconds: 1.0,
            theta_map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub window_s: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            efficiency: DEFAULT_EFFICIENCY,
            dark_rate_hz: DEFAULT_DARK_RATE,
            window_s: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    /// Source pair rate. When absent it is derived from `expected_max_count`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_rate_hz: Option<f64>,
    /// Mean coincidences per interval at `Δθ = 0` (ignored if `pair_rate_hz` is set).
    pub expected_max_count: f64,
    pub intensity_noise_sigma: f64,
    pub transmittance: f64,
    pub detector_a: DetectorSection,
    pub detector_b: DetectorSection,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            pair_rate_hz: None,
            expected_max_count: DEFAULT_MAX_COUNT,
            intensity_noise_sigma: DEFAULT_NOISE_SIGMA,
            transmittance: DEFAULT_TRANSMITTANCE,
            detector_a: DetectorSection::default(),
            detector_b: DetectorSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSection {
    pub kind: AttackKind,
    /// `"uniform"` or a fixed angle for Eve's projection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub siphon_fraction: Option<f64>,
    pub location: AccessPoint,
}

impl Default for AttackSection {
    fn default() -> Self {
        Self {
            kind: AttackKind::None,
            basis: None,
            siphon_fraction: None,
            location: AccessPoint::Atb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSource {
    /// Built from training intervals at Alice's site.
    #[default]
    Calibrated,
    /// The fixed three-symbol regions.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keys: Option<Vec<usize>>,
    pub n_keys: usize,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_max_override: Option<f64>,
    pub calibration_intervals: usize,
    pub training_samples_per_symbol: usize,
    pub k_sigma: f64,
    pub slack: f64,
    pub regions: RegionSource,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            keys: None,
            n_keys: 100,
            master_seed: 1,
            c_max_override: None,
            calibration_intervals: DEFAULT_CALIBRATION_INTERVALS,
            training_samples_per_symbol: 1000,
            k_sigma: DEFAULT_K_SIGMA,
            slack: DEFAULT_CALIBRATION_SLACK,
            regions: RegionSource::Calibrated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub alphabet: AlphabetSection,
    pub physics: PhysicsSection,
    pub attack: AttackSection,
    pub run: RunSection,
    pub output: OutputSection,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Checks every section against the invariants of the model types it
    /// builds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.alphabet()?;
        self.physics()?;
        self.attack()?;
        let run = &self.run;
        if let Some(c) = run.c_max_override {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid("run.c_max_override must be > 0"));
            }
        }
        if run.calibration_intervals == 0 {
            return Err(invalid("run.calibration_intervals ≥ 1"));
        }
        if !(run.k_sigma.is_finite() && run.k_sigma > 0.0) {
            return Err(invalid("run.k_sigma must be > 0"));
        }
        if !(run.slack.is_finite() && run.slack >= 0.0) {
            return Err(invalid("run.slack must be ≥ 0"));
        }
        if let Some(keys) = &run.keys {
            let n = self.alphabet.n_symbols;
            if let Some(k) = keys.iter().find(|&&k| k >= n) {
                return Err(invalid(format!("run.keys: symbol {k} outside 0..{n}")));
            }
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats must list at least one format"));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<AlphabetConfig<f64>, ConfigError> {
        let a = &self.alphabet;
        if a.n_symbols < 2 {
            return Err(invalid(format!("n_symbols ≥ 2 (got {})", a.n_symbols)));
        }
        if a.ell < 1 || a.ell > i64::from(i32::MAX) {
            return Err(invalid(format!("ell ≥ 1 (got {})", a.ell)));
        }
        let ell = a.ell as u32;
        if !(a.tau_seconds.is_finite() && a.tau_seconds > 0.0) {
            return Err(invalid(format!("tau_seconds > 0 (got {})", a.tau_seconds)));
        }
        let result = match &a.theta_map {
            Some(map) => {
                if map.len() != a.n_symbols {
                    return Err(invalid(format!(
                        "theta_map has {} angles for n_symbols = {}",
                        map.len(),
                        a.n_symbols
                    )));
                }
                AlphabetConfig::new(
                    ell,
                    a.theta_a.radians,
                    map.iter().map(|t| t.radians).collect(),
                    a.tau_seconds,
                )
            }
            None => AlphabetConfig::standard(a.n_symbols, ell, a.theta_a.radians, a.tau_seconds),
        };
        result.map_err(|e| invalid(format!("alphabet: {e}")))
    }

    pub fn physics(&self) -> Result<Physics, ConfigError> {
        let p = &self.physics;
        fn wrap(what: &str) -> impl Fn(oamqkd_core::Error) -> ConfigError + '_ {
            move |e| invalid(format!("{what}: {e}"))
        }
        let det = |d: &DetectorSection, what: &str| {
            DetectorModel::new(d.efficiency, d.dark_rate_hz, d.window_s).map_err(wrap(what))
        };
        let det_a = det(&p.detector_a, "physics.detector_a")?;
        let det_b = det(&p.detector_b, "physics.detector_b")?;
        let channel = ChannelModel::new(p.transmittance, 0.0).map_err(wrap("physics.transmittance"))?;
        let ell = self.alphabet.ell.clamp(1, i64::from(i32::MAX)) as i32;
        let biphoton = BiphotonState::sector_pair(ell, DEFAULT_LMAX.max(ell.unsigned_abs()))
            .map_err(wrap("physics"))?;
        let tau = self.alphabet.tau_seconds;
        let pair_rate = match p.pair_rate_hz {
            Some(r) => r,
            None => {
                if !(p.expected_max_count.is_finite() && p.expected_max_count > 0.0) {
                    return Err(invalid("physics.expected_max_count must be > 0"));
                }
                p.expected_max_count / (tau * det_a.efficiency() * det_b.efficiency() * channel.effective())
            }
        };
        let source =
            SourceModel::new(pair_rate, p.intensity_noise_sigma, biphoton).map_err(wrap("physics"))?;
        Ok(Physics {
            source,
            channel,
            det_a,
            det_b,
        })
    }

    pub fn attack(&self) -> Result<AttackConfig, ConfigError> {
        let a = &self.attack;
        let basis = match &a.basis {
            None => BasisStrategy::UniformRandomPerPair,
            Some(phi) => BasisStrategy::Fixed(phi.radians),
        };
        let wrap = |e: oamqkd_core::Error| invalid(format!("attack: {e}"));
        match a.kind {
            AttackKind::None | AttackKind::PhotonSiphon if a.basis.is_some() => {
                Err(invalid("attack.basis applies only to intercept_resend and man_in_middle"))
            }
            AttackKind::None if a.siphon_fraction.is_some() => {
                Err(invalid("attack.siphon_fraction applies only to photon_siphon"))
            }
            AttackKind::InterceptResend | AttackKind::ManInMiddle if a.siphon_fraction.is_some() => {
                Err(invalid("attack.siphon_fraction applies only to photon_siphon"))
            }
            AttackKind::None => Ok(AttackConfig::none()),
            AttackKind::InterceptResend => AttackConfig::intercept_resend(basis, a.location).map_err(wrap),
            AttackKind::ManInMiddle => AttackConfig::man_in_middle(basis, a.location).map_err(wrap),
            AttackKind::PhotonSiphon => {
                let f = a
                    .siphon_fraction
                    .ok_or_else(|| invalid("attack.siphon_fraction is required for photon_siphon"))?;
                AttackConfig::photon_siphon(f, a.location).map_err(wrap)
            }
        }
    }

    /// Output directory: `override_dir`, else the configured one; relative
    /// paths resolve against `$OAMQKD_OUTPUT_ROOT` when it is set.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        let dir = override_dir.unwrap_or(&self.output.directory);
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
            _ => dir.to_path_buf(),
        }
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }
}
