//! Eavesdropper models injected into the physical layer, and the fringe
//! visibility statistic Alice uses to notice them.
//!
//! * Intercept-resend: Eve projects the idler onto a sector state at angle
//!   `φ` and resends `|φ⟩`, giving `cos²(ℓ(θ_A−φ))·cos²(ℓ(φ−θ_B))` per pair.
//! * Man-in-the-middle: Eve keeps the idler and forwards an unrelated
//!   `|φ⟩`; Alice's half is maximally mixed over `±ℓ`, so the pair
//!   probability is `½·cos²(ℓ(φ−θ_B))`.
//! * Photon siphon: Eve removes a fraction of the idlers. Only the channel
//!   transmittance changes; the fringe shape does not.
//!
//! Both access points (Alice to Bob, Bob to Alice) are accepted and treated
//! identically at the level of coincidence statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oam::{coincidence_probability, SectorState};
use crate::photonics::{
    mean_total, simulate_intervals, sweep_coincidences, IdealProjection, PairCoupling, Physics, SweepPoint,
};
use crate::protocol::ProtocolRunReport;
use crate::seed::{runs, SeedStream};

/// Visibility below which Alice declares an eavesdropper.
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    InterceptResend,
    ManInMiddle,
    PhotonSiphon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisStrategy {
    /// Eve draws `φ` uniformly over one period for every pair.
    UniformRandomPerPair,
    Fixed(f64),
}

/// Where Eve touches the idler: on its way to Bob, or on its way back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessPoint {
    #[default]
    Atb,
    Bta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    kind: AttackKind,
    basis: Option<BasisStrategy>,
    siphon_fraction: Option<f64>,
    location: AccessPoint,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self::none()
    }
}

impl AttackConfig {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            basis: None,
            siphon_fraction: None,
            location: AccessPoint::Atb,
        }
    }

    pub fn intercept_resend(basis: BasisStrategy, location: AccessPoint) -> Result<Self> {
        check_basis(basis)?;
        Ok(Self {
            kind: AttackKind::InterceptResend,
            basis: Some(basis),
            siphon_fraction: None,
            location,
        })
    }

    pub fn man_in_middle(basis: BasisStrategy, location: AccessPoint) -> Result<Self> {
        check_basis(basis)?;
        Ok(Self {
            kind: AttackKind::ManInMiddle,
            basis: Some(basis),
            siphon_fraction: None,
            location,
        })
    }

    pub fn photon_siphon(fraction: f64, location: AccessPoint) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return invalid(format!("siphon_fraction must lie in [0, 1), got {fraction}"));
        }
        Ok(Self {
            kind: AttackKind::PhotonSiphon,
            basis: None,
            siphon_fraction: Some(fraction),
            location,
        })
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn basis(&self) -> Option<BasisStrategy> {
        self.basis
    }

    pub fn siphon_fraction(&self) -> Option<f64> {
        self.siphon_fraction
    }

    pub fn location(&self) -> AccessPoint {
        self.location
    }

    /// Physical layer as seen under this attack: the siphon fraction lands
    /// in the channel, everything else is untouched.
    pub fn apply(&self, physics: &Physics) -> Result<Physics> {
        match self.siphon_fraction {
            Some(f) => {
                let channel = physics.channel.with_siphon(f)?;
                Ok(physics.clone().with_channel(channel))
            }
            None => Ok(physics.clone()),
        }
    }

    fn draw_phi<R: Rng + ?Sized>(&self, ell: u32, rng: &mut R) -> f64 {
        match self.basis {
            Some(BasisStrategy::Fixed(phi)) => phi,
            _ => rng.random::<f64>() * std::f64::consts::PI / f64::from(ell),
        }
    }
}

fn check_basis(basis: BasisStrategy) -> Result<()> {
    match basis {
        BasisStrategy::Fixed(phi) if !phi.is_finite() => invalid("Eve's angle must be finite"),
        _ => Ok(()),
    }
}

fn cos2(x: f64) -> f64 {
    let c = x.cos();
    c * c
}

/// Per-pair coincidence probability under `attack`.
pub fn attacked_pair_coincidence<R: Rng + ?Sized>(
    slm_a: &SectorState<f64>,
    slm_b: &SectorState<f64>,
    attack: &AttackConfig,
    rng: &mut R,
) -> Result<f64> {
    let ideal = coincidence_probability(slm_a, slm_b)?;
    let ell = slm_a.ell();
    let l = f64::from(ell);
    Ok(match attack.kind {
        AttackKind::None | AttackKind::PhotonSiphon => ideal,
        AttackKind::InterceptResend => {
            let phi = attack.draw_phi(ell, rng);
            cos2(l * (slm_a.theta() - phi)) * cos2(l * (phi - slm_b.theta()))
        }
        AttackKind::ManInMiddle => {
            let phi = attack.draw_phi(ell, rng);
            0.5 * cos2(l * (phi - slm_b.theta()))
        }
    })
}

impl PairCoupling for AttackConfig {
    fn pair_probability<R: Rng + ?Sized>(
        &self,
        slm_a: &SectorState<f64>,
        slm_b: &SectorState<f64>,
        rng: &mut R,
    ) -> Result<f64> {
        attacked_pair_coincidence(slm_a, slm_b, self, rng)
    }

    fn is_deterministic(&self) -> bool {
        !matches!(self.basis, Some(BasisStrategy::UniformRandomPerPair))
    }
}

/// `(max − min)/(max + min)` over the sweep means.
///
/// The statistic is meaningful once the sweep covers half a period with
/// eight or more points; any sweep of two or more points is accepted.
pub fn visibility_from_sweep(sweep: &[SweepPoint]) -> Result<f64> {
    if sweep.len() < 2 {
        return invalid("visibility needs at least two sweep points");
    }
    let (min, max) = sweep.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.mean_count), hi.max(p.mean_count))
    });
    if max + min <= 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub detected: bool,
    pub visibility: f64,
    pub threshold: f64,
}

pub fn detect_eavesdropping(sweep: &[SweepPoint], threshold: f64) -> Result<Detection> {
    let visibility = visibility_from_sweep(sweep)?;
    Ok(Detection {
        detected: visibility < threshold,
        visibility,
        threshold,
    })
}

/// Ratio of mean coincidence counts, attacked over baseline.
pub fn pns_count_ratio(baseline: &ProtocolRunReport, attacked: &ProtocolRunReport) -> Result<f64> {
    let base = baseline.mean_count();
    if base <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(attacked.mean_count() / base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: AttackConfig,
    pub visibility: f64,
    pub count_rate_ratio: f64,
    pub detected: bool,
    /// Always 0: none of the modeled attacks gives Eve access to the
    /// coincidence record, which is where the key lives.
    pub leaked_symbols_estimate: u64,
    pub sweep: Vec<SweepPoint>,
}

/// Sweeps Bob's angle under `attack` and compares against an unattacked
/// run on paired random streams.
#[allow(clippy::too_many_arguments)]
pub fn assess_attack(
    physics: &Physics,
    attack: &AttackConfig,
    theta_a: &SectorState<f64>,
    theta_b_grid: &[f64],
    tau: f64,
    n_per_point: usize,
    master_seed: u64,
    threshold: f64,
) -> Result<AttackReport> {
    let attacked_physics = attack.apply(physics)?;
    let sweep = sweep_coincidences(&attacked_physics, attack, theta_a, theta_b_grid, tau, n_per_point, master_seed)?;
    let detection = detect_eavesdropping(&sweep, threshold)?;

    let seeds = SeedStream::new(master_seed, runs::CALIBRATE_MAX);
    let base = simulate_intervals(physics, &IdealProjection, theta_a, theta_a, tau, n_per_point, &seeds)?;
    let hit = simulate_intervals(&attacked_physics, attack, theta_a, theta_a, tau, n_per_point, &seeds)?;
    let base_mean = mean_total(&base);
    if base_mean <= 0.0 {
        return Err(Error::UndefinedRatio);
    }

    Ok(AttackReport {
        attack: *attack,
        visibility: detection.visibility,
        count_rate_ratio: mean_total(&hit) / base_mean,
        detected: detection.detected,
        leaked_symbols_estimate: 0,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn s(theta: f64) -> SectorState<f64> {
        SectorState::new(1, theta).unwrap()
    }

    fn pt(theta_b: f64, mean_count: f64) -> SweepPoint {
        SweepPoint {
            theta_b,
            mean_count,
            std_err: 0.0,
        }
    }

    #[test]
    fn no_attack_is_ideal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = attacked_pair_coincidence(&s(FRAC_PI_2), &s(FRAC_PI_2), &AttackConfig::none(), &mut rng).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn aligned_fixed_intercept_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ir = AttackConfig::intercept_resend(BasisStrategy::Fixed(FRAC_PI_2), AccessPoint::Atb).unwrap();
        let p = attacked_pair_coincidence(&s(FRAC_PI_2), &s(FRAC_PI_2), &ir, &mut rng).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intercept_resend_uniform_expectation() {
        // ∫cos²(a−φ)cos²(φ−b)dφ/π = 1/4 + cos(2(a−b))/8, checked by Monte Carlo.
        let ir = AttackConfig::intercept_resend(BasisStrategy::UniformRandomPerPair, AccessPoint::Atb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &tb in &[0.0, 0.4, PI / 4.0, FRAC_PI_2] {
            let n = 1_000_000;
            let mean = (0..n)
                .map(|_| attacked_pair_coincidence(&s(FRAC_PI_2), &s(tb), &ir, &mut rng).unwrap())
                .sum::<f64>()
                / n as f64;
            let analytic = 0.25 + (2.0 * (FRAC_PI_2 - tb)).cos() / 8.0;
            // per-draw std ≤ 0.5 → 5 standard errors ≈ 2.5e-3
            assert!((mean - analytic).abs() < 2.5e-3, "θ_B={tb}: {mean} vs {analytic}");
        }
    }

    #[test]
    fn mitm_uniform_expectation_is_quarter() {
        let mitm = AttackConfig::man_in_middle(BasisStrategy::UniformRandomPerPair, AccessPoint::Bta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &(ta, tb) in &[(FRAC_PI_2, 0.0), (FRAC_PI_2, FRAC_PI_2), (0.3, 1.1)] {
            let n = 400_000;
            let mean = (0..n)
                .map(|_| attacked_pair_coincidence(&s(ta), &s(tb), &mitm, &mut rng).unwrap())
                .sum::<f64>()
                / n as f64;
            assert!((mean - 0.25).abs() < 2.5e-3, "{mean}");
        }
    }

    #[test]
    fn siphon_leaves_projection_alone() {
        let pns = AttackConfig::photon_siphon(0.3, AccessPoint::Bta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = attacked_pair_coincidence(&s(FRAC_PI_2), &s(PI / 4.0), &pns, &mut rng).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let phys = pns.apply(&Physics::default()).unwrap();
        assert!((phys.channel.effective() - 0.9 * 0.7).abs() < 1e-15);
        assert!(AttackConfig::photon_siphon(1.0, AccessPoint::Atb).is_err());
    }

    #[test]
    fn visibility_examples() {
        let ideal: Vec<SweepPoint> = (0..16)
            .map(|k| {
                let t = PI * k as f64 / 16.0;
                pt(t, (t - FRAC_PI_2).cos().powi(2))
            })
            .collect();
        assert!((visibility_from_sweep(&ideal).unwrap() - 1.0).abs() < 1e-12);

        let ir: Vec<SweepPoint> = (0..16)
            .map(|k| {
                let t = PI * k as f64 / 16.0;
                pt(t, 0.25 + (2.0 * (FRAC_PI_2 - t)).cos() / 8.0)
            })
            .collect();
        assert!((visibility_from_sweep(&ir).unwrap() - 0.5).abs() < 1e-12);

        let flat: Vec<SweepPoint> = (0..8).map(|k| pt(k as f64, 3.0)).collect();
        assert_eq!(visibility_from_sweep(&flat).unwrap(), 0.0);

        let dark: Vec<SweepPoint> = (0..8).map(|k| pt(k as f64, 0.0)).collect();
        assert_eq!(visibility_from_sweep(&dark), Err(Error::UndefinedVisibility));
        assert!(detect_eavesdropping(&dark, 0.75).is_err());
    }

    #[test]
    fn detection_threshold() {
        let sweep = [pt(0.0, 1.0), pt(1.0, 3.0)];
        let d = detect_eavesdropping(&sweep, DEFAULT_DETECTION_THRESHOLD).unwrap();
        assert!(d.detected);
        assert!((d.visibility - 0.5).abs() < 1e-15);
        let d = detect_eavesdropping(&[pt(0.0, 0.0), pt(1.0, 3.0)], DEFAULT_DETECTION_THRESHOLD).unwrap();
        assert!(!d.detected);
    }

    #[test]
    fn ir_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..50 {
            let phi = k as f64 * 0.13;
            let ir = AttackConfig::intercept_resend(BasisStrategy::Fixed(phi), AccessPoint::Atb).unwrap();
            let (a, b) = (s(0.2 * k as f64), s(0.37 * k as f64));
            let p = attacked_pair_coincidence(&a, &b, &ir, &mut rng).unwrap();
            let bound = cos2(a.theta() - phi).min(cos2(phi - b.theta()));
            assert!((0.0..=1.0).contains(&p) && p <= bound + 1e-15);
        }
    }

    #[test]
    fn assess_reports_zero_leakage() {
        let grid = crate::photonics::period_grid(8, 1);
        let r = assess_attack(
            &Physics::default(),
            &AttackConfig::none(),
            &s(FRAC_PI_2),
            &grid,
            1.0,
            10,
            3,
            DEFAULT_DETECTION_THRESHOLD,
        )
        .unwrap();
        assert_eq!(r.leaked_symbols_estimate, 0);
        assert!(!r.detected);
        assert_eq!(r.count_rate_ratio, 1.0);
    }
}
