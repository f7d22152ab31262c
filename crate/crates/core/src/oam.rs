//! State-vector mathematics for OAM sector states and entangled pairs.
//!
//! A sector state `|θ_ℓ⟩` is the equal superposition of `|+ℓ⟩` and `|−ℓ⟩`
//! with relative phase `e^{2iℓθ}`. Projecting both photons of an
//! `ℓ ↔ −ℓ` entangled pair onto sector states gives a coincidence rate
//! proportional to `cos²(ℓ(θ_A − θ_B))`; [`coincidence_probability`] is that
//! closed form (peak normalized to 1) and [`joint_projection_probability`]
//! evaluates the overlap explicitly, mode by mode.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Truncation bound used by [`BiphotonState::sector_pair`] when none is given.
pub const DEFAULT_LMAX: u32 = 8;

/// Sparse, normalized amplitudes indexed by OAM mode number.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes<T> {
    entries: BTreeMap<i32, Complex<T>>,
}

impl<T: Scalar> ModeAmplitudes<T> {
    /// Builds a normalized amplitude map. Duplicate mode numbers and
    /// non-normalized input are rejected.
    pub fn new(entries: impl IntoIterator<Item = (i32, Complex<T>)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (mode, amp) in entries {
            if map.insert(mode, amp).is_some() {
                return invalid(format!("duplicate mode number {mode}"));
            }
        }
        let out = Self { entries: map };
        let norm = out.norm_sqr_sum();
        if (norm - T::one()).abs() > T::norm_tolerance() {
            return invalid(format!("amplitudes not normalized: sum |c|^2 = {norm}"));
        }
        Ok(out)
    }

    /// Amplitude of mode `ell`, zero when absent.
    pub fn get(&self, ell: i32) -> Complex<T> {
        self.entries.get(&ell).copied().unwrap_or_else(Complex::default)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex<T>)> + '_ {
        self.entries.iter().map(|(&m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr_sum(&self) -> T {
        self.entries
            .values()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// Reduces `theta` into `[0, π/ell)`, the period of the coincidence law.
///
/// `ell` must be at least 1; callers holding a [`SectorState`] already have
/// that guarantee.
pub fn reduce_angle<T: Scalar>(theta: T, ell: u32) -> T {
    debug_assert!(ell >= 1);
    let period = T::PI() / T::from_count(u64::from(ell.max(1)));
    let mut r = theta % period;
    if r < T::zero() {
        r = r + period;
    }
    if r >= period {
        r = T::zero();
    }
    r
}

fn checked_ell(ell: i32) -> Result<u32> {
    if ell < 1 {
        return invalid(format!("ell must be >= 1, got {ell}"));
    }
    Ok(ell as u32)
}

/// Sector state: OAM magnitude plus orientation angle, stored reduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorState<T> {
    ell: u32,
    theta: T,
}

impl<T: Scalar> SectorState<T> {
    pub fn new(ell: i32, theta: T) -> Result<Self> {
        let ell = checked_ell(ell)?;
        if !theta.is_finite() {
            return invalid("sector angle must be finite");
        }
        Ok(Self {
            ell,
            theta: reduce_angle(theta, ell),
        })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Orientation angle in `[0, π/ell)`.
    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn amplitudes(&self) -> ModeAmplitudes<T> {
        sector_amplitudes(self.ell, self.theta)
    }
}

fn sector_amplitudes<T: Scalar>(ell: u32, theta: T) -> ModeAmplitudes<T> {
    let l = T::from_count(u64::from(ell));
    let half = T::FRAC_1_SQRT_2();
    let plus = Complex::from_polar(half, l * theta);
    let minus = Complex::from_polar(half, -(l * theta));
    let mut entries = BTreeMap::new();
    entries.insert(ell as i32, plus);
    entries.insert(-(ell as i32), minus);
    ModeAmplitudes { entries }
}

/// Amplitudes `e^{+iℓθ}/√2` at `+ℓ` and `e^{−iℓθ}/√2` at `−ℓ`.
pub fn sector_superposition<T: Scalar>(ell: i32, theta: T) -> Result<ModeAmplitudes<T>> {
    let ell = checked_ell(ell)?;
    Ok(sector_amplitudes(ell, theta))
}

/// Closed-form coincidence probability `cos²(ℓ(θ_A − θ_B))`, peak 1.
pub fn coincidence_probability<T: Scalar>(a: &SectorState<T>, b: &SectorState<T>) -> Result<T> {
    if a.ell != b.ell {
        return invalid(format!("mismatched ell: {} vs {}", a.ell, b.ell));
    }
    let l = T::from_count(u64::from(a.ell));
    let c = (l * (a.theta - b.theta)).cos();
    Ok((c * c).min(T::one()))
}

/// Entangled pair `Σ c_ℓ |+ℓ⟩_s |−ℓ⟩_i`, truncated at `|ℓ| ≤ lmax`.
///
/// Entry `(ℓ, c_ℓ)` stands for signal mode `+ℓ` paired with idler mode `−ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonState<T> {
    modes: Vec<(i32, Complex<T>)>,
    lmax: u32,
}

impl<T: Scalar> BiphotonState<T> {
    pub fn new(modes: Vec<(i32, Complex<T>)>, lmax: u32) -> Result<Self> {
        if let Some(&(ell, _)) = modes.iter().find(|(ell, _)| ell.unsigned_abs() > lmax) {
            return invalid(format!("mode {ell} exceeds lmax {lmax}"));
        }
        // Validates duplicates and normalization.
        ModeAmplitudes::new(modes.iter().copied())?;
        Ok(Self { modes, lmax })
    }

    /// Equal-weight pair restricted to `ℓ = ±ell`.
    pub fn sector_pair(ell: i32, lmax: u32) -> Result<Self> {
        let ell_u = checked_ell(ell)?;
        if ell_u > lmax {
            return invalid(format!("ell {ell} exceeds lmax {lmax}"));
        }
        let w = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new(vec![(ell, w), (-ell, w)], lmax)
    }

    /// Builds a pair from real mode weights (renormalized), e.g. a spiral spectrum.
    pub fn from_weights(weights: &[(i32, T)], lmax: u32) -> Result<Self> {
        let total = weights.iter().fold(T::zero(), |acc, &(_, w)| acc + w * w);
        if total <= T::zero() || !total.is_finite() {
            return invalid("mode weights must have positive finite norm");
        }
        let scale = total.sqrt();
        let modes = weights
            .iter()
            .map(|&(ell, w)| (ell, Complex::new(w / scale, T::zero())))
            .collect();
        Self::new(modes, lmax)
    }

    pub fn modes(&self) -> &[(i32, Complex<T>)] {
        &self.modes
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    /// Probability `|c_ℓ|²` of generating the pair in mode `ell`.
    pub fn mode_probability(&self, ell: i32) -> T {
        self.modes
            .iter()
            .filter(|(m, _)| *m == ell)
            .fold(T::zero(), |acc, (_, c)| acc + c.norm_sqr())
    }

    /// True when both `+ell` and `−ell` carry weight.
    pub fn supports(&self, ell: u32) -> bool {
        let ell = ell as i32;
        self.mode_probability(ell) > T::zero() && self.mode_probability(-ell) > T::zero()
    }
}

impl Default for BiphotonState<f64> {
    fn default() -> Self {
        Self::sector_pair(1, DEFAULT_LMAX).expect("ell 1 within default lmax")
    }
}

/// `|⟨θ_A|⟨θ_B|Ψ⟩|²` summed explicitly over the pair's truncated modes.
///
/// Modes of `psi` outside `±ℓ` contribute nothing; a pair lacking them
/// yields 0.
pub fn joint_projection_probability<T: Scalar>(
    psi: &BiphotonState<T>,
    a: &SectorState<T>,
    b: &SectorState<T>,
) -> Result<T> {
    if a.ell != b.ell {
        return invalid(format!("mismatched ell: {} vs {}", a.ell, b.ell));
    }
    let bra_a = a.amplitudes();
    let bra_b = b.amplitudes();
    let overlap = psi
        .modes
        .iter()
        .fold(Complex::<T>::default(), |acc, &(ell, weight)| {
            acc + weight * bra_a.get(ell).conj() * bra_b.get(-ell).conj()
        });
    Ok(overlap.norm_sqr())
}
