use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::oam::{coincidence_probability, reduce_angle, SectorState};
use crate::scalar::Scalar;

/// Bob's angles `θ_B^k = θ_A − arccos(√(k/(N−1)))/ℓ`, which place the ideal
/// coincidence of symbol `k` at exactly `k/(N−1)`.
pub fn alphabet_angles<T: Scalar>(n_symbols: usize, ell: u32, theta_a: T) -> Result<Vec<T>> {
    if n_symbols < 2 {
        return invalid(format!("n_symbols must be >= 2, got {n_symbols}"));
    }
    if ell == 0 {
        return invalid("ell must be >= 1");
    }
    let top = T::from_count(n_symbols as u64 - 1);
    let l = T::from_count(u64::from(ell));
    Ok((0..n_symbols)
        .map(|k| {
            let level = T::from_count(k as u64) / top;
            theta_a - level.sqrt().acos() / l
        })
        .collect())
}

/// Alice's fixed angle and Bob's symbol-to-angle map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphabetConfig<T> {
    ell: u32,
    theta_a: T,
    theta_map: Vec<T>,
    tau: T,
}

impl<T: Scalar> AlphabetConfig<T> {
    /// Validates an explicit angle map: at least two symbols, distinct
    /// reduced angles, ideal coincidences strictly increasing with `k`.
    pub fn new(ell: u32, theta_a: T, theta_map: Vec<T>, tau: T) -> Result<Self> {
        if ell == 0 {
            return invalid("ell must be >= 1");
        }
        if theta_map.len() < 2 {
            return invalid(format!("n_symbols must be >= 2, got {}", theta_map.len()));
        }
        if !(tau.is_finite() && tau > T::zero()) {
            return invalid(format!("tau must be > 0, got {tau}"));
        }
        let cfg = Self {
            ell,
            theta_a,
            theta_map,
            tau,
        };
        let reduced: Vec<T> = cfg.theta_map.iter().map(|&t| reduce_angle(t, ell)).collect();
        for i in 0..reduced.len() {
            for j in (i + 1)..reduced.len() {
                if reduced[i] == reduced[j] {
                    return invalid(format!("symbols {i} and {j} share the same reduced angle"));
                }
            }
        }
        let levels = cfg.ideal_levels()?;
        if let Some(k) = levels.windows(2).position(|w| w[1] <= w[0]) {
            return invalid(format!(
                "ideal coincidence must increase with symbol index; symbols {k} and {} violate it",
                k + 1
            ));
        }
        Ok(cfg)
    }

    /// Equal-spacing alphabet from [`alphabet_angles`].
    pub fn standard(n_symbols: usize, ell: u32, theta_a: T, tau: T) -> Result<Self> {
        let map = alphabet_angles(n_symbols, ell, theta_a)?;
        Self::new(ell, theta_a, map, tau)
    }

    /// Three symbols at `ℓ = 1`, `θ_A = π/2`, Bob angles `{0, π/4, π/2}`, τ = 1 s.
    pub fn trit() -> Self {
        Self::standard(3, 1, T::FRAC_PI_2(), T::one()).expect("three-symbol alphabet is valid")
    }

    pub fn n_symbols(&self) -> usize {
        self.theta_map.len()
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn theta_a(&self) -> T {
        self.theta_a
    }

    pub fn theta_map(&self) -> &[T] {
        &self.theta_map
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn alice_state(&self) -> SectorState<T> {
        SectorState::new(self.ell as i32, self.theta_a).expect("validated ell")
    }

    /// Bob's SLM setting for `symbol`.
    pub fn encode(&self, symbol: usize) -> Result<SectorState<T>> {
        match self.theta_map.get(symbol) {
            Some(&theta) => SectorState::new(self.ell as i32, theta),
            None => invalid(format!(
                "symbol {symbol} out of range for a {}-symbol alphabet",
                self.n_symbols()
            )),
        }
    }

    /// `cos²(ℓ(θ_A − θ_B^k))` for every symbol.
    pub fn ideal_levels(&self) -> Result<Vec<T>> {
        let alice = self.alice_state();
        (0..self.n_symbols())
            .map(|k| coincidence_probability(&alice, &self.encode(k)?))
            .collect()
    }
}

#[cfg(test)]
// reference values are written out as printed, not as std constants
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn three_symbol_angles() {
        let a = alphabet_angles(3, 1, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(a[2], FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn two_symbol_angles() {
        let a = alphabet_angles(2, 1, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], FRAC_PI_2, epsilon = 1e-15);
        assert!(alphabet_angles(1, 1, FRAC_PI_2).is_err());
    }

    #[test]
    fn four_symbol_angles() {
        let a = alphabet_angles(4, 1, FRAC_PI_2).unwrap();
        let expected = [0.0, 0.6154797087, 0.9553166181, 1.5707963268];
        for (x, e) in a.iter().zip(expected) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-9);
        }
        let alpha = AlphabetConfig::new(1, FRAC_PI_2, a, 1.0).unwrap();
        for (k, level) in alpha.ideal_levels().unwrap().into_iter().enumerate() {
            // cos²(π/2 − θ) = sin²θ evaluated independently of the library
            let direct = alpha.theta_map()[k].sin().powi(2);
            assert_abs_diff_eq!(level, direct, epsilon = 1e-12);
            assert_abs_diff_eq!(level, k as f64 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn encode_examples() {
        let trit = AlphabetConfig::<f64>::trit();
        let s0 = trit.encode(0).unwrap();
        assert_eq!(s0.ell(), 1);
        assert_abs_diff_eq!(s0.theta(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trit.encode(2).unwrap().theta(), FRAC_PI_2, epsilon = 1e-15);
        assert!(trit.encode(3).is_err());

        let two = AlphabetConfig::standard(2, 1, FRAC_PI_2, 1.0).unwrap();
        assert_abs_diff_eq!(two.encode(1).unwrap().theta(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(AlphabetConfig::new(1, FRAC_PI_2, vec![0.0, 0.0, FRAC_PI_2], 1.0).is_err());
        // decreasing ideal coincidence
        assert!(AlphabetConfig::new(1, FRAC_PI_2, vec![FRAC_PI_2, 0.0], 1.0).is_err());
        assert!(AlphabetConfig::new(1, FRAC_PI_2, vec![0.0], 1.0).is_err());
        assert!(AlphabetConfig::new(1, FRAC_PI_2, vec![0.0, FRAC_PI_2], 0.0).is_err());
    }

    #[test]
    fn off_grid_theta_a_is_fine() {
        let a = AlphabetConfig::standard(3, 1, std::f64::consts::FRAC_PI_3, 1.0).unwrap();
        assert_eq!(a.n_symbols(), 3);
    }
}
