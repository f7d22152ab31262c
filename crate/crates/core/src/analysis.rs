//! Statistics over simulation output: histograms, per-cluster Gaussian
//! moments and the linear least-squares cos² fringe fit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<T> {
    pub bin_edges: Vec<T>,
    pub counts: Vec<u64>,
}

impl<T: Scalar> Histogram<T> {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts divided by the total; the plot-ready "probability" axis.
    pub fn frequencies(&self) -> Vec<T> {
        let total = T::from_count(self.total().max(1));
        self.counts.iter().map(|&c| T::from_count(c) / total).collect()
    }

    /// Index of the most populated bin (first on ties).
    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Equal-width bins over `[min, max]`; the last bin is closed on the right.
///
/// When every value is identical the range is widened by a few ulps and a
/// single bin holds everything, whatever `n_bins` says.
pub fn histogram<T: Scalar>(values: &[T], n_bins: usize) -> Result<Histogram<T>> {
    if values.is_empty() {
        return invalid("histogram of empty input");
    }
    if n_bins == 0 {
        return invalid("histogram needs at least one bin");
    }
    if values.iter().any(|v| !v.is_finite()) {
        return invalid("histogram input contains non-finite values");
    }
    let (min, max) = values
        .iter()
        .fold((values[0], values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    if max <= min {
        let pad = T::epsilon() * min.abs().max(T::one());
        return Ok(Histogram {
            bin_edges: vec![min - pad, max + pad],
            counts: vec![values.len() as u64],
        });
    }

    let n = T::from_count(n_bins as u64);
    let width = (max - min) / n;
    let mut bin_edges: Vec<T> = (0..n_bins)
        .map(|k| min + width * T::from_count(k as u64))
        .collect();
    bin_edges.push(max);

    let mut counts = vec![0u64; n_bins];
    for &v in values {
        let idx = ((v - min) / width).floor().to_usize().unwrap_or(0).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { bin_edges, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit<T> {
    pub mu: T,
    pub sigma: T,
    pub n_samples: usize,
}

/// Moment fit: sample mean and unbiased sample standard deviation.
pub fn fit_gaussian<T: Scalar>(samples: &[T]) -> Result<GaussianFit<T>> {
    if samples.len() < 2 {
        return invalid(format!("Gaussian fit needs >= 2 samples, got {}", samples.len()));
    }
    let n = T::from_count(samples.len() as u64);
    let mu = samples.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    let ss = samples
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mu) * (x - mu));
    let sigma = (ss / (n - T::one())).sqrt();
    Ok(GaussianFit {
        mu,
        sigma,
        n_samples: samples.len(),
    })
}

/// Fitted fringe `amplitude·cos²(ℓ(θ − phase)) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosSquaredFit<T> {
    pub amplitude: T,
    /// Reduced into `[0, π/ℓ)`.
    pub phase: T,
    pub offset: T,
    pub r_squared: T,
    pub ell: u32,
}

impl<T: Scalar> CosSquaredFit<T> {
    pub fn eval(&self, theta: T) -> T {
        let c = (T::from_count(u64::from(self.ell)) * (theta - self.phase)).cos();
        self.amplitude * c * c + self.offset
    }

    /// `(max − min)/(max + min)` of the fitted curve.
    pub fn visibility(&self) -> T {
        // amplitude is non-negative by construction
        let lo = self.offset;
        let hi = self.offset + self.amplitude;
        let denom = hi + lo;
        if denom <= T::zero() {
            T::zero()
        } else {
            (hi - lo) / denom
        }
    }
}

/// Coefficients of `a + b·cos(2ℓθ) + c·sin(2ℓθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleAngleCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> DoubleAngleCoefficients<T> {
    pub fn eval(&self, theta: T, ell: u32) -> T {
        let x = T::lit(2.0) * T::from_count(u64::from(ell)) * theta;
        self.a + self.b * x.cos() + self.c * x.sin()
    }
}

/// Solves the 3×3 system in place with partial pivoting. `None` when the
/// system is numerically singular relative to `scale`.
fn solve3<T: Scalar>(mut m: [[T; 3]; 3], mut rhs: [T; 3], scale: T) -> Option<[T; 3]> {
    let tol = scale * T::epsilon() * T::lit(64.0);
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() <= tol {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (dst, &src) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                *dst = *dst - f * src;
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..3 {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Exact linear least squares on the double-angle basis.
pub fn fit_double_angle<T: Scalar>(points: &[(T, T)], ell: u32) -> Result<DoubleAngleCoefficients<T>> {
    if ell == 0 {
        return invalid("ell must be >= 1");
    }
    if points.len() < 3 {
        return Err(Error::FitFailure(format!(
            "need at least 3 points for 3 coefficients, got {}",
            points.len()
        )));
    }
    let two_l = T::lit(2.0) * T::from_count(u64::from(ell));
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for &(theta, y) in points {
        let x = two_l * theta;
        let row = [T::one(), x.cos(), x.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            atb[i] = atb[i] + row[i] * y;
        }
    }
    let scale = T::from_count(points.len() as u64);
    let [a, b, c] = solve3(ata, atb, scale)
        .ok_or_else(|| Error::FitFailure("rank-deficient design: angles do not span the fringe".into()))?;
    Ok(DoubleAngleCoefficients { a, b, c })
}

/// Least-squares fit of `amplitude·cos²(ℓ(θ − phase)) + offset`.
///
/// Uses `amplitude = 2√(b²+c²)`, `phase = atan2(c, b)/(2ℓ)` and
/// `offset = a − √(b²+c²)` from [`fit_double_angle`]. When both the residual
/// and the total variance vanish, `r_squared` is 1.
pub fn fit_cos_squared<T: Scalar>(points: &[(T, T)], ell: u32) -> Result<CosSquaredFit<T>> {
    if points.len() < 4 {
        return Err(Error::FitFailure(format!(
            "cos² fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let coef = fit_double_angle(points, ell)?;
    let rho = (coef.b * coef.b + coef.c * coef.c).sqrt();
    let two_l = T::lit(2.0) * T::from_count(u64::from(ell));
    let phase = crate::oam::reduce_angle(coef.c.atan2(coef.b) / two_l, ell);

    let n = T::from_count(points.len() as u64);
    let mean = points.iter().fold(T::zero(), |acc, &(_, y)| acc + y) / n;
    let (ss_res, ss_tot) = points.iter().fold((T::zero(), T::zero()), |(r, t), &(theta, y)| {
        let e = y - coef.eval(theta, ell);
        (r + e * e, t + (y - mean) * (y - mean))
    });
    let magnitude = points.iter().fold(T::zero(), |acc, &(_, y)| acc + y * y);
    let tiny = T::epsilon() * T::lit(1e3) * magnitude.max(T::min_positive_value());
    let r_squared = if ss_tot <= tiny {
        if ss_res <= tiny {
            T::one()
        } else {
            T::zero()
        }
    } else {
        (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one())
    };

    Ok(CosSquaredFit {
        amplitude: T::lit(2.0) * rho,
        phase,
        offset: coef.a - rho,
        r_squared,
        ell,
    })
}
