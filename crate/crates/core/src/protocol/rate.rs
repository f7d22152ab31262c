use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRate<T> {
    pub symbols_per_second: T,
    pub bits_per_second: T,
}

/// One symbol per interval, `log2(N)` bits per symbol.
pub fn key_rate<T: Scalar>(tau: T, n_symbols: usize) -> Result<KeyRate<T>> {
    if !(tau.is_finite() && tau > T::zero()) {
        return invalid(format!("tau must be > 0, got {tau}"));
    }
    if n_symbols < 2 {
        return invalid(format!("n_symbols must be >= 2, got {n_symbols}"));
    }
    let symbols_per_second = T::one() / tau;
    Ok(KeyRate {
        symbols_per_second,
        bits_per_second: T::from_count(n_symbols as u64).log2() * symbols_per_second,
    })
}

/// Key rate when each symbol needs `counts_per_symbol` coincidences and the
/// source delivers `coincidence_rate` coincidences per second.
pub fn key_rate_from_coincidence_rate<T: Scalar>(
    coincidence_rate: T,
    counts_per_symbol: T,
    n_symbols: usize,
) -> Result<KeyRate<T>> {
    if !(coincidence_rate.is_finite() && coincidence_rate > T::zero()) {
        return invalid("coincidence rate must be > 0");
    }
    if !(counts_per_symbol.is_finite() && counts_per_symbol > T::zero()) {
        return invalid("counts per symbol must be > 0");
    }
    key_rate(counts_per_symbol / coincidence_rate, n_symbols)
}
