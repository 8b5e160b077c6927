//! Small numerical kernels shared by the diffusion and schedule code.

use statrs::function::factorial::ln_binomial;

/// Above this base offset and up to this exponent, `powi` is exact enough
/// and cheaper than the log path.
const POWI_MAX_EXP: usize = 64;
const POWI_MIN_X: f64 = 1e-3;

/// `(1 − x)^k` for `x ∈ [0, 1]`.
pub fn pow_one_minus(x: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    if k <= POWI_MAX_EXP && x >= POWI_MIN_X {
        (1.0 - x).powi(k as i32)
    } else {
        (k as f64 * (-x).ln_1p()).exp()
    }
}

/// `1 − (1 − x)^k` for `x ∈ [0, 1]`, accurate when `x` is tiny.
pub fn one_minus_pow(x: f64, k: usize) -> f64 {
    if k == 0 || x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if k <= POWI_MAX_EXP && x >= POWI_MIN_X {
        1.0 - (1.0 - x).powi(k as i32)
    } else {
        -(k as f64 * (-x).ln_1p()).exp_m1()
    }
}

/// `Bin(k; n, p)` probability mass.
pub fn binomial_pmf(k: usize, n: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n as u64, k as u64) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    ln.exp()
}
