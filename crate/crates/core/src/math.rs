//! Small numeric helpers shared by the likelihood code.

/// `x * ln(p)` with the convention `0 * ln(0) = 0`.
#[inline]
pub fn xlogp(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * p.ln()
    }
}

/// Log-probability of a single Bernoulli outcome.
///
/// Returns `-inf` when the outcome has probability zero.
#[inline]
pub fn bernoulli_ln(present: bool, p: f64) -> f64 {
    if present {
        xlogp(1.0, p)
    } else {
        xlogp(1.0, 1.0 - p)
    }
}

/// `p ln p + (1 - p) ln(1 - p)`, i.e. minus the Bernoulli entropy.
#[inline]
pub fn neg_entropy(p: f64) -> f64 {
    xlogp(p, p) + xlogp(1.0 - p, 1.0 - p)
}

/// Numerically stable `ln(sum(exp(x)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_log_zero_is_zero() {
        assert_eq!(xlogp(0.0, 0.0), 0.0);
        assert_eq!(neg_entropy(0.0), 0.0);
        assert_eq!(neg_entropy(1.0), 0.0);
        assert_eq!(bernoulli_ln(true, 0.0), f64::NEG_INFINITY);
        assert_eq!(bernoulli_ln(false, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp(&[0.0, f64::NEG_INFINITY]) - 0.0).abs() < 1e-15);
    }
}
