//! Special functions: Hermite, Laguerre, special Hermite, Bessel and zero tables.

pub mod bessel;
pub mod hermite;
pub mod laguerre;
pub mod special_hermite;
pub mod zeros;

pub use bessel::{bessel_j, bessel_j_orders};
pub use hermite::{hermite_functions, hermite_h, psi_alpha};
pub use laguerre::{
    binomial, laguerre_all, laguerre_function, laguerre_functions, laguerre_l, mean_constant,
    phi_k, theta_k, theta_radial,
};
pub use special_hermite::{psi_alpha_beta, special_hermite_1d};
pub use zeros::{bessel_zeros, laguerre_zeros, BesselZeroTable, LaguerreZeroTable};

use crate::error::{Error, Result};

/// Rejects empty, non-finite or non-positive `λ'`.
pub fn check_lambda_prime(lambda_prime: &[f64]) -> Result<()> {
    if lambda_prime.is_empty() {
        return Err(Error::DimensionMismatch("lambda' is empty".into()));
    }
    for (j, &l) in lambda_prime.iter().enumerate() {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda'[{j}] = {l} must be a positive finite number"
            )));
        }
    }
    Ok(())
}

/// `ln k!` for small `k`, summed directly.
pub(crate) fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Every multi-index of length `n` with entries summing to `k`, in
/// lexicographic order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=k {
            prefix.push(a);
            rec(n - 1, k - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, k, &mut Vec::with_capacity(n), &mut out);
    }
    out
}
