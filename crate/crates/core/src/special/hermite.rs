//! Normalized Hermite functions and the scaled eigenfunctions of the
//! elliptic Hermite operator.

use crate::error::{Error, Result};

/// Largest degree for which the normalized recurrence is documented to be stable.
pub const HERMITE_MAX_DEGREE: usize = 200;

/// `π^{-1/4}`, the value of `h_0(0)`.
pub const PI_POW_MINUS_QUARTER: f64 = 0.751_125_544_464_942_5;

fn check_degree(k: usize) -> Result<()> {
    if k > HERMITE_MAX_DEGREE {
        return Err(Error::RangeExceeded {
            what: "Hermite degree",
            value: k as f64,
            max: HERMITE_MAX_DEGREE as f64,
        });
    }
    Ok(())
}

/// All normalized Hermite functions `h_0(x), …, h_k(x)`.
///
/// Uses `h_{j+1} = sqrt(2/(j+1)) x h_j - sqrt(j/(j+1)) h_{j-1}`, which never
/// forms the raw polynomials.
pub fn hermite_functions(k: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(k)?;
    let mut out = Vec::with_capacity(k + 1);
    let h0 = PI_POW_MINUS_QUARTER * (-0.5 * x * x).exp();
    out.push(h0);
    if k == 0 {
        return Ok(out);
    }
    out.push(std::f64::consts::SQRT_2 * x * h0);
    for j in 1..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    Ok(out)
}

/// The L²(ℝ)-normalized Hermite function `h_k(x) = (2^k k! √π)^{-1/2} H_k(x) e^{-x²/2}`.
pub fn hermite_h(k: usize, x: f64) -> Result<f64> {
    Ok(hermite_functions(k, x)?[k])
}

/// `Ψ_α^{λ'}(x) = Π_j λ'_j^{1/4} h_{α_j}(sqrt(λ'_j) x_j)`.
pub fn psi_alpha(alpha: &[usize], lambda_prime: &[f64], x: &[f64]) -> Result<f64> {
    if alpha.len() != lambda_prime.len() || alpha.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "psi_alpha: |alpha| = {}, |lambda'| = {}, |x| = {}",
            alpha.len(),
            lambda_prime.len(),
            x.len()
        )));
    }
    crate::special::check_lambda_prime(lambda_prime)?;
    let mut prod = 1.0;
    for ((&a, &lam), &xj) in alpha.iter().zip(lambda_prime).zip(x) {
        prod *= lam.powf(0.25) * hermite_h(a, lam.sqrt() * xj)?;
    }
    Ok(prod)
}
