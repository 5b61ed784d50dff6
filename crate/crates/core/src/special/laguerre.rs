//! Laguerre polynomials and the Laguerre functions `φ_k^{n-1}` and `θ_{k,λ'}`.

use crate::error::{Error, Result};
use crate::C64;

pub const LAGUERRE_MAX_DEGREE: usize = 500;

fn check_degree(k: usize) -> Result<()> {
    if k > LAGUERRE_MAX_DEGREE {
        return Err(Error::RangeExceeded {
            what: "Laguerre degree",
            value: k as f64,
            max: LAGUERRE_MAX_DEGREE as f64,
        });
    }
    Ok(())
}

/// Runs the three-term recurrence in `k` starting from `L_0 = seed`.
///
/// The recurrence is linear, so seeding with `e^{-x/2}` yields the
/// Laguerre functions without ever forming the (possibly huge) polynomial.
fn recurrence(k: usize, a: f64, x: f64, seed: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(seed);
    if k == 0 {
        return out;
    }
    out.push((1.0 + a - x) * seed);
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * out[j] - (jf + a) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `L_k^a(x)` by the three-term recurrence.
pub fn laguerre_l(k: usize, a: usize, x: f64) -> Result<f64> {
    check_degree(k)?;
    Ok(recurrence(k, a as f64, x, 1.0)[k])
}

/// `L_0^a(x), …, L_k^a(x)`.
pub fn laguerre_all(k: usize, a: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(k)?;
    Ok(recurrence(k, a as f64, x, 1.0))
}

/// `L_k^a(x) e^{-x/2}` for every degree up to `k`.
pub fn laguerre_functions(k: usize, a: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(k)?;
    Ok(recurrence(k, a as f64, x, (-0.5 * x).exp()))
}

/// `L_k^a(x) e^{-x/2}`.
pub fn laguerre_function(k: usize, a: usize, x: f64) -> Result<f64> {
    Ok(laguerre_functions(k, a, x)?[k])
}

/// Generalized Laguerre with real type parameter, unscaled. Used by the
/// special Hermite closed form where the type is `|j - k|`.
pub(crate) fn laguerre_function_real_type(k: usize, a: f64, x: f64) -> f64 {
    recurrence(k, a, x, (-0.5 * x).exp())[k]
}

fn norm_sq(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum()
}

/// The Laguerre function on ℂⁿ: `φ_k^{n-1}(z) = L_k^{n-1}(|z|²/2) e^{-|z|²/4}`.
pub fn phi_k(k: usize, n: usize, z: &[C64]) -> Result<f64> {
    if n == 0 || z.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "phi_k: n = {n}, |z| = {}",
            z.len()
        )));
    }
    laguerre_function(k, n - 1, norm_sq(z) / 2.0)
}

/// `θ_{k,λ'}(z) = φ_k^{n-1}(sqrt(λ'_1) z_1, …, sqrt(λ'_n) z_n)`.
pub fn theta_k(k: usize, lambda_prime: &[f64], z: &[C64]) -> Result<f64> {
    let n = lambda_prime.len();
    if n == 0 || z.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "theta_k: |lambda'| = {n}, |z| = {}",
            z.len()
        )));
    }
    crate::special::check_lambda_prime(lambda_prime)?;
    let s: f64 = lambda_prime
        .iter()
        .zip(z)
        .map(|(l, w)| l * w.norm_sqr())
        .sum();
    laguerre_function(k, n - 1, s / 2.0)
}

/// Value of `θ_{k,λ'}` on the sphere `|w| = r` when `λ'` is isotropic.
pub fn theta_radial(k: usize, n: usize, lambda: f64, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda' must be positive, got {lambda}"
        )));
    }
    laguerre_function(k, n - 1, lambda * r * r / 2.0)
}

/// `k!(n-1)!/(k+n-1)!`, the Heisenberg spherical-mean constant.
pub fn mean_constant(k: usize, n: usize) -> f64 {
    // 1 / binomial(k+n-1, k)
    let mut c = 1.0;
    for j in 1..n {
        c *= j as f64 / (k + j) as f64;
    }
    c
}

/// `binomial(k + a, k)`, the value `L_k^a(0)`.
pub fn binomial(top: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c = c * (top - j) as f64 / (j + 1) as f64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(laguerre_l(0, 3, 7.5).unwrap(), 1.0);
        assert_eq!(laguerre_l(1, 0, 1.0).unwrap(), 0.0);
        assert!((laguerre_l(2, 1, 0.0).unwrap() - 3.0).abs() < 1e-15);
        // L_2^0 = (x² − 4x + 2)/2
        let x: f64 = 0.37;
        assert!((laguerre_l(2, 0, x).unwrap() - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin_is_binomial() {
        for a in 0..4 {
            for k in 0..=20 {
                let v = laguerre_l(k, a, 0.0).unwrap();
                assert_eq!(v, binomial(k + a, k), "k={k} a={a}");
            }
        }
    }

    #[test]
    fn phi_and_theta() {
        use num_complex::Complex64 as C;
        assert_eq!(phi_k(0, 1, &[C::new(0.0, 0.0)]).unwrap(), 1.0);
        let z = [C::new(std::f64::consts::SQRT_2, 0.0)];
        assert!(phi_k(1, 1, &z).unwrap().abs() < 1e-15);
        assert!(theta_k(1, &[1.0], &z).unwrap().abs() < 1e-15);
        for k in 0..6 {
            let v = theta_k(k, &[1.0, 2.0], &[C::new(0.0, 0.0); 2]).unwrap();
            assert!((v - binomial(k + 1, k)).abs() < 1e-12);
        }
        // λ' = (1, 4), z = (1, 1/2) collapses to the isotropic point (1, 1).
        let a = theta_k(3, &[1.0, 4.0], &[C::new(1.0, 0.0), C::new(0.5, 0.0)]).unwrap();
        let b = phi_k(3, 2, &[C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(theta_k(1, &[0.0], &z).is_err());
    }

    #[test]
    fn mean_constant_values() {
        assert_eq!(mean_constant(5, 1), 1.0);
        assert!((mean_constant(2, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((mean_constant(3, 3) - 1.0 / 10.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn recurrence_consistency(k in 1usize..50, a in 0usize..3, x in 0.0f64..50.0) {
            let l = laguerre_all(k + 1, a, x).unwrap();
            let kf = k as f64;
            let lhs = (kf + 1.0) * l[k + 1];
            let rhs = (2.0 * kf + a as f64 + 1.0 - x) * l[k] - (kf + a as f64) * l[k - 1];
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
            // derivative identity d/dx L_k^a = −L_{k−1}^{a+1}, checked by central differences
            let h = 1e-6;
            let d = (laguerre_l(k, a, x + h).unwrap() - laguerre_l(k, a, x - h).unwrap()) / (2.0 * h);
            let e = -laguerre_l(k - 1, a + 1, x).unwrap();
            prop_assert!((d - e).abs() <= 1e-5 * (1.0 + e.abs()));
        }
    }
}
