//! The Gaussian-weighted norm `‖f(z) e^{|J_λ z_λ|²/4}‖_p` on a grid.

use crate::error::{Error, Result};
use crate::fields::interp::{to_complex, to_real};
use crate::fields::SampledField;
use crate::group_algebra::SymplecticSpectrum;
use serde::Serialize;

/// Inner region, as a fraction of `R_max`, used for the growth check.
pub const INNER_FRACTION: f64 = 0.75;
/// Relative increase from the inner region to the full grid counted as growth.
pub const GROWTH_TOL: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct WeightedNorm {
    pub p: f64,
    /// `ln ‖f e^{|J z|²/4}‖_p` over the full grid.
    pub log_value: f64,
    /// The norm itself, `inf` when it overflows.
    pub value: f64,
    /// `ln` of the norm restricted to radii below `0.75 R_max`.
    pub inner_log_value: f64,
    /// The norm still grows with the truncation radius; the grid value then
    /// says nothing about the untruncated integral.
    pub grows_with_r_max: bool,
}

fn log_norm(terms: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    // terms are (ln |f w|, ln quadrature weight)
    if p.is_infinite() {
        return terms.map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    }
    let items: Vec<f64> = terms.map(|(lf, lw)| p * lf + lw).collect();
    let top = items.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let sum: f64 = items.iter().map(|v| (v - top).exp()).sum();
    (top + sum.ln()) / p
}

/// Computes the weighted `L^p` norm in the log domain. `p` may be
/// `f64::INFINITY`.
pub fn weighted_norm(f: &SampledField, spec: &SymplecticSpectrum, p: f64) -> Result<WeightedNorm> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must lie in [1, inf], got {p}")));
    }
    let n = f.n();
    if spec.mu.len() != n {
        return Err(Error::DimensionMismatch(format!("spectrum of size {} for a field on C^{n}", spec.mu.len())));
    }
    let grid = &f.grid;
    let at = spec.a_mat.transpose();
    let inner_r = INNER_FRACTION * grid.r_max;
    let mut full = Vec::with_capacity(grid.len());
    let mut inner = Vec::new();
    for idx in 0..grid.len() {
        let v = f.values[idx].norm();
        if v == 0.0 {
            continue;
        }
        let z = grid.point(idx);
        let zl = to_complex(&(&at * to_real(&z)));
        let w: f64 = spec.mu.iter().zip(&zl).map(|(m, c)| m * m * c.norm_sqr()).sum::<f64>() / 4.0;
        let term = (v.ln() + w, grid.weight(idx).ln());
        full.push(term);
        if z.iter().all(|c| c.norm() <= inner_r) {
            inner.push(term);
        }
    }
    let log_value = log_norm(full.into_iter(), p);
    let inner_log_value = log_norm(inner.into_iter(), p);
    Ok(WeightedNorm {
        p,
        log_value,
        value: log_value.exp(),
        inner_log_value,
        grows_with_r_max: log_value - inner_log_value > GROWTH_TOL.ln_1p(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, PolarGrid};
    use crate::special::theta_k;
    use crate::C64;
    use nalgebra::DMatrix;

    fn unit_spec() -> SymplecticSpectrum {
        SymplecticSpectrum::from_parts(vec![1.0], DMatrix::identity(2, 2), vec![1.0])
    }

    #[test]
    fn decaying_gaussian_is_stable() {
        let g = PolarGrid::uniform(1, 48, 16, 10.0).unwrap();
        let f = sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            let w = weighted_norm(&f, &unit_spec(), p).unwrap();
            assert!(!w.grows_with_r_max, "p={p}");
            assert!(w.value.is_finite());
        }
        let g2 = PolarGrid::uniform(1, 48, 16, 14.0).unwrap();
        let f2 = sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g2).unwrap();
        let a = weighted_norm(&f, &unit_spec(), 2.0).unwrap().value;
        let b = weighted_norm(&f2, &unit_spec(), 2.0).unwrap().value;
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn slow_gaussian_diverges() {
        let g = PolarGrid::uniform(1, 48, 16, 40.0).unwrap();
        let f = sample(|z| C64::new((-z[0].norm_sqr() / 8.0).exp(), 0.0), &g).unwrap();
        let w = weighted_norm(&f, &unit_spec(), f64::INFINITY).unwrap();
        assert!(w.grows_with_r_max);
        // e^{r²/8} at r close to 40 overflows nothing in the log domain
        assert!(w.log_value > 150.0 && w.log_value.is_finite());
    }

    #[test]
    fn laguerre_weight_cancels() {
        let g = PolarGrid::uniform(1, 48, 16, 10.0).unwrap();
        let f0 = sample(|z| C64::new(theta_k(0, &[1.0], z).unwrap(), 0.0), &g).unwrap();
        let w0 = weighted_norm(&f0, &unit_spec(), f64::INFINITY).unwrap();
        assert!(w0.log_value.abs() < 1e-12);
        let f3 = sample(|z| C64::new(theta_k(3, &[1.0], z).unwrap(), 0.0), &g).unwrap();
        assert!(weighted_norm(&f3, &unit_spec(), f64::INFINITY).unwrap().grows_with_r_max);
        assert!(weighted_norm(&f3, &unit_spec(), 0.5).is_err());
    }
}
