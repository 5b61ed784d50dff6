//! Zero tables for Laguerre polynomials and Bessel functions.

use super::bessel::{bessel_j, bessel_j_derivative};
use super::laguerre::{laguerre_function, laguerre_l};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

pub const LAGUERRE_ZERO_MAX_DEGREE: usize = 200;
pub const BESSEL_ZERO_MAX_COUNT: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreZeroTable {
    pub degree: usize,
    pub type_a: usize,
    pub zeros: Vec<f64>,
    /// `|L_k^a(x)| e^{-x/2}` at each zero.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselZeroTable {
    pub order: usize,
    pub zeros: Vec<f64>,
    pub residuals: Vec<f64>,
}

fn write_csv<W: Write>(out: W, zeros: &[f64], residuals: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "zero", "residual"])
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for (i, (z, r)) in zeros.iter().zip(residuals).enumerate() {
        w.write_record([
            (i + 1).to_string(),
            format!("{z:.17e}"),
            format!("{r:.3e}"),
        ])
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

impl LaguerreZeroTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.zeros, &self.residuals)
    }

    /// Checks the sign alternation of `L_k^a` between consecutive zeros.
    pub fn sign_changes_verified(&self) -> bool {
        let k = self.degree;
        let a = self.type_a;
        let mut probes = Vec::with_capacity(k + 1);
        probes.push(self.zeros.first().map_or(0.0, |z| z / 2.0));
        for w in self.zeros.windows(2) {
            probes.push(0.5 * (w[0] + w[1]));
        }
        if let Some(&last) = self.zeros.last() {
            probes.push(last + 1.0);
        }
        let vals: Vec<f64> = probes
            .iter()
            .map(|&x| laguerre_function(k, a, x).unwrap_or(f64::NAN))
            .collect();
        vals.windows(2).all(|w| w[0] * w[1] < 0.0)
    }
}

impl BesselZeroTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.zeros, &self.residuals)
    }
}

/// All `k` roots of `L_k^a`, ascending.
///
/// Eigenvalues of the symmetric Jacobi matrix (diagonal `2i + a + 1`,
/// off-diagonal `-sqrt(i(i + a))`), then a Newton step using
/// `d/dx L_k^a = -L_{k-1}^{a+1}`.
pub fn laguerre_zeros(k: usize, a: usize) -> Result<LaguerreZeroTable> {
    if k > LAGUERRE_ZERO_MAX_DEGREE {
        return Err(Error::RangeExceeded {
            what: "Laguerre zero degree",
            value: k as f64,
            max: LAGUERRE_ZERO_MAX_DEGREE as f64,
        });
    }
    if k == 0 {
        return Ok(LaguerreZeroTable {
            degree: 0,
            type_a: a,
            zeros: Vec::new(),
            residuals: Vec::new(),
        });
    }
    let af = a as f64;
    let mut jac = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        jac[(i, i)] = 2.0 * i as f64 + af + 1.0;
        if i + 1 < k {
            let off = -(((i + 1) as f64) * ((i + 1) as f64 + af)).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::try_new(jac, 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence(format!("Jacobi matrix eigenvalues, k = {k}")))?;
    let mut zeros: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    zeros.sort_by(|x, y| x.total_cmp(y));
    for x in zeros.iter_mut() {
        let l = laguerre_function(k, a, *x)?;
        let d = -laguerre_function(k - 1, a + 1, *x)?;
        if d != 0.0 {
            let step = l / d;
            if step.abs() < 1e-3 * x.abs().max(1.0) {
                *x -= step;
            }
        }
    }
    let residuals = zeros
        .iter()
        .map(|&x| laguerre_function(k, a, x).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    if zeros.windows(2).any(|w| w[1] <= w[0]) || zeros[0] <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "Laguerre zeros of degree {k} are not strictly increasing and positive"
        )));
    }
    Ok(LaguerreZeroTable {
        degree: k,
        type_a: a,
        zeros,
        residuals,
    })
}

/// Raw polynomial residual `|L_k^a(x)|`; meaningful only for small `k`
/// where the polynomial values stay moderate.
pub fn laguerre_raw_residual(k: usize, a: usize, x: f64) -> Result<f64> {
    Ok(laguerre_l(k, a, x)?.abs())
}

fn bisect_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    for _ in 0..200 {
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = df(x)?;
        if d == 0.0 {
            break;
        }
        let next = x - f(x)? / d;
        if !(lo - 1e-9..=hi + 1e-9).contains(&next) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// First `count` positive zeros of `J_ν`.
///
/// Sign changes are bracketed on a grid of step π/4, then refined by
/// bisection and Newton.
pub fn bessel_zeros(nu: usize, count: usize) -> Result<BesselZeroTable> {
    if count == 0 || count > BESSEL_ZERO_MAX_COUNT {
        return Err(Error::RangeExceeded {
            what: "Bessel zero count",
            value: count as f64,
            max: BESSEL_ZERO_MAX_COUNT as f64,
        });
    }
    let f = |x: f64| bessel_j(nu, x);
    let df = |x: f64| bessel_j_derivative(nu, x);
    let step = PI / 4.0;
    // J_ν has no zeros in (0, ν]
    let mut lo = (nu as f64).max(step);
    let mut flo = f(lo)?;
    let mut zeros = Vec::with_capacity(count);
    let limit = lo + (count as f64 + nu as f64 + 10.0) * PI * 2.0;
    while zeros.len() < count {
        let hi = lo + step;
        if hi > limit {
            return Err(Error::NonConvergence(format!(
                "found only {} zeros of J_{nu}",
                zeros.len()
            )));
        }
        let fhi = f(hi)?;
        if flo == 0.0 {
            zeros.push(lo);
        } else if flo * fhi < 0.0 {
            zeros.push(bisect_newton(f, df, lo, hi)?);
        }
        lo = hi;
        flo = fhi;
    }
    let residuals = zeros
        .iter()
        .map(|&x| f(x).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    Ok(BesselZeroTable {
        order: nu,
        zeros,
        residuals,
    })
}
