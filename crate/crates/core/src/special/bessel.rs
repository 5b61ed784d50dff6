//! Bessel functions of the first kind and integer order.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const BESSEL_MAX_ARG: f64 = 1.0e4;
const ASYMPTOTIC_FROM: f64 = 25.0;

fn check_arg(x: f64) -> Result<()> {
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::RangeExceeded {
            what: "Bessel argument",
            value: x,
            max: BESSEL_MAX_ARG,
        });
    }
    Ok(())
}

/// Miller's backward recurrence, normalized by `J_0 + 2 Σ J_{2k} = 1`.
fn miller(nu_max: usize, x: f64) -> Vec<f64> {
    let top = nu_max.max(x.ceil() as usize) as f64;
    let mut start = (top + 30.0 + 12.0 * top.sqrt()) as usize;
    start += start % 2;
    let mut out = vec![0.0; nu_max + 1];
    let (mut jp1, mut j) = (0.0, 1e-300);
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if jp1.abs() > 1e250 {
            // rescale to keep the recurrence in range
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        // j now holds the (unnormalized) order k - 1
        let order = k - 1;
        if order <= nu_max {
            out[order] = j;
        }
        if order % 2 == 0 && order > 0 {
            sum += 2.0 * j;
        }
    }
    sum += j;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Hankel's asymptotic expansion, valid for `x` well beyond `ν²`.
fn hankel(nu: usize, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let chi = x - (nu as f64 / 2.0 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_0(x), …, J_{ν_max}(x)`.
pub fn bessel_j_orders(nu_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x == 0.0 {
        let mut out = vec![0.0; nu_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < ASYMPTOTIC_FROM {
        return Ok(miller(nu_max, x));
    }
    // forward recurrence is stable while the order stays below x
    let mut out = Vec::with_capacity(nu_max + 1);
    out.push(hankel(0, x));
    if nu_max >= 1 {
        out.push(hankel(1, x));
    }
    let forward_to = nu_max.min(x.floor() as usize);
    for k in 1..forward_to {
        let next = 2.0 * k as f64 / x * out[k] - out[k - 1];
        out.push(next);
    }
    if out.len() < nu_max + 1 {
        let tail = miller(nu_max, x);
        // anchor the backward solution on the better of the two forward values
        let anchor = out.len() - 1;
        let k = if out[anchor].abs() > out[anchor - 1].abs() {
            anchor
        } else {
            anchor - 1
        };
        let b = out[k] / tail[k];
        for v in tail.iter().skip(out.len()) {
            out.push(v * b);
        }
    }
    Ok(out)
}

/// `J_ν(x)` for integer `ν ≥ 0` and `0 ≤ x ≤ 10⁴`.
pub fn bessel_j(nu: usize, x: f64) -> Result<f64> {
    if x >= ASYMPTOTIC_FROM && nu == 0 {
        check_arg(x)?;
        return Ok(hankel(0, x));
    }
    Ok(bessel_j_orders(nu, x)?[nu])
}

/// `J_ν'(x) = (J_{ν-1}(x) - J_{ν+1}(x)) / 2`, with `J_0' = -J_1`.
pub fn bessel_j_derivative(nu: usize, x: f64) -> Result<f64> {
    let v = bessel_j_orders(nu + 1, x)?;
    Ok(if nu == 0 {
        -v[1]
    } else {
        0.5 * (v[nu - 1] - v[nu + 1])
    })
}
