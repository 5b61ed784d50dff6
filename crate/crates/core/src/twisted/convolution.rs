//! λ'-twisted convolution
//! `(f ×_λ' g)(z) = ∫ f(z - w) g(w) e^{(i/2) Σ_j λ'_j Im(z_j conj(w_j))} dw`.
//!
//! Writing `u = z - w` gives `∫ f(u) g(z - u) e^{-(i/2) λ Im(z conj(u))} du`,
//! which integrates `f` on its own grid nodes. In one coordinate, with
//! `z = ρ_c e^{iφ}` and `u = ρ_a e^{i(φ+δ)}`, the kernel
//! `g(z - u) e^{(i/2) λ ρ_c ρ_a sin δ}` depends on `φ` only through the
//! angular mode of `g`, so each output ring is a circular correlation over
//! the input rings and is evaluated mode by mode with FFTs.

use super::fft_axis;
use crate::error::{Error, Result};
use crate::fields::interp::{angular_modes, mode_of_bin};
use crate::fields::{PolarGrid, SampledField};
use crate::special::check_lambda_prime;
use crate::C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Convolves along coordinate `axis` with `outputs` kernels at once.
///
/// `kernel(d, out)` receives the separation `d = ρ_c - ρ_a e^{iδ}` (that is
/// `z - u` rotated to `φ = 0`) and writes one value per output.
pub(crate) fn axis_convolve<K>(
    grid: &PolarGrid,
    values: &[C64],
    axis: usize,
    lambda: f64,
    outputs: usize,
    kernel: K,
) -> Vec<Vec<C64>>
where
    K: Fn(C64, &mut [C64]) + Sync,
{
    let a = grid.angular[axis];
    let rad = &grid.radial[axis];
    let nr = rad.len();
    let stride = grid.stride(axis);
    let plane = grid.plane(axis);
    let outer = grid.len() / plane / stride;
    let slices = outer * stride;

    let mut spec = values.to_vec();
    fft_axis(grid, &mut spec, axis, false);
    // input spectra as [slice][ring][mode]
    let mut fin = vec![C64::new(0.0, 0.0); slices * nr * a];
    for o in 0..outer {
        for s in 0..stride {
            let slice = o * stride + s;
            for ring in 0..nr {
                for l in 0..a {
                    fin[(slice * nr + ring) * a + l] = spec[(o * plane + ring * a + l) * stride + s];
                }
            }
        }
    }
    drop(spec);
    let coef: Vec<f64> = (0..nr)
        .map(|i| rad.weights[i] * rad.nodes[i] * 2.0 * PI / a as f64)
        .collect();
    let trig: Vec<(f64, f64)> = (0..a)
        .map(|l| {
            let d = 2.0 * PI * l as f64 / a as f64;
            (d.cos(), d.sin())
        })
        .collect();

    // per output ring: [output][slice][angle]
    let per_ring: Vec<Vec<C64>> = (0..nr)
        .into_par_iter()
        .map(|c| {
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(a);
            let inv = planner.plan_fft_inverse(a);
            let rc = rad.nodes[c];
            // kernel spectra as [ring][output][mode], reversed in m
            let mut kh = vec![C64::new(0.0, 0.0); nr * outputs * a];
            let mut tmp = vec![C64::new(0.0, 0.0); outputs];
            let mut buf = vec![vec![C64::new(0.0, 0.0); a]; outputs];
            for ring in 0..nr {
                let ra = rad.nodes[ring];
                for (l, &(cs, sn)) in trig.iter().enumerate() {
                    let d = C64::new(rc - ra * cs, -ra * sn);
                    kernel(d, &mut tmp);
                    let ph = C64::from_polar(1.0, 0.5 * lambda * rc * ra * sn);
                    for (o, t) in tmp.iter().enumerate() {
                        buf[o][l] = t * ph;
                    }
                }
                for (o, b) in buf.iter_mut().enumerate() {
                    fwd.process(b);
                    let dst = &mut kh[(ring * outputs + o) * a..(ring * outputs + o + 1) * a];
                    for m in 0..a {
                        dst[m] = b[(a - m) % a] * coef[ring];
                    }
                }
            }
            let mut out = vec![C64::new(0.0, 0.0); outputs * slices * a];
            let mut acc = vec![C64::new(0.0, 0.0); a];
            for o in 0..outputs {
                for slice in 0..slices {
                    acc.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    for ring in 0..nr {
                        let f = &fin[(slice * nr + ring) * a..(slice * nr + ring + 1) * a];
                        let k = &kh[(ring * outputs + o) * a..(ring * outputs + o + 1) * a];
                        for m in 0..a {
                            acc[m] += f[m] * k[m];
                        }
                    }
                    inv.process(&mut acc);
                    let dst = &mut out[(o * slices + slice) * a..(o * slices + slice + 1) * a];
                    for (d, v) in dst.iter_mut().zip(&acc) {
                        *d = v / a as f64;
                    }
                }
            }
            out
        })
        .collect();

    let mut result = vec![vec![C64::new(0.0, 0.0); grid.len()]; outputs];
    for (c, ring_out) in per_ring.iter().enumerate() {
        for (o, res) in result.iter_mut().enumerate() {
            for oo in 0..outer {
                for s in 0..stride {
                    let slice = oo * stride + s;
                    let src = &ring_out[(o * slices + slice) * a..(o * slices + slice + 1) * a];
                    for l in 0..a {
                        res[(oo * plane + c * a + l) * stride + s] = src[l];
                    }
                }
            }
        }
    }
    result
}

/// One-coordinate Laguerre kernels `L_d(λ s²/2) e^{-λ s²/4}` for the listed
/// degrees.
fn theta_1d_kernel(lambda: f64, degrees: &[usize]) -> impl Fn(C64, &mut [C64]) + Sync + '_ {
    move |d: C64, out: &mut [C64]| {
        let x = 0.5 * lambda * d.norm_sqr();
        let mut prev = 0.0;
        let mut cur = (-0.5 * x).exp();
        let mut next_deg = 0;
        for (j, &k) in degrees.iter().enumerate() {
            while next_deg < k {
                let kf = next_deg as f64;
                let nx = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = nx;
                next_deg += 1;
            }
            out[j] = C64::new(cur, 0.0);
        }
    }
}

fn check_field_lambda(f: &SampledField, lambda_prime: &[f64]) -> Result<()> {
    check_lambda_prime(lambda_prime)?;
    if lambda_prime.len() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "lambda' has length {}, field lives on C^{}",
            lambda_prime.len(),
            f.n()
        )));
    }
    Ok(())
}

/// `f ×_λ' θ_{k,λ'}` for every `k` in `degrees` (ascending).
///
/// For `n = 2` the identity `θ_{k,λ'}(w) = Σ_{a+b=k} θ_{a,λ'_1}(w_1) θ_{b,λ'_2}(w_2)`
/// (with one-dimensional Laguerre functions on the right) splits the
/// convolution into one pass per coordinate.
pub fn convolve_theta(f: &SampledField, degrees: &[usize], lambda_prime: &[f64]) -> Result<Vec<SampledField>> {
    check_field_lambda(f, lambda_prime)?;
    if degrees.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("degrees must be strictly increasing".into()));
    }
    if degrees.is_empty() {
        return Ok(Vec::new());
    }
    let top = *degrees.last().expect("nonempty");
    let grid = &f.grid;
    let out = match f.n() {
        1 => axis_convolve(grid, &f.values, 0, lambda_prime[0], degrees.len(), theta_1d_kernel(lambda_prime[0], degrees)),
        2 => {
            let all: Vec<usize> = (0..=top).collect();
            let first = axis_convolve(grid, &f.values, 0, lambda_prime[0], all.len(), theta_1d_kernel(lambda_prime[0], &all));
            let mut out = vec![vec![C64::new(0.0, 0.0); grid.len()]; degrees.len()];
            for (a, g) in first.iter().enumerate() {
                // second-axis degrees b = k - a for each requested k ≥ a
                let pairs: Vec<(usize, usize)> =
                    degrees.iter().enumerate().filter(|(_, &k)| k >= a).map(|(j, &k)| (j, k - a)).collect();
                if pairs.is_empty() {
                    continue;
                }
                let mut bs: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                bs.sort_unstable();
                let second = axis_convolve(grid, g, 1, lambda_prime[1], bs.len(), theta_1d_kernel(lambda_prime[1], &bs));
                for (j, b) in pairs {
                    let idx = bs.iter().position(|&x| x == b).expect("present");
                    for (o, v) in out[j].iter_mut().zip(&second[idx]) {
                        *o += v;
                    }
                }
            }
            out
        }
        n => return Err(Error::UnsupportedDimension(n)),
    };
    Ok(out.into_iter().map(|v| f.like(v)).collect())
}

/// Largest `|g|` on the outermost ring relative to `max |g|`.
pub fn rim_fraction(g: &SampledField) -> f64 {
    let peak = g.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let grid = &g.grid;
    let mut rim: f64 = 0.0;
    for idx in 0..grid.len() {
        let p = grid.split(idx);
        let outer = (0..grid.n).any(|j| p[j] / grid.angular[j] == grid.radial[j].len() - 1);
        if outer {
            rim = rim.max(g.values[idx].norm());
        }
    }
    rim / peak
}

/// General `f ×_λ' g` for fields on ℂ.
///
/// `g` is expanded in angular modes `g_μ(ρ) e^{iμφ}`; its radial profiles are
/// interpolated by the global polynomial through the Gauss–Legendre radii
/// and taken to vanish beyond `R_max`. Modes below `1e-14 max |g|` are
/// dropped. `TruncationDominates` is raised when `g` has not decayed to
/// `tolerance` (relative) on the outermost ring.
pub fn twisted_convolution(f: &SampledField, g: &SampledField, lambda_prime: &[f64], tolerance: f64) -> Result<SampledField> {
    f.check_same_grid(g)?;
    check_field_lambda(f, lambda_prime)?;
    if f.n() != 1 {
        return Err(Error::UnsupportedDimension(f.n()));
    }
    let rim = rim_fraction(g);
    if rim > tolerance {
        return Err(Error::TruncationDominates {
            estimate: rim,
            tolerance,
        });
    }
    let grid = &f.grid;
    let a = grid.angular[0];
    let rad = &grid.radial[0];
    let modes = angular_modes(grid, &g.values);
    let peak = g.max_abs().max(f64::MIN_POSITIVE);
    let kept: Vec<usize> = (0..a)
        .filter(|&k| modes.iter().any(|ring| ring[k].norm() > 1e-14 * peak))
        .collect();
    if kept.is_empty() {
        return Ok(f.like(vec![C64::new(0.0, 0.0); grid.len()]));
    }
    let profiles: Vec<Vec<C64>> = kept.iter().map(|&k| modes.iter().map(|ring| ring[k]).collect()).collect();
    let mus: Vec<i64> = kept.iter().map(|&k| mode_of_bin(k, a)).collect();
    let r_max = grid.r_max;
    let kernel = |d: C64, out: &mut [C64]| {
        let s = d.norm();
        if s > r_max {
            out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            return;
        }
        let c = rad.barycentric_coefficients(s);
        let ang = d.arg();
        for (j, prof) in profiles.iter().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            for (ci, p) in c.iter().zip(prof) {
                v += p * ci;
            }
            let e = if kept[j] == a / 2 {
                C64::new((mus[j] as f64 * ang).cos(), 0.0)
            } else {
                C64::from_polar(1.0, mus[j] as f64 * ang)
            };
            out[j] = v * e;
        }
    };
    let parts = axis_convolve(grid, &f.values, 0, lambda_prime[0], kept.len(), kernel);
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    for (j, part) in parts.iter().enumerate() {
        for (idx, v) in part.iter().enumerate() {
            let l = idx % a;
            let phi = 2.0 * PI * l as f64 / a as f64;
            let e = if kept[j] == a / 2 {
                C64::new((mus[j] as f64 * phi).cos(), 0.0)
            } else {
                C64::from_polar(1.0, mus[j] as f64 * phi)
            };
            out[idx] += v * e;
        }
    }
    Ok(f.like(out))
}
