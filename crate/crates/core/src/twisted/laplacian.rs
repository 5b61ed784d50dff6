//! The twisted Laplacian
//! `L_λ' = -Δ + ¼ Σ_j λ'_j² |z_j|² + i Σ_j λ'_j (x_j ∂_{y_j} - y_j ∂_{x_j})`.
//!
//! Each coordinate term commutes with rotations of its own plane, so on grid
//! data it acts on the angular mode `F_m(ρ) e^{imφ}` through a matrix in the
//! radial index. Row `i` of that matrix is the five-point Cartesian stencil
//! centred at `(r_i, 0)`, with off-grid values read from the polynomial
//! interpolant through the Gauss–Legendre radii, which extends a step
//! beyond `R_max` on the outermost rings.

use super::fft_axis;
use crate::error::{Error, Result};
use crate::fields::interp::{mode_of_bin, FieldEval};
use crate::fields::{PolarGrid, RadialAxis, SampledField};
use crate::special::check_lambda_prime;
use crate::C64;
use rayon::prelude::*;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1.0 / 64.0;
/// Largest accepted disagreement between steps `h` and `h/2`.
pub const RICHARDSON_TOL: f64 = 1e-3;

/// Per-bin operator matrices `[bin][row][col]`, flattened.
fn mode_operators(axis: &RadialAxis, a: usize, lambda: f64, h: f64) -> Vec<C64> {
    let nr = axis.len();
    let mut ops = vec![C64::new(0.0, 0.0); a * nr * nr];
    for i in 0..nr {
        let r = axis.nodes[i];
        let plus = axis.barycentric_coefficients(r + h);
        let (minus, flip) = if r >= h {
            (axis.barycentric_coefficients(r - h), false)
        } else {
            (axis.barycentric_coefficients(h - r), true)
        };
        let side = axis.barycentric_coefficients(r.hypot(h));
        let theta = h.atan2(r);
        for bin in 0..a {
            let nyquist = a % 2 == 0 && bin == a / 2;
            let m = mode_of_bin(bin, a) as f64;
            let (up, down) = if nyquist {
                let c = (m * theta).cos();
                (C64::new(c, 0.0), C64::new(c, 0.0))
            } else {
                (C64::from_polar(1.0, m * theta), C64::from_polar(1.0, -m * theta))
            };
            let back = if flip { (m * std::f64::consts::PI).cos() } else { 1.0 };
            let row = &mut ops[(bin * nr + i) * nr..(bin * nr + i + 1) * nr];
            for k in 0..nr {
                let lap = plus[k] + back * minus[k] + (up + down) * side[k];
                let rot = C64::new(0.0, lambda * r / (2.0 * h)) * (up - down) * side[k];
                row[k] = -lap / (h * h) + rot;
            }
            row[i] += 4.0 / (h * h) + 0.25 * lambda * lambda * r * r;
        }
    }
    ops
}

fn apply_with_step(f: &SampledField, lambda_prime: &[f64], h: f64) -> Vec<C64> {
    let grid = &f.grid;
    let mut total = vec![C64::new(0.0, 0.0); grid.len()];
    for (j, &lambda) in lambda_prime.iter().enumerate() {
        let a = grid.angular[j];
        let axis = &grid.radial[j];
        let nr = axis.len();
        let ops = mode_operators(axis, a, lambda, h);
        let mut spec = f.values.clone();
        fft_axis(grid, &mut spec, j, false);
        let stride = grid.stride(j);
        let plane = grid.plane(j);
        let mut out = vec![C64::new(0.0, 0.0); grid.len()];
        out.par_chunks_mut(plane * stride).enumerate().for_each(|(o, block)| {
            let mut col = vec![C64::new(0.0, 0.0); nr];
            for s in 0..stride {
                for bin in 0..a {
                    for (k, c) in col.iter_mut().enumerate() {
                        *c = spec[(o * plane + k * a + bin) * stride + s];
                    }
                    let mat = &ops[bin * nr * nr..(bin + 1) * nr * nr];
                    for i in 0..nr {
                        let row = &mat[i * nr..(i + 1) * nr];
                        let mut acc = C64::new(0.0, 0.0);
                        for (rv, cv) in row.iter().zip(&col) {
                            acc += rv * cv;
                        }
                        block[(i * a + bin) * stride + s] = acc / a as f64;
                    }
                }
            }
        });
        fft_axis(grid, &mut out, j, true);
        for (t, v) in total.iter_mut().zip(&out) {
            *t += v;
        }
    }
    total
}

/// `L_λ' f` on `f`'s grid with step [`FD_STEP`], checked against step `h/2`.
pub fn apply_twisted_laplacian(f: &SampledField, lambda_prime: &[f64]) -> Result<SampledField> {
    apply_twisted_laplacian_with(f, lambda_prime, FD_STEP, RICHARDSON_TOL)
}

/// As [`apply_twisted_laplacian`] with an explicit step and tolerance.
/// Returns the `h/2` result.
pub fn apply_twisted_laplacian_with(f: &SampledField, lambda_prime: &[f64], h: f64, tolerance: f64) -> Result<SampledField> {
    check_inputs(f.n(), lambda_prime, h)?;
    let coarse = apply_with_step(f, lambda_prime, h);
    let fine = apply_with_step(f, lambda_prime, h / 2.0);
    let disagreement = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if disagreement > tolerance {
        return Err(Error::GridTooCoarse { disagreement });
    }
    Ok(f.like(fine))
}

fn check_inputs(n: usize, lambda_prime: &[f64], h: f64) -> Result<()> {
    check_lambda_prime(lambda_prime)?;
    if lambda_prime.len() != n {
        return Err(Error::DimensionMismatch(format!("lambda' has length {}, field lives on C^{n}", lambda_prime.len())));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    Ok(())
}

fn stencil_at(f: &dyn FieldEval, lambda_prime: &[f64], z: &[C64], h: f64) -> Result<C64> {
    let centre = f.eval(z)?;
    let mut acc = C64::new(0.0, 0.0);
    let mut p = z.to_vec();
    for (j, &lambda) in lambda_prime.iter().enumerate() {
        let mut at = |d: C64| -> Result<C64> {
            p[j] = z[j] + d;
            let v = f.eval(&p);
            p[j] = z[j];
            v
        };
        let xp = at(C64::new(h, 0.0))?;
        let xm = at(C64::new(-h, 0.0))?;
        let yp = at(C64::new(0.0, h))?;
        let ym = at(C64::new(0.0, -h))?;
        let lap = (xp + xm + yp + ym - 4.0 * centre) / (h * h);
        let dx = (xp - xm) / (2.0 * h);
        let dy = (yp - ym) / (2.0 * h);
        let (x, y) = (z[j].re, z[j].im);
        acc += -lap + 0.25 * lambda * lambda * z[j].norm_sqr() * centre + C64::new(0.0, lambda) * (x * dy - y * dx);
    }
    Ok(acc)
}

/// `L_λ' f` at arbitrary points by the Cartesian stencil on an evaluator,
/// with the same `h`, `h/2` check.
pub fn twisted_laplacian_at(f: &dyn FieldEval, lambda_prime: &[f64], points: &[Vec<C64>], h: f64) -> Result<Vec<C64>> {
    check_inputs(f.n(), lambda_prime, h)?;
    points
        .par_iter()
        .map(|z| {
            let coarse = stencil_at(f, lambda_prime, z, h)?;
            let fine = stencil_at(f, lambda_prime, z, h / 2.0)?;
            let disagreement = (coarse - fine).norm();
            if disagreement > RICHARDSON_TOL {
                return Err(Error::GridTooCoarse { disagreement });
            }
            Ok(fine)
        })
        .collect()
}

/// Grid used by the eigenfunction checks on ℂ.
pub fn default_laplacian_grid() -> Result<PolarGrid> {
    PolarGrid::default_for(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, try_sample, AnalyticField};
    use crate::special::special_hermite::twisted_laplacian_eigenvalue;
    use crate::special::{psi_alpha_beta, theta_k};

    #[test]
    fn special_hermite_eigenfunctions() {
        let g = default_laplacian_grid().unwrap();
        for (a, b) in [(0usize, 0usize), (3, 1), (1, 3), (3, 3)] {
            let f = try_sample(|z| psi_alpha_beta(&[a], &[b], &[1.0], z), &g).unwrap();
            let lf = apply_twisted_laplacian(&f, &[1.0]).unwrap();
            let ev = twisted_laplacian_eigenvalue(&[a], &[1.0]);
            let res = lf.max_diff(&f.scale(C64::new(ev, 0.0))).unwrap();
            assert!(res < 1e-3, "({a},{b}): {res}");
        }
    }

    #[test]
    fn theta_eigenvalue_two_dimensions() {
        let g = PolarGrid::uniform(2, 32, 16, 9.0).unwrap();
        let lp = [1.0, 1.0];
        let f = try_sample(|z| Ok(C64::new(theta_k(1, &lp, z)?, 0.0)), &g).unwrap();
        let lf = apply_twisted_laplacian(&f, &lp).unwrap();
        assert!(lf.max_diff(&f.scale(C64::new(4.0, 0.0))).unwrap() < 1e-3);
        // steeper data trips the step check
        let sharp = try_sample(|z| Ok(C64::new(theta_k(2, &[1.5, 1.5], z)?, 0.0)), &g).unwrap();
        assert!(matches!(apply_twisted_laplacian(&sharp, &[1.5, 1.5]), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn constant_field() {
        let g = PolarGrid::uniform(1, 32, 16, 4.0).unwrap();
        let f = sample(|_| C64::new(2.0, 0.0), &g).unwrap();
        let lf = apply_twisted_laplacian(&f, &[3.0]).unwrap();
        let expect = sample(|z| C64::new(2.0 * 0.25 * 9.0 * z[0].norm_sqr(), 0.0), &g).unwrap();
        assert!(lf.max_diff(&expect).unwrap() < 1e-6);
    }

    #[test]
    fn pointwise_stencil_on_analytic_field() {
        let lp = [1.0, 2.0];
        let f = AnalyticField::new(2, |z: &[C64]| psi_alpha_beta(&[2, 1], &[0, 3], &[1.0, 2.0], z).unwrap());
        let pts = vec![vec![C64::new(0.3, -0.4), C64::new(0.1, 0.9)], vec![C64::new(-1.1, 0.2), C64::new(0.5, -0.5)]];
        let got = twisted_laplacian_at(&f, &lp, &pts, FD_STEP).unwrap();
        let ev = twisted_laplacian_eigenvalue(&[2, 1], &lp);
        for (z, v) in pts.iter().zip(&got) {
            assert!((v - ev * f.eval(z).unwrap()).norm() < 1e-3);
        }
    }

    #[test]
    fn coarse_grid_is_reported() {
        let g = PolarGrid::uniform(1, 8, 8, 12.0).unwrap();
        let f = try_sample(|z| psi_alpha_beta(&[3], &[3], &[1.0], z), &g).unwrap();
        assert!(matches!(
            apply_twisted_laplacian_with(&f, &[1.0], 1.0, 1e-3),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
