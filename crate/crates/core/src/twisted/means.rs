//! Twisted spherical means.
//!
//! The general mean of a structure is
//! `z ↦ Σ_q w_q f(z - ξ_q) exp((i/2) ⟨x, V_λ ξ_q⟩)` over a sphere rule, and the
//! λ'-twisted mean uses the phase `Σ_j λ'_j Im(z_j conj(w_j))`.
//!
//! On ℂ every skew form commutes with rotations, so the mean maps the
//! angular mode `F_m(ρ) e^{imφ}` to `G_m(ρ) e^{imφ}`. The one-dimensional
//! grid path evaluates `G_m` at each radius along `φ = 0`, reading `f` from
//! its spectral interpolant, and synthesizes with one inverse FFT per ring.

use crate::error::{Error, Result};
use crate::fields::interp::{to_real, FieldEval, ModeField};
use crate::fields::{Extension, SampledField};
use crate::group_algebra::{v_lambda, MetivierStructure, SymplecticSpectrum};
use crate::quadrature::{gauss_legendre_interval, SphereRule};
use crate::special::{check_lambda_prime, laguerre_function, mean_constant, theta_radial};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Phase form `(z, w) ↦ ⟨x, V ξ⟩` in real coordinates.
enum Phase {
    Matrix(DMatrix<f64>),
    Diagonal(Vec<f64>),
}

impl Phase {
    fn eval(&self, z: &[C64], w: &[C64]) -> f64 {
        match self {
            Phase::Diagonal(lp) => lp.iter().zip(z.iter().zip(w)).map(|(l, (a, b))| l * (a * b.conj()).im).sum(),
            Phase::Matrix(v) => {
                let x = to_real(z);
                let xi = to_real(w);
                x.dot(&(v * xi))
            }
        }
    }

    /// The coefficient `σ` with `⟨x, V ξ⟩ = σ Im(z conj(w))` on ℂ.
    fn planar(&self) -> f64 {
        match self {
            Phase::Diagonal(lp) => lp[0],
            Phase::Matrix(v) => v[(1, 0)],
        }
    }
}

fn check_rule(n: usize, rule: &SphereRule) -> Result<()> {
    if rule.n != n {
        return Err(Error::DimensionMismatch(format!("sphere rule on C^{} for a field on C^{n}", rule.n)));
    }
    Ok(())
}

fn mean_at(f: &dyn FieldEval, phase: &Phase, rule: &SphereRule, points: &[Vec<C64>]) -> Result<Vec<C64>> {
    let n = f.n();
    check_rule(n, rule)?;
    points
        .par_iter()
        .map(|z| {
            if z.len() != n {
                return Err(Error::DimensionMismatch(format!("point has {} coordinates, expected {n}", z.len())));
            }
            let mut acc = C64::new(0.0, 0.0);
            let mut shifted = vec![C64::new(0.0, 0.0); n];
            for q in 0..rule.len() {
                let w = rule.node(q);
                for j in 0..n {
                    shifted[j] = z[j] - w[j];
                }
                let ph = C64::from_polar(1.0, 0.5 * phase.eval(z, w));
                acc += f.eval(&shifted)? * ph * rule.weights[q];
            }
            Ok(acc)
        })
        .collect()
}

fn mean_planar(f: &SampledField, sigma: f64, rule: &SphereRule) -> Result<SampledField> {
    let mf = ModeField::new(f)?;
    let grid = &f.grid;
    let a = grid.angular[0];
    let r_max = grid.r_max;
    let rad = &grid.radial[0];
    let inv = FftPlanner::new().plan_fft_inverse(a);
    let rings: Vec<Vec<C64>> = (0..rad.len())
        .into_par_iter()
        .map(|c| {
            let rc = rad.nodes[c];
            let mut acc = vec![C64::new(0.0, 0.0); a];
            for q in 0..rule.len() {
                let w = rule.node(q)[0];
                let u = C64::new(rc, 0.0) - w;
                let rho = u.norm();
                if rho > r_max {
                    if f.extension == Extension::Error {
                        return Err(Error::OutOfDomain { radius: rho, r_max });
                    }
                    continue;
                }
                let modes = mf.modes_at(rho);
                let ang = u.arg();
                let base = C64::from_polar(rule.weights[q], 0.5 * sigma * (-rc * w.im));
                let step = C64::from_polar(1.0, ang);
                // e^{imφ'} for m = 0, 1, … and m = -1, -2, …
                let mut pos = base;
                for m in 0..a / 2 {
                    acc[m] += modes[m] * pos;
                    pos *= step;
                }
                let mut neg = base;
                let back = step.conj();
                for m in 1..a - a / 2 {
                    neg *= back;
                    acc[a - m] += modes[a - m] * neg;
                }
                if a % 2 == 0 {
                    acc[a / 2] += modes[a / 2] * base * ((a / 2) as f64 * ang).cos();
                }
            }
            let mut buf = acc;
            inv.process(&mut buf);
            Ok(buf)
        })
        .collect::<Result<_>>()?;
    Ok(f.like(rings.concat()))
}

fn mean_grid(f: &SampledField, phase: Phase, rule: &SphereRule) -> Result<SampledField> {
    check_rule(f.n(), rule)?;
    if f.n() == 1 {
        return mean_planar(f, phase.planar(), rule);
    }
    let values = mean_at(f, &phase, rule, &f.grid.points())?;
    Ok(f.like(values))
}

fn structure_phase(n: usize, s: &MetivierStructure, lambda: &[f64]) -> Result<Phase> {
    if s.n != n {
        return Err(Error::DimensionMismatch(format!("structure acts on R^{} but field lives on C^{n}", 2 * s.n)));
    }
    if lambda.iter().all(|l| *l == 0.0) {
        return Err(Error::InvalidArgument("lambda must be nonzero".into()));
    }
    Ok(Phase::Matrix(v_lambda(s, lambda)?))
}

fn lambda_phase(n: usize, lambda_prime: &[f64]) -> Result<Phase> {
    check_lambda_prime(lambda_prime)?;
    if lambda_prime.len() != n {
        return Err(Error::DimensionMismatch(format!("lambda' has length {}, field lives on C^{n}", lambda_prime.len())));
    }
    Ok(Phase::Diagonal(lambda_prime.to_vec()))
}

/// The λ-twisted spherical mean of a structure, on `f`'s grid.
pub fn twisted_spherical_mean(f: &SampledField, s: &MetivierStructure, lambda: &[f64], rule: &SphereRule) -> Result<SampledField> {
    mean_grid(f, structure_phase(f.n(), s, lambda)?, rule)
}

/// The λ-twisted spherical mean at arbitrary points.
pub fn twisted_spherical_mean_at(
    f: &dyn FieldEval,
    s: &MetivierStructure,
    lambda: &[f64],
    rule: &SphereRule,
    points: &[Vec<C64>],
) -> Result<Vec<C64>> {
    mean_at(f, &structure_phase(f.n(), s, lambda)?, rule, points)
}

/// The λ'-twisted spherical mean, on `f`'s grid.
pub fn lambda_twisted_mean(f: &SampledField, lambda_prime: &[f64], rule: &SphereRule) -> Result<SampledField> {
    mean_grid(f, lambda_phase(f.n(), lambda_prime)?, rule)
}

/// The λ'-twisted spherical mean at arbitrary points.
pub fn lambda_twisted_mean_at(f: &dyn FieldEval, lambda_prime: &[f64], rule: &SphereRule, points: &[Vec<C64>]) -> Result<Vec<C64>> {
    mean_at(f, &lambda_phase(f.n(), lambda_prime)?, rule, points)
}

/// The untwisted spherical mean `z ↦ Σ_q w_q f(z - w_q)`.
pub fn plain_spherical_mean(f: &SampledField, rule: &SphereRule) -> Result<SampledField> {
    mean_grid(f, Phase::Diagonal(vec![0.0; f.n()]), rule)
}

/// The modified mean `f ×̃_λ μ_r`: the λ'-twisted mean with `λ' = μ_λ`.
/// Pass `f ∘ A_λ` to compare with the structure mean at `A_λᵀ`-rotated points.
pub fn modified_twisted_mean(f: &SampledField, spec: &SymplecticSpectrum, rule: &SphereRule) -> Result<SampledField> {
    lambda_twisted_mean(f, &spec.mu, rule)
}

pub fn modified_twisted_mean_at(
    f: &dyn FieldEval,
    spec: &SymplecticSpectrum,
    rule: &SphereRule,
    points: &[Vec<C64>],
) -> Result<Vec<C64>> {
    lambda_twisted_mean_at(f, &spec.mu, rule, points)
}

/// Average of `θ_{k,λ'}` over the sphere `|w| = r`.
///
/// On S³ with `|w_1|² = r²(1-s)`, `|w_2|² = r² s` the normalized measure is
/// uniform in `s`, so the average is a one-dimensional integral.
pub fn theta_sphere_average(k: usize, lambda_prime: &[f64], r: f64) -> Result<f64> {
    check_lambda_prime(lambda_prime)?;
    let n = lambda_prime.len();
    let first = lambda_prime[0];
    if lambda_prime.iter().all(|l| *l == first) {
        return theta_radial(k, n, first, r);
    }
    if n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let (s, w) = gauss_legendre_interval(128, 0.0, 1.0)?;
    let mut avg = 0.0;
    for (si, wi) in s.iter().zip(&w) {
        let x = r * r * (lambda_prime[0] * (1.0 - si) + lambda_prime[1] * si) / 2.0;
        avg += wi * laguerre_function(k, n - 1, x)?;
    }
    Ok(avg)
}

/// The eigenvalue of the λ'-twisted mean over `|w| = r` on the degree-`k`
/// Laguerre eigenspace: `f ×_λ' μ_r = mean_multiplier · f` whenever
/// `f ×_λ' θ_{k,λ'} = (Π 2π/λ'_j) f`.
///
/// For isotropic `λ' = (c, …, c)` this is `k!(n-1)!/(k+n-1)! · θ_{k,λ'}(r)`.
/// Otherwise the mean does not act as a scalar on the eigenspace, and the
/// value returned uses the spherical average of `θ_{k,λ'}` in place of
/// `θ_{k,λ'}(r)`.
pub fn mean_multiplier(k: usize, lambda_prime: &[f64], r: f64) -> Result<f64> {
    Ok(mean_constant(k, lambda_prime.len()) * theta_sphere_average(k, lambda_prime, r)?)
}

/// Real-coordinate rotation helper used by tests and verification suites.
pub fn rotate_point(a_mat: &DMatrix<f64>, z: &[C64]) -> Vec<C64> {
    let x: DVector<f64> = a_mat * to_real(z);
    crate::fields::interp::to_complex(&x)
}
