//! Identity suites run by `metivier verify`.

use crate::error::{Error, Result};
use crate::fields::interp::{AnalyticField, Rotated};
use crate::fields::{try_sample, PolarGrid};
use crate::group_algebra::{symplectic_spectrum, MetivierStructure};
use crate::quadrature::build_sphere_rule;
use crate::special::special_hermite::twisted_laplacian_eigenvalue;
use crate::special::{multi_indices, phi_k, psi_alpha_beta, theta_k};
use crate::twisted::laplacian::apply_twisted_laplacian;
use crate::twisted::means::{lambda_twisted_mean, lambda_twisted_mean_at, mean_multiplier, modified_twisted_mean_at, rotate_point, twisted_spherical_mean_at};
use crate::twisted::spectrum::MAX_DEGREE_1D;
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
}

impl SuiteResult {
    fn new(name: &str, max_error: f64, tolerance: f64, cases: usize) -> Self {
        Self {
            name: name.to_string(),
            max_error,
            tolerance,
            passed: max_error < tolerance,
            cases,
        }
    }
}

/// Settings shared by the suites.
#[derive(Debug, Clone)]
pub struct VerifyPlan {
    pub grid: PolarGrid,
    pub k_max: usize,
    pub radii: Vec<f64>,
    /// Replaces every suite's own tolerance when set.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub test_points: usize,
}

impl VerifyPlan {
    pub fn default_plan() -> Result<Self> {
        Ok(Self {
            grid: PolarGrid::default_for(1)?,
            k_max: 8,
            radii: vec![0.5, 1.0, 2.0],
            tolerance: None,
            seed: 0,
            test_points: 40,
        })
    }

    fn tol(&self, own: f64) -> f64 {
        self.tolerance.unwrap_or(own)
    }
}

/// Grid indices of `count` seeded nodes with `|z| ≤ radius`.
pub fn seeded_nodes(grid: &PolarGrid, count: usize, radius: f64, seed: u64) -> Vec<usize> {
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.point(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() <= radius)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count.min(inside.len())).map(|_| inside[rng.gen_range(0..inside.len())]).collect()
}

/// Seeded points of ℂⁿ with coordinates uniform in the square `[-s, s]²`.
pub fn seeded_points(n: usize, count: usize, s: f64, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| C64::new(rng.gen_range(-s..s), rng.gen_range(-s..s))).collect())
        .collect()
}

/// Means of `θ_k` on the grid against `c_k θ_k(r) θ_k(z)` at seeded nodes.
pub fn factorization_suite(plan: &VerifyPlan) -> Result<SuiteResult> {
    if plan.grid.n != 1 {
        return Err(Error::UnsupportedDimension(plan.grid.n));
    }
    let nodes = seeded_nodes(&plan.grid, plan.test_points, 5.0, plan.seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in 0..=plan.k_max {
        let f = try_sample(|z| Ok(C64::new(theta_k(k, &[1.0], z)?, 0.0)), &plan.grid)?;
        for &r in &plan.radii {
            let mean = lambda_twisted_mean(&f, &[1.0], &build_sphere_rule(1, r, 64)?)?;
            let c = mean_multiplier(k, &[1.0], r)?;
            for &i in &nodes {
                worst = worst.max((mean.values[i] - f.values[i] * c).norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("mean-factorization", worst, plan.tol(1e-6), cases))
}

/// `φ_k ×_1 μ_r = k!(n-1)!/(k+n-1)! φ_k(r) φ_k` on ℂ² from point means.
pub fn heisenberg_suite(plan: &VerifyPlan) -> Result<SuiteResult> {
    let points = seeded_points(2, 8, 1.5, plan.seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in 0..=plan.k_max.min(4) {
        let f = AnalyticField::new(2, move |z: &[C64]| C64::new(phi_k(k, 2, z).unwrap_or(f64::NAN), 0.0));
        for &r in &plan.radii {
            let rule = build_sphere_rule(2, r, 32)?;
            let got = lambda_twisted_mean_at(&f, &[1.0, 1.0], &rule, &points)?;
            let c = crate::special::mean_constant(k, 2) * phi_k(k, 2, &[C64::new(r, 0.0), C64::new(0.0, 0.0)])?;
            for (z, v) in points.iter().zip(&got) {
                worst = worst.max((v - c * phi_k(k, 2, z)?).norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("heisenberg-specialization", worst, plan.tol(1e-6), cases))
}

/// Structure mean at `A_λ z` against the modified mean of `f ∘ A_λ` at `z`.
pub fn rotation_suite(plan: &VerifyPlan) -> Result<SuiteResult> {
    let structures = ["quaternionic", "anisotropic", "heisenberg:2"];
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let gauss = |z: &[C64]| {
        let d0 = z[0] - C64::new(0.4, -0.3);
        let d1 = z[1] - C64::new(-0.2, 0.5);
        C64::new((-(d0.norm_sqr() + 0.5 * d1.norm_sqr())).exp(), 0.3 * (z[0].re - z[1].im)) * (-0.1 * z[1].norm_sqr()).exp()
    };
    let f = AnalyticField::new(2, gauss);
    let points = seeded_points(2, 8, 1.2, plan.seed + 1);
    let rule = build_sphere_rule(2, 0.9, 48)?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for name in structures {
        let s = MetivierStructure::from_ref(name)?;
        for _ in 0..5 {
            let lam: Vec<f64> = (0..s.m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let spec = symplectic_spectrum(&s, &lam)?;
            let fa = Rotated {
                inner: &f,
                a_mat: spec.a_mat.clone(),
            };
            let rotated: Vec<Vec<C64>> = points.iter().map(|z| rotate_point(&spec.a_mat, z)).collect();
            let lhs = twisted_spherical_mean_at(&f, &s, &lam, &rule, &rotated)?;
            let rhs = modified_twisted_mean_at(&fa, &spec, &rule, &points)?;
            for (a, b) in lhs.iter().zip(&rhs) {
                worst = worst.max((a - b).norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("rotation-equivalence", worst, plan.tol(1e-6), cases))
}

/// `(Π √λ'_j)^{-1} Σ_{|α|=k} Ψ_αα = (2π)^{-n/2} θ_{k,λ'}`.
pub fn diagonal_sum_suite(plan: &VerifyPlan) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for lp in [vec![1.0], vec![0.7], vec![1.0, 1.0], vec![1.0, 2.0]] {
        let n = lp.len();
        let scale: f64 = lp.iter().map(|l: &f64| l.sqrt()).product();
        for z in seeded_points(n, 10, 2.0, plan.seed + 2) {
            for k in 0..=plan.k_max.min(8) {
                let mut sum = C64::new(0.0, 0.0);
                for a in multi_indices(n, k) {
                    sum += psi_alpha_beta(&a, &a, &lp, &z)?;
                }
                let expect = (2.0 * PI).powf(-(n as f64) / 2.0) * theta_k(k, &lp, &z)?;
                worst = worst.max((sum / scale - expect).norm());
                cases += 1;
            }
        }
    }
    Ok(SuiteResult::new("diagonal-sum", worst, plan.tol(1e-9), cases))
}

/// `‖L Ψ_αβ - (2α+1) Ψ_αβ‖_max` on the grid for `α, β ≤ 3`.
pub fn eigenvalue_suite(plan: &VerifyPlan) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in 0..=3usize {
        for b in 0..=3usize {
            let f = try_sample(|z| psi_alpha_beta(&[a], &[b], &[1.0], z), &plan.grid)?;
            let lf = apply_twisted_laplacian(&f, &[1.0])?;
            let ev = twisted_laplacian_eigenvalue(&[a], &[1.0]);
            worst = worst.max(lf.max_diff(&f.scale(C64::new(ev, 0.0)))?);
            cases += 1;
        }
    }
    Ok(SuiteResult::new("laplacian-eigenvalues", worst, plan.tol(1e-3), cases))
}

/// Runs every suite in a fixed order.
pub fn run_all(plan: &VerifyPlan) -> Result<Vec<SuiteResult>> {
    if plan.k_max > MAX_DEGREE_1D {
        return Err(Error::RangeExceeded {
            what: "verification degree",
            value: plan.k_max as f64,
            max: MAX_DEGREE_1D as f64,
        });
    }
    Ok(vec![
        factorization_suite(plan)?,
        heisenberg_suite(plan)?,
        rotation_suite(plan)?,
        diagonal_sum_suite(plan)?,
        eigenvalue_suite(plan)?,
    ])
}
