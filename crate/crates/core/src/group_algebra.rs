//! Métivier structures and the symplectic normal form of `V_λ`.

use crate::error::{Error, Result};
use crate::fields::{FieldEval, ModeField, Rotated, SampledField};
use rayon::prelude::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::path::Path;

pub const SKEW_TOL: f64 = 1e-12;
pub const SINGULAR_TOL: f64 = 1e-10;

/// Dimensions and structure matrices `U^(1), …, U^(m)` of a step-two group.
#[derive(Debug, Clone, PartialEq)]
pub struct MetivierStructure {
    pub n: usize,
    pub m: usize,
    pub u_mats: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StructureJson {
    n: usize,
    m: usize,
    u: Vec<MatrixJson>,
}

/// Checks dimensions, skew-symmetry and linear independence.
pub fn validate_structure(n: usize, m: usize, u_mats: Vec<DMatrix<f64>>) -> Result<MetivierStructure> {
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch(format!("n = {n} and m = {m} must be positive")));
    }
    if u_mats.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected {m} structure matrices, got {}",
            u_mats.len()
        )));
    }
    let d = 2 * n;
    for (k, u) in u_mats.iter().enumerate() {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "U^({}) is {}x{}, expected {d}x{d}",
                k + 1,
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = (u + u.transpose()).amax();
        if !dev.is_finite() || dev > SKEW_TOL {
            return Err(Error::NotSkewSymmetric { index: k + 1, deviation: dev });
        }
    }
    let stacked = DMatrix::from_fn(m, d * d, |k, e| u_mats[k][(e / d, e % d)]);
    let sv = stacked.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count();
    if smax == 0.0 || rank < m {
        return Err(Error::DependentStructureMatrices {
            rank: if smax == 0.0 { 0 } else { rank },
            m,
        });
    }
    Ok(MetivierStructure { n, m, u_mats })
}

fn standard_j(n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        u[(j, n + j)] = -1.0;
        u[(n + j, j)] = 1.0;
    }
    u
}

fn block_j(d: usize, at: usize, scale: f64) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(d, d);
    u[(at, at + 1)] = -scale;
    u[(at + 1, at)] = scale;
    u
}

impl MetivierStructure {
    /// Heisenberg group `ℍⁿ`: a single matrix `[[0, -I], [I, 0]]`.
    pub fn heisenberg(n: usize) -> Result<Self> {
        validate_structure(n, 1, vec![standard_j(n)])
    }

    /// Quaternionic H-type group: left multiplication by `i, j, k` on `ℍ ≅ ℝ⁴`,
    /// with real coordinates `(x₁, x₂, y₁, y₂)` and `z₁ = a + ib`, `z₂ = c + id`
    /// for `q = a + bi + cj + dk`.
    pub fn quaternionic() -> Result<Self> {
        // coordinate index of a, c, b, d
        let pos = [0usize, 2, 1, 3];
        let mut mats = Vec::new();
        // images of the basis (a, b, c, d) as (target, sign)
        let tables: [[(usize, f64); 4]; 3] = [
            [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
            [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
            [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
        ];
        for table in tables {
            let mut u = DMatrix::zeros(4, 4);
            for (src, &(dst, sign)) in table.iter().enumerate() {
                u[(pos[dst], pos[src])] = sign;
            }
            mats.push(u);
        }
        validate_structure(2, 3, mats)
    }

    /// `J ⊕ 0` and `0 ⊕ J` on `ℝ⁴`: a valid structure that is not Métivier.
    pub fn product_counterexample() -> Result<Self> {
        validate_structure(2, 2, vec![block_j(4, 0, 1.0), block_j(4, 2, 1.0)])
    }

    /// `J ⊕ 2J` on `ℝ⁴`, so that `μ = (2, 1)` at `λ = 1`.
    pub fn anisotropic() -> Result<Self> {
        validate_structure(2, 1, vec![block_j(4, 0, 1.0) + block_j(4, 2, 2.0)])
    }

    /// Resolves `heisenberg:<n>`, `quaternionic`, `product-counterexample`,
    /// `anisotropic`, or else reads a JSON structure file.
    pub fn from_ref(name: &str) -> Result<Self> {
        if let Some(rest) = name.strip_prefix("heisenberg:") {
            let n: usize = rest
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad Heisenberg dimension in {name:?}")))?;
            return Self::heisenberg(n);
        }
        match name {
            "heisenberg" => Self::heisenberg(1),
            "quaternionic" => Self::quaternionic(),
            "product-counterexample" => Self::product_counterexample(),
            "anisotropic" => Self::anisotropic(),
            path => Self::read_json(path),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: StructureJson = serde_json::from_str(s)?;
        let d = 2 * raw.n;
        let mut mats = Vec::with_capacity(raw.u.len());
        for (k, m) in raw.u.into_iter().enumerate() {
            let flat: Vec<f64> = match m {
                MatrixJson::Nested(rows) => {
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(Error::DimensionMismatch(format!(
                            "U^({}) is not {d}x{d}",
                            k + 1
                        )));
                    }
                    rows.into_iter().flatten().collect()
                }
                MatrixJson::Flat(v) => v,
            };
            if flat.len() != d * d {
                return Err(Error::DimensionMismatch(format!(
                    "U^({}) has {} entries, expected {}",
                    k + 1,
                    flat.len(),
                    d * d
                )));
            }
            mats.push(DMatrix::from_row_slice(d, d, &flat));
        }
        validate_structure(raw.n, raw.m, mats)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let d = 2 * self.n;
        let u = self
            .u_mats
            .iter()
            .map(|m| MatrixJson::Nested((0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()))
            .collect();
        serde_json::to_string(&StructureJson { n: self.n, m: self.m, u }).expect("structure serializes")
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }
}

/// `V_λ = Σ_j λ_j U^(j)`.
pub fn v_lambda(s: &MetivierStructure, lambda: &[f64]) -> Result<DMatrix<f64>> {
    if lambda.len() != s.m {
        return Err(Error::DimensionMismatch(format!(
            "lambda has length {}, structure has m = {}",
            lambda.len(),
            s.m
        )));
    }
    let d = s.dim();
    let mut v = DMatrix::zeros(d, d);
    for (l, u) in lambda.iter().zip(&s.u_mats) {
        v += u * *l;
    }
    Ok(v)
}

fn normalized_det(v: &DMatrix<f64>) -> f64 {
    let scale = v.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (v / scale).determinant().abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePlan {
    pub random_points: usize,
    pub seed: u64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        Self {
            random_points: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetivierReport {
    pub is_metivier_on_probes: bool,
    pub worst_lambda: Vec<f64>,
    pub min_abs_det: f64,
    pub probes: usize,
}

/// Unit vectors: `±e_k` followed by seeded Gaussian directions.
pub fn probe_directions(m: usize, plan: ProbePlan) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * m + plan.random_points);
    for k in 0..m {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[k] = sign;
            out.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    while out.len() < 2 * m + plan.random_points {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Evaluates `|det V_λ|` over unit probe directions.
///
/// This is a certificate over the probes only, not a proof of
/// nondegeneracy on the whole sphere.
pub fn metivier_check(s: &MetivierStructure, plan: ProbePlan) -> Result<MetivierReport> {
    let probes = probe_directions(s.m, plan);
    let mut worst = (f64::INFINITY, probes[0].clone());
    for lam in &probes {
        let det = v_lambda(s, lam)?.determinant().abs();
        if det < worst.0 {
            worst = (det, lam.clone());
        }
    }
    Ok(MetivierReport {
        is_metivier_on_probes: worst.0 >= SINGULAR_TOL,
        worst_lambda: worst.1,
        min_abs_det: worst.0,
        probes: probes.len(),
    })
}

/// `A_λ`, `μ_λ` and `U_λ` with `A_λᵀ V_λ A_λ = U_λ = [[0, -J], [J, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub lambda: Vec<f64>,
    pub a_mat: DMatrix<f64>,
    pub mu: Vec<f64>,
    pub u_normal: DMatrix<f64>,
}

impl SymplecticSpectrum {
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// `max |A Aᵀ - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.a_mat.nrows();
        (&self.a_mat * self.a_mat.transpose() - DMatrix::<f64>::identity(d, d)).amax()
    }

    /// `max |V A - A U|`.
    pub fn intertwining_residual(&self, v: &DMatrix<f64>) -> f64 {
        (v * &self.a_mat - &self.a_mat * &self.u_normal).amax()
    }

    /// A spectrum built directly from an orthogonal `A` and positive `μ`.
    pub fn from_parts(lambda: Vec<f64>, a_mat: DMatrix<f64>, mu: Vec<f64>) -> Self {
        let u_normal = normal_form(&mu);
        Self {
            lambda,
            a_mat,
            mu,
            u_normal,
        }
    }
}

/// `[[0, -diag(μ)], [diag(μ), 0]]`.
pub fn normal_form(mu: &[f64]) -> DMatrix<f64> {
    let n = mu.len();
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for (j, &m) in mu.iter().enumerate() {
        u[(j, n + j)] = -m;
        u[(n + j, j)] = m;
    }
    u
}

fn lex_abs_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match y.abs().partial_cmp(&x.abs()).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Symplectic normal form of `V_λ`.
///
/// The eigenvectors of the symmetric matrix `V_λᵀ V_λ` come in pairs with
/// eigenvalue `μ_j²`; taking them in descending order, orthogonalizing
/// against the columns already chosen and setting `b_j = V a_j / |V a_j|`
/// gives `V a_j = μ_j b_j` and `V b_j = -μ_j a_j`. Columns of `A_λ` are
/// `(a_1, …, a_n, b_1, …, b_n)`; each `a_j` is oriented so its first entry
/// of magnitude above `1e-8` is positive, and pairs with equal `μ` are
/// ordered lexicographically by `|a_j|`.
pub fn symplectic_spectrum(s: &MetivierStructure, lambda: &[f64]) -> Result<SymplecticSpectrum> {
    let v = v_lambda(s, lambda)?;
    if lambda.iter().all(|&l| l == 0.0) {
        return Err(Error::SingularPencil { det: 0.0 });
    }
    let det = normalized_det(&v);
    if !(det >= SINGULAR_TOL) {
        return Err(Error::SingularPencil { det });
    }
    let n = s.n;
    let d = 2 * n;
    let vtv = v.transpose() * &v;
    let eig = SymmetricEigen::try_new(vtv, 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence("eigen-decomposition of V^T V".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));

    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut pairs: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::with_capacity(n);
    for &idx in &order {
        if pairs.len() == n {
            break;
        }
        let mut a: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        for _ in 0..2 {
            for c in &chosen {
                let p = c.dot(&a);
                a -= c * p;
            }
        }
        let norm = a.norm();
        if norm < 0.5 {
            continue;
        }
        a /= norm;
        let va = &v * &a;
        let mu = va.norm();
        let b = va / mu;
        chosen.push(a.clone());
        chosen.push(b.clone());
        pairs.push((mu, a, b));
    }
    if pairs.len() != n {
        return Err(Error::NonConvergence("could not complete the symplectic basis".into()));
    }
    for (_, a, b) in pairs.iter_mut() {
        if let Some(first) = a.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                *a = -a.clone();
                *b = -b.clone();
            }
        }
    }
    pairs.sort_by(|p, q| {
        let tie = 1e-10 * p.0.max(q.0);
        if (p.0 - q.0).abs() <= tie {
            lex_abs_cmp(&p.1, &q.1)
        } else {
            q.0.total_cmp(&p.0)
        }
    });
    let mut a_mat = DMatrix::zeros(d, d);
    for (j, (_, a, b)) in pairs.iter().enumerate() {
        a_mat.set_column(j, a);
        a_mat.set_column(n + j, b);
    }
    // read μ back from the normal form so that U_λ matches A exactly
    let t = a_mat.transpose() * &v * &a_mat;
    let mut mu: Vec<f64> = (0..n).map(|j| t[(n + j, j)]).collect();
    // tied pairs can come back an ulp out of order
    for j in 1..n {
        if mu[j] > mu[j - 1] && mu[j] - mu[j - 1] <= 1e-12 * mu[j - 1] {
            mu[j] = mu[j - 1];
        }
    }
    if mu.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::NonConvergence("non-positive symplectic eigenvalue".into()));
    }
    Ok(SymplecticSpectrum {
        lambda: lambda.to_vec(),
        a_mat,
        u_normal: normal_form(&mu),
        mu,
    })
}

/// `λ' = (μ_λ,1, …, μ_λ,n)`.
pub fn lambda_prime_of(spec: &SymplecticSpectrum) -> Vec<f64> {
    spec.mu.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Samples `x ↦ f(A_λ x)` (forward) or `x ↦ f(A_λᵀ x)` (inverse) on `f`'s grid.
///
/// For `n = 1` the off-grid values come from the spectral interpolant
/// (trigonometric in angle, global polynomial in radius); for `n = 2` from
/// the local bicubic stencil, whose error is `O(h³)`.
pub fn rotate_field(f: &SampledField, spec: &SymplecticSpectrum, direction: Direction) -> Result<SampledField> {
    let d = 2 * f.n();
    if spec.a_mat.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "field on C^{} but A_lambda is {}x{}",
            f.n(),
            spec.a_mat.nrows(),
            spec.a_mat.ncols()
        )));
    }
    let a_mat = match direction {
        Direction::Forward => spec.a_mat.clone(),
        Direction::Inverse => spec.a_mat.transpose(),
    };
    let mode;
    let inner: &dyn FieldEval = if f.n() == 1 {
        mode = ModeField::new(f)?;
        &mode
    } else {
        f
    };
    let rotated = Rotated { inner, a_mat };
    let values = (0..f.grid.len())
        .into_par_iter()
        .map(|i| rotated.eval(&f.grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(f.like(values))
}
