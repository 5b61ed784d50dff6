//! Sampled functions on ℂⁿ over polar-product grids.
//!
//! Each complex coordinate `z_j = r e^{iφ}` is sampled at Gauss–Legendre
//! radii on `(0, R_max)` times equispaced angles. Values are stored
//! row-major with coordinate 1 slowest; within a coordinate the radial
//! index is slower than the angular one.

pub mod interp;
pub mod io;

pub use interp::{AnalyticField, FieldEval, ModeField, Rotated};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fixed chunk length for deterministic parallel reductions.
pub(crate) const REDUCE_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialAxis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Barycentric weights of the Legendre nodes.
    pub bary: Vec<f64>,
}

impl RadialAxis {
    pub fn new(count: usize, r_max: f64) -> Result<Self> {
        let (x, w) = gauss_legendre(count)?;
        let h = 0.5 * r_max;
        let bary = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(i, (x, w))| {
                let s = ((1.0 - x * x) * w).sqrt();
                if i % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Ok(Self {
            nodes: x.iter().map(|t| h * (t + 1.0)).collect(),
            weights: w.iter().map(|v| v * h).collect(),
            bary,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Coefficients `c_i` with `p(ρ) = Σ c_i p(r_i)` for the global
    /// polynomial interpolant through all nodes.
    pub fn barycentric_coefficients(&self, rho: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.len()];
        if let Some(i) = self.nodes.iter().position(|&r| r == rho) {
            c[i] = 1.0;
            return c;
        }
        let mut s = 0.0;
        for i in 0..self.len() {
            c[i] = self.bary[i] / (rho - self.nodes[i]);
            s += c[i];
        }
        for v in c.iter_mut() {
            *v /= s;
        }
        c
    }
}

/// Polar-product grid on the polydisc `|z_j| ≤ R_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub n: usize,
    pub r_max: f64,
    pub radial: Vec<RadialAxis>,
    pub angular: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    pub radial: Vec<usize>,
    pub angular: Vec<usize>,
}

impl PolarGrid {
    pub fn new(r_max: f64, radial: &[usize], angular: &[usize]) -> Result<Self> {
        let n = radial.len();
        if n == 0 || angular.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid needs one radial and one angular count per coordinate, got {} and {}",
                radial.len(),
                angular.len()
            )));
        }
        if n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
        }
        for &a in angular {
            if a < 4 || !a.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "angular count {a} must be a power of two and at least 4"
                )));
            }
        }
        if radial.contains(&0) {
            return Err(Error::InvalidArgument("radial counts must be positive".into()));
        }
        let radial = radial
            .iter()
            .map(|&c| RadialAxis::new(c, r_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            r_max,
            radial,
            angular: angular.to_vec(),
        })
    }

    /// Same counts in every coordinate.
    pub fn uniform(n: usize, radial: usize, angular: usize, r_max: f64) -> Result<Self> {
        Self::new(r_max, &vec![radial; n], &vec![angular; n])
    }

    /// 96 × 256 with `R_max = 12` for `n = 1`; 48 × 64 per coordinate with
    /// `R_max = 8` for `n = 2`.
    pub fn default_for(n: usize) -> Result<Self> {
        match n {
            1 => Self::uniform(1, 96, 256, 12.0),
            2 => Self::uniform(2, 48, 64, 8.0),
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(spec.r_max, &spec.radial, &spec.angular)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            r_max: self.r_max,
            radial: self.radial.iter().map(|a| a.len()).collect(),
            angular: self.angular.clone(),
        }
    }

    /// Number of samples of coordinate `j`.
    pub fn plane(&self, j: usize) -> usize {
        self.radial[j].len() * self.angular[j]
    }

    pub fn len(&self) -> usize {
        (0..self.n).map(|j| self.plane(j)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, j: usize) -> usize {
        (j + 1..self.n).map(|k| self.plane(k)).product()
    }

    /// Per-coordinate plane indices of a flat index.
    pub fn split(&self, idx: usize) -> [usize; 2] {
        match self.n {
            1 => [idx, 0],
            _ => [idx / self.plane(1), idx % self.plane(1)],
        }
    }

    pub fn coord(&self, j: usize, p: usize) -> C64 {
        let a = self.angular[j];
        let (i, k) = (p / a, p % a);
        C64::from_polar(self.radial[j].nodes[i], 2.0 * PI * k as f64 / a as f64)
    }

    pub fn coord_weight(&self, j: usize, p: usize) -> f64 {
        let a = self.angular[j];
        let i = p / a;
        self.radial[j].weights[i] * self.radial[j].nodes[i] * 2.0 * PI / a as f64
    }

    pub fn point(&self, idx: usize) -> Vec<C64> {
        let p = self.split(idx);
        (0..self.n).map(|j| self.coord(j, p[j])).collect()
    }

    /// Volume quadrature weight of a flat index.
    pub fn weight(&self, idx: usize) -> f64 {
        let p = self.split(idx);
        (0..self.n).map(|j| self.coord_weight(j, p[j])).product()
    }

    pub fn points(&self) -> Vec<Vec<C64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// `e^{-R_max²/4}`, the size of a Gaussian-class field at the rim.
    pub fn truncation_bound(&self) -> f64 {
        (-self.r_max * self.r_max / 4.0).exp()
    }

    pub fn same_as(&self, other: &PolarGrid) -> bool {
        self.spec() == other.spec()
    }
}

/// What a field is taken to be outside the sampled polydisc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    #[default]
    Zero,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: PolarGrid,
    pub values: Vec<C64>,
    pub metadata: String,
    pub extension: Extension,
}

impl SampledField {
    pub fn from_values(grid: PolarGrid, values: Vec<C64>, metadata: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self {
            grid,
            values,
            metadata: metadata.into(),
            extension: Extension::Zero,
        })
    }

    pub fn zeros(grid: PolarGrid) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); len],
            metadata: String::new(),
            extension: Extension::Zero,
        }
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// A field on the same grid with new values.
    pub fn like(&self, values: Vec<C64>) -> Self {
        Self {
            grid: self.grid.clone(),
            values,
            metadata: self.metadata.clone(),
            extension: self.extension,
        }
    }

    pub fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        inner_product(self, self).expect("same grid").re.max(0.0).sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        self.like(self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &SampledField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.like(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &SampledField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.like(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn max_diff(&self, other: &SampledField) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `‖self - other‖₂ / ‖other‖₂`.
    pub fn relative_l2_error(&self, reference: &SampledField) -> Result<f64> {
        let d = self.sub(reference)?.norm_l2();
        let r = reference.norm_l2();
        Ok(if r == 0.0 { d } else { d / r })
    }

    /// Radius/value pairs along angle index `angle` of coordinate 1 (with the
    /// other coordinate at plane index 0), as CSV `r,re,im`.
    pub fn write_slice_csv<W: std::io::Write>(&self, out: W, angle: usize) -> Result<()> {
        let a = self.grid.angular[0];
        if angle >= a {
            return Err(Error::InvalidArgument(format!("angle index {angle} >= {a}")));
        }
        let stride = self.grid.stride(0);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "re", "im"])
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for (i, r) in self.grid.radial[0].nodes.iter().enumerate() {
            let v = self.values[(i * a + angle) * stride];
            w.write_record([format!("{r:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `expr` at every node.
pub fn sample<F>(expr: F, grid: &PolarGrid) -> Result<SampledField>
where
    F: Fn(&[C64]) -> C64 + Sync,
{
    let values: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|i| expr(&grid.point(i)))
        .collect();
    let meta = format!("truncation bound {:.3e}", grid.truncation_bound());
    SampledField::from_values(grid.clone(), values, meta)
}

/// Like [`sample`] for fallible expressions.
pub fn try_sample<F>(expr: F, grid: &PolarGrid) -> Result<SampledField>
where
    F: Fn(&[C64]) -> Result<C64> + Sync,
{
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| expr(&grid.point(i)))
        .collect::<Result<Vec<C64>>>()?;
    let meta = format!("truncation bound {:.3e}", grid.truncation_bound());
    SampledField::from_values(grid.clone(), values, meta)
}

/// `Σ_i w_i a_i` in a fixed order over fixed-size chunks.
pub(crate) fn weighted_sum(grid: &PolarGrid, terms: &[C64]) -> C64 {
    let partial: Vec<C64> = terms
        .par_chunks(REDUCE_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let base = c * REDUCE_CHUNK;
            let mut acc = C64::new(0.0, 0.0);
            for (k, t) in chunk.iter().enumerate() {
                acc += t * grid.weight(base + k);
            }
            acc
        })
        .collect();
    partial.into_iter().fold(C64::new(0.0, 0.0), |a, b| a + b)
}

/// `∫ f ḡ` by the grid's product rule.
pub fn inner_product(f: &SampledField, g: &SampledField) -> Result<C64> {
    f.check_same_grid(g)?;
    let terms: Vec<C64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).collect();
    Ok(weighted_sum(&f.grid, &terms))
}

/// Samples on a periodic centre grid `[0, 2π)^m`, one spatial field per
/// centre sample (centre index slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub grid: PolarGrid,
    pub m: usize,
    pub t_samples: Vec<usize>,
    pub values: Vec<C64>,
    pub metadata: String,
}

impl PeriodicField {
    pub fn new(grid: PolarGrid, t_samples: Vec<usize>, values: Vec<C64>, metadata: impl Into<String>) -> Result<Self> {
        let m = t_samples.len();
        if m == 0 {
            return Err(Error::DimensionMismatch("centre dimension must be positive".into()));
        }
        for &t in &t_samples {
            if t < 4 || !t.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "centre sample count {t} must be a power of two and at least 4"
                )));
            }
        }
        let total = grid.len() * t_samples.iter().product::<usize>();
        if values.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {total} nodes",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self {
            grid,
            m,
            t_samples,
            values,
            metadata: metadata.into(),
        })
    }

    pub fn center_len(&self) -> usize {
        self.t_samples.iter().product()
    }

    /// Centre coordinates of centre index `c`.
    pub fn t_point(&self, c: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.m];
        let mut rest = c;
        for j in (0..self.m).rev() {
            let s = self.t_samples[j];
            t[j] = 2.0 * PI * (rest % s) as f64 / s as f64;
            rest /= s;
        }
        t
    }

    /// The spatial field at centre index `c`.
    pub fn slice(&self, c: usize) -> SampledField {
        let len = self.grid.len();
        SampledField {
            grid: self.grid.clone(),
            values: self.values[c * len..(c + 1) * len].to_vec(),
            metadata: self.metadata.clone(),
            extension: Extension::Zero,
        }
    }

    /// Evaluates `expr(z, t)` on every node.
    pub fn sample<F>(expr: F, grid: &PolarGrid, t_samples: &[usize]) -> Result<Self>
    where
        F: Fn(&[C64], &[f64]) -> C64 + Sync,
    {
        let skeleton = Self {
            grid: grid.clone(),
            m: t_samples.len(),
            t_samples: t_samples.to_vec(),
            values: Vec::new(),
            metadata: String::new(),
        };
        let len = grid.len();
        let values: Vec<C64> = (0..len * skeleton.center_len())
            .into_par_iter()
            .map(|i| expr(&grid.point(i % len), &skeleton.t_point(i / len)))
            .collect();
        Self::new(grid.clone(), t_samples.to_vec(), values, format!(
            "truncation bound {:.3e}",
            grid.truncation_bound()
        ))
    }

    pub fn norm_l2(&self) -> f64 {
        let cells = self.center_len() as f64;
        let vol = (2.0 * PI).powi(self.m as i32) / cells;
        let mut acc = 0.0;
        for c in 0..self.center_len() {
            let s = self.slice(c);
            acc += inner_product(&s, &s).expect("same grid").re;
        }
        (acc * vol).max(0.0).sqrt()
    }

    pub fn sub(&self, other: &PeriodicField) -> Result<PeriodicField> {
        if !self.grid.same_as(&other.grid) || self.t_samples != other.t_samples {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{psi_alpha_beta, theta_k};

    fn small() -> PolarGrid {
        PolarGrid::uniform(1, 48, 64, 8.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PolarGrid::uniform(1, 10, 6, 1.0).is_err());
        assert!(PolarGrid::uniform(1, 10, 2, 1.0).is_err());
        assert!(PolarGrid::uniform(3, 4, 4, 1.0).is_err());
        let g = PolarGrid::default_for(1).unwrap();
        assert_eq!(g.len(), 96 * 256);
        assert!(g.radial[0].weights.iter().all(|&w| w > 0.0));
        assert!(g.radial[0].nodes.windows(2).all(|w| w[1] > w[0]));
        let g2 = PolarGrid::uniform(2, 3, 4, 1.0).unwrap();
        assert_eq!(g2.len(), 144);
        let p = g2.point(5 * 12 + 7);
        assert_eq!(p[0], g2.coord(0, 5));
        assert_eq!(p[1], g2.coord(1, 7));
    }

    #[test]
    fn sampling_examples() {
        let g = small();
        let one = sample(|_| C64::new(1.0, 0.0), &g).unwrap();
        assert!(one.values.iter().all(|v| *v == C64::new(1.0, 0.0)));
        let phi0 = sample(|z| C64::new((-z[0].norm_sqr() / 4.0).exp(), 0.0), &g).unwrap();
        let i = 5 * 64 + 3;
        let r = g.radial[0].nodes[5];
        assert!((phi0.values[i].re - (-r * r / 4.0).exp()).abs() < 1e-15);
        let psi = try_sample(|z| psi_alpha_beta(&[0], &[0], &[1.0], z), &g).unwrap();
        let e = (2.0 * PI).powf(-0.5) * (-r * r / 4.0).exp();
        assert!((psi.values[i] - e).norm() < 1e-15);
        let bad = sample(|z| C64::new(1.0 / (z[0].re - z[0].re), 0.0), &g);
        assert!(matches!(bad, Err(Error::NonFiniteValue { index: 0 })));
    }

    #[test]
    fn gaussian_integrals() {
        let g = small();
        let phi0 = sample(|z| C64::new((-z[0].norm_sqr() / 4.0).exp(), 0.0), &g).unwrap();
        let ip = inner_product(&phi0, &phi0).unwrap();
        assert!((ip.re - 2.0 * PI).abs() < 1e-8 && ip.im == 0.0);
        let g = PolarGrid::uniform(1, 48, 16, 8.0).unwrap();
        let f = sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g).unwrap();
        let one = sample(|_| C64::new(1.0, 0.0), &g).unwrap();
        assert!((inner_product(&f, &one).unwrap().re - PI).abs() < 1e-8);
    }

    #[test]
    fn orthogonality_and_symmetry() {
        let g = small();
        let a = try_sample(|z| psi_alpha_beta(&[0], &[1], &[1.0], z), &g).unwrap();
        let b = try_sample(|z| psi_alpha_beta(&[0], &[0], &[1.0], z), &g).unwrap();
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-10);
        let c = try_sample(|z| Ok(C64::new(theta_k(2, &[1.0], z)?, z[0].im)), &g).unwrap();
        assert_eq!(inner_product(&a, &c).unwrap(), inner_product(&c, &a).unwrap().conj());
        let s = inner_product(&c, &c).unwrap();
        assert!(s.re >= 0.0 && s.im == 0.0);
        let other = PolarGrid::uniform(1, 40, 64, 8.0).unwrap();
        assert!(matches!(inner_product(&a, &SampledField::zeros(other)), Err(Error::GridMismatch)));
    }

    #[test]
    fn two_dimensional_normalization() {
        // ‖Ψ_αβ‖ = 1 for α = (2, 1), λ' = (1, 3)
        let g = PolarGrid::uniform(2, 40, 16, 10.0).unwrap();
        let f = try_sample(|z| psi_alpha_beta(&[2, 1], &[1, 0], &[1.0, 3.0], z), &g).unwrap();
        assert!((f.norm_l2() - 1.0).abs() < 1e-8, "{}", f.norm_l2());
    }

    #[test]
    fn periodic_layout() {
        let g = PolarGrid::uniform(1, 4, 4, 1.0).unwrap();
        let p = PeriodicField::sample(|z, t| C64::new(z[0].norm() * t[0].cos(), 0.0), &g, &[8]).unwrap();
        assert_eq!(p.values.len(), 16 * 8);
        let s = p.slice(2);
        assert!((s.values[5].re - g.point(5)[0].norm() * (PI / 2.0).cos()).abs() < 1e-15);
        assert!(PeriodicField::new(g, vec![6], vec![], "").is_err());
    }
}
