//! Pointwise evaluation of fields off the grid.

use super::{Extension, PolarGrid, SampledField};
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Anything that can be evaluated at a point of ℂⁿ.
pub trait FieldEval: Sync {
    fn n(&self) -> usize;
    fn eval(&self, z: &[C64]) -> Result<C64>;
}

/// A closure viewed as a field.
pub struct AnalyticField<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[C64]) -> C64 + Sync> AnalyticField<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[C64]) -> C64 + Sync> FieldEval for AnalyticField<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[C64]) -> Result<C64> {
        Ok((self.f)(z))
    }
}

/// `(z_1, …, z_n) ↦ (Re z_1, …, Re z_n, Im z_1, …, Im z_n)`.
pub fn to_real(z: &[C64]) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

pub fn to_complex(x: &DVector<f64>) -> Vec<C64> {
    let n = x.len() / 2;
    (0..n).map(|j| C64::new(x[j], x[n + j])).collect()
}

/// `x ↦ f(A x)` in real coordinates.
pub struct Rotated<'a> {
    pub inner: &'a dyn FieldEval,
    pub a_mat: DMatrix<f64>,
}

impl FieldEval for Rotated<'_> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn eval(&self, z: &[C64]) -> Result<C64> {
        let x = to_real(z);
        self.inner.eval(&to_complex(&(&self.a_mat * x)))
    }
}

/// Lagrange basis values at `x` for the given nodes.
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let p = nodes.len();
    let mut w = vec![1.0; p];
    for i in 0..p {
        for j in 0..p {
            if i != j {
                w[i] *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    w
}

/// `(plane index, weight)` pairs for a local tensor stencil of `order`
/// points in radius and angle for one coordinate.
///
/// Radii below the first node use the reflected nodes `-r_i`, whose
/// samples are the values at `r_i` and angle `φ + π`.
pub(crate) fn coordinate_stencil(grid: &PolarGrid, j: usize, z: C64, order: usize) -> Vec<(usize, f64)> {
    let axis = &grid.radial[j];
    let nr = axis.len() as isize;
    let a = grid.angular[j];
    let rho = z.norm();
    let phi = z.arg().rem_euclid(2.0 * PI);
    let p = order.min(2 * axis.len()) as isize;
    let ext = |e: isize| -> f64 {
        if e >= 0 {
            axis.nodes[e as usize]
        } else {
            -axis.nodes[(-e - 1) as usize]
        }
    };
    let above = axis.nodes.partition_point(|&r| r <= rho) as isize;
    let start = (above - p / 2).clamp(-nr, nr - p);
    let rnodes: Vec<f64> = (start..start + p).map(ext).collect();
    let rw = lagrange_weights(&rnodes, rho);

    let pa = order.min(a);
    let t = phi / (2.0 * PI / a as f64);
    let base = t.floor() as isize - (pa as isize / 2 - 1);
    let anodes: Vec<f64> = (0..pa).map(|k| (base + k as isize) as f64).collect();
    let aw = lagrange_weights(&anodes, t);

    let mut out = Vec::with_capacity(rnodes.len() * pa);
    for (k, e) in (start..start + p).enumerate() {
        let (ri, shift) = if e >= 0 {
            (e as usize, 0)
        } else {
            ((-e - 1) as usize, a / 2)
        };
        for (l, w) in aw.iter().enumerate() {
            let ai = ((base + l as isize).rem_euclid(a as isize) as usize + shift) % a;
            out.push((ri * a + ai, rw[k] * w));
        }
    }
    out
}

impl SampledField {
    fn outside(&self, z: &[C64]) -> Option<f64> {
        z.iter().map(|w| w.norm()).find(|&r| r > self.grid.r_max)
    }

    /// Local tensor Lagrange interpolation with `order` points per direction
    /// (`order = 4` is bicubic).
    pub fn eval_local(&self, z: &[C64], order: usize) -> Result<C64> {
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, field has n = {}",
                z.len(),
                self.n()
            )));
        }
        if let Some(radius) = self.outside(z) {
            return match self.extension {
                Extension::Zero => Ok(C64::new(0.0, 0.0)),
                Extension::Error => Err(Error::OutOfDomain {
                    radius,
                    r_max: self.grid.r_max,
                }),
            };
        }
        let s0 = coordinate_stencil(&self.grid, 0, z[0], order);
        let mut acc = C64::new(0.0, 0.0);
        if self.n() == 1 {
            for (p, w) in s0 {
                acc += self.values[p] * w;
            }
        } else {
            let s1 = coordinate_stencil(&self.grid, 1, z[1], order);
            let stride = self.grid.plane(1);
            for (p, w) in &s0 {
                let row = &self.values[p * stride..(p + 1) * stride];
                let mut inner = C64::new(0.0, 0.0);
                for (q, v) in &s1 {
                    inner += row[*q] * v;
                }
                acc += inner * w;
            }
        }
        Ok(acc)
    }
}

impl FieldEval for SampledField {
    fn n(&self) -> usize {
        self.grid.n
    }
    fn eval(&self, z: &[C64]) -> Result<C64> {
        self.eval_local(z, 4)
    }
}

/// Angular Fourier coefficients per ring, `f(r_i, φ) = Σ_m F_m(r_i) e^{imφ}`,
/// in FFT order.
pub fn angular_modes(grid: &PolarGrid, values: &[C64]) -> Vec<Vec<C64>> {
    let a = grid.angular[0];
    let fft = FftPlanner::new().plan_fft_forward(a);
    values
        .chunks(a)
        .map(|ring| {
            let mut buf = ring.to_vec();
            fft.process(&mut buf);
            buf.iter().map(|v| v / a as f64).collect()
        })
        .collect()
}

/// Signed mode number of FFT bin `k` out of `a`.
pub fn mode_of_bin(k: usize, a: usize) -> i64 {
    if k < a / 2 {
        k as i64
    } else {
        k as i64 - a as i64
    }
}

/// Spectral interpolant of a field on ℂ: trigonometric in angle and a global
/// polynomial through the Gauss–Legendre radii in each angular mode.
pub struct ModeField {
    grid: PolarGrid,
    modes: Vec<Vec<C64>>,
    extension: Extension,
}

impl ModeField {
    pub fn new(f: &SampledField) -> Result<Self> {
        if f.n() != 1 {
            return Err(Error::UnsupportedDimension(f.n()));
        }
        Ok(Self {
            grid: f.grid.clone(),
            modes: angular_modes(&f.grid, &f.values),
            extension: f.extension,
        })
    }

    pub fn modes(&self) -> &[Vec<C64>] {
        &self.modes
    }

    /// All angular coefficients at radius `rho`.
    pub fn modes_at(&self, rho: f64) -> Vec<C64> {
        let c = self.grid.radial[0].barycentric_coefficients(rho);
        let a = self.grid.angular[0];
        let mut out = vec![C64::new(0.0, 0.0); a];
        for (ci, ring) in c.iter().zip(&self.modes) {
            for (o, v) in out.iter_mut().zip(ring) {
                *o += v * ci;
            }
        }
        out
    }
}

/// `Σ_m F_m e^{imφ}` with the Nyquist bin read as a cosine.
pub fn synthesize_angle(modes: &[C64], phi: f64) -> C64 {
    let a = modes.len();
    let mut acc = C64::new(0.0, 0.0);
    for (k, v) in modes.iter().enumerate() {
        if k == a / 2 {
            acc += v * (phi * (a / 2) as f64).cos();
        } else {
            acc += v * C64::from_polar(1.0, mode_of_bin(k, a) as f64 * phi);
        }
    }
    acc
}

impl FieldEval for ModeField {
    fn n(&self) -> usize {
        1
    }
    fn eval(&self, z: &[C64]) -> Result<C64> {
        let rho = z[0].norm();
        if rho > self.grid.r_max {
            return match self.extension {
                Extension::Zero => Ok(C64::new(0.0, 0.0)),
                Extension::Error => Err(Error::OutOfDomain {
                    radius: rho,
                    r_max: self.grid.r_max,
                }),
            };
        }
        Ok(synthesize_angle(&self.modes_at(rho), z[0].arg()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample;

    fn smooth(z: &[C64]) -> C64 {
        let w = z[0];
        C64::new(w.re * 0.7 + 0.2, w.im - 0.3 * w.re * w.im) * (-w.norm_sqr() / 2.0).exp()
    }

    #[test]
    fn local_interpolation_is_exact_on_nodes_and_accurate_between() {
        let g = PolarGrid::uniform(1, 64, 128, 8.0).unwrap();
        let f = sample(smooth, &g).unwrap();
        for idx in [0, 77, 1000, 4000] {
            let z = g.point(idx);
            assert!((f.eval(&z).unwrap() - f.values[idx]).norm() < 1e-12);
        }
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let z = [C64::from_polar(0.013 + 0.031 * k as f64, 0.37 * k as f64)];
            worst = worst.max((f.eval(&z).unwrap() - smooth(&z)).norm());
        }
        assert!(worst < 1e-4, "{worst:e}");
    }

    #[test]
    fn spectral_interpolation() {
        let g = PolarGrid::uniform(1, 64, 64, 10.0).unwrap();
        let f = sample(smooth, &g).unwrap();
        let mf = ModeField::new(&f).unwrap();
        for k in 0..50 {
            let z = [C64::from_polar(0.011 + 0.13 * k as f64, 1.1 * k as f64)];
            assert!((mf.eval(&z).unwrap() - smooth(&z)).norm() < 1e-12);
        }
    }

    #[test]
    fn outside_support() {
        let g = PolarGrid::uniform(1, 8, 8, 1.0).unwrap();
        let f = sample(|_| C64::new(1.0, 0.0), &g).unwrap();
        assert_eq!(f.eval(&[C64::new(2.0, 0.0)]).unwrap(), C64::new(0.0, 0.0));
        let f = f.with_extension(Extension::Error);
        assert!(matches!(f.eval(&[C64::new(2.0, 0.0)]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn two_dimensional_local() {
        let g = PolarGrid::uniform(2, 24, 32, 6.0).unwrap();
        let h = |z: &[C64]| C64::new((-(z[0].norm_sqr() + 2.0 * z[1].norm_sqr()) / 2.0).exp(), z[0].re * 0.1);
        let f = sample(h, &g).unwrap();
        let z = [C64::new(0.4, -0.3), C64::new(-0.2, 0.9)];
        assert!((f.eval(&z).unwrap() - h(&z)).norm() < 1e-3);
    }
}
