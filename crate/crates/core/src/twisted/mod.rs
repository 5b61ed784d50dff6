//! Twisted spherical means, twisted convolution, Laguerre spectral
//! decompositions, angular projections and the twisted Laplacian.

pub mod convolution;
pub mod laplacian;
pub mod means;
pub mod radialize;
pub mod spectrum;

pub use convolution::{convolve_theta, twisted_convolution};
pub use laplacian::{apply_twisted_laplacian, apply_twisted_laplacian_with, twisted_laplacian_at};
pub use means::{
    lambda_twisted_mean, lambda_twisted_mean_at, mean_multiplier, modified_twisted_mean, modified_twisted_mean_at,
    theta_sphere_average,
    twisted_spherical_mean, twisted_spherical_mean_at,
};
pub use radialize::{fourier_coefficient_center, m_radialize};
pub use spectrum::{decompose, homogeneous_projection_expand, spectral_projection, synthesize, LaguerreSpectrum};

use crate::fields::PolarGrid;
use crate::C64;
use rustfft::FftPlanner;

/// Applies an FFT along the angular index of coordinate `axis` for every
/// ring and every sample of the other coordinate. Unnormalized in both
/// directions.
pub(crate) fn fft_axis(grid: &PolarGrid, values: &mut [C64], axis: usize, inverse: bool) {
    let a = grid.angular[axis];
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(a)
    } else {
        planner.plan_fft_forward(a)
    };
    let stride = grid.stride(axis);
    let rings = grid.radial[axis].len();
    let outer = grid.len() / grid.plane(axis) / stride;
    let mut buf = vec![C64::new(0.0, 0.0); a];
    for o in 0..outer {
        for ring in 0..rings {
            for s in 0..stride {
                let base = (o * grid.plane(axis) + ring * a) * stride + s;
                for (l, b) in buf.iter_mut().enumerate() {
                    *b = values[base + l * stride];
                }
                fft.process(&mut buf);
                for (l, b) in buf.iter().enumerate() {
                    values[base + l * stride] = *b;
                }
            }
        }
    }
}
