//! Angular projections in `z` and Fourier coefficients in the centre.

use super::fft_axis;
use crate::error::{Error, Result};
use crate::fields::{PeriodicField, SampledField};
use crate::C64;
use std::f64::consts::PI;

/// `R_m f(z) = (2π)^{-n} ∫ f(e^{iθ} z) e^{-i m·θ} dθ`, computed by keeping a
/// single bin of the angular DFT in each coordinate.
pub fn m_radialize(f: &SampledField, m_index: &[i64]) -> Result<SampledField> {
    let grid = &f.grid;
    if m_index.len() != grid.n {
        return Err(Error::DimensionMismatch(format!(
            "m has {} entries, field lives on C^{}",
            m_index.len(),
            grid.n
        )));
    }
    for (j, &m) in m_index.iter().enumerate() {
        let a = grid.angular[j];
        if a as u64 <= 2 * m.unsigned_abs() {
            return Err(Error::NyquistViolation { mode: m, samples: a });
        }
    }
    let mut values = f.values.clone();
    for (j, &m) in m_index.iter().enumerate() {
        let a = grid.angular[j];
        let keep = m.rem_euclid(a as i64) as usize;
        let stride = grid.stride(j);
        fft_axis(grid, &mut values, j, false);
        for (idx, v) in values.iter_mut().enumerate() {
            if (idx / stride) % a != keep {
                *v = C64::new(0.0, 0.0);
            } else {
                *v /= a as f64;
            }
        }
        fft_axis(grid, &mut values, j, true);
    }
    Ok(f.like(values))
}

/// `f^l(z) = ∫_{[0,2π]^m} f(z, t) e^{i l·t} dt` by the trapezoid rule on the
/// centre samples.
pub fn fourier_coefficient_center(f: &PeriodicField, l: &[i64]) -> Result<SampledField> {
    if l.len() != f.m {
        return Err(Error::DimensionMismatch(format!("l has {} entries, centre has dimension {}", l.len(), f.m)));
    }
    for (j, &lj) in l.iter().enumerate() {
        if f.t_samples[j] as u64 <= 2 * lj.unsigned_abs() {
            return Err(Error::NyquistViolation {
                mode: lj,
                samples: f.t_samples[j],
            });
        }
    }
    let cells = f.center_len();
    let vol = (2.0 * PI).powi(f.m as i32) / cells as f64;
    let len = f.grid.len();
    let mut out = vec![C64::new(0.0, 0.0); len];
    for c in 0..cells {
        let t = f.t_point(c);
        let arg: f64 = l.iter().zip(&t).map(|(a, b)| *a as f64 * b).sum();
        let e = C64::from_polar(vol, arg);
        for (o, v) in out.iter_mut().zip(&f.values[c * len..(c + 1) * len]) {
            *o += v * e;
        }
    }
    SampledField::from_values(f.grid.clone(), out, f.metadata.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, PolarGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &PolarGrid, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SampledField::from_values(grid.clone(), v, "").unwrap()
    }

    #[test]
    fn homogeneous_input_is_fixed() {
        let g = PolarGrid::uniform(1, 12, 16, 5.0).unwrap();
        let f = sample(|z| z[0].conj() * z[0].conj() * (-z[0].norm_sqr()).exp(), &g).unwrap();
        assert!(m_radialize(&f, &[-2]).unwrap().max_diff(&f).unwrap() < 1e-14);
        assert!(m_radialize(&f, &[2]).unwrap().max_abs() < 1e-14);
        assert!(matches!(m_radialize(&f, &[8]), Err(Error::NyquistViolation { .. })));
    }

    #[test]
    fn modes_sum_to_identity_in_two_dimensions() {
        let g8 = PolarGrid::uniform(2, 3, 8, 5.0).unwrap();
        let band = sample(|z| z[0] * z[1].conj() + z[0].conj() * z[0].conj() + C64::new(1.0, 0.0), &g8).unwrap();
        let mut sum = band.scale(C64::new(0.0, 0.0));
        for m1 in -3..=3 {
            for m2 in -3..=3 {
                sum = sum.add(&m_radialize(&band, &[m1, m2]).unwrap()).unwrap();
            }
        }
        assert!(sum.max_diff(&band).unwrap() < 1e-12);
    }

    #[test]
    fn zero_mode_is_rotation_invariant() {
        let g = PolarGrid::uniform(1, 8, 16, 5.0).unwrap();
        let r0 = m_radialize(&random_field(&g, 7), &[0]).unwrap();
        for ring in r0.values.chunks(16) {
            let mean: C64 = ring.iter().sum::<C64>() / 16.0;
            let var: f64 = ring.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / 16.0;
            assert!(var < 1e-24);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn radialization_is_idempotent(seed in 0u64..1000, m in -7i64..=7) {
            let g = PolarGrid::uniform(1, 4, 16, 5.0).unwrap();
            let once = m_radialize(&random_field(&g, seed), &[m]).unwrap();
            let twice = m_radialize(&once, &[m]).unwrap();
            prop_assert!(twice.max_diff(&once).unwrap() < 1e-14);
        }
    }

    #[test]
    fn centre_coefficients() {
        let g = PolarGrid::uniform(1, 6, 8, 5.0).unwrap();
        let f = PeriodicField::sample(|z, t| C64::from_polar((-z[0].norm_sqr()).exp(), -2.0 * t[0]), &g, &[8]).unwrap();
        let two = fourier_coefficient_center(&f, &[2]).unwrap();
        let expect = sample(|z| C64::new(2.0 * PI * (-z[0].norm_sqr()).exp(), 0.0), &g).unwrap();
        assert!(two.max_diff(&expect).unwrap() < 1e-12);
        assert!(fourier_coefficient_center(&f, &[1]).unwrap().max_abs() < 1e-12);
        assert!(matches!(fourier_coefficient_center(&f, &[4]), Err(Error::NyquistViolation { .. })));
        let flat = PeriodicField::sample(|z, _| z[0], &g, &[4]).unwrap();
        assert!(fourier_coefficient_center(&flat, &[1]).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn centre_parseval() {
        let g = PolarGrid::uniform(1, 4, 8, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coef: Vec<(i64, C64)> = (-3..=3).map(|l| (l, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
        let f = PeriodicField::sample(
            |z, t| coef.iter().map(|(l, c)| c * C64::from_polar(1.0, -(*l as f64) * t[0])).sum::<C64>() * (-z[0].norm_sqr()).exp(),
            &g,
            &[8],
        )
        .unwrap();
        let mut total = 0.0;
        for l in -3..=3 {
            let c = fourier_coefficient_center(&f, &[l]).unwrap();
            total += c.norm_l2().powi(2) / (2.0 * PI);
        }
        assert!((total - f.norm_l2().powi(2)).abs() < 1e-10 * total);
    }
}
