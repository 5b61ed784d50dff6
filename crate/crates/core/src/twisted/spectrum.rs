//! Laguerre spectral decomposition
//! `f = (Π_j λ'_j/2π) Σ_k f ×_λ' θ_{k,λ'}`.

use super::convolution::convolve_theta;
use super::radialize::m_radialize;
use crate::error::{Error, Result};
use crate::fields::io::{read_field, write_field, Encoding};
use crate::fields::{inner_product, try_sample, SampledField};
use crate::special::{check_lambda_prime, multi_indices, psi_alpha_beta};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Largest truncation degree for fields on ℂ.
pub const MAX_DEGREE_1D: usize = 40;
/// Largest truncation degree for fields on ℂ².
pub const MAX_DEGREE_2D: usize = 12;

/// The projections `f ×_λ' θ_{k,λ'}` for `k = 0..=K`.
#[derive(Debug, Clone)]
pub struct LaguerreSpectrum {
    pub lambda_prime: Vec<f64>,
    pub projections: Vec<SampledField>,
    /// Whether `Π λ'_j/2π` has been applied to every projection.
    pub normalized: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub k: usize,
    pub norm: f64,
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumManifest {
    pub lambda_prime: Vec<f64>,
    pub k_max: usize,
    pub normalized: bool,
    pub entries: Vec<ManifestEntry>,
}

/// `Π_j λ'_j / 2π`.
pub fn prefactor(lambda_prime: &[f64]) -> f64 {
    lambda_prime.iter().map(|l| l / (2.0 * PI)).product()
}

impl LaguerreSpectrum {
    pub fn k_max(&self) -> usize {
        self.projections.len() - 1
    }

    /// The projections scaled by `Π λ'_j/2π`.
    pub fn normalize(mut self) -> Self {
        if !self.normalized {
            let c = C64::new(prefactor(&self.lambda_prime), 0.0);
            self.projections = self.projections.iter().map(|p| p.scale(c)).collect();
            self.normalized = true;
        }
        self
    }

    /// L² norm of each normalized projection.
    pub fn norms(&self) -> Vec<f64> {
        let c = if self.normalized { 1.0 } else { prefactor(&self.lambda_prime) };
        self.projections.iter().map(|p| c * p.norm_l2()).collect()
    }

    pub fn manifest(&self) -> SpectrumManifest {
        SpectrumManifest {
            lambda_prime: self.lambda_prime.clone(),
            k_max: self.k_max(),
            normalized: self.normalized,
            entries: self
                .norms()
                .into_iter()
                .enumerate()
                .map(|(k, norm)| ManifestEntry {
                    k,
                    norm,
                    file: format!("projection_{k:03}.field"),
                })
                .collect(),
        }
    }

    /// Writes one field file per degree and `manifest.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let manifest = self.manifest();
        for (entry, p) in manifest.entries.iter().zip(&self.projections) {
            write_field(p, dir.join(&entry.file), encoding)?;
        }
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: SpectrumManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        if manifest.entries.len() != manifest.k_max + 1 {
            return Err(Error::InvalidArgument("manifest entry count does not match k_max".into()));
        }
        let mut projections = Vec::with_capacity(manifest.entries.len());
        for (k, e) in manifest.entries.iter().enumerate() {
            if e.k != k {
                return Err(Error::InvalidArgument(format!("manifest entry {k} has degree {}", e.k)));
            }
            let f = read_field(dir.join(&e.file))?.into_sampled()?;
            if let Some(first) = projections.first() {
                f.check_same_grid(first)?;
            }
            projections.push(f);
        }
        check_lambda_prime(&manifest.lambda_prime)?;
        Ok(Self {
            lambda_prime: manifest.lambda_prime,
            projections,
            normalized: manifest.normalized,
        })
    }
}

fn degree_cap(n: usize) -> Result<usize> {
    match n {
        1 => Ok(MAX_DEGREE_1D),
        2 => Ok(MAX_DEGREE_2D),
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// `f ×_λ' θ_{k,λ'}`, unnormalized.
pub fn spectral_projection(f: &SampledField, k: usize, lambda_prime: &[f64]) -> Result<SampledField> {
    let cap = degree_cap(f.n())?;
    if k > cap {
        return Err(Error::RangeExceeded {
            what: "projection degree",
            value: k as f64,
            max: cap as f64,
        });
    }
    Ok(convolve_theta(f, &[k], lambda_prime)?.remove(0))
}

/// All projections `k ≤ K`, unnormalized.
///
/// With `tail_tolerance` set, the normalized norm of the degree-`K`
/// projection relative to `‖f‖₂` is the tail estimate, and exceeding the
/// tolerance raises `TruncationDominates`.
pub fn decompose(f: &SampledField, lambda_prime: &[f64], k_max: usize, tail_tolerance: Option<f64>) -> Result<LaguerreSpectrum> {
    let cap = degree_cap(f.n())?;
    if k_max > cap {
        return Err(Error::RangeExceeded {
            what: "truncation degree",
            value: k_max as f64,
            max: cap as f64,
        });
    }
    let degrees: Vec<usize> = (0..=k_max).collect();
    let projections = convolve_theta(f, &degrees, lambda_prime)?;
    let spec = LaguerreSpectrum {
        lambda_prime: lambda_prime.to_vec(),
        projections,
        normalized: false,
    };
    if let Some(tol) = tail_tolerance {
        let norm = f.norm_l2();
        if norm > 0.0 {
            let tail = spec.norms()[k_max] / norm;
            if tail > tol {
                return Err(Error::TruncationDominates {
                    estimate: tail,
                    tolerance: tol,
                });
            }
        }
    }
    Ok(spec)
}

/// `(Π λ'_j/2π) Σ_k f ×_λ' θ_k`.
pub fn synthesize(spec: &LaguerreSpectrum) -> Result<SampledField> {
    let first = spec
        .projections
        .first()
        .ok_or_else(|| Error::InvalidArgument("spectrum has no projections".into()))?;
    let mut acc = vec![C64::new(0.0, 0.0); first.values.len()];
    for p in &spec.projections {
        first.check_same_grid(p)?;
        for (a, v) in acc.iter_mut().zip(&p.values) {
            *a += v;
        }
    }
    let c = if spec.normalized { 1.0 } else { prefactor(&spec.lambda_prime) };
    Ok(first.like(acc.into_iter().map(|v| v * c).collect()))
}

/// One term `(f, Ψ_{β-m,β})` of the expansion of an m-homogeneous field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousCoefficient {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub value: C64,
}

/// Inner products `(f, Ψ_{β-m,β})` over `|β| = k`, skipping `β` with a
/// negative entry in `β - m`.
///
/// `f ×_λ' θ_k = Π_j(2π/λ'_j) Σ (f, Ψ_{β-m,β}) Ψ_{β-m,β}`; see
/// [`reconstruct_projection`].
pub fn homogeneous_projection_expand(
    f: &SampledField,
    m_index: &[i64],
    k: usize,
    lambda_prime: &[f64],
) -> Result<Vec<HomogeneousCoefficient>> {
    check_lambda_prime(lambda_prime)?;
    if lambda_prime.len() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "lambda' has length {}, field lives on C^{}",
            lambda_prime.len(),
            f.n()
        )));
    }
    let projected = m_radialize(f, m_index)?;
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    let deviation = projected.max_diff(f)? / scale;
    if deviation > 1e-8 {
        return Err(Error::NotHomogeneous { deviation });
    }
    let mut out = Vec::new();
    for beta in multi_indices(f.n(), k) {
        let alpha: Option<Vec<usize>> = beta
            .iter()
            .zip(m_index)
            .map(|(&b, &m)| usize::try_from(b as i64 - m).ok())
            .collect();
        let Some(alpha) = alpha else { continue };
        let psi = try_sample(|z| psi_alpha_beta(&alpha, &beta, lambda_prime, z), &f.grid)?;
        let value = inner_product(f, &psi)?;
        out.push(HomogeneousCoefficient { alpha, beta, value });
    }
    Ok(out)
}

/// `Π_j(2π/λ'_j) Σ c Ψ_{α,β}` on `like`'s grid.
pub fn reconstruct_projection(coefficients: &[HomogeneousCoefficient], lambda_prime: &[f64], like: &SampledField) -> Result<SampledField> {
    let scale: f64 = lambda_prime.iter().map(|l| 2.0 * PI / l).product();
    let mut acc = vec![C64::new(0.0, 0.0); like.values.len()];
    for c in coefficients {
        let psi = try_sample(|z| psi_alpha_beta(&c.alpha, &c.beta, lambda_prime, z), &like.grid)?;
        for (a, v) in acc.iter_mut().zip(&psi.values) {
            *a += v * c.value * scale;
        }
    }
    Ok(like.like(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, PolarGrid};
    use crate::special::theta_k;

    fn grid() -> PolarGrid {
        PolarGrid::uniform(1, 64, 128, 12.0).unwrap()
    }

    #[test]
    fn theta_three_round_trip() {
        let g = grid();
        let f = try_sample(|z| Ok(C64::new(theta_k(3, &[1.0], z)?, 0.0)), &g).unwrap();
        let spec = decompose(&f, &[1.0], 5, None).unwrap();
        let norms = spec.norms();
        for (k, n) in norms.iter().enumerate() {
            if k != 3 {
                assert!(*n < 1e-7 * norms[3], "k={k}");
            }
        }
        assert!(synthesize(&spec).unwrap().max_diff(&f).unwrap() < 1e-6);
        // the empty tail above degree 3 passes a tail check
        assert!(decompose(&f, &[1.0], 5, Some(1e-6)).is_ok());
        assert!(matches!(decompose(&f, &[1.0], 3, Some(1e-6)), Err(Error::TruncationDominates { .. })));
    }

    #[test]
    fn gaussian_round_trip() {
        let g = grid();
        let f = sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g).unwrap();
        let spec = decompose(&f, &[1.0], 30, Some(1e-4)).unwrap();
        let back = synthesize(&spec).unwrap();
        assert!(back.relative_l2_error(&f).unwrap() < 1e-4);
        // coefficients of e^{-|z|²} in θ_k at λ' = 1 decay by 3/5 per degree
        let norms = spec.norms();
        for k in 1..10 {
            assert!((norms[k] / norms[k - 1] - 0.6).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn gaussian_coefficient_matches_inner_product() {
        let g = grid();
        let f = sample(|z| C64::new((-z[0].norm_sqr() / 4.0).exp(), 0.0), &g).unwrap();
        let p0 = spectral_projection(&f, 0, &[1.0]).unwrap();
        let coef = homogeneous_projection_expand(&f, &[0], 0, &[1.0]).unwrap();
        assert_eq!(coef.len(), 1);
        assert!((coef[0].value - C64::new((2.0 * PI).sqrt(), 0.0)).norm() < 1e-10);
        let rebuilt = reconstruct_projection(&coef, &[1.0], &f).unwrap();
        assert!(rebuilt.max_diff(&p0).unwrap() < 1e-8);
        assert!(p0.max_diff(&f.scale(C64::new(2.0 * PI, 0.0))).unwrap() < 1e-8);
    }

    #[test]
    fn homogeneous_expansion_matches_projection() {
        let g = grid();
        let f = sample(|z| z[0].conj() * C64::new(1.0, 0.5) * (-z[0].norm_sqr() / 2.0).exp(), &g).unwrap();
        for k in 0..4 {
            let coef = homogeneous_projection_expand(&f, &[-1], k, &[1.0]).unwrap();
            let rebuilt = reconstruct_projection(&coef, &[1.0], &f).unwrap();
            let direct = spectral_projection(&f, k, &[1.0]).unwrap();
            assert!(rebuilt.max_diff(&direct).unwrap() < 1e-6, "k={k}");
            // stays in the same angular mode
            assert!(m_radialize(&direct, &[-1]).unwrap().max_diff(&direct).unwrap() < 1e-10);
        }
    }

    #[test]
    fn single_special_hermite_coefficient() {
        let g = grid();
        let f = try_sample(|z| psi_alpha_beta(&[1], &[3], &[1.0], z), &g).unwrap();
        let coef = homogeneous_projection_expand(&f, &[2], 3, &[1.0]).unwrap();
        assert_eq!(coef.len(), 1);
        assert!((coef[0].value - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(matches!(
            homogeneous_projection_expand(&f, &[0], 3, &[1.0]),
            Err(Error::NotHomogeneous { .. })
        ));
    }

    #[test]
    fn positive_gaussian_coefficients() {
        let g = grid();
        let f = sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g).unwrap();
        for k in 0..5 {
            let c = homogeneous_projection_expand(&f, &[0], k, &[1.0]).unwrap();
            assert!(c[0].value.re > 0.0 && c[0].value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_and_serialization() {
        let g = PolarGrid::uniform(1, 16, 16, 8.0).unwrap();
        let f = SampledField::zeros(g);
        let spec = decompose(&f, &[1.0], 3, Some(1e-6)).unwrap();
        assert!(spec.projections.iter().all(|p| p.max_abs() == 0.0));
        let dir = tempfile::tempdir().unwrap();
        spec.write_dir(dir.path(), Encoding::Binary).unwrap();
        let back = LaguerreSpectrum::read_dir(dir.path()).unwrap();
        assert_eq!(back.manifest(), spec.manifest());
        assert!(matches!(decompose(&f, &[1.0], 41, None), Err(Error::RangeExceeded { .. })));
    }
}
