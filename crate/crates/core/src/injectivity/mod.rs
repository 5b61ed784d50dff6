//! Injectivity of twisted spherical means: forward means against finite
//! radial measures, degree-by-degree inversion, one-radius counterexamples,
//! Gaussian-weighted norms and the two-radii procedure.

pub mod radii;
pub mod weighted;

pub use radii::{two_radii_check, two_radii_reconstruct, RadiiBounds, RadiiVerdict, TwoRadiiReport};
pub use weighted::{weighted_norm, WeightedNorm};

use crate::error::{Error, Result};
use crate::fields::interp::AnalyticField;
use crate::fields::{try_sample, PolarGrid, SampledField};
use crate::quadrature::{build_sphere_rule, SphereRule};
use crate::special::{check_lambda_prime, laguerre_zeros, mean_constant, theta_k};
use crate::twisted::means::{lambda_twisted_mean, lambda_twisted_mean_at, theta_sphere_average};
use crate::twisted::spectrum::{decompose, prefactor};
use crate::C64;
use serde::Serialize;

/// Degrees whose largest `|θ_k(r_i)|` falls below this are not inverted.
pub const RECOVERY_THRESHOLD: f64 = 1e-8;

/// A finite rotation-invariant measure `Σ_i w_i μ_{r_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub normalized: bool,
}

impl RadialMeasure {
    /// Validates radii (positive, distinct) and weights (positive); the
    /// `normalized` flag records whether the weights sum to one.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("measure needs at least one atom".into()));
        }
        for (i, &(r, w)) in atoms.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom radius must be positive, got {r}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("atom weight must be positive, got {w}")));
            }
            if atoms[..i].iter().any(|a| a.0 == r) {
                return Err(Error::InvalidArgument(format!("radius {r} appears twice")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        Ok(Self {
            normalized: (total - 1.0).abs() <= 1e-12,
            atoms,
        })
    }

    pub fn single(r: f64) -> Result<Self> {
        Self::new(vec![(r, 1.0)])
    }

    pub fn normalize(mut self) -> Self {
        let total: f64 = self.atoms.iter().map(|a| a.1).sum();
        for a in &mut self.atoms {
            a.1 /= total;
        }
        self.normalized = true;
        self
    }

    pub fn radii(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }
}

/// One sphere rule per atom.
pub fn rules_for(mu: &RadialMeasure, n: usize, order: usize) -> Result<Vec<SphereRule>> {
    mu.atoms.iter().map(|&(r, _)| build_sphere_rule(n, r, order)).collect()
}

/// `Σ_i w_i f ×_λ' μ_{r_i}`.
pub fn measure_mean(f: &SampledField, mu: &RadialMeasure, lambda_prime: &[f64], rules: &[SphereRule]) -> Result<SampledField> {
    if rules.len() != mu.atoms.len() {
        return Err(Error::DimensionMismatch(format!("{} rules for {} atoms", rules.len(), mu.atoms.len())));
    }
    let mut acc = f.scale(C64::new(0.0, 0.0));
    for (&(r, w), rule) in mu.atoms.iter().zip(rules) {
        if (rule.r - r).abs() > 1e-12 * r {
            return Err(Error::InvalidArgument(format!("rule radius {} does not match atom radius {r}", rule.r)));
        }
        let m = lambda_twisted_mean(f, lambda_prime, rule)?;
        acc = acc.add(&m.scale(C64::new(w, 0.0)))?;
    }
    Ok(acc)
}

/// `μ(θ_{k,λ'}) = Σ_i w_i θ_{k,λ'}(r_i)`, with the sphere average of
/// `θ_{k,λ'}` standing in for its value at radius `r_i` when λ' is
/// anisotropic.
pub fn mu_hat_theta(mu: &RadialMeasure, k: usize, lambda_prime: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &(r, w) in &mu.atoms {
        acc += w * theta_sphere_average(k, lambda_prime, r)?;
    }
    Ok(acc)
}

/// Weight `w ∈ (0, 1)` with `w θ_k(r1) + (1 - w) θ_k(r2) = 0`, when the two
/// values have opposite signs.
pub fn cancelling_weight(k: usize, lambda_prime: &[f64], r1: f64, r2: f64) -> Result<Option<f64>> {
    let a = theta_sphere_average(k, lambda_prime, r1)?;
    let b = theta_sphere_average(k, lambda_prime, r2)?;
    if a * b >= 0.0 {
        return Ok(None);
    }
    Ok(Some(b / (b - a)))
}

/// Means supplied to [`reconstruct_from_means`].
pub enum MeanData<'a> {
    /// `f ×_λ' μ_r` for each listed radius.
    Radii(&'a [(f64, SampledField)]),
    /// `Σ_i w_i f ×_λ' μ_{r_i}` for one measure.
    Measure(&'a RadialMeasure, &'a SampledField),
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeRecovery {
    pub k: usize,
    /// The radius used, or `None` for a measure or an unrecoverable degree.
    pub radius: Option<f64>,
    /// The `θ_k` value divided by (largest over radii, or `μ(θ_k)`).
    pub theta_value: f64,
    pub condition: f64,
    pub recovered: bool,
    pub projection_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub field: SampledField,
    pub degrees: Vec<DegreeRecovery>,
    pub unrecoverable: Vec<usize>,
}

/// Inverts the diagonal action of the means on the Laguerre projections for
/// `k ≤ K`: the degree-`k` projection of a mean is `c_k θ_k(r)` times that of
/// `f`. The radius with the largest `|θ_k(r)|` is used; degrees with all
/// values below [`RECOVERY_THRESHOLD`] are listed as unrecoverable and left
/// out of the synthesis.
pub fn reconstruct_from_means(data: MeanData<'_>, lambda_prime: &[f64], k_max: usize) -> Result<Reconstruction> {
    check_lambda_prime(lambda_prime)?;
    let n = lambda_prime.len();
    let (sources, measure): (Vec<(Option<f64>, &SampledField)>, Option<&RadialMeasure>) = match data {
        MeanData::Radii(list) => {
            if list.is_empty() {
                return Err(Error::InvalidArgument("at least one radius is required".into()));
            }
            (list.iter().map(|(r, f)| (Some(*r), f)).collect(), None)
        }
        MeanData::Measure(mu, f) => (vec![(None, f)], Some(mu)),
    };
    let first = sources[0].1;
    for s in &sources {
        first.check_same_grid(s.1)?;
    }
    // (k, source index, θ value)
    let mut choice = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut best: Option<(usize, f64)> = None;
        for (i, (r, _)) in sources.iter().enumerate() {
            let v = match (r, measure) {
                (Some(r), _) => theta_sphere_average(k, lambda_prime, *r)?,
                (None, Some(mu)) => mu_hat_theta(mu, k, lambda_prime)?,
                (None, None) => unreachable!("measure data always carries a measure"),
            };
            if best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                best = Some((i, v));
            }
        }
        choice.push(best.expect("nonempty sources"));
    }
    if choice.iter().all(|(_, v)| v.abs() < RECOVERY_THRESHOLD) {
        return Err(Error::NoUsableRadius);
    }
    let spectra = sources
        .iter()
        .map(|(_, f)| decompose(f, lambda_prime, k_max, None))
        .collect::<Result<Vec<_>>>()?;
    let scale = prefactor(lambda_prime);
    let mut acc = vec![C64::new(0.0, 0.0); first.values.len()];
    let mut degrees = Vec::with_capacity(k_max + 1);
    let mut unrecoverable = Vec::new();
    for (k, &(i, v)) in choice.iter().enumerate() {
        let recovered = v.abs() >= RECOVERY_THRESHOLD;
        let mut norm = 0.0;
        if recovered {
            let factor = scale / (mean_constant(k, n) * v);
            let proj = &spectra[i].projections[k];
            for (a, p) in acc.iter_mut().zip(&proj.values) {
                *a += p * factor;
            }
            norm = proj.norm_l2() * factor.abs();
        } else {
            unrecoverable.push(k);
        }
        degrees.push(DegreeRecovery {
            k,
            radius: sources[i].0,
            theta_value: v,
            condition: 1.0 / v.abs(),
            recovered,
            projection_norm: norm,
        });
    }
    Ok(Reconstruction {
        field: first.like(acc),
        degrees,
        unrecoverable,
    })
}

/// A field annihilated by the mean over one sphere.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub field: SampledField,
    /// The smallest annihilating radius.
    pub radius: f64,
    /// Every radius where `θ_{l,λ'}` vanishes.
    pub radii: Vec<f64>,
    /// `max |f ×_λ' μ_r|` over the grid (ℂ) or a sample of grid points (ℂ²).
    pub residual: f64,
}

/// `f = θ_{l,λ'}` with the radii `r = sqrt(2 x / λ')` at the zeros `x` of
/// `L_l^{n-1}`, for isotropic `λ'`.
pub fn one_radius_counterexample(l: usize, lambda_prime: &[f64], grid: &PolarGrid) -> Result<Counterexample> {
    check_lambda_prime(lambda_prime)?;
    let n = lambda_prime.len();
    if grid.n != n {
        return Err(Error::DimensionMismatch(format!("grid on C^{} for lambda' of length {n}", grid.n)));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("degree 0 has no zero: L_0 is constant".into()));
    }
    let lam = lambda_prime[0];
    if lambda_prime.iter().any(|v| *v != lam) {
        return Err(Error::InvalidArgument("counterexamples are built for isotropic lambda' only".into()));
    }
    let table = laguerre_zeros(l, n - 1)?;
    let radii: Vec<f64> = table.zeros.iter().map(|x| (2.0 * x / lam).sqrt()).collect();
    let radius = radii[0];
    let lp = lambda_prime.to_vec();
    let field = try_sample(|z| Ok(C64::new(theta_k(l, &lp, z)?, 0.0)), grid)?;
    let rule = build_sphere_rule(n, radius, 64)?;
    let residual = if n == 1 {
        lambda_twisted_mean(&field, lambda_prime, &rule)?.max_abs()
    } else {
        let exact = AnalyticField::new(n, |z: &[C64]| C64::new(theta_k(l, &lp, z).unwrap_or(0.0), 0.0));
        let step = (grid.len() / 64).max(1);
        let points: Vec<Vec<C64>> = (0..grid.len()).step_by(step).map(|i| grid.point(i)).collect();
        let rule = build_sphere_rule(n, radius, 32)?;
        lambda_twisted_mean_at(&exact, lambda_prime, &rule, &points)?
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    };
    Ok(Counterexample {
        field,
        radius,
        radii,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sample;

    fn grid() -> PolarGrid {
        PolarGrid::uniform(1, 64, 128, 12.0).unwrap()
    }

    fn gaussian(g: &PolarGrid) -> SampledField {
        sample(|z| C64::new((-z[0].norm_sqr()).exp(), 0.0), g).unwrap()
    }

    #[test]
    fn measure_validation() {
        assert!(RadialMeasure::new(vec![]).is_err());
        assert!(RadialMeasure::new(vec![(0.0, 1.0)]).is_err());
        assert!(RadialMeasure::new(vec![(1.0, -1.0)]).is_err());
        assert!(RadialMeasure::new(vec![(1.0, 0.5), (1.0, 0.5)]).is_err());
        let mu = RadialMeasure::new(vec![(1.0, 2.0), (2.0, 2.0)]).unwrap();
        assert!(!mu.normalized);
        let mu = mu.normalize();
        assert!(mu.normalized && (mu.atoms[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measure_mean_linearity() {
        let g = grid();
        let f = try_sample(|z| Ok(C64::new(theta_k(3, &[1.0], z)?, 0.0)), &g).unwrap();
        let single = RadialMeasure::single(1.3).unwrap();
        let rules = rules_for(&single, 1, 64).unwrap();
        let plain = lambda_twisted_mean(&f, &[1.0], &rules[0]).unwrap();
        assert!(measure_mean(&f, &single, &[1.0], &rules).unwrap().max_diff(&plain).unwrap() < 1e-15);
        let mu = RadialMeasure::new(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let m = measure_mean(&f, &mu, &[1.0], &rules_for(&mu, 1, 64).unwrap()).unwrap();
        let c = 0.5 * (theta_k(3, &[1.0], &[C64::new(1.0, 0.0)]).unwrap() + theta_k(3, &[1.0], &[C64::new(2.0, 0.0)]).unwrap());
        assert!(m.max_diff(&f.scale(C64::new(c, 0.0))).unwrap() < 1e-9);
        let zero = SampledField::zeros(g);
        assert_eq!(measure_mean(&zero, &mu, &[1.0], &rules_for(&mu, 1, 64).unwrap()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mu_hat_values() {
        let mu = RadialMeasure::single(2f64.sqrt()).unwrap();
        assert!(mu_hat_theta(&mu, 1, &[1.0]).unwrap().abs() < 1e-15);
        let mu = RadialMeasure::new(vec![(0.5, 0.3), (3.0, 0.7)]).unwrap();
        assert!(mu_hat_theta(&mu, 0, &[1.0]).unwrap() > 0.0);
        // θ_2 changes sign between r = 1 and r = 2
        let w = cancelling_weight(2, &[1.0], 1.0, 2.0).unwrap().unwrap();
        let mu = RadialMeasure::new(vec![(1.0, w), (2.0, 1.0 - w)]).unwrap();
        assert!(mu_hat_theta(&mu, 2, &[1.0]).unwrap().abs() < 1e-15);
        assert!(cancelling_weight(0, &[1.0], 1.0, 2.0).unwrap().is_none());
    }

    #[test]
    fn single_radius_reconstruction() {
        let g = grid();
        let f = gaussian(&g);
        let rule = build_sphere_rule(1, 1.0, 64).unwrap();
        let m = lambda_twisted_mean(&f, &[1.0], &rule).unwrap();
        let rec = reconstruct_from_means(MeanData::Radii(&[(1.0, m)]), &[1.0], 25).unwrap();
        assert!(rec.unrecoverable.is_empty());
        assert!(rec.field.relative_l2_error(&f).unwrap() < 1e-3);
    }

    #[test]
    fn known_zero_is_reported() {
        let g = grid();
        let f = gaussian(&g);
        let r = 2f64.sqrt();
        let m = lambda_twisted_mean(&f, &[1.0], &build_sphere_rule(1, r, 64).unwrap()).unwrap();
        let rec = reconstruct_from_means(MeanData::Radii(&[(r, m.clone())]), &[1.0], 10).unwrap();
        assert_eq!(rec.unrecoverable, vec![1]);
        let m2 = lambda_twisted_mean(&f, &[1.0], &build_sphere_rule(1, 1.0, 64).unwrap()).unwrap();
        let rec = reconstruct_from_means(MeanData::Radii(&[(r, m), (1.0, m2)]), &[1.0], 10).unwrap();
        assert!(rec.unrecoverable.is_empty());
        assert_eq!(rec.degrees[1].radius, Some(1.0));
    }

    #[test]
    fn measure_reconstruction_and_selectivity() {
        let g = grid();
        let f = gaussian(&g);
        let mu = RadialMeasure::new(vec![(1.0, 0.5), (1.7, 0.5)]).unwrap();
        let m = measure_mean(&f, &mu, &[1.0], &rules_for(&mu, 1, 64).unwrap()).unwrap();
        let rec = reconstruct_from_means(MeanData::Measure(&mu, &m), &[1.0], 25).unwrap();
        assert!(rec.unrecoverable.is_empty());
        assert!(rec.field.relative_l2_error(&f).unwrap() < 1e-3);
        // a vanishing mean recovers vanishing projections
        let zero = SampledField::zeros(g);
        let rec = reconstruct_from_means(MeanData::Measure(&mu, &zero), &[1.0], 10).unwrap();
        assert!(rec.degrees.iter().all(|d| d.projection_norm == 0.0));
    }

    #[test]
    fn every_degree_unrecoverable_is_an_error() {
        let g = PolarGrid::uniform(1, 16, 16, 8.0).unwrap();
        let zero = SampledField::zeros(g);
        // θ_0(10) = e^{-25} and |θ_1(10)| = 49 e^{-25} are both below threshold
        let r = 10.0;
        assert!(matches!(
            reconstruct_from_means(MeanData::Radii(&[(r, zero)]), &[1.0], 1),
            Err(Error::NoUsableRadius)
        ));
    }

    #[test]
    fn counterexamples() {
        let g = grid();
        let c = one_radius_counterexample(1, &[1.0], &g).unwrap();
        assert!((c.radius - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.residual < 1e-8);
        let c2 = one_radius_counterexample(2, &[1.0], &g).unwrap();
        let expect = [(2.0 * (2.0 - 2f64.sqrt())).sqrt(), (2.0 * (2.0 + 2f64.sqrt())).sqrt()];
        for (a, b) in c2.radii.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        for r in &c2.radii {
            let m = lambda_twisted_mean(&c2.field, &[1.0], &build_sphere_rule(1, *r, 64).unwrap()).unwrap();
            assert!(m.max_abs() < 1e-8);
        }
        let c3 = one_radius_counterexample(1, &[2.0], &g).unwrap();
        assert!((c3.radius * 2f64.sqrt() - c.radius).abs() < 1e-12);
        assert!(one_radius_counterexample(0, &[1.0], &g).is_err());
        let g2 = PolarGrid::uniform(2, 12, 8, 8.0).unwrap();
        assert!(one_radius_counterexample(2, &[1.0, 1.0], &g2).unwrap().residual < 1e-8);
    }
}
