//! Two-radii admissibility and reconstruction.

use super::{reconstruct_from_means, MeanData, RECOVERY_THRESHOLD};
use crate::error::{Error, Result};
use crate::fields::interp::{angular_modes, mode_of_bin};
use crate::fields::{PeriodicField, SampledField};
use crate::quadrature::{build_sphere_rule, gauss_legendre_interval};
use crate::special::{bessel_j, bessel_j_orders, bessel_zeros, check_lambda_prime, laguerre_zeros};
use crate::twisted::means::{lambda_twisted_mean, plain_spherical_mean, theta_sphere_average};
use crate::twisted::radialize::fourier_coefficient_center;
use crate::C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Finite search depth of the admissibility scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiiBounds {
    pub k_max: usize,
    pub n_max: usize,
    pub tol: f64,
}

impl Default for RadiiBounds {
    fn default() -> Self {
        Self {
            k_max: 40,
            n_max: 40,
            tol: 1e-9,
        }
    }
}

/// `r1²/r2²` matches `ρ_a²/ρ_b²` for radial zeros `ρ_a` of `θ_{k1}` and
/// `ρ_b` of `θ_{k2}` (1-based zero indices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreConflict {
    pub k1: usize,
    pub a: usize,
    pub k2: usize,
    pub b: usize,
    pub ratio: f64,
}

/// `r1/r2` matches `j_a/j_b` for zeros of `J_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesselConflict {
    pub a: usize,
    pub b: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiiVerdict {
    pub r1: f64,
    pub r2: f64,
    pub n: usize,
    pub lambda_prime: Vec<f64>,
    pub laguerre_conflicts: Vec<LaguerreConflict>,
    pub bessel_conflicts: Vec<BesselConflict>,
    /// No conflict within `search_bounds`; not a statement about higher degrees.
    pub admissible_within_bounds: bool,
    pub search_bounds: RadiiBounds,
}

impl RadiiVerdict {
    /// One row per conflict: `kind,k1,a,k2,b,ratio`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "k1", "a", "k2", "b", "ratio"]).map_err(csv_err)?;
        for c in &self.laguerre_conflicts {
            w.write_record(["laguerre".to_string(), c.k1.to_string(), c.a.to_string(), c.k2.to_string(), c.b.to_string(), format!("{:.17e}", c.ratio)])
                .map_err(csv_err)?;
        }
        for c in &self.bessel_conflicts {
            w.write_record(["bessel".to_string(), String::new(), c.a.to_string(), String::new(), c.b.to_string(), format!("{:.17e}", c.ratio)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Squared radii where `θ_{k,λ'}` (or its sphere average) vanishes.
fn squared_zero_radii(k: usize, lambda_prime: &[f64]) -> Result<Vec<f64>> {
    let n = lambda_prime.len();
    let first = lambda_prime[0];
    if lambda_prime.iter().all(|l| *l == first) {
        return Ok(laguerre_zeros(k, n - 1)?.zeros.iter().map(|x| 2.0 * x / first).collect());
    }
    // bracket sign changes of the sphere average on a grid in r², then bisect
    let lmin = lambda_prime.iter().copied().fold(f64::INFINITY, f64::min);
    let top = 2.0 * (4.0 * k as f64 + 2.0 * n as f64 + 10.0) / lmin;
    let steps = 60 * k + 200;
    let f = |s: f64| theta_sphere_average(k, lambda_prime, s.sqrt());
    let mut out = Vec::new();
    let mut prev_s = 0.0;
    let mut prev_v = f(0.0)?;
    for i in 1..=steps {
        let s = top * i as f64 / steps as f64;
        let v = f(s)?;
        if prev_v * v < 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_s, s, prev_v);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if fm * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev_s = s;
        prev_v = v;
    }
    Ok(out)
}

/// Scans every pair of zeros up to the bounds. Laguerre pairs are taken
/// across all degrees `k ≤ K_max`, including pairs from one degree.
pub fn two_radii_check(r1: f64, r2: f64, n: usize, lambda_prime: &[f64], bounds: RadiiBounds) -> Result<RadiiVerdict> {
    for r in [r1, r2] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("radii must be positive, got {r}")));
        }
    }
    check_lambda_prime(lambda_prime)?;
    if lambda_prime.len() != n {
        return Err(Error::DimensionMismatch(format!("lambda' has length {}, expected {n}", lambda_prime.len())));
    }
    if !(bounds.tol > 0.0 && bounds.tol.is_finite()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let target = r1 * r1 / (r2 * r2);
    // (squared radius, degree, 1-based index)
    let mut zeros: Vec<(f64, usize, usize)> = Vec::new();
    for k in 1..=bounds.k_max {
        for (i, x) in squared_zero_radii(k, lambda_prime)?.into_iter().enumerate() {
            zeros.push((x, k, i + 1));
        }
    }
    zeros.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut laguerre_conflicts = Vec::new();
    for &(xb, k2, b) in &zeros {
        let want = target * xb;
        let lo = want - bounds.tol * xb;
        let start = zeros.partition_point(|z| z.0 < lo);
        for &(xa, k1, a) in &zeros[start..] {
            let ratio = xa / xb;
            if ratio - target >= bounds.tol {
                break;
            }
            if (ratio - target).abs() < bounds.tol && !(k1 == k2 && a == b) {
                laguerre_conflicts.push(LaguerreConflict { k1, a, k2, b, ratio });
            }
        }
    }
    laguerre_conflicts.sort_by_key(|x| (x.k1, x.a, x.k2, x.b));

    let mut bessel_conflicts = Vec::new();
    if bounds.n_max > 0 {
        let table = bessel_zeros(n - 1, bounds.n_max)?;
        let t = r1 / r2;
        for (a, ja) in table.zeros.iter().enumerate() {
            for (b, jb) in table.zeros.iter().enumerate() {
                let ratio = ja / jb;
                if a != b && (ratio - t).abs() < bounds.tol {
                    bessel_conflicts.push(BesselConflict { a: a + 1, b: b + 1, ratio });
                }
            }
        }
    }
    Ok(RadiiVerdict {
        r1,
        r2,
        n,
        lambda_prime: lambda_prime.to_vec(),
        admissible_within_bounds: laguerre_conflicts.is_empty() && bessel_conflicts.is_empty(),
        laguerre_conflicts,
        bessel_conflicts,
        search_bounds: bounds,
    })
}

/// Frequency cutoff and node count of the Fourier–Bessel path.
pub const HANKEL_FREQ_MAX: f64 = 16.0;
pub const HANKEL_NODES: usize = 192;

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub k: usize,
    pub radius: Option<f64>,
    pub condition: f64,
    pub recovered_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CentreModeReport {
    pub l: i64,
    /// Per-degree recovery for `l ≠ 0`; empty for `l = 0`.
    pub degrees: Vec<DegreeReport>,
    pub unrecoverable: Vec<usize>,
    /// Largest `1 / max_i |θ_k(r_i)|` (or `1 / max_i |J_0(r_i s)|` for `l = 0`).
    pub condition: f64,
    pub recovered_norm: f64,
}

#[derive(Debug, Clone)]
pub struct TwoRadiiReport {
    pub reconstruction: PeriodicField,
    pub relative_error: f64,
    pub modes: Vec<CentreModeReport>,
    pub verdict: RadiiVerdict,
}

/// Recovers `f` on `ℂ × T` from its twisted means at `r1` and `r2`.
///
/// Each centre mode `f^l` with `0 < |l| ≤ L` is inverted degree by degree
/// from the `l`-twisted means (`λ' = |l|`; negative `l` through complex
/// conjugation). The mode `l = 0` has plain spherical means, inverted per
/// angular mode in the Hankel domain where the means multiply by
/// `J_0(r s)`; the two radii are combined by least squares.
pub fn two_radii_reconstruct(f: &PeriodicField, r1: f64, r2: f64, k_max: usize, l_max: usize, bounds: RadiiBounds) -> Result<TwoRadiiReport> {
    if f.grid.n != 1 {
        return Err(Error::UnsupportedDimension(f.grid.n));
    }
    if f.m != 1 {
        return Err(Error::DimensionMismatch(format!("centre dimension {} is not supported, expected 1", f.m)));
    }
    let verdict = two_radii_check(r1, r2, 1, &[1.0], bounds)?;
    if !verdict.admissible_within_bounds {
        return Err(Error::InadmissibleRadii { r1, r2 });
    }
    if f.t_samples[0] <= 2 * l_max {
        return Err(Error::NyquistViolation {
            mode: l_max as i64,
            samples: f.t_samples[0],
        });
    }
    let grid = &f.grid;
    let rules = [build_sphere_rule(1, r1, 64)?, build_sphere_rule(1, r2, 64)?];
    let len = grid.len();
    let mut out = vec![C64::new(0.0, 0.0); f.values.len()];
    let mut modes = Vec::new();
    for l in -(l_max as i64)..=(l_max as i64) {
        let g = fourier_coefficient_center(f, &[l])?;
        let (rec, report) = if l == 0 {
            let means = [plain_spherical_mean(&g, &rules[0])?, plain_spherical_mean(&g, &rules[1])?];
            let (rec, condition) = hankel_recover(&means, [r1, r2])?;
            let norm = rec.norm_l2();
            (
                rec,
                CentreModeReport {
                    l,
                    degrees: Vec::new(),
                    unrecoverable: Vec::new(),
                    condition,
                    recovered_norm: norm,
                },
            )
        } else {
            let lam = [l.unsigned_abs() as f64];
            let h = if l > 0 { g } else { conj(&g) };
            let means = [
                (r1, lambda_twisted_mean(&h, &lam, &rules[0])?),
                (r2, lambda_twisted_mean(&h, &lam, &rules[1])?),
            ];
            let r = reconstruct_from_means(MeanData::Radii(&means), &lam, k_max)?;
            let rec = if l > 0 { r.field } else { conj(&r.field) };
            let degrees: Vec<DegreeReport> = r
                .degrees
                .iter()
                .map(|d| DegreeReport {
                    k: d.k,
                    radius: d.radius,
                    condition: d.condition,
                    recovered_norm: d.projection_norm,
                })
                .collect();
            let condition = degrees.iter().map(|d| d.condition).fold(0.0, f64::max);
            let norm = rec.norm_l2();
            (
                rec,
                CentreModeReport {
                    l,
                    degrees,
                    unrecoverable: r.unrecoverable,
                    condition,
                    recovered_norm: norm,
                },
            )
        };
        modes.push(report);
        for c in 0..f.center_len() {
            let t = f.t_point(c)[0];
            let e = C64::from_polar(1.0 / (2.0 * PI), -(l as f64) * t);
            for (o, v) in out[c * len..(c + 1) * len].iter_mut().zip(&rec.values) {
                *o += v * e;
            }
        }
    }
    let reconstruction = PeriodicField::new(grid.clone(), f.t_samples.clone(), out, f.metadata.clone())?;
    let base = f.norm_l2();
    let diff = reconstruction.sub(f)?.norm_l2();
    let relative_error = if base > 0.0 { diff / base } else { diff };
    Ok(TwoRadiiReport {
        reconstruction,
        relative_error,
        modes,
        verdict,
    })
}

fn conj(f: &SampledField) -> SampledField {
    f.like(f.values.iter().map(|v| v.conj()).collect())
}

/// Inverts plain circle means at two radii, mode by mode in angle.
fn hankel_recover(means: &[SampledField; 2], radii: [f64; 2]) -> Result<(SampledField, f64)> {
    let grid = &means[0].grid;
    let a = grid.angular[0];
    let rad = &grid.radial[0];
    let nr = rad.len();
    let (s_nodes, s_weights) = gauss_legendre_interval(HANKEL_NODES, 0.0, HANKEL_FREQ_MAX)?;
    let spectra = [angular_modes(grid, &means[0].values), angular_modes(grid, &means[1].values)];
    let peak = means.iter().map(|m| m.max_abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let active: Vec<usize> = (0..a)
        .filter(|&bin| spectra.iter().any(|sp| sp.iter().any(|ring| ring[bin].norm() > 1e-14 * peak)))
        .collect();
    let top = active.iter().map(|&b| mode_of_bin(b, a).unsigned_abs() as usize).max().unwrap_or(0);
    // J_ν(s ρ) for ν ≤ top at every (s, ρ) pair
    let table: Vec<Vec<f64>> = s_nodes
        .iter()
        .flat_map(|s| rad.nodes.iter().map(move |r| (s, r)))
        .map(|(s, r)| bessel_j_orders(top, s * r))
        .collect::<Result<_>>()?;
    let mut multipliers = Vec::with_capacity(s_nodes.len());
    let mut condition: f64 = 0.0;
    for s in &s_nodes {
        let j = [bessel_j(0, radii[0] * s)?, bessel_j(0, radii[1] * s)?];
        let best = j[0].abs().max(j[1].abs());
        condition = condition.max(1.0 / best);
        let denom = j[0] * j[0] + j[1] * j[1];
        multipliers.push(if best >= RECOVERY_THRESHOLD { [j[0] / denom, j[1] / denom] } else { [0.0, 0.0] });
    }
    let mut modes_out = vec![vec![C64::new(0.0, 0.0); a]; nr];
    for &bin in &active {
        let nu = mode_of_bin(bin, a);
        let order = nu.unsigned_abs() as usize;
        // J_{-ν} = (-1)^ν J_ν; the sign cancels between the two transforms
        let mut transformed = vec![C64::new(0.0, 0.0); s_nodes.len()];
        for (si, t) in transformed.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (sp, mult) in spectra.iter().zip(multipliers[si]) {
                let mut h = C64::new(0.0, 0.0);
                for i in 0..nr {
                    h += sp[i][bin] * (rad.weights[i] * rad.nodes[i] * table[si * nr + i][order]);
                }
                acc += h * mult;
            }
            *t = acc;
        }
        for (i, ring) in modes_out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (si, t) in transformed.iter().enumerate() {
                acc += t * (s_weights[si] * s_nodes[si] * table[si * nr + i][order]);
            }
            ring[bin] = acc;
        }
    }
    let inv = FftPlanner::new().plan_fft_inverse(a);
    let mut values = Vec::with_capacity(grid.len());
    for mut ring in modes_out {
        inv.process(&mut ring);
        values.extend(ring);
    }
    Ok((means[0].like(values), condition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PolarGrid;
    use crate::special::theta_k;

    #[test]
    fn bessel_ratio_is_inadmissible() {
        let v = two_radii_check(2.404825557695773, 5.520078110286311, 1, &[1.0], RadiiBounds::default()).unwrap();
        assert!(!v.admissible_within_bounds);
        assert!(v.bessel_conflicts.iter().any(|c| c.a == 1 && c.b == 2));
    }

    #[test]
    fn laguerre_ratio_is_inadmissible() {
        let r1 = 2f64.sqrt();
        let r2 = (2.0 * (2.0 - 2f64.sqrt())).sqrt();
        let v = two_radii_check(r1, r2, 1, &[1.0], RadiiBounds::default()).unwrap();
        assert!(v.laguerre_conflicts.iter().any(|c| c.k1 == 1 && c.a == 1 && c.k2 == 2 && c.b == 1));
        assert!(!v.admissible_within_bounds);
    }

    #[test]
    fn one_and_two_are_admissible() {
        let v = two_radii_check(1.0, 2.0, 1, &[1.0], RadiiBounds::default()).unwrap();
        assert!(v.admissible_within_bounds, "{:?}", v.laguerre_conflicts);
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn verdict_is_monotone_in_bounds() {
        let r1 = 2f64.sqrt();
        let r2 = (2.0 * (2.0 - 2f64.sqrt())).sqrt();
        let mut prev_admissible = false;
        for k in [2usize, 5, 10, 20] {
            let v = two_radii_check(r1, r2, 1, &[1.0], RadiiBounds { k_max: k, n_max: k, tol: 1e-9 }).unwrap();
            assert!(!(v.admissible_within_bounds && !prev_admissible && k > 2));
            prev_admissible = v.admissible_within_bounds;
        }
    }

    #[test]
    fn anisotropic_scan_uses_sphere_average() {
        let lp = [1.0, 2.0];
        let z = squared_zero_radii(2, &lp).unwrap();
        assert_eq!(z.len(), 2);
        for s in z {
            assert!(theta_sphere_average(2, &lp, s.sqrt()).unwrap().abs() < 1e-12);
        }
        assert!(two_radii_check(1.0, 2.0, 2, &lp, RadiiBounds { k_max: 5, n_max: 5, tol: 1e-9 }).is_ok());
    }

    fn centre_grid() -> PolarGrid {
        PolarGrid::uniform(1, 64, 128, 12.0).unwrap()
    }

    #[test]
    fn laguerre_times_cosine_round_trip() {
        let g = centre_grid();
        let f = PeriodicField::sample(|z, t| C64::new(theta_k(2, &[1.0], z).unwrap() * t[0].cos(), 0.0), &g, &[8]).unwrap();
        let rep = two_radii_reconstruct(&f, 1.0, 2.0, 8, 2, RadiiBounds::default()).unwrap();
        assert!(rep.relative_error < 1e-3, "{}", rep.relative_error);
        assert!(rep.modes.iter().all(|m| m.condition.is_finite()));
    }

    #[test]
    fn radial_centre_independent_field_uses_bessel_path() {
        let g = centre_grid();
        let f = PeriodicField::sample(|z, _| C64::new((-z[0].norm_sqr()).exp(), 0.0), &g, &[4]).unwrap();
        let rep = two_radii_reconstruct(&f, 1.0, 2.0, 4, 1, RadiiBounds::default()).unwrap();
        assert!(rep.relative_error < 1e-3, "{}", rep.relative_error);
        let zero = PeriodicField::sample(|_, _| C64::new(0.0, 0.0), &g, &[4]).unwrap();
        let rep = two_radii_reconstruct(&zero, 1.0, 2.0, 4, 1, RadiiBounds::default()).unwrap();
        assert_eq!(rep.relative_error, 0.0);
        assert!(rep.modes.iter().all(|m| m.condition.is_finite()));
    }

    #[test]
    fn inadmissible_pair_is_refused() {
        let g = PolarGrid::uniform(1, 8, 8, 8.0).unwrap();
        let f = PeriodicField::sample(|_, _| C64::new(0.0, 0.0), &g, &[4]).unwrap();
        assert!(matches!(
            two_radii_reconstruct(&f, 2.404825557695773, 5.520078110286311, 4, 1, RadiiBounds::default()),
            Err(Error::InadmissibleRadii { .. })
        ));
    }
}
