//! Gauss rules and discrete sphere measures.

use crate::error::{Error, Result};
use crate::special::hermite_functions;
use crate::C64;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

fn jacobi_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::try_new(m, 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence(format!("Jacobi matrix of order {n}")))?;
    let mut x: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    x.sort_by(|a, b| a.total_cmp(b));
    Ok(x)
}

/// `(P_n(x), P_n'(x))` by the Legendre recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Golub–Welsch for the nodes, one Newton polish, and weights from
/// `2 / ((1 - x²) P_n'(x)²)`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre order must be positive".into()));
    }
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let mut x = jacobi_eigenvalues(&vec![0.0; n], &off)?;
    let mut w = Vec::with_capacity(n);
    for xi in x.iter_mut() {
        let (p, d) = legendre_with_derivative(n, *xi);
        *xi -= p / d;
        let (_, d) = legendre_with_derivative(n, *xi);
        w.push(2.0 / ((1.0 - *xi * *xi) * d * d));
    }
    // exact symmetry
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let m = 0.5 * (x[j] - x[i]);
        x[i] = -m;
        x[j] = m;
        let wm = 0.5 * (w[i] + w[j]);
        w[i] = wm;
        w[j] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_legendre(n)?;
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    Ok((x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect()))
}

/// Gauss–Hermite nodes with weights for `∫ f(x) dx`, i.e. the classical
/// weights multiplied by `e^{x²}`: `1 / (n h_{n-1}(x)²)`.
///
/// Computing them from the normalized Hermite functions avoids the
/// underflow of the classical weights at large `|x|`.
pub fn gauss_hermite_unweighted(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Hermite order must be positive".into()));
    }
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut x = jacobi_eigenvalues(&vec![0.0; n], &off)?;
    let nf = n as f64;
    let mut w = Vec::with_capacity(n);
    for xi in x.iter_mut() {
        // h_n' = sqrt(2n) h_{n-1} - x h_n
        let h = hermite_functions(n, *xi)?;
        let d = (2.0 * nf).sqrt() * h[n - 1] - *xi * h[n];
        *xi -= h[n] / d;
        let h = hermite_functions(n - 1, *xi)?;
        w.push(1.0 / (nf * h[n - 1] * h[n - 1]));
    }
    Ok((x, w))
}

/// Classical Gauss–Hermite rule for `∫ f(x) e^{-x²} dx`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_hermite_unweighted(n)?;
    let w = x.iter().zip(&w).map(|(xi, wi)| wi * (-xi * xi).exp()).collect();
    Ok((x, w))
}

pub const SPHERE_MAX_ORDER: usize = 64;

/// Discrete normalized surface measure on `{w ∈ ℂⁿ : |w| = r}`.
///
/// Nodes are stored flat, `n` complex coordinates per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub n: usize,
    pub r: f64,
    pub order: usize,
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[C64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_i w_i f(node_i)`.
    pub fn integrate<F: Fn(&[C64]) -> C64>(&self, f: F) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.len() {
            acc += f(self.node(i)) * self.weights[i];
        }
        acc
    }
}

/// Equispaced circle for `n = 1`; Hopf coordinates for `n = 2`.
///
/// On S³ write `w = r (sqrt(1-s) e^{ia}, sqrt(s) e^{ib})`; the normalized
/// measure is `ds da db / 4π²` with `s` uniform on `[0, 1]`, so Gauss–Legendre
/// in `s` times trapezoid rules in `a` and `b` is a product rule. Trig
/// polynomials of degree below `order` in each angle are integrated exactly.
pub fn build_sphere_rule(n: usize, r: f64, order: usize) -> Result<SphereRule> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("sphere radius must be positive, got {r}")));
    }
    if order == 0 || order > SPHERE_MAX_ORDER {
        return Err(Error::RangeExceeded {
            what: "sphere rule order",
            value: order as f64,
            max: SPHERE_MAX_ORDER as f64,
        });
    }
    let angles: Vec<C64> = (0..order)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / order as f64))
        .collect();
    match n {
        1 => Ok(SphereRule {
            n,
            r,
            order,
            nodes: angles.iter().map(|e| e * r).collect(),
            weights: vec![1.0 / order as f64; order],
        }),
        2 => {
            let (s, ws) = gauss_legendre_interval(order / 2 + 1, 0.0, 1.0)?;
            let per = 1.0 / (order * order) as f64;
            let mut nodes = Vec::with_capacity(2 * s.len() * order * order);
            let mut weights = Vec::with_capacity(s.len() * order * order);
            for (si, wi) in s.iter().zip(&ws) {
                let (c1, c2) = (r * (1.0 - si).sqrt(), r * si.sqrt());
                for ea in &angles {
                    for eb in &angles {
                        nodes.push(ea * c1);
                        nodes.push(eb * c2);
                        weights.push(wi * per);
                    }
                }
            }
            Ok(SphereRule {
                n,
                r,
                order,
                nodes,
                weights,
            })
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10).unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for d in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {d}");
        }
        let (x, _) = gauss_legendre(96).unwrap();
        assert!(x.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn hermite_rule_moments() {
        let (x, w) = gauss_hermite(64).unwrap();
        assert!((w.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-13);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let (x, w) = gauss_hermite_unweighted(80).unwrap();
        let h: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_functions(15, xi).unwrap()).collect();
        for j in 0..=15 {
            for k in 0..=15 {
                let s: f64 = (0..x.len()).map(|i| w[i] * h[i][j] * h[i][k]).sum();
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-10, "({j},{k}) -> {s}");
            }
        }
        // ∫ h_3² = 1
        let s: f64 = (0..x.len()).map(|i| w[i] * h[i][3] * h[i][3]).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circle_rule() {
        let rule = build_sphere_rule(1, 2.5, 16).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let m = rule.integrate(|w| w[0]);
        assert!(m.norm() < 1e-15);
        assert!(rule.nodes.iter().all(|w| (w.norm() - 2.5).abs() < 1e-12));
    }

    /// Dense reference for monomials `w1^a conj(w1)^b w2^c conj(w2)^d` on S³.
    fn dense_reference(a: i32, b: i32, c: i32, d: i32) -> C64 {
        let (s, ws) = gauss_legendre_interval(60, 0.0, 1.0).unwrap();
        let m = 96;
        let mut acc = C64::new(0.0, 0.0);
        for (si, wi) in s.iter().zip(&ws) {
            for i in 0..m {
                for j in 0..m {
                    let w1 = C64::from_polar((1.0 - si).sqrt(), 2.0 * PI * (i as f64 + 0.3) / m as f64);
                    let w2 = C64::from_polar(si.sqrt(), 2.0 * PI * (j as f64 + 0.7) / m as f64);
                    acc += w1.powi(a) * w1.conj().powi(b) * w2.powi(c) * w2.conj().powi(d) * *wi;
                }
            }
        }
        acc / (m * m) as f64
    }

    #[test]
    fn s3_rule_exactness() {
        let rule = build_sphere_rule(2, 1.0, 8).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for i in 0..rule.len() {
            let w = rule.node(i);
            assert!(((w[0].norm_sqr() + w[1].norm_sqr()).sqrt() - 1.0).abs() < 1e-12);
        }
        let v = rule.integrate(|w| C64::new(w[0].norm_sqr(), 0.0));
        assert!((v.re - 0.5).abs() < 1e-14);
        for (a, b, c, d) in [(0, 0, 0, 0), (1, 1, 0, 0), (2, 2, 1, 1), (3, 3, 2, 2), (1, 0, 0, 1), (2, 1, 1, 0), (0, 0, 4, 4)] {
            let q = rule.integrate(|w| w[0].powi(a) * w[0].conj().powi(b) * w[1].powi(c) * w[1].conj().powi(d));
            let e = dense_reference(a, b, c, d);
            assert!((q - e).norm() < 1e-10, "({a},{b},{c},{d}): {q} vs {e}");
        }
    }

    #[test]
    fn sphere_rule_errors() {
        assert!(matches!(build_sphere_rule(3, 1.0, 8), Err(Error::UnsupportedDimension(3))));
        assert!(build_sphere_rule(1, 1.0, 65).is_err());
        assert!(build_sphere_rule(1, 0.0, 8).is_err());
    }
}
