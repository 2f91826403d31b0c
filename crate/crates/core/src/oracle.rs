//! Independent reference tools: simultaneous-iteration root finding, direct
//! expansion from roots and central finite differences.
//!
//! Nothing here depends on the evolution or reduction machinery, so results
//! from those modules can be checked against this one.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Descending coefficients with leading coefficient exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    coeffs: Vec<f64>,
}

impl MonicPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            Some(&lead) if lead == 1.0 => Ok(Self { coeffs }),
            Some(&lead) => Err(Error::NotMonic(lead)),
            None => Err(Error::Malformed("empty coefficient vector".into())),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// Expands `Π(X − q_i)` by multiplying balanced halves recursively.
pub fn expand_from_roots(roots: &[f64]) -> MonicPolynomial {
    fn product(roots: &[f64]) -> Vec<f64> {
        match roots {
            [] => vec![1.0],
            [q] => vec![1.0, -q],
            _ => {
                let (lo, hi) = roots.split_at(roots.len() / 2);
                convolve(&product(lo), &product(hi))
            }
        }
    }
    MonicPolynomial {
        coeffs: product(roots),
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

const STALL_LIMIT: usize = 16;

/// All roots of `poly` by Durand–Kerner (Weierstrass) iteration.
///
/// Starting points lie on a circle around the root centroid with radius
/// equal to the Cauchy bound, rotated by an irrational angle so no start is
/// symmetric with respect to the real axis. Iterates until every root moves
/// by less than `tol · (1 + |z|)`, or until the iteration has settled below
/// `√tol` and stopped improving (rounding floor for clustered roots).
pub fn durand_kerner(poly: &MonicPolynomial, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let n = poly.degree();
    if n == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let c = poly.coeffs();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    let centre = -c[1] / n as f64;
    let radius = 1.0 + poly.max_abs_coeff();
    let offset = 0.4 + (2.0f64).sqrt() / 10.0;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + offset;
            Complex64::new(centre, 0.0) + Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    for _ in 0..max_iter {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let zi = z[i];
            let denom = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, &zj)| acc * (zi - zj));
            if denom.norm() == 0.0 {
                // coincident iterates: nudge apart and keep going
                z[i] += Complex64::new(tol, tol);
                max_step = f64::INFINITY;
                continue;
            }
            let delta = poly.eval(zi) / denom;
            z[i] = zi - delta;
            max_step = max_step.max(delta.norm() / (1.0 + z[i].norm()));
        }
        if max_step < tol {
            return Ok(z);
        }
        if max_step < best {
            best = max_step;
            stalled = 0;
        } else {
            stalled += 1;
            if best < tol.sqrt() && stalled >= STALL_LIMIT {
                return Ok(z);
            }
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Eigenvalues of the companion matrix of `poly` (Hessenberg/Schur
/// iteration), a second root oracle independent of Durand–Kerner.
pub fn companion_eigenvalues(poly: &MonicPolynomial) -> Result<Vec<Complex64>> {
    let n = poly.degree();
    if n == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let c = poly.coeffs();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    Ok(m.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Real parts of the Durand–Kerner roots, sorted, provided every imaginary
/// part is below `imag_tol · (1 + |re|)`. Otherwise `None`.
pub fn real_roots(roots: &[Complex64], imag_tol: f64) -> Option<Vec<f64>> {
    if roots.iter().any(|z| z.im.abs() > imag_tol * (1.0 + z.re.abs())) {
        return None;
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    Some(re)
}

/// Central difference estimate of `f⁽ᵏ⁾(x0)`, error `O(h²)`.
///
/// Uses `h⁻ᵏ Σ_j (−1)^j C(k, j) f(x0 + (k/2 − j)h)`; supports `k ≤ 6`.
pub fn finite_diff<F: Fn(f64) -> f64>(f: F, x0: f64, order: usize, h: f64) -> f64 {
    assert!(order <= 6, "finite_diff supports derivative orders up to 6");
    let half = order as f64 / 2.0;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..=order {
        let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sgn * binom * f(x0 + (half - j as f64) * h);
        binom = binom * (order - j) as f64 / (j + 1) as f64;
    }
    sum / h.powi(order as i32)
}

/// Richardson-extrapolated central difference: combines steps `h` and `h/2`
/// to cancel the `h²` term, leaving `O(h⁴)`.
pub fn finite_diff_extrapolated<F: Fn(f64) -> f64>(f: F, x0: f64, order: usize, h: f64) -> f64 {
    let coarse = finite_diff(&f, x0, order, h);
    let fine = finite_diff(&f, x0, order, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Richardson table over steps `h, h/2, …, h/2^levels`, cancelling the
/// `h², h⁴, …, h^{2·levels}` terms of the central difference. On a
/// polynomial of degree `≤ order + 2·levels + 1` the result is exact up to
/// rounding.
pub fn finite_diff_richardson<F: Fn(f64) -> f64>(f: F, x0: f64, order: usize, h: f64, levels: usize) -> f64 {
    let mut row: Vec<f64> = (0..=levels)
        .map(|i| finite_diff(&f, x0, order, h / 2f64.powi(i as i32)))
        .collect();
    for j in 1..=levels {
        let w = 4f64.powi(j as i32);
        row = row.windows(2).map(|p| (w * p[1] - p[0]) / (w - 1.0)).collect();
    }
    row[0]
}
