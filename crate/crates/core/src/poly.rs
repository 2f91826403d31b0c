//! Normalized polynomials, Vièta maps and translation invariants.
//!
//! A degree-`n` polynomial is stored in the alternating, scaled form
//!
//! ```text
//! p(X) = X^n + Σ_{k=1}^{n-1} (-1)^k (n-k+1) P_k X^{n-k} + (-1)^n P²
//! ```
//!
//! so that `n·P₁` is the sum of the roots and `P²` their product. Shifting
//! `X = Y + P₁` removes the `X^{n-1}` term and leaves the depressed polynomial
//!
//! ```text
//! r(Y) = Y^n + Σ_{k=2}^{n-1} (-1)^k R_k Y^{n-k} + (-1)^n R₀
//! ```
//!
//! whose coefficients do not change when every root is translated by the same
//! amount.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(n, k)` as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Evaluates a polynomial given by descending coefficients.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of `p(X + c)` from the descending coefficients of `p`, by
/// repeated synthetic division.
pub fn taylor_shift(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut a = coeffs.to_vec();
    let n = a.len().saturating_sub(1);
    for i in 0..n {
        for j in 1..=(n - i) {
            a[j] += c * a[j - 1];
        }
    }
    a
}

/// [`taylor_shift`] carried out in double-double arithmetic: each partial
/// sum keeps its rounding error in a second word, so the result is accurate
/// to about the conditioning of the shifted coefficients rather than to the
/// size of the intermediate terms.
pub fn taylor_shift_compensated(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut hi = coeffs.to_vec();
    let mut lo = vec![0.0; hi.len()];
    let n = hi.len().saturating_sub(1);
    for i in 0..n {
        for j in 1..=(n - i) {
            // (hi_j, lo_j) += c · (hi_{j−1}, lo_{j−1})
            let p = c * hi[j - 1];
            let p_err = c.mul_add(hi[j - 1], -p);
            let (s, s_err) = two_sum(hi[j], p);
            let tail = s_err + p_err + lo[j] + c * lo[j - 1];
            let (h, l) = two_sum(s, tail);
            hi[j] = h;
            lo[j] = l;
        }
    }
    hi.iter().zip(&lo).map(|(h, l)| h + l).collect()
}

pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Monic coefficients (descending) of `Π(X − q_i)`, accumulated one linear
/// factor at a time.
pub(crate) fn monic_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; roots.len() + 1];
    e[0] = 1.0;
    for (i, &q) in roots.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] -= q * e[k - 1];
        }
    }
    e
}

/// Sorted real roots with a guaranteed minimum separation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    roots: Vec<f64>,
    min_gap: f64,
}

impl RootSet {
    /// Default separation: `1e-7 · (1 + max|q|)`.
    pub fn default_separation(roots: &[f64]) -> f64 {
        let scale = roots.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        1e-7 * (1.0 + scale)
    }

    pub fn new(roots: Vec<f64>) -> Result<Self> {
        let tol = Self::default_separation(&roots);
        Self::with_separation(roots, tol)
    }

    pub fn with_separation(mut roots: Vec<f64>, tol: f64) -> Result<Self> {
        if roots.iter().any(|q| !q.is_finite()) {
            return Err(Error::NonFinite("roots"));
        }
        roots.sort_by(f64::total_cmp);
        let mut min_gap = f64::INFINITY;
        for w in roots.windows(2) {
            let gap = w[1] - w[0];
            if gap <= tol {
                return Err(Error::DuplicateRoot { a: w[0], b: w[1], tol });
            }
            min_gap = min_gap.min(gap);
        }
        Ok(Self { roots, min_gap })
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.roots
    }

    /// Roots centred on their mean: `y_k = q_k − P₁`.
    pub fn depressed(&self) -> DepressedRootSet {
        let mean = self.roots.iter().sum::<f64>() / self.roots.len().max(1) as f64;
        DepressedRootSet {
            y: self.roots.iter().map(|q| q - mean).collect(),
        }
    }
}

/// Roots of the depressed polynomial; they sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DepressedRootSet {
    pub y: Vec<f64>,
}

/// A polynomial in the scaled alternating convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial")]
pub struct NormalizedPolynomial {
    degree: usize,
    p: Vec<f64>,
    psq: f64,
}

#[derive(Deserialize)]
struct RawPolynomial {
    degree: usize,
    p: Vec<f64>,
    psq: f64,
}

impl TryFrom<RawPolynomial> for NormalizedPolynomial {
    type Error = Error;

    fn try_from(raw: RawPolynomial) -> Result<Self> {
        Self::new(raw.degree, raw.p, raw.psq)
    }
}

impl NormalizedPolynomial {
    pub fn new(degree: usize, p: Vec<f64>, psq: f64) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooSmall(degree));
        }
        if p.len() != degree - 1 {
            return Err(Error::Malformed(format!(
                "degree {degree} needs {} coefficients P_k, got {}",
                degree - 1,
                p.len()
            )));
        }
        if !psq.is_finite() || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(Self { degree, p, psq })
    }

    /// Builds the polynomial `Π(X − q_i)` from its roots.
    pub fn from_roots(roots: &RootSet) -> Result<Self> {
        if roots.len() < 2 {
            return Err(Error::DegreeTooSmall(roots.len()));
        }
        Self::from_monic(&monic_from_roots(roots.roots()))
    }

    /// Reads descending monic coefficients `[1, a₁, …, a_n]`.
    pub fn from_monic(coeffs: &[f64]) -> Result<Self> {
        let n = coeffs.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::DegreeTooSmall(n));
        }
        if coeffs[0] != 1.0 {
            return Err(Error::NotMonic(coeffs[0]));
        }
        let p = (1..n)
            .map(|k| sign(k) * coeffs[k] / (n - k + 1) as f64)
            .collect();
        Self::new(n, p, sign(n) * coeffs[n])
    }

    /// Descending monic coefficients `[1, −nP₁, …, (−1)^k (n−k+1) P_k, …, (−1)^n P²]`.
    pub fn to_monic(&self) -> Vec<f64> {
        let n = self.degree;
        let mut out = Vec::with_capacity(n + 1);
        out.push(1.0);
        out.extend(
            self.p
                .iter()
                .enumerate()
                .map(|(i, &pk)| sign(i + 1) * (n - i) as f64 * pk),
        );
        out.push(sign(n) * self.psq);
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `[P₁, …, P_{n−1}]`.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn psq(&self) -> f64 {
        self.psq
    }

    pub fn p1(&self) -> f64 {
        self.p[0]
    }

    /// `P_k` for `1 ≤ k ≤ n−1`.
    pub fn coefficient(&self, k: usize) -> Result<f64> {
        if k == 0 || k >= self.degree {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: self.degree - 1,
            });
        }
        Ok(self.p[k - 1])
    }

    /// `p(x)` using the monic form.
    pub fn evaluate(&self, x: f64) -> f64 {
        horner(&self.to_monic(), x)
    }

    /// The polynomial whose roots are those of `self` moved by `+c`.
    pub fn translate(&self, c: f64) -> Self {
        let shifted = taylor_shift_compensated(&self.to_monic(), -c);
        // taylor_shift keeps the leading 1 exactly, so this cannot fail
        Self::from_monic(&shifted).expect("translation preserves monic form")
    }

    /// Translation invariants read from `p(Y + P₁)`.
    pub fn depress(&self) -> InvariantSet {
        let shifted = taylor_shift_compensated(&self.to_monic(), self.p1());
        InvariantSet::from_depressed_monic(&shifted)
    }

    /// One-line CSV record `degree,P1,…,P_{n-1},psq`.
    pub fn to_csv_record(&self) -> String {
        let mut s = self.degree.to_string();
        for v in self.p.iter().chain(std::iter::once(&self.psq)) {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s
    }

    pub fn from_csv_record(line: &str) -> Result<Self> {
        line.parse()
    }
}

impl FromStr for NormalizedPolynomial {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut fields = line.trim().split(',').map(str::trim);
        let degree: usize = fields
            .next()
            .filter(|f| !f.is_empty())
            .ok_or_else(|| Error::Malformed("empty record".into()))?
            .parse()
            .map_err(|e| Error::Malformed(format!("degree: {e}")))?;
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Malformed(format!("{f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let Some((&psq, p)) = values.split_last() else {
            return Err(Error::Malformed("missing coefficients".into()));
        };
        Self::new(degree, p.to_vec(), psq)
    }
}

impl fmt::Display for NormalizedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_record())
    }
}

/// Coefficients of the depressed polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub degree: usize,
    pub r0: f64,
    /// `[R₂, …, R_{n−1}]`; empty for quadratics.
    pub r: Vec<f64>,
}

impl InvariantSet {
    /// The only place where the `(−1)^k` signs of the depressed form are
    /// applied; every other module goes through these two conversions.
    fn from_depressed_monic(coeffs: &[f64]) -> Self {
        let n = coeffs.len() - 1;
        Self {
            degree: n,
            r0: sign(n) * coeffs[n],
            r: (2..n).map(|k| sign(k) * coeffs[k]).collect(),
        }
    }

    /// `[1, 0, R₂, −R₃, …, (−1)^n R₀]`, the descending coefficients of `r(Y)`.
    pub fn depressed_monic(&self) -> Vec<f64> {
        let n = self.degree;
        let mut out = vec![1.0, 0.0];
        out.extend(self.r.iter().enumerate().map(|(i, &rk)| sign(i + 2) * rk));
        out.push(sign(n) * self.r0);
        out
    }

    /// `R_k` for `2 ≤ k ≤ n−1`.
    pub fn r_k(&self, k: usize) -> Option<f64> {
        (k >= 2 && k < self.degree).then(|| self.r[k - 2])
    }

    /// Descending coefficients of `P₁ ↦ P₁ⁿ + Σ R_k P₁^{n−k} + R₀`.
    pub fn psq_polynomial(&self) -> Vec<f64> {
        let mut c = vec![1.0, 0.0];
        c.extend_from_slice(&self.r);
        c.push(self.r0);
        c
    }

    /// Root-mean-square spread of the roots, `sqrt(Σ y_k² / n)`.
    pub fn spread(&self) -> f64 {
        let second = if self.degree == 2 {
            self.r0
        } else {
            self.r[0]
        };
        (2.0 * second.abs() / self.degree as f64).sqrt()
    }

    /// Componentwise deviation from `reference`, ordered `[R₂, …, R_{n−1}, R₀]`.
    ///
    /// `R_k` carries the units of the roots to the power `k` (`R₀` to the power
    /// `n`); each deviation is divided by `max(|reference|, spread^k)`.
    pub fn relative_deviation(&self, reference: &Self) -> Vec<f64> {
        let spread = reference.spread();
        let rel = |v: f64, r: f64, weight: usize| {
            let denom = r.abs().max(spread.powi(weight as i32)).max(f64::MIN_POSITIVE);
            (v - r).abs() / denom
        };
        self.r
            .iter()
            .zip(&reference.r)
            .enumerate()
            .map(|(i, (&v, &r))| rel(v, r, i + 2))
            .chain(std::iter::once(rel(self.r0, reference.r0, self.degree)))
            .collect()
    }

    pub fn max_relative_deviation(&self, reference: &Self) -> f64 {
        self.relative_deviation(reference)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `P² = P₁ⁿ + Σ_{k=2}^{n−1} R_k P₁^{n−k} + R₀`.
pub fn psq_of_p1(inv: &InvariantSet, p1: f64) -> f64 {
    horner(&inv.psq_polynomial(), p1)
}

/// `(1/l!) dˡP²/dP₁ˡ`, differentiating the explicit polynomial term by term.
fn psq_taylor_coefficient(inv: &InvariantSet, p1: f64, l: usize) -> f64 {
    let c = inv.psq_polynomial();
    let n = inv.degree;
    if l > n {
        return 0.0;
    }
    c.iter()
        .enumerate()
        .take(n - l + 1)
        .fold(0.0, |acc, (j, &cj)| acc * p1 + binomial(n - j, l) * cj)
}

/// `dˡP²/dP₁ˡ` at `p1`; equals `n!` when `l = n`.
pub fn psq_derivative(inv: &InvariantSet, p1: f64, l: usize) -> f64 {
    factorial(l) * psq_taylor_coefficient(inv, p1, l)
}

/// `P_{n−l} = dˡP²/dP₁ˡ / ((l+1)·l!)` for `1 ≤ l ≤ n−1`.
pub fn coefficient_from_invariants(inv: &InvariantSet, p1: f64, l: usize) -> Result<f64> {
    if l == 0 || l >= inv.degree {
        return Err(Error::IndexOutOfRange {
            index: l,
            max: inv.degree - 1,
        });
    }
    Ok(psq_taylor_coefficient(inv, p1, l) / (l + 1) as f64)
}

/// The translation series `Σ_{l=0}^{n} (−x)ˡ/l! · dˡP²/dP₁ˡ`.
///
/// Its value is `Π(q_i − x)`, which vanishes exactly at the roots. For odd
/// degree this is `−p(x)`.
pub fn euler_shift_residual(poly: &NormalizedPolynomial, x: f64) -> f64 {
    let inv = poly.depress();
    let p1 = poly.p1();
    let mut pow = 1.0;
    let mut sum = 0.0;
    for l in 0..=poly.degree() {
        sum += pow * psq_taylor_coefficient(&inv, p1, l);
        pow *= -x;
    }
    sum
}
