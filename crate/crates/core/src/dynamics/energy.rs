//! Energy constants of the generalized dynamics as polynomials in `V`.
//!
//! Along a trajectory `dP_k = −(n−k+2)·P_{k−1}·dV` (with `P_n = |P|²` and the
//! constant `P₀ = ℰ₀ = 1/(n+1)`), so each coefficient is a polynomial in `V`
//! whose constant term is a new conserved energy:
//!
//! ```text
//! P_k(V) = Σ_j c_{k,j} ℰ_{k−j} V^j,   c_{k,0} = 1,   c_{k,j} = −(n−k+2)·c_{k−1,j−1}/j
//! ```

use serde::{Deserialize, Serialize};

use crate::poly::{psq_of_p1, InvariantSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyChain {
    degree: usize,
    /// `c[k][j]` for `0 ≤ j ≤ k ≤ n`.
    c: Vec<Vec<f64>>,
}

impl EnergyChain {
    pub fn new(degree: usize) -> Self {
        let n = degree;
        let mut c = vec![vec![1.0]];
        for k in 1..=n {
            let factor = (n - k + 2) as f64;
            let prev = &c[k - 1];
            let mut row = vec![1.0];
            row.extend((1..=k).map(|j| -factor * prev[j - 1] / j as f64));
            c.push(row);
        }
        Self { degree: n, c }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn e0(&self) -> f64 {
        1.0 / (self.degree + 1) as f64
    }

    /// `c_{k,j}`.
    pub fn coefficient(&self, k: usize, j: usize) -> f64 {
        self.c[k][j]
    }

    /// Energies `[ℰ₀, ℰ₁, …, ℰ_n]` read off a state with outer momenta
    /// `P₁…P_{n−1}`, `|P|² = psq` and potential value `v`.
    pub fn energies(&self, outer: &[f64], psq: f64, v: f64) -> Vec<f64> {
        self.energies_with_scale(outer, psq, v).0
    }

    /// Energies together with the summed magnitude of the terms that make
    /// up each one, a natural scale for relative drift.
    pub fn energies_with_scale(&self, outer: &[f64], psq: f64, v: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.degree;
        let mut e = vec![self.e0()];
        let mut scale = vec![self.e0()];
        for k in 1..=n {
            let pk = if k == n { psq } else { outer[k - 1] };
            let mut value = pk;
            let mut mag = pk.abs();
            let mut vj = 1.0;
            for j in 1..=k {
                vj *= v;
                let term = self.c[k][j] * e[k - j] * vj;
                value -= term;
                mag += term.abs();
            }
            e.push(value);
            scale.push(mag);
        }
        (e, scale)
    }

    /// `P_k(V)` from energies `[ℰ₀, …]`.
    pub fn p_of_v(&self, k: usize, energies: &[f64], v: f64) -> f64 {
        let mut vj = 1.0;
        let mut sum = 0.0;
        for j in 0..=k {
            sum += self.c[k][j] * energies[k - j] * vj;
            vj *= v;
        }
        sum
    }

    /// `W(V) = ∫₀^V P_{n−1}(V') dV'`, so that `½|P|² + W` is conserved.
    pub fn effective_potential(&self, energies: &[f64], v: f64) -> f64 {
        let k = self.degree - 1;
        let mut vj = v;
        let mut sum = 0.0;
        for j in 0..=k {
            sum += self.c[k][j] * energies[k - j] * vj / (j + 1) as f64;
            vj *= v;
        }
        sum
    }
}

/// Effective potential in series form,
/// `W = ½·Σ_{k=1}^{n} (−1)^{k+1} (k+1) ℰ_{n−k} V^k` with `ℰ₀ = 1/(n+1)`.
///
/// `energies` holds `[ℰ₁, …, ℰ_{n−1}]`.
pub fn effective_potential(n: usize, energies: &[f64], v: f64) -> f64 {
    assert_eq!(energies.len() + 1, n, "energies must be [E1, ..., E(n-1)]");
    let e = |i: usize| {
        if i == 0 {
            1.0 / (n + 1) as f64
        } else {
            energies[i - 1]
        }
    };
    let mut sum = 0.0;
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (k + 1) as f64 * e(n - k) * v.powi(k as i32);
    }
    0.5 * sum
}

/// `½·(R₀ + Σ R_k ℰ₁^{k−1} + ℰ₁ⁿ)`, i.e. half the invariant polynomial at
/// `P₁ = ℰ₁`.
pub fn total_energy(inv: &InvariantSet, e1: f64) -> f64 {
    0.5 * psq_of_p1(inv, e1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{coefficient_from_invariants, NormalizedPolynomial, RootSet};

    #[test]
    fn closed_form_coefficients() {
        for n in 2..=9 {
            let chain = EnergyChain::new(n);
            for k in 1..=n {
                for j in 0..=k {
                    // c_{k,j} = (−1)^j C(n−k+j+1, j)
                    let top = n - k + j + 1;
                    let binom = (0..j).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64);
                    let want = if j % 2 == 0 { binom } else { -binom };
                    assert!((chain.coefficient(k, j) - want).abs() < 1e-9 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn cubic_energies() {
        // ℰ₂ = P₂ + 3ℰ₁V − (3/2)V²
        let chain = EnergyChain::new(3);
        let (p1, p2, psq, v) = (0.7, 1.9, 2.2, -0.4);
        let e = chain.energies(&[p1, p2], psq, v);
        let e1 = p1 + v;
        assert!((e[1] - e1).abs() < 1e-15);
        assert!((e[2] - (p2 + 3.0 * e1 * v - 1.5 * v * v)).abs() < 1e-14);
    }

    #[test]
    fn series_matches_chain_integral() {
        for n in 2..=8 {
            let chain = EnergyChain::new(n);
            let energies: Vec<f64> = (1..n).map(|k| 0.3 * k as f64 - 0.5).collect();
            let mut full = vec![chain.e0()];
            full.extend(&energies);
            for v in [-1.3, -0.2, 0.0, 0.6, 2.0] {
                let a = effective_potential(n, &energies, v);
                let b = chain.effective_potential(&full, v);
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "n={n} v={v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn effective_potential_examples() {
        let (e1, e2, v) = (1.5, -0.7, 0.8);
        assert!((effective_potential(2, &[e1], v) - (e1 * v - 0.5 * v * v)).abs() < 1e-15);
        let want = e2 * v - 1.5 * e1 * v * v + 0.5 * v.powi(3);
        assert!((effective_potential(3, &[e1, e2], v) - want).abs() < 1e-15);
        assert_eq!(effective_potential(4, &[1.0, 2.0, 3.0], 0.0), 0.0);
    }

    #[test]
    fn energies_at_rest_potential_are_closed_form_coefficients() {
        let poly = NormalizedPolynomial::from_roots(&RootSet::new(vec![0.5, 1.25, 2.0, 4.0]).unwrap())
            .unwrap();
        let inv = poly.depress();
        let chain = EnergyChain::new(4);
        let e = chain.energies(poly.p(), poly.psq(), 0.0);
        for k in 2..4 {
            let want = coefficient_from_invariants(&inv, e[1], 4 - k).unwrap();
            assert!((e[k] - want).abs() < 1e-12);
        }
        assert!((e[4] - 2.0 * total_energy(&inv, e[1])).abs() < 1e-12);
    }

    #[test]
    fn total_energy_examples() {
        let inv = InvariantSet {
            degree: 3,
            r0: 0.0,
            r: vec![-1.0],
        };
        assert_eq!(total_energy(&inv, 2.0), 3.0);
        let inv = InvariantSet {
            degree: 3,
            r0: 0.8,
            r: vec![-1.0],
        };
        assert_eq!(total_energy(&inv, 0.0), 0.4);
    }
}
