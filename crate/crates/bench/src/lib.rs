//! Fixtures shared by the criterion benches.

use polyflow_core::{NormalizedPolynomial, RootSet};

/// Evenly spread, well separated roots `1, 1.7, 2.4, …` for degree `n`.
pub fn spaced_roots(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.7 * i as f64).collect()
}

pub fn spaced_polynomial(n: usize) -> NormalizedPolynomial {
    let roots = RootSet::new(spaced_roots(n)).expect("spaced roots are distinct");
    NormalizedPolynomial::from_roots(&roots).expect("degree is at least 2")
}
