//! Degree reduction: evolve until a root reaches zero, strip it, recurse.
//!
//! Each stage translates all roots of the current polynomial down until the
//! smallest one sits at zero, divides out `X`, and re-expresses the quotient
//! in the normalized convention of one degree lower. Once a linear factor
//! remains, the roots are rebuilt by undoing the stage translations in
//! reverse order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_to_psq_zero, EvolutionOptions, EvolutionState};
use crate::poly::{horner, taylor_shift, NormalizedPolynomial, RootSet};

/// Largest degree accepted by [`solve`].
pub const MAX_DEGREE: usize = 16;

/// How the initial translation that makes every root positive is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precondition {
    /// Shift by the Cauchy bound `1 + max_k |a_k|` of the monic coefficients.
    CauchyBound,
    /// Shift so that the Laguerre–Samuelson lower bound
    /// `P₁ − sqrt((n−1)·Σy²/n)` lands at a quarter of the root spread. Valid
    /// for real-rooted input and far tighter than the Cauchy bound, which keeps
    /// the coefficient magnitudes close to the root spread.
    #[default]
    Samuelson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub evolution: EvolutionOptions,
    pub precondition: Precondition,
    /// Factor applied to the event tolerance after every stage.
    pub event_tol_decay: f64,
    /// Newton–Maehly sweeps of the recovered roots against the input
    /// polynomial; 0 returns the raw reconstruction.
    pub refine_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            evolution: EvolutionOptions::default(),
            precondition: Precondition::default(),
            event_tol_decay: 0.5,
            refine_sweeps: 2,
        }
    }
}

/// Result of dividing a polynomial with a zero root by `X`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Deflated {
    Polynomial(NormalizedPolynomial),
    Linear { root: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStage {
    pub degree: usize,
    pub p1_before: f64,
    pub p1_after: f64,
    pub shift: f64,
    pub deflated: Deflated,
    pub invariant_drift: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub stages: Vec<ReductionStage>,
    pub precondition_shift: f64,
    pub final_linear_root: f64,
}

/// Translates every root by `+B` so that all of them are positive.
///
/// With [`Precondition::CauchyBound`] `B = 1 + max_k |a_k|`.
pub fn precondition_shift(poly: &NormalizedPolynomial) -> (NormalizedPolynomial, f64) {
    precondition_shift_with(poly, Precondition::CauchyBound)
        .expect("the Cauchy bound exists for every polynomial")
}

pub fn precondition_shift_with(
    poly: &NormalizedPolynomial,
    policy: Precondition,
) -> Result<(NormalizedPolynomial, f64)> {
    let shift = match policy {
        Precondition::CauchyBound => {
            1.0 + poly.to_monic()[1..]
                .iter()
                .fold(0.0f64, |m, a| m.max(a.abs()))
        }
        Precondition::Samuelson => {
            let n = poly.degree() as f64;
            let monic = poly.to_monic();
            // Σy² = −2·(coefficient of Y^{n−2} in the depressed polynomial)
            let depressed = taylor_shift(&monic, poly.p1());
            let sum_sq = -2.0 * depressed[2];
            if sum_sq <= 0.0 {
                return Err(Error::SingularEvolution(
                    "root variance is not positive: complex or repeated roots".into(),
                ));
            }
            let sigma = (sum_sq / n).sqrt();
            let lower = poly.p1() - ((n - 1.0) * sum_sq / n).sqrt();
            0.25 * sigma - laguerre_tighten(&monic, lower, LAGUERRE_STEPS)
        }
    };
    Ok((poly.translate(shift), shift))
}

const LAGUERRE_STEPS: usize = 2;

/// Moves a lower root bound `x` of a real-rooted polynomial up towards the
/// smallest root. From the left of every root, Laguerre iterates increase
/// monotonically and never pass the smallest root.
fn laguerre_tighten(monic: &[f64], mut x: f64, steps: usize) -> f64 {
    let n = (monic.len() - 1) as f64;
    // left of every root, p has the sign of (−1)^n
    let left_sign = if monic.len() % 2 == 1 { 1.0 } else { -1.0 };
    let is_left = |x: f64| horner(monic, x) * left_sign > 0.0;
    if !is_left(x) {
        return x;
    }
    for _ in 0..steps {
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for &a in monic {
            ddp = ddp * x + 2.0 * dp;
            dp = dp * x + p;
            p = p * x + a;
        }
        if p == 0.0 {
            break;
        }
        let g = dp / p;
        let h = g * g - ddp / p;
        let disc = ((n - 1.0) * (n * h - g * g)).max(0.0).sqrt();
        // from the left g < 0, so g − disc has the larger magnitude
        let denom = g - disc;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let next = x - n / denom;
        if !(next > x) || !is_left(next) {
            break;
        }
        x = next;
    }
    x
}

/// Divides out the zero root and renormalizes to degree `n − 1`:
/// `(n−k)·P′_k = (n−k+1)·P_k` for `k ≤ n−2` and `P′² = 2·P_{n−1}`.
pub fn deflate_and_renormalize(state: &EvolutionState, tol: f64) -> Result<Deflated> {
    let poly = &state.poly;
    if poly.psq().abs() > tol {
        return Err(Error::NotAtZero {
            psq: poly.psq(),
            tol,
        });
    }
    let n = poly.degree();
    let p = poly.p();
    if n == 2 {
        return Ok(Deflated::Linear { root: 2.0 * p[0] });
    }
    let new_psq = 2.0 * p[n - 2];
    if new_psq.abs() <= tol {
        return Err(Error::SingularEvolution(
            "second root at zero after deflation (repeated root)".into(),
        ));
    }
    let new_p = (1..=n - 2)
        .map(|k| (n - k + 1) as f64 * p[k - 1] / (n - k) as f64)
        .collect();
    Ok(Deflated::Polynomial(NormalizedPolynomial::new(
        n - 1,
        new_p,
        new_psq,
    )?))
}

/// Error bound for `p(x)` evaluated in floating point: `2nε Σ|a_k||x|^{n−k}`.
fn rounding_floor(poly: &NormalizedPolynomial, x: f64) -> f64 {
    let monic = poly.to_monic();
    let magnitude = monic.iter().fold(0.0, |acc, a| acc * x.abs() + a.abs());
    2.0 * poly.degree() as f64 * f64::EPSILON * magnitude
}

/// Finds all roots of a polynomial with simple real roots.
pub fn solve(poly: &NormalizedPolynomial, opts: &SolveOptions) -> Result<(RootSet, ReductionTrace)> {
    let n = poly.degree();
    if n > MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: n,
            max: MAX_DEGREE,
        });
    }
    let (mut current, pre_shift) = precondition_shift_with(poly, opts.precondition)?;
    let mut evo = opts.evolution.clone();
    let mut stages = Vec::with_capacity(n - 1);

    let linear_root = loop {
        let (end, trace) = evolve_to_psq_zero(&current, &evo)?;
        // |P²| left at the crossing is the location error times dP²/dP₁
        let slope = 2.0 * end.poly.p()[end.poly.degree() - 2].abs();
        let psq_tol = slope * (evo.event_tol + 1e-12 * (1.0 + current.p1().abs()))
            + rounding_floor(&current, end.shift_accumulated);
        let deflated = deflate_and_renormalize(&end, psq_tol)?;
        stages.push(ReductionStage {
            degree: current.degree(),
            p1_before: current.p1(),
            p1_after: end.poly.p1(),
            shift: end.shift_accumulated,
            deflated: deflated.clone(),
            invariant_drift: trace.max_drift(),
            steps: trace.step_count,
        });
        match deflated {
            Deflated::Linear { root } => break root,
            Deflated::Polynomial(next) => current = next,
        }
        evo.event_tol *= opts.event_tol_decay;
    };

    let trace = ReductionTrace {
        stages,
        precondition_shift: pre_shift,
        final_linear_root: linear_root,
    };
    let mut roots = back_translate(&trace);
    for _ in 0..opts.refine_sweeps {
        refine_sweep(&poly.to_monic(), &mut roots);
    }
    let roots = RootSet::new(roots).map_err(|e| match e {
        Error::DuplicateRoot { a, b, .. } => {
            Error::SingularEvolution(format!("recovered roots {a} and {b} coincide"))
        }
        other => other,
    })?;
    Ok((roots, trace))
}

/// One Newton–Maehly pass: Newton on `p(x) / Π_{j≠i}(x − x_j)`, so a root
/// cannot wander onto a neighbour. A correction is kept only if it lowers
/// `|p|`.
fn refine_sweep(monic: &[f64], roots: &mut [f64]) {
    for i in 0..roots.len() {
        let x = roots[i];
        let (mut p, mut dp) = (0.0, 0.0);
        for &a in monic {
            dp = dp * x + p;
            p = p * x + a;
        }
        if p == 0.0 {
            continue;
        }
        let repel: f64 = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| 1.0 / (x - xj))
            .sum();
        let denom = dp - p * repel;
        if denom == 0.0 || !denom.is_finite() {
            continue;
        }
        let next = x - p / denom;
        if horner(monic, next).abs() < p.abs() {
            roots[i] = next;
        }
    }
}

/// Rebuilds the roots stage by stage: each stage's known roots move up by the
/// stage shift and its stripped zero root joins them as the shift itself.
fn back_translate(trace: &ReductionTrace) -> Vec<f64> {
    let mut roots = vec![trace.final_linear_root];
    for stage in trace.stages.iter().rev() {
        for q in roots.iter_mut() {
            *q += stage.shift;
        }
        roots.push(stage.shift);
    }
    for q in roots.iter_mut() {
        *q -= trace.precondition_shift;
    }
    roots
}

fn closed_form_p1_sequence(trace: &ReductionTrace) -> Result<(usize, Vec<f64>)> {
    let first = trace
        .stages
        .first()
        .ok_or_else(|| Error::IncompleteTrace("no stages".into()))?;
    let n = first.degree;
    if trace.stages.len() != n - 1 {
        return Err(Error::IncompleteTrace(format!(
            "{} stages for degree {n}",
            trace.stages.len()
        )));
    }
    for (i, stage) in trace.stages.iter().enumerate() {
        if stage.degree != n - i {
            return Err(Error::IncompleteTrace(format!(
                "stage {i} has degree {}, expected {}",
                stage.degree,
                n - i
            )));
        }
    }
    // P₁ of every stage expressed in the degree-n scaling: n·P₁⁽ʳ⁾ is the
    // sum of the stage roots
    let mut seq = Vec::with_capacity(n);
    seq.push(first.p1_before);
    seq.extend(
        trace
            .stages
            .iter()
            .map(|s| s.degree as f64 * s.p1_after / n as f64),
    );
    Ok((n, seq))
}

/// Closed-form reconstruction from the sequence of `P₁` values:
///
/// ```text
/// q₁ = n·P₁⁽ⁿ⁻¹⁾ + n·Σ_{r=2}^{n} (P₁⁽ⁿ⁻ʳ⁾ − P₁⁽ⁿ⁻ʳ⁺¹⁾)/r
/// q_s = n·Σ_{r=s}^{n} (P₁⁽ⁿ⁻ʳ⁾ − P₁⁽ⁿ⁻ʳ⁺¹⁾)/r,   s = 2..n
/// ```
///
/// with all `P₁⁽ʳ⁾` in the degree-`n` scaling.
pub fn back_translate_closed_form(trace: &ReductionTrace) -> Result<RootSet> {
    let (n, seq) = closed_form_p1_sequence(trace)?;
    let roots = closed_form_roots(n, &seq, n as f64);
    finish_closed_form(trace, roots)
}

/// The same reconstruction with the second family printed without the
/// leading factor `n`; kept to measure how far that reading is off.
pub fn back_translate_unscaled(trace: &ReductionTrace) -> Result<Vec<f64>> {
    let (n, seq) = closed_form_p1_sequence(trace)?;
    let mut roots = closed_form_roots(n, &seq, 1.0);
    for q in roots.iter_mut() {
        *q -= trace.precondition_shift;
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

fn closed_form_roots(n: usize, seq: &[f64], tail_factor: f64) -> Vec<f64> {
    let term = |r: usize| (seq[n - r] - seq[n - r + 1]) / r as f64;
    let tail = |s: usize| (s..=n).map(term).sum::<f64>();
    let mut roots = Vec::with_capacity(n);
    roots.push(n as f64 * seq[n - 1] + n as f64 * tail(2));
    roots.extend((2..=n).map(|s| tail_factor * tail(s)));
    roots
}

fn finish_closed_form(trace: &ReductionTrace, mut roots: Vec<f64>) -> Result<RootSet> {
    for q in roots.iter_mut() {
        *q -= trace.precondition_shift;
    }
    RootSet::with_separation(roots, 0.0)
}
