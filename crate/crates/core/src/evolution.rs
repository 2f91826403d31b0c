//! Coefficient flow under a uniform translation of all roots.
//!
//! Moving every root by the same amount changes the coefficients but keeps
//! the depressed-polynomial invariants fixed. Taking `P₁` itself as the march
//! variable `s` (so `dP₁/ds = 1`) the flow is
//!
//! ```text
//! dP_{n−k}/ds = (k+2)·P_{n−k−1},   k = 1..n−2
//! dP²/ds      = 2·P_{n−1}
//! ```
//!
//! which is polynomial in the state, so the integrator never divides. The
//! march runs `s` downward until the smallest root reaches zero (`P² = 0`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{rk4_increment, rk4_step};
use crate::poly::{coefficient_from_invariants, two_sum, psq_of_p1, InvariantSet, NormalizedPolynomial};

/// Integration scheme for [`evolve_to_psq_zero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Fourth-order Runge–Kutta in `s = P₁` with event location.
    #[default]
    Rk4March,
    /// First-order Euler in `x = P²` over an equal partition of `[P², 0]`.
    CauchyLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOptions {
    /// Nominal number of steps; the step is `P₁ / steps`.
    pub steps: usize,
    /// Absolute tolerance on the location of the `P² = 0` crossing.
    pub event_tol: f64,
    /// Bound on the relative invariant drift over the whole march.
    pub drift_tol: f64,
    pub max_steps: usize,
    /// Halve the step whenever a single step drifts more than
    /// `drift_tol / steps`.
    pub adaptive: bool,
    /// Replace the integrated end state by the exact translation of the
    /// start polynomial, refined by Newton steps on the shift.
    pub polish_endpoint: bool,
    pub scheme: Scheme,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            steps: 256,
            event_tol: 1e-12,
            drift_tol: 1e-10,
            max_steps: 1 << 20,
            adaptive: true,
            polish_endpoint: true,
            scheme: Scheme::Rk4March,
        }
    }
}

/// A point on the flow. `x` mirrors `poly.psq()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionState {
    pub poly: NormalizedPolynomial,
    pub x: f64,
    /// Total translation applied to the roots so far, `P₁(start) − P₁(now)`.
    pub shift_accumulated: f64,
}

impl EvolutionState {
    pub fn new(poly: NormalizedPolynomial) -> Self {
        Self {
            x: poly.psq(),
            poly,
            shift_accumulated: 0.0,
        }
    }

    fn to_vector(&self) -> Vec<f64> {
        let mut y = self.poly.p().to_vec();
        y.push(self.poly.psq());
        y
    }

    fn from_vector(y: &[f64], shift_accumulated: f64) -> Result<Self> {
        let (&psq, p) = y.split_last().expect("state vector is never empty");
        let poly = NormalizedPolynomial::new(p.len() + 1, p.to_vec(), psq)?;
        Ok(Self {
            x: psq,
            poly,
            shift_accumulated,
        })
    }
}

/// Sampled flow together with invariant-drift bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionTrace {
    pub degree: usize,
    /// `(s, state)` with `s = P₁` at that sample.
    pub samples: Vec<(f64, EvolutionState)>,
    /// Largest relative deviation of each invariant from the initial set,
    /// ordered `[R₂, …, R_{n−1}, R₀]`.
    pub invariant_drift: Vec<f64>,
    pub step_count: usize,
    pub initial_invariants: InvariantSet,
}

impl EvolutionTrace {
    fn start(state: &EvolutionState) -> Self {
        let inv = state.poly.depress();
        Self {
            degree: state.poly.degree(),
            samples: vec![(state.poly.p1(), state.clone())],
            invariant_drift: vec![0.0; inv.r.len() + 1],
            step_count: 0,
            initial_invariants: inv,
        }
    }

    fn push(&mut self, state: EvolutionState) {
        let dev = state
            .poly
            .depress()
            .relative_deviation(&self.initial_invariants);
        for (d, v) in self.invariant_drift.iter_mut().zip(dev) {
            *d = d.max(v);
        }
        self.samples.push((state.poly.p1(), state));
    }

    pub fn max_drift(&self) -> f64 {
        self.invariant_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn last(&self) -> &EvolutionState {
        &self.samples.last().expect("trace holds the initial state").1
    }

    /// CSV with columns `s,P1,…,P{n-1},Psq,R_drift`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s");
        for k in 1..self.degree {
            let _ = write!(out, ",P{k}");
        }
        out.push_str(",Psq,R_drift\n");
        for (s, state) in &self.samples {
            let drift = state
                .poly
                .depress()
                .max_relative_deviation(&self.initial_invariants);
            let _ = write!(out, "{s}");
            for v in state.poly.p() {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{},{drift}", state.poly.psq());
        }
        out
    }
}

fn rhs_into(n: usize, y: &[f64], dy: &mut [f64]) {
    dy[0] = 1.0;
    for j in 2..n {
        dy[j - 1] = (n - j + 2) as f64 * y[j - 2];
    }
    dy[n - 1] = 2.0 * y[n - 2];
}

/// `d/ds` of `[P₁, …, P_{n−1}, P²]` with `dP₁/ds = 1`.
pub fn ode_rhs(state: &EvolutionState) -> Vec<f64> {
    let y = state.to_vector();
    let mut dy = vec![0.0; y.len()];
    rhs_into(state.poly.degree(), &y, &mut dy);
    dy
}

/// Translates all roots down until the smallest reaches zero.
///
/// Requires every root to be strictly positive (so `P² > 0` and `P²` falls
/// monotonically during the march). Returns the state with `|P²|` at rounding
/// level and the sampled trace.
pub fn evolve_to_psq_zero(
    poly: &NormalizedPolynomial,
    opts: &EvolutionOptions,
) -> Result<(EvolutionState, EvolutionTrace)> {
    let start = EvolutionState::new(poly.clone());
    let mut trace = EvolutionTrace::start(&start);
    if poly.psq() == 0.0 {
        return Ok((start, trace));
    }
    if poly.psq() < 0.0 {
        return Err(Error::SingularEvolution(format!(
            "P² = {:e} is negative; the roots are not all positive",
            poly.psq()
        )));
    }
    let n = poly.degree();
    let last_p = poly.p()[n - 2];
    if poly.p1() <= 0.0 || last_p <= 0.0 {
        return Err(Error::SingularEvolution(
            "P₁ and P_{n−1} must be positive when all roots are positive".into(),
        ));
    }
    match opts.scheme {
        Scheme::Rk4March => march_rk4(start, &mut trace, opts)?,
        Scheme::CauchyLipschitz => march_euler_in_psq(start, &mut trace, opts)?,
    }
    let end = trace.last().clone();
    Ok((end, trace))
}

fn march_rk4(start: EvolutionState, trace: &mut EvolutionTrace, opts: &EvolutionOptions) -> Result<()> {
    let n = start.poly.degree();
    let f = move |_s: f64, y: &[f64], dy: &mut [f64]| rhs_into(n, y, dy);
    let p1_start = start.poly.p1();
    let steps = opts.steps.max(1);
    let per_step_drift = opts.drift_tol / steps as f64;
    let spread = trace.initial_invariants.spread().max(f64::MIN_POSITIVE);
    let h0 = if opts.adaptive {
        truncation_limited_step(&trace.initial_invariants, p1_start, p1_start / steps as f64, opts.drift_tol)
    } else {
        p1_start / steps as f64
    };
    let h_min = h0 / 1024.0;

    let mut h = h0;
    let mut y = start.to_vector();
    // low-order parts of the state; increments are small next to `|P₁|ᵏ`
    // and would otherwise lose their trailing digits every step
    let mut y_lo = vec![0.0; n];
    let advance = |y: &[f64], lo: &[f64], h: f64| -> (Vec<f64>, Vec<f64>) {
        let inc = rk4_increment(&f, y[0], y, h);
        y.iter()
            .zip(lo)
            .zip(inc)
            .map(|((&v, &l), d)| {
                let (s, e) = two_sum(v, d);
                two_sum(s, e + l)
            })
            .unzip()
    };
    let mut inv_prev = start.poly.depress();
    let mut accepted = 0usize;

    loop {
        if accepted >= opts.max_steps {
            return Err(Error::MaxStepsExceeded(opts.max_steps));
        }
        let (y_new, lo_new) = advance(&y, &y_lo, -h);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evolution state"));
        }
        let psq_new = y_new[n - 1];
        let psq_old = y[n - 1];

        if opts.adaptive && h > h_min {
            // depressing a far-off-centre state loses digits to cancellation;
            // drift below that floor is rounding, not truncation
            let floor = 64.0 * f64::EPSILON * (1.0 + y[0].abs() / spread).powi(n as i32);
            let inv_new = state_invariants(&y_new)?;
            if inv_new.max_relative_deviation(&inv_prev) > per_step_drift.max(floor) {
                h /= 2.0;
                continue;
            }
        }

        if psq_new > 0.0 {
            if psq_new >= psq_old {
                return Err(Error::SingularEvolution(
                    "P² stopped decreasing before reaching zero".into(),
                ));
            }
            if y_new[n - 2] <= 0.0 {
                return Err(Error::SingularEvolution(
                    "P_{n−1} changed sign before P² reached zero".into(),
                ));
            }
            if y_new[0] <= 0.0 {
                return Err(Error::SingularEvolution(
                    "P₁ reached zero without a root crossing".into(),
                ));
            }
            accepted += 1;
            y = y_new;
            y_lo = lo_new;
            inv_prev = state_invariants(&y)?;
            h = (2.0 * h).min(h0);
            trace.push(EvolutionState::from_vector(&y, p1_start - y[0])?);
            continue;
        }

        // P² crossed zero inside (0, h]: bisect on the step length
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > opts.event_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if rk4_step(&f, y[0], &y, -mid)[n - 1] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut delta = 0.5 * (lo + hi);
        let probe = rk4_step(&f, y[0], &y, -delta);
        if probe[n - 2] > 0.0 {
            // d(P²)/d(delta) = −2 P_{n−1}
            delta += probe[n - 1] / (2.0 * probe[n - 2]);
        }
        let mut y_end = advance(&y, &y_lo, -delta).0;
        if opts.polish_endpoint {
            y_end = polish(&start.poly, p1_start - y_end[0]);
        }
        if y_end[n - 2] <= 0.0 {
            return Err(Error::SingularEvolution(
                "P_{n−1} vanishes at the crossing (repeated root)".into(),
            ));
        }
        accepted += 1;
        trace.push(EvolutionState::from_vector(&y_end, p1_start - y_end[0])?);
        trace.step_count = accepted;
        return Ok(());
    }
}

fn march_euler_in_psq(
    start: EvolutionState,
    trace: &mut EvolutionTrace,
    opts: &EvolutionOptions,
) -> Result<()> {
    let n = start.poly.degree();
    let steps = opts.steps.max(1);
    if steps > opts.max_steps {
        return Err(Error::MaxStepsExceeded(opts.max_steps));
    }
    let p1_start = start.poly.p1();
    let dx = -start.poly.psq() / steps as f64;
    let mut y = start.to_vector();
    let mut rate = vec![0.0; n];
    for i in 0..steps {
        let last_p = y[n - 2];
        if last_p <= 0.0 {
            return Err(Error::SingularEvolution(
                "P_{n−1} changed sign before P² reached zero".into(),
            ));
        }
        rhs_into(n, &y, &mut rate);
        let dp1 = dx / (2.0 * last_p);
        for (v, r) in y.iter_mut().zip(&rate).take(n - 1) {
            *v += r * dp1;
        }
        y[n - 1] = if i + 1 == steps {
            0.0
        } else {
            start.poly.psq() + dx * (i + 1) as f64
        };
        trace.push(EvolutionState::from_vector(&y, p1_start - y[0])?);
    }
    trace.step_count = steps;
    Ok(())
}

/// Exact state after translating `poly` down by a shift near `shift`, with
/// the shift refined by Newton steps on `P²(shift) = 0`.
fn polish(poly: &NormalizedPolynomial, mut shift: f64) -> Vec<f64> {
    let n = poly.degree();
    let mut best = EvolutionState::new(poly.translate(-shift)).to_vector();
    for _ in 0..4 {
        let slope = 2.0 * best[n - 2];
        if slope <= 0.0 || best[n - 1] == 0.0 {
            break;
        }
        let next_shift = shift + best[n - 1] / slope;
        let next = EvolutionState::new(poly.translate(-next_shift)).to_vector();
        if next[n - 1].abs() >= best[n - 1].abs() {
            break;
        }
        shift = next_shift;
        best = next;
    }
    best
}

/// Largest step of the form `h0 / 2^i`, `i ≤ 10`, whose accumulated RK4 truncation
/// stays within half of `drift_tol`.
///
/// The flow is linear and nilpotent, so one RK4 step misses exactly the
/// Taylor terms `h^j/j!·r^{(j)}` for `j ≥ 5`, where `r` is the depressed
/// polynomial. That error lives in the invariant frame and does not depend
/// on the state, unlike the per-step drift check which is blind to it once
/// `|P₁|` dwarfs the root spread.
fn truncation_limited_step(inv: &InvariantSet, p1: f64, h0: f64, drift_tol: f64) -> f64 {
    let n = inv.degree;
    if n < 5 {
        return h0;
    }
    let spread = inv.spread().max(f64::MIN_POSITIVE);
    // |coefficient of Y^{n−m}| in r
    let c: Vec<f64> = (0..=n)
        .map(|m| match m {
            0 => 1.0,
            1 => 0.0,
            m if m == n => inv.r0.abs(),
            m => inv.r[m - 2].abs(),
        })
        .collect();
    let per_step = |h: f64| {
        (5..=n)
            .map(|k| {
                let reference = c[k].max(spread.powi(k as i32));
                let mut err = 0.0;
                let mut fact = 1.0;
                for j in 1..=k {
                    fact *= j as f64;
                    if j >= 5 {
                        // j-th derivative of c_{k−j}·Y^{n−k+j} at Y^{n−k}
                        let falling: f64 = ((n - k + 1)..=(n - k + j)).map(|v| v as f64).product();
                        err += h.powi(j as i32) / fact * c[k - j] * falling;
                    }
                }
                err / reference
            })
            .fold(0.0, f64::max)
    };
    let mut h = h0;
    for _ in 0..10 {
        let steps = (p1.abs() / h).ceil() + 1.0;
        if steps * per_step(h) <= 0.5 * drift_tol {
            break;
        }
        h /= 2.0;
    }
    h
}

fn state_invariants(y: &[f64]) -> Result<InvariantSet> {
    Ok(EvolutionState::from_vector(y, 0.0)?.poly.depress())
}

/// Largest relative deviation between the integrated coefficients and the
/// exact polynomials in `P₁` built from the initial invariants.
pub fn verify_against_closed_form(trace: &EvolutionTrace) -> f64 {
    let inv = &trace.initial_invariants;
    let n = trace.degree;
    let spread = inv.spread();
    let rel = |got: f64, want: f64, weight: usize| {
        (got - want).abs() / want.abs().max(spread.powi(weight as i32)).max(f64::MIN_POSITIVE)
    };
    let mut worst = 0.0f64;
    for (_, state) in &trace.samples {
        let p1 = state.poly.p1();
        for l in 1..n {
            let exact = coefficient_from_invariants(inv, p1, l).expect("l within 1..n-1");
            worst = worst.max(rel(state.poly.p()[n - l - 1], exact, n - l));
        }
        worst = worst.max(rel(state.poly.psq(), psq_of_p1(inv, p1), n));
    }
    worst
}
