//! Particle dynamics whose momenta are the coefficients of an evolving
//! polynomial: the Lorentz-force (quadratic) case and the generalized
//! degree-`n` system, with conservation monitors.

mod energy;
mod generalized;
mod potential;
mod quadratic;

pub use energy::{effective_potential, total_energy, EnergyChain};
pub use generalized::{
    newtonian_reduction_check, simulate_generalized, ConservationReport, DynamicsState,
    NewtonianComparison, Trajectory,
};
pub use potential::{PotentialSpec, DEFAULT_CORE_RADIUS};
pub use quadratic::{
    half_argument_report, quadratic_s_flow, reparametrization_distance, simulate_quadratic,
    HalfArgumentReport, LorentzField, QuadraticState, QuadraticTrajectory,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4_step;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOptions {
    pub steps: usize,
    /// Bound on the Richardson estimate `|y_{h/2,h/2} − y_h| / 15` of the
    /// local error, relative to `1 + |y|`; exceeding it is a
    /// [`Error::StepFailure`]. `None` skips the audit.
    pub audit_tol: Option<f64>,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            steps: 10_000,
            audit_tol: Some(1e-6),
        }
    }
}

/// Fixed-step RK4 over `tau_span`, calling `sample(tau, y)` at the start
/// and after every step. With the audit on, each step is taken as two half
/// steps and checked against one full step.
fn march<F, S>(f: &F, y0: Vec<f64>, tau_span: (f64, f64), opts: &DynamicsOptions, mut sample: S) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> Result<()>,
{
    let (t0, t1) = tau_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::NonFinite("tau span"));
    }
    sample(t0, &y0)?;
    if t1 == t0 {
        return Ok(());
    }
    let steps = opts.steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let next = match opts.audit_tol {
            None => rk4_step(f, t, &y, h),
            Some(tol) => {
                let full = rk4_step(f, t, &y, h);
                let half = rk4_step(f, t, &y, 0.5 * h);
                let fine = rk4_step(f, t + 0.5 * h, &half, 0.5 * h);
                let err = fine
                    .iter()
                    .zip(&full)
                    .map(|(a, b)| (a - b).abs() / (15.0 * (1.0 + a.abs())))
                    .fold(0.0, f64::max);
                if !(err <= tol) {
                    return Err(Error::StepFailure(t));
                }
                fine
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepFailure(t));
        }
        y = next;
        sample(t0 + (i + 1) as f64 * h, &y)?;
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `|x − x₀| / max(|x₀|, scale)`.
fn relative_drift(x: f64, x0: f64, scale: f64) -> f64 {
    (x - x0).abs() / x0.abs().max(scale).max(f64::MIN_POSITIVE)
}
