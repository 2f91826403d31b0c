//! Lorentz-force motion, the dynamics of the quadratic `X² − 2P₀X + |P|²`:
//!
//! ```text
//! dP/dτ = E·P₀ + P × B,   dP₀/dτ = E·P,   dr/dτ = P,   dt/dτ = P₀
//! ```
//!
//! with `E = −∇V`. Along the motion `ds/dτ = E·n` (`n = P/|P|`) turns the
//! magnitudes into `d|P|/ds = P₀`, `dP₀/ds = |P|`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::potential::PotentialSpec;
use super::{dot, march, norm, relative_drift, DynamicsOptions};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzField {
    /// Electric field is `−∇V` of this potential.
    pub potential: PotentialSpec,
    /// Uniform magnetic field.
    pub b: [f64; 3],
}

impl LorentzField {
    pub fn electric(&self, r: &[f64; 3]) -> [f64; 3] {
        let g = self.potential.gradient(r);
        [-g[0], -g[1], -g[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticState {
    pub r: [f64; 3],
    pub p: [f64; 3],
    pub p0: f64,
    pub t: f64,
    pub tau: f64,
    pub s: f64,
}

impl QuadraticState {
    /// State of mass `m` with momentum `p`, `P₀ = √(m² + |P|²)` and
    /// `s = asinh(|P|/m)` so that `|P| = m·sinh s`.
    pub fn new(r: [f64; 3], p: [f64; 3], m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InconsistentInit(format!("mass must be positive, got {m}")));
        }
        let pm = norm(&p);
        Ok(Self {
            r,
            p,
            p0: (m * m + pm * pm).sqrt(),
            t: 0.0,
            tau: 0.0,
            s: (pm / m).asinh(),
        })
    }

    pub fn mass_squared(&self) -> f64 {
        self.p0 * self.p0 - dot(&self.p, &self.p)
    }

    /// Roots `(p₁², p₂²) = (P₀ − M, P₀ + M)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = self.mass_squared().max(0.0).sqrt();
        (self.p0 - m, self.p0 + m)
    }

    fn to_vector(self) -> Vec<f64> {
        let mut y = Vec::with_capacity(9);
        y.extend(self.r);
        y.extend(self.p);
        y.extend([self.p0, self.t, self.s]);
        y
    }

    fn from_vector(y: &[f64], tau: f64) -> Self {
        Self {
            r: [y[0], y[1], y[2]],
            p: [y[3], y[4], y[5]],
            p0: y[6],
            t: y[7],
            tau,
            s: y[8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTrajectory {
    pub samples: Vec<QuadraticState>,
    /// Max relative drift of `M² = P₀² − |P|²`.
    pub mass_drift: f64,
    /// Max relative drift of `ℰ₀ = P₀ + V`.
    pub energy_drift: f64,
}

impl QuadraticTrajectory {
    /// CSV with columns `tau,s,t,r_0..r_2,p_0..p_2,P_abs,P0,M2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,s,t,r_0,r_1,r_2,p_0,p_1,p_2,P_abs,P0,M2\n");
        for st in &self.samples {
            let _ = write!(out, "{},{},{}", st.tau, st.s, st.t);
            for x in st.r.iter().chain(&st.p) {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{},{},{}", norm(&st.p), st.p0, st.mass_squared());
        }
        out
    }
}

fn cross(a: &[f64], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn simulate_quadratic(
    field: &LorentzField,
    init: &QuadraticState,
    tau_span: (f64, f64),
    opts: &DynamicsOptions,
) -> Result<QuadraticTrajectory> {
    field.potential.validate()?;
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let r = [y[0], y[1], y[2]];
        let p = &y[3..6];
        let p0 = y[6];
        let e = field.electric(&r);
        let lorentz = cross(p, &field.b);
        for i in 0..3 {
            dy[i] = p[i];
            dy[3 + i] = e[i] * p0 + lorentz[i];
        }
        dy[6] = dot(&e, p);
        dy[7] = p0;
        let pm = norm(p);
        let em = norm(&e);
        // at rest the motion starts along E
        dy[8] = if pm > 0.0 {
            dot(&e, p) / pm
        } else {
            em
        };
    };

    let m2_0 = init.mass_squared();
    let v0 = field.potential.value(&init.r);
    let e0 = init.p0 + v0;
    let e_scale = init.p0.abs() + v0.abs();
    let m2_scale = init.p0 * init.p0;
    let mut samples = Vec::with_capacity(opts.steps + 1);
    let (mut mass_drift, mut energy_drift) = (0.0f64, 0.0f64);
    let start = QuadraticState {
        tau: tau_span.0,
        ..*init
    };
    march(&f, start.to_vector(), tau_span, opts, |tau, y| {
        let st = QuadraticState::from_vector(y, tau);
        mass_drift = mass_drift.max(relative_drift(st.mass_squared(), m2_0, m2_scale));
        let e = st.p0 + field.potential.value(&st.r);
        energy_drift = energy_drift.max(relative_drift(e, e0, e_scale));
        samples.push(st);
        Ok(())
    })?;
    Ok(QuadraticTrajectory {
        samples,
        mass_drift,
        energy_drift,
    })
}

/// Integrates `d|P|/ds = P₀`, `dP₀/ds = |P|` from `(p, p0)` at `s_values[0]`
/// and returns `(|P|, P₀)` at every `s` in `s_values`.
pub fn quadratic_s_flow(p: f64, p0: f64, s_values: &[f64]) -> Vec<(f64, f64)> {
    const MAX_STEP: f64 = 1e-3;
    let f = |_s: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = y[0];
    };
    let mut out = Vec::with_capacity(s_values.len());
    let mut y = vec![p, p0];
    let Some(&first) = s_values.first() else {
        return out;
    };
    let mut s = first;
    out.push((y[0], y[1]));
    for &target in &s_values[1..] {
        let span = target - s;
        let sub = (span.abs() / MAX_STEP).ceil().max(1.0) as usize;
        let h = span / sub as f64;
        for i in 0..sub {
            y = rk4_step(&f, s + i as f64 * h, &y, h);
        }
        s = target;
        out.push((y[0], y[1]));
    }
    out
}

/// Largest phase-space distance between the `τ` run (read as `(|P|, P₀)`
/// against its tracked `s`) and the `s`-parametrized flow.
pub fn reparametrization_distance(traj: &QuadraticTrajectory) -> f64 {
    let s_values: Vec<f64> = traj.samples.iter().map(|st| st.s).collect();
    let Some(first) = traj.samples.first() else {
        return 0.0;
    };
    let flow = quadratic_s_flow(norm(&first.p), first.p0, &s_values);
    traj.samples
        .iter()
        .zip(flow)
        .map(|(st, (p, p0))| ((norm(&st.p) - p).powi(2) + (st.p0 - p0).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfArgumentReport {
    /// `max |p₁²p₂² − |P|²|`.
    pub vieta_product: f64,
    /// `max |p₂² − p₁² − 2M|`.
    pub mass_split: f64,
    /// `max` deviation of `(p₁², p₂²)` from `√(2M)·(sinh, cosh)(s/2)`.
    pub literal: f64,
    /// Same with `(p₁, p₂)` in place of the squares.
    pub corrected: f64,
}

/// Compares the eigenvalues of the evolving quadratic with the half-argument
/// hyperbolic law, as squares and as the eigenvalues themselves.
pub fn half_argument_report(traj: &QuadraticTrajectory) -> HalfArgumentReport {
    let mut rep = HalfArgumentReport {
        vieta_product: 0.0,
        mass_split: 0.0,
        literal: 0.0,
        corrected: 0.0,
    };
    let Some(first) = traj.samples.first() else {
        return rep;
    };
    let m = first.mass_squared().sqrt();
    let amp = (2.0 * m).sqrt();
    for st in &traj.samples {
        let (q1, q2) = st.eigenvalues();
        let psq = dot(&st.p, &st.p);
        let (sh, ch) = ((0.5 * st.s).sinh(), (0.5 * st.s).cosh());
        rep.vieta_product = rep.vieta_product.max((q1 * q2 - psq).abs());
        rep.mass_split = rep.mass_split.max((q2 - q1 - 2.0 * m).abs());
        rep.literal = rep
            .literal
            .max((q1 - amp * sh).abs().max((q2 - amp * ch).abs()));
        rep.corrected = rep.corrected.max(
            (q1.max(0.0).sqrt() - amp * sh.abs())
                .abs()
                .max((q2.sqrt() - amp * ch).abs()),
        );
    }
    rep
}
