//! Degree-`n` dynamics:
//!
//! ```text
//! dr/dτ   = P
//! dP/dτ   = −∇V · P_{n−1}
//! dP₁/dτ  = −(P·∇V)
//! dP_k/dτ = −(P·∇V)·(n−k+2)·P_{k−1},   k = 2..n−1
//! ```
//!
//! with `|P|²` in the role of the constant coefficient. The state moves
//! along the coefficient flow at rate `ds/dτ = −(P·∇V)`, so the invariants
//! `R_k` are constants of motion; the inner momenta `q_k` (roots) all move
//! with `P₁`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::energy::EnergyChain;
use super::potential::PotentialSpec;
use super::{dot, march, norm, relative_drift, DynamicsOptions};
use crate::error::{Error, Result};
use crate::poly::{psq_of_p1, InvariantSet, NormalizedPolynomial, RootSet};

/// Relative tolerance for the Vièta consistency of an initial state.
const INIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsState {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    /// Outer momenta `[P₁, …, P_{n−1}]`.
    pub outer: Vec<f64>,
    /// Inner momenta `q_k = p_k²`, the roots of the polynomial.
    pub inner: Vec<f64>,
    pub tau: f64,
    pub s: f64,
}

impl DynamicsState {
    /// State whose polynomial has the given roots; `|P|² = Π q`, pointing
    /// along `direction` (which need not be normalized).
    pub fn from_roots(r: Vec<f64>, direction: &[f64], roots: &[f64]) -> Result<Self> {
        let set = RootSet::new(roots.to_vec()).map_err(|e| Error::InconsistentInit(e.to_string()))?;
        let poly = NormalizedPolynomial::from_roots(&set)?;
        if poly.psq() < 0.0 {
            return Err(Error::InconsistentInit(format!(
                "product of roots {} is negative, |P| would be imaginary",
                poly.psq()
            )));
        }
        if direction.len() != r.len() {
            return Err(Error::InconsistentInit("direction and position differ in dimension".into()));
        }
        let len = norm(direction);
        let magnitude = poly.psq().sqrt();
        let p = if len > 0.0 {
            direction.iter().map(|d| d / len * magnitude).collect()
        } else if magnitude == 0.0 {
            vec![0.0; r.len()]
        } else {
            return Err(Error::InconsistentInit("zero direction for nonzero |P|".into()));
        };
        Ok(Self {
            r,
            p,
            outer: poly.p().to_vec(),
            inner: set.into_vec(),
            tau: 0.0,
            s: poly.p1(),
        })
    }

    pub fn degree(&self) -> usize {
        self.outer.len() + 1
    }

    pub fn psq(&self) -> f64 {
        dot(&self.p, &self.p)
    }

    pub fn polynomial(&self) -> Result<NormalizedPolynomial> {
        NormalizedPolynomial::new(self.degree(), self.outer.clone(), self.psq())
    }

    /// Checks dimensions and that the inner momenta are the roots of the
    /// polynomial built from the outer momenta and `|P|²`.
    pub fn check_consistency(&self) -> Result<()> {
        let n = self.degree();
        if n < 2 {
            return Err(Error::DegreeTooSmall(n));
        }
        let d = self.r.len();
        if d == 0 || d > 3 || self.p.len() != d {
            return Err(Error::InconsistentInit(format!(
                "position and momentum need equal dimension 1..3, got {} and {}",
                d,
                self.p.len()
            )));
        }
        if self.inner.len() != n {
            return Err(Error::InconsistentInit(format!(
                "{} inner momenta for degree {n}",
                self.inner.len()
            )));
        }
        let numbers = self.r.iter().chain(&self.p).chain(&self.outer).chain(&self.inner);
        if numbers.chain([&self.tau, &self.s]).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dynamics state"));
        }
        let set = RootSet::new(self.inner.clone()).map_err(|e| Error::InconsistentInit(e.to_string()))?;
        let want = NormalizedPolynomial::from_roots(&set)?;
        let spread = want.depress().spread().max(f64::MIN_POSITIVE);
        let got = self.polynomial()?;
        let (got_psq, want_psq) = (got.psq(), want.psq());
        let pairs = got.p().iter().zip(want.p()).chain([(&got_psq, &want_psq)]);
        for (k, (a, b)) in pairs.enumerate() {
            let scale = b.abs().max(spread.powi(k as i32 + 1));
            if (a - b).abs() > INIT_TOL * scale {
                return Err(Error::InconsistentInit(format!(
                    "coefficient {} is {a} but the inner momenta give {b}",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    fn to_vector(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.r.len() + 2 * self.degree());
        y.extend(&self.r);
        y.extend(&self.p);
        y.extend(&self.outer);
        y.extend(&self.inner);
        y.push(self.s);
        y
    }

    fn from_vector(y: &[f64], dim: usize, n: usize, tau: f64) -> Self {
        let (r, rest) = y.split_at(dim);
        let (p, rest) = rest.split_at(dim);
        let (outer, rest) = rest.split_at(n - 1);
        let (inner, rest) = rest.split_at(n);
        Self {
            r: r.to_vec(),
            p: p.to_vec(),
            outer: outer.to_vec(),
            inner: inner.to_vec(),
            tau,
            s: rest[0],
        }
    }
}

/// Largest relative drift of each monitored quantity over a trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConservationReport {
    /// `[R₂, …, R_{n−1}, R₀]`.
    pub invariants: Vec<f64>,
    /// `ℰ₁ = P₁ + V`.
    pub energy: f64,
    /// `[ℰ₂, …, ℰ_n]` of the energy chain.
    pub energy_chain: Vec<f64>,
    /// `½|P|² + W(V)` with the energies frozen at the start.
    pub total_energy: f64,
    /// Differences `q_i − q_k` of the inner momenta.
    pub inner_differences: f64,
    /// `|P|²` against the invariant polynomial at `P₁`.
    pub picture_consistency: f64,
}

impl ConservationReport {
    pub fn max_drift(&self) -> f64 {
        self.invariants
            .iter()
            .chain(&self.energy_chain)
            .chain([
                &self.energy,
                &self.total_energy,
                &self.inner_differences,
                &self.picture_consistency,
            ])
            .copied()
            .fold(0.0, f64::max)
    }

    fn absorb(&mut self, other: &Self) {
        let merge = |a: &mut Vec<f64>, b: &[f64]| {
            a.resize(b.len().max(a.len()), 0.0);
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.max(*y);
            }
        };
        merge(&mut self.invariants, &other.invariants);
        merge(&mut self.energy_chain, &other.energy_chain);
        self.energy = self.energy.max(other.energy);
        self.total_energy = self.total_energy.max(other.total_energy);
        self.inner_differences = self.inner_differences.max(other.inner_differences);
        self.picture_consistency = self.picture_consistency.max(other.picture_consistency);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub degree: usize,
    pub potential: PotentialSpec,
    pub samples: Vec<DynamicsState>,
    pub report: ConservationReport,
}

/// Reference values at the initial state used to measure drift.
struct Monitor {
    chain: EnergyChain,
    potential: PotentialSpec,
    inv0: InvariantSet,
    spread: f64,
    energies0: Vec<f64>,
    energy_scale0: Vec<f64>,
    total0: f64,
    total_scale0: f64,
    diffs0: Vec<f64>,
}

impl Monitor {
    fn new(potential: &PotentialSpec, init: &DynamicsState) -> Result<Self> {
        let n = init.degree();
        let chain = EnergyChain::new(n);
        let inv0 = init.polynomial()?.depress();
        let v = potential.value(&init.r);
        let (energies0, energy_scale0) = chain.energies_with_scale(&init.outer, init.psq(), v);
        let w = chain.effective_potential(&energies0, v);
        Ok(Self {
            spread: inv0.spread().max(f64::MIN_POSITIVE),
            total0: 0.5 * init.psq() + w,
            total_scale0: 0.5 * init.psq() + w.abs(),
            diffs0: pairwise(&init.inner),
            chain,
            potential: potential.clone(),
            inv0,
            energies0,
            energy_scale0,
        })
    }

    /// Frozen-energy effective force factor `P_{n−1}(V)`.
    fn force_factor(&self, v: f64) -> f64 {
        self.chain.p_of_v(self.chain.degree() - 1, &self.energies0, v)
    }

    fn measure(&self, state: &DynamicsState) -> Result<ConservationReport> {
        let v = self.potential.value(&state.r);
        let psq = state.psq();
        let inv = state.polynomial()?.depress();
        let energies = self.chain.energies(&state.outer, psq, v);
        let drift_e = |k: usize| relative_drift(energies[k], self.energies0[k], self.energy_scale0[k]);
        let total = 0.5 * psq + self.chain.effective_potential(&self.energies0, v);
        let n = self.chain.degree();
        let psq_model = psq_of_p1(&self.inv0, state.outer[0]);
        Ok(ConservationReport {
            invariants: inv.relative_deviation(&self.inv0),
            energy: drift_e(1),
            energy_chain: (2..=n).map(drift_e).collect(),
            total_energy: relative_drift(total, self.total0, self.total_scale0),
            inner_differences: pairwise(&state.inner)
                .iter()
                .zip(&self.diffs0)
                .map(|(a, b)| relative_drift(*a, *b, 0.0))
                .fold(0.0, f64::max),
            picture_consistency: relative_drift(psq, psq_model, self.spread.powi(n as i32)),
        })
    }
}

fn pairwise(q: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..q.len() {
        for k in i + 1..q.len() {
            out.push(q[i] - q[k]);
        }
    }
    out
}

fn generalized_rhs(potential: &PotentialSpec, dim: usize, n: usize) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_t, y, dy| {
        let (r, rest) = y.split_at(dim);
        let (p, rest) = rest.split_at(dim);
        let outer = &rest[..n - 1];
        let grad = potential.gradient(r);
        let rate = -dot(p, &grad);
        let last = outer[n - 2];
        dy[..dim].copy_from_slice(p);
        for i in 0..dim {
            dy[dim + i] = -grad[i] * last;
        }
        let base = 2 * dim;
        dy[base] = rate;
        for k in 2..n {
            dy[base + k - 1] = rate * (n - k + 2) as f64 * outer[k - 2];
        }
        for i in 0..n {
            dy[base + n - 1 + i] = rate;
        }
        dy[base + 2 * n - 1] = rate;
    }
}

/// Integrates the degree-`n` system from `init` over `tau_span`.
pub fn simulate_generalized(
    potential: &PotentialSpec,
    init: &DynamicsState,
    tau_span: (f64, f64),
    opts: &DynamicsOptions,
) -> Result<Trajectory> {
    potential.validate()?;
    init.check_consistency()?;
    let n = init.degree();
    let dim = init.r.len();
    let monitor = Monitor::new(potential, init)?;
    let f = generalized_rhs(potential, dim, n);

    let mut samples = Vec::with_capacity(opts.steps + 1);
    let mut report = ConservationReport::default();
    let start = DynamicsState {
        tau: tau_span.0,
        ..init.clone()
    };
    march(&f, start.to_vector(), tau_span, opts, |tau, y| {
        let state = DynamicsState::from_vector(y, dim, n, tau);
        report.absorb(&monitor.measure(&state)?);
        samples.push(state);
        Ok(())
    })?;
    Ok(Trajectory {
        degree: n,
        potential: potential.clone(),
        samples,
        report,
    })
}

impl Trajectory {
    /// CSV with columns `tau,s,r_0..,p_0..,P1..P{n-1},E1,E_total,psq_residual`.
    pub fn to_csv(&self) -> Result<String> {
        let first = self.samples.first().ok_or_else(|| Error::Malformed("empty trajectory".into()))?;
        let monitor = Monitor::new(&self.potential, first)?;
        let dim = first.r.len();
        let mut out = String::from("tau,s");
        for i in 0..dim {
            let _ = write!(out, ",r_{i}");
        }
        for i in 0..dim {
            let _ = write!(out, ",p_{i}");
        }
        for k in 1..self.degree {
            let _ = write!(out, ",P{k}");
        }
        out.push_str(",E1,E_total,psq_residual\n");
        for st in &self.samples {
            let v = self.potential.value(&st.r);
            let e1 = st.outer[0] + v;
            let total = 0.5 * st.psq() + monitor.chain.effective_potential(&monitor.energies0, v);
            let residual = st.psq() - psq_of_p1(&monitor.inv0, st.outer[0]);
            let _ = write!(out, "{},{}", st.tau, st.s);
            for x in st.r.iter().chain(&st.p).chain(&st.outer) {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{e1},{total},{residual}");
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonianComparison {
    /// `max (|Δr| + |ΔP|)` between the two trajectories.
    pub max_deviation: f64,
    pub full: Trajectory,
    /// `(tau, r, P)` of the Newtonian run.
    pub newtonian: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

/// Runs the full system next to `dP/dτ = −∇W` with `W` built from the
/// energies frozen at `init`, on the same step grid.
pub fn newtonian_reduction_check(
    potential: &PotentialSpec,
    init: &DynamicsState,
    tau_span: (f64, f64),
    opts: &DynamicsOptions,
) -> Result<NewtonianComparison> {
    let full = simulate_generalized(potential, init, tau_span, opts)?;
    let monitor = Monitor::new(potential, init)?;
    let dim = init.r.len();
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (r, p) = y.split_at(dim);
        let grad = potential.gradient(r);
        let factor = monitor.force_factor(potential.value(r));
        dy[..dim].copy_from_slice(p);
        for i in 0..dim {
            dy[dim + i] = -grad[i] * factor;
        }
    };
    let mut y0 = init.r.clone();
    y0.extend(&init.p);
    let mut newtonian = Vec::with_capacity(full.samples.len());
    march(&f, y0, tau_span, opts, |tau, y| {
        newtonian.push((tau, y[..dim].to_vec(), y[dim..].to_vec()));
        Ok(())
    })?;
    let max_deviation = full
        .samples
        .iter()
        .zip(&newtonian)
        .map(|(a, (_, r, p))| {
            let dr: Vec<f64> = a.r.iter().zip(r).map(|(x, y)| x - y).collect();
            let dp: Vec<f64> = a.p.iter().zip(p).map(|(x, y)| x - y).collect();
            norm(&dr) + norm(&dp)
        })
        .fold(0.0, f64::max);
    Ok(NewtonianComparison {
        max_deviation,
        full,
        newtonian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_roots_is_consistent() {
        let st = DynamicsState::from_roots(vec![1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(st.outer, vec![2.0, 5.5]);
        assert!((st.psq() - 6.0).abs() < 1e-14);
        st.check_consistency().unwrap();
    }

    #[test]
    fn inconsistent_inner_momenta() {
        let mut st = DynamicsState::from_roots(vec![1.0], &[1.0], &[1.0, 2.0, 3.0]).unwrap();
        st.inner[2] = 3.5;
        assert!(matches!(st.check_consistency(), Err(Error::InconsistentInit(_))));
        let mut st = DynamicsState::from_roots(vec![1.0], &[1.0], &[1.0, 2.0]).unwrap();
        st.p = vec![0.0, 1.0];
        assert!(matches!(st.check_consistency(), Err(Error::InconsistentInit(_))));
        assert!(matches!(
            DynamicsState::from_roots(vec![1.0], &[1.0], &[-1.0, 2.0]),
            Err(Error::InconsistentInit(_))
        ));
    }

    #[test]
    fn cubic_harmonic_keeps_invariants() {
        let init = DynamicsState::from_roots(vec![0.5, 0.0, 0.0], &[0.0, 1.0, 0.2], &[1.0, 2.0, 3.0]).unwrap();
        let traj = simulate_generalized(
            &PotentialSpec::Harmonic { k: 1.0 },
            &init,
            (0.0, 5.0),
            &DynamicsOptions::default(),
        )
        .unwrap();
        let inv = init.polynomial().unwrap().depress();
        assert!((inv.r[0] + 1.0).abs() < 1e-14 && inv.r0.abs() < 1e-14);
        assert!(traj.report.max_drift() < 1e-9, "{:?}", traj.report);
        assert_eq!(traj.samples.len(), 10_001);
    }

    #[test]
    fn zero_length_span_keeps_initial_state() {
        let init = DynamicsState::from_roots(vec![0.5], &[1.0], &[1.0, 2.0]).unwrap();
        let traj = simulate_generalized(
            &PotentialSpec::Harmonic { k: 1.0 },
            &init,
            (0.0, 0.0),
            &DynamicsOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.samples, vec![init]);
    }

    #[test]
    fn free_motion_reduction() {
        let init = DynamicsState::from_roots(vec![0.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[1.0, 2.0, 4.0]).unwrap();
        let cmp = newtonian_reduction_check(
            &PotentialSpec::Harmonic { k: 0.0 },
            &init,
            (0.0, 10.0),
            &DynamicsOptions::default(),
        )
        .unwrap();
        assert!(cmp.max_deviation < 1e-12);
    }

    #[test]
    fn trajectory_csv_header() {
        let init = DynamicsState::from_roots(vec![0.5], &[1.0], &[1.0, 2.0, 3.0]).unwrap();
        let opts = DynamicsOptions {
            steps: 4,
            ..Default::default()
        };
        let traj = simulate_generalized(&PotentialSpec::Harmonic { k: 1.0 }, &init, (0.0, 0.1), &opts).unwrap();
        let csv = traj.to_csv().unwrap();
        assert!(csv.starts_with("tau,s,r_0,p_0,P1,P2,E1,E_total,psq_residual\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
