//! Property suites behind `polyflow verify`.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use polyflow_core::cubic::{
    calibrate_argument_scale, jacobi_eigenvalue_parametrization, radicand_roots, solve_cubic_trig,
    weierstrass_flow, weierstrass_roots_check, CubicInvariants, EllipticConstants, FlowOptions,
};
use polyflow_core::dynamics::{newtonian_reduction_check, simulate_generalized};
use polyflow_core::elliptic::{jacobi_sn_cn_dn, quotients};
use polyflow_core::evolution::{evolve_to_psq_zero, verify_against_closed_form};
use polyflow_core::oracle::{
    durand_kerner, expand_from_roots, finite_diff_richardson, real_roots, MonicPolynomial,
};
use polyflow_core::poly::{euler_shift_residual, psq_derivative, psq_of_p1};
use polyflow_core::reducer::{precondition_shift_with, Precondition};
use polyflow_core::{
    DynamicsOptions, DynamicsState, Error, EvolutionOptions, NormalizedPolynomial, PotentialSpec,
    RootSet,
};

use crate::error::{CliError, CliResult};
use crate::Runtime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Vieta,
    Invariants,
    Theorem24,
    EulerShift,
    Trig,
    Elliptic,
    Dynamics,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "vieta" => Self::Vieta,
            "invariants" => Self::Invariants,
            "theorem24" => Self::Theorem24,
            "euler-shift" => Self::EulerShift,
            "trig" => Self::Trig,
            "elliptic" => Self::Elliptic,
            "dynamics" => Self::Dynamics,
            other => return Err(CliError::UnknownSuite(other.into())),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instance count; each suite has its own default.
    pub size: Option<usize>,
    pub drift_tol: f64,
    /// Polynomial degree of the dynamics suite.
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Property {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub instances: usize,
}

impl Property {
    fn at_most(name: &'static str, measured: f64, tolerance: f64, instances: usize) -> Self {
        Self {
            name,
            pass: measured <= tolerance,
            measured,
            tolerance,
            instances,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub properties: Vec<Property>,
}

pub fn run(rt: &Runtime, suite: Suite, cfg: &SuiteConfig) -> CliResult<Report> {
    let properties = rt.install(|| match suite {
        Suite::Vieta => vieta(cfg),
        Suite::Invariants => invariants(cfg),
        Suite::Theorem24 => theorem24(cfg),
        Suite::EulerShift => euler_shift(cfg),
        Suite::Trig => trig(cfg),
        Suite::Elliptic => elliptic(),
        Suite::Dynamics => dynamics(cfg),
    })?;
    Ok(Report {
        suite,
        seed: cfg.seed,
        pass: properties.iter().all(|p| p.pass),
        properties,
    })
}

/// Sorted roots uniform in `[-width, width]` with gaps of at least `gap`.
fn random_roots(rng: &mut ChaCha8Rng, n: usize, width: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-width..=width)).collect();
        r.sort_by(f64::total_cmp);
        if r.windows(2).all(|w| w[1] - w[0] >= gap) {
            return r;
        }
    }
}

fn instances(cfg: &SuiteConfig, default: usize, degrees: std::ops::RangeInclusive<usize>) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.size.unwrap_or(default))
        .map(|_| {
            let n = rng.gen_range(degrees.clone());
            random_roots(&mut rng, n, 10.0, 0.1)
        })
        .collect()
}

fn poly(roots: &[f64]) -> CliResult<NormalizedPolynomial> {
    Ok(NormalizedPolynomial::from_roots(&RootSet::new(roots.to_vec())?)?)
}

fn max_of<T: Sync>(items: &[T], f: impl Fn(&T) -> CliResult<f64> + Sync + Send) -> CliResult<f64> {
    items
        .par_iter()
        .map(f)
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn vieta(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let cases = instances(cfg, 200, 2..=8);
    let coeff = max_of(&cases, |r| {
        let p = poly(r)?;
        let want = expand_from_roots(r);
        Ok(p.to_monic()
            .iter()
            .zip(want.coeffs())
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max))
    })?;
    let round_trip = max_of(&cases, |r| {
        let p = poly(r)?;
        let csv_ok = p.to_csv_record().parse::<NormalizedPolynomial>()? == p;
        let json_ok = serde_json::from_str::<NormalizedPolynomial>(&serde_json::to_string(&p)?)? == p;
        Ok(if csv_ok && json_ok { 0.0 } else { 1.0 })
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0dd);
    let separated: Vec<Vec<f64>> = (0..cases.len())
        .map(|_| {
            let n = rng.gen_range(2..=10);
            random_roots(&mut rng, n, 2.0, 0.05)
        })
        .collect();
    let oracle = max_of(&separated, |r| {
        let z = durand_kerner(&expand_from_roots(r), 1e-14, 5000)?;
        let got = real_roots(&z, 1e-6).ok_or_else(|| CliError::out_of_scope("complex_roots", "oracle left the real line"))?;
        Ok(got.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })?;
    Ok(vec![
        Property::at_most("coefficients_match_expansion", coeff, 1e-10, cases.len()),
        Property::at_most("csv_json_round_trip_mismatches", round_trip, 0.0, cases.len()),
        Property::at_most("oracle_recovers_roots", oracle, 1e-9, separated.len()),
    ])
}

fn invariants(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let cases = instances(cfg, 100, 2..=8);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5417);
    let shifts: Vec<f64> = cases.iter().map(|_| rng.gen_range(-10.0..=10.0)).collect();
    let paired: Vec<(&Vec<f64>, f64)> = cases.iter().zip(shifts).collect();
    let translation = max_of(&paired, |(r, c)| {
        let before = poly(r)?.depress();
        let moved: Vec<f64> = r.iter().map(|q| q + c).collect();
        Ok(poly(&moved)?.depress().max_relative_deviation(&before))
    })?;
    let evolutions = cases
        .par_iter()
        .map(|r| {
            let (shifted, _) = precondition_shift_with(&poly(r)?, Precondition::default())?;
            let (end, trace) = evolve_to_psq_zero(&shifted, &EvolutionOptions::default())?;
            let endpoint = end.poly.depress().max_relative_deviation(&shifted.depress());
            Ok((verify_against_closed_form(&trace), endpoint))
        })
        .collect::<CliResult<Vec<(f64, f64)>>>()?;
    let closed = evolutions.iter().map(|e| e.0).fold(0.0, f64::max);
    let endpoint = evolutions.iter().map(|e| e.1).fold(0.0, f64::max);
    let tol = cfg.drift_tol;
    Ok(vec![
        Property::at_most("translation_invariance", translation, tol, cases.len()),
        Property::at_most("evolution_matches_closed_form", closed, tol, cases.len()),
        Property::at_most("evolution_endpoint_invariants", endpoint, tol, cases.len()),
    ])
}

/// Largest value of each `P_k`'s terms, built from `|roots|`.
fn coefficient_scales(roots: &[f64]) -> Vec<f64> {
    let n = roots.len();
    let abs: Vec<f64> = roots.iter().map(|r| r.abs()).collect();
    let e = expand_from_roots(&abs);
    (0..=n).map(|k| e.coeffs()[k].abs() / (n - k + 1) as f64).collect()
}

fn theorem24(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let cases = instances(cfg, 200, 2..=8);
    let fd = max_of(&cases, |r| {
        let p = poly(r)?;
        let n = p.degree();
        let inv = p.depress();
        let scales = coefficient_scales(r);
        let f = |x: f64| psq_of_p1(&inv, x);
        let mut fact = 1.0;
        let mut worst = 0.0f64;
        for k in 1..=(n - 1).min(4) {
            fact *= k as f64;
            let want = fact * (k + 1) as f64 * p.p()[n - k - 1];
            let floor = fact * (k + 1) as f64 * scales[n - k];
            let got = finite_diff_richardson(f, p.p1(), k, inv.spread().max(0.1), 3);
            worst = worst.max((got - want).abs() / want.abs().max(floor));
        }
        Ok(worst)
    })?;
    let top = max_of(&cases, |r| {
        let p = poly(r)?;
        let n = p.degree();
        let n_fact: f64 = (1..=n).map(|v| v as f64).product();
        Ok((psq_derivative(&p.depress(), p.p1(), n) - n_fact).abs())
    })?;
    Ok(vec![
        Property::at_most("finite_difference_derivatives", fd, 1e-6, cases.len()),
        Property::at_most("top_derivative_is_factorial", top, 1e-9, cases.len()),
    ])
}

fn euler_shift(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let cases = instances(cfg, 200, 2..=8);
    let worst = max_of(&cases, |r| {
        let p = poly(r)?;
        Ok(r.iter()
            .map(|&q| euler_shift_residual(&p, q).abs() / (1.0 + p.psq().abs()))
            .fold(0.0, f64::max))
    })?;
    Ok(vec![Property::at_most("residual_at_roots", worst, 1e-8, cases.len())])
}

fn trig(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let cases = instances(cfg, 500, 3..=3);
    let worst = max_of(&cases, |r| {
        let depressed = poly(r)?.depress();
        let inv = CubicInvariants::from_invariant_set(&depressed)?;
        let mut y = solve_cubic_trig(&inv)?;
        y.sort_by(f64::total_cmp);
        let z = durand_kerner(&MonicPolynomial::new(depressed.depressed_monic())?, 1e-14, 5000)?;
        let want = real_roots(&z, 1e-6).ok_or_else(|| CliError::out_of_scope("complex_roots", "oracle left the real line"))?;
        Ok(y.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7819);
    let mut mismatches = 0usize;
    let violating = 100;
    for _ in 0..violating {
        let (a, b, c): (f64, f64, f64) = (
            rng.gen_range(-5.0..=5.0),
            rng.gen_range(-5.0..=5.0),
            rng.gen_range(0.1..=5.0),
        );
        let m = (a + 2.0 * b) / 3.0;
        let (a, b) = (a - m, b - m);
        let inv = CubicInvariants::new(-(b * b + c * c + 2.0 * a * b), a * (b * b + c * c))?;
        let first = solve_cubic_trig(&inv);
        if !matches!(first, Err(Error::DiscriminantViolation { .. })) || first != solve_cubic_trig(&inv) {
            mismatches += 1;
        }
    }
    Ok(vec![
        Property::at_most("roots_match_oracle", worst, 1e-10, cases.len()),
        Property::at_most("complex_pair_not_rejected", mismatches as f64, 0.0, violating),
    ])
}

fn elliptic() -> CliResult<Vec<Property>> {
    let cubics = [[-1.0, 0.0, 1.0], [-2.5, 0.75, 1.75], [-3.0, 1.0, 2.0], [-1.2, 0.2, 1.0]];
    let flows = cubics
        .par_iter()
        .map(|roots| {
            let inv = CubicInvariants::from_invariant_set(&poly(roots)?.depress())?;
            let consts = EllipticConstants::new(&inv)?;
            let e = radicand_roots(&inv)?;
            let mut out = (0.0f64, 0.0f64, 0.0f64);
            for (p1_0, span) in [(e[0] + 1.0, (0.0, -4.0)), (0.5 * (e[1] + e[2]), (0.0, 20.0))] {
                let flow = weierstrass_flow(&inv, p1_0, span, &FlowOptions::default())?;
                out.0 = out.0.max(flow.max_residual);
                out.1 = out.1.max(weierstrass_roots_check(&consts, &flow)?);
                out.2 = out.2.max((calibrate_argument_scale(&flow)?.alpha - 0.5).abs());
            }
            Ok(out)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let residual = flows.iter().map(|f| f.0).fold(0.0, f64::max);
    let turning = flows.iter().map(|f| f.1).fold(0.0, f64::max);
    let alpha = flows.iter().map(|f| f.2).fold(0.0, f64::max);

    let grid: Vec<(f64, f64)> = [0.05, 0.3, 0.5, 0.7, 0.9, 0.99]
        .iter()
        .flat_map(|&m| (0..30).map(move |i| (0.15 + 0.1 * i as f64, m)))
        .collect();
    let identities = max_of(&grid, |&(u, m)| {
        let t = jacobi_sn_cn_dn(u, m)?;
        Ok((t.sn * t.sn + t.cn * t.cn - 1.0)
            .abs()
            .max((t.dn * t.dn + m * t.sn * t.sn - 1.0).abs()))
    })?;
    let odes = max_of(&grid, |&(u, m)| {
        let q = quotients(u, m)?;
        let d = |pick: fn(&polyflow_core::elliptic::Quotients) -> f64| {
            finite_diff_richardson(|v| quotients(v, m).map(|q| pick(&q)).unwrap_or(f64::NAN), u, 1, 1e-2, 2)
        };
        let scale = 1.0 + (q.ns * q.cs * q.ds).abs();
        let worst = ((d(|q| q.ns) - q.cs * q.ds).abs() / scale)
            .max((d(|q| q.cs) - q.ns * q.ds).abs() / scale)
            .max((d(|q| q.ds) - q.cs * q.ns).abs() / scale);
        Ok(if worst.is_nan() { f64::INFINITY } else { worst })
    })?;
    let pairs = [(1.0, 0.5), (2.0, 1.0), (3.0, 0.1), (0.7, 0.69)];
    let diff = max_of(&pairs, |&(e1, e2)| {
        let mut worst = 0.0f64;
        for i in 0..40 {
            let q = jacobi_eigenvalue_parametrization(e1, e2, 0.1 + 0.075 * i as f64)?;
            worst = worst.max((q[2] - q[1] - e1).abs());
        }
        Ok(worst)
    })?;
    Ok(vec![
        Property::at_most("flow_residual", residual, 1e-6, 2 * cubics.len()),
        Property::at_most("turning_values_are_roots", turning, 1e-6, 2 * cubics.len()),
        Property::at_most("argument_scale_is_half", alpha, 1e-6, 2 * cubics.len()),
        Property::at_most("jacobi_identities", identities, 1e-7, grid.len()),
        Property::at_most("quotient_derivatives", odes, 1e-7, grid.len()),
        Property::at_most("eigenvalue_difference_constant", diff, 1e-10, pairs.len()),
    ])
}

fn dynamics(cfg: &SuiteConfig) -> CliResult<Vec<Property>> {
    let n = cfg.degree;
    if !(2..=8).contains(&n) {
        return Err(CliError::Schema(format!("--degree must lie in 2..=8, got {n}")));
    }
    let roots: Vec<f64> = (0..n).map(|k| 0.3 + 0.45 * k as f64).collect();
    let setups = [
        (PotentialSpec::Harmonic { k: 1.0 }, vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.3]),
        (PotentialSpec::coulomb(0.5), vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]),
    ];
    let opts = DynamicsOptions::default();
    let runs = setups
        .par_iter()
        .map(|(pot, r, dir)| {
            let init = DynamicsState::from_roots(r.clone(), dir, &roots)?;
            let traj = simulate_generalized(pot, &init, (0.0, 10.0), &opts)?;
            let newton = newtonian_reduction_check(pot, &init, (0.0, 10.0), &opts)?;
            let rep = &traj.report;
            let inv = rep.invariants.iter().copied().fold(0.0, f64::max);
            Ok((inv, rep.energy, rep.total_energy, newton.max_deviation))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let pick = |f: fn(&(f64, f64, f64, f64)) -> f64| runs.iter().map(f).fold(0.0, f64::max);
    let count = setups.len();
    Ok(vec![
        Property::at_most("invariant_drift", pick(|r| r.0), 1e-8, count),
        Property::at_most("energy_drift", pick(|r| r.1), 1e-8, count),
        Property::at_most("total_energy_drift", pick(|r| r.2), 1e-8, count),
        Property::at_most("newtonian_deviation", pick(|r| r.3), 1e-6, count),
    ])
}
