use std::path::Path;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use polyflow_core::cubic::{solve_cubic_trig, CubicInvariants};
use polyflow_core::dynamics::{
    half_argument_report, reparametrization_distance, simulate_generalized, simulate_quadratic,
    LorentzField, QuadraticState,
};
use polyflow_core::evolution::{evolve_to_psq_zero, verify_against_closed_form};
use polyflow_core::oracle::{durand_kerner, MonicPolynomial};
use polyflow_core::poly::horner;
use polyflow_core::reducer::solve;
use polyflow_core::{
    DynamicsOptions, DynamicsState, EvolutionOptions, NormalizedPolynomial, PotentialSpec,
    ReductionTrace, RootSet, SolveOptions,
};

use crate::error::{CliError, CliResult};
use crate::input::{parse_polynomials, read_payload};
use crate::{Format, Method, Runtime};

const ORACLE_TOL: f64 = 1e-14;
const ORACLE_ITER: usize = 5000;

#[derive(Serialize)]
struct SolveOutput {
    method: Method,
    roots: Vec<f64>,
    /// `|p(x)|` at each returned root.
    residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<ReductionTrace>,
}

/// Rejects complex or repeated roots before any solver runs, using the
/// simultaneous-iteration oracle.
fn check_scope(poly: &NormalizedPolynomial) -> CliResult<()> {
    let monic = MonicPolynomial::new(poly.to_monic())?;
    let z = durand_kerner(&monic, ORACLE_TOL, ORACLE_ITER)?;
    let complex = z.iter().any(|r| r.im.abs() > 1e-6 * (1.0 + r.re.abs()));
    if complex {
        return Err(CliError::out_of_scope("complex_roots", "complex roots out of scope"));
    }
    let mut re: Vec<f64> = z.iter().map(|r| r.re).collect();
    re.sort_by(f64::total_cmp);
    let sep = RootSet::default_separation(&re);
    if re.windows(2).any(|w| w[1] - w[0] < sep) {
        return Err(CliError::out_of_scope("repeated_roots", "repeated roots out of scope"));
    }
    Ok(())
}

fn solve_one(poly: &NormalizedPolynomial, method: Method, opts: &SolveOptions) -> CliResult<SolveOutput> {
    check_scope(poly)?;
    let monic = poly.to_monic();
    let (roots, trace) = match method {
        Method::Reduce => {
            let (roots, trace) = solve(poly, opts)?;
            (roots.roots().to_vec(), Some(trace))
        }
        Method::Trig => {
            let inv = CubicInvariants::from_invariant_set(&poly.depress())
                .map_err(|_| CliError::Schema(format!("--method trig needs a cubic, got degree {}", poly.degree())))?;
            let mut roots: Vec<f64> = solve_cubic_trig(&inv)?.iter().map(|y| y + poly.p1()).collect();
            roots.sort_by(f64::total_cmp);
            (roots, None)
        }
        Method::Oracle => {
            let z = durand_kerner(&MonicPolynomial::new(monic.clone())?, ORACLE_TOL, ORACLE_ITER)?;
            let mut roots: Vec<f64> = z.iter().map(|r| r.re).collect();
            roots.sort_by(f64::total_cmp);
            (roots, None)
        }
    };
    let residuals = roots.iter().map(|&x| horner(&monic, x).abs()).collect();
    Ok(SolveOutput {
        method,
        roots,
        residuals,
        trace,
    })
}

fn error_value(e: &CliError) -> Value {
    serde_json::from_str(&e.to_json()).expect("error report is JSON")
}

pub fn run_solve(rt: &Runtime, input: Option<&str>, method: Method, tol: Option<f64>, steps: Option<usize>) -> CliResult<String> {
    let payload = read_payload(input)?;
    let batch = parse_polynomials(&payload)?;
    let mut opts = SolveOptions::default();
    if let Some(t) = tol {
        opts.evolution.event_tol = t;
    }
    if let Some(s) = steps {
        opts.evolution.steps = s;
    }
    info!("solving {} polynomial(s) with {:?}", batch.items.len(), method);
    let results: Vec<CliResult<SolveOutput>> = rt.install(|| {
        batch
            .items
            .par_iter()
            .map(|item| match item {
                Ok(p) => solve_one(p, method, &opts),
                Err(e) => Err(CliError::Schema(e.to_string())),
            })
            .collect()
    });

    if !batch.batch {
        let out = results.into_iter().next().expect("one item")?;
        return match rt.format {
            Format::Json => Ok(serde_json::to_string_pretty(&out)?),
            Format::Csv => roots_csv(&[Ok(out)]),
        };
    }

    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .map(CliError::exit_code)
        .max();
    for (i, r) in results.iter().enumerate() {
        if let Err(e) = r {
            debug!("item {i}: {e}");
        }
    }
    let text = match rt.format {
        Format::Json => {
            let values: Vec<Value> = results
                .iter()
                .map(|r| match r {
                    Ok(o) => serde_json::to_value(o).expect("solve output serializes"),
                    Err(e) => error_value(e),
                })
                .collect();
            serde_json::to_string_pretty(&values)?
        }
        Format::Csv => roots_csv(&results)?,
    };
    match worst {
        None => Ok(text),
        Some(code) => Err(CliError::PartialBatch { output: text, code }),
    }
}

fn roots_csv(results: &[CliResult<SolveOutput>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(["index", "status", "roots..."])?;
    for (i, r) in results.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        match r {
            Ok(o) => {
                rec.push("ok".into());
                rec.extend(o.roots.iter().map(f64::to_string));
            }
            Err(e) => rec.push(e.kind().into()),
        }
        w.write_record(&rec)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn run_oracle_solve(input: Option<&str>) -> CliResult<String> {
    let payload = read_payload(input)?;
    let batch = parse_polynomials(&payload)?;
    let mut out = Vec::new();
    for item in batch.items {
        let p = item?;
        let z = durand_kerner(&MonicPolynomial::new(p.to_monic())?, ORACLE_TOL, ORACLE_ITER)?;
        let roots: Vec<[f64; 2]> = z.iter().map(|r| [r.re, r.im]).collect();
        out.push(json!({ "roots": roots }));
    }
    Ok(serde_json::to_string_pretty(&if batch.batch {
        Value::Array(out)
    } else {
        out.into_iter().next().expect("one item")
    })?)
}

pub fn run_evolve(rt: &Runtime, input: Option<&str>, tol: Option<f64>, steps: Option<usize>) -> CliResult<String> {
    let payload = read_payload(input)?;
    let batch = parse_polynomials(&payload)?;
    if batch.batch {
        return Err(CliError::Schema("evolve takes a single polynomial".into()));
    }
    let poly = batch.items.into_iter().next().expect("one item")?;
    let mut opts = EvolutionOptions::default();
    if let Some(t) = tol {
        opts.event_tol = t;
    }
    if let Some(s) = steps {
        opts.steps = s;
    }
    let (end, trace) = evolve_to_psq_zero(&poly, &opts)?;
    info!("evolution finished after {} steps", trace.step_count);
    Ok(match rt.format {
        Format::Csv => trace.to_csv(),
        Format::Json => serde_json::to_string_pretty(&json!({
            "end": end,
            "steps": trace.step_count,
            "invariant_drift": trace.invariant_drift,
            "closed_form_deviation": verify_against_closed_form(&trace),
            "initial_invariants": trace.initial_invariants,
            "samples": trace.samples.len(),
        }))?,
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GeneralizedInit {
    FromRoots {
        r: Vec<f64>,
        direction: Vec<f64>,
        roots: Vec<f64>,
    },
    State(DynamicsState),
}

#[derive(Debug, Deserialize)]
struct QuadraticInit {
    r: [f64; 3],
    p: [f64; 3],
    m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SimulationJob {
    Generalized {
        potential: PotentialSpec,
        init: GeneralizedInit,
        tau_span: (f64, f64),
    },
    Quadratic {
        field: LorentzField,
        init: QuadraticInit,
        tau_span: (f64, f64),
    },
}

fn write_artifacts(dir: &Path, csv: &str, report: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trajectory.csv"), csv)?;
    std::fs::write(dir.join("report.json"), report)?;
    Ok(())
}

pub fn run_simulate(
    rt: &Runtime,
    input: Option<&str>,
    tol: Option<f64>,
    steps: Option<usize>,
    out_dir: Option<&Path>,
) -> CliResult<String> {
    let payload = read_payload(input)?;
    let job: SimulationJob = serde_json::from_str(&payload.text)
        .map_err(|e| CliError::Schema(format!("simulation job: {e}")))?;
    let mut opts = DynamicsOptions::default();
    if let Some(s) = steps {
        opts.steps = s;
    }
    if tol.is_some() {
        opts.audit_tol = tol;
    }
    let (csv, report) = match job {
        SimulationJob::Generalized {
            potential,
            init,
            tau_span,
        } => {
            let init = match init {
                GeneralizedInit::FromRoots { r, direction, roots } => {
                    DynamicsState::from_roots(r, &direction, &roots)?
                }
                GeneralizedInit::State(s) => s,
            };
            let traj = simulate_generalized(&potential, &init, tau_span, &opts)?;
            let report = json!({
                "degree": traj.degree,
                "samples": traj.samples.len(),
                "max_drift": traj.report.max_drift(),
                "report": traj.report,
            });
            (traj.to_csv()?, report)
        }
        SimulationJob::Quadratic {
            field,
            init,
            tau_span,
        } => {
            let init = QuadraticState::new(init.r, init.p, init.m)?;
            let traj = simulate_quadratic(&field, &init, tau_span, &opts)?;
            let report = json!({
                "degree": 2,
                "samples": traj.samples.len(),
                "mass_drift": traj.mass_drift,
                "energy_drift": traj.energy_drift,
                "reparametrization_distance": reparametrization_distance(&traj),
                "half_argument": half_argument_report(&traj),
            });
            (traj.to_csv(), report)
        }
    };
    let report = serde_json::to_string_pretty(&report)?;
    if let Some(dir) = out_dir {
        write_artifacts(dir, &csv, &report)?;
        info!("wrote trajectory.csv and report.json to {}", dir.display());
    }
    Ok(match rt.format {
        Format::Csv => csv,
        Format::Json => report,
    })
}
