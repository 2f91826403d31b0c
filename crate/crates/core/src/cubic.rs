//! Closed forms for the cubic: trigonometric roots, the `℘`-type flow of
//! `P₁`, and the Jacobi parametrization of the eigenvalue flow.

use serde::{Deserialize, Serialize};

use crate::elliptic::{quotients, Branch, WeierstrassP};
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::poly::InvariantSet;

/// Width of the band outside `[−1, 1]` in which the `arccos` argument is
/// clamped rather than rejected.
pub const ARCCOS_CLAMP: f64 = 1e-12;

/// Depressed cubic `Y³ − d·Y − R₀` in the orientation where three real roots
/// need `d > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicInvariants {
    /// `d = −R₂`.
    pub d: f64,
    pub r0: f64,
}

impl CubicInvariants {
    pub fn new(d: f64, r0: f64) -> Result<Self> {
        if !d.is_finite() || !r0.is_finite() {
            return Err(Error::NonFinite("cubic invariants"));
        }
        Ok(Self { d, r0 })
    }

    pub fn from_invariant_set(inv: &InvariantSet) -> Result<Self> {
        match (inv.degree, inv.r.as_slice()) {
            (3, &[r2]) => Self::new(-r2, inv.r0),
            _ => Err(Error::Malformed(format!(
                "cubic invariants need degree 3, got {}",
                inv.degree
            ))),
        }
    }

    pub fn r2(&self) -> f64 {
        -self.d
    }

    /// `(R₀/2)² < (d/3)³`.
    pub fn has_three_real_roots(&self) -> bool {
        (0.5 * self.r0).powi(2) < (self.d / 3.0).powi(3)
    }

    /// `P₁³ + R₂P₁ + R₀`, the squared flow speed (equal to `P²`).
    pub fn radicand(&self, p1: f64) -> f64 {
        p1 * p1 * p1 - self.d * p1 + self.r0
    }
}

/// Depressed roots in the order `(y₁, y₂, y₃)` of the trigonometric formula:
///
/// ```text
/// cos 3θ = −(3√3/2)·R₀/d^{3/2}
/// y₁ = −(2/3)√(3d)·cos θ,   y₂,₃ = (1/3)√(3d)·(cos θ ± √3·sin θ)
/// ```
pub fn solve_cubic_trig(inv: &CubicInvariants) -> Result<[f64; 3]> {
    let violation = || Error::DiscriminantViolation {
        lhs: (0.5 * inv.r0).powi(2),
        rhs: (inv.d / 3.0).powi(3),
    };
    if inv.d <= 0.0 {
        return Err(violation());
    }
    let arg = -1.5 * 3f64.sqrt() * inv.r0 / inv.d.powf(1.5);
    if arg.abs() > 1.0 + ARCCOS_CLAMP {
        return Err(violation());
    }
    let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
    let amp = (3.0 * inv.d).sqrt() / 3.0;
    let (sin, cos) = theta.sin_cos();
    let root3 = 3f64.sqrt();
    Ok([
        -2.0 * amp * cos,
        amp * (cos + root3 * sin),
        amp * (cos - root3 * sin),
    ])
}

/// `4x³ − g₂x − g₃` with `g₂ = −4R₂`, `g₃ = −4R₀`, and the root differences
/// `e₁ = q₃−q₂`, `e₂ = q₁−q₃`, `e₃ = q₂−q₁` of the ascending roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticConstants {
    pub g2: f64,
    pub g3: f64,
    pub e_diffs: (f64, f64, f64),
}

impl EllipticConstants {
    pub fn new(inv: &CubicInvariants) -> Result<Self> {
        let mut y = solve_cubic_trig(inv)?;
        y.sort_by(f64::total_cmp);
        Ok(Self {
            g2: -4.0 * inv.r2(),
            g3: -4.0 * inv.r0,
            e_diffs: (y[2] - y[1], y[0] - y[2], y[1] - y[0]),
        })
    }

    pub fn weierstrass_cubic(&self, x: f64) -> f64 {
        4.0 * x * x * x - self.g2 * x - self.g3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub steps: usize,
    /// The march stops once `|P₁|` exceeds this (a pole of `℘`).
    pub pole_cutoff: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            steps: 4000,
            pole_cutoff: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub s: f64,
    pub p1: f64,
    pub dp1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub s: f64,
    pub p1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassFlow {
    pub invariants: CubicInvariants,
    pub samples: Vec<FlowSample>,
    pub turning_points: Vec<TurningPoint>,
    /// `max |(dP₁/ds)² − (P₁³ + R₂P₁ + R₀)| / (1 + |P₁|³)` over the samples.
    pub max_residual: f64,
    /// Real branch of `℘` the flow follows; `None` with one real root.
    pub branch: Option<Branch>,
    /// Where the march stopped at the pole cutoff, if it did.
    pub pole_at: Option<f64>,
}

/// Integrates `dP₁/ds = +√(P₁³ + R₂P₁ + R₀)` from `P₁(s_span.0) = p1_0`.
///
/// The square root changes sign at turning points, so the march uses the
/// second-order form `P₁'' = (3P₁² + R₂)/2` with `P₁'` starting at the
/// positive root; turning points are where `P₁'` crosses zero.
pub fn weierstrass_flow(
    inv: &CubicInvariants,
    p1_0: f64,
    s_span: (f64, f64),
    opts: &FlowOptions,
) -> Result<WeierstrassFlow> {
    let rad0 = inv.radicand(p1_0);
    if rad0 < 0.0 {
        return Err(Error::RadicandNegative(rad0));
    }
    if !p1_0.is_finite() || !s_span.0.is_finite() || !s_span.1.is_finite() {
        return Err(Error::NonFinite("flow start"));
    }
    let d = inv.d;
    let f = move |_s: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = 0.5 * (3.0 * y[0] * y[0] - d);
    };
    // the radicand grows like P₁³ towards a pole, so the residual is scaled
    let residual =
        |y: &[f64]| (y[1] * y[1] - inv.radicand(y[0])).abs() / (1.0 + y[0].abs().powi(3));

    let steps = opts.steps.max(1);
    let h = (s_span.1 - s_span.0) / steps as f64;
    let mut s = s_span.0;
    let mut y = vec![p1_0, rad0.sqrt()];
    let mut samples = vec![FlowSample {
        s,
        p1: y[0],
        dp1: y[1],
    }];
    let mut turning_points = Vec::new();
    let mut max_residual = residual(&y);
    let mut pole_at = None;

    for _ in 0..steps {
        let next = rk4_step(&f, s, &y, h);
        if !next[0].is_finite() || next[0].abs() > opts.pole_cutoff {
            pole_at = Some(s);
            break;
        }
        if y[1] != 0.0 && (next[1] == 0.0 || next[1].signum() != y[1].signum()) {
            turning_points.push(locate_turning(&f, s, &y, h));
        }
        s += h;
        y = next;
        max_residual = max_residual.max(residual(&y));
        samples.push(FlowSample {
            s,
            p1: y[0],
            dp1: y[1],
        });
    }

    let branch = if inv.has_three_real_roots() {
        let e = radicand_roots(inv)?;
        Some(if p1_0 >= e[0] {
            Branch::Unbounded
        } else {
            Branch::Bounded
        })
    } else {
        None
    };

    Ok(WeierstrassFlow {
        invariants: *inv,
        samples,
        turning_points,
        max_residual,
        branch,
        pole_at,
    })
}

fn locate_turning<F>(f: &F, s: f64, y: &[f64], h: f64) -> TurningPoint
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (mut lo, mut hi) = (0.0, h);
    let sign = y[1].signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if rk4_step(f, s, y, mid)[1].signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dt = 0.5 * (lo + hi);
    TurningPoint {
        s: s + dt,
        p1: rk4_step(f, s, y, dt)[0],
    }
}

/// Roots of `P₁³ + R₂P₁ + R₀` in descending order; they are `−y_i`.
pub fn radicand_roots(inv: &CubicInvariants) -> Result<[f64; 3]> {
    let y = solve_cubic_trig(inv)?;
    let mut e = y.map(|v| -v);
    e.sort_by(|a, b| b.total_cmp(a));
    Ok(e)
}

/// `max |4x³ − g₂x − g₃|` over the turning values of `flow`.
///
/// With `g₂ = −4R₂` and `g₃ = −4R₀` the substitution `P₁(s) = λ·℘(α·s)`
/// forces `λ = 1` (and `α² = 1/4`), so the turning values are used as they
/// are; only the argument scale needs calibrating, see
/// [`calibrate_argument_scale`].
pub fn weierstrass_roots_check(consts: &EllipticConstants, flow: &WeierstrassFlow) -> Result<f64> {
    if flow.turning_points.is_empty() {
        return Err(Error::NoTurningPoint);
    }
    Ok(flow
        .turning_points
        .iter()
        .map(|t| consts.weierstrass_cubic(t.p1).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    /// Best `α` in `P₁(s) ≈ ℘(α·(s − s_t) + ω)`.
    pub alpha: f64,
    /// Root-mean-square of `(model − P₁)/(1 + |P₁|)` at the best `α`.
    pub rms: f64,
    pub branch: Branch,
}

const ALPHA_RANGE: (f64, f64) = (0.01, 10.0);
const ALPHA_GRID: usize = 120;

/// Least-squares fit of the argument scale `α` in `P₁(s) ≈ ℘(α(s − s_t) + ω)`
/// around the first turning point, with `℘` built on the radicand roots.
pub fn calibrate_argument_scale(flow: &WeierstrassFlow) -> Result<ScaleFit> {
    let turn = *flow.turning_points.first().ok_or(Error::NoTurningPoint)?;
    let branch = flow.branch.ok_or(Error::DiscriminantViolation {
        lhs: (0.5 * flow.invariants.r0).powi(2),
        rhs: (flow.invariants.d / 3.0).powi(3),
    })?;
    let wp = WeierstrassP::new(radicand_roots(&flow.invariants)?)?;
    let k = wp.quarter_period();
    // a turning value at e₁ or e₂ sits at w = K, one at e₃ at w = 0
    let offset = if (turn.p1 - wp.e[2]).abs() < (turn.p1 - wp.e[1]).abs() {
        0.0
    } else {
        k
    };
    let rate = wp.rate();
    let cost = |alpha: f64| {
        let sum: f64 = flow
            .samples
            .iter()
            .map(|smp| {
                let model = wp.at_w(rate * alpha * (smp.s - turn.s) + offset, branch);
                ((model - smp.p1) / (1.0 + smp.p1.abs())).powi(2)
            })
            .sum();
        let mean = sum / flow.samples.len() as f64;
        if mean.is_finite() {
            mean
        } else {
            f64::INFINITY
        }
    };

    // log-spaced scan, then golden section inside the best bracket
    let ratio = (ALPHA_RANGE.1 / ALPHA_RANGE.0).powf(1.0 / ALPHA_GRID as f64);
    let grid: Vec<f64> = (0..=ALPHA_GRID)
        .map(|i| ALPHA_RANGE.0 * ratio.powi(i as i32))
        .collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| cost(grid[a]).total_cmp(&cost(grid[b])))
        .expect("grid is not empty");
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(ALPHA_GRID)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while hi - lo > 1e-12 * hi {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    Ok(ScaleFit {
        alpha,
        rms: cost(alpha).sqrt(),
        branch,
    })
}

/// `(q₁, q₂, q₃) = e₁·(ds², cs², ns²)` at argument `u` with parameter
/// `m = 1 − e₂/e₁`.
pub fn jacobi_eigenvalue_parametrization(e1: f64, e2: f64, u: f64) -> Result<[f64; 3]> {
    if !(e1 > 0.0) {
        return Err(Error::Malformed(format!("e1 must be positive, got {e1}")));
    }
    let m = 1.0 - e2 / e1;
    let q = quotients(u, m)?;
    Ok([e1 * q.ds * q.ds, e1 * q.cs * q.cs, e1 * q.ns * q.ns])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpeed {
    /// Mean of `(dq₃/du) / (ns·cs·ds)` over the sweep.
    pub kappa: f64,
    /// Largest deviation of a single sample from the mean.
    pub spread: f64,
}

/// Estimates the constant `κ` in `dq₃/du = κ·ns·cs·ds` by central differences
/// with step `h` at each `u` of the sweep.
pub fn flow_speed_constant(e1: f64, e2: f64, us: &[f64], h: f64) -> Result<FlowSpeed> {
    if us.is_empty() {
        return Err(Error::Malformed("empty sweep".into()));
    }
    let m = 1.0 - e2 / e1;
    let mut ratios = Vec::with_capacity(us.len());
    for &u in us {
        let q3 = |v: f64| jacobi_eigenvalue_parametrization(e1, e2, v).map(|q| q[2]);
        let slope = (q3(u + h)? - q3(u - h)?) / (2.0 * h);
        let q = quotients(u, m)?;
        ratios.push(slope / (q.ns * q.cs * q.ds));
    }
    let kappa = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - kappa).abs()).fold(0.0, f64::max);
    Ok(FlowSpeed { kappa, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{NormalizedPolynomial, RootSet};

    fn sorted(mut v: [f64; 3]) -> [f64; 3] {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn trig_unit_example() {
        let y = solve_cubic_trig(&CubicInvariants::new(1.0, 0.0).unwrap()).unwrap();
        assert!((y[0] + 1.0).abs() < 1e-15);
        assert!((y[1] - 1.0).abs() < 1e-15);
        assert!(y[2].abs() < 1e-15);
    }

    #[test]
    fn trig_inverts_depress() {
        let roots = [-2.5, 0.75, 1.75];
        let poly = NormalizedPolynomial::from_roots(&RootSet::new(roots.to_vec()).unwrap()).unwrap();
        let inv = CubicInvariants::from_invariant_set(&poly.depress()).unwrap();
        assert!(inv.has_three_real_roots());
        let y = sorted(solve_cubic_trig(&inv).unwrap());
        for (a, b) in y.iter().zip(roots) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(y.iter().sum::<f64>().abs() < 1e-12);
        let pair = y[0] * y[1] + y[0] * y[2] + y[1] * y[2];
        assert!((pair + inv.d).abs() < 1e-12);
    }

    #[test]
    fn trig_boundary() {
        let edge = 2.0 / (3.0 * 3f64.sqrt());
        let y = solve_cubic_trig(&CubicInvariants::new(1.0, edge).unwrap()).unwrap();
        // double root at the boundary
        let y = sorted(y);
        assert!((y[0] - y[1]).abs() < 1e-6);
        let beyond = CubicInvariants::new(1.0, edge * (1.0 + 1e-9)).unwrap();
        assert!(matches!(
            solve_cubic_trig(&beyond),
            Err(Error::DiscriminantViolation { .. })
        ));
        assert!(solve_cubic_trig(&CubicInvariants::new(-1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn elliptic_constants_example() {
        let c = EllipticConstants::new(&CubicInvariants::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!((c.g2, c.g3), (4.0, 0.0));
        for x in [-1.0, 0.0, 1.0] {
            assert_eq!(c.weierstrass_cubic(x), 0.0);
        }
        let (e1, e2, e3) = c.e_diffs;
        assert!((e1 + e2 + e3).abs() < 1e-15);
        assert!((e1 - 1.0).abs() < 1e-15 && (e3 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flow_start_and_turning_point() {
        let inv = CubicInvariants::new(1.0, 0.0).unwrap();
        assert_eq!(inv.radicand(2.0), 6.0);
        let flow = weierstrass_flow(&inv, 2.0, (0.0, -4.0), &FlowOptions::default()).unwrap();
        assert_eq!(flow.branch, Some(Branch::Unbounded));
        assert!(flow.max_residual < 1e-6, "{}", flow.max_residual);
        let turn = flow.turning_points[0];
        assert!((turn.p1 - 1.0).abs() < 1e-8);
        assert!(inv.radicand(turn.p1).abs() < 1e-8);

        let consts = EllipticConstants::new(&inv).unwrap();
        assert!(weierstrass_roots_check(&consts, &flow).unwrap() < 1e-6);
        let fit = calibrate_argument_scale(&flow).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-6, "alpha {}", fit.alpha);
    }

    #[test]
    fn flow_rejects_negative_radicand() {
        let inv = CubicInvariants::new(1.0, 0.0).unwrap();
        assert!(matches!(
            weierstrass_flow(&inv, 0.5, (0.0, 1.0), &FlowOptions::default()),
            Err(Error::RadicandNegative(_))
        ));
    }

    #[test]
    fn bounded_branch_oscillates() {
        let inv = CubicInvariants::new(1.0, 0.0).unwrap();
        let flow = weierstrass_flow(&inv, -0.5, (0.0, 20.0), &FlowOptions::default()).unwrap();
        assert_eq!(flow.branch, Some(Branch::Bounded));
        assert!(flow.turning_points.len() >= 2);
        let consts = EllipticConstants::new(&inv).unwrap();
        assert!(weierstrass_roots_check(&consts, &flow).unwrap() < 1e-6);
        let fit = calibrate_argument_scale(&flow).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-6, "alpha {}", fit.alpha);
    }

    #[test]
    fn no_turning_point() {
        let inv = CubicInvariants::new(1.0, 0.0).unwrap();
        let flow = weierstrass_flow(&inv, 2.0, (0.0, 0.1), &FlowOptions::default()).unwrap();
        let consts = EllipticConstants::new(&inv).unwrap();
        assert_eq!(weierstrass_roots_check(&consts, &flow), Err(Error::NoTurningPoint));
    }

    #[test]
    fn parametrization_differences() {
        for u in [0.3, 0.9, 1.7, 2.4] {
            let q = jacobi_eigenvalue_parametrization(2.0, 1.0, u).unwrap();
            assert!((q[2] - q[1] - 2.0).abs() < 1e-10);
            assert!((q[0] - q[1] - 1.0).abs() < 1e-10);
            // m = 0: ds = ns, so q₁ = q₃
            let q = jacobi_eigenvalue_parametrization(1.0, 1.0, u).unwrap();
            assert!((q[0] - q[2]).abs() < 1e-12);
            // m = 1: ds = cs, so q₁ = q₂
            let q = jacobi_eigenvalue_parametrization(1.0, 0.0, u).unwrap();
            assert!((q[0] - q[1]).abs() < 1e-12);
        }
        assert!(matches!(
            jacobi_eigenvalue_parametrization(1.0, 2.0, 0.5),
            Err(Error::ModulusOutOfRange(_))
        ));
    }

    #[test]
    fn flow_speed_is_twice_e1() {
        let us: Vec<f64> = (1..20).map(|i| 0.15 * i as f64).collect();
        let speed = flow_speed_constant(1.0, 0.5, &us, 1e-5).unwrap();
        assert!((speed.kappa - 2.0).abs() < 1e-6);
        assert!(speed.spread < 1e-5);
    }
}
