//! Real Jacobi elliptic functions and the Weierstrass `℘` on its real
//! branches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest AGM chain; convergence is quadratic so this is never reached for
/// `m < 1`.
const AGM_LEVELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `sn`, `cn`, `dn` of argument `u` and parameter `m` (squared modulus) by
/// the descending Landen (AGM) scheme.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<JacobiTriple> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::ModulusOutOfRange(m));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("elliptic argument"));
    }
    if m == 0.0 {
        return Ok(JacobiTriple {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        });
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }

    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.len() < AGM_LEVELS {
        let (ai, ci) = (*a.last().unwrap(), *c.last().unwrap());
        if ci.abs() <= f64::EPSILON * ai {
            break;
        }
        a.push(0.5 * (ai + b));
        c.push(0.5 * (ai - b));
        b = (ai * b).sqrt();
    }
    let levels = a.len() - 1;
    let mut phi = 2f64.powi(levels as i32) * a[levels] * u;
    let mut prev = phi;
    for i in (1..=levels).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if levels == 0 {
        1.0
    } else {
        cn / (prev - phi).cos()
    };
    Ok(JacobiTriple { sn, cn, dn })
}

/// Complete elliptic integral of the first kind, `K(m) = π / (2·AGM(1, √(1−m)))`.
pub fn complete_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::ModulusOutOfRange(m));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    while (a - b).abs() > f64::EPSILON * a {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(std::f64::consts::FRAC_PI_2 / a)
}

/// Reciprocal and quotient functions with the sign convention
/// `ns = −1/sn`, `cs = −cn/sn`, `ds = −dn/sn`, under which
/// `ns' = cs·ds`, `cs' = ns·ds`, `ds' = cs·ns`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotients {
    pub ns: f64,
    pub cs: f64,
    pub ds: f64,
}

pub fn quotients(u: f64, m: f64) -> Result<Quotients> {
    let JacobiTriple { sn, cn, dn } = jacobi_sn_cn_dn(u, m)?;
    Ok(Quotients {
        ns: -1.0 / sn,
        cs: -cn / sn,
        ds: -dn / sn,
    })
}

/// Which real half-period line of `℘` a real-valued flow lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `℘ ≥ e₁`, with poles.
    Unbounded,
    /// `e₃ ≤ ℘ ≤ e₂`, periodic and bounded.
    Bounded,
}

/// Weierstrass `℘` for three real roots `e₁ > e₂ > e₃` of `4x³ − g₂x − g₃`,
/// written through `sn` with `w = √(e₁−e₃)·z` and `m = (e₂−e₃)/(e₁−e₃)`.
///
/// On the unbounded branch `℘ = e₃ + (e₁−e₃)/sn²(w)`, reaching `e₁` at
/// `w = K`. On the bounded branch `℘ = e₃ + (e₂−e₃)·sn²(w)`, which is `e₃`
/// at `w = 0` and `e₂` at `w = K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassP {
    /// Descending roots `[e₁, e₂, e₃]`.
    pub e: [f64; 3],
}

impl WeierstrassP {
    pub fn new(mut e: [f64; 3]) -> Result<Self> {
        e.sort_by(|a, b| b.total_cmp(a));
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Weierstrass roots"));
        }
        if !(e[0] > e[1] && e[1] > e[2]) {
            return Err(Error::DuplicateRoot {
                a: e[1],
                b: if e[0] == e[1] { e[0] } else { e[2] },
                tol: 0.0,
            });
        }
        Ok(Self { e })
    }

    pub fn parameter(&self) -> f64 {
        (self.e[1] - self.e[2]) / (self.e[0] - self.e[2])
    }

    /// `w`-units per unit of `z`.
    pub fn rate(&self) -> f64 {
        (self.e[0] - self.e[2]).sqrt()
    }

    pub fn quarter_period(&self) -> f64 {
        complete_k(self.parameter()).expect("parameter lies in (0, 1)")
    }

    /// `℘` at `w = rate·z` measured in the sn argument.
    pub fn at_w(&self, w: f64, branch: Branch) -> f64 {
        let sn = jacobi_sn_cn_dn(w, self.parameter())
            .expect("parameter lies in (0, 1)")
            .sn;
        let [e1, e2, e3] = self.e;
        match branch {
            Branch::Unbounded => e3 + (e1 - e3) / (sn * sn),
            Branch::Bounded => e3 + (e2 - e3) * sn * sn,
        }
    }
}
