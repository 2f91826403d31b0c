//! Static potentials `V(r)` with analytic gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default radius of the smoothed core of the Coulomb potential.
pub const DEFAULT_CORE_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V = ½k|r|²`.
    Harmonic { k: f64 },
    /// `V = −α/|r|` outside `core`; inside, the C¹ continuation
    /// `−α(3core² − |r|²)/(2core³)`. Negative `α` is repulsive.
    Coulomb {
        alpha: f64,
        #[serde(default = "default_core")]
        core: f64,
    },
    /// `V = −e·r`, a constant field `e`.
    Uniform { e: Vec<f64> },
    /// Radial table `V(|r|)` on increasing abscissae, cubic Hermite between
    /// nodes (slopes from centred differences), linear beyond the ends.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

fn default_core() -> f64 {
    DEFAULT_CORE_RADIUS
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl PotentialSpec {
    pub fn coulomb(alpha: f64) -> Self {
        Self::Coulomb {
            alpha,
            core: DEFAULT_CORE_RADIUS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Harmonic { k } if !k.is_finite() => Err(Error::NonFinite("harmonic constant")),
            Self::Coulomb { alpha, core } if !alpha.is_finite() || !(*core > 0.0) => Err(
                Error::Malformed(format!("coulomb needs finite alpha and core > 0, got {alpha}, {core}")),
            ),
            Self::Uniform { e } if e.iter().any(|v| !v.is_finite()) => {
                Err(Error::NonFinite("uniform field"))
            }
            Self::Tabulated { r, v } => {
                if r.len() != v.len() || r.len() < 2 {
                    return Err(Error::Malformed(
                        "tabulated potential needs matching r and v with at least two nodes".into(),
                    ));
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
                    return Err(Error::Malformed(
                        "tabulated abscissae must be non-negative and increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Harmonic { k } => 0.5 * k * x.iter().map(|v| v * v).sum::<f64>(),
            Self::Coulomb { alpha, core } => {
                let r = norm(x);
                if r >= *core {
                    -alpha / r
                } else {
                    -alpha * (3.0 * core * core - r * r) / (2.0 * core.powi(3))
                }
            }
            Self::Uniform { e } => -e.iter().zip(x).map(|(a, b)| a * b).sum::<f64>(),
            Self::Tabulated { r, v } => radial_hermite(r, v, norm(x)).0,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Harmonic { k } => x.iter().map(|v| k * v).collect(),
            Self::Coulomb { alpha, core } => {
                let r = norm(x);
                let scale = if r >= *core {
                    alpha / r.powi(3)
                } else {
                    alpha / core.powi(3)
                };
                x.iter().map(|v| scale * v).collect()
            }
            Self::Uniform { e } => (0..x.len()).map(|i| -e.get(i).copied().unwrap_or(0.0)).collect(),
            Self::Tabulated { r, v } => {
                let rad = norm(x);
                if rad == 0.0 {
                    return vec![0.0; x.len()];
                }
                let slope = radial_hermite(r, v, rad).1;
                x.iter().map(|c| slope * c / rad).collect()
            }
        }
    }
}

/// Value and derivative of the Hermite interpolant at radius `x`.
fn radial_hermite(r: &[f64], v: &[f64], x: f64) -> (f64, f64) {
    let n = r.len();
    let slope = |i: usize| {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
        (v[b] - v[a]) / (r[b] - r[a])
    };
    if x <= r[0] {
        let m = slope(0);
        return (v[0] + m * (x - r[0]), m);
    }
    if x >= r[n - 1] {
        let m = slope(n - 1);
        return (v[n - 1] + m * (x - r[n - 1]), m);
    }
    let i = r.partition_point(|&ri| ri <= x) - 1;
    let h = r[i + 1] - r[i];
    let t = (x - r[i]) / h;
    let (m0, m1) = (slope(i) * h, slope(i + 1) * h);
    let (t2, t3) = (t * t, t * t * t);
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * v[i]
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * v[i + 1]
        + (t3 - t2) * m1;
    let deriv = ((6.0 * t2 - 6.0 * t) * v[i]
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * v[i + 1]
        + (3.0 * t2 - 2.0 * t) * m1)
        / h;
    (value, deriv)
}
