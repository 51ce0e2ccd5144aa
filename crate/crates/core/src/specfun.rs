//! `Li_{1/2}(e^{-x})` and the zeta values its small-argument expansion needs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Expansion order of the small-`x` branch.
pub const EXPANSION_ORDER: usize = 16;
/// Below this argument the small-`x` expansion is used.
pub const CROSSOVER: f64 = 0.5;

/// `ζ(1/2)`, `ζ(-1/2)` and `ζ(1/2 - j)` for `j = 0..=16`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ZetaConstants<T> {
    pub zeta_half: T,
    pub zeta_minus_half: T,
    pub zeta_half_minus_j: Vec<T>,
}

/// Dirichlet eta `η(s) = Σ (-1)^{n-1} n^{-s}` for real `s > 0`, summed with
/// the Cohen-Rodriguez Villegas-Zagier acceleration. The error after `n`
/// terms is about `5.8^{-n}`.
fn eta(s: f64, n: usize) -> f64 {
    let d0 = (3.0 + 8f64.sqrt()).powi(n as i32);
    let d = (d0 + 1.0 / d0) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        let kf = k as f64;
        c = b - c;
        sum += c * (kf + 1.0).powf(-s);
        b *= (kf + n as f64) * (kf - n as f64) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// `ζ(s)` for real `s > 0`, `s != 1`.
fn zeta_positive(s: f64) -> f64 {
    eta(s, 40) / (1.0 - 2f64.powf(1.0 - s))
}

/// `ζ(1/2 - j)`. For `j >= 1` the functional equation maps it to
/// `ζ(1/2 + j)`, where the eta series converges quickly; `Γ(j + 1/2)` is
/// exact at half integers.
fn zeta_half_minus(j: usize) -> f64 {
    use std::f64::consts::PI;
    if j == 0 {
        return zeta_positive(0.5);
    }
    let s = 0.5 - j as f64;
    // Γ(j + 1/2) = (2j)! / (4^j j!) √π
    let mut gamma = PI.sqrt();
    for m in 0..j {
        gamma *= m as f64 + 0.5;
    }
    2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma * zeta_positive(1.0 - s)
}

pub fn compute_zeta_constants<T: Real>() -> ZetaConstants<T> {
    let values: Vec<f64> = (0..=EXPANSION_ORDER).map(zeta_half_minus).collect();
    assert!(
        values[0] < 0.0 && values[1] < 0.0,
        "zeta sign facts violated"
    );
    ZetaConstants {
        zeta_half: T::lit(values[0]),
        zeta_minus_half: T::lit(values[1]),
        zeta_half_minus_j: values.into_iter().map(T::lit).collect(),
    }
}

/// Evaluator for `x ↦ Li_{1/2}(e^{-x})`, `x > 0`.
#[derive(Clone, Debug)]
pub struct PolylogHalf<T> {
    zeta: ZetaConstants<T>,
}

impl<T: Real> Default for PolylogHalf<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> PolylogHalf<T> {
    pub fn new() -> Self {
        PolylogHalf {
            zeta: compute_zeta_constants(),
        }
    }

    pub fn zeta(&self) -> &ZetaConstants<T> {
        &self.zeta
    }

    pub fn eval(&self, x: T) -> Result<T> {
        if !x.is_finite() || x <= T::zero() {
            return Err(Error::Domain(format!(
                "Li_1/2(e^-x) needs finite x > 0, got {x}"
            )));
        }
        if x >= T::lit(CROSSOVER) {
            Ok(direct_series(x))
        } else {
            Ok(self.expansion(x))
        }
    }

    /// `√(π/x) + Σ_{j≤16} ζ(1/2-j) (-x)^j / j!`
    fn expansion(&self, x: T) -> T {
        let mut term = T::one();
        let mut sum = T::zero();
        for (j, z) in self.zeta.zeta_half_minus_j.iter().enumerate() {
            if j > 0 {
                term = term * (-x) / T::count(j);
            }
            sum += *z * term;
        }
        (T::pi() / x).sqrt() + sum
    }
}

/// `Σ_{n≥1} e^{-nx}/√n`, stopped once a term drops below `1e-17`.
fn direct_series<T: Real>(x: T) -> T {
    let q = (-x).exp();
    let cutoff = T::lit(1e-17);
    let mut pow = q;
    let mut sum = T::zero();
    let mut n = 1usize;
    loop {
        let term = pow / T::count(n).sqrt();
        sum += term;
        if term < cutoff {
            break;
        }
        pow *= q;
        n += 1;
    }
    sum
}

/// One-off evaluation of `Li_{1/2}(e^{-x})`.
pub fn polylog_half<T: Real>(x: T) -> Result<T> {
    PolylogHalf::new().eval(x)
}
