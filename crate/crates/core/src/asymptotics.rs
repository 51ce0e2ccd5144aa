//! Asymptotic energy of the composite: network term, reference-medium term
//! `kπ/2` and the boundary resonance term, plus regime classification and
//! the boundary-layer / interior decomposition check.

use std::fmt;

use nalgebra::{Cholesky, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometryAnalysis;
use crate::network::{build_network_with, KirchhoffFactor, Network, NetworkOptions};
use crate::scalar::Real;
use crate::specfun::PolylogHalf;

/// Boundary data `ψ(θ) = Σ_k a_k^c cos kθ + a_k^s sin kθ`, `k = 0..=K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FourierPotential<T> {
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Real> FourierPotential<T> {
    pub fn new(cos: Vec<T>, sin: Vec<T>) -> Result<Self> {
        if cos.len() != sin.len() || cos.is_empty() {
            return Err(Error::Invalid(
                "cos and sin coefficient lists must match".into(),
            ));
        }
        if sin[0] != T::zero() {
            return Err(Error::Invalid(
                "the k = 0 sine coefficient must be zero".into(),
            ));
        }
        if let Some(k) = cos.iter().chain(&sin).position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("Fourier coefficient #{k}")));
        }
        Ok(FourierPotential { cos, sin })
    }

    pub fn zero(k_max: usize) -> Self {
        FourierPotential {
            cos: vec![T::zero(); k_max + 1],
            sin: vec![T::zero(); k_max + 1],
        }
    }

    pub fn constant(c: T) -> Self {
        FourierPotential {
            cos: vec![c],
            sin: vec![T::zero()],
        }
    }

    pub fn cos_mode(k: usize) -> Self {
        Self::zero(k).with_cos(k, T::one())
    }

    pub fn sin_mode(k: usize) -> Self {
        Self::zero(k).with_sin(k, T::one())
    }

    fn grow(&mut self, k: usize) {
        if k >= self.cos.len() {
            self.cos.resize(k + 1, T::zero());
            self.sin.resize(k + 1, T::zero());
        }
    }

    pub fn with_cos(mut self, k: usize, a: T) -> Self {
        self.grow(k);
        self.cos[k] = a;
        self
    }

    /// # Panics
    /// On `k = 0`.
    pub fn with_sin(mut self, k: usize, a: T) -> Self {
        assert!(k > 0, "sin(0θ) vanishes identically");
        self.grow(k);
        self.sin[k] = a;
        self
    }

    /// Largest frequency `K`.
    pub fn max_frequency(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeff(&self, k: usize) -> T {
        self.cos.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn sin_coeff(&self, k: usize) -> T {
        self.sin.get(k).copied().unwrap_or_else(T::zero)
    }

    /// Frequencies with a nonzero coefficient, ascending.
    pub fn active_modes(&self) -> Vec<usize> {
        (0..self.cos.len())
            .filter(|&k| self.cos[k] != T::zero() || self.sin[k] != T::zero())
            .collect()
    }

    pub fn eval(&self, theta: T) -> T {
        (0..self.cos.len()).fold(T::zero(), |acc, k| {
            let kt = T::count(k) * theta;
            acc + self.cos[k] * kt.cos() + self.sin[k] * kt.sin()
        })
    }

    /// `θ ↦ ψ(θ − φ)`, the data that follows a rotation of the packing by `φ`.
    pub fn rotated(&self, phi: T) -> Self {
        let mut out = self.clone();
        for k in 0..self.cos.len() {
            let (s, c) = (T::count(k) * phi).sin_cos();
            out.cos[k] = self.cos[k] * c - self.sin[k] * s;
            out.sin[k] = self.cos[k] * s + self.sin[k] * c;
        }
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let n = self.cos.len().max(other.cos.len());
        let mut out = Self::zero(n - 1);
        for k in 0..n {
            out.cos[k] = a * self.cos_coeff(k) + b * other.cos_coeff(k);
            out.sin[k] = a * self.sin_coeff(k) + b * other.sin_coeff(k);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "u8")]
pub enum Regime {
    /// `ε ≪ η ≲ 1`: the network carries the energy.
    Network = 1,
    /// `1 ≲ ε`: the reference medium carries the energy.
    Reference = 2,
    /// `ε ≪ 1 ≲ η`: all three terms matter.
    Resonant = 3,
}

impl From<Regime> for u8 {
    fn from(r: Regime) -> u8 {
        r as u8
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// `ε = kδ/L`, `η = kR/L` and the regime they select.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeRegime<T> {
    pub k: usize,
    pub epsilon: T,
    pub eta: T,
    pub regime: Regime,
}

pub fn classify_parameters<T: Real>(epsilon: T, eta: T) -> Regime {
    if epsilon >= T::one() {
        Regime::Reference
    } else if eta <= T::one() {
        Regime::Network
    } else {
        Regime::Resonant
    }
}

/// Regime of frequency `k`, with the geometric-mean gap and mean radius as
/// the characteristic lengths.
pub fn regime_classify<T: Real>(k: usize, analysis: &GeometryAnalysis<T>) -> ModeRegime<T> {
    let l = analysis.domain_radius();
    let kk = T::count(k);
    let epsilon = kk * analysis.characteristic_gap() / l;
    let eta = kk * analysis.characteristic_radius() / l;
    ModeRegime {
        k,
        epsilon,
        eta,
        regime: classify_parameters(epsilon, eta),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    #[serde(rename = "E_net")]
    pub e_net: T,
    #[serde(rename = "E_ref")]
    pub e_ref: T,
    #[serde(rename = "R_res")]
    pub r_res: T,
    pub total: T,
    pub quad_form: T,
    pub per_mode: Vec<ModeRegime<T>>,
}

impl<T: Real> EnergyBreakdown<T> {
    fn assemble(e_net: T, e_ref: T, r_res: T, per_mode: Vec<ModeRegime<T>>) -> Self {
        let total = e_net + e_ref + r_res;
        EnergyBreakdown {
            e_net,
            e_ref,
            r_res,
            total,
            quad_form: T::lit(2.0) * total,
            per_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeEstimate<T> {
    pub regime: Regime,
    pub approx_total: T,
    pub description: String,
}

/// Result of minimizing boundary-layer plus interior gap energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition<T> {
    pub value: T,
    /// `total − value`.
    pub discrepancy: T,
    /// `Σ σ_i/4 (e^{−κ_i} − e^{−2κ_i})`.
    pub expected_discrepancy: T,
    pub potentials: Vec<T>,
}

/// Per-unit-frequency damping `√(2 R_i δ_i)/L` of each boundary inclusion.
fn damping_rates<T: Real>(analysis: &GeometryAnalysis<T>) -> Vec<T> {
    let l = analysis.domain_radius();
    (0..analysis.boundary_count)
        .map(|i| (T::lit(2.0) * analysis.radius(i) * analysis.boundary_gaps[i]).sqrt() / l)
        .collect()
}

/// `Ψ_i = Σ_k [a_k^c cos kθ_i + a_k^s sin kθ_i] e^{−k√(2R_iδ_i)/L}`.
pub fn boundary_excitation<T: Real>(
    psi: &FourierPotential<T>,
    analysis: &GeometryAnalysis<T>,
) -> Vec<T> {
    let rates = damping_rates(analysis);
    let modes = psi.active_modes();
    (0..analysis.boundary_count)
        .map(|i| {
            let theta = analysis.boundary_angles[i];
            modes.iter().fold(T::zero(), |acc, &k| {
                let kk = T::count(k);
                let (s, c) = (kk * theta).sin_cos();
                acc + (psi.cos[k] * c + psi.sin[k] * s) * (-kk * rates[i]).exp()
            })
        })
        .collect()
}

/// `Σ_{k≥1} (kπ/2)[(a_k^c)² + (a_k^s)²]`.
pub fn reference_energy<T: Real>(psi: &FourierPotential<T>) -> T {
    (1..psi.cos.len()).fold(T::zero(), |acc, k| {
        acc + T::count(k) * T::frac_pi_2() * (psi.cos[k] * psi.cos[k] + psi.sin[k] * psi.sin[k])
    })
}

/// `√(2kδ/(πL)) Li_{1/2}(e^{−2kδ/L})`, equal to 1 in the `k → 0` limit.
fn polylog_term<T: Real>(polylog: &PolylogHalf<T>, k: usize, delta: T, l: T) -> Result<T> {
    if k == 0 {
        return Ok(T::one());
    }
    let x = T::lit(2.0) * T::count(k) * delta / l;
    Ok((x / T::pi()).sqrt() * polylog.eval(x)?)
}

/// `ℛ_{i,k} = σ_i/4 [√(2kδ_i/(πL)) Li_{1/2}(e^{−2kδ_i/L}) − e^{−2k√(2R_iδ_i)/L}]`,
/// zero at `k = 0`.
pub fn resonance_single<T: Real>(
    polylog: &PolylogHalf<T>,
    analysis: &GeometryAnalysis<T>,
    i: usize,
    k: usize,
    sigma_i: T,
) -> Result<T> {
    if k == 0 {
        return Ok(T::zero());
    }
    let l = analysis.domain_radius();
    let delta = analysis.boundary_gaps[i];
    let kappa = T::count(k) * (T::lit(2.0) * analysis.radius(i) * delta).sqrt() / l;
    let poly = polylog_term(polylog, k, delta, l)?;
    Ok(sigma_i / T::lit(4.0) * (poly - (-T::lit(2.0) * kappa).exp()))
}

/// Energy of a packing with no inclusions: the reference term alone.
pub fn homogeneous_energy<T: Real>(psi: &FourierPotential<T>) -> EnergyBreakdown<T> {
    EnergyBreakdown::assemble(T::zero(), reference_energy(psi), T::zero(), Vec::new())
}

/// Asymptotic model of one packing: geometry, network and its factorization.
#[derive(Clone, Debug)]
pub struct Asymptotics<T: Real> {
    analysis: GeometryAnalysis<T>,
    network: Network<T>,
    factor: KirchhoffFactor<T>,
    polylog: PolylogHalf<T>,
    rates: Vec<T>,
}

impl<T: Real> Asymptotics<T> {
    pub fn new(analysis: GeometryAnalysis<T>, options: &NetworkOptions<T>) -> Result<Self> {
        let network = build_network_with(&analysis, options)?;
        Self::from_parts(analysis, network)
    }

    pub fn from_parts(analysis: GeometryAnalysis<T>, network: Network<T>) -> Result<Self> {
        if network.boundary_count() != analysis.boundary_count {
            return Err(Error::Invalid("network does not match the geometry".into()));
        }
        let factor = network.factorize()?;
        let rates = damping_rates(&analysis);
        Ok(Asymptotics {
            analysis,
            network,
            factor,
            polylog: PolylogHalf::new(),
            rates,
        })
    }

    pub fn analysis(&self) -> &GeometryAnalysis<T> {
        &self.analysis
    }

    pub fn network(&self) -> &Network<T> {
        &self.network
    }

    pub fn boundary_excitation(&self, psi: &FourierPotential<T>) -> Vec<T> {
        boundary_excitation(psi, &self.analysis)
    }

    pub fn net_energy(&self, excitation: &[T]) -> Result<T> {
        Ok(self
            .network
            .solve_factored(&self.factor, excitation)?
            .energy)
    }

    pub fn resonance_single(&self, i: usize, k: usize) -> Result<T> {
        resonance_single(
            &self.polylog,
            &self.analysis,
            i,
            k,
            self.network.boundary_sigma(i),
        )
    }

    /// `ℛ_k = Σ_i ℛ_{i,k}`.
    pub fn resonance_mode(&self, k: usize) -> Result<T> {
        (0..self.analysis.boundary_count)
            .try_fold(T::zero(), |acc, i| Ok(acc + self.resonance_single(i, k)?))
    }

    /// Double sum over frequency pairs, with `ℛ_{i,min(k,m)}` weighted by
    /// `e^{−|k−m|κ_i}` and the angular cross terms.
    pub fn resonance_general(&self, psi: &FourierPotential<T>) -> Result<T> {
        let modes = psi.active_modes();
        let mut total = T::zero();
        for i in 0..self.analysis.boundary_count {
            let theta = self.analysis.boundary_angles[i];
            let r: Vec<T> = modes
                .iter()
                .map(|&k| self.resonance_single(i, k))
                .collect::<Result<_>>()?;
            for (p, &k) in modes.iter().enumerate() {
                for (q, &m) in modes.iter().enumerate() {
                    let r_min = r[p.min(q)];
                    if r_min == T::zero() {
                        continue;
                    }
                    let d = T::lit(k as f64 - m as f64);
                    let (s, c) = (d * theta).sin_cos();
                    let (ck, sk, cm, sm) = (psi.cos[k], psi.sin[k], psi.cos[m], psi.sin[m]);
                    let angular = (ck * cm + sk * sm) * c + (sk * cm - ck * sm) * s;
                    total += (-d.mag() * self.rates[i]).exp() * r_min * angular;
                }
            }
        }
        Ok(total)
    }

    /// Closed form of [`Asymptotics::resonance_general`] when the boundary
    /// inclusions are identical, share one boundary gap and sit at equally
    /// spaced angles.
    pub fn resonance_equidistant(&self, psi: &FourierPotential<T>) -> Result<T> {
        let a = &self.analysis;
        let n = a.boundary_count;
        let tol = T::lit(1e-12);
        let equal = |x: T, y: T| (x - y).mag() <= tol * x.mag().max(y.mag());
        let theta1 = a.boundary_angles[0];
        for i in 1..n {
            let expect = theta1 + T::two_pi() * T::count(i) / T::count(n);
            if !equal(a.boundary_gaps[i], a.boundary_gaps[0])
                || !equal(a.radius(i), a.radius(0))
                || (a.boundary_angles[i] - expect).mag() > tol * T::two_pi()
            {
                return Err(Error::Invalid(
                    "boundary inclusions are not equidistant".into(),
                ));
            }
        }
        let nn = T::count(n);
        let big_k = psi.max_frequency();
        let mut total = T::zero();
        for k in 1..=big_k {
            let (ck, sk) = (psi.cos[k], psi.sin[k]);
            if ck == T::zero() && sk == T::zero() {
                continue;
            }
            let r = self.resonance_single(0, k)?;
            total += nn * r * (ck * ck + sk * sk);
            let mut m = k + n;
            let mut q = 1usize;
            while m <= big_k {
                let qn = T::count(q * n);
                let (s, c) = (qn * theta1).sin_cos();
                let (cm, sm) = (psi.cos[m], psi.sin[m]);
                let angular = (ck * cm + sk * sm) * c + (ck * sm - sk * cm) * s;
                total += T::lit(2.0) * nn * r * (-qn * self.rates[0]).exp() * angular;
                m += n;
                q += 1;
            }
        }
        Ok(total)
    }

    pub fn regime_classify(&self, k: usize) -> ModeRegime<T> {
        regime_classify(k, &self.analysis)
    }

    pub fn total_energy(&self, psi: &FourierPotential<T>) -> Result<EnergyBreakdown<T>> {
        // the network annihilates constants
        let varying = psi.clone().with_cos(0, T::zero());
        let e_net = self.net_energy(&self.boundary_excitation(&varying))?;
        let e_ref = reference_energy(psi);
        let r_res = self.resonance_general(psi)?;
        let per_mode = psi
            .active_modes()
            .into_iter()
            .map(|k| self.regime_classify(k))
            .collect();
        Ok(EnergyBreakdown::assemble(e_net, e_ref, r_res, per_mode))
    }

    /// Single-mode `cos kθ` estimate keeping only the terms its regime calls
    /// leading order.
    pub fn regime_estimate(&self, k: usize) -> Result<RegimeEstimate<T>> {
        let psi = FourierPotential::cos_mode(k);
        let mode = self.regime_classify(k);
        let e_ref = reference_energy(&psi);
        let (approx_total, description) = match mode.regime {
            Regime::Network => (
                self.net_energy(&self.boundary_excitation(&psi))? + e_ref,
                "network regime: E_net + k*pi/2, resonance term is O(sqrt(eps)) per inclusion"
                    .to_string(),
            ),
            Regime::Reference => (
                e_ref,
                "reference regime: k*pi/2, network and resonance terms exponentially small"
                    .to_string(),
            ),
            Regime::Resonant => (
                self.total_energy(&psi)?.total,
                "resonant regime: all terms kept, R_k ~ k/sqrt(eps*eta)".to_string(),
            ),
        };
        Ok(RegimeEstimate {
            regime: mode.regime,
            approx_total,
            description,
        })
    }

    /// Leading-order boundary-layer energy of `cos kθ` data with the boundary
    /// inclusions held at `u_gamma`.
    pub fn boundary_layer_energy(&self, u_gamma: &[T], k: usize) -> Result<T> {
        let a = &self.analysis;
        if u_gamma.len() != a.boundary_count {
            return Err(Error::Invalid(format!(
                "expected {} boundary inclusion potentials, got {}",
                a.boundary_count,
                u_gamma.len()
            )));
        }
        let l = a.domain_radius();
        let kk = T::count(k);
        let mut e = kk * T::frac_pi_2();
        for (i, &u) in u_gamma.iter().enumerate() {
            let sigma = self.network.boundary_sigma(i);
            let damp = (-kk * self.rates[i]).exp();
            let d = u - (kk * a.boundary_angles[i]).cos() * damp;
            let poly = polylog_term(&self.polylog, k, a.boundary_gaps[i], l)?;
            e += sigma / T::lit(2.0) * d * d + sigma / T::lit(4.0) * (poly - damp);
        }
        Ok(e)
    }

    /// Minimizes boundary-layer plus interior gap energy over the boundary
    /// inclusion potentials and compares with [`Asymptotics::total_energy`].
    pub fn total_energy_decomposed(&self, k: usize) -> Result<Decomposition<T>> {
        let nb = self.analysis.boundary_count;
        let psi = FourierPotential::cos_mode(k);
        let target = self.boundary_excitation(&psi);
        let mut h = self.network.gap_schur()?;
        let mut rhs = DVector::zeros(nb);
        for i in 0..nb {
            let sigma = self.network.boundary_sigma(i);
            h[(i, i)] += sigma;
            rhs[i] = sigma * target[i];
        }
        let chol = Cholesky::new(h)
            .ok_or_else(|| Error::SingularSystem("decomposition Hessian".into()))?;
        let u: Vec<T> = chol.solve(&rhs).iter().copied().collect();
        let value = self.boundary_layer_energy(&u, k)? + self.network.interior_gap_energy(&u)?;
        let total = self.total_energy(&psi)?.total;
        let kk = T::count(k);
        let expected_discrepancy = (0..nb).fold(T::zero(), |acc, i| {
            let kappa = kk * self.rates[i];
            acc + self.network.boundary_sigma(i) / T::lit(4.0)
                * ((-kappa).exp() - (-T::lit(2.0) * kappa).exp())
        });
        Ok(Decomposition {
            value,
            discrepancy: total - value,
            expected_discrepancy,
            potentials: u,
        })
    }
}

/// One row of a frequency sweep with unit `cos kθ` data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub k: usize,
    pub epsilon: T,
    pub eta: T,
    pub regime: Regime,
    #[serde(rename = "E_net")]
    pub e_net: T,
    #[serde(rename = "E_ref")]
    pub e_ref: T,
    #[serde(rename = "R_res")]
    pub r_res: T,
    pub total: T,
    pub quad_form: T,
}

/// Breakdown of `cos kθ` for every `k` in `ks`, computed in parallel and
/// returned in input order.
pub fn sweep<T: Real>(model: &Asymptotics<T>, ks: &[usize]) -> Result<Vec<SweepRow<T>>> {
    ks.par_iter()
        .map(|&k| {
            let b = model.total_energy(&FourierPotential::cos_mode(k))?;
            let mode = model.regime_classify(k);
            Ok(SweepRow {
                k,
                epsilon: mode.epsilon,
                eta: mode.eta,
                regime: mode.regime,
                e_net: b.e_net,
                e_ref: b.e_ref,
                r_res: b.r_res,
                total: b.total,
                quad_form: b.quad_form,
            })
        })
        .collect()
}
