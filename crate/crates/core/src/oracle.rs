//! Direct numerical solution of the Dirichlet problem in the perforated disk
//! by least-squares collocation, used as a reference for the asymptotics.
//!
//! The potential is expanded in regular harmonics `(r/L)^m (cos mθ, sin mθ)`
//! of the outer disk plus decaying harmonics `(R_i/r_i)^m (cos mθ_i, sin mθ_i)`
//! about every inclusion. None of these carries net flux, so the inclusions
//! are automatically current-free; their potentials `U_i` are extra unknowns.

use std::f64::consts::{PI, TAU};

use faer::linalg::solvers::{Qr, SolveLstsq};
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::FourierPotential;
use crate::error::{Error, Result};
use crate::geometry::{analyze_packing, Packing};

/// Minimum `δ_min / R_min` accepted by the solver.
pub const GUARD_RATIO: f64 = 1e-3;
/// Largest accepted condition estimate of the scaled least-squares matrix.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Highest regular harmonic `M`.
    pub outer_order: usize,
    /// Highest decaying harmonic per inclusion.
    pub inclusion_order: usize,
    /// Collocation points per circle per harmonic order.
    pub oversample: usize,
    /// Residual above which a convergence warning is attached.
    pub residual_tolerance: f64,
}

impl OracleConfig {
    pub fn uniform(m: usize) -> Self {
        OracleConfig {
            outer_order: m,
            inclusion_order: m,
            oversample: 4,
            residual_tolerance: 1e-6,
        }
    }

    pub fn with_inclusion_order(self, inclusion_order: usize) -> Self {
        OracleConfig {
            inclusion_order,
            ..self
        }
    }

    /// Orders sized from the narrowest gaps: the outer trace varies on the
    /// scale `√(2Rδ)` near each boundary gap, the gap field between two
    /// disks needs about `√(R/δ)` multipoles per decade.
    pub fn auto(packing: &Packing<f64>, k_max: usize) -> Result<Self> {
        if packing.is_empty() {
            return Ok(Self::uniform(k_max.max(1)));
        }
        if k_max > 600 {
            return Err(Error::Invalid(format!(
                "frequency {k_max} is beyond the oracle range"
            )));
        }
        let a = analyze_packing(packing.clone())?;
        let l = a.domain_radius();
        let outer_scale = (0..a.boundary_count)
            .map(|i| (2.0 * a.radius(i) * a.boundary_gaps[i]).sqrt())
            .fold(f64::INFINITY, f64::min);
        let neighbor = a
            .gaps
            .iter()
            .map(|g| g.delta / a.radius(g.i).min(a.radius(g.j)));
        let boundary = (0..a.boundary_count).map(|i| a.boundary_gaps[i] / a.radius(i));
        let ratio = neighbor.chain(boundary).fold(f64::INFINITY, f64::min);
        let outer = ((8.0 * l / outer_scale).ceil() as usize)
            .max(2 * k_max)
            .clamp(16, 600);
        let inclusion = ((12.0 / ratio.sqrt()).ceil() as usize + 8).clamp(8, 120);
        Ok(OracleConfig {
            outer_order: outer,
            inclusion_order: inclusion,
            ..Self::uniform(outer)
        })
    }
}

/// Attached when the collocation residual exceeds the configured tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceWarning {
    pub boundary_residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSolution {
    /// `a_m`, `m = 0..=M`.
    pub domain_cos: Vec<f64>,
    /// `b_m`, `m = 0..=M`, with `b_0 = 0`.
    pub domain_sin: Vec<f64>,
    /// `c_{im}`, `m = 1..=M_i`, stored from index 0.
    pub inclusion_cos: Vec<Vec<f64>>,
    /// `d_{im}`, `m = 1..=M_i`.
    pub inclusion_sin: Vec<Vec<f64>>,
    pub potentials: Vec<f64>,
    pub energy: f64,
    pub boundary_residual: f64,
    pub condition_estimate: f64,
    pub warning: Option<ConvergenceWarning>,
    #[serde(skip)]
    packing: Packing<f64>,
}

impl SpectralSolution {
    /// The approximate potential at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let l = self.packing.domain_radius;
        let z = Complex64::new(x, y) / l;
        let mut zp = Complex64::new(1.0, 0.0);
        let mut u = 0.0;
        for m in 0..self.domain_cos.len() {
            u += self.domain_cos[m] * zp.re + self.domain_sin[m] * zp.im;
            zp *= z;
        }
        for (i, d) in self.packing.inclusions.iter().enumerate() {
            let w = d.r / (Complex64::new(x, y) - Complex64::new(d.x, d.y));
            let mut wp = w;
            for (c, s) in self.inclusion_cos[i].iter().zip(&self.inclusion_sin[i]) {
                // w^m = (R/ρ)^m e^{-imφ}
                u += c * wp.re - s * wp.im;
                wp *= w;
            }
        }
        u
    }

    pub fn packing(&self) -> &Packing<f64> {
        &self.packing
    }
}

/// Column layout: regular cos `0..=M`, regular sin `1..=M`, then per
/// inclusion `M_i` cos and `M_i` sin columns, then the `N` potentials.
struct Layout {
    m: usize,
    mi: usize,
    n: usize,
}

impl Layout {
    fn outer_sin(&self, m: usize) -> usize {
        self.m + m
    }
    fn inclusion(&self, i: usize) -> usize {
        2 * self.m + 1 + 2 * self.mi * i
    }
    fn potential(&self, i: usize) -> usize {
        2 * self.m + 1 + 2 * self.mi * self.n + i
    }
    fn cols(&self) -> usize {
        2 * self.m + 1 + (2 * self.mi + 1) * self.n
    }
}

/// A factored collocation system for one packing; solves any boundary data
/// up to the outer order.
pub struct SpectralSolver {
    packing: Packing<f64>,
    config: OracleConfig,
    layout: Layout,
    qr: Qr<f64>,
    rows: usize,
    col_scale: Vec<f64>,
    outer_theta: Vec<f64>,
    outer_weight: f64,
    condition: f64,
}

fn fill_row(
    a: &mut Mat<f64>,
    layout: &Layout,
    packing: &Packing<f64>,
    row: usize,
    z: Complex64,
    w: f64,
) {
    let zl = z / packing.domain_radius;
    let mut zp = Complex64::new(1.0, 0.0);
    for m in 0..=layout.m {
        a[(row, m)] = w * zp.re;
        if m > 0 {
            a[(row, layout.outer_sin(m))] = w * zp.im;
        }
        zp *= zl;
    }
    for (j, d) in packing.inclusions.iter().enumerate() {
        let q = d.r / (z - Complex64::new(d.x, d.y));
        let mut qp = q;
        let base = layout.inclusion(j);
        for m in 0..layout.mi {
            a[(row, base + m)] = w * qp.re;
            a[(row, base + layout.mi + m)] = -w * qp.im;
            qp *= q;
        }
    }
}

fn check_guard(packing: &Packing<f64>) -> Result<()> {
    if packing.is_empty() {
        if !(packing.domain_radius > 0.0 && packing.domain_radius.is_finite()) {
            return Err(Error::NonPositiveDomain);
        }
        return Ok(());
    }
    let a = analyze_packing(packing.clone())?;
    let delta_min = a.all_gap_widths().into_iter().fold(f64::INFINITY, f64::min);
    let r_min = a
        .packing
        .inclusions
        .iter()
        .map(|d| d.r)
        .fold(f64::INFINITY, f64::min);
    if delta_min / r_min < GUARD_RATIO {
        return Err(Error::OracleRefused(format!(
            "delta_min/R_min = {:.3e} is below {GUARD_RATIO:e}",
            delta_min / r_min
        )));
    }
    Ok(())
}

impl SpectralSolver {
    pub fn new(packing: &Packing<f64>, config: OracleConfig) -> Result<Self> {
        check_guard(packing)?;
        if config.outer_order == 0 || config.oversample == 0 {
            return Err(Error::Invalid("oracle orders must be positive".into()));
        }
        let n = packing.len();
        let layout = Layout {
            m: config.outer_order,
            mi: config.inclusion_order,
            n,
        };
        let l = packing.domain_radius;
        let p_out = config.oversample * config.outer_order;
        let p_in = config.oversample * config.inclusion_order.max(1);
        let rows = p_out + n * p_in;
        let cols = layout.cols();
        if rows < cols {
            return Err(Error::Invalid(
                "collocation system is underdetermined".into(),
            ));
        }
        let outer_weight = (TAU * l / p_out as f64).sqrt();
        let outer_theta: Vec<f64> = (0..p_out).map(|p| TAU * p as f64 / p_out as f64).collect();

        let mut a = Mat::<f64>::zeros(rows, cols);
        for (p, &t) in outer_theta.iter().enumerate() {
            fill_row(
                &mut a,
                &layout,
                packing,
                p,
                Complex64::from_polar(l, t),
                outer_weight,
            );
        }
        for (i, d) in packing.inclusions.iter().enumerate() {
            let w = (TAU * d.r / p_in as f64).sqrt();
            for q in 0..p_in {
                let row = p_out + i * p_in + q;
                let z = Complex64::new(d.x, d.y)
                    + Complex64::from_polar(d.r, TAU * q as f64 / p_in as f64);
                fill_row(&mut a, &layout, packing, row, z, w);
                a[(row, layout.potential(i))] = -w;
            }
        }

        let mut col_scale = vec![1.0; cols];
        for (c, s) in col_scale.iter_mut().enumerate() {
            let norm = a.col(c).norm_l2();
            if norm > 0.0 {
                *s = norm;
                for r in 0..rows {
                    a[(r, c)] /= norm;
                }
            }
        }
        let qr = a.qr();
        let r = qr.thin_R();
        let diag: Vec<f64> = (0..cols).map(|c| r[(c, c)].abs()).collect();
        let dmax = diag.iter().copied().fold(0.0, f64::max);
        let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if dmin > 0.0 {
            dmax / dmin
        } else {
            f64::INFINITY
        };
        if condition.is_nan() || condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned(condition));
        }
        Ok(SpectralSolver {
            packing: packing.clone(),
            config,
            layout,
            qr,
            rows,
            col_scale,
            outer_theta,
            outer_weight,
            condition,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, psi: &FourierPotential<f64>) -> Result<SpectralSolution> {
        Ok(self
            .solve_many(std::slice::from_ref(psi))?
            .pop()
            .expect("one solution"))
    }

    /// Solves several boundary data with the one factorization.
    pub fn solve_many(&self, data: &[FourierPotential<f64>]) -> Result<Vec<SpectralSolution>> {
        let lay = &self.layout;
        if let Some(psi) = data.iter().find(|p| p.max_frequency() > lay.m) {
            return Err(Error::Invalid(format!(
                "data frequency {} exceeds the oracle order {}",
                psi.max_frequency(),
                lay.m
            )));
        }
        let rows = self.rows;
        let mut rhs = Mat::<f64>::zeros(rows, data.len());
        for (j, psi) in data.iter().enumerate() {
            for (p, &t) in self.outer_theta.iter().enumerate() {
                rhs[(p, j)] = self.outer_weight * psi.eval(t);
            }
        }
        let x = self.qr.solve_lstsq(&rhs);
        Ok(data
            .iter()
            .enumerate()
            .map(|(j, psi)| {
                let coef: Vec<f64> = (0..lay.cols())
                    .map(|c| x[(c, j)] / self.col_scale[c])
                    .collect();
                self.unpack(&coef, psi)
            })
            .collect())
    }

    fn unpack(&self, coef: &[f64], psi: &FourierPotential<f64>) -> SpectralSolution {
        let lay = &self.layout;
        let domain_cos = coef[..=lay.m].to_vec();
        let mut domain_sin = vec![0.0; lay.m + 1];
        for m in 1..=lay.m {
            domain_sin[m] = coef[lay.outer_sin(m)];
        }
        let (mut inclusion_cos, mut inclusion_sin) = (Vec::new(), Vec::new());
        for i in 0..lay.n {
            let base = lay.inclusion(i);
            inclusion_cos.push(coef[base..base + lay.mi].to_vec());
            inclusion_sin.push(coef[base + lay.mi..base + 2 * lay.mi].to_vec());
        }
        let potentials = (0..lay.n).map(|i| coef[lay.potential(i)]).collect();
        let mut sol = SpectralSolution {
            domain_cos,
            domain_sin,
            inclusion_cos,
            inclusion_sin,
            potentials,
            energy: 0.0,
            boundary_residual: 0.0,
            condition_estimate: self.condition,
            warning: None,
            packing: self.packing.clone(),
        };
        sol.energy = self.flux_energy(&sol, psi);
        sol.boundary_residual = self.residual(&sol, psi);
        if sol.boundary_residual.is_nan() || sol.boundary_residual > self.config.residual_tolerance
        {
            sol.warning = Some(ConvergenceWarning {
                boundary_residual: sol.boundary_residual,
                tolerance: self.config.residual_tolerance,
            });
        }
        sol
    }

    /// `½ ∮_Γ ψ ∂_r u ds`, exact in the coefficients.
    fn flux_energy(&self, sol: &SpectralSolution, psi: &FourierPotential<f64>) -> f64 {
        let l = self.packing.domain_radius;
        let modes: Vec<usize> = psi.active_modes().into_iter().filter(|&k| k > 0).collect();
        let k_max = match modes.last() {
            Some(&k) => k,
            None => return 0.0,
        };
        // ∮ cos kθ ∂_r u L dθ and ∮ sin kθ ∂_r u L dθ
        let mut flux_c: Vec<f64> = (0..=k_max)
            .map(|k| PI * k as f64 * sol.domain_cos[k])
            .collect();
        let mut flux_s: Vec<f64> = (0..=k_max)
            .map(|k| PI * k as f64 * sol.domain_sin[k])
            .collect();
        for (i, d) in self.packing.inclusions.iter().enumerate() {
            let c = Complex64::new(d.x, d.y) / l;
            let rl = d.r / l;
            for m in 1..=self.layout.mi.min(k_max) {
                let gamma =
                    Complex64::new(sol.inclusion_cos[i][m - 1], sol.inclusion_sin[i][m - 1]);
                // outer expansion of (R/(z−c))^m: radial derivative coefficients
                // A_p = −m (R/L)^m C(p,m) (c/L)^{p−m} / L
                let mut a_p = Complex64::new(-(m as f64) * rl.powi(m as i32) / l, 0.0);
                for p in m..=k_max {
                    if p > m {
                        a_p *= c * (p as f64 / (p - m) as f64);
                    }
                    let g = gamma * a_p;
                    flux_c[p] += l * PI * g.re;
                    flux_s[p] += l * PI * g.im;
                }
            }
        }
        0.5 * modes
            .iter()
            .map(|&k| psi.cos_coeff(k) * flux_c[k] + psi.sin_coeff(k) * flux_s[k])
            .sum::<f64>()
    }

    /// Largest unweighted collocation error.
    fn residual(&self, sol: &SpectralSolution, psi: &FourierPotential<f64>) -> f64 {
        let l = self.packing.domain_radius;
        let mut worst = self
            .outer_theta
            .iter()
            .map(|&t| (sol.eval(l * t.cos(), l * t.sin()) - psi.eval(t)).abs())
            .fold(0.0, f64::max);
        let p_in = self.config.oversample * self.config.inclusion_order.max(1);
        for (i, d) in self.packing.inclusions.iter().enumerate() {
            for q in 0..p_in {
                let t = TAU * q as f64 / p_in as f64;
                let e = sol.eval(d.x + d.r * t.cos(), d.y + d.r * t.sin()) - sol.potentials[i];
                worst = worst.max(e.abs());
            }
        }
        worst
    }
}

pub fn solve_dirichlet(
    packing: &Packing<f64>,
    psi: &FourierPotential<f64>,
    config: OracleConfig,
) -> Result<SpectralSolution> {
    SpectralSolver::new(packing, config)?.solve(psi)
}

/// `⟨ψ, Λψ⟩ = 2E(ψ)`.
pub fn quad_form_oracle(
    packing: &Packing<f64>,
    psi: &FourierPotential<f64>,
    config: OracleConfig,
) -> Result<f64> {
    Ok(2.0 * solve_dirichlet(packing, psi, config)?.energy)
}

/// `⟨ψ_a, Λψ_b⟩` by polarization.
pub fn cross_form_oracle(
    packing: &Packing<f64>,
    psi_a: &FourierPotential<f64>,
    psi_b: &FourierPotential<f64>,
    config: OracleConfig,
) -> Result<f64> {
    let solver = SpectralSolver::new(packing, config)?;
    let sum = psi_a.combine(1.0, psi_b, 1.0);
    let sols = solver.solve_many(&[sum, psi_a.clone(), psi_b.clone()])?;
    let q: Vec<f64> = sols.iter().map(|s| 2.0 * s.energy).collect();
    Ok((q[0] - q[1] - q[2]) / 2.0)
}

fn integrate_even(f: impl Fn(f64) -> f64, x_max: f64) -> f64 {
    let coarse = quadrature::integrate(&f, 0.0, x_max, 1e-6).integral;
    let fine = quadrature::integrate(&f, 0.0, x_max, 1e-11 * coarse.abs().max(1e-300));
    2.0 * fine.integral
}

/// `½ ∫_{−X}^{X} dx / h(x)` across the gap between two disks,
/// `h(x) = δ + (1 − √(1 − x²/R_i²)) R_i + (1 − √(1 − x²/R_j²)) R_j`,
/// `X = min(R_i, R_j)`.
pub fn gap_energy_quadrature(r_i: f64, r_j: f64, delta: f64) -> Result<f64> {
    if !(r_i > 0.0 && r_j > 0.0 && delta > 0.0) || !(r_i + r_j + delta).is_finite() {
        return Err(Error::Domain(
            "radii and gap must be positive and finite".into(),
        ));
    }
    let cap = |x: f64, r: f64| r * (1.0 - (1.0 - (x / r).powi(2)).max(0.0).sqrt());
    let h = |x: f64| delta + cap(x, r_i) + cap(x, r_j);
    Ok(0.5 * integrate_even(|x| 1.0 / h(x), r_i.min(r_j)))
}

/// Gap to a flat wall: `h(x) = δ + R(1 − √(1 − x²/R²))` on `[−R, R]`.
pub fn wall_gap_energy_quadrature(r: f64, delta: f64) -> Result<f64> {
    if !(r > 0.0 && delta > 0.0) || !(r + delta).is_finite() {
        return Err(Error::Domain(
            "radius and gap must be positive and finite".into(),
        ));
    }
    let h = |x: f64| delta + r * (1.0 - (1.0 - (x / r).powi(2)).max(0.0).sqrt());
    Ok(0.5 * integrate_even(|x| 1.0 / h(x), r))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub pass: bool,
    pub psi_min: f64,
    pub psi_max: f64,
    pub potentials_min: f64,
    pub potentials_max: f64,
    pub interior_min: f64,
    pub interior_max: f64,
    pub tolerance: f64,
    pub boundary_residual: f64,
    pub samples: usize,
}

/// Checks `min ψ ≤ U_i, u ≤ max ψ` up to `10 ×` the collocation residual,
/// sampling `u` on a polar grid of the perforated domain.
pub fn max_principle_check(
    solution: &SpectralSolution,
    psi: &FourierPotential<f64>,
) -> MaxPrincipleReport {
    let packing = solution.packing();
    let l = packing.domain_radius;
    let n_theta = 64 * psi.max_frequency().max(1) + 256;
    let (psi_min, psi_max) = (0..n_theta)
        .map(|p| psi.eval(TAU * p as f64 / n_theta as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    let tolerance = 10.0 * solution.boundary_residual + 1e-12 * psi_max.abs().max(psi_min.abs());
    let (potentials_min, potentials_max) = solution
        .potentials
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (mut interior_min, mut interior_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut samples = 0;
    let (n_r, n_t) = (40, 128);
    for a in 1..n_r {
        let r = l * a as f64 / n_r as f64;
        for b in 0..n_t {
            let t = TAU * (b as f64 + 0.5 * (a % 2) as f64) / n_t as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            let inside = packing
                .inclusions
                .iter()
                .any(|d| (x - d.x).hypot(y - d.y) <= d.r);
            if inside {
                continue;
            }
            let u = solution.eval(x, y);
            interior_min = interior_min.min(u);
            interior_max = interior_max.max(u);
            samples += 1;
        }
    }
    let lo = psi_min - tolerance;
    let hi = psi_max + tolerance;
    let within = |a: f64, b: f64| a == f64::INFINITY || (a >= lo && b <= hi);
    MaxPrincipleReport {
        pass: within(potentials_min, potentials_max) && within(interior_min, interior_max),
        psi_min,
        psi_max,
        potentials_min,
        potentials_max,
        interior_min,
        interior_max,
        tolerance,
        boundary_residual: solution.boundary_residual,
        samples,
    }
}
