//! Resistor network of the gaps and its discrete Dirichlet-to-Neumann map.
//!
//! Interior nodes sit at the inclusion centers, one boundary node sits at the
//! closest boundary point of each boundary inclusion. A gap edge joins every
//! pair of Voronoi neighbors; a boundary edge joins each boundary node to its
//! inclusion. Edge conductivities are the leading-order gap fluxes
//! `π √(R/δ)` (between disks) and `π √(2R/δ)` (disk to boundary), or their
//! unequal-radius forms.

use std::collections::VecDeque;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{GeometryAnalysis, Point};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductivityMode {
    /// All radii equal: `σ_ij = π√(R/δ_ij)`, `σ_i = π√(2R/δ_i)`.
    #[default]
    Identical,
    /// Per-inclusion radii: `σ_ij = π√(2 R_i R_j / (δ_ij (R_i + R_j)))`,
    /// `σ_i = π√(2 R_i/δ_i)`.
    Generalized,
}

impl std::str::FromStr for ConductivityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identical" => Ok(ConductivityMode::Identical),
            "generalized" => Ok(ConductivityMode::Generalized),
            other => Err(Error::Invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NetworkOptions<T> {
    pub mode: ConductivityMode,
    /// Drop gap edges wider than this.
    pub delta_max_edge: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapEdge<T> {
    pub i: usize,
    pub j: usize,
    pub sigma: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryEdge<T> {
    /// Inclusion (and boundary node) index.
    pub i: usize,
    pub sigma: T,
    pub theta: T,
}

#[derive(Clone, Debug)]
pub struct Network<T> {
    pub interior_nodes: Vec<Point<T>>,
    pub boundary_nodes: Vec<Point<T>>,
    /// One entry per unordered pair, `i < j`.
    pub gap_edges: Vec<GapEdge<T>>,
    /// Edge `k` joins boundary node `k` to inclusion `k`.
    pub boundary_edges: Vec<BoundaryEdge<T>>,
}

/// Cholesky factor of the Kirchhoff matrix of one network.
#[derive(Clone, Debug)]
pub struct KirchhoffFactor<T: Real>(Cholesky<T, Dyn>);

/// Kirchhoff solution for given boundary potentials.
#[derive(Clone, Debug)]
pub struct KirchhoffSolution<T: Real> {
    pub potentials: DVector<T>,
    pub energy: T,
    pub residual_norm: T,
}

pub fn gap_conductivity<T: Real>(mode: ConductivityMode, ri: T, rj: T, delta: T) -> T {
    match mode {
        ConductivityMode::Identical => T::pi() * (ri / delta).sqrt(),
        ConductivityMode::Generalized => {
            T::pi() * (T::lit(2.0) * ri * rj / (delta * (ri + rj))).sqrt()
        }
    }
}

pub fn boundary_conductivity<T: Real>(r: T, delta: T) -> T {
    T::pi() * (T::lit(2.0) * r / delta).sqrt()
}

pub fn build_network<T: Real>(
    analysis: &GeometryAnalysis<T>,
    mode: ConductivityMode,
) -> Result<Network<T>> {
    build_network_with(
        analysis,
        &NetworkOptions {
            mode,
            delta_max_edge: None,
        },
    )
}

pub fn build_network_with<T: Real>(
    analysis: &GeometryAnalysis<T>,
    options: &NetworkOptions<T>,
) -> Result<Network<T>> {
    let inc = &analysis.packing.inclusions;
    if options.mode == ConductivityMode::Identical {
        let r0 = inc[0].r;
        if let Some(d) = inc.iter().find(|d| (d.r - r0).mag() > T::lit(1e-12) * r0) {
            return Err(Error::Mode(r0.as_f64(), d.r.as_f64()));
        }
    }
    let gap_edges = analysis
        .gaps
        .iter()
        .filter(|g| options.delta_max_edge.is_none_or(|cut| g.delta <= cut))
        .map(|g| GapEdge {
            i: g.i,
            j: g.j,
            sigma: gap_conductivity(options.mode, inc[g.i].r, inc[g.j].r, g.delta),
        })
        .collect();
    let boundary_edges = (0..analysis.boundary_count)
        .map(|i| BoundaryEdge {
            i,
            sigma: boundary_conductivity(inc[i].r, analysis.boundary_gaps[i]),
            theta: analysis.boundary_angles[i],
        })
        .collect();
    Ok(Network {
        interior_nodes: analysis.packing.centers(),
        boundary_nodes: analysis.boundary_nodes.clone(),
        gap_edges,
        boundary_edges,
    })
}

impl<T: Real> Network<T> {
    pub fn inclusion_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn boundary_sigma(&self, i: usize) -> T {
        self.boundary_edges[i].sigma
    }

    /// Weighted Laplacian of the gap edges alone, on the inclusion nodes.
    pub fn gap_laplacian(&self) -> DMatrix<T> {
        let n = self.inclusion_count();
        let mut g = DMatrix::zeros(n, n);
        for e in &self.gap_edges {
            g[(e.i, e.i)] += e.sigma;
            g[(e.j, e.j)] += e.sigma;
            g[(e.i, e.j)] -= e.sigma;
            g[(e.j, e.i)] -= e.sigma;
        }
        g
    }

    /// Inclusion block of the full network Laplacian (gap Laplacian plus the
    /// boundary-edge conductivities on the diagonal).
    pub fn inclusion_block(&self) -> DMatrix<T> {
        let mut k = self.gap_laplacian();
        for e in &self.boundary_edges {
            k[(e.i, e.i)] += e.sigma;
        }
        k
    }

    /// First inclusion with no gap-edge path to a boundary inclusion, if any.
    pub fn unanchored_inclusion(&self) -> Option<usize> {
        let n = self.inclusion_count();
        let mut adj = vec![Vec::new(); n];
        for e in &self.gap_edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = self.boundary_edges.iter().map(|e| e.i).collect();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Factors the Kirchhoff matrix once for repeated solves.
    pub fn factorize(&self) -> Result<KirchhoffFactor<T>> {
        self.factor().map(KirchhoffFactor)
    }

    fn factor(&self) -> Result<Cholesky<T, Dyn>> {
        if self.boundary_edges.is_empty() {
            return Err(Error::SingularSystem("no boundary edges".into()));
        }
        if let Some(i) = self.unanchored_inclusion() {
            return Err(Error::SingularSystem(format!(
                "inclusion {i} is not connected to any boundary node"
            )));
        }
        Cholesky::new(self.inclusion_block())
            .ok_or_else(|| Error::SingularSystem("Kirchhoff matrix not positive definite".into()))
    }

    /// `E^net` of the network at potentials `u` for boundary data `psi`.
    pub fn energy_at(&self, u: &DVector<T>, psi: &[T]) -> T {
        let half = T::lit(0.5);
        let bnd = self.boundary_edges.iter().fold(T::zero(), |acc, e| {
            let d = u[e.i] - psi[e.i];
            acc + half * e.sigma * d * d
        });
        let gap = self.gap_edges.iter().fold(T::zero(), |acc, e| {
            let d = u[e.i] - u[e.j];
            acc + half * e.sigma * d * d
        });
        bnd + gap
    }

    fn check_psi(&self, psi: &[T]) -> Result<()> {
        if psi.len() != self.boundary_count() {
            return Err(Error::Invalid(format!(
                "expected {} boundary potentials, got {}",
                self.boundary_count(),
                psi.len()
            )));
        }
        Ok(())
    }

    /// Solves Kirchhoff's current law at every inclusion node.
    pub fn solve_kirchhoff(&self, psi: &[T]) -> Result<KirchhoffSolution<T>> {
        self.check_psi(psi)?;
        let factor = self.factorize()?;
        self.solve_factored(&factor, psi)
    }

    /// As [`Network::solve_kirchhoff`] with a factor from [`Network::factorize`].
    pub fn solve_factored(
        &self,
        factor: &KirchhoffFactor<T>,
        psi: &[T],
    ) -> Result<KirchhoffSolution<T>> {
        self.check_psi(psi)?;
        let chol = &factor.0;
        let n = self.inclusion_count();
        let mut rhs = DVector::zeros(n);
        for e in &self.boundary_edges {
            rhs[e.i] = e.sigma * psi[e.i];
        }
        let u = chol.solve(&rhs);
        let residual_norm = (self.inclusion_block() * &u - &rhs).norm();
        let energy = self.energy_at(&u, psi);
        Ok(KirchhoffSolution {
            potentials: u,
            energy,
            residual_norm,
        })
    }

    pub fn net_energy(&self, psi: &[T]) -> Result<T> {
        Ok(self.solve_kirchhoff(psi)?.energy)
    }

    /// Schur complement of the full Laplacian onto the boundary nodes:
    /// `Λ = D − Bᵀ K⁻¹ B` with `D = B = diag(σ_i)` padded to the inclusion
    /// count. `ψ·Λψ = 2 E^net(ψ)`.
    pub fn dtn_matrix(&self) -> Result<DMatrix<T>> {
        let chol = self.factor()?;
        let n = self.inclusion_count();
        let nb = self.boundary_count();
        let mut b = DMatrix::zeros(n, nb);
        for e in &self.boundary_edges {
            b[(e.i, e.i)] = e.sigma;
        }
        let x = chol.solve(&b);
        let mut lambda = -(b.transpose() * x);
        for e in &self.boundary_edges {
            lambda[(e.i, e.i)] += e.sigma;
        }
        #[cfg(debug_assertions)]
        self.check_dtn(&lambda);
        Ok(lambda)
    }

    /// Debug-build self check of `ψ·Λψ = 2E^net(ψ)` on a few fixed vectors.
    #[cfg(debug_assertions)]
    fn check_dtn(&self, lambda: &DMatrix<T>) {
        use rand::{Rng, SeedableRng};
        if T::eps() > T::lit(1e-10) {
            return;
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let nb = self.boundary_count();
        for _ in 0..4 {
            let psi: Vec<T> = (0..nb)
                .map(|_| T::lit(rng.random_range(-1.0..1.0)))
                .collect();
            let v = DVector::from_column_slice(&psi);
            let q = v.dot(&(lambda * &v));
            let e = self
                .net_energy(&psi)
                .expect("factorization already succeeded");
            let smax = self
                .boundary_edges
                .iter()
                .fold(T::zero(), |m, e| m.max(e.sigma));
            let scale = q.mag().max(smax * v.norm_squared());
            debug_assert!(
                (q - T::lit(2.0) * e).mag() <= T::lit(1e-10) * scale,
                "dtn quadratic form disagrees with the network energy"
            );
        }
    }

    /// Schur complement of the gap Laplacian onto the boundary inclusions:
    /// `E_Π(U^Γ) = ½ U^Γ·S U^Γ`, the gap energy with interior potentials
    /// relaxed.
    pub fn gap_schur(&self) -> Result<DMatrix<T>> {
        let n = self.inclusion_count();
        let nb = self.boundary_count();
        let g = self.gap_laplacian();
        let gbb = g.view((0, 0), (nb, nb)).into_owned();
        if n == nb {
            return Ok(gbb);
        }
        if let Some(i) = self.unanchored_inclusion() {
            return Err(Error::FloatingComponent(i));
        }
        let gii = g.view((nb, nb), (n - nb, n - nb)).into_owned();
        let gib = g.view((nb, 0), (n - nb, nb)).into_owned();
        let chol = Cholesky::new(gii).ok_or(Error::FloatingComponent(nb))?;
        let x = chol.solve(&gib);
        Ok(gbb - gib.transpose() * x)
    }

    /// Minimum gap energy over the interior potentials, the first `N^Γ`
    /// inclusion potentials held at `u_gamma`.
    pub fn interior_gap_energy(&self, u_gamma: &[T]) -> Result<T> {
        self.check_psi(u_gamma)?;
        let s = self.gap_schur()?;
        let v = DVector::from_column_slice(u_gamma);
        Ok(T::lit(0.5) * v.dot(&(s * &v)))
    }

    pub fn dump(&self) -> NetworkDump<T> {
        let nodes = self
            .interior_nodes
            .iter()
            .enumerate()
            .map(|(index, p)| DumpNode {
                kind: "inclusion",
                index,
                x: p.x,
                y: p.y,
            })
            .chain(
                self.boundary_nodes
                    .iter()
                    .enumerate()
                    .map(|(index, p)| DumpNode {
                        kind: "boundary",
                        index,
                        x: p.x,
                        y: p.y,
                    }),
            )
            .collect();
        NetworkDump {
            nodes,
            edges: self.gap_edges.clone(),
            boundary_edges: self.boundary_edges.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DumpNode<T> {
    pub kind: &'static str,
    pub index: usize,
    pub x: T,
    pub y: T,
}

/// JSON view of a network for external inspection.
#[derive(Clone, Debug, Serialize)]
pub struct NetworkDump<T> {
    pub nodes: Vec<DumpNode<T>>,
    pub edges: Vec<GapEdge<T>>,
    pub boundary_edges: Vec<BoundaryEdge<T>>,
}
