//! Disk packings: validation, Voronoi neighbors, boundary classification.
//!
//! Inclusions are disks inside the domain disk `|x| < L` centered at the
//! origin. Two inclusions are neighbors when the Voronoi cells of their
//! centers, clipped to the domain, share an edge of positive length. An
//! inclusion neighbors the boundary when its clipped cell meets the circle
//! `|x| = L`.
//!
//! Both tests are done exactly: a cell restricted to a line (the
//! perpendicular bisector) or to a circle (the boundary) is an intersection of
//! half-planes, so it reduces to intersecting intervals or arcs.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn norm_sq(self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn minus(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn dist(self, o: Self) -> T {
        self.minus(o).norm()
    }

    pub fn rotated(self, phi: T) -> Self {
        let (s, c) = (phi.sin(), phi.cos());
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// One disk inclusion. Field names match the packing file schema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inclusion<T> {
    pub x: T,
    pub y: T,
    pub r: T,
}

impl<T: Real> Inclusion<T> {
    pub fn new(x: T, y: T, r: T) -> Self {
        Inclusion { x, y, r }
    }

    pub fn center(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }
}

/// Domain radius plus the list of inclusion disks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Packing<T> {
    #[serde(rename = "L")]
    pub domain_radius: T,
    pub inclusions: Vec<Inclusion<T>>,
}

impl<T: Real> Packing<T> {
    pub fn new(domain_radius: T, inclusions: Vec<Inclusion<T>>) -> Self {
        Packing {
            domain_radius,
            inclusions,
        }
    }

    pub fn len(&self) -> usize {
        self.inclusions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inclusions.is_empty()
    }

    pub fn centers(&self) -> Vec<Point<T>> {
        self.inclusions.iter().map(Inclusion::center).collect()
    }

    /// Rotates every center about the origin by `phi`.
    pub fn rotated(&self, phi: T) -> Self {
        let inclusions = self
            .inclusions
            .iter()
            .map(|d| {
                let c = d.center().rotated(phi);
                Inclusion::new(c.x, c.y, d.r)
            })
            .collect();
        Packing::new(self.domain_radius, inclusions)
    }

    /// Multiplies every length by `s`.
    pub fn scaled(&self, s: T) -> Self {
        let inclusions = self
            .inclusions
            .iter()
            .map(|d| Inclusion::new(d.x * s, d.y * s, d.r * s))
            .collect();
        Packing::new(self.domain_radius * s, inclusions)
    }

    /// Parses the JSON packing schema and checks that every number is finite
    /// and every radius positive. Geometric validity is checked separately by
    /// [`validate_packing`] so that empty packings can still be read.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Packing<T> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.check_numbers()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("packing serializes")
    }

    fn check_numbers(&self) -> Result<()> {
        if !self.domain_radius.is_finite() {
            return Err(Error::NonFinite("L".into()));
        }
        if self.domain_radius <= T::zero() {
            return Err(Error::NonPositiveDomain);
        }
        for (i, d) in self.inclusions.iter().enumerate() {
            if !(d.x.is_finite() && d.y.is_finite() && d.r.is_finite()) {
                return Err(Error::NonFinite(format!("inclusion {i}")));
            }
            if d.r <= T::zero() {
                return Err(Error::NonPositiveRadius(i));
            }
        }
        Ok(())
    }
}

/// Checks the packing invariants and hands the packing back unchanged.
pub fn validate_packing<T: Real>(packing: Packing<T>) -> Result<Packing<T>> {
    packing.check_numbers()?;
    if packing.is_empty() {
        return Err(Error::EmptyPacking);
    }
    let l = packing.domain_radius;
    for (i, d) in packing.inclusions.iter().enumerate() {
        if d.center().norm() + d.r >= l {
            return Err(Error::OutsideDomain(i));
        }
    }
    for (i, a) in packing.inclusions.iter().enumerate() {
        for (j, b) in packing.inclusions.iter().enumerate().skip(i + 1) {
            if a.center().dist(b.center()) <= a.r + b.r {
                return Err(Error::Overlap(i, j));
            }
        }
    }
    Ok(packing)
}

/// Parameter interval `(lo, hi)` along the bisector of `i` and `j` on which
/// points are strictly closer to `x_i` and `x_j` than to any other center and
/// lie inside the domain. `t` is arc length from the midpoint.
pub fn bisector_edge<T: Real>(packing: &Packing<T>, i: usize, j: usize) -> Option<(T, T)> {
    let centers = packing.centers();
    let (xi, xj) = (centers[i], centers[j]);
    let d = xj.minus(xi);
    let len = d.norm();
    let mid = Point::new((xi.x + xj.x) * T::lit(0.5), (xi.y + xj.y) * T::lit(0.5));
    let dir = Point::new(-d.y / len, d.x / len);

    // |mid + t dir| <= L
    let l = packing.domain_radius;
    let b = mid.dot(dir);
    let disc = b * b - (mid.norm_sq() - l * l);
    if disc <= T::zero() {
        return None;
    }
    let root = disc.sqrt();
    let (mut lo, mut hi) = (-b - root, -b + root);

    for (k, xk) in centers.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        // |z - x_i|^2 < |z - x_k|^2  <=>  2 z.(x_k - x_i) < |x_k|^2 - |x_i|^2
        let e = xk.minus(xi);
        let a = T::lit(2.0) * dir.dot(e);
        let rhs = xk.norm_sq() - xi.norm_sq() - T::lit(2.0) * mid.dot(e);
        let scale = e.norm() * (l + e.norm());
        if a.mag() <= T::eps() * scale {
            if rhs <= T::zero() {
                return None;
            }
        } else if a > T::zero() {
            hi = hi.min(rhs / a);
        } else {
            lo = lo.max(rhs / a);
        }
        if hi <= lo {
            return None;
        }
    }
    Some((lo, hi))
}

/// Neighbor sets `N_i` of a validated packing (sorted, 0-based).
pub fn compute_adjacency<T: Real>(packing: &Packing<T>) -> Vec<Vec<usize>> {
    let n = packing.len();
    let tol = T::lit(1e-10).max(T::lit(1000.0) * T::eps()) * packing.domain_radius;
    let mut sets = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some((lo, hi)) = bisector_edge(packing, i, j) {
                if hi - lo > tol {
                    sets[i].push(j);
                    sets[j].push(i);
                }
            }
        }
    }
    sets
}

/// Arcs of the boundary circle, as sorted disjoint intervals in `[0, 2π)`.
#[derive(Clone, Debug)]
struct ArcSet(Vec<(f64, f64)>);

impl ArcSet {
    fn full() -> Self {
        ArcSet(vec![(0.0, TAU)])
    }

    /// The arc `start + (0, len)`, wrapped into `[0, 2π)`.
    fn arc(start: f64, len: f64) -> Self {
        let s = start.rem_euclid(TAU);
        let e = s + len;
        if e <= TAU {
            ArcSet(vec![(s, e)])
        } else {
            ArcSet(vec![(0.0, e - TAU), (s, TAU)])
        }
    }

    fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        for &(a0, a1) in &self.0 {
            for &(b0, b1) in &other.0 {
                let (lo, hi) = (a0.max(b0), a1.min(b1));
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        ArcSet(out)
    }

    fn measure(&self) -> f64 {
        self.0.iter().map(|(a, b)| b - a).sum()
    }
}

/// Total angle of the boundary circle on which inclusion `i` is the nearest
/// center.
pub fn boundary_arc_measure<T: Real>(packing: &Packing<T>, i: usize) -> f64 {
    let l = packing.domain_radius.as_f64();
    let centers: Vec<(f64, f64)> = packing
        .centers()
        .iter()
        .map(|c| (c.x.as_f64(), c.y.as_f64()))
        .collect();
    let (xi, yi) = centers[i];
    let mut set = ArcSet::full();
    for (k, &(xk, yk)) in centers.iter().enumerate() {
        if k == i {
            continue;
        }
        // A cos θ + B sin θ < C
        let (ex, ey) = (xk - xi, yk - yi);
        let (a, b) = (2.0 * l * ex, 2.0 * l * ey);
        let c = xk * xk + yk * yk - xi * xi - yi * yi;
        let rho = a.hypot(b);
        if c >= rho {
            continue;
        }
        if c <= -rho {
            return 0.0;
        }
        let phi = b.atan2(a);
        let alpha = (c / rho).acos();
        set = set.intersect(&ArcSet::arc(phi + alpha, TAU - 2.0 * alpha));
        if set.0.is_empty() {
            return 0.0;
        }
    }
    set.measure()
}

/// A gap between two neighboring inclusions (indices after renumbering, `i < j`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap<T> {
    pub i: usize,
    pub j: usize,
    pub delta: T,
}

/// Neighbor structure of a packing, renumbered so that the boundary
/// inclusions come first in counterclockwise order of their polar angle.
#[derive(Clone, Debug)]
pub struct GeometryAnalysis<T> {
    /// The renumbered packing.
    pub packing: Packing<T>,
    /// `original_index[i]` is the position of inclusion `i` in the input.
    pub original_index: Vec<usize>,
    pub neighbor_sets: Vec<Vec<usize>>,
    /// One entry per unordered neighbor pair.
    pub gaps: Vec<Gap<T>>,
    pub boundary_count: usize,
    pub boundary_gaps: Vec<T>,
    pub boundary_angles: Vec<T>,
    pub boundary_nodes: Vec<Point<T>>,
    /// Set when a boundary inclusion sits exactly at the origin and was given
    /// the angle 0 by convention.
    pub centered_inclusion: bool,
}

impl<T: Real> GeometryAnalysis<T> {
    pub fn len(&self) -> usize {
        self.packing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packing.is_empty()
    }

    pub fn domain_radius(&self) -> T {
        self.packing.domain_radius
    }

    pub fn radius(&self, i: usize) -> T {
        self.packing.inclusions[i].r
    }

    pub fn gap(&self, i: usize, j: usize) -> Option<T> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.gaps
            .iter()
            .find(|g| g.i == a && g.j == b)
            .map(|g| g.delta)
    }

    /// All gap widths: the neighbor gaps followed by the boundary gaps.
    pub fn all_gap_widths(&self) -> Vec<T> {
        self.gaps
            .iter()
            .map(|g| g.delta)
            .chain(self.boundary_gaps.iter().copied())
            .collect()
    }

    /// Geometric mean of every gap width.
    pub fn characteristic_gap(&self) -> T {
        let all = self.all_gap_widths();
        let n = T::count(all.len().max(1));
        let log_sum = all.iter().fold(T::zero(), |acc, d| acc + d.ln());
        (log_sum / n).exp()
    }

    /// Arithmetic mean radius.
    pub fn characteristic_radius(&self) -> T {
        let n = T::count(self.len().max(1));
        self.packing
            .inclusions
            .iter()
            .fold(T::zero(), |acc, d| acc + d.r)
            / n
    }

    pub fn radii_equal(&self) -> bool {
        let r0 = self.packing.inclusions[0].r;
        self.packing.inclusions.iter().all(|d| d.r == r0)
    }
}

fn polar_angle<T: Real>(c: Point<T>) -> T {
    if c.x == T::zero() && c.y == T::zero() {
        return T::zero();
    }
    let th = c.y.atan2(c.x);
    if th < T::zero() {
        th + T::two_pi()
    } else {
        th
    }
}

/// Finds the boundary inclusions, computes their gaps and angles, and
/// renumbers everything boundary-first.
pub fn classify_boundary<T: Real>(
    packing: &Packing<T>,
    neighbor_sets: &[Vec<usize>],
) -> Result<GeometryAnalysis<T>> {
    let n = packing.len();
    let l = packing.domain_radius;
    let tol = 1e-12;

    let mut boundary: Vec<(usize, T)> = (0..n)
        .filter(|&i| boundary_arc_measure(packing, i) > tol)
        .map(|i| (i, polar_angle(packing.inclusions[i].center())))
        .collect();
    boundary.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite angles"));
    for w in boundary.windows(2) {
        if (w[1].1 - w[0].1).mag() <= T::lit(1e-14) {
            return Err(Error::DegenerateAngle(w[0].0, w[1].0));
        }
    }

    let is_boundary: Vec<bool> = {
        let mut v = vec![false; n];
        for &(i, _) in &boundary {
            v[i] = true;
        }
        v
    };
    let original_index: Vec<usize> = boundary
        .iter()
        .map(|&(i, _)| i)
        .chain((0..n).filter(|&i| !is_boundary[i]))
        .collect();
    let mut new_index = vec![0; n];
    for (new, &old) in original_index.iter().enumerate() {
        new_index[old] = new;
    }

    let inclusions: Vec<_> = original_index
        .iter()
        .map(|&o| packing.inclusions[o])
        .collect();
    let renumbered = Packing::new(l, inclusions);

    let neighbor_sets: Vec<Vec<usize>> = original_index
        .iter()
        .map(|&o| {
            let mut s: Vec<usize> = neighbor_sets[o].iter().map(|&j| new_index[j]).collect();
            s.sort_unstable();
            s
        })
        .collect();

    let mut gaps = Vec::new();
    for (i, set) in neighbor_sets.iter().enumerate() {
        for &j in set.iter().filter(|&&j| j > i) {
            let (a, b) = (&renumbered.inclusions[i], &renumbered.inclusions[j]);
            gaps.push(Gap {
                i,
                j,
                delta: a.center().dist(b.center()) - a.r - b.r,
            });
        }
    }

    let nb = boundary.len();
    let mut centered_inclusion = false;
    let mut boundary_gaps = Vec::with_capacity(nb);
    let mut boundary_angles = Vec::with_capacity(nb);
    let mut boundary_nodes = Vec::with_capacity(nb);
    for (d, &(_, theta)) in renumbered.inclusions.iter().zip(&boundary) {
        let c = d.center();
        if c.x == T::zero() && c.y == T::zero() {
            centered_inclusion = true;
        }
        boundary_gaps.push(l - c.norm() - d.r);
        boundary_angles.push(theta);
        boundary_nodes.push(Point::new(l * theta.cos(), l * theta.sin()));
    }

    Ok(GeometryAnalysis {
        packing: renumbered,
        original_index,
        neighbor_sets,
        gaps,
        boundary_count: nb,
        boundary_gaps,
        boundary_angles,
        boundary_nodes,
        centered_inclusion,
    })
}

/// Validation, adjacency and boundary classification in one call.
pub fn analyze_packing<T: Real>(packing: Packing<T>) -> Result<GeometryAnalysis<T>> {
    let packing = validate_packing(packing)?;
    let adjacency = compute_adjacency(&packing);
    classify_boundary(&packing, &adjacency)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleWarning {
    /// `delta_max / R_min > 0.2`
    GapsNotSmall,
    /// `R_max / L > 0.3`
    InclusionsNotSmall,
    /// An inclusion sits at the origin; its boundary angle is a convention.
    CenteredInclusion,
}

/// How far a packing is from the `delta << R << L` regime.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ScaleReport<T> {
    pub delta_max: T,
    pub delta_min: T,
    /// Largest neighbor gap alone (`None` without neighbor pairs).
    pub neighbor_delta_max: Option<T>,
    pub r_min: T,
    pub r_max: T,
    pub ratio_delta_r: T,
    pub ratio_r_l: T,
    pub warnings: Vec<ScaleWarning>,
}

pub fn scale_report<T: Real>(analysis: &GeometryAnalysis<T>) -> ScaleReport<T> {
    let all = analysis.all_gap_widths();
    let delta_max = all.iter().copied().fold(T::zero(), T::max);
    let delta_min = all
        .iter()
        .copied()
        .fold(T::max_value().expect("bounded"), T::min);
    let neighbor_delta_max = analysis.gaps.iter().map(|g| g.delta).reduce(T::max);
    let radii = analysis.packing.inclusions.iter().map(|d| d.r);
    let r_min = radii.clone().fold(T::max_value().expect("bounded"), T::min);
    let r_max = radii.fold(T::zero(), T::max);
    let ratio_delta_r = delta_max / r_min;
    let ratio_r_l = r_max / analysis.domain_radius();

    let mut warnings = Vec::new();
    if ratio_delta_r > T::lit(0.2) {
        warnings.push(ScaleWarning::GapsNotSmall);
    }
    if ratio_r_l > T::lit(0.3) {
        warnings.push(ScaleWarning::InclusionsNotSmall);
    }
    if analysis.centered_inclusion {
        warnings.push(ScaleWarning::CenteredInclusion);
    }
    ScaleReport {
        delta_max,
        delta_min,
        neighbor_delta_max,
        r_min,
        r_max,
        ratio_delta_r,
        ratio_r_l,
        warnings,
    }
}
