//! Test packings: rings, hexagonal patches, seeded random packings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{validate_packing, Inclusion, Packing};
use crate::scalar::Real;

/// `n` disks of radius `r` equally spaced on the circle of radius `rho`, the
/// first on the positive x axis.
pub fn ring<T: Real>(n: usize, rho: T, r: T, domain_radius: T) -> Result<Packing<T>> {
    if n == 0 {
        return Err(Error::Invalid("ring needs at least one disk".into()));
    }
    if n > 1 {
        let chord = T::lit(2.0) * rho * (T::pi() / T::count(n)).sin();
        if chord <= T::lit(2.0) * r {
            return Err(Error::Infeasible(format!(
                "neighbor spacing {chord} does not exceed the diameter {}",
                T::lit(2.0) * r
            )));
        }
    }
    if rho + r >= domain_radius {
        return Err(Error::Infeasible(
            "ring does not fit inside the domain".into(),
        ));
    }
    let inclusions = (0..n)
        .map(|i| {
            let phi = T::two_pi() * T::count(i) / T::count(n);
            Inclusion::new(rho * phi.cos(), rho * phi.sin(), r)
        })
        .collect();
    validate_packing(Packing::new(domain_radius, inclusions))
}

/// Ring of `n ≥ 2` disks whose neighbor gaps and boundary gaps both equal
/// `ratio · R`, with `R` chosen to fill the domain.
pub fn equal_gap_ring<T: Real>(n: usize, domain_radius: T, ratio: T) -> Result<Packing<T>> {
    if n < 2 {
        return Err(Error::Invalid(
            "equal-gap ring needs at least two disks".into(),
        ));
    }
    if !ratio.is_finite() || ratio <= T::zero() {
        return Err(Error::Invalid("gap ratio must be positive".into()));
    }
    let two = T::lit(2.0);
    let s = (T::pi() / T::count(n)).sin();
    let r = two * domain_radius * s / (two + ratio + two * s * (T::one() + ratio));
    let rho = r * (two + ratio) / (two * s);
    ring(n, rho, r, domain_radius)
}

/// Hexagonal patch with lattice spacing `2r + delta`, keeping every disk
/// whose boundary gap is at least `delta`.
pub fn hex_grid<T: Real>(domain_radius: T, r: T, delta: T) -> Result<Packing<T>> {
    if !(r > T::zero() && delta > T::zero()) {
        return Err(Error::Invalid("radius and gap must be positive".into()));
    }
    let a = T::lit(2.0) * r + delta;
    let reach = domain_radius - r - delta;
    if reach < T::zero() {
        return Err(Error::Infeasible("no disk fits inside the domain".into()));
    }
    let h = T::lit(3f64.sqrt() / 2.0) * a;
    let rows = (reach / h).to_i64().unwrap_or(0);
    let cols = (reach / a).to_i64().unwrap_or(0) + 1;
    let mut inclusions = Vec::new();
    for row in -rows..=rows {
        let y = T::lit(row as f64) * h;
        let shift = if row.rem_euclid(2) == 1 {
            T::lit(0.5) * a
        } else {
            T::zero()
        };
        for col in -cols..=cols {
            let x = T::lit(col as f64) * a + shift;
            if (x * x + y * y).sqrt() <= reach {
                inclusions.push(Inclusion::new(x, y, r));
            }
        }
    }
    validate_packing(Packing::new(domain_radius, inclusions))
}

#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub n: usize,
    pub domain_radius: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Minimum gap between disks and to the boundary.
    pub delta_min: f64,
    pub seed: u64,
}

const ATTEMPTS_PER_DISK: usize = 100_000;

/// Rejection-sampled packing; the same spec always yields the same packing.
pub fn random<T: Real>(spec: &RandomSpec) -> Result<Packing<T>> {
    let RandomSpec {
        n,
        domain_radius,
        r_min,
        r_max,
        delta_min,
        seed,
    } = *spec;
    if !(r_min > 0.0 && r_max >= r_min && delta_min > 0.0 && domain_radius > 0.0) {
        return Err(Error::Invalid(
            "random packing parameters out of range".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disks: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    let mut attempts = 0;
    while disks.len() < n {
        attempts += 1;
        if attempts > ATTEMPTS_PER_DISK * n.max(1) {
            return Err(Error::Infeasible(format!(
                "placed {} of {n} disks before giving up",
                disks.len()
            )));
        }
        let r = rng.random_range(r_min..=r_max);
        let reach = domain_radius - r - delta_min;
        if reach <= 0.0 {
            continue;
        }
        let x = rng.random_range(-reach..=reach);
        let y = rng.random_range(-reach..=reach);
        if x.hypot(y) > reach {
            continue;
        }
        let clear = disks
            .iter()
            .all(|&(cx, cy, cr)| (x - cx).hypot(y - cy) - r - cr >= delta_min);
        if clear {
            disks.push((x, y, r));
        }
    }
    let inclusions = disks
        .into_iter()
        .map(|(x, y, r)| Inclusion::new(T::lit(x), T::lit(y), T::lit(r)))
        .collect();
    validate_packing(Packing::new(T::lit(domain_radius), inclusions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::analyze_packing;

    #[test]
    fn standard_ring() {
        let p: Packing<f64> = ring(8, 0.85, 0.1, 1.0).unwrap();
        assert_eq!(p.len(), 8);
        let a = analyze_packing(p).unwrap();
        assert_eq!(a.boundary_count, 8);
        for g in &a.boundary_gaps {
            assert!((g - 0.05).abs() < 1e-14);
        }
    }

    #[test]
    fn overlapping_ring_is_infeasible() {
        assert!(matches!(
            ring::<f64>(8, 0.85, 0.4, 1.0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn equal_gap_ring_gaps() {
        for &t in &[0.1, 0.05, 0.02] {
            let a = analyze_packing(equal_gap_ring::<f64>(16, 1.0, t).unwrap()).unwrap();
            let r = a.radius(0);
            for g in a.all_gap_widths() {
                assert!((g - t * r).abs() < 1e-13, "{g} vs {}", t * r);
            }
        }
    }

    #[test]
    fn hex_grid_has_uniform_neighbor_gaps() {
        let p: Packing<f64> = hex_grid(1.0, 0.1, 0.01).unwrap();
        assert!(p.len() >= 7);
        let a = analyze_packing(p).unwrap();
        let min = a.gaps.iter().map(|g| g.delta).fold(f64::INFINITY, f64::min);
        assert!((min - 0.01).abs() < 1e-12);
        assert!(a.boundary_gaps.iter().all(|&g| g >= 0.01 - 1e-12));
    }

    #[test]
    fn random_is_reproducible() {
        let spec = RandomSpec {
            n: 12,
            domain_radius: 1.0,
            r_min: 0.08,
            r_max: 0.08,
            delta_min: 0.01,
            seed: 7,
        };
        let a: Packing<f64> = random(&spec).unwrap();
        let b: Packing<f64> = random(&spec).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c: Packing<f64> = random(&RandomSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn random_gives_up_when_crowded() {
        let spec = RandomSpec {
            n: 100,
            domain_radius: 1.0,
            r_min: 0.3,
            r_max: 0.3,
            delta_min: 0.01,
            seed: 1,
        };
        assert!(matches!(random::<f64>(&spec), Err(Error::Infeasible(_))));
    }
}
