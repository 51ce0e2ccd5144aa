use dtnmap::gen::{random, RandomSpec};
use dtnmap::network::build_network;
use dtnmap::{analyze_packing, ConductivityMode, Network64, Packing64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn network(n: usize, seed: u64, equal: bool) -> Network64 {
    let r_max = if equal { 0.08 } else { 0.12 };
    let p: Packing64 = random(&RandomSpec {
        n,
        domain_radius: 1.0,
        r_min: 0.08,
        r_max,
        delta_min: 0.005,
        seed,
    })
    .unwrap();
    let mode = if equal {
        ConductivityMode::Identical
    } else {
        ConductivityMode::Generalized
    };
    build_network(&analyze_packing(p).unwrap(), mode).unwrap()
}

/// Column `a` is the vector of boundary currents `σ_b (ψ_b − U_b)` for
/// `ψ = e_a`.
fn sigma_scale(net: &Network64) -> f64 {
    let gaps = net.gap_edges.iter().map(|e| e.sigma);
    net.boundary_edges
        .iter()
        .map(|e| e.sigma)
        .chain(gaps)
        .fold(0.0, f64::max)
}

fn brute_force_dtn(net: &Network64) -> DMatrix<f64> {
    let nb = net.boundary_count();
    let mut m = DMatrix::zeros(nb, nb);
    for a in 0..nb {
        let mut psi = vec![0.0; nb];
        psi[a] = 1.0;
        let sol = net.solve_kirchhoff(&psi).unwrap();
        for b in 0..nb {
            m[(b, a)] = net.boundary_sigma(b) * (psi[b] - sol.potentials[b]);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dtn_matches_boundary_currents(n in 1usize..=8, seed in any::<u64>(), equal in any::<bool>()) {
        let net = network(n, seed, equal);
        let lambda = net.dtn_matrix().unwrap();
        let brute = brute_force_dtn(&net);
        let scale = sigma_scale(&net);
        prop_assert!((&lambda - &brute).amax() <= 1e-10 * scale);
        prop_assert!((&lambda - lambda.transpose()).amax() <= 1e-12 * scale);
    }

    #[test]
    fn dtn_has_one_dimensional_kernel(n in 1usize..=8, seed in any::<u64>(), equal in any::<bool>()) {
        let net = network(n, seed, equal);
        let lambda = net.dtn_matrix().unwrap();
        let nb = lambda.nrows();
        let row_sums = &lambda * DMatrix::from_element(nb, 1, 1.0);
        let tol = 1e-10 * sigma_scale(&net);
        prop_assert!(row_sums.amax() <= tol);
        let eig = lambda.symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e >= -tol), "{eig:?}");
        let zeros = eig.iter().filter(|e| e.abs() <= tol).count();
        prop_assert_eq!(zeros, 1, "{:?}", eig);
    }

    #[test]
    fn quadratic_form_is_twice_network_energy(
        n in 1usize..=8,
        seed in any::<u64>(),
        coeffs in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let net = network(n, seed, false);
        let nb = net.boundary_count();
        let psi = &coeffs[..nb];
        let lambda = net.dtn_matrix().unwrap();
        let v = nalgebra::DVector::from_column_slice(psi);
        let q = v.dot(&(&lambda * &v));
        let e = net.net_energy(psi).unwrap();
        prop_assert!((q - 2.0 * e).abs() <= 1e-10 * sigma_scale(&net) * v.norm_squared().max(1e-300));
    }
}
