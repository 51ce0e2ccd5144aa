use std::f64::consts::{PI, TAU};

use dtnmap::gen::{random, ring, RandomSpec};
use dtnmap::network::NetworkOptions;
use dtnmap::{analyze_packing, Asymptotics64, ConductivityMode, FourierPotential64, Packing64};
use proptest::prelude::*;

fn model(p: Packing64) -> Asymptotics64 {
    let options = NetworkOptions {
        mode: ConductivityMode::Generalized,
        delta_max_edge: None,
    };
    Asymptotics64::new(analyze_packing(p).unwrap(), &options).unwrap()
}

fn random_packing(n: usize, seed: u64) -> Packing64 {
    random(&RandomSpec {
        n,
        domain_radius: 1.0,
        r_min: 0.05,
        r_max: 0.1,
        delta_min: 0.01,
        seed,
    })
    .unwrap()
}

fn potential() -> impl Strategy<Value = FourierPotential64> {
    (
        prop::collection::vec(-1.0f64..1.0, 13),
        prop::collection::vec(-1.0f64..1.0, 13),
    )
        .prop_map(|(c, mut s)| {
            s[0] = 0.0;
            FourierPotential64::new(c, s).unwrap()
        })
}

fn quad(m: &Asymptotics64, psi: &FourierPotential64) -> f64 {
    m.total_energy(psi).unwrap().quad_form
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallelogram_law(n in 1usize..=12, seed in any::<u64>(), a in potential(), b in potential()) {
        let m = model(random_packing(n, seed));
        let lhs = quad(&m, &a.combine(1.0, &b, 1.0)) + quad(&m, &a.combine(1.0, &b, -1.0));
        let rhs = 2.0 * quad(&m, &a) + 2.0 * quad(&m, &b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn rotation_equivariance(n in 1usize..=12, seed in any::<u64>(), psi in potential(), phi in 0.0..TAU) {
        let p = random_packing(n, seed);
        let q0 = quad(&model(p.clone()), &psi);
        let q1 = quad(&model(p.rotated(phi)), &psi.rotated(phi));
        prop_assert!((q0 - q1).abs() <= 1e-9 * q0.abs().max(1.0), "{q0} vs {q1}");
    }

    #[test]
    fn decomposition_discrepancy(n in 1usize..=12, seed in any::<u64>(), k in 1usize..=150) {
        let m = model(random_packing(n, seed));
        let d = m.total_energy_decomposed(k).unwrap();
        let total = d.value + d.discrepancy;
        prop_assert!(
            (d.discrepancy - d.expected_discrepancy).abs() <= 1e-9 * total.abs().max(1.0),
            "{} vs {}", d.discrepancy, d.expected_discrepancy
        );
    }
}

#[test]
fn reference_limit_on_ring() {
    let m = model(ring(8, 0.85, 0.1, 1.0).unwrap());
    let mut last = f64::INFINITY;
    for k in [100, 200, 400, 800] {
        assert_eq!(m.regime_classify(k).regime, dtnmap::Regime::Reference);
        let q = quad(&m, &FourierPotential64::cos_mode(k));
        let dev = (q / (k as f64 * PI) - 1.0).abs();
        assert!(dev <= last, "k={k}: {dev} above {last}");
        last = dev;
    }
    assert!(last < 1e-3, "{last}");
}

#[test]
fn pure_sine_and_cosine_split() {
    let m = model(ring(8, 0.85, 0.1, 1.0).unwrap());
    for k in [1, 3, 8, 20] {
        let c = FourierPotential64::cos_mode(k);
        let s = FourierPotential64::sin_mode(k);
        let both = c.combine(1.0, &s, 1.0);
        let e = m.total_energy(&both).unwrap();
        let ec = m.total_energy(&c).unwrap();
        let es = m.total_energy(&s).unwrap();
        assert!((e.e_ref - ec.e_ref - es.e_ref).abs() < 1e-12 * e.e_ref);
        assert!((e.e_ref - k as f64 * PI).abs() < 1e-12 * e.e_ref);
    }
}
