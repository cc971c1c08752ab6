use proptest::prelude::*;
use std::f64::consts::PI;

use symvqc::circuit::{build_brickwall, build_swap_variant_2on4, Circuit, ParameterBinding};
use symvqc::gatelib::{a_gate, a_gate_bottom_up, b_gate, b_gate_bottom_up, two_site_number_operator, GateKind};
use symvqc::models::{xxz_hamiltonian, Boundary, XXZSpec};
use symvqc::numkit::{is_unitary, matmul};
use symvqc::simulator::{
    apply_circuit_noisy, fidelity, haar_random_sector_state, prepare, sampled_expectation, sector_weight, NoiseSpec,
};

fn sectors() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        Just((2, 1)),
        Just((3, 1)),
        Just((3, 2)),
        Just((4, 2)),
        Just((5, 2)),
        Just((6, 3))
    ]
}

fn gates() -> impl Strategy<Value = GateKind> {
    prop_oneof![Just(GateKind::AGate), Just(GateKind::BGate)]
}

fn binding(c: &Circuit, raw: &[f64]) -> ParameterBinding {
    ParameterBinding(raw.iter().cycle().take(c.num_free_parameters()).copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modules_are_unitary_and_conserving(theta in -PI..PI, phi in -PI..PI) {
        let n = two_site_number_operator();
        for (closed, built) in [
            (a_gate(theta, phi), a_gate_bottom_up(theta, phi)),
            (b_gate(theta, phi), b_gate_bottom_up(theta, phi)),
        ] {
            prop_assert!(is_unitary(&closed, 1e-12).unwrap());
            prop_assert!(closed.max_abs_diff(&built) < 1e-12);
            let gn = matmul(&closed, &n).unwrap();
            let ng = matmul(&n, &closed).unwrap();
            prop_assert!(gn.max_abs_diff(&ng) < 1e-12);
        }
    }

    #[test]
    fn brickwall_stays_in_sector(
        (l, n) in sectors(),
        gate in gates(),
        raw in prop::collection::vec(-PI..PI, 8),
    ) {
        let c = build_brickwall(l, n, gate).unwrap();
        let psi = prepare(&c, &binding(&c, &raw)).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        prop_assert!(1.0 - sector_weight(&psi, n) < 1e-12);
    }

    #[test]
    fn swap_variant_stays_in_sector(gate in gates(), raw in prop::collection::vec(-PI..PI, 10)) {
        let c = build_swap_variant_2on4(gate).unwrap();
        let psi = prepare(&c, &ParameterBinding(raw)).unwrap();
        prop_assert!(1.0 - sector_weight(&psi, 2) < 1e-12);
    }

    #[test]
    fn noisy_trajectories_keep_norm(
        p1 in 0.0f64..1.0,
        p2 in 0.0f64..1.0,
        seed in any::<u64>(),
        raw in prop::collection::vec(-PI..PI, 10),
    ) {
        let c = build_brickwall(4, 2, GateKind::AGate).unwrap();
        let noise = NoiseSpec::new(p1, p2, 0.0).unwrap();
        let zero = symvqc::numkit::StateVector::zero_state(4);
        let psi = apply_circuit_noisy(&c, &ParameterBinding(raw), &zero, &noise, seed).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_json_round_trips((l, n) in sectors(), gate in gates()) {
        let c = build_brickwall(l, n, gate).unwrap();
        prop_assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn fidelity_is_a_probability(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        let a = haar_random_sector_state(4, 2, seed_a).unwrap();
        let b = haar_random_sector_state(4, 2, seed_b).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(1.0 - sector_weight(&a, 2) < 1e-12);
    }

    #[test]
    fn shot_estimates_are_bounded_and_seeded(seed in any::<u64>(), raw in prop::collection::vec(-PI..PI, 10)) {
        let c = build_brickwall(4, 2, GateKind::BGate).unwrap();
        let h = xxz_hamiltonian(&XXZSpec::new(4, 1.0, Boundary::Open).unwrap());
        let psi = prepare(&c, &ParameterBinding(raw)).unwrap();
        let e = sampled_expectation(&h, &psi, 64, seed).unwrap();
        let bound: f64 = h.terms().iter().map(|t| t.coeff.abs()).sum();
        prop_assert!(e.abs() <= bound + 1e-12);
        prop_assert_eq!(e.to_bits(), sampled_expectation(&h, &psi, 64, seed).unwrap().to_bits());
    }
}
