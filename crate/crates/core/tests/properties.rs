use std::f64::consts::{PI, TAU};

use asi_sim::bessel::bessel_j;
use asi_sim::chirality::{asi_gate_unitary, asi_hamiltonian, chirality_z, total_sz, SpinClusterSpec, THETA};
use asi_sim::dynamics::{format_label, label_probability};
use asi_sim::floquet::{effective_cluster_hamiltonian, excitation_leak, kappa_t0, qubit_qubit_geff};
use asi_sim::operator::{embed, expm_apply, HilbertSpace, LocalOp, Matrix, Operator, StateVector, Vector, C64};
use asi_sim::scenarios::{Engine, ScenarioName, ScenarioSpec};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| Matrix::from_vec(n, n, v))
}

fn hermitian(n: usize) -> impl Strategy<Value = Matrix> {
    square(n).prop_map(|m| (&m + m.adjoint()) * C64::new(0.5, 0.0))
}

fn state(space: HilbertSpace) -> impl Strategy<Value = StateVector> {
    let n = space.dim();
    prop::collection::vec(complex(), n).prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3).prop_map(move |v| {
        let v = Vector::from_vec(v);
        let norm = v.norm();
        StateVector::new(space.clone(), v / C64::new(norm, 0.0)).unwrap()
    })
}

fn qubit_state(n: usize) -> impl Strategy<Value = StateVector> {
    state(HilbertSpace::qubits(n))
}

/// Directed edges between distinct spins of an `n`-spin register.
fn edges(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..n, 0..n), 1..6)
        .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>())
        .prop_filter("at least one edge", |e| !e.is_empty())
}

fn triple(n: usize) -> impl Strategy<Value = [usize; 3]> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| [v[0], v[1], v[2]])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn embedded_operators_on_disjoint_sites_commute(a in square(2), b in square(3), sites in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let space = HilbertSpace::new(vec![3, 3, 3]).unwrap();
        let mut a3 = Matrix::zeros(3, 3);
        a3.view_mut((0, 0), (2, 2)).copy_from(&a);
        let x = embed(&space, sites[0], &Operator::local(a3).unwrap()).unwrap();
        let y = embed(&space, sites[1], &Operator::local(b).unwrap()).unwrap();
        prop_assert!(x.commutator(&y).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn local_ops_match_dense_embedding(a in square(2), b in square(3), (s1, s2) in (0usize..3, 0usize..3).prop_filter("distinct", |(p, q)| p != q)) {
        let space = HilbertSpace::new(vec![2, 2, 2]).unwrap();
        let b2 = b.view((0, 0), (2, 2)).into_owned();
        let (oa, ob) = (Operator::local(a).unwrap(), Operator::local(b2).unwrap());
        let dense = &embed(&space, s1, &oa).unwrap() * &embed(&space, s2, &ob).unwrap();
        let local = LocalOp::on_pair(&space, (s1, &oa), (s2, &ob)).unwrap();
        prop_assert!(local.to_operator().max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn hermitian_constructions_are_hermitian(m in hermitian(4), kappa in 0.1..10.0f64, e in edges(4)) {
        let op = Operator::hermitian(HilbertSpace::qubits(2), m).unwrap();
        prop_assert!(op.hermiticity_deviation() < 1e-12);
        let h = asi_hamiltonian(&SpinClusterSpec::new(4, e, kappa).unwrap()).unwrap();
        prop_assert!(h.hermiticity_deviation() < 1e-12);
    }

    #[test]
    fn expm_preserves_norm_and_composes(m in hermitian(6), psi in state(HilbertSpace::new(vec![2, 3]).unwrap()), t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let h = Operator::hermitian(HilbertSpace::new(vec![2, 3]).unwrap(), m).unwrap();
        let once = expm_apply(&h, t1 + t2, &psi).unwrap();
        let twice = expm_apply(&h, t2, &expm_apply(&h, t1, &psi).unwrap()).unwrap();
        prop_assert!((once.norm() - 1.0).abs() < 1e-10);
        let diff = (once.amplitudes() - twice.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn cluster_hamiltonians_conserve_excitations(kappa in 0.1..10.0f64, e in edges(5), phases in prop::collection::vec(-PI..PI, 2..6), f in 0.0..3.0f64) {
        let h = asi_hamiltonian(&SpinClusterSpec::new(5, e, kappa).unwrap()).unwrap();
        prop_assert!(excitation_leak(&h).unwrap() < 1e-12 * kappa.max(1.0));
        let eff = effective_cluster_hamiltonian(&phases, 1.0, f, 5.0).unwrap();
        prop_assert!(eff.hermiticity_deviation() < 1e-12);
        prop_assert!(excitation_leak(&eff).unwrap() < 1e-12);
    }

    #[test]
    fn ring_commutes_with_chirality(kappa in 0.1..10.0f64) {
        let h = asi_hamiltonian(&SpinClusterSpec::ring3(kappa).unwrap()).unwrap();
        let space = HilbertSpace::qubits(3);
        prop_assert!(h.commutator(&chirality_z(&space).unwrap()).unwrap().max_abs() < 1e-12 * kappa.max(1.0));
    }

    #[test]
    fn geff_is_odd_in_the_phase(f in 0.0..3.5f64, x in -PI..PI, g in 1.0..40.0f64, nu in 50.0..150.0f64) {
        prop_assert_eq!(qubit_qubit_geff(g, f, nu, x), -qubit_qubit_geff(g, f, nu, -x));
    }

    #[test]
    fn series_matches_closed_form_kappa(f in 0.05..3.0f64, g in 1.0..40.0f64, nu in 50.0..150.0f64) {
        let series = qubit_qubit_geff(g, f, nu, TAU / 3.0) * 2.0 * 3f64.sqrt();
        let closed = kappa_t0(g, f, nu).kappa;
        prop_assert!((series / closed - 1.0).abs() < 1e-10, "{series} vs {closed}");
    }

    #[test]
    fn three_phases_reproduce_the_ring(offset in -PI..PI, f in 0.3..3.0f64, g in 5.0..30.0f64, nu in 80.0..120.0f64) {
        let phases = [offset, offset + TAU / 3.0, offset + 2.0 * TAU / 3.0];
        let eff = effective_cluster_hamiltonian(&phases, g, f, nu).unwrap();
        let kappa = kappa_t0(g, f, nu).kappa;
        let space = HilbertSpace::qubits(3);
        let ring = (&total_sz(&space).unwrap() * &chirality_z(&space).unwrap()).scale(C64::new(kappa, 0.0));
        prop_assert!(eff.max_abs_diff(&ring) < 1e-10 * kappa);
    }

    #[test]
    fn ring_recurs_after_three_steps(kappa in 0.1..10.0f64, idx in 0usize..8) {
        let space = HilbertSpace::qubits(3);
        let h = asi_hamiltonian(&SpinClusterSpec::ring3(kappa).unwrap()).unwrap();
        let psi = StateVector::basis(&space, &space.digits_of(idx)).unwrap();
        let back = expm_apply(&h, 3.0 * THETA / kappa, &psi).unwrap();
        prop_assert!(back.overlap_sq(&psi).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn asi_gates_invert_each_other(psi in qubit_state(5), [i, j, k] in triple(5)) {
        let forward = asi_gate_unitary(5, [i, j, k]).unwrap();
        let backward = asi_gate_unitary(5, [i, k, j]).unwrap();
        let out = backward.apply(&StateVector::new(psi.space().clone(), forward.apply(&psi).unwrap()).unwrap()).unwrap();
        let out = StateVector::new(psi.space().clone(), out).unwrap();
        prop_assert!(out.overlap_sq(&psi).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn label_probabilities_form_a_distribution(psi in qubit_state(3)) {
        let space = HilbertSpace::qubits(3);
        let mut total = 0.0;
        for idx in 0..8 {
            let label = format_label(&space.digits_of(idx));
            let p = label_probability(&psi, &label).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
        let head = label_probability(&psi, "u").unwrap() + label_probability(&psi, "d").unwrap();
        prop_assert!((head - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_is_a_state(psi in state(HilbertSpace::new(vec![2, 2, 3]).unwrap()), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..3)) {
        let rho = psi.to_density().partial_trace(&keep).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn bessel_three_term_recurrence(n in 1i32..12, x in 0.1..8.0f64) {
        let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
        let rhs = 2.0 * f64::from(n) / x * bessel_j(n, x);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((bessel_j(-n, x) - parity * bessel_j(n, x)).abs() < 1e-15);
    }

    #[test]
    fn scenario_specs_round_trip(k in 0usize..ScenarioName::ALL.len(), e in 0usize..3, nu in 80.0..120.0f64) {
        let engine = [Engine::Effective, Engine::Full, Engine::FullLindblad][e];
        let mut spec = ScenarioSpec::preset(ScenarioName::ALL[k], engine);
        spec.drive.nu_mhz = nu;
        let text = serde_json::to_string(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }
}
