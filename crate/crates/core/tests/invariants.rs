//! Algebraic and physical invariants checked on randomized inputs.

use chemsim::linalg::{max_abs_diff, random_state};
use chemsim::noise::{
    apply_readout, calibrate_readout, mitigate_readout, product_confusion_matrix, project_to_simplex, NoiseModel,
};
use chemsim::simulator::{Circuit, DensityMatrix, Gate, KrausChannel, StateVector};
use chemsim::{CMatrix, Commutation, PauliString, PauliSum, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn pauli(n: usize, x: u64, z: u64, phase: u8) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_masks(n, x & mask, z & mask, phase % 4).unwrap()
}

fn random_sum(n: usize, seed: u64) -> PauliSum {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut s = PauliSum::random(n, 4, &mut rng).unwrap();
    // Complex coefficients too, so the checks are not limited to Hermitian sums.
    s.add_term(pauli(n, rng.gen(), rng.gen(), 0), C64::new(0.0, rng.gen_range(-1.0..1.0)));
    s
}

fn random_gate(n: usize, rng: &mut impl Rng) -> Gate {
    let q = rng.gen_range(0..n);
    let angle = rng.gen_range(-3.0..3.0);
    match rng.gen_range(0..9) {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::T(q),
        3 => Gate::Rx(q, angle),
        4 => Gate::Ry(q, angle),
        5 => Gate::Rz(q, angle),
        6 if n > 1 => {
            let t = (q + rng.gen_range(1..n)) % n;
            Gate::Cnot { control: q, target: t }
        }
        7 => Gate::PauliRotation { pauli: pauli(n, rng.gen(), rng.gen(), 0), angle },
        _ => Gate::Y(q),
    }
}

fn dense_commutator(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_matches_dense_product(n in 1usize..=6, xa: u64, za: u64, pa in 0u8..4, xb: u64, zb: u64, pb in 0u8..4) {
        let a = pauli(n, xa, za, pa);
        let b = pauli(n, xb, zb, pb);
        let ab = a.multiply(&b).unwrap().to_dense().unwrap();
        let expected = a.to_dense().unwrap() * b.to_dense().unwrap();
        prop_assert!(max_abs_diff(&ab, &expected) < 1e-12);
    }

    #[test]
    fn commutes_iff_dense_commutator_vanishes(n in 1usize..=5, xa: u64, za: u64, xb: u64, zb: u64) {
        let a = pauli(n, xa, za, 0);
        let b = pauli(n, xb, zb, 0);
        let c = dense_commutator(&a.to_dense().unwrap(), &b.to_dense().unwrap());
        prop_assert_eq!(a.commutes(&b).unwrap(), c < 1e-12);
    }

    #[test]
    fn sum_arithmetic_is_associative_and_distributive(n in 1usize..=4, s1: u64, s2: u64, s3: u64) {
        let (a, b, c) = (random_sum(n, s1), random_sum(n, s2), random_sum(n, s3));
        let d = |s: &PauliSum| s.to_dense().unwrap();
        prop_assert!(max_abs_diff(&d(&(&(&a + &b) + &c)), &d(&(&a + &(&b + &c)))) < 1e-12);
        prop_assert!(max_abs_diff(&d(&(&(&a * &b) * &c)), &d(&(&a * &(&b * &c)))) < 1e-12);
        prop_assert!(max_abs_diff(&d(&(&a * &(&b + &c))), &d(&(&(&a * &b) + &(&a * &c)))) < 1e-12);
        prop_assert!(max_abs_diff(&d(&(&a * &b)), &(d(&a) * d(&b))) < 1e-12);
    }

    #[test]
    fn commuting_groups_are_commuting_and_exhaustive(n in 1usize..=6, seed: u64, terms in 1usize..20) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let h = PauliSum::random(n, terms, &mut rng).unwrap();
        for mode in [Commutation::QubitWise, Commutation::General] {
            let groups = h.group_commuting(mode);
            let mut total = PauliSum::zero(n);
            for g in &groups {
                let t = g.terms();
                for (i, (p, _)) in t.iter().enumerate() {
                    for (q, _) in &t[i + 1..] {
                        let ok = match mode {
                            Commutation::QubitWise => p.qubitwise_commutes(q).unwrap(),
                            Commutation::General => p.commutes(q).unwrap(),
                        };
                        prop_assert!(ok, "{} and {} share a group", p, q);
                    }
                }
                total = &total + g;
            }
            prop_assert_eq!(total.len(), h.len());
            prop_assert!(total.max_coeff_diff(&h) == 0.0);
        }
    }

    #[test]
    fn circuit_action_matches_dense_unitary(n in 1usize..=6, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let gates: Vec<Gate> = (0..30).map(|_| random_gate(n, &mut rng)).collect();
        let c = Circuit::from_gates(n, gates).unwrap();
        let psi0 = StateVector::from_amplitudes(random_state(1 << n, &mut rng)).unwrap();
        let mut psi = psi0.clone();
        psi.apply_circuit(&c, &[]).unwrap();
        let expected = c.to_dense(&[]).unwrap() * psi0.to_vector();
        prop_assert!((psi.to_vector() - expected).norm() < 1e-12);
    }

    #[test]
    fn pauli_rotation_paths_agree(n in 1usize..=6, x: u64, z: u64, angle in -6.0f64..6.0, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = pauli(n, x, z, 0);
        let psi = StateVector::from_amplitudes(random_state(1 << n, &mut rng)).unwrap();
        let mut direct = psi.clone();
        direct.apply_pauli_rotation(&p, angle).unwrap();
        let mut ladder = psi;
        ladder.apply_pauli_rotation_ladder(&p, angle).unwrap();
        prop_assert!((direct.to_vector() - ladder.to_vector()).norm() < 1e-12);
    }

    #[test]
    fn channels_are_trace_preserving(rate in 0.0f64..=1.0, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let psi = StateVector::from_amplitudes(random_state(4, &mut rng)).unwrap();
        for ch in [
            KrausChannel::depolarizing(1, rate).unwrap(),
            KrausChannel::amplitude_damping(0, rate).unwrap(),
            KrausChannel::phase_damping(1, rate).unwrap(),
        ] {
            let ops = ch.operators();
            let completeness = ops.iter().fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
            prop_assert!(max_abs_diff(&completeness, &CMatrix::identity(2, 2)) < 1e-12);
            let mut rho = DensityMatrix::from_state(&psi).unwrap();
            rho.apply_channel(&ch).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(rho.purity() <= 1.0 + 1e-10);
            rho.validate(1e-10).unwrap();
        }
    }

    #[test]
    fn noisy_evolution_keeps_purity_bounded(n in 1usize..=3, seed: u64, p in 0.0f64..0.3) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let model = NoiseModel::new(p, p / 2.0, p / 3.0).unwrap();
        let mut rho = DensityMatrix::zero(n).unwrap();
        let mut pure = DensityMatrix::zero(n).unwrap();
        for _ in 0..20 {
            let g = random_gate(n, &mut rng);
            rho.apply_gate(&g).unwrap();
            pure.apply_gate(&g).unwrap();
            for q in g.qubits() {
                for ch in model.channels(q).unwrap() {
                    rho.apply_channel(&ch).unwrap();
                }
            }
            prop_assert!(rho.purity() <= 1.0 + 1e-10);
        }
        prop_assert!((pure.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn simplex_projection_lands_on_simplex(v in prop::collection::vec(-2.0f64..2.0, 1..16)) {
        let p = project_to_simplex(&v);
        prop_assert_eq!(p.len(), v.len());
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Idempotent.
        let q = project_to_simplex(&p);
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn exact_mitigation_inverts_readout(flips in prop::collection::vec((0.0f64..0.2, 0.0f64..0.2), 1..=3), seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let lambda = product_confusion_matrix(&flips).unwrap();
        let d = lambda.nrows();
        let mut p: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let measured = apply_readout(&p, &lambda, None).unwrap();
        let exact: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
            .map(|k| {
                let e: Vec<f64> = (0..d).map(|j| (j == k) as u8 as f64).collect();
                let m = apply_readout(&e, &lambda, None).unwrap();
                (e, m)
            })
            .collect();
        let cal = calibrate_readout(&exact).unwrap();
        let m = mitigate_readout(&measured, &cal).unwrap();
        prop_assert!(p.iter().zip(&m.probabilities).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}

#[test]
fn norm_drift_stays_small_over_long_circuits() {
    let mut rng = ChaCha20Rng::seed_from_u64(51);
    let n = 6;
    let mut psi = StateVector::from_amplitudes(random_state(1 << n, &mut rng)).unwrap();
    for _ in 0..1000 {
        psi.apply_gate(&random_gate(n, &mut rng)).unwrap();
    }
    assert!((psi.norm() - 1.0).abs() < 1e-8);
}

#[test]
fn sampled_pauli_expectation_is_unbiased() {
    let mut rng = ChaCha20Rng::seed_from_u64(52);
    let n = 3;
    let psi = StateVector::from_amplitudes(random_state(1 << n, &mut rng)).unwrap();
    for label in ["XYZ", "IZX", "YYI"] {
        let p: PauliString = label.parse().unwrap();
        let exact = psi.expectation_string(&p).unwrap().re;
        let seeds = 200;
        let (mut total, mut sigma) = (0.0, 0.0);
        for s in 0..seeds {
            let mut r = ChaCha20Rng::seed_from_u64(1000 + s);
            let est = psi.sample_pauli(&p, 100, &mut r).unwrap();
            total += est.mean;
            sigma += est.sigma;
        }
        let mean = total / seeds as f64;
        let sigma = sigma / seeds as f64;
        assert!((mean - exact).abs() < 5.0 * sigma / (seeds as f64).sqrt(), "{label}: {mean} vs {exact}");
    }
}
