use chemsim::fermion::{build_molecular_hamiltonian, jordan_wigner, SpinOrdering};
use chemsim::hamio::parse_fcidump;
use chemsim::linalg::eigh;
use chemsim::noise::*;
use chemsim::simulator::{Circuit, Gate, StateVector};
use chemsim::{Error, PauliString, PauliSum};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn h2() -> PauliSum {
    let ints = parse_fcidump(include_str!("data/h2_sto6g.fcidump")).unwrap();
    jordan_wigner(&build_molecular_hamiltonian(&ints, SpinOrdering::Blocked).unwrap()).unwrap()
}

fn h2_ground() -> StateVector {
    let (_, v) = eigh(&h2().to_dense().unwrap());
    StateVector::from_vector(&v.column(0).into_owned()).unwrap()
}

fn random_circuit(n: usize, depth: usize, rng: &mut ChaCha20Rng) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        for q in 0..n {
            c.push(Gate::Ry(q, rng.gen_range(-3.0..3.0))).unwrap();
            c.push(Gate::Rz(q, rng.gen_range(-3.0..3.0))).unwrap();
        }
        for q in 0..n - 1 {
            c.push(Gate::Cnot { control: q, target: q + 1 }).unwrap();
        }
    }
    c
}

fn planted_confusion() -> DMatrix<f64> {
    product_confusion_matrix(&[(0.03, 0.08), (0.05, 0.02), (0.04, 0.06)]).unwrap()
}

fn sampled(p: &[f64], shots: u64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    chemsim::simulator::sample_counts(p, shots, rng).unwrap().iter().map(|&k| k as f64 / shots as f64).collect()
}

/// Expected Euclidean norm of the sampling error of a frequency vector.
fn noise_floor(p: &[f64], shots: u64) -> f64 {
    (p.iter().map(|x| x * (1.0 - x)).sum::<f64>() / shots as f64).sqrt()
}

fn calibrate(lambda: &DMatrix<f64>, shots: u64, rng: &mut ChaCha20Rng) -> ReadoutCalibration {
    let data: Vec<_> = calibration_circuits(3)
        .unwrap()
        .into_iter()
        .map(|(_, ideal)| {
            let p = apply_readout(&ideal, lambda, None).unwrap();
            (ideal, sampled(&p, shots, rng))
        })
        .collect();
    calibrate_readout(&data).unwrap()
}

#[test]
fn full_depolarizing_samples_uniformly() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let c = random_circuit(2, 2, &mut rng);
    let run = run_noisy(&c, &[], &NoiseModel::depolarizing(1.0).unwrap(), 100_000, &mut rng).unwrap();
    let sigma = (0.25f64 * 0.75 / 1e5).sqrt();
    for f in run.frequencies() {
        assert!((f - 0.25).abs() < 5.0 * sigma);
    }
}

#[test]
fn amplitude_damping_decay_is_geometric() {
    let gamma = 0.07;
    let noise = NoiseModel::new(0.0, gamma, 0.0).unwrap();
    let z = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
    for m in 0..12 {
        let mut c = Circuit::new(1);
        c.push(Gate::X(0)).unwrap();
        for _ in 0..m {
            c.push(Gate::Id(0)).unwrap();
        }
        let rho = run_noisy_density(&c, &[], &noise).unwrap();
        // Every gate, X included, is followed by one damping step.
        let excited = (1.0 - rho.expectation(&z).unwrap().re) / 2.0;
        assert!((excited - (1.0 - gamma).powi(m + 1)).abs() < 1e-12);
    }
}

#[test]
fn planted_confusion_matrix_is_recovered() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let lambda = planted_confusion();
    let cal = calibrate(&lambda, 100_000, &mut rng);
    assert!((&cal.lambda - &lambda).amax() < 0.01);
    assert!(cal.delta.amax() == 0.0);
    assert!(cal.condition_number < 2.0);
}

#[test]
fn calibration_residual_is_at_shot_noise_level() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let lambda = planted_confusion();
    let shots = 100_000;
    // Basis states plus product states make the fit overdetermined.
    let mut ideals: Vec<Vec<f64>> = calibration_circuits(3).unwrap().into_iter().map(|(_, p)| p).collect();
    for _ in 0..8 {
        let c = random_circuit(3, 1, &mut rng);
        ideals.push(run_noisy_density(&c, &[], &NoiseModel::noiseless()).unwrap().probabilities());
    }
    let mut floor = 0.0;
    let data: Vec<_> = ideals
        .into_iter()
        .map(|ideal| {
            let p = apply_readout(&ideal, &lambda, None).unwrap();
            floor += noise_floor(&p, shots);
            (ideal, sampled(&p, shots, &mut rng))
        })
        .collect();
    let cal = calibrate_readout(&data).unwrap();
    assert!(cal.residual > 0.0 && cal.residual < 2.0 * floor, "{} vs {floor}", cal.residual);
}

#[test]
fn readout_mitigation_reduces_total_variation() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let lambda = planted_confusion();
    let cal = calibrate(&lambda, 100_000, &mut rng);
    for _ in 0..5 {
        let truth = run_noisy_density(&random_circuit(3, 2, &mut rng), &[], &NoiseModel::noiseless()).unwrap().probabilities();
        let measured = sampled(&apply_readout(&truth, &lambda, None).unwrap(), 100_000, &mut rng);
        let m = mitigate_readout(&measured, &cal).unwrap();
        let (raw, fixed) = (total_variation(&measured, &truth), total_variation(&m.probabilities, &truth));
        assert!(fixed * 10.0 <= raw, "raw {raw} mitigated {fixed}");
        assert!((m.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.probabilities.iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn mitigation_inverts_planted_affine_map() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let lambda = planted_confusion() * 0.96;
    let delta = DVector::from_element(8, 0.005);
    let shots = 100_000;
    let data: Vec<_> = calibration_circuits(3)
        .unwrap()
        .into_iter()
        .map(|(_, ideal)| {
            let p = apply_readout(&ideal, &lambda, Some(&delta)).unwrap();
            (ideal, sampled(&p, shots, &mut rng))
        })
        .collect();
    let cal = calibrate_readout(&data).unwrap();
    for _ in 0..5 {
        let truth = run_noisy_density(&random_circuit(3, 2, &mut rng), &[], &NoiseModel::noiseless()).unwrap().probabilities();
        let measured = apply_readout(&truth, &lambda, Some(&delta)).unwrap();
        let got = mitigate_readout(&sampled(&measured, shots, &mut rng), &cal).unwrap();
        let tv = total_variation(&got.probabilities, &truth);
        let floor = 0.5 * measured.iter().map(|p| (p * (1.0 - p) / shots as f64).sqrt()).sum::<f64>();
        assert!(tv < 3.0 * floor, "{tv} vs {floor}");
    }
}

#[test]
fn ill_conditioned_readout_is_flagged() {
    let lambda = DMatrix::from_row_slice(2, 2, &[0.5 + 1e-7, 0.5, 0.5 - 1e-7, 0.5]);
    let data = vec![(vec![1.0, 0.0], lambda.column(0).iter().copied().collect()), (vec![0.0, 1.0], lambda.column(1).iter().copied().collect())];
    let cal = calibrate_readout(&data).unwrap();
    let m = mitigate_readout(&[0.5, 0.5], &cal).unwrap();
    assert!(m.ill_conditioned && m.condition_number > CONDITION_WARNING);
}

fn toy_circuit() -> Circuit {
    let mut c = Circuit::new(2);
    for k in 0..4 {
        c.push(Gate::Ry(0, 0.3 + 0.1 * k as f64)).unwrap();
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        c.push(Gate::Rx(1, -0.2)).unwrap();
    }
    c
}

#[test]
fn zne_beats_raw_on_depolarizing_toy_model() {
    let c = toy_circuit();
    let z = PauliSum::from_labels(&[("ZI", 1.0)]).unwrap();
    let ideal = run_noisy_density(&c, &[], &NoiseModel::noiseless()).unwrap().expectation(&z).unwrap().re;
    let noise = NoiseModel::depolarizing(0.02).unwrap();
    let eval = |s: f64| Ok((run_noisy_density(&c, &[], &noise.scaled(s))?.expectation(&z)?.re, 0.0));
    let r = zne(eval, &[1.0, 1.5, 2.0], 2).unwrap();
    let raw = (r.raw[0].0 - ideal).abs();
    let mitigated = (r.value - ideal).abs();
    assert!(mitigated * 5.0 <= raw, "raw {raw} mitigated {mitigated}");
}

#[test]
fn zne_sigma_exceeds_unmitigated_sigma() {
    let c = toy_circuit();
    let z = PauliString::from_masks(2, 0, 0b10, 0).unwrap();
    let noise = NoiseModel::depolarizing(0.02).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let eval = |s: f64| run_noisy(&c, &[], &noise.scaled(s), 20_000, &mut rng)?.pauli_expectation(&z);
    let r = zne(eval, &[1.0, 1.5, 2.0], 2).unwrap();
    let max_raw = r.raw.iter().map(|x| x.1).fold(0.0, f64::max);
    assert!(r.sigma >= max_raw);
    let norm = r.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    assert!(norm > 1.0);
}

#[test]
fn zne_rejects_duplicate_scales() {
    assert!(matches!(zne(|_| Ok((0.0, 0.0)), &[1.0, 2.0, 2.0], 2), Err(Error::Argument(_))));
}

#[test]
fn post_selection_halves_h2_error() {
    let h = h2();
    let psi = h2_ground();
    let checks = number_parity_checks(2, SpinOrdering::Blocked, 1, 1);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let r = symmetry_verified_energy(&h, &psi, &checks, 0.05, 100_000, &mut rng).unwrap();
    let (raw, ps) = ((r.raw - r.exact).abs(), (r.post_selected - r.exact).abs());
    assert!(ps * 2.0 <= raw, "raw {raw} post-selected {ps}");
    assert!(r.checked_groups >= 1 && r.retention < 1.0);

    let clean = symmetry_verified_energy(&h, &psi, &checks, 0.0, 10_000, &mut rng).unwrap();
    assert_eq!(clean.retention, 1.0);
}

#[test]
fn post_selected_expectation_matches_projected_state() {
    let h = h2();
    let psi = h2_ground();
    let checks = number_parity_checks(2, SpinOrdering::Blocked, 1, 1);
    let diag = PauliSum::from_terms(4, h.iter().filter(|(p, _)| p.is_diagonal()).map(|(p, c)| (p.clone(), *c))).unwrap();
    let flip = 0.05;
    let confusion = product_confusion_matrix(&[(flip, flip); 4]).unwrap();
    let corrupted = apply_readout(&psi.probabilities(), &confusion, None).unwrap();
    // Projector oracle: restrict the corrupted diagonal state to the sector.
    let (mut num, mut den) = (0.0, 0.0);
    for (b, &p) in corrupted.iter().enumerate() {
        if checks.iter().all(|c| c.passes(b as u64)) {
            let mut v = 0.0;
            for (s, c) in diag.iter() {
                let sign = if (b as u64 & s.z_mask()).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                v += (c * s.phase_factor()).re * sign;
            }
            num += p * v;
            den += p;
        }
    }
    let oracle = num / den;
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let counts = chemsim::simulator::sample_counts(&corrupted, 100_000, &mut rng).unwrap();
    let (kept, retention) = post_select_counts(&counts, &checks).unwrap();
    let (mean, sigma) = diagonal_expectation(&kept, &diag).unwrap();
    assert!((mean - oracle).abs() < 3.0 * sigma, "{mean} vs {oracle} ± {sigma}");
    assert!((retention - den).abs() < 5.0 * (den * (1.0 - den) / 1e5).sqrt());
}
