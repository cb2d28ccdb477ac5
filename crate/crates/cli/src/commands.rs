use chemsim::dynamics::{
    qpe_energy, taylor_evolve, trotter_evolve, trotter_operator_error, LcuDecomposition,
};
use chemsim::eigen::{
    hardware_efficient_ansatz, qite, uccsd_ansatz, vqe_minimize, EstimationMode, OptimizerConfig,
};
use chemsim::fermion::{hartree_fock_occupation, EncodingScheme, SpinOrdering};
use chemsim::hamio::pauli_sum_to_json;
use chemsim::linalg::{eigvalsh, unitary_with_first_column};
use chemsim::noise::{
    apply_readout, calibrate_readout, mitigate_readout, number_parity_checks, product_confusion_matrix, run_noisy,
    run_noisy_density, symmetry_verified_energy, total_variation, zne, NoiseModel,
};
use chemsim::simulator::{measurement_basis_change, sample_counts, Circuit, Gate, StateVector};
use chemsim::{Commutation, PauliString, PauliSum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::problem::{spin_counts, Problem};

/// A command's result plus any side files it produced.
pub struct Outcome {
    pub result: Value,
    pub series_csv: Option<String>,
    pub hamiltonian_json: Option<String>,
}

impl Outcome {
    fn result(result: Value) -> Self {
        Outcome { result, series_csv: None, hamiltonian_json: None }
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let problem = Problem::load(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed());
    match cfg.command {
        Command::Map => map(&problem),
        Command::Spectrum => spectrum(cfg, &problem),
        Command::Vqe => vqe(cfg, &problem),
        Command::Evolve => evolve(cfg, &problem),
        Command::Qpe => qpe_cmd(cfg, &problem, &mut rng),
        Command::Qite => qite_cmd(cfg, &problem),
        Command::Mitigate => mitigate(cfg, &problem, &mut rng),
    }
}

fn hamiltonian_value(h: &PauliSum) -> CliResult<Value> {
    Ok(serde_json::from_str(&pauli_sum_to_json(h)?)?)
}

fn map(p: &Problem) -> CliResult<Outcome> {
    let result = json!({
        "encoding": p.scheme.map(|s| s.name()),
        "n_qubits_before_taper": p.full_qubits,
        "n_qubits": p.n_qubits(),
        "tapered": p.tapered,
        "symmetry_generators": p.generators,
        "n_terms": p.h.len(),
        "hamiltonian": hamiltonian_value(&p.h)?,
    });
    Ok(Outcome { result, series_csv: None, hamiltonian_json: Some(pauli_sum_to_json(&p.h)? + "\n") })
}

fn spectrum(cfg: &RunConfig, p: &Problem) -> CliResult<Outcome> {
    let mut vals = eigvalsh(&p.h.to_dense()?);
    match cfg.str("levels")? {
        "all" => {}
        _ => vals.truncate(cfg.get::<usize>("levels")?),
    }
    Ok(Outcome::result(json!({
        "n_qubits": p.n_qubits(),
        "ground_energy": vals.first(),
        "eigenvalues": vals,
    })))
}

fn estimation_mode(cfg: &RunConfig) -> CliResult<EstimationMode> {
    match cfg.str("mode")? {
        "exact" => Ok(EstimationMode::Exact),
        "shots" => Ok(EstimationMode::Shots(cfg.get("shots")?)),
        m => Err(CliError::Input(format!("unknown mode '{m}'; expected exact or shots"))),
    }
}

fn vqe(cfg: &RunConfig, p: &Problem) -> CliResult<Outcome> {
    let ansatz = match cfg.str("ansatz")? {
        "uccsd" => {
            let ints = p.ints.as_ref().ok_or_else(|| CliError::Input("UCCSD needs an FCIDUMP input".into()))?;
            if p.scheme != Some(EncodingScheme::JordanWigner) || p.tapered {
                return Err(CliError::Input("UCCSD needs the untapered Jordan-Wigner encoding".into()));
            }
            let (up, down) = spin_counts(ints)?;
            let occ = hartree_fock_occupation(ints.n_spatial, up, down, SpinOrdering::Blocked);
            uccsd_ansatz(2 * ints.n_spatial, up + down, occ, SpinOrdering::Blocked)?
        }
        "hea" => hardware_efficient_ansatz(p.n_qubits(), cfg.get("layers")?)?,
        a => return Err(CliError::Input(format!("unknown ansatz '{a}'"))),
    };
    let iters = cfg.get("max_iters")?;
    let optimizer = match cfg.str("optimizer")? {
        "gradient_descent" => OptimizerConfig::gradient_descent(iters),
        "spsa" => OptimizerConfig::spsa(iters, cfg.seed()),
        "adam" => OptimizerConfig::adam(iters, cfg.seed()),
        o => return Err(CliError::Input(format!("unknown optimizer '{o}'"))),
    };
    let r = vqe_minimize(&p.h, &ansatz, &optimizer, estimation_mode(cfg)?, None)?;
    Ok(Outcome::result(serde_json::to_value(&r)?))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn evolve(cfg: &RunConfig, p: &Problem) -> CliResult<Outcome> {
    let method = cfg.str("method")?;
    let t: f64 = cfg.get("time")?;
    let steps: Vec<usize> = cfg.list("steps")?;
    let orders: Vec<usize> = cfg.list("orders")?;
    if steps.is_empty() || steps.contains(&0) {
        return Err(CliError::Input("steps must be positive".into()));
    }
    let psi = p.initial_state(cfg.str("initial")?, cfg.seed())?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["method", "order", "steps", "time", "operator_error", "state_error", "bound"])
        .map_err(|e| CliError::Input(e.to_string()))?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut series = Vec::new();
    for &order in &orders {
        let mut points = Vec::new();
        for &n in &steps {
            let (operator_error, report) = match method {
                "trotter" => (Some(trotter_operator_error(&p.h, t, n, order)?), trotter_evolve(&p.h, &psi, t, n, order)?),
                "taylor" => (None, taylor_evolve(&LcuDecomposition::from_pauli_sum(&p.h)?, &psi, t, Some(n), order)?),
                m => return Err(CliError::Input(format!("unknown method '{m}'; expected trotter or taylor"))),
            };
            csv.write_record([
                method.to_string(),
                order.to_string(),
                n.to_string(),
                t.to_string(),
                fmt(operator_error),
                fmt(report.measured_error),
                fmt(report.bound),
            ])
            .map_err(|e| CliError::Input(e.to_string()))?;
            points.push(json!({
                "steps": n,
                "operator_error": operator_error,
                "state_error": report.measured_error,
                "bound": report.bound,
                "success_probabilities": report.success_probabilities,
            }));
        }
        let errors: Vec<f64> = points.iter().filter_map(|pt| pt["operator_error"].as_f64()).collect();
        let xs: Vec<f64> = steps.iter().map(|&n| n as f64).collect();
        let slope = if errors.len() == xs.len() { log_slope(&xs, &errors) } else { None };
        series.push(json!({ "order": order, "fitted_slope": slope, "points": points }));
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    let result = json!({ "method": method, "time": t, "n_qubits": p.n_qubits(), "series": series });
    Ok(Outcome { result, series_csv: Some(String::from_utf8(bytes).expect("csv output is UTF-8")), hamiltonian_json: None })
}

fn qpe_cmd(cfg: &RunConfig, p: &Problem, rng: &mut ChaCha20Rng) -> CliResult<Outcome> {
    let t: usize = cfg.get("ancillas")?;
    let bound = p.h.one_norm();
    let window = |key: &str, auto: f64| -> CliResult<f64> {
        match cfg.str(key)? {
            "auto" => Ok(auto),
            _ => cfg.get(key),
        }
    };
    // The top of the window maps to phase 1 = 0, so leave a margin.
    let e1 = window("e_min", -bound)?;
    let e2 = window("e_max", bound * 1.05 + 1e-9)?;
    let psi = p.initial_state(cfg.str("initial")?, cfg.seed())?;
    let (res, energy) = qpe_energy(&p.h, &psi, t, e1, e2, cfg.get("shots")?, rng)?;
    let (ground, _) = p.ground_state()?;
    Ok(Outcome::result(json!({
        "energy": energy,
        "resolution": (e2 - e1) / (1u64 << t) as f64,
        "window": [e1, e2],
        "exact_ground_energy": ground,
        "qpe": res,
    })))
}

fn qite_cmd(cfg: &RunConfig, p: &Problem) -> CliResult<Outcome> {
    let psi = p.initial_state(cfg.str("initial")?, cfg.seed())?;
    let traj = qite(&p.h, &psi, cfg.get("dtau")?, cfg.get("steps")?, None)?;
    let (ground, _) = p.ground_state()?;
    let deviation = traj
        .energies
        .iter()
        .zip(&traj.reference_energies)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Outcome::result(json!({
        "final_energy": traj.energies.last(),
        "exact_ground_energy": ground,
        "max_reference_deviation": deviation,
        "trajectory": traj,
    })))
}

fn noise_model(cfg: &RunConfig) -> CliResult<NoiseModel> {
    if !cfg.flag("noise")? {
        return Ok(NoiseModel::noiseless());
    }
    Ok(NoiseModel::new(cfg.get("depolarizing")?, cfg.get("amplitude_damping")?, cfg.get("phase_damping")?)?)
}

/// One dense gate preparing `psi` from `|0...0>`.
fn preparation(psi: &StateVector) -> CliResult<Circuit> {
    let n = psi.n_qubits();
    let gate = Gate::Unitary { qubits: (0..n).collect(), matrix: unitary_with_first_column(psi.amplitudes()) };
    Ok(Circuit::from_gates(n, [gate])?)
}

/// `<H>` under `noise`: exact from the density matrix, or sampled per
/// qubit-wise commuting group with the basis change appended to the
/// (noisy) circuit. Covariances within a group are ignored in `sigma`.
fn noisy_energy(
    h: &PauliSum,
    circuit: &Circuit,
    noise: &NoiseModel,
    mode: EstimationMode,
    rng: &mut ChaCha20Rng,
) -> chemsim::Result<(f64, f64)> {
    let shots = match mode {
        EstimationMode::Exact => {
            let rho = run_noisy_density(circuit, &[], noise)?;
            return Ok((rho.expectation(h)?.re, 0.0));
        }
        EstimationMode::Shots(s) => s,
    };
    let n = h.n_qubits();
    let (mut mean, mut var) = (h.constant().re, 0.0);
    for group in h.without_identity().group_commuting(Commutation::QubitWise) {
        let (x, z) = group.iter().fold((0, 0), |(x, z), (p, _)| (x | p.x_mask(), z | p.z_mask()));
        let basis = PauliString::from_masks(n, x, z, 0)?;
        let mut c = circuit.clone();
        for g in measurement_basis_change(&basis) {
            c.push(g)?;
        }
        let run = run_noisy(&c, &[], noise, shots, rng)?;
        for (p, coeff) in group.iter() {
            let diag = PauliString::from_masks(n, 0, p.support(), 0)?;
            let (m, s) = run.pauli_expectation(&diag)?;
            mean += coeff.re * m;
            var += (coeff.re * s).powi(2);
        }
    }
    Ok((mean, var.sqrt()))
}

fn mitigate(cfg: &RunConfig, p: &Problem, rng: &mut ChaCha20Rng) -> CliResult<Outcome> {
    let psi = p.initial_state(cfg.str("initial")?, cfg.seed())?;
    let exact = psi.expectation(&p.h)?.re;
    let shots: u64 = cfg.get("shots")?;
    let result = match cfg.str("technique")? {
        "zne" => {
            let noise = noise_model(cfg)?;
            let mode = estimation_mode(cfg)?;
            let circuit = preparation(&psi)?;
            let raw = noisy_energy(&p.h, &circuit, &noise, mode, rng)?;
            let scales: Vec<f64> = cfg.list("scales")?;
            let z = zne(|c| noisy_energy(&p.h, &circuit, &noise.scaled(c), mode, rng), &scales, cfg.get("zne_order")?)?;
            json!({
                "technique": "zne",
                "exact": exact,
                "raw": raw.0,
                "raw_sigma": raw.1,
                "mitigated": z.value,
                "mitigated_sigma": z.sigma,
                "noise": noise,
                "zne": z,
            })
        }
        "readout" => {
            let n = p.n_qubits();
            let rate: f64 = cfg.get("flip_rate")?;
            let lambda = product_confusion_matrix(&vec![(rate, rate); n])?;
            let sampled = |ideal: &[f64], rng: &mut ChaCha20Rng| -> chemsim::Result<Vec<f64>> {
                let read = apply_readout(ideal, &lambda, None)?;
                let counts = sample_counts(&read, shots, rng)?;
                Ok(counts.iter().map(|&k| k as f64 / shots as f64).collect())
            };
            let mut data = Vec::with_capacity(1 << n);
            for k in 0..1usize << n {
                let ideal: Vec<f64> = (0..1usize << n).map(|j| (j == k) as u8 as f64).collect();
                let measured = sampled(&ideal, rng)?;
                data.push((ideal, measured));
            }
            let cal = calibrate_readout(&data)?;
            let ideal = psi.probabilities();
            let measured = sampled(&ideal, rng)?;
            let m = mitigate_readout(&measured, &cal)?;
            if m.ill_conditioned {
                return Err(CliError::Numerical(format!(
                    "confusion matrix is ill-conditioned (condition number {:.3e})",
                    m.condition_number
                )));
            }
            let confusion: Vec<Vec<f64>> = cal.lambda.row_iter().map(|r| r.iter().copied().collect()).collect();
            json!({
                "technique": "readout",
                "raw_total_variation": total_variation(&measured, &ideal),
                "mitigated_total_variation": total_variation(&m.probabilities, &ideal),
                "condition_number": m.condition_number,
                "calibration_residual": cal.residual,
                "confusion_matrix": confusion,
                "raw": measured,
                "mitigated": m.probabilities,
                "unprojected": m.unprojected,
                "ideal": ideal,
            })
        }
        "postselect" => {
            let ints = p.ints.as_ref().ok_or_else(|| CliError::Input("post-selection needs an FCIDUMP input".into()))?;
            if p.scheme != Some(EncodingScheme::JordanWigner) || p.tapered {
                return Err(CliError::Input("post-selection needs the untapered Jordan-Wigner encoding".into()));
            }
            let (up, down) = spin_counts(ints)?;
            let checks = number_parity_checks(ints.n_spatial, SpinOrdering::Blocked, up, down);
            let r = symmetry_verified_energy(&p.h, &psi, &checks, cfg.get("flip_rate")?, shots, rng)?;
            json!({ "technique": "postselect", "result": r })
        }
        t => return Err(CliError::Input(format!("unknown technique '{t}'; expected zne, readout or postselect"))),
    };
    Ok(Outcome::result(result))
}
