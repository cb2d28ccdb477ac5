//! Turning an input file into a qubit Hamiltonian.

use chemsim::fermion::{
    build_molecular_hamiltonian, encode, encode_occupation, find_z2_symmetries, hartree_fock_occupation, taper,
    EncodingScheme, SpinOrdering,
};
use chemsim::hamio::{pauli_sum_from_json, read_fcidump, MolecularIntegrals};
use chemsim::linalg::{eigh, random_state};
use chemsim::simulator::StateVector;
use chemsim::PauliSum;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub struct Problem {
    pub h: PauliSum,
    /// Qubits before tapering.
    pub full_qubits: usize,
    pub generators: Vec<String>,
    pub ints: Option<MolecularIntegrals>,
    pub scheme: Option<EncodingScheme>,
    pub tapered: bool,
}

pub fn parse_scheme(name: &str, ints: &MolecularIntegrals) -> CliResult<EncodingScheme> {
    let (up, down) = spin_counts(ints)?;
    Ok(match name {
        "jw" | "jordan_wigner" => EncodingScheme::JordanWigner,
        "parity" => EncodingScheme::Parity,
        "parity_reduced" => EncodingScheme::ParityTwoQubitReduced { up_odd: up % 2 == 1, down_odd: down % 2 == 1 },
        "bk" | "bravyi_kitaev" => EncodingScheme::BravyiKitaev,
        _ => return Err(CliError::Input(format!("unknown encoding '{name}'"))),
    })
}

/// Electrons per spin from NELEC and MS2.
pub fn spin_counts(ints: &MolecularIntegrals) -> CliResult<(usize, usize)> {
    let n = ints.n_electrons as i64;
    let ms2 = ints.ms2;
    if (n + ms2) % 2 != 0 || ms2.abs() > n {
        return Err(CliError::Input(format!("NELEC = {n} and MS2 = {ms2} are inconsistent")));
    }
    Ok((((n + ms2) / 2) as usize, ((n - ms2) / 2) as usize))
}

impl Problem {
    /// Pauli-sum JSON inputs (`.json`) are used as they are; anything else
    /// is read as FCIDUMP and encoded.
    pub fn load(cfg: &RunConfig) -> CliResult<Self> {
        let input = cfg.str("input")?;
        let do_taper = cfg.flag("taper")?;
        if input.ends_with(".json") {
            if do_taper {
                return Err(CliError::Input("tapering needs an FCIDUMP input".into()));
            }
            let text = std::fs::read_to_string(input)?;
            let h = pauli_sum_from_json(&text).map_err(|e| CliError::Input(format!("{input}: {e}")))?;
            return Ok(Problem { full_qubits: h.n_qubits(), h, generators: Vec::new(), ints: None, scheme: None, tapered: false });
        }
        let ints = read_fcidump(input).map_err(|e| CliError::Input(format!("{input}: {e}")))?;
        let scheme = parse_scheme(cfg.str("encoding")?, &ints)?;
        let h = encode(&build_molecular_hamiltonian(&ints, SpinOrdering::Blocked)?, scheme)?;
        let full_qubits = h.n_qubits();
        let mut problem = Problem { h, full_qubits, generators: Vec::new(), ints: Some(ints), scheme: Some(scheme), tapered: false };
        if do_taper {
            let sym = find_z2_symmetries(&problem.h)?;
            let reference = problem.hartree_fock()?;
            let sector = sym.with_reference_state(&reference)?;
            problem.generators = sector.report().generators;
            problem.h = taper(&problem.h, &sector)?;
            problem.tapered = true;
        }
        Ok(problem)
    }

    pub fn n_qubits(&self) -> usize {
        self.h.n_qubits()
    }

    fn hartree_fock(&self) -> CliResult<StateVector> {
        let (Some(ints), Some(scheme)) = (&self.ints, self.scheme) else {
            return Err(CliError::Input("the Hartree-Fock state needs an FCIDUMP input".into()));
        };
        if self.tapered {
            return Err(CliError::Input("the Hartree-Fock state is not available after tapering".into()));
        }
        let (up, down) = spin_counts(ints)?;
        let occ = hartree_fock_occupation(ints.n_spatial, up, down, SpinOrdering::Blocked);
        let b = encode_occupation(scheme, 2 * ints.n_spatial, occ)?;
        Ok(StateVector::basis(self.n_qubits(), b)?)
    }

    /// Dense ground state of `h`.
    pub fn ground_state(&self) -> CliResult<(f64, StateVector)> {
        let (vals, vecs) = eigh(&self.h.to_dense()?);
        Ok((vals[0], StateVector::from_vector(&vecs.column(0).into_owned())?))
    }

    /// `hf`, `ground`, `plus`, `random` (seeded) or a basis index.
    pub fn initial_state(&self, name: &str, seed: u64) -> CliResult<StateVector> {
        let n = self.n_qubits();
        match name {
            "hf" => self.hartree_fock(),
            "ground" => Ok(self.ground_state()?.1),
            "plus" => {
                let mut psi = StateVector::zero(n)?;
                for q in 0..n {
                    psi.apply_gate(&chemsim::simulator::Gate::H(q))?;
                }
                Ok(psi)
            }
            "random" => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
                Ok(StateVector::from_amplitudes(random_state(1 << n, &mut rng))?)
            }
            other => {
                let b: usize = other.parse().map_err(|_| CliError::Input(format!("unknown initial state '{other}'")))?;
                Ok(StateVector::basis(n, b)?)
            }
        }
    }
}
