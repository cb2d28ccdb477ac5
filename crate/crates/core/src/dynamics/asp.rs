use serde::Serialize;

use super::report::amplitudes_json;
use super::trotter::trotter_circuit;
use crate::error::{Error, Result};
use crate::fermion::{
    build_molecular_hamiltonian, hartree_fock_occupation, jordan_wigner, FermionOperator, Ladder,
    SpinOrdering,
};
use crate::hamio::MolecularIntegrals;
use crate::linalg::{eigh, C64};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

const GAP_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct AspReport {
    pub total_time: f64,
    pub n_steps: usize,
    /// `|<ground(H0 + H1)|psi(T)>|²`.
    pub fidelity: f64,
    pub ground_energy: f64,
    pub final_energy: f64,
    /// Smallest gap over the sampled schedule points.
    pub min_gap: f64,
    pub warnings: Vec<String>,
    pub final_state: Vec<[f64; 2]>,
    #[serde(skip)]
    pub state: StateVector,
}

fn ground(h: &PauliSum) -> Result<(f64, f64, StateVector)> {
    let (vals, vecs) = eigh(&h.to_dense()?);
    let gap = if vals.len() > 1 { vals[1] - vals[0] } else { f64::INFINITY };
    Ok((vals[0], gap, StateVector::from_vector(&vecs.column(0).into_owned())?))
}

/// Evolves under `H(s) = H0 + s H1` with `s = t/T`, sampled at segment
/// midpoints, one second-order Trotter step per segment. Starts from the
/// ground state of `H0` unless `initial` is given.
pub fn adiabatic_prepare(
    h0: &PauliSum,
    h1: &PauliSum,
    initial: Option<&StateVector>,
    total_time: f64,
    n_steps: usize,
) -> Result<AspReport> {
    if n_steps == 0 {
        return Err(Error::Argument("n_steps must be at least 1".into()));
    }
    if h0.n_qubits() != h1.n_qubits() {
        return Err(Error::Dimension { expected: h0.n_qubits(), found: h1.n_qubits() });
    }
    let mut warnings = Vec::new();
    let mut state = match initial {
        Some(s) => s.clone(),
        None => {
            let (_, gap, g) = ground(h0)?;
            if gap < GAP_WARN {
                warnings.push(format!("initial Hamiltonian ground state is degenerate (gap {gap:.2e})"));
            }
            g
        }
    };
    let dt = total_time / n_steps as f64;
    let mut min_gap = f64::INFINITY;
    for k in 0..n_steps {
        let s = (k as f64 + 0.5) / n_steps as f64;
        let hs = h0 + &(h1 * s);
        let (_, gap, _) = ground(&hs)?;
        min_gap = min_gap.min(gap);
        if total_time != 0.0 {
            state.apply_circuit(&trotter_circuit(&hs, dt, 1, 2)?, &[])?;
        }
    }
    if min_gap < GAP_WARN {
        warnings.push(format!("gap closes to {min_gap:.2e} along the path"));
        log::warn!("adiabatic path gap {min_gap:.2e}");
    }
    let target = h0 + h1;
    let (e0, _, g) = ground(&target)?;
    let fidelity = g.fidelity(&state)?;
    let final_energy = state.expectation(&target)?.re;
    Ok(AspReport {
        total_time,
        n_steps,
        fidelity,
        ground_energy: e0,
        final_energy,
        min_gap,
        warnings,
        final_state: amplitudes_json(&state),
        state,
    })
}

/// Closed-shell Fock operator `F_pq = h_pq + Σ_i [2(pq|ii) - (pi|iq)]` over
/// the lowest `N/2` orbitals.
pub fn fock_matrix(ints: &MolecularIntegrals) -> nalgebra::DMatrix<f64> {
    let n = ints.n_spatial;
    let nocc = ints.n_electrons / 2;
    nalgebra::DMatrix::from_fn(n, n, |p, q| {
        ints.h[(p, q)]
            + (0..nocc)
                .map(|i| 2.0 * ints.eri(p, q, i, i) - ints.eri(p, i, i, q))
                .sum::<f64>()
    })
}

/// `H0 = F + <HF|H - F|HF>` and `H1 = H - H0` under Jordan-Wigner, blocked
/// spins.
pub fn fock_path(ints: &MolecularIntegrals) -> Result<(PauliSum, PauliSum, StateVector)> {
    let n = ints.n_spatial;
    let m = 2 * n;
    let f = fock_matrix(ints);
    let mut fop = FermionOperator::zero(m);
    for p in 0..n {
        for q in 0..n {
            for down in [false, true] {
                let a = SpinOrdering::Blocked.mode(n, p, down);
                let b = SpinOrdering::Blocked.mode(n, q, down);
                fop.add_product(&[Ladder::create(a), Ladder::annihilate(b)], C64::new(f[(p, q)], 0.0))?;
            }
        }
    }
    let h = jordan_wigner(&build_molecular_hamiltonian(ints, SpinOrdering::Blocked)?)?;
    let fq = jordan_wigner(&fop)?;
    let n_up = (ints.n_electrons as i64 + ints.ms2) / 2;
    let n_down = ints.n_electrons as i64 - n_up;
    let occ = hartree_fock_occupation(n, n_up as usize, n_down as usize, SpinOrdering::Blocked);
    let hf = StateVector::basis(m, occ as usize)?;
    let shift = hf.expectation(&(&h - &fq))?.re;
    let h0 = &fq + &PauliSum::identity(m, C64::new(shift, 0.0));
    let h1 = &h - &h0;
    Ok((h0, h1, hf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_keeps_state() {
        let h0 = PauliSum::from_labels(&[("ZI", 1.0), ("IZ", 0.5)]).unwrap();
        let h1 = PauliSum::from_labels(&[("XX", 0.3)]).unwrap();
        let psi = StateVector::basis(2, 2).unwrap();
        let r = adiabatic_prepare(&h0, &h1, Some(&psi), 0.0, 4).unwrap();
        assert_eq!(r.state, psi);
    }

    #[test]
    fn fock_start_is_hartree_fock_energy() {
        let ints = crate::hamio::parse_fcidump(include_str!("../../tests/data/h2_sto6g.fcidump")).unwrap();
        let (h0, h1, hf) = fock_path(&ints).unwrap();
        let h = &h0 + &h1;
        let e_hf = hf.expectation(&h).unwrap().re;
        assert!((hf.expectation(&h0).unwrap().re - e_hf).abs() < 1e-12);
        assert!((e_hf - (-1.125292577717591)).abs() < 1e-9);
    }
}
