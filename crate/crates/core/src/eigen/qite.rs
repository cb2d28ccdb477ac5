use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, expm_hermitian_imag, CMatrix, CVector, C64};
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::StateVector;

const SOLVE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct QiteStep {
    /// Coefficients of `A = Σ x_i P_i` over [`QiteStep::paulis`].
    pub x: Vec<f64>,
    #[serde(serialize_with = "labels")]
    pub paulis: Vec<PauliString>,
    /// Coefficients of the follow-up fits, if any were needed.
    pub refinements: Vec<Vec<f64>>,
    /// `|| ψ' - ψ_out ||` after all fits.
    pub residual: f64,
    /// True when the normal equations were singular and a pseudo-inverse
    /// was used.
    pub singular: bool,
    #[serde(skip)]
    pub state: StateVector,
}

fn labels<S: serde::Serializer>(p: &[PauliString], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(|p| p.to_string()))
}

/// Non-identity Pauli strings supported on `domain`.
pub fn domain_paulis(n: usize, domain: &[usize]) -> Result<Vec<PauliString>> {
    if domain.iter().any(|&q| q >= n) {
        return Err(Error::Argument("domain qubit outside the register".into()));
    }
    let k = domain.len();
    let mut out = Vec::with_capacity((1 << (2 * k)) - 1);
    for code in 1u64..(1 << (2 * k)) {
        let (mut x, mut z) = (0u64, 0u64);
        for (i, &q) in domain.iter().enumerate() {
            x |= (code >> i & 1) << q;
            z |= (code >> (k + i) & 1) << q;
        }
        out.push(PauliString::from_masks(n, x, z, 0)?);
    }
    Ok(out)
}

/// Least-squares fits per step in [`qite_step`].
pub const QITE_FITS: usize = 3;

/// Stop refitting once the state is this close to the target.
const FIT_TOL: f64 = 1e-12;

/// One imaginary-time step `e^{-Δτ h}|ψ>` replaced by unitaries `e^{iA}`.
///
/// With `ψ'` the normalized imaginary-time state, `x` minimizes
/// `|| ψ' - (1 + iΣ x_i P_i) ψ ||` over real `x` and Pauli strings on
/// `domain`, and `e^{iA}` is applied exactly. The fit is repeated from the
/// rotated state toward the same `ψ'`, up to [`QITE_FITS`] times, since one
/// linear fit rotates by `sin φ` rather than `φ`.
pub fn qite_step(h: &PauliSum, psi: &StateVector, dtau: f64, domain: &[usize]) -> Result<QiteStep> {
    qite_step_with(h, psi, dtau, domain, QITE_FITS)
}

/// [`qite_step`] with an explicit fit budget; `max_fits = 1` is the plain
/// single-fit step.
pub fn qite_step_with(h: &PauliSum, psi: &StateVector, dtau: f64, domain: &[usize], max_fits: usize) -> Result<QiteStep> {
    if !(dtau > 0.0) {
        return Err(Error::Argument("imaginary time step must be positive".into()));
    }
    if max_fits == 0 {
        return Err(Error::Argument("at least one fit is required".into()));
    }
    let n = psi.n_qubits();
    if h.n_qubits() != n {
        return Err(Error::Dimension { expected: n, found: h.n_qubits() });
    }
    let paulis = domain_paulis(n, domain)?;
    let dense: Vec<CMatrix> = paulis.iter().map(|p| p.to_dense()).collect::<Result<_>>()?;
    let target = expm_hermitian_imag(&h.to_dense()?, dtau) * psi.to_vector();
    let tn = target.norm();
    if tn == 0.0 {
        return Err(Error::Annihilation { norm: tn });
    }
    let target = target / C64::new(tn, 0.0);
    let mut state = psi.clone();
    let mut fits: Vec<Vec<f64>> = Vec::new();
    let mut singular = false;
    let mut residual = (&target - state.to_vector()).norm();
    while fits.len() < max_fits && residual > FIT_TOL {
        let (x, sing) = fit(&paulis, &state, &target)?;
        singular |= sing;
        let mut a = CMatrix::zeros(1 << n, 1 << n);
        for (p, &xi) in dense.iter().zip(&x) {
            if xi != 0.0 {
                a += p * C64::new(xi, 0.0);
            }
        }
        // exp(iA) = exp(-i (-1) A)
        state = StateVector::from_vector(&(expm_hermitian(&a, -1.0) * state.to_vector()))?;
        fits.push(x);
        residual = (&target - state.to_vector()).norm();
    }
    if singular {
        log::debug!("QITE normal equations were singular; used the pseudo-inverse");
    }
    let x = fits.first().cloned().unwrap_or_else(|| vec![0.0; paulis.len()]);
    Ok(QiteStep { x, refinements: fits.into_iter().skip(1).collect(), paulis, residual, singular, state })
}

/// Real `x` minimizing `|| target - psi - iΣ x_i P_i psi ||`.
fn fit(paulis: &[PauliString], psi: &StateVector, target: &CVector) -> Result<(Vec<f64>, bool)> {
    let delta: Vec<C64> = target.iter().zip(psi.amplitudes()).map(|(t, p)| t - p).collect();
    let columns: Vec<Vec<C64>> = paulis.iter().map(|p| p.apply(psi.amplitudes())).collect();
    let m = paulis.len();
    let dot = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
    let s = DMatrix::from_fn(m, m, |i, j| dot(&columns[i], &columns[j]).re);
    let b = DVector::from_fn(m, |i, _| dot(&columns[i], &delta).im);
    let svd = s.svd(true, true);
    let cutoff = SOLVE_CUTOFF * svd.singular_values.max().max(1.0);
    let singular = svd.singular_values.iter().any(|&v| v <= cutoff);
    let x = svd.solve(&b, cutoff).map_err(|e| Error::Fit(e.to_string()))?;
    Ok((x.iter().copied().collect(), singular))
}

#[derive(Debug, Clone, Serialize)]
pub struct QiteTrajectory {
    pub taus: Vec<f64>,
    pub energies: Vec<f64>,
    /// Energies of the dense normalized `e^{-τH}|ψ0>` at the same times.
    pub reference_energies: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub state: StateVector,
}

/// Repeated [`qite_step`] on the whole Hamiltonian over `domain` (all
/// qubits if `None`).
pub fn qite(h: &PauliSum, psi0: &StateVector, dtau: f64, n_steps: usize, domain: Option<&[usize]>) -> Result<QiteTrajectory> {
    let n = psi0.n_qubits();
    let all: Vec<usize> = (0..n).collect();
    let domain = domain.unwrap_or(&all);
    let hd = h.to_dense()?;
    let mut psi = psi0.clone();
    let mut reference = psi0.to_vector();
    let g = expm_hermitian_imag(&hd, dtau);
    let energy = |v: &nalgebra::DVector<C64>| (v.adjoint() * &hd * v)[(0, 0)].re;
    let mut out = QiteTrajectory {
        taus: vec![0.0],
        energies: vec![psi.expectation(h)?.re],
        reference_energies: vec![energy(&reference)],
        residuals: Vec::new(),
        state: psi.clone(),
    };
    for k in 1..=n_steps {
        let step = qite_step(h, &psi, dtau, domain)?;
        psi = step.state;
        reference = &g * reference;
        let nr = reference.norm();
        reference /= C64::new(nr, 0.0);
        out.taus.push(k as f64 * dtau);
        out.energies.push(psi.expectation(h)?.re);
        out.reference_energies.push(energy(&reference));
        out.residuals.push(step.residual);
    }
    out.state = psi;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    #[test]
    fn ground_state_is_fixed_point() {
        let h = PauliSum::from_labels(&[("ZI", 0.5), ("XX", -0.3), ("IZ", 0.1)]).unwrap();
        let (_, vecs) = eigh(&h.to_dense().unwrap());
        let psi = StateVector::from_vector(&vecs.column(0).into_owned()).unwrap();
        let s = qite_step(&h, &psi, 0.1, &[0, 1]).unwrap();
        assert!(s.x.iter().all(|v| v.abs() < 1e-12));
        assert!(s.state.fidelity(&psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn domain_sizes() {
        assert_eq!(domain_paulis(3, &[0, 2]).unwrap().len(), 15);
        assert!(domain_paulis(2, &[2]).is_err());
    }
}
