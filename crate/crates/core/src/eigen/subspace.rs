use serde::Serialize;

use crate::dynamics::trotter_circuit;
use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator, Ladder};
use crate::linalg::{eigh, expm_hermitian, expm_hermitian_imag, generalized_eigh, CMatrix, CVector, C64, ONE};
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::StateVector;

/// Default overlap-eigenvalue cutoff for canonical orthogonalization.
pub const SUBSPACE_CUTOFF: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;

/// `H c = E S c` over a labelled, possibly non-orthogonal basis.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceProblem {
    pub labels: Vec<String>,
    #[serde(skip)]
    pub overlap: CMatrix,
    #[serde(skip)]
    pub hamiltonian: CMatrix,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceResult {
    pub method: String,
    /// Ascending eigenvalue estimates.
    pub energies: Vec<f64>,
    pub dimension: usize,
    pub kept_dimension: usize,
    pub discarded_singular_values: Vec<f64>,
    pub problem: SubspaceProblem,
}

impl SubspaceResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |a, c| a.max(c.norm()))
}

impl SubspaceProblem {
    /// Builds the problem from explicit basis vectors.
    pub fn from_vectors(labels: Vec<String>, vectors: &[Vec<C64>], h: &PauliSum, threshold: f64) -> Result<Self> {
        let m = vectors.len();
        if m == 0 {
            return Err(Error::Argument("subspace basis is empty".into()));
        }
        let hv: Vec<Vec<C64>> = vectors.iter().map(|v| h.apply(v)).collect();
        let dot = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
        let overlap = CMatrix::from_fn(m, m, |a, b| dot(&vectors[a], &vectors[b]));
        let hamiltonian = CMatrix::from_fn(m, m, |a, b| dot(&vectors[a], &hv[b]));
        Ok(SubspaceProblem { labels, overlap, hamiltonian, threshold })
    }

    /// Hermiticity of both matrices and positivity of the overlap.
    pub fn check(&self) -> Result<()> {
        let dev = hermitian_deviation(&self.overlap).max(hermitian_deviation(&self.hamiltonian));
        if dev > HERMITIAN_TOL {
            return Err(Error::Validation(format!("subspace matrices deviate from Hermitian by {dev:.2e}")));
        }
        let (vals, _) = eigh(&self.overlap);
        if vals[0] < -HERMITIAN_TOL {
            return Err(Error::NotPsd { pivot: vals[0] });
        }
        Ok(())
    }

    pub fn solve(self, method: &str) -> Result<SubspaceResult> {
        self.check()?;
        let g = generalized_eigh(&self.hamiltonian, &self.overlap, self.threshold)?;
        Ok(SubspaceResult {
            method: method.to_string(),
            energies: g.values,
            dimension: self.labels.len(),
            kept_dimension: g.kept.len(),
            discarded_singular_values: g.discarded,
            problem: self,
        })
    }
}

/// Quantum subspace expansion over `{E_a |Ψ0>}`. The basis must contain the
/// identity.
pub fn qse(h: &PauliSum, psi0: &StateVector, excitations: &[PauliSum], threshold: f64) -> Result<SubspaceResult> {
    if excitations.is_empty() {
        return Err(Error::Argument("excitation set is empty".into()));
    }
    let has_identity = excitations
        .iter()
        .any(|e| e.len() == 1 && e.iter().all(|(p, c)| p.is_identity() && c.norm() > 0.0));
    if !has_identity {
        return Err(Error::Argument("excitation set must include the identity".into()));
    }
    for e in excitations {
        if e.n_qubits() != psi0.n_qubits() {
            return Err(Error::Dimension { expected: psi0.n_qubits(), found: e.n_qubits() });
        }
    }
    let vectors: Vec<Vec<C64>> = excitations.iter().map(|e| e.apply(psi0.amplitudes())).collect();
    let labels = excitations.iter().map(|e| e.to_string()).collect();
    SubspaceProblem::from_vectors(labels, &vectors, h, threshold)?.solve("qse")
}

/// All Pauli strings of weight at most `k` on `n` qubits, identity first.
pub fn pauli_excitations(n: usize, k: usize) -> Result<Vec<PauliSum>> {
    let mut out = Vec::new();
    for code in 0..(1u64 << (2 * n)) {
        let (x, z) = (code & ((1 << n) - 1), code >> n);
        if ((x | z).count_ones() as usize) <= k {
            let p = PauliString::from_masks(n, x, z, 0)?;
            out.push(PauliSum::from_string(p, ONE));
        }
    }
    out.sort_by_key(|s| s.iter().next().map(|(p, _)| (p.weight(), p.x_mask(), p.z_mask())));
    Ok(out)
}

/// Identity plus Jordan-Wigner images of `a_p† a_q` (order 1) and, at order
/// 2, `a_p† a_q† a_s a_r` with `p < q`, `r < s`.
pub fn fermionic_excitations(n_modes: usize, order: usize) -> Result<Vec<PauliSum>> {
    let mut out = vec![PauliSum::identity(n_modes, ONE)];
    if order >= 1 {
        for p in 0..n_modes {
            for q in 0..n_modes {
                if p != q {
                    let f = FermionOperator::product(n_modes, &[Ladder::create(p), Ladder::annihilate(q)], ONE)?;
                    out.push(jordan_wigner(&f)?);
                }
            }
        }
    }
    if order >= 2 {
        for p in 0..n_modes {
            for q in p + 1..n_modes {
                for r in 0..n_modes {
                    for s in r + 1..n_modes {
                        if (p, q) == (r, s) {
                            continue;
                        }
                        let ops = [Ladder::create(p), Ladder::create(q), Ladder::annihilate(s), Ladder::annihilate(r)];
                        out.push(jordan_wigner(&FermionOperator::product(n_modes, &ops, ONE)?)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// How basis states are propagated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Propagation {
    Dense,
    /// `n_steps` product-formula steps of the given order per basis spacing.
    Trotter { n_steps: usize, order: usize },
}

/// Quantum filter diagonalization over `|v_k> = e^{-ikΔtH}|Ψ0>`,
/// `k = 0..d`.
pub fn qfd(
    h: &PauliSum,
    psi0: &StateVector,
    dt: f64,
    d: usize,
    propagation: Propagation,
    threshold: f64,
) -> Result<SubspaceResult> {
    if d == 0 {
        return Err(Error::Argument("qfd needs d >= 1".into()));
    }
    let mut vectors = vec![psi0.amplitudes().to_vec()];
    let mut labels = vec!["v0".to_string()];
    match propagation {
        Propagation::Dense => {
            let u = expm_hermitian(&h.to_dense()?, dt);
            let mut v = psi0.to_vector();
            for k in 1..d {
                v = &u * v;
                vectors.push(v.iter().copied().collect());
                labels.push(format!("v{k}"));
            }
        }
        Propagation::Trotter { n_steps, order } => {
            let c = trotter_circuit(h, dt, n_steps, order)?;
            let mut v = psi0.clone();
            for k in 1..d {
                v.apply_circuit(&c, &[])?;
                vectors.push(v.amplitudes().to_vec());
                labels.push(format!("v{k}"));
            }
        }
    }
    SubspaceProblem::from_vectors(labels, &vectors, h, threshold)?.solve("qfd")
}

/// Where imaginary-time basis states come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImaginaryTimeSource {
    Dense,
    /// Full-domain QITE steps.
    Qite,
}

/// Quantum Lanczos over normalized `|v_k> ∝ e^{-kΔτH}|Ψ0>`, `k = 0..d`.
pub fn qlanczos(
    h: &PauliSum,
    psi0: &StateVector,
    dtau: f64,
    d: usize,
    source: ImaginaryTimeSource,
    threshold: f64,
) -> Result<SubspaceResult> {
    if d < 2 {
        return Err(Error::Argument("qlanczos needs d >= 2".into()));
    }
    let mut vectors = vec![psi0.amplitudes().to_vec()];
    match source {
        ImaginaryTimeSource::Dense => {
            let g = expm_hermitian_imag(&h.to_dense()?, dtau);
            let mut v = psi0.to_vector();
            for _ in 1..d {
                v = &g * v;
                let nv = v.norm();
                if nv == 0.0 {
                    return Err(Error::Annihilation { norm: nv });
                }
                v /= C64::new(nv, 0.0);
                vectors.push(v.iter().copied().collect());
            }
        }
        ImaginaryTimeSource::Qite => {
            let mut v = psi0.clone();
            let domain: Vec<usize> = (0..h.n_qubits()).collect();
            for _ in 1..d {
                v = super::qite::qite_step(h, &v, dtau, &domain)?.state;
                vectors.push(v.amplitudes().to_vec());
            }
        }
    }
    let labels = (0..d).map(|k| format!("v{k}")).collect();
    SubspaceProblem::from_vectors(labels, &vectors, h, threshold)?.solve("qlanczos")
}

#[derive(Debug, Clone, Serialize)]
pub struct QeomResult {
    /// Ascending excitation energies `ΔE_μ`.
    pub gaps: Vec<f64>,
    pub dimension: usize,
    pub kept_dimension: usize,
    pub discarded_singular_values: Vec<f64>,
}

fn dcomm(a: &PauliSum, h: &PauliSum, c: &PauliSum) -> Result<PauliSum> {
    // [A, H, C] = ([[A, H], C] + [A, [H, C]]) / 2
    let x = a.commutator(h)?.commutator(c)?;
    let y = a.commutator(&h.commutator(c)?)?;
    Ok(&(&x + &y) * 0.5)
}

/// Equation-of-motion excitation energies over `{O_μ} ∪ {O_μ†}`.
///
/// With `B` the combined basis, `M_ab = <[B_a†, H, B_b]>` and the metric
/// `V_ab = <[B_a†, B_b]>` are both Hermitian. `V` is diagonalized, directions
/// with `|v|` below `threshold` are dropped, and the reduced pencil is solved.
/// Roots of positive norm are the excitation energies.
pub fn qeom(h: &PauliSum, psi0: &StateVector, basis: &[PauliSum], threshold: f64) -> Result<QeomResult> {
    if basis.is_empty() {
        return Err(Error::Argument("qEOM basis is empty".into()));
    }
    let mut ops: Vec<PauliSum> = basis.to_vec();
    ops.extend(basis.iter().map(|o| o.adjoint()));
    let m = ops.len();
    let adj: Vec<PauliSum> = ops.iter().map(|o| o.adjoint()).collect();
    let mut lm = CMatrix::zeros(m, m);
    let mut vm = CMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let l = psi0.expectation(&dcomm(&adj[a], h, &ops[b])?)?;
            let v = psi0.expectation(&adj[a].commutator(&ops[b])?)?;
            lm[(a, b)] = l;
            lm[(b, a)] = l.conj();
            vm[(a, b)] = v;
            vm[(b, a)] = v.conj();
        }
    }
    let (vals, vecs) = eigh(&vm);
    let mut cols = Vec::new();
    let mut signs = Vec::new();
    let mut discarded = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v.abs() > threshold {
            cols.push(vecs.column(k) / C64::new(v.abs().sqrt(), 0.0));
            signs.push(v.signum());
        } else {
            discarded.push(v);
        }
    }
    if cols.is_empty() {
        return Err(Error::DegenerateBasis(m));
    }
    let x = CMatrix::from_columns(&cols);
    let lr = x.adjoint() * &lm * &x;
    let r = cols.len();
    // J L y = E y with J = diag(signs).
    let jl = CMatrix::from_fn(r, r, |i, j| lr[(i, j)] * signs[i]);
    let schur = nalgebra::Schur::new(jl.clone());
    let (_, t) = schur.unpack();
    let mut gaps = Vec::new();
    for i in 0..r {
        let e = t[(i, i)];
        if e.im.abs() > 1e-8 * e.norm().max(1.0) {
            log::warn!("qEOM root {e} is complex; metric or state is inconsistent");
            continue;
        }
        // Norm sign of the eigenvector from the null space of (JL - E).
        let shifted = &jl - CMatrix::identity(r, r) * C64::new(e.re, 0.0);
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Fit("SVD failed".into()))?;
        let k = (0..svd.singular_values.len())
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap_or(0);
        let y: CVector = vt.row(k).adjoint();
        let nrm: f64 = y.iter().zip(&signs).map(|(c, s)| c.norm_sqr() * s).sum();
        if nrm > 0.0 {
            gaps.push(e.re);
        }
    }
    gaps.sort_by(f64::total_cmp);
    Ok(QeomResult { gaps, dimension: m, kept_dimension: r, discarded_singular_values: discarded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn identity_basis_gives_rayleigh_quotient() {
        let h = PauliSum::from_labels(&[("ZX", 0.5), ("YY", -0.3), ("IZ", 0.2)]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let psi = StateVector::from_amplitudes(random_state(4, &mut rng)).unwrap();
        let r = qse(&h, &psi, &[PauliSum::identity(2, ONE)], SUBSPACE_CUTOFF).unwrap();
        assert!((r.energies[0] - psi.expectation(&h).unwrap().re).abs() < 1e-12);
    }

    #[test]
    fn complete_pauli_basis_gives_spectrum() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let h = PauliSum::random(2, 8, &mut rng).unwrap();
        let psi = StateVector::from_amplitudes(random_state(4, &mut rng)).unwrap();
        let r = qse(&h, &psi, &pauli_excitations(2, 2).unwrap(), SUBSPACE_CUTOFF).unwrap();
        let exact = eigvalsh(&h.to_dense().unwrap());
        assert_eq!(r.energies.len(), 4);
        for (a, b) in r.energies.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn qfd_single_vector_is_rayleigh_quotient() {
        let h = PauliSum::from_labels(&[("ZX", 0.5), ("YY", -0.3)]).unwrap();
        let psi = StateVector::basis(2, 1).unwrap();
        let r = qfd(&h, &psi, 0.3, 1, Propagation::Dense, SUBSPACE_CUTOFF).unwrap();
        assert!((r.energies[0] - psi.expectation(&h).unwrap().re).abs() < 1e-12);
    }

    #[test]
    fn qlanczos_collapses_on_ground_state() {
        let h = PauliSum::from_labels(&[("ZI", 0.5), ("XX", -0.3)]).unwrap();
        let (vals, vecs) = eigh(&h.to_dense().unwrap());
        let psi = StateVector::from_vector(&vecs.column(0).into_owned()).unwrap();
        let r = qlanczos(&h, &psi, 0.2, 4, ImaginaryTimeSource::Dense, SUBSPACE_CUTOFF).unwrap();
        assert_eq!(r.kept_dimension, 1);
        assert!((r.energies[0] - vals[0]).abs() < 1e-12);
    }

    #[test]
    fn qeom_eigen_operator() {
        // H = Z/2 + const: O† = σ+ raises |1> to |0>, gap 1 from |1>.
        let h = PauliSum::from_labels(&[("Z", 0.5), ("I", 0.2)]).unwrap();
        let psi = StateVector::basis(1, 1).unwrap();
        let raise = PauliSum::from_labels(&[("X", 0.5)]).unwrap().try_add(
            &PauliSum::from_labels(&[("Y", 0.5)]).unwrap().scale(crate::linalg::I),
        );
        let r = qeom(&h, &psi, &[raise.unwrap()], SUBSPACE_CUTOFF).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert!((r.gaps[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qeom_complete_basis_gives_gaps() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let h = PauliSum::random(2, 8, &mut rng).unwrap();
        let (vals, vecs) = eigh(&h.to_dense().unwrap());
        let psi = StateVector::from_vector(&vecs.column(0).into_owned()).unwrap();
        let basis: Vec<PauliSum> = pauli_excitations(2, 2).unwrap().into_iter().skip(1).collect();
        let r = qeom(&h, &psi, &basis, SUBSPACE_CUTOFF).unwrap();
        let want: Vec<f64> = vals[1..].iter().map(|e| e - vals[0]).collect();
        assert_eq!(r.gaps.len(), want.len(), "{:?}", r.gaps);
        for (a, b) in r.gaps.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
