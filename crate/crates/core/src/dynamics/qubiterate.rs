use serde::Serialize;

use super::lcu::LcuDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs_diff, unitary_eigenphases, CMatrix, CVector, C64, ZERO};
use crate::pauli::check_dense_cap;

const RANK_TOL: f64 = 1e-10;
const EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct QubiterateReport {
    pub alpha: f64,
    /// Eigenvalues of `H / α`.
    pub eigenvalues: Vec<f64>,
    pub expected_phases: Vec<f64>,
    pub phases: Vec<f64>,
    /// Largest phase mismatch after matching the two multisets.
    pub phase_error: f64,
    /// `max | <g|W|g> - H/α |`.
    pub block_error: f64,
}

/// Greedy matching of two phase multisets on the circle; `∞` if their sizes
/// differ.
pub fn phase_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let mut best = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).rem_euclid(std::f64::consts::TAU);
            let d = d.min(std::f64::consts::TAU - d);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `W_Q = (2|g><g| - 1) · SELECT` with `|g> = W_p|0>`. The report checks
/// the encoded block and the eigenphases `±arccos λ` on the invariant
/// subspace spanned by `|g>|λ>` and `W_Q|g>|λ>`.
pub fn build_qubiterate(x: &LcuDecomposition) -> Result<(CMatrix, QubiterateReport)> {
    if x.unitaries.iter().any(|u| !u.is_hermitian()) {
        return Err(Error::Argument("qubiterate needs Hermitian LCU terms".into()));
    }
    let n = x.n_qubits;
    let a = x.n_ancillas();
    check_dense_cap(n + a)?;
    let ds = 1usize << n;
    let dim = ds << a;
    let mut sel = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = vec![ZERO; dim];
        v[col] = C64::new(1.0, 0.0);
        x.apply_select(&mut v);
        for (row, amp) in v.into_iter().enumerate() {
            sel[(row, col)] = amp;
        }
    }
    let g: CVector = x.prepare_matrix().column(0).into_owned();
    // Index layout is ancilla-major: (l << n) | s.
    let lift = |v: &CVector| -> CVector {
        let mut out = CVector::zeros(dim);
        for l in 0..(1 << a) {
            for s in 0..ds {
                out[(l << n) | s] = g[l] * v[s];
            }
        }
        out
    };
    let mut refl = CMatrix::zeros(dim, dim);
    for l in 0..(1 << a) {
        for m in 0..(1 << a) {
            let gg = g[l] * g[m].conj() * 2.0 - if l == m { C64::new(1.0, 0.0) } else { ZERO };
            for s in 0..ds {
                refl[((l << n) | s, (m << n) | s)] = gg;
            }
        }
    }
    let w = &refl * &sel;

    let h = x.to_pauli_sum().to_dense()? / C64::new(x.alpha, 0.0);
    let mut block = CMatrix::zeros(ds, ds);
    for c in 0..ds {
        let mut e = CVector::zeros(ds);
        e[c] = C64::new(1.0, 0.0);
        let we = &w * lift(&e);
        for r in 0..ds {
            block[(r, c)] = (0..(1 << a)).map(|l| g[l].conj() * we[(l << n) | r]).sum();
        }
    }
    let block_error = max_abs_diff(&block, &h);

    let (vals, vecs) = eigh(&h);
    let mut basis: Vec<CVector> = Vec::new();
    let push = |v: CVector, basis: &mut Vec<CVector>| {
        let mut v = v;
        for b in basis.iter() {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > RANK_TOL {
            basis.push(v / C64::new(nv, 0.0));
        }
    };
    let mut expected = Vec::new();
    for (i, &lam) in vals.iter().enumerate() {
        let v = lift(&vecs.column(i).into_owned());
        let wv = &w * &v;
        push(v, &mut basis);
        push(wv, &mut basis);
        let lam = lam.clamp(-1.0, 1.0);
        if 1.0 - lam.abs() < EDGE_TOL {
            expected.push(lam.acos());
        } else {
            expected.push(lam.acos());
            expected.push(-lam.acos());
        }
    }
    let q = CMatrix::from_columns(&basis);
    let projected = q.adjoint() * &w * &q;
    let phases = unitary_eigenphases(&projected);
    let phase_error = phase_multiset_distance(&expected, &phases);
    let report = QubiterateReport {
        alpha: x.alpha,
        eigenvalues: vals,
        expected_phases: expected,
        phases,
        phase_error,
        block_error,
    };
    Ok((w, report))
}
