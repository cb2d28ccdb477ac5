use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::cholesky::{cholesky_factorize, LowRankFactors};
use super::integrals::MolecularIntegrals;
use crate::error::Result;
use crate::fermion::{jordan_wigner, FermionOperator, Ladder, SpinOrdering};
use crate::linalg::{CMatrix, C64};
use crate::pauli::PauliSum;

/// One factor in its eigenbasis: `L = W diag(ℓ) Wᵀ`, `v_pq = ½ ℓ_p ℓ_q`.
#[derive(Debug, Clone, Serialize)]
pub struct LowRankTerm {
    pub rotation: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// `H = E + Σ h'_pr E_pr + ½ Σ_γ (Σ L^γ_pr E_pr)²` where `E_pr` sums over
/// spin and `h'` absorbs the reordering correction `-½ Σ_q (pq|qs)`.
#[derive(Debug, Clone, Serialize)]
pub struct LowRankHamiltonian {
    pub n_spatial: usize,
    pub constant: f64,
    pub one_body: DMatrix<f64>,
    pub one_body_rotation: DMatrix<f64>,
    pub one_body_eigenvalues: Vec<f64>,
    pub terms: Vec<LowRankTerm>,
    pub factors: LowRankFactors,
}

fn sorted_eigen(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvectors, eig.eigenvalues.iter().copied().collect())
}

impl LowRankHamiltonian {
    pub fn new(ints: &MolecularIntegrals, tol: f64) -> Result<Self> {
        ints.validate(1e-10)?;
        let n = ints.n_spatial;
        let factors = cholesky_factorize(ints, tol)?;
        let mut one_body = ints.h.clone();
        for p in 0..n {
            for s in 0..n {
                let corr: f64 = (0..n).map(|q| ints.eri(p, q, q, s)).sum();
                one_body[(p, s)] -= 0.5 * corr;
            }
        }
        let (one_body_rotation, one_body_eigenvalues) = sorted_eigen(&one_body);
        let terms = factors
            .factors
            .iter()
            .map(|l| {
                let (rotation, eigenvalues) = sorted_eigen(l);
                let v = DMatrix::from_fn(n, n, |p, q| 0.5 * eigenvalues[p] * eigenvalues[q]);
                LowRankTerm { rotation, eigenvalues, v }
            })
            .collect();
        Ok(LowRankHamiltonian {
            n_spatial: n,
            constant: ints.e_nuc,
            one_body,
            one_body_rotation,
            one_body_eigenvalues,
            terms,
            factors,
        })
    }

    pub fn n_factors(&self) -> usize {
        self.terms.len()
    }

    fn spin_modes(&self, p: usize) -> [usize; 2] {
        let n = self.n_spatial;
        [SpinOrdering::Blocked.mode(n, p, false), SpinOrdering::Blocked.mode(n, p, true)]
    }

    /// The factorized form as a fermion operator, blocked spin ordering.
    pub fn to_fermion_operator(&self) -> Result<FermionOperator> {
        let n = self.n_spatial;
        let m = 2 * n;
        let mut h = FermionOperator::identity(m, C64::new(self.constant, 0.0));
        let excitation = |mat: &DMatrix<f64>| -> Result<FermionOperator> {
            let mut e = FermionOperator::zero(m);
            for p in 0..n {
                for r in 0..n {
                    if mat[(p, r)] == 0.0 {
                        continue;
                    }
                    for (a, b) in self.spin_modes(p).into_iter().zip(self.spin_modes(r)) {
                        e.add_product(
                            &[Ladder::create(a), Ladder::annihilate(b)],
                            C64::new(mat[(p, r)], 0.0),
                        )?;
                    }
                }
            }
            Ok(e)
        };
        h = h.add(&excitation(&self.one_body)?)?;
        for l in &self.factors.factors {
            let e = excitation(l)?;
            h = h.add(&e.mul(&e)?.scale(C64::new(0.5, 0.0)))?;
        }
        Ok(h)
    }

    /// `Σ_p t_p n_p` over both spins, in the one-body eigenbasis.
    pub fn one_body_diagonal(&self) -> Result<PauliSum> {
        let n = self.n_spatial;
        let mut op = FermionOperator::zero(2 * n);
        for (p, &t) in self.one_body_eigenvalues.iter().enumerate() {
            for a in self.spin_modes(p) {
                op.add_product(&[Ladder::create(a), Ladder::annihilate(a)], C64::new(t, 0.0))?;
            }
        }
        jordan_wigner(&op)
    }

    /// `Σ_pq v_pq n_p n_q` with spin-summed number operators, in the
    /// eigenbasis of factor `gamma`.
    pub fn factor_diagonal(&self, gamma: usize) -> Result<PauliSum> {
        let n = self.n_spatial;
        let m = 2 * n;
        let v = &self.terms[gamma].v;
        let mut op = FermionOperator::zero(m);
        for p in 0..n {
            for q in 0..n {
                for a in self.spin_modes(p) {
                    for b in self.spin_modes(q) {
                        op.add_product(
                            &[
                                Ladder::create(a),
                                Ladder::annihilate(a),
                                Ladder::create(b),
                                Ladder::annihilate(b),
                            ],
                            C64::new(v[(p, q)], 0.0),
                        )?;
                    }
                }
            }
        }
        jordan_wigner(&op)
    }

    pub fn rotation_complex(w: &DMatrix<f64>) -> CMatrix {
        w.map(|x| C64::new(x, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::build_molecular_hamiltonian;

    #[test]
    fn factorized_operator_matches_direct() {
        let text = include_str!("../../tests/data/h2_sto6g.fcidump");
        let ints = super::super::parse_fcidump(text).unwrap();
        let lr = LowRankHamiltonian::new(&ints, 1e-12).unwrap();
        let direct = build_molecular_hamiltonian(&ints, SpinOrdering::Blocked).unwrap();
        assert!(lr.to_fermion_operator().unwrap().max_diff(&direct) < 1e-10);
    }
}
