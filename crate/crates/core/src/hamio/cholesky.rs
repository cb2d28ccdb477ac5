use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::integrals::MolecularIntegrals;
use crate::error::{Error, Result};

pub const DEFAULT_CHOLESKY_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;

/// `(pr|qs) ≈ Σ_γ L^γ_pr L^γ_qs`.
#[derive(Debug, Clone, Serialize)]
pub struct LowRankFactors {
    pub n_spatial: usize,
    pub factors: Vec<DMatrix<f64>>,
    /// Frobenius norm of the reconstruction error.
    pub residual: f64,
}

impl LowRankFactors {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn reconstruct(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        self.factors.iter().map(|l| l[(p, r)] * l[(q, s)]).sum()
    }
}

/// Pivoted Cholesky of a symmetric PSD matrix. Stops once the trace of the
/// residual drops below `tol`, which bounds its Frobenius norm.
pub fn pivoted_cholesky(v: &DMatrix<f64>, tol: f64) -> Result<Vec<DVector<f64>>> {
    let dim = v.nrows();
    if v.ncols() != dim {
        return Err(Error::Dimension { expected: dim, found: v.ncols() });
    }
    let asym = (v - v.transpose()).amax();
    if asym > PSD_TOL {
        return Err(Error::Validation(format!("ERI matrix not symmetric ({asym:.3e})")));
    }
    let mut diag: Vec<f64> = (0..dim).map(|i| v[(i, i)]).collect();
    if let Some(&d) = diag.iter().find(|&&d| d < -PSD_TOL) {
        return Err(Error::NotPsd { pivot: d });
    }
    let mut cols: Vec<DVector<f64>> = Vec::new();
    while cols.len() < dim {
        let trace: f64 = diag.iter().map(|d| d.max(0.0)).sum();
        if trace < tol {
            break;
        }
        let mut piv = 0;
        for i in 1..dim {
            if diag[i] > diag[piv] {
                piv = i;
            }
        }
        let dp = diag[piv];
        if dp <= 0.0 {
            break;
        }
        let mut col: DVector<f64> = v.column(piv).into_owned();
        for l in &cols {
            col.axpy(-l[piv], l, 1.0);
        }
        col /= dp.sqrt();
        for i in 0..dim {
            diag[i] -= col[i] * col[i];
            if diag[i] < -PSD_TOL {
                return Err(Error::NotPsd { pivot: diag[i] });
            }
        }
        diag[piv] = 0.0;
        cols.push(col);
    }
    Ok(cols)
}

/// Low-rank factorization of the two-electron integrals.
pub fn cholesky_factorize(ints: &MolecularIntegrals, tol: f64) -> Result<LowRankFactors> {
    let n = ints.n_spatial;
    let v = ints.eri_matrix();
    let cols = pivoted_cholesky(&v, tol)?;
    let factors: Vec<DMatrix<f64>> = cols
        .iter()
        .map(|c| {
            let l = DMatrix::from_fn(n, n, |p, r| c[p * n + r]);
            (&l + l.transpose()) * 0.5
        })
        .collect();
    let mut recon = DMatrix::<f64>::zeros(n * n, n * n);
    for c in &cols {
        recon.ger(1.0, c, c, 1.0);
    }
    let residual = (v - recon).norm();
    log::debug!("cholesky: {} factors, residual {residual:.3e}", factors.len());
    Ok(LowRankFactors { n_spatial: n, factors, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_gives_one_factor() {
        let n = 3;
        let w = DMatrix::from_fn(n, n, |p, r| 0.3 + 0.1 * (p + r) as f64);
        let mut ints = MolecularIntegrals::zeros(n, 2);
        for p in 0..n {
            for r in 0..n {
                for q in 0..n {
                    for s in 0..n {
                        ints.set_eri_raw(p, r, q, s, w[(p, r)] * w[(q, s)]);
                    }
                }
            }
        }
        let f = cholesky_factorize(&ints, 1e-10).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(pivoted_cholesky(&v, 1e-10), Err(Error::NotPsd { .. })));
    }
}
