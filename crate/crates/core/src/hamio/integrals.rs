use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One- and two-electron integrals over spatial orbitals.
///
/// `eri(p, r, q, s)` is the chemists'-notation integral `(pr|qs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub n_spatial: usize,
    pub n_electrons: usize,
    /// Twice the total spin projection.
    pub ms2: i64,
    pub e_nuc: f64,
    pub h: DMatrix<f64>,
    eri: Vec<f64>,
}

/// The eight index orderings sharing a value under real-orbital symmetry.
pub fn eri_permutations(p: usize, r: usize, q: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, r, q, s),
        (r, p, q, s),
        (p, r, s, q),
        (r, p, s, q),
        (q, s, p, r),
        (s, q, p, r),
        (q, s, r, p),
        (s, q, r, p),
    ]
}

impl MolecularIntegrals {
    pub fn zeros(n_spatial: usize, n_electrons: usize) -> Self {
        MolecularIntegrals {
            n_spatial,
            n_electrons,
            ms2: 0,
            e_nuc: 0.0,
            h: DMatrix::zeros(n_spatial, n_spatial),
            eri: vec![0.0; n_spatial.pow(4)],
        }
    }

    fn idx(&self, p: usize, r: usize, q: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + r) * n + q) * n + s
    }

    pub fn eri(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        self.eri[self.idx(p, r, q, s)]
    }

    /// Sets one entry without touching its symmetry partners.
    pub fn set_eri_raw(&mut self, p: usize, r: usize, q: usize, s: usize, v: f64) {
        let i = self.idx(p, r, q, s);
        self.eri[i] = v;
    }

    /// Sets `(pr|qs)` and its seven symmetry partners.
    pub fn set_eri(&mut self, p: usize, r: usize, q: usize, s: usize, v: f64) {
        for (a, b, c, d) in eri_permutations(p, r, q, s) {
            self.set_eri_raw(a, b, c, d, v);
        }
    }

    /// Sets `h_pr` and `h_rp`.
    pub fn set_h(&mut self, p: usize, r: usize, v: f64) {
        self.h[(p, r)] = v;
        self.h[(r, p)] = v;
    }

    pub fn eri_slice(&self) -> &[f64] {
        &self.eri
    }

    /// The ERI tensor as the `n^2 x n^2` matrix `V[(pr), (qs)]`.
    pub fn eri_matrix(&self) -> DMatrix<f64> {
        let n = self.n_spatial;
        DMatrix::from_fn(n * n, n * n, |a, b| {
            self.eri(a / n, a % n, b / n, b % n)
        })
    }

    /// Checks symmetry of `h` and the eightfold ERI symmetry within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n_spatial;
        if self.h.nrows() != n || self.h.ncols() != n || self.eri.len() != n.pow(4) {
            return Err(Error::Validation("integral arrays do not match NORB".into()));
        }
        for p in 0..n {
            for r in 0..n {
                let d = (self.h[(p, r)] - self.h[(r, p)]).abs();
                if d > tol {
                    return Err(Error::Validation(format!(
                        "h[{p},{r}] differs from h[{r},{p}] by {d:.3e}"
                    )));
                }
            }
        }
        for p in 0..n {
            for r in 0..n {
                for q in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, r, q, s);
                        for (a, b, c, d) in eri_permutations(p, r, q, s) {
                            let w = self.eri(a, b, c, d);
                            if (v - w).abs() > tol {
                                return Err(Error::Validation(format!(
                                    "({p}{r}|{q}{s}) = {v} but ({a}{b}|{c}{d}) = {w}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
