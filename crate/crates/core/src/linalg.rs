//! Dense complex linear algebra used as the numerical oracle backbone.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Hermitian
//! problems go through `SymmetricEigen`, which handles complex Hermitian
//! input. Eigenvalues are always returned in ascending order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // Symmetrize first; SymmetricEigen only reads one triangle.
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let fk = f(v);
        for r in 0..n {
            scaled[(r, k)] *= fk;
        }
    }
    scaled * vecs.adjoint()
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_function(h, |e| C64::from_polar(1.0, -e * t))
}

/// `exp(-tau H)` for Hermitian `H` (imaginary-time propagator).
pub fn expm_hermitian_imag(h: &CMatrix, tau: f64) -> CMatrix {
    hermitian_function(h, |e| C64::new((-e * tau).exp(), 0.0))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    eigvalsh(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Deviation `max |U†U - 1|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_deviation(u) < tol
}

/// Eigenphases in `(-pi, pi]` of a unitary (or any normal) matrix.
///
/// The Hermitian parts `A = (U + U†)/2` and `B = (U - U†)/2i` commute, so
/// `B` is diagonalized inside each eigenspace of `A`. Schur iteration
/// converges poorly on the highly degenerate unitaries met here.
pub fn unitary_eigenphases(u: &CMatrix) -> Vec<f64> {
    let n = u.nrows();
    if n == 0 {
        return Vec::new();
    }
    let ud = u.adjoint();
    let a = (u + &ud) * C64::new(0.5, 0.0);
    let b = (u - &ud) * C64::new(0.0, -0.5);
    let (re, vecs) = eigh(&a);
    let tol = 1e-9 * u.norm().max(1.0);
    let mut phases = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && re[end] - re[end - 1] < tol {
            end += 1;
        }
        let q = vecs.columns(start, end - start);
        let im = eigvalsh(&(q.adjoint() * &b * q));
        for (k, y) in im.into_iter().enumerate() {
            phases.push(y.atan2(re[start + k]));
        }
        start = end;
    }
    phases.sort_by(f64::total_cmp);
    phases
}

/// Matrix with the given first column, completed to a unitary by
/// Gram-Schmidt against the standard basis.
pub fn unitary_with_first_column(col: &[C64]) -> CMatrix {
    let n = col.len();
    let mut basis: Vec<CVector> = Vec::with_capacity(n);
    let first = CVector::from_column_slice(col);
    basis.push(&first / C64::new(first.norm(), 0.0));
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[k] = ONE;
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut m = CMatrix::zeros(n, n);
    for (k, b) in basis.iter().enumerate() {
        m.set_column(k, b);
    }
    m
}

/// Result of a thresholded generalized Hermitian eigenproblem.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending eigenvalues of the projected problem.
    pub values: Vec<f64>,
    /// Coefficient vectors in the original (non-orthogonal) basis, one per column.
    pub vectors: CMatrix,
    /// Overlap eigenvalues that survived the cutoff.
    pub kept: Vec<f64>,
    /// Overlap eigenvalues that were discarded.
    pub discarded: Vec<f64>,
}

/// Solves `H c = E S c` by canonical orthogonalization: overlap eigenvectors
/// with eigenvalue below `cutoff` are dropped before diagonalizing.
pub fn generalized_eigh(h: &CMatrix, s: &CMatrix, cutoff: f64) -> Result<GeneralizedEigen> {
    if h.shape() != s.shape() || !h.is_square() {
        return Err(Error::Dimension {
            expected: s.nrows(),
            found: h.nrows(),
        });
    }
    let dim = s.nrows();
    let (svals, svecs) = eigh(s);
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    let mut cols = Vec::new();
    for (k, &v) in svals.iter().enumerate() {
        if v > cutoff {
            kept.push(v);
            cols.push(svecs.column(k) / C64::new(v.sqrt(), 0.0));
        } else {
            discarded.push(v);
        }
    }
    if cols.is_empty() {
        return Err(Error::DegenerateBasis(dim));
    }
    let x = CMatrix::from_columns(&cols);
    let hp = x.adjoint() * h * &x;
    let (values, y) = eigh(&hp);
    Ok(GeneralizedEigen {
        values,
        vectors: x * y,
        kept,
        discarded,
    })
}

/// Solves the real symmetric system `(A + lambda I) x = b` in the
/// least-squares sense via the SVD.
pub fn regularized_solve(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = a.ncols();
    let normal = a.transpose() * a + DMatrix::<f64>::identity(n, n) * lambda;
    let rhs = a.transpose() * b;
    let svd = normal.svd(true, true);
    svd.solve(&rhs, 1e-14).unwrap_or_else(|_| DVector::zeros(n))
}

pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix column phases so the distribution does not depend on the QR sign convention.
    let mut out = q;
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for row in 0..n {
                out[(row, k)] *= ph;
            }
        }
    }
    out
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// Compares two sorted spectra element by element.
pub fn spectra_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let h = random_hermitian(6, &mut rng);
        let (vals, vecs) = eigh(&h);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            6,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs_diff(&back, &h) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenphases_of_random_unitary_match_hermitian_route() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let h = random_hermitian(8, &mut rng);
        let u = expm_hermitian(&h, 0.9);
        let mut expected: Vec<f64> = eigvalsh(&h)
            .iter()
            .map(|e| C64::from_polar(1.0, -0.9 * e).arg())
            .collect();
        expected.sort_by(f64::total_cmp);
        let got = unitary_eigenphases(&u);
        assert!(spectra_distance(&got, &expected) < 1e-10, "{got:?} vs {expected:?}");
    }

    #[test]
    fn completed_unitary_keeps_first_column() {
        let col = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO, ZERO];
        let u = unitary_with_first_column(&col);
        assert!(is_unitary(&u, 1e-12));
        for (k, c) in col.iter().enumerate() {
            assert!((u[(k, 0)] - c).norm() < 1e-14);
        }
    }

    #[test]
    fn canonical_orthogonalization_drops_null_directions() {
        // Two identical basis vectors: overlap has one zero eigenvalue.
        let s = CMatrix::from_element(2, 2, ONE);
        let h = CMatrix::from_element(2, 2, C64::new(-0.5, 0.0));
        let sol = generalized_eigh(&h, &s, 1e-8).unwrap();
        assert_eq!(sol.values.len(), 1);
        assert!((sol.values[0] + 0.5).abs() < 1e-12);
        assert_eq!(sol.discarded.len(), 1);
    }

    #[test]
    fn degenerate_basis_is_an_error() {
        let s = CMatrix::zeros(2, 2);
        let h = CMatrix::zeros(2, 2);
        assert!(matches!(
            generalized_eigh(&h, &s, 1e-8),
            Err(Error::DegenerateBasis(2))
        ));
    }
}
