use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_deviation, CMatrix, C64, ONE, ZERO};
use crate::simulator::{Circuit, Gate};

const UNITARY_TOL: f64 = 1e-10;
const SKIP_TOL: f64 = 1e-15;

/// A rotation in the adjacent plane `(k, k + 1)`:
/// `[[cos θ, e^{iφ} sin θ], [-e^{-iφ} sin θ, cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GivensRotation {
    pub k: usize,
    pub l: usize,
    pub theta: f64,
    pub phi: f64,
}

impl GivensRotation {
    pub fn block(&self) -> [[C64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        [[C64::new(c, 0.0), e * s], [-e.conj() * s, C64::new(c, 0.0)]]
    }

    pub fn to_matrix(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::identity(n, n);
        let b = self.block();
        m[(self.k, self.k)] = b[0][0];
        m[(self.k, self.l)] = b[0][1];
        m[(self.l, self.k)] = b[1][0];
        m[(self.l, self.l)] = b[1][1];
        m
    }
}

/// `U = G_1† G_2† ... G_m† D` with `D = diag(phases)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GivensNetwork {
    pub n: usize,
    pub rotations: Vec<GivensRotation>,
    pub phases: Vec<C64>,
}

impl GivensNetwork {
    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.phases.clone()));
        for g in self.rotations.iter().rev() {
            m = g.to_matrix(self.n).adjoint() * m;
        }
        m
    }
}

/// Reduces `U` to a diagonal by nulling each column bottom-up with
/// adjacent-plane rotations.
pub fn givens_decompose(u: &CMatrix) -> Result<GivensNetwork> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::Dimension { expected: n, found: u.ncols() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let mut w = u.clone();
    let mut rotations = Vec::new();
    for j in 0..n {
        for i in (j + 1..n).rev() {
            let b = w[(i, j)];
            if b.norm() < SKIP_TOL {
                continue;
            }
            let a = w[(i - 1, j)];
            let theta = b.norm().atan2(a.norm());
            let phi = if a.norm() < SKIP_TOL { -b.arg() } else { a.arg() - b.arg() };
            let g = GivensRotation { k: i - 1, l: i, theta, phi };
            let blk = g.block();
            for col in 0..n {
                let x = w[(i - 1, col)];
                let y = w[(i, col)];
                w[(i - 1, col)] = blk[0][0] * x + blk[0][1] * y;
                w[(i, col)] = blk[1][0] * x + blk[1][1] * y;
            }
            w[(i, j)] = ZERO;
            rotations.push(g);
        }
    }
    let phases = (0..n).map(|i| w[(i, i)]).collect();
    Ok(GivensNetwork { n, rotations, phases })
}

fn two_mode_gate(q0: usize, q1: usize, g: [[C64; 2]; 2]) -> Gate {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = g[0][0];
    m[(1, 2)] = g[0][1];
    m[(2, 1)] = g[1][0];
    m[(2, 2)] = g[1][1];
    m[(3, 3)] = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    Gate::Unitary { qubits: vec![q0, q1], matrix: m }
}

/// Jordan-Wigner circuit for the orbital rotation `a_p† -> Σ_q u_qp a_q†`,
/// applied to each block of modes starting at the given qubit offsets.
pub fn orbital_rotation_circuit(u: &CMatrix, offsets: &[usize], n_qubits: usize) -> Result<Circuit> {
    let net = givens_decompose(u)?;
    let mut c = Circuit::new(n_qubits);
    for &o in offsets {
        for (p, d) in net.phases.iter().enumerate() {
            if (d - ONE).norm() > SKIP_TOL {
                let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, *d]));
                c.push(Gate::Unitary { qubits: vec![o + p], matrix: m })?;
            }
        }
        for g in net.rotations.iter().rev() {
            let b = g.block();
            let adj = [[b[0][0].conj(), b[1][0].conj()], [b[0][1].conj(), b[1][1].conj()]];
            c.push(two_mode_gate(o + g.k, o + g.l, adj))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn identity_is_empty() {
        let net = givens_decompose(&CMatrix::identity(4, 4)).unwrap();
        assert!(net.rotations.is_empty());
        assert!(net.phases.iter().all(|p| (p - ONE).norm() < 1e-15));
    }

    #[test]
    fn real_rotation_is_one_givens() {
        let (s, c) = 0.3f64.sin_cos();
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        );
        let net = givens_decompose(&u).unwrap();
        assert_eq!(net.rotations.len(), 1);
        assert!(max_abs_diff(&net.to_matrix(), &u) < 1e-14);
    }

    #[test]
    fn random_unitary_reconstructs() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in [2, 3, 4, 5] {
            let u = random_unitary(n, &mut rng);
            let net = givens_decompose(&u).unwrap();
            assert!(net.rotations.len() <= n * (n - 1) / 2);
            assert!(max_abs_diff(&net.to_matrix(), &u) < 1e-10);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(givens_decompose(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn single_particle_block_of_circuit_is_u() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let n = 3;
        let u = random_unitary(n, &mut rng);
        let dense = orbital_rotation_circuit(&u, &[0], n).unwrap().to_dense(&[]).unwrap();
        for p in 0..n {
            for q in 0..n {
                assert!((dense[(1 << q, 1 << p)] - u[(q, p)]).norm() < 1e-12);
            }
        }
        assert!((dense[(0, 0)] - ONE).norm() < 1e-12);
    }
}
