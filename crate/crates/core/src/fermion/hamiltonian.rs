use serde::{Deserialize, Serialize};

use super::operator::{FermionOperator, Ladder};
use crate::error::Result;
use crate::hamio::MolecularIntegrals;
use crate::linalg::C64;

/// How spatial orbital `p` and spin `σ` map onto a mode index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpinOrdering {
    /// Spin-up modes `0..n`, then spin-down modes `n..2n`.
    #[default]
    Blocked,
    /// Mode `2p + σ`.
    Interleaved,
}

impl SpinOrdering {
    /// Mode index of orbital `p` with spin `down`.
    pub fn mode(self, n_spatial: usize, p: usize, down: bool) -> usize {
        match self {
            SpinOrdering::Blocked => p + if down { n_spatial } else { 0 },
            SpinOrdering::Interleaved => 2 * p + down as usize,
        }
    }

    /// Spin of `mode`; the inverse of [`SpinOrdering::mode`].
    pub fn is_down(self, n_spatial: usize, mode: usize) -> bool {
        match self {
            SpinOrdering::Blocked => mode >= n_spatial,
            SpinOrdering::Interleaved => mode % 2 == 1,
        }
    }
}

/// `E_nuc + Σ h_pr a_p† a_r + ½ Σ (pr|qs) a_p† a_q† a_s a_r`, summed over
/// spin orbitals with spin conserved at each vertex.
pub fn build_molecular_hamiltonian(
    ints: &MolecularIntegrals,
    ordering: SpinOrdering,
) -> Result<FermionOperator> {
    ints.validate(1e-10)?;
    let n = ints.n_spatial;
    let m = 2 * n;
    let mut op = FermionOperator::identity(m, C64::new(ints.e_nuc, 0.0));
    let mode = |p: usize, down: bool| ordering.mode(n, p, down);
    for spin in [false, true] {
        for p in 0..n {
            for r in 0..n {
                let h = ints.h[(p, r)];
                if h != 0.0 {
                    op.add_product(
                        &[Ladder::create(mode(p, spin)), Ladder::annihilate(mode(r, spin))],
                        C64::new(h, 0.0),
                    )?;
                }
            }
        }
    }
    for s1 in [false, true] {
        for s2 in [false, true] {
            for p in 0..n {
                for r in 0..n {
                    for q in 0..n {
                        for s in 0..n {
                            let v = ints.eri(p, r, q, s);
                            if v == 0.0 {
                                continue;
                            }
                            op.add_product(
                                &[
                                    Ladder::create(mode(p, s1)),
                                    Ladder::create(mode(q, s2)),
                                    Ladder::annihilate(mode(s, s2)),
                                    Ladder::annihilate(mode(r, s1)),
                                ],
                                C64::new(0.5 * v, 0.0),
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(op)
}

/// Total particle number over `n_modes` modes.
pub fn number_operator(n_modes: usize) -> Result<FermionOperator> {
    FermionOperator::number_over(n_modes, 0..n_modes)
}

/// Number of electrons with the given spin.
pub fn spin_number_operator(
    n_spatial: usize,
    ordering: SpinOrdering,
    down: bool,
) -> Result<FermionOperator> {
    FermionOperator::number_over(2 * n_spatial, (0..n_spatial).map(|p| ordering.mode(n_spatial, p, down)))
}

/// Occupation bits of the closed-shell determinant filling the lowest
/// `n_up` and `n_down` orbitals of each spin.
pub fn hartree_fock_occupation(
    n_spatial: usize,
    n_up: usize,
    n_down: usize,
    ordering: SpinOrdering,
) -> u64 {
    let mut occ = 0u64;
    for p in 0..n_up {
        occ |= 1 << ordering.mode(n_spatial, p, false);
    }
    for p in 0..n_down {
        occ |= 1 << ordering.mode(n_spatial, p, true);
    }
    occ
}
