use serde::{Deserialize, Serialize};

use super::operator::{FermionOperator, Ladder};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pauli::{PauliString, PauliSum};

/// Fermion-to-qubit encodings.
///
/// Every scheme here is linear over GF(2): the qubit basis state is
/// `b = A x (mod 2)` for occupation bits `x`. Occupied modes are `|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodingScheme {
    JordanWigner,
    Parity,
    /// Parity encoding with the two spin-parity qubits removed; requires
    /// blocked spin ordering (all up modes, then all down modes).
    ParityTwoQubitReduced { up_odd: bool, down_odd: bool },
    BravyiKitaev,
}

impl EncodingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            EncodingScheme::JordanWigner => "jordan_wigner",
            EncodingScheme::Parity => "parity",
            EncodingScheme::ParityTwoQubitReduced { .. } => "parity_reduced",
            EncodingScheme::BravyiKitaev => "bravyi_kitaev",
        }
    }

    /// Qubits used for `m` modes.
    pub fn n_qubits(&self, m: usize) -> usize {
        match self {
            EncodingScheme::ParityTwoQubitReduced { .. } => m.saturating_sub(2),
            _ => m,
        }
    }
}

/// A square GF(2) matrix, row `i` stored as the bits of `rows[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    n: usize,
    rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn identity(n: usize) -> Self {
        Gf2Matrix {
            n,
            rows: (0..n).map(|i| 1u64 << i).collect(),
        }
    }

    /// `A_kj = 1` for `j <= k`: qubit `k` stores the parity of modes `0..=k`.
    pub fn parity(n: usize) -> Self {
        Gf2Matrix {
            n,
            rows: (0..n).map(|k| (1u64 << (k + 1)).wrapping_sub(1)).collect(),
        }
    }

    /// Binary-tree (Fenwick) matrix: qubit `k` stores the parity of modes
    /// `k + 1 - lowbit(k + 1) ..= k`.
    pub fn bravyi_kitaev(n: usize) -> Self {
        let rows = (0..n)
            .map(|k| {
                let low = (k + 1) & (k + 1).wrapping_neg();
                let start = k + 1 - low;
                (start..=k).map(|j| 1u64 << j).sum()
            })
            .collect();
        Gf2Matrix { n, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn column(&self, j: usize) -> u64 {
        (0..self.n)
            .filter(|&i| self.get(i, j))
            .map(|i| 1u64 << i)
            .sum()
    }

    /// `A v` over GF(2).
    pub fn apply(&self, v: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (((r & v).count_ones() & 1) as u64) << i)
            .sum()
    }

    pub fn inverse(&self) -> Result<Gf2Matrix> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r] >> col & 1 == 1)
                .ok_or_else(|| Error::Argument("GF(2) matrix is singular".into()))?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Ok(Gf2Matrix { n, rows: inv })
    }
}

/// Qubit images of every ladder operator under a linear encoding.
#[derive(Debug, Clone)]
pub struct LinearEncoding {
    matrix: Gf2Matrix,
    creators: Vec<PauliSum>,
    annihilators: Vec<PauliSum>,
}

impl LinearEncoding {
    /// Builds images from Majorana operators. With `x = A^{-1} b`:
    ///
    /// - `c_k = a_k + a_k†` flips `x_k` (X on column `k` of `A`) with sign
    ///   `(-1)^{x_0 + ... + x_{k-1}}` (Z on the sum of rows `< k` of `A^{-1}`);
    /// - `d_k = i(a_k† - a_k)` is `i X Z` with rows `<= k`;
    /// - `a_k† = (c_k - i d_k) / 2`.
    pub fn new(matrix: Gf2Matrix) -> Result<Self> {
        let n = matrix.dim();
        let inv = matrix.inverse()?;
        let half = C64::new(0.5, 0.0);
        let mut creators = Vec::with_capacity(n);
        let mut annihilators = Vec::with_capacity(n);
        let mut below = 0u64;
        for k in 0..n {
            let xcol = matrix.column(k);
            let c = PauliString::from_masks(n, xcol, 0, 0)?
                .multiply(&PauliString::from_masks(n, 0, below, 0)?)?;
            let through = below ^ inv.row(k);
            let d = PauliString::from_masks(n, xcol, 0, 1)?
                .multiply(&PauliString::from_masks(n, 0, through, 0)?)?;
            // a† = (c - i d)/2, a = (c + i d)/2
            let mut cr = PauliSum::zero(n);
            cr.add_term(c, half);
            cr.add_term(d, C64::new(0.0, -0.5));
            let mut an = PauliSum::zero(n);
            an.add_term(c, half);
            an.add_term(d, C64::new(0.0, 0.5));
            creators.push(cr);
            annihilators.push(an);
            below = through;
        }
        Ok(LinearEncoding {
            matrix,
            creators,
            annihilators,
        })
    }

    pub fn for_scheme(scheme: EncodingScheme, n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        let m = match scheme {
            EncodingScheme::JordanWigner => Gf2Matrix::identity(n_modes),
            EncodingScheme::Parity | EncodingScheme::ParityTwoQubitReduced { .. } => {
                Gf2Matrix::parity(n_modes)
            }
            EncodingScheme::BravyiKitaev => Gf2Matrix::bravyi_kitaev(n_modes),
        };
        LinearEncoding::new(m)
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.matrix
    }

    pub fn ladder(&self, l: Ladder) -> &PauliSum {
        if l.dagger {
            &self.creators[l.mode]
        } else {
            &self.annihilators[l.mode]
        }
    }

    /// Qubit basis index of an occupation bit pattern.
    pub fn basis_state(&self, occupation: u64) -> usize {
        self.matrix.apply(occupation) as usize
    }

    pub fn encode(&self, op: &FermionOperator) -> Result<PauliSum> {
        let n = self.matrix.dim();
        if op.n_modes() != n {
            return Err(Error::Dimension {
                expected: n,
                found: op.n_modes(),
            });
        }
        let mut out = PauliSum::zero(n);
        for (word, c) in op.iter() {
            let mut prod = PauliSum::identity(n, *c);
            for l in word {
                prod = prod.try_mul(self.ladder(*l))?;
            }
            out = out.try_add(&prod)?;
        }
        Ok(out)
    }
}

fn check_modes(n: usize) -> Result<()> {
    if n > crate::pauli::MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{n} modes exceeds encoding width {}",
            crate::pauli::MAX_QUBITS
        )));
    }
    Ok(())
}

/// Jordan-Wigner image written out directly:
/// `a_k† -> (X_k - i Y_k)/2 · Z_{k-1} ... Z_0`.
pub fn jordan_wigner(op: &FermionOperator) -> Result<PauliSum> {
    let n = op.n_modes();
    check_modes(n)?;
    let ladder = |l: &Ladder| -> Result<PauliSum> {
        let tail = (1u64 << l.mode) - 1;
        let x = PauliString::from_masks(n, 1 << l.mode, tail, 0)?;
        // Y_k Z_tail: Y = iXZ on qubit k.
        let y = PauliString::from_masks(n, 1 << l.mode, tail | 1 << l.mode, 0)?;
        let s = if l.dagger { -0.5 } else { 0.5 };
        PauliSum::from_terms(n, [(x, C64::new(0.5, 0.0)), (y, C64::new(0.0, s))])
    };
    let mut out = PauliSum::zero(n);
    for (word, c) in op.iter() {
        let mut prod = PauliSum::identity(n, *c);
        for l in word {
            prod = prod.try_mul(&ladder(l)?)?;
        }
        out = out.try_add(&prod)?;
    }
    Ok(out)
}

pub fn bravyi_kitaev(op: &FermionOperator) -> Result<PauliSum> {
    LinearEncoding::for_scheme(EncodingScheme::BravyiKitaev, op.n_modes())?.encode(op)
}

/// Parity encoding, optionally removing the two spin-parity qubits.
///
/// With blocked spin ordering, qubit `M/2 - 1` holds the parity of the
/// spin-up count and qubit `M - 1` the total parity. Reduction substitutes
/// their `Z` eigenvalues `(-1)^{N_up}` and `(-1)^{N}` and drops them; the
/// remaining qubits keep their relative order.
pub fn parity_encode(
    op: &FermionOperator,
    reduce: bool,
    up_odd: bool,
    down_odd: bool,
) -> Result<PauliSum> {
    let m = op.n_modes();
    if reduce && m % 2 == 1 {
        return Err(Error::Argument(format!(
            "two-qubit reduction needs an even mode count, got {m}"
        )));
    }
    if reduce && m < 2 {
        return Err(Error::Argument("two-qubit reduction needs two modes".into()));
    }
    let full = LinearEncoding::for_scheme(EncodingScheme::Parity, m)?.encode(op)?;
    if !reduce {
        return Ok(full);
    }
    let sign = |odd: bool| if odd { -1 } else { 1 };
    fix_qubits(
        &full,
        &[(m / 2 - 1, sign(up_odd)), (m - 1, sign(up_odd ^ down_odd))],
    )
}

pub fn encode(op: &FermionOperator, scheme: EncodingScheme) -> Result<PauliSum> {
    match scheme {
        EncodingScheme::JordanWigner => jordan_wigner(op),
        EncodingScheme::Parity => parity_encode(op, false, false, false),
        EncodingScheme::ParityTwoQubitReduced { up_odd, down_odd } => {
            parity_encode(op, true, up_odd, down_odd)
        }
        EncodingScheme::BravyiKitaev => bravyi_kitaev(op),
    }
}

/// Qubit basis index of an occupation pattern under `scheme`.
pub fn encode_occupation(scheme: EncodingScheme, n_modes: usize, occupation: u64) -> Result<usize> {
    let enc = LinearEncoding::for_scheme(scheme, n_modes)?;
    let b = enc.basis_state(occupation);
    match scheme {
        EncodingScheme::ParityTwoQubitReduced { .. } => {
            Ok(drop_bits(b, &[n_modes / 2 - 1, n_modes - 1]))
        }
        _ => Ok(b),
    }
}

fn drop_bits(b: usize, qubits: &[usize]) -> usize {
    let mut out = 0usize;
    let mut k = 0;
    for q in 0..usize::BITS as usize {
        if qubits.contains(&q) {
            continue;
        }
        out |= (b >> q & 1) << k;
        k += 1;
    }
    out
}

/// Replaces `Z_q` by the eigenvalue `s` on each listed qubit and removes
/// those qubits.
///
/// Fails with a symmetry violation when a term acts as `X` or `Y` on a fixed
/// qubit.
pub fn fix_qubits(h: &PauliSum, fixed: &[(usize, i8)]) -> Result<PauliSum> {
    let n = h.n_qubits();
    let qubits: Vec<usize> = fixed.iter().map(|(q, _)| *q).collect();
    for &q in &qubits {
        if q >= n {
            return Err(Error::Dimension {
                expected: n,
                found: q + 1,
            });
        }
    }
    let keep: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let mut out = PauliSum::zero(keep.len());
    for (p, c) in h.iter() {
        let mut coeff = *c;
        for &(q, s) in fixed {
            if p.x_mask() >> q & 1 == 1 {
                return Err(Error::SymmetryViolation(format!(
                    "term {p} flips fixed qubit {q}"
                )));
            }
            if p.z_mask() >> q & 1 == 1 && s < 0 {
                coeff = -coeff;
            }
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (k, &q) in keep.iter().enumerate() {
            x |= (p.x_mask() >> q & 1) << k;
            z |= (p.z_mask() >> q & 1) << k;
        }
        out.add_term(PauliString::from_masks(keep.len(), x, z, 0)?, coeff);
    }
    Ok(out)
}
