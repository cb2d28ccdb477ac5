use serde::Serialize;

use super::encoding::fix_qubits;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::simulator::{conjugate, Circuit, Gate, StateVector};

/// Commuting Z2 symmetries of a Pauli Hamiltonian together with the Clifford
/// that diagonalizes them and a choice of eigenvalues.
///
/// The Clifford `U` satisfies `U τ_i U† = Z_{pivots[i]}`, so the tapered
/// Hamiltonian is `U H U†` with `Z_{pivots[i]}` replaced by `eigenvalues[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySector {
    pub n_qubits: usize,
    pub generators: Vec<PauliString>,
    pub pivots: Vec<usize>,
    pub clifford: Circuit,
    pub eigenvalues: Vec<i8>,
}

/// Serializable summary of a sector.
#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub generators: Vec<String>,
    pub pivots: Vec<usize>,
    pub eigenvalues: Vec<i8>,
}

type Bits = u128;

fn from_symplectic(n: usize, v: Bits) -> PauliString {
    let m = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let x = (v as u64) & m;
    let z = ((v >> n) as u64) & m;
    PauliString::from_masks(n, x, z, 0).expect("mask within width")
}

fn omega(n: usize, u: Bits, v: Bits) -> bool {
    let m: Bits = (1 << n) - 1;
    let (ux, uz) = (u & m, u >> n);
    let (vx, vz) = (v & m, v >> n);
    ((ux & vz).count_ones() + (uz & vx).count_ones()) % 2 == 1
}

/// Kernel of the check matrix: symplectic vectors commuting with every row.
fn commutant_basis(n: usize, terms: &[PauliString]) -> Vec<Bits> {
    let width = 2 * n;
    // Row for term t tests x_t·z_τ + z_t·x_τ.
    let mut rows: Vec<Bits> = terms
        .iter()
        .map(|p| p.z_mask() as Bits | (p.x_mask() as Bits) << n)
        .filter(|&r| r != 0)
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(k) = (r..rows.len()).find(|&k| rows[k] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(r, k);
        for j in 0..rows.len() {
            if j != r && rows[j] >> col & 1 == 1 {
                rows[j] ^= rows[r];
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (0..width)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v: Bits = 1 << free;
            for (row, &pc) in rows.iter().zip(&pivots) {
                if row >> free & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            v
        })
        .collect()
}

/// Largest commuting subset of a symplectic basis, by symplectic
/// Gram-Schmidt: each anticommuting pair contributes its first member.
fn isotropic_subset(n: usize, basis: Vec<Bits>) -> Vec<Bits> {
    let mut rem = basis;
    let mut out = Vec::new();
    while !rem.is_empty() {
        let v = rem.remove(0);
        if let Some(j) = rem.iter().position(|&w| omega(n, v, w)) {
            let w = rem.remove(j);
            for u in rem.iter_mut() {
                let a = omega(n, *u, w);
                let b = omega(n, *u, v);
                if a {
                    *u ^= v;
                }
                if b {
                    *u ^= w;
                }
            }
        }
        out.push(v);
    }
    out
}

/// Finds independent commuting Pauli symmetries of `h` and a Clifford
/// mapping each onto a single-qubit `Z`.
///
/// Eigenvalues default to `+1`; choose a sector with
/// [`SymmetrySector::with_eigenvalues`] or
/// [`SymmetrySector::with_reference_state`]. An `h` without symmetries gives
/// an empty sector.
pub fn find_z2_symmetries(h: &PauliSum) -> Result<SymmetrySector> {
    if h.is_empty() {
        return Err(Error::Argument("Hamiltonian has no terms".into()));
    }
    let n = h.n_qubits();
    if 2 * n > Bits::BITS as usize {
        return Err(Error::Resource(format!("{n} qubits exceeds tapering width 64")));
    }
    let terms: Vec<PauliString> = h.iter().map(|(p, _)| *p).collect();
    let gens: Vec<PauliString> = isotropic_subset(n, commutant_basis(n, &terms))
        .into_iter()
        .map(|v| from_symplectic(n, v))
        .collect();
    synthesize(n, gens)
}

fn synthesize(n: usize, mut gens: Vec<PauliString>) -> Result<SymmetrySector> {
    let mut clifford = Circuit::new(n);
    let mut frame: Vec<PauliString> = gens.clone();
    let mut pivots: Vec<usize> = Vec::new();
    for i in 0..gens.len() {
        // Clear earlier pivots; in this frame generator l is exactly Z_{pivot l}.
        for l in 0..i {
            if frame[i].z_mask() >> pivots[l] & 1 == 1 {
                frame[i] = frame[i].multiply(&frame[l])?;
                gens[i] = gens[i].multiply(&gens[l])?;
            }
        }
        let support = frame[i].support();
        if support == 0 {
            return Err(Error::Validation(
                "symmetry generators are not independent".into(),
            ));
        }
        let q = support.trailing_zeros() as usize;
        let mut step = Vec::new();
        for j in 0..n {
            match frame[i].get(j) {
                Pauli::X => step.push(Gate::H(j)),
                Pauli::Y => {
                    step.push(Gate::Sdg(j));
                    step.push(Gate::H(j));
                }
                _ => {}
            }
        }
        for j in (0..n).filter(|&j| j != q && support >> j & 1 == 1) {
            step.push(Gate::Cnot {
                control: j,
                target: q,
            });
        }
        let mut probe = frame[i];
        for g in &step {
            probe = conjugate(g, &probe)?;
        }
        if probe.phase() == 2 {
            step.push(Gate::X(q));
        }
        for g in step {
            for f in frame.iter_mut().skip(i) {
                *f = conjugate(&g, f)?;
            }
            clifford.push(g)?;
        }
        debug_assert_eq!(frame[i], PauliString::single(n, q, Pauli::Z));
        pivots.push(q);
    }
    let k = gens.len();
    Ok(SymmetrySector {
        n_qubits: n,
        generators: gens,
        pivots,
        clifford,
        eigenvalues: vec![1; k],
    })
}

impl SymmetrySector {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn with_eigenvalues(mut self, eigenvalues: Vec<i8>) -> Result<Self> {
        if eigenvalues.len() != self.generators.len() {
            return Err(Error::Dimension {
                expected: self.generators.len(),
                found: eigenvalues.len(),
            });
        }
        if eigenvalues.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Argument("eigenvalues must be +1 or -1".into()));
        }
        self.eigenvalues = eigenvalues;
        Ok(self)
    }

    /// Picks the eigenvalues of a state that is a joint eigenstate of all
    /// generators.
    pub fn with_reference_state(self, psi: &StateVector) -> Result<Self> {
        let mut vals = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let e = psi.expectation_string(g)?;
            if (e.re.abs() - 1.0).abs() > 1e-8 || e.im.abs() > 1e-8 {
                return Err(Error::Argument(format!(
                    "reference state is not an eigenstate of {g} (<g> = {e})"
                )));
            }
            vals.push(if e.re > 0.0 { 1 } else { -1 });
        }
        self.with_eigenvalues(vals)
    }

    /// Every one of the `2^k` eigenvalue assignments.
    pub fn all_sectors(&self) -> Vec<SymmetrySector> {
        let k = self.generators.len();
        (0..1usize << k)
            .map(|mask| {
                let vals = (0..k)
                    .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                    .collect();
                let mut s = self.clone();
                s.eigenvalues = vals;
                s
            })
            .collect()
    }

    pub fn report(&self) -> SectorReport {
        SectorReport {
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            pivots: self.pivots.clone(),
            eigenvalues: self.eigenvalues.clone(),
        }
    }

    /// `U P U†` for the sector's Clifford.
    pub fn rotate(&self, p: &PauliString) -> Result<PauliString> {
        let mut out = *p;
        for op in self.clifford.ops() {
            out = conjugate(&op.gate, &out)?;
        }
        Ok(out)
    }

    pub fn rotate_sum(&self, h: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::zero(h.n_qubits());
        for (p, c) in h.iter() {
            out.add_term(self.rotate(p)?, *c);
        }
        Ok(out)
    }
}

/// Removes the sector's symmetry qubits from `h`.
pub fn taper(h: &PauliSum, sector: &SymmetrySector) -> Result<PauliSum> {
    if h.n_qubits() != sector.n_qubits {
        return Err(Error::Dimension {
            expected: sector.n_qubits,
            found: h.n_qubits(),
        });
    }
    for g in &sector.generators {
        for (p, _) in h.iter() {
            if !g.commutes(p)? {
                return Err(Error::SymmetryViolation(format!(
                    "generator {g} anticommutes with term {p}"
                )));
            }
        }
    }
    if sector.is_empty() {
        return Ok(h.clone());
    }
    let rotated = sector.rotate_sum(h)?;
    let fixed: Vec<(usize, i8)> = sector
        .pivots
        .iter()
        .copied()
        .zip(sector.eigenvalues.iter().copied())
        .collect();
    fix_qubits(&rotated, &fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, spectra_distance};

    #[test]
    fn zz_has_itself_as_symmetry() {
        let h = PauliSum::from_labels(&[("ZZ", 1.0)]).unwrap();
        let s = find_z2_symmetries(&h).unwrap();
        // Every Z-type string commutes with ZZ; the symmetry group of a
        // single term also contains ZZ itself.
        let zz: PauliString = "ZZ".parse().unwrap();
        let spans = (0..1u32 << s.len()).any(|mask| {
            let mut p = PauliString::identity(2);
            for (i, g) in s.generators.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    p = p.multiply(g).unwrap();
                }
            }
            p.unsigned() == zz
        });
        assert!(spans);
    }

    #[test]
    fn clifford_maps_generators_to_pivot_z() {
        let h = PauliSum::from_labels(&[
            ("XXYY", 0.3),
            ("ZZII", 0.5),
            ("IZIZ", 0.2),
            ("YYXX", -0.1),
            ("ZIIZ", 0.7),
        ])
        .unwrap();
        let s = find_z2_symmetries(&h).unwrap();
        assert!(!s.is_empty());
        for (g, &q) in s.generators.iter().zip(&s.pivots) {
            assert_eq!(s.rotate(g).unwrap(), PauliString::single(4, q, Pauli::Z));
            let u = s.clifford.to_dense(&[]).unwrap();
            let lhs = &u * g.to_dense().unwrap() * u.adjoint();
            let rhs = PauliString::single(4, q, Pauli::Z).to_dense().unwrap();
            assert!(crate::linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
        }
        for a in &s.generators {
            for b in &s.generators {
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn sectors_partition_spectrum() {
        let h = PauliSum::from_labels(&[
            ("XXYY", 0.3),
            ("ZZII", 0.5),
            ("IZIZ", 0.2),
            ("YYXX", -0.1),
            ("ZIIZ", 0.7),
            ("IIII", -0.4),
        ])
        .unwrap();
        let s = find_z2_symmetries(&h).unwrap();
        let mut union = Vec::new();
        for sec in s.all_sectors() {
            let t = taper(&h, &sec).unwrap();
            assert_eq!(t.n_qubits(), 4 - s.len());
            union.extend(eigvalsh(&t.to_dense().unwrap()));
        }
        union.sort_by(f64::total_cmp);
        let full = eigvalsh(&h.to_dense().unwrap());
        assert!(spectra_distance(&union, &full) < 1e-10);
    }

    #[test]
    fn empty_sector_leaves_hamiltonian_alone() {
        let h = PauliSum::from_labels(&[("X", 1.0), ("Z", 1.0), ("Y", 0.5)]).unwrap();
        let s = find_z2_symmetries(&h).unwrap();
        assert!(s.is_empty());
        assert_eq!(taper(&h, &s).unwrap(), h);
    }

    #[test]
    fn violated_generator_is_reported() {
        let h = PauliSum::from_labels(&[("ZZ", 1.0)]).unwrap();
        let mut s = find_z2_symmetries(&h).unwrap();
        s.generators[0] = "XI".parse().unwrap();
        let bad = PauliSum::from_labels(&[("ZZ", 1.0), ("ZI", 1.0)]).unwrap();
        assert!(matches!(taper(&bad, &s), Err(Error::SymmetryViolation(_))));
    }
}
