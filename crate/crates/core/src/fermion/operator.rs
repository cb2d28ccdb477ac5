use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// One creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }

    // Normal order: creators before annihilators, each ascending by mode.
    fn key(self) -> (u8, usize) {
        (if self.dagger { 0 } else { 1 }, self.mode)
    }
}

pub const DEFAULT_PRUNE: f64 = 1e-12;

/// A sum of normal-ordered products of fermionic ladder operators.
///
/// Products are stored with all creators left of all annihilators, each
/// group in ascending mode order; reordering signs and contractions from
/// `{a_p, a_q†} = δ_pq` are applied on insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: BTreeMap<Vec<Ladder>, C64>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        FermionOperator {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_modes: usize, coeff: C64) -> Self {
        let mut op = Self::zero(n_modes);
        op.add_product(&[], coeff).expect("empty product");
        op
    }

    /// `coeff * ops[0] ops[1] ...`, normal ordered.
    pub fn product(n_modes: usize, ops: &[Ladder], coeff: C64) -> Result<Self> {
        let mut op = Self::zero(n_modes);
        op.add_product(ops, coeff)?;
        Ok(op)
    }

    pub fn creation(n_modes: usize, p: usize) -> Result<Self> {
        Self::product(n_modes, &[Ladder::create(p)], C64::new(1.0, 0.0))
    }

    pub fn annihilation(n_modes: usize, p: usize) -> Result<Self> {
        Self::product(n_modes, &[Ladder::annihilate(p)], C64::new(1.0, 0.0))
    }

    /// `a_p† a_p`.
    pub fn number(n_modes: usize, p: usize) -> Result<Self> {
        Self::product(
            n_modes,
            &[Ladder::create(p), Ladder::annihilate(p)],
            C64::new(1.0, 0.0),
        )
    }

    /// Sum of number operators over `modes`.
    pub fn number_over(n_modes: usize, modes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut op = Self::zero(n_modes);
        for p in modes {
            op.add_product(
                &[Ladder::create(p), Ladder::annihilate(p)],
                C64::new(1.0, 0.0),
            )?;
        }
        Ok(op)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Ladder>, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, ops: &[Ladder]) -> C64 {
        self.terms.get(ops).copied().unwrap_or(ZERO)
    }

    /// Adds `coeff * ops[0] ops[1] ...` after normal ordering.
    pub fn add_product(&mut self, ops: &[Ladder], coeff: C64) -> Result<()> {
        for l in ops {
            if l.mode >= self.n_modes {
                return Err(Error::Dimension {
                    expected: self.n_modes,
                    found: l.mode + 1,
                });
            }
        }
        let mut pending = vec![(ops.to_vec(), coeff)];
        while let Some((mut word, mut c)) = pending.pop() {
            let mut vanished = false;
            // Bubble sort; every transposition of two ladder operators flips
            // the sign, and a_p a_p† additionally spawns the contracted term.
            let mut swapped = true;
            while swapped && !vanished {
                swapped = false;
                for j in 1..word.len() {
                    let (l, r) = (word[j - 1], word[j]);
                    if l.key() == r.key() {
                        vanished = true;
                        break;
                    }
                    if l.key() > r.key() {
                        if !l.dagger && r.dagger && l.mode == r.mode {
                            let mut contracted = word.clone();
                            contracted.drain(j - 1..=j);
                            pending.push((contracted, c));
                        }
                        word.swap(j - 1, j);
                        c = -c;
                        swapped = true;
                    }
                }
            }
            if vanished {
                continue;
            }
            let entry = self.terms.entry(word.clone()).or_insert(ZERO);
            *entry += c;
            if entry.norm() < DEFAULT_PRUNE {
                self.terms.remove(&word);
            }
        }
        Ok(())
    }

    fn check_same(&self, other: &FermionOperator) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::Dimension {
                expected: self.n_modes,
                found: other.n_modes,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FermionOperator) -> Result<FermionOperator> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_product(w, *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> FermionOperator {
        let mut out = FermionOperator::zero(self.n_modes);
        for (w, c) in &self.terms {
            let v = c * s;
            if v.norm() >= DEFAULT_PRUNE {
                out.terms.insert(w.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &FermionOperator) -> Result<FermionOperator> {
        self.check_same(other)?;
        let mut out = FermionOperator::zero(self.n_modes);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_product(&w, ca * cb)?;
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> FermionOperator {
        let mut out = FermionOperator::zero(self.n_modes);
        for (w, c) in &self.terms {
            let rev: Vec<Ladder> = w
                .iter()
                .rev()
                .map(|l| Ladder {
                    mode: l.mode,
                    dagger: !l.dagger,
                })
                .collect();
            out.add_product(&rev, c.conj()).expect("modes in range");
        }
        out
    }

    pub fn commutator(&self, other: &FermionOperator) -> Result<FermionOperator> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.add(&ba.scale(C64::new(-1.0, 0.0)))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_diff(&self, other: &FermionOperator) -> f64 {
        let diff = self
            .add(&other.scale(C64::new(-1.0, 0.0)))
            .expect("same mode count");
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every term conserves particle number.
    pub fn conserves_number(&self) -> bool {
        self.terms.keys().all(|w| {
            let created = w.iter().filter(|l| l.dagger).count();
            2 * created == w.len()
        })
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for l in w {
                write!(f, " {}{}", l.mode, if l.dagger { "^" } else { "" })?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn anticommutator_gives_delta() {
        for p in 0..3 {
            for q in 0..3 {
                let ap = FermionOperator::annihilation(3, p).unwrap();
                let aq = FermionOperator::creation(3, q).unwrap();
                let anti = ap.mul(&aq).unwrap().add(&aq.mul(&ap).unwrap()).unwrap();
                let expected = if p == q {
                    FermionOperator::identity(3, one())
                } else {
                    FermionOperator::zero(3)
                };
                assert!(anti.max_diff(&expected) < 1e-15, "{p} {q}: {anti}");
            }
        }
    }

    #[test]
    fn reordering_signs() {
        // a_1† a_0† = -a_0† a_1†
        let op = FermionOperator::product(2, &[Ladder::create(1), Ladder::create(0)], one())
            .unwrap();
        assert_eq!(op.coeff(&[Ladder::create(0), Ladder::create(1)]), -one());
        let sq = FermionOperator::product(2, &[Ladder::create(1), Ladder::create(1)], one())
            .unwrap();
        assert!(sq.is_empty());
    }

    #[test]
    fn adjoint_of_hopping() {
        let op = FermionOperator::product(
            3,
            &[Ladder::create(2), Ladder::annihilate(0)],
            C64::new(0.5, 0.25),
        )
        .unwrap();
        let adj = op.adjoint();
        assert_eq!(
            adj.coeff(&[Ladder::create(0), Ladder::annihilate(2)]),
            C64::new(0.5, -0.25)
        );
    }

    #[test]
    fn out_of_range_mode_is_rejected() {
        assert!(FermionOperator::creation(2, 2).is_err());
    }
}
