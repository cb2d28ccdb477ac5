//! Pauli strings and complex-weighted Pauli sums.
//!
//! A [`PauliString`] stores one bit of X and one bit of Z per qubit, plus a
//! phase `i^k`. Qubit `l` is bit `l` of each mask, so the computational basis
//! index `b` has qubit 0 as its least significant bit and the dense matrix of
//! a string is the Kronecker product with qubit 0 as the rightmost factor.
//!
//! Per qubit, `(x, z)` encodes `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`,
//! `(0,1) = Z`. The text form lists qubit `n-1` first: `"XZ"` is `X` on
//! qubit 1 and `Z` on qubit 0.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// Largest register converted to a dense matrix.
pub const DENSE_CAP: usize = 12;

/// Default magnitude below which sum coefficients are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-12;

/// Widest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^k` for `k` taken mod 4.
pub fn phase_factor(k: u8) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// An n-qubit Pauli operator `i^phase * P_{n-1} ⊗ ... ⊗ P_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        PauliString {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// Builds a string from raw masks. Bits at or above `n` are rejected.
    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Resource(format!(
                "{n} qubits exceeds Pauli string width {MAX_QUBITS}"
            )));
        }
        if (x | z) & !mask(n) != 0 {
            return Err(Error::Dimension {
                expected: n,
                found: 64 - (x | z).leading_zeros() as usize,
            });
        }
        Ok(PauliString {
            n,
            x,
            z,
            phase: phase % 4,
        })
    }

    /// Builds a string from `(qubit, Pauli)` pairs. Repeated qubits multiply.
    pub fn from_ops(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = PauliString::identity(n);
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::Dimension {
                    expected: n,
                    found: q + 1,
                });
            }
            let (xb, zb) = p.bits();
            let single = PauliString {
                n,
                x: (xb as u64) << q,
                z: (zb as u64) << q,
                phase: 0,
            };
            out = out.multiply(&single)?;
        }
        Ok(out)
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        Self::from_ops(n, &[(q, p)]).expect("qubit index out of range")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Power `k` of the phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> C64 {
        phase_factor(self.phase)
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// The same operator with the phase reset to `+1`.
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn adjoint(&self) -> Self {
        // Unsigned Pauli strings are Hermitian, so only the phase conjugates.
        self.with_phase((4 - self.phase) % 4)
    }

    fn check_same(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Group product `self * other` with its phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, b: &PauliString) -> PauliString {
        // sigma(x,z) = i^{xz} X^x Z^z; moving Z^{z_a} past X^{x_b} costs (-1)^{z_a x_b}.
        let a = self;
        let x = a.x ^ b.x;
        let z = a.z ^ b.z;
        let k = a.phase as u32
            + b.phase as u32
            + (a.x & a.z).count_ones()
            + (b.x & b.z).count_ones()
            + 2 * (a.z & b.x).count_ones()
            + 4 * 64
            - (x & z).count_ones();
        PauliString {
            n: a.n,
            x,
            z,
            phase: (k % 4) as u8,
        }
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// True when the strings agree or one is the identity on every qubit.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.qubitwise_commutes_unchecked(other))
    }

    pub(crate) fn qubitwise_commutes_unchecked(&self, other: &PauliString) -> bool {
        let both = self.support() & other.support();
        (self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0
    }

    /// Image of basis state `b`: `P|b> = amp * |b'>`.
    #[inline]
    pub fn action(&self, b: usize) -> (usize, C64) {
        let sign = ((self.z & b as u64).count_ones() % 2) as u8 * 2;
        let k = self.phase + (self.x & self.z).count_ones() as u8 % 4 + sign;
        (b ^ self.x as usize, phase_factor(k))
    }

    /// Adds `coeff * P|psi>` into `out`.
    pub fn apply_add(&self, coeff: C64, psi: &[C64], out: &mut [C64]) {
        let base = phase_factor(self.phase + (self.x & self.z).count_ones() as u8 % 4) * coeff;
        let xm = self.x as usize;
        let zm = self.z as usize;
        for (b, &amp) in psi.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let term = if (zm & b).count_ones() % 2 == 1 {
                -base
            } else {
                base
            };
            out[b ^ xm] += term * amp;
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; psi.len()];
        self.apply_add(C64::new(1.0, 0.0), psi, &mut out);
        out
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        check_dense_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (row, amp) = self.action(b);
            m[(row, b)] = amp;
        }
        Ok(m)
    }

    /// Embeds into a wider register, keeping qubit indices.
    pub fn widen(&self, n: usize) -> Result<PauliString> {
        if n < self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: n,
            });
        }
        PauliString::from_masks(n, self.x, self.z, self.phase)
    }

    /// Letters without the phase, qubit `n-1` first.
    pub fn label(&self) -> String {
        (0..self.n).rev().map(|q| self.get(q).as_char()).collect()
    }
}

pub(crate) fn check_dense_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        Err(Error::Resource(format!(
            "{n} qubits exceeds dense cap of {DENSE_CAP}"
        )))
    } else {
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.label())
    }
}

impl serde::Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses an optional phase prefix (`+`, `-`, `i`, `+i`, `-i`) followed
    /// by letters from `IXYZ`, qubit `n-1` first.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body, offset) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest, 2)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest, 2)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest, 1)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest, 1)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest, 1)
        } else {
            (0, s, 0)
        };
        let chars: Vec<char> = body.chars().collect();
        let n = chars.len();
        if n > MAX_QUBITS {
            return Err(Error::Resource(format!(
                "{n} qubits exceeds Pauli string width {MAX_QUBITS}"
            )));
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (pos, c) in chars.iter().enumerate() {
            let q = n - 1 - pos;
            let (xb, zb) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => {
                    return Err(Error::ParseAt {
                        position: offset + pos,
                        msg: format!("unexpected character {other:?} in Pauli string"),
                    })
                }
            };
            x |= xb << q;
            z |= zb << q;
        }
        PauliString::from_masks(n, x, z, phase)
    }
}

/// Commutation relation used when grouping terms for joint measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Commutation {
    /// Every qubit carries matching letters or an identity; measurable with
    /// single-qubit basis changes.
    #[default]
    QubitWise,
    /// Full operator commutation.
    General,
}

/// A complex-weighted sum of unsigned Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, C64>,
    prune: f64,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum {
            n,
            terms: BTreeMap::new(),
            prune: DEFAULT_PRUNE,
        }
    }

    pub fn identity(n: usize, coeff: C64) -> Self {
        let mut s = Self::zero(n);
        s.add_term(PauliString::identity(n), coeff);
        s
    }

    pub fn from_string(p: PauliString, coeff: C64) -> Self {
        let mut s = Self::zero(p.n_qubits());
        s.add_term(p, coeff);
        s
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliString, C64)>) -> Result<Self> {
        let mut s = Self::zero(n);
        for (p, c) in terms {
            if p.n_qubits() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.n_qubits(),
                });
            }
            s.add_term(p, c);
        }
        Ok(s)
    }

    /// Parses `(label, coefficient)` pairs such as `("XZ", 0.5)`.
    pub fn from_labels(terms: &[(&str, f64)]) -> Result<Self> {
        let parsed: Vec<PauliString> = terms
            .iter()
            .map(|(l, _)| l.parse())
            .collect::<Result<_>>()?;
        let n = parsed.first().map_or(0, |p| p.n_qubits());
        Self::from_terms(
            n,
            parsed
                .into_iter()
                .zip(terms)
                .map(|(p, (_, c))| (p, C64::new(*c, 0.0))),
        )
    }

    /// Random Hermitian sum of `n_terms` non-identity strings with real
    /// coefficients in `[-1, 1)`.
    pub fn random<R: rand::Rng>(n: usize, n_terms: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Argument(format!("cannot draw strings on {n} qubits")));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut s = PauliSum::zero(n);
        while s.len() < n_terms.min((1usize << n.min(20)) - 1) {
            let x = rng.gen::<u64>() & mask;
            let z = rng.gen::<u64>() & mask;
            if x | z == 0 {
                continue;
            }
            let p = PauliString::from_masks(n, x, z, 0)?;
            let c = rng.gen::<f64>() * 2.0 - 1.0;
            s.add_term(p, C64::new(c, 0.0));
        }
        Ok(s)
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self.prune_small();
        self
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical mask order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<(PauliString, C64)> {
        self.terms.iter().map(|(p, c)| (*p, *c)).collect()
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms
            .get(&p.unsigned())
            .map_or(ZERO, |c| c * p.phase_factor())
    }

    /// Adds `coeff * p`, folding the phase of `p` into the coefficient.
    pub fn add_term(&mut self, p: PauliString, coeff: C64) {
        assert_eq!(p.n_qubits(), self.n, "Pauli string width mismatch");
        let c = coeff * p.phase_factor();
        let key = p.unsigned();
        let entry = self.terms.entry(key).or_insert(ZERO);
        *entry += c;
        if entry.norm() < self.prune {
            self.terms.remove(&key);
        }
    }

    fn prune_small(&mut self) {
        let t = self.prune;
        self.terms.retain(|_, c| c.norm() >= t);
    }

    fn check_same(&self, other: &PauliSum) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut out = PauliSum::zero(self.n);
        out.prune = self.prune;
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                out.add_term(pa.mul_unchecked(pb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> PauliSum {
        let mut out = PauliSum::zero(self.n);
        out.prune = self.prune;
        for (p, c) in &self.terms {
            out.add_term(*p, c * s);
        }
        out
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut out = PauliSum::zero(self.n);
        out.prune = self.prune;
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                if !pa.commutes_unchecked(pb) {
                    out.add_term(pa.mul_unchecked(pb), ca * cb * 2.0);
                }
            }
        }
        Ok(out)
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut out = PauliSum::zero(self.n);
        out.prune = self.prune;
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                if pa.commutes_unchecked(pb) {
                    out.add_term(pa.mul_unchecked(pb), ca * cb * 2.0);
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> C64 {
        self.coeff(&PauliString::identity(self.n))
    }

    pub fn without_identity(&self) -> PauliSum {
        let mut out = self.clone();
        out.terms.remove(&PauliString::identity(self.n));
        out
    }

    /// Sum of coefficient magnitudes; an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_coeff_diff(&self, other: &PauliSum) -> f64 {
        let mut keys: Vec<&PauliString> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.into_iter()
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Embeds into a wider register, keeping qubit indices.
    pub fn widen(&self, n: usize) -> Result<PauliSum> {
        let terms = self
            .terms
            .iter()
            .map(|(p, c)| Ok((p.widen(n)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::from_terms(n, terms)
    }

    /// Adds `self|psi>` into `out`.
    pub fn apply_add(&self, psi: &[C64], out: &mut [C64]) {
        for (p, c) in &self.terms {
            p.apply_add(*c, psi, out);
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; psi.len()];
        self.apply_add(psi, &mut out);
        out
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        check_dense_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            for b in 0..dim {
                let (row, amp) = p.action(b);
                m[(row, b)] += amp * c;
            }
        }
        Ok(m)
    }

    /// Partitions the terms into mutually commuting groups by greedy
    /// largest-first coloring of the conflict graph.
    ///
    /// Vertices are visited by decreasing degree, ties by canonical term
    /// order; each takes the smallest color unused by its neighbors. Groups
    /// are returned ordered by their first term.
    pub fn group_commuting(&self, mode: Commutation) -> Vec<PauliSum> {
        let terms = self.terms();
        let m = terms.len();
        let conflicts = |a: &PauliString, b: &PauliString| match mode {
            Commutation::QubitWise => !a.qubitwise_commutes_unchecked(b),
            Commutation::General => !a.commutes_unchecked(b),
        };
        let mut adj = vec![Vec::new(); m];
        for i in 0..m {
            for j in i + 1..m {
                if conflicts(&terms[i].0, &terms[j].0) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
        let mut color = vec![usize::MAX; m];
        let mut n_colors = 0;
        for &v in &order {
            let used: Vec<usize> = adj[v].iter().map(|&u| color[u]).collect();
            let c = (0..).find(|c| !used.contains(c)).unwrap();
            color[v] = c;
            n_colors = n_colors.max(c + 1);
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_colors];
        for (v, &c) in color.iter().enumerate() {
            groups[c].push(v);
        }
        groups.sort_by_key(|g| g[0]);
        groups
            .into_iter()
            .map(|g| {
                let mut s = PauliSum::zero(self.n);
                s.prune = self.prune;
                for v in g {
                    s.add_term(terms[v].0, terms[v].1);
                }
                s
            })
            .collect()
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (p, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{} {}", c.re, p)?;
            } else {
                write!(f, "({}{:+}i) {}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(rhs).expect("Pauli sum width mismatch")
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(&-rhs).expect("Pauli sum width mismatch")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("Pauli sum width mismatch")
    }
}

impl Mul<C64> for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: C64) -> PauliSum {
        self.scale(rhs)
    }
}

impl Mul<f64> for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: f64) -> PauliSum {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PauliSum {
            type Output = PauliSum;
            fn $m(self, rhs: PauliSum) -> PauliSum {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
