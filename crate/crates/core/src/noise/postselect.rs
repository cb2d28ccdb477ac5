use rand::Rng;
use serde::Serialize;

use super::readout::{apply_readout, product_confusion_matrix};
use crate::error::{Error, Result};
use crate::fermion::SpinOrdering;
use crate::pauli::{Commutation, PauliString, PauliSum};
use crate::simulator::{apply_gate_to, measurement_basis_change, sample_counts, StateVector};

/// Requires an even (`parity = false`) or odd number of ones among the
/// outcome bits in `mask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParityCheck {
    pub mask: u64,
    pub parity: bool,
}

impl ParityCheck {
    pub fn passes(&self, outcome: u64) -> bool {
        ((outcome & self.mask).count_ones() % 2 == 1) == self.parity
    }
}

/// Jordan-Wigner parity checks `(-1)^{N_↑}` and `(-1)^{N_↓}` for a state
/// with `n_up` and `n_down` electrons.
pub fn number_parity_checks(n_spatial: usize, ordering: SpinOrdering, n_up: usize, n_down: usize) -> Vec<ParityCheck> {
    let mask = |down: bool| (0..n_spatial).fold(0u64, |m, p| m | 1 << ordering.mode(n_spatial, p, down));
    vec![
        ParityCheck { mask: mask(false), parity: n_up % 2 == 1 },
        ParityCheck { mask: mask(true), parity: n_down % 2 == 1 },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PostSelection {
    pub shots: Vec<usize>,
    pub retention: f64,
}

/// Keeps the shots that pass every check.
pub fn post_select(shots: &[usize], checks: &[ParityCheck]) -> Result<PostSelection> {
    let kept: Vec<usize> = shots.iter().copied().filter(|&s| checks.iter().all(|c| c.passes(s as u64))).collect();
    if kept.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let retention = kept.len() as f64 / shots.len() as f64;
    Ok(PostSelection { shots: kept, retention })
}

/// [`post_select`] on a histogram: failing outcomes get count zero.
pub fn post_select_counts(counts: &[u64], checks: &[ParityCheck]) -> Result<(Vec<u64>, f64)> {
    let kept: Vec<u64> = counts
        .iter()
        .enumerate()
        .map(|(b, &k)| if checks.iter().all(|c| c.passes(b as u64)) { k } else { 0 })
        .collect();
    let (total, survived) = (counts.iter().sum::<u64>(), kept.iter().sum::<u64>());
    if survived == 0 {
        return Err(Error::EmptyEnsemble);
    }
    Ok((kept, survived as f64 / total as f64))
}

/// Sample mean and standard error of a diagonal observable over a histogram.
pub fn diagonal_expectation(counts: &[u64], obs: &PauliSum) -> Result<(f64, f64)> {
    let mut terms = Vec::new();
    for (p, c) in obs.iter() {
        if !p.is_diagonal() {
            return Err(Error::Unsupported(format!("{p} is not diagonal")));
        }
        terms.push((p.z_mask(), (c * p.phase_factor()).re));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for (b, &k) in counts.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let v: f64 = terms.iter().map(|&(m, c)| if (b as u64 & m).count_ones() % 2 == 0 { c } else { -c }).sum();
        s1 += k as f64 * v;
        s2 += k as f64 * v * v;
    }
    let n = total as f64;
    let mean = s1 / n;
    let var = if total > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryVerifiedEnergy {
    pub exact: f64,
    pub raw: f64,
    pub raw_sigma: f64,
    pub post_selected: f64,
    pub post_selected_sigma: f64,
    /// Mean retention over the groups that could be checked.
    pub retention: f64,
    pub groups: usize,
    pub checked_groups: usize,
}

/// `<H>` from grouped shots whose outcome bits are flipped independently
/// with probability `flip_rate`, before and after post-selection.
///
/// A group is post-selected when it measures every checked qubit in the
/// `Z` basis; the others enter both estimates unfiltered.
pub fn symmetry_verified_energy<R: Rng>(
    h: &PauliSum,
    psi: &StateVector,
    checks: &[ParityCheck],
    flip_rate: f64,
    shots: u64,
    rng: &mut R,
) -> Result<SymmetryVerifiedEnergy> {
    let n = psi.n_qubits();
    if h.n_qubits() != n {
        return Err(Error::Dimension { expected: n, found: h.n_qubits() });
    }
    let confusion = product_confusion_matrix(&vec![(flip_rate, flip_rate); n])?;
    let check_mask = checks.iter().fold(0u64, |m, c| m | c.mask);
    let mut constant = 0.0;
    let mut rest = PauliSum::zero(n);
    for (p, c) in h.iter() {
        let c = (c * p.phase_factor()).re;
        if p.is_identity() {
            constant += c;
        } else {
            rest.add_term(p.clone().unsigned(), c.into());
        }
    }
    let mut out = SymmetryVerifiedEnergy {
        exact: psi.expectation(h)?.re,
        raw: constant,
        raw_sigma: 0.0,
        post_selected: constant,
        post_selected_sigma: 0.0,
        retention: 0.0,
        groups: 0,
        checked_groups: 0,
    };
    let (mut var_raw, mut var_ps) = (0.0, 0.0);
    for g in rest.group_commuting(Commutation::QubitWise) {
        let (mut x, mut z) = (0u64, 0u64);
        for (p, _) in g.iter() {
            x |= p.x_mask();
            z |= p.z_mask();
        }
        let basis = PauliString::from_masks(n, x, z, 0)?;
        let mut amps = psi.amplitudes().to_vec();
        for gate in measurement_basis_change(&basis) {
            apply_gate_to(&mut amps, n, &gate)?;
        }
        let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let counts = sample_counts(&apply_readout(&probs, &confusion, None)?, shots, rng)?;
        // Read every member as a Z string on the rotated outcomes.
        let diag = PauliSum::from_terms(
            n,
            g.iter().map(|(p, c)| Ok((PauliString::from_masks(n, 0, p.support(), 0)?, *c))).collect::<Result<Vec<_>>>()?,
        )?;
        let (raw, s_raw) = diagonal_expectation(&counts, &diag)?;
        out.raw += raw;
        var_raw += s_raw * s_raw;
        out.groups += 1;
        if x & check_mask == 0 {
            let (kept, retention) = post_select_counts(&counts, checks)?;
            let (ps, s_ps) = diagonal_expectation(&kept, &diag)?;
            out.post_selected += ps;
            var_ps += s_ps * s_ps;
            out.retention += retention;
            out.checked_groups += 1;
        } else {
            out.post_selected += raw;
            var_ps += s_raw * s_raw;
        }
    }
    out.raw_sigma = var_raw.sqrt();
    out.post_selected_sigma = var_ps.sqrt();
    if out.checked_groups > 0 {
        out.retention /= out.checked_groups as f64;
    }
    Ok(out)
}
