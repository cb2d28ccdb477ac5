use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Commutation, PauliString, PauliSum};
use crate::simulator::{apply_gate_to, measurement_basis_change, sample_counts, StateVector};

const REAL_TOL: f64 = 1e-10;

/// How energies are read out of a prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Exact,
    /// Shots per qubit-wise commuting measurement group.
    Shots(u64),
}

impl EstimationMode {
    pub fn name(&self) -> &'static str {
        match self {
            EstimationMode::Exact => "exact",
            EstimationMode::Shots(_) => "shots",
        }
    }
}

#[derive(Debug, Clone)]
struct Group {
    /// Covering string that fixes the basis of every member.
    basis: PauliString,
    terms: Vec<(u64, f64)>,
}

/// Estimates `<H>` exactly or from grouped shot samples.
///
/// Terms are partitioned into qubit-wise commuting groups; each group is
/// measured once per estimate and all of its terms are read from the same
/// outcomes. The reported sigma uses the sample variance of each group's
/// combined observable, so covariances inside a group are included.
#[derive(Debug, Clone)]
pub struct EnergyEstimator {
    h: PauliSum,
    constant: f64,
    groups: Vec<Group>,
    mode: EstimationMode,
    rng: ChaCha20Rng,
    evaluations: usize,
}

impl EnergyEstimator {
    pub fn new(h: &PauliSum, mode: EstimationMode, seed: u64) -> Result<Self> {
        let mut constant = 0.0;
        let mut rest = PauliSum::zero(h.n_qubits());
        for (p, c) in h.iter() {
            let c = c * p.phase_factor();
            if c.im.abs() > REAL_TOL || !p.is_hermitian() {
                return Err(Error::Argument(format!("term {p} has non-real coefficient {c}")));
            }
            if p.is_identity() {
                constant += c.re;
            } else {
                rest.add_term(p.unsigned(), c.re.into());
            }
        }
        let groups = rest
            .group_commuting(Commutation::QubitWise)
            .into_iter()
            .map(|g| {
                let n = g.n_qubits();
                let (mut x, mut z) = (0u64, 0u64);
                let mut terms = Vec::new();
                for (p, c) in g.iter() {
                    x |= p.x_mask();
                    z |= p.z_mask();
                    terms.push((p.support(), c.re));
                }
                Ok(Group { basis: PauliString::from_masks(n, x, z, 0)?, terms })
            })
            .collect::<Result<Vec<_>>>()?;
        if let EstimationMode::Shots(0) = mode {
            return Err(Error::Argument("shot count must be at least 1".into()));
        }
        Ok(EnergyEstimator {
            h: h.clone(),
            constant,
            groups,
            mode,
            rng: ChaCha20Rng::seed_from_u64(seed),
            evaluations: 0,
        })
    }

    pub fn mode(&self) -> EstimationMode {
        self.mode
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.h
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Number of estimates drawn so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// `(mean, sigma)`; sigma is zero in exact mode.
    pub fn estimate(&mut self, psi: &StateVector) -> Result<(f64, f64)> {
        self.evaluations += 1;
        let shots = match self.mode {
            EstimationMode::Exact => return Ok((psi.expectation(&self.h)?.re, 0.0)),
            EstimationMode::Shots(s) => s,
        };
        let n = psi.n_qubits();
        let mut mean = self.constant;
        let mut var = 0.0;
        for g in &self.groups {
            let mut amps = psi.amplitudes().to_vec();
            for gate in measurement_basis_change(&g.basis) {
                apply_gate_to(&mut amps, n, &gate)?;
            }
            let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
            let counts = sample_counts(&probs, shots, &mut self.rng)?;
            let (mut s1, mut s2) = (0.0, 0.0);
            for (b, &k) in counts.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v: f64 = g
                    .terms
                    .iter()
                    .map(|&(support, c)| if (b as u64 & support).count_ones() % 2 == 0 { c } else { -c })
                    .sum();
                s1 += k as f64 * v;
                s2 += k as f64 * v * v;
            }
            let m = s1 / shots as f64;
            mean += m;
            var += (s2 / shots as f64 - m * m).max(0.0) / shots as f64;
        }
        Ok((mean, var.sqrt()))
    }
}
