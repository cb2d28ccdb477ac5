use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator, Ladder, SpinOrdering};
use crate::linalg::{C64, ZERO};
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::{apply_gate_to, Circuit, Gate, StateVector};

const GENERATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AnsatzKind {
    HardwareEfficient { layers: usize },
    UccsdFactorized,
    AdaptivePool,
}

/// A parameterized circuit acting on `|0...0>`; the reference preparation is
/// part of the circuit.
///
/// For the exponential ansätze `generators[k]` is the anti-Hermitian
/// operator behind parameter `k`, applied as `exp(θ_k G_k)` by one
/// first-order pass over its Pauli terms.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub kind: AnsatzKind,
    pub circuit: Circuit,
    pub generators: Vec<PauliSum>,
    pub labels: Vec<String>,
}

impl Ansatz {
    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        let mut psi = StateVector::zero(self.n_qubits())?;
        psi.apply_circuit(&self.circuit, theta)?;
        Ok(psi)
    }

    /// Exact `<ψ(θ)|H|ψ(θ)>`.
    pub fn energy(&self, h: &PauliSum, theta: &[f64]) -> Result<f64> {
        Ok(self.prepare(theta)?.expectation(h)?.re)
    }

    /// Appends `exp(θ G)` for a new parameter named `label`.
    pub fn push_generator(&mut self, g: &PauliSum, label: &str) -> Result<()> {
        if self.circuit.parameters().iter().any(|p| p == label) {
            return Err(Error::Argument(format!("parameter {label} already exists")));
        }
        for (p, angle_scale) in generator_rotations(g)? {
            self.circuit.push_param(Gate::PauliRotation { pauli: p, angle: 0.0 }, label, angle_scale)?;
        }
        self.generators.push(g.clone());
        self.labels.push(label.to_string());
        Ok(())
    }

    /// `∂ψ/∂θ_k` for every parameter.
    ///
    /// Each parameterized gate is a rotation `exp(-i a G / 2)` with
    /// `G² = 1`, so shifting its angle by `π` multiplies it by `-iG` and
    /// `∂_a` equals half the shifted gate.
    pub fn derivative_states(&self, theta: &[f64]) -> Result<Vec<Vec<C64>>> {
        let gates = self.circuit.bind(theta)?;
        let n = self.n_qubits();
        let ops = self.circuit.ops();
        let mut out = vec![vec![ZERO; 1 << n]; self.n_params()];
        let mut prefix = StateVector::zero(n)?.into_amplitudes();
        for (j, g) in gates.iter().enumerate() {
            if let Some(p) = ops[j].param {
                let a = g.angle().unwrap_or(0.0);
                let mut v = prefix.clone();
                apply_gate_to(&mut v, n, &g.with_angle(a + std::f64::consts::PI)?)?;
                for later in &gates[j + 1..] {
                    apply_gate_to(&mut v, n, later)?;
                }
                let f = 0.5 * p.scale;
                for (o, x) in out[p.index].iter_mut().zip(&v) {
                    *o += x * f;
                }
            }
            apply_gate_to(&mut prefix, n, g)?;
        }
        Ok(out)
    }

    /// Gates with the `j`-th operation's angle moved by `delta`.
    pub(crate) fn shifted_gates(&self, theta: &[f64], j: usize, delta: f64) -> Result<Vec<Gate>> {
        let mut gates = self.circuit.bind(theta)?;
        let a = gates[j].angle().unwrap_or(0.0);
        gates[j] = gates[j].with_angle(a + delta)?;
        Ok(gates)
    }
}

/// `(P, s)` pairs such that `exp(θ G) = Π_P exp(-i sθ P / 2)` when the terms
/// of `G` commute, which holds for single and double excitations.
fn generator_rotations(g: &PauliSum) -> Result<Vec<(PauliString, f64)>> {
    let mut out = Vec::new();
    for (p, c) in g.iter() {
        if p.is_identity() {
            continue;
        }
        let c = c * p.phase_factor();
        if c.re.abs() > GENERATOR_TOL * c.norm().max(1.0) {
            return Err(Error::Argument(format!("generator term {p} has a non-imaginary coefficient {c}")));
        }
        // exp(i b θ P) = exp(-i (-2bθ) P / 2)
        out.push((p.unsigned(), -2.0 * c.im));
    }
    Ok(out)
}

/// Layers of `Ry` and `Rz` on every qubit followed by a CNOT chain, closed
/// by a final rotation layer: `2n(layers + 1)` parameters.
pub fn hardware_efficient_ansatz(n: usize, layers: usize) -> Result<Ansatz> {
    let mut c = Circuit::new(n);
    let rotations = |c: &mut Circuit, l: usize| -> Result<()> {
        for q in 0..n {
            c.push_param(Gate::Ry(q, 0.0), &format!("ry_{l}_{q}"), 1.0)?;
            c.push_param(Gate::Rz(q, 0.0), &format!("rz_{l}_{q}"), 1.0)?;
        }
        Ok(())
    };
    for l in 0..layers {
        rotations(&mut c, l)?;
        for q in 0..n.saturating_sub(1) {
            c.push(Gate::Cnot { control: q, target: q + 1 })?;
        }
    }
    rotations(&mut c, layers)?;
    Ok(Ansatz {
        kind: AnsatzKind::HardwareEfficient { layers },
        circuit: c,
        generators: Vec::new(),
        labels: Vec::new(),
    })
}

fn reference_circuit(n_modes: usize, reference: u64) -> Result<Circuit> {
    Circuit::from_gates(n_modes, (0..n_modes).filter(|&q| reference >> q & 1 == 1).map(Gate::X))
}

/// Jordan-Wigner images of the spin-conserving excitations `T` from the
/// occupied modes of `reference` into its virtual modes: singles
/// `a_a† a_i` first, then doubles `a_a† a_b† a_j a_i`, each in
/// lexicographic order.
pub fn uccsd_excitations(
    n_modes: usize,
    reference: u64,
    ordering: SpinOrdering,
) -> Result<Vec<(String, PauliSum)>> {
    if n_modes % 2 != 0 {
        return Err(Error::Argument("UCCSD needs an even number of spin orbitals".into()));
    }
    if n_modes < 64 && reference >> n_modes != 0 {
        return Err(Error::Argument("reference occupies modes beyond the register".into()));
    }
    let n_spatial = n_modes / 2;
    let down = |m: usize| ordering.is_down(n_spatial, m) as usize;
    let occ: Vec<usize> = (0..n_modes).filter(|&q| reference >> q & 1 == 1).collect();
    let virt: Vec<usize> = (0..n_modes).filter(|&q| reference >> q & 1 == 0).collect();
    let excitation = |ops: &[Ladder]| -> Result<PauliSum> {
        jordan_wigner(&FermionOperator::product(n_modes, ops, C64::new(1.0, 0.0))?)
    };
    let mut out = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if down(i) == down(a) {
                out.push((format!("s_{i}_{a}"), excitation(&[Ladder::create(a), Ladder::annihilate(i)])?));
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if down(i) + down(j) == down(a) + down(b) {
                        let ops = [Ladder::create(a), Ladder::create(b), Ladder::annihilate(j), Ladder::annihilate(i)];
                        out.push((format!("d_{i}_{j}_{a}_{b}"), excitation(&ops)?));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Anti-Hermitian generators `T - T†` for [`uccsd_excitations`].
pub fn uccsd_generators(
    n_modes: usize,
    reference: u64,
    ordering: SpinOrdering,
) -> Result<Vec<(String, PauliSum)>> {
    Ok(uccsd_excitations(n_modes, reference, ordering)?
        .into_iter()
        .map(|(l, t)| (l, &t - &t.adjoint()))
        .collect())
}

/// Factorized unitary coupled cluster with singles and doubles under
/// Jordan-Wigner: `Π_k exp(θ_k (T_k - T_k†)) |reference>`.
pub fn uccsd_ansatz(n_modes: usize, n_electrons: usize, reference: u64, ordering: SpinOrdering) -> Result<Ansatz> {
    if n_electrons > n_modes {
        return Err(Error::Argument(format!("{n_electrons} electrons do not fit in {n_modes} modes")));
    }
    if reference.count_ones() as usize != n_electrons {
        return Err(Error::Argument(format!(
            "reference occupies {} modes but {n_electrons} electrons were requested",
            reference.count_ones()
        )));
    }
    let mut ansatz = Ansatz {
        kind: AnsatzKind::UccsdFactorized,
        circuit: reference_circuit(n_modes, reference)?,
        generators: Vec::new(),
        labels: Vec::new(),
    };
    for (label, g) in uccsd_generators(n_modes, reference, ordering)? {
        ansatz.push_generator(&g, &label)?;
    }
    Ok(ansatz)
}

/// An empty adaptive ansatz on `n` qubits starting from `reference`; grow it
/// with [`Ansatz::push_generator`].
pub fn adaptive_ansatz(n: usize, reference: u64) -> Result<Ansatz> {
    Ok(Ansatz {
        kind: AnsatzKind::AdaptivePool,
        circuit: reference_circuit(n, reference)?,
        generators: Vec::new(),
        labels: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn hea_parameter_count() {
        let a = hardware_efficient_ansatz(3, 2).unwrap();
        assert_eq!(a.n_params(), 18);
    }

    #[test]
    fn uccsd_h2_counts() {
        let a = uccsd_ansatz(4, 2, 0b0101, SpinOrdering::Blocked).unwrap();
        assert_eq!(a.labels, vec!["s_0_1", "s_2_3", "d_0_2_1_3"]);
        let rotations: Vec<usize> = a.generators.iter().map(|g| g.len()).collect();
        assert_eq!(rotations, vec![2, 2, 8]);
    }

    #[test]
    fn derivative_states_match_finite_difference() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a = hardware_efficient_ansatz(2, 2).unwrap();
        let theta: Vec<f64> = (0..a.n_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = a.derivative_states(&theta).unwrap();
        let h = 1e-6;
        for k in 0..a.n_params() {
            let mut tp = theta.clone();
            tp[k] += h;
            let mut tm = theta.clone();
            tm[k] -= h;
            let p = a.prepare(&tp).unwrap();
            let m = a.prepare(&tm).unwrap();
            for (i, dk) in d[k].iter().enumerate() {
                let fd = (p.amplitudes()[i] - m.amplitudes()[i]) / (2.0 * h);
                assert!((fd - dk).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn non_imaginary_generator_rejected() {
        let g = PauliSum::from_labels(&[("XY", 1.0)]).unwrap();
        let mut a = adaptive_ansatz(2, 0).unwrap();
        assert!(matches!(a.push_generator(&g, "g"), Err(Error::Argument(_))));
    }
}
