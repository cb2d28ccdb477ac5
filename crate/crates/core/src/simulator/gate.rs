use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};
use crate::pauli::PauliString;

/// A quantum gate acting on named qubits.
///
/// Rotations follow `R_P(theta) = exp(-i theta P / 2)`. `S = diag(1, i)` and
/// `T = diag(1, e^{i pi/4})`, which equal `Rz(pi/2)` and `Rz(pi/4)` up to a
/// global phase. Dense matrices of multi-qubit gates list their qubits
/// least-significant first: for `Unitary { qubits: [a, b], .. }` row index
/// bit 0 is qubit `a`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Id(usize),
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    /// `exp(-i theta P / 2)`; `P` must carry a real phase.
    PauliRotation { pauli: PauliString, angle: f64 },
    /// Multiplies the state by `exp(-i angle / 2)`.
    GlobalPhase(f64),
    /// Applies `pauli` when the control qubit is `|1>`.
    ControlledPauli { control: usize, pauli: PauliString },
    /// Applies `matrix` to `targets` when every control matches its value.
    Controlled {
        controls: Vec<usize>,
        values: Vec<bool>,
        targets: Vec<usize>,
        matrix: CMatrix,
    },
    Unitary { qubits: Vec<usize>, matrix: CMatrix },
}

fn m2(a: C64, b: C64, c: C64, d: C64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Id(_) => "id",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::T(_) => "t",
            Gate::Tdg(_) => "tdg",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Cnot { .. } => "cnot",
            Gate::Swap(..) => "swap",
            Gate::PauliRotation { .. } => "pauli_rotation",
            Gate::GlobalPhase(_) => "global_phase",
            Gate::ControlledPauli { .. } => "controlled_pauli",
            Gate::Controlled { .. } => "controlled",
            Gate::Unitary { .. } => "unitary",
        }
    }

    /// Qubits the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Id(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::T(q)
            | Gate::Tdg(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::PauliRotation { pauli, .. } => support_qubits(pauli),
            Gate::GlobalPhase(_) => Vec::new(),
            Gate::ControlledPauli { control, pauli } => {
                let mut v = vec![*control];
                v.extend(support_qubits(pauli));
                v
            }
            Gate::Controlled {
                controls, targets, ..
            } => controls.iter().chain(targets).copied().collect(),
            Gate::Unitary { qubits, .. } => qubits.clone(),
        }
    }

    /// Rotation angle, for gates that carry one.
    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) | Gate::GlobalPhase(a) => Some(*a),
            Gate::PauliRotation { angle, .. } => Some(*angle),
            _ => None,
        }
    }

    /// Same gate with its rotation angle replaced.
    pub fn with_angle(&self, angle: f64) -> Result<Gate> {
        Ok(match self {
            Gate::Rx(q, _) => Gate::Rx(*q, angle),
            Gate::Ry(q, _) => Gate::Ry(*q, angle),
            Gate::Rz(q, _) => Gate::Rz(*q, angle),
            Gate::GlobalPhase(_) => Gate::GlobalPhase(angle),
            Gate::PauliRotation { pauli, .. } => Gate::PauliRotation {
                pauli: *pauli,
                angle,
            },
            other => {
                return Err(Error::Argument(format!(
                    "gate {} has no angle",
                    other.kind()
                )))
            }
        })
    }

    /// Checks qubit bounds, distinctness and matrix shapes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::Dimension {
                    expected: n,
                    found: q + 1,
                });
            }
        }
        let mut sorted = qs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qs.len() {
            return Err(Error::Argument(format!(
                "gate {} repeats a qubit: {qs:?}",
                self.kind()
            )));
        }
        match self {
            Gate::PauliRotation { pauli, .. } => {
                if pauli.n_qubits() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        found: pauli.n_qubits(),
                    });
                }
                if !pauli.is_hermitian() {
                    return Err(Error::Argument(
                        "rotation generator must have a real phase".into(),
                    ));
                }
            }
            Gate::ControlledPauli { pauli, .. } if pauli.n_qubits() != n => {
                return Err(Error::Dimension {
                    expected: n,
                    found: pauli.n_qubits(),
                });
            }
            Gate::Controlled {
                controls,
                values,
                targets,
                matrix,
            } => {
                if controls.len() != values.len() {
                    return Err(Error::Argument("one control value per control".into()));
                }
                if controls.is_empty() {
                    return Err(Error::Argument("controlled gate needs a control".into()));
                }
                check_square(matrix, targets.len())?;
            }
            Gate::Unitary { qubits, matrix } => check_square(matrix, qubits.len())?,
            _ => {}
        }
        Ok(())
    }

    /// Local matrix on [`Gate::qubits`], least-significant qubit first.
    pub fn matrix(&self) -> CMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Gate::Id(_) => CMatrix::identity(2, 2),
            Gate::X(_) => m2(ZERO, ONE, ONE, ZERO),
            Gate::Y(_) => m2(ZERO, -I, I, ZERO),
            Gate::Z(_) => m2(ONE, ZERO, ZERO, -ONE),
            Gate::H(_) => m2(h, h, h, -h),
            Gate::S(_) => m2(ONE, ZERO, ZERO, I),
            Gate::Sdg(_) => m2(ONE, ZERO, ZERO, -I),
            Gate::T(_) => m2(ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Tdg(_) => m2(ONE, ZERO, ZERO, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            Gate::Rx(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                m2(c.into(), -I * s, -I * s, c.into())
            }
            Gate::Ry(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                m2(c.into(), (-s).into(), s.into(), c.into())
            }
            Gate::Rz(_, t) => m2(
                C64::from_polar(1.0, -t / 2.0),
                ZERO,
                ZERO,
                C64::from_polar(1.0, t / 2.0),
            ),
            Gate::Cnot { .. } => {
                // Local order: bit 0 = control, bit 1 = target.
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(3, 1)] = ONE;
                m[(2, 2)] = ONE;
                m[(1, 3)] = ONE;
                m
            }
            Gate::Swap(..) => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(2, 1)] = ONE;
                m[(1, 2)] = ONE;
                m[(3, 3)] = ONE;
                m
            }
            Gate::PauliRotation { pauli, angle } => {
                let local = compress_pauli(pauli);
                let p = local.to_dense().expect("rotation support within dense cap");
                let d = p.nrows();
                CMatrix::identity(d, d) * C64::new((angle / 2.0).cos(), 0.0)
                    - p * (I * (angle / 2.0).sin())
            }
            Gate::GlobalPhase(a) => CMatrix::from_element(1, 1, C64::from_polar(1.0, -a / 2.0)),
            Gate::ControlledPauli { pauli, .. } => {
                let local = compress_pauli(pauli);
                let p = local.to_dense().expect("controlled Pauli within dense cap");
                controlled_block(&p, 1, 1)
            }
            Gate::Controlled {
                values,
                matrix,
                controls,
                ..
            } => {
                let ctrl_val: usize = values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (v as usize) << k)
                    .sum();
                controlled_block(matrix, controls.len(), ctrl_val)
            }
            Gate::Unitary { matrix, .. } => matrix.clone(),
        }
    }

    /// The same operation conditioned on `control` being `|1>`.
    pub fn controlled_by(&self, control: usize) -> Gate {
        match self {
            Gate::GlobalPhase(a) => Gate::Unitary {
                qubits: vec![control],
                matrix: m2(ONE, ZERO, ZERO, C64::from_polar(1.0, -a / 2.0)),
            },
            Gate::Controlled { controls, values, targets, matrix } => {
                let mut controls = controls.clone();
                let mut values = values.clone();
                controls.push(control);
                values.push(true);
                Gate::Controlled { controls, values, targets: targets.clone(), matrix: matrix.clone() }
            }
            other => Gate::Controlled {
                controls: vec![control],
                values: vec![true],
                targets: other.qubits(),
                matrix: other.matrix(),
            },
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::S(q) => Gate::Sdg(*q),
            Gate::Sdg(q) => Gate::S(*q),
            Gate::T(q) => Gate::Tdg(*q),
            Gate::Tdg(q) => Gate::T(*q),
            Gate::Rx(q, a) => Gate::Rx(*q, -a),
            Gate::Ry(q, a) => Gate::Ry(*q, -a),
            Gate::Rz(q, a) => Gate::Rz(*q, -a),
            Gate::PauliRotation { pauli, angle } => Gate::PauliRotation {
                pauli: *pauli,
                angle: -angle,
            },
            Gate::GlobalPhase(a) => Gate::GlobalPhase(-a),
            Gate::Controlled {
                controls,
                values,
                targets,
                matrix,
            } => Gate::Controlled {
                controls: controls.clone(),
                values: values.clone(),
                targets: targets.clone(),
                matrix: matrix.adjoint(),
            },
            Gate::Unitary { qubits, matrix } => Gate::Unitary {
                qubits: qubits.clone(),
                matrix: matrix.adjoint(),
            },
            other => other.clone(),
        }
    }
}

/// Gates realizing `P` exactly, including its phase.
pub fn pauli_gates(p: &PauliString) -> Vec<Gate> {
    let mut gates: Vec<Gate> = support_qubits(p)
        .into_iter()
        .map(|q| match p.get(q) {
            crate::pauli::Pauli::X => Gate::X(q),
            crate::pauli::Pauli::Y => Gate::Y(q),
            _ => Gate::Z(q),
        })
        .collect();
    if p.phase() != 0 {
        gates.push(Gate::GlobalPhase(-(p.phase() as f64) * std::f64::consts::PI));
    }
    gates
}

fn check_square(m: &CMatrix, k: usize) -> Result<()> {
    let d = 1usize << k;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Dimension {
            expected: d,
            found: m.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn support_qubits(p: &PauliString) -> Vec<usize> {
    (0..p.n_qubits()).filter(|&q| p.support() >> q & 1 == 1).collect()
}

/// Restricts a Pauli string to its support, keeping the phase.
fn compress_pauli(p: &PauliString) -> PauliString {
    let qs = support_qubits(p);
    let mut x = 0u64;
    let mut z = 0u64;
    for (k, &q) in qs.iter().enumerate() {
        x |= (p.x_mask() >> q & 1) << k;
        z |= (p.z_mask() >> q & 1) << k;
    }
    PauliString::from_masks(qs.len(), x, z, p.phase()).expect("compressed width")
}

/// Block matrix acting as `m` on the targets when the `nc` low control bits
/// equal `ctrl_val`, identity otherwise.
fn controlled_block(m: &CMatrix, nc: usize, ctrl_val: usize) -> CMatrix {
    let dt = m.nrows();
    let dc = 1usize << nc;
    let d = dc * dt;
    let mut out = CMatrix::identity(d, d);
    for r in 0..dt {
        for c in 0..dt {
            out[(r * dc + ctrl_val, c * dc + ctrl_val)] = m[(r, c)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, max_abs_diff};

    #[test]
    fn all_gates_are_unitary() {
        let p: PauliString = "XYZ".parse().unwrap();
        let gates = vec![
            Gate::Id(0),
            Gate::X(0),
            Gate::Y(0),
            Gate::Z(0),
            Gate::H(0),
            Gate::S(0),
            Gate::Sdg(0),
            Gate::T(0),
            Gate::Tdg(0),
            Gate::Rx(0, 0.3),
            Gate::Ry(0, 1.1),
            Gate::Rz(0, -0.7),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Swap(0, 1),
            Gate::PauliRotation {
                pauli: p,
                angle: 0.4,
            },
            Gate::GlobalPhase(0.9),
            Gate::ControlledPauli {
                control: 0,
                pauli: "ZY".parse::<PauliString>().unwrap().widen(3).unwrap(),
            },
        ];
        for g in gates {
            assert!(is_unitary(&g.matrix(), 1e-12), "{}", g.kind());
            let back = g.matrix() * g.adjoint().matrix();
            let d = back.nrows();
            assert!(max_abs_diff(&back, &CMatrix::identity(d, d)) < 1e-12);
        }
    }

    #[test]
    fn s_and_t_match_rz_up_to_phase() {
        let s = Gate::S(0).matrix();
        let rz = Gate::Rz(0, std::f64::consts::FRAC_PI_2).matrix()
            * C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!(max_abs_diff(&s, &rz) < 1e-14);
    }

    #[test]
    fn validation_catches_repeats_and_bounds() {
        assert!(Gate::Cnot {
            control: 1,
            target: 1
        }
        .validate(2)
        .is_err());
        assert!(matches!(
            Gate::X(3).validate(2),
            Err(Error::Dimension { .. })
        ));
    }
}
