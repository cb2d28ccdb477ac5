use serde::{Deserialize, Serialize};

use super::gate::Gate;
use super::state::apply_gate_unchecked;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::pauli::{check_dense_cap, PauliString};

/// Binds a gate angle to a named circuit parameter:
/// `angle = offset + scale * theta[index]`, where `offset` is the angle
/// stored on the gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRef {
    pub index: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub gate: Gate,
    pub param: Option<ParamRef>,
}

/// An ordered gate list with named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Op>,
    params: Vec<String>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            ops: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn parameters(&self) -> &[String] {
        &self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n)?;
        self.ops.push(Op { gate, param: None });
        Ok(self)
    }

    /// Index of a named parameter, registering it if new.
    pub fn param_index(&mut self, name: &str) -> usize {
        if let Some(k) = self.params.iter().position(|p| p == name) {
            k
        } else {
            self.params.push(name.to_string());
            self.params.len() - 1
        }
    }

    /// Appends a gate whose angle tracks `scale * theta[name]` on top of the
    /// angle stored in `gate`.
    pub fn push_param(&mut self, gate: Gate, name: &str, scale: f64) -> Result<&mut Self> {
        gate.validate(self.n)?;
        if gate.angle().is_none() {
            return Err(Error::Argument(format!(
                "gate {} cannot carry a parameter",
                gate.kind()
            )));
        }
        let index = self.param_index(name);
        self.ops.push(Op {
            gate,
            param: Some(ParamRef { index, scale }),
        });
        Ok(self)
    }

    /// Appends another circuit, merging parameters by name.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        for op in &other.ops {
            let param = op.param.map(|p| ParamRef {
                index: self.param_index(&other.params[p.index]),
                scale: p.scale,
            });
            self.ops.push(Op {
                gate: op.gate.clone(),
                param,
            });
        }
        Ok(self)
    }

    /// Concrete gates for the given parameter values.
    pub fn bind(&self, values: &[f64]) -> Result<Vec<Gate>> {
        if values.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                found: values.len(),
            });
        }
        self.ops
            .iter()
            .map(|op| match op.param {
                None => Ok(op.gate.clone()),
                Some(p) => {
                    let base = op.gate.angle().unwrap_or(0.0);
                    op.gate.with_angle(base + p.scale * values[p.index])
                }
            })
            .collect()
    }

    /// The adjoint circuit; parameter bindings are negated.
    pub fn inverse(&self) -> Circuit {
        let ops = self
            .ops
            .iter()
            .rev()
            .map(|op| Op {
                gate: op.gate.adjoint(),
                param: op.param.map(|p| ParamRef {
                    index: p.index,
                    scale: -p.scale,
                }),
            })
            .collect();
        Circuit {
            n: self.n,
            ops,
            params: self.params.clone(),
        }
    }

    /// Number of qubits touched by at least one gate.
    pub fn width(&self) -> usize {
        let mut used = vec![false; self.n];
        for op in &self.ops {
            for q in op.gate.qubits() {
                used[q] = true;
            }
        }
        used.into_iter().filter(|&u| u).count()
    }

    /// Number of layers when each gate is placed as early as its qubits allow.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        let mut depth = 0;
        for op in &self.ops {
            let qs = op.gate.qubits();
            if qs.is_empty() {
                continue;
            }
            let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    /// Counts gates by kind, in first-seen order.
    pub fn gate_counts(&self) -> Vec<(&'static str, usize)> {
        let mut out: Vec<(&'static str, usize)> = Vec::new();
        for op in &self.ops {
            let k = op.gate.kind();
            match out.iter_mut().find(|(name, _)| *name == k) {
                Some(entry) => entry.1 += 1,
                None => out.push((k, 1)),
            }
        }
        out
    }

    /// Dense unitary obtained by running every basis state through the circuit.
    pub fn to_dense(&self, values: &[f64]) -> Result<CMatrix> {
        check_dense_cap(self.n)?;
        let gates = self.bind(values)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        let mut col = vec![ZERO; dim];
        for b in 0..dim {
            col.iter_mut().for_each(|a| *a = ZERO);
            col[b] = ONE;
            for g in &gates {
                apply_gate_unchecked(&mut col, g);
            }
            for (r, a) in col.iter().enumerate() {
                m[(r, b)] = *a;
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CircuitDoc {
            n_qubits: self.n,
            parameters: self.params.clone(),
            gates: self.ops.iter().map(|op| GateRecord::from_op(op, &self.params)).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        let mut c = Circuit::new(doc.n_qubits);
        for name in &doc.parameters {
            c.param_index(name);
        }
        for (k, rec) in doc.gates.iter().enumerate() {
            let gate = rec
                .to_gate(doc.n_qubits)
                .map_err(|e| Error::Validation(format!("gate {k}: {e}")))?;
            match &rec.param {
                Some(name) => {
                    c.push_param(gate, name, rec.scale.unwrap_or(1.0))?;
                }
                None => {
                    c.push(gate)?;
                }
            }
        }
        Ok(c)
    }
}

/// JSON form of a circuit.
///
/// ```json
/// {"n_qubits": 2, "parameters": ["t"],
///  "gates": [{"kind": "h", "qubits": [0]},
///            {"kind": "pauli_rotation", "pauli": "XY", "angle": 0.0, "param": "t", "scale": 1.0}]}
/// ```
///
/// Dense gates carry `matrix` as row-major `[re, im]` pairs; controlled gates
/// list controls first in `qubits` with their required values in `values`.
#[derive(Debug, Serialize, Deserialize)]
struct CircuitDoc {
    n_qubits: usize,
    #[serde(default)]
    parameters: Vec<String>,
    gates: Vec<GateRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GateRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<[f64; 2]>>,
}

fn matrix_record(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    out
}

fn matrix_from_record(entries: &[[f64; 2]]) -> Result<CMatrix> {
    let d = (entries.len() as f64).sqrt().round() as usize;
    if d * d != entries.len() || !d.is_power_of_two() {
        return Err(Error::Argument(format!(
            "matrix with {} entries is not a square power of two",
            entries.len()
        )));
    }
    let vals: Vec<C64> = entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(CMatrix::from_row_slice(d, d, &vals))
}

impl GateRecord {
    fn from_op(op: &Op, params: &[String]) -> GateRecord {
        let g = &op.gate;
        let mut rec = GateRecord {
            kind: g.kind().to_string(),
            qubits: g.qubits(),
            angle: g.angle(),
            pauli: None,
            param: op.param.map(|p| params[p.index].clone()),
            scale: op.param.map(|p| p.scale),
            values: None,
            matrix: None,
        };
        match g {
            Gate::PauliRotation { pauli, .. } => {
                rec.qubits.clear();
                rec.pauli = Some(pauli.to_string());
            }
            Gate::ControlledPauli { control, pauli } => {
                rec.qubits = vec![*control];
                rec.pauli = Some(pauli.to_string());
            }
            Gate::Controlled { values, matrix, .. } => {
                rec.values = Some(values.clone());
                rec.matrix = Some(matrix_record(matrix));
            }
            Gate::Unitary { matrix, .. } => rec.matrix = Some(matrix_record(matrix)),
            _ => {}
        }
        rec
    }

    fn to_gate(&self, n: usize) -> Result<Gate> {
        let q = |k: usize| -> Result<usize> {
            self.qubits.get(k).copied().ok_or_else(|| {
                Error::Argument(format!("{} needs at least {} qubits", self.kind, k + 1))
            })
        };
        let angle = || -> Result<f64> {
            self.angle
                .ok_or_else(|| Error::Argument(format!("{} needs an angle", self.kind)))
        };
        let pauli = || -> Result<PauliString> {
            let text = self
                .pauli
                .as_deref()
                .ok_or_else(|| Error::Argument(format!("{} needs a pauli", self.kind)))?;
            let p: PauliString = text.parse()?;
            if p.n_qubits() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.n_qubits(),
                });
            }
            Ok(p)
        };
        let matrix = || -> Result<CMatrix> {
            matrix_from_record(
                self.matrix
                    .as_deref()
                    .ok_or_else(|| Error::Argument(format!("{} needs a matrix", self.kind)))?,
            )
        };
        Ok(match self.kind.as_str() {
            "id" => Gate::Id(q(0)?),
            "x" => Gate::X(q(0)?),
            "y" => Gate::Y(q(0)?),
            "z" => Gate::Z(q(0)?),
            "h" => Gate::H(q(0)?),
            "s" => Gate::S(q(0)?),
            "sdg" => Gate::Sdg(q(0)?),
            "t" => Gate::T(q(0)?),
            "tdg" => Gate::Tdg(q(0)?),
            "rx" => Gate::Rx(q(0)?, angle()?),
            "ry" => Gate::Ry(q(0)?, angle()?),
            "rz" => Gate::Rz(q(0)?, angle()?),
            "cnot" => Gate::Cnot {
                control: q(0)?,
                target: q(1)?,
            },
            "swap" => Gate::Swap(q(0)?, q(1)?),
            "pauli_rotation" => Gate::PauliRotation {
                pauli: pauli()?,
                angle: angle()?,
            },
            "global_phase" => Gate::GlobalPhase(angle()?),
            "controlled_pauli" => Gate::ControlledPauli {
                control: q(0)?,
                pauli: pauli()?,
            },
            "controlled" => {
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::Argument("controlled needs values".into()))?;
                let nc = values.len();
                if nc > self.qubits.len() {
                    return Err(Error::Argument("more control values than qubits".into()));
                }
                Gate::Controlled {
                    controls: self.qubits[..nc].to_vec(),
                    values,
                    targets: self.qubits[nc..].to_vec(),
                    matrix: matrix()?,
                }
            }
            "unitary" => Gate::Unitary {
                qubits: self.qubits.clone(),
                matrix: matrix()?,
            },
            other => return Err(Error::Argument(format!("unknown gate kind {other:?}"))),
        })
    }
}
