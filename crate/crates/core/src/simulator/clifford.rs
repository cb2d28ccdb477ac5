use super::gate::Gate;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// `G P G†` for a Clifford gate `G`, tracked symbolically.
///
/// Supported gates: `Id`, `X`, `Y`, `Z`, `H`, `S`, `Sdg`, `Cnot`, `Swap`.
pub fn conjugate(g: &Gate, p: &PauliString) -> Result<PauliString> {
    let n = p.n_qubits();
    g.validate(n)?;
    // Conjugation is a group homomorphism: map each X_q, Z_q factor of
    // p = i^k prod_q i^{x_q z_q} X_q^{x_q} Z_q^{z_q} and multiply back.
    let mut out = PauliString::identity(n).with_phase(p.phase());
    for q in 0..n {
        let (xb, zb) = (p.x_mask() >> q & 1 == 1, p.z_mask() >> q & 1 == 1);
        if xb && zb {
            out = out.with_phase(out.phase() + 1);
        }
        if xb {
            out = out.multiply(&image(g, n, q, Pauli::X)?)?;
        }
        if zb {
            out = out.multiply(&image(g, n, q, Pauli::Z)?)?;
        }
    }
    Ok(out)
}

/// Image of a single `X_q` or `Z_q`.
fn image(g: &Gate, n: usize, q: usize, p: Pauli) -> Result<PauliString> {
    let single = |q: usize, p: Pauli| PauliString::single(n, q, p);
    let neg = |s: PauliString| s.with_phase(s.phase() + 2);
    Ok(match g {
        Gate::Id(_) | Gate::GlobalPhase(_) => single(q, p),
        Gate::X(t) | Gate::Y(t) | Gate::Z(t) | Gate::H(t) | Gate::S(t) | Gate::Sdg(t)
            if *t != q =>
        {
            single(q, p)
        }
        Gate::X(_) => match p {
            Pauli::Z => neg(single(q, Pauli::Z)),
            _ => single(q, p),
        },
        Gate::Y(_) => neg(single(q, p)),
        Gate::Z(_) => match p {
            Pauli::X => neg(single(q, Pauli::X)),
            _ => single(q, p),
        },
        Gate::H(_) => match p {
            Pauli::X => single(q, Pauli::Z),
            _ => single(q, Pauli::X),
        },
        // S X S† = Y, S† X S = -Y; Z is fixed by both.
        Gate::S(_) => match p {
            Pauli::X => single(q, Pauli::Y),
            _ => single(q, Pauli::Z),
        },
        Gate::Sdg(_) => match p {
            Pauli::X => neg(single(q, Pauli::Y)),
            _ => single(q, Pauli::Z),
        },
        Gate::Cnot { control, target } => match p {
            Pauli::X if q == *control => {
                PauliString::from_ops(n, &[(*control, Pauli::X), (*target, Pauli::X)])?
            }
            Pauli::Z if q == *target => {
                PauliString::from_ops(n, &[(*control, Pauli::Z), (*target, Pauli::Z)])?
            }
            _ => single(q, p),
        },
        Gate::Swap(a, b) => {
            let dest = if q == *a {
                *b
            } else if q == *b {
                *a
            } else {
                q
            };
            single(dest, p)
        }
        other => {
            return Err(Error::Unsupported(format!(
                "{} is not a supported Clifford gate",
                other.kind()
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::simulator::gate_to_dense;

    #[test]
    fn matches_dense_conjugation() {
        let gates = [
            Gate::X(0),
            Gate::Y(1),
            Gate::Z(2),
            Gate::H(0),
            Gate::S(1),
            Gate::Sdg(2),
            Gate::Cnot {
                control: 2,
                target: 0,
            },
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Swap(0, 2),
        ];
        let paulis = ["XYZ", "YYI", "ZXY", "-iXZY", "IIY", "YXX"];
        for g in &gates {
            let u = gate_to_dense(g, 3).unwrap();
            for s in paulis {
                let p: PauliString = s.parse().unwrap();
                let want = &u * p.to_dense().unwrap() * u.adjoint();
                let got = conjugate(g, &p).unwrap().to_dense().unwrap();
                assert!(max_abs_diff(&want, &got) < 1e-12, "{} on {s}", g.kind());
            }
        }
    }

    #[test]
    fn non_clifford_is_rejected() {
        let p: PauliString = "X".parse().unwrap();
        assert!(matches!(
            conjugate(&Gate::T(0), &p),
            Err(Error::Unsupported(_))
        ));
    }
}
