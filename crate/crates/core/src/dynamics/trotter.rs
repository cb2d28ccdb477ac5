use super::report::EvolutionReport;
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, spectral_norm, CMatrix, C64};
use crate::pauli::{check_dense_cap, PauliString, PauliSum};
use crate::simulator::{Circuit, Gate, StateVector};

const REAL_TOL: f64 = 1e-12;

/// Splits a Hermitian sum into its identity coefficient and the remaining
/// terms, in the sum's deterministic mask order.
pub fn trotter_terms(h: &PauliSum) -> Result<(f64, Vec<(PauliString, f64)>)> {
    let mut shift = 0.0;
    let mut terms = Vec::new();
    for (p, c) in h.iter() {
        if c.im.abs() > REAL_TOL || !p.is_hermitian() {
            return Err(Error::Argument(format!("term {p} has non-real coefficient {c}")));
        }
        if p.is_identity() {
            shift += c.re;
        } else {
            terms.push((*p, c.re));
        }
    }
    Ok((shift, terms))
}

/// Suzuki coefficient `1 / (4 - 4^{1/(2k+1)})` used to lift order `2k` to
/// order `2k + 2`.
pub fn suzuki_coefficient(k: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2 * k + 1) as f64))
}

fn push_merged(seq: &mut Vec<(usize, f64)>, idx: usize, w: f64) {
    match seq.last_mut() {
        Some((last, lw)) if *last == idx => *lw += w,
        _ => seq.push((idx, w)),
    }
}

/// One step of the product formula of the given order as `(term, weight)`
/// pairs: the step is `Π_j exp(-i w_j Δt h_{term_j})`, first pair first.
pub fn product_formula(n_terms: usize, order: usize) -> Result<Vec<(usize, f64)>> {
    if order == 0 || (order > 1 && order % 2 == 1) {
        return Err(Error::Argument(format!("product formula order {order} must be 1 or even")));
    }
    let mut seq = Vec::new();
    if n_terms == 0 {
        return Ok(seq);
    }
    if order == 1 {
        return Ok((0..n_terms).map(|i| (i, 1.0)).collect());
    }
    if order == 2 {
        for i in 0..n_terms {
            push_merged(&mut seq, i, 0.5);
        }
        for i in (0..n_terms).rev() {
            push_merged(&mut seq, i, 0.5);
        }
        return Ok(seq);
    }
    let inner = product_formula(n_terms, order - 2)?;
    let a = suzuki_coefficient(order / 2 - 1);
    for scale in [a, a, 1.0 - 4.0 * a, a, a] {
        for &(i, w) in &inner {
            push_merged(&mut seq, i, w * scale);
        }
    }
    Ok(seq)
}

/// `(U_order(t / n))^n` as Pauli rotations plus one global phase.
pub fn trotter_circuit(h: &PauliSum, t: f64, n_steps: usize, order: usize) -> Result<Circuit> {
    if n_steps == 0 {
        return Err(Error::Argument("n_steps must be at least 1".into()));
    }
    let (shift, terms) = trotter_terms(h)?;
    let seq = product_formula(terms.len(), order)?;
    let dt = t / n_steps as f64;
    let mut c = Circuit::new(h.n_qubits());
    if shift != 0.0 {
        c.push(Gate::GlobalPhase(2.0 * shift * t))?;
    }
    for _ in 0..n_steps {
        for &(i, w) in &seq {
            let (p, coeff) = terms[i];
            c.push(Gate::PauliRotation { pauli: p, angle: 2.0 * coeff * w * dt })?;
        }
    }
    Ok(c)
}

/// Dense product-formula unitary.
pub fn trotter_unitary(h: &PauliSum, t: f64, n_steps: usize, order: usize) -> Result<CMatrix> {
    check_dense_cap(h.n_qubits())?;
    trotter_circuit(h, t, n_steps, order)?.to_dense(&[])
}

/// `|| exp(-iHt) - U_order(t/n)^n ||` in spectral norm.
pub fn trotter_operator_error(h: &PauliSum, t: f64, n_steps: usize, order: usize) -> Result<f64> {
    let exact = expm_hermitian(&h.to_dense()?, t);
    let approx = trotter_unitary(h, t, n_steps, order)?;
    Ok(spectral_norm(&(exact - approx)))
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `½ Σ_{l < l'} || [h_l, h_l'] ||`.
pub fn gamma_first_order(terms: &[CMatrix]) -> f64 {
    let mut g = 0.0;
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            g += spectral_norm(&commutator(&terms[i], &terms[j]));
        }
    }
    0.5 * g
}

fn second_order_prefactor(terms: &[CMatrix]) -> f64 {
    let l = terms.len();
    if l == 0 {
        return 0.0;
    }
    let dim = terms[0].nrows();
    let mut tail = vec![CMatrix::zeros(dim, dim); l + 1];
    for i in (0..l).rev() {
        tail[i] = &tail[i + 1] + &terms[i];
    }
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..l {
        let rest = &tail[i + 1];
        a += spectral_norm(&commutator(rest, &commutator(rest, &terms[i])));
        b += spectral_norm(&commutator(&terms[i], &commutator(&terms[i], rest)));
    }
    a / 12.0 + b / 24.0
}

/// Nested-commutator prefactor for the symmetric second-order formula,
/// maximized over both sweep directions.
pub fn gamma_second_order(terms: &[CMatrix]) -> f64 {
    let rev: Vec<CMatrix> = terms.iter().rev().cloned().collect();
    second_order_prefactor(terms).max(second_order_prefactor(&rev))
}

/// A-priori operator-norm bound for `n_steps` steps of the given order.
/// Order 1 gives `γ_p n Δt²`, order 2 the nested-commutator bound
/// `n Δt³ (Σ‖[A,[A,B]]‖/12 + Σ‖[B,[B,A]]‖/24)`.
pub fn trotter_error_bound(terms: &[PauliSum], t: f64, n_steps: usize, order: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::Argument("n_steps must be at least 1".into()));
    }
    let dense: Vec<CMatrix> = terms.iter().map(|h| h.to_dense()).collect::<Result<_>>()?;
    let dt = t.abs() / n_steps as f64;
    let n = n_steps as f64;
    match order {
        1 => Ok(gamma_first_order(&dense) * n * dt * dt),
        2 => Ok(gamma_second_order(&dense) * n * dt * dt * dt),
        _ => Err(Error::Unsupported(format!("no a-priori bound for order {order}"))),
    }
}

/// Splits a sum into single-string terms in the same order used for
/// evolution.
pub fn single_term_grouping(h: &PauliSum) -> Result<Vec<PauliSum>> {
    let (_, terms) = trotter_terms(h)?;
    Ok(terms
        .into_iter()
        .map(|(p, c)| PauliSum::from_string(p, C64::new(c, 0.0)))
        .collect())
}

/// Applies `(U_order(t/n))^n` to `psi`. Bounds and the oracle error are
/// filled in when the register fits the dense cap.
pub fn trotter_evolve(
    h: &PauliSum,
    psi: &StateVector,
    t: f64,
    n_steps: usize,
    order: usize,
) -> Result<EvolutionReport> {
    let circuit = trotter_circuit(h, t, n_steps, order)?;
    let mut out = psi.clone();
    out.apply_circuit(&circuit, &[])?;
    let (_, terms) = trotter_terms(h)?;
    let mut report = EvolutionReport::new("trotter", t, n_steps, order, out);
    report.term_order = terms.iter().map(|(p, _)| p.label()).collect();
    if check_dense_cap(h.n_qubits()).is_ok() {
        if order <= 2 {
            report.bound = Some(trotter_error_bound(&single_term_grouping(h)?, t, n_steps, order)?);
        }
        let exact = expm_hermitian(&h.to_dense()?, t) * psi.to_vector();
        report.measured_error = Some((exact - report.state.to_vector()).norm());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn suzuki_a2() {
        assert!((suzuki_coefficient(1) - 0.414490).abs() < 1e-6);
    }

    #[test]
    fn odd_order_rejected() {
        assert!(product_formula(3, 3).is_err());
        assert!(product_formula(3, 0).is_err());
    }

    #[test]
    fn weights_sum_to_one_per_term() {
        for order in [1, 2, 4, 6] {
            let seq = product_formula(3, order).unwrap();
            for i in 0..3 {
                let w: f64 = seq.iter().filter(|(j, _)| *j == i).map(|(_, w)| w).sum();
                assert!((w - 1.0).abs() < 1e-12, "order {order}");
            }
        }
    }

    #[test]
    fn commuting_terms_exact() {
        let h = PauliSum::from_labels(&[("ZZ", 0.7), ("ZI", -0.3), ("IZ", 0.2), ("II", 0.4)]).unwrap();
        for order in [1, 2, 4] {
            let u = trotter_unitary(&h, 1.3, 1, order).unwrap();
            let exact = expm_hermitian(&h.to_dense().unwrap(), 1.3);
            assert!(max_abs_diff(&u, &exact) < 1e-12);
        }
        let terms = single_term_grouping(&h).unwrap();
        assert_eq!(trotter_error_bound(&terms, 1.0, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn gamma_for_x_plus_z() {
        let terms = vec![
            PauliSum::from_labels(&[("X", 1.0)]).unwrap(),
            PauliSum::from_labels(&[("Z", 1.0)]).unwrap(),
        ];
        let dense: Vec<CMatrix> = terms.iter().map(|t| t.to_dense().unwrap()).collect();
        assert!((gamma_first_order(&dense) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn higher_orders_converge_faster() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let h = PauliSum::random(3, 8, &mut rng).unwrap();
        let e2 = trotter_operator_error(&h, 1.0, 8, 2).unwrap();
        let e4 = trotter_operator_error(&h, 1.0, 8, 4).unwrap();
        assert!(e4 < e2);
    }

    #[test]
    fn evolve_reports_bound_above_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let h = PauliSum::random(3, 6, &mut rng).unwrap();
        let psi = StateVector::zero(3).unwrap();
        for order in [1, 2] {
            let r = trotter_evolve(&h, &psi, 0.8, 5, order).unwrap();
            assert!(r.measured_error.unwrap() <= r.bound.unwrap() + 1e-10);
        }
    }
}
