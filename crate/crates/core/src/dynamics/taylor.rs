use super::lcu::{oaa_probability, LcuDecomposition};
use super::report::EvolutionReport;
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, C64};
use crate::pauli::check_dense_cap;
use crate::simulator::StateVector;

/// Segments so that `α Δt <= ln 2`.
pub fn taylor_segments(alpha: f64, t: f64) -> usize {
    ((alpha * t.abs()) / std::f64::consts::LN_2).ceil().max(1.0) as usize
}

/// `Σ_{m > K} x^m / m!`.
pub fn taylor_tail(x: f64, k: usize) -> f64 {
    let mut term = 1.0;
    for m in 1..=k + 1 {
        term *= x / m as f64;
    }
    let mut sum: f64 = 0.0;
    let mut m = k + 1;
    while term > f64::EPSILON * sum.max(f64::MIN_POSITIVE) || m < k + 3 {
        sum += term;
        m += 1;
        term *= x / m as f64;
        if m > k + 200 {
            break;
        }
    }
    sum
}

/// Bound on `|| psi_out - exp(-iHt) psi ||` over `r` segments at order `K`:
/// `2 r Σ_{m>K} (αΔt)^m / m!`, the factor two covering renormalization.
pub fn taylor_bound(alpha: f64, t: f64, r: usize, k: usize) -> f64 {
    let x = alpha * t.abs() / r as f64;
    2.0 * r as f64 * taylor_tail(x, k)
}

/// Smallest order meeting `eps` with the default segment count.
pub fn taylor_order_for(alpha: f64, t: f64, eps: f64) -> usize {
    let r = taylor_segments(alpha, t);
    (0..200).find(|&k| taylor_bound(alpha, t, r, k) <= eps).unwrap_or(200)
}

/// Truncated-Taylor evolution. Each segment applies
/// `Σ_{m<=K} (-iΔtH)^m / m!` as the post-selected LCU would, after one
/// round of amplification; the reported probabilities are the raw and
/// amplified success rates per segment.
pub fn taylor_evolve(
    h: &LcuDecomposition,
    psi: &StateVector,
    t: f64,
    segments: Option<usize>,
    k: usize,
) -> Result<EvolutionReport> {
    if psi.n_qubits() != h.n_qubits {
        return Err(Error::Dimension { expected: h.n_qubits, found: psi.n_qubits() });
    }
    let r = segments.unwrap_or_else(|| taylor_segments(h.alpha, t));
    if r == 0 {
        return Err(Error::Argument("segment count must be at least 1".into()));
    }
    if k == 0 && t != 0.0 {
        log::warn!("Taylor order 0 approximates exp(-iHt) by the identity");
    }
    let dt = t / r as f64;
    let op = h.to_pauli_sum();
    let seg_alpha: f64 = (0..=k)
        .scan(1.0, |acc, m| {
            if m > 0 {
                *acc *= h.alpha * dt.abs() / m as f64;
            }
            Some(*acc)
        })
        .sum();
    let mut state = psi.amplitudes().to_vec();
    let mut probabilities = Vec::with_capacity(2 * r);
    for _ in 0..r {
        let mut acc = state.clone();
        let mut term = state.clone();
        for m in 1..=k {
            let hv = op.apply(&term);
            let f = C64::new(0.0, -dt / m as f64);
            term = hv.into_iter().map(|a| a * f).collect();
            for (a, b) in acc.iter_mut().zip(&term) {
                *a += b;
            }
        }
        let norm2: f64 = acc.iter().map(|a| a.norm_sqr()).sum();
        let p = norm2 / (seg_alpha * seg_alpha);
        probabilities.push(p);
        probabilities.push(oaa_probability(p, 1));
        let out = StateVector::from_amplitudes(acc)?;
        state = out.into_amplitudes();
    }
    let out = StateVector::from_amplitudes(state)?;
    let mut report = EvolutionReport::new("taylor", t, r, k, out);
    report.bound = Some(taylor_bound(h.alpha, t, r, k));
    report.success_probabilities = probabilities;
    report.term_order = h.unitaries.iter().map(|u| u.to_string()).collect();
    if check_dense_cap(h.n_qubits).is_ok() {
        let exact = expm_hermitian(&op.to_dense()?, t) * psi.to_vector();
        report.measured_error = Some((exact - report.state.to_vector()).norm());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliSum;
    use crate::simulator::Gate;

    #[test]
    fn zero_time_is_identity() {
        let h = LcuDecomposition::from_pauli_sum(&PauliSum::from_labels(&[("XZ", 0.4), ("ZZ", 0.3)]).unwrap()).unwrap();
        let mut psi = StateVector::zero(2).unwrap();
        psi.apply_gate(&Gate::H(1)).unwrap();
        let r = taylor_evolve(&h, &psi, 0.0, None, 3).unwrap();
        assert!(r.measured_error.unwrap() < 1e-15);
    }

    #[test]
    fn single_qubit_z() {
        let h = LcuDecomposition::from_pauli_sum(&PauliSum::from_labels(&[("Z", 1.0)]).unwrap()).unwrap();
        let mut psi = StateVector::zero(1).unwrap();
        psi.apply_gate(&Gate::H(0)).unwrap();
        let r = taylor_evolve(&h, &psi, 0.1, None, 4).unwrap();
        assert_eq!(r.steps, 1);
        assert!(r.measured_error.unwrap() < 0.1f64.powi(5) / 120.0);
        assert!(r.measured_error.unwrap() <= r.bound.unwrap());
    }

    #[test]
    fn tail_matches_series() {
        let x: f64 = 0.5;
        let direct = x.exp() - (1.0 + x + x * x / 2.0);
        assert!((taylor_tail(x, 2) - direct).abs() < 1e-15);
    }
}
