use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulator::{Circuit, Gate};

/// Allowed excursion of fitted `Λ` entries outside `[0, 1]`.
pub const ENTRY_TOLERANCE: f64 = 0.02;

/// Condition number of `Λ` above which inversion is flagged.
pub const CONDITION_WARNING: f64 = 1e6;

const RANK_TOL: f64 = 1e-10;

/// Affine readout model `p_exp = Λ p_ideal + Δ` over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutCalibration {
    pub n_qubits: usize,
    pub lambda: DMatrix<f64>,
    /// Always zero from [`calibrate_readout`]; see there.
    pub delta: DVector<f64>,
    /// `Σ_k || p_exp(k) - Λ p_ideal(k) - Δ ||` over the calibration set.
    pub residual: f64,
    pub condition_number: f64,
}

/// One X layer per basis state: circuit `k` prepares `|k>`, whose ideal
/// distribution is the unit vector `e_k`.
pub fn calibration_circuits(n: usize) -> Result<Vec<(Circuit, Vec<f64>)>> {
    let d = 1usize << n;
    (0..d)
        .map(|k| {
            let c = Circuit::from_gates(n, (0..n).filter(|&q| k >> q & 1 == 1).map(Gate::X))?;
            let mut ideal = vec![0.0; d];
            ideal[k] = 1.0;
            Ok((c, ideal))
        })
        .collect()
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    let s = m.singular_values();
    let cut = RANK_TOL * s.max().max(1.0);
    s.iter().filter(|&&v| v > cut).count()
}

/// Least-squares fit of `(Λ, Δ)` from `(p_ideal, p_exp)` pairs.
///
/// Ideal distributions sum to one, so `Λ p + Δ = (Λ + Δ 1ᵀ) p` and no
/// calibration set separates `Δ` from `Λ`. The fit sets `Δ = 0` and lets `Λ`
/// absorb the offset, which predicts the same `p_exp` for every
/// distribution.
pub fn calibrate_readout(data: &[(Vec<f64>, Vec<f64>)]) -> Result<ReadoutCalibration> {
    let Some((first, _)) = data.first() else {
        return Err(Error::Fit("empty calibration set".into()));
    };
    let d = first.len();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::Argument(format!("distribution length {d} is not 2^k")));
    }
    for (ideal, exp) in data {
        if ideal.len() != d || exp.len() != d {
            return Err(Error::Dimension { expected: d, found: ideal.len().max(exp.len()) });
        }
    }
    let m = data.len();
    let x = DMatrix::from_fn(m, d, |k, j| data[k].0[j]);
    let y = DMatrix::from_fn(m, d, |k, j| data[k].1[j]);
    let r = rank(&x);
    if r < d {
        return Err(Error::Fit(format!("calibration set has rank {r} < {d}")));
    }
    let beta = x.clone().svd(true, true).solve(&y, RANK_TOL).map_err(|e| Error::Fit(e.to_string()))?;
    let lambda = beta.transpose();
    let fitted = &x * &beta;
    let residual = (0..m).map(|k| (y.row(k) - fitted.row(k)).norm()).sum();
    let lo = lambda.min();
    let hi = lambda.max();
    if lo < -ENTRY_TOLERANCE || hi > 1.0 + ENTRY_TOLERANCE {
        return Err(Error::Validation(format!(
            "fitted readout matrix has entries in [{lo:.3}, {hi:.3}], outside the tolerated range"
        )));
    }
    let condition_number = condition_number(&lambda);
    Ok(ReadoutCalibration {
        n_qubits: d.trailing_zeros() as usize,
        lambda,
        delta: DVector::zeros(d),
        residual,
        condition_number,
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadoutMitigation {
    /// Projected estimate of the ideal distribution.
    pub probabilities: Vec<f64>,
    /// `Λ⁻¹ (p_exp - Δ)` before projection; may be negative.
    pub unprojected: Vec<f64>,
    pub condition_number: f64,
    pub ill_conditioned: bool,
}

/// `p_ideal ≈ Λ⁻¹ (p_exp - Δ)`, projected onto the simplex.
pub fn mitigate_readout(p_exp: &[f64], cal: &ReadoutCalibration) -> Result<ReadoutMitigation> {
    let d = cal.lambda.nrows();
    if p_exp.len() != d {
        return Err(Error::Dimension { expected: d, found: p_exp.len() });
    }
    let ill_conditioned = cal.condition_number > CONDITION_WARNING;
    if ill_conditioned {
        log::warn!("readout matrix is ill-conditioned (condition number {:.3e})", cal.condition_number);
    }
    let rhs = DVector::from_column_slice(p_exp) - &cal.delta;
    let x = cal
        .lambda
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Fit("readout matrix is singular".into()))?;
    let unprojected: Vec<f64> = x.iter().copied().collect();
    Ok(ReadoutMitigation {
        probabilities: project_to_simplex(&unprojected),
        unprojected,
        condition_number: cal.condition_number,
        ill_conditioned,
    })
}

/// Column-stochastic confusion matrix of independent per-qubit flips,
/// `flips[q] = (P(read 1 | 0), P(read 0 | 1))`.
pub fn product_confusion_matrix(flips: &[(f64, f64)]) -> Result<DMatrix<f64>> {
    let d = 1usize << flips.len();
    for &(a, b) in flips {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Argument("flip probabilities must lie in [0, 1]".into()));
        }
    }
    Ok(DMatrix::from_fn(d, d, |read, truth| {
        flips
            .iter()
            .enumerate()
            .map(|(q, &(p01, p10))| match (truth >> q & 1, read >> q & 1) {
                (0, 0) => 1.0 - p01,
                (0, _) => p01,
                (_, 0) => p10,
                _ => 1.0 - p10,
            })
            .product()
    }))
}

/// `Λ p + Δ` with `Δ` optional.
pub fn apply_readout(p: &[f64], lambda: &DMatrix<f64>, delta: Option<&DVector<f64>>) -> Result<Vec<f64>> {
    if lambda.ncols() != p.len() {
        return Err(Error::Dimension { expected: lambda.ncols(), found: p.len() });
    }
    let mut out = lambda * DVector::from_column_slice(p);
    if let Some(d) = delta {
        out += d;
    }
    Ok(out.iter().copied().collect())
}

/// `½ Σ |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_calibration_is_identity() {
        let data: Vec<_> = calibration_circuits(2).unwrap().into_iter().map(|(_, p)| (p.clone(), p)).collect();
        let cal = calibrate_readout(&data).unwrap();
        assert!((cal.lambda.clone() - DMatrix::identity(4, 4)).amax() < 1e-12);
        assert!(cal.delta.amax() == 0.0 && cal.residual < 1e-12);
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let m = mitigate_readout(&p, &cal).unwrap();
        assert!(m.probabilities.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn simplex_projection() {
        let x = project_to_simplex(&[0.7, 0.5, -0.1, -0.05]);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!((x[0] - 0.6).abs() < 1e-12 && (x[1] - 0.4).abs() < 1e-12);
        let inside = [0.25, 0.25, 0.5];
        assert_eq!(project_to_simplex(&inside), inside.to_vec());
    }

    #[test]
    fn offset_is_absorbed_into_lambda() {
        let lambda = product_confusion_matrix(&[(0.02, 0.05)]).unwrap() * 0.97;
        let delta = DVector::from_vec(vec![0.01, 0.02]);
        let ideals = [vec![1.0, 0.0], vec![0.0, 1.0], vec![0.3, 0.7]];
        let data: Vec<_> = ideals
            .iter()
            .map(|p| (p.clone(), apply_readout(p, &lambda, Some(&delta)).unwrap()))
            .collect();
        let cal = calibrate_readout(&data).unwrap();
        assert!(cal.residual < 1e-12);
        let p = [0.8, 0.2];
        let want = apply_readout(&p, &lambda, Some(&delta)).unwrap();
        let got = apply_readout(&p, &cal.lambda, Some(&cal.delta)).unwrap();
        assert!(want.iter().zip(&got).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn rank_deficient_set_is_rejected() {
        let data = vec![(vec![1.0, 0.0], vec![1.0, 0.0]), (vec![1.0, 0.0], vec![0.9, 0.1])];
        assert!(matches!(calibrate_readout(&data), Err(Error::Fit(_))));
    }
}
