use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ZneResult {
    /// Extrapolated zero-noise estimate.
    pub value: f64,
    /// Standard error propagated through the weights, assuming independent
    /// evaluations.
    pub sigma: f64,
    pub order: usize,
    pub scales: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(value, sigma)` at each scale.
    pub raw: Vec<(f64, f64)>,
}

/// Weights `w` with `Σ w_i B(c_i)` exact for polynomials `B` of degree
/// `order`.
///
/// With `order + 1` scales these are the Lagrange values at zero,
/// `w_i = Π_{j≠i} c_j / (c_j - c_i)`. With more scales they come from the
/// least-squares polynomial fit.
pub fn richardson_weights(scales: &[f64], order: usize) -> Result<Vec<f64>> {
    if scales.len() < order + 1 {
        return Err(Error::Argument(format!("order {order} needs at least {} scale factors", order + 1)));
    }
    for (i, &c) in scales.iter().enumerate() {
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::Argument(format!("scale factor {c} must be finite and at least 1")));
        }
        if scales[..i].contains(&c) {
            return Err(Error::Argument(format!("duplicate scale factor {c}")));
        }
    }
    if scales.len() == order + 1 {
        return Ok((0..scales.len())
            .map(|i| {
                (0..scales.len())
                    .filter(|&j| j != i)
                    .map(|j| scales[j] / (scales[j] - scales[i]))
                    .product()
            })
            .collect());
    }
    // w = e_0ᵀ (VᵀV)⁻¹ Vᵀ with V_ij = c_i^j.
    let v = DMatrix::from_fn(scales.len(), order + 1, |i, j| scales[i].powi(j as i32));
    let gram = v.transpose() * &v;
    let mut e0 = DVector::zeros(order + 1);
    e0[0] = 1.0;
    let y = gram.cholesky().ok_or_else(|| Error::Fit("Vandermonde system is singular".into()))?.solve(&e0);
    Ok((v * y).iter().copied().collect())
}

/// Richardson zero-noise extrapolation.
///
/// `evaluate(c)` returns the observable and its standard error with every
/// noise rate multiplied by `c`.
pub fn zne<F>(mut evaluate: F, scales: &[f64], order: usize) -> Result<ZneResult>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let weights = richardson_weights(scales, order)?;
    let raw = scales.iter().map(|&c| evaluate(c)).collect::<Result<Vec<_>>>()?;
    let value = weights.iter().zip(&raw).map(|(w, (b, _))| w * b).sum();
    let sigma = weights.iter().zip(&raw).map(|(w, (_, s))| (w * s).powi(2)).sum::<f64>().sqrt();
    Ok(ZneResult { value, sigma, order, scales: scales.to_vec(), weights, raw })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_weights() {
        let w = richardson_weights(&[1.0, 2.0], 1).unwrap();
        assert_eq!(w, vec![2.0, -1.0]);
        let w = richardson_weights(&[1.0, 1.5, 2.0], 2).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_recovered_exactly() {
        let b = |c: f64| Ok((0.7 - 0.3 * c + 0.05 * c * c - 0.01 * c * c * c, 0.0));
        let r = zne(b, &[1.0, 1.5, 2.0, 3.0], 3).unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
        let r = zne(b, &[1.0, 1.5, 2.0, 2.5, 3.0, 4.0], 3).unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn order_zero_single_scale_is_raw() {
        let r = zne(|_| Ok((0.42, 0.01)), &[1.0], 0).unwrap();
        assert_eq!((r.value, r.sigma), (0.42, 0.01));
    }

    #[test]
    fn bad_scales_rejected() {
        assert!(matches!(richardson_weights(&[1.0, 1.0, 2.0], 2), Err(Error::Argument(_))));
        assert!(matches!(richardson_weights(&[0.5, 1.0], 1), Err(Error::Argument(_))));
        assert!(matches!(richardson_weights(&[1.0, 2.0], 2), Err(Error::Argument(_))));
    }
}
