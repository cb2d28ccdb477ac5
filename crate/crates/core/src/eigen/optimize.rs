use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Gains `a_n = a / n` and `c_n = c / n^γ`. With `calibrate`, `a` is
    /// first rescaled so the opening step moves each parameter by about `a`.
    Spsa { a: f64, c: f64, gamma: f64, calibrate: bool },
    Adam { step: f64, beta1: f64, beta2: f64, eps: f64 },
    /// Steepest descent with Armijo backtracking from `step`.
    GradientDescent { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iters: usize,
    pub seed: u64,
    /// Gradient-norm stopping threshold for the gradient methods.
    pub tol: f64,
    /// Iterations over which an energy increase is flagged as divergence.
    pub patience: usize,
}

impl OptimizerConfig {
    pub fn spsa(max_iters: usize, seed: u64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Spsa { a: 0.1, c: 0.1, gamma: 0.101, calibrate: true },
            max_iters,
            seed,
            tol: 0.0,
            patience: 50,
        }
    }

    pub fn adam(max_iters: usize, seed: u64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam { step: 0.05, beta1: 0.9, beta2: 0.999, eps: 1e-8 },
            max_iters,
            seed,
            tol: 1e-8,
            patience: 50,
        }
    }

    pub fn gradient_descent(max_iters: usize) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::GradientDescent { step: 1.0 },
            max_iters,
            seed: 0,
            tol: 1e-9,
            patience: 20,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OptimizerKind::Spsa { .. } => "spsa",
            OptimizerKind::Adam { .. } => "adam",
            OptimizerKind::GradientDescent { .. } => "gradient_descent",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(m.to_string()));
        match self.kind {
            OptimizerKind::Spsa { a, c, gamma, .. } => {
                if !(a > 0.0 && c > 0.0) {
                    return bad("SPSA gains a and c must be positive");
                }
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad("SPSA exponent gamma must lie in (0, 1)");
                }
            }
            OptimizerKind::Adam { step, beta1, beta2, eps } => {
                if !(step > 0.0 && eps > 0.0) {
                    return bad("ADAM step and epsilon must be positive");
                }
                if !(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0) {
                    return bad("ADAM betas must lie in (0, 1)");
                }
            }
            OptimizerKind::GradientDescent { step } => {
                if !(step > 0.0) {
                    return bad("gradient step must be positive");
                }
            }
        }
        if self.max_iters == 0 {
            return bad("iteration budget must be at least 1");
        }
        Ok(())
    }
}

/// A function to minimize. `gradient` is only called by gradient methods.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> Result<f64>;
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub best: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimization {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub last: Vec<f64>,
    pub last_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    /// SPSA `a` after calibration.
    pub calibrated_a: Option<f64>,
    pub trace: Vec<TraceRow>,
}

/// Writes `iteration,value,best,step_norm`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in trace {
        wtr.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    wtr.flush()?;
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Tracker {
    trace: Vec<TraceRow>,
    best: Vec<f64>,
    best_value: f64,
    diverged: bool,
    patience: usize,
}

impl Tracker {
    fn new(x0: &[f64], f0: f64, patience: usize) -> Self {
        Tracker {
            trace: vec![TraceRow { iteration: 0, value: f0, best: f0, step_norm: 0.0 }],
            best: x0.to_vec(),
            best_value: f0,
            diverged: false,
            patience,
        }
    }

    fn record(&mut self, x: &[f64], f: f64, step: f64) {
        if f < self.best_value {
            self.best_value = f;
            self.best = x.to_vec();
        }
        let k = self.trace.len();
        self.trace.push(TraceRow { iteration: k, value: f, best: self.best_value, step_norm: step });
        if !self.diverged && self.patience > 0 && k >= self.patience {
            let earlier = self.trace[k - self.patience].value;
            if f > earlier + 1e-8 * earlier.abs().max(1.0) {
                self.diverged = true;
                log::warn!("objective rose from {earlier:.6e} to {f:.6e} over {} iterations", self.patience);
            }
        }
    }

    fn finish(self, last: Vec<f64>, last_value: f64, converged: bool, calibrated_a: Option<f64>) -> Optimization {
        Optimization {
            iterations: self.trace.len() - 1,
            best: self.best,
            best_value: self.best_value,
            last,
            last_value,
            converged,
            diverged: self.diverged,
            calibrated_a,
            trace: self.trace,
        }
    }
}

const CALIBRATION_SAMPLES: usize = 10;

/// Minimizes `f` from `x0`.
pub fn minimize<F: Objective>(f: &mut F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Optimization> {
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut fx = f.value(&x)?;
    let mut tr = Tracker::new(&x, fx, cfg.patience);
    let d = x.len();
    if d == 0 {
        return Ok(tr.finish(x, fx, true, None));
    }
    match cfg.kind {
        OptimizerKind::Spsa { a, c, gamma, calibrate } => {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            let rademacher = |rng: &mut ChaCha20Rng| -> Vec<f64> {
                (0..d).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
            };
            let mut gain = a;
            if calibrate {
                let mut mag = 0.0;
                for _ in 0..CALIBRATION_SAMPLES {
                    let delta = rademacher(&mut rng);
                    let xp: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| v + c * s).collect();
                    let xm: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| v - c * s).collect();
                    mag += (f.value(&xp)? - f.value(&xm)?).abs() / (2.0 * c);
                }
                mag /= CALIBRATION_SAMPLES as f64;
                if mag > 1e-12 {
                    gain = a / mag;
                }
            }
            for n in 1..=cfg.max_iters {
                let an = gain / n as f64;
                let cn = c / (n as f64).powf(gamma);
                let delta = rademacher(&mut rng);
                let xp: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| v + cn * s).collect();
                let xm: Vec<f64> = x.iter().zip(&delta).map(|(v, s)| v - cn * s).collect();
                let g = (f.value(&xp)? - f.value(&xm)?) / (2.0 * cn);
                for (v, s) in x.iter_mut().zip(&delta) {
                    *v -= an * g * s;
                }
                fx = f.value(&x)?;
                tr.record(&x, fx, an * g.abs() * (d as f64).sqrt());
            }
            Ok(tr.finish(x, fx, false, calibrate.then_some(gain)))
        }
        OptimizerKind::Adam { step, beta1, beta2, eps } => {
            let mut m = vec![0.0; d];
            let mut v = vec![0.0; d];
            let mut converged = false;
            for t in 1..=cfg.max_iters {
                let g = f.gradient(&x)?;
                if norm(&g) < cfg.tol {
                    converged = true;
                    break;
                }
                let mut step2 = 0.0;
                for i in 0..d {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let mh = m[i] / (1.0 - beta1.powi(t as i32));
                    let vh = v[i] / (1.0 - beta2.powi(t as i32));
                    let s = step * mh / (vh.sqrt() + eps);
                    x[i] -= s;
                    step2 += s * s;
                }
                fx = f.value(&x)?;
                tr.record(&x, fx, step2.sqrt());
            }
            Ok(tr.finish(x, fx, converged, None))
        }
        OptimizerKind::GradientDescent { step } => {
            let mut t = step;
            let mut converged = false;
            for _ in 0..cfg.max_iters {
                let g = f.gradient(&x)?;
                let g2: f64 = g.iter().map(|v| v * v).sum();
                if g2.sqrt() < cfg.tol {
                    converged = true;
                    break;
                }
                t = (2.0 * t).min(step);
                let mut accepted = None;
                for _ in 0..60 {
                    let y: Vec<f64> = x.iter().zip(&g).map(|(v, gi)| v - t * gi).collect();
                    let fy = f.value(&y)?;
                    if fy <= fx - 1e-4 * t * g2 {
                        accepted = Some((y, fy));
                        break;
                    }
                    t *= 0.5;
                }
                let Some((y, fy)) = accepted else {
                    // No decrease at machine resolution: a stationary point.
                    converged = true;
                    break;
                };
                x = y;
                fx = fy;
                tr.record(&x, fx, t * g2.sqrt());
            }
            Ok(tr.finish(x, fx, converged, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;

    impl Objective for Quadratic {
        fn value(&mut self, x: &[f64]) -> Result<f64> {
            Ok((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2))
        }
        fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![2.0 * (x[0] - 1.0), 6.0 * (x[1] + 0.5)])
        }
    }

    #[test]
    fn each_method_finds_the_minimum() {
        for (cfg, tol) in [
            (OptimizerConfig::gradient_descent(200), 1e-8),
            (OptimizerConfig::adam(3000, 0), 1e-3),
            (
                OptimizerConfig {
                    kind: OptimizerKind::Spsa { a: 0.5, c: 0.1, gamma: 0.101, calibrate: false },
                    ..OptimizerConfig::spsa(2000, 7)
                },
                1e-2,
            ),
        ] {
            let out = minimize(&mut Quadratic, &[0.0, 0.0], &cfg).unwrap();
            assert!((out.best[0] - 1.0).abs() < tol && (out.best[1] + 0.5).abs() < tol, "{}: {:?}", cfg.name(), out.best);
        }
    }

    #[test]
    fn spsa_is_reproducible() {
        let cfg = OptimizerConfig::spsa(50, 11);
        let a = minimize(&mut Quadratic, &[0.3, 0.2], &cfg).unwrap();
        let b = minimize(&mut Quadratic, &[0.3, 0.2], &cfg).unwrap();
        assert_eq!(a.last, b.last);
    }

    #[test]
    fn invalid_gamma_rejected() {
        let mut cfg = OptimizerConfig::spsa(10, 0);
        cfg.kind = OptimizerKind::Spsa { a: 0.1, c: 0.1, gamma: 1.5, calibrate: false };
        assert!(minimize(&mut Quadratic, &[0.0], &cfg).is_err());
    }
}
