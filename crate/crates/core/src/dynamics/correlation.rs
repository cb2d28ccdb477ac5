use std::io::Write;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_function, C64, ZERO};
use crate::pauli::PauliSum;
use crate::simulator::{hadamard_test, pauli_gates, Gate, StateVector};

const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<C64>,
}

impl CorrelationSeries {
    /// CSV with columns `t,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "re", "im"]).map_err(csv_err)?;
        for (t, c) in self.times.iter().zip(&self.values) {
            wtr.write_record([t.to_string(), c.re.to_string(), c.im.to_string()]).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl Spectrum {
    /// CSV with columns `omega,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["omega", "re", "im"]).map_err(csv_err)?;
        for (o, s) in self.omegas.iter().zip(&self.values) {
            wtr.write_record([o.to_string(), s.re.to_string(), s.im.to_string()]).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Frequency of the largest `|S|`.
    pub fn peak(&self) -> Option<f64> {
        (0..self.values.len())
            .max_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm()))
            .map(|k| self.omegas[k])
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn check_inputs(a: &PauliSum, b: &PauliSum, h: &PauliSum, psi0: &StateVector) -> Result<()> {
    for s in [a, b, h] {
        if s.n_qubits() != psi0.n_qubits() {
            return Err(Error::Dimension { expected: psi0.n_qubits(), found: s.n_qubits() });
        }
    }
    Ok(())
}

/// `C(t) = <Ψ0| A e^{-it(H - E0)} B |Ψ0>` by dense propagation.
pub fn correlation_function(
    a: &PauliSum,
    b: &PauliSum,
    h: &PauliSum,
    psi0: &StateVector,
    e0: f64,
    times: &[f64],
) -> Result<CorrelationSeries> {
    check_inputs(a, b, h, psi0)?;
    let (vals, vecs) = eigh(&h.to_dense()?);
    let bpsi = crate::linalg::CVector::from_vec(b.apply(psi0.amplitudes()));
    let apsi = crate::linalg::CVector::from_vec(a.adjoint().apply(psi0.amplitudes()));
    let cb = vecs.adjoint() * bpsi;
    let ca = vecs.adjoint() * apsi;
    let values = times
        .iter()
        .map(|&t| {
            vals.iter()
                .enumerate()
                .map(|(k, &e)| ca[k].conj() * cb[k] * C64::from_polar(1.0, -t * (e - e0)))
                .sum()
        })
        .collect();
    Ok(CorrelationSeries { times: times.to_vec(), values })
}

/// Same series from Hadamard tests of `P_i e^{-it(H - E0)} Q_j` for every
/// pair of terms, with the propagator as one controlled block.
pub fn correlation_function_circuit(
    a: &PauliSum,
    b: &PauliSum,
    h: &PauliSum,
    psi0: &StateVector,
    e0: f64,
    times: &[f64],
) -> Result<CorrelationSeries> {
    check_inputs(a, b, h, psi0)?;
    let n = psi0.n_qubits();
    let hd = h.to_dense()?;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let u = hermitian_function(&hd, |e| C64::from_polar(1.0, -t * (e - e0)));
        let prop = Gate::Unitary { qubits: (0..n).collect(), matrix: u };
        let mut total = ZERO;
        for (q, cq) in b.iter() {
            for (p, cp) in a.iter() {
                let mut ops = pauli_gates(q);
                ops.push(prop.clone());
                ops.extend(pauli_gates(p));
                total += cp * cq * hadamard_test(psi0, &ops)?;
            }
        }
        values.push(total);
    }
    Ok(CorrelationSeries { times: times.to_vec(), values })
}

/// `S(ω_k) = Δt Σ_j C(t_j) e^{iω_k t_j}` on the FFT grid
/// `ω_k = 2πk / (N Δt)`, wrapped to `[-π/Δt, π/Δt)` and sorted.
pub fn spectral_function(series: &CorrelationSeries) -> Result<Spectrum> {
    let n = series.times.len();
    if n < 2 {
        return Err(Error::Argument("spectral transform needs at least two points".into()));
    }
    let dt = series.times[1] - series.times[0];
    if dt <= 0.0 {
        return Err(Error::Argument("time grid must increase".into()));
    }
    for w in series.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > GRID_TOL * dt.abs().max(1.0) {
            return Err(Error::Argument("time grid is not uniformly spaced".into()));
        }
    }
    let t0 = series.times[0];
    let mut buf = series.values.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let mut out: Vec<(f64, C64)> = buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let kk = if k >= n.div_ceil(2) { k as f64 - n as f64 } else { k as f64 };
            let omega = std::f64::consts::TAU * kk / (n as f64 * dt);
            (omega, v * C64::from_polar(dt, omega * t0))
        })
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(Spectrum {
        omegas: out.iter().map(|x| x.0).collect(),
        values: out.iter().map(|x| x.1).collect(),
    })
}
