use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::simulator::{sample_counts, shot_sigma, Circuit, DensityMatrix, KrausChannel};

/// Per-gate incoherent noise.
///
/// After every gate each qubit it touches goes through depolarizing,
/// amplitude damping and phase damping, in that order, with rates
/// multiplied by `scale`. Raising `scale` is the emulated analogue of
/// stretching pulses for extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depolarizing: f64,
    pub amplitude_damping: f64,
    pub phase_damping: f64,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless()
    }
}

impl NoiseModel {
    pub fn new(depolarizing: f64, amplitude_damping: f64, phase_damping: f64) -> Result<Self> {
        let m = NoiseModel { depolarizing, amplitude_damping, phase_damping, scale: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        NoiseModel { depolarizing: 0.0, amplitude_damping: 0.0, phase_damping: 0.0, scale: 1.0 }
    }

    pub fn depolarizing(eps: f64) -> Result<Self> {
        Self::new(eps, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.named_rates() {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Argument(format!("{name} rate {r} outside [0, 1]")));
            }
        }
        if !(self.scale >= 0.0) || !self.scale.is_finite() {
            return Err(Error::Argument(format!("noise scale {} must be finite and nonnegative", self.scale)));
        }
        Ok(())
    }

    /// The same model with every rate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        NoiseModel { scale: c, ..*self }
    }

    fn named_rates(&self) -> [(&'static str, f64); 3] {
        [
            ("depolarizing", self.depolarizing),
            ("amplitude damping", self.amplitude_damping),
            ("phase damping", self.phase_damping),
        ]
    }

    /// Rates after scaling, clipped to `[0, 1]`.
    pub fn effective_rates(&self) -> [f64; 3] {
        self.named_rates().map(|(name, r)| {
            let s = r * self.scale;
            if s > 1.0 {
                log::warn!("scaled {name} rate {s} clipped to 1");
            }
            s.clamp(0.0, 1.0)
        })
    }

    pub fn is_noiseless(&self) -> bool {
        self.effective_rates().iter().all(|&r| r == 0.0)
    }

    /// Channels applied to qubit `q` after each gate on it; zero rates are
    /// skipped.
    pub fn channels(&self, q: usize) -> Result<Vec<KrausChannel>> {
        let [dep, amp, phase] = self.effective_rates();
        let mut out = Vec::new();
        if dep > 0.0 {
            out.push(KrausChannel::depolarizing(q, dep)?);
        }
        if amp > 0.0 {
            out.push(KrausChannel::amplitude_damping(q, amp)?);
        }
        if phase > 0.0 {
            out.push(KrausChannel::phase_damping(q, phase)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: NoiseModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Final density matrix of `circuit` under `noise`, starting from `|0...0>`.
pub fn run_noisy_density(circuit: &Circuit, params: &[f64], noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let mut rho = DensityMatrix::zero(circuit.n_qubits())?;
    let mut cache: Vec<Option<Vec<KrausChannel>>> = vec![None; circuit.n_qubits()];
    for g in circuit.bind(params)? {
        rho.apply_gate(&g)?;
        for q in g.qubits() {
            if cache[q].is_none() {
                cache[q] = Some(noise.channels(q)?);
            }
            for ch in cache[q].as_deref().unwrap_or_default() {
                rho.apply_channel(ch)?;
            }
        }
    }
    Ok(rho)
}

#[derive(Debug, Clone, Serialize)]
pub struct NoisyRun {
    /// Exact outcome distribution of the noisy final state.
    pub probabilities: Vec<f64>,
    /// Sampled counts per computational basis outcome.
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl NoisyRun {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.shots as f64).collect()
    }

    /// Sampled `<P>` and its standard error for a diagonal Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<(f64, f64)> {
        if !p.is_diagonal() {
            return Err(Error::Unsupported(format!("{p} is not diagonal in the measured basis")));
        }
        let sign = p.phase_factor().re;
        let mut mean = 0.0;
        for (b, &k) in self.counts.iter().enumerate() {
            let parity = (b as u64 & p.z_mask()).count_ones() % 2;
            mean += if parity == 0 { k as f64 } else { -(k as f64) };
        }
        mean /= self.shots as f64;
        Ok((sign * mean, shot_sigma(mean, self.shots as usize)))
    }
}

/// Runs `circuit` under `noise` and samples `shots` computational-basis
/// outcomes.
pub fn run_noisy<R: Rng>(circuit: &Circuit, params: &[f64], noise: &NoiseModel, shots: u64, rng: &mut R) -> Result<NoisyRun> {
    if shots == 0 {
        return Err(Error::Argument("shot count must be at least 1".into()));
    }
    let rho = run_noisy_density(circuit, params, noise)?;
    let probabilities = rho.probabilities();
    let counts = sample_counts(&probabilities, shots, rng)?;
    Ok(NoisyRun { probabilities, counts, shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{Gate, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn bell() -> Circuit {
        Circuit::from_gates(2, [Gate::H(0), Gate::Cnot { control: 0, target: 1 }, Gate::Ry(1, 0.4)]).unwrap()
    }

    #[test]
    fn zero_rates_match_statevector() {
        let c = bell();
        let rho = run_noisy_density(&c, &[], &NoiseModel::noiseless()).unwrap();
        let mut psi = StateVector::zero(2).unwrap();
        psi.apply_circuit(&c, &[]).unwrap();
        for (a, b) in rho.probabilities().iter().zip(psi.probabilities()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn full_depolarizing_is_uniform() {
        let rho = run_noisy_density(&bell(), &[], &NoiseModel::depolarizing(1.0).unwrap()).unwrap();
        for p in rho.probabilities() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_rates_clip() {
        let m = NoiseModel::depolarizing(0.6).unwrap().scaled(2.0);
        assert_eq!(m.effective_rates()[0], 1.0);
        assert!(NoiseModel::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn unit_scale_is_bit_identical() {
        let base = NoiseModel::new(0.01, 0.02, 0.03).unwrap();
        let run = |m: &NoiseModel| run_noisy(&bell(), &[], m, 1000, &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        let (a, b) = (run(&base), run(&base.scaled(1.0)));
        assert_eq!(a.counts, b.counts);
        assert!(a.probabilities.iter().zip(&b.probabilities).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn json_round_trip() {
        let m = NoiseModel::new(0.01, 0.02, 0.0).unwrap().scaled(1.5);
        assert_eq!(NoiseModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
