//! Depolarizing noise as stochastic Pauli trajectories.

use rand::Rng;

use super::{apply_gate, check_circuit_input};
use crate::circuit::{Circuit, ParameterBinding};
use crate::error::{Error, Result};
use crate::gatelib::GateKind;
use crate::numkit::StateVector;
use crate::rng::seeded;
use crate::simulator::PauliSum;

const PI: f64 = std::f64::consts::PI;

/// Depolarizing probabilities after one- and two-qubit gates, plus readout flips.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
    pub readout: f64,
}

impl NoiseSpec {
    pub fn new(p1: f64, p2: f64, readout: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2), ("readout", readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p1, p2, readout })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.readout == 0.0
    }

    pub fn is_gate_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }

    fn gate_probability(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

fn apply_random_pauli(state: &mut StateVector, q: usize, rng: &mut impl Rng) -> Result<()> {
    // I, X, Y, Z uniformly; Y and Z are applied up to global phase
    match rng.random_range(0..4u8) {
        0 => {}
        1 => apply_gate(state, GateKind::X, &[q], &[])?,
        2 => {
            apply_gate(state, GateKind::X, &[q], &[])?;
            apply_gate(state, GateKind::Phase, &[q], &[PI])?;
        }
        _ => apply_gate(state, GateKind::Phase, &[q], &[PI])?,
    }
    Ok(())
}

/// One trajectory: after each gate, with probability `p1`/`p2` the touched
/// qubits receive a uniformly random Pauli from `{I, X, Y, Z}^k`.
pub fn apply_circuit_noisy_with(
    c: &Circuit,
    binding: &ParameterBinding,
    input: &StateVector,
    noise: &NoiseSpec,
    rng: &mut impl Rng,
) -> Result<StateVector> {
    check_circuit_input(c, binding, input)?;
    let mut state = input.clone();
    for (i, op) in c.ops().iter().enumerate() {
        apply_gate(&mut state, op.kind, &op.qubits, &c.resolve(i, binding))?;
        let p = noise.gate_probability(op.qubits.len());
        if p > 0.0 && rng.random::<f64>() < p {
            for &q in &op.qubits {
                apply_random_pauli(&mut state, q, rng)?;
            }
        }
    }
    Ok(state)
}

pub fn apply_circuit_noisy(
    c: &Circuit,
    binding: &ParameterBinding,
    input: &StateVector,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<StateVector> {
    apply_circuit_noisy_with(c, binding, input, noise, &mut seeded(seed))
}

/// Exact expectation under independent readout flips with probability `p`:
/// each string is damped by `(1 - 2p)^weight`.
pub fn readout_damped_expectation(h: &PauliSum, psi: &StateVector, p: f64) -> Result<f64> {
    super::check_lengths(h, psi)?;
    let f = 1.0 - 2.0 * p;
    Ok(h.terms()
        .iter()
        .map(|t| t.coeff * f.powi(t.support_mask().count_ones() as i32) * t.bare_expectation(psi).re)
        .sum())
}
