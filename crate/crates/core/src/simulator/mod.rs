//! Dense statevector simulation.

mod noise;
mod pauli;
mod sampling;

pub use noise::{apply_circuit_noisy, apply_circuit_noisy_with, readout_damped_expectation, NoiseSpec};
pub use pauli::{Pauli, PauliPolynomial, PauliString, PauliSum};
pub use sampling::{
    measurement_groups, sampled_expectation, sampled_expectation_with, shot_noise_stderr, MeasurementGroup,
};

use rand_distr::{Distribution, StandardNormal};

use crate::circuit::{Circuit, ParameterBinding};
use crate::error::{Error, Result};
use crate::gatelib::{elementary_matrix, GateKind};
use crate::numkit::{ComplexMatrix, StateVector, C64, ZERO};
use crate::rng::seeded;
use crate::symmetry::{sector_basis_indices, subspace_dimension};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

fn apply_single(amps: &mut [C64], q: usize, m: &ComplexMatrix) {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit != 0 {
            continue;
        }
        let (a0, a1) = (amps[i], amps[i | bit]);
        amps[i] = m00 * a0 + m01 * a1;
        amps[i | bit] = m10 * a0 + m11 * a1;
    }
}

/// `m` is indexed `2·bit(qa) + bit(qb)`.
fn apply_pair(amps: &mut [C64], qa: usize, qb: usize, m: &ComplexMatrix) {
    let (ba, bb) = (1usize << qa, 1usize << qb);
    let m = m.as_slice();
    for i in 0..amps.len() {
        if i & (ba | bb) != 0 {
            continue;
        }
        let idx = [i, i | bb, i | ba, i | ba | bb];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &target) in idx.iter().enumerate() {
            let row = &m[4 * r..4 * r + 4];
            amps[target] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
    }
}

fn apply_x(amps: &mut [C64], q: usize) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            amps.swap(i, i | bit);
        }
    }
}

/// Applies one gate in place.
pub fn apply_gate(state: &mut StateVector, kind: GateKind, qubits: &[usize], params: &[f64]) -> Result<()> {
    let n = state.num_qubits();
    if qubits.len() != kind.num_qubits() || qubits.iter().any(|&q| q >= n) {
        return Err(Error::InvalidCircuit(format!(
            "{kind} on qubits {qubits:?} of a {n}-qubit state"
        )));
    }
    let amps = state.amplitudes_mut();
    match kind {
        GateKind::X => apply_x(amps, qubits[0]),
        GateKind::Swap => {
            let (ba, bb) = (1usize << qubits[0], 1usize << qubits[1]);
            for i in 0..amps.len() {
                if i & ba != 0 && i & bb == 0 {
                    amps.swap(i, i ^ ba ^ bb);
                }
            }
        }
        GateKind::Cnot => {
            let (bc, bt) = (1usize << qubits[0], 1usize << qubits[1]);
            for i in 0..amps.len() {
                if i & bc != 0 && i & bt == 0 {
                    amps.swap(i, i | bt);
                }
            }
        }
        _ => {
            let m = elementary_matrix(kind, params)?;
            match *qubits {
                [q] => apply_single(amps, q, &m),
                [a, b] => apply_pair(amps, a, b, &m),
                _ => unreachable!("arity checked above"),
            }
        }
    }
    Ok(())
}

pub(crate) fn check_circuit_input(c: &Circuit, binding: &ParameterBinding, input: &StateVector) -> Result<()> {
    c.check_binding(binding)?;
    if input.num_qubits() != c.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit circuit applied to {}-qubit state",
            c.num_qubits(),
            input.num_qubits()
        )));
    }
    Ok(())
}

/// Runs the circuit's ops in order on a copy of `input`.
pub fn apply_circuit(c: &Circuit, binding: &ParameterBinding, input: &StateVector) -> Result<StateVector> {
    check_circuit_input(c, binding, input)?;
    let mut state = input.clone();
    for (i, op) in c.ops().iter().enumerate() {
        apply_gate(&mut state, op.kind, &op.qubits, &c.resolve(i, binding))?;
    }
    Ok(state)
}

/// Circuit output from `|0…0⟩`.
pub fn prepare(c: &Circuit, binding: &ParameterBinding) -> Result<StateVector> {
    apply_circuit(c, binding, &StateVector::zero_state(c.num_qubits()))
}

fn check_lengths(h: &PauliSum, psi: &StateVector) -> Result<()> {
    if h.num_qubits() != psi.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit operator on {}-qubit state",
            h.num_qubits(),
            psi.num_qubits()
        )));
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩`, string by string.
pub fn expectation(h: &PauliSum, psi: &StateVector) -> Result<f64> {
    check_lengths(h, psi)?;
    let total: C64 = h.terms().iter().map(|t| t.bare_expectation(psi) * t.coeff).sum();
    Ok(total.re)
}

/// `|⟨φ|ψ⟩|²`.
pub fn fidelity(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr())
}

/// Gaussian amplitudes on the `particles`-sector, normalized (Haar on the sector).
pub fn haar_random_sector_state(sites: usize, particles: usize, seed: u64) -> Result<StateVector> {
    let d = subspace_dimension(sites, particles)?;
    if sites > MAX_QUBITS {
        return Err(Error::TooLarge {
            qubits: sites,
            limit: MAX_QUBITS,
        });
    }
    let indices = sector_basis_indices(sites, particles);
    if d == 1 {
        return Ok(StateVector::basis_state(sites, indices[0]));
    }
    let mut rng = seeded(seed);
    let mut amps = vec![ZERO; 1 << sites];
    for &i in &indices {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        amps[i] = C64::new(re, im);
    }
    StateVector::normalized(amps)
}

/// Probability mass on basis states with exactly `particles` ones.
pub fn sector_weight(psi: &StateVector, particles: usize) -> f64 {
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() as usize == particles)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Particle number of the states a circuit prepares from `|0…0⟩`.
pub fn infer_particle_number(c: &Circuit) -> Result<usize> {
    let psi = prepare(c, &ParameterBinding::zeros(c.num_free_parameters()))?;
    let (n, w) = (0..=c.num_qubits())
        .map(|n| (n, sector_weight(&psi, n)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty range");
    if (w - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidCircuit(
            "circuit output does not have a definite particle number".into(),
        ));
    }
    Ok(n)
}
