//! Shot-based estimation of Pauli-sum expectations.
//!
//! Strings are grouped greedily into qubit-wise commuting sets. Each group is
//! measured once per shot after rotating every measured qubit into the Z
//! basis, and all strings in the group are evaluated on the same bitstrings.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use super::check_lengths;
use super::pauli::{Pauli, PauliSum};
use crate::error::{Error, Result};
use crate::numkit::{StateVector, C64};
use crate::rng::seeded;

/// Strings sharing one per-qubit measurement basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    /// `None` for qubits no string in the group touches.
    pub basis: Vec<Option<Pauli>>,
    /// `(coefficient, support mask)` of each member.
    pub members: Vec<(f64, usize)>,
}

impl MeasurementGroup {
    fn accepts(&self, letters: &[Pauli]) -> bool {
        letters
            .iter()
            .zip(&self.basis)
            .all(|(&p, b)| p == Pauli::I || b.is_none_or(|b| b == p))
    }

    /// Value of the group's observable on a measured bitstring.
    fn value(&self, bits: usize) -> f64 {
        self.members
            .iter()
            .map(|&(c, mask)| if (bits & mask).count_ones() % 2 == 1 { -c } else { c })
            .sum()
    }
}

/// Greedy grouping in term order, plus the total identity coefficient.
pub fn measurement_groups(h: &PauliSum) -> (Vec<MeasurementGroup>, f64) {
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    let mut offset = 0.0;
    for t in h.terms() {
        if t.is_identity() {
            offset += t.coeff;
            continue;
        }
        let idx = match groups.iter().position(|g| g.accepts(&t.letters)) {
            Some(i) => i,
            None => {
                groups.push(MeasurementGroup {
                    basis: vec![None; h.num_qubits()],
                    members: Vec::new(),
                });
                groups.len() - 1
            }
        };
        let g = &mut groups[idx];
        for (b, &p) in g.basis.iter_mut().zip(&t.letters) {
            if p != Pauli::I {
                *b = Some(p);
            }
        }
        g.members.push((t.coeff, t.support_mask()));
    }
    (groups, offset)
}

/// Probabilities of measuring each bitstring after rotating into `basis`.
fn rotated_probabilities(psi: &StateVector, basis: &[Option<Pauli>]) -> Vec<f64> {
    let mut amps = psi.amplitudes().to_vec();
    let h = FRAC_1_SQRT_2;
    for (q, b) in basis.iter().enumerate() {
        let bit = 1usize << q;
        let pre = match b {
            Some(Pauli::X) => C64::new(1.0, 0.0),
            // S† first so Y eigenstates land on X eigenstates
            Some(Pauli::Y) => C64::new(0.0, -1.0),
            _ => continue,
        };
        for i in 0..amps.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = amps[i];
            let a1 = amps[i | bit] * pre;
            amps[i] = (a0 + a1) * h;
            amps[i | bit] = (a0 - a1) * h;
        }
    }
    amps.iter().map(|z| z.norm_sqr()).collect()
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Shot estimate of `⟨ψ|H|ψ⟩` with `shots` samples per measurement group and
/// an independent bit-flip probability `readout_flip` on every measured bit.
pub fn sampled_expectation_with(
    h: &PauliSum,
    psi: &StateVector,
    shots: usize,
    readout_flip: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    check_lengths(h, psi)?;
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let (groups, offset) = measurement_groups(h);
    let n = h.num_qubits();
    let mut total = offset;
    for g in &groups {
        let cdf = cumulative(&rotated_probabilities(psi, &g.basis));
        let mut acc = 0.0;
        for _ in 0..shots {
            let mut bits = draw(&cdf, rng);
            if readout_flip > 0.0 {
                for q in 0..n {
                    if rng.random::<f64>() < readout_flip {
                        bits ^= 1 << q;
                    }
                }
            }
            acc += g.value(bits);
        }
        total += acc / shots as f64;
    }
    Ok(total)
}

/// Seeded shot estimate with perfect readout.
pub fn sampled_expectation(h: &PauliSum, psi: &StateVector, shots: usize, seed: u64) -> Result<f64> {
    sampled_expectation_with(h, psi, shots, 0.0, &mut seeded(seed))
}

/// Standard deviation of [`sampled_expectation`] predicted from the exact
/// outcome distributions of every measurement group.
pub fn shot_noise_stderr(h: &PauliSum, psi: &StateVector, shots: usize) -> Result<f64> {
    check_lengths(h, psi)?;
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let (groups, _) = measurement_groups(h);
    let var: f64 = groups
        .iter()
        .map(|g| {
            let probs = rotated_probabilities(psi, &g.basis);
            let (m1, m2) = probs.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (b, &p)| {
                let v = g.value(b);
                (m1 + p * v, m2 + p * v * v)
            });
            (m2 - m1 * m1).max(0.0) / shots as f64
        })
        .sum();
    Ok(var.sqrt())
}
