//! Gate library: elementary gates, controlled cores, the parity fusion gate
//! and the particle-conserving two-qubit modules `A(θ, φ)` and `B(θ, φ)`.
//!
//! Two-qubit matrices use the local ordering `|q_first q_second⟩`, so the
//! first listed qubit is the high-order bit. A CNOT on `[c, t]` has control
//! `c` and target `t`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{dagger, is_unitary, kron, matmul, ComplexMatrix, C64, ONE, ZERO};
use crate::symmetry::ChargeBasisMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    X,
    Rx,
    Ry,
    Rz,
    Phase,
    Cnot,
    Swap,
    ControlledV,
    AGate,
    BGate,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Phase => "phase",
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
            GateKind::ControlledV => "controlled_v",
            GateKind::AGate => "a_gate",
            GateKind::BGate => "b_gate",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::Cnot | GateKind::Swap => 0,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => 1,
            GateKind::ControlledV | GateKind::AGate | GateKind::BGate => 2,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => 1,
            _ => 2,
        }
    }

    /// The two-qubit gates that carry variational parameters.
    pub fn is_parameterized_two_qubit(self) -> bool {
        matches!(self, GateKind::ControlledV | GateKind::AGate | GateKind::BGate)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn rx(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows(&[&[c(co, 0.0), c(0.0, -s)], &[c(0.0, -s), c(co, 0.0)]])
}

pub fn ry(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[&[co, -s], &[s, co]])
}

pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0)])
}

pub fn phase(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[ONE, C64::from_polar(1.0, phi)])
}

pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// Matrix of a gate; 2x2 for single-qubit kinds, 4x4 otherwise.
pub fn elementary_matrix(kind: GateKind, params: &[f64]) -> Result<ComplexMatrix> {
    if params.len() != kind.arity() {
        return Err(Error::Arity {
            kind: kind.name(),
            expected: kind.arity(),
            got: params.len(),
        });
    }
    Ok(match kind {
        GateKind::X => pauli_x(),
        GateKind::Rx => rx(params[0]),
        GateKind::Ry => ry(params[0]),
        GateKind::Rz => rz(params[0]),
        GateKind::Phase => phase(params[0]),
        GateKind::Cnot => cnot(),
        GateKind::Swap => swap(),
        GateKind::ControlledV => controlled_v(params[0], params[1]),
        GateKind::AGate => a_gate(params[0], params[1]),
        GateKind::BGate => b_gate(params[0], params[1]),
    })
}

/// Charge-1 block `[[-sin θ, e^{-iφ} cos θ], [e^{iφ} cos θ, sin θ]]`.
pub fn v_gate(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    ComplexMatrix::from_rows(&[
        &[c(-s, 0.0), C64::from_polar(co, -phi)],
        &[C64::from_polar(co, phi), c(s, 0.0)],
    ])
}

/// Basis change with `U X U† = V(θ, φ)`: `U = Rz(φ) Ry(θ)`.
pub fn v_basis_change(theta: f64, phi: f64) -> ComplexMatrix {
    matmul(&rz(phi), &ry(theta)).expect("2x2")
}

/// `|0⟩⟨0| ⊗ q0_op + |1⟩⟨1| ⊗ q1_op`, control on the first (high-order) qubit.
pub fn controlled_core(q0_op: &ComplexMatrix, q1_op: &ComplexMatrix) -> Result<ComplexMatrix> {
    for op in [q0_op, q1_op] {
        if op.rows() != 2 || op.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "controlled core needs 2x2 operands, got {}x{}",
                op.rows(),
                op.cols()
            )));
        }
        if !is_unitary(op, 1e-10)? {
            let dev = matmul(&dagger(op), op)?.max_abs_diff(&ComplexMatrix::identity(2));
            return Err(Error::NotUnitary(dev));
        }
    }
    let p0 = ComplexMatrix::diag(&[ONE, ZERO]);
    let p1 = ComplexMatrix::diag(&[ZERO, ONE]);
    kron(&p0, q0_op).add(&kron(&p1, q1_op))
}

/// `I₂ ⊕ V(θ, φ)`.
pub fn controlled_v(theta: f64, phi: f64) -> ComplexMatrix {
    controlled_core(&ComplexMatrix::identity(2), &v_gate(theta, phi)).expect("unitary operands")
}

/// CNOT with the second qubit as control: enters the parity symmetry basis.
pub fn fusion_gate() -> ComplexMatrix {
    ChargeBasisMap::z2().fusion_matrix()
}

/// Same matrix as [`fusion_gate`], which is an involution.
pub fn splitting_gate() -> ComplexMatrix {
    fusion_gate()
}

/// Fusion map with the charge-1 degeneracies exchanged; two CNOTs. Not used by the modules.
pub fn fusion_gate_double_cnot() -> ComplexMatrix {
    ChargeBasisMap::z2_double_cnot().fusion_matrix()
}

pub fn a_gate(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    ComplexMatrix::from_rows(&[
        &[ONE, ZERO, ZERO, ZERO],
        &[ZERO, c(s, 0.0), C64::from_polar(co, phi), ZERO],
        &[ZERO, C64::from_polar(co, -phi), c(-s, 0.0), ZERO],
        &[ZERO, ZERO, ZERO, ONE],
    ])
}

pub fn b_gate(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_rows(&[
        &[ONE, ZERO, ZERO, ZERO],
        &[ZERO, c(co, 0.0), c(0.0, s), ZERO],
        &[ZERO, c(0.0, s), c(co, 0.0), ZERO],
        &[ZERO, ZERO, ZERO, C64::from_polar(1.0, phi)],
    ])
}

/// Core of the charge-1 parameterization in the symmetry basis.
pub fn a_core(theta: f64, phi: f64) -> ComplexMatrix {
    controlled_v(theta, phi)
}

/// Core of the hopping/interaction parameterization: `P(φ) ⊕ Rx(θ)†`.
pub fn b_core(theta: f64, phi: f64) -> ComplexMatrix {
    controlled_core(&phase(phi), &dagger(&rx(theta))).expect("unitary operands")
}

/// `S · core · F`.
pub fn compose_with_fusion(core: &ComplexMatrix) -> Result<ComplexMatrix> {
    matmul(&matmul(&splitting_gate(), core)?, &fusion_gate())
}

pub fn a_gate_bottom_up(theta: f64, phi: f64) -> ComplexMatrix {
    compose_with_fusion(&a_core(theta, phi)).expect("4x4")
}

pub fn b_gate_bottom_up(theta: f64, phi: f64) -> ComplexMatrix {
    compose_with_fusion(&b_core(theta, phi)).expect("4x4")
}

/// Two-site number operator `diag(0, 1, 1, 2)`.
pub fn two_site_number_operator() -> ComplexMatrix {
    ComplexMatrix::diag(&[ZERO, ONE, ONE, c(2.0, 0.0)])
}

/// One step of an elementary-gate decomposition, on local qubits `0` and `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryOp {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

impl ElementaryOp {
    fn new(kind: GateKind, params: &[f64], qubits: &[usize]) -> Self {
        Self {
            kind,
            params: params.to_vec(),
            qubits: qubits.to_vec(),
        }
    }

    /// The step as a 4x4 matrix on the local two-qubit space.
    pub fn local_matrix(&self) -> Result<ComplexMatrix> {
        let m = elementary_matrix(self.kind, &self.params)?;
        let id = ComplexMatrix::identity(2);
        match (self.kind.num_qubits(), self.qubits.as_slice()) {
            (1, [0]) => Ok(kron(&m, &id)),
            (1, [1]) => Ok(kron(&id, &m)),
            (2, [0, 1]) => Ok(m),
            (2, [1, 0]) => matmul(&matmul(&swap(), &m)?, &swap()),
            _ => Err(Error::InvalidCircuit(format!(
                "{} on local qubits {:?}",
                self.kind, self.qubits
            ))),
        }
    }
}

/// Elementary gates in application order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateDecomposition {
    pub ops: Vec<ElementaryOp>,
}

impl GateDecomposition {
    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| op.kind == GateKind::Cnot).count()
    }

    /// Product of the steps, last applied on the left.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        self.ops
            .iter()
            .try_fold(ComplexMatrix::identity(4), |acc, op| matmul(&op.local_matrix()?, &acc))
    }
}

fn push_u_dagger(ops: &mut Vec<ElementaryOp>, theta: f64, phi: f64) {
    // U† = Ry(-θ) Rz(-φ)
    ops.push(ElementaryOp::new(GateKind::Rz, &[-phi], &[1]));
    ops.push(ElementaryOp::new(GateKind::Ry, &[-theta], &[1]));
}

fn push_u(ops: &mut Vec<ElementaryOp>, theta: f64, phi: f64) {
    ops.push(ElementaryOp::new(GateKind::Ry, &[theta], &[1]));
    ops.push(ElementaryOp::new(GateKind::Rz, &[phi], &[1]));
}

fn push_controlled_v(ops: &mut Vec<ElementaryOp>, theta: f64, phi: f64) {
    push_u_dagger(ops, theta, phi);
    ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
    push_u(ops, theta, phi);
}

fn push_fusion(ops: &mut Vec<ElementaryOp>) {
    ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[1, 0]));
}

/// Elementary-gate circuit for a composite two-qubit gate.
///
/// CNOT counts: `AGate` 3, `BGate` 6, `Swap` 3, `ControlledV` 1.
pub fn decompose(kind: GateKind, params: &[f64]) -> Result<GateDecomposition> {
    if params.len() != kind.arity() {
        return Err(Error::Arity {
            kind: kind.name(),
            expected: kind.arity(),
            got: params.len(),
        });
    }
    let mut ops = Vec::new();
    match kind {
        GateKind::ControlledV => push_controlled_v(&mut ops, params[0], params[1]),
        GateKind::AGate => {
            push_fusion(&mut ops);
            push_controlled_v(&mut ops, params[0], params[1]);
            push_fusion(&mut ops);
        }
        GateKind::BGate => {
            let (theta, phi) = (params[0], params[1]);
            push_fusion(&mut ops);
            // P(φ) on the target when the control is 0: controlled phase between X's
            ops.push(ElementaryOp::new(GateKind::X, &[], &[0]));
            ops.push(ElementaryOp::new(GateKind::Phase, &[phi / 2.0], &[1]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
            ops.push(ElementaryOp::new(GateKind::Phase, &[-phi / 2.0], &[1]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
            ops.push(ElementaryOp::new(GateKind::Phase, &[phi / 2.0], &[0]));
            ops.push(ElementaryOp::new(GateKind::X, &[], &[0]));
            // Rx(-θ) on the target when the control is 1, as Rz(-π/2)·CRy(-θ)·Rz(π/2)
            ops.push(ElementaryOp::new(GateKind::Rz, &[FRAC_PI_2], &[1]));
            ops.push(ElementaryOp::new(GateKind::Ry, &[-theta / 2.0], &[1]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
            ops.push(ElementaryOp::new(GateKind::Ry, &[theta / 2.0], &[1]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
            ops.push(ElementaryOp::new(GateKind::Rz, &[-FRAC_PI_2], &[1]));
            push_fusion(&mut ops);
        }
        GateKind::Swap => {
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[1, 0]));
            ops.push(ElementaryOp::new(GateKind::Cnot, &[], &[0, 1]));
        }
        other => return Err(Error::Undecomposable(other.name())),
    }
    Ok(GateDecomposition { ops })
}

/// CNOTs needed to realize one gate of `kind`.
pub fn cnot_cost(kind: GateKind) -> usize {
    match kind {
        GateKind::X | GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => 0,
        GateKind::Cnot => 1,
        composite => decompose(composite, &vec![0.0; composite.arity()])
            .expect("composite kinds decompose")
            .cnot_count(),
    }
}
