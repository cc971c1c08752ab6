//! Circuit representation and the particle-conserving circuit builders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatelib::{cnot_cost, GateKind};
use crate::numkit::StateVector;
use crate::symmetry::subspace_dimension;

/// A gate parameter: either a free variational slot or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ParamRef {
    Slot { slot: usize },
    Value { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Op {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<ParamRef>,
}

/// Marks a parameter that a fixing policy pinned to a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParam {
    pub op: usize,
    pub param: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Op>,
    fixed_params: Vec<FixedParam>,
    #[serde(skip)]
    num_free_parameters: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDocument {
    num_qubits: usize,
    ops: Vec<Op>,
    #[serde(default)]
    fixed_params: Vec<FixedParam>,
}

/// Values for the free slots of a circuit, in slot order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterBinding(pub Vec<f64>);

impl ParameterBinding {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for ParameterBinding {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
            fixed_params: Vec::new(),
            num_free_parameters: 0,
        }
    }

    /// Checks targets and arities and recomputes the free-slot count.
    pub fn from_parts(num_qubits: usize, ops: Vec<Op>, fixed_params: Vec<FixedParam>) -> Result<Self> {
        let mut max_slot: Option<usize> = None;
        for (i, op) in ops.iter().enumerate() {
            check_targets(num_qubits, op.kind, &op.qubits).map_err(|e| match e {
                Error::InvalidCircuit(msg) => Error::InvalidCircuit(format!("op {i}: {msg}")),
                other => other,
            })?;
            if op.params.len() != op.kind.arity() {
                return Err(Error::Arity {
                    kind: op.kind.name(),
                    expected: op.kind.arity(),
                    got: op.params.len(),
                });
            }
            for p in &op.params {
                match *p {
                    ParamRef::Slot { slot } => max_slot = Some(max_slot.map_or(slot, |m| m.max(slot))),
                    ParamRef::Value { value } if !value.is_finite() => {
                        return Err(Error::NonFinite("circuit parameter"))
                    }
                    ParamRef::Value { .. } => {}
                }
            }
        }
        let num_free = max_slot.map_or(0, |m| m + 1);
        let mut used = vec![false; num_free];
        for op in &ops {
            for p in &op.params {
                if let ParamRef::Slot { slot } = *p {
                    used[slot] = true;
                }
            }
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!("slot {gap} is never used")));
        }
        for f in &fixed_params {
            let ok = ops
                .get(f.op)
                .and_then(|op| op.params.get(f.param))
                .is_some_and(|p| matches!(p, ParamRef::Value { .. }));
            if !ok {
                return Err(Error::InvalidCircuit(format!(
                    "fixed parameter ({}, {}) does not name a fixed value",
                    f.op, f.param
                )));
            }
        }
        Ok(Self {
            num_qubits,
            ops,
            fixed_params,
            num_free_parameters: num_free,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn fixed_params(&self) -> &[FixedParam] {
        &self.fixed_params
    }

    pub fn num_free_parameters(&self) -> usize {
        self.num_free_parameters
    }

    /// Appends a gate with constant parameters.
    pub fn push_fixed(&mut self, kind: GateKind, qubits: &[usize], values: &[f64]) -> Result<&mut Self> {
        check_targets(self.num_qubits, kind, qubits)?;
        if values.len() != kind.arity() {
            return Err(Error::Arity {
                kind: kind.name(),
                expected: kind.arity(),
                got: values.len(),
            });
        }
        self.ops.push(Op {
            kind,
            qubits: qubits.to_vec(),
            params: values.iter().map(|&value| ParamRef::Value { value }).collect(),
        });
        Ok(self)
    }

    /// Appends a gate whose parameters all get fresh slots.
    pub fn push_free(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        check_targets(self.num_qubits, kind, qubits)?;
        let params = (0..kind.arity())
            .map(|_| {
                let slot = self.num_free_parameters;
                self.num_free_parameters += 1;
                ParamRef::Slot { slot }
            })
            .collect();
        self.ops.push(Op {
            kind,
            qubits: qubits.to_vec(),
            params,
        });
        Ok(self)
    }

    /// Concrete parameter values of op `index` under `binding`.
    pub fn resolve(&self, index: usize, binding: &ParameterBinding) -> Vec<f64> {
        self.ops[index]
            .params
            .iter()
            .map(|p| match *p {
                ParamRef::Slot { slot } => binding.0[slot],
                ParamRef::Value { value } => value,
            })
            .collect()
    }

    pub fn check_binding(&self, binding: &ParameterBinding) -> Result<()> {
        if binding.len() != self.num_free_parameters {
            return Err(Error::BindingLength {
                expected: self.num_free_parameters,
                got: binding.len(),
            });
        }
        Ok(())
    }

    /// Number of variational two-qubit gates (A, B or controlled-V).
    pub fn parameterized_gate_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| op.kind.is_parameterized_two_qubit())
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CircuitDocument = serde_json::from_str(s)?;
        Self::from_parts(doc.num_qubits, doc.ops, doc.fixed_params)
    }
}

fn check_targets(num_qubits: usize, kind: GateKind, qubits: &[usize]) -> Result<()> {
    if qubits.len() != kind.num_qubits() {
        return Err(Error::InvalidCircuit(format!(
            "{kind} acts on {} qubit(s), got {:?}",
            kind.num_qubits(),
            qubits
        )));
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= num_qubits) {
        return Err(Error::InvalidCircuit(format!(
            "qubit {q} out of range for {num_qubits}-qubit circuit"
        )));
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return Err(Error::InvalidCircuit(format!("{kind} on repeated qubit {}", qubits[0])));
    }
    Ok(())
}

/// Which variational parameters the brick-wall builder pins to constants.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FixingPolicy {
    /// φ of the first two gates set to 0.
    #[default]
    LeadingPhases,
    /// Every gate keeps both parameters free.
    None,
    /// `(gate index, parameter index, value)` triples; gate index counts two-qubit gates only.
    Explicit(Vec<(usize, usize, f64)>),
}

impl FixingPolicy {
    fn fixed_value(&self, gate: usize, param: usize) -> Option<f64> {
        match self {
            FixingPolicy::LeadingPhases => (gate < 2 && param == 1).then_some(0.0),
            FixingPolicy::None => None,
            FixingPolicy::Explicit(list) => list
                .iter()
                .find(|&&(g, p, _)| g == gate && p == param)
                .map(|&(_, _, v)| v),
        }
    }
}

/// Where the initial X gates go.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Placement {
    /// A contiguous block of `N` qubits in the middle of the chain.
    #[default]
    Centered,
    Explicit(Vec<usize>),
}

impl Placement {
    pub fn qubits(&self, sites: usize, particles: usize) -> Result<Vec<usize>> {
        let q = match self {
            Placement::Centered => {
                let start = (sites - particles) / 2;
                (start..start + particles).collect()
            }
            Placement::Explicit(q) => q.clone(),
        };
        check_placement(sites, particles, &q)?;
        Ok(q)
    }
}

fn check_placement(sites: usize, particles: usize, placement: &[usize]) -> Result<()> {
    if placement.len() != particles {
        return Err(Error::InvalidPlacement(format!(
            "{} qubit(s) given for {particles} particle(s)",
            placement.len()
        )));
    }
    let mut seen = vec![false; sites];
    for &q in placement {
        if q >= sites {
            return Err(Error::InvalidPlacement(format!(
                "qubit {q} out of range for {sites} sites"
            )));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidPlacement(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BrickwallOptions {
    pub placement: Placement,
    pub fixing: FixingPolicy,
}

fn check_module_gate(gate: GateKind) -> Result<()> {
    if gate.is_parameterized_two_qubit() {
        Ok(())
    } else {
        Err(Error::InvalidCircuit(format!(
            "{gate} is not a two-qubit variational gate"
        )))
    }
}

/// Nearest-neighbour pairs of the odd (`(0,1), (2,3), …`) or even (`(1,2), …`) layer.
pub fn layer_pairs(sites: usize, even: bool) -> Vec<(usize, usize)> {
    let start = usize::from(even);
    (start..sites.saturating_sub(1))
        .step_by(2)
        .map(|i| (i, i + 1))
        .collect()
}

/// The two-qubit couplings of the brick-wall circuit, in order.
pub fn brickwall_couplings(sites: usize, gates: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(gates);
    let mut even = false;
    while out.len() < gates {
        for pair in layer_pairs(sites, even) {
            if out.len() == gates {
                break;
            }
            out.push(pair);
        }
        even = !even;
    }
    out
}

pub fn build_brickwall(sites: usize, particles: usize, gate: GateKind) -> Result<Circuit> {
    build_brickwall_with(sites, particles, gate, &BrickwallOptions::default())
}

/// X gates on the placement, then alternating odd/even layers of `gate`
/// truncated after `C(sites, particles)` gates, with the fixing policy applied.
pub fn build_brickwall_with(
    sites: usize,
    particles: usize,
    gate: GateKind,
    opts: &BrickwallOptions,
) -> Result<Circuit> {
    if sites < 2 || particles == 0 || particles >= sites {
        return Err(Error::InvalidSector { sites, particles });
    }
    check_module_gate(gate)?;
    let count = subspace_dimension(sites, particles)?;
    let mut c = Circuit::new(sites);
    for q in opts.placement.qubits(sites, particles)? {
        c.push_fixed(GateKind::X, &[q], &[])?;
    }
    let mut slot = 0;
    for (g, (a, b)) in brickwall_couplings(sites, count).into_iter().enumerate() {
        let params = (0..gate.arity())
            .map(|p| match opts.fixing.fixed_value(g, p) {
                Some(value) => {
                    c.fixed_params.push(FixedParam {
                        op: c.ops.len(),
                        param: p,
                    });
                    ParamRef::Value { value }
                }
                None => {
                    slot += 1;
                    ParamRef::Slot { slot: slot - 1 }
                }
            })
            .collect();
        c.ops.push(Op {
            kind: gate,
            qubits: vec![a, b],
            params,
        });
    }
    c.num_free_parameters = slot;
    Ok(c)
}

/// The 4-site, 2-particle circuit with five variational gates; swaps bring
/// qubits (0, 3) and (0, 2) next to each other and are undone at the end.
pub fn build_swap_variant_2on4(gate: GateKind) -> Result<Circuit> {
    check_module_gate(gate)?;
    let mut c = Circuit::new(4);
    c.push_fixed(GateKind::X, &[1], &[])?
        .push_fixed(GateKind::X, &[2], &[])?
        .push_free(gate, &[0, 1])?
        .push_free(gate, &[2, 3])?
        .push_free(gate, &[1, 2])?
        .push_fixed(GateKind::Swap, &[0, 1], &[])?
        .push_fixed(GateKind::Swap, &[1, 2], &[])?
        .push_free(gate, &[2, 3])?
        .push_free(gate, &[1, 2])?
        .push_fixed(GateKind::Swap, &[1, 2], &[])?
        .push_fixed(GateKind::Swap, &[0, 1], &[])?;
    Ok(c)
}

pub fn cnot_count(c: &Circuit) -> usize {
    c.ops.iter().map(|op| cnot_cost(op.kind)).sum()
}

/// Computational basis state with ones on `placement`.
pub fn initial_sector_state(sites: usize, particles: usize, placement: &[usize]) -> Result<StateVector> {
    if particles > sites {
        return Err(Error::InvalidSector { sites, particles });
    }
    check_placement(sites, particles, placement)?;
    let index = placement.iter().fold(0usize, |acc, &q| acc | (1 << q));
    Ok(StateVector::basis_state(sites, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn couplings(c: &Circuit) -> Vec<(usize, usize)> {
        c.ops()
            .iter()
            .filter(|op| op.kind.is_parameterized_two_qubit())
            .map(|op| (op.qubits[0], op.qubits[1]))
            .collect()
    }

    #[test]
    fn brickwall_4_2_coupling_sequence() {
        let c = build_brickwall(4, 2, GateKind::AGate).unwrap();
        assert_eq!(couplings(&c), vec![(0, 1), (2, 3), (1, 2), (0, 1), (2, 3), (1, 2)]);
        assert_eq!(c.parameterized_gate_count(), 6);
        assert_eq!(c.num_free_parameters(), 10);
        assert_eq!(cnot_count(&c), 18);
        let xs: Vec<usize> = c
            .ops()
            .iter()
            .filter(|o| o.kind == GateKind::X)
            .map(|o| o.qubits[0])
            .collect();
        assert_eq!(xs, vec![1, 2]);
    }

    #[test]
    fn brickwall_6_3_counts() {
        let c = build_brickwall(6, 3, GateKind::BGate).unwrap();
        assert_eq!(c.parameterized_gate_count(), 20);
        assert_eq!(c.num_free_parameters(), 38);
    }

    #[test]
    fn brickwall_counts_follow_binomial() {
        for sites in 2..=8 {
            for particles in 1..sites {
                let c = build_brickwall(sites, particles, GateKind::AGate).unwrap();
                let d = subspace_dimension(sites, particles).unwrap();
                assert_eq!(c.parameterized_gate_count(), d);
                assert_eq!(c.num_free_parameters(), 2 * d - 2);
            }
        }
    }

    #[test]
    fn brickwall_two_sites_repeats_single_pair() {
        let c = build_brickwall(2, 1, GateKind::AGate).unwrap();
        assert_eq!(couplings(&c), vec![(0, 1), (0, 1)]);
    }

    #[test]
    fn truncation_is_left_to_right() {
        // C(5,2) = 10; layers hold 2 gates each
        assert_eq!(brickwall_couplings(5, 5), vec![(0, 1), (2, 3), (1, 2), (3, 4), (0, 1)]);
        assert_eq!(brickwall_couplings(3, 3), vec![(0, 1), (1, 2), (0, 1)]);
    }

    #[test]
    fn brickwall_rejects_invalid_sectors() {
        for (l, n) in [(1, 1), (2, 0), (2, 2), (2, 3)] {
            assert!(matches!(
                build_brickwall(l, n, GateKind::AGate),
                Err(Error::InvalidSector { .. })
            ));
        }
        assert!(build_brickwall(4, 2, GateKind::Swap).is_err());
    }

    #[test]
    fn fixing_policies() {
        let none = build_brickwall_with(
            4,
            2,
            GateKind::AGate,
            &BrickwallOptions {
                fixing: FixingPolicy::None,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(none.num_free_parameters(), 12);
        assert!(none.fixed_params().is_empty());

        let explicit = build_brickwall_with(
            4,
            2,
            GateKind::AGate,
            &BrickwallOptions {
                fixing: FixingPolicy::Explicit(vec![(0, 0, 0.5), (5, 1, 0.0)]),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(explicit.num_free_parameters(), 10);
        assert_eq!(explicit.ops()[2].params[0], ParamRef::Value { value: 0.5 });

        let default = build_brickwall(4, 2, GateKind::AGate).unwrap();
        assert_eq!(
            default.fixed_params(),
            &[FixedParam { op: 2, param: 1 }, FixedParam { op: 3, param: 1 }]
        );
    }

    #[test]
    fn swap_variant_structure() {
        let c = build_swap_variant_2on4(GateKind::AGate).unwrap();
        assert_eq!(c.parameterized_gate_count(), 5);
        assert_eq!(c.num_free_parameters(), 10);
        assert_eq!(cnot_count(&c), 27);
        assert_eq!(c.ops().iter().filter(|o| o.kind == GateKind::Swap).count(), 4);
    }

    #[test]
    fn swap_variant_couples_distant_qubits() {
        // track which logical qubit sits on each wire
        let c = build_swap_variant_2on4(GateKind::AGate).unwrap();
        let mut wire: Vec<usize> = (0..4).collect();
        let mut logical_pairs = Vec::new();
        for op in c.ops() {
            match op.kind {
                GateKind::Swap => wire.swap(op.qubits[0], op.qubits[1]),
                GateKind::AGate => {
                    let mut p = [wire[op.qubits[0]], wire[op.qubits[1]]];
                    p.sort();
                    logical_pairs.push((p[0], p[1]));
                }
                _ => {}
            }
        }
        assert_eq!(wire, vec![0, 1, 2, 3]);
        assert_eq!(logical_pairs, vec![(0, 1), (2, 3), (1, 2), (0, 3), (0, 2)]);
    }

    #[test]
    fn empty_circuit_has_no_cnots() {
        assert_eq!(cnot_count(&Circuit::new(3)), 0);
    }

    #[test]
    fn initial_states() {
        let s = initial_sector_state(4, 2, &[1, 2]).unwrap();
        assert_eq!(s.amplitudes()[0b0110].re, 1.0);
        let z = initial_sector_state(5, 0, &[]).unwrap();
        assert_eq!(z.amplitudes()[0].re, 1.0);
        let one = initial_sector_state(2, 1, &[0]).unwrap();
        assert_eq!(one.amplitudes()[1].re, 1.0);
        assert!(initial_sector_state(4, 2, &[1]).is_err());
        assert!(initial_sector_state(4, 2, &[1, 1]).is_err());
        assert!(initial_sector_state(4, 1, &[4]).is_err());
    }

    #[test]
    fn push_rejects_bad_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push_free(GateKind::AGate, &[0, 0]).is_err());
        assert!(c.push_free(GateKind::AGate, &[0, 2]).is_err());
        assert!(c.push_free(GateKind::X, &[0, 1]).is_err());
        assert!(c.push_fixed(GateKind::Rx, &[0], &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        for c in [
            build_brickwall(4, 2, GateKind::AGate).unwrap(),
            build_swap_variant_2on4(GateKind::BGate).unwrap(),
            build_brickwall(6, 3, GateKind::BGate).unwrap(),
        ] {
            let text = c.to_json();
            let back = Circuit::from_json(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn json_schema_shape() {
        let c = build_brickwall(2, 1, GateKind::AGate).unwrap();
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["num_qubits"], 2);
        assert_eq!(v["ops"][0]["kind"], "x");
        assert_eq!(v["ops"][1]["kind"], "a_gate");
        assert_eq!(v["ops"][1]["params"][0], serde_json::json!({"slot": 0}));
        assert_eq!(v["ops"][1]["params"][1], serde_json::json!({"value": 0.0}));
        assert_eq!(v["fixed_params"][0], serde_json::json!({"op": 1, "param": 1}));
    }

    #[test]
    fn json_rejects_malformed() {
        assert!(Circuit::from_json("{").is_err());
        let bad_qubit = r#"{"num_qubits": 2, "ops": [{"kind": "x", "qubits": [5], "params": []}], "fixed_params": []}"#;
        assert!(Circuit::from_json(bad_qubit).is_err());
        let gap = r#"{"num_qubits": 1, "ops": [{"kind": "rx", "qubits": [0], "params": [{"slot": 1}]}]}"#;
        assert!(Circuit::from_json(gap).is_err());
        let bad_fixed = r#"{"num_qubits": 1, "ops": [{"kind": "rx", "qubits": [0], "params": [{"slot": 0}]}], "fixed_params": [{"op": 0, "param": 0}]}"#;
        assert!(Circuit::from_json(bad_fixed).is_err());
    }

    #[test]
    fn builder_is_deterministic() {
        let a = build_brickwall(6, 3, GateKind::AGate).unwrap();
        let b = build_brickwall(6, 3, GateKind::AGate).unwrap();
        assert_eq!(a, b);
    }
}
