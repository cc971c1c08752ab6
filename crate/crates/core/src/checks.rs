//! Self-check suites over gate algebra, symmetry structure and the
//! spin/boson mapping. Each check reports the measured worst-case deviation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::circuit::{build_brickwall, build_swap_variant_2on4, cnot_count, Circuit, ParameterBinding};
use crate::error::{Error, Result};
use crate::gatelib::{
    a_gate, a_gate_bottom_up, b_gate, b_gate_bottom_up, decompose, elementary_matrix, fusion_gate, splitting_gate,
    two_site_number_operator, GateKind,
};
use crate::models::{
    bose_hubbard_hamiltonian, magnetization, mapping_deviation, number_operator, xxz_hamiltonian, Boundary, XXZSpec,
};
use crate::numkit::{matmul, ComplexMatrix};
use crate::simulator::{apply_gate, haar_random_sector_state, sector_weight};
use crate::symmetry::{fuse_after_split, fusion_tensor, split_after_fuse, splitting_tensor, FusionRule};
use crate::varopt::initial_parameters;

/// Tolerance for matrix identities.
pub const GATE_TOL: f64 = 1e-12;
/// Tolerance for out-of-sector probability.
pub const LEAKAGE_TOL: f64 = 1e-12;
/// Tolerance for sector spectra in the mapping check.
pub const SPECTRUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Gates,
    Symmetry,
    Mapping,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Gates, Suite::Symmetry, Suite::Mapping];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gates => "gates",
            Suite::Symmetry => "symmetry",
            Suite::Mapping => "mapping",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Suites named on the command line; `all` expands to every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    match s {
        "all" => Ok(Suite::ALL.to_vec()),
        other => Suite::ALL
            .iter()
            .find(|x| x.name() == other)
            .map(|&x| vec![x])
            .ok_or_else(|| Error::Config(format!("unknown suite {other:?}"))),
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    /// Measured deviation, or the observed value for counting checks.
    pub value: f64,
    pub limit: f64,
}

impl CheckOutcome {
    fn within(suite: Suite, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
        }
    }

    fn exact(suite: Suite, name: impl Into<String>, got: usize, want: usize) -> Self {
        Self {
            suite,
            name: name.into(),
            passed: got == want,
            value: got as f64,
            limit: want as f64,
        }
    }
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    let pts: Vec<f64> = (0..10).map(|i| -PI + 2.0 * PI * i as f64 / 9.0).collect();
    let inner = pts.clone();
    pts.into_iter()
        .flat_map(move |t| inner.clone().into_iter().map(move |p| (t, p)))
}

fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(matmul(a, b)?.max_abs_diff(&matmul(b, a)?))
}

/// Worst deviation of the bottom-up A/B construction from the closed forms
/// over a 10×10 grid of `(θ, φ)` in `[-π, π]²`.
pub fn closed_form_deviation() -> (f64, f64) {
    grid().fold((0.0f64, 0.0f64), |(da, db), (t, p)| {
        (
            da.max(a_gate_bottom_up(t, p).max_abs_diff(&a_gate(t, p))),
            db.max(b_gate_bottom_up(t, p).max_abs_diff(&b_gate(t, p))),
        )
    })
}

/// Worst `‖[G, n₁ + n₂]‖` for the A and B gates over the grid.
pub fn number_commutator_deviation() -> Result<(f64, f64)> {
    let n = two_site_number_operator();
    let mut worst = (0.0f64, 0.0f64);
    for (t, p) in grid() {
        worst.0 = worst.0.max(commutator_norm(&a_gate(t, p), &n)?);
        worst.1 = worst.1.max(commutator_norm(&b_gate(t, p), &n)?);
    }
    Ok(worst)
}

fn gate_checks() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Gates;
    let (da, db) = closed_form_deviation();
    let (ca, cb) = number_commutator_deviation()?;
    let mut out = vec![
        CheckOutcome::within(s, "A bottom-up = closed form", da, GATE_TOL),
        CheckOutcome::within(s, "B bottom-up = closed form", db, GATE_TOL),
        CheckOutcome::within(s, "[A, n1+n2] = 0", ca, GATE_TOL),
        CheckOutcome::within(s, "[B, n1+n2] = 0", cb, GATE_TOL),
    ];
    for (kind, want) in [
        (GateKind::AGate, 3),
        (GateKind::BGate, 6),
        (GateKind::Swap, 3),
        (GateKind::ControlledV, 1),
    ] {
        let mut worst = 0.0f64;
        let mut cnots = 0;
        for (t, p) in grid() {
            let params: Vec<f64> = [t, p][..kind.arity()].to_vec();
            let d = decompose(kind, &params)?;
            let full = elementary_matrix(kind, &params)?;
            worst = worst.max(d.matrix()?.max_abs_diff(&full));
            cnots = d.cnot_count();
        }
        out.push(CheckOutcome::within(
            s,
            format!("{} decomposition matrix", kind.name()),
            worst,
            GATE_TOL,
        ));
        out.push(CheckOutcome::exact(
            s,
            format!("{} CNOT count", kind.name()),
            cnots,
            want,
        ));
    }
    let fs = matmul(&splitting_gate(), &fusion_gate())?;
    out.push(CheckOutcome::within(
        s,
        "splitting * fusion = I",
        fs.max_abs_diff(&ComplexMatrix::identity(4)),
        GATE_TOL,
    ));
    Ok(out)
}

/// Largest out-of-sector probability after the gate layers of `c` (initial X
/// gates skipped) act on Haar sector states, over `samples` random bindings.
pub fn sector_leakage(c: &Circuit, particles: usize, samples: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..samples {
        let binding = ParameterBinding(initial_parameters(c.num_free_parameters(), 1000 + k));
        let mut psi = haar_random_sector_state(c.num_qubits(), particles, 2000 + k)?;
        for (i, op) in c.ops().iter().enumerate() {
            if op.kind == GateKind::X {
                continue;
            }
            apply_gate(&mut psi, op.kind, &op.qubits, &c.resolve(i, &binding))?;
        }
        worst = worst.max((1.0 - sector_weight(&psi, particles)).abs());
    }
    Ok(worst)
}

/// Sectors exercised by the leakage checks.
pub const LEAKAGE_SECTORS: [(usize, usize); 4] = [(2, 1), (3, 1), (4, 2), (6, 3)];

fn symmetry_checks() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Symmetry;
    let mut out = Vec::new();
    for rule in [FusionRule::U1Addition, FusionRule::Z2Mod2] {
        let (f, sp) = (fusion_tensor(rule), splitting_tensor(rule));
        let ident = |m: [[u8; 4]; 4]| (0..4).all(|i| (0..4).all(|j| m[i][j] == u8::from(i == j)));
        out.push(CheckOutcome::exact(
            s,
            format!("{rule:?} split after fuse = I"),
            usize::from(ident(split_after_fuse(&f, &sp))),
            1,
        ));
        out.push(CheckOutcome::exact(
            s,
            format!("{rule:?} fuse after split = I"),
            usize::from(ident(fuse_after_split(&f, &sp))),
            1,
        ));
    }
    for (l, n) in LEAKAGE_SECTORS {
        for gate in [GateKind::AGate, GateKind::BGate] {
            let c = build_brickwall(l, n, gate)?;
            out.push(CheckOutcome::within(
                s,
                format!("brickwall({l},{n}) {} leakage", gate.name()),
                sector_leakage(&c, n, 5)?,
                LEAKAGE_TOL,
            ));
        }
    }
    let c = build_swap_variant_2on4(GateKind::AGate)?;
    out.push(CheckOutcome::within(
        s,
        "swap variant leakage",
        sector_leakage(&c, 2, 5)?,
        LEAKAGE_TOL,
    ));
    let bw = build_brickwall(4, 2, GateKind::AGate)?;
    out.push(CheckOutcome::exact(
        s,
        "brickwall(4,2) gates",
        bw.parameterized_gate_count(),
        6,
    ));
    out.push(CheckOutcome::exact(
        s,
        "brickwall(4,2) params",
        bw.num_free_parameters(),
        10,
    ));
    out.push(CheckOutcome::exact(s, "brickwall(4,2) CNOTs", cnot_count(&bw), 18));
    out.push(CheckOutcome::exact(
        s,
        "swap variant gates",
        c.parameterized_gate_count(),
        5,
    ));
    out.push(CheckOutcome::exact(
        s,
        "swap variant params",
        c.num_free_parameters(),
        10,
    ));
    out.push(CheckOutcome::exact(s, "swap variant CNOTs", cnot_count(&c), 27));
    Ok(out)
}

/// Chains used by the mapping checks.
pub const MAPPING_SITES: [usize; 3] = [2, 3, 4];

fn mapping_checks() -> Result<Vec<CheckOutcome>> {
    let s = Suite::Mapping;
    let mut out = Vec::new();
    for l in MAPPING_SITES {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let spec = XXZSpec::new(l, 1.0, boundary)?;
            let label = format!("{boundary:?}").to_lowercase();
            out.push(CheckOutcome::within(
                s,
                format!("L={l} {label} sector spectra"),
                mapping_deviation(&spec)?,
                SPECTRUM_TOL,
            ));
            let cm = xxz_hamiltonian(&spec).commutator(&magnetization(l))?;
            out.push(CheckOutcome::exact(
                s,
                format!("L={l} {label} [H_XXZ, M] terms"),
                cm.terms().len(),
                0,
            ));
            let cn = bose_hubbard_hamiltonian(&spec.bose_hubbard()).commutator(&number_operator(l))?;
            out.push(CheckOutcome::exact(
                s,
                format!("L={l} {label} [H_BH, N] terms"),
                cn.terms().len(),
                0,
            ));
        }
    }
    Ok(out)
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Gates => gate_checks(),
        Suite::Symmetry => symmetry_checks(),
        Suite::Mapping => mapping_checks(),
    }
}
