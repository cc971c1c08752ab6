//! Charge bookkeeping for two-site U(1) and Z2 symmetric operators.
//!
//! A single site carries charge 0 (empty, `|0⟩`) or 1 (occupied, `|1⟩`).
//! Two sites fuse into a coupled space labelled by `(charge, degeneracy)`
//! pairs. Product-basis states of two qubits are indexed `2·top + bottom`,
//! i.e. the first qubit of a pair is the high-order bit of the local index.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numkit::{matmul, ComplexMatrix, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionRule {
    U1Addition,
    Z2Mod2,
}

impl FusionRule {
    pub fn fuse(self, a: u32, b: u32) -> u32 {
        match self {
            FusionRule::U1Addition => a + b,
            FusionRule::Z2Mod2 => (a + b) % 2,
        }
    }
}

/// `|n, μ⟩` in the charge-degeneracy basis. `degeneracy` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChargeLabel {
    pub charge: u32,
    pub degeneracy: u32,
}

impl ChargeLabel {
    pub const fn new(charge: u32, degeneracy: u32) -> Self {
        Self { charge, degeneracy }
    }
}

/// Two-qubit product basis ↔ coupled symmetry basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeBasisMap {
    rule: FusionRule,
    /// Indexed by product-basis state `0b(top)(bottom)`.
    labels: [ChargeLabel; 4],
}

impl ChargeBasisMap {
    /// Validates bijectivity, fusion-rule consistency and contiguous degeneracy indices.
    pub fn new(rule: FusionRule, labels: [ChargeLabel; 4]) -> Result<Self> {
        for (product, label) in labels.iter().enumerate() {
            let (top, bottom) = ((product >> 1) as u32, (product & 1) as u32);
            if rule.fuse(top, bottom) != label.charge {
                return Err(Error::Config(format!(
                    "state |{top}{bottom}⟩ labelled with charge {} but {:?} gives {}",
                    label.charge,
                    rule,
                    rule.fuse(top, bottom)
                )));
            }
        }
        let mut per_charge: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for l in &labels {
            per_charge.entry(l.charge).or_default().push(l.degeneracy);
        }
        for (charge, mut degs) in per_charge {
            degs.sort_unstable();
            let expected: Vec<u32> = (1..=degs.len() as u32).collect();
            if degs != expected {
                return Err(Error::Config(format!(
                    "charge {charge} has degeneracy indices {degs:?}, expected {expected:?}"
                )));
            }
        }
        Ok(Self { rule, labels })
    }

    /// `|00⟩→|0,1⟩, |01⟩→|1,1⟩, |10⟩→|1,2⟩, |11⟩→|2,1⟩`.
    pub fn u1() -> Self {
        Self::new(
            FusionRule::U1Addition,
            [
                ChargeLabel::new(0, 1),
                ChargeLabel::new(1, 1),
                ChargeLabel::new(1, 2),
                ChargeLabel::new(2, 1),
            ],
        )
        .expect("valid U(1) map")
    }

    /// Parity map realized by a single CNOT with the bottom qubit as control:
    /// `|00⟩→|0,1⟩, |01⟩→|1,2⟩, |10⟩→|1,1⟩, |11⟩→|0,2⟩`.
    pub fn z2() -> Self {
        Self::new(
            FusionRule::Z2Mod2,
            [
                ChargeLabel::new(0, 1),
                ChargeLabel::new(1, 2),
                ChargeLabel::new(1, 1),
                ChargeLabel::new(0, 2),
            ],
        )
        .expect("valid Z2 map")
    }

    /// Parity map with the degeneracies of the charge-1 states exchanged
    /// relative to [`ChargeBasisMap::z2`]; its gate needs two CNOTs.
    pub fn z2_double_cnot() -> Self {
        Self::new(
            FusionRule::Z2Mod2,
            [
                ChargeLabel::new(0, 1),
                ChargeLabel::new(1, 1),
                ChargeLabel::new(1, 2),
                ChargeLabel::new(0, 2),
            ],
        )
        .expect("valid Z2 map")
    }

    pub fn default_for(rule: FusionRule) -> Self {
        match rule {
            FusionRule::U1Addition => Self::u1(),
            FusionRule::Z2Mod2 => Self::z2(),
        }
    }

    pub fn rule(&self) -> FusionRule {
        self.rule
    }

    pub fn label_of(&self, product_index: usize) -> ChargeLabel {
        self.labels[product_index]
    }

    pub fn product_of(&self, label: ChargeLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// `(product bitstring, label)` pairs in product order.
    pub fn pairs(&self) -> Vec<(usize, ChargeLabel)> {
        self.labels.iter().copied().enumerate().collect()
    }

    /// Coupled basis, charge-major then degeneracy-minor.
    pub fn coupled_order(&self) -> Vec<ChargeLabel> {
        let mut order = self.labels.to_vec();
        order.sort();
        order
    }

    pub fn coupled_index(&self, label: ChargeLabel) -> Option<usize> {
        self.coupled_order().iter().position(|&l| l == label)
    }

    /// Charge → number of coupled states carrying it.
    pub fn degeneracies(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for l in &self.labels {
            *out.entry(l.charge).or_insert(0) += 1;
        }
        out
    }

    /// Permutation taking product-basis amplitudes to coupled-basis amplitudes
    /// (rows: coupled order, columns: product order).
    pub fn fusion_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (product, label) in self.pairs() {
            let row = self.coupled_index(label).expect("label in map");
            m[(row, product)] = ONE;
        }
        m
    }

    /// Inverse permutation of [`ChargeBasisMap::fusion_matrix`].
    pub fn splitting_matrix(&self) -> ComplexMatrix {
        crate::numkit::dagger(&self.fusion_matrix())
    }

    /// Diagonal projector onto charge `n`, in the coupled basis.
    pub fn charge_projector(&self, n: u32) -> ComplexMatrix {
        let diag: Vec<C64> = self
            .coupled_order()
            .iter()
            .map(|l| if l.charge == n { ONE } else { C64::new(0.0, 0.0) })
            .collect();
        ComplexMatrix::diag(&diag)
    }
}

/// 0/1 fusion coefficients `F[(i1, i2) → k]` for two single-site qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionTensor {
    map: ChargeBasisMap,
    /// `entries[i1][i2][k]`, `k` in coupled order.
    entries: [[[u8; 4]; 2]; 2],
}

/// Splitting tensor `S[k → (i1, i2)]`, the arrow-reversed fusion tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingTensor {
    map: ChargeBasisMap,
    /// `entries[k][i1][i2]`.
    entries: [[[u8; 2]; 2]; 4],
}

impl FusionTensor {
    pub fn from_map(map: &ChargeBasisMap) -> Self {
        let mut entries = [[[0u8; 4]; 2]; 2];
        for (product, label) in map.pairs() {
            let k = map.coupled_index(label).expect("label in map");
            entries[product >> 1][product & 1][k] = 1;
        }
        Self {
            map: map.clone(),
            entries,
        }
    }

    pub fn map(&self) -> &ChargeBasisMap {
        &self.map
    }

    /// Coefficient `F_{(n1,1)(n2,1)}^{(n,μ)}`; zero for labels outside the map.
    pub fn component(&self, n1: u32, n2: u32, coupled: ChargeLabel) -> u8 {
        if n1 > 1 || n2 > 1 {
            return 0;
        }
        match self.map.coupled_index(coupled) {
            Some(k) => self.entries[n1 as usize][n2 as usize][k],
            None => 0,
        }
    }

    pub fn get(&self, i1: usize, i2: usize, k: usize) -> u8 {
        self.entries[i1][i2][k]
    }

    /// Rows: coupled order, columns: product order.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for k in 0..4 {
                    if self.entries[i1][i2][k] == 1 {
                        m[(k, 2 * i1 + i2)] = ONE;
                    }
                }
            }
        }
        m
    }
}

impl SplittingTensor {
    pub fn from_map(map: &ChargeBasisMap) -> Self {
        let f = FusionTensor::from_map(map);
        let mut entries = [[[0u8; 2]; 2]; 4];
        for (k, slab) in entries.iter_mut().enumerate() {
            for (i1, row) in slab.iter_mut().enumerate() {
                for (i2, e) in row.iter_mut().enumerate() {
                    *e = f.entries[i1][i2][k];
                }
            }
        }
        Self {
            map: map.clone(),
            entries,
        }
    }

    pub fn component(&self, coupled: ChargeLabel, n1: u32, n2: u32) -> u8 {
        if n1 > 1 || n2 > 1 {
            return 0;
        }
        match self.map.coupled_index(coupled) {
            Some(k) => self.entries[k][n1 as usize][n2 as usize],
            None => 0,
        }
    }

    pub fn get(&self, k: usize, i1: usize, i2: usize) -> u8 {
        self.entries[k][i1][i2]
    }
}

pub fn fusion_tensor(rule: FusionRule) -> FusionTensor {
    FusionTensor::from_map(&ChargeBasisMap::default_for(rule))
}

pub fn splitting_tensor(rule: FusionRule) -> SplittingTensor {
    SplittingTensor::from_map(&ChargeBasisMap::default_for(rule))
}

/// `Σ_k F[(i1,i2)→k] · S[k→(j1,j2)]` as a 4x4 integer matrix over product pairs.
pub fn split_after_fuse(f: &FusionTensor, s: &SplittingTensor) -> [[u8; 4]; 4] {
    let mut out = [[0u8; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| f.get(i >> 1, i & 1, k) * s.get(k, j >> 1, j & 1)).sum();
        }
    }
    out
}

/// `Σ_{i1,i2} S[k→(i1,i2)] · F[(i1,i2)→k']` as a 4x4 integer matrix over coupled labels.
pub fn fuse_after_split(f: &FusionTensor, s: &SplittingTensor) -> [[u8; 4]; 4] {
    let mut out = [[0u8; 4]; 4];
    for (k, row) in out.iter_mut().enumerate() {
        for (kp, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|p| s.get(k, p >> 1, p & 1) * f.get(p >> 1, p & 1, kp)).sum();
        }
    }
    out
}

/// Charge-conserving operator `⊕ₙ Mₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    blocks: BTreeMap<u32, ComplexMatrix>,
}

impl BlockMatrix {
    pub fn new(blocks: impl IntoIterator<Item = (u32, ComplexMatrix)>) -> Result<Self> {
        let blocks: BTreeMap<u32, ComplexMatrix> = blocks.into_iter().collect();
        for (n, m) in &blocks {
            if !m.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "block for charge {n} is {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn block(&self, charge: u32) -> Option<&ComplexMatrix> {
        self.blocks.get(&charge)
    }

    pub fn blocks(&self) -> &BTreeMap<u32, ComplexMatrix> {
        &self.blocks
    }
}

/// Dense 4x4 operator in the coupled basis of `map` (charge-major order).
pub fn embed_block_matrix(m: &BlockMatrix, map: &ChargeBasisMap) -> Result<ComplexMatrix> {
    let degs = map.degeneracies();
    let charges: Vec<u32> = m.blocks.keys().copied().collect();
    let expected: Vec<u32> = degs.keys().copied().collect();
    if charges != expected {
        return Err(Error::DimensionMismatch(format!(
            "blocks for charges {charges:?}, map has charges {expected:?}"
        )));
    }
    for (n, block) in &m.blocks {
        if block.rows() != degs[n] {
            return Err(Error::DimensionMismatch(format!(
                "block for charge {n} is {}x{}, degeneracy is {}",
                block.rows(),
                block.cols(),
                degs[n]
            )));
        }
    }
    let order = map.coupled_order();
    let mut out = ComplexMatrix::zeros(4, 4);
    for (r, lr) in order.iter().enumerate() {
        for (c, lc) in order.iter().enumerate() {
            if lr.charge == lc.charge {
                let block = &m.blocks[&lr.charge];
                out[(r, c)] = block[((lr.degeneracy - 1) as usize, (lc.degeneracy - 1) as usize)];
            }
        }
    }
    Ok(out)
}

/// `S · embed(M) · F`: the block operator expressed in the two-qubit product basis.
pub fn to_product_basis(m: &BlockMatrix, map: &ChargeBasisMap) -> Result<ComplexMatrix> {
    let core = embed_block_matrix(m, map)?;
    matmul(&matmul(&map.splitting_matrix(), &core)?, &map.fusion_matrix())
}

/// `C(sites, particles)`.
pub fn subspace_dimension(sites: usize, particles: usize) -> Result<usize> {
    if particles > sites {
        return Err(Error::InvalidSector { sites, particles });
    }
    let k = particles.min(sites - particles) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (sites as u128 - i) / (i + 1);
    }
    usize::try_from(acc).map_err(|_| Error::InvalidSector { sites, particles })
}

/// Ascending computational-basis indices with exactly `particles` bits set.
pub fn sector_basis_indices(sites: usize, particles: usize) -> Vec<usize> {
    assert!(sites < usize::BITS as usize, "too many sites");
    (0..1usize << sites)
        .filter(|i| i.count_ones() as usize == particles)
        .collect()
}
