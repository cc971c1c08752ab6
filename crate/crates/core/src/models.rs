//! Spin-chain and hardcore-boson Hamiltonians in Pauli form, plus dense
//! exact-diagonalization references.
//!
//! Site occupation is the qubit value: `n = (I - Z)/2`, so `|1⟩` is a particle
//! (spin down) and `|0⟩` is empty (spin up).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{hermitian_eigen, StateVector, ZERO};
use crate::simulator::{Pauli, PauliString, PauliSum};
use crate::symmetry::{sector_basis_indices, subspace_dimension};

/// Largest chain handled by [`exact_ground`] and the spectrum helpers.
pub const DENSE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Config(format!("unknown boundary {other:?}"))),
        }
    }
}

/// Nearest-neighbour bonds. Periodic chains close with `(L-1, 0)`; for `L = 2`
/// that repeats the single pair, so each site still has two bonds.
pub fn bonds(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = (0..sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && sites >= 2 {
        out.push((sites - 1, 0));
    }
    out
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 2 {
        return Err(Error::Config(format!("a chain needs at least 2 sites, got {sites}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XXZSpec {
    pub sites: usize,
    pub gamma: f64,
    pub boundary: Boundary,
}

impl XXZSpec {
    pub fn new(sites: usize, gamma: f64, boundary: Boundary) -> Result<Self> {
        check_sites(sites)?;
        if !gamma.is_finite() {
            return Err(Error::NonFinite("gamma"));
        }
        Ok(Self { sites, gamma, boundary })
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        bonds(self.sites, self.boundary)
    }

    /// The hardcore-boson chain with `Δ = 2γ`.
    pub fn bose_hubbard(&self) -> BoseHubbardSpec {
        BoseHubbardSpec {
            sites: self.sites,
            delta: 2.0 * self.gamma,
            boundary: self.boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoseHubbardSpec {
    pub sites: usize,
    pub delta: f64,
    pub boundary: Boundary,
}

impl BoseHubbardSpec {
    pub fn new(sites: usize, delta: f64, boundary: Boundary) -> Result<Self> {
        check_sites(sites)?;
        if !delta.is_finite() {
            return Err(Error::NonFinite("delta"));
        }
        Ok(Self { sites, delta, boundary })
    }
}

fn two_site(sites: usize, coeff: f64, i: usize, j: usize, p: Pauli) -> PauliString {
    PauliString::sparse(sites, coeff, &[(i, p), (j, p)])
}

/// `Σ_bonds (X_i X_j + Y_i Y_j + γ Z_i Z_j)`.
pub fn xxz_hamiltonian(spec: &XXZSpec) -> PauliSum {
    let l = spec.sites;
    let mut h = PauliSum::new(l);
    for (i, j) in spec.bonds() {
        for (p, c) in [(Pauli::X, 1.0), (Pauli::Y, 1.0), (Pauli::Z, spec.gamma)] {
            h.push(two_site(l, c, i, j, p)).expect("sizes agree");
        }
    }
    h
}

/// `M = Σ_i Z_i`.
pub fn magnetization(sites: usize) -> PauliSum {
    let terms = (0..sites)
        .map(|i| PauliString::sparse(sites, 1.0, &[(i, Pauli::Z)]))
        .collect();
    PauliSum::from_terms(sites, terms).expect("sizes agree")
}

/// `N̂ = Σ_i (I - Z_i)/2`.
pub fn number_operator(sites: usize) -> PauliSum {
    let mut n = magnetization(sites).scaled(-0.5);
    n.add_identity(sites as f64 / 2.0);
    n
}

/// `Σ_bonds (a_i† a_j + a_j† a_i + Δ n_i n_j)` with
/// `a† a + h.c. → (XX + YY)/2` and `n n → (I - Z_i - Z_j + Z_i Z_j)/4`.
pub fn bose_hubbard_hamiltonian(spec: &BoseHubbardSpec) -> PauliSum {
    let l = spec.sites;
    let q = spec.delta / 4.0;
    let mut h = PauliSum::new(l);
    for (i, j) in bonds(l, spec.boundary) {
        h.push(two_site(l, 0.5, i, j, Pauli::X)).expect("sizes agree");
        h.push(two_site(l, 0.5, i, j, Pauli::Y)).expect("sizes agree");
        h.push(two_site(l, q, i, j, Pauli::Z)).expect("sizes agree");
        h.push(PauliString::sparse(l, -q, &[(i, Pauli::Z)]))
            .expect("sizes agree");
        h.push(PauliString::sparse(l, -q, &[(j, Pauli::Z)]))
            .expect("sizes agree");
        h.add_identity(q);
    }
    h.simplified()
}

/// Operator `H_XXZ - 2·H_BH(Δ = 2γ)` minus its scalar part on the `N`-sector.
///
/// Each bond contributes `γ - 2γ(n_i + n_j)`, so the difference is
/// `γ·bonds - 2γ Σ_i deg(i) n_i`. With every degree equal to 2 this is the
/// scalar `γ·bonds - 4γN`; an open chain keeps `2γ(n_0 + n_{L-1})`, returned
/// here.
pub fn boundary_correction(spec: &XXZSpec) -> PauliSum {
    let l = spec.sites;
    let mut h = PauliSum::new(l);
    if spec.boundary == Boundary::Open {
        // 2γ n = γ (I - Z)
        h.add_identity(2.0 * spec.gamma);
        for site in [0, l - 1] {
            h.push(PauliString::sparse(l, -spec.gamma, &[(site, Pauli::Z)]))
                .expect("sizes agree");
        }
    }
    h
}

/// Scalar `c` with `H_XXZ = 2·H_BH + c·I` on the `particles`-sector, when one
/// exists: always for periodic chains, and for open chains only at `L = 2`,
/// where the end sites cover the whole chain.
pub fn mapping_offset(spec: &XXZSpec, particles: usize) -> Option<f64> {
    let g = spec.gamma;
    let base = g * spec.bonds().len() as f64 - 4.0 * g * particles as f64;
    match spec.boundary {
        Boundary::Periodic => Some(base),
        Boundary::Open if spec.sites == 2 => Some(base + 2.0 * g * particles as f64),
        Boundary::Open => None,
    }
}

fn check_dense(h: &PauliSum) -> Result<()> {
    if h.num_qubits() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            qubits: h.num_qubits(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

fn sector_indices(h: &PauliSum, sector: (usize, usize)) -> Result<Vec<usize>> {
    let (sites, particles) = sector;
    if sites != h.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "sector on {sites} sites for a {}-qubit operator",
            h.num_qubits()
        )));
    }
    subspace_dimension(sites, particles)?;
    Ok(sector_basis_indices(sites, particles))
}

/// Ascending eigenvalues of `h`, optionally restricted to an `(L, N)` sector.
pub fn spectrum(h: &PauliSum, sector: Option<(usize, usize)>) -> Result<Vec<f64>> {
    check_dense(h)?;
    let dense = h.to_dense();
    let m = match sector {
        Some(s) => dense.principal_submatrix(&sector_indices(h, s)?),
        None => dense,
    };
    Ok(hermitian_eigen(&m)?.values)
}

/// Lowest eigenpair of `h`, optionally restricted to an `(L, N)` sector.
/// The returned state always lives in the full `2^L` space.
pub fn exact_ground(h: &PauliSum, sector: Option<(usize, usize)>) -> Result<(f64, StateVector)> {
    check_dense(h)?;
    let dense = h.to_dense();
    let (m, indices) = match sector {
        Some(s) => {
            let idx = sector_indices(h, s)?;
            (dense.principal_submatrix(&idx), idx)
        }
        None => (dense, (0..1usize << h.num_qubits()).collect()),
    };
    let eig = hermitian_eigen(&m)?;
    let mut amps = vec![ZERO; 1 << h.num_qubits()];
    for (k, &i) in indices.iter().enumerate() {
        amps[i] = eig.vectors[(k, 0)];
    }
    Ok((eig.values[0], StateVector::normalized(amps)?))
}

/// Largest eigenvalue gap between `H_XXZ` and its Bose-Hubbard image over all
/// particle sectors.
///
/// The image is `2·H_BH + c·I` where [`mapping_offset`] has a scalar, and
/// `2·H_BH + γ·bonds - 4γN + boundary_correction` otherwise.
pub fn mapping_deviation(spec: &XXZSpec) -> Result<f64> {
    let xxz = xxz_hamiltonian(spec);
    let bh2 = bose_hubbard_hamiltonian(&spec.bose_hubbard()).scaled(2.0);
    let mut worst = 0.0f64;
    for n in 0..=spec.sites {
        let image = match mapping_offset(spec, n) {
            Some(c) => {
                let mut m = bh2.clone();
                m.add_identity(c);
                m
            }
            None => {
                let mut m = bh2.plus(&boundary_correction(spec))?;
                m.add_identity(spec.gamma * spec.bonds().len() as f64 - 4.0 * spec.gamma * n as f64);
                m
            }
        };
        let a = spectrum(&xxz, Some((spec.sites, n)))?;
        let b = spectrum(&image, Some((spec.sites, n)))?;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}
