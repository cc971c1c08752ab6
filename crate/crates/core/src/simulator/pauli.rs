//! Pauli strings, weighted sums of them, and their symbolic algebra.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, StateVector, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self · other = phase · result`.
    pub fn product(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (crate::numkit::I, Z),
            (Y, X) => (-crate::numkit::I, Z),
            (Y, Z) => (crate::numkit::I, X),
            (Z, Y) => (-crate::numkit::I, X),
            (Z, X) => (crate::numkit::I, Y),
            (X, Z) => (-crate::numkit::I, Y),
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Real-weighted tensor product of Paulis; `letters[q]` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coeff: f64, letters: Vec<Pauli>) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::NonFinite("Pauli coefficient"));
        }
        Ok(Self { coeff, letters })
    }

    /// Identity with `ops` placed on the listed qubits.
    pub fn sparse(num_qubits: usize, coeff: f64, ops: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; num_qubits];
        for &(q, p) in ops {
            letters[q] = p;
        }
        Self { coeff, letters }
    }

    /// Parses e.g. `"XXI"` (qubit 0 first).
    pub fn parse(coeff: f64, s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Config(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeff, letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn x_mask(&self) -> usize {
        self.mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    pub fn z_mask(&self) -> usize {
        self.mask(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    /// Qubits carrying a non-identity letter.
    pub fn support_mask(&self) -> usize {
        self.mask(|p| p != Pauli::I)
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// `P|b⟩ = phase(b) |b ⊕ x_mask⟩`, returned as `(x_mask, phase_fn)` data.
    fn action(&self) -> (usize, usize, C64) {
        let y_phase = match self.y_count() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        (self.x_mask(), self.z_mask(), y_phase)
    }

    /// `⟨ψ| P |ψ⟩` without the coefficient.
    pub fn bare_expectation(&self, psi: &StateVector) -> C64 {
        let (x, z, yp) = self.action();
        let amps = psi.amplitudes();
        let mut acc = ZERO;
        for (b, &a) in amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += amps[b ^ x].conj() * a * sign;
        }
        acc * yp
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.coeff, self.label())
    }
}

/// A Hermitian operator as a real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(num_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut s = Self::new(num_qubits);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit string in {}-qubit sum",
                term.num_qubits(),
                self.num_qubits
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add_identity(&mut self, coeff: f64) {
        self.terms.push(PauliString::sparse(self.num_qubits, coeff, &[]));
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString {
                    coeff: t.coeff * s,
                    letters: t.letters.clone(),
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone())?;
        }
        Ok(out)
    }

    /// Merges repeated strings and drops exact zeros; terms sorted by label.
    pub fn simplified(&self) -> Self {
        let mut acc: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.letters.clone()).or_insert(0.0) += t.coeff;
        }
        Self {
            num_qubits: self.num_qubits,
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(letters, coeff)| PauliString { coeff, letters })
                .collect(),
        }
    }

    pub fn to_polynomial(&self) -> PauliPolynomial {
        let mut p = PauliPolynomial::new(self.num_qubits);
        for t in &self.terms {
            p.add_term(t.letters.clone(), C64::new(t.coeff, 0.0));
        }
        p
    }

    /// `[self, other]` evaluated symbolically.
    ///
    /// Commuting string pairs are skipped rather than cancelled numerically, and
    /// each anticommuting pair contributes `2·P·Q`, so the result is exactly
    /// empty whenever the operators commute term by term after merging.
    pub fn commutator(&self, other: &Self) -> Result<PauliPolynomial> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("Pauli sum sizes differ".into()));
        }
        let a = self.to_polynomial();
        let b = other.to_polynomial();
        let mut out = PauliPolynomial::new(self.num_qubits);
        for (la, ca) in a.terms() {
            for (lb, cb) in b.terms() {
                let mut phase = ONE;
                let mut anti = 0usize;
                let letters = la
                    .iter()
                    .zip(lb)
                    .map(|(&x, &y)| {
                        if x != Pauli::I && y != Pauli::I && x != y {
                            anti += 1;
                        }
                        let (ph, p) = x.product(y);
                        phase *= ph;
                        p
                    })
                    .collect();
                if anti % 2 == 1 {
                    out.add_term(letters, ca * cb * phase * 2.0);
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let dim = 1usize << self.num_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for t in &self.terms {
            let (x, z, yp) = t.action();
            for b in 0..dim {
                let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(b ^ x, b)] += yp * sign * t.coeff;
            }
        }
        m
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Complex-weighted Pauli sum, closed under products; terms kept merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliPolynomial {
    num_qubits: usize,
    terms: BTreeMap<Vec<Pauli>, C64>,
}

impl PauliPolynomial {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, letters: Vec<Pauli>, coeff: C64) {
        let total = self.terms.get(&letters).copied().unwrap_or(ZERO) + coeff;
        if total == ZERO {
            self.terms.remove(&letters);
        } else {
            self.terms.insert(letters, total);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Pauli>, C64> {
        &self.terms
    }

    /// True when every coefficient cancelled exactly.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("Pauli polynomial sizes differ".into()));
        }
        let mut out = Self::new(self.num_qubits);
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                let mut phase = ONE;
                let letters = la
                    .iter()
                    .zip(lb)
                    .map(|(&a, &b)| {
                        let (ph, p) = a.product(b);
                        phase *= ph;
                        p
                    })
                    .collect();
                out.add_term(letters, ca * cb * phase);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("Pauli polynomial sizes differ".into()));
        }
        let mut out = self.clone();
        for (l, c) in &other.terms {
            out.add_term(l.clone(), -c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{hermitian_deviation, kron, matmul};

    fn single(p: Pauli) -> ComplexMatrix {
        PauliSum::from_terms(1, vec![PauliString::new(1.0, vec![p]).unwrap()])
            .unwrap()
            .to_dense()
    }

    #[test]
    fn single_qubit_matrices() {
        let y = single(Pauli::Y);
        assert_eq!(y[(0, 1)], -I);
        assert_eq!(y[(1, 0)], I);
        let z = single(Pauli::Z);
        assert_eq!(z[(1, 1)], -ONE);
    }

    #[test]
    fn dense_uses_little_endian_kron_order() {
        // "XZ": X on qubit 0 (low order), Z on qubit 1 (high order) => Z ⊗ X
        let s = PauliString::parse(1.0, "XZ").unwrap();
        let dense = PauliSum::from_terms(2, vec![s]).unwrap().to_dense();
        assert_eq!(dense, kron(&single(Pauli::Z), &single(Pauli::X)));
    }

    #[test]
    fn letter_products_match_matrices() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for a in all {
            for b in all {
                let (ph, p) = a.product(b);
                let lhs = matmul(&single(a), &single(b)).unwrap();
                assert!(lhs.approx_eq(&single(p).scale(ph), 1e-15));
            }
        }
    }

    #[test]
    fn commutators() {
        let xx = PauliSum::from_terms(2, vec![PauliString::parse(1.0, "XX").unwrap()]).unwrap();
        let zi = PauliSum::from_terms(2, vec![PauliString::parse(1.0, "ZI").unwrap()]).unwrap();
        let zz = PauliSum::from_terms(2, vec![PauliString::parse(1.0, "ZZ").unwrap()]).unwrap();
        assert!(xx.commutator(&zz).unwrap().is_zero());
        let c = xx.commutator(&zi).unwrap();
        // [XX, Z⊗I] = XZ⊗X - ZX⊗X = -2i Y⊗X
        assert_eq!(c.terms().len(), 1);
        assert_eq!(c.terms()[&vec![Pauli::Y, Pauli::X]], C64::new(0.0, -2.0));
    }

    #[test]
    fn commutator_matches_product_difference() {
        let a = PauliSum::from_terms(
            3,
            ["XYZ", "ZZI", "IXY", "YII"]
                .iter()
                .zip([0.3, -1.1, 0.7, 2.0])
                .map(|(l, c)| PauliString::parse(c, l).unwrap())
                .collect(),
        )
        .unwrap();
        let b = PauliSum::from_terms(
            3,
            ["ZXI", "IYY", "XIX"]
                .iter()
                .zip([1.3, 0.4, -0.9])
                .map(|(l, c)| PauliString::parse(c, l).unwrap())
                .collect(),
        )
        .unwrap();
        let (pa, pb) = (a.to_polynomial(), b.to_polynomial());
        let slow = pa.mul(&pb).unwrap().sub(&pb.mul(&pa).unwrap()).unwrap();
        let fast = a.commutator(&b).unwrap();
        assert!(slow.sub(&fast).unwrap().max_abs_coeff() < 1e-12);
        assert!(!fast.is_zero());
    }

    #[test]
    fn expectation_matches_dense() {
        let psi = StateVector::normalized(vec![
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.5),
            C64::new(0.7, 0.0),
            C64::new(0.1, -0.4),
        ])
        .unwrap();
        for label in ["XX", "YY", "ZZ", "XY", "YZ", "IY", "ZI", "II"] {
            let s = PauliString::parse(1.0, label).unwrap();
            let dense = PauliSum::from_terms(2, vec![s.clone()]).unwrap().to_dense();
            let hv = dense.apply(psi.amplitudes()).unwrap();
            let expected: C64 = psi.amplitudes().iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
            assert!((s.bare_expectation(&psi) - expected).norm() < 1e-14, "{label}");
            assert!(hermitian_deviation(&dense) < 1e-15);
        }
    }

    #[test]
    fn simplification_merges() {
        let s = PauliSum::from_terms(
            2,
            vec![
                PauliString::parse(1.0, "XX").unwrap(),
                PauliString::parse(-1.0, "XX").unwrap(),
                PauliString::parse(0.5, "ZI").unwrap(),
                PauliString::parse(0.5, "ZI").unwrap(),
            ],
        )
        .unwrap()
        .simplified();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].coeff, 1.0);
    }

    #[test]
    fn rejects_wrong_lengths_and_letters() {
        let mut s = PauliSum::new(2);
        assert!(s.push(PauliString::parse(1.0, "X").unwrap()).is_err());
        assert!(PauliString::parse(1.0, "XQ").is_err());
        assert!(PauliString::new(f64::INFINITY, vec![Pauli::X]).is_err());
    }
}
