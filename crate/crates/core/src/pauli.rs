//! Phase-tracked Pauli strings in symplectic form.
//!
//! A [`PauliString`] on `n` qubits stores an X bit-vector, a Z bit-vector and a
//! power of `i`. Qubit `k` (0-based) lives in bit `k` of both masks. The
//! operator represented is `i^phase * σ_1 ⊗ … ⊗ σ_n` where each `σ_k` is the
//! Hermitian Pauli named by the bit pair (`Y` when both bits are set), so the
//! string `"Y1"` parses to phase 0 and `X1 * Z1 = -i Y1` has phase 3.
//!
//! Textual form is an uppercase letter followed by a 1-based qubit index,
//! concatenated: `"Z2X3X4Z5"`. The empty string is the identity.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// Largest register the bit-mask representation supports.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("malformed Pauli token at byte {position} in {text:?}")]
    Malformed { text: String, position: usize },
    #[error("qubit index {index} out of range 1..={n_qubits}")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit {index} named more than once")]
    DuplicateIndex { index: usize },
    #[error("operator sizes differ: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("{0} qubits requested, at most {MAX_QUBITS} supported")]
    TooManyQubits(usize),
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn low_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self, PauliError> {
        if n_qubits > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n_qubits));
        }
        Ok(Self {
            n_qubits,
            x: 0,
            z: 0,
            phase: 0,
        })
    }

    /// Builds from raw masks; bits above `n_qubits` are rejected.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64, phase: u8) -> Result<Self, PauliError> {
        let id = Self::identity(n_qubits)?;
        let m = low_mask(n_qubits);
        if (x | z) & !m != 0 {
            let top = 64 - ((x | z) & !m).leading_zeros() as usize;
            return Err(PauliError::IndexOutOfRange {
                index: top,
                n_qubits,
            });
        }
        Ok(Self {
            x,
            z,
            phase: phase & 3,
            ..id
        })
    }

    /// Single-qubit operator on 1-based `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self, PauliError> {
        let mut s = Self::identity(n_qubits)?;
        if qubit == 0 || qubit > n_qubits {
            return Err(PauliError::IndexOutOfRange {
                index: qubit,
                n_qubits,
            });
        }
        let (xb, zb) = p.bits();
        let bit = 1u64 << (qubit - 1);
        if xb {
            s.x |= bit;
        }
        if zb {
            s.z |= bit;
        }
        Ok(s)
    }

    /// Parses text like `"Z2X3X4Z5"`; letters may appear in any index order.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self, PauliError> {
        let mut out = Self::identity(n_qubits)?;
        let bytes = text.as_bytes();
        let mut pos = 0;
        let malformed = |position| PauliError::Malformed {
            text: String::from(text),
            position,
        };
        while pos < bytes.len() {
            let p = match bytes[pos] {
                b'I' => Pauli::I,
                b'X' => Pauli::X,
                b'Y' => Pauli::Y,
                b'Z' => Pauli::Z,
                _ => return Err(malformed(pos)),
            };
            let start = pos + 1;
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end == start {
                return Err(malformed(start));
            }
            let index: usize = text[start..end].parse().map_err(|_| malformed(start))?;
            if index == 0 || index > n_qubits {
                return Err(PauliError::IndexOutOfRange { index, n_qubits });
            }
            let bit = 1u64 << (index - 1);
            if (out.x | out.z) & bit != 0 {
                return Err(PauliError::DuplicateIndex { index });
            }
            let (xb, zb) = p.bits();
            if xb {
                out.x |= bit;
            }
            if zb {
                out.z |= bit;
            }
            pos = end;
        }
        Ok(out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Power of `i` multiplying the Hermitian string.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Same operator with the phase dropped.
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    pub fn negated(self) -> Self {
        self.with_phase(self.phase + 2)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Bit mask of the qubits acted on.
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// 1-based indices of the qubits acted on, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|k| self.support_mask() >> k & 1 == 1)
            .map(|k| k + 1)
            .collect()
    }

    /// Label on 1-based `qubit`.
    pub fn get(&self, qubit: usize) -> Pauli {
        let k = qubit - 1;
        Pauli::from_bits(self.x >> k & 1 == 1, self.z >> k & 1 == 1)
    }

    /// The factor of this string on a single 1-based qubit, phase 0.
    pub fn restrict_to(&self, qubit: usize) -> Self {
        let bit = 1u64 << (qubit - 1);
        Self {
            x: self.x & bit,
            z: self.z & bit,
            phase: 0,
            ..*self
        }
    }

    /// Every factor is X or I.
    pub fn is_x_type(&self) -> bool {
        self.z == 0
    }

    pub fn is_z_type(&self) -> bool {
        self.x == 0
    }

    fn check_size(&self, other: &Self) -> Result<(), PauliError> {
        if self.n_qubits != other.n_qubits {
            Err(PauliError::SizeMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_size(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        // In X^x Z^z form each operator carries an extra i^{|x&z|}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let ph = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - (x & z).count_ones();
        Self {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: (ph % 4) as u8,
        }
    }

    /// Symplectic commutation test.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Phase-free symplectic vector, X bits low and Z bits high.
    pub(crate) fn symplectic(&self) -> u128 {
        self.x as u128 | (self.z as u128) << 64
    }
}

impl fmt::Display for PauliString {
    /// Canonical text: ascending qubit index, phase omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        for q in self.support() {
            write!(f, "{}{}", self.get(q).letter(), q)?;
        }
        Ok(())
    }
}

impl PauliString {
    /// Text including a sign prefix for phases other than 0 (`-`, `i`, `-i`).
    pub fn to_signed_string(&self) -> String {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        alloc::format!("{prefix}{self}")
    }
}

/// Incremental GF(2) basis over symplectic vectors; membership ignores phase.
#[derive(Debug, Clone, Default)]
pub struct SymplecticBasis {
    // Fully reduced: a row's pivot (leading bit) appears in no other row.
    rows: Vec<u128>,
}

impl SymplecticBasis {
    pub fn new() -> Self {
        Self::default()
    }

    fn reduce(&self, mut v: u128) -> u128 {
        for &row in &self.rows {
            let pivot = 127 - row.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= row;
            }
        }
        v
    }

    /// Adds a vector; returns false when it was already in the span.
    pub fn insert(&mut self, p: &PauliString) -> bool {
        let v = self.reduce(p.symplectic());
        if v == 0 {
            return false;
        }
        let pivot = 127 - v.leading_zeros();
        for row in &mut self.rows {
            if *row >> pivot & 1 == 1 {
                *row ^= v;
            }
        }
        self.rows.push(v);
        true
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.reduce(p.symplectic()) == 0
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// True iff `p` equals a product of `generators` up to phase.
pub fn in_group(p: &PauliString, generators: &[PauliString]) -> Result<bool, PauliError> {
    let mut basis = SymplecticBasis::new();
    for g in generators {
        p.check_size(g)?;
        basis.insert(g);
    }
    Ok(basis.contains(p))
}

/// Parses with the register size inferred from the largest index present.
impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut max = 0usize;
        let mut digits = 0usize;
        for b in s.bytes() {
            if b.is_ascii_digit() {
                digits = digits.saturating_mul(10).saturating_add((b - b'0') as usize);
            } else {
                max = max.max(digits);
                digits = 0;
            }
        }
        max = max.max(digits);
        Self::parse(s, max.min(MAX_QUBITS))
    }
}
