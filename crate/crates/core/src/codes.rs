//! Stabilizer and subsystem code catalog, syndromes and error classification.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::pauli::{Pauli, PauliError, PauliString, SymplecticBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("unknown logical state {0:?}; expected zero, one, plus or minus")]
    UnknownLogicalState(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Names accepted by [`catalog_get`].
pub const CATALOG: [&str; 4] = ["five_qubit", "steane_seven", "bacon_shor_nine", "bitflip_three"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerCode {
    pub name: String,
    pub n_qubits: usize,
    /// Generator `n` (0-based here) is read out by relay `n + 1`.
    pub stabilizers: Vec<PauliString>,
    /// Empty for codes without a gauge subsystem.
    pub gauge_generators: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    /// Designed single-qubit error set, ordered X, Z, Y by qubit.
    pub correctable_errors: Vec<PauliString>,
    /// Geometrically simple probe scattering order per stabilizer (1-based qubits).
    pub naive_routes: Vec<Vec<usize>>,
}

fn strings(n: usize, list: &[&str]) -> Vec<PauliString> {
    list.iter()
        .map(|s| PauliString::parse(s, n).expect("catalog literal"))
        .collect()
}

fn single_qubit_errors(n: usize, kinds: &[Pauli]) -> Vec<PauliString> {
    let mut out = Vec::new();
    for &k in kinds {
        for q in 1..=n {
            out.push(PauliString::single(n, q, k).expect("catalog literal"));
        }
    }
    out
}

fn descending_routes(stabilizers: &[PauliString]) -> Vec<Vec<usize>> {
    stabilizers
        .iter()
        .map(|s| s.support().into_iter().rev().collect())
        .collect()
}

pub fn catalog_get(name: &str) -> Result<StabilizerCode, CodeError> {
    let code = match name {
        "five_qubit" => {
            let n = 5;
            let stabilizers = strings(n, &["Z2X3X4Z5", "Z1Z3X4X5", "X1Z2Z4X5", "X1X2Z3Z5"]);
            StabilizerCode {
                name: name.into(),
                n_qubits: n,
                naive_routes: descending_routes(&stabilizers),
                stabilizers,
                gauge_generators: Vec::new(),
                logical_x: PauliString::parse("X1X2X3X4X5", n)?,
                logical_z: PauliString::parse("Z1Z2Z3Z4Z5", n)?,
                correctable_errors: single_qubit_errors(n, &[Pauli::X, Pauli::Z, Pauli::Y]),
            }
        }
        "steane_seven" => {
            let n = 7;
            let stabilizers = strings(
                n,
                &[
                    "X1X2X3X4", "X1X2X5X6", "X1X3X5X7", "Z1Z2Z3Z4", "Z1Z2Z5Z6", "Z1Z3Z5Z7",
                ],
            );
            StabilizerCode {
                name: name.into(),
                n_qubits: n,
                naive_routes: descending_routes(&stabilizers),
                stabilizers,
                gauge_generators: Vec::new(),
                logical_x: PauliString::parse("X1X2X3X4X5X6X7", n)?,
                logical_z: PauliString::parse("Z1Z2Z3Z4Z5Z6Z7", n)?,
                correctable_errors: single_qubit_errors(n, &[Pauli::X, Pauli::Z, Pauli::Y]),
            }
        }
        "bacon_shor_nine" => {
            // 3x3 grid, qubits numbered row-major. Z gauges pair horizontal
            // neighbours, X gauges vertical ones.
            let n = 9;
            StabilizerCode {
                name: name.into(),
                n_qubits: n,
                stabilizers: strings(
                    n,
                    &["X1X2X3X4X5X6", "X4X5X6X7X8X9", "Z1Z2Z4Z5Z7Z8", "Z2Z3Z5Z6Z8Z9"],
                ),
                gauge_generators: strings(
                    n,
                    &[
                        "Z1Z2", "Z2Z3", "Z4Z5", "Z5Z6", "Z7Z8", "Z8Z9", "X1X4", "X4X7", "X2X5",
                        "X5X8", "X3X6", "X6X9",
                    ],
                ),
                logical_x: PauliString::parse("X1X2X3", n)?,
                logical_z: PauliString::parse("Z1Z4Z7", n)?,
                correctable_errors: single_qubit_errors(n, &[Pauli::X, Pauli::Z, Pauli::Y]),
                // Up one column (row) and back down the neighbouring one.
                naive_routes: alloc::vec![
                    alloc::vec![6, 5, 4, 1, 2, 3],
                    alloc::vec![9, 8, 7, 4, 5, 6],
                    alloc::vec![8, 5, 2, 1, 4, 7],
                    alloc::vec![9, 6, 3, 2, 5, 8],
                ],
            }
        }
        "bitflip_three" => {
            let n = 3;
            let stabilizers = strings(n, &["Z1Z2", "Z2Z3"]);
            StabilizerCode {
                name: name.into(),
                n_qubits: n,
                naive_routes: descending_routes(&stabilizers),
                stabilizers,
                gauge_generators: Vec::new(),
                logical_x: PauliString::parse("X1X2X3", n)?,
                logical_z: PauliString::parse("Z1Z2Z3", n)?,
                correctable_errors: single_qubit_errors(n, &[Pauli::X]),
            }
        }
        other => return Err(CodeError::UnknownCode(other.into())),
    };
    Ok(code)
}

/// Stabilizer eigenvalue pattern; `true` marks a -1 entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SyndromeVector(Vec<bool>);

impl SyndromeVector {
    pub fn from_signs(signs: &[i8]) -> Self {
        Self(signs.iter().map(|&s| s < 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Eigenvalue of generator `n` (0-based): +1 or -1.
    pub fn value(&self, n: usize) -> i8 {
        if self.0[n] {
            -1
        } else {
            1
        }
    }

    pub fn values(&self) -> Vec<i8> {
        (0..self.len()).map(|n| self.value(n)).collect()
    }

    pub fn flipped(&self, n: usize) -> bool {
        self.0[n]
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&f| !f)
    }

    /// Keeps only the listed generator positions.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        Self(positions.iter().map(|&p| self.0[p]).collect())
    }
}

impl fmt::Display for SyndromeVector {
    /// `+ + - ...` with `+` for eigenvalue +1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &flip) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if flip { "-" } else { "+" })?;
        }
        Ok(())
    }
}

/// Partition of a separable code's generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparablePartition {
    /// Z-type generators, whose syndromes locate X errors (0-based indices).
    pub locate_x: Vec<usize>,
    /// X-type generators, whose syndromes locate Z errors.
    pub locate_z: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorClass {
    /// Element of the gauge/stabilizer group.
    Harmless,
    /// `operator = error * remainder` (up to phase) with `error` designed-correctable
    /// and `remainder` harmless.
    Correctable {
        error: PauliString,
        remainder: PauliString,
    },
    Uncorrectable,
}

impl ErrorClass {
    pub fn tag(&self) -> &'static str {
        match self {
            ErrorClass::Harmless => "HARMLESS",
            ErrorClass::Correctable { .. } => "CORRECTABLE",
            ErrorClass::Uncorrectable => "UNCORRECTABLE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalState {
    Zero,
    One,
    Plus,
    Minus,
}

impl LogicalState {
    pub fn label(self) -> &'static str {
        match self {
            LogicalState::Zero => "zero",
            LogicalState::One => "one",
            LogicalState::Plus => "plus",
            LogicalState::Minus => "minus",
        }
    }
}

impl core::str::FromStr for LogicalState {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(LogicalState::Zero),
            "one" => Ok(LogicalState::One),
            "plus" => Ok(LogicalState::Plus),
            "minus" => Ok(LogicalState::Minus),
            other => Err(CodeError::UnknownLogicalState(other.into())),
        }
    }
}

/// Product of commuting projectors `(I + P_k)/2`; signs live in each `P_k`'s phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalProjector {
    pub n_qubits: usize,
    pub factors: Vec<PauliString>,
}

impl LogicalProjector {
    /// Trace over the register, `2^(n - #factors)` for independent factors.
    pub fn rank(&self) -> usize {
        let mut b = SymplecticBasis::new();
        for f in &self.factors {
            b.insert(f);
        }
        1usize << (self.n_qubits - b.rank())
    }
}

impl StabilizerCode {
    pub fn n_stabilizers(&self) -> usize {
        self.stabilizers.len()
    }

    pub fn is_subsystem(&self) -> bool {
        !self.gauge_generators.is_empty()
    }

    fn check(&self, p: &PauliString) -> Result<(), CodeError> {
        if p.n_qubits() != self.n_qubits {
            return Err(PauliError::SizeMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            }
            .into());
        }
        Ok(())
    }

    pub fn syndrome(&self, error: &PauliString) -> Result<SyndromeVector, CodeError> {
        self.check(error)?;
        Ok(SyndromeVector(
            self.stabilizers
                .iter()
                .map(|m| !m.commutes_unchecked(error))
                .collect(),
        ))
    }

    /// Rows X1..XQ, Z1..ZQ, Y1..YQ.
    pub fn syndrome_table(&self) -> Vec<(String, SyndromeVector)> {
        let mut rows = Vec::with_capacity(3 * self.n_qubits);
        for (kind, letter) in [(Pauli::X, 'X'), (Pauli::Z, 'Z'), (Pauli::Y, 'Y')] {
            for q in 1..=self.n_qubits {
                let e = PauliString::single(self.n_qubits, q, kind).expect("in range");
                let s = self.syndrome(&e).expect("sizes match");
                rows.push((alloc::format!("{letter}{q}"), s));
            }
        }
        rows
    }

    /// Fixture-format rendering, one `X1 + + + - - -` line per row.
    pub fn render_syndrome_table(&self) -> String {
        let mut out = String::new();
        for (label, s) in self.syndrome_table() {
            out.push_str(&alloc::format!("{label} {s}\n"));
        }
        out
    }

    pub fn is_separable(&self) -> Option<SeparablePartition> {
        let mut locate_x = Vec::new();
        let mut locate_z = Vec::new();
        for (i, m) in self.stabilizers.iter().enumerate() {
            if m.is_z_type() {
                locate_x.push(i);
            } else if m.is_x_type() {
                locate_z.push(i);
            } else {
                return None;
            }
        }
        Some(SeparablePartition { locate_x, locate_z })
    }

    /// GF(2) basis of the gauge group (stabilizers included).
    pub fn harmless_basis(&self) -> SymplecticBasis {
        let mut b = SymplecticBasis::new();
        for g in self.stabilizers.iter().chain(&self.gauge_generators) {
            b.insert(g);
        }
        b
    }

    pub fn is_harmless(&self, p: &PauliString) -> Result<bool, CodeError> {
        self.check(p)?;
        Ok(self.harmless_basis().contains(p))
    }

    pub fn classify_operator(&self, p: &PauliString) -> Result<ErrorClass, CodeError> {
        self.check(p)?;
        Ok(classify_with(&self.harmless_basis(), &self.correctable_errors, p))
    }

    pub fn logical_projector(&self, state: LogicalState) -> LogicalProjector {
        let mut factors = self.stabilizers.clone();
        factors.push(match state {
            LogicalState::Zero => self.logical_z,
            LogicalState::One => self.logical_z.negated(),
            LogicalState::Plus => self.logical_x,
            LogicalState::Minus => self.logical_x.negated(),
        });
        LogicalProjector {
            n_qubits: self.n_qubits,
            factors,
        }
    }

    /// Checks the structural invariants; returns a description of the first failure.
    pub fn validate(&self) -> Result<(), String> {
        let all = self
            .stabilizers
            .iter()
            .chain(&self.gauge_generators)
            .chain([&self.logical_x, &self.logical_z])
            .chain(&self.correctable_errors);
        for p in all {
            if p.n_qubits() != self.n_qubits {
                return Err(alloc::format!("{p} has the wrong register size"));
            }
        }
        for (i, a) in self.stabilizers.iter().enumerate() {
            for b in &self.stabilizers[i + 1..] {
                if !a.commutes_unchecked(b) {
                    return Err(alloc::format!("stabilizers {a} and {b} anticommute"));
                }
            }
            for g in &self.gauge_generators {
                if !a.commutes_unchecked(g) {
                    return Err(alloc::format!("gauge {g} anticommutes with stabilizer {a}"));
                }
            }
            for l in [&self.logical_x, &self.logical_z] {
                if !a.commutes_unchecked(l) {
                    return Err(alloc::format!("logical {l} anticommutes with stabilizer {a}"));
                }
            }
        }
        for g in &self.gauge_generators {
            for l in [&self.logical_x, &self.logical_z] {
                if !g.commutes_unchecked(l) {
                    return Err(alloc::format!("logical {l} anticommutes with gauge {g}"));
                }
            }
        }
        if self.logical_x.commutes_unchecked(&self.logical_z) {
            return Err("logical X and Z commute".into());
        }
        let harmless = self.harmless_basis();
        for (i, a) in self.correctable_errors.iter().enumerate() {
            for b in &self.correctable_errors[i + 1..] {
                let same = self.syndrome(a).ok() == self.syndrome(b).ok();
                if same && !harmless.contains(&a.mul_unchecked(b)) {
                    return Err(alloc::format!("{a} and {b} share a syndrome"));
                }
            }
        }
        if self.naive_routes.len() != self.stabilizers.len() {
            return Err("one naive route per stabilizer required".into());
        }
        Ok(())
    }
}

pub(crate) fn classify_with(
    harmless: &SymplecticBasis,
    correctable: &[PauliString],
    p: &PauliString,
) -> ErrorClass {
    if harmless.contains(p) {
        return ErrorClass::Harmless;
    }
    // Several designed errors can explain `p` when gauges are present; report
    // the one with the lightest remainder.
    correctable
        .iter()
        .map(|e| (e, p.mul_unchecked(e)))
        .filter(|(_, rest)| harmless.contains(rest))
        .min_by_key(|(_, rest)| rest.weight())
        .map_or(ErrorClass::Uncorrectable, |(e, rest)| ErrorClass::Correctable {
            error: *e,
            remainder: rest.unsigned(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> PauliString {
        PauliString::parse(s, n).unwrap()
    }

    #[test]
    fn catalog_shapes() {
        let s = catalog_get("steane_seven").unwrap();
        assert_eq!(s.n_stabilizers(), 6);
        assert_eq!(s.stabilizers[0], p("X1X2X3X4", 7));
        let f = catalog_get("five_qubit").unwrap();
        assert_eq!(f.n_stabilizers(), 4);
        assert_eq!(f.stabilizers[0], p("Z2X3X4Z5", 5));
        let b = catalog_get("bacon_shor_nine").unwrap();
        assert!(b.stabilizers.contains(&p("Z1Z2Z4Z5Z7Z8", 9)));
        assert!(b.gauge_generators.contains(&p("Z7Z8", 9)));
        assert!(matches!(catalog_get("six_qubit"), Err(CodeError::UnknownCode(_))));
        for name in CATALOG {
            catalog_get(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn syndrome_examples() {
        let s = catalog_get("steane_seven").unwrap();
        assert_eq!(s.syndrome(&p("X1", 7)).unwrap().values(), [1, 1, 1, -1, -1, -1]);
        assert!(s.syndrome(&p("", 7)).unwrap().is_trivial());
        let f = catalog_get("five_qubit").unwrap();
        assert_eq!(f.syndrome(&p("Y5", 5)).unwrap().values(), [-1, -1, -1, -1]);
        assert!(f.syndrome(&p("X1", 7)).is_err());
    }

    #[test]
    fn bitflip_x_rows() {
        let c = catalog_get("bitflip_three").unwrap();
        let t = c.syndrome_table();
        assert_eq!(t.len(), 9);
        assert_eq!(t[0].1.values(), [-1, 1]);
        assert_eq!(t[1].1.values(), [-1, -1]);
        assert_eq!(t[2].1.values(), [1, -1]);
    }

    #[test]
    fn separability() {
        let s = catalog_get("steane_seven").unwrap().is_separable().unwrap();
        assert_eq!(s.locate_x, [3, 4, 5]);
        assert_eq!(s.locate_z, [0, 1, 2]);
        assert!(catalog_get("five_qubit").unwrap().is_separable().is_none());
        let b = catalog_get("bacon_shor_nine").unwrap().is_separable().unwrap();
        assert_eq!(b.locate_x, [2, 3]);
        assert_eq!(b.locate_z, [0, 1]);
    }

    #[test]
    fn classification() {
        let b = catalog_get("bacon_shor_nine").unwrap();
        assert_eq!(b.classify_operator(&p("Z7Z8", 9)).unwrap(), ErrorClass::Harmless);
        assert_eq!(
            b.classify_operator(&p("Z4Z7Z8", 9)).unwrap(),
            ErrorClass::Correctable {
                error: p("Z4", 9),
                remainder: p("Z7Z8", 9)
            }
        );
        assert_eq!(b.classify_operator(&p("Z5Z8", 9)).unwrap(), ErrorClass::Uncorrectable);
        let f = catalog_get("five_qubit").unwrap();
        assert_eq!(f.classify_operator(&p("X4Z5", 5)).unwrap(), ErrorClass::Uncorrectable);
        // Weight three, but one Z2 away from the first generator.
        assert_eq!(
            f.classify_operator(&p("X3X4Z5", 5)).unwrap(),
            ErrorClass::Correctable {
                error: p("Z2", 5),
                remainder: p("Z2X3X4Z5", 5)
            }
        );
    }

    #[test]
    fn projector_ranks() {
        let z = LogicalState::Zero;
        assert_eq!(catalog_get("steane_seven").unwrap().logical_projector(z).rank(), 1);
        assert_eq!(catalog_get("five_qubit").unwrap().logical_projector(z).rank(), 1);
        assert_eq!(catalog_get("bitflip_three").unwrap().logical_projector(z).rank(), 1);
        assert_eq!(catalog_get("bacon_shor_nine").unwrap().logical_projector(z).rank(), 16);
    }
}
