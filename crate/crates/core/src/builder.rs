//! Master-equation model construction over the register ⊗ relay space.
//!
//! Every operator is kept symbolically as a scalar prefactor times a short sum
//! of [`ModelTerm`]s (Pauli or `I ± M` on the register, tensored with at most
//! one relay operator per relay). The numeric kernels in [`crate::ops`] and the
//! dense oracle in [`crate::dense`] both start from this form.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use num_complex::Complex64;
use thiserror::Error;

use crate::codes::{StabilizerCode, SyndromeVector};
use crate::pauli::{Pauli, PauliString};
use crate::routing::{self, RouteError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("stabilizer index {index} out of range 1..={count}")]
    StabilizerIndex { index: usize, count: usize },
    #[error("{name} must be finite and non-negative, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("errors {first} and {second} share syndrome {syndrome} but are not gauge-equivalent")]
    AmbiguousSyndrome {
        first: PauliString,
        second: PauliString,
        syndrome: SyndromeVector,
    },
    #[error("{routes} routes supplied for {stabilizers} stabilizers")]
    RouteCount { routes: usize, stabilizers: usize },
    #[error("unknown noise kind {0:?}; expected bit_flip or spontaneous")]
    UnknownNoise(String),
    #[error(transparent)]
    Route(#[from] RouteError),
}

/// Two-level relay operator in the `{g, h}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelayOp {
    /// `|h><g|`
    SigmaPlus,
    /// `|g><h|`
    SigmaMinus,
    ProjG,
    ProjH,
}

impl RelayOp {
    /// `(output, input)` relay bits of the single matrix element, `g = 0`, `h = 1`.
    pub fn element(self) -> (bool, bool) {
        match self {
            RelayOp::SigmaPlus => (true, false),
            RelayOp::SigmaMinus => (false, true),
            RelayOp::ProjG => (false, false),
            RelayOp::ProjH => (true, true),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            RelayOp::SigmaPlus => "sigma+",
            RelayOp::SigmaMinus => "sigma-",
            RelayOp::ProjG => "Pg",
            RelayOp::ProjH => "Ph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelayFactor {
    /// 1-based relay index; relay `n` reads stabilizer `n`.
    pub relay: usize,
    pub op: RelayOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterFactor {
    Pauli(PauliString),
    /// `I + M`
    IdPlus(PauliString),
    /// `I - M`
    IdMinus(PauliString),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTerm {
    pub coefficient: Complex64,
    pub register: RegisterFactor,
    /// Sorted by relay index, one entry per relay at most.
    pub relays: Vec<RelayFactor>,
}

impl ModelTerm {
    fn new(coefficient: Complex64, register: RegisterFactor, relays: Vec<RelayFactor>) -> Self {
        Self {
            coefficient,
            register,
            relays,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Feedback,
    Probe,
    Noise,
    RelayNoise,
    Loss,
}

/// `scale * Σ terms`, with `symbol` naming the scale in dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub kind: OperatorKind,
    pub symbol: &'static str,
    pub scale: f64,
    pub terms: Vec<ModelTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    BitFlip,
    Spontaneous,
}

impl NoiseKind {
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::BitFlip => "bit_flip",
            NoiseKind::Spontaneous => "spontaneous",
        }
    }
}

impl core::str::FromStr for NoiseKind {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bit_flip" => Ok(NoiseKind::BitFlip),
            "spontaneous" => Ok(NoiseKind::Spontaneous),
            other => Err(BuildError::UnknownNoise(other.into())),
        }
    }
}

/// Rates in units where the decoherence rate sets the time scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub alpha: f64,
    pub theta: f64,
    pub gamma: f64,
    /// Optional relay dephasing rate; 0 disables it.
    pub relay_dephasing: f64,
}

impl ModelParams {
    fn validate(&self) -> Result<(), BuildError> {
        for (name, value) in [
            ("Omega", self.omega),
            ("alpha", self.alpha),
            ("theta", self.theta),
            ("Gamma", self.gamma),
            ("relay dephasing", self.relay_dephasing),
        ] {
            check_rate(name, value)?;
        }
        Ok(())
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<(), BuildError> {
    if !value.is_finite() || value < 0.0 {
        return Err(BuildError::InvalidRate { name, value });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryModel {
    pub code_name: String,
    pub n_register: usize,
    pub n_relays: usize,
    pub params: ModelParams,
    pub noise: NoiseKind,
    pub hamiltonian: Vec<Operator>,
    pub lindblads: Vec<Operator>,
}

impl MemoryModel {
    pub fn dimension(&self) -> usize {
        1usize << (self.n_register + self.n_relays)
    }

    /// One operator per line: `H<k> = ...` for Hamiltonian terms, then `L<k> = ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, op) in self.hamiltonian.iter().enumerate() {
            let _ = writeln!(out, "H{} = {}", k + 1, op);
        }
        for (k, op) in self.lindblads.iter().enumerate() {
            let _ = writeln!(out, "L{} = {}", k + 1, op);
        }
        out
    }
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MINUS_ONE: Complex64 = Complex64::new(-1.0, 0.0);

/// `(L_odd, L_even)` for 1-based stabilizer `n`.
pub fn build_probe_lindblads(
    code: &StabilizerCode,
    n: usize,
    alpha: f64,
) -> Result<(Operator, Operator), BuildError> {
    if n == 0 || n > code.n_stabilizers() {
        return Err(BuildError::StabilizerIndex {
            index: n,
            count: code.n_stabilizers(),
        });
    }
    check_rate("alpha", alpha)?;
    let m = code.stabilizers[n - 1];
    let relay = |op| alloc::vec![RelayFactor { relay: n, op }];
    let odd = Operator {
        kind: OperatorKind::Probe,
        symbol: "alpha",
        scale: alpha,
        terms: alloc::vec![
            ModelTerm::new(ONE, RegisterFactor::IdPlus(m), relay(RelayOp::SigmaPlus)),
            ModelTerm::new(MINUS_ONE, RegisterFactor::IdMinus(m), relay(RelayOp::ProjG)),
        ],
    };
    let even = Operator {
        kind: OperatorKind::Probe,
        symbol: "alpha",
        scale: alpha,
        terms: alloc::vec![
            ModelTerm::new(ONE, RegisterFactor::IdMinus(m), relay(RelayOp::SigmaMinus)),
            ModelTerm::new(ONE, RegisterFactor::IdPlus(m), relay(RelayOp::ProjH)),
        ],
    };
    Ok((odd, even))
}

/// Relay projector pattern selecting `syndrome` on the listed (0-based) generators.
fn syndrome_projector(syndrome: &SyndromeVector, generators: &[usize]) -> Vec<RelayFactor> {
    generators
        .iter()
        .map(|&g| RelayFactor {
            relay: g + 1,
            op: if syndrome.flipped(g) {
                RelayOp::ProjG
            } else {
                RelayOp::ProjH
            },
        })
        .collect()
}

fn error_type(e: &PauliString) -> Pauli {
    match (e.is_x_type(), e.is_z_type()) {
        (true, false) => Pauli::X,
        (false, true) => Pauli::Z,
        _ => Pauli::Y,
    }
}

/// Feedback terms `Omega * E * F[E]`, one per gauge-equivalence class of
/// designed correctable errors, ordered X, Z, Y as listed by the code.
pub fn build_feedback_hamiltonian(
    code: &StabilizerCode,
    omega: f64,
) -> Result<Vec<Operator>, BuildError> {
    check_rate("Omega", omega)?;
    let all: Vec<usize> = (0..code.n_stabilizers()).collect();
    let partition = code.is_separable();
    let harmless = code.harmless_basis();

    let mut kept: Vec<(PauliString, Vec<usize>, SyndromeVector)> = Vec::new();
    for kind in [Pauli::X, Pauli::Z, Pauli::Y] {
        // (restricted syndrome) -> first error seen with it
        let mut seen: BTreeMap<SyndromeVector, PauliString> = BTreeMap::new();
        for e in code.correctable_errors.iter().filter(|e| error_type(e) == kind) {
            let generators = match (&partition, kind) {
                (Some(p), Pauli::X) => p.locate_x.clone(),
                (Some(p), Pauli::Z) => p.locate_z.clone(),
                // Y errors are handled as an X and a Z correction.
                (Some(_), _) => continue,
                (None, _) => all.clone(),
            };
            let full = code.syndrome(e).expect("catalog sizes agree");
            let restricted = full.restrict(&generators);
            if restricted.is_trivial() {
                if harmless.contains(e) {
                    continue;
                }
                return Err(BuildError::AmbiguousSyndrome {
                    first: PauliString::identity(code.n_qubits).expect("valid size"),
                    second: *e,
                    syndrome: restricted,
                });
            }
            if let Some(first) = seen.get(&restricted) {
                if harmless.contains(&first.mul_unchecked(e)) {
                    continue;
                }
                return Err(BuildError::AmbiguousSyndrome {
                    first: *first,
                    second: *e,
                    syndrome: restricted,
                });
            }
            seen.insert(restricted, *e);
            kept.push((*e, generators, full));
        }
    }
    Ok(kept
        .into_iter()
        .map(|(e, generators, full)| Operator {
            kind: OperatorKind::Feedback,
            symbol: "Omega",
            scale: omega,
            terms: alloc::vec![ModelTerm::new(
                ONE,
                RegisterFactor::Pauli(e),
                syndrome_projector(&full, &generators),
            )],
        })
        .collect())
}

/// `sqrt(Gamma) X_n` or `sqrt(Gamma) (X_n - i Y_n)` for every register qubit.
pub fn build_decoherence(
    kind: NoiseKind,
    gamma: f64,
    n_qubits: usize,
) -> Result<Vec<Operator>, BuildError> {
    check_rate("Gamma", gamma)?;
    let scale = libm::sqrt(gamma);
    let single = |q, p| PauliString::single(n_qubits, q, p).expect("qubit in range");
    Ok((1..=n_qubits)
        .map(|q| {
            let terms = match kind {
                NoiseKind::BitFlip => {
                    alloc::vec![ModelTerm::new(ONE, RegisterFactor::Pauli(single(q, Pauli::X)), Vec::new())]
                }
                NoiseKind::Spontaneous => alloc::vec![
                    ModelTerm::new(ONE, RegisterFactor::Pauli(single(q, Pauli::X)), Vec::new()),
                    ModelTerm::new(
                        Complex64::new(0.0, -1.0),
                        RegisterFactor::Pauli(single(q, Pauli::Y)),
                        Vec::new()
                    ),
                ],
            };
            Operator {
                kind: OperatorKind::Noise,
                symbol: "sqrt(Gamma)",
                scale,
                terms,
            }
        })
        .collect())
}

/// `sqrt(kappa) (Ph - Pg)` on each relay.
pub fn build_relay_dephasing(
    kappa: f64,
    n_register: usize,
    n_relays: usize,
) -> Result<Vec<Operator>, BuildError> {
    check_rate("relay dephasing", kappa)?;
    let id = PauliString::identity(n_register).expect("valid size");
    Ok((1..=n_relays)
        .map(|r| Operator {
            kind: OperatorKind::RelayNoise,
            symbol: "sqrt(kappa)",
            scale: libm::sqrt(kappa),
            terms: alloc::vec![
                ModelTerm::new(
                    ONE,
                    RegisterFactor::Pauli(id),
                    alloc::vec![RelayFactor { relay: r, op: RelayOp::ProjH }]
                ),
                ModelTerm::new(
                    MINUS_ONE,
                    RegisterFactor::Pauli(id),
                    alloc::vec![RelayFactor { relay: r, op: RelayOp::ProjG }]
                ),
            ],
        })
        .collect())
}

/// Propagation-loss operators: the `j`-th is `alpha*theta` times the product of
/// the generator's factors on the first `j` qubits of the scattering order.
pub fn build_loss_lindblads(
    generator: &PauliString,
    order: &[usize],
    alpha: f64,
    theta: f64,
) -> Result<Vec<Operator>, BuildError> {
    check_rate("alpha", alpha)?;
    check_rate("theta", theta)?;
    Ok(routing::prefix_operators(generator, order)?
        .into_iter()
        .map(|p| Operator {
            kind: OperatorKind::Loss,
            symbol: "alpha*theta",
            scale: alpha * theta,
            terms: alloc::vec![ModelTerm::new(ONE, RegisterFactor::Pauli(p), Vec::new())],
        })
        .collect())
}

/// Full model: feedback Hamiltonian (omitted when `omega == 0`), `2N` probe
/// Lindblads, `Q` noise Lindblads, optional relay dephasing, and loss
/// Lindblads along `routes` (omitted when `theta == 0`).
pub fn assemble_model(
    code: &StabilizerCode,
    params: ModelParams,
    noise: NoiseKind,
    routes: &[Vec<usize>],
) -> Result<MemoryModel, BuildError> {
    params.validate()?;
    if routes.len() != code.n_stabilizers() {
        return Err(BuildError::RouteCount {
            routes: routes.len(),
            stabilizers: code.n_stabilizers(),
        });
    }
    let hamiltonian = if params.omega > 0.0 {
        build_feedback_hamiltonian(code, params.omega)?
    } else {
        Vec::new()
    };
    let mut lindblads = Vec::new();
    for n in 1..=code.n_stabilizers() {
        let (odd, even) = build_probe_lindblads(code, n, params.alpha)?;
        lindblads.push(odd);
        lindblads.push(even);
    }
    lindblads.extend(build_decoherence(noise, params.gamma, code.n_qubits)?);
    if params.relay_dephasing > 0.0 {
        lindblads.extend(build_relay_dephasing(
            params.relay_dephasing,
            code.n_qubits,
            code.n_stabilizers(),
        )?);
    }
    let mut loss = Vec::new();
    for (m, order) in code.stabilizers.iter().zip(routes) {
        // Validate routes even when lossless so bad configs fail early.
        loss.extend(build_loss_lindblads(m, order, params.alpha, params.theta)?);
    }
    if params.theta > 0.0 {
        lindblads.extend(loss);
    }
    Ok(MemoryModel {
        code_name: code.name.clone(),
        n_register: code.n_qubits,
        n_relays: code.n_stabilizers(),
        params,
        noise,
        hamiltonian,
        lindblads,
    })
}

impl fmt::Display for ModelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let relays = self
            .relays
            .iter()
            .map(|r| alloc::format!("{}[R{}]", r.op.symbol(), r.relay));
        let mut parts: Vec<String> = Vec::new();
        match self.register {
            RegisterFactor::Pauli(p) => {
                if !p.is_identity() || self.relays.is_empty() {
                    parts.push(p.to_string());
                }
                parts.extend(relays);
            }
            RegisterFactor::IdPlus(m) => {
                parts.extend(relays);
                parts.push(alloc::format!("(I + {m})"));
            }
            RegisterFactor::IdMinus(m) => {
                parts.extend(relays);
                parts.push(alloc::format!("(I - {m})"));
            }
        }
        f.write_str(&parts.join("*"))
    }
}

fn coefficient_prefix(c: Complex64, first: bool) -> &'static str {
    let (sign, imag) = if c.im == 0.0 {
        (c.re < 0.0, false)
    } else {
        (c.im < 0.0, true)
    };
    match (first, sign, imag) {
        (true, false, false) => "",
        (true, true, false) => "-",
        (true, false, true) => "i*",
        (true, true, true) => "-i*",
        (false, false, false) => " + ",
        (false, true, false) => " - ",
        (false, false, true) => " + i*",
        (false, true, true) => " - i*",
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [t] = self.terms.as_slice() {
            if t.coefficient == ONE {
                return write!(f, "{}*{}", self.symbol, t);
            }
        }
        write!(f, "{}*( ", self.symbol)?;
        for (k, t) in self.terms.iter().enumerate() {
            write!(f, "{}{}", coefficient_prefix(t.coefficient, k == 0), t)?;
        }
        f.write_str(" )")
    }
}
