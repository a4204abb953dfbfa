//! Probe scattering orders and the errors propagation loss leaks along them.
//!
//! Losing probe light after the `j`-th scatterer applies the product of the
//! generator's first `j` factors to the register. A route is scored by
//! classifying each such prefix against the code's gauge structure, and the
//! best route is found by search over permutations of the support.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

use crate::codes::{classify_with, ErrorClass, StabilizerCode};
use crate::pauli::PauliString;

/// Exhaustive search enumerates `k!` orders; beyond this it is refused.
pub const MAX_EXHAUSTIVE_SUPPORT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("order {order:?} is not a permutation of the support {support:?}")]
    NotAPermutation {
        order: Vec<usize>,
        support: Vec<usize>,
    },
    #[error("{0} is not a stabilizer generator of the code")]
    NotAGenerator(PauliString),
    #[error("support of size {0} is too large for exhaustive search")]
    SupportTooLarge(usize),
    #[error("unknown route strategy {0:?}; expected exhaustive or greedy")]
    UnknownStrategy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Greedy,
}

impl core::str::FromStr for Strategy {
    type Err = RouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(RouteError::UnknownStrategy(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub harmless: usize,
    pub correctable: usize,
    pub uncorrectable: usize,
}

impl ClassCounts {
    fn add(&mut self, class: &ErrorClass) {
        match class {
            ErrorClass::Harmless => self.harmless += 1,
            ErrorClass::Correctable { .. } => self.correctable += 1,
            ErrorClass::Uncorrectable => self.uncorrectable += 1,
        }
    }

    /// Lexicographic objective: uncorrectable first, then correctable.
    pub fn cost(&self) -> (usize, usize) {
        (self.uncorrectable, self.correctable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteReport {
    pub generator: PauliString,
    pub order: Vec<usize>,
    pub per_prefix: Vec<(PauliString, ErrorClass)>,
    pub counts: ClassCounts,
}

fn check_order(generator: &PauliString, order: &[usize]) -> Result<(), RouteError> {
    let support = generator.support();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != support {
        return Err(RouteError::NotAPermutation {
            order: order.to_vec(),
            support,
        });
    }
    Ok(())
}

/// Cumulative products of the generator's factors along `order` (1-based qubits).
pub fn prefix_operators(
    generator: &PauliString,
    order: &[usize],
) -> Result<Vec<PauliString>, RouteError> {
    check_order(generator, order)?;
    let mut acc = PauliString::identity(generator.n_qubits()).expect("valid size");
    Ok(order
        .iter()
        .map(|&q| {
            // Factors on distinct qubits commute, so no phase accrues.
            acc = acc.mul_unchecked(&generator.restrict_to(q));
            acc
        })
        .collect())
}

pub fn score_route(
    code: &StabilizerCode,
    generator: &PauliString,
    order: &[usize],
) -> Result<RouteReport, RouteError> {
    if !code.stabilizers.iter().any(|m| m.unsigned() == generator.unsigned()) {
        return Err(RouteError::NotAGenerator(*generator));
    }
    let harmless = code.harmless_basis();
    let per_prefix: Vec<_> = prefix_operators(generator, order)?
        .into_iter()
        .map(|p| {
            let class = classify_with(&harmless, &code.correctable_errors, &p);
            (p, class)
        })
        .collect();
    let mut counts = ClassCounts::default();
    for (_, c) in &per_prefix {
        counts.add(c);
    }
    Ok(RouteReport {
        generator: *generator,
        order: order.to_vec(),
        per_prefix,
        counts,
    })
}

/// Rearranges `v` into the next lexicographic permutation; false at the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Best order under the `(uncorrectable, correctable)` objective. Exhaustive
/// search is exact and breaks ties toward the lexicographically smallest order.
pub fn optimize_route(
    code: &StabilizerCode,
    generator: &PauliString,
    strategy: Strategy,
) -> Result<RouteReport, RouteError> {
    let support = generator.support();
    match strategy {
        Strategy::Exhaustive => {
            if support.len() > MAX_EXHAUSTIVE_SUPPORT {
                return Err(RouteError::SupportTooLarge(support.len()));
            }
            let mut order = support;
            let mut best = score_route(code, generator, &order)?;
            while next_permutation(&mut order) {
                let r = score_route(code, generator, &order)?;
                if r.counts.cost() < best.counts.cost() {
                    best = r;
                }
            }
            Ok(best)
        }
        Strategy::Greedy => {
            if !code.stabilizers.iter().any(|m| m.unsigned() == generator.unsigned()) {
                return Err(RouteError::NotAGenerator(*generator));
            }
            let harmless = code.harmless_basis();
            let rank = |c: &ErrorClass| match c {
                ErrorClass::Harmless => 0,
                ErrorClass::Correctable { .. } => 1,
                ErrorClass::Uncorrectable => 2,
            };
            let mut remaining = support;
            let mut order = Vec::with_capacity(remaining.len());
            let mut acc = PauliString::identity(generator.n_qubits()).expect("valid size");
            while !remaining.is_empty() {
                // First index wins ties since `remaining` stays ascending.
                let (pos, next) = remaining
                    .iter()
                    .enumerate()
                    .map(|(pos, &q)| {
                        let p = acc.mul_unchecked(&generator.restrict_to(q));
                        let c = classify_with(&harmless, &code.correctable_errors, &p);
                        (pos, (rank(&c), p))
                    })
                    .min_by_key(|(pos, (r, _))| (*r, *pos))
                    .expect("non-empty");
                acc = next.1;
                order.push(remaining.remove(pos));
            }
            score_route(code, generator, &order)
        }
    }
}

impl RouteReport {
    /// One line per prefix, e.g. `Z4Z7Z8  CORRECTABLE  (= Z4 * gauge[Z7Z8])`.
    pub fn render(&self, subsystem: bool) -> String {
        let group = if subsystem { "gauge" } else { "stabilizer" };
        let mut out = String::new();
        for (p, class) in &self.per_prefix {
            let _ = write!(out, "{p}  {}", class.tag());
            match class {
                ErrorClass::Harmless => {
                    let _ = write!(out, "  ({group} element)");
                }
                ErrorClass::Correctable { error, remainder } if remainder.is_identity() => {
                    let _ = write!(out, "  (= {error})");
                }
                ErrorClass::Correctable { error, remainder } => {
                    let _ = write!(out, "  (= {error} * {group}[{remainder}])");
                }
                ErrorClass::Uncorrectable => {}
            }
            out.push('\n');
        }
        out
    }

    pub fn order_string(&self) -> String {
        let parts: Vec<String> = self.order.iter().map(|q| alloc::format!("{q}")).collect();
        parts.join(">")
    }
}

/// Route for every stabilizer, chosen independently.
pub fn optimal_routes(
    code: &StabilizerCode,
    strategy: Strategy,
) -> Result<Vec<Vec<usize>>, RouteError> {
    code.stabilizers
        .iter()
        .map(|m| optimize_route(code, m, strategy).map(|r| r.order))
        .collect()
}
