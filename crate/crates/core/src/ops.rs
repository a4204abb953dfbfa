//! Matrix-free operators on the joint register ⊗ relay basis.
//!
//! Basis index layout: register qubit 1 is the most significant bit, relay `N`
//! the least significant; relay bit 0 is `g`, 1 is `h`.
//!
//! Every operator in the model is a sum of [`Monomial`]s. A monomial maps basis
//! state `i` satisfying `i & mask == req` to
//! `j = ((i ^ flip) & !mask) | set` with amplitude `coeff * (-1)^popcount(i & sign)`,
//! i.e. `coeff * X^flip Z^sign` on the register times a single-element relay
//! matrix `|set><req|`. Products and adjoints of monomials are monomials, so
//! `L†L` can be formed and simplified symbolically.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::builder::{ModelTerm, Operator, RegisterFactor};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_register: usize,
    pub n_relays: usize,
}

impl Layout {
    pub fn new(n_register: usize, n_relays: usize) -> Self {
        Self {
            n_register,
            n_relays,
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n_register + self.n_relays
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_bits()
    }

    /// Basis bit of 0-based register qubit `k`.
    pub fn register_bit(&self, k: usize) -> u32 {
        (self.n_relays + self.n_register - 1 - k) as u32
    }

    /// Basis bit of 1-based relay `n`.
    pub fn relay_bit(&self, n: usize) -> u32 {
        (self.n_relays - n) as u32
    }

    /// Moves a register-qubit mask (bit `k` = qubit `k+1`) into basis bits.
    pub fn register_mask(&self, qubits: u64) -> u64 {
        let mut out = 0u64;
        let mut m = qubits;
        while m != 0 {
            let k = m.trailing_zeros() as usize;
            out |= 1u64 << self.register_bit(k);
            m &= m - 1;
        }
        out
    }

    pub fn relay_mask(&self) -> u64 {
        (1u64 << self.n_relays) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub flip: u64,
    pub sign: u64,
    pub mask: u64,
    pub req: u64,
    pub set: u64,
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl Monomial {
    pub fn identity(coeff: Complex64) -> Self {
        Self {
            coeff,
            flip: 0,
            sign: 0,
            mask: 0,
            req: 0,
            set: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.flip == 0 && self.sign == 0 && self.mask == 0
    }

    /// Register Pauli string as a monomial with no relay part.
    pub fn from_pauli(layout: &Layout, p: &PauliString, coeff: Complex64) -> Self {
        // Hermitian Y = i X Z, so the X^x Z^z form picks up i^{|x&z|}.
        let extra = p.phase() as u32 + (p.x_bits() & p.z_bits()).count_ones();
        Self {
            coeff: coeff * i_pow(extra),
            flip: layout.register_mask(p.x_bits()),
            sign: layout.register_mask(p.z_bits()),
            mask: 0,
            req: 0,
            set: 0,
        }
    }

    /// `self * other` (apply `other` first), or `None` when the relay parts annihilate.
    pub fn mul(&self, other: &Self) -> Option<Self> {
        let overlap = self.mask & other.mask;
        if (other.set & overlap) != (self.req & overlap) {
            return None;
        }
        let swap = (self.sign & other.flip).count_ones() % 2 == 1;
        let mut coeff = self.coeff * other.coeff;
        if swap {
            coeff = -coeff;
        }
        Some(Self {
            coeff,
            flip: self.flip ^ other.flip,
            sign: self.sign ^ other.sign,
            mask: self.mask | other.mask,
            req: other.req | (self.req & !other.mask),
            set: self.set | (other.set & !self.mask),
        })
    }

    pub fn adjoint(&self) -> Self {
        let mut coeff = self.coeff.conj();
        if (self.flip & self.sign).count_ones() % 2 == 1 {
            coeff = -coeff;
        }
        Self {
            coeff,
            req: self.set,
            set: self.req,
            ..*self
        }
    }

    fn key(&self) -> (u64, u64, u64, u64, u64) {
        (self.flip, self.sign, self.mask, self.req, self.set)
    }

    #[inline]
    fn target(&self, i: u64) -> u64 {
        ((i ^ self.flip) & !self.mask) | self.set
    }

    /// Visits every basis index accepted by the relay condition.
    #[inline]
    fn for_each_input(&self, dim: usize, mut f: impl FnMut(u64)) {
        let free = (dim as u64 - 1) & !self.mask;
        let mut s = 0u64;
        loop {
            f(s | self.req);
            if s == free {
                break;
            }
            s = s.wrapping_sub(free) & free;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub layout: Layout,
    pub terms: Vec<Monomial>,
}

impl SparseOperator {
    pub fn zero(layout: Layout) -> Self {
        Self {
            layout,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn from_model_terms(layout: Layout, scale: f64, terms: &[ModelTerm]) -> Self {
        let mut out = Vec::new();
        for t in terms {
            let c = t.coefficient * scale;
            let mut relay = Monomial::identity(Complex64::new(1.0, 0.0));
            for r in &t.relays {
                let bit = 1u64 << layout.relay_bit(r.relay);
                let (o, i) = r.op.element();
                relay.mask |= bit;
                if i {
                    relay.req |= bit;
                }
                if o {
                    relay.set |= bit;
                }
            }
            let id = PauliString::identity(layout.n_register).expect("valid size");
            let parts: [(PauliString, f64); 2] = match t.register {
                RegisterFactor::Pauli(p) => [(p, 1.0), (id, 0.0)],
                RegisterFactor::IdPlus(m) => [(id, 1.0), (m, 1.0)],
                RegisterFactor::IdMinus(m) => [(id, 1.0), (m, -1.0)],
            };
            for (p, w) in parts {
                if w == 0.0 {
                    continue;
                }
                let reg = Monomial::from_pauli(&layout, &p, c * w);
                out.push(reg.mul(&relay).expect("register and relay parts commute"));
            }
        }
        Self { layout, terms: out }
    }

    pub fn from_operator(layout: Layout, op: &Operator) -> Self {
        Self::from_model_terms(layout, op.scale, &op.terms)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout,
            terms: self.terms.iter().map(Monomial::adjoint).collect(),
        }
    }

    /// `self * other`, simplified.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                if let Some(m) = a.mul(b) {
                    terms.push(m);
                }
            }
        }
        Self {
            layout: self.layout,
            terms,
        }
        .simplified()
    }

    pub fn add(mut self, other: &Self) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    /// Merges monomials with identical action and drops negligible ones.
    pub fn simplified(&self) -> Self {
        let mut merged: BTreeMap<(u64, u64, u64, u64, u64), Monomial> = BTreeMap::new();
        for t in &self.terms {
            merged
                .entry(t.key())
                .and_modify(|m| m.coeff += t.coeff)
                .or_insert(*t);
        }
        let scale = self.terms.iter().map(|t| t.coeff.norm_sqr()).fold(0.0, f64::max);
        let tol = 1e-28 * scale.max(1e-300);
        merged.retain(|_, m| m.coeff.norm_sqr() > tol);
        // c Pg + c Ph on the same relay is c I there.
        loop {
            let mut found = None;
            'search: for (key, m) in &merged {
                let mut bits = m.mask & !(m.req ^ m.set);
                while bits != 0 {
                    let b = bits & bits.wrapping_neg();
                    bits &= bits - 1;
                    let partner = (key.0, key.1, key.2, key.3 ^ b, key.4 ^ b);
                    if let Some(p) = merged.get(&partner) {
                        if (p.coeff - m.coeff).norm_sqr() <= 1e-24 * m.coeff.norm_sqr() {
                            found = Some((*key, partner, b));
                            break 'search;
                        }
                    }
                }
            }
            let Some((a, b, bit)) = found else { break };
            let m = merged.remove(&a).expect("present");
            merged.remove(&b);
            let joined = Monomial {
                mask: m.mask & !bit,
                req: m.req & !bit,
                set: m.set & !bit,
                ..m
            };
            merged
                .entry(joined.key())
                .and_modify(|x| x.coeff += joined.coeff)
                .or_insert(joined);
        }
        Self {
            layout: self.layout,
            terms: merged.into_values().filter(|m| m.coeff.norm_sqr() > tol).collect(),
        }
    }

    /// Coefficient of the bare identity monomial (after simplification).
    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.is_identity())
            .map(|t| t.coeff)
            .sum()
    }

    pub fn without_identity(&self) -> Self {
        Self {
            layout: self.layout,
            terms: self.terms.iter().filter(|t| !t.is_identity()).copied().collect(),
        }
    }

    /// `out += scale * self * input`.
    pub fn apply_add(&self, input: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        let dim = self.dim();
        assert_eq!(input.len(), dim);
        assert_eq!(out.len(), dim);
        let n = self.layout.n_relays;
        let rel = self.layout.relay_mask();
        let reg_dim = 1u64 << self.layout.n_register;
        for t in &self.terms {
            let c = t.coeff * scale;
            let (flip_reg, sign_reg) = (t.flip >> n, t.sign >> n);
            // Relay configurations accepted by the term, then the register sweep.
            for r in 0..=rel {
                if r & t.mask != t.req {
                    continue;
                }
                let r_out = ((r ^ t.flip) & rel & !t.mask) | t.set;
                let cr = if parity(r & t.sign & rel) { -c } else { c };
                if sign_reg == 0 {
                    for q in 0..reg_dim {
                        let src = ((q << n) | r) as usize;
                        let dst = (((q ^ flip_reg) << n) | r_out) as usize;
                        out[dst] += cr * input[src];
                    }
                } else {
                    for q in 0..reg_dim {
                        let src = ((q << n) | r) as usize;
                        let dst = (((q ^ flip_reg) << n) | r_out) as usize;
                        let v = cr * input[src];
                        if parity(q & sign_reg) {
                            out[dst] -= v;
                        } else {
                            out[dst] += v;
                        }
                    }
                }
            }
        }
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); input.len()];
        self.apply_add(input, &mut out, Complex64::new(1.0, 0.0));
        out
    }

    /// `<psi| self |psi>` without normalization.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let dim = self.dim();
        let mut total = Complex64::new(0.0, 0.0);
        let mut norm: Option<f64> = None;
        for t in &self.terms {
            if t.is_identity() {
                let n = *norm.get_or_insert_with(|| norm_sqr(psi));
                total += t.coeff * n;
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            t.for_each_input(dim, |i| {
                let v = psi[t.target(i) as usize].conj() * psi[i as usize];
                if (i & t.sign).count_ones() & 1 == 1 {
                    acc -= v;
                } else {
                    acc += v;
                }
            });
            total += t.coeff * acc;
        }
        total
    }

    /// Schur-test bound on the operator 2-norm: `sqrt(max column sum * max row sum)`
    /// of absolute entries.
    pub fn norm_bound(&self) -> f64 {
        // Every monomial sends a basis state to one basis state, so absolute row
        // and column sums only depend on the relay bits.
        let configs = 1u64 << self.layout.n_relays;
        let mut max_col: f64 = 0.0;
        let mut max_row: f64 = 0.0;
        for r in 0..configs {
            let mut col = 0.0;
            let mut row = 0.0;
            for t in &self.terms {
                let a = t.coeff.norm();
                if r & t.mask == t.req {
                    col += a;
                }
                if r & t.mask == t.set {
                    row += a;
                }
            }
            max_col = max_col.max(col);
            max_row = max_row.max(row);
        }
        libm::sqrt(max_col * max_row)
    }
}

const PARITY: [bool; 256] = {
    let mut t = [false; 256];
    let mut i = 0;
    while i < 256 {
        t[i] = (i as u32).count_ones() % 2 == 1;
        i += 1;
    }
    t
};

#[inline]
fn parity(mut x: u64) -> bool {
    let mut p = false;
    while x != 0 {
        p ^= PARITY[(x & 0xff) as usize];
        x >>= 8;
    }
    p
}

pub fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
