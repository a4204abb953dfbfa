//! Explicit matrices built from Kronecker products of single-site factors.
//!
//! Independent of [`crate::ops`]; used as a reference for small systems and by
//! the density-matrix integrator.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::builder::{ModelTerm, Operator, RegisterFactor, RelayOp};
use crate::pauli::{Pauli, PauliString};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    /// `|a><b|`
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = a[i] * b[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let mut m = Self::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m.data[(i * other.dim + k) * d + j * other.dim + l] = a * other.get(k, l);
                    }
                }
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `<v| self |v>`
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }
}

pub fn site_pauli(p: Pauli) -> DenseMatrix {
    match p {
        Pauli::I => DenseMatrix::identity(2),
        Pauli::X => DenseMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
        Pauli::Y => DenseMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
        Pauli::Z => DenseMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
    }
}

/// Relay factor in the `{g, h}` basis, `g` first.
pub fn site_relay(op: RelayOp) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(2);
    match op {
        RelayOp::SigmaPlus => m.set(1, 0, ONE),
        RelayOp::SigmaMinus => m.set(0, 1, ONE),
        RelayOp::ProjG => m.set(0, 0, ONE),
        RelayOp::ProjH => m.set(1, 1, ONE),
    }
    m
}

fn kron_all(factors: &[DenseMatrix]) -> DenseMatrix {
    let mut acc = DenseMatrix::identity(1);
    for f in factors {
        acc = acc.kron(f);
    }
    acc
}

/// Register Pauli string including its phase; qubit 1 is the leftmost factor.
pub fn pauli_matrix(p: &PauliString) -> DenseMatrix {
    let sites: Vec<DenseMatrix> = (1..=p.n_qubits()).map(|q| site_pauli(p.get(q))).collect();
    let phase = [ONE, I, -ONE, -I][p.phase() as usize % 4];
    kron_all(&sites).scale(phase)
}

/// One model term on the full register ⊗ relay space.
pub fn term_matrix(n_register: usize, n_relays: usize, term: &ModelTerm) -> DenseMatrix {
    let reg = match term.register {
        RegisterFactor::Pauli(p) => pauli_matrix(&p),
        RegisterFactor::IdPlus(m) => DenseMatrix::identity(1 << n_register).add(&pauli_matrix(&m)),
        RegisterFactor::IdMinus(m) => DenseMatrix::identity(1 << n_register).sub(&pauli_matrix(&m)),
    };
    let mut relays: Vec<DenseMatrix> = (0..n_relays).map(|_| DenseMatrix::identity(2)).collect();
    for r in &term.relays {
        relays[r.relay - 1] = site_relay(r.op);
    }
    reg.kron(&kron_all(&relays)).scale(term.coefficient)
}

pub fn operator_matrix(n_register: usize, n_relays: usize, op: &Operator) -> DenseMatrix {
    let dim = 1usize << (n_register + n_relays);
    let mut acc = DenseMatrix::zeros(dim);
    for t in &op.terms {
        acc = acc.add(&term_matrix(n_register, n_relays, t));
    }
    acc.scale(Complex64::new(op.scale, 0.0))
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut row_start = Vec::with_capacity(m.dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for i in 0..m.dim {
            for j in 0..m.dim {
                let v = m.get(i, j);
                if v != ZERO {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            dim: m.dim,
            row_start,
            cols,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `self * b`
    pub fn mul_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in self.row_start[i]..self.row_start[i + 1] {
                let a = self.values[k];
                let c = self.cols[k];
                let src = &b.data[c * n..(c + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `b * self†`
    pub fn dense_mul_adjoint(&self, b: &DenseMatrix) -> DenseMatrix {
        // (b A†)[r][i] = sum_k b[r][c_k] conj(A[i][c_k])
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in self.row_start[i]..self.row_start[i + 1] {
                let a = self.values[k].conj();
                let c = self.cols[k];
                for r in 0..n {
                    out.data[r * n + i] += b.data[r * n + c] * a;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_products() {
        let x = site_pauli(Pauli::X);
        let z = site_pauli(Pauli::Z);
        let y = site_pauli(Pauli::Y);
        // Y = i X Z
        assert_eq!(x.mul(&z).scale(I), y);
        let p = PauliString::parse("X1Z2", 2).unwrap();
        let m = pauli_matrix(&p);
        // X on the leftmost factor flips the most significant bit
        assert_eq!(m.get(2, 0), ONE);
        assert_eq!(m.get(3, 1), -ONE);
    }

    #[test]
    fn csr_products() {
        let a = pauli_matrix(&PauliString::parse("Y1X2", 2).unwrap()).add(&DenseMatrix::identity(4).scale(I));
        let b = pauli_matrix(&PauliString::parse("Z1", 2).unwrap()).add(&pauli_matrix(&PauliString::parse("X2", 2).unwrap()));
        let s = CsrMatrix::from_dense(&a);
        assert!(s.mul_dense(&b).max_abs_diff(&a.mul(&b)) < 1e-15);
        assert!(s.dense_mul_adjoint(&b).max_abs_diff(&b.mul(&a.adjoint())) < 1e-15);
    }
}
