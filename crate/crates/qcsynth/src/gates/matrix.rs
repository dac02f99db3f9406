//! Complex matrix algebra for gate composition.
//!
//! Matrices are stored as paired real/imaginary parts in row-major order,
//! which keeps every downstream constraint real-valued once a matrix is
//! passed through [`ComplexMatrix::embed_real`].

use std::fmt;

use serde::{Deserialize, Serialize};

/// Entrywise tolerance for unitarity checks on construction.
pub const UNITARY_TOL: f64 = 1e-10;

/// A square complex matrix of dimension `2^n_qubits`, stored as separate
/// real and imaginary parts.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    dim: usize,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  [")?;
            for j in 0..self.dim {
                let (re, im) = self.get(i, j);
                write!(f, " {re:+.4}{im:+.4}i")?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            re: vec![0.0; dim * dim],
            im: vec![0.0; dim * dim],
            dim,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.re[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows of `(re, im)` pairs. Panics if the rows are
    /// not square.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            for (j, &(re, im)) in row.iter().enumerate() {
                m.set(i, j, re, im);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits for a `2^n`-dimensional matrix. Panics if the
    /// dimension is not a power of two.
    pub fn n_qubits(&self) -> usize {
        debug_assert!(self.dim.is_power_of_two());
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let idx = i * self.dim + j;
        (self.re[idx], self.im[idx])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, re: f64, im: f64) {
        let idx = i * self.dim + j;
        self.re[idx] = re;
        self.im[idx] = im;
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let (ar, ai) = self.get(i, k);
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let row = k * n;
                let out_row = i * n;
                for j in 0..n {
                    let br = rhs.re[row + j];
                    let bi = rhs.im[row + j];
                    out.re[out_row + j] += ar * br - ai * bi;
                    out.im[out_row + j] += ar * bi + ai * br;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (re, im) = self.get(i, j);
                out.set(j, i, re, -im);
            }
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for idx in 0..self.dim * self.dim {
            out.re[idx] += rhs.re[idx];
            out.im[idx] += rhs.im[idx];
        }
        out
    }

    /// Multiplies every entry by the complex scalar `(re, im)`.
    pub fn scale(&self, re: f64, im: f64) -> ComplexMatrix {
        let mut out = self.clone();
        for idx in 0..self.dim * self.dim {
            let (ar, ai) = (self.re[idx], self.im[idx]);
            out.re[idx] = ar * re - ai * im;
            out.im[idx] = ar * im + ai * re;
        }
        out
    }

    /// Largest entrywise absolute deviation from `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0.0f64;
        for idx in 0..self.dim * self.dim {
            let dr = self.re[idx] - other.re[idx];
            let di = self.im[idx] - other.im[idx];
            worst = worst.max(dr.abs()).max(di.abs());
        }
        worst
    }

    /// Entrywise max deviation of `self * self†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        self.matmul(&self.dagger())
            .max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Real embedding `[[re, -im], [im, re]]`, a multiplicative
    /// homomorphism from complex to real matrices.
    pub fn embed_real(&self) -> RealEmbedding {
        let n = self.dim;
        let m = 2 * n;
        let mut mat = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let (re, im) = self.get(i, j);
                mat[i * m + j] = re;
                mat[i * m + (n + j)] = -im;
                mat[(n + i) * m + j] = im;
                mat[(n + i) * m + (n + j)] = re;
            }
        }
        RealEmbedding { mat, dim: m }
    }
}

/// Kronecker product of two complex matrices.
///
/// The real/imaginary parts combine as
/// `re = re_a ⊗ re_b − im_a ⊗ im_b` and `im = re_a ⊗ im_b + im_a ⊗ re_b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for ia in 0..na {
        for ja in 0..na {
            let (ar, ai) = a.get(ia, ja);
            if ar == 0.0 && ai == 0.0 {
                continue;
            }
            for ib in 0..nb {
                for jb in 0..nb {
                    let (br, bi) = b.get(ib, jb);
                    let i = ia * nb + ib;
                    let j = ja * nb + jb;
                    out.set(i, j, ar * br - ai * bi, ar * bi + ai * br);
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(mats: &[ComplexMatrix]) -> ComplexMatrix {
    assert!(!mats.is_empty());
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = kron(&acc, m);
    }
    acc
}

/// The real `2^(N+1) x 2^(N+1)` embedding of a complex gate matrix.
///
/// Block layout is `[[re, -im], [im, re]]`; the original parts are
/// recoverable from the left column of blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEmbedding {
    pub mat: Vec<f64>,
    dim: usize,
}

impl RealEmbedding {
    /// Wraps a raw row-major square matrix.
    pub fn from_vec(mat: Vec<f64>) -> Self {
        let dim = (mat.len() as f64).sqrt() as usize;
        assert_eq!(dim * dim, mat.len(), "matrix must be square");
        Self { mat, dim }
    }

    pub fn identity(dim: usize) -> Self {
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            mat[i * dim + i] = 1.0;
        }
        Self { mat, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[i * self.dim + j]
    }

    pub fn matmul(&self, rhs: &RealEmbedding) -> RealEmbedding {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut mat = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.mat[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = k * n;
                let out_row = i * n;
                for j in 0..n {
                    mat[out_row + j] += a * rhs.mat[row + j];
                }
            }
        }
        RealEmbedding { mat, dim: n }
    }

    pub fn max_abs_diff(&self, other: &RealEmbedding) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.mat
            .iter()
            .zip(&other.mat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Recovers the complex matrix from the block structure.
    pub fn to_complex(&self) -> ComplexMatrix {
        let n = self.dim / 2;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(i, j), self.get(n + i, j));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::random::random_unitary;

    #[test]
    fn kron_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = kron(&i2, &i2);
        assert_eq!(i4.max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
    }

    #[test]
    fn kron_matches_index_formula() {
        // Brute-force oracle: (A ⊗ B)[i*p + j, k*q + l] = A[i,k] * B[j,l].
        let mut rng_state = 0x9e3779b9u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((rng_state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let mut a = ComplexMatrix::zeros(2);
        let mut b = ComplexMatrix::zeros(4);
        for idx in 0..4 {
            a.re[idx] = next();
            a.im[idx] = next();
        }
        for idx in 0..16 {
            b.re[idx] = next();
            b.im[idx] = next();
        }
        let c = kron(&a, &b);
        let (p, q) = (b.dim(), b.dim());
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..p {
                    for l in 0..q {
                        let (ar, ai) = a.get(i, k);
                        let (br, bi) = b.get(j, l);
                        let want = (ar * br - ai * bi, ar * bi + ai * br);
                        let got = c.get(i * p + j, k * q + l);
                        assert!((want.0 - got.0).abs() < 1e-15);
                        assert!((want.1 - got.1).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_h_lift_block_structure() {
        // H ⊗ I2 has the 2x2 block form [[h00*I, h01*I], [h10*I, h11*I]].
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_rows(&[
            vec![(s, 0.0), (s, 0.0)],
            vec![(s, 0.0), (-s, 0.0)],
        ]);
        let lifted = kron(&h, &ComplexMatrix::identity(2));
        for i in 0..2 {
            for j in 0..2 {
                let (hr, _) = h.get(i, j);
                for d in 0..2 {
                    let (r, im) = lifted.get(i * 2 + d, j * 2 + d);
                    assert!((r - hr).abs() < 1e-15 && im == 0.0);
                }
                let (off_r, off_i) = lifted.get(i * 2, j * 2 + 1);
                assert_eq!((off_r, off_i), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let x = ComplexMatrix::from_rows(&[
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![(1.0, 0.0), (0.0, 0.0)],
        ]);
        let xx = kron(&x, &x);
        // |00> (column 0) maps to |11> (row 3).
        let (r, i) = xx.get(3, 0);
        assert_eq!((r, i), (1.0, 0.0));
        let (r, i) = xx.get(0, 0);
        assert_eq!((r, i), (0.0, 0.0));
    }

    #[test]
    fn embed_identity() {
        let e = ComplexMatrix::identity(2).embed_real();
        assert_eq!(e.max_abs_diff(&RealEmbedding::identity(4)), 0.0);
    }

    #[test]
    fn embed_diag_s_gate_blocks() {
        let s = ComplexMatrix::from_rows(&[
            vec![(1.0, 0.0), (0.0, 0.0)],
            vec![(0.0, 0.0), (0.0, 1.0)],
        ]);
        let e = s.embed_real();
        // re block diag(1, 0), im block diag(0, 1), arranged [[re,-im],[im,re]].
        assert_eq!(e.get(0, 0), 1.0);
        assert_eq!(e.get(1, 1), 0.0);
        assert_eq!(e.get(1, 3), -1.0);
        assert_eq!(e.get(3, 1), 1.0);
        assert_eq!(e.get(3, 3), 0.0);
    }

    #[test]
    fn embedding_homomorphism_random_unitaries() {
        let mut seed = 7u64;
        for _ in 0..100 {
            let a = random_unitary(4, seed);
            let b = random_unitary(4, seed + 1);
            seed += 2;
            let lhs = a.matmul(&b).embed_real();
            let rhs = a.embed_real().matmul(&b.embed_real());
            assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        }
    }

    #[test]
    fn embedding_entries_bounded_for_unitaries() {
        for seed in 0..20 {
            let u = random_unitary(8, 1000 + seed);
            assert!(u.is_unitary(1e-9));
            let e = u.embed_real();
            for &v in &e.mat {
                assert!(v.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_embedding() {
        let u = random_unitary(4, 42);
        let back = u.embed_real().to_complex();
        assert!(u.max_abs_diff(&back) < 1e-15);
    }
}
