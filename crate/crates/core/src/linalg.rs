//! Dense complex matrix helpers shared by every module.
//!
//! The two-level-times-ladder space has dimension `2N`. Indices `0..N` hold
//! the excited sector `e_m` and `N..2N` hold the ground sector `g_m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Sector index bookkeeping for the `2N`-dimensional product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub n: usize,
}

impl Basis {
    pub fn new(n: usize) -> Self {
        Basis { n }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Excited-sector level `e_m`.
    pub fn e(&self, m: usize) -> usize {
        m
    }

    /// Ground-sector level `g_m`.
    pub fn g(&self, m: usize) -> usize {
        self.n + m
    }

    /// The two indices of dressed block `m`: `(e_m, g_{m+1})`.
    pub fn block(&self, m: usize) -> (usize, usize) {
        (self.e(m), self.g(m + 1))
    }

    pub fn unit(&self, idx: usize) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[idx] = ONE;
        v
    }

    pub fn indices(&self, region: Region) -> Vec<usize> {
        let n = self.n;
        match region {
            Region::Full => (0..2 * n).collect(),
            Region::Interior => (0..2 * n).filter(|&i| i != n - 1).collect(),
            Region::Coupled => (0..2 * n).filter(|&i| i != n - 1 && i != n).collect(),
        }
    }
}

/// Subspaces on which identities are asserted.
///
/// `Interior` drops the truncation edge `e_{N-1}`. `Coupled` additionally
/// drops the uncoupled ground level `g_0`, leaving exactly the span of the
/// dressed blocks `(e_m, g_{m+1})`, `m <= N-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Full,
    Interior,
    Coupled,
}

pub fn restrict(a: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

pub fn restrict_rect(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn diag(d: &[f64]) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| if i == j { c(d[i]) } else { ZERO })
}

pub fn diag_c(d: &[Complex64]) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
}

/// Assemble a `2N x 2N` matrix from four `N x N` sector blocks.
pub fn block2(a11: &CMat, a12: &CMat, a21: &CMat, a22: &CMat) -> CMat {
    let n = a11.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a11);
    out.view_mut((0, n), (n, n)).copy_from(a12);
    out.view_mut((n, 0), (n, n)).copy_from(a21);
    out.view_mut((n, n), (n, n)).copy_from(a22);
    out
}

/// Sector block `(j, k)` (1-based, as in `[[11, 12], [21, 22]]`).
pub fn sector_block(a: &CMat, j: usize, k: usize) -> CMat {
    let n = a.nrows() / 2;
    a.view(((j - 1) * n, (k - 1) * n), (n, n)).into_owned()
}

/// Multiply row `r` of `a` by `d[r]`.
pub fn scale_rows(d: &[f64], a: &CMat) -> CMat {
    let mut out = a.clone();
    for (r, &s) in d.iter().enumerate() {
        out.row_mut(r).scale_mut(s);
    }
    out
}

pub fn hermitian_defect(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Pauli `sigma_3` on the sector index: `diag(+I, -I)`.
pub fn sigma3(n: usize) -> CMat {
    let mut d = vec![1.0; n];
    d.extend(std::iter::repeat_n(-1.0, n));
    diag(&d)
}

/// Nonzero entries of a sparse-by-construction matrix, row-major.
pub fn nonzeros(a: &CMat) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for r in 0..a.nrows() {
        for col in 0..a.ncols() {
            let z = a[(r, col)];
            if z != ZERO {
                out.push((r, col, z));
            }
        }
    }
    out
}
