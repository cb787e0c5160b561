//! Minimal dense linear algebra: row-major matrices, a blocked Cholesky,
//! triangular solves and the handful of kernels the interior-point solver
//! needs. Everything is plain f64 with a fixed operation order, so repeated
//! runs produce bitwise identical results.

use std::fmt;

#[derive(Clone, PartialEq)]
pub struct Mat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows.min(8) {
            let row: Vec<String> = (0..self.n_cols.min(8))
                .map(|j| format!("{:10.4}", self.get(i, j)))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m.data[i * n_cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] += v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .sum()
    }

    /// Frobenius inner product ⟨A, B⟩ = Σ A_ij B_ij.
    pub fn frob_inner(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_scaled(&mut self, other: &Mat, s: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// A ← (A + Aᵀ)/2 (square only).
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.data[j * self.n_rows + i] = self.data[i * self.n_cols + j];
            }
        }
        t
    }

    /// Plain dense product; fine for the small per-block matrices.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n_cols, other.n_rows);
        let (m, k, n) = (self.n_rows, self.n_cols, other.n_cols);
        let mut out = Mat::zeros(m, n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (p, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * n..(p + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_cols, x.len());
        self.data
            .chunks_exact(self.n_cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

const CHOL_NB: usize = 48;
const TILE: usize = 64;
const MR: usize = 4;

/// In-place lower Cholesky of a symmetric positive definite matrix (only the
/// lower triangle is read; the strict upper triangle is zeroed on success).
/// Returns the failing pivot index if a non-positive pivot is encountered.
pub fn cholesky_in_place(a: &mut Mat) -> Result<(), usize> {
    assert_eq!(a.n_rows, a.n_cols);
    let n = a.n_rows;
    let d = &mut a.data;
    let mut k = 0;
    while k < n {
        let kb = CHOL_NB.min(n - k);
        // diagonal block, unblocked
        for j in k..k + kb {
            let mut diag = d[j * n + j];
            for p in k..j {
                diag -= d[j * n + p] * d[j * n + p];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(j);
            }
            let root = diag.sqrt();
            d[j * n + j] = root;
            let inv = 1.0 / root;
            for i in (j + 1)..(k + kb) {
                let mut s = d[i * n + j];
                for p in k..j {
                    s -= d[i * n + p] * d[j * n + p];
                }
                d[i * n + j] = s * inv;
            }
        }
        // panel solve: rows below the diagonal block
        for i in (k + kb)..n {
            for j in k..k + kb {
                let mut s = d[i * n + j];
                for p in k..j {
                    s -= d[i * n + p] * d[j * n + p];
                }
                d[i * n + j] = s / d[j * n + j];
            }
        }
        // trailing update: A22 -= L21 L21ᵀ (lower triangle), tiled
        let base = k + kb;
        let mut ib = base;
        while ib < n {
            let ibe = (ib + TILE).min(n);
            let mut jb = base;
            while jb <= ib {
                let jbe = (jb + TILE).min(ibe);
                for i in ib..ibe {
                    let jmax = jbe.min(i + 1);
                    let mut j = jb;
                    while j + MR <= jmax {
                        let mut acc = [0.0f64; MR];
                        for p in k..k + kb {
                            let x = d[i * n + p];
                            for (t, a) in acc.iter_mut().enumerate() {
                                *a += x * d[(j + t) * n + p];
                            }
                        }
                        for (t, a) in acc.iter().enumerate() {
                            d[i * n + j + t] -= a;
                        }
                        j += MR;
                    }
                    while j < jmax {
                        let mut s = 0.0;
                        for p in k..k + kb {
                            s += d[i * n + p] * d[j * n + p];
                        }
                        d[i * n + j] -= s;
                        j += 1;
                    }
                }
                jb += TILE;
            }
            ib += TILE;
        }
        k += kb;
    }
    // zero strict upper triangle so the factor is usable as a plain matrix
    for i in 0..n {
        for j in (i + 1)..n {
            d[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Whether `a` admits a Cholesky factorization (strictly positive pivots).
/// Works on a copy; `a` is untouched.
pub fn is_positive_definite(a: &Mat) -> bool {
    let mut c = a.clone();
    cholesky_in_place(&mut c).is_ok()
}

/// Solve L y = b, Lᵀ x = y in place given the lower Cholesky factor.
pub fn chol_solve_in_place(l: &Mat, b: &mut [f64]) {
    let n = l.n_rows;
    assert_eq!(b.len(), n);
    for i in 0..n {
        let row = l.row(i);
        let mut s = b[i];
        for p in 0..i {
            s -= row[p] * b[p];
        }
        b[i] = s / row[i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in (i + 1)..n {
            s -= l.get(p, i) * b[p];
        }
        b[i] = s / l.get(i, i);
    }
}

const RHS_BLOCK: usize = 8;

/// B ← L⁻¹ B for a lower-triangular L, processing RHS columns in blocks.
pub fn trsm_lower(l: &Mat, b: &mut Mat) {
    let n = l.n_rows;
    assert_eq!(b.n_rows, n);
    let nc = b.n_cols;
    let mut c0 = 0;
    while c0 < nc {
        let cw = RHS_BLOCK.min(nc - c0);
        for i in 0..n {
            let lrow = l.row(i);
            let mut acc = [0.0f64; RHS_BLOCK];
            acc[..cw].copy_from_slice(&b.row(i)[c0..c0 + cw]);
            for p in 0..i {
                let lv = lrow[p];
                if lv == 0.0 {
                    continue;
                }
                let brow = &b.row(p)[c0..c0 + cw];
                for (a, &x) in acc[..cw].iter_mut().zip(brow) {
                    *a -= lv * x;
                }
            }
            let inv = 1.0 / lrow[i];
            let out = &mut b.row_mut(i)[c0..c0 + cw];
            for (o, a) in out.iter_mut().zip(&acc[..cw]) {
                *o = a * inv;
            }
        }
        c0 += RHS_BLOCK;
    }
}

/// B ← L⁻ᵀ B for a lower-triangular L.
pub fn trsm_lower_transpose(l: &Mat, b: &mut Mat) {
    let n = l.n_rows;
    assert_eq!(b.n_rows, n);
    let nc = b.n_cols;
    let mut c0 = 0;
    while c0 < nc {
        let cw = RHS_BLOCK.min(nc - c0);
        for i in (0..n).rev() {
            let mut acc = [0.0f64; RHS_BLOCK];
            acc[..cw].copy_from_slice(&b.row(i)[c0..c0 + cw]);
            for p in (i + 1)..n {
                let lv = l.get(p, i);
                if lv == 0.0 {
                    continue;
                }
                let brow = &b.row(p)[c0..c0 + cw];
                for (a, &x) in acc[..cw].iter_mut().zip(brow) {
                    *a -= lv * x;
                }
            }
            let inv = 1.0 / l.get(i, i);
            let out = &mut b.row_mut(i)[c0..c0 + cw];
            for (o, a) in out.iter_mut().zip(&acc[..cw]) {
                *o = a * inv;
            }
        }
        c0 += RHS_BLOCK;
    }
}

/// Full symmetric inverse from the lower Cholesky factor: A⁻¹ = L⁻ᵀ L⁻¹.
pub fn chol_inverse(l: &Mat) -> Mat {
    let n = l.n_rows;
    let mut inv = Mat::identity(n);
    trsm_lower(l, &mut inv);
    trsm_lower_transpose(l, &mut inv);
    // enforce exact symmetry (round-off makes the halves drift slightly)
    inv.symmetrize();
    inv
}

/// Gram matrix YᵀY (full symmetric) of an r×c matrix Y.
pub fn gram_transpose(y: &Mat) -> Mat {
    let (r, c) = (y.n_rows, y.n_cols);
    let mut g = Mat::zeros(c, c);
    for p in 0..r {
        let row = y.row(p);
        for i in 0..c {
            let v = row[i];
            if v == 0.0 {
                continue;
            }
            let grow = &mut g.data[i * c..i * c + c];
            for j in i..c {
                grow[j] += v * row[j];
            }
        }
    }
    for i in 0..c {
        for j in 0..i {
            g.data[i * c + j] = g.data[j * c + i];
        }
    }
    g
}

/// Smallest eigenvalue of a symmetric matrix by bisection on the Cholesky
/// test "A − σI positive definite ⟺ λmin > σ". Deterministic; accurate to
/// `tol` absolute.
pub fn min_eigenvalue(a: &Mat, tol: f64) -> f64 {
    let n = a.n_rows;
    if n == 0 {
        return 0.0;
    }
    // Gershgorin bracket
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| a.get(i, j).abs())
            .sum();
        lo = lo.min(a.get(i, i) - r);
        hi = hi.max(a.get(i, i) + r);
    }
    let shifted_pd = |sigma: f64| {
        let mut c = a.clone();
        for i in 0..n {
            c.add_at(i, i, -sigma);
        }
        cholesky_in_place(&mut c).is_ok()
    };
    let mut lo = lo - tol;
    let mut hi = hi + tol;
    // invariant: λmin > lo, λmin <= hi
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if shifted_pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Packed symmetric vectorization (svec)
// ---------------------------------------------------------------------------

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Dimension of svec space for symmetric n×n matrices.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Packed index of entry (i, j), i ≤ j, in column-major upper-triangle order.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// svec(A): diagonal entries as-is, off-diagonal scaled by √2, so that
/// ⟨svec A, svec B⟩ = ⟨A, B⟩.
pub fn svec(a: &Mat) -> Vec<f64> {
    let n = a.n_rows;
    let mut v = vec![0.0; svec_len(n)];
    for j in 0..n {
        for i in 0..=j {
            v[svec_index(i, j)] = if i == j {
                a.get(i, i)
            } else {
                SQRT2 * a.get(i, j)
            };
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> Mat {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut a = Mat::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                a.set(i, i, x);
            } else {
                a.set(i, j, x / SQRT2);
                a.set(j, i, x / SQRT2);
            }
        }
    }
    a
}
