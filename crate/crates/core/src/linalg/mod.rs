//! Dense complex linear algebra, labelled tensors and integer normal forms.
//!
//! Matrices are `nalgebra` types; factorisations (eigenvalues, SVD,
//! Hermitian eigendecomposition) are delegated to `faer`. This module adds
//! eigenvector extraction with defect detection, support-aware polar decompositions and the helpers the
//! analysis modules share.

mod snf;
mod tensor;

pub use snf::{invariant_factors, smith_normal_form, IntMatrix, Smith};
pub use tensor::{contract, DenseTensor};

use crate::error::{Error, Result};
use crate::tol;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c64(x, 0.0)))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().copied().sum()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Row-major reshape of a vector of length r·c.
pub fn unvec(v: &[C64], r: usize, c: usize) -> CMat {
    CMat::from_row_slice(r, c, v)
}

/// Row-major flattening.
pub fn vec_rm(m: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Divide by the largest-modulus entry's phase so that entry becomes
/// positive real. Leaves the zero matrix untouched.
pub fn fix_phase(m: &CMat) -> CMat {
    let mut best = ZERO;
    for z in m.iter() {
        if z.norm() > best.norm() * (1.0 + 1e-12) {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return m.clone();
    }
    m * (best.conj() / best.norm())
}

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    /// Right singular vectors as columns (m = U·diag(s)·V†).
    pub v: CMat,
}

impl Svd {
    /// Numerical rank with relative cut `rel` on the largest singular value.
    pub fn rank_rel(&self, rel: f64) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&x| x > rel * top).count()
    }

    pub fn rank(&self) -> usize {
        self.rank_rel(tol::rank())
    }
}

/// Thin SVD with singular values in descending order.
pub fn svd(m: &CMat) -> Result<Svd> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Svd { u: CMat::zeros(r, 0), s: vec![], v: CMat::zeros(c, 0) });
    }
    if !is_finite(m) {
        return Err(Error::Numerical("non-finite matrix passed to svd".into()));
    }
    let res = to_faer(m).thin_svd().map_err(|_| Error::Numerical("svd did not converge".into()))?;
    let k = r.min(c);
    let sv = res.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].re.total_cmp(&sv[a].re));
    let (fu, fv) = (res.U(), res.V());
    let mut uu = CMat::zeros(r, k);
    let mut vv = CMat::zeros(c, k);
    let mut s = Vec::with_capacity(k);
    for (j, &o) in order.iter().enumerate() {
        for i in 0..r {
            uu[(i, j)] = fu[(i, o)];
        }
        for i in 0..c {
            vv[(i, j)] = fv[(i, o)];
        }
        s.push(sv[o].re);
    }
    Ok(Svd { u: uu, s, v: vv })
}

/// Orthonormal basis of the kernel of `m`, cut at `rel` times the largest
/// singular value (or absolute `rel` for the zero matrix).
pub fn null_space(m: &CMat, rel: f64) -> Result<CMat> {
    let (r, c) = m.shape();
    if c == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    // Pad with zero rows so the thin SVD exposes the full right space.
    let mm = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let s = svd(&mm)?;
    let top = s.s.first().copied().unwrap_or(0.0);
    let cut = if top == 0.0 { f64::INFINITY } else { rel * top };
    let cols: Vec<usize> = (0..s.s.len()).filter(|&j| s.s[j] <= cut).collect();
    let mut out = CMat::zeros(c, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &s.v.column(j));
    }
    Ok(out)
}

/// Orthonormal basis for the column span of `m` (relative rank cut).
pub fn range_basis(m: &CMat, rel: f64) -> Result<CMat> {
    let s = svd(m)?;
    let k = s.rank_rel(rel);
    Ok(s.u.columns(0, k).into_owned())
}

/// Polar decomposition m = W·P with W an isometry and P = (m†m)^{1/2}.
///
/// Requires rows ≥ cols. For rank-deficient input W is completed on the
/// kernel of P so that W†W is still the identity.
pub fn polar_decompose(m: &CMat) -> Result<(CMat, CMat)> {
    let (r, c) = m.shape();
    if r < c {
        return Err(Error::Dimension(format!("polar decomposition needs rows >= cols, got {r}x{c}")));
    }
    let s = svd(m)?;
    let w = &s.u * s.v.adjoint();
    let sig = CMat::from_diagonal(&DVector::from_iterator(s.s.len(), s.s.iter().map(|&x| c64(x, 0.0))));
    let p = &s.v * sig * s.v.adjoint();
    Ok((w, p))
}

/// Polar decomposition restricted to the support of m†m.
///
/// Returns (W, P, Z) where Z (cols × r) spans the support, W (rows × r) is
/// an isometry with W†W = 1_r, P = (m†m)^{1/2} and m = W·Z†·P. Works for any
/// shape, which matters for region maps whose physical space is smaller
/// than their boundary space.
pub fn polar_on_support(m: &CMat, rel: f64) -> Result<(CMat, CMat, CMat)> {
    let s = svd(m)?;
    let k = s.rank_rel(rel);
    let u = s.u.columns(0, k).into_owned();
    let z = s.v.columns(0, k).into_owned();
    let sig = CMat::from_diagonal(&DVector::from_iterator(k, s.s[..k].iter().map(|&x| c64(x, 0.0))));
    let p = &z * sig * z.adjoint();
    Ok((u, p, z))
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension("eigh needs a square matrix".into()));
    }
    if n == 0 {
        return Ok((vec![], CMat::zeros(0, 0)));
    }
    if !is_finite(m) {
        return Err(Error::Numerical("non-finite matrix passed to eigh".into()));
    }
    let h = hermitian_part(m);
    let e = to_faer(&h)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::Numerical("hermitian eigensolver did not converge".into()))?;
    let ev = e.S().column_vector();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ev[a].re.total_cmp(&ev[b].re));
    let fu = e.U();
    let mut vecs = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (j, &o) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, j)] = fu[(i, o)];
        }
        vals.push(ev[o].re);
    }
    Ok((vals, vecs))
}

/// f(H) for Hermitian H via its eigendecomposition.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, v) = eigh(m)?;
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| c64(f(x), 0.0)));
    Ok(&v * CMat::from_diagonal(&d) * v.adjoint())
}

/// Principal square root of a Hermitian PSD matrix (negative noise clipped).
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Eigenvalues of a square matrix (complex Schur), sorted by descending
/// modulus with ties broken by argument.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("eigenvalues need a square matrix, got {}x{}", n, m.ncols())));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    if !is_finite(m) {
        return Err(Error::Numerical("non-finite matrix passed to eigensolver".into()));
    }
    let mut vals = to_faer(m).eigenvalues().map_err(|_| Error::Numerical("eigenvalue iteration failed".into()))?;
    sort_spectrum(&mut vals);
    Ok(vals)
}

pub fn sort_spectrum(vals: &mut [C64]) {
    vals.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        if (ma - mb).abs() > 1e-12 * ma.max(mb).max(1.0) {
            mb.total_cmp(&ma)
        } else {
            let arg = |z: &C64| {
                let t = z.arg();
                if t < -1e-12 { t + 2.0 * std::f64::consts::PI } else { t.max(0.0) }
            };
            arg(a).total_cmp(&arg(b))
        }
    });
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub right: Option<CVec>,
    pub left: Option<CVec>,
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted by descending modulus.
    pub pairs: Vec<EigenPair>,
    pub defective: bool,
}

impl Eigen {
    pub fn values(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Group sorted eigenvalues into clusters of numerically equal values.
fn clusters(vals: &[C64], scale: f64) -> Vec<Vec<C64>> {
    let ctol = 1e-6 * scale;
    let mut used = vec![false; vals.len()];
    let mut out = Vec::new();
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        let mut group = Vec::new();
        for j in i..vals.len() {
            if !used[j] && (vals[j] - vals[i]).norm() <= ctol {
                used[j] = true;
                group.push(vals[j]);
            }
        }
        out.push(group);
    }
    out
}

/// Full eigendecomposition with right and left eigenvectors, normalised so
/// that left†·right = 1 within each eigenvalue cluster.
pub fn eig_general(m: &CMat) -> Result<Eigen> {
    eig_selected(m, |_| true)
}

/// Like [`eig_general`] but computes eigenvectors only for eigenvalues
/// accepted by `want`; others are listed without vectors.
pub fn eig_selected(m: &CMat, want: impl Fn(C64) -> bool) -> Result<Eigen> {
    let vals = eigenvalues(m)?;
    let n = vals.len();
    let scale = fro(m).max(1e-300);
    let mut pairs = Vec::with_capacity(n);
    let mut defective = false;
    for group in clusters(&vals, scale) {
        let k = group.len();
        let mean: C64 = group.iter().copied().sum::<C64>() / (k as f64);
        if !want(mean) {
            for &v in &group {
                pairs.push(EigenPair { value: v, right: None, left: None });
            }
            continue;
        }
        let spread = group.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        let shifted = m - CMat::identity(n, n) * mean;
        let s = svd(&shifted)?;
        let thr = (1e-9 * scale).max(10.0 * spread);
        let mut idx: Vec<usize> = (0..n).filter(|&j| s.s[j] <= thr).collect();
        // Smallest singular values come last.
        idx.sort_by(|&a, &b| s.s[a].total_cmp(&s.s[b]));
        let g = idx.len().min(k);
        if g < k {
            defective = true;
        }
        let mut r = CMat::zeros(n, g);
        let mut l = CMat::zeros(n, g);
        for (c, &j) in idx.iter().take(g).enumerate() {
            r.set_column(c, &s.v.column(j));
            l.set_column(c, &s.u.column(j));
        }
        if g > 0 {
            let lr = l.adjoint() * &r;
            match lr.clone().try_inverse() {
                Some(inv) if lr.iter().all(|z| z.re.is_finite()) => {
                    l = &l * inv.adjoint();
                }
                _ => defective = true,
            }
        }
        for (c, &v) in group.iter().enumerate() {
            if c < g {
                pairs.push(EigenPair {
                    value: v,
                    right: Some(r.column(c).into_owned()),
                    left: Some(l.column(c).into_owned()),
                });
            } else {
                pairs.push(EigenPair { value: v, right: None, left: None });
            }
        }
    }
    Ok(Eigen { pairs, defective })
}

/// Spectral projector Σ r_k l_k† onto the eigenvectors selected by `want`.
pub fn spectral_projector(m: &CMat, want: impl Fn(C64) -> bool + Copy) -> Result<(CMat, Vec<C64>)> {
    let e = eig_selected(m, want)?;
    let n = m.nrows();
    let mut p = CMat::zeros(n, n);
    let mut vals = Vec::new();
    for pair in e.pairs.iter().filter(|p| want(p.value)) {
        match (&pair.right, &pair.left) {
            (Some(r), Some(l)) => {
                p += r * l.adjoint();
                vals.push(pair.value);
            }
            _ => return Err(Error::Defective("selected eigenvalue has no full eigenvector set".into())),
        }
    }
    Ok((p, vals))
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eig(m: &CMat) -> Result<f64> {
    Ok(eigh(m)?.0.first().copied().unwrap_or(0.0))
}

/// Orthonormalise the columns of `m` (modified Gram-Schmidt via SVD range).
pub fn orthonormalize(m: &CMat) -> Result<CMat> {
    range_basis(m, tol::rank())
}

/// Orthogonal complement of the span of orthonormal columns `q` in C^n.
pub fn complement(q: &CMat) -> Result<CMat> {
    let n = q.nrows();
    let proj = CMat::identity(n, n) - q * q.adjoint();
    range_basis(&proj, 1e-6)
}
