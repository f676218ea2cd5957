//! Parent Hamiltonians of uniform MPS, exact ground spaces and finite-size
//! gap certificates.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c64, CMat, CVec, ZERO};
use crate::mps::{self, UniformMps};
use crate::tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Largest dimension diagonalised densely; above it the kernel is built by
/// intersecting term kernels and the gap comes from Lanczos.
pub const DENSE_LIMIT: usize = 1 << 10;

#[derive(Debug, Clone)]
pub struct ParentHamiltonian {
    /// Number of sites the term acts on.
    pub l: usize,
    pub d: usize,
    /// Orthogonal projector onto the complement of 𝒢_L.
    pub h: CMat,
    /// dim 𝒢_L.
    pub local_rank: usize,
    pub source: String,
    pub warnings: Vec<String>,
}

impl ParentHamiltonian {
    pub fn from_projector(h: CMat, d: usize, source: impl Into<String>) -> Result<Self> {
        let n = h.nrows();
        let mut l = 0;
        let mut p = 1;
        while p < n {
            p *= d;
            l += 1;
        }
        if p != n || h.ncols() != n || l == 0 {
            return Err(invalid(format!("term of size {n} is not a power of d = {d}")));
        }
        check_projector(&h)?;
        let tr = linalg::trace(&h).re.round() as usize;
        Ok(ParentHamiltonian { l, d, h, local_rank: n - tr, source: source.into(), warnings: Vec::new() })
    }

    pub fn is_zero(&self) -> bool {
        linalg::max_abs(&self.h) <= tol::eq()
    }
}

fn check_projector(h: &CMat) -> Result<()> {
    let t = 1e-8 * (h.nrows() as f64).sqrt();
    if linalg::fro(&(h - h.adjoint())) > t || linalg::fro(&(h * h - h)) > t {
        return Err(invalid("local term is not a Hermitian projector"));
    }
    Ok(())
}

/// h = 1 − (projector onto 𝒢_L), 𝒢_L = span{Σ tr(A^{i1}⋯A^{iL} X)|i1…iL⟩}.
pub fn parent_hamiltonian(state: &UniformMps, l: usize) -> Result<ParentHamiltonian> {
    if l == 0 {
        return Err(invalid("support length must be >= 1"));
    }
    let t = &state.tensor;
    if !t.is_square() {
        return Err(invalid("parent Hamiltonian needs a square bond"));
    }
    let dim = mps::pow_capped(t.d(), l, tol::cap_dim().min(1 << 14), "parent Hamiltonian term")?;
    let blocked = mps::block_tensor(t, l)?;
    let db = t.bond();
    let mut map = CMat::zeros(dim, db * db);
    for (i, m) in blocked.mats().iter().enumerate() {
        for (k, z) in linalg::vec_rm(m).into_iter().enumerate() {
            map[(i, k)] = z;
        }
    }
    let q = linalg::range_basis(&map, tol::rank())?;
    let h = CMat::identity(dim, dim) - &q * q.adjoint();
    let mut warnings = Vec::new();
    if q.ncols() == dim {
        warnings.push(format!("𝒢_L fills the whole space (d^L = {dim} ≤ dim 𝒢_L): h = 0"));
    }
    Ok(ParentHamiltonian {
        l,
        d: t.d(),
        h: linalg::hermitian_part(&h),
        local_rank: q.ncols(),
        source: format!("parent of a D={db}, d={} tensor at L={l}", t.d()),
        warnings,
    })
}

/// Apply an operator on the listed sites of an n-site state (site 0 most
/// significant).
pub fn apply_local(op: &CMat, sites: &[usize], d: usize, n: usize, psi: &CVec) -> CVec {
    let total = psi.len();
    let strides: Vec<usize> = sites.iter().map(|&s| d.pow((n - 1 - s) as u32)).collect();
    let ld = op.nrows();
    let mut out = CVec::zeros(total);
    for idx in 0..total {
        let amp = psi[idx];
        if amp == ZERO {
            continue;
        }
        let mut local = 0;
        let mut base = idx;
        for &st in &strides {
            let dig = (idx / st) % d;
            local = local * d + dig;
            base -= dig * st;
        }
        for o in 0..ld {
            let coef = op[(o, local)];
            if coef == ZERO {
                continue;
            }
            let mut j = base;
            let mut rem = o;
            for k in (0..strides.len()).rev() {
                j += (rem % d) * strides[k];
                rem /= d;
            }
            out[j] += coef * amp;
        }
    }
    out
}

fn term_sites(l: usize, n: usize, periodic: bool) -> Vec<Vec<usize>> {
    let count = if periodic { n } else { n + 1 - l };
    (0..count).map(|i| (0..l).map(|k| (i + k) % n).collect()).collect()
}

fn apply_sum(h: &ParentHamiltonian, n: usize, periodic: bool, psi: &CVec) -> CVec {
    let mut out = CVec::zeros(psi.len());
    for sites in term_sites(h.l, n, periodic) {
        out += apply_local(&h.h, &sites, h.d, n, psi);
    }
    out
}

/// Dense Σ_i h_i.
pub fn dense_hamiltonian(h: &ParentHamiltonian, n: usize, periodic: bool) -> Result<CMat> {
    let dim = mps::pow_capped(h.d, n, DENSE_LIMIT.max(1 << 12), "dense Hamiltonian")?;
    let mut m = CMat::zeros(dim, dim);
    for c in 0..dim {
        let mut e = CVec::zeros(dim);
        e[c] = c64(1.0, 0.0);
        m.set_column(c, &apply_sum(h, n, periodic, &e));
    }
    Ok(linalg::hermitian_part(&m))
}

#[derive(Debug, Clone)]
pub struct GroundSpaceReport {
    pub n: usize,
    pub periodic: bool,
    pub dimension: usize,
    /// Lowest eigenvalues (kernel zeros followed by the gap when known).
    pub energies: Vec<f64>,
    /// Orthonormal kernel vectors as columns.
    pub basis: CMat,
    pub method: &'static str,
    /// Largest ‖H v‖ over the returned kernel vectors.
    pub residual: f64,
}

impl GroundSpaceReport {
    /// ‖P ψ‖ / ‖ψ‖ for the ground-space projector P.
    pub fn overlap(&self, psi: &CVec) -> f64 {
        let n = psi.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.basis.adjoint() * psi).norm() / n
    }

    pub fn gap(&self) -> Option<f64> {
        self.energies.get(self.dimension).copied()
    }
}

/// Kernel of Σ h_i on n sites, with the lowest energies.
pub fn ground_space(h: &ParentHamiltonian, n: usize, periodic: bool) -> Result<GroundSpaceReport> {
    if n < h.l {
        return Err(invalid(format!("chain of {n} sites is shorter than the term support {}", h.l)));
    }
    let dim = mps::pow_capped(h.d, n, tol::cap_dim(), "ground space")?;
    let cut = 1e3 * tol::eq() * n as f64;
    if dim <= DENSE_LIMIT {
        let m = dense_hamiltonian(h, n, periodic)?;
        let (vals, vecs) = linalg::eigh(&m)?;
        let k = vals.iter().filter(|&&v| v <= cut).count();
        let basis = vecs.columns(0, k).into_owned();
        let residual = column_residual(h, n, periodic, &basis);
        let energies = vals.iter().take((k + 4).min(dim)).copied().collect();
        return Ok(GroundSpaceReport { n, periodic, dimension: k, energies, basis, method: "dense", residual });
    }
    let basis = kernel_by_intersection(h, n, periodic)?;
    let k = basis.ncols();
    let residual = column_residual(h, n, periodic, &basis);
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("kernel vectors have residual {residual:e}")));
    }
    let mut energies = vec![0.0; k];
    if k < dim {
        energies.push(lowest_above_kernel(h, n, periodic, &basis)?);
    }
    Ok(GroundSpaceReport { n, periodic, dimension: k, energies, basis, method: "intersection+lanczos", residual })
}

fn column_residual(h: &ParentHamiltonian, n: usize, periodic: bool, basis: &CMat) -> f64 {
    (0..basis.ncols())
        .map(|c| apply_sum(h, n, periodic, &basis.column(c).into_owned()).norm())
        .fold(0.0, f64::max)
}

/// ∩_i ker h_i grown site by site: the open-chain kernel on m+1 sites lies
/// in (kernel on m sites) ⊗ ℂ^d.
fn kernel_by_intersection(h: &ParentHamiltonian, n: usize, periodic: bool) -> Result<CMat> {
    let d = h.d;
    let l = h.l;
    // Kernel on the first l sites.
    let (vals, vecs) = linalg::eigh(&h.h)?;
    let k0 = vals.iter().filter(|&&v| v < 0.5).count();
    let mut basis = vecs.columns(0, k0).into_owned();
    let mut m = l;
    while m < n {
        // Extend by one site.
        let dim = basis.nrows() * d;
        let mut ext = CMat::zeros(dim, basis.ncols() * d);
        for c in 0..basis.ncols() {
            for s in 0..d {
                for r in 0..basis.nrows() {
                    ext[(r * d + s, c * d + s)] = basis[(r, c)];
                }
            }
        }
        m += 1;
        let sites: Vec<usize> = (m - l..m).collect();
        basis = restrict_kernel(&ext, &[sites], &h.h, d, m)?;
        if basis.ncols() == 0 {
            return Ok(basis);
        }
    }
    if periodic && n > l - 1 {
        let wrap: Vec<Vec<usize>> = (n + 1 - l..n).map(|i| (0..l).map(|k| (i + k) % n).collect()).collect();
        if !wrap.is_empty() {
            basis = restrict_kernel(&basis, &wrap, &h.h, d, n)?;
        }
    }
    Ok(basis)
}

/// Orthonormal basis of {v ∈ span(cols) : h_s v = 0 for all listed supports}.
fn restrict_kernel(cols: &CMat, supports: &[Vec<usize>], h: &CMat, d: usize, n: usize) -> Result<CMat> {
    let k = cols.ncols();
    if k == 0 {
        return Ok(cols.clone());
    }
    // Null space of the stacked h_s·V from its Gram matrix. Gram eigenvalues
    // are squared residuals and lose half the digits, so each candidate
    // direction is judged by its recomputed residual norm.
    let mut gram = CMat::zeros(k, k);
    let mut stacked = Vec::with_capacity(supports.len());
    for s in supports {
        let mut hv = CMat::zeros(cols.nrows(), k);
        for c in 0..k {
            hv.set_column(c, &apply_local(h, s, d, n, &cols.column(c).into_owned()));
        }
        gram += hv.adjoint() * &hv;
        stacked.push(hv);
    }
    let (_, vecs) = linalg::eigh(&linalg::hermitian_part(&gram))?;
    let scale = linalg::fro(h).max(1.0);
    let resid: Vec<f64> = (0..k)
        .map(|j| {
            let w = vecs.column(j);
            stacked.iter().map(|hv| (hv * w).norm_squared()).sum::<f64>().sqrt() / scale
        })
        .collect();
    let null: Vec<usize> = (0..k).filter(|&j| resid[j] <= 1e-9).collect();
    if let Some(&r) = resid.iter().filter(|&&r| r > 1e-9 && r < 1e-6).min_by(|a, b| a.total_cmp(b)) {
        return Err(Error::Ambiguous { what: "near-zero residual while intersecting term kernels".into(), margin: r });
    }
    let mut w = CMat::zeros(k, null.len());
    for (c, &j) in null.iter().enumerate() {
        w.set_column(c, &vecs.column(j));
    }
    let out = cols * w;
    linalg::range_basis(&out, 1e-6)
}

/// Smallest eigenvalue of Σ h_i on the orthogonal complement of `kernel`,
/// by Lanczos with full reorthogonalisation and explicit restarts.
fn lowest_above_kernel(h: &ParentHamiltonian, n: usize, periodic: bool, kernel: &CMat) -> Result<f64> {
    let dim = kernel.nrows();
    let deflate = |v: &mut CVec| {
        for _ in 0..2 {
            let c = kernel.adjoint() * &*v;
            *v -= kernel * c;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start = CVec::from_iterator(dim, (0..dim).map(|_| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)));
    let steps = 120.min(dim);
    let hnorm = (h.l as f64) * (term_sites(h.l, n, periodic).len() as f64);
    for _restart in 0..30 {
        deflate(&mut start);
        let nv = start.norm();
        if nv < 1e-300 {
            return Err(Error::Numerical("Lanczos start vector vanished".into()));
        }
        let mut q: Vec<CVec> = vec![start.clone() / c64(nv, 0.0)];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..steps {
            let mut w = apply_sum(h, n, periodic, &q[j]);
            let a = q[j].dotc(&w).re;
            alpha.push(a);
            for _ in 0..2 {
                for qi in &q {
                    let c = qi.dotc(&w);
                    w -= qi * c;
                }
                deflate(&mut w);
            }
            let b = w.norm();
            if j + 1 == steps || b < 1e-12 {
                break;
            }
            beta.push(b);
            q.push(w / c64(b, 0.0));
        }
        let m = alpha.len();
        let mut t = nalgebra::DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(t);
        let (imin, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let mut y = CVec::zeros(dim);
        for (i, qi) in q.iter().take(m).enumerate() {
            y += qi * c64(eig.eigenvectors[(i, imin)], 0.0);
        }
        deflate(&mut y);
        let yn = y.norm();
        y /= c64(yn, 0.0);
        let r = apply_sum(h, n, periodic, &y) - &y * c64(theta, 0.0);
        if r.norm() <= 1e-8 * hnorm.max(1.0) {
            return Ok(theta);
        }
        start = y;
    }
    Err(Error::Numerical("Lanczos did not reach residual 1e-8".into()))
}

/// max_i ‖h_i ψ‖/‖ψ‖ for the MPS on n periodic sites.
pub fn frustration_free_residual(h: &ParentHamiltonian, state: &UniformMps, n: usize) -> Result<f64> {
    let psi = mps::dense_state(state, n)?;
    let nn = psi.norm();
    if nn == 0.0 {
        return Err(Error::Numerical("state vanishes at this length".into()));
    }
    let periodic = state.is_periodic();
    Ok(term_sites(h.l, n, periodic)
        .iter()
        .map(|s| apply_local(&h.h, s, h.d, n, &psi).norm() / nn)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMethod {
    Martingale,
    Knabe,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GapCertificate {
    pub method: GapMethod,
    pub parameters: BTreeMap<String, f64>,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub verdict: bool,
    pub margin: Option<f64>,
    pub notes: Vec<String>,
}

/// Projector onto the range of Σ_{terms in window} h (support of the sum).
fn window_projector(h: &ParentHamiltonian, width: usize) -> Result<CMat> {
    let dim = mps::pow_capped(h.d, width, 1 << 12, "martingale window")?;
    let mut sum = CMat::zeros(dim, dim);
    for c in 0..dim {
        let mut e = CVec::zeros(dim);
        e[c] = c64(1.0, 0.0);
        let col = apply_sum(h, width, false, &e);
        let mut cur = sum.column(c).into_owned();
        cur += col;
        sum.set_column(c, &cur);
    }
    let (vals, vecs) = linalg::eigh(&linalg::hermitian_part(&sum))?;
    let mut p = CMat::zeros(dim, dim);
    for (j, &v) in vals.iter().enumerate() {
        if v > 1e-9 {
            let col = vecs.column(j);
            p += &col * col.adjoint();
        }
    }
    Ok(p)
}

/// Martingale condition for blocked terms: the largest γ ∈ [0, 1] with
/// h_i h_j + h_j h_i + c(1−γ)(h_i + h_j) ≥ 0 for neighbouring windows.
pub fn martingale_certificate(h: &ParentHamiltonian, blocking: usize) -> Result<GapCertificate> {
    if blocking == 0 {
        return Err(invalid("blocking must be >= 1"));
    }
    let width = h.l - 1 + blocking;
    let span = width + blocking;
    let d = h.d;
    mps::pow_capped(d, span, 1 << 12, "martingale pair")?;
    let p = window_projector(h, width)?;
    let pad = |left: usize, right: usize| -> CMat {
        let a = CMat::identity(d.pow(left as u32), d.pow(left as u32));
        let b = CMat::identity(d.pow(right as u32), d.pow(right as u32));
        linalg::kron(&linalg::kron(&a, &p), &b)
    };
    let hi = pad(0, blocking);
    let hj = pad(blocking, 0);
    // Windows shifted by `blocking` overlap only their nearest neighbours
    // when width < 2·blocking.
    let per_side = (width + blocking - 1) / blocking - 1;
    let degree = 2 * per_side.max(1);
    let c = 1.0 / degree as f64;
    let anti = &hi * &hj + &hj * &hi;
    let sum = &hi + &hj;
    let min_at = |gamma: f64| -> Result<f64> {
        linalg::min_eig(&(&anti + &sum * c64(c * (1.0 - gamma), 0.0)))
    };
    let psd_tol = 1e-10;
    let mut params = BTreeMap::new();
    params.insert("blocking".to_string(), blocking as f64);
    params.insert("window".to_string(), width as f64);
    params.insert("c_ij".to_string(), c);
    let mut notes = Vec::new();
    let gamma = if min_at(1.0)? >= -psd_tol {
        notes.push("anticommutator is positive semidefinite: γ = 1".into());
        1.0
    } else if min_at(0.0)? < -psd_tol {
        notes.push("condition fails already at γ = 0".into());
        0.0
    } else {
        let (mut lo, mut hi_) = (0.0, 1.0);
        while hi_ - lo > 1e-4 {
            let mid = 0.5 * (lo + hi_);
            if min_at(mid)? >= -psd_tol {
                lo = mid;
            } else {
                hi_ = mid;
            }
        }
        lo
    };
    Ok(GapCertificate {
        method: GapMethod::Martingale,
        parameters: params,
        measured: Some(gamma),
        threshold: 0.0,
        verdict: gamma > 0.0,
        margin: Some(gamma),
        notes,
    })
}

/// Knabe-type finite-size criterion on an open n-site chain.
pub fn knabe_certificate(h: &ParentHamiltonian, n: usize) -> Result<GapCertificate> {
    if n < 3 {
        return Err(invalid("Knabe criterion needs n > 2"));
    }
    if h.l != 2 {
        return Err(invalid("Knabe criterion needs a nearest-neighbour term; block the tensor so that L = 2"));
    }
    check_projector(&h.h)?;
    let knabe = 1.0 / (n as f64 - 1.0);
    let gosset = 6.0 / (n as f64 * (n as f64 + 1.0));
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("knabe_threshold".to_string(), knabe);
    params.insert("gosset_mozgunov_threshold".to_string(), gosset);
    if h.is_zero() {
        return Ok(GapCertificate {
            method: GapMethod::Knabe,
            parameters: params,
            measured: None,
            threshold: gosset,
            verdict: false,
            margin: None,
            notes: vec!["trivially gapped, no excited spectrum".into()],
        });
    }
    mps::pow_capped(h.d, n, DENSE_LIMIT.max(1 << 12), "Knabe subchain")?;
    let m = dense_hamiltonian(h, n, false)?;
    let (vals, _) = linalg::eigh(&m)?;
    let cut = 1e3 * tol::eq() * n as f64;
    let gap = vals.iter().copied().find(|&v| v > cut);
    let Some(gap) = gap else {
        return Ok(GapCertificate {
            method: GapMethod::Knabe,
            parameters: params,
            measured: None,
            threshold: gosset,
            verdict: false,
            margin: None,
            notes: vec!["subchain Hamiltonian vanishes identically".into()],
        });
    };
    let mut notes = Vec::new();
    notes.push(format!("gap {gap:.12} vs 1/(n−1) = {knabe:.12}: {}", if gap > knabe { "passes" } else { "fails" }));
    Ok(GapCertificate {
        method: GapMethod::Knabe,
        parameters: params,
        measured: Some(gap),
        threshold: gosset,
        verdict: gap > gosset,
        margin: Some(gap - gosset),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::MpsTensor;
    use crate::linalg::ONE;

    fn ghz() -> UniformMps {
        UniformMps::periodic(MpsTensor::from_fn(2, 2, 2, |i, a, b| if i == a && a == b { ONE } else { ZERO }).unwrap())
            .unwrap()
    }

    #[test]
    fn ghz_parent_is_domain_wall_projector() {
        let h = parent_hamiltonian(&ghz(), 2).unwrap();
        let expect = linalg::from_real(4, 4, &[0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0.]);
        assert!(linalg::fro(&(h.h - expect)) < 1e-12);
    }

    #[test]
    fn apply_local_matches_kron() {
        let x = linalg::from_real(2, 2, &[0., 1., 1., 0.]);
        let psi = CVec::from_iterator(8, (0..8).map(|k| c64(k as f64, 0.0)));
        let out = apply_local(&x, &[1], 2, 3, &psi);
        let full = linalg::kron(&linalg::kron(&CMat::identity(2, 2), &x), &CMat::identity(2, 2));
        assert!((out - full * psi).norm() < 1e-14);
    }

    #[test]
    fn intersection_agrees_with_dense() {
        let h = parent_hamiltonian(&ghz(), 2).unwrap();
        let k = kernel_by_intersection(&h, 5, true).unwrap();
        assert_eq!(k.ncols(), 2);
        assert_eq!(ground_space(&h, 5, true).unwrap().dimension, 2);
    }
}
