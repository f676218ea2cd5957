//! Uniform matrix product states, their transfer operators and the
//! quantities derived from them (correlation length, entanglement spectrum,
//! reduced density matrices, correlation functions).
//!
//! Conventions: the site tensor is a list of matrices `A^i` (physical index
//! `i`, left bond row, right bond column). The transfer operator is
//! `E = Σ_i A^i ⊗ conj(A^i)` with row index `(α, α')` flattened as
//! `α·D + α'`; acting on a row-major flattened `ρ` it maps
//! `ρ ↦ Σ_i A^i ρ A^i†`. Multi-site configurations are flattened with the
//! first site most significant.

use crate::error::{dim, invalid, Error, Result};
use crate::linalg::{self, c64, CMat, CVec, DenseTensor, C64, ONE, ZERO};
use crate::tol;
use rand::Rng;

/// The matrices `A^i` of one site, all of shape `dl × dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsTensor {
    mats: Vec<CMat>,
}

impl MpsTensor {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let first = mats.first().ok_or_else(|| invalid("MPS tensor needs physical dimension >= 1"))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(invalid("MPS bond dimensions must be >= 1"));
        }
        for m in &mats {
            if m.shape() != shape {
                return Err(dim(format!("matrix shapes differ: {:?} vs {:?}", m.shape(), shape)));
            }
            if !linalg::is_finite(m) {
                return Err(invalid("non-finite MPS entry"));
            }
        }
        Ok(MpsTensor { mats })
    }

    /// Build from a row-major table `data[i][α][β]`.
    pub fn from_fn(d: usize, dl: usize, dr: usize, f: impl Fn(usize, usize, usize) -> C64) -> Result<Self> {
        let mats = (0..d).map(|i| CMat::from_fn(dl, dr, |a, b| f(i, a, b))).collect();
        Self::new(mats)
    }

    pub fn random<R: Rng>(rng: &mut R, d: usize, bond: usize) -> Self {
        let mats = (0..d)
            .map(|_| CMat::from_fn(bond, bond, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        MpsTensor { mats }
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn dl(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn dr(&self) -> usize {
        self.mats[0].ncols()
    }

    /// Bond dimension of a square tensor.
    pub fn bond(&self) -> usize {
        self.dl()
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &CMat {
        &self.mats[i]
    }

    pub fn is_square(&self) -> bool {
        self.dl() == self.dr()
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        MpsTensor { mats: self.mats.iter().map(f).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|m| m * s)
    }

    /// X · A^i · X⁻¹.
    pub fn gauge(&self, x: &CMat) -> Result<Self> {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("gauge matrix is singular".into()))?;
        Ok(self.map(|m| x * m * &inv))
    }

    /// Apply a physical operator: B^i = Σ_j u_ij A^j.
    pub fn act_physical(&self, u: &CMat) -> Result<Self> {
        if u.ncols() != self.d() {
            return Err(dim(format!("operator has {} columns, tensor d = {}", u.ncols(), self.d())));
        }
        let mats = (0..u.nrows())
            .map(|i| {
                let mut acc = CMat::zeros(self.dl(), self.dr());
                for j in 0..self.d() {
                    if u[(i, j)] != ZERO {
                        acc += &self.mats[j] * u[(i, j)];
                    }
                }
                acc
            })
            .collect();
        MpsTensor::new(mats)
    }

    /// Tensor with axes (physical, left, right).
    pub fn to_dense(&self) -> DenseTensor {
        let mut data = Vec::with_capacity(self.d() * self.dl() * self.dr());
        for m in &self.mats {
            data.extend(linalg::vec_rm(m));
        }
        DenseTensor::new(vec!["p", "l", "r"], vec![self.d(), self.dl(), self.dr()], data)
            .expect("consistent shape")
    }

    pub fn from_dense(t: &DenseTensor) -> Result<Self> {
        if t.rank() != 3 {
            return Err(dim("MPS tensor needs axes (physical, left, right)"));
        }
        let (d, dl, dr) = (t.shape()[0], t.shape()[1], t.shape()[2]);
        let data = t.data();
        Self::from_fn(d, dl, dr, |i, a, b| data[(i * dl + a) * dr + b])
    }

    /// Direct sum ⊕ of two tensors with the same physical dimension.
    pub fn direct_sum(&self, other: &MpsTensor) -> Result<Self> {
        if self.d() != other.d() {
            return Err(dim("direct sum needs equal physical dimension"));
        }
        let (a1, b1) = (self.dl(), self.dr());
        let (a2, b2) = (other.dl(), other.dr());
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(x, y)| {
                let mut m = CMat::zeros(a1 + a2, b1 + b2);
                m.view_mut((0, 0), (a1, b1)).copy_from(x);
                m.view_mut((a1, b1), (a2, b2)).copy_from(y);
                m
            })
            .collect();
        MpsTensor::new(mats)
    }

    /// Tensor product of two site tensors: physical index i·d₂ + j, bond
    /// indices α·D₂ + β.
    pub fn tensor_product(&self, other: &MpsTensor) -> Self {
        let mut mats = Vec::with_capacity(self.d() * other.d());
        for a in &self.mats {
            for b in &other.mats {
                mats.push(linalg::kron(a, b));
            }
        }
        MpsTensor { mats }
    }
}

/// Boundary condition of a uniform MPS.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Amplitude (l| A…A |r) with no conjugation of `l`.
    Open { l: CVec, r: CVec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformMps {
    pub tensor: MpsTensor,
    pub boundary: Boundary,
}

impl UniformMps {
    pub fn periodic(tensor: MpsTensor) -> Result<Self> {
        if !tensor.is_square() {
            return Err(dim("uniform MPS needs a square bond"));
        }
        Ok(UniformMps { tensor, boundary: Boundary::Periodic })
    }

    pub fn open(tensor: MpsTensor, l: CVec, r: CVec) -> Result<Self> {
        if !tensor.is_square() {
            return Err(dim("uniform MPS needs a square bond"));
        }
        if l.len() != tensor.bond() || r.len() != tensor.bond() {
            return Err(dim("boundary vectors must have the bond dimension"));
        }
        Ok(UniformMps { tensor, boundary: Boundary::Open { l, r } })
    }

    pub fn d(&self) -> usize {
        self.tensor.d()
    }

    pub fn bond(&self) -> usize {
        self.tensor.bond()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.boundary, Boundary::Periodic)
    }

    pub fn with_tensor(&self, tensor: MpsTensor) -> Result<Self> {
        match &self.boundary {
            Boundary::Periodic => UniformMps::periodic(tensor),
            Boundary::Open { l, r } => UniformMps::open(tensor, l.clone(), r.clone()),
        }
    }

    pub(crate) fn require_periodic(&self, what: &str) -> Result<()> {
        if self.is_periodic() {
            Ok(())
        } else {
            Err(invalid(format!("{what} needs a periodic boundary")))
        }
    }
}

fn close_boundary(m: &CMat, b: &Boundary) -> C64 {
    match b {
        Boundary::Periodic => linalg::trace(m),
        Boundary::Open { l, r } => (l.transpose() * m * r)[(0, 0)],
    }
}

/// Amplitude of a configuration, first site leftmost.
pub fn amplitude(mps: &UniformMps, config: &[usize]) -> Result<C64> {
    if config.is_empty() {
        return Err(invalid("configuration of length 0"));
    }
    let d = mps.d();
    let mut m = CMat::identity(mps.bond(), mps.bond());
    for &i in config {
        if i >= d {
            return Err(invalid(format!("physical index {i} out of range (d = {d})")));
        }
        m = m * mps.tensor.mat(i);
    }
    Ok(close_boundary(&m, &mps.boundary))
}

/// Split a flat index into `n` digits base `d`, most significant first.
pub fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = x % d;
        x /= d;
    }
    out
}

fn checked_pow(d: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc.checked_mul(d)?;
    }
    Some(acc)
}

/// d^k, or a cap error when it exceeds `limit`.
pub fn pow_capped(d: usize, k: usize, limit: usize, what: &str) -> Result<usize> {
    match checked_pow(d, k) {
        Some(v) if v <= limit => Ok(v),
        _ => Err(Error::Cap(format!("{what}: {d}^{k} exceeds the limit {limit}"))),
    }
}

/// Block `k` sites into one with physical dimension d^k.
pub fn block_sites(mps: &UniformMps, k: usize) -> Result<UniformMps> {
    let t = block_tensor(&mps.tensor, k)?;
    mps.with_tensor(t)
}

pub fn block_tensor(t: &MpsTensor, k: usize) -> Result<MpsTensor> {
    if k == 0 {
        return Err(invalid("blocking factor must be >= 1"));
    }
    let n = pow_capped(t.d(), k, tol::cap_dim(), "blocked physical dimension")?;
    let mut cur: Vec<CMat> = t.mats().to_vec();
    for _ in 1..k {
        let mut next = Vec::with_capacity(cur.len() * t.d());
        for m in &cur {
            for a in t.mats() {
                next.push(m * a);
            }
        }
        cur = next;
    }
    debug_assert_eq!(cur.len(), n);
    MpsTensor::new(cur)
}

/// All d^N amplitudes, first site most significant.
pub fn dense_state(mps: &UniformMps, n: usize) -> Result<CVec> {
    if n == 0 {
        return Err(invalid("chain length 0"));
    }
    pow_capped(mps.d(), n, tol::cap_dim(), "dense state")?;
    let blocked = block_tensor(&mps.tensor, n)?;
    Ok(CVec::from_iterator(
        blocked.d(),
        blocked.mats().iter().map(|m| close_boundary(m, &mps.boundary)),
    ))
}

/// E = Σ_i A^i ⊗ conj(A^i).
pub fn transfer_matrix(t: &MpsTensor) -> CMat {
    let (a, b) = (t.dl(), t.dr());
    let mut e = CMat::zeros(a * a, b * b);
    for m in t.mats() {
        e += linalg::kron(m, &m.map(|z| z.conj()));
    }
    e
}

/// E_O = Σ_{s,s'} O_{s s'} A^{s'} ⊗ conj(A^s), the transfer operator
/// dressed with a single-site operator.
pub fn dressed_transfer(t: &MpsTensor, op: &CMat) -> Result<CMat> {
    let d = t.d();
    if op.shape() != (d, d) {
        return Err(dim(format!("operator must be {d}x{d}")));
    }
    let (a, b) = (t.dl(), t.dr());
    let mut e = CMat::zeros(a * a, b * b);
    for s in 0..d {
        let cs = t.mat(s).map(|z| z.conj());
        for sp in 0..d {
            let o = op[(s, sp)];
            if o != ZERO {
                e += linalg::kron(t.mat(sp), &cs) * o;
            }
        }
    }
    Ok(e)
}

#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub matrix: CMat,
    /// Leading eigenvalue (the spectral radius, real and nonnegative).
    pub lambda1: C64,
    pub rho_l: CMat,
    pub rho_r: CMat,
    /// Peripheral eigenvalues divided by λ1.
    pub peripheral: Vec<C64>,
    /// Full spectrum (of the possibly normalised matrix), descending modulus.
    pub spectrum: Vec<C64>,
    pub normalized: bool,
}

/// Fixed space of `E` at eigenvalue `r`: right and left bases, biorthogonal.
pub(crate) struct FixedSpace {
    pub right: CMat,
    pub left: CMat,
}

pub(crate) fn fixed_space(e: &CMat, r: f64) -> Result<FixedSpace> {
    let n = e.nrows();
    let shifted = e - CMat::identity(n, n) * c64(r, 0.0);
    let scale = linalg::fro(e).max(r).max(1e-300);
    let s = linalg::svd(&shifted)?;
    let thr = 1e-9 * scale;
    let idx: Vec<usize> = (0..n).filter(|&j| s.s[j] <= thr).collect();
    if idx.is_empty() {
        return Err(Error::Numerical(format!("no fixed point found at eigenvalue {r}")));
    }
    let mut right = CMat::zeros(n, idx.len());
    let mut left = CMat::zeros(n, idx.len());
    for (k, &j) in idx.iter().enumerate() {
        right.set_column(k, &s.v.column(j));
        left.set_column(k, &s.u.column(j));
    }
    let lr = left.adjoint() * &right;
    let sv = linalg::svd(&lr)?;
    if sv.s.last().copied().unwrap_or(0.0) < 1e-7 {
        return Err(Error::Defective("leading eigenvalue of the transfer operator has a Jordan block".into()));
    }
    let inv = lr.try_inverse().ok_or_else(|| Error::Defective("singular fixed-space pairing".into()))?;
    left = &left * inv.adjoint();
    Ok(FixedSpace { right, left })
}

/// PSD fixed points (ρR of E, ρL of E†) obtained as the spectral projection
/// of the identity onto the fixed space. Both have unit trace.
pub(crate) fn psd_fixed_points(e: &CMat, dim_l: usize, r: f64) -> Result<(CMat, CMat, FixedSpace)> {
    let fs = fixed_space(e, r)?;
    let n = dim_l;
    let id = CVec::from_iterator(n * n, (0..n * n).map(|k| if k / n == k % n { ONE } else { ZERO }));
    // P = R L†, P(I) and P†(I).
    let pr = &fs.right * (fs.left.adjoint() * &id);
    let pl = &fs.left * (fs.right.adjoint() * &id);
    let rho_r = normalize_psd(&linalg::unvec(pr.as_slice(), n, n))?;
    let rho_l = normalize_psd(&linalg::unvec(pl.as_slice(), n, n))?;
    Ok((rho_l, rho_r, fs))
}

fn normalize_psd(m: &CMat) -> Result<CMat> {
    let h = linalg::hermitian_part(m);
    let t = linalg::trace(&h).re;
    if !(t.abs() > 1e-300) {
        return Err(Error::Numerical("fixed point has zero trace".into()));
    }
    Ok(h / c64(t, 0.0))
}

/// Spectral radius of a transfer matrix (its leading eigenvalue).
pub fn spectral_radius(e: &CMat) -> Result<f64> {
    Ok(linalg::eigenvalues(e)?.first().map(|z| z.norm()).unwrap_or(0.0))
}

pub(crate) fn is_peripheral(z: C64, r: f64) -> bool {
    z.norm() >= r * (1.0 - tol::rank())
}

/// Transfer operator with fixed points and peripheral spectrum. With
/// `normalize` the matrix and spectrum are divided by λ1.
pub fn transfer_operator(mps: &UniformMps, normalize: bool) -> Result<TransferOperator> {
    transfer_operator_of(&mps.tensor, normalize)
}

pub fn transfer_operator_of(t: &MpsTensor, normalize: bool) -> Result<TransferOperator> {
    if !t.is_square() {
        return Err(dim("transfer operator needs a square bond"));
    }
    let mut e = transfer_matrix(t);
    let spec = linalg::eigenvalues(&e)?;
    let r = spec[0].norm();
    if r <= 1e-300 {
        return Err(Error::Invalid("transfer operator is nilpotent (tensor generates only zero states)".into()));
    }
    let (rho_l, rho_r, _) = psd_fixed_points(&e, t.bond(), r)?;
    let overlap = linalg::trace(&(&rho_l * &rho_r)).re;
    let rho_l = if overlap.abs() > 1e-14 { rho_l / c64(overlap, 0.0) } else { rho_l };
    let peripheral: Vec<C64> = spec.iter().filter(|z| is_peripheral(**z, r)).map(|z| z / r).collect();
    let spectrum = if normalize {
        e /= c64(r, 0.0);
        spec.iter().map(|z| z / r).collect()
    } else {
        spec
    };
    Ok(TransferOperator {
        matrix: e,
        lambda1: c64(if normalize { 1.0 } else { r }, 0.0),
        rho_l,
        rho_r,
        peripheral,
        spectrum,
        normalized: normalize,
    })
}

/// Diagnostics for normality.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NormalityReport {
    pub normal: bool,
    pub peripheral_count: usize,
    pub fixed_space_dim: usize,
    pub rank_rho_l: usize,
    pub rank_rho_r: usize,
    pub bond: usize,
}

pub fn normality(t: &MpsTensor) -> Result<NormalityReport> {
    let e = transfer_matrix(t);
    let spec = linalg::eigenvalues(&e)?;
    let r = spec[0].norm();
    let bond = t.bond();
    if r <= 1e-300 {
        return Ok(NormalityReport {
            normal: false,
            peripheral_count: 0,
            fixed_space_dim: 0,
            rank_rho_l: 0,
            rank_rho_r: 0,
            bond,
        });
    }
    let peripheral_count = spec.iter().filter(|z| is_peripheral(**z, r)).count();
    let (rho_l, rho_r, fs) = match psd_fixed_points(&e, bond, r) {
        Ok(x) => x,
        Err(Error::Defective(_)) => {
            // A Jordan block at the spectral radius: reducible with coupled
            // equal-weight blocks, never normal.
            return Ok(NormalityReport {
                normal: false,
                peripheral_count,
                fixed_space_dim: 1,
                rank_rho_l: 0,
                rank_rho_r: 0,
                bond,
            });
        }
        Err(e) => return Err(e),
    };
    let rank_of = |m: &CMat| linalg::svd(m).map(|s| s.rank());
    let (rl, rr) = (rank_of(&rho_l)?, rank_of(&rho_r)?);
    let fixed_space_dim = fs.right.ncols();
    Ok(NormalityReport {
        normal: peripheral_count == 1 && fixed_space_dim == 1 && rl == bond && rr == bond,
        peripheral_count,
        fixed_space_dim,
        rank_rho_l: rl,
        rank_rho_r: rr,
        bond,
    })
}

pub(crate) fn require_normal(t: &MpsTensor) -> Result<NormalityReport> {
    let rep = normality(t)?;
    if !rep.normal {
        return Err(Error::NotNormal(format!(
            "{} peripheral eigenvalue(s), fixed-space dimension {}, fixed-point ranks ({}, {}) of {}",
            rep.peripheral_count, rep.fixed_space_dim, rep.rank_rho_l, rep.rank_rho_r, rep.bond
        )));
    }
    Ok(rep)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EntanglementData {
    /// Descending, summing to one.
    pub schmidt_squares: Vec<f64>,
    /// (α, S_α) pairs; α = 1 is the von Neumann entropy.
    pub renyi: Vec<(f64, f64)>,
    /// `None` means infinite.
    pub correlation_length: Option<f64>,
}

/// Rényi entropy S_α of a probability vector (natural log).
pub fn renyi_entropy(p: &[f64], alpha: f64) -> f64 {
    let p: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if (alpha - 1.0).abs() < 1e-12 {
        -p.iter().map(|x| x * x.ln()).sum::<f64>()
    } else if alpha.is_infinite() {
        -p.iter().copied().fold(0.0, f64::max).ln()
    } else {
        p.iter().map(|x| x.powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
    }
}

pub const DEFAULT_RENYI: [f64; 4] = [0.5, 1.0, 2.0, f64::INFINITY];

/// ξ = −1/ln|λ2/λ1| for a normal tensor; 0 when there is no λ2 or it
/// vanishes.
pub fn correlation_length(mps: &UniformMps) -> Result<EntanglementData> {
    require_normal(&mps.tensor)?;
    let to = transfer_operator(mps, true)?;
    let xi = xi_from_spectrum(&to.spectrum);
    Ok(EntanglementData { schmidt_squares: vec![], renyi: vec![], correlation_length: xi })
}

fn xi_from_spectrum(spec: &[C64]) -> Option<f64> {
    match spec.get(1) {
        None => Some(0.0),
        Some(l2) => {
            let m = l2.norm();
            if m <= 1e-15 {
                Some(0.0)
            } else if m >= 1.0 - tol::rank() {
                None
            } else {
                Some(-1.0 / m.ln())
            }
        }
    }
}

/// Half-infinite-cut Schmidt spectrum: eigenvalues of ρL·ρR.
pub fn entanglement_spectrum(mps: &UniformMps) -> Result<EntanglementData> {
    entanglement_spectrum_with(mps, &DEFAULT_RENYI)
}

pub fn entanglement_spectrum_with(mps: &UniformMps, alphas: &[f64]) -> Result<EntanglementData> {
    require_normal(&mps.tensor)?;
    let to = transfer_operator(mps, true)?;
    let sq = linalg::psd_sqrt(&to.rho_r)?;
    let h = &sq * &to.rho_l * &sq;
    let (vals, _) = linalg::eigh(&h)?;
    let mut p: Vec<f64> = vals.iter().map(|&x| x.max(0.0)).collect();
    p.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    let renyi = alphas.iter().map(|&a| (a, renyi_entropy(&p, a))).collect();
    Ok(EntanglementData {
        schmidt_squares: p,
        renyi,
        correlation_length: xi_from_spectrum(&to.spectrum),
    })
}

/// Chain length for reduced density matrices: finite or thermodynamic limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainLength {
    Finite(usize),
    Infinite,
}

/// Reduced density matrix of `n` consecutive sites. For open boundaries the
/// block is centred in the chain.
pub fn reduced_density_matrix(mps: &UniformMps, n: usize, total: ChainLength) -> Result<CMat> {
    if n == 0 {
        return Err(invalid("block of 0 sites"));
    }
    let d = mps.d();
    let dn = pow_capped(d, n, 1 << 14, "reduced density matrix")?;
    let blocked = block_tensor(&mps.tensor, n)?;
    let mut rho = CMat::zeros(dn, dn);
    match (total, &mps.boundary) {
        (ChainLength::Infinite, _) => {
            require_normal(&mps.tensor)?;
            let to = transfer_operator(mps, true)?;
            let left: Vec<CMat> = blocked.mats().iter().map(|m| &to.rho_l * m * &to.rho_r).collect();
            for i in 0..dn {
                for j in 0..dn {
                    rho[(i, j)] = (left[i].clone() * blocked.mat(j).adjoint()).trace();
                }
            }
        }
        (ChainLength::Finite(nn), Boundary::Periodic) => {
            if nn < n {
                return Err(invalid("block longer than the chain"));
            }
            let e = transfer_matrix(&mps.tensor);
            let rest = matrix_power(&e, nn - n);
            // ρ_ij = tr((A^i ⊗ conj A^j) E^{N−n}).
            for i in 0..dn {
                for j in 0..dn {
                    let k = linalg::kron(blocked.mat(i), &blocked.mat(j).map(|z| z.conj()));
                    rho[(i, j)] = (k * &rest).trace();
                }
            }
        }
        (ChainLength::Finite(nn), Boundary::Open { l, r }) => {
            if nn < n {
                return Err(invalid("block longer than the chain"));
            }
            let e = transfer_matrix(&mps.tensor);
            let off = (nn - n) / 2;
            let lm = CMat::from_row_slice(1, l.len(), l.as_slice());
            let rm = CMat::from_column_slice(r.len(), 1, r.as_slice());
            let lv = linalg::kron(&lm, &lm.map(|z| z.conj()));
            let rv = linalg::kron(&rm, &rm.map(|z| z.conj()));
            let left = lv * matrix_power(&e, off);
            let right = matrix_power(&e, nn - n - off) * rv;
            for i in 0..dn {
                for j in 0..dn {
                    let k = linalg::kron(blocked.mat(i), &blocked.mat(j).map(|z| z.conj()));
                    rho[(i, j)] = (&left * k * &right)[(0, 0)];
                }
            }
        }
    }
    let t = linalg::trace(&rho);
    if t.norm() <= 1e-300 {
        return Err(Error::Numerical("state has zero norm at this length".into()));
    }
    Ok(linalg::hermitian_part(&(rho / t)))
}

pub fn matrix_power(m: &CMat, k: usize) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Connected correlator ⟨X_0 Y_n⟩ − ⟨X⟩⟨Y⟩ in the thermodynamic limit.
pub fn correlation_function(mps: &UniformMps, x: &CMat, y: &CMat, n: usize) -> Result<C64> {
    if n == 0 {
        return Err(invalid("separation must be >= 1"));
    }
    require_normal(&mps.tensor)?;
    let to = transfer_operator(mps, true)?;
    let t = &mps.tensor;
    let lam = c64(transfer_radius(t)?, 0.0);
    let ex = dressed_transfer(t, x)? / lam;
    let ey = dressed_transfer(t, y)? / lam;
    let rv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_r));
    let lv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_l));
    let norm = (lv.adjoint() * &rv)[(0, 0)];
    let proj = (&rv * lv.adjoint()) / norm;
    let mid = matrix_power(&to.matrix, n - 1) - proj;
    let val = (lv.adjoint() * ex * mid * ey * &rv)[(0, 0)] / norm;
    Ok(val)
}

fn transfer_radius(t: &MpsTensor) -> Result<f64> {
    spectral_radius(&transfer_matrix(t))
}

/// Connected correlator on a periodic chain of `total` sites.
pub fn correlation_function_finite(mps: &UniformMps, x: &CMat, y: &CMat, n: usize, total: usize) -> Result<C64> {
    mps.require_periodic("finite correlation function")?;
    if n == 0 || n >= total {
        return Err(invalid("separation must lie in 1..N"));
    }
    let t = &mps.tensor;
    let e = transfer_matrix(t);
    let ex = dressed_transfer(t, x)?;
    let ey = dressed_transfer(t, y)?;
    let z = matrix_power(&e, total).trace();
    if z.norm() <= 1e-300 {
        return Err(Error::Numerical("state has zero norm at this length".into()));
    }
    let en1 = matrix_power(&e, n - 1);
    let rest = matrix_power(&e, total - n - 1);
    let xy = (&ex * &en1 * &ey * &rest).trace() / z;
    let e_rest = matrix_power(&e, total - 1);
    let xv = (&ex * &e_rest).trace() / z;
    let yv = (&ey * &e_rest).trace() / z;
    Ok(xy - xv * yv)
}

/// Local expectation ⟨O⟩ in the thermodynamic limit of a normal tensor.
pub fn local_expectation(mps: &UniformMps, op: &CMat) -> Result<C64> {
    require_normal(&mps.tensor)?;
    let to = transfer_operator(mps, true)?;
    let lam = c64(transfer_radius(&mps.tensor)?, 0.0);
    let eo = dressed_transfer(&mps.tensor, op)? / lam;
    let rv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_r));
    let lv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_l));
    Ok((lv.adjoint() * eo * &rv)[(0, 0)] / (lv.adjoint() * &rv)[(0, 0)])
}
