//! Canonical forms, normality, injectivity and the same-state decision
//! procedure with gauge recovery.
//!
//! The canonical form splits a tensor along common invariant subspaces found
//! from supports of positive fixed points of the transfer channel, removes
//! periodicity by blocking, and brings every surviving block to the gauge
//! `Σ A A† = 1` with diagonal left fixed point.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c64, CMat, CVec, C64, ONE, ZERO};
use crate::mps::{self, MpsTensor, UniformMps};
use crate::tol;
use num_integer::Integer;

/// One normal block `μ·A` of a canonical form.
#[derive(Debug, Clone)]
pub struct Block {
    /// Positive weight μ; the block tensor has spectral radius one.
    pub weight: f64,
    pub tensor: MpsTensor,
    /// Offset of this block in the gauged basis.
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Number of input sites blocked to remove periodicity.
    pub blocking_p: usize,
    pub blocks: Vec<Block>,
    /// G with G⁻¹·B^i·G block upper triangular, B the p-blocked input; the
    /// diagonal blocks at the recorded offsets equal μ_k·A_k.
    pub gauge: CMat,
    /// Largest off-diagonal entry discarded, relative to the tensor norm.
    pub offdiag: f64,
    /// Smallest distance of a rank decision from the cut, in decades.
    pub rank_margin: f64,
}

impl CanonicalForm {
    /// ⊕_k μ_k A_k as a single tensor.
    pub fn reassemble(&self) -> Result<MpsTensor> {
        let mut it = self.blocks.iter();
        let first = it.next().ok_or_else(|| invalid("canonical form without blocks"))?;
        let mut acc = first.tensor.scale(c64(first.weight, 0.0));
        for b in it {
            acc = acc.direct_sum(&b.tensor.scale(c64(b.weight, 0.0)))?;
        }
        Ok(acc)
    }

    pub fn physical_dim(&self) -> usize {
        self.blocks.first().map(|b| b.tensor.d()).unwrap_or(0)
    }
}

/// Eigenvalue-based rank with an ambiguity zone around the cut.
fn psd_rank(m: &CMat, margin: &mut f64) -> Result<(usize, CMat)> {
    let (vals, vecs) = linalg::eigh(m)?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return Ok((0, CMat::zeros(m.nrows(), 0)));
    }
    let cut = tol::rank();
    let mut keep = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        let rel = v.abs() / top;
        if rel > cut {
            keep.push(k);
        }
        if rel > 0.0 {
            let decades = (rel.log10() - cut.log10()).abs();
            *margin = margin.min(decades);
            if decades < 1.0 {
                return Err(Error::Ambiguous {
                    what: format!("fixed-point eigenvalue {rel:e} (relative) near rank cut {cut:e}"),
                    margin: decades,
                });
            }
        }
    }
    let mut basis = CMat::zeros(m.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &vecs.column(k));
    }
    Ok((keep.len(), basis))
}

/// Hermitian fixed points spanning the (complex) fixed space given by the
/// columns of `basis`, as D×D matrices.
fn hermitian_fixed_points(basis: &CMat, d: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for c in 0..basis.ncols() {
        let m = linalg::unvec(basis.column(c).as_slice(), d, d);
        out.push(linalg::hermitian_part(&m));
        out.push((&m - m.adjoint()) * c64(0.0, -0.5));
    }
    out
}

/// Positive fixed point of lower rank than `rho0`, if the fixed space has
/// more than one dimension.
fn reduce_rank(rho0: &CMat, herms: &[CMat], margin: &mut f64) -> Result<Option<CMat>> {
    let n0 = linalg::fro(rho0);
    let biggest = herms.iter().map(linalg::fro).fold(0.0, f64::max);
    let mut best: Option<(f64, CMat)> = None;
    for h in herms.iter().filter(|h| linalg::fro(h) > 1e-8 * biggest) {
        let ip = (rho0.adjoint() * h).trace().re / (n0 * n0);
        let perp = h - rho0 * c64(ip, 0.0);
        let size = linalg::fro(&perp) / linalg::fro(h).max(1e-300);
        if best.as_ref().map_or(true, |(s, _)| size > *s) {
            best = Some((size, h.clone()));
        }
    }
    let Some((size, h)) = best else { return Ok(None) };
    if size < 1e-6 {
        return Ok(None);
    }
    let (_, supp) = psd_rank(rho0, margin)?;
    let (vals, vecs) = linalg::eigh(&(supp.adjoint() * rho0 * &supp))?;
    let inv_sqrt = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c64(1.0 / v.max(1e-300).sqrt(), 0.0)),
    ));
    let w = &supp * &vecs * inv_sqrt;
    let s = w.adjoint() * &h * &w;
    let (sv, _) = linalg::eigh(&s)?;
    let (lo, hi) = (sv[0], sv[sv.len() - 1]);
    let (h, top) = if hi.abs() >= lo.abs() { (h, hi) } else { (-h, -lo) };
    if top <= 0.0 {
        return Ok(None);
    }
    let rho1 = rho0 - h / c64(top, 0.0);
    Ok(Some(linalg::hermitian_part(&rho1)))
}

/// A positive semidefinite element of the fixed space spanned by `basis`.
fn psd_in_space(basis: &CMat, d: usize, projected_identity: Option<CMat>) -> Result<CMat> {
    if let Some(p) = projected_identity {
        let h = linalg::hermitian_part(&p);
        if linalg::min_eig(&h)? >= -1e-9 * linalg::fro(&h) {
            return Ok(h);
        }
    }
    let herms = hermitian_fixed_points(basis, d);
    let mut candidates = herms.clone();
    for h in &herms {
        candidates.push(-h);
    }
    for h in candidates {
        let n = linalg::fro(&h);
        if n < 1e-12 {
            continue;
        }
        if linalg::min_eig(&h)? >= -1e-9 * n {
            return Ok(h);
        }
    }
    Err(Error::Numerical("no positive fixed point found in the leading eigenspace".into()))
}

/// Largest relative component of A^i P outside span(P).
fn leakage(mats: &[CMat], p: &CMat) -> f64 {
    let d = p.nrows();
    let proj = CMat::identity(d, d) - p * p.adjoint();
    let scale = mats.iter().map(linalg::fro).fold(0.0, f64::max).max(1e-300);
    mats.iter().map(|a| linalg::fro(&(&proj * a * p))).fold(0.0, f64::max) / scale
}

enum Split {
    Irreducible,
    Nilpotent,
    /// Orthonormal basis of a proper invariant subspace.
    Invariant(CMat),
}

fn channel_eigenspace(e: &CMat, r: f64) -> Result<(CMat, CMat, bool)> {
    let n = e.nrows();
    let shifted = e - CMat::identity(n, n) * c64(r, 0.0);
    let scale = linalg::fro(e).max(r);
    let s = linalg::svd(&shifted)?;
    let idx: Vec<usize> = (0..n).filter(|&j| s.s[j] <= 1e-9 * scale).collect();
    let mut right = CMat::zeros(n, idx.len());
    let mut left = CMat::zeros(n, idx.len());
    for (k, &j) in idx.iter().enumerate() {
        right.set_column(k, &s.v.column(j));
        left.set_column(k, &s.u.column(j));
    }
    let pairing = left.adjoint() * &right;
    let smin = linalg::svd(&pairing)?.s.last().copied().unwrap_or(0.0);
    Ok((right, left, smin > 1e-7))
}

/// Whether the channel E is nilpotent, judged by normalised powers.
fn is_nilpotent(e: &CMat) -> bool {
    let n = linalg::fro(e);
    if n == 0.0 {
        return true;
    }
    let step = e / c64(n, 0.0);
    let mut m = step.clone();
    for _ in 1..e.nrows() {
        m = &m * &step;
    }
    linalg::fro(&m) <= 1e-10
}

fn find_invariant_subspace(mats: &[CMat], margin: &mut f64, global_r: f64) -> Result<Split> {
    let d = mats[0].nrows();
    let t = MpsTensor::new(mats.to_vec())?;
    let e = mps::transfer_matrix(&t);
    let spec = linalg::eigenvalues(&e)?;
    let r = spec[0].norm();
    if r == 0.0 || (r <= 1e-6 * global_r && (linalg::fro(&e) <= 1e-12 * global_r || is_nilpotent(&e))) {
        return Ok(Split::Nilpotent);
    }
    if d == 1 {
        return Ok(Split::Irreducible);
    }
    let (right, left, diag) = channel_eigenspace(&e, r)?;
    if right.ncols() == 0 {
        return Err(Error::Numerical("leading eigenvalue has no eigenvector".into()));
    }
    let id = CVec::from_iterator(d * d, (0..d * d).map(|k| if k / d == k % d { ONE } else { ZERO }));
    let (proj_r, proj_l) = if diag {
        let inv = (left.adjoint() * &right).try_inverse().ok_or_else(|| Error::Numerical("pairing".into()))?;
        let pr = &right * (&inv * (left.adjoint() * &id));
        let pl = &left * (inv.adjoint() * (right.adjoint() * &id));
        (Some(linalg::unvec(pr.as_slice(), d, d)), Some(linalg::unvec(pl.as_slice(), d, d)))
    } else {
        (None, None)
    };

    // Right fixed point: support is invariant under every A^i.
    let rho = psd_in_space(&right, d, proj_r)?;
    let rho = &rho / c64(linalg::trace(&rho).re, 0.0);
    let mut candidate = rho.clone();
    if right.ncols() > 1 {
        if let Some(r1) = reduce_rank(&rho, &hermitian_fixed_points(&right, d), margin)? {
            candidate = r1;
        }
    }
    let (rank, supp) = psd_rank(&candidate, margin)?;
    if rank > 0 && rank < d && leakage(mats, &supp) <= 1e-8 {
        return Ok(Split::Invariant(supp));
    }

    // Left fixed point: its support is invariant under every A^i†, so the
    // orthogonal complement is invariant under A^i.
    let sigma = psd_in_space(&left, d, proj_l)?;
    let sigma = &sigma / c64(linalg::trace(&sigma).re, 0.0);
    let mut candidate = sigma.clone();
    if left.ncols() > 1 {
        if let Some(s1) = reduce_rank(&sigma, &hermitian_fixed_points(&left, d), margin)? {
            candidate = s1;
        }
    }
    let (rank, supp) = psd_rank(&candidate, margin)?;
    if rank > 0 && rank < d {
        let comp = linalg::complement(&supp)?;
        if leakage(mats, &comp) <= 1e-8 {
            return Ok(Split::Invariant(comp));
        }
    }
    Ok(Split::Irreducible)
}

/// Irreducible diagonal block found by the recursive splitting, with its
/// basis in the coordinates of the input.
struct RawBlock {
    basis: CMat,
    mats: Vec<CMat>,
    nilpotent: bool,
}

fn decompose(mats: &[CMat], margin: &mut f64, depth: usize, global_r: f64) -> Result<Vec<RawBlock>> {
    let d = mats[0].nrows();
    if depth > 4 * d + 8 {
        return Err(Error::Numerical("invariant-subspace recursion did not terminate".into()));
    }
    match find_invariant_subspace(mats, margin, global_r)? {
        Split::Nilpotent => Ok(vec![RawBlock { basis: CMat::identity(d, d), mats: mats.to_vec(), nilpotent: true }]),
        Split::Irreducible => Ok(vec![RawBlock { basis: CMat::identity(d, d), mats: mats.to_vec(), nilpotent: false }]),
        Split::Invariant(p) => {
            let q = linalg::complement(&p)?;
            if p.ncols() + q.ncols() != d {
                return Err(Error::Numerical("invariant subspace and complement do not span".into()));
            }
            let b1: Vec<CMat> = mats.iter().map(|a| p.adjoint() * a * &p).collect();
            let b2: Vec<CMat> = mats.iter().map(|a| q.adjoint() * a * &q).collect();
            let mut out = Vec::new();
            for mut blk in decompose(&b1, margin, depth + 1, global_r)? {
                blk.basis = &p * blk.basis;
                out.push(blk);
            }
            for mut blk in decompose(&b2, margin, depth + 1, global_r)? {
                blk.basis = &q * blk.basis;
                out.push(blk);
            }
            Ok(out)
        }
    }
}

/// Number of peripheral eigenvalues of an irreducible block (its period).
fn period(mats: &[CMat]) -> Result<usize> {
    let t = MpsTensor::new(mats.to_vec())?;
    let spec = linalg::eigenvalues(&mps::transfer_matrix(&t))?;
    let r = spec[0].norm();
    Ok(spec.iter().filter(|z| mps::is_peripheral(**z, r)).count())
}

/// Bring a normal block to Σ A A† = 1 with diagonal, descending left fixed
/// point of unit trace. Returns (A, G) with A = G⁻¹ (B/√r) G.
fn normalize_block(mats: &[CMat]) -> Result<(f64, MpsTensor, CMat)> {
    let t = MpsTensor::new(mats.to_vec())?;
    let d = t.bond();
    let e = mps::transfer_matrix(&t);
    let r = mps::spectral_radius(&e)?;
    let a = t.scale(c64(1.0 / r.sqrt(), 0.0));
    let (_, rho_r, _) = mps::psd_fixed_points(&mps::transfer_matrix(&a), d, 1.0)?;
    let sq = linalg::psd_sqrt(&rho_r)?;
    let sq_inv = linalg::hermitian_fn(&rho_r, |x| 1.0 / x.max(1e-300).sqrt())?;
    let a1 = a.map(|m| &sq_inv * m * &sq);
    let (rho_l, _, _) = mps::psd_fixed_points(&mps::transfer_matrix(&a1), d, 1.0)?;
    let (vals, vecs) = linalg::eigh(&rho_l)?;
    // Descending order of the left fixed point's spectrum.
    let mut v = CMat::zeros(d, d);
    for k in 0..d {
        let mut col = vecs.column(d - 1 - k).into_owned();
        // Deterministic eigenvector phase: largest entry real positive.
        let big = col.iter().copied().fold(ZERO, |acc, z| if z.norm() > acc.norm() * (1.0 + 1e-12) { z } else { acc });
        if big.norm() > 0.0 {
            col *= big.conj() / big.norm();
        }
        v.set_column(k, &col);
    }
    let _ = vals;
    let a2 = a1.map(|m| v.adjoint() * m * &v);
    let g = &sq * &v;
    Ok((r.sqrt(), a2, g))
}

/// Canonical form of a periodic uniform MPS.
/// Largest dense transfer matrix (entries) a canonical form will build.
pub const TRANSFER_CAP: usize = 1 << 20;

pub fn canonical_form(state: &UniformMps) -> Result<CanonicalForm> {
    state.require_periodic("canonical form")?;
    let d = state.bond();
    if (d as u128).pow(4) > TRANSFER_CAP as u128 {
        return Err(Error::Cap(format!("bond dimension {d}: the transfer matrix would exceed {TRANSFER_CAP} entries")));
    }
    let mut margin = f64::INFINITY;
    let mut p = 1usize;
    loop {
        let t = if p == 1 { state.tensor.clone() } else { mps::block_tensor(&state.tensor, p)? };
        let global_r = mps::spectral_radius(&mps::transfer_matrix(&t))?;
        let raw = decompose(t.mats(), &mut margin, 0, global_r)?;
        let mut lcm = 1usize;
        for b in raw.iter().filter(|b| !b.nilpotent) {
            lcm = lcm.lcm(&period(&b.mats)?);
        }
        if lcm > 1 {
            let np = p * lcm;
            if np > d * d {
                return Err(Error::Numerical(format!("periodicity {np} exceeds the bound D² = {}", d * d)));
            }
            p = np;
            continue;
        }
        return assemble(&t, raw, p, margin);
    }
}

fn assemble(t: &MpsTensor, raw: Vec<RawBlock>, p: usize, margin: f64) -> Result<CanonicalForm> {
    let d = t.bond();
    let mut w = CMat::zeros(d, d);
    let mut g = CMat::zeros(d, d);
    let mut blocks = Vec::new();
    let mut off = 0;
    for b in &raw {
        let k = b.basis.ncols();
        w.view_mut((0, off), (d, k)).copy_from(&b.basis);
        if b.nilpotent {
            g.view_mut((off, off), (k, k)).copy_from(&CMat::identity(k, k));
        } else {
            let (mu, a, gk) = normalize_block(&b.mats)?;
            g.view_mut((off, off), (k, k)).copy_from(&gk);
            blocks.push(Block { weight: mu, tensor: a, offset: off });
        }
        off += k;
    }
    if blocks.is_empty() {
        return Err(Error::Invalid("tensor generates only zero states".into()));
    }
    let gauge = &w * &g;
    // Off-diagonal mass discarded by the block form.
    let ginv = gauge.clone().try_inverse().ok_or_else(|| Error::Numerical("singular gauge".into()))?;
    let mut offdiag: f64 = 0.0;
    let norm = t.mats().iter().map(linalg::fro).fold(0.0, f64::max).max(1e-300);
    let ranges: Vec<(usize, usize)> = raw
        .iter()
        .scan(0, |o, b| {
            let r = (*o, b.basis.ncols());
            *o += b.basis.ncols();
            Some(r)
        })
        .collect();
    for a in t.mats() {
        let m = &ginv * a * &gauge;
        for (bi, &(o1, k1)) in ranges.iter().enumerate() {
            for &(o2, k2) in ranges.iter().skip(bi + 1) {
                let blk = m.view((o1, o2), (k1, k2));
                offdiag = offdiag.max(blk.iter().fold(0.0f64, |acc, z| acc.max(z.norm())) / norm);
            }
        }
    }
    Ok(CanonicalForm { blocking_p: p, blocks, gauge, offdiag, rank_margin: margin })
}

/// Normality of a uniform MPS tensor with diagnostics.
pub fn is_normal(state: &UniformMps) -> Result<mps::NormalityReport> {
    mps::normality(&state.tensor)
}

/// Largest blocking length guaranteed to reach injectivity for a normal
/// tensor of bond dimension `d`.
pub fn injectivity_bound(d: usize) -> usize {
    let d2 = (d * d) as f64;
    (2.0 * d2 * (6.0 + (d as f64).log2())).ceil() as usize
}

/// Smallest L such that products of L matrices span all D×D matrices.
pub fn injectivity_length(state: &UniformMps) -> Result<usize> {
    mps::require_normal(&state.tensor)?;
    injectivity_length_of(&state.tensor)
}

pub(crate) fn injectivity_length_of(t: &MpsTensor) -> Result<usize> {
    let d = t.bond();
    let full = d * d;
    let bound = injectivity_bound(d);
    let to_cols = |mats: &[CMat]| {
        let mut m = CMat::zeros(full, mats.len());
        for (c, a) in mats.iter().enumerate() {
            m.set_column(c, &CVec::from_column_slice(&linalg::vec_rm(a)));
        }
        m
    };
    let mut span = linalg::range_basis(&to_cols(t.mats()), tol::rank())?;
    let mut len = 1;
    while span.ncols() < full {
        len += 1;
        if len > bound {
            return Err(Error::Numerical(format!(
                "products of length {bound} do not span all matrices; injectivity bound violated"
            )));
        }
        let mut next = Vec::with_capacity(t.d() * span.ncols());
        for a in t.mats() {
            for c in 0..span.ncols() {
                let x = linalg::unvec(span.column(c).as_slice(), d, d);
                next.push(a * x);
            }
        }
        span = linalg::range_basis(&to_cols(&next), tol::rank())?;
    }
    Ok(len)
}

/// Relation of one block to a basis member: A = e^{iφ}·X·A_member·X⁻¹.
#[derive(Debug, Clone)]
pub struct Multiplicity {
    pub block: usize,
    pub weight: f64,
    pub x: CMat,
    pub phase: f64,
}

#[derive(Debug, Clone)]
pub struct BasisOfNormalTensors {
    pub members: Vec<MpsTensor>,
    pub multiplicities: Vec<Vec<Multiplicity>>,
    /// Smallest distance, in decades, of a mixed-transfer test from its
    /// decision band.
    pub margin: f64,
}

/// Outcome of the mixed transfer test between two normal blocks.
pub struct Equivalence {
    pub x: CMat,
    pub phase: f64,
}

/// Decide whether `b = e^{iφ} X a X⁻¹` for normal blocks of spectral radius
/// one in unital gauge. Also returns how far, in decades, the leading mixed
/// eigenvalue sat from the undecidable band between `1 − 1e-6` and
/// `1 − ε_rank`.
pub fn block_equivalence(b: &MpsTensor, a: &MpsTensor) -> Result<(Option<Equivalence>, f64)> {
    if a.bond() != b.bond() || a.d() != b.d() {
        return Ok((None, f64::INFINITY));
    }
    let d = a.bond();
    let mut t = CMat::zeros(d * d, d * d);
    for (bi, ai) in b.mats().iter().zip(a.mats()) {
        t += linalg::kron(bi, &ai.map(|z| z.conj()));
    }
    let e = linalg::eig_selected(&t, |_| false)?;
    let lead = e.pairs[0].value;
    let modulus = lead.norm();
    let gap = (1.0 - modulus).abs();
    if modulus < 1.0 - 1e-6 {
        return Ok((None, (gap / 1e-6).log10()));
    }
    if gap > tol::rank() {
        return Err(Error::Ambiguous {
            what: format!("mixed transfer eigenvalue modulus {modulus}"),
            margin: gap,
        });
    }
    // Leading eigenvector M satisfies M = X·ρR(a); ρR(a) is the identity in
    // unital gauge, but solve for it anyway to accept any gauge.
    let n = d * d;
    let shifted = &t - CMat::identity(n, n) * lead;
    let s = linalg::svd(&shifted)?;
    let m = linalg::unvec(s.v.column(n - 1).as_slice(), d, d);
    let (_, rho_r, _) = mps::psd_fixed_points(&mps::transfer_matrix(a), d, 1.0)?;
    let rinv = rho_r.clone().try_inverse().ok_or_else(|| Error::Numerical("singular fixed point".into()))?;
    let x = linalg::fix_phase(&(m * rinv));
    let xinv = x.clone().try_inverse().ok_or_else(|| Error::Numerical("recovered gauge is singular".into()))?;
    let phase = lead.arg();
    let mut resid: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (bi, ai) in b.mats().iter().zip(a.mats()) {
        let pred = &x * ai * &xinv * lead.unscale(modulus);
        resid = resid.max(linalg::fro(&(bi - pred)));
        scale = scale.max(linalg::fro(bi));
    }
    if resid > 1e-6 * scale.max(1.0) {
        return Err(Error::Numerical(format!("gauge extraction residual {resid:e} too large")));
    }
    Ok((Some(Equivalence { x, phase }), (tol::rank() / gap.max(1e-300)).log10().min(16.0)))
}

/// Reduce canonical-form blocks to pairwise inequivalent members.
pub fn basis_of_normal_tensors(cf: &CanonicalForm) -> Result<BasisOfNormalTensors> {
    let tensors: Vec<(f64, MpsTensor)> = cf.blocks.iter().map(|b| (b.weight, b.tensor.clone())).collect();
    basis_of(&tensors)
}

pub(crate) fn basis_of(blocks: &[(f64, MpsTensor)]) -> Result<BasisOfNormalTensors> {
    let mut members: Vec<MpsTensor> = Vec::new();
    let mut mult: Vec<Vec<Multiplicity>> = Vec::new();
    let mut margin = f64::INFINITY;
    'outer: for (k, (mu, a)) in blocks.iter().enumerate() {
        for (j, m) in members.iter().enumerate() {
            let (eq, gap) = block_equivalence(a, m)?;
            margin = margin.min(gap);
            if let Some(eq) = eq {
                mult[j].push(Multiplicity { block: k, weight: *mu, x: eq.x, phase: eq.phase });
                continue 'outer;
            }
        }
        members.push(a.clone());
        let d = a.bond();
        mult.push(vec![Multiplicity { block: k, weight: *mu, x: CMat::identity(d, d), phase: 0.0 }]);
    }
    Ok(BasisOfNormalTensors { members, multiplicities: mult, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Equal,
    Proportional,
    Different,
}

#[derive(Debug, Clone)]
pub struct GaugeRelation {
    pub verdict: Verdict,
    /// B^i = λ·X·A^i·X⁻¹ on the (blocked) inputs, when it could be verified.
    pub x: Option<CMat>,
    pub phase: Option<f64>,
    /// Per-site scalar: V_N(b) = λ^N·V_N(a).
    pub lambda: Option<C64>,
    /// The verdict holds for chain lengths that are multiples of this.
    pub blocking_p: usize,
    /// Distance of the deciding mixed-transfer eigenvalue from the cut, in decades.
    pub margin: f64,
    pub warnings: Vec<String>,
}

fn multiset_match(a: &[C64], b: &[C64], tol_abs: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        match (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() <= tol_abs) {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Decide whether two periodic uniform MPS generate the same states.
pub fn compare_states(a: &UniformMps, b: &UniformMps) -> Result<GaugeRelation> {
    a.require_periodic("compare_states")?;
    b.require_periodic("compare_states")?;
    let different = |p: usize, margin: f64, w: Vec<String>| GaugeRelation {
        verdict: Verdict::Different,
        x: None,
        phase: None,
        lambda: None,
        blocking_p: p,
        margin,
        warnings: w,
    };
    if a.d() != b.d() {
        return Ok(different(1, f64::INFINITY, vec!["physical dimensions differ".into()]));
    }
    let mut cfa = canonical_form(a)?;
    let mut cfb = canonical_form(b)?;
    let p = cfa.blocking_p.lcm(&cfb.blocking_p);
    let (ab, bb);
    if p != cfa.blocking_p || p != cfb.blocking_p || p > 1 {
        ab = mps::block_sites(a, p)?;
        bb = mps::block_sites(b, p)?;
        cfa = canonical_form(&ab)?;
        cfb = canonical_form(&bb)?;
    } else {
        ab = a.clone();
        bb = b.clone();
    }
    let mut warnings = Vec::new();
    if p > 1 {
        warnings.push(format!("periodic structure: verdict applies to lengths divisible by {p}"));
    }
    let na = cfa.blocks.len();
    let all: Vec<(f64, MpsTensor)> = cfa
        .blocks
        .iter()
        .chain(cfb.blocks.iter())
        .map(|blk| (blk.weight, blk.tensor.clone()))
        .collect();
    let bnt = basis_of(&all)?;
    let margin = bnt.margin;
    let mut wa: Vec<Vec<C64>> = Vec::new();
    let mut wb: Vec<Vec<C64>> = Vec::new();
    for class in &bnt.multiplicities {
        let mut xa = Vec::new();
        let mut xb = Vec::new();
        for m in class {
            let w = C64::from_polar(m.weight, m.phase);
            if m.block < na {
                xa.push(w);
            } else {
                xb.push(w);
            }
        }
        wa.push(xa);
        wb.push(xb);
    }
    let scale = all.iter().map(|(w, _)| *w).fold(0.0, f64::max);
    let t = 1e-8 * scale.max(1e-300);
    let equal = wa.iter().zip(&wb).all(|(x, y)| multiset_match(x, y, t));
    let lambda = if equal {
        Some(ONE)
    } else {
        proportionality(&wa, &wb, t)
    };
    let Some(lambda) = lambda else {
        return Ok(different(p, margin, warnings));
    };
    let verdict = if (lambda - ONE).norm() <= 1e-8 { Verdict::Equal } else { Verdict::Proportional };
    let x = assemble_gauge(&ab, &bb, &cfa, &cfb, &bnt, lambda)?;
    if x.is_none() {
        warnings.push("no single similarity relates the inputs (non-direct-sum structure); gauge omitted".into());
    }
    Ok(GaugeRelation {
        verdict,
        x,
        phase: Some(lambda.arg()),
        lambda: Some(lambda),
        blocking_p: p,
        margin,
        warnings,
    })
}

fn proportionality(wa: &[Vec<C64>], wb: &[Vec<C64>], t: f64) -> Option<C64> {
    let (ci, xa) = wa.iter().enumerate().find(|(_, x)| !x.is_empty())?;
    let y0 = *wb[ci].first()?;
    for x in xa {
        if x.norm() == 0.0 {
            continue;
        }
        let lam = y0 / x;
        let ok = wa.iter().zip(wb).all(|(x, y)| {
            let scaled: Vec<C64> = x.iter().map(|z| z * lam).collect();
            multiset_match(&scaled, y, t * lam.norm().max(1.0))
        });
        if ok {
            return Some(lam);
        }
    }
    None
}

/// X with b = λ·X·a·X⁻¹ on the inputs, when blocks pair up one-to-one and
/// the inputs have no discarded off-diagonal parts.
fn assemble_gauge(
    a: &UniformMps,
    b: &UniformMps,
    cfa: &CanonicalForm,
    cfb: &CanonicalForm,
    bnt: &BasisOfNormalTensors,
    lambda: C64,
) -> Result<Option<CMat>> {
    let d = a.bond();
    if d != b.bond() || cfa.blocks.len() != cfb.blocks.len() {
        return Ok(None);
    }
    let na = cfa.blocks.len();
    // For each a-block find an unused b-block in the same class with
    // matching weight; record the relation Y with B_b = c·Y·A_a·Y⁻¹.
    let mut rel: Vec<Option<(usize, CMat)>> = vec![None; na];
    for class in &bnt.multiplicities {
        let mut used = vec![false; class.len()];
        for (i, ma) in class.iter().enumerate().filter(|(_, m)| m.block < na) {
            let wa = C64::from_polar(ma.weight, ma.phase) * lambda;
            let found = class.iter().enumerate().find(|(j, mb)| {
                !used[*j] && mb.block >= na && (C64::from_polar(mb.weight, mb.phase) - wa).norm() <= 1e-8 * wa.norm().max(1.0)
            });
            let Some((j, mb)) = found else { return Ok(None) };
            used[j] = true;
            let _ = i;
            // A_a = e^{iφa} Xa M Xa⁻¹, B = e^{iφb} Xb M Xb⁻¹ ⇒ Y = Xb·Xa⁻¹.
            let xa_inv = ma.x.clone().try_inverse().ok_or_else(|| Error::Numerical("singular gauge".into()))?;
            rel[ma.block] = Some((mb.block - na, &mb.x * xa_inv));
        }
    }
    let mut y = CMat::zeros(d, d);
    let mut any_nilpotent = cfa.blocks.iter().map(|b| b.tensor.bond()).sum::<usize>() != d;
    any_nilpotent |= cfb.blocks.iter().map(|b| b.tensor.bond()).sum::<usize>() != d;
    if any_nilpotent {
        return Ok(None);
    }
    for (k, r) in rel.iter().enumerate() {
        let Some((kb, yk)) = r else { return Ok(None) };
        let (oa, ob) = (cfa.blocks[k].offset, cfb.blocks[*kb].offset);
        let sz = yk.nrows();
        y.view_mut((ob, oa), (sz, sz)).copy_from(yk);
    }
    let ga_inv = match cfa.gauge.clone().try_inverse() {
        Some(g) => g,
        None => return Ok(None),
    };
    let x = &cfb.gauge * y * ga_inv;
    let Some(xinv) = x.clone().try_inverse() else { return Ok(None) };
    let scale = a.tensor.mats().iter().chain(b.tensor.mats()).map(linalg::fro).fold(0.0, f64::max);
    for (am, bm) in a.tensor.mats().iter().zip(b.tensor.mats()) {
        let pred = &x * am * &xinv * lambda;
        if linalg::fro(&(bm - pred)) > 1e-7 * scale.max(1e-300) {
            return Ok(None);
        }
    }
    Ok(Some(linalg::fix_phase(&x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz() -> UniformMps {
        let t = MpsTensor::from_fn(2, 2, 2, |i, a, b| if i == a && a == b { ONE } else { ZERO }).unwrap();
        UniformMps::periodic(t).unwrap()
    }

    #[test]
    fn ghz_has_two_blocks() {
        let cf = canonical_form(&ghz()).unwrap();
        assert_eq!(cf.blocking_p, 1);
        assert_eq!(cf.blocks.len(), 2);
        for b in &cf.blocks {
            assert_eq!(b.tensor.bond(), 1);
            assert!((b.weight - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn period_two_is_blocked() {
        let t = MpsTensor::new(vec![
            linalg::from_real(2, 2, &[0., 1., 0., 0.]),
            linalg::from_real(2, 2, &[0., 0., 1., 0.]),
        ])
        .unwrap();
        let s = UniformMps::periodic(t).unwrap();
        assert!(!is_normal(&s).unwrap().normal);
        let cf = canonical_form(&s).unwrap();
        assert_eq!(cf.blocking_p, 2);
        assert_eq!(cf.blocks.len(), 2);
    }

    #[test]
    fn ghz_members_are_inequivalent() {
        let cf = canonical_form(&ghz()).unwrap();
        assert_eq!(basis_of_normal_tensors(&cf).unwrap().members.len(), 2);
    }
}
