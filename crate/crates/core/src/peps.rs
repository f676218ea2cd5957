//! Projected entangled pair states on small square lattices, contracted
//! exactly.
//!
//! Site tensors carry the axes (physical, top, right, down, left). Site
//! `(x, y)` sits in column `x` and row `y`, rows growing downwards: the down
//! leg of `(x, y)` meets the top leg of `(x, y+1)` and the right leg of
//! `(x, y)` meets the left leg of `(x+1, y)`. Configurations of a patch are
//! flattened row by row (site index `y·Lx + x`), first site most significant.

use crate::error::{cap, dim, invalid, Error, Result};
use crate::linalg::{self, c64, CMat, CVec, DenseTensor, C64, ONE, ZERO};
use crate::symmetry::FiniteGroup;
use crate::tol;
use std::collections::BTreeSet;

/// Largest intermediate tensor (complex entries) any contraction may form.
pub const CONTRACTION_CAP: usize = 1 << 24;
/// Largest amplitude table `peps_contract` returns.
pub const AMPLITUDE_CAP: usize = 1 << 16;

const LEGS: [&str; 4] = ["t", "r", "d", "l"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Leg {
    Top,
    Right,
    Down,
    Left,
}

impl Leg {
    pub const ALL: [Leg; 4] = [Leg::Top, Leg::Right, Leg::Down, Leg::Left];

    fn index(self) -> usize {
        match self {
            Leg::Top => 0,
            Leg::Right => 1,
            Leg::Down => 2,
            Leg::Left => 3,
        }
    }

    fn label(self) -> &'static str {
        LEGS[self.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PepsTensor {
    data: DenseTensor,
}

impl PepsTensor {
    /// Wrap a dense tensor with axes labelled `p, t, r, d, l` (any order).
    pub fn new(t: DenseTensor) -> Result<Self> {
        let data = t.permute(&["p", "t", "r", "d", "l"])?;
        if data.shape().iter().any(|&e| e == 0) {
            return Err(invalid("PEPS tensor extents must be >= 1"));
        }
        if data.data().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("non-finite PEPS entry"));
        }
        Ok(PepsTensor { data })
    }

    pub fn from_fn(d: usize, dims: [usize; 4], f: impl Fn(usize, [usize; 4]) -> C64) -> Result<Self> {
        let mut t = DenseTensor::zeros(vec!["p", "t", "r", "d", "l"], vec![d, dims[0], dims[1], dims[2], dims[3]])?;
        for p in 0..d {
            for a in 0..dims[0] {
                for b in 0..dims[1] {
                    for c in 0..dims[2] {
                        for e in 0..dims[3] {
                            t.set(&[p, a, b, c, e], f(p, [a, b, c, e]));
                        }
                    }
                }
            }
        }
        Self::new(t)
    }

    pub fn d(&self) -> usize {
        self.data.shape()[0]
    }

    /// Bond dimensions (top, right, down, left).
    pub fn dims(&self) -> [usize; 4] {
        let s = self.data.shape();
        [s[1], s[2], s[3], s[4]]
    }

    pub fn dim(&self, leg: Leg) -> usize {
        self.dims()[leg.index()]
    }

    pub fn dense(&self) -> &DenseTensor {
        &self.data
    }

    pub fn get(&self, p: usize, v: [usize; 4]) -> C64 {
        self.data.get(&[p, v[0], v[1], v[2], v[3]])
    }

    /// Apply `u` to the physical index.
    pub fn act_physical(&self, u: &CMat) -> Result<Self> {
        if u.ncols() != self.d() {
            return Err(dim(format!("operator has {} columns, physical dimension is {}", u.ncols(), self.d())));
        }
        let op = DenseTensor::from_matrix(u, vec!["p", "q"], vec![u.nrows(), u.ncols()])?;
        let k = self.data.clone().relabel("p", "q")?;
        Self::new(op.contract(&k, &[("q", "q")])?)
    }

    /// Absorb a matrix into one leg: `A'_{..w..} = Σ_v A_{..v..} m_{v w}`.
    pub fn act_virtual(&self, leg: Leg, m: &CMat) -> Result<Self> {
        let l = leg.label();
        if m.nrows() != self.dim(leg) {
            return Err(dim(format!("leg {l} has dimension {}, matrix has {} rows", self.dim(leg), m.nrows())));
        }
        let mt = DenseTensor::from_matrix(m, vec!["v", "w"], vec![m.nrows(), m.ncols()])?;
        let a = self.data.clone().relabel(l, "v")?;
        let out = a.contract(&mt, &[("v", "v")])?.relabel("w", l)?;
        Self::new(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        PepsTensor { data: self.data.scale(s) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PepsBoundary {
    Torus,
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PepsPatch {
    lx: usize,
    ly: usize,
    boundary: PepsBoundary,
    tensors: Vec<PepsTensor>,
}

impl PepsPatch {
    /// `tensors` is indexed row by row (`y·lx + x`).
    pub fn new(lx: usize, ly: usize, boundary: PepsBoundary, tensors: Vec<PepsTensor>) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(invalid("patch needs at least one site"));
        }
        if tensors.len() != lx * ly {
            return Err(dim(format!("{} tensors for a {lx}x{ly} patch", tensors.len())));
        }
        if boundary == PepsBoundary::Torus && (lx < 2 || ly < 2) {
            return Err(invalid("a torus needs at least two sites in each direction"));
        }
        let p = PepsPatch { lx, ly, boundary, tensors };
        for y in 0..ly {
            for x in 0..lx {
                let t = p.site(x, y);
                let right = (x + 1 < lx || p.is_torus()).then(|| p.site((x + 1) % lx, y));
                let down = (y + 1 < ly || p.is_torus()).then(|| p.site(x, (y + 1) % ly));
                match right {
                    Some(n) if n.dim(Leg::Left) != t.dim(Leg::Right) => {
                        return Err(dim(format!("bond ({x},{y})-right: {} vs {}", t.dim(Leg::Right), n.dim(Leg::Left))))
                    }
                    None if t.dim(Leg::Right) != 1 => return Err(dim(format!("dangling right bond at ({x},{y}) must have dimension 1"))),
                    _ => {}
                }
                match down {
                    Some(n) if n.dim(Leg::Top) != t.dim(Leg::Down) => {
                        return Err(dim(format!("bond ({x},{y})-down: {} vs {}", t.dim(Leg::Down), n.dim(Leg::Top))))
                    }
                    None if t.dim(Leg::Down) != 1 => return Err(dim(format!("dangling down bond at ({x},{y}) must have dimension 1"))),
                    _ => {}
                }
                if !p.is_torus() && x == 0 && t.dim(Leg::Left) != 1 {
                    return Err(dim(format!("dangling left bond at ({x},{y}) must have dimension 1")));
                }
                if !p.is_torus() && y == 0 && t.dim(Leg::Top) != 1 {
                    return Err(dim(format!("dangling top bond at ({x},{y}) must have dimension 1")));
                }
            }
        }
        Ok(p)
    }

    pub fn uniform(lx: usize, ly: usize, boundary: PepsBoundary, t: &PepsTensor) -> Result<Self> {
        Self::new(lx, ly, boundary, vec![t.clone(); lx * ly])
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn boundary(&self) -> PepsBoundary {
        self.boundary
    }

    pub fn is_torus(&self) -> bool {
        self.boundary == PepsBoundary::Torus
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn site(&self, x: usize, y: usize) -> &PepsTensor {
        &self.tensors[y * self.lx + x]
    }

    pub fn tensors(&self) -> &[PepsTensor] {
        &self.tensors
    }

    pub fn physical_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.d()).collect()
    }

    pub fn with_site(&self, x: usize, y: usize, t: PepsTensor) -> Result<Self> {
        let mut ts = self.tensors.clone();
        ts[y * self.lx + x] = t;
        Self::new(self.lx, self.ly, self.boundary, ts)
    }

    /// Label of the bond on `leg` of `(x, y)`, or `None` for a dangling leg.
    fn bond(&self, x: usize, y: usize, leg: Leg) -> Option<String> {
        let (lx, ly, torus) = (self.lx, self.ly, self.is_torus());
        match leg {
            Leg::Top if y == 0 && !torus => None,
            Leg::Top => Some(format!("v{x}_{}", (y + ly - 1) % ly)),
            Leg::Down if y + 1 == ly && !torus => None,
            Leg::Down => Some(format!("v{x}_{y}")),
            Leg::Left if x == 0 && !torus => None,
            Leg::Left => Some(format!("h{}_{y}", (x + lx - 1) % lx)),
            Leg::Right if x + 1 == lx && !torus => None,
            Leg::Right => Some(format!("h{x}_{y}")),
        }
    }

    fn neighbor(&self, x: usize, y: usize, leg: Leg) -> Option<(usize, usize)> {
        self.bond(x, y, leg)?;
        Some(match leg {
            Leg::Top => (x, (y + self.ly - 1) % self.ly),
            Leg::Down => (x, (y + 1) % self.ly),
            Leg::Left => ((x + self.lx - 1) % self.lx, y),
            Leg::Right => ((x + 1) % self.lx, y),
        })
    }
}

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Region {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Region { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }

    pub fn n_sites(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn check(&self, p: &PepsPatch) -> Result<()> {
        if self.x0 >= self.x1 || self.y0 >= self.y1 || self.x1 > p.lx || self.y1 > p.ly {
            return Err(invalid(format!("region {self:?} is empty or outside the {}x{} patch", p.lx, p.ly)));
        }
        Ok(())
    }

    fn sites(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for y in self.y0..self.y1 {
            for x in self.x0..self.x1 {
                v.push((x, y));
            }
        }
        v
    }
}

fn squeeze(t: DenseTensor, drop: &[String]) -> Result<DenseTensor> {
    if drop.is_empty() {
        return Ok(t);
    }
    let mut labels = Vec::new();
    let mut shape = Vec::new();
    for (l, &e) in t.labels().iter().zip(t.shape()) {
        if drop.contains(l) {
            if e != 1 {
                return Err(dim(format!("cannot drop axis {l} of extent {e}")));
            }
        } else {
            labels.push(l.clone());
            shape.push(e);
        }
    }
    DenseTensor::new(labels, shape, t.into_data())
}

/// Single-layer site tensor with network labels; physical axis `p{index}`.
fn ket_site(p: &PepsPatch, x: usize, y: usize, t: &PepsTensor) -> Result<DenseTensor> {
    let mut labels = vec![format!("p{}", y * p.lx + x)];
    let mut drop = Vec::new();
    for (k, leg) in Leg::ALL.iter().enumerate() {
        match p.bond(x, y, *leg) {
            Some(b) => labels.push(b),
            None => {
                let l = format!("dangling{k}");
                drop.push(l.clone());
                labels.push(l);
            }
        }
    }
    squeeze(t.data.clone().relabel_all(labels)?, &drop)
}

/// Double-layer tensor `Σ_{s s'} conj(bra^{s'}) op_{s' s} ket^{s}` with each
/// bond fused ket-major.
fn double_site(p: &PepsPatch, x: usize, y: usize, ket: &PepsTensor, bra: &PepsTensor, op: Option<&CMat>) -> Result<DenseTensor> {
    let k = match op {
        Some(o) => ket.act_physical(o)?,
        None => ket.clone(),
    };
    let k = k.data.clone().relabel_all(vec!["p", "tk", "rk", "dk", "lk"])?;
    let b = bra.data.conj().relabel_all(vec!["p", "tb", "rb", "db", "lb"])?;
    if k.extent("p") != b.extent("p") {
        return Err(dim("ket and bra physical dimensions differ"));
    }
    let mut m = k.contract(&b, &[("p", "p")])?;
    let mut drop = Vec::new();
    for (i, leg) in Leg::ALL.iter().enumerate() {
        let name = match p.bond(x, y, *leg) {
            Some(b) => b,
            None => {
                let l = format!("dangling{i}");
                drop.push(l.clone());
                l
            }
        };
        let kl = format!("{}k", LEGS[i]);
        let bl = format!("{}b", LEGS[i]);
        m = m.fuse(&[kl.as_str(), bl.as_str()], &name)?;
    }
    squeeze(m, &drop)
}

fn shared_labels(a: &DenseTensor, b: &DenseTensor) -> Vec<String> {
    a.labels().iter().filter(|l| b.axis(l).is_some()).cloned().collect()
}

fn result_size(a: &DenseTensor, b: &DenseTensor) -> usize {
    let shared = shared_labels(a, b);
    let mut size = 1usize;
    for t in [a, b] {
        for (l, &e) in t.labels().iter().zip(t.shape()) {
            if !shared.contains(l) {
                size = size.saturating_mul(e);
            }
        }
    }
    size
}

/// Contract two tensors over every label they share.
fn contract_pair(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let size = result_size(a, b);
    if size > CONTRACTION_CAP {
        return Err(cap(format!("intermediate tensor of {size} entries exceeds {CONTRACTION_CAP}")));
    }
    let shared = shared_labels(a, b);
    let pairs: Vec<(&str, &str)> = shared.iter().map(|l| (l.as_str(), l.as_str())).collect();
    a.contract(b, &pairs)
}

/// Column-transfer order: contract every column top to bottom, then sweep
/// the columns left to right.
fn contract_columns(lx: usize, ly: usize, sites: Vec<DenseTensor>) -> Result<DenseTensor> {
    let mut acc: Option<DenseTensor> = None;
    for x in 0..lx {
        let mut col = sites[x].clone();
        for y in 1..ly {
            col = contract_pair(&col, &sites[y * lx + x])?;
        }
        acc = Some(match acc {
            None => col,
            Some(a) => contract_pair(&a, &col)?,
        });
    }
    acc.ok_or_else(|| invalid("empty network"))
}

/// Greedy pairwise contraction: always merge the pair with the smallest
/// result among pairs that share a bond.
fn contract_greedy(mut ts: Vec<DenseTensor>) -> Result<DenseTensor> {
    if ts.is_empty() {
        return Ok(DenseTensor::scalar(ONE));
    }
    while ts.len() > 1 {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                if shared_labels(&ts[i], &ts[j]).is_empty() {
                    continue;
                }
                let s = result_size(&ts[i], &ts[j]);
                if best.map_or(true, |b| s < b.2) {
                    best = Some((i, j, s));
                }
            }
        }
        let (i, j) = match best {
            Some((i, j, _)) => (i, j),
            None => {
                let mut idx: Vec<usize> = (0..ts.len()).collect();
                idx.sort_by_key(|&k| ts[k].len());
                (idx[0].min(idx[1]), idx[0].max(idx[1]))
            }
        };
        let b = ts.remove(j);
        let a = ts.remove(i);
        ts.push(contract_pair(&a, &b)?);
    }
    Ok(ts.pop().unwrap())
}

fn scalar_of(t: &DenseTensor) -> Result<C64> {
    if t.rank() != 0 {
        return Err(Error::Numerical(format!("network left {} open axes", t.rank())));
    }
    Ok(t.data()[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionOrder {
    Columns,
    Greedy,
}

/// `⟨bra|ket⟩` for two patches of identical geometry, with optional
/// single-site operators between them.
pub fn peps_overlap_with(bra: &PepsPatch, ket: &PepsPatch, ops: &[PlacedOp], order: ContractionOrder) -> Result<C64> {
    if bra.lx != ket.lx || bra.ly != ket.ly || bra.boundary != ket.boundary {
        return Err(dim("patches have different geometry"));
    }
    let mut sites = Vec::with_capacity(ket.n_sites());
    for y in 0..ket.ly {
        for x in 0..ket.lx {
            let mut op: Option<CMat> = None;
            for o in ops.iter().filter(|o| o.x == x && o.y == y) {
                op = Some(match op {
                    None => o.op.clone(),
                    Some(prev) => &o.op * prev,
                });
            }
            sites.push(double_site(ket, x, y, ket.site(x, y), bra.site(x, y), op.as_ref())?);
        }
    }
    let t = match order {
        ContractionOrder::Columns => contract_columns(ket.lx, ket.ly, sites)?,
        ContractionOrder::Greedy => contract_greedy(sites)?,
    };
    scalar_of(&t)
}

pub fn peps_overlap(bra: &PepsPatch, ket: &PepsPatch) -> Result<C64> {
    peps_overlap_with(bra, ket, &[], ContractionOrder::Columns)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub norm_sq: f64,
    pub amplitudes: Option<CVec>,
}

/// Exact norm² by column transfer, plus the amplitude table when it has at
/// most [`AMPLITUDE_CAP`] entries.
pub fn peps_contract(p: &PepsPatch) -> Result<Contraction> {
    let z = peps_overlap(p, p)?;
    let total = p.physical_dims().iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let amplitudes = match total {
        Some(n) if n <= AMPLITUDE_CAP => Some(peps_dense_state(p)?),
        _ => None,
    };
    Ok(Contraction { norm_sq: z.re, amplitudes })
}

/// All amplitudes of the patch, site `y·Lx + x` most significant first.
pub fn peps_dense_state(p: &PepsPatch) -> Result<CVec> {
    let total = p
        .physical_dims()
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= CONTRACTION_CAP)
        .ok_or_else(|| cap("dense PEPS state exceeds the contraction cap"))?;
    let mut sites = Vec::new();
    for y in 0..p.ly {
        for x in 0..p.lx {
            sites.push(ket_site(p, x, y, p.site(x, y))?);
        }
    }
    let t = contract_greedy(sites)?;
    let order: Vec<String> = (0..p.n_sites()).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
    let t = t.permute(&refs)?;
    debug_assert_eq!(t.len(), total);
    Ok(CVec::from_vec(t.into_data()))
}

/// Single-site operator placed at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedOp {
    pub x: usize,
    pub y: usize,
    pub op: CMat,
}

impl PlacedOp {
    pub fn new(x: usize, y: usize, op: CMat) -> Self {
        PlacedOp { x, y, op }
    }
}

/// `⟨ψ|Π O|ψ⟩ / ⟨ψ|ψ⟩`. Operators on the same site multiply in list order
/// (the first listed acts first).
pub fn peps_expectation(p: &PepsPatch, ops: &[PlacedOp]) -> Result<C64> {
    for o in ops {
        if o.x >= p.lx || o.y >= p.ly {
            return Err(invalid(format!("operator placed at ({}, {}) outside the patch", o.x, o.y)));
        }
        let d = p.site(o.x, o.y).d();
        if o.op.shape() != (d, d) {
            return Err(dim(format!("operator at ({}, {}) must be {d}x{d}", o.x, o.y)));
        }
    }
    let norm = peps_overlap(p, p)?;
    if norm.norm() == 0.0 {
        return Err(Error::Numerical("patch contracts to the zero state".into()));
    }
    Ok(peps_overlap_with(p, p, ops, ContractionOrder::Columns)? / norm)
}

/// Boundary bonds of a region, as network labels with their dimensions, in
/// the order sites are visited (row by row) and legs (t, r, d, l).
fn boundary_bonds(p: &PepsPatch, r: &Region) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (x, y) in r.sites() {
        for leg in Leg::ALL {
            if let (Some(b), Some((nx, ny))) = (p.bond(x, y, leg), p.neighbor(x, y, leg)) {
                if !r.contains(nx, ny) && !out.iter().any(|(l, _)| *l == b) {
                    out.push((b, p.site(x, y).dim(leg)));
                }
            }
        }
    }
    out
}

/// Region map V (physical of the region × boundary bonds).
fn region_map(p: &PepsPatch, r: &Region, bonds: &[(String, usize)]) -> Result<CMat> {
    let phys: usize = r.sites().iter().map(|&(x, y)| p.site(x, y).d()).product();
    let bdim: usize = bonds.iter().map(|b| b.1).product();
    if phys.saturating_mul(bdim) > CONTRACTION_CAP {
        return Err(cap(format!("region map of {phys}x{bdim} exceeds the contraction cap")));
    }
    let mut ts = Vec::new();
    for &(x, y) in &r.sites() {
        ts.push(ket_site(p, x, y, p.site(x, y))?);
    }
    let t = contract_greedy(ts)?;
    let rows: Vec<String> = r.sites().iter().map(|&(x, y)| format!("p{}", y * p.lx + x)).collect();
    let rr: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
    let cc: Vec<&str> = bonds.iter().map(|b| b.0.as_str()).collect();
    t.to_matrix(&rr, &cc)
}

/// `Σ_p V_{pα} conj(V_{pβ})` for the sites in `sites`, i.e. the complex
/// conjugate of the Gram matrix `V†V` of their map from `bonds`.
fn conj_gram(p: &PepsPatch, sites: &[(usize, usize)], bonds: &[(String, usize)]) -> Result<CMat> {
    let mut ts = Vec::new();
    for &(x, y) in sites {
        ts.push(double_site(p, x, y, p.site(x, y), p.site(x, y), None)?);
    }
    let mut t = contract_greedy(ts)?;
    let mut ket = Vec::new();
    let mut bra = Vec::new();
    for (b, d) in bonds {
        let k = format!("{b}#k");
        let br = format!("{b}#b");
        t = t.split(b, &[(k.as_str(), *d), (br.as_str(), *d)])?;
        ket.push(k);
        bra.push(br);
    }
    let kk: Vec<&str> = ket.iter().map(|s| s.as_str()).collect();
    let bb: Vec<&str> = bra.iter().map(|s| s.as_str()).collect();
    t.to_matrix(&kk, &bb)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegionInjectivity {
    pub injective: bool,
    pub rank: usize,
    pub boundary_dim: usize,
    pub physical_dim: usize,
    /// Smallest kept singular value over the cut, relative to the largest.
    pub margin: f64,
}

/// Rank of the map from the region's boundary bonds to its physical space.
pub fn peps_region_injectivity(p: &PepsPatch, r: &Region) -> Result<RegionInjectivity> {
    r.check(p)?;
    let bonds = boundary_bonds(p, r);
    let v = region_map(p, r, &bonds)?;
    let s = linalg::svd(&v)?;
    let rank = s.rank();
    let top = s.s.first().copied().unwrap_or(0.0);
    let margin = if top == 0.0 {
        0.0
    } else {
        let kept = s.s.get(rank.saturating_sub(1)).copied().unwrap_or(0.0) / top;
        let dropped = s.s.get(rank).map_or(0.0, |x| x / top);
        (kept / tol::rank()).log10().min(if dropped > 0.0 { (tol::rank() / dropped).log10() } else { f64::INFINITY })
    };
    Ok(RegionInjectivity { injective: rank == v.ncols(), rank, boundary_dim: v.ncols(), physical_dim: v.nrows(), margin })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    pub region: Region,
    /// Dimensions of the boundary bonds, in the order used for `sigma`.
    pub boundary_dims: Vec<usize>,
    pub sigma: CMat,
    /// Eigenvalues of `sigma`, descending.
    pub spectrum: Vec<f64>,
    pub rank: usize,
    pub entropy: f64,
    /// `−ln λ` for the nonzero eigenvalues λ of `sigma`, ascending.
    pub entanglement_hamiltonian_spectrum: Vec<f64>,
    /// Isometric part of the region map on the support of its Gram matrix;
    /// `None` when the region map is too large to form.
    pub isometry: Option<CMat>,
    /// `max |U†U − 1|` for `isometry`.
    pub isometry_defect: Option<f64>,
}

fn spectrum_entropy(vals: &[f64]) -> f64 {
    vals.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum()
}

/// Boundary state `σ = √G_A · conj(G_B) · √G_A / tr` of a rectangular region,
/// where `G_A` and `G_B` are the Gram matrices of the region and complement
/// maps out of the shared boundary bonds. Its spectrum is the nonzero
/// spectrum of the region's reduced density matrix.
pub fn region_boundary_state(p: &PepsPatch, r: &Region) -> Result<BoundaryState> {
    r.check(p)?;
    let inside = r.sites();
    let outside: Vec<(usize, usize)> = (0..p.ly)
        .flat_map(|y| (0..p.lx).map(move |x| (x, y)))
        .filter(|&(x, y)| !r.contains(x, y))
        .collect();
    if outside.is_empty() {
        return Err(invalid("region covers the whole patch; its boundary state is trivial"));
    }
    let bonds = boundary_bonds(p, r);
    let bdim: usize = bonds.iter().map(|b| b.1).product();
    if bdim.saturating_mul(bdim) > CONTRACTION_CAP {
        return Err(cap(format!("boundary space of dimension {bdim} exceeds the contraction cap")));
    }
    let ga = conj_gram(p, &inside, &bonds)?.map(|z| z.conj());
    let gb_conj = conj_gram(p, &outside, &bonds)?;
    let sa = linalg::psd_sqrt(&ga)?;
    let raw = linalg::hermitian_part(&(&sa * gb_conj * &sa));
    let tr = linalg::trace(&raw).re;
    if !(tr > 0.0) {
        return Err(Error::Numerical("boundary state has zero trace".into()));
    }
    let sigma = raw.unscale(tr);
    let (mut vals, _) = linalg::eigh(&sigma)?;
    vals.reverse();
    let top = vals.first().copied().unwrap_or(0.0);
    let cut = tol::rank() * top;
    let rank = vals.iter().filter(|&&x| x > cut).count();
    let kept: Vec<f64> = vals.iter().map(|&x| if x > cut { x } else { 0.0 }).collect();
    let entropy = spectrum_entropy(&kept);
    let mut ham: Vec<f64> = kept.iter().filter(|&&x| x > 0.0).map(|&x| -x.ln()).collect();
    ham.sort_by(f64::total_cmp);
    let (isometry, isometry_defect) = match region_map(p, r, &bonds) {
        Ok(v) => {
            let (u, _, _) = linalg::polar_on_support(&v, tol::rank())?;
            let defect = linalg::max_abs(&(u.adjoint() * &u - linalg::identity(u.ncols())));
            (Some(u), Some(defect))
        }
        Err(Error::Cap(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(BoundaryState {
        region: *r,
        boundary_dims: bonds.iter().map(|b| b.1).collect(),
        sigma,
        spectrum: vals,
        rank,
        entropy,
        entanglement_hamiltonian_spectrum: ham,
        isometry,
        isometry_defect,
    })
}

/// G-isometric tensor of the regular representation: the projector
/// `(1/|G|) Σ_k L_k^{⊗4}` read as a map from the four bonds to four
/// physical copies, so `d = |G|⁴` and `D = |G|`. Physical index
/// `((p_t·|G| + p_r)·|G| + p_d)·|G| + p_l`.
pub fn g_isometric_tensor(g: &FiniteGroup) -> Result<PepsTensor> {
    let n = g.order();
    let w = c64(1.0 / n as f64, 0.0);
    PepsTensor::from_fn(n.pow(4), [n; 4], |p, v| {
        let ps = [p / (n * n * n), (p / (n * n)) % n, (p / n) % n, p % n];
        let hits = (0..n).filter(|&k| (0..4).all(|i| ps[i] == g.mul(k, v[i]))).count();
        w * hits as f64
    })
}

pub fn quantum_double_patch(g: &FiniteGroup, lx: usize, ly: usize) -> Result<PepsPatch> {
    PepsPatch::uniform(lx, ly, PepsBoundary::Torus, &g_isometric_tensor(g)?)
}

/// Right regular action `|v) ↦ |v·g)` as a matrix absorbed on a leg.
pub fn right_mult(g: &FiniteGroup, h: usize) -> CMat {
    let n = g.order();
    CMat::from_fn(n, n, |v, w| if w == g.mul(v, h) { ONE } else { ZERO })
}

/// Left regular action `|v) ↦ |h·v)` as a matrix absorbed on a leg.
pub fn left_mult(g: &FiniteGroup, h: usize) -> CMat {
    let n = g.order();
    CMat::from_fn(n, n, |v, w| if w == g.mul(h, v) { ONE } else { ZERO })
}

/// Insert a horizontal string `h` on the down legs of row 0 and a vertical
/// string `k` on the right legs of column 0.
pub fn with_strings(p: &PepsPatch, g: &FiniteGroup, h: usize, k: usize) -> Result<PepsPatch> {
    let mut ts = p.tensors.clone();
    let rh = right_mult(g, h);
    let rk = right_mult(g, k);
    for x in 0..p.lx {
        ts[x] = ts[x].act_virtual(Leg::Down, &rh)?;
    }
    for y in 0..p.ly {
        let i = y * p.lx;
        ts[i] = ts[i].act_virtual(Leg::Right, &rk)?;
    }
    PepsPatch::new(p.lx, p.ly, p.boundary, ts)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SectorLabel {
    /// Representative of the conjugacy class (smallest element index).
    pub class_rep: usize,
    pub class_size: usize,
    pub centralizer_order: usize,
    /// Index of the centralizer irrep, `0..#irreps`.
    pub irrep: usize,
}

fn conjugacy_classes(g: &FiniteGroup, elems: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &a in elems {
        if seen.contains(&a) {
            continue;
        }
        let class: BTreeSet<usize> = elems.iter().map(|&b| g.mul(g.mul(b, a), g.inv(b))).collect();
        seen.extend(class.iter().copied());
        out.push(class.into_iter().collect());
    }
    out
}

fn centralizer(g: &FiniteGroup, a: usize) -> Vec<usize> {
    (0..g.order()).filter(|&b| g.mul(a, b) == g.mul(b, a)).collect()
}

/// Anyon labels of the quantum double: a conjugacy class and an irrep of
/// its centralizer. Irreps are counted as conjugacy classes of the
/// centralizer.
pub fn sector_labels(g: &FiniteGroup) -> Vec<SectorLabel> {
    let all: Vec<usize> = (0..g.order()).collect();
    let mut out = Vec::new();
    for class in conjugacy_classes(g, &all) {
        let rep = class[0];
        let z = centralizer(g, rep);
        let irreps = conjugacy_classes(g, &z).len();
        for irrep in 0..irreps {
            out.push(SectorLabel { class_rep: rep, class_size: class.len(), centralizer_order: z.len(), irrep });
        }
    }
    out
}

/// Characters of an abelian group, found as all homomorphisms into the
/// `exp`-th roots of unity; sorted by their value list.
fn abelian_characters(g: &FiniteGroup) -> Vec<Vec<usize>> {
    let n = g.order();
    let e = g.exponent();
    let mut out = Vec::new();
    let mut f = vec![0usize; n];
    loop {
        if (0..n).all(|a| (0..n).all(|b| f[g.mul(a, b)] == (f[a] + f[b]) % e)) {
            out.push(f.clone());
        }
        let mut i = 0;
        while i < n {
            f[i] += 1;
            if f[i] < e {
                break;
            }
            f[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub group: FiniteGroup,
    pub lx: usize,
    pub ly: usize,
    pub labels: Vec<SectorLabel>,
    /// Dense sector states, present when the patch has at most
    /// [`AMPLITUDE_CAP`] amplitudes.
    pub states: Option<Vec<CVec>>,
    pub gram: CMat,
    pub rank: usize,
    /// Smallest eigenvalue of the Gram matrix after unit-diagonal scaling.
    pub smallest_eigenvalue: f64,
    pub placement: String,
}

/// Candidate ground states of the quantum double on an `lx × ly` torus,
/// one per anyon label, and the rank of their Gram matrix.
///
/// Each label `(h, α)` gives `P_{h,α} = Σ_k conj(χ_α(k)) |ψ(h, k)⟩`, where
/// `|ψ(h, k)⟩` carries the virtual string `R_h` around the horizontal cycle
/// and `R_k` around the vertical one. Implemented for abelian groups.
pub fn quantum_double_sectors(g: &FiniteGroup, lx: usize, ly: usize) -> Result<SectorBasis> {
    let n = g.order();
    if !g.is_abelian() {
        return Err(cap("sector states are built for abelian groups only; use sector_labels for the count"));
    }
    let col = (n * n).checked_pow(ly as u32).unwrap_or(usize::MAX);
    if col > 4096 || lx > 6 {
        return Err(cap(format!("column transfer dimension {col} for |G|={n}, Ly={ly} exceeds 4096")));
    }
    let base = quantum_double_patch(g, lx, ly)?;
    let mut strings = Vec::new();
    for h in 0..n {
        for k in 0..n {
            strings.push(with_strings(&base, g, h, k)?);
        }
    }
    let m = strings.len();
    let mut gram0 = CMat::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let z = peps_overlap(&strings[i], &strings[j])?;
            gram0[(i, j)] = z;
            gram0[(j, i)] = z.conj();
        }
    }
    let chars = abelian_characters(g);
    let labels = sector_labels(g);
    let e = g.exponent() as f64;
    let root = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / e);
    let mut coeff = CMat::zeros(labels.len(), m);
    for (a, lab) in labels.iter().enumerate() {
        let chi = &chars[lab.irrep];
        for k in 0..n {
            coeff[(a, lab.class_rep * n + k)] = root(chi[k]).conj() / n as f64;
        }
    }
    let gram = linalg::hermitian_part(&(coeff.map(|z| z.conj()) * &gram0 * coeff.transpose()));
    let diag: Vec<f64> = (0..gram.nrows()).map(|i| gram[(i, i)].re).collect();
    if diag.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Numerical("a sector state vanished".into()));
    }
    let scaled = CMat::from_fn(gram.nrows(), gram.ncols(), |i, j| gram[(i, j)] / (diag[i] * diag[j]).sqrt());
    let (vals, _) = linalg::eigh(&scaled)?;
    let top = vals.last().copied().unwrap_or(0.0);
    let rank = vals.iter().filter(|&&x| x > tol::rank() * top).count();
    let total = n.checked_pow(4 * (lx * ly) as u32).filter(|&t| t <= AMPLITUDE_CAP);
    let states = match total {
        Some(_) => {
            let dense: Vec<CVec> = strings.iter().map(peps_dense_state).collect::<Result<_>>()?;
            let mut out = Vec::new();
            for a in 0..labels.len() {
                let mut v = CVec::zeros(dense[0].len());
                for (i, d) in dense.iter().enumerate() {
                    v += d * coeff[(a, i)];
                }
                out.push(v);
            }
            Some(out)
        }
        None => None,
    };
    Ok(SectorBasis {
        group: g.clone(),
        lx,
        ly,
        labels,
        states,
        gram,
        rank,
        smallest_eigenvalue: vals.first().copied().unwrap_or(0.0),
        placement: "h: right action on the down legs of row 0; k: right action on the right legs of column 0".into(),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TeeReport {
    pub region: Region,
    pub entropy: f64,
    pub boundary_bonds: usize,
    /// `Σ_bonds ln D_b`, the area-law term.
    pub area_term: f64,
    /// `area_term − entropy`.
    pub gamma: f64,
}

/// Von Neumann entropy of a region and its deficit from the area law.
pub fn region_entropy(p: &PepsPatch, r: &Region) -> Result<TeeReport> {
    let bs = region_boundary_state(p, r)?;
    let area: f64 = bs.boundary_dims.iter().map(|&d| (d as f64).ln()).sum();
    Ok(TeeReport { region: *r, entropy: bs.entropy, boundary_bonds: bs.boundary_dims.len(), area_term: area, gamma: area - bs.entropy })
}

/// Entropy of `region` in the G-isometric quantum-double state on an
/// `lx × ly` torus, with `γ = |∂A|·ln|G| − S`.
pub fn topological_entropy(g: &FiniteGroup, lx: usize, ly: usize, r: &Region) -> Result<TeeReport> {
    region_entropy(&quantum_double_patch(g, lx, ly)?, r)
}
