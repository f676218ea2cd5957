//! On-site symmetries of normal MPS: virtual projective representations,
//! cocycle classes, group cohomology, time reversal, string order and
//! renormalization fixed points.

use crate::error::{dim, invalid, Error, Result};
use crate::linalg::{self, c64, invariant_factors, smith_normal_form, CMat, CVec, IntMatrix, C64, ONE, ZERO};
use crate::mps::{self, MpsTensor, UniformMps};
use crate::structure;
use crate::tol;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validate a multiplication table: closure, identity, inverses and
    /// associativity.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(invalid("group must have at least one element"));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(invalid("multiplication table must be n×n with entries in 0..n"));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| invalid("table has no identity element"))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| invalid(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(invalid(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { table, identity, inverse })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(table).expect("cyclic table is a group")
    }

    /// Direct product; element (a, b) has index a·|H| + b.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let table = (0..n * m)
            .map(|x| (0..n * m).map(|y| g.mul(x / m, y / m) * m + h.mul(x % m, y % m)).collect())
            .collect();
        FiniteGroup::from_table(table).expect("product of groups is a group")
    }

    /// Dihedral group of order 2n; element r^k s^f has index 2k + f.
    pub fn dihedral(n: usize) -> Self {
        let idx = |k: usize, f: usize| 2 * (k % n) + f;
        let table = (0..2 * n)
            .map(|x| {
                (0..2 * n)
                    .map(|y| {
                        let (k1, f1, k2, f2) = (x / 2, x % 2, y / 2, y % 2);
                        // r^k1 s^f1 r^k2 s^f2 = r^(k1 ± k2) s^(f1+f2)
                        let k = if f1 == 0 { k1 + k2 } else { k1 + n - k2 };
                        idx(k, (f1 + f2) % 2)
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(table).expect("dihedral table is a group")
    }

    pub fn z2xz2() -> Self {
        FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.order()).map(|g| self.element_order(g)).fold(1, |a, b| a.lcm(&b))
    }
}

/// Linear unitary representation on the physical space.
#[derive(Debug, Clone)]
pub struct OnSiteSymmetry {
    pub group: FiniteGroup,
    pub unitaries: Vec<CMat>,
}

impl OnSiteSymmetry {
    pub fn new(group: FiniteGroup, unitaries: Vec<CMat>) -> Result<Self> {
        let n = group.order();
        if unitaries.len() != n {
            return Err(dim(format!("{} matrices for a group of order {n}", unitaries.len())));
        }
        let d = unitaries[0].nrows();
        if unitaries.iter().any(|u| u.shape() != (d, d)) {
            return Err(dim("all symmetry matrices must be d×d with a common d"));
        }
        let t = 1e2 * tol::eq() * d as f64;
        for (g, u) in unitaries.iter().enumerate() {
            if linalg::fro(&(u * u.adjoint() - CMat::identity(d, d))) > t {
                return Err(invalid(format!("U({g}) is not unitary")));
            }
            for h in 0..n {
                let gh = group.mul(g, h);
                if linalg::fro(&(u * &unitaries[h] - &unitaries[gh])) > t {
                    return Err(invalid(format!("U({g})·U({h}) ≠ U({gh})")));
                }
            }
        }
        Ok(OnSiteSymmetry { group, unitaries })
    }

    /// Representation of a product group from representations of the factors.
    pub fn from_fn(group: FiniteGroup, f: impl Fn(usize) -> CMat) -> Result<Self> {
        let us = (0..group.order()).map(f).collect();
        OnSiteSymmetry::new(group, us)
    }

    pub fn d(&self) -> usize {
        self.unitaries[0].nrows()
    }
}

/// Virtual action of a symmetry on a normal tensor:
/// Σ_j U(g)_{ij} A^j = e^{iφ(g)} X(g)⁻¹ A^i X(g), X(g)X(h) = e^{iω(g,h)} X(gh).
#[derive(Debug, Clone)]
pub struct ProjectiveData {
    pub group: FiniteGroup,
    /// Normalised to |det X| = 1 with X(e) = 1; unitary in canonical gauge.
    pub x: Vec<CMat>,
    pub phi: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    /// Injectivity length of the tensor the data was extracted from.
    pub injectivity_length: usize,
    /// Smallest distance of a symmetry decision from its threshold, in decades.
    pub margin: f64,
}

/// Wrap an angle into (−π, π].
pub fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TWO_PI);
    if t > PI {
        t - TWO_PI
    } else {
        t
    }
}

/// Multiple k of 2π/n nearest to θ, if within 1e-6.
pub fn snap(theta: f64, n: usize) -> Option<usize> {
    let step = TWO_PI / n as f64;
    let k = (theta.rem_euclid(TWO_PI) / step).round();
    let err = wrap(theta - k * step).abs();
    if err <= 1e-6 {
        Some((k as usize) % n)
    } else {
        None
    }
}

fn snap_phase(theta: f64, n: usize) -> f64 {
    match snap(theta, 2 * n) {
        Some(k) => wrap(k as f64 * TWO_PI / (2 * n) as f64),
        None => wrap(theta),
    }
}

fn normalize_det(x: &CMat) -> Result<CMat> {
    let det = x.determinant();
    let n = x.nrows() as f64;
    if !(det.norm() > 1e-300) {
        return Err(Error::Numerical("virtual symmetry matrix is singular".into()));
    }
    let x = x / c64(det.norm().powf(1.0 / n), 0.0);
    Ok(linalg::fix_phase(&x))
}

fn unit_radius(t: &MpsTensor) -> Result<MpsTensor> {
    let r = mps::spectral_radius(&mps::transfer_matrix(t))?;
    if r <= 1e-300 {
        return Err(invalid("tensor generates only zero states"));
    }
    Ok(t.scale(c64(1.0 / r.sqrt(), 0.0)))
}

/// Extract (X, φ) with b = e^{iφ} X⁻¹ a X; `None` when the states differ.
fn virtual_action(b: &MpsTensor, a: &MpsTensor) -> Result<(Option<(CMat, f64)>, f64)> {
    let (eq, gap) = structure::block_equivalence(b, a)?;
    match eq {
        None => Ok((None, gap)),
        Some(e) => {
            let y_inv = e.x.try_inverse().ok_or_else(|| Error::Numerical("singular gauge".into()))?;
            Ok((Some((normalize_det(&y_inv)?, e.phase)), gap))
        }
    }
}

/// Recover the virtual projective representation of an on-site symmetry.
pub fn detect_symmetry_action(state: &UniformMps, sym: &OnSiteSymmetry) -> Result<ProjectiveData> {
    state.require_periodic("symmetry detection")?;
    if sym.d() != state.d() {
        return Err(dim(format!("symmetry acts on d = {}, tensor has d = {}", sym.d(), state.d())));
    }
    mps::require_normal(&state.tensor)?;
    let a = unit_radius(&state.tensor)?;
    let g = &sym.group;
    let n = g.order();
    let dbond = a.bond();
    let mut xs = vec![CMat::identity(dbond, dbond); n];
    let mut phi = vec![0.0; n];
    let mut margin = f64::INFINITY;
    for el in 0..n {
        if el == g.identity() {
            continue;
        }
        let b = a.act_physical(&sym.unitaries[el])?;
        let (found, gap) = virtual_action(&b, &a)?;
        margin = margin.min(gap);
        let (x, p) = found.ok_or_else(|| {
            Error::Symmetry(format!("U({el}) maps the state to a different state"))
        })?;
        xs[el] = x;
        phi[el] = snap_phase(p, n);
    }
    let mut omega = vec![vec![0.0; n]; n];
    for a_ in 0..n {
        for b_ in 0..n {
            let prod = &xs[a_] * &xs[b_];
            let target = &xs[g.mul(a_, b_)];
            let c = (target.clone().try_inverse().ok_or_else(|| Error::Numerical("singular X".into()))? * &prod)
                .trace()
                / c64(dbond as f64, 0.0);
            let resid = linalg::fro(&(&prod - target * c));
            if resid > 1e-7 * linalg::fro(&prod).max(1.0) {
                return Err(Error::Numerical(format!(
                    "X({a_})X({b_}) is not proportional to X({}) (residual {resid:e})",
                    g.mul(a_, b_)
                )));
            }
            omega[a_][b_] = wrap(c.arg());
        }
    }
    let injectivity_length = structure::injectivity_length_of(&a)?;
    Ok(ProjectiveData { group: g.clone(), x: xs, phi, omega, injectivity_length, margin })
}

/// Check the cocycle identity of a phase table modulo 2π.
pub fn check_cocycle(g: &FiniteGroup, omega: &[Vec<f64>], tolerance: f64) -> Result<()> {
    let n = g.order();
    if omega.len() != n || omega.iter().any(|r| r.len() != n) {
        return Err(dim(format!("cocycle table must be {n}×{n}")));
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v = omega[b][c] - omega[g.mul(a, b)][c] + omega[a][g.mul(b, c)] - omega[a][b];
                if wrap(v).abs() > tolerance {
                    return Err(invalid(format!("cocycle identity fails at ({a},{b},{c}) by {:e}", wrap(v))));
                }
            }
        }
    }
    Ok(())
}

/// Normalised bar coboundary δ: C²(G,ℤ) → C³(G,ℤ) on non-identity arguments.
struct Coboundary {
    rest: Vec<usize>,
    pos: Vec<Option<usize>>,
    matrix: IntMatrix,
}

fn coboundary2(g: &FiniteGroup) -> Coboundary {
    let n = g.order();
    let rest: Vec<usize> = (0..n).filter(|&x| x != g.identity()).collect();
    let m = rest.len();
    let mut pos = vec![None; n];
    for (k, &x) in rest.iter().enumerate() {
        pos[x] = Some(k);
    }
    let col = |a: usize, b: usize| -> Option<usize> { Some(pos[a]? * m + pos[b]?) };
    let mut mat = IntMatrix::zeros(m * m * m, m * m);
    for (i, &a) in rest.iter().enumerate() {
        for (j, &b) in rest.iter().enumerate() {
            for (k, &c) in rest.iter().enumerate() {
                let row = (i * m + j) * m + k;
                let terms = [
                    (col(b, c), 1),
                    (col(g.mul(a, b), c), -1),
                    (col(a, g.mul(b, c)), 1),
                    (col(a, b), -1),
                ];
                for (cidx, s) in terms {
                    if let Some(cc) = cidx {
                        mat[(row, cc)] += BigInt::from(s);
                    }
                }
            }
        }
    }
    Coboundary { rest, pos, matrix: mat }
}

/// Cyclic-factor orders of H²(G, U(1)) ≅ H³(G, ℤ).
pub fn cohomology_group(g: &FiniteGroup) -> Result<Vec<u64>> {
    if g.order() > 16 {
        return Err(Error::Cap(format!("cohomology limited to |G| ≤ 16, got {}", g.order())));
    }
    if g.order() == 1 {
        return Ok(Vec::new());
    }
    let cb = coboundary2(g);
    Ok(invariant_factors(&cb.matrix).iter().filter_map(|d| d.to_u64()).filter(|&d| d > 1).collect())
}

/// Gauge-invariant commutator phase ω(g,h) − ω(h,g) of a commuting pair,
/// as k with phase 2πk/n.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CommutatorPhase {
    pub g: usize,
    pub h: usize,
    pub k: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CohomologyClass {
    pub group_structure: Vec<u64>,
    /// One entry per factor, reduced modulo its order. Empty when the group
    /// is too large for a labelled computation.
    pub label: Vec<u64>,
    pub commutators: Vec<CommutatorPhase>,
    pub trivial: bool,
    /// φ(g) as multiples of 2π/exponent for the unit cell and for blocks of
    /// the injectivity length.
    pub h1_unit_cell: Vec<usize>,
    pub h1_blocked: Vec<usize>,
    pub h1_block_length: usize,
    pub warnings: Vec<String>,
}

/// Class of a 2-cocycle via the Bockstein map: the integer 3-cocycle
/// δ(ω/2π) is reduced against the image of the integer coboundary.
pub fn cocycle_label(g: &FiniteGroup, omega: &[Vec<f64>]) -> Result<(Vec<u64>, Vec<u64>)> {
    if g.order() > 8 {
        return Err(Error::Cap(format!("class labels limited to |G| ≤ 8, got {}", g.order())));
    }
    check_cocycle(g, omega, 1e-6)?;
    if g.order() == 1 {
        return Ok((Vec::new(), Vec::new()));
    }
    let cb = coboundary2(g);
    let m = cb.rest.len();
    let w = |a: usize, b: usize| (omega[a][b] - omega[g.identity()][g.identity()]) / TWO_PI;
    let mut x = IntMatrix::zeros(m * m * m, 1);
    for (i, &a) in cb.rest.iter().enumerate() {
        for (j, &b) in cb.rest.iter().enumerate() {
            for (k, &c) in cb.rest.iter().enumerate() {
                let v = w(b, c) - w(g.mul(a, b), c) + w(a, g.mul(b, c)) - w(a, b);
                let r = v.round();
                if (v - r).abs() > 1e-6 {
                    return Err(Error::Numerical("cocycle phases are not consistent".into()));
                }
                x[((i * m + j) * m + k, 0)] = BigInt::from(r as i64);
            }
        }
    }
    let _ = &cb.pos;
    let sm = smith_normal_form(&cb.matrix);
    let ux = sm.u.mul(&x);
    let diag = sm.diagonal();
    let mut structure = Vec::new();
    let mut label = Vec::new();
    for (r, s) in diag.iter().enumerate() {
        if s > &BigInt::from(1) {
            structure.push(s.to_u64().unwrap_or(0));
            label.push(ux[(r, 0)].mod_floor(s).to_u64().unwrap_or(0));
        }
    }
    for r in diag.len()..ux.rows {
        if !ux[(r, 0)].is_zero() && ux[(r, 0)].abs() > BigInt::zero() {
            return Err(Error::Numerical("integer 3-cocycle has a free component".into()));
        }
    }
    Ok((structure, label))
}

/// Class of the projective representation recorded in `pd`.
pub fn cocycle_class(pd: &ProjectiveData) -> Result<CohomologyClass> {
    let g = &pd.group;
    let n = g.order();
    let exp = g.exponent();
    let mut warnings = Vec::new();
    let mut commutators = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if g.mul(a, b) != g.mul(b, a) {
                continue;
            }
            let alpha = pd.omega[a][b] - pd.omega[b][a];
            let k = snap(alpha, exp).ok_or_else(|| {
                Error::Numerical(format!("commutator phase {alpha} of ({a},{b}) is not a root of unity of order {exp}"))
            })?;
            commutators.push(CommutatorPhase { g: a, h: b, k, n: exp });
        }
    }
    let (group_structure, label) = if n <= 8 {
        cocycle_label(g, &pd.omega)?
    } else {
        warnings.push(format!("|G| = {n} > 8: only the commutator invariants are reported"));
        (cohomology_group(g)?, Vec::new())
    };
    if !g.is_abelian() && n > 8 {
        warnings.push("commutator phases are not a complete invariant for nonabelian groups".into());
    }
    let trivial = if label.is_empty() && n > 8 {
        commutators.iter().all(|c| c.k == 0)
    } else {
        label.iter().all(|&l| l == 0)
    };
    let h1 = |len: usize| -> Vec<usize> {
        pd.phi
            .iter()
            .map(|&p| snap(p * len as f64, exp).unwrap_or(usize::MAX))
            .collect()
    };
    let h1_unit_cell = h1(1);
    if h1_unit_cell.contains(&usize::MAX) {
        warnings.push("φ(g) is not a character to snapping tolerance".into());
    }
    let l0 = pd.injectivity_length.max(1);
    Ok(CohomologyClass {
        group_structure,
        label,
        commutators,
        trivial,
        h1_unit_cell,
        h1_blocked: h1(l0),
        h1_block_length: l0,
        warnings,
    })
}

/// Sign s in X·conj(X) = s·1 for an antiunitary symmetry u∘K.
pub fn time_reversal_index(state: &UniformMps, u: &CMat) -> Result<i32> {
    state.require_periodic("time-reversal index")?;
    let d = state.d();
    if u.shape() != (d, d) {
        return Err(dim(format!("u must be {d}×{d}")));
    }
    if linalg::fro(&(u * u.adjoint() - CMat::identity(d, d))) > 1e-8 {
        return Err(invalid("u is not unitary"));
    }
    let uu = u * u.map(|z| z.conj());
    if linalg::fro(&(&uu + CMat::identity(d, d))) < 1e-8 {
        return Err(Error::Symmetry(
            "Kramers obstruction: u·conj(u) = −1 admits no invariant normal MPS".into(),
        ));
    }
    mps::require_normal(&state.tensor)?;
    let a = unit_radius(&state.tensor)?;
    let b = a.map(|m| m.map(|z| z.conj())).act_physical(u)?;
    let (found, _) = virtual_action(&b, &a)?;
    let (x, _) = found.ok_or_else(|| Error::Symmetry("the antiunitary action does not preserve the state".into()))?;
    let xx = &x * x.map(|z| z.conj());
    let n = x.nrows();
    let s = xx.trace() / c64(n as f64, 0.0);
    if linalg::fro(&(&xx - CMat::identity(n, n) * s)) > 1e-7 * linalg::fro(&xx).max(1.0) {
        return Err(Error::Numerical("X·conj(X) is not proportional to the identity".into()));
    }
    if s.im.abs() > 1e-7 || (s.re.abs() - 1.0).abs() > 1e-6 {
        return Err(Error::Numerical(format!("X·conj(X) = {s}·1 is not ±1")));
    }
    Ok(if s.re > 0.0 { 1 } else { -1 })
}

/// String length for [`string_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringLength {
    Finite(usize),
    Infinite,
}

/// ⟨R ⊗ U_g^{⊗L} ⊗ R⟩ in the thermodynamic limit of a normal chain.
pub fn string_order(state: &UniformMps, sym: &OnSiteSymmetry, g: usize, r: &CMat, len: StringLength) -> Result<C64> {
    let d = state.d();
    if g >= sym.group.order() {
        return Err(invalid(format!("group element {g} out of range")));
    }
    if sym.d() != d || r.shape() != (d, d) {
        return Err(dim("symmetry and end operator must act on the physical space"));
    }
    // R must carry a nontrivial one-dimensional irrep.
    let mut nontrivial = false;
    let rn = linalg::fro(r);
    if rn < 1e-12 {
        return Err(invalid("end operator is zero"));
    }
    for u in &sym.unitaries {
        let conj = u * r * u.adjoint();
        let chi = (r.adjoint() * &conj).trace() / c64(rn * rn, 0.0);
        if linalg::fro(&(&conj - r * chi)) > 1e-8 * rn {
            return Err(invalid("end operator is not covariant under the symmetry"));
        }
        if (chi - ONE).norm() > 1e-8 {
            nontrivial = true;
        }
    }
    if !nontrivial {
        return Err(invalid("end operator transforms trivially"));
    }
    mps::require_normal(&state.tensor)?;
    let to = mps::transfer_operator(state, true)?;
    let a = unit_radius(&state.tensor)?;
    let er = mps::dressed_transfer(&a, r)?;
    let eg = mps::dressed_transfer(&a, &sym.unitaries[g])?;
    let rv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_r));
    let lv = CVec::from_column_slice(&linalg::vec_rm(&to.rho_l));
    let norm = (lv.adjoint() * &rv)[(0, 0)];
    let mid = match len {
        StringLength::Finite(l) => mps::matrix_power(&eg, l),
        StringLength::Infinite => {
            let spec = linalg::eigenvalues(&eg)?;
            let top = spec.first().map(|z| z.norm()).unwrap_or(0.0);
            if top < 1.0 - 1e-8 {
                return Ok(ZERO);
            }
            let (p, vals) = linalg::spectral_projector(&eg, |z| z.norm() >= 1.0 - 1e-8)?;
            if vals.iter().any(|v| (v - ONE).norm() > 1e-6) {
                return Err(Error::Numerical(
                    "dressed transfer has a unimodular eigenvalue other than 1; the limit oscillates".into(),
                ));
            }
            p
        }
    };
    Ok((lv.adjoint() * &er * mid * &er * &rv)[(0, 0)] / norm)
}

/// Renormalization fixed point with cocycle ω and character φ, together
/// with its on-site symmetry.
///
/// A site carries a pair (a, b) of group labels with A^{(a,b)} = |a)(b|/√|G|;
/// the symmetry acts as e^{iφ(g)} conj(V_g) ⊗ V_g with V_g|h) = e^{iω(g,h)}|gh).
pub fn build_spt_fixed_point(g: &FiniteGroup, omega: &[Vec<f64>], phi: &[f64]) -> Result<(UniformMps, OnSiteSymmetry)> {
    let n = g.order();
    check_cocycle(g, omega, 1e-9)?;
    if phi.len() != n {
        return Err(dim(format!("φ must have {n} entries")));
    }
    for a in 0..n {
        for b in 0..n {
            if wrap(phi[a] + phi[b] - phi[g.mul(a, b)]).abs() > 1e-9 {
                return Err(invalid("φ is not a character of the group"));
            }
        }
    }
    let s = 1.0 / (n as f64).sqrt();
    let t = MpsTensor::from_fn(n * n, n, n, |i, l, r| {
        if i / n == l && i % n == r {
            c64(s, 0.0)
        } else {
            ZERO
        }
    })?;
    let v = |el: usize| {
        let mut m = CMat::zeros(n, n);
        let base = omega[g.identity()][g.identity()];
        for h in 0..n {
            m[(g.mul(el, h), h)] = C64::from_polar(1.0, omega[el][h] - base);
        }
        m
    };
    let sym = OnSiteSymmetry::from_fn(g.clone(), |el| {
        let ve = v(el);
        linalg::kron(&ve.map(|z| z.conj()), &ve) * C64::from_polar(1.0, phi[el])
    })?;
    Ok((UniformMps::periodic(t)?, sym))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RgfpReport {
    pub fixed_point: bool,
    pub residual: f64,
    pub one_site_rank: usize,
    pub two_site_rank: usize,
    /// The two-site tensor equals an isometry applied to the one-site tensor.
    pub isometric_factorization: bool,
}

/// Whether the normalised transfer operator is idempotent.
pub fn rgfp_check(state: &UniformMps) -> Result<RgfpReport> {
    state.require_periodic("fixed-point check")?;
    let t = &state.tensor;
    let e = mps::transfer_matrix(t);
    let r = mps::spectral_radius(&e)?;
    if r <= 1e-300 {
        return Err(invalid("tensor generates only zero states"));
    }
    let en = &e / c64(r, 0.0);
    let residual = linalg::fro(&(&en * &en - &en));
    let map_rank = |tt: &MpsTensor| -> Result<usize> {
        let db = tt.bond();
        let mut m = CMat::zeros(tt.d(), db * db);
        for (i, a) in tt.mats().iter().enumerate() {
            for (k, z) in linalg::vec_rm(a).into_iter().enumerate() {
                m[(i, k)] = z;
            }
        }
        Ok(linalg::svd(&m)?.rank())
    };
    let one = map_rank(t)?;
    let two = map_rank(&mps::block_tensor(t, 2)?)?;
    Ok(RgfpReport {
        fixed_point: residual <= tol::eq().max(1e-10) * (1.0 + linalg::fro(&en)),
        residual,
        one_site_rank: one,
        two_site_rank: two,
        isometric_factorization: one == two,
    })
}

/// Project a tensor onto those transforming as Σ_j U_ij A^j = X⁻¹ A^i X for
/// a linear virtual representation X (group average).
pub fn symmetrize(t: &MpsTensor, sym: &OnSiteSymmetry, virt: &[CMat]) -> Result<MpsTensor> {
    let n = sym.group.order();
    if virt.len() != n {
        return Err(dim("one virtual matrix per group element is required"));
    }
    let mut acc: Option<MpsTensor> = None;
    for g in 0..n {
        let xinv = virt[g].clone().try_inverse().ok_or_else(|| invalid("singular virtual matrix"))?;
        let ginv = sym.group.inv(g);
        // U(g⁻¹) applied physically, conjugated back by X(g).
        let term = t.act_physical(&sym.unitaries[ginv])?.map(|m| &xinv * m * &virt[g]);
        acc = Some(match acc {
            None => term,
            Some(a) => MpsTensor::new(a.mats().iter().zip(term.mats()).map(|(x, y)| x + y).collect())?,
        });
    }
    Ok(acc.expect("group is nonempty").scale(c64(1.0 / n as f64, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_constructors() {
        assert_eq!(FiniteGroup::cyclic(5).exponent(), 5);
        assert!(FiniteGroup::z2xz2().is_abelian());
        let d3 = FiniteGroup::dihedral(3);
        assert_eq!(d3.order(), 6);
        assert!(!d3.is_abelian());
    }

    #[test]
    fn bad_table_is_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn cohomology_small_groups() {
        assert!(cohomology_group(&FiniteGroup::cyclic(4)).unwrap().is_empty());
        assert_eq!(cohomology_group(&FiniteGroup::z2xz2()).unwrap(), vec![2]);
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(PI, 2), Some(1));
        assert_eq!(snap(-PI / 2.0, 4), Some(3));
        assert_eq!(snap(0.3, 4), None);
    }
}
