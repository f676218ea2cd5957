//! Translation-invariant matrix product operators: application,
//! composition, reduction, unitarity for all lengths and the transport index.
//!
//! An MPO tensor with axes (out, in, left, right) is stored as an MPS tensor
//! whose physical index is the pair p = out·d_in + in.

use crate::error::{dim, invalid, Error, Result};
use crate::linalg::{self, c64, CMat, DenseTensor, C64, ONE, ZERO};
use crate::mps::{self, MpsTensor, UniformMps};
use crate::structure::{self, Verdict};
use crate::tol;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct MpoTensor {
    d_out: usize,
    d_in: usize,
    inner: MpsTensor,
}

impl MpoTensor {
    /// From a function of (out, in, left, right).
    pub fn from_fn(
        d_out: usize,
        d_in: usize,
        dl: usize,
        dr: usize,
        f: impl Fn(usize, usize, usize, usize) -> C64,
    ) -> Result<Self> {
        let inner = MpsTensor::from_fn(d_out * d_in, dl, dr, |p, a, b| f(p / d_in, p % d_in, a, b))?;
        Ok(MpoTensor { d_out, d_in, inner })
    }

    /// From per-(out, in) matrices, ordered out-major.
    pub fn from_mats(d_out: usize, d_in: usize, mats: Vec<CMat>) -> Result<Self> {
        if mats.len() != d_out * d_in {
            return Err(dim(format!("expected {} matrices, got {}", d_out * d_in, mats.len())));
        }
        Ok(MpoTensor { d_out, d_in, inner: MpsTensor::new(mats)? })
    }

    /// Bond-dimension-one MPO of a single-site operator.
    pub fn product(op: &CMat) -> Result<Self> {
        MpoTensor::from_fn(op.nrows(), op.ncols(), 1, 1, |o, i, _, _| op[(o, i)])
    }

    pub fn identity(d: usize) -> Self {
        MpoTensor::product(&CMat::identity(d, d)).expect("identity MPO")
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn bond(&self) -> usize {
        self.inner.bond()
    }

    pub fn dl(&self) -> usize {
        self.inner.dl()
    }

    pub fn dr(&self) -> usize {
        self.inner.dr()
    }

    pub fn mat(&self, o: usize, i: usize) -> &CMat {
        self.inner.mat(o * self.d_in + i)
    }

    /// The operator viewed as a matrix product vector of physical dimension
    /// d_out·d_in.
    pub fn as_mps(&self) -> &MpsTensor {
        &self.inner
    }

    pub fn from_mps(d_out: usize, d_in: usize, t: MpsTensor) -> Result<Self> {
        if t.d() != d_out * d_in {
            return Err(dim("MPV physical dimension does not factor as d_out·d_in"));
        }
        Ok(MpoTensor { d_out, d_in, inner: t })
    }

    /// Dense tensor with axes (out, in, left, right).
    pub fn to_dense(&self) -> DenseTensor {
        let (dl, dr) = (self.dl(), self.dr());
        let mut data = Vec::with_capacity(self.d_out * self.d_in * dl * dr);
        for o in 0..self.d_out {
            for i in 0..self.d_in {
                let m = self.mat(o, i);
                for a in 0..dl {
                    for b in 0..dr {
                        data.push(m[(a, b)]);
                    }
                }
            }
        }
        DenseTensor::new(
            vec!["out", "in", "left", "right"],
            vec![self.d_out, self.d_in, dl, dr],
            data,
        )
        .expect("consistent shape")
    }

    pub fn from_dense(t: &DenseTensor) -> Result<Self> {
        let t = t.permute(&["out", "in", "left", "right"])?;
        let s = t.shape().to_vec();
        let data = t.data();
        MpoTensor::from_fn(s[0], s[1], s[2], s[3], |o, i, a, b| data[((o * s[1] + i) * s[2] + a) * s[3] + b])
    }

    /// O† with tensor conj(O^{in,out}).
    pub fn adjoint(&self) -> Self {
        let mats = (0..self.d_in)
            .flat_map(|i| (0..self.d_out).map(move |o| (o, i)))
            .map(|(o, i)| self.mat(o, i).map(|z| z.conj()))
            .collect();
        MpoTensor::from_mats(self.d_in, self.d_out, mats).expect("shape preserved")
    }

    /// Conjugate every site by a single-site unitary: u·O·u†.
    pub fn conjugate_sites(&self, u: &CMat) -> Result<Self> {
        let a = MpoTensor::product(u)?;
        let b = MpoTensor::product(&u.adjoint())?;
        mpo_compose(&mpo_compose(&a, self)?, &b)
    }
}

/// (O·ψ): B^o = Σ_i O^{o,i} ⊗ A^i.
pub fn mpo_apply(o: &MpoTensor, state: &UniformMps) -> Result<UniformMps> {
    if o.d_in != state.d() {
        return Err(dim(format!("MPO input dimension {} vs state d = {}", o.d_in, state.d())));
    }
    let mats: Vec<CMat> = (0..o.d_out)
        .map(|out| {
            let mut acc = CMat::zeros(o.dl() * state.tensor.dl(), o.dr() * state.tensor.dr());
            for i in 0..o.d_in {
                acc += linalg::kron(o.mat(out, i), state.tensor.mat(i));
            }
            acc
        })
        .collect();
    let t = MpsTensor::new(mats)?;
    match &state.boundary {
        mps::Boundary::Periodic => UniformMps::periodic(t),
        mps::Boundary::Open { l, r } => {
            if o.bond() != 1 || !o.inner.is_square() {
                return Err(invalid("an MPO with bond > 1 can only act on periodic states"));
            }
            UniformMps::open(t, l.clone(), r.clone())
        }
    }
}

/// a∘b, i.e. b applied first: (a∘b)^{o,i} = Σ_k a^{o,k} ⊗ b^{k,i}.
pub fn mpo_compose(a: &MpoTensor, b: &MpoTensor) -> Result<MpoTensor> {
    if a.d_in != b.d_out {
        return Err(dim(format!("cannot compose: inner dimensions {} and {}", a.d_in, b.d_out)));
    }
    let mut mats = Vec::with_capacity(a.d_out * b.d_in);
    for o in 0..a.d_out {
        for i in 0..b.d_in {
            let mut acc = CMat::zeros(a.dl() * b.dl(), a.dr() * b.dr());
            for k in 0..a.d_in {
                acc += linalg::kron(a.mat(o, k), b.mat(k, i));
            }
            mats.push(acc);
        }
    }
    MpoTensor::from_mats(a.d_out, b.d_in, mats)
}

/// Tensor product of two MPOs acting on a doubled site (a's leg first).
pub fn mpo_tensor(a: &MpoTensor, b: &MpoTensor) -> Result<MpoTensor> {
    let (dob, dib) = (b.d_out, b.d_in);
    let d_out = a.d_out * dob;
    let d_in = a.d_in * dib;
    let mut mats = Vec::with_capacity(d_out * d_in);
    for o in 0..d_out {
        for i in 0..d_in {
            mats.push(linalg::kron(a.mat(o / dob, i / dib), b.mat(o % dob, i % dib)));
        }
    }
    MpoTensor::from_mats(d_out, d_in, mats)
}

/// Block k sites into one with dimensions d_out^k, d_in^k.
pub fn block_mpo(o: &MpoTensor, k: usize) -> Result<MpoTensor> {
    let cap = tol::cap_dim();
    let dout = mps::pow_capped(o.d_out, k, cap, "blocked MPO output")?;
    let din = mps::pow_capped(o.d_in, k, cap, "blocked MPO input")?;
    mps::pow_capped(dout * din, 1, cap.max(1 << 16), "blocked MPO")?;
    let blocked = mps::block_tensor(&o.inner, k)?;
    let pd = o.d_out * o.d_in;
    let mut mats = vec![CMat::zeros(0, 0); dout * din];
    for (p, m) in blocked.mats().iter().enumerate() {
        let digs = mps::digits(p, pd, k);
        let (mut oo, mut ii) = (0, 0);
        for dgt in digs {
            oo = oo * o.d_out + dgt / o.d_in;
            ii = ii * o.d_in + dgt % o.d_in;
        }
        mats[oo * din + ii] = m.clone();
    }
    MpoTensor::from_mats(dout, din, mats)
}

/// Dense operator on n sites with periodic trace closure.
pub fn dense_operator(o: &MpoTensor, n: usize) -> Result<CMat> {
    let b = block_mpo(o, n)?;
    let (r, c) = (b.d_out, b.d_in);
    mps::pow_capped(r * c, 1, 1 << 24, "dense operator")?;
    let mut m = CMat::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            m[(i, j)] = b.mat(i, j).trace();
        }
    }
    Ok(m)
}

/// Reduced form of an MPO: the canonical form of its MPV reassembled as
/// ⊕ μ_k A_k.
#[derive(Debug, Clone)]
pub struct MpoReduction {
    pub tensor: MpoTensor,
    /// Sites blocked into one by the reduction.
    pub blocking_p: usize,
    pub weights: Vec<f64>,
    pub block_dims: Vec<usize>,
}

pub fn mpo_reduce(o: &MpoTensor) -> Result<MpoReduction> {
    let state = UniformMps::periodic(o.inner.clone())?;
    let cf = structure::canonical_form(&state)?;
    let t = cf.reassemble()?;
    let p = cf.blocking_p;
    let (dout, din) = (o.d_out.pow(p as u32), o.d_in.pow(p as u32));
    let tensor = if p == 1 {
        MpoTensor::from_mps(o.d_out, o.d_in, t)?
    } else {
        // Blocked MPV index is a digit string of (out, in) pairs.
        let pd = o.d_out * o.d_in;
        let mut mats = vec![CMat::zeros(0, 0); dout * din];
        for (q, m) in t.mats().iter().enumerate() {
            let (mut oo, mut ii) = (0, 0);
            for dgt in mps::digits(q, pd, p) {
                oo = oo * o.d_out + dgt / o.d_in;
                ii = ii * o.d_in + dgt % o.d_in;
            }
            mats[oo * din + ii] = m.clone();
        }
        MpoTensor::from_mats(dout, din, mats)?
    };
    Ok(MpoReduction {
        tensor,
        blocking_p: p,
        weights: cf.blocks.iter().map(|b| b.weight).collect(),
        block_dims: cf.blocks.iter().map(|b| b.tensor.bond()).collect(),
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MpuReport {
    pub unitary: bool,
    /// ½·log₂(r/ℓ); present only for unitaries.
    pub index: Option<f64>,
    pub blocking_used: usize,
    pub rank_left: Option<usize>,
    pub rank_right: Option<usize>,
    /// Dense unitarity of the n-site operator for n = 1, 2, …
    pub dense_unitary: Vec<bool>,
}

fn identity_mpv(d: usize) -> Result<UniformMps> {
    UniformMps::periodic(MpoTensor::identity(d).inner)
}

/// O·O† = 1 for every chain length, decided by comparing the MPV of O·O†
/// with the identity MPV.
pub fn is_unitary_mpu(o: &MpoTensor) -> Result<MpuReport> {
    if o.d_out != o.d_in {
        return Err(invalid("unitarity needs d_out = d_in"));
    }
    let w = mpo_compose(o, &o.adjoint())?;
    let rel = structure::compare_states(&UniformMps::periodic(w.inner)?, &identity_mpv(o.d_in)?)?;
    let unitary = rel.verdict == Verdict::Equal && rel.blocking_p == 1;
    let dense_unitary = short_chain_unitarity(o)?;
    Ok(MpuReport { unitary, index: None, blocking_used: 1, rank_left: None, rank_right: None, dense_unitary })
}

/// Dense unitarity of the operator on 1, 2, … sites while it has at most
/// 256 rows.
fn short_chain_unitarity(o: &MpoTensor) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for n in 1..=4 {
        if mps::pow_capped(o.d_in, n, 256, "").is_err() {
            break;
        }
        let m = dense_operator(o, n)?;
        let k = m.nrows();
        out.push(linalg::fro(&(&m * m.adjoint() - CMat::identity(k, k))) <= 1e-8 * (k as f64).sqrt());
    }
    Ok(out)
}

/// Ranks ℓ of (in, left)×(out, right) and r of (in, right)×(out, left).
fn transport_ranks(o: &MpoTensor) -> Result<(usize, usize)> {
    let (dout, din, dl, dr) = (o.d_out, o.d_in, o.dl(), o.dr());
    let mut ml = CMat::zeros(din * dl, dout * dr);
    let mut mr = CMat::zeros(din * dr, dout * dl);
    for out in 0..dout {
        for i in 0..din {
            let m = o.mat(out, i);
            for a in 0..dl {
                for b in 0..dr {
                    ml[(i * dl + a, out * dr + b)] = m[(a, b)];
                    mr[(i * dr + b, out * dl + a)] = m[(a, b)];
                }
            }
        }
    }
    Ok((linalg::svd(&ml)?.rank(), linalg::svd(&mr)?.rank()))
}

/// Transport index ½·log₂(r/ℓ); positive for left-moving information.
pub fn mpu_index(o: &MpoTensor) -> Result<MpuReport> {
    let rep = is_unitary_mpu(o)?;
    if !rep.unitary {
        return Err(invalid("index is defined only for matrix product unitaries"));
    }
    saturated_ranks(o, rep)
}

/// Index of an MPO known to be unitary for every length, such as a product
/// of verified MPUs whose bond is too large for the all-length check. Only
/// dense unitarity on short chains is verified here.
pub fn transport_index(o: &MpoTensor) -> Result<MpuReport> {
    if o.d_out != o.d_in {
        return Err(invalid("index needs d_out = d_in"));
    }
    let dense_unitary = short_chain_unitarity(o)?;
    if dense_unitary.iter().any(|&u| !u) {
        return Err(invalid("operator is not unitary on short chains"));
    }
    let rep = MpuReport { unitary: true, index: None, blocking_used: 1, rank_left: None, rank_right: None, dense_unitary };
    saturated_ranks(o, rep)
}

fn saturated_ranks(o: &MpoTensor, mut rep: MpuReport) -> Result<MpuReport> {
    let d = o.d_in;
    let max_k = o.bond().pow(4).max(1);
    for k in 1..=max_k {
        let b = match block_mpo(o, k) {
            Ok(b) => b,
            Err(Error::Cap(msg)) => return Err(Error::Cap(format!("rank saturation not reached before the cap: {msg}"))),
            Err(e) => return Err(e),
        };
        let (l, r) = transport_ranks(&b)?;
        let full = (d as u128).pow(2 * k as u32);
        if (l as u128) * (r as u128) == full {
            rep.index = Some(0.5 * (r as f64 / l as f64).log2());
            rep.blocking_used = k;
            rep.rank_left = Some(l);
            rep.rank_right = Some(r);
            return Ok(rep);
        }
    }
    Err(Error::Numerical(format!("ranks did not saturate within {max_k} blocked sites")))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PositivityReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub n: usize,
}

/// Dense positivity check of the n-site operator.
pub fn mpo_positivity_small(o: &MpoTensor, n: usize) -> Result<PositivityReport> {
    if o.d_out != o.d_in {
        return Err(invalid("positivity needs d_out = d_in"));
    }
    mps::pow_capped(o.d_in, n, 1 << 12, "positivity check")?;
    let m = dense_operator(o, n)?;
    let scale = linalg::fro(&m).max(1.0);
    if linalg::fro(&(&m - m.adjoint())) > 1e-9 * scale {
        return Err(invalid("operator is not Hermitian"));
    }
    let min = linalg::min_eig(&m)?;
    Ok(PositivityReport { positive: min >= -tol::eq() * scale, min_eigenvalue: min, n })
}

/// Left shift on qudits of dimension d: O^{o,i} = |i)(o|, index +log₂d.
pub fn left_shift(d: usize) -> MpoTensor {
    MpoTensor::from_fn(d, d, d, d, |o, i, a, b| if a == i && b == o { ONE } else { ZERO }).expect("shift")
}

/// Right shift O^{o,i} = |o)(i|, index −log₂d.
pub fn right_shift(d: usize) -> MpoTensor {
    MpoTensor::from_fn(d, d, d, d, |o, i, a, b| if a == o && b == i { ONE } else { ZERO }).expect("shift")
}

fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let (w, _) = linalg::polar_decompose(&g).expect("square polar");
    w
}

/// Random depth-two circuit MPU on sites made of two qubits (x, y): a random
/// unitary inside each site, then a random two-qubit gate on (y_k, x_{k+1}).
/// `shift_y` optionally composes with a left (+1) or right (−1) shift of the
/// y qubits, changing the index by ±1.
pub fn random_circuit_mpu<R: Rng>(rng: &mut R, shift_y: i32) -> Result<MpoTensor> {
    let u = random_unitary(rng, 4);
    let v = random_unitary(rng, 4);
    // Operator Schmidt decomposition v = Σ_s P_s ⊗ Q_s, P on y_k, Q on x_{k+1}.
    // Reshuffle v_{(a b),(c e)} → R_{(a c),(b e)}.
    let mut rsh = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for e in 0..2 {
                    rsh[(a * 2 + c, b * 2 + e)] = v[(a * 2 + b, c * 2 + e)];
                }
            }
        }
    }
    let s = linalg::svd(&rsh)?;
    let chi = s.rank_rel(1e-12).max(1);
    let p: Vec<CMat> = (0..chi)
        .map(|k| {
            let col = s.u.column(k) * c64(s.s[k], 0.0);
            CMat::from_fn(2, 2, |a, c| col[a * 2 + c])
        })
        .collect();
    let q: Vec<CMat> = (0..chi)
        .map(|k| {
            let row = s.v.column(k).map(|z| z.conj());
            CMat::from_fn(2, 2, |b, e| row[b * 2 + e])
        })
        .collect();
    // Site operator with left bond a (gate shared with the left neighbour,
    // acting on x) and right bond b (gate with the right neighbour, on y).
    let gate_layer = MpoTensor::from_fn(4, 4, chi, chi, |o, i, a, b| {
        let xo = o / 2;
        let yo = o % 2;
        let xi = i / 2;
        let yi = i % 2;
        q[a][(xo, xi)] * p[b][(yo, yi)]
    })?;
    let onsite = MpoTensor::product(&u)?;
    let mut circuit = mpo_compose(&gate_layer, &onsite)?;
    if shift_y != 0 {
        let sh = if shift_y > 0 { left_shift(2) } else { right_shift(2) };
        let layer = mpo_tensor(&MpoTensor::identity(2), &sh)?;
        circuit = mpo_compose(&layer, &circuit)?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_moves_content_left() {
        let s = left_shift(2);
        let m = dense_operator(&s, 3).unwrap();
        // |100⟩ (index 4) goes to |001⟩ (index 1) under a cyclic left shift.
        assert_eq!(m[(1, 4)], ONE);
        assert_eq!(m[(2, 1)], ONE);
    }

    #[test]
    fn shift_index_signs() {
        assert!((mpu_index(&left_shift(2)).unwrap().index.unwrap() - 1.0).abs() < 1e-12);
        assert!((mpu_index(&right_shift(2)).unwrap().index.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(mpu_index(&MpoTensor::identity(3)).unwrap().index, Some(0.0));
    }

    #[test]
    fn projector_is_not_unitary() {
        let p = MpoTensor::product(&linalg::from_real(2, 2, &[1., 0., 0., 0.])).unwrap();
        assert!(!is_unitary_mpu(&p).unwrap().unitary);
    }
}
