//! Catalogue of standard example tensors with their known properties.
//!
//! Every entry is built from exact numbers (integers, 1/√2, Boltzmann
//! weights) and carries a list of expected properties that
//! [`validate_entry`] re-derives with the analysis modules.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c64, CMat, CVec, C64, ONE, ZERO};
use crate::mpo::{self, MpoTensor};
use crate::mps::{self, MpsTensor, UniformMps};
use crate::peps::{self, PepsBoundary, PepsPatch, PepsTensor};
use crate::structure::{self, Verdict};
use crate::symmetry::FiniteGroup;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

/// String-valued parameters, parsed on demand.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    /// Parse `key=value` pairs.
    pub fn parse<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut p = Params::new();
        for it in items {
            let (k, v) = it.split_once('=').ok_or_else(|| invalid(format!("parameter {it:?} is not key=value")))?;
            p.0.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(p)
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(format!("{key}={s} is not a finite number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(s) => s.parse::<usize>().map_err(|_| invalid(format!("{key}={s} is not a non-negative integer"))),
        }
    }

    fn text<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.0.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(invalid(format!("unknown parameter {k:?}; accepted: {allowed:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mps,
    Mpo,
    Peps,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusObject {
    Mps(UniformMps),
    Mpo(MpoTensor),
    Peps(PepsPatch),
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    /// Stated in the literature for this example.
    Published,
    /// Computed independently (closed form or brute force).
    Derived,
    /// Immediate from the definition.
    Definition,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Normal(bool),
    InjectivityLength(usize),
    /// Spectrum of the normalised transfer operator, as a multiset.
    TransferSpectrum(Vec<C64>),
    CanonicalBlocks { blocking_p: usize, blocks: usize },
    /// No translation-invariant periodic form with fixed bond dimension.
    PeriodicRefused,
    Unitary(bool),
    MpuIndex(f64),
    /// The MPV of O·O equals that of λ^N times the identity.
    SquareProportionalToIdentity(C64),
    NormPositive,
    NonzeroAmplitudes(usize),
    /// Rank of the map from the four bonds of site (0, 0) to its physical space.
    SiteMapRank(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedProperty {
    pub property: Expected,
    pub origin: Origin,
    pub note: &'static str,
}

fn exp(property: Expected, origin: Origin, note: &'static str) -> ExpectedProperty {
    ExpectedProperty { property, origin, note }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub kind: Kind,
    pub params: Params,
    pub object: CorpusObject,
    pub expected: Vec<ExpectedProperty>,
}

impl CorpusEntry {
    pub fn mps(&self) -> Result<&UniformMps> {
        match &self.object {
            CorpusObject::Mps(m) => Ok(m),
            _ => Err(invalid(format!("{} is not an MPS entry", self.name))),
        }
    }

    pub fn mpo(&self) -> Result<&MpoTensor> {
        match &self.object {
            CorpusObject::Mpo(m) => Ok(m),
            _ => Err(invalid(format!("{} is not an MPO entry", self.name))),
        }
    }

    pub fn peps(&self) -> Result<&PepsPatch> {
        match &self.object {
            CorpusObject::Peps(p) => Ok(p),
            _ => Err(invalid(format!("{} is not a PEPS entry", self.name))),
        }
    }

    /// The entry as a periodic uniform MPS.
    pub fn periodic_mps(&self) -> Result<UniformMps> {
        let m = self.mps()?;
        if self.name == "w" {
            return Err(invalid(
                "the W state has no translation-invariant periodic MPS of fixed bond dimension; the bond dimension must grow with the chain length",
            ));
        }
        if m.is_periodic() {
            Ok(m.clone())
        } else {
            UniformMps::periodic(m.tensor.clone())
        }
    }
}

/// Catalogue: (name, kind, accepted parameters, one-line description).
pub const CATALOG: &[(&str, Kind, &[&str], &str)] = &[
    ("ghz", Kind::Mps, &["d"], "GHZ state, A^i = |i)(i|"),
    ("w", Kind::Mps, &[], "W state with boundary vectors (0| and |1)"),
    ("cluster1d", Kind::Mps, &[], "1D cluster state, A^0 = |0)(+|, A^1 = |1)(-|"),
    ("aklt1d", Kind::Mps, &["basis"], "spin-1 AKLT state; basis=pauli (default) or sz"),
    ("majumdar_ghosh", Kind::Mps, &[], "Majumdar-Ghosh dimer state, D = 3"),
    ("product", Kind::Mps, &["d"], "product state |0...0>"),
    ("identity_mpo", Kind::Mpo, &["d"], "identity MPO"),
    ("shift", Kind::Mpo, &["d", "direction"], "shift MPU; direction=left (default) or right"),
    ("czx_mpu", Kind::Mpo, &[], "CZX matrix product unitary"),
    ("ghz2d", Kind::Peps, &["d", "lx", "ly"], "2D GHZ state on a torus"),
    ("cluster2d", Kind::Peps, &["lx", "ly"], "2D cluster state on a torus"),
    ("aklt2d", Kind::Peps, &["lx", "ly"], "square-lattice AKLT state, d = 5"),
    ("rvb", Kind::Peps, &["lx", "ly"], "nearest-neighbour RVB state, D = 3"),
    ("ising_peps", Kind::Peps, &["beta", "lx", "ly"], "PEPS of the classical Ising model at inverse temperature beta"),
    ("toric_code_dual", Kind::Peps, &["group", "lx", "ly"], "G-isometric quantum double PEPS (group z2 or z3)"),
    ("toric_code_primal", Kind::Peps, &["group", "lx", "ly"], "quantum double PEPS with Gauss-law bonds"),
    ("toric_code_qubit", Kind::Peps, &["lx", "ly"], "toric code as a qubit PEPS with D = 2 (even lx, ly)"),
    ("czx_state", Kind::Peps, &["lx", "ly"], "CZX state: plaquette GHZ states, d = 16, D = 4"),
    ("product_peps", Kind::Peps, &["lx", "ly"], "product PEPS |0...0> with D = 1"),
];

fn y_singlet() -> CMat {
    linalg::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

fn y3() -> CMat {
    linalg::from_real(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
}

pub fn ghz_tensor(d: usize) -> MpsTensor {
    MpsTensor::from_fn(d, d, d, |i, a, b| if i == a && a == b { ONE } else { ZERO }).expect("ghz")
}

pub fn cluster1d_tensor() -> MpsTensor {
    let s = FRAC_1_SQRT_2;
    MpsTensor::new(vec![linalg::from_real(2, 2, &[s, s, 0.0, 0.0]), linalg::from_real(2, 2, &[0.0, 0.0, s, -s])]).expect("cluster")
}

/// AKLT in the rotated basis (|−⟩, |+⟩, |0⟩): σ_x/√2, σ_y/√2, σ_z/√2.
pub fn aklt_pauli() -> MpsTensor {
    let s = FRAC_1_SQRT_2;
    let x = linalg::from_real(2, 2, &[0.0, s, s, 0.0]);
    let y = CMat::from_row_slice(2, 2, &[ZERO, c64(0.0, -s), c64(0.0, s), ZERO]);
    let z = linalg::from_real(2, 2, &[s, 0.0, 0.0, -s]);
    MpsTensor::new(vec![x, y, z]).expect("aklt")
}

/// AKLT in the S_z basis (+1, 0, −1), singlet Y absorbed on the right.
pub fn aklt_sz() -> MpsTensor {
    let y = y_singlet();
    let p = linalg::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let z = linalg::from_real(2, 2, &[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]);
    let m = linalg::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    MpsTensor::new(vec![p * &y, z * &y, m * &y]).expect("aklt")
}

/// Overlaps ⟨s|a⟩ of the S_z basis (+1, 0, −1) with the rotated basis
/// (|−⟩, |+⟩, |0⟩); applied to the physical index it rewrites the
/// Pauli-basis tensor in the S_z basis.
pub fn aklt_basis_change() -> CMat {
    // |+⟩ = i(|−1⟩+|+1⟩)/√2, |−⟩ = (|−1⟩−|+1⟩)/√2, |0⟩ = |0⟩.
    let s = FRAC_1_SQRT_2;
    CMat::from_row_slice(
        3,
        3,
        &[c64(-s, 0.0), c64(0.0, s), ZERO, ZERO, ZERO, ONE, c64(s, 0.0), c64(0.0, s), ZERO],
    )
}

pub fn majumdar_ghosh_tensor() -> MpsTensor {
    let y = y3();
    let mats = (0..2)
        .map(|i| {
            let mut m = CMat::zeros(3, 3);
            m[(i, 2)] = ONE;
            m[(2, i)] = ONE;
            m * &y
        })
        .collect();
    MpsTensor::new(mats).expect("mg")
}

pub fn w_state() -> UniformMps {
    let t = MpsTensor::new(vec![linalg::identity(2), linalg::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])]).expect("w");
    let l = CVec::from_vec(vec![ONE, ZERO]);
    let r = CVec::from_vec(vec![ZERO, ONE]);
    UniformMps::open(t, l, r).expect("w")
}

/// CZX MPU: O^{0,1} = |0)(0|+(1|, O^{1,0} = |1)(0|−(1|.
pub fn czx_mpu() -> MpoTensor {
    MpoTensor::from_fn(2, 2, 2, 2, |o, i, a, b| {
        if o == i || a != o {
            return ZERO;
        }
        if o == 1 && b == 1 {
            -ONE
        } else {
            ONE
        }
    })
    .expect("czx")
}

pub fn ghz2d_tensor(d: usize) -> PepsTensor {
    PepsTensor::from_fn(d, [d; 4], |p, v| if v.iter().all(|&a| a == p) { ONE } else { ZERO }).expect("ghz2d")
}

/// `|0⟩(00++| + |1⟩(11−−|` with normalised `(±|`.
pub fn cluster2d_tensor() -> PepsTensor {
    let s = FRAC_1_SQRT_2;
    PepsTensor::from_fn(2, [2; 4], |p, v| {
        if v[0] != p || v[1] != p {
            return ZERO;
        }
        let f = |x: usize| if p == 1 && x == 1 { -s } else { s };
        c64(f(v[2]) * f(v[3]), 0.0)
    })
    .expect("cluster2d")
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Π_sym (1⊗1⊗Y⊗Y)` with physical basis the Dicke states |S=2, m = 2 − k⟩,
/// `k` the number of flipped bond spins.
pub fn aklt2d_tensor() -> PepsTensor {
    let y = y_singlet();
    PepsTensor::from_fn(5, [2; 4], |k, v| {
        let mut acc = ZERO;
        for dp in 0..2 {
            for lp in 0..2 {
                let ones = v[0] + v[1] + dp + lp;
                if ones == k {
                    acc += y[(dp, v[2])] * y[(lp, v[3])] / binom(4, k).sqrt();
                }
            }
        }
        acc
    })
    .expect("aklt2d")
}

/// `P(1⊗1⊗Y⊗Y)` where P puts the physical spin on exactly one bond and the
/// vacancy state 2 on the others.
pub fn rvb_tensor() -> PepsTensor {
    let y = y3();
    PepsTensor::from_fn(2, [3; 4], |s, v| {
        let mut acc = ZERO;
        for dp in 0..3 {
            for lp in 0..3 {
                let legs = [v[0], v[1], dp, lp];
                let spins: Vec<usize> = legs.iter().copied().filter(|&x| x != 2).collect();
                if spins == [s] {
                    acc += y[(dp, v[2])] * y[(lp, v[3])];
                }
            }
        }
        acc
    })
    .expect("rvb")
}

/// `[Σ_i |i⟩(iiii|](1⊗1⊗M⊗M)`, `M_{ij} = e^{β σ_i σ_j / 2}` with σ = ±1 for
/// i = 0, 1 (ferromagnetic coupling J = 1).
pub fn ising_tensor(beta: f64) -> Result<PepsTensor> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let sigma = |i: usize| if i == 0 { 1.0 } else { -1.0 };
    let m = |i: usize, j: usize| (beta * sigma(i) * sigma(j) / 2.0).exp();
    PepsTensor::from_fn(2, [2; 4], |p, v| {
        if v[0] != p || v[1] != p {
            return ZERO;
        }
        c64(m(p, v[2]) * m(p, v[3]), 0.0)
    })
}

/// Quantum double tensor whose bonds carry the Gauss-law products of the
/// four physical edges: with edges (e1, e2, e3, e4) clockwise from the
/// top-right side, the legs carry t = e4⁻¹e1, r = e1⁻¹e2, d = e2⁻¹e3,
/// l = e3⁻¹e4, which multiply to the identity.
pub fn toric_primal_tensor(g: &FiniteGroup) -> Result<PepsTensor> {
    let n = g.order();
    PepsTensor::from_fn(n.pow(4), [n; 4], |p, v| {
        let e = [p / (n * n * n), (p / (n * n)) % n, (p / n) % n, p % n];
        let want = [g.mul(g.inv(e[3]), e[0]), g.mul(g.inv(e[0]), e[1]), g.mul(g.inv(e[1]), e[2]), g.mul(g.inv(e[2]), e[3])];
        if want == v {
            ONE
        } else {
            ZERO
        }
    })
}

/// Qubit toric code on a checkerboard: plaquette (x, y) spans sites
/// (x..x+1, y..y+1) and is flippable when x + y is even. Each bond carries
/// the flip variable of the flippable plaquette it borders, and a qubit is
/// the parity of its two flippable plaquettes.
pub fn toric_qubit_patch(lx: usize, ly: usize) -> Result<PepsPatch> {
    if lx % 2 != 0 || ly % 2 != 0 {
        return Err(invalid("the checkerboard toric code needs even lx and ly"));
    }
    // Even sites pair (t, l) and (r, d); odd sites pair (t, r) and (d, l).
    let even = PepsTensor::from_fn(2, [2; 4], |s, v| if v[1] == v[2] && v[0] == v[3] && s == v[1] ^ v[0] { ONE } else { ZERO })?;
    let odd = PepsTensor::from_fn(2, [2; 4], |s, v| if v[0] == v[1] && v[2] == v[3] && s == v[0] ^ v[2] { ONE } else { ZERO })?;
    let mut ts = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            ts.push(if (x + y) % 2 == 0 { even.clone() } else { odd.clone() });
        }
    }
    PepsPatch::new(lx, ly, PepsBoundary::Torus, ts)
}

/// CZX state tensor: physical qubits (i, j, k, l) clockwise from the
/// top-left corner; bonds carry corner pairs so that the four corners of
/// every plaquette are tied together: t = (j, i), r = (j, k), d = (k, l),
/// l = (i, l), each pair flattened as 2a + b.
pub fn czx_state_tensor() -> PepsTensor {
    PepsTensor::from_fn(16, [4; 4], |p, v| {
        let (i, j, k, l) = (p >> 3, (p >> 2) & 1, (p >> 1) & 1, p & 1);
        let want = [2 * j + i, 2 * j + k, 2 * k + l, 2 * i + l];
        if want == v {
            ONE
        } else {
            ZERO
        }
    })
    .expect("czx state")
}

pub fn product_peps_tensor() -> PepsTensor {
    PepsTensor::from_fn(2, [1; 4], |p, _| if p == 0 { ONE } else { ZERO }).expect("product")
}

fn group_param(p: &Params) -> Result<FiniteGroup> {
    match p.text("group", "z2") {
        "z2" => Ok(FiniteGroup::cyclic(2)),
        "z3" => Ok(FiniteGroup::cyclic(3)),
        other => Err(invalid(format!("group must be z2 or z3, got {other:?}"))),
    }
}

fn torus(p: &Params, t: &PepsTensor, lx_default: usize) -> Result<PepsPatch> {
    torus_xy(p, t, lx_default, lx_default)
}

fn torus_xy(p: &Params, t: &PepsTensor, lx_default: usize, ly_default: usize) -> Result<PepsPatch> {
    let lx = p.usize("lx", lx_default)?;
    let ly = p.usize("ly", ly_default)?;
    PepsPatch::uniform(lx, ly, PepsBoundary::Torus, t)
}

fn spectrum(v: &[f64]) -> Expected {
    Expected::TransferSpectrum(v.iter().map(|&x| c64(x, 0.0)).collect())
}

/// Build a catalogue entry.
pub fn make(name: &str, params: &Params) -> Result<CorpusEntry> {
    use Expected::*;
    use Origin::*;
    let (_, kind, allowed, _) =
        CATALOG.iter().find(|c| c.0 == name).ok_or_else(|| invalid(format!("unknown corpus entry {name:?}")))?;
    params.only(allowed)?;
    let third = -1.0 / 3.0;
    let (object, expected) = match name {
        "ghz" => {
            let d = params.usize("d", 2)?;
            if d < 2 {
                return Err(invalid("ghz needs d >= 2"));
            }
            (
                CorpusObject::Mps(UniformMps::periodic(ghz_tensor(d))?),
                vec![
                    exp(Normal(false), Definition, "direct sum of d product states"),
                    exp(CanonicalBlocks { blocking_p: 1, blocks: d }, Published, "GHZ tensor A^i = |i)(i|"),
                ],
            )
        }
        "w" => (CorpusObject::Mps(w_state()), vec![exp(PeriodicRefused, Published, "bond dimension must grow with N")]),
        "cluster1d" => (
            CorpusObject::Mps(UniformMps::periodic(cluster1d_tensor())?),
            vec![
                exp(Normal(true), Derived, "rank-one transfer fixed space"),
                exp(InjectivityLength(2), Derived, "two-site span is full"),
                exp(spectrum(&[1.0, 0.0, 0.0, 0.0]), Derived, "closed-form transfer matrix"),
            ],
        ),
        "aklt1d" => {
            let t = match params.text("basis", "pauli") {
                "pauli" => aklt_pauli(),
                "sz" => aklt_sz(),
                other => return Err(invalid(format!("basis must be pauli or sz, got {other:?}"))),
            };
            (
                CorpusObject::Mps(UniformMps::periodic(t)?),
                vec![
                    exp(Normal(true), Published, "AKLT tensor is injective"),
                    exp(InjectivityLength(2), Published, "AKLT injectivity length"),
                    exp(spectrum(&[1.0, third, third, third]), Derived, "Pauli transfer matrix"),
                ],
            )
        }
        "majumdar_ghosh" => (
            CorpusObject::Mps(UniformMps::periodic(majumdar_ghosh_tensor())?),
            vec![
                exp(Normal(false), Derived, "two dimer coverings"),
                exp(CanonicalBlocks { blocking_p: 2, blocks: 2 }, Derived, "period two, one block per dimerization"),
            ],
        ),
        "product" => {
            let d = params.usize("d", 2)?;
            if d == 0 {
                return Err(invalid("product needs d >= 1"));
            }
            let t = MpsTensor::from_fn(d, 1, 1, |i, _, _| if i == 0 { ONE } else { ZERO })?;
            (CorpusObject::Mps(UniformMps::periodic(t)?), vec![exp(Normal(true), Definition, "D = 1")])
        }
        "identity_mpo" => {
            let d = params.usize("d", 2)?;
            if d == 0 {
                return Err(invalid("identity_mpo needs d >= 1"));
            }
            (
                CorpusObject::Mpo(MpoTensor::identity(d)),
                vec![exp(Unitary(true), Definition, "identity"), exp(MpuIndex(0.0), Published, "trivial index")],
            )
        }
        "shift" => {
            let d = params.usize("d", 2)?;
            if d < 2 {
                return Err(invalid("shift needs d >= 2"));
            }
            let (o, sign) = match params.text("direction", "left") {
                "left" => (mpo::left_shift(d), 1.0),
                "right" => (mpo::right_shift(d), -1.0),
                other => return Err(invalid(format!("direction must be left or right, got {other:?}"))),
            };
            (
                CorpusObject::Mpo(o),
                vec![exp(Unitary(true), Definition, "translation"), exp(MpuIndex(sign * (d as f64).log2()), Published, "shift index log d")],
            )
        }
        "czx_mpu" => (
            CorpusObject::Mpo(czx_mpu()),
            vec![
                exp(Unitary(true), Published, "CZ gates followed by X"),
                exp(MpuIndex(0.0), Derived, "finite-depth circuit"),
                exp(SquareProportionalToIdentity(-ONE), Published, "square reduces to (-1)^N times identity"),
            ],
        ),
        "ghz2d" => {
            let d = params.usize("d", 2)?;
            if d < 2 {
                return Err(invalid("ghz2d needs d >= 2"));
            }
            (
                CorpusObject::Peps(torus(params, &ghz2d_tensor(d), 2)?),
                vec![exp(NormPositive, Definition, "d basis states"), exp(NonzeroAmplitudes(d), Published, "GHZ with D = d")],
            )
        }
        "cluster2d" => (
            CorpusObject::Peps(torus(params, &cluster2d_tensor(), 2)?),
            vec![exp(NormPositive, Definition, "graph state"), exp(SiteMapRank(2), Derived, "one physical qubit")],
        ),
        "aklt2d" => (
            CorpusObject::Peps(torus(params, &aklt2d_tensor(), 2)?),
            vec![exp(NormPositive, Derived, "valence-bond state"), exp(SiteMapRank(5), Derived, "symmetric subspace of four spins")],
        ),
        "rvb" => (
            CorpusObject::Peps(torus_xy(params, &rvb_tensor(), 4, 2)?),
            vec![exp(NormPositive, Derived, "on a 2x2 torus the two windings of each dimer cancel, so the default is 4x2"), exp(SiteMapRank(2), Derived, "one physical spin")],
        ),
        "ising_peps" => {
            let beta = params.f64("beta", 0.4406)?;
            (CorpusObject::Peps(torus(params, &ising_tensor(beta)?, 2)?), vec![exp(NormPositive, Derived, "partition function")])
        }
        "toric_code_dual" => {
            let g = group_param(params)?;
            let n = g.order();
            (
                CorpusObject::Peps(torus(params, &peps::g_isometric_tensor(&g)?, 2)?),
                vec![
                    exp(NormPositive, Derived, "flat connections"),
                    exp(SiteMapRank(n * n * n), Derived, "G-invariant bond subspace"),
                ],
            )
        }
        "toric_code_primal" => {
            let g = group_param(params)?;
            let n = g.order();
            (
                CorpusObject::Peps(torus(params, &toric_primal_tensor(&g)?, 2)?),
                vec![exp(NormPositive, Derived, "Gauss-law configurations"), exp(SiteMapRank(n * n * n), Derived, "bonds fuse to the identity")],
            )
        }
        "toric_code_qubit" => {
            let lx = params.usize("lx", 2)?;
            let ly = params.usize("ly", 2)?;
            (
                CorpusObject::Peps(toric_qubit_patch(lx, ly)?),
                vec![exp(NormPositive, Derived, "plaquette flips"), exp(SiteMapRank(2), Derived, "one physical qubit")],
            )
        }
        "czx_state" => (
            CorpusObject::Peps(torus(params, &czx_state_tensor(), 2)?),
            vec![exp(NormPositive, Definition, "plaquette GHZ states"), exp(SiteMapRank(16), Derived, "isometric site map")],
        ),
        "product_peps" => {
            let lx = params.usize("lx", 2)?;
            let ly = params.usize("ly", 2)?;
            (
                CorpusObject::Peps(PepsPatch::uniform(lx, ly, PepsBoundary::Open, &product_peps_tensor())?),
                vec![exp(NormPositive, Definition, "product"), exp(SiteMapRank(1), Definition, "D = 1")],
            )
        }
        _ => unreachable!("catalogue and constructors agree"),
    };
    Ok(CorpusEntry { name: name.to_string(), kind: *kind, params: params.clone(), object, expected })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheckResult {
    pub property: String,
    pub origin: Origin,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EntryReport {
    pub name: String,
    pub checks: Vec<CheckResult>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorpusReport {
    pub entries: Vec<EntryReport>,
    pub all_passed: bool,
}

fn spectra_match(got: &[C64], want: &[C64], tol: f64) -> bool {
    if got.len() != want.len() {
        return false;
    }
    let mut used = vec![false; got.len()];
    want.iter().all(|w| match (0..got.len()).find(|&j| !used[j] && (got[j] - w).norm() <= tol) {
        Some(j) => {
            used[j] = true;
            true
        }
        None => false,
    })
}

fn check(entry: &CorpusEntry, e: &Expected) -> Result<(bool, String)> {
    Ok(match e {
        Expected::Normal(want) => {
            let got = mps::normality(&entry.periodic_mps()?.tensor)?.normal;
            (got == *want, format!("normal = {got}"))
        }
        Expected::InjectivityLength(want) => {
            let got = structure::injectivity_length(&entry.periodic_mps()?)?;
            (got == *want, format!("L0 = {got}"))
        }
        Expected::TransferSpectrum(want) => {
            let t = mps::transfer_operator(&entry.periodic_mps()?, true)?;
            (spectra_match(&t.spectrum, want, 1e-10), format!("spectrum = {:?}", t.spectrum))
        }
        Expected::CanonicalBlocks { blocking_p, blocks } => {
            let cf = structure::canonical_form(&entry.periodic_mps()?)?;
            (cf.blocking_p == *blocking_p && cf.blocks.len() == *blocks, format!("p = {}, blocks = {}", cf.blocking_p, cf.blocks.len()))
        }
        Expected::PeriodicRefused => match entry.periodic_mps() {
            Err(err) => (true, err.to_string()),
            Ok(_) => (false, "periodic conversion succeeded".into()),
        },
        Expected::Unitary(want) => {
            let got = mpo::is_unitary_mpu(entry.mpo()?)?.unitary;
            (got == *want, format!("unitary = {got}"))
        }
        Expected::MpuIndex(want) => {
            let got = mpo::mpu_index(entry.mpo()?)?.index.unwrap_or(f64::NAN);
            ((got - want).abs() < 1e-9, format!("index = {got}"))
        }
        Expected::SquareProportionalToIdentity(lambda) => {
            let o = entry.mpo()?;
            let sq = mpo::mpo_compose(o, o)?;
            let id = MpoTensor::identity(o.d_in());
            let rel = structure::compare_states(&UniformMps::periodic(sq.as_mps().clone())?, &UniformMps::periodic(id.as_mps().clone())?)?;
            let ok = match (rel.verdict, rel.lambda) {
                (Verdict::Equal, _) => (ONE - lambda).norm() < 1e-9,
                (Verdict::Proportional, Some(l)) => (l - lambda).norm() < 1e-9,
                _ => false,
            };
            (ok, format!("verdict = {:?}, lambda = {:?}", rel.verdict, rel.lambda))
        }
        Expected::NormPositive => {
            let c = peps::peps_contract(entry.peps()?)?;
            (c.norm_sq > 0.0, format!("norm² = {:e}", c.norm_sq))
        }
        Expected::NonzeroAmplitudes(want) => {
            let c = peps::peps_contract(entry.peps()?)?;
            match c.amplitudes {
                Some(a) => {
                    let top = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    let got = a.iter().filter(|z| z.norm() > 1e-12 * top).count();
                    (got == *want, format!("{got} nonzero amplitudes"))
                }
                None => (false, "amplitude table exceeds the cap".into()),
            }
        }
        Expected::SiteMapRank(want) => {
            let t = entry.peps()?.site(0, 0);
            let m = t.dense().to_matrix(&["p"], &["t", "r", "d", "l"])?;
            let got = linalg::svd(&m)?.rank();
            (got == *want, format!("rank {got} of {}x{}", m.nrows(), m.ncols()))
        }
    })
}

pub fn validate_entry(entry: &CorpusEntry) -> EntryReport {
    let checks = entry
        .expected
        .iter()
        .map(|e| {
            let (passed, detail) = match check(entry, &e.property) {
                Ok(r) => r,
                Err(Error::Cap(m)) => (false, format!("cap: {m}")),
                Err(err) => (false, format!("error: {err}")),
            };
            CheckResult { property: format!("{:?}", e.property), origin: e.origin, passed, detail }
        })
        .collect();
    EntryReport { name: entry.name.clone(), checks }
}

/// Build every catalogue entry with default parameters and check its
/// expected properties.
pub fn validate_corpus() -> Result<CorpusReport> {
    let mut entries = Vec::new();
    for (name, ..) in CATALOG {
        let e = make(name, &Params::new())?;
        entries.push(validate_entry(&e));
    }
    let all_passed = entries.iter().all(|e| e.passed());
    Ok(CorpusReport { entries, all_passed })
}
