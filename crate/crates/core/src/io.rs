//! JSON interchange for tensors, groups and symmetries.
//!
//! Every object is a JSON document with a `kind` tag. Complex numbers are
//! `[re, im]` pairs and tensor entries are listed row-major in the axis
//! order of the owning module. Floats are written with the shortest
//! representation that parses back to the same bits, so a write/read cycle
//! is exact. FORMATS.md at the repository root has worked examples.

use crate::error::{cap, dim, invalid, Error, Result};
use crate::linalg::{c64, CMat, CVec, DenseTensor, C64};
use crate::mpo::MpoTensor;
use crate::mps::{Boundary, MpsTensor, UniformMps};
use crate::peps::{PepsBoundary, PepsPatch, PepsTensor};
use crate::symmetry::{FiniteGroup, OnSiteSymmetry};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Largest number of complex entries accepted in one tensor.
pub const MAX_ENTRIES: usize = 1 << 24;
/// Largest group order accepted from a table (validation is cubic).
pub const MAX_GROUP_ORDER: usize = 256;
/// Largest number of PEPS sites accepted.
pub const MAX_SITES: usize = 4096;

type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn entries(data: &[Pair]) -> Result<Vec<C64>> {
    data.iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(c64(re, im))
            } else {
                Err(invalid("non-finite entry"))
            }
        })
        .collect()
}

fn pairs(data: &[C64]) -> Result<Vec<Pair>> {
    if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(invalid("cannot serialise non-finite entries"));
    }
    Ok(data.iter().copied().map(pair).collect())
}

fn extent(dims: &[usize]) -> Result<usize> {
    if dims.iter().any(|&e| e == 0) {
        return Err(invalid(format!("dimensions must be >= 1, got {dims:?}")));
    }
    let mut n: usize = 1;
    for &e in dims {
        n = n.checked_mul(e).filter(|&n| n <= MAX_ENTRIES).ok_or_else(|| cap(format!("tensor {dims:?} exceeds {MAX_ENTRIES} entries")))?;
    }
    Ok(n)
}

fn check_len(dims: &[usize], data: &[Pair]) -> Result<()> {
    let n = extent(dims)?;
    if n != data.len() {
        return Err(dim(format!("dims {dims:?} need {n} entries, got {}", data.len())));
    }
    Ok(())
}

fn check_kind(found: &str, want: &str) -> Result<()> {
    if found == want {
        Ok(())
    } else {
        Err(Error::Parse(format!("expected kind \"{want}\", found \"{found}\"")))
    }
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn render<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDims {
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    dims: MatrixDims,
    data: Vec<Pair>,
}

impl MatrixJson {
    fn of(m: &CMat, tagged: bool) -> Result<Self> {
        Ok(MatrixJson {
            kind: tagged.then(|| "matrix".to_string()),
            dims: MatrixDims { rows: m.nrows(), cols: m.ncols() },
            data: pairs(&crate::linalg::vec_rm(m))?,
        })
    }

    fn build(&self) -> Result<CMat> {
        if let Some(k) = &self.kind {
            check_kind(k, "matrix")?;
        }
        check_len(&[self.dims.rows, self.dims.cols], &self.data)?;
        Ok(CMat::from_row_slice(self.dims.rows, self.dims.cols, &entries(&self.data)?))
    }
}

pub fn matrix_to_json(m: &CMat) -> Result<String> {
    Ok(render(&MatrixJson::of(m, true)?))
}

pub fn matrix_from_json(text: &str) -> Result<CMat> {
    parse::<MatrixJson>(text)?.build()
}

/// A matrix as a JSON value in the interchange layout, for reports.
pub fn matrix_value(m: &CMat) -> Value {
    serde_json::to_value(MatrixJson::of(m, false).unwrap_or(MatrixJson {
        kind: None,
        dims: MatrixDims { rows: m.nrows(), cols: m.ncols() },
        data: vec![],
    }))
    .expect("plain data")
}

pub fn complex_value(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn complex_list(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex_value(z)).collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpsDims {
    d: usize,
    dl: usize,
    dr: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum BoundaryJson {
    Periodic,
    Open { l: Vec<Pair>, r: Vec<Pair> },
}

fn periodic() -> BoundaryJson {
    BoundaryJson::Periodic
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpsJson {
    kind: String,
    dims: MpsDims,
    #[serde(default = "periodic")]
    boundary: BoundaryJson,
    data: Vec<Pair>,
}

/// Uniform MPS: axes (physical, left, right), boundary `"periodic"` or
/// `{"open": {"l": [...], "r": [...]}}`.
pub fn mps_to_json(m: &UniformMps) -> Result<String> {
    let t = &m.tensor;
    let boundary = match &m.boundary {
        Boundary::Periodic => BoundaryJson::Periodic,
        Boundary::Open { l, r } => BoundaryJson::Open { l: pairs(l.as_slice())?, r: pairs(r.as_slice())? },
    };
    Ok(render(&MpsJson {
        kind: "mps".into(),
        dims: MpsDims { d: t.d(), dl: t.dl(), dr: t.dr() },
        boundary,
        data: pairs(t.to_dense().data())?,
    }))
}

pub fn mps_from_json(text: &str) -> Result<UniformMps> {
    let j: MpsJson = parse(text)?;
    build_mps(&j)
}

fn build_mps(j: &MpsJson) -> Result<UniformMps> {
    check_kind(&j.kind, "mps")?;
    let MpsDims { d, dl, dr } = j.dims;
    check_len(&[d, dl, dr], &j.data)?;
    let dense = DenseTensor::new(vec!["p", "l", "r"], vec![d, dl, dr], entries(&j.data)?)?;
    let t = MpsTensor::from_dense(&dense)?;
    match &j.boundary {
        BoundaryJson::Periodic => UniformMps::periodic(t),
        BoundaryJson::Open { l, r } => {
            UniformMps::open(t, CVec::from_vec(entries(l)?), CVec::from_vec(entries(r)?))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpoDims {
    d_out: usize,
    d_in: usize,
    dl: usize,
    dr: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpoJson {
    kind: String,
    dims: MpoDims,
    data: Vec<Pair>,
}

/// MPO tensor: axes (out, in, left, right).
pub fn mpo_to_json(o: &MpoTensor) -> Result<String> {
    Ok(render(&MpoJson {
        kind: "mpo".into(),
        dims: MpoDims { d_out: o.d_out(), d_in: o.d_in(), dl: o.dl(), dr: o.dr() },
        data: pairs(o.to_dense().data())?,
    }))
}

pub fn mpo_from_json(text: &str) -> Result<MpoTensor> {
    build_mpo(&parse(text)?)
}

fn build_mpo(j: &MpoJson) -> Result<MpoTensor> {
    check_kind(&j.kind, "mpo")?;
    let MpoDims { d_out, d_in, dl, dr } = j.dims;
    check_len(&[d_out, d_in, dl, dr], &j.data)?;
    let dense = DenseTensor::new(vec!["out", "in", "left", "right"], vec![d_out, d_in, dl, dr], entries(&j.data)?)?;
    MpoTensor::from_dense(&dense)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PepsDims {
    d: usize,
    dt: usize,
    dr: usize,
    dd: usize,
    dl: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PepsTensorJson {
    dims: PepsDims,
    data: Vec<Pair>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDims {
    lx: usize,
    ly: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BoundaryName {
    Torus,
    Open,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PepsJson {
    kind: String,
    dims: GridDims,
    boundary: BoundaryName,
    tensors: Vec<PepsTensorJson>,
}

fn peps_tensor_json(t: &PepsTensor) -> Result<PepsTensorJson> {
    let [dt, dr, dd, dl] = t.dims();
    Ok(PepsTensorJson { dims: PepsDims { d: t.d(), dt, dr, dd, dl }, data: pairs(t.dense().data())? })
}

/// PEPS patch: site tensors with axes (physical, top, right, down, left),
/// listed row by row (index `y·lx + x`). A single tensor means a uniform
/// patch.
pub fn peps_to_json(p: &PepsPatch) -> Result<String> {
    let uniform = p.tensors().iter().all(|t| t == &p.tensors()[0]);
    let tensors = if uniform { vec![peps_tensor_json(&p.tensors()[0])?] } else { p.tensors().iter().map(peps_tensor_json).collect::<Result<_>>()? };
    Ok(render(&PepsJson {
        kind: "peps".into(),
        dims: GridDims { lx: p.lx(), ly: p.ly() },
        boundary: match p.boundary() {
            PepsBoundary::Torus => BoundaryName::Torus,
            PepsBoundary::Open => BoundaryName::Open,
        },
        tensors,
    }))
}

pub fn peps_from_json(text: &str) -> Result<PepsPatch> {
    build_peps(&parse(text)?)
}

fn build_peps(j: &PepsJson) -> Result<PepsPatch> {
    check_kind(&j.kind, "peps")?;
    let (lx, ly) = (j.dims.lx, j.dims.ly);
    let sites = lx.checked_mul(ly).filter(|&n| n <= MAX_SITES).ok_or_else(|| cap(format!("{lx}x{ly} patch exceeds {MAX_SITES} sites")))?;
    if j.tensors.len() != 1 && j.tensors.len() != sites {
        return Err(dim(format!("{} tensors for a {lx}x{ly} patch (give 1 or {sites})", j.tensors.len())));
    }
    let mut tensors = Vec::with_capacity(j.tensors.len());
    for t in &j.tensors {
        let PepsDims { d, dt, dr, dd, dl } = t.dims;
        let shape = vec![d, dt, dr, dd, dl];
        check_len(&shape, &t.data)?;
        tensors.push(PepsTensor::new(DenseTensor::new(vec!["p", "t", "r", "d", "l"], shape, entries(&t.data)?)?)?);
    }
    let boundary = match j.boundary {
        BoundaryName::Torus => PepsBoundary::Torus,
        BoundaryName::Open => PepsBoundary::Open,
    };
    if tensors.len() == 1 && sites > 1 {
        PepsPatch::uniform(lx, ly, boundary, &tensors[0])
    } else {
        PepsPatch::new(lx, ly, boundary, tensors)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    table: Vec<Vec<usize>>,
}

/// Finite group as a 0-based multiplication table, `table[g][h] = gh`.
pub fn group_to_json(g: &FiniteGroup) -> String {
    render(&GroupJson { kind: Some("group".into()), table: g.table().to_vec() })
}

pub fn group_from_json(text: &str) -> Result<FiniteGroup> {
    let j: GroupJson = parse(text)?;
    if let Some(k) = &j.kind {
        check_kind(k, "group")?;
    }
    build_group(j.table)
}

fn build_group(table: Vec<Vec<usize>>) -> Result<FiniteGroup> {
    if table.len() > MAX_GROUP_ORDER {
        return Err(cap(format!("group order {} exceeds {MAX_GROUP_ORDER}", table.len())));
    }
    FiniteGroup::from_table(table)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryJson {
    kind: String,
    group: GroupJson,
    unitaries: Vec<MatrixJson>,
}

/// On-site symmetry: a group table and one d×d unitary per element.
pub fn symmetry_to_json(s: &OnSiteSymmetry) -> Result<String> {
    Ok(render(&SymmetryJson {
        kind: "symmetry".into(),
        group: GroupJson { kind: None, table: s.group.table().to_vec() },
        unitaries: s.unitaries.iter().map(|u| MatrixJson::of(u, false)).collect::<Result<_>>()?,
    }))
}

pub fn symmetry_from_json(text: &str) -> Result<OnSiteSymmetry> {
    let j: SymmetryJson = parse(text)?;
    check_kind(&j.kind, "symmetry")?;
    if let Some(k) = &j.group.kind {
        check_kind(k, "group")?;
    }
    let group = build_group(j.group.table)?;
    let us = j.unitaries.iter().map(MatrixJson::build).collect::<Result<Vec<_>>>()?;
    if us.len() != group.order() {
        return Err(dim(format!("{} unitaries for a group of order {}", us.len(), group.order())));
    }
    OnSiteSymmetry::new(group, us)
}

/// Any document understood by this module.
#[derive(Debug, Clone)]
pub enum Document {
    Mps(UniformMps),
    Mpo(MpoTensor),
    Peps(PepsPatch),
    Group(FiniteGroup),
    Symmetry(OnSiteSymmetry),
    Matrix(CMat),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Mps(_) => "mps",
            Document::Mpo(_) => "mpo",
            Document::Peps(_) => "peps",
            Document::Group(_) => "group",
            Document::Symmetry(_) => "symmetry",
            Document::Matrix(_) => "matrix",
        }
    }
}

#[derive(Deserialize)]
struct KindOnly {
    kind: String,
}

/// Parse a document, dispatching on its `kind`.
pub fn read(text: &str) -> Result<Document> {
    let k: KindOnly = parse(text)?;
    Ok(match k.kind.as_str() {
        "mps" => Document::Mps(mps_from_json(text)?),
        "mpo" => Document::Mpo(mpo_from_json(text)?),
        "peps" => Document::Peps(peps_from_json(text)?),
        "group" => Document::Group(group_from_json(text)?),
        "symmetry" => Document::Symmetry(symmetry_from_json(text)?),
        "matrix" => Document::Matrix(matrix_from_json(text)?),
        other => return Err(Error::Parse(format!("unknown kind \"{other}\""))),
    })
}

pub fn write(doc: &Document) -> Result<String> {
    match doc {
        Document::Mps(m) => mps_to_json(m),
        Document::Mpo(o) => mpo_to_json(o),
        Document::Peps(p) => peps_to_json(p),
        Document::Group(g) => Ok(group_to_json(g)),
        Document::Symmetry(s) => symmetry_to_json(s),
        Document::Matrix(m) => matrix_to_json(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn mps_bytes() {
        let m = UniformMps::periodic(corpus::ghz_tensor(2)).unwrap();
        let s = mps_to_json(&m).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"mps","dims":{"d":2,"dl":2,"dr":2},"boundary":"periodic","data":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]}"#
        );
        assert_eq!(mps_from_json(&s).unwrap(), m);
    }

    #[test]
    fn open_boundary_and_default() {
        let text = r#"{"kind":"mps","dims":{"d":1,"dl":1,"dr":1},"data":[[0.5,-0.25]]}"#;
        let m = mps_from_json(text).unwrap();
        assert!(m.is_periodic());
        let o = UniformMps::open(m.tensor.clone(), CVec::from_vec(vec![c64(1.0, 0.0)]), CVec::from_vec(vec![c64(0.0, 2.0)])).unwrap();
        let s = mps_to_json(&o).unwrap();
        assert!(s.contains(r#""boundary":{"open":{"l":[[1.0,0.0]],"r":[[0.0,2.0]]}}"#), "{s}");
        assert_eq!(mps_from_json(&s).unwrap(), o);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "[]",
            r#"{"kind":"mps"}"#,
            r#"{"kind":"mpo","dims":{"d":1,"dl":1,"dr":1},"data":[[1,0]]}"#,
            r#"{"kind":"mps","dims":{"d":2,"dl":1,"dr":1},"data":[[1,0]]}"#,
            r#"{"kind":"mps","dims":{"d":0,"dl":1,"dr":1},"data":[]}"#,
            r#"{"kind":"mps","dims":{"d":1,"dl":1,"dr":2},"data":[[1,0],[0,0]]}"#,
            r#"{"kind":"mps","dims":{"d":1,"dl":1,"dr":1},"data":[[1,0]],"extra":1}"#,
            r#"{"kind":"mps","dims":{"d":4294967296,"dl":4294967296,"dr":4294967296},"data":[]}"#,
            r#"{"kind":"group","table":[[0,1],[1,1]]}"#,
            r#"{"kind":"peps","dims":{"lx":1,"ly":1},"boundary":"torus","tensors":[{"dims":{"d":1,"dt":1,"dr":1,"dd":1,"dl":1},"data":[[1,0]]}]}"#,
        ] {
            assert!(read(bad).is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn every_kind_round_trips() {
        let docs = vec![
            Document::Mpo(corpus::czx_mpu()),
            Document::Peps(crate::peps::quantum_double_patch(&FiniteGroup::cyclic(2), 2, 2).unwrap()),
            Document::Peps(corpus::toric_qubit_patch(2, 2).unwrap()),
            Document::Group(FiniteGroup::dihedral(3)),
            Document::Symmetry(OnSiteSymmetry::from_fn(FiniteGroup::cyclic(2), |g| if g == 0 { CMat::identity(2, 2) } else { crate::linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]) }).unwrap()),
            Document::Matrix(CMat::from_fn(2, 3, |i, j| c64(i as f64 / 3.0, -(j as f64).sqrt()))),
        ];
        for d in docs {
            let s = write(&d).unwrap();
            let back = read(&s).unwrap();
            assert_eq!(back.kind(), d.kind());
            assert_eq!(write(&back).unwrap(), s);
        }
    }
}
