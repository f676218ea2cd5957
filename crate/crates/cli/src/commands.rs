use serde_json::{json, Value};
use tnkit::corpus::{self, CorpusObject, Params};
use tnkit::hamiltonian::{self, ParentHamiltonian};
use tnkit::io::{self, complex_list, complex_value, matrix_value, Document};
use tnkit::mpo::{self, MpoTensor};
use tnkit::mps::{self, UniformMps};
use tnkit::peps::{self, PlacedOp, Region};
use tnkit::structure;
use tnkit::symmetry::{self, StringLength};
use tnkit::{tol, Error};

use crate::args::{ChainBoundary, Cmd, CorpusAction};
use crate::report::{usage, Failure, Outcome, Session};

type Res = Result<Outcome, Failure>;

pub fn name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Canonical(_) => "canonical",
        Cmd::Compare { .. } => "compare",
        Cmd::Normal(_) => "normal",
        Cmd::Injectivity(_) => "injectivity",
        Cmd::Transfer { .. } => "transfer",
        Cmd::Entspec { .. } => "entspec",
        Cmd::Corrlen(_) => "corrlen",
        Cmd::Symmetry { .. } => "symmetry",
        Cmd::Spt { .. } => "spt",
        Cmd::TrIndex { .. } => "tr-index",
        Cmd::StringOrder { .. } => "string-order",
        Cmd::SptBuild { .. } => "spt-build",
        Cmd::Rgfp(_) => "rgfp",
        Cmd::ParentHam { .. } => "parent-ham",
        Cmd::GroundSpace { .. } => "ground-space",
        Cmd::GapMartingale { .. } => "gap-martingale",
        Cmd::GapKnabe { .. } => "gap-knabe",
        Cmd::MpoApply { .. } => "mpo-apply",
        Cmd::MpuCheck(_) => "mpu-check",
        Cmd::MpuIndex(_) => "mpu-index",
        Cmd::MpoReduce { .. } => "mpo-reduce",
        Cmd::PepsNorm { .. } => "peps-norm",
        Cmd::PepsExpect { .. } => "peps-expect",
        Cmd::PepsBoundary { .. } => "peps-boundary",
        Cmd::Sectors { .. } => "sectors",
        Cmd::Tee { .. } => "tee",
        Cmd::Corpus { .. } => "corpus",
    }
}

pub fn dispatch(cmd: &Cmd, s: &mut Session) -> Res {
    match cmd {
        Cmd::Canonical(i) => canonical(s, &i.input),
        Cmd::Compare { a, b } => compare(s, a, b),
        Cmd::Normal(i) => normal(s, &i.input),
        Cmd::Injectivity(i) => injectivity(s, &i.input),
        Cmd::Transfer { input, raw, matrix } => transfer(s, &input.input, *raw, *matrix),
        Cmd::Entspec { input, alpha } => entspec(s, &input.input, alpha),
        Cmd::Corrlen(i) => corrlen(s, &i.input),
        Cmd::Symmetry { input, sym } => symmetry_action(s, &input.input, sym),
        Cmd::Spt { input, sym } => spt(s, &input.input, sym),
        Cmd::TrIndex { input, u } => tr_index(s, &input.input, u),
        Cmd::StringOrder { input, sym, g, r, length } => string_order(s, &input.input, sym, *g, r, length),
        Cmd::SptBuild { group, omega, phi } => spt_build(s, group, omega.as_deref(), phi.as_deref()),
        Cmd::Rgfp(i) => rgfp(s, &i.input),
        Cmd::ParentHam { input, l, matrix } => parent_ham(s, &input.input, *l, *matrix),
        Cmd::GroundSpace { input, l, n, boundary } => ground_space(s, &input.input, *l, *n, *boundary),
        Cmd::GapMartingale { input, l, blocking } => gap_martingale(s, &input.input, *l, *blocking),
        Cmd::GapKnabe { input, l, n } => gap_knabe(s, &input.input, *l, *n),
        Cmd::MpoApply { mpo, input } => mpo_apply(s, mpo, &input.input),
        Cmd::MpuCheck(i) => mpu_check(s, &i.input),
        Cmd::MpuIndex(i) => mpu_index(s, &i.input),
        Cmd::MpoReduce { input, square, compose_with } => mpo_reduce(s, &input.input, *square, compose_with.as_deref()),
        Cmd::PepsNorm { input, amplitudes } => peps_norm(s, &input.input, *amplitudes),
        Cmd::PepsExpect { input, ops } => peps_expect(s, &input.input, ops),
        Cmd::PepsBoundary { input, region, matrix } => peps_boundary(s, &input.input, region, *matrix),
        Cmd::Sectors { group, lx, ly, labels_only } => sectors(s, group, *lx, *ly, *labels_only),
        Cmd::Tee { group, input, lx, ly, region } => tee(s, group, input.as_deref(), *lx, *ly, region),
        Cmd::Corpus { action } => corpus_cmd(s, action),
    }
}

/// Numbers that JSON cannot carry become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn parse_f64(s: &str) -> Result<f64, Failure> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| usage(format!("{t:?} is not a number"))),
    }
}

fn doc_value(d: &Document) -> Result<Value, Failure> {
    Ok(serde_json::from_str(&io::write(d)?)?)
}

fn mps_value(m: &UniformMps) -> Result<Value, Failure> {
    doc_value(&Document::Mps(m.clone()))
}

fn parse_region(s: &str) -> Result<Region, Failure> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("region {s:?} is not x0,y0,x1,y1")))?;
    match v[..] {
        [x0, y0, x1, y1] => Ok(Region::new(x0, y0, x1, y1)),
        _ => Err(usage(format!("region {s:?} is not x0,y0,x1,y1"))),
    }
}

fn canonical(s: &mut Session, path: &str) -> Res {
    let m = s.mps("in", path)?;
    let cf = structure::canonical_form(&m)?;
    let mut blocks = Vec::new();
    for b in &cf.blocks {
        blocks.push(json!({
            "weight": b.weight,
            "bond": b.tensor.bond(),
            "offset": b.offset,
            "tensor": mps_value(&UniformMps::periodic(b.tensor.clone())?)?,
        }));
    }
    Ok(Outcome::new(
        json!({
            "blocking_p": cf.blocking_p,
            "blocks": blocks,
            "gauge": matrix_value(&cf.gauge),
            "offdiag": cf.offdiag,
            "rank_margin": num(cf.rank_margin),
        }),
        json!({ "blocks": cf.blocks.len(), "blocking_p": cf.blocking_p }),
    ))
}

fn compare(s: &mut Session, a: &str, b: &str) -> Res {
    let ma = s.mps("a", a)?;
    let mb = s.mps("b", b)?;
    let rel = structure::compare_states(&ma, &mb)?;
    let verdict = serde_json::to_value(rel.verdict)?;
    Ok(Outcome::new(
        json!({
            "verdict": verdict,
            "gauge": rel.x.as_ref().map(matrix_value),
            "phase": rel.phase,
            "lambda": rel.lambda.map(complex_value),
            "blocking_p": rel.blocking_p,
            "margin": num(rel.margin),
            "warnings": rel.warnings,
        }),
        json!({ "relation": verdict }),
    ))
}

fn normal(s: &mut Session, path: &str) -> Res {
    let m = s.mps("in", path)?;
    let r = structure::is_normal(&m)?;
    Ok(Outcome::new(serde_json::to_value(&r)?, json!({ "normal": r.normal })))
}

fn injectivity(s: &mut Session, path: &str) -> Res {
    let m = s.mps("in", path)?;
    let l0 = structure::injectivity_length(&m)?;
    let bound = structure::injectivity_bound(m.bond());
    Ok(Outcome::new(
        json!({ "injectivity_length": l0, "bond": m.bond(), "bound": bound }),
        json!({ "within_bound": l0 <= bound }),
    ))
}

fn transfer(s: &mut Session, path: &str, raw: bool, with_matrix: bool) -> Res {
    let m = s.mps("in", path)?;
    let to = mps::transfer_operator(&m, !raw)?;
    let mut r = json!({
        "eigenvalues": complex_list(&to.spectrum),
        "lambda1": complex_value(to.lambda1),
        "peripheral": complex_list(&to.peripheral),
        "normalized": to.normalized,
        "rho_l": matrix_value(&to.rho_l),
        "rho_r": matrix_value(&to.rho_r),
    });
    if with_matrix {
        r["matrix"] = matrix_value(&to.matrix);
    }
    Ok(Outcome::new(r, json!({ "peripheral_count": to.peripheral.len() })))
}

fn xi_value(xi: Option<f64>) -> Value {
    xi.map(num).unwrap_or(json!("inf"))
}

fn entspec(s: &mut Session, path: &str, alpha: &str) -> Res {
    let alphas = alpha.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if alphas.iter().any(|&a| a <= 0.0) {
        return Err(usage("Rényi orders must be positive"));
    }
    let m = s.mps("in", path)?;
    let e = mps::entanglement_spectrum_with(&m, &alphas)?;
    let renyi: Vec<Value> = e.renyi.iter().map(|&(a, v)| json!({ "alpha": num(a), "entropy": num(v) })).collect();
    Ok(Outcome::new(
        json!({
            "schmidt_squares": e.schmidt_squares,
            "renyi": renyi,
            "correlation_length": xi_value(e.correlation_length),
        }),
        json!({ "schmidt_rank": e.schmidt_squares.iter().filter(|&&p| p > tol::rank()).count() }),
    ))
}

fn corrlen(s: &mut Session, path: &str) -> Res {
    let m = s.mps("in", path)?;
    let e = mps::correlation_length(&m)?;
    Ok(Outcome::new(
        json!({ "correlation_length": xi_value(e.correlation_length) }),
        json!({ "finite": e.correlation_length.is_some() }),
    ))
}

fn projective(s: &mut Session, path: &str, sym: &str) -> Result<symmetry::ProjectiveData, Failure> {
    let m = s.mps("in", path)?;
    let u = s.symmetry("sym", sym)?;
    Ok(symmetry::detect_symmetry_action(&m, &u)?)
}

fn symmetry_action(s: &mut Session, path: &str, sym: &str) -> Res {
    let pd = projective(s, path, sym)?;
    let x: Vec<Value> = pd.x.iter().map(matrix_value).collect();
    Ok(Outcome::new(
        json!({
            "x": x,
            "phi": pd.phi,
            "omega": pd.omega,
            "injectivity_length": pd.injectivity_length,
            "margin": num(pd.margin),
        }),
        json!({ "symmetric": true }),
    ))
}

fn spt(s: &mut Session, path: &str, sym: &str) -> Res {
    let pd = projective(s, path, sym)?;
    let class = symmetry::cocycle_class(&pd)?;
    let trivial = class.trivial;
    let mut r = serde_json::to_value(&class)?;
    r["phi"] = json!(pd.phi);
    r["omega"] = json!(pd.omega);
    Ok(Outcome::new(r, json!({ "trivial": trivial })))
}

fn tr_index(s: &mut Session, path: &str, u: &str) -> Res {
    let m = s.mps("in", path)?;
    let u = s.matrix("u", u)?;
    let idx = symmetry::time_reversal_index(&m, &u)?;
    Ok(Outcome::new(json!({ "index": idx }), json!({ "index": idx })))
}

fn string_order(s: &mut Session, path: &str, sym: &str, g: usize, r: &str, length: &str) -> Res {
    let m = s.mps("in", path)?;
    let u = s.symmetry("sym", sym)?;
    let rop = s.matrix("r", r)?;
    let len = match length.trim() {
        "inf" | "infinity" => StringLength::Infinite,
        t => StringLength::Finite(t.parse().map_err(|_| usage(format!("--length {t:?} is neither an integer nor inf")))?),
    };
    let v = symmetry::string_order(&m, &u, g, &rop, len)?;
    Ok(Outcome::new(
        json!({ "value": complex_value(v), "g": g, "length": length.trim() }),
        json!({ "vanishes": v.norm() <= tol::rank() }),
    ))
}

fn real_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>, Failure> {
    serde_json::from_value(v.clone()).map_err(|e| Failure::Core(Error::Parse(format!("{what}: {e}"))))
}

fn spt_build(s: &mut Session, group: &str, omega: Option<&str>, phi: Option<&str>) -> Res {
    let g = s.group(group)?;
    let n = g.order();
    let omega = match omega {
        Some(p) => {
            let v = s.json("omega", p)?;
            real_rows(&v, "omega")?
        }
        None => vec![vec![0.0; n]; n],
    };
    let phi: Vec<f64> = match phi {
        Some(p) => {
            let v = s.json("phi", p)?;
            serde_json::from_value(v).map_err(|e| Failure::Core(Error::Parse(format!("phi: {e}"))))?
        }
        None => vec![0.0; n],
    };
    let (state, sym) = symmetry::build_spt_fixed_point(&g, &omega, &phi)?;
    let (_, wanted) = symmetry::cocycle_label(&g, &omega)?;
    let pd = symmetry::detect_symmetry_action(&state, &sym)?;
    let class = symmetry::cocycle_class(&pd)?;
    let rg = symmetry::rgfp_check(&state)?;
    Ok(Outcome::new(
        json!({
            "state": mps_value(&state)?,
            "symmetry": doc_value(&Document::Symmetry(sym))?,
            "requested_label": wanted,
            "class": serde_json::to_value(&class)?,
            "rgfp": serde_json::to_value(&rg)?,
        }),
        json!({ "class_recovered": class.label == wanted, "fixed_point": rg.fixed_point }),
    ))
}

fn rgfp(s: &mut Session, path: &str) -> Res {
    let m = s.mps("in", path)?;
    let r = symmetry::rgfp_check(&m)?;
    Ok(Outcome::new(serde_json::to_value(&r)?, json!({ "fixed_point": r.fixed_point })))
}

fn parent(s: &mut Session, path: &str, l: usize) -> Result<(UniformMps, ParentHamiltonian), Failure> {
    let m = s.mps("in", path)?;
    let h = hamiltonian::parent_hamiltonian(&m, l)?;
    Ok((m, h))
}

fn parent_ham(s: &mut Session, path: &str, l: usize, with_matrix: bool) -> Res {
    let (_, h) = parent(s, path, l)?;
    let mut r = json!({
        "l": h.l,
        "d": h.d,
        "local_rank": h.local_rank,
        "source": h.source,
        "warnings": h.warnings,
    });
    if with_matrix {
        r["h"] = matrix_value(&h.h);
    }
    Ok(Outcome::new(r, json!({ "trivial": h.is_zero() })))
}

fn ground_space(s: &mut Session, path: &str, l: usize, n: usize, boundary: ChainBoundary) -> Res {
    let (m, h) = parent(s, path, l)?;
    let periodic = boundary == ChainBoundary::Periodic;
    let gs = hamiltonian::ground_space(&h, n, periodic)?;
    let psi = mps::dense_state(&m, n)?;
    let overlap = gs.overlap(&psi);
    let ff = if m.is_periodic() { Some(hamiltonian::frustration_free_residual(&h, &m, n)?) } else { None };
    Ok(Outcome::new(
        json!({
            "n": n,
            "boundary": if periodic { "periodic" } else { "open" },
            "dimension": gs.dimension,
            "energies": gs.energies,
            "gap": gs.gap(),
            "method": gs.method,
            "residual": gs.residual,
            "mps_overlap": overlap,
            "frustration_free_residual": ff,
        }),
        json!({ "dimension": gs.dimension, "mps_in_ground_space": overlap >= 1.0 - tol::eq() }),
    ))
}

fn gap_martingale(s: &mut Session, path: &str, l: usize, blocking: usize) -> Res {
    let (_, h) = parent(s, path, l)?;
    let c = hamiltonian::martingale_certificate(&h, blocking)?;
    Ok(Outcome::new(serde_json::to_value(&c)?, json!({ "gapped": c.verdict })))
}

fn gap_knabe(s: &mut Session, path: &str, l: usize, n: usize) -> Res {
    let (_, h) = parent(s, path, l)?;
    let c = hamiltonian::knabe_certificate(&h, n)?;
    Ok(Outcome::new(serde_json::to_value(&c)?, json!({ "gapped": c.verdict })))
}

fn mpo_apply(s: &mut Session, op: &str, path: &str) -> Res {
    let o = s.mpo("mpo", op)?;
    let m = s.mps("in", path)?;
    let out = mpo::mpo_apply(&o, &m)?;
    Ok(Outcome::new(json!({ "state": mps_value(&out)?, "bond": out.bond() }), json!({})))
}

fn mpu_check(s: &mut Session, path: &str) -> Res {
    let o = s.mpo("in", path)?;
    let r = mpo::is_unitary_mpu(&o)?;
    Ok(Outcome::new(serde_json::to_value(&r)?, json!({ "unitary": r.unitary })))
}

fn mpu_index(s: &mut Session, path: &str) -> Res {
    let o = s.mpo("in", path)?;
    let r = mpo::mpu_index(&o)?;
    Ok(Outcome::new(serde_json::to_value(&r)?, json!({ "unitary": r.unitary, "index": r.index })))
}

/// c when every site matrix is c·δ(out, in) with bond dimension one.
fn identity_multiple(o: &MpoTensor) -> Option<tnkit::C64> {
    if o.bond() != 1 || o.d_out() != o.d_in() {
        return None;
    }
    let c = o.mat(0, 0)[(0, 0)];
    let scale = c.norm().max(1.0);
    for out in 0..o.d_out() {
        for inp in 0..o.d_in() {
            let want = if out == inp { c } else { tnkit::C64::new(0.0, 0.0) };
            if (o.mat(out, inp)[(0, 0)] - want).norm() > tol::eq() * scale {
                return None;
            }
        }
    }
    (c.norm() > tol::eq()).then_some(c)
}

fn mpo_reduce(s: &mut Session, path: &str, square: bool, with: Option<&str>) -> Res {
    let o = s.mpo("in", path)?;
    let target = match (square, with) {
        (true, _) => mpo::mpo_compose(&o, &o)?,
        (false, Some(p)) => {
            let q = s.mpo("compose_with", p)?;
            mpo::mpo_compose(&o, &q)?
        }
        (false, None) => o,
    };
    let red = mpo::mpo_reduce(&target)?;
    let c = identity_multiple(&red.tensor);
    Ok(Outcome::new(
        json!({
            "blocking_p": red.blocking_p,
            "weights": red.weights,
            "block_dims": red.block_dims,
            "tensor": doc_value(&Document::Mpo(red.tensor.clone()))?,
            "identity_multiple": c.map(complex_value),
        }),
        json!({ "proportional_to_identity": c.is_some() }),
    ))
}

fn peps_norm(s: &mut Session, path: &str, amplitudes: bool) -> Res {
    let p = s.peps("in", path)?;
    let c = peps::peps_contract(&p)?;
    let nonzero = c.amplitudes.as_ref().map(|a| a.iter().filter(|z| z.norm() > tol::eq()).count());
    let mut r = json!({ "norm_sq": c.norm_sq, "nonzero_amplitudes": nonzero });
    if amplitudes {
        r["amplitudes"] = c.amplitudes.as_ref().map(|a| complex_list(a.as_slice())).unwrap_or(Value::Null);
    }
    Ok(Outcome::new(r, json!({ "nonzero_norm": c.norm_sq > tol::eq() })))
}

fn peps_expect(s: &mut Session, path: &str, specs: &[String]) -> Res {
    let p = s.peps("in", path)?;
    let mut ops = Vec::new();
    let mut placed = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let mut it = spec.splitn(3, ',');
        let (Some(x), Some(y), Some(file)) = (it.next(), it.next(), it.next()) else {
            return Err(usage(format!("--op {spec:?} is not x,y,PATH")));
        };
        let x: usize = x.trim().parse().map_err(|_| usage(format!("--op {spec:?}: bad x")))?;
        let y: usize = y.trim().parse().map_err(|_| usage(format!("--op {spec:?}: bad y")))?;
        let m = s.matrix(&format!("op{k}"), file)?;
        placed.push(json!({ "x": x, "y": y }));
        ops.push(PlacedOp::new(x, y, m));
    }
    let v = peps::peps_expectation(&p, &ops)?;
    Ok(Outcome::new(json!({ "value": complex_value(v), "sites": placed }), json!({})))
}

fn peps_boundary(s: &mut Session, path: &str, region: &str, with_matrix: bool) -> Res {
    let p = s.peps("in", path)?;
    let r = parse_region(region)?;
    let b = peps::region_boundary_state(&p, &r)?;
    let mut out = json!({
        "region": serde_json::to_value(b.region)?,
        "boundary_dims": b.boundary_dims,
        "spectrum": b.spectrum,
        "rank": b.rank,
        "entropy": b.entropy,
        "entanglement_hamiltonian_spectrum": b.entanglement_hamiltonian_spectrum,
        "isometry_defect": b.isometry_defect,
    });
    if with_matrix {
        out["sigma"] = matrix_value(&b.sigma);
        out["isometry"] = b.isometry.as_ref().map(matrix_value).unwrap_or(Value::Null);
    }
    Ok(Outcome::new(out, json!({ "rank": b.rank })))
}

fn sectors(s: &mut Session, group: &str, lx: usize, ly: usize, labels_only: bool) -> Res {
    let g = s.group(group)?;
    let labels = serde_json::to_value(peps::sector_labels(&g))?;
    let count = peps::sector_labels(&g).len();
    if labels_only || !g.is_abelian() {
        let note = if g.is_abelian() { Value::Null } else { json!("sector states are built for abelian groups only") };
        return Ok(Outcome::new(json!({ "labels": labels, "note": note }), json!({ "labels": count })));
    }
    let b = peps::quantum_double_sectors(&g, lx, ly)?;
    Ok(Outcome::new(
        json!({
            "labels": labels,
            "lx": lx,
            "ly": ly,
            "gram": matrix_value(&b.gram),
            "rank": b.rank,
            "smallest_eigenvalue": b.smallest_eigenvalue,
            "placement": b.placement,
        }),
        json!({ "rank": b.rank, "labels": count, "independent": b.rank == count }),
    ))
}

fn tee(s: &mut Session, group: &str, input: Option<&str>, lx: usize, ly: usize, region: &str) -> Res {
    let r = parse_region(region)?;
    let (rep, ln_g) = match input {
        Some(p) => (peps::region_entropy(&s.peps("in", p)?, &r)?, None),
        None => {
            let g = s.group(group)?;
            (peps::topological_entropy(&g, lx, ly, &r)?, Some((g.order() as f64).ln()))
        }
    };
    let mut out = serde_json::to_value(&rep)?;
    out["ln_group_order"] = json!(ln_g);
    Ok(Outcome::new(out, json!({ "topological": rep.gamma > tol::rank() })))
}

fn corpus_cmd(s: &mut Session, action: &CorpusAction) -> Res {
    match action {
        CorpusAction::List => {
            let list: Vec<Value> = corpus::CATALOG
                .iter()
                .map(|(name, kind, params, about)| json!({ "name": name, "kind": kind, "params": params, "description": about }))
                .collect();
            Ok(Outcome::new(json!({ "entries": list }), json!({ "entries": list.len() })))
        }
        CorpusAction::Make { name, params } => {
            let p = Params::parse(params.iter().map(String::as_str))?;
            let e = corpus::make(name, &p)?;
            let doc = match e.object {
                CorpusObject::Mps(m) => Document::Mps(m),
                CorpusObject::Mpo(o) => Document::Mpo(o),
                CorpusObject::Peps(p) => Document::Peps(p),
            };
            Ok(Outcome::raw(io::write(&doc)?))
        }
        CorpusAction::Validate { name } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => corpus::CATALOG.iter().map(|c| c.0).collect(),
            };
            let reports = validate_parallel(&names, s.jobs)?;
            let all = reports.iter().all(|r| r.passed());
            Ok(Outcome::new(json!({ "entries": serde_json::to_value(&reports)? }), json!({ "all_passed": all })))
        }
    }
}

/// Entries are dealt round-robin to `jobs` threads; the report keeps
/// catalogue order.
fn validate_parallel(names: &[&str], jobs: usize) -> Result<Vec<corpus::EntryReport>, Failure> {
    let jobs = jobs.min(names.len()).max(1);
    let mut slots: Vec<Option<tnkit::Result<corpus::EntryReport>>> = (0..names.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                scope.spawn(move || {
                    (w..names.len())
                        .step_by(jobs)
                        .map(|i| (i, corpus::make(names[i], &Params::new()).map(|e| corpus::validate_entry(&e))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("validation worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every entry assigned").map_err(Failure::from)).collect()
}
