use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use tnkit::io::{self, Document};
use tnkit::mpo::MpoTensor;
use tnkit::mps::UniformMps;
use tnkit::peps::PepsPatch;
use tnkit::symmetry::{FiniteGroup, OnSiteSymmetry};
use tnkit::{tol, CMat, Error};

use crate::args::Cli;
use crate::commands;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(Error::Numerical(format!("report serialisation: {e}")))
    }
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Core(e) => e.code(),
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
        }
    }

    fn kind(&self) -> String {
        match self {
            Failure::Core(e) => e.kind().to_string(),
            _ => "input".into(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
        }
    }

    /// 2 for bad input or usage, 3 for a resource cap, 1 when the analysis
    /// itself could not reach a decision.
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e.kind() {
                tnkit::error::ErrorKind::Input => 2,
                tnkit::error::ErrorKind::Cap => 3,
                tnkit::error::ErrorKind::Analysis => 1,
            },
            _ => 2,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn fail(f: &Failure) -> ExitCode {
    let body = json!({ "error": { "code": f.code(), "kind": f.kind(), "message": f.message() } });
    eprintln!("{body}");
    ExitCode::from(f.exit_code())
}

/// Loaded inputs and the pieces of the report that commands fill in.
pub struct Session {
    inputs: Vec<Value>,
    stdin_used: bool,
    pub jobs: usize,
}

impl Session {
    fn text(&mut self, name: &str, path: &str) -> Result<String, Failure> {
        let bytes = if path == "-" {
            if self.stdin_used {
                return Err(usage("standard input can be read only once"));
            }
            self.stdin_used = true;
            let mut b = Vec::new();
            std::io::stdin().read_to_end(&mut b).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
            b
        } else {
            std::fs::read(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?
        };
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(json!({ "name": name, "path": path, "sha256": digest }));
        String::from_utf8(bytes).map_err(|_| Failure::Core(Error::Parse(format!("{path} is not UTF-8"))))
    }

    pub fn json(&mut self, name: &str, path: &str) -> Result<Value, Failure> {
        let t = self.text(name, path)?;
        serde_json::from_str(&t).map_err(|e| Failure::Core(Error::Parse(format!("{path}: {e}"))))
    }

    pub fn doc(&mut self, name: &str, path: &str) -> Result<Document, Failure> {
        let t = self.text(name, path)?;
        Ok(io::read(&t)?)
    }

    pub fn mps(&mut self, name: &str, path: &str) -> Result<UniformMps, Failure> {
        match self.doc(name, path)? {
            Document::Mps(m) => Ok(m),
            d => Err(wrong_kind(path, "mps", d.kind())),
        }
    }

    pub fn mpo(&mut self, name: &str, path: &str) -> Result<MpoTensor, Failure> {
        match self.doc(name, path)? {
            Document::Mpo(m) => Ok(m),
            d => Err(wrong_kind(path, "mpo", d.kind())),
        }
    }

    pub fn peps(&mut self, name: &str, path: &str) -> Result<PepsPatch, Failure> {
        match self.doc(name, path)? {
            Document::Peps(p) => Ok(p),
            d => Err(wrong_kind(path, "peps", d.kind())),
        }
    }

    pub fn matrix(&mut self, name: &str, path: &str) -> Result<CMat, Failure> {
        match self.doc(name, path)? {
            Document::Matrix(m) => Ok(m),
            d => Err(wrong_kind(path, "matrix", d.kind())),
        }
    }

    pub fn symmetry(&mut self, name: &str, path: &str) -> Result<OnSiteSymmetry, Failure> {
        match self.doc(name, path)? {
            Document::Symmetry(s) => Ok(s),
            d => Err(wrong_kind(path, "symmetry", d.kind())),
        }
    }

    /// A named group (`z4`, `d3`, `s3`, `z2xz2`) or a group document.
    pub fn group(&mut self, spec: &str) -> Result<FiniteGroup, Failure> {
        let s = spec.to_ascii_lowercase();
        let num = |rest: &str| rest.parse::<usize>().ok().filter(|&n| (1..=io::MAX_GROUP_ORDER).contains(&n));
        if s == "z2xz2" {
            return Ok(FiniteGroup::z2xz2());
        }
        if s == "s3" {
            return Ok(FiniteGroup::dihedral(3));
        }
        if let Some(n) = s.strip_prefix('z').and_then(num) {
            return Ok(FiniteGroup::cyclic(n));
        }
        if let Some(n) = s.strip_prefix('d').and_then(num).filter(|&n| n >= 2 && 2 * n <= io::MAX_GROUP_ORDER) {
            return Ok(FiniteGroup::dihedral(n));
        }
        match self.doc("group", spec)? {
            Document::Group(g) => Ok(g),
            d => Err(wrong_kind(spec, "group", d.kind())),
        }
    }
}

fn wrong_kind(path: &str, want: &str, got: &str) -> Failure {
    Failure::Core(Error::Invalid(format!("{path}: expected a {want} document, found {got}")))
}

/// What a command produces: operation-specific results and the decisions
/// drawn from them.
pub struct Outcome {
    pub results: Value,
    pub verdicts: Value,
    raw: Option<String>,
}

impl Outcome {
    pub fn new(results: Value, verdicts: Value) -> Self {
        Outcome { results, verdicts, raw: None }
    }

    /// Printed verbatim instead of a report (tensor documents).
    pub fn raw(text: String) -> Self {
        Outcome { results: Value::Null, verdicts: Value::Null, raw: Some(text) }
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.tol {
        tol::configure(t).map_err(usage)?;
    }
    if cli.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let start = Instant::now();
    let mut s = Session { inputs: Vec::new(), stdin_used: false, jobs: cli.jobs };
    let name = commands::name(&cli.cmd);
    let outcome = commands::dispatch(&cli.cmd, &mut s)?;
    let text = if let Some(raw) = outcome.raw {
        raw
    } else {
        let t = tol::current();
        let mut r = Map::new();
        r.insert("command".into(), json!(name));
        r.insert("inputs".into(), Value::Array(s.inputs));
        r.insert("results".into(), outcome.results);
        r.insert("verdicts".into(), outcome.verdicts);
        r.insert("tolerances".into(), json!({ "eq": t.eq, "rank": t.rank, "cap_qubits": tol::cap_qubits() }));
        r.insert("seed".into(), json!(cli.seed));
        r.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
        serde_json::to_string_pretty(&Value::Object(r))?
    };
    match &cli.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r.map_err(|e| Failure::Io(format!("stdout: {e}")))?,
            }
        }
    }
    Ok(())
}
