use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact tensor-network analyses with JSON reports.
///
/// Every tensor argument is a path to a JSON document (see FORMATS.md), or
/// `-` for standard input.
#[derive(Parser, Debug)]
#[command(name = "tnkit", version)]
pub struct Cli {
    /// Equality tolerance; the rank tolerance is 100 times larger.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Recorded in the report. No current analysis draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent sub-analyses.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    #[arg(long = "in", value_name = "PATH")]
    pub input: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainBoundary {
    Periodic,
    Open,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Canonical form: blocking period, normal blocks, gauge.
    Canonical(Input),
    /// Decide whether two MPS generate the same states.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Normality diagnostics from the transfer operator.
    Normal(Input),
    /// Injectivity length of a normal tensor.
    Injectivity(Input),
    /// Transfer-operator spectrum and fixed points.
    Transfer {
        #[command(flatten)]
        input: Input,
        /// Keep the unnormalised tensor.
        #[arg(long)]
        raw: bool,
        /// Include the transfer matrix itself.
        #[arg(long)]
        matrix: bool,
    },
    /// Half-chain Schmidt spectrum and Rényi entropies.
    Entspec {
        #[command(flatten)]
        input: Input,
        /// Comma-separated Rényi orders; `inf` is accepted.
        #[arg(long, default_value = "0.5,1,2,inf")]
        alpha: String,
    },
    /// Correlation length from the transfer spectrum.
    Corrlen(Input),
    /// Virtual action X(g), phases φ(g) and cocycle ω of an on-site symmetry.
    Symmetry {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        sym: String,
    },
    /// SPT class of an MPS under an on-site symmetry.
    Spt {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        sym: String,
    },
    /// Time-reversal index ±1 for T = U·K.
    TrIndex {
        #[command(flatten)]
        input: Input,
        /// Matrix document with the unitary part of T.
        #[arg(long)]
        u: String,
    },
    /// String order parameter ⟨R(1) U(g)…U(g) R†(L)⟩.
    StringOrder {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        sym: String,
        /// Group element index.
        #[arg(long)]
        g: usize,
        /// Matrix document with the end operator R.
        #[arg(long)]
        r: String,
        /// String length, or `inf`.
        #[arg(long, default_value = "inf")]
        length: String,
    },
    /// Build the fixed-point MPS of a prescribed projective class.
    SptBuild {
        /// Group name (zN, dN, s3, z2xz2) or a group document.
        #[arg(long)]
        group: String,
        /// JSON array of arrays: ω(g,h) in radians. Trivial when absent.
        #[arg(long)]
        omega: Option<String>,
        /// JSON array: φ(g) in radians. Zero when absent.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Renormalisation fixed-point test.
    Rgfp(Input),
    /// Parent Hamiltonian on L sites.
    ParentHam {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Include the local term as a matrix.
        #[arg(long)]
        matrix: bool,
    },
    /// Ground space of the parent Hamiltonian on N sites.
    GroundSpace {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ChainBoundary::Periodic)]
        boundary: ChainBoundary,
    },
    /// Martingale gap certificate.
    GapMartingale {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Terms per block.
        #[arg(long, default_value_t = 1)]
        blocking: usize,
    },
    /// Knabe finite-size gap certificate.
    GapKnabe {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long)]
        n: usize,
    },
    /// Apply an MPO to an MPS.
    MpoApply {
        #[arg(long)]
        mpo: String,
        #[command(flatten)]
        input: Input,
    },
    /// Unitarity of an MPO for every chain length.
    MpuCheck(Input),
    /// Index of a matrix product unitary.
    MpuIndex(Input),
    /// Reduce an MPO (or its composition with another) to canonical form.
    MpoReduce {
        #[command(flatten)]
        input: Input,
        /// Reduce O·O instead of O.
        #[arg(long, conflicts_with = "compose_with")]
        square: bool,
        /// Reduce O·P for the MPO document P.
        #[arg(long)]
        compose_with: Option<String>,
    },
    /// Exact norm of a PEPS patch.
    PepsNorm {
        #[command(flatten)]
        input: Input,
        /// Include the amplitude table.
        #[arg(long)]
        amplitudes: bool,
    },
    /// Normalised expectation value of a product of local operators.
    PepsExpect {
        #[command(flatten)]
        input: Input,
        /// `x,y,PATH` with a matrix document; repeatable.
        #[arg(long = "op", required = true)]
        ops: Vec<String>,
    },
    /// Boundary state of a rectangular region.
    PepsBoundary {
        #[command(flatten)]
        input: Input,
        /// Half-open rectangle `x0,y0,x1,y1`.
        #[arg(long)]
        region: String,
        /// Include σ and the boundary isometry.
        #[arg(long)]
        matrix: bool,
    },
    /// Topological sectors of the quantum double on a torus.
    Sectors {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 3)]
        lx: usize,
        #[arg(long, default_value_t = 3)]
        ly: usize,
        /// Only list anyon labels.
        #[arg(long)]
        labels_only: bool,
    },
    /// Region entropy and its deficit from the area law.
    Tee {
        /// Quantum double of this group (ignored when --in is given).
        #[arg(long, default_value = "z2")]
        group: String,
        /// Analyse this PEPS instead of a quantum double.
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long, default_value_t = 4)]
        lx: usize,
        #[arg(long, default_value_t = 4)]
        ly: usize,
        #[arg(long, default_value = "1,1,3,3")]
        region: String,
    },
    /// Catalogue of standard examples.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum CorpusAction {
    /// List entries and their parameters.
    List,
    /// Emit the tensor document of an entry.
    Make {
        name: String,
        /// `key=value` parameters.
        params: Vec<String>,
    },
    /// Check every entry (or one) against its expected properties.
    Validate {
        #[arg(long)]
        name: Option<String>,
    },
}
