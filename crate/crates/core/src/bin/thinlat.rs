//! Command-line front end: build covering lattices, emit epsilon-nets,
//! estimate volumes, find Kovner-Besicovitch points, bracket covering radii
//! and run the net applications.
//!
//! Reports go to stdout as JSON, point streams to files, logs to stderr.
//! Runs are deterministic; set THINLAT_VERBOSE=1 to add wall-clock timing
//! to reports (which breaks byte-for-byte reproducibility).

use std::io::Write;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use thinlat::enumeration;
use thinlat::geometry::{compile, BodyDescriptor, CenteredBody};
use thinlat::lattice::{BasisJson, LatticeBasis};
use thinlat::thinlattice::{
    epsilon_net, thin_lattice_general, thin_lattice_symmetric, GlsProvider,
};
use thinlat::volume::{estimate_with_lattice, kb_point, operator_norm, polyhedral_approx};
use thinlat::{EngineConfig, Error};

#[derive(Parser)]
#[command(
    name = "thinlat",
    version,
    about = "Thin lattice coverings and epsilon-nets for convex bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Body descriptor JSON file.
    #[arg(long)]
    body: PathBuf,
    /// Tolerance band override for enumeration and gauges.
    #[arg(long)]
    tolerance: Option<f64>,
    /// M-lattice scaling constant.
    #[arg(long)]
    c0: Option<f64>,
    /// Worker threads for net evaluation.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Enumeration node budget.
    #[arg(long)]
    node_budget: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit an epsilon-net of the body under a norm ball.
    Net {
        #[command(flatten)]
        common: Common,
        /// Net parameter.
        #[arg(long)]
        eps: f64,
        /// Norm-ball descriptor JSON (default: the Euclidean unit ball).
        #[arg(long)]
        norm_body: Option<PathBuf>,
        /// Write net points here, one per line.
        #[arg(long)]
        points_out: Option<PathBuf>,
    },
    /// Estimate the volume of the body to within (1+eps)^n.
    Volume {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: f64,
    },
    /// Compute a (1+eps)^{-n}-approximate Kovner-Besicovitch point.
    KbPoint {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: f64,
    },
    /// Build a certified thin covering lattice for the body.
    ThinLattice {
        #[command(flatten)]
        common: Common,
    },
    /// Bracket the covering radius of a given lattice for a symmetric body.
    CoveringRadius {
        #[command(flatten)]
        common: Common,
        /// Lattice basis JSON file ({"basis": [[column], ...]}).
        #[arg(long)]
        lattice: PathBuf,
        /// Coset resolution.
        #[arg(long, default_value_t = 2)]
        p: u64,
    },
    /// Estimate the operator norm of a matrix between two normed spaces.
    Opnorm {
        #[command(flatten)]
        common: Common,
        /// Matrix JSON file ({"matrix": [[row], ...]}); --body is the domain
        /// unit ball, --norm-body the codomain unit ball.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        norm_body: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Polyhedral approximation K ⊆ P ⊆ (1+eps) K of a symmetric body.
    Polyapprox {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: f64,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(RunError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(RunError::Computation(err)) => {
            eprintln!("error: {}: {err}", error_name(&err));
            3
        }
    };
    std::process::exit(code);
}

enum RunError {
    Validation(String),
    Computation(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BadDescriptor(_)
            | Error::InvalidParameter { .. }
            | Error::UnboundedBody(_)
            | Error::EmptyInterior(_)
            | Error::DegeneratePolygon(_) => RunError::Validation(e.to_string()),
            other => RunError::Computation(other),
        }
    }
}

fn error_name(e: &Error) -> &'static str {
    match e {
        Error::NonCenteredBody(_) => "NonCenteredBody",
        Error::ToleranceTooSmall(_) => "ToleranceTooSmall",
        Error::CenterOutsideBody(_) => "CenterOutsideBody",
        Error::UnboundedBody(_) => "UnboundedBody",
        Error::EmptyInterior(_) => "EmptyInterior",
        Error::BadDescriptor(_) => "BadDescriptor",
        Error::IterationBudgetExceeded(_) => "IterationBudgetExceeded",
        Error::NotCommensurable(_) => "NotCommensurable",
        Error::NotOrderThree => "NotOrderThree",
        Error::AlreadyMember => "AlreadyMember",
        Error::SingularBasis(_) => "SingularBasis",
        Error::FiberSolveFailure { .. } => "FiberSolveFailure",
        Error::BudgetExceeded(_) => "BudgetExceeded",
        Error::NoNonzeroPoint(_) => "NoNonzeroPoint",
        Error::NoPrimeFound(_) => "NoPrimeFound",
        Error::GreedyStuck(_) => "GreedyStuck",
        Error::IterationOverflow(_) => "IterationOverflow",
        Error::CertificateMissing => "CertificateMissing",
        Error::GridTooCoarse(_) => "GridTooCoarse",
        Error::DegeneratePolygon(_) => "DegeneratePolygon",
        Error::ProviderFailure(_) => "ProviderFailure",
        Error::InvalidParameter { .. } => "InvalidParameter",
        Error::Io(_) => "Io",
        Error::Json(_) => "Json",
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Net {
            common,
            eps,
            norm_body,
            points_out,
        } => cmd_net(common, eps, norm_body, points_out),
        Command::Volume { common, eps } => cmd_volume(common, eps),
        Command::KbPoint { common, eps } => cmd_kb(common, eps),
        Command::ThinLattice { common } => cmd_thin_lattice(common),
        Command::CoveringRadius { common, lattice, p } => cmd_covering_radius(common, lattice, p),
        Command::Opnorm {
            common,
            matrix,
            norm_body,
            eps,
        } => cmd_opnorm(common, matrix, norm_body, eps),
        Command::Polyapprox { common, eps } => cmd_polyapprox(common, eps),
    }
}

fn engine_config(common: &Common) -> Result<EngineConfig, RunError> {
    let mut cfg = EngineConfig::default();
    if let Some(t) = common.tolerance {
        if !(t > 0.0 && t < 0.1) {
            return Err(RunError::Validation(format!(
                "tolerance: need 0 < tolerance < 0.1, got {t}"
            )));
        }
        cfg.feas_tol = t;
        cfg.gauge_tol = t.min(cfg.gauge_tol);
    }
    if let Some(c0) = common.c0 {
        if !(1.0..=64.0).contains(&c0) {
            return Err(RunError::Validation(format!(
                "c0: need 1 <= c0 <= 64, got {c0}"
            )));
        }
        cfg.c0 = c0;
    }
    if common.threads == 0 || common.threads > 256 {
        return Err(RunError::Validation(format!(
            "threads: need 1 <= threads <= 256, got {}",
            common.threads
        )));
    }
    cfg.threads = common.threads;
    if let Some(b) = common.node_budget {
        if b == 0 {
            return Err(RunError::Validation("node-budget: must be positive".into()));
        }
        cfg.node_budget = b;
    }
    Ok(cfg)
}

fn load_body(
    path: &PathBuf,
    cfg: &EngineConfig,
) -> Result<(BodyDescriptor, CenteredBody), RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Validation(format!("body: cannot read {}: {e}", path.display())))?;
    let descriptor =
        BodyDescriptor::from_json(&text).map_err(|e| RunError::Validation(e.to_string()))?;
    let body = compile(&descriptor, cfg)?;
    Ok((descriptor, body))
}

fn validate_eps(eps: f64, hi: f64) -> Result<(), RunError> {
    if !(eps > 0.0 && eps <= hi) {
        return Err(RunError::Validation(format!(
            "eps: need 0 < eps <= {hi}, got {eps}"
        )));
    }
    Ok(())
}

fn emit(common: &Common, report: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(report).map_err(Error::from)?;
    text.push('\n');
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn runtime_field(start: Instant) -> Option<u64> {
    if std::env::var("THINLAT_VERBOSE").is_ok_and(|v| v == "1") {
        Some(start.elapsed().as_millis() as u64)
    } else {
        None
    }
}

#[derive(Serialize)]
struct NetReport {
    schema: &'static str,
    command: &'static str,
    eps: f64,
    count: u64,
    level_node_counts: Vec<u64>,
    lattice: thinlat::thinlattice::CoveringLatticeJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_net(
    common: Common,
    eps: f64,
    norm_body: Option<PathBuf>,
    points_out: Option<PathBuf>,
) -> Result<(), RunError> {
    let start = Instant::now();
    validate_eps(eps, 1.0)?;
    let cfg = engine_config(&common)?;
    let (_, c_body) = load_body(&common.body, &cfg)?;
    let ball = match &norm_body {
        Some(path) => load_body(path, &cfg)?.1,
        None => CenteredBody::ball(c_body.dim, 1.0),
    };
    if !ball.symmetric {
        return Err(RunError::Validation(
            "norm-body: must be a symmetric norm ball".into(),
        ));
    }
    if ball.dim != c_body.dim {
        return Err(RunError::Validation(
            "norm-body: dimension mismatch with body".into(),
        ));
    }
    let covering = thin_lattice_symmetric(&ball, &GlsProvider, &cfg)?;
    let scaled_ball = ball.scale(eps);
    let scaled_covering = covering.scaled_with_body(eps);
    let mut writer: Option<std::io::BufWriter<std::fs::File>> = match &points_out {
        Some(path) => Some(std::io::BufWriter::new(
            std::fs::File::create(path).map_err(Error::from)?,
        )),
        None => None,
    };
    let mut count = 0u64;
    let mut io_err: Option<std::io::Error> = None;
    let mut sink = |_: &[i64], p: &DVector<f64>| {
        count += 1;
        if let Some(w) = writer.as_mut() {
            let line = p
                .iter()
                .map(|v| format!("{v:.12}"))
                .collect::<Vec<_>>()
                .join(" ");
            if let Err(e) = writeln!(w, "{line}") {
                io_err = Some(e);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    };
    let report = epsilon_net(&c_body, &scaled_ball, &scaled_covering, &cfg, &mut sink)?;
    if let Some(e) = io_err {
        return Err(RunError::Computation(Error::Io(e)));
    }
    emit(
        &common,
        &NetReport {
            schema: "thinlat/1",
            command: "net",
            eps,
            count,
            level_node_counts: report.level_node_counts,
            lattice: scaled_covering.to_json(),
            runtime_ms: runtime_field(start),
        },
    )
}

#[derive(Serialize)]
struct VolumeReport {
    schema: &'static str,
    command: &'static str,
    #[serde(rename = "V")]
    v: f64,
    eps: f64,
    interval: [f64; 2],
    points: u64,
    lattice: thinlat::thinlattice::CoveringLatticeJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_volume(common: Common, eps: f64) -> Result<(), RunError> {
    let start = Instant::now();
    validate_eps(eps, 1.0)?;
    let cfg = engine_config(&common)?;
    let (descriptor, body) = load_body(&common.body, &cfg)?;
    let (mut covering, center) = thin_lattice_general(&body, &GlsProvider, &cfg)?;
    covering.body = Some(descriptor);
    let est = estimate_with_lattice(&body, eps, &covering, &center, &cfg)?;
    emit(
        &common,
        &VolumeReport {
            schema: "thinlat/1",
            command: "volume",
            v: est.value,
            eps,
            interval: [est.guarantee.0, est.guarantee.1],
            points: est.points_counted,
            lattice: covering.to_json(),
            runtime_ms: runtime_field(start),
        },
    )
}

#[derive(Serialize)]
struct KbReport {
    schema: &'static str,
    command: &'static str,
    c: Vec<f64>,
    eps: f64,
    iterations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_kb(common: Common, eps: f64) -> Result<(), RunError> {
    let start = Instant::now();
    validate_eps(eps, 0.5)?;
    let cfg = engine_config(&common)?;
    let (_, body) = load_body(&common.body, &cfg)?;
    let kb = kb_point(&body, eps, &cfg)?;
    emit(
        &common,
        &KbReport {
            schema: "thinlat/1",
            command: "kb-point",
            c: kb.c.iter().copied().collect(),
            eps: kb.eps,
            iterations: kb.iterations,
            runtime_ms: runtime_field(start),
        },
    )
}

#[derive(Serialize)]
struct ThinLatticeReport {
    command: &'static str,
    #[serde(flatten)]
    lattice: thinlat::thinlattice::CoveringLatticeJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    kb_center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_thin_lattice(common: Common) -> Result<(), RunError> {
    let start = Instant::now();
    let cfg = engine_config(&common)?;
    let (descriptor, body) = load_body(&common.body, &cfg)?;
    let (mut covering, center) = thin_lattice_general(&body, &GlsProvider, &cfg)?;
    covering.body = Some(descriptor);
    let kb_center = if body.symmetric {
        None
    } else {
        Some(center.iter().copied().collect())
    };
    emit(
        &common,
        &ThinLatticeReport {
            command: "thin-lattice",
            lattice: covering.to_json(),
            kb_center,
            runtime_ms: runtime_field(start),
        },
    )
}

#[derive(Serialize)]
struct CoveringRadiusReport {
    schema: &'static str,
    command: &'static str,
    p: u64,
    bracket: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_covering_radius(common: Common, lattice: PathBuf, p: u64) -> Result<(), RunError> {
    let start = Instant::now();
    if !(2..=64).contains(&p) {
        return Err(RunError::Validation(format!("p: need 2 <= p <= 64, got {p}")));
    }
    let cfg = engine_config(&common)?;
    let (_, body) = load_body(&common.body, &cfg)?;
    if !body.symmetric {
        return Err(RunError::Validation(
            "body: covering-radius bracketing requires a symmetric body".into(),
        ));
    }
    let basis = load_basis(&lattice)?;
    if basis.dim() != body.dim {
        return Err(RunError::Validation(
            "lattice: dimension mismatch with body".into(),
        ));
    }
    let centered = body.translate(&(-&body.center));
    let bracket = enumeration::covering_radius_bracket(&centered, &basis, p, &cfg)?;
    emit(
        &common,
        &CoveringRadiusReport {
            schema: "thinlat/1",
            command: "covering-radius",
            p,
            bracket: [bracket.0, bracket.1],
            runtime_ms: runtime_field(start),
        },
    )
}

fn load_basis(path: &PathBuf) -> Result<LatticeBasis, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Validation(format!("lattice: cannot read {}: {e}", path.display()))
    })?;
    let json: BasisJson =
        serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("lattice: {e}")))?;
    json.to_basis().map_err(RunError::from)
}

#[derive(Serialize)]
struct OpnormReport {
    schema: &'static str,
    command: &'static str,
    value: f64,
    eps: f64,
    bracket: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_opnorm(
    common: Common,
    matrix: PathBuf,
    norm_body: PathBuf,
    eps: f64,
) -> Result<(), RunError> {
    let start = Instant::now();
    validate_eps(eps, 0.5)?;
    let cfg = engine_config(&common)?;
    let (_, bx) = load_body(&common.body, &cfg)?;
    let (_, by) = load_body(&norm_body, &cfg)?;
    let t = load_matrix(&matrix, bx.dim)?;
    if t.nrows() != by.dim {
        return Err(RunError::Validation(format!(
            "matrix: {} rows do not match codomain dimension {}",
            t.nrows(),
            by.dim
        )));
    }
    let by_centered = by.translate(&(-&by.center));
    let gauge_cfg = cfg.clone();
    let by_gauge =
        move |y: &DVector<f64>| by_centered.gauge(y, &gauge_cfg).unwrap_or(f64::INFINITY);
    let value = operator_norm(&t, &bx, &by_gauge, eps, &cfg)?;
    emit(
        &common,
        &OpnormReport {
            schema: "thinlat/1",
            command: "opnorm",
            value,
            eps,
            bracket: [value, value / (1.0 - eps / 2.0)],
            runtime_ms: runtime_field(start),
        },
    )
}

fn load_matrix(path: &PathBuf, expect_cols: usize) -> Result<DMatrix<f64>, RunError> {
    #[derive(serde::Deserialize)]
    struct MatrixJson {
        matrix: Vec<Vec<f64>>,
    }
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Validation(format!("matrix: cannot read {}: {e}", path.display()))
    })?;
    let json: MatrixJson =
        serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("matrix: {e}")))?;
    if json.matrix.is_empty() || json.matrix.iter().any(|r| r.len() != expect_cols) {
        return Err(RunError::Validation(format!(
            "matrix: expected rows of {expect_cols} entries"
        )));
    }
    let rows = json.matrix.len();
    let flat: Vec<f64> = json.matrix.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(rows, expect_cols, &flat))
}

#[derive(Serialize)]
struct PolyapproxReport {
    schema: &'static str,
    command: &'static str,
    eps: f64,
    facets: usize,
    polytope: BodyDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u64>,
}

fn cmd_polyapprox(common: Common, eps: f64) -> Result<(), RunError> {
    let start = Instant::now();
    validate_eps(eps, 1.0)?;
    let cfg = engine_config(&common)?;
    let (_, body) = load_body(&common.body, &cfg)?;
    let approx = polyhedral_approx(&body, eps, &cfg)?;
    let facets = match &approx {
        BodyDescriptor::Hpolytope { a, .. } => a.len(),
        _ => 0,
    };
    emit(
        &common,
        &PolyapproxReport {
            schema: "thinlat/1",
            command: "polyapprox",
            eps,
            facets,
            polytope: approx,
            runtime_ms: runtime_field(start),
        },
    )
}
