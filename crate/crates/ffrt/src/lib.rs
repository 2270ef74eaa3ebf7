//! Command-line front end for `ffrt-core`: catalog queries, tilting
//! arithmetic, interval limits and oracle verification runs.
//!
//! Exit codes: 0 on success or a consistent verification, 2 when a
//! verification is inconsistent, 1 on usage errors, violated hypotheses and
//! I/O failures.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ffrt_core::sl2_characters::{
    char_tilting, decompose_into_tiltings, fusion_product, g1_invariants_tilting, tilting_pieri, CharacterError,
    TiltingMultiset,
};
use ffrt_core::summand_catalog::{
    catalog_r_unchecked, catalog_s_gr_unchecked, decompose_kjk_g1_unchecked, decompose_tjs_g1_unchecked,
    iterate_limit, pushforward_catalog, CatalogError, DecompositionReport, Params, SummandKind,
};
use ffrt_core::verifier::{verify_decomposition, Scenario, VerifyError, DEFAULT_BUDGET};
use thiserror::Error;

use config::{Flags, Format, RunConfig};
use report::{Count, Entry, Report, ReportParams};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> CliError {
        match e {
            CatalogError::Character(c) => c.into(),
            other => CliError::Hypothesis(other.to_string()),
        }
    }
}

impl From<CharacterError> for CliError {
    fn from(e: CharacterError) -> CliError {
        match e {
            CharacterError::OutOfRange { .. } => CliError::Usage(e.to_string()),
            CharacterError::NotPrime(_) => CliError::Hypothesis(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> CliError {
        match e {
            VerifyError::Catalog(c) => c.into(),
            VerifyError::MissingParameter(name) => CliError::Usage(format!("--{name} is required")),
            other => CliError::Compute(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ffrt", version, about = "Frobenius summand catalogs for the Plucker coordinate ring of Gr(2, n)")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// List the summand types of a catalog.
    Catalog {
        #[arg(value_enum)]
        which: CatalogWhich,
    },
    /// Summands of a G_1-invariant module.
    Decompose {
        #[arg(value_enum)]
        which: DecomposeWhich,
    },
    /// Tilting module arithmetic.
    Tilting {
        #[arg(value_enum)]
        op: TiltingOp,
    },
    /// Check a catalog against the brute-force oracle up to --max-degree.
    Verify {
        #[arg(value_enum)]
        scenario: VerifyWhich,
    },
    /// Limit of the tilt-free interval iteration for --j.
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CatalogWhich {
    SInvariants,
    RModule,
    Pushforward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecomposeWhich {
    Tjs,
    Kjk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiltingOp {
    /// T(a) (x) T(b) as a sum of tilting modules.
    Product,
    /// T(1) (x) T(a) for p - 1 <= a <= 3p - 3.
    Pieri,
    /// L(a) fusion L(b), or L(a) alone without --b.
    Fusion,
    /// T(a)^{G_1} as a module for the Frobenius twist.
    G1inv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyWhich {
    SInvariants,
    Tjs,
    Kjk,
    B1Predictor,
}

impl From<VerifyWhich> for Scenario {
    fn from(v: VerifyWhich) -> Scenario {
        match v {
            VerifyWhich::SInvariants => Scenario::SGr,
            VerifyWhich::Tjs => Scenario::TjsG1,
            VerifyWhich::Kjk => Scenario::KjkG1,
            VerifyWhich::B1Predictor => Scenario::B1Predictor,
        }
    }
}

/// Parse `args`, run the command and write the report; returns the exit code.
pub fn run<I, T>(args: I, env_threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match run_cli(&cli, env_threads) {
        Ok((cfg, report)) => {
            let text = match cfg.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
                None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
            };
            match written {
                Ok(()) => exit_code(&report),
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// 0 for a consistent (or non-verifying) report, 2 for an inconsistent one.
pub fn exit_code(report: &Report) -> i32 {
    if report.consistent {
        0
    } else {
        2
    }
}

/// Resolve settings and build the report inside a pool of the configured size.
pub fn run_cli(cli: &Cli, env_threads: Option<&str>) -> Result<(RunConfig, Report), CliError> {
    let cfg = config::resolve(&cli.flags, env_threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let start = Instant::now();
    let mut report = pool.install(|| execute(cli.command, &cfg))?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok((cfg, report))
}

fn params(cfg: &RunConfig) -> Result<Params, CliError> {
    Ok(Params {
        n: cfg.require_n()?,
        p: cfg.require_p()?,
        r: cfg.r.unwrap_or(1),
        j: cfg.j,
        k: cfg.k,
        allow_small_p: cfg.allow_small_p,
    })
}

/// Build the report for one command.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Catalog { which } => {
            let ps = params(cfg)?;
            let (name, list) = match which {
                CatalogWhich::SInvariants => ("catalog-s-invariants", catalog_s_gr_unchecked(ps.n, ps.p, ps.r, ps.allow_small_p)?),
                CatalogWhich::RModule => ("catalog-r-module", catalog_r_unchecked(ps.n, ps.p, ps.r, ps.allow_small_p)?),
                CatalogWhich::Pushforward => ("catalog-pushforward", pushforward_catalog(ps.n, ps.p, ps.r)?),
            };
            let mut report = Report::new(name, ReportParams::from_params(&Params { j: None, k: None, ..ps }, None));
            report.entries = list.iter().map(Entry::from).collect();
            Ok(report)
        }
        Command::Decompose { which } => {
            let ps = params(cfg)?;
            let j = cfg.require_j()?;
            let (name, dec): (&str, DecompositionReport) = match which {
                DecomposeWhich::Tjs => ("decompose-tjs", decompose_tjs_g1_unchecked(ps.n, ps.p, j, ps.allow_small_p)?),
                DecomposeWhich::Kjk => {
                    ("decompose-kjk", decompose_kjk_g1_unchecked(ps.n, ps.p, j, cfg.require_k()?, ps.allow_small_p)?)
                }
            };
            let mut report = Report::new(name, ReportParams::from_params(&dec.params, None));
            report.entries = dec.catalog.iter().map(Entry::from).collect();
            report.notes = dec.notes;
            Ok(report)
        }
        Command::Tilting { op } => tilting(op, cfg),
        Command::Limit => {
            let ps = params(cfg)?;
            let j = cfg.require_j()?;
            if !cfg.allow_small_p {
                ffrt_core::summand_catalog::check_hypotheses(ps.n, ps.p)?;
            }
            let lim = iterate_limit(ps.n, ps.p, j);
            let mut report = Report::new("limit", ReportParams::from_params(&Params { r: 1, k: None, ..ps }, None));
            report.entries = (lim.limit.0..=lim.limit.1)
                .map(|l| Entry {
                    kind: SummandKind::TiltFree(l).name().into(),
                    indices: vec![l],
                    frobenius_level: 1,
                    twist: None,
                    multiplicity: Some(Count::Label("unknown-positive".into())),
                    flag: "nonzero".into(),
                    confirmed_at: None,
                })
                .collect();
            let steps: Vec<String> = lim.trajectory.iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
            report.notes.push(format!("trajectory: {}", steps.join(" -> ")));
            report.notes.push(format!("iterations: {}", lim.iterations));
            Ok(report)
        }
        Command::Verify { scenario } => {
            let ps = params(cfg)?;
            let verified = verify_decomposition(scenario.into(), &ps, cfg.max_degree, DEFAULT_BUDGET)?;
            Ok(Report::from(&verified))
        }
    }
}

fn tilting(op: TiltingOp, cfg: &RunConfig) -> Result<Report, CliError> {
    let p = cfg.require_p()?;
    let a = cfg.require_a()?;
    let (name, result, b) = match op {
        TiltingOp::Product => {
            let b = cfg.b.ok_or(CliError::Usage("--b is required".into()))?;
            let product = char_tilting(a, p)?.tensor(&char_tilting(b, p)?);
            ("tilting-product", decompose_into_tiltings(&product, p)?, Some(b))
        }
        TiltingOp::Pieri => ("tilting-pieri", tilting_pieri(a, p)?, None),
        TiltingOp::Fusion => {
            let indices: Vec<u64> = std::iter::once(a).chain(cfg.b).collect();
            ("tilting-fusion", fusion_product(&indices, p)?, cfg.b)
        }
        TiltingOp::G1inv => ("tilting-g1inv", g1_invariants_tilting(a, p)?, None),
    };
    let mut report = Report::new(name, ReportParams { p, a: Some(a), b, ..ReportParams::default() });
    report.entries = result
        .iter()
        .rev()
        .map(|(&l, &m)| Entry {
            kind: "T".into(),
            indices: vec![l],
            frobenius_level: 0,
            twist: None,
            multiplicity: Some(Count::Exact(m)),
            flag: "exact".into(),
            confirmed_at: None,
        })
        .collect();
    report.notes.push(format_tiltings(&result));
    Ok(report)
}

/// `T(6) + 2·T(4)`, highest index first; `0` for the empty sum.
pub fn format_tiltings(m: &TiltingMultiset) -> String {
    if m.is_empty() {
        return "0".into();
    }
    m.iter()
        .rev()
        .map(|(l, c)| if *c == 1 { format!("T({l})") } else { format!("{c}·T({l})") })
        .collect::<Vec<_>>()
        .join(" + ")
}
