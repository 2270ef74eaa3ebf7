//! Run settings: command-line flags over a `key = value` file over defaults.
//! `FFRT_THREADS` sits between the flag and the file for the thread count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

pub const DEFAULT_MAX_DEGREE: u64 = 12;
pub const THREADS_ENV: &str = "FFRT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected text or json)")),
        }
    }
}

/// Settings given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Grassmannian Gr(2, n), n >= 4.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// The prime characteristic.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Frobenius level (default 1).
    #[arg(long, global = true)]
    pub r: Option<u32>,
    /// First summand index (T(j), K(j,k), limits).
    #[arg(long, global = true)]
    pub j: Option<u64>,
    /// Second index of K(j,k).
    #[arg(long, global = true)]
    pub k: Option<u64>,
    /// Tilting index a.
    #[arg(long, global = true)]
    pub a: Option<u64>,
    /// Second tilting index b.
    #[arg(long, global = true)]
    pub b: Option<u64>,
    /// Truncation degree D for oracle computations.
    #[arg(long, global = true)]
    pub max_degree: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; overrides FFRT_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key = value` lines supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Admit primes below max(n - 2, 3); results are marked as outside the hypotheses.
    #[arg(long, global = true)]
    pub allow_small_p: bool,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub n: Option<u64>,
    pub p: Option<u64>,
    pub r: Option<u32>,
    pub j: Option<u64>,
    pub k: Option<u64>,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub max_degree: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub allow_small_p: bool,
}

impl RunConfig {
    pub fn require_n(&self) -> Result<u64, CliError> {
        self.n.ok_or(CliError::Usage("--n is required".into()))
    }

    pub fn require_p(&self) -> Result<u64, CliError> {
        self.p.ok_or(CliError::Usage("--p is required".into()))
    }

    pub fn require_j(&self) -> Result<u64, CliError> {
        self.j.ok_or(CliError::Usage("--j is required".into()))
    }

    pub fn require_k(&self) -> Result<u64, CliError> {
        self.k.ok_or(CliError::Usage("--k is required".into()))
    }

    pub fn require_a(&self) -> Result<u64, CliError> {
        self.a.ok_or(CliError::Usage("--a is required".into()))
    }
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        out.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(out)
}

fn lookup<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| v.parse().map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {v:?}"))))
        .transpose()
}

/// Merge flags, environment and config file.
pub fn resolve(flags: &Flags, env_threads: Option<&str>) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => parse_config(&read_config(path)?)?,
        None => BTreeMap::new(),
    };
    let known = ["n", "p", "r", "j", "k", "a", "b", "max_degree", "format", "output", "threads", "allow_small_p"];
    if let Some(key) = file.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("config: unknown key {key}")));
    }
    let env_threads = env_threads
        .map(|v| v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("{THREADS_ENV}: cannot parse {v:?}"))))
        .transpose()?;
    let format = match flags.format {
        Some(f) => f,
        None => match file.get("format") {
            Some(v) => v.parse().map_err(CliError::Usage)?,
            None => Format::default(),
        },
    };
    let threads = flags
        .threads
        .or(env_threads)
        .or(lookup(&file, "threads")?)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(RunConfig {
        n: flags.n.or(lookup(&file, "n")?),
        p: flags.p.or(lookup(&file, "p")?),
        r: flags.r.or(lookup(&file, "r")?),
        j: flags.j.or(lookup(&file, "j")?),
        k: flags.k.or(lookup(&file, "k")?),
        a: flags.a.or(lookup(&file, "a")?),
        b: flags.b.or(lookup(&file, "b")?),
        max_degree: flags.max_degree.or(lookup(&file, "max_degree")?).unwrap_or(DEFAULT_MAX_DEGREE),
        format,
        output: flags.output.clone().or(file.get("output").map(PathBuf::from)),
        threads,
        allow_small_p: flags.allow_small_p || lookup(&file, "allow_small_p")?.unwrap_or(false),
    })
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))
}
