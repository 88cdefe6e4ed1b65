//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or computation failure, 2 domain
//! error, 3 unsupported operation, 64 usage, parse or I/O error.
//!
//! Output formats (column and field orders are fixed):
//!
//! * `kernel`, `transform`: CSV `z_re, z_im, w_re, w_im, k_re, k_im, err_est`
//!   for `n = 1`; for `n > 1` the point columns are `z_re_1..z_re_n,
//!   z_im_1..z_im_n` and likewise for `w`. `err_est` is empty in closed mode.
//! * `symbol`: CSV `t` (or `t_1..t_n`), `I_closed, I_numeric, rel_gap`;
//!   `inf` marks points off the support, where `rel_gap` is empty.
//! * `verify`: JSON object `{"generated_at"?, "reports": [CheckReport...]}`.
//!
//! CSV files start with a `# generated_at=unix:<secs>` line unless
//! `--no-timestamp` is given.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::laplace_kernel::{kernel_closed, kernel_numeric, KernelHandle};
use crate::num_core::Point;
use crate::quadrature::QuadratureConfig;
use crate::transforms::{pullback_kernel, pullback_target, Biholomorphism};
use crate::verify::{default_checks, default_spaces, run_suite, source_map, CheckKind, CheckReport, VerifyOptions};
use crate::weights::{Family, SpaceSpec};

/// Errors surfaced by the command line, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("row {row}: {source}")]
    Row { row: usize, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 64,
            CliError::Row { source, .. } | CliError::Core(source) => core_code(source),
        }
    }
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => 2,
        Error::Unsupported(_) => 3,
        Error::InvalidParameter(_) | Error::Dimension { .. } => 64,
        _ => 1,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Weighted Bergman kernels on tube domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate K(z, w) at point pairs.
    Kernel(KernelArgs),
    /// Tabulate the symbol I(t) in closed form and by quadrature.
    Symbol(SymbolArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Evaluate a kernel on a model domain by pullback through a biholomorphism.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Closed,
    Numeric,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Quadrature relative tolerance (overrides the config file).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for sampling and Monte Carlo (overrides the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Omit the timestamp header.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Space configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV of point pairs with a header row: z_re.., z_im.., w_re.., w_im...
    #[arg(long, conflicts_with = "pair")]
    pub points: Option<PathBuf>,
    /// One point pair as comma-separated numbers in the same column order; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub pair: Vec<String>,
    #[arg(long, value_enum, default_value = "closed")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    /// Space configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV of t values with a header row.
    #[arg(long, conflicts_with = "t")]
    pub grid: Option<PathBuf>,
    /// One t as comma-separated numbers; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Space configuration (JSON).
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub config: Option<PathBuf>,
    /// Run over the default parameter grid of every family.
    #[arg(long)]
    pub all: bool,
    /// Checks to run, separated by ',' or '+'; "default" selects every applicable check.
    #[arg(long, default_value = "default")]
    pub suite: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub points: PointArgs,
    /// Map from the configured domain: siegel-to-paraboloid, cayley-ball-to-siegel
    /// or ball-to-paraboloid. Defaults to the map onto a paraboloid tube.
    #[arg(long)]
    pub map: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

/// The JSON space configuration.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfigFile {
    pub family: String,
    pub dim: Option<usize>,
    pub alpha: Option<f64>,
    pub v: Option<f64>,
    pub q: Option<f64>,
    pub quadrature: Option<QuadratureConfig>,
}

impl SpaceConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::Usage(format!("config: {}", e.inner()))
            } else {
                CliError::Usage(format!("config field `{path}`: {}", e.inner()))
            }
        })
    }

    /// Validates the fields and builds the space.
    pub fn space(&self) -> CliResult<SpaceSpec<f64>> {
        let bad = |field: &str, msg: String| CliError::Usage(format!("config field `{field}`: {msg}"));
        let need = |field: &str, v: Option<f64>| v.ok_or_else(|| bad(field, format!("required for family `{}`", self.family)));
        let one_d = matches!(self.family.as_str(), "unweighted-halfplane" | "halfplane-power" | "bergman-selberg");
        let dim = match (self.dim, one_d) {
            (None, true) => 1,
            (Some(1), true) => 1,
            (Some(d), true) => return Err(bad("dim", format!("family `{}` is one-dimensional, got {d}", self.family))),
            (None, false) => return Err(bad("dim", format!("required for family `{}`", self.family))),
            (Some(d), false) => d,
        };
        let allowed: &[&str] = match self.family.as_str() {
            "unweighted-halfplane" => &[],
            "halfplane-power" => &["v"],
            "bergman-selberg" => &["q"],
            "paraboloid" | "lorentz" | "siegel" | "ball" => &["alpha"],
            other => {
                return Err(bad(
                    "family",
                    format!(
                        "unknown family `{other}`; expected one of unweighted-halfplane, halfplane-power, \
                         bergman-selberg, paraboloid, lorentz, siegel, ball"
                    ),
                ))
            }
        };
        for (name, value) in [("alpha", self.alpha), ("v", self.v), ("q", self.q)] {
            if value.is_some() && !allowed.contains(&name) {
                return Err(bad(name, format!("not a parameter of family `{}`", self.family)));
            }
        }
        let built = match self.family.as_str() {
            "unweighted-halfplane" => Ok(SpaceSpec::unweighted_half_plane()),
            "halfplane-power" => SpaceSpec::half_plane_power(need("v", self.v)?),
            "bergman-selberg" => SpaceSpec::bergman_selberg(need("q", self.q)?),
            "paraboloid" => SpaceSpec::paraboloid(dim, need("alpha", self.alpha)?),
            "lorentz" => SpaceSpec::lorentz(dim, need("alpha", self.alpha)?),
            "siegel" => SpaceSpec::siegel(dim, need("alpha", self.alpha)?),
            _ => SpaceSpec::ball(dim, need("alpha", self.alpha)?),
        };
        let field = allowed.first().copied().unwrap_or("dim");
        let space = built.map_err(|e| bad(field, e.to_string()))?;
        if let Some(q) = &self.quadrature {
            q.validate().map_err(|e| bad("quadrature", e.to_string()))?;
        }
        Ok(space)
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_config(path: &Path) -> CliResult<(SpaceSpec<f64>, QuadratureConfig)> {
    let file = SpaceConfigFile::parse(&read(path)?)?;
    let space = file.space()?;
    Ok((space, file.quadrature.unwrap_or_default()))
}

fn apply_overrides(mut cfg: QuadratureConfig, common: &Common) -> CliResult<QuadratureConfig> {
    if let Some(t) = common.tol {
        cfg.rel_tol = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Usage(format!("--tol: {e}")))?;
    Ok(cfg)
}

fn parse_numbers(line: &str, row: usize) -> CliResult<Vec<f64>> {
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("row {row}: cannot parse `{}`: {e}", s.trim())))
        })
        .collect()
}

/// Numeric rows from a CSV file with a header, or from inline values.
fn read_rows(file: Option<&Path>, inline: &[String], what: &str) -> CliResult<Vec<Vec<f64>>> {
    match file {
        Some(path) => {
            let text = read(path)?;
            let mut reader = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
            reader
                .records()
                .enumerate()
                .map(|(row, rec)| {
                    let rec = rec.map_err(|e| CliError::Usage(format!("{}: row {row}: {e}", path.display())))?;
                    parse_numbers(&rec.iter().collect::<Vec<_>>().join(","), row)
                })
                .collect()
        }
        None if inline.is_empty() => Err(CliError::Usage(format!("no {what} given"))),
        None => inline.iter().enumerate().map(|(row, s)| parse_numbers(s, row)).collect(),
    }
}

fn point_pairs(args: &PointArgs, n: usize) -> CliResult<Vec<(Point<f64>, Point<f64>)>> {
    let rows = read_rows(args.points.as_deref(), &args.pair, "point pairs (use --points or --pair)")?;
    rows.into_iter()
        .enumerate()
        .map(|(row, v)| {
            if v.len() != 4 * n {
                return Err(CliError::Usage(format!("row {row}: expected {} numbers for n = {n}, got {}", 4 * n, v.len())));
            }
            let z = Point::from_parts(&v[..n], &v[n..2 * n]).map_err(|source| CliError::Row { row, source })?;
            let w = Point::from_parts(&v[2 * n..3 * n], &v[3 * n..]).map_err(|source| CliError::Row { row, source })?;
            Ok((z, w))
        })
        .collect()
}

fn axis_names(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|k| format!("{prefix}_{k}")).collect()
    }
}

fn point_header(n: usize) -> Vec<String> {
    let mut h = Vec::new();
    for p in ["z", "w"] {
        h.extend(axis_names(&format!("{p}_re"), n));
        h.extend(axis_names(&format!("{p}_im"), n));
    }
    h
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
fn fmt(x: f64) -> String {
    if x.is_infinite() && x > 0.0 {
        "inf".into()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_output(common: &Common, bytes: &[u8]) -> CliResult<()> {
    match &common.output {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn csv_bytes(common: &Common, header: &[String], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    if !common.no_timestamp {
        out.extend_from_slice(format!("# generated_at=unix:{}\n", timestamp()).as_bytes());
    }
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

fn point_cells(z: &Point<f64>, w: &Point<f64>) -> Vec<String> {
    let mut cells = Vec::new();
    for p in [z, w] {
        cells.extend(p.re().into_iter().map(fmt));
        cells.extend(p.im().into_iter().map(fmt));
    }
    cells
}

/// Evaluates every pair in parallel; the first failing row (in order) wins.
fn eval_rows(
    pairs: &[(Point<f64>, Point<f64>)],
    eval: impl Fn(&Point<f64>, &Point<f64>) -> crate::error::Result<(Complex<f64>, Option<f64>)> + Sync,
) -> CliResult<Vec<Vec<String>>> {
    let results: Vec<_> = pairs.par_iter().map(|(z, w)| eval(z, w)).collect();
    results
        .into_iter()
        .zip(pairs)
        .enumerate()
        .map(|(row, (r, (z, w)))| {
            let (k, err) = r.map_err(|source| CliError::Row { row, source })?;
            let mut cells = point_cells(z, w);
            cells.push(fmt(k.re));
            cells.push(fmt(k.im));
            cells.push(err.map(fmt).unwrap_or_default());
            Ok(cells)
        })
        .collect()
}

fn kernel_header(n: usize) -> Vec<String> {
    let mut h = point_header(n);
    h.extend(["k_re", "k_im", "err_est"].map(String::from));
    h
}

pub fn cmd_kernel(args: &KernelArgs) -> CliResult<i32> {
    let (space, cfg) = load_config(&args.points.config)?;
    let cfg = apply_overrides(cfg, &args.common)?;
    let pairs = point_pairs(&args.points, space.dim())?;
    let rows = eval_rows(&pairs, |z, w| match args.points.mode {
        Mode::Closed => Ok((kernel_closed(&space, z, w)?, None)),
        Mode::Numeric => {
            let v = kernel_numeric(&space, z, w, &cfg)?;
            Ok((v.value, v.error_estimate))
        }
    })?;
    write_output(&args.common, &csv_bytes(&args.common, &kernel_header(space.dim()), &rows)?)?;
    Ok(0)
}

pub fn cmd_symbol(args: &SymbolArgs) -> CliResult<i32> {
    let (space, cfg) = load_config(&args.config)?;
    let cfg = apply_overrides(cfg, &args.common)?;
    space.require_tube()?;
    let n = space.dim();
    let ts = read_rows(args.grid.as_deref(), &args.t, "t values (use --grid or --t)")?;
    for (row, t) in ts.iter().enumerate() {
        if t.len() != n {
            return Err(CliError::Usage(format!("row {row}: expected {n} numbers, got {}", t.len())));
        }
    }
    let results: Vec<_> = ts
        .par_iter()
        .map(|t| -> crate::error::Result<Vec<String>> {
            let closed = space.symbol_closed(t)?;
            let numeric = space.symbol_numeric(t, &cfg)?.value;
            let gap = match (closed.finite(), numeric.finite()) {
                (Some(a), Some(b)) => fmt((a - b).abs() / a.abs()),
                (None, None) => String::new(),
                _ => "inf".into(),
            };
            let mut cells: Vec<String> = t.iter().map(|&x| fmt(x)).collect();
            cells.push(closed.to_string());
            cells.push(numeric.to_string());
            cells.push(gap);
            Ok(cells)
        })
        .collect();
    let rows = results
        .into_iter()
        .enumerate()
        .map(|(row, r)| r.map_err(|source| CliError::Row { row, source }))
        .collect::<CliResult<Vec<_>>>()?;
    let mut header = axis_names("t", n);
    header.extend(["I_closed", "I_numeric", "rel_gap"].map(String::from));
    write_output(&args.common, &csv_bytes(&args.common, &header, &rows)?)?;
    Ok(0)
}

/// Parses a suite selector; `None` means every applicable check.
pub fn parse_suite(selector: &str) -> CliResult<Option<Vec<CheckKind>>> {
    let selector = selector.trim();
    if selector == "default" || selector == "all" {
        return Ok(None);
    }
    let kinds = selector
        .split([',', '+'])
        .map(|name| {
            CheckKind::from_name(name.trim()).ok_or_else(|| {
                let known: Vec<_> = CheckKind::ALL.iter().map(|k| k.name()).collect();
                CliError::Usage(format!("unknown suite `{}`; known checks: {}", name.trim(), known.join(", ")))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(CliError::Usage("empty suite".into()));
    }
    Ok(Some(kinds))
}

#[derive(Serialize)]
struct VerifyFile<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<String>,
    reports: &'a [CheckReport],
}

/// Runs the selected checks; the report is written even when checks fail.
pub fn cmd_verify(args: &VerifyArgs) -> CliResult<i32> {
    let selection = parse_suite(&args.suite)?;
    let (spaces, cfg) = match &args.config {
        Some(path) => {
            let (space, cfg) = load_config(path)?;
            (vec![space], cfg)
        }
        None => (default_spaces(), QuadratureConfig::default()),
    };
    let cfg = apply_overrides(cfg, &args.common)?;
    let opts = VerifyOptions { seed: cfg.seed, cfg };
    let plan: Vec<(SpaceSpec<f64>, Vec<CheckKind>)> = spaces
        .into_iter()
        .map(|s| {
            let kinds = match &selection {
                None => default_checks(&s),
                Some(k) => k.iter().copied().filter(|k| k.applies_to(&s)).collect(),
            };
            (s, kinds)
        })
        .collect();
    if plan.iter().all(|(_, k)| k.is_empty()) {
        return Err(Error::Unsupported(format!("none of the selected checks apply (suite `{}`)", args.suite)).into());
    }
    let per_space: Vec<_> = plan.par_iter().map(|(s, k)| run_suite(s, k, &opts)).collect();
    let mut reports = Vec::new();
    for r in per_space {
        reports.extend(r?);
    }
    let file = VerifyFile {
        generated_at: (!args.common.no_timestamp).then(|| format!("unix:{}", timestamp())),
        reports: &reports,
    };
    let mut bytes = serde_json::to_vec_pretty(&file).map_err(|e| CliError::Usage(format!("json: {e}")))?;
    bytes.push(b'\n');
    write_output(&args.common, &bytes)?;
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn resolve_map(name: Option<&str>, space: &SpaceSpec<f64>) -> CliResult<Biholomorphism> {
    let n = space.dim();
    let phi = match name {
        None => match space.family() {
            Family::Ball { .. } => {
                Biholomorphism::cayley_ball_to_siegel(n)?.then(Biholomorphism::siegel_to_paraboloid(n)?)?
            }
            _ => source_map(space)?,
        },
        Some("siegel-to-paraboloid") => Biholomorphism::siegel_to_paraboloid(n)?,
        Some("cayley-ball-to-siegel") => Biholomorphism::cayley_ball_to_siegel(n)?,
        Some("ball-to-paraboloid") => {
            Biholomorphism::cayley_ball_to_siegel(n)?.then(Biholomorphism::siegel_to_paraboloid(n)?)?
        }
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown map `{other}`; expected siegel-to-paraboloid, cayley-ball-to-siegel or ball-to-paraboloid"
            )))
        }
    };
    let matches = match space.family() {
        Family::Siegel { .. } => phi.source() == Biholomorphism::siegel_to_paraboloid(n)?.source(),
        Family::Ball { .. } => phi.source() == Biholomorphism::cayley_ball_to_siegel(n)?.source(),
        _ => false,
    };
    if !matches {
        return Err(Error::Unsupported(format!("map {} does not start at the domain of {}", phi.name(), space.label())).into());
    }
    Ok(phi)
}

/// Kernel of the configured model space computed from the target space of
/// the map; numeric mode evaluates the target kernel by quadrature.
pub fn cmd_transform(args: &TransformArgs) -> CliResult<i32> {
    let (space, cfg) = load_config(&args.points.config)?;
    let cfg = apply_overrides(cfg, &args.common)?;
    let phi = resolve_map(args.map.as_deref(), &space)?;
    let target = pullback_target(&phi, &space)?;
    let handle = match args.points.mode {
        Mode::Closed => KernelHandle::closed(target),
        Mode::Numeric => KernelHandle::numeric(target, cfg),
    };
    let pairs = point_pairs(&args.points, space.dim())?;
    let rows = eval_rows(&pairs, |z, w| match args.points.mode {
        Mode::Closed => Ok((pullback_kernel(&phi, &handle, z, w)?, None)),
        Mode::Numeric => {
            for p in [z, w] {
                if !phi.source().contains(p)? {
                    return Err(Error::Domain(format!("point outside the source of {}", phi.name())));
                }
            }
            let (jz, jw) = (phi.jac_det(z)?, phi.jac_det(w)?);
            let v = handle.eval(&phi.forward(z)?, &phi.forward(w)?)?;
            let scale = jz.norm() * jw.norm();
            Ok((jz * v.value * jw.conj(), v.error_estimate.map(|e| e * scale)))
        }
    })?;
    write_output(&args.common, &csv_bytes(&args.common, &kernel_header(space.dim()), &rows)?)?;
    Ok(0)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Symbol(a) => cmd_symbol(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Transform(a) => cmd_transform(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
