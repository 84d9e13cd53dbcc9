//! The `oslx` command line: generation, evaluation, weight constants,
//! calibration-backed verification and sweeps.
//!
//! Exit codes: 0 pass, 1 usage error or failed check, 2 degenerate or
//! malformed input, 3 stale calibration, 4 oracle mismatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{half_space_example, power_weight, Generator};
use crate::grid::io::{read_grid, write_grid, GridFormat};
use crate::grid::{CubeFamily, GridCube, GridFunction, Weight};
use crate::operators::{max_relative_error, maximal, maximal_naive, sharp_maximal, sharp_maximal_naive, BoundaryMode};
use crate::oscillation::{
    blo_seminorm, bmo_seminorm, default_family, default_seminorm_family, fujii_wilson, seminorm_naive, SeminormReport,
    WeightConstants,
};
use crate::report::{fmt_f64, grid_digest, sha256_hex, to_json, CsvTable};
use crate::verify::checks::{suite_checks, Check};
use crate::verify::suite::{
    calibration_freeze, run_suite, stability_report, Calibration, Parts, SuiteConfig,
};
use crate::verify::{
    char_lower_bound, default_t_grid, ratio_field, tail_profile_from, weighted_power_mean, Distribution,
    FunctionFields,
};
use crate::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;
pub const EXIT_STALE: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;

/// Relative tolerance of `--oracle` comparisons.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

const DEFAULT_CALIBRATION: &str = include_str!("../calibration/default.json");
const QUICK_CALIBRATION: &str = include_str!("../calibration/quick.json");

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Oracle(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Failed(_) => EXIT_USAGE,
            CliError::Oracle(_) => EXIT_ORACLE,
            CliError::Lib(e) => match e {
                Error::StaleCalibration { .. } => EXIT_STALE,
                Error::DegenerateInput(_)
                | Error::NonPositiveWeight { .. }
                | Error::Domain(_)
                | Error::Parse { .. }
                | Error::InvalidGrid(_) => EXIT_DEGENERATE,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Oracle(m) => write!(f, "oracle mismatch: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_mode(s: &str) -> Result<BoundaryMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<CubeFamily, String> {
    match s {
        "all" => Ok(CubeFamily::All),
        "dyadic" => Ok(CubeFamily::Dyadic),
        _ => Err(format!("unknown family {s:?} (expected all or dyadic)")),
    }
}

#[derive(Parser, Debug)]
#[command(name = "oslx", version, about = "Maximal functions, oscillation seminorms and A-infinity constants on grids")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Boundary mode: restricted, zero or dyadic.
    #[arg(long, global = true, default_value = "restricted", value_parser = parse_mode)]
    pub mode: BoundaryMode,
    /// Cube family for suprema: all or dyadic. Defaults by grid size.
    #[arg(long, global = true, value_parser = parse_family)]
    pub family: Option<CubeFamily>,
    /// Cells per axis for generated grids.
    #[arg(long, global = true, default_value_t = 64)]
    pub n: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Calibration file; the shipped one for the suite when omitted.
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    /// Raise weight entries below this value to it instead of rejecting them.
    #[arg(long, global = true)]
    pub floor: Option<f64>,
    /// Compare fast results with brute-force twins.
    #[arg(long, global = true)]
    pub oracle: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a corpus grid and its manifest.
    Gen {
        #[command(subcommand)]
        generator: GenKind,
        #[arg(long, global = true, value_enum, default_value_t = FileFormat::Csv)]
        format: FileFormat,
    },
    /// Maximal and sharp maximal fields and seminorms of a grid.
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
        format: FileFormat,
    },
    /// A1 and Fujii-Wilson constants of a weight.
    Constants {
        #[arg(long)]
        weight: PathBuf,
    },
    /// Run a criterion suite against the calibration.
    Verify {
        #[arg(value_enum)]
        what: VerifyWhat,
        #[arg(long, default_value = "default")]
        suite: String,
        /// Weight file for `verify char`.
        #[arg(long)]
        weight: Option<PathBuf>,
    },
    /// Cartesian sweeps emitting CSV.
    Sweep {
        #[command(subcommand)]
        axis: SweepAxis,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Csv,
    Bin,
}

impl FileFormat {
    fn grid_format(self) -> GridFormat {
        match self {
            FileFormat::Csv => GridFormat::Csv,
            FileFormat::Bin => GridFormat::Binary,
        }
    }

    fn ext(self) -> &'static str {
        match self {
            FileFormat::Csv => "csv",
            FileFormat::Bin => "bin",
        }
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum GenKind {
    /// Indicator of a half-space and its analytic maximal function.
    HalfSpace {
        #[arg(long, default_value_t = 0)]
        axis: usize,
        /// First cell inside the half-space; N/2 by default.
        #[arg(long)]
        boundary: Option<usize>,
    },
    /// `log |x - c|`.
    LogAbs {
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
    },
    /// `|x - c|^a`.
    PowerWeight {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
    },
    /// 1 below the midpoint of an axis, `k` above.
    TwoValued {
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long)]
        k: f64,
    },
    /// Random dyadic martingale with bounded jumps.
    RandomDyadicBmo {
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// `(M mu)^delta` for a random point mass.
    A1Family {
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
    /// Unit weight with one raised cell.
    Spike {
        #[arg(long, value_delimiter = ',')]
        cell: Vec<usize>,
        #[arg(long)]
        height: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyWhat {
    Thm1,
    Cp,
    Tails,
    Goodlambda,
    Probe,
    Holder,
    Char,
    X,
    All,
    Freeze,
    Stability,
}

impl VerifyWhat {
    fn parts(self) -> Parts {
        let none = Parts::NONE;
        match self {
            VerifyWhat::Thm1 => Parts { thm1: true, ..none },
            VerifyWhat::Cp => Parts { cp: true, ..none },
            VerifyWhat::Tails => Parts { tails: true, ..none },
            VerifyWhat::Goodlambda => Parts { good_lambda: true, ..none },
            VerifyWhat::Probe => Parts { probe: true, ..none },
            VerifyWhat::Holder => Parts { machinery: true, ..none },
            VerifyWhat::Char => Parts { char_bound: true, ..none },
            VerifyWhat::X => Parts { x: true, ..none },
            VerifyWhat::All | VerifyWhat::Freeze | VerifyWhat::Stability => Parts::ALL,
        }
    }

    fn name(self) -> &'static str {
        match self {
            VerifyWhat::Thm1 => "thm1",
            VerifyWhat::Cp => "cp",
            VerifyWhat::Tails => "tails",
            VerifyWhat::Goodlambda => "goodlambda",
            VerifyWhat::Probe => "probe",
            VerifyWhat::Holder => "holder",
            VerifyWhat::Char => "char",
            VerifyWhat::X => "x",
            VerifyWhat::All => "all",
            VerifyWhat::Freeze => "freeze",
            VerifyWhat::Stability => "stability",
        }
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum SweepAxis {
    /// Oscillation ratio of one pair over exponents `p`.
    P {
        #[arg(long)]
        f: PathBuf,
        /// Weight file; the unit weight when omitted.
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// `anchor[,anchor]:side`; the whole domain when omitted.
        #[arg(long)]
        cube: Option<String>,
    },
    /// Power weights `|x - c|^a` over exponents `a`.
    A {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
    },
    /// One power weight over resolutions.
    N {
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
    },
    /// Level-set masses `t -> w(E_t)/w(Q)` of one pair.
    T {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        cube: Option<String>,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
}

/// Everything a run depends on besides its input files.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<InputRef>,
    pub mode: BoundaryMode,
    pub family: Option<CubeFamily>,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    pub p: Vec<f64>,
    pub t_points: Option<usize>,
    pub out: Option<String>,
    pub calibration: Option<String>,
    pub floor: Option<f64>,
    pub oracle: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

impl RunConfig {
    fn new(command: impl Into<String>, g: &Global) -> Self {
        RunConfig {
            command: command.into(),
            inputs: Vec::new(),
            mode: g.mode,
            family: g.family,
            n: g.n,
            dim: g.dim,
            seed: g.seed,
            p: Vec::new(),
            t_points: None,
            out: g.out.as_ref().map(|p| p.display().to_string()),
            calibration: g.calibration.as_ref().map(|p| p.display().to_string()),
            floor: g.floor,
            oracle: g.oracle,
        }
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable lines to `stdout`.
pub fn run_from<I, T>(args: I, stdout: &mut dyn std::io::Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(&cli, stdout) {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("oslx: {e}");
            e.code()
        }
    }
}

pub fn main() -> ExitCode {
    let mut out = std::io::stdout().lock();
    ExitCode::from(run_from(std::env::args_os(), &mut out))
}

fn configure_threads() {
    if let Some(n) = std::env::var("OSLX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let g = &cli.global;
    if g.dim != 1 && g.dim != 2 {
        return Err(CliError::Usage(format!("--dim must be 1 or 2, got {}", g.dim)));
    }
    match &cli.command {
        Command::Gen { generator, format } => cmd_gen(g, generator, *format, stdout),
        Command::Eval { input, format } => cmd_eval(g, input, *format, stdout),
        Command::Constants { weight } => cmd_constants(g, weight, stdout),
        Command::Verify { what, suite, weight } => cmd_verify(g, *what, suite, weight.as_deref(), stdout),
        Command::Sweep { axis } => cmd_sweep(g, axis, stdout),
    }
}

fn say(stdout: &mut dyn std::io::Write, line: impl AsRef<str>) -> CliResult<()> {
    writeln!(stdout, "{}", line.as_ref()).map_err(|e| CliError::Lib(e.into()))
}

fn out_dir(g: &Global) -> CliResult<PathBuf> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(Error::from)?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(Error::from)?;
    Ok(())
}

fn input_ref(path: &Path) -> CliResult<InputRef> {
    let bytes = fs::read(path).map_err(Error::from)?;
    Ok(InputRef {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn center(values: &[f64], dim: usize) -> CliResult<[f64; 2]> {
    match values.len() {
        0 => Ok([0.5, if dim == 2 { 0.5 } else { 0.0 }]),
        k if k == dim => Ok([values[0], if dim == 2 { values[1] } else { 0.0 }]),
        k => Err(CliError::Usage(format!("--center needs {dim} coordinates, got {k}"))),
    }
}

/// `a0[,a1]:side`.
pub fn parse_cube(spec: &str, dim: usize) -> CliResult<GridCube> {
    let bad = || CliError::Usage(format!("cube {spec:?} is not of the form anchor[,anchor]:side"));
    let (anchor, side) = spec.split_once(':').ok_or_else(bad)?;
    let side: usize = side.trim().parse().map_err(|_| bad())?;
    let anchor: Vec<i64> = anchor
        .split(',')
        .map(|a| a.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    if anchor.len() != dim {
        return Err(bad());
    }
    Ok(GridCube::new(dim, &anchor, side)?)
}

fn read_weight(path: &Path, floor: Option<f64>) -> CliResult<Weight> {
    let g = read_grid(path)?;
    let g = match floor {
        Some(fl) if fl > 0.0 => g.map(|v| v.max(fl))?,
        Some(fl) => return Err(CliError::Usage(format!("--floor must be positive, got {fl}"))),
        None => g,
    };
    Ok(Weight::new(g)?)
}

#[derive(Serialize)]
struct ManifestFile {
    role: &'static str,
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    config: RunConfig,
    generator: Generator,
    seed: Option<u64>,
    files: Vec<ManifestFile>,
}

fn generator_for(g: &Global, kind: &GenKind) -> CliResult<Generator> {
    let (n, dim) = (g.n, g.dim);
    Ok(match kind {
        GenKind::HalfSpace { axis, boundary } => Generator::HalfSpace {
            n,
            dim,
            axis: *axis,
            boundary_cell: boundary.unwrap_or(n / 2),
        },
        GenKind::LogAbs { center: c } => Generator::LogAbs { n, dim, center: center(c, dim)? },
        GenKind::PowerWeight { a, center: c } => Generator::PowerWeight {
            n,
            dim,
            exponent: *a,
            center: center(c, dim)?,
        },
        GenKind::TwoValued { axis, k } => Generator::TwoValued { n, dim, axis: *axis, k: *k },
        GenKind::RandomDyadicBmo { depth, amplitude } => Generator::RandomDyadicBmo {
            n,
            dim,
            depth: *depth,
            amplitude: *amplitude,
            seed: g.seed,
        },
        GenKind::A1Family { delta } => Generator::A1Family { n, dim, delta: *delta, seed: g.seed },
        GenKind::Spike { cell, height } => {
            let cell = match cell.len() {
                0 => [n / 2, if dim == 2 { n / 2 } else { 0 }],
                k if k == dim => [cell[0], if dim == 2 { cell[1] } else { 0 }],
                k => return Err(CliError::Usage(format!("--cell needs {dim} indices, got {k}"))),
            };
            Generator::Spike { n, dim, cell, height: *height }
        }
    })
}

fn cmd_gen(g: &Global, kind: &GenKind, format: FileFormat, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let generator = generator_for(g, kind)?;
    let dir = out_dir(g)?;
    let name = generator.name();
    let mut grids: Vec<(&'static str, String, GridFunction)> = Vec::new();
    if let Generator::HalfSpace { n, dim, axis, boundary_cell } = generator {
        let ex = half_space_example(n, dim, axis, boundary_cell)?;
        grids.push(("f", format!("{name}.{}", format.ext()), ex.grid_values));
        grids.push(("analytic_maximal", format!("{name}_mf.{}", format.ext()), ex.analytic_maximal));
    } else {
        let role = if generator.is_weight() { "weight" } else { "f" };
        grids.push((role, format!("{name}.{}", format.ext()), generator.generate()?));
    }
    let mut files = Vec::new();
    for (role, file, grid) in &grids {
        let path = dir.join(file);
        write_grid(&path, grid, format.grid_format())?;
        files.push(ManifestFile {
            role,
            path: file.clone(),
            sha256: input_ref(&path)?.sha256,
        });
        say(stdout, format!("wrote {}", path.display()))?;
    }
    let manifest = Manifest {
        config: RunConfig::new(format!("gen {name}"), g),
        seed: generator.seed(),
        generator,
        files,
    };
    let path = dir.join(format!("{name}.manifest.json"));
    write_text(&path, &to_json(&manifest)?)?;
    say(stdout, format!("wrote {}", path.display()))
}

#[derive(Serialize)]
struct OracleReport {
    tolerance: f64,
    maximal: f64,
    sharp: f64,
    bmo: f64,
    blo: f64,
    ok: bool,
}

#[derive(Serialize)]
struct EvalReport {
    config: RunConfig,
    mode: BoundaryMode,
    family: CubeFamily,
    maximal_file: String,
    sharp_file: String,
    maximal_truncation_bound: Option<f64>,
    sharp_truncation_bound: Option<f64>,
    bmo: SeminormReport,
    blo: SeminormReport,
    oracle: Option<OracleReport>,
}

fn rel(a: f64, b: f64) -> f64 {
    max_relative_error(&[a], &[b])
}

fn cmd_eval(g: &Global, input: &Path, format: FileFormat, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let f = read_grid(input)?;
    let family = g.family.unwrap_or_else(|| default_seminorm_family(f.resolution(), f.dim()));
    let mf = maximal(&f, g.mode);
    let ms = sharp_maximal(&f, g.mode);
    let bmo = bmo_seminorm(&f, family);
    let blo = blo_seminorm(&f, family);
    let oracle = g.oracle.then(|| {
        let m = max_relative_error(mf.values(), maximal_naive(&f, g.mode).values());
        let s = max_relative_error(ms.values(), sharp_maximal_naive(&f, g.mode).values());
        let b = rel(bmo.value, seminorm_naive(&f, None, false, family));
        let l = rel(blo.value, seminorm_naive(&f, None, true, family));
        OracleReport {
            tolerance: ORACLE_TOLERANCE,
            maximal: m,
            sharp: s,
            bmo: b,
            blo: l,
            ok: [m, s, b, l].iter().all(|e| *e <= ORACLE_TOLERANCE),
        }
    });
    let dir = out_dir(g)?;
    let (mfile, sfile) = (format!("mf.{}", format.ext()), format!("msharp.{}", format.ext()));
    write_grid(&dir.join(&mfile), &mf.field, format.grid_format())?;
    write_grid(&dir.join(&sfile), &ms.field, format.grid_format())?;
    let mut config = RunConfig::new("eval", g);
    config.inputs.push(input_ref(input)?);
    config.family = Some(family);
    let report = EvalReport {
        config,
        mode: g.mode,
        family,
        maximal_file: mfile,
        sharp_file: sfile,
        maximal_truncation_bound: mf.truncation_bound,
        sharp_truncation_bound: ms.truncation_bound,
        bmo,
        blo,
        oracle,
    };
    write_text(&dir.join("eval.json"), &to_json(&report)?)?;
    say(stdout, format!("mode {} family {}", g.mode, family))?;
    say(stdout, format!("bmo {} at {}", fmt_f64(report.bmo.value), report.bmo.witness))?;
    say(stdout, format!("blo {} at {}", fmt_f64(report.blo.value), report.blo.witness))?;
    if let Some(o) = &report.oracle {
        let line = format!(
            "oracle maximal {:.3e} sharp {:.3e} bmo {:.3e} blo {:.3e}",
            o.maximal, o.sharp, o.bmo, o.blo
        );
        say(stdout, &line)?;
        if !o.ok {
            return Err(CliError::Oracle(line));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CalibrationMatch {
    group: String,
    w_ref: String,
    equal: bool,
}

#[derive(Serialize)]
struct ConstantsReport {
    config: RunConfig,
    digest: String,
    constants: WeightConstants,
    calibration: Option<CalibrationMatch>,
}

fn load_calibration(g: &Global, suite: &str) -> CliResult<Calibration> {
    match &g.calibration {
        Some(p) => Ok(Calibration::load(p)?),
        None => {
            let text = match suite {
                "default" => DEFAULT_CALIBRATION,
                "quick" => QUICK_CALIBRATION,
                _ => return Err(CliError::Usage(format!("no shipped calibration for suite {suite:?}"))),
            };
            Ok(serde_json::from_str(text).map_err(Error::from)?)
        }
    }
}

fn cmd_constants(g: &Global, weight: &Path, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let w = read_weight(weight, g.floor)?;
    let family = g.family.unwrap_or_else(|| default_family(w.resolution(), w.dim()));
    let constants = fujii_wilson(&w, g.mode, family);
    let digest = grid_digest(&w);
    let calibration = match &g.calibration {
        Some(_) => {
            let cal = load_calibration(g, "default")?;
            cal.find_weight(&digest).map(|(k, s)| CalibrationMatch {
                group: k.to_string(),
                w_ref: s.w_ref.clone(),
                equal: s.constants == constants,
            })
        }
        None => None,
    };
    let mut config = RunConfig::new("constants", g);
    config.inputs.push(input_ref(weight)?);
    config.family = Some(family);
    let report = ConstantsReport {
        config,
        digest,
        constants,
        calibration,
    };
    let text = to_json(&report)?;
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        write_text(&dir.join("constants.json"), &text)?;
    }
    write!(stdout, "{text}").map_err(|e| CliError::Lib(e.into()))?;
    if let Some(m) = &report.calibration {
        if !m.equal {
            return Err(CliError::Oracle(format!(
                "constants differ from frozen {} in group {}",
                m.w_ref, m.group
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a, R: Serialize> {
    config: RunConfig,
    suite: String,
    corpus_hash: String,
    checks: &'a [Check],
    details: R,
}

fn cmd_verify(
    g: &Global,
    what: VerifyWhat,
    suite_name: &str,
    weight: Option<&Path>,
    stdout: &mut dyn std::io::Write,
) -> CliResult<()> {
    let mut config = RunConfig::new(format!("verify {}", what.name()), g);
    if let (VerifyWhat::Char, Some(path)) = (what, weight) {
        let w = read_weight(path, g.floor)?;
        config.inputs.push(input_ref(path)?);
        let c = char_lower_bound(&w)?;
        let line = format!(
            "{} [3] {}: favorable half carries at least half the weight (value {} on {} half of {})",
            if c.ok { "PASS" } else { "FAIL" },
            path.display(),
            fmt_f64(c.value),
            if c.upper { "upper" } else { "lower" },
            c.cube
        );
        say(stdout, &line)?;
        if let Some(dir) = &g.out {
            fs::create_dir_all(dir).map_err(Error::from)?;
            let checks: [Check; 0] = [];
            let report = VerifyReport {
                config,
                suite: String::new(),
                corpus_hash: String::new(),
                checks: &checks,
                details: &c,
            };
            write_text(&dir.join("verify_char.json"), &to_json(&report)?)?;
        }
        return if c.ok { Ok(()) } else { Err(CliError::Failed(line)) };
    }

    let suite = SuiteConfig::named(suite_name).map_err(|e| CliError::Usage(e.to_string()))?;
    if what == VerifyWhat::Freeze {
        let report = run_suite(&suite, Parts::ALL)?;
        let cal = calibration_freeze(&suite, &report)?;
        let path = match &g.calibration {
            Some(p) => p.clone(),
            None => out_dir(g)?.join(format!("{}.json", suite.name)),
        };
        cal.save(&path)?;
        say(stdout, format!("froze {} groups of suite {} to {}", cal.groups.len(), suite.name, path.display()))?;
        return Ok(());
    }

    let cal = load_calibration(g, suite_name)?;
    cal.check_hash(&suite)?;
    let parts = what.parts();
    let report = run_suite(&suite, parts)?;

    if what == VerifyWhat::Stability {
        let rows = stability_report(&suite, &report)?;
        for r in &rows {
            say(
                stdout,
                format!(
                    "{} {} {}: {} -> {} ({:.2}% change)",
                    if r.within { "STABLE" } else { "DRIFT" },
                    r.group,
                    r.name,
                    fmt_f64(r.base),
                    fmt_f64(r.doubled),
                    100.0 * r.relative_change
                ),
            )?;
        }
        if let Some(dir) = &g.out {
            fs::create_dir_all(dir).map_err(Error::from)?;
            let report = VerifyReport {
                config,
                suite: suite.name.clone(),
                corpus_hash: suite.hash(),
                checks: &[],
                details: &rows,
            };
            write_text(&dir.join("verify_stability.json"), &to_json(&report)?)?;
        }
        return Ok(());
    }

    let checks = suite_checks(&suite, &report, &cal, parts)?;
    for c in &checks {
        say(stdout, c.line())?;
    }
    if what == VerifyWhat::Goodlambda {
        let per_pair = suite.groups.first().map_or(0, |g| g.good_lambda_trials);
        say(stdout, format!("{} (lambda, gamma) checks, {per_pair} per pair", report.groups.iter().map(|g| g.good_lambda.len()).sum::<usize>()))?;
    }
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        let out = VerifyReport {
            config,
            suite: suite.name.clone(),
            corpus_hash: suite.hash(),
            checks: &checks,
            details: &report,
        };
        write_text(&dir.join(format!("verify_{}.json", what.name())), &to_json(&out)?)?;
    }
    let failed = checks.iter().filter(|c| !c.ok).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn pair_inputs(g: &Global, f: &Path, w: Option<&Path>, cube: Option<&str>) -> CliResult<(GridFunction, Weight, GridCube)> {
    let f = read_grid(f)?;
    let w = match w {
        Some(p) => read_weight(p, g.floor)?,
        None => Weight::unit(f.dim(), f.resolution())?,
    };
    if w.shape() != f.shape() {
        return Err(CliError::Usage("f and w must share a grid".into()));
    }
    let q = match cube {
        Some(s) => parse_cube(s, f.dim())?,
        None => GridCube::whole(f.dim(), f.resolution()),
    };
    q.check_within(f.shape())?;
    Ok((f, w, q))
}

fn cmd_sweep(g: &Global, axis: &SweepAxis, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let mut config = RunConfig::new("sweep", g);
    let (name, table) = match axis {
        SweepAxis::P { f, w, p, cube } => {
            if p.is_empty() {
                return Err(CliError::Usage("empty p axis".into()));
            }
            if let Some(bad) = p.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
                return Err(CliError::Usage(format!("p must be at least 1, got {bad}")));
            }
            config.command = "sweep p".into();
            config.p = p.clone();
            config.inputs.push(input_ref(f)?);
            if let Some(w) = w {
                config.inputs.push(input_ref(w)?);
            }
            let (fg, wg, q) = pair_inputs(g, f, w.as_deref(), cube.as_deref())?;
            let family = g.family.unwrap_or_else(|| default_family(wg.resolution(), wg.dim()));
            let fields = FunctionFields::compute(&fg, g.mode)?;
            let ratio = ratio_field(&fields, &q)?;
            let a_infty = fujii_wilson(&wg, g.mode, family).a_infty;
            let mut t = CsvTable::new(&["p", "lhs", "a_infty", "normalized"]);
            for &pv in p {
                let lhs = weighted_power_mean(&ratio, &wg, pv);
                t.push(vec![fmt_f64(pv), fmt_f64(lhs), fmt_f64(a_infty), fmt_f64(lhs / (pv * a_infty))]);
            }
            ("p", t)
        }
        SweepAxis::A { a, center: c } => {
            if a.is_empty() {
                return Err(CliError::Usage("empty a axis".into()));
            }
            config.command = "sweep a".into();
            let c = center(c, g.dim)?;
            let family = g.family.unwrap_or_else(|| default_family(g.n, g.dim));
            let mut t = CsvTable::new(&["a", "family", "a1", "a_infty"]);
            for &av in a {
                let w = power_weight(g.n, g.dim, av, c)?;
                let k = fujii_wilson(&w, g.mode, family);
                t.push(vec![fmt_f64(av), family.to_string(), fmt_f64(k.a1), fmt_f64(k.a_infty)]);
            }
            ("a", t)
        }
        SweepAxis::N { ns, a, center: c } => {
            if ns.is_empty() {
                return Err(CliError::Usage("empty n axis".into()));
            }
            config.command = "sweep n".into();
            let c = center(c, g.dim)?;
            let mut t = CsvTable::new(&["n", "family", "a1", "a_infty"]);
            for &n in ns {
                let w = power_weight(n, g.dim, *a, c)?;
                let family = g.family.unwrap_or_else(|| default_family(n, g.dim));
                let k = fujii_wilson(&w, g.mode, family);
                t.push(vec![n.to_string(), family.to_string(), fmt_f64(k.a1), fmt_f64(k.a_infty)]);
            }
            ("n", t)
        }
        SweepAxis::T { f, w, cube, points } => {
            if *points < 2 {
                return Err(CliError::Usage("t axis needs at least two points".into()));
            }
            config.command = "sweep t".into();
            config.t_points = Some(*points);
            config.inputs.push(input_ref(f)?);
            if let Some(w) = w {
                config.inputs.push(input_ref(w)?);
            }
            let (fg, wg, q) = pair_inputs(g, f, w.as_deref(), cube.as_deref())?;
            let fields = FunctionFields::compute(&fg, g.mode)?;
            let dist = Distribution::new(&ratio_field(&fields, &q)?, &wg);
            let prof = tail_profile_from(&dist, &default_t_grid(dist.max_ratio(), *points));
            let rate = prof.fitted_rate.map_or_else(|| "nan".to_string(), fmt_f64);
            let mut t = CsvTable::new(&["t", "mass", "fitted_rate"]);
            for (tv, m) in prof.t_grid.iter().zip(&prof.mass) {
                t.push(vec![fmt_f64(*tv), fmt_f64(*m), rate.clone()]);
            }
            ("t", t)
        }
    };
    let text = table.render();
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        write_text(&dir.join(format!("sweep_{name}.csv")), &text)?;
        write_text(&dir.join(format!("sweep_{name}.json")), &to_json(&config)?)?;
    }
    write!(stdout, "{text}").map_err(|e| CliError::Lib(e.into()))?;
    Ok(())
}
