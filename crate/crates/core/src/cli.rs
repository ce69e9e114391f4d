//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input or usage, 3 a counting identity failed.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::builtins::{builtin_framework, BUILTIN_NAMES};
use crate::io::{
    analyze, emit_report, parse_framework, parse_matrix_space, render_svg, serialize_framework,
    AnalysisOptions, ReportFormat, SvgOptions,
};
use crate::lattice::{CellRange, CrystalFramework};
use crate::rigidity::MatrixSpace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "crystal-rigidity",
    version,
    about = "Rigidity analysis of periodic bar-joint frameworks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flex, stress and rigid-motion counts.
    Analyze(AnalyzeArgs),
    /// Symmetry-adapted counts for declared space-group elements.
    Symmetry(SymmetryArgs),
    /// Write the framework with an enlarged period lattice.
    Supercell(SupercellArgs),
    /// Draw a planar fragment.
    Svg(SvgArgs),
    /// List the built-in frameworks.
    Builtins,
}

#[derive(Args, Debug)]
struct Source {
    /// Framework file (JSON).
    file: Option<PathBuf>,
    /// Use a built-in framework instead of a file.
    #[arg(long, value_name = "NAME", conflicts_with = "file")]
    builtin: Option<String>,
    /// Tolerance for rank decisions and geometric matching.
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    /// strict, affine, or `space SPEC` with SPEC one of zero, full,
    /// symmetric, skew, diagonal, custom:FILE. Default: strict and affine.
    #[arg(long, num_args = 1..=2, value_names = ["MODE", "SPEC"])]
    mode: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SymmetryArgs {
    #[command(flatten)]
    source: Source,
    /// Only this declared element.
    #[arg(long, value_name = "NAME")]
    element: Option<String>,
    /// Add character rows for the identity and the element on E_g.
    #[arg(long)]
    characters: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SupercellArgs {
    #[command(flatten)]
    source: Source,
    /// Multiplicities n1,...,nd.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    n: Vec<i64>,
    #[arg(short, long, value_name = "OUT")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SvgArgs {
    #[command(flatten)]
    source: Source,
    /// `3x3` for cells [0,3) x [0,3), or inclusive bounds `lo:hi,lo:hi`.
    #[arg(long, value_name = "RANGE", default_value = "1x1")]
    cells: String,
    #[arg(short, long, value_name = "OUT.svg")]
    output: Option<PathBuf>,
    /// Omit edges that leave the box.
    #[arg(long)]
    no_dangling: bool,
}

/// What a command printed and the process exit code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Framework = CrystalFramework<f64>;

fn load(source: &Source) -> Result<Framework, InputError> {
    let fw = match (&source.file, &source.builtin) {
        (_, Some(name)) => builtin_framework::<f64>(name)?,
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            parse_framework::<f64>(&text)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?
        }
        (None, None) => {
            return Err(InputError(
                "expected a framework file or --builtin NAME".into(),
            ))
        }
    };
    match source.tol {
        Some(t) if t > 0.0 && t.is_finite() => Ok(fw.with_tolerance(t)),
        Some(t) => Err(InputError(format!("tolerance must be positive, got {t}"))),
        None => Ok(fw),
    }
}

fn parse_space(spec: &str, fw: &Framework) -> Result<MatrixSpace<f64>, InputError> {
    if let Some(path) = spec.strip_prefix("custom:") {
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?;
        return parse_matrix_space(&text, fw.dim(), fw.tol())
            .map_err(|e| InputError(format!("{path}: {e}")));
    }
    MatrixSpace::named(spec, fw.dim()).ok_or_else(|| {
        InputError(format!(
            "unknown space {spec:?}; expected zero, full, symmetric, skew, diagonal or custom:FILE"
        ))
    })
}

fn spaces(mode: &[String], fw: &Framework) -> Result<Vec<MatrixSpace<f64>>, InputError> {
    let d = fw.dim();
    match mode {
        [] => Ok(vec![MatrixSpace::zero(d), MatrixSpace::full(d)]),
        [m] if m == "strict" => Ok(vec![MatrixSpace::zero(d)]),
        [m] if m == "affine" => Ok(vec![MatrixSpace::full(d)]),
        [m, spec] if m == "space" => Ok(vec![parse_space(spec, fw)?]),
        [m] if m == "space" => Err(InputError("--mode space needs a SPEC".into())),
        _ => Err(InputError(format!(
            "unknown mode {:?}; expected strict, affine or space SPEC",
            mode.join(" ")
        ))),
    }
}

/// Parses `3x3` (counts from zero) or `lo:hi,lo:hi` (inclusive bounds).
pub fn parse_cell_range(text: &str, d: usize) -> Option<CellRange> {
    let range = if text.contains(':') {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in text.split(',') {
            let (a, b) = part.split_once(':')?;
            lo.push(a.trim().parse().ok()?);
            hi.push(b.trim().parse().ok()?);
        }
        CellRange::new(lo, hi).ok()?
    } else {
        let counts: Option<Vec<i64>> = text
            .split(['x', ','])
            .map(|s| s.trim().parse().ok())
            .collect();
        CellRange::from_counts(&counts?).ok()?
    };
    (range.dim() == d).then_some(range)
}

fn write_or_return(output: &Option<PathBuf>, content: String) -> Result<String, InputError> {
    match output {
        Some(path) => {
            write_file(path, &content)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(content),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), InputError> {
    std::fs::write(path, content).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn format_of(json: bool) -> ReportFormat {
    if json {
        ReportFormat::Json
    } else {
        ReportFormat::Text
    }
}

fn report_outcome(report: crate::io::AnalysisReport, json: bool) -> CliOutcome {
    let stdout = emit_report(&report, format_of(json));
    if report.is_consistent() {
        CliOutcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    } else {
        CliOutcome {
            code: EXIT_INCONSISTENT,
            stdout,
            stderr: format!(
                "internal inconsistency: {}\n",
                report.inconsistencies.join("; ")
            ),
        }
    }
}

fn execute(command: Command) -> Result<CliOutcome, InputError> {
    let ok = |stdout: String| CliOutcome {
        code: EXIT_OK,
        stdout,
        stderr: String::new(),
    };
    match command {
        Command::Builtins => {
            let mut out = String::new();
            for name in BUILTIN_NAMES {
                let fw = builtin_framework::<f64>(name)?;
                let syms: Vec<&str> = fw.symmetries().iter().map(|g| g.name()).collect();
                out.push_str(&format!(
                    "{name}: d={} |Fv|={} |Fe|={} symmetries=[{}]\n",
                    fw.dim(),
                    fw.vertex_count(),
                    fw.edge_count(),
                    syms.join(", ")
                ));
            }
            Ok(ok(out))
        }
        Command::Analyze(mut args) => {
            if args.mode.len() == 2 && args.mode[0] != "space" && args.source.file.is_none() {
                args.source.file = args.mode.pop().map(PathBuf::from);
            }
            let fw = load(&args.source)?;
            let options = AnalysisOptions {
                spaces: spaces(&args.mode, &fw)?,
                symmetries: None,
                characters: false,
            };
            Ok(report_outcome(analyze(&fw, &options)?, args.json))
        }
        Command::Symmetry(args) => {
            let fw = load(&args.source)?;
            if let Some(name) = &args.element {
                if fw.symmetry(name).is_none() {
                    let known: Vec<&str> = fw.symmetries().iter().map(|g| g.name()).collect();
                    return Err(InputError(format!(
                        "no declared symmetry {name:?} (declared: [{}])",
                        known.join(", ")
                    )));
                }
            }
            let options = AnalysisOptions {
                spaces: Vec::new(),
                symmetries: args.element.map(|n| vec![n]),
                characters: args.characters,
            };
            let mut outcome = report_outcome(analyze(&fw, &options)?, args.json);
            if fw.symmetries().is_empty() {
                outcome.stderr.push_str("no symmetries declared\n");
            }
            Ok(outcome)
        }
        Command::Supercell(args) => {
            let fw = load(&args.source)?;
            let sc = fw.supercell(&args.n)?;
            Ok(ok(write_or_return(&args.output, serialize_framework(&sc))?))
        }
        Command::Svg(args) => {
            let fw = load(&args.source)?;
            let range = parse_cell_range(&args.cells, fw.dim()).ok_or_else(|| {
                InputError(format!(
                    "bad cell range {:?} for dimension {}",
                    args.cells,
                    fw.dim()
                ))
            })?;
            let options = SvgOptions {
                dangling: !args.no_dangling,
                ..SvgOptions::default()
            };
            let svg = render_svg(&fw, &range, &options)?;
            Ok(ok(write_or_return(&args.output, svg)?))
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, S>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(outcome) => outcome,
        Err(e) => CliOutcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
