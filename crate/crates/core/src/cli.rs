//! Command-line front end.
//!
//! Exit codes: 0 when no finding reaches the fail threshold, 1 when one
//! does, 2 on any usage, input or analysis error.

use std::ffi::OsString;
use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::dpv::{load_dpv_map, DpvError, DpvMap};
use crate::ir::{parse_program, print_program, validate, ParseError, Program, Severity};
use crate::pipeline::{analyze, PipelineError};
use crate::registry::{load_registries, Registries, RegistryError, RegistryPaths};
use crate::report::{exceeds_threshold, render_text, RiskConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

const DEFAULT_OUT: &str = "pdaudit-out";

#[derive(Debug, Parser)]
#[command(name = "pdaudit", version, about = "Audit personal-data flows in PIR programs")]
struct Cli {
    /// Print errors as JSON objects on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full analysis and write the report.
    Analyze(AnalyzeArgs),
    /// Check the program and the registries without analysing.
    Validate(ValidateArgs),
    /// Print the program in canonical form.
    Print {
        input: PathBuf,
    },
}

#[derive(Debug, Args, Default)]
struct RegistryArgs {
    /// Source registry (JSON). Each registry falls back to a bundled file.
    #[arg(long, value_name = "FILE")]
    sources: Option<PathBuf>,
    /// Sink registry (JSON).
    #[arg(long, value_name = "FILE")]
    sinks: Option<PathBuf>,
    /// Sanitizer registry (JSON).
    #[arg(long, value_name = "FILE")]
    sanitizers: Option<PathBuf>,
    /// Personal-data keyword lexicon (JSON).
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Data-protection vocabulary map (JSON).
    #[arg(long, value_name = "FILE")]
    dpv: Option<PathBuf>,
    /// TOML or JSON file with the same keys as the flags; flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[command(flatten)]
    registries: RegistryArgs,
    /// Output directory for report.json and the slice graphs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Exit 1 when a finding's risk is at least this value.
    #[arg(long, value_name = "RISK")]
    fail_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    input: PathBuf,
    #[command(flatten)]
    registries: RegistryArgs,
}

/// Contents of a `--config` file. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sources: Option<PathBuf>,
    sinks: Option<PathBuf>,
    sanitizers: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    dpv: Option<PathBuf>,
    out: Option<PathBuf>,
    fail_threshold: Option<f64>,
    #[serde(default)]
    risk: RiskConfig,
}

/// Settings after merging the config file and the flags.
#[derive(Debug, Default)]
struct Config {
    registry_paths: RegistryPaths,
    dpv: Option<PathBuf>,
    out: Option<PathBuf>,
    fail_threshold: Option<f64>,
    risk: RiskConfig,
}

struct CliError {
    kind: &'static str,
    message: String,
    file: Option<String>,
    line: Option<u32>,
    col: Option<u32>,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            file: None,
            line: None,
            col: None,
        }
    }

    fn in_file(mut self, path: &Path) -> Self {
        self.file = Some(path.display().to_string());
        self
    }

    fn emit(&self, as_json: bool, err: &mut dyn Write) {
        if as_json {
            let v = json!({
                "error": {
                    "kind": self.kind,
                    "message": self.message,
                    "file": self.file,
                    "line": self.line,
                    "col": self.col,
                }
            });
            let _ = writeln!(err, "{v}");
            return;
        }
        let mut prefix = String::new();
        if let Some(f) = &self.file {
            prefix.push_str(f);
            if let (Some(l), Some(c)) = (self.line, self.col) {
                prefix.push_str(&format!(":{l}:{c}"));
            }
            prefix.push_str(": ");
        }
        let _ = writeln!(err, "pdaudit: {prefix}{}: {}", self.kind, self.message);
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        CliError::new("registry", e.to_string())
    }
}

impl From<DpvError> for CliError {
    fn from(e: DpvError) -> Self {
        CliError::new("dpv", e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let kind = match e {
            PipelineError::InvalidProgram(_) => "invalid_program",
            _ => "analysis",
        };
        CliError::new(kind, e.to_string())
    }
}

fn read_program(path: &Path) -> Result<Program, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("cannot read input: {e}")).in_file(path))?;
    parse_program(&text).map_err(|e: ParseError| {
        let mut err = CliError::new("parse", e.to_string()).in_file(path);
        if let Some((line, col)) = e.position() {
            err.line = Some(line);
            err.col = Some(col);
        }
        err
    })
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let bad = |m: String| CliError::new("config", m).in_file(path);
    let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read config: {e}")))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let mut cfg: ConfigFile = if is_toml {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [
        &mut cfg.sources,
        &mut cfg.sinks,
        &mut cfg.sanitizers,
        &mut cfg.lexicon,
        &mut cfg.dpv,
        &mut cfg.out,
    ]
    .into_iter()
    .flatten()
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

fn merge(
    r: &RegistryArgs,
    out: Option<&PathBuf>,
    threshold: Option<f64>,
) -> Result<Config, CliError> {
    let file = match &r.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    if let Err(m) = file.risk.validate() {
        return Err(CliError::new("config", m));
    }
    let pick = |flag: &Option<PathBuf>, cfg: Option<PathBuf>| flag.clone().or(cfg);
    let fail_threshold = threshold.or(file.fail_threshold);
    if let Some(t) = fail_threshold {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::new(
                "usage",
                format!("fail threshold must be a non-negative number, got {t}"),
            ));
        }
    }
    Ok(Config {
        registry_paths: RegistryPaths {
            sources: pick(&r.sources, file.sources),
            sinks: pick(&r.sinks, file.sinks),
            sanitizers: pick(&r.sanitizers, file.sanitizers),
            lexicon: pick(&r.lexicon, file.lexicon),
        },
        dpv: pick(&r.dpv, file.dpv),
        out: out.cloned().or(file.out),
        fail_threshold,
        risk: file.risk,
    })
}

fn load_inputs(cfg: &Config) -> Result<(Registries, DpvMap), CliError> {
    let regs = load_registries(&cfg.registry_paths)?;
    let dpv = load_dpv_map(cfg.dpv.as_deref(), &regs)?;
    Ok((regs, dpv))
}

fn is_slice_file(name: &str) -> bool {
    name.strip_prefix("slice_")
        .and_then(|r| r.strip_suffix(".dot"))
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

fn write_outputs(dir: &Path, json: &str, dots: &[(String, String)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::new("io", e.to_string()).in_file(dir);
    fs::create_dir_all(dir).map_err(io)?;
    // Graphs left over from an earlier run on a different program would
    // otherwise make the directory depend on history.
    for entry in fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        if entry.file_name().to_str().is_some_and(is_slice_file) {
            fs::remove_file(entry.path()).map_err(io)?;
        }
    }
    fs::write(dir.join("report.json"), json).map_err(io)?;
    for (name, text) in dots {
        fs::write(dir.join(name), text).map_err(io)?;
    }
    Ok(())
}

fn color_enabled() -> bool {
    std::env::var_os("PDAUDIT_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = merge(&a.registries, a.out.as_ref(), a.fail_threshold)?;
    let program = read_program(&a.input)?;
    let (regs, dpv) = load_inputs(&cfg)?;
    let analysis = analyze(&crate::pipeline::Inputs {
        program: &program,
        registries: &regs,
        dpv: &dpv,
        risk: &cfg.risk,
    })
    .map_err(|e| CliError::from(e).in_file(&a.input))?;
    let dir = cfg.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    write_outputs(&dir, &analysis.json, &analysis.dots)?;
    let summary = render_text(&analysis.json, color_enabled()).expect("report JSON parses");
    let _ = out.write_all(summary.as_bytes());
    let failed = cfg
        .fail_threshold
        .is_some_and(|t| exceeds_threshold(&analysis.report, t));
    Ok(if failed { EXIT_FINDINGS } else { EXIT_PASS })
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = merge(&a.registries, None, None)?;
    let program = read_program(&a.input)?;
    load_inputs(&cfg)?;
    let diags = validate(&program);
    for d in &diags {
        let _ = writeln!(out, "{}: {d}", a.input.display());
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return Err(CliError::new(
            "invalid_program",
            format!("{errors} error(s) in program"),
        )
        .in_file(&a.input));
    }
    let _ = writeln!(out, "ok");
    Ok(EXIT_PASS)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_errors = args.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_PASS;
            }
            if json_errors {
                CliError::new("usage", e.to_string().trim_end()).emit(true, err);
            } else {
                let _ = write!(err, "{e}");
            }
            return EXIT_ERROR;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Print { input } => read_program(input).map(|p| {
            let _ = out.write_all(print_program(&p).as_bytes());
            EXIT_PASS
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            e.emit(cli.json_errors, err);
            EXIT_ERROR
        }
    }
}
