//! Command-line front end: `analyze`, `paths`, `kleene` and `enumerate`.
//!
//! [`run`] returns the process exit code: 0 on success, 2 when a limit cut
//! the computation short, 1 on any input or backend error.

pub mod parse;
pub mod report;
pub mod template;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::domain::Template;
use crate::engine::{build_equations, solve, Limits};
use crate::error::{Error, Result};
use crate::oracle::{concrete_enumerate, kleene_bounded};
use crate::program::Program;
use crate::smt::{InternalSolver, SmtBackend, SmtLib2Solver};
use crate::transform::{cutset_rewrite, find_unbroken_cycle, sequential_paths, DEFAULT_PATH_LIMIT};

pub use parse::parse_program;
pub use report::{AnalysisReport, NodeReport, ReportFlags, ReportStats, RowBound, SCHEMA_VERSION};
pub use template::{parse_template, template_preset};

#[derive(Parser, Debug)]
#[command(name = "stratimp", version, about = "Template-domain invariants for affine programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the least abstract invariants by strategy improvement.
    Analyze {
        file: PathBuf,
        /// interval, zone, octagon or custom=<file>
        #[arg(long, default_value = "interval")]
        template: String,
        /// Comma-separated nodes to keep; everything else is analyzed en bloc.
        #[arg(long)]
        cutset: Option<String>,
        /// internal or smtlib2=<command>
        #[arg(long, default_value = "internal")]
        solver: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write one JSON record per improvement step to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Print the path expansion of every edge.
    Paths {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PATH_LIMIT)]
        limit: u64,
    },
    /// Bounded Kleene iteration of the abstract equations.
    Kleene {
        file: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long, default_value = "interval")]
        template: String,
    },
    /// Reachable integer states from a box of start states.
    Enumerate {
        file: PathBuf,
        /// `lo..hi` for all variables, or a comma list `[name=]lo..hi` per variable.
        #[arg(long)]
        bounds: String,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
    },
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidProgram(format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Resolves `--template`.
pub fn load_template(arg: &str, var_names: &[String]) -> Result<Template> {
    match arg.strip_prefix("custom=") {
        Some(file) => parse_template(&read(Path::new(file))?, var_names),
        None => template_preset(arg, var_names),
    }
}

/// Resolves `--solver`.
pub fn make_backend(arg: &str, timeout: Option<Duration>) -> Result<Box<dyn SmtBackend>> {
    if arg == "internal" {
        return Ok(Box::new(InternalSolver::new()));
    }
    let solver = match arg.strip_prefix("smtlib2") {
        Some("") => SmtLib2Solver::discover()
            .ok_or_else(|| Error::Backend("no SMT-LIB2 solver found; use smtlib2=<command>".into()))?,
        Some(rest) => match rest.strip_prefix('=') {
            Some(cmd) => SmtLib2Solver::new(cmd)?,
            None => return Err(Error::Backend(format!("unknown solver `{arg}`"))),
        },
        None => return Err(Error::Backend(format!("unknown solver `{arg}`"))),
    };
    Ok(Box::new(solver.with_timeout(timeout)))
}

/// Applies `--cutset`: checks every cycle is broken, then rewrites.
pub fn apply_cutset(p: &Program, names: &str) -> Result<Program> {
    let mut cut = BTreeSet::new();
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v = p
            .node_id(name)
            .ok_or_else(|| Error::InvalidProgram(format!("cut-set names unknown node `{name}`")))?;
        cut.insert(v);
    }
    if let Some(cycle) = find_unbroken_cycle(p, &cut) {
        return Err(Error::InvalidCutset(cycle.into_iter().map(|v| p.node_names[v].clone()).collect()));
    }
    cutset_rewrite(p, &cut)
}

/// Parses `--bounds`.
pub fn parse_box(arg: &str, var_names: &[String]) -> Result<Vec<(i64, i64)>> {
    let bad = |m: String| Error::InvalidProgram(format!("--bounds: {m}"));
    let range = |s: &str| -> Result<(i64, i64)> {
        let (lo, hi) = s.split_once("..").ok_or_else(|| bad(format!("expected lo..hi, found `{s}`")))?;
        let lo: i64 = lo.trim().parse().map_err(|_| bad(format!("invalid bound `{lo}`")))?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad(format!("invalid bound `{hi}`")))?;
        if lo > hi {
            return Err(bad(format!("empty range {lo}..{hi}")));
        }
        Ok((lo, hi))
    };
    let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
    if parts.len() == 1 && !parts[0].contains('=') {
        return Ok(vec![range(parts[0])?; var_names.len()]);
    }
    if parts.iter().all(|p| p.contains('=')) {
        let mut out: Vec<Option<(i64, i64)>> = vec![None; var_names.len()];
        for part in parts {
            let (name, r) = part.split_once('=').expect("checked");
            let i = var_names
                .iter()
                .position(|v| v == name.trim())
                .ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
            out[i] = Some(range(r)?);
        }
        return out
            .into_iter()
            .zip(var_names)
            .map(|(r, v)| r.ok_or_else(|| bad(format!("no range for `{v}`"))))
            .collect();
    }
    if parts.len() != var_names.len() {
        return Err(bad(format!("{} ranges for {} variables", parts.len(), var_names.len())));
    }
    parts.into_iter().map(range).collect()
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Internal(format!("write failed: {e}"));
    match command {
        Command::Analyze {
            file,
            template,
            cutset,
            solver,
            format,
            trace,
            max_steps,
            timeout,
        } => {
            let mut p = load_program(&file)?;
            if let Some(names) = cutset {
                p = apply_cutset(&p, &names)?;
            }
            let tpl = load_template(&template, &p.var_names)?;
            let timeout = match timeout {
                Some(s) if !(s.is_finite() && s >= 0.0) => {
                    return Err(Error::InvalidProgram(format!("invalid timeout {s}")))
                }
                other => other.map(Duration::from_secs_f64),
            };
            let mut backend = make_backend(&solver, timeout)?;
            let limits = Limits { max_steps, timeout };
            let result = solve(&p, &tpl, backend.as_mut(), &limits)?;
            if let Some(path) = trace {
                std::fs::write(&path, result.trace.to_json_lines())
                    .map_err(|e| Error::Internal(format!("cannot write {}: {e}", path.display())))?;
            }
            let report = AnalysisReport::from_result(&result, &backend.name());
            match format {
                Format::Text => write!(out, "{}", report.to_text()).map_err(io)?,
                Format::Json => writeln!(out, "{}", report.to_json()).map_err(io)?,
            }
            Ok(if result.hit_limits { 2 } else { 0 })
        }
        Command::Paths { file, limit } => {
            let p = load_program(&file)?;
            for e in &p.edges {
                let paths = sequential_paths(&e.stmt, limit)?;
                writeln!(
                    out,
                    "edge {} -> {}: {} path{}",
                    p.node_names[e.from],
                    p.node_names[e.to],
                    paths.len(),
                    if paths.len() == 1 { "" } else { "s" }
                )
                .map_err(io)?;
                for path in paths {
                    let shown: Vec<String> = path.iter().map(|s| s.display(&p.var_names).to_string()).collect();
                    writeln!(out, "  {}", shown.join("; ")).map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Kleene { file, iters, template } => {
            let p = load_program(&file)?;
            let tpl = load_template(&template, &p.var_names)?;
            let es = build_equations(&p, &tpl)?;
            let k = kleene_bounded(&es, iters)?;
            for (name, d) in p.node_names.iter().zip(k.rho.per_node(&es)) {
                writeln!(out, "node {name}:").map_err(io)?;
                for (label, b) in tpl.labels().iter().zip(&d.0) {
                    writeln!(out, "  {label} <= {b}").map_err(io)?;
                }
            }
            writeln!(out, "iterations: {}\nstabilized: {}", k.iterations, k.stabilized).map_err(io)?;
            Ok(0)
        }
        Command::Enumerate {
            file,
            bounds,
            max_states,
        } => {
            let p = load_program(&file)?;
            let bx = parse_box(&bounds, &p.var_names)?;
            let set = concrete_enumerate(&p, &bx, max_states)?;
            for (name, states) in p.node_names.iter().zip(&set.states) {
                writeln!(out, "node {name}: {} state{}", states.len(), if states.len() == 1 { "" } else { "s" })
                    .map_err(io)?;
                for (i, var) in p.var_names.iter().enumerate() {
                    if let (Some(lo), Some(hi)) = (
                        states.iter().map(|s| &s[i]).min(),
                        states.iter().map(|s| &s[i]).max(),
                    ) {
                        writeln!(
                            out,
                            "  {var} in [{}, {}]",
                            crate::arith::format_rational(lo),
                            crate::arith::format_rational(hi)
                        )
                        .map_err(io)?;
                    }
                }
            }
            writeln!(out, "total: {}\ntruncated: {}", set.total(), set.truncated).map_err(io)?;
            Ok(if set.truncated { 2 } else { 0 })
        }
    }
}
