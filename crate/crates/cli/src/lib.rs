//! `qap` command-line driver. [`run`] does all the work and returns the
//! process exit code:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | usage error (bad flags or flag values)    |
//! | 2    | input could not be read or parsed         |
//! | 3    | instance too large for the requested work |
//! | 4    | solver failure                            |

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qap_core::bnc::{compare_relaxations, root_cut_loop, solve_bnc, BncConfig, CompareConfig};
use qap_core::lap::compute_bounds;
use qap_core::linearizations::{build, solve_relaxation, FyVariant, LinearizationKind};
use qap_core::lpcore::{write_lp, LpStatus};
use qap_core::{parse_qaplib, serialize_qaplib, Instance, Matrix, QapError, SolveReport};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qap", version, about = "Quadratic assignment linearizations, ab-cuts and branch-and-cut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read an instance and echo it back.
    Parse(Common),
    /// Build a linearization's LP model.
    Build(Common),
    /// Solve a linearization's LP relaxation.
    Relax(Common),
    /// Run ab-cut rounds on the Xia-Yuan relaxation.
    Cuts(Common),
    /// Solve every relaxation and measure the gap closed by ab-cuts.
    Compare(Common),
    /// Branch-and-cut to optimality.
    Solve(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FyArg {
    Standard,
    Printed,
}

#[derive(Debug, Args)]
struct Common {
    /// QAPLIB file, instance JSON file (`.json`), or `random:<n>`.
    input: String,
    #[arg(long, default_value = "xy", value_parser = parse_kind)]
    lin: LinearizationKind,
    #[arg(long, value_enum, default_value = "on")]
    cuts: Switch,
    #[arg(long, default_value_t = 50)]
    max_rounds: usize,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for `random:<n>` inputs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Form of the Frieze-Yadegar linkage rows.
    #[arg(long, value_enum, default_value = "standard")]
    fy_variant: FyArg,
    /// Interchange the flow and distance matrices after reading.
    #[arg(long)]
    swap_matrices: bool,
    /// `compare`: skip the four-index relaxations (lifts the size limit).
    #[arg(long)]
    skip_four_index: bool,
}

fn parse_kind(s: &str) -> Result<LinearizationKind, String> {
    s.parse::<LinearizationKind>().map_err(|e| e.to_string())
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<QapError> for Failure {
    fn from(e: QapError) -> Self {
        let code = match e {
            QapError::Argument(_) => EXIT_USAGE,
            QapError::Parse { .. } | QapError::Truncated { .. } | QapError::Domain(_) => EXIT_INPUT,
            QapError::Capacity { .. } => EXIT_CAPACITY,
            QapError::State(_) | QapError::Lp(_) => EXIT_SOLVER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the CLI on `args` (including the program name). Output documents
/// go to `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((doc, opts)) => match &opts.out {
            Some(path) => match std::fs::write(path, doc) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    EXIT_INPUT
                }
            },
            None => match stdout.write_all(doc.as_bytes()) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write output: {e}");
                    EXIT_INPUT
                }
            },
        },
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn options(cmd: &Command) -> &Common {
    match cmd {
        Command::Parse(c)
        | Command::Build(c)
        | Command::Relax(c)
        | Command::Cuts(c)
        | Command::Compare(c)
        | Command::Solve(c) => c,
    }
}

fn execute(cmd: &Command) -> Result<(String, &Common), Failure> {
    let opts = options(cmd);
    let allowed: &[Format] = match cmd {
        Command::Build(_) => &[Format::Json, Format::Text, Format::Lp],
        Command::Parse(_) | Command::Relax(_) | Command::Cuts(_) | Command::Compare(_) | Command::Solve(_) => {
            &[Format::Json, Format::Text]
        }
    };
    if !allowed.contains(&opts.format) {
        return Err(Failure::usage(format!(
            "--format {:?} is not available for this subcommand",
            opts.format
        )));
    }
    let instance = load_instance(opts)?;
    let doc = match cmd {
        Command::Parse(_) => cmd_parse(&instance, opts)?,
        Command::Build(_) => cmd_build(&instance, opts)?,
        Command::Relax(_) => cmd_relax(&instance, opts)?,
        Command::Cuts(_) => cmd_cuts(&instance, opts)?,
        Command::Compare(_) => cmd_compare(&instance, opts)?,
        Command::Solve(_) => cmd_solve(&instance, opts)?,
    };
    Ok((doc, opts))
}

fn load_instance(opts: &Common) -> Result<Instance, Failure> {
    let instance = if let Some(size) = opts.input.strip_prefix("random:") {
        let n: usize = size
            .parse()
            .map_err(|_| Failure::usage(format!("random:<n> needs a size, got {size:?}")))?;
        Instance::random_uniform(n, opts.seed)?
    } else {
        let text = std::fs::read_to_string(&opts.input)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", opts.input)))?;
        if opts.input.ends_with(".json") {
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", opts.input)))?
        } else {
            parse_qaplib(&text).map_err(|e| Failure::input(format!("{}: {e}", opts.input)))?
        }
    };
    Ok(if opts.swap_matrices {
        instance.swapped()
    } else {
        instance
    })
}

fn fy_variant(opts: &Common) -> FyVariant {
    match opts.fy_variant {
        FyArg::Standard => FyVariant::Standard,
        FyArg::Printed => FyVariant::Printed,
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

fn cmd_parse(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    Ok(match opts.format {
        Format::Text => serialize_qaplib(instance),
        _ => to_json(instance),
    })
}

fn cmd_build(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    let bounds = if opts.lin.needs_bounds() {
        Some(compute_bounds(instance)?)
    } else {
        None
    };
    let lin = build(instance, opts.lin, bounds.as_ref(), fy_variant(opts))?;
    let model = &lin.model;
    Ok(match opts.format {
        Format::Lp => write_lp(model),
        Format::Text => format!(
            "{} linearization, n = {}: {} variables, {} constraints\n",
            opts.lin,
            instance.n(),
            model.num_vars(),
            model.num_constraints()
        ),
        Format::Json => to_json(&json!({
            "linearization": opts.lin.short_name(),
            "n": instance.n(),
            "variables": model.num_vars(),
            "constraints": model.num_constraints(),
        })),
    })
}

fn cmd_relax(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    let bounds = if opts.lin.needs_bounds() {
        Some(compute_bounds(instance)?)
    } else {
        None
    };
    let lin = build(instance, opts.lin, bounds.as_ref(), fy_variant(opts))?;
    let sol = solve_relaxation(&lin)?;
    let status = match sol.status {
        LpStatus::Optimal => "optimal",
        // Possible for the printed Frieze-Yadegar rows.
        LpStatus::Infeasible => "infeasible",
        other => return Err(QapError::Lp(format!("relaxation ended with status {other:?}")).into()),
    };
    let bound = sol.is_optimal().then_some(sol.objective_value);
    let x = sol.is_optimal().then(|| rows(&lin.x_values(&sol.primal)));
    Ok(match opts.format {
        Format::Text => match bound {
            Some(b) => format!(
                "{} relaxation, n = {}: bound {b} ({} simplex iterations)\n",
                opts.lin,
                instance.n(),
                sol.iterations
            ),
            None => format!("{} relaxation, n = {}: infeasible\n", opts.lin, instance.n()),
        },
        _ => to_json(&json!({
            "linearization": opts.lin.short_name(),
            "n": instance.n(),
            "status": status,
            "bound": bound,
            "iterations": sol.iterations,
            "x": x,
        })),
    })
}

fn cmd_cuts(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    if opts.max_rounds == 0 {
        return Err(Failure::usage("--max-rounds must be at least 1 for cuts"));
    }
    let bounds = compute_bounds(instance)?;
    let out = root_cut_loop(instance, &bounds, opts.max_rounds)?;
    let before = out.bound_history[0];
    let after = out.solution.objective_value;
    Ok(match opts.format {
        Format::Text => {
            let mut s = format!(
                "bound {before} -> {after} with {} cuts in {} rounds\n",
                out.cuts.len(),
                out.rounds_used
            );
            for c in &out.cuts {
                let _ = write!(s, "z[{},{}] >= {} x[{},{}]", c.a + 1, c.b + 1, c.coef, c.a + 1, c.b + 1);
                for k in 0..instance.n() {
                    for l in 0..instance.n() {
                        let d = c.delta[(k, l)];
                        if d != 0.0 {
                            let _ = write!(s, " - {d} x[{},{}]", k + 1, l + 1);
                        }
                    }
                }
                s.push('\n');
            }
            s
        }
        _ => to_json(&json!({
            "n": instance.n(),
            "bound_before": before,
            "bound_after": after,
            "rounds": out.rounds_used,
            "bound_history": out.bound_history,
            "cuts": out.cuts,
            "x": rows(&out.x),
            "z": rows(&out.z),
        })),
    })
}

fn report_text(report: &SolveReport) -> String {
    let b = &report.bounds;
    let mut s = format!("n = {}, status {:?}\n", report.instance.n, report.status);
    for (name, v) in &b.relaxations {
        match v {
            Some(v) => {
                let _ = writeln!(s, "  {name:<13} {v}");
            }
            None => {
                let _ = writeln!(s, "  {name:<13} skipped");
            }
        }
    }
    let _ = writeln!(
        s,
        "root bound {} -> {} ({} cuts, {} rounds)",
        b.root_before_cuts,
        b.root_after_cuts,
        report.cuts.len(),
        report.cut_rounds
    );
    if let Some(g) = b.gap_closed {
        let _ = writeln!(s, "gap closed {:.4}", g);
    }
    if let Some(inc) = &report.incumbent {
        let perm = inc.perm.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "incumbent ({perm}) value {}", inc.value);
    }
    if report.tree.nodes > 0 {
        let _ = writeln!(
            s,
            "tree: {} nodes, depth {}, {} open",
            report.tree.nodes, report.tree.depth, report.tree.open
        );
    }
    s
}

fn cmd_compare(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    let cfg = CompareConfig {
        four_index: !opts.skip_four_index,
        fy_variant: fy_variant(opts),
        root_rounds: if opts.cuts == Switch::On { opts.max_rounds } else { 0 },
        threads: opts.threads as usize,
        record_wall_time: false,
    };
    let report = compare_relaxations(instance, &cfg)?;
    Ok(match opts.format {
        Format::Text => report_text(&report),
        _ => to_json(&report),
    })
}

fn cmd_solve(instance: &Instance, opts: &Common) -> Result<String, Failure> {
    let cfg = BncConfig {
        node_limit: opts.node_limit,
        root_rounds: opts.max_rounds,
        cuts: opts.cuts == Switch::On,
        threads: opts.threads as usize,
        record_wall_time: false,
        ..BncConfig::default()
    };
    let report = solve_bnc(instance, &cfg)?;
    Ok(match opts.format {
        Format::Text => report_text(&report),
        _ => to_json(&report),
    })
}
