//! Argument handling and command dispatch for the `rewardsep` binary.
//!
//! [`run_command`] never exits the process; it returns the exit code and the
//! text that `main` prints. Exit codes: 0 for a positive answer, 1 for a
//! negative answer (printed with its certificate), 2 for usage and input
//! errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rewardsep::bundle::{load_bundle, parse_soap, parse_spec, read_file, spec_to_json, ProblemBundle};
use rewardsep::error::Error;
use rewardsep::mdp::{compute_visitations, enumerate_deterministic_policies, Policy};
use rewardsep::numeric::NumericMode;
use rewardsep::plot::{export_plot, Axis};
use rewardsep::reward::RewardSpec;
use rewardsep::separability::{
    check_scalar_optimality, design_multi, design_scalar, DesignOutcome, OptimalitySemantics,
};
use rewardsep::soap::{check_consistency, Soap};
use rewardsep::verifier::{brute_force_feasible_set, verify_realization};

mod report;

use report::Report;

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rewardsep", version, about = "Design and check reward functions for sets of acceptable policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Problem bundle (JSON environment, optionally with policies, SOAP and spec).
    bundle: PathBuf,
    /// Exact rational arithmetic.
    #[arg(long, conflicts_with = "tol")]
    exact: bool,
    /// Floating-point arithmetic with this absolute tolerance (default 1e-9).
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the main artifact here (spec JSON for design commands,
    /// CSV for export-plot, the report otherwise).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SoapArg {
    /// SOAP file `{"good": [...], "bad": [...]}`; defaults to the bundle's `soap`.
    #[arg(long, value_name = "PATH")]
    soap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LimitArg {
    /// Refuse to enumerate more deterministic policies than this.
    #[arg(long, default_value_t = 4096)]
    limit: u128,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the discounted state-action visitation of each policy.
    Visitation {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        limit: LimitArg,
    },
    /// Check that no good and bad policy share a visitation vector.
    Consistency {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
    },
    /// Find a scalar feasibility reward, or the common point of the two hulls.
    DesignScalar {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
    },
    /// Find a multidimensional feasibility reward, or a bad point inside the good hull.
    DesignMulti {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
        /// Greedily merge hyperplanes to lower the dimension.
        #[arg(long)]
        reduce: bool,
        /// Answer negatively when the constructed spec has more rows than this.
        #[arg(long, value_name = "N")]
        max_dim: Option<usize>,
    },
    /// Find a scalar reward making exactly the good policies optimal.
    DesignScalarOptimal {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
        #[command(flatten)]
        limit: LimitArg,
        /// Good policies need only clear a shared threshold instead of being equally optimal.
        #[arg(long)]
        range: bool,
    },
    /// Check a reward spec against a SOAP.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
        /// Spec file; defaults to the bundle's `spec`.
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
    },
    /// List the deterministic policies, marking the feasible ones when a spec is given.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        limit: LimitArg,
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
    },
    /// Write visitation coordinates on two (state, action) axes as CSV.
    ExportPlot {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        soap: SoapArg,
        #[command(flatten)]
        limit: LimitArg,
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
        /// Horizontal axis as state:action.
        #[arg(long, value_name = "STATE:ACTION")]
        x: String,
        /// Vertical axis as state:action.
        #[arg(long, value_name = "STATE:ACTION")]
        y: String,
    },
}

/// Exit code and printed text of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: message,
        }
    }
}

/// Parse `argv` (including the program name) and run the command.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_POSITIVE };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::usage(text)
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome,
        Err(e) => Outcome::usage(format!("error: {e}\n")),
    }
}

struct Ctx {
    bundle: ProblemBundle,
    mode: NumericMode,
    json: bool,
    out: Option<PathBuf>,
}

fn context(common: Common) -> Result<Ctx, Error> {
    let mode = match (common.exact, common.tol) {
        (true, _) => NumericMode::ExactRational,
        (false, Some(t)) if t.is_finite() && t > 0.0 => NumericMode::float(t),
        (false, Some(t)) => return Err(Error::Malformed(format!("--tol must be positive, got {t}"))),
        (false, None) => NumericMode::default(),
    };
    let bundle = load_bundle(&common.bundle, mode)?;
    Ok(Ctx {
        bundle,
        mode,
        json: common.json,
        out: common.out,
    })
}

fn with_file<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, Error>) -> Result<T, Error> {
    parse(&read_file(path)?).map_err(|e| match e {
        Error::Input { path: p, message } => Error::Input {
            path: format!("{}: {p}", path.display()),
            message,
        },
        other => other,
    })
}

fn soap_of(ctx: &Ctx, arg: &SoapArg) -> Result<Soap, Error> {
    match &arg.soap {
        Some(path) => with_file(path, |t| parse_soap(t, &ctx.bundle)),
        None => ctx
            .bundle
            .soap
            .clone()
            .ok_or_else(|| Error::Malformed("no SOAP given: pass --soap or add \"soap\" to the bundle".into())),
    }
}

fn spec_of(ctx: &Ctx, path: Option<&Path>) -> Result<Option<RewardSpec>, Error> {
    match path {
        Some(p) => with_file(p, |t| parse_spec(t, &ctx.bundle.env)).map(Some),
        None => Ok(ctx.bundle.spec.clone()),
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| Error::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Render `report`, writing `artifact` (or the report itself) to `--out`.
fn finish(ctx: &Ctx, code: i32, report: Report, artifact: Option<String>) -> Result<Outcome, Error> {
    let stdout = if ctx.json { report.json() } else { report.text() };
    if let Some(path) = &ctx.out {
        write_out(path, artifact.as_deref().unwrap_or(&stdout))?;
    }
    Ok(Outcome {
        code,
        stdout,
        stderr: String::new(),
    })
}

fn policies_or_all(ctx: &Ctx, limit: u128) -> Result<Vec<Policy>, Error> {
    if ctx.bundle.policies.is_empty() {
        enumerate_deterministic_policies(&ctx.bundle.env, limit)
    } else {
        Ok(ctx.bundle.policies.clone())
    }
}

fn design_result(ctx: &Ctx, result: Result<DesignOutcome, Error>, command: &str, max_dim: Option<usize>) -> Result<Outcome, Error> {
    let outcome = match result {
        Err(Error::Inconsistent { witnesses }) => {
            let report = report::inconsistent_refusal(command, ctx.mode, &witnesses);
            return finish(ctx, EXIT_NEGATIVE, report, None);
        }
        other => other?,
    };
    let over = match (max_dim, outcome.dimension()) {
        (Some(m), Some(d)) if d > m => Some(m),
        _ => None,
    };
    let report = report::design(command, &ctx.bundle.env, &outcome, ctx.mode, over);
    let code = if outcome.is_realizable() && over.is_none() {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    };
    let artifact = outcome.spec().filter(|_| over.is_none()).map(spec_to_json);
    finish(ctx, code, report, artifact)
}

fn dispatch(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Visitation { common, limit } => {
            let ctx = context(common)?;
            let policies = policies_or_all(&ctx, limit.limit)?;
            let rhos = compute_visitations(&ctx.bundle.env, &policies, ctx.mode)?;
            let report = report::visitation(&ctx.bundle.env, &policies, &rhos, ctx.mode);
            finish(&ctx, EXIT_POSITIVE, report, None)
        }
        Command::Consistency { common, soap } => {
            let ctx = context(common)?;
            let soap = soap_of(&ctx, &soap)?;
            let result = check_consistency(&ctx.bundle.env, &soap, ctx.mode)?;
            let code = if result.consistent { EXIT_POSITIVE } else { EXIT_NEGATIVE };
            finish(&ctx, code, report::consistency(&result, ctx.mode), None)
        }
        Command::DesignScalar { common, soap } => {
            let ctx = context(common)?;
            let soap = soap_of(&ctx, &soap)?;
            let result = design_scalar(&ctx.bundle.env, &soap, ctx.mode);
            design_result(&ctx, result, "design-scalar", None)
        }
        Command::DesignMulti {
            common,
            soap,
            reduce,
            max_dim,
        } => {
            let ctx = context(common)?;
            if max_dim == Some(0) {
                return Err(Error::Malformed("--max-dim must be at least 1".into()));
            }
            let soap = soap_of(&ctx, &soap)?;
            let result = design_multi(&ctx.bundle.env, &soap, ctx.mode, reduce);
            design_result(&ctx, result, "design-multi", max_dim)
        }
        Command::DesignScalarOptimal {
            common,
            soap,
            limit,
            range,
        } => {
            let ctx = context(common)?;
            let soap = soap_of(&ctx, &soap)?;
            let semantics = if range {
                OptimalitySemantics::Range
            } else {
                OptimalitySemantics::Equal
            };
            let result = check_scalar_optimality(&ctx.bundle.env, &soap, ctx.mode, limit.limit, semantics);
            design_result(&ctx, result, "design-scalar-optimal", None)
        }
        Command::Verify { common, soap, spec } => {
            let ctx = context(common)?;
            let soap = soap_of(&ctx, &soap)?;
            let spec = spec_of(&ctx, spec.as_deref())?
                .ok_or_else(|| Error::Malformed("no spec given: pass --spec or add \"spec\" to the bundle".into()))?;
            let result = verify_realization(&ctx.bundle.env, &soap, &spec, ctx.mode)?;
            let code = if result.realized { EXIT_POSITIVE } else { EXIT_NEGATIVE };
            finish(&ctx, code, report::verification(&spec, &result, ctx.mode), None)
        }
        Command::Enumerate { common, limit, spec } => {
            let ctx = context(common)?;
            let all = enumerate_deterministic_policies(&ctx.bundle.env, limit.limit)?;
            let spec = spec_of(&ctx, spec.as_deref())?;
            let feasible = match &spec {
                Some(s) => Some(brute_force_feasible_set(&ctx.bundle.env, s, limit.limit, ctx.mode)?),
                None => None,
            };
            let report = report::enumeration(&ctx.bundle.env, &all, feasible.as_deref());
            finish(&ctx, EXIT_POSITIVE, report, None)
        }
        Command::ExportPlot {
            common,
            soap,
            limit,
            spec,
            x,
            y,
        } => {
            let ctx = context(common)?;
            let axes = (Axis::parse(&ctx.bundle.env, &x)?, Axis::parse(&ctx.bundle.env, &y)?);
            let soap = match (&soap.soap, &ctx.bundle.soap) {
                (None, None) => None,
                _ => Some(soap_of(&ctx, &soap)?),
            };
            let spec = spec_of(&ctx, spec.as_deref())?;
            let plot = export_plot(
                &ctx.bundle.env,
                &ctx.bundle.policies,
                soap.as_ref(),
                spec.as_ref(),
                axes,
                ctx.mode,
                limit.limit,
            )?;
            let csv = plot.to_csv(ctx.mode);
            let stdout = match (&ctx.out, ctx.json) {
                (_, true) => report::plot(&plot, ctx.mode).json(),
                (Some(path), false) => format!("wrote {} points to {}\n", plot.points.len(), path.display()),
                (None, false) => csv.clone(),
            };
            if let Some(path) = &ctx.out {
                write_out(path, &csv)?;
            }
            Ok(Outcome {
                code: EXIT_POSITIVE,
                stdout,
                stderr: String::new(),
            })
        }
    }
}
