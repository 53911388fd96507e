//! Command-line front end: `verify` runs a condition suite over sampled
//! chart points and writes a deterministic report, `catalog` lists the
//! built-in charts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gtorsion::manifolds;
use gtorsion::report::{emit_report, load_config, run_suite, ReportFormat, RunConfig};
use gtorsion::Result;

#[derive(Parser)]
#[command(
    name = "gtorsion",
    version,
    about = "Verify harmonicity and minimality of metric G-structures at sampled chart points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Evaluate condition residuals over sampled points and report verdicts.
    Verify(VerifyArgs),
    /// List the built-in charts and their defaults.
    Catalog,
}

#[derive(Args)]
struct VerifyArgs {
    /// Catalog name or path to a chart description file.
    #[arg(long)]
    manifold: Option<String>,

    /// Run configuration file; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Chart dimension for catalog charts that take one.
    #[arg(long)]
    n: Option<usize>,

    /// Curvature scale of the hyperbolic chart.
    #[arg(long)]
    c: Option<f64>,

    /// Conformal potential expression, e.g. "x1^2 + x2".
    #[arg(long)]
    f: Option<String>,

    /// Number of sampled points.
    #[arg(long)]
    samples: Option<usize>,

    /// Sampling seed; fixed seed means byte-identical reports.
    #[arg(long)]
    seed: Option<u64>,

    /// Comma-separated conditions; defaults to everything applicable.
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<String>>,

    /// Residuals below this tolerance pass.
    #[arg(long = "pass-tol")]
    pass_tol: Option<f64>,

    /// Residuals above this tolerance fail; in between is inconclusive.
    #[arg(long = "fail-tol")]
    fail_tol: Option<f64>,

    /// Write the report to this path instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Report format: json or csv.
    #[arg(long)]
    format: Option<String>,

    /// Include the per-point value table in JSON reports.
    #[arg(long)]
    detail: bool,
}

impl VerifyArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.manifold) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => RunConfig::new(name),
            (None, None) => {
                return Err(gtorsion::Error::Config(
                    "verify needs --manifold or --config".to_string(),
                ));
            }
        };
        if let Some(name) = self.manifold {
            config.manifold = name;
        }
        if let Some(n) = self.n {
            config.params.n = Some(n);
        }
        if let Some(c) = self.c {
            config.params.c = Some(c);
        }
        if let Some(f) = self.f {
            config.params.f = Some(f);
        }
        if let Some(samples) = self.samples {
            config.samples = samples;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(conditions) = self.conditions {
            config.conditions = Some(conditions);
        }
        if let Some(pass) = self.pass_tol {
            config.tolerances.pass = pass;
        }
        if let Some(fail) = self.fail_tol {
            config.tolerances.fail = fail;
        }
        if let Some(report) = self.report {
            config.report = Some(report);
        }
        if let Some(format) = self.format {
            config.format = ReportFormat::parse(&format)?;
        }
        if self.detail {
            config.detail = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn verify(args: VerifyArgs) -> Result<u8> {
    let config = args.into_config()?;
    let report = run_suite(&config)?;

    // Human-readable summary; the machine-readable report goes wherever the
    // config points. Summary to stderr when the report occupies stdout.
    let mut summary = String::new();
    for result in &report.results {
        summary.push_str(&format!(
            "{:<14} {:<15} max {}\n",
            result.condition.name(),
            result.verdict.name(),
            result
                .max
                .map_or("-".to_string(), |v| format!("{v:.3e}")),
        ));
    }
    for err in &report.errors {
        summary.push_str(&format!(
            "error: {} at point {}: {}\n",
            err.condition.name(),
            err.point_index,
            err.message
        ));
    }
    if config.report.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }

    emit_report(&report, config.format, config.report.as_deref())?;
    if let Some(path) = &config.report {
        println!("report written to {}", path.display());
    }

    Ok(report.exit_code() as u8)
}

fn catalog() {
    for entry in manifolds::catalog() {
        println!("{}", entry.name);
        println!("    {}", entry.summary);
        println!("    defaults: {}", entry.defaults);
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Catalog => {
            catalog();
            ExitCode::SUCCESS
        }
        Command::Verify(args) => match verify(args) {
            Ok(code) => ExitCode::from(code),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
    }
}
