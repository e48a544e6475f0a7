use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pw_cli::output::{render_error, render_json, render_text, OptionsEcho, RunOutput};
use pw_cli::runner::{self, CommandResult, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for pw_cli::OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => pw_cli::OutputFormat::Json,
            Format::Text => pw_cli::OutputFormat::Text,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Sample points per chart
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// RNG seed for sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Residual tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    output: Format,
}

#[derive(Debug, Args)]
struct ManifestArgs {
    /// Path to a manifest file
    manifest: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Parser)]
#[command(
    name = "pw",
    about = "Contravariant Poisson geometry: connections, curvature, warped products",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a manifest, check Poisson/Casimir/positivity properties
    Validate(ManifestArgs),
    /// Torsion and metric-condition residuals of the connection
    Connection(ManifestArgs),
    /// Curvature tensor antisymmetry and magnitudes
    Curvature(ManifestArgs),
    /// Ricci tensor symmetry and values
    Ricci(ManifestArgs),
    /// Scalar curvature statistics
    Scalar(ManifestArgs),
    /// Laplacian tasks from the manifest
    Laplacian(ManifestArgs),
    /// Compatibility residual DΠ per space
    Compat(ManifestArgs),
    /// Verify warped-product decomposition formulas dual-path
    WarpVerify(ManifestArgs),
    /// Einstein classification and warped Einstein conditions
    Einstein(ManifestArgs),
    /// Constant warp for an Einstein warped product from (lambda, lambda_hat)
    SolveWarp {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda_hat: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Constant warp for a target constant scalar curvature
    SolveScalar {
        /// Base scalar curvature (read from the manifest when omitted)
        #[arg(long, allow_hyphen_values = true)]
        sb: Option<f64>,
        /// Fiber scalar curvature (nonzero)
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Target product scalar curvature
        #[arg(long, allow_hyphen_values = true)]
        mu1: f64,
        /// Fiber dimension
        #[arg(long)]
        s2: usize,
        manifest: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, manifest_path): (&str, &CommonArgs, Option<&PathBuf>) = match &cli.command {
        Command::Validate(a) => ("validate", &a.common, Some(&a.manifest)),
        Command::Connection(a) => ("connection", &a.common, Some(&a.manifest)),
        Command::Curvature(a) => ("curvature", &a.common, Some(&a.manifest)),
        Command::Ricci(a) => ("ricci", &a.common, Some(&a.manifest)),
        Command::Scalar(a) => ("scalar", &a.common, Some(&a.manifest)),
        Command::Laplacian(a) => ("laplacian", &a.common, Some(&a.manifest)),
        Command::Compat(a) => ("compat", &a.common, Some(&a.manifest)),
        Command::WarpVerify(a) => ("warp-verify", &a.common, Some(&a.manifest)),
        Command::Einstein(a) => ("einstein", &a.common, Some(&a.manifest)),
        Command::SolveWarp { common, .. } => ("solve-warp", common, None),
        Command::SolveScalar {
            common, manifest, ..
        } => ("solve-scalar", common, manifest.as_ref()),
    };
    let cfg = RunConfig {
        points: common.points,
        seed: common.seed,
        tol: common.tol,
    };
    let format: pw_cli::OutputFormat = common.output.into();

    let result: anyhow::Result<CommandResult> = (|| {
        let manifest = manifest_path
            .map(|p| pw_cli::load_manifest(p))
            .transpose()?;
        match &cli.command {
            Command::Validate(_) => runner::cmd_validate(manifest.as_ref().unwrap(), &cfg),
            Command::Connection(_) => runner::cmd_connection(manifest.as_ref().unwrap(), &cfg),
            Command::Curvature(_) => runner::cmd_curvature(manifest.as_ref().unwrap(), &cfg),
            Command::Ricci(_) => runner::cmd_ricci(manifest.as_ref().unwrap(), &cfg),
            Command::Scalar(_) => runner::cmd_scalar(manifest.as_ref().unwrap(), &cfg),
            Command::Laplacian(_) => runner::cmd_laplacian(manifest.as_ref().unwrap(), &cfg),
            Command::Compat(_) => runner::cmd_compat(manifest.as_ref().unwrap(), &cfg),
            Command::WarpVerify(_) => runner::cmd_warp_verify(manifest.as_ref().unwrap(), &cfg),
            Command::Einstein(_) => runner::cmd_einstein(manifest.as_ref().unwrap(), &cfg),
            Command::SolveWarp {
                lambda, lambda_hat, ..
            } => runner::cmd_solve_warp(*lambda, *lambda_hat),
            Command::SolveScalar {
                sb, mu, mu1, s2, ..
            } => runner::cmd_solve_scalar(*sb, *mu, *mu1, *s2, manifest.as_ref(), &cfg),
        }
    })();

    match result {
        Ok(CommandResult { report, payload }) => {
            let all_passed = report.all_passed();
            let out = RunOutput {
                command: name.to_string(),
                manifest: manifest_path.map(|p| p.display().to_string()),
                options: OptionsEcho {
                    points: cfg.points,
                    seed: cfg.seed,
                    tol: cfg.tol,
                },
                report,
                payload,
            };
            let rendered = match format {
                pw_cli::OutputFormat::Json => render_json(&out),
                pw_cli::OutputFormat::Text => render_text(&out),
            };
            print!("{rendered}");
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            print!("{}", render_error(name, &err, format));
            ExitCode::from(2)
        }
    }
}
