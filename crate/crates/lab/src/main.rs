use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use liouville_lab::commands;
use liouville_lab::config::{NonlinearityConfig, RunConfig, ShootConfig};
use liouville_lab::{LabError, Result};

const SCHEMA: &str = "\
configuration schema (TOML, unknown keys are rejected):
  seed = <int>                     output_dir = <path>
  [nonlinearity] kind = scalar-power {p} | gradient-coupled {q, coupling}
                      | scalar-quadratic | quadratic-system {delta}
  [simulation]   geometry, nodes, initial, stop, perturbation?, solver?, cadence?
  [rescale]      y_grid?, center?, ds?, span?, offset?, energy_tol?
  [zeros]        cone = { nonneg = [..], combos = [{label, coeffs, cap}, ..] }
  [shoot]        dim, xi? | xi_range = [from, to, count], r_max?, mode?, options?, cone?
  [schedule]     n, p
  [campaign]     runs, family, cone?, amplitude_scale?, check_every?";

#[derive(Parser)]
#[command(name = "liouville-lab", version, about = "Blow-up, rescaling, zero-number and bootstrap experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized data and samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    ScalarPower,
    GradientCoupled,
    ScalarQuadratic,
    QuadraticSystem,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Euler identity, homogeneity and F = ∇G for a nonlinearity.
    NlCheck {
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        coupling: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run one simulation.
    Simulate,
    /// Simulate a blow-up and evaluate the weighted energy in self-similar variables.
    Rescale,
    /// Track zero numbers along a simulation.
    Zeros,
    /// Shooting scan over starting values.
    Shoot {
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long, requires_all = ["xi_max", "count"], allow_negative_numbers = true)]
        xi_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        xi_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Build and verify a bootstrap schedule and exponent ladder.
    Schedule {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run an envelope campaign.
    Bounds,
    /// Regenerate the report files of a campaign directory.
    Report,
}

fn nonlinearity(
    cfg: &RunConfig,
    kind: Option<Kind>,
    p: Option<f64>,
    q: Option<f64>,
    coupling: Option<f64>,
    delta: Option<f64>,
) -> Result<NonlinearityConfig> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| LabError::Config(format!("--{name} is required for this kind")));
    Ok(match kind {
        Some(Kind::ScalarPower) => NonlinearityConfig::ScalarPower { p: need(p, "p")? },
        Some(Kind::GradientCoupled) => NonlinearityConfig::GradientCoupled { q: need(q, "q")?, coupling: need(coupling, "coupling")? },
        Some(Kind::ScalarQuadratic) => NonlinearityConfig::ScalarQuadratic,
        Some(Kind::QuadraticSystem) => NonlinearityConfig::QuadraticSystem { delta: need(delta, "delta")? },
        None => cfg.nonlinearity.ok_or_else(|| LabError::Config("give --kind or a [nonlinearity] table".into()))?,
    })
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("liouville-out"));
    match cli.command {
        Command::NlCheck { kind, p, q, coupling, delta, samples } => {
            let field = nonlinearity(&cfg, kind, p, q, coupling, delta)?.build()?;
            commands::nl_check(&field, samples, cfg.seed.unwrap_or(0), &out)
        }
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Rescale => commands::rescale(&cfg, &out),
        Command::Zeros => commands::zeros(&cfg, &out),
        Command::Shoot { dim, xi_min, xi_max, count, r_max } => {
            let mut shot = cfg.shoot.clone().unwrap_or_else(|| ShootConfig {
                dim: 0,
                xi: Vec::new(),
                xi_range: None,
                r_max: liouville_lab::core::stationary::DEFAULT_R_MAX,
                mode: Default::default(),
                options: Default::default(),
                cone: Default::default(),
            });
            if let Some(d) = dim {
                shot.dim = d;
            }
            if let (Some(a), Some(b), Some(n)) = (xi_min, xi_max, count) {
                shot.xi.clear();
                shot.xi_range = Some((a, b, n));
            }
            if let Some(r) = r_max {
                shot.r_max = r;
            }
            if shot.dim == 0 {
                return Err(LabError::Config("shoot needs --dim or [shoot].dim".into()));
            }
            cfg.shoot = Some(shot);
            commands::shoot_scan(&cfg, &out)
        }
        Command::Schedule { n, p } => {
            let n = n.or(cfg.schedule.map(|s| s.n)).ok_or_else(|| LabError::Config("schedule needs --n".into()))?;
            let p = p.or(cfg.schedule.map(|s| s.p)).ok_or_else(|| LabError::Config("schedule needs --p".into()))?;
            commands::schedule(n, p, &out)
        }
        Command::Bounds => commands::bounds(&cfg, &out),
        Command::Report => commands::report(&out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            if code == 1 {
                eprintln!("\n{SCHEMA}");
            }
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, LabError::Config(_)) {
                eprintln!("\n{SCHEMA}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
