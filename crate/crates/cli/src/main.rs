use clap::{Args, Parser, Subcommand};
use manifold_widths::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use manifold_widths::manifold::ModelKind;
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiments on band-limited analysis and n-widths over the circle, the
/// flat torus and the round sphere.
#[derive(Parser)]
#[command(name = "mwidths", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table and Weyl-law fit.
    Spectrum(Common),
    /// Greedy rho-lattice with its packing and covering certificates.
    Lattice(Common),
    /// Positive cubature weights exact on a band.
    Cubature(Common),
    /// Plancherel-Polya sampling constants across bands.
    Pp(Common),
    /// Localization envelope and alpha-norms of a filtered kernel.
    Kernel(Common),
    /// Support radius of the Paley-Wiener wave kernel.
    Wave(Common),
    /// Spectral band of products of band-limited functions.
    Product(Common),
    /// Upper and lower width certificates on a list of n.
    Widths(Common),
    /// Width sweep with asserted decay rates.
    Rates(Common),
    /// Re-measure the bundled per-model constants.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// circle, torus2 or sphere2.
    #[arg(long)]
    model: Option<ModelKind>,
    /// INI file with a [general] section and one section per experiment.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent parameter points.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override one experiment parameter, e.g. --set n=16,32,64.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Spectrum(c) => (ExperimentKind::Spectrum, c),
            Command::Lattice(c) => (ExperimentKind::Lattice, c),
            Command::Cubature(c) => (ExperimentKind::Cubature, c),
            Command::Pp(c) => (ExperimentKind::Pp, c),
            Command::Kernel(c) => (ExperimentKind::Kernel, c),
            Command::Wave(c) => (ExperimentKind::Wave, c),
            Command::Product(c) => (ExperimentKind::Product, c),
            Command::Widths(c) => (ExperimentKind::Widths, c),
            Command::Rates(c) => (ExperimentKind::Rates, c),
            Command::Calibrate(c) => (ExperimentKind::Calibrate, c),
        }
    }
}

fn build_config(kind: ExperimentKind, c: Common) -> manifold_widths::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::from_file(path, kind)?,
        None => ExperimentConfig::new(kind, ModelKind::Circle),
    };
    if let Some(m) = c.model {
        cfg.model = m;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(dir) = c.out_dir {
        cfg.out_dir = dir;
    }
    cfg.jobs = c.jobs;
    for item in &c.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| manifold_widths::Error::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
        cfg.set(kind.name(), key.trim(), value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = cli.command.split();
    let outcome = build_config(kind, common).and_then(|cfg| {
        let out = run_experiment(&cfg)?;
        Ok((cfg, out))
    });
    match outcome {
        Ok((cfg, out)) => {
            for check in &out.checks {
                println!("{} {}: {}", if check.passed { "ok  " } else { "FAIL" }, check.name, check.detail);
            }
            println!("wrote {} files to {}", out.files.len(), cfg.out_dir.display());
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
