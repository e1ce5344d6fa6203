mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wrfcm::experiment::Algorithm;
use wrfcm::synthetic::Geometry;
use wrfcm::{FileConfig, ImpulseKind, NoiseSpec, SolverConfig};

#[derive(Parser, Debug)]
#[command(
    name = "wrfcm",
    version,
    about = "Residual-driven fuzzy C-means image segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment an image and write labels, prototypes, residual and trace.
    Segment(SegmentArgs),
    /// Corrupt an image with Poisson, Gaussian and impulse noise.
    SynthNoise(SynthNoiseArgs),
    /// Score a predicted label map against ground truth.
    Evaluate(EvaluateArgs),
    /// Sweep seeds and phi on a noisy benchmark and tabulate SA/SDS/MCC.
    Benchmark(BenchmarkArgs),
    /// Write a piecewise-constant test image and its label map.
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SolverArgs {
    /// Number of clusters.
    #[arg(long)]
    pub c: Option<usize>,
    /// Fuzzification exponent (> 1).
    #[arg(long)]
    pub m: Option<f64>,
    /// Stop when the membership change falls below this.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Decay rate of the residual weights.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Fidelity scale; beta = phi * stddev / 100 per channel.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Window radius (1 gives 3x3).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct NoiseArgs {
    /// Apply Poisson noise with the clean intensity as rate.
    #[arg(long, overrides_with = "no_poisson")]
    pub poisson: bool,
    #[arg(long, overrides_with = "poisson")]
    pub no_poisson: bool,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Per-pixel impulse probability.
    #[arg(long)]
    pub impulse_p: Option<f64>,
    /// random-valued or salt-and-pepper.
    #[arg(long)]
    pub impulse_kind: Option<ImpulseKind>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML run file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Label map PNG to score against.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[arg(long, default_value = "wrfcm")]
    pub algo: Algorithm,
    /// Write null wall times so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SynthNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "noisy.png")]
    pub output: PathBuf,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Predicted label map PNG.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub ground_truth: PathBuf,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write metrics.json here; the report always goes to stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// Clean image to corrupt; a synthetic image is generated when absent.
    #[arg(long, requires = "ground_truth")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Algorithms to run; repeat the flag for several.
    #[arg(long = "algo", default_value = "wrfcm")]
    pub algos: Vec<Algorithm>,
    /// Inclusive start:stop:step list of phi values.
    #[arg(long)]
    pub phi_sweep: Option<String>,
    /// Noise realizations per configuration, seeded seed..seed+runs.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long, default_value = "blocks")]
    pub geometry: Geometry,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GenSyntheticArgs {
    #[arg(long, default_value = "blocks")]
    pub geometry: Geometry,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Number of regions.
    #[arg(long, default_value_t = 4)]
    pub c: usize,
    /// Comma-separated gray levels, one per region; evenly spaced by default.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn read_config(path: Option<&PathBuf>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    FileConfig::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Defaults, then the run file, then flags.
pub fn solver_config(file: &FileConfig, flags: &SolverArgs, seed: Option<u64>) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        clusters: flags.c.or(file.c).unwrap_or(d.clusters),
        m: flags.m.or(file.m).unwrap_or(d.m),
        epsilon: flags.eps.or(file.eps).unwrap_or(d.epsilon),
        xi: flags.xi.or(file.xi).unwrap_or(d.xi),
        phi: flags.phi.or(file.phi).unwrap_or(d.phi),
        radius: flags.window.or(file.window).unwrap_or(d.radius),
        max_iter: flags.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
        seed: seed.or(file.seed).unwrap_or(d.seed),
    }
}

pub fn noise_spec(file: &FileConfig, flags: &NoiseArgs, seed: Option<u64>) -> NoiseSpec {
    let d = NoiseSpec::default();
    let n = file.noise.clone().unwrap_or_default();
    let poisson = if flags.poisson {
        Some(true)
    } else if flags.no_poisson {
        Some(false)
    } else {
        None
    };
    NoiseSpec {
        poisson: poisson.or(n.poisson).unwrap_or(d.poisson),
        sigma: flags.sigma.or(n.sigma).unwrap_or(d.sigma),
        impulse_p: flags.impulse_p.or(n.impulse_p).unwrap_or(d.impulse_p),
        impulse_kind: flags
            .impulse_kind
            .or(n.impulse_kind)
            .unwrap_or(d.impulse_kind),
        seed: seed.or(file.seed).unwrap_or(d.seed),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Segment(args) => {
            let file = read_config(args.common.config.as_ref())?;
            let cfg = solver_config(&file, &args.solver, args.common.seed);
            commands::segment(&args, &cfg)
        }
        Command::SynthNoise(args) => {
            let file = read_config(args.common.config.as_ref())?;
            let spec = noise_spec(&file, &args.noise, args.common.seed);
            commands::synth_noise(&args, &spec)
        }
        Command::Evaluate(args) => {
            let file = read_config(args.config.as_ref())?;
            let c = args
                .c
                .or(file.c)
                .unwrap_or(SolverConfig::default().clusters);
            commands::evaluate(&args, c)
        }
        Command::Benchmark(args) => {
            let file = read_config(args.common.config.as_ref())?;
            let cfg = solver_config(&file, &args.solver, args.common.seed);
            let noise = noise_spec(&file, &args.noise, args.common.seed);
            commands::benchmark(&args, &cfg, &noise)
        }
        Command::GenSynthetic(args) => commands::gen_synthetic(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
