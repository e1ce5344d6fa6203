use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use wrfcm::config::parse_range;
use wrfcm::experiment::{Algorithm, Benchmark};
use wrfcm::io::{load_image, load_label_map, residual_image, save_image, save_label_map};
use wrfcm::metrics::{report, ClassMetrics};
use wrfcm::synthetic::{self, SyntheticSpec};
use wrfcm::{
    corrupt, fcm_fit, wrfcm_fit, ConvergenceTrace, ImageTensor, LabelMap, MetricsReport, NoiseSpec,
    ResidualField, SolverConfig,
};

use crate::{BenchmarkArgs, EvaluateArgs, GenSyntheticArgs, SegmentArgs, SynthNoiseArgs};

#[derive(Serialize)]
struct MetricsJson<'a> {
    sa: f64,
    sds_macro: f64,
    mcc_macro: f64,
    per_class: &'a [ClassMetrics],
    mapping: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    wall_time_ms: Option<f64>,
}

impl<'a> MetricsJson<'a> {
    fn new(report: &'a MetricsReport) -> Self {
        Self {
            sa: report.sa,
            sds_macro: report.sds_macro,
            mcc_macro: report.mcc_macro,
            per_class: &report.per_class,
            mapping: &report.mapping,
            iterations: None,
            converged: None,
            wall_time_ms: None,
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

struct Fit {
    labels: Vec<usize>,
    segmented: ImageTensor,
    residual: ResidualField,
    trace: ConvergenceTrace,
}

fn fit(algo: Algorithm, x: &ImageTensor, cfg: &SolverConfig) -> Result<Fit> {
    Ok(match algo {
        Algorithm::Wrfcm => {
            let out = wrfcm_fit(x, cfg)?;
            Fit {
                labels: out.labels,
                segmented: out.segmented,
                residual: out.r,
                trace: out.trace,
            }
        }
        Algorithm::Fcm => {
            let out = fcm_fit(x, cfg)?;
            let data = out
                .labels
                .iter()
                .flat_map(|&l| out.v.get(l).to_vec())
                .collect();
            Fit {
                segmented: ImageTensor::new(x.width(), x.height(), x.channels(), data)?,
                residual: ResidualField::filled(x.len(), x.channels(), 0.0),
                labels: out.labels,
                trace: out.trace,
            }
        }
    })
}

pub fn segment(args: &SegmentArgs, cfg: &SolverConfig) -> Result<()> {
    let x = load_image(&args.input)?;
    let truth = match &args.ground_truth {
        Some(path) => Some(load_label_map(path, cfg.clusters)?),
        None => None,
    };
    let start = Instant::now();
    let out = fit(args.algo, &x, cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let labels = LabelMap::new(x.width(), x.height(), out.labels)?;

    let dir = &args.common.out_dir;
    create_dir(dir)?;
    save_label_map(&labels, cfg.clusters, &dir.join("labels.png"))?;
    save_image(&out.segmented, &dir.join("segmented.png"))?;
    save_image(
        &residual_image(&out.residual, x.width(), x.height())?,
        &dir.join("residual.png"),
    )?;
    write_text(&dir.join("trace.csv"), &out.trace.to_csv())?;

    let iterations = out.trace.iterations();
    let mut summary = format!(
        "{}: {} iterations, converged {}",
        args.algo.name(),
        iterations,
        out.trace.converged
    );
    if let Some(truth) = truth {
        let rep = report(&labels, &truth, cfg.clusters)?;
        let mut json = MetricsJson::new(&rep);
        json.iterations = Some(iterations);
        json.converged = Some(out.trace.converged);
        json.wall_time_ms = (!args.no_timing).then_some(elapsed);
        write_json(&dir.join("metrics.json"), &json)?;
        write!(summary, ", SA {:.5}", rep.sa)?;
    }
    println!("{summary}");
    Ok(())
}

pub fn synth_noise(args: &SynthNoiseArgs, spec: &NoiseSpec) -> Result<()> {
    let clean = load_image(&args.input)?;
    let noisy = corrupt(&clean, spec)?;
    create_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join(&args.output);
    save_image(&noisy.clamped(), &path)?;
    println!(
        "{}: {} of {} pixels impulse-replaced",
        path.display(),
        noisy.replaced_count(),
        clean.width() * clean.height()
    );
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs, c: usize) -> Result<()> {
    let pred = load_label_map(&args.input, c)?;
    let truth = load_label_map(&args.ground_truth, c)?;
    let rep = report(&pred, &truth, c)?;
    let json = MetricsJson::new(&rep);
    println!("{}", serde_json::to_string_pretty(&json)?);
    if let Some(dir) = &args.out_dir {
        create_dir(dir)?;
        write_json(&dir.join("metrics.json"), &json)?;
    }
    Ok(())
}

struct Job {
    algo: Algorithm,
    phi: Option<f64>,
    run: u64,
}

struct Row {
    algo: Algorithm,
    phi: Option<f64>,
    seed: u64,
    report: MetricsReport,
    iterations: usize,
    converged: bool,
    wall_time_ms: f64,
}

fn benchmark_source(args: &BenchmarkArgs, c: usize) -> Result<(ImageTensor, LabelMap)> {
    match (&args.input, &args.ground_truth) {
        (Some(input), Some(truth)) => Ok((load_image(input)?, load_label_map(truth, c)?)),
        (None, None) => {
            let spec = SyntheticSpec::evenly_spaced(args.width, args.height, args.geometry, c);
            Ok(synthetic::gen_synthetic(&spec)?)
        }
        (None, Some(_)) => bail!("--ground-truth needs --input"),
        (Some(_), None) => bail!("--input needs --ground-truth"),
    }
}

pub fn benchmark(args: &BenchmarkArgs, cfg: &SolverConfig, noise: &NoiseSpec) -> Result<()> {
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    cfg.validate()?;
    let phis = match &args.phi_sweep {
        Some(text) => parse_range(text)?,
        None => vec![cfg.phi],
    };
    let (clean, truth) = benchmark_source(args, cfg.clusters)?;

    let mut jobs = Vec::new();
    for &algo in &args.algos {
        for run in 0..args.runs {
            match algo {
                Algorithm::Fcm => jobs.push(Job {
                    algo,
                    phi: None,
                    run,
                }),
                Algorithm::Wrfcm => jobs.extend(phis.iter().map(|&phi| Job {
                    algo,
                    phi: Some(phi),
                    run,
                })),
            }
        }
    }

    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|job| -> Result<Row> {
            let spec = NoiseSpec {
                seed: noise.seed.wrapping_add(job.run),
                ..noise.clone()
            };
            let bench = Benchmark {
                observed: corrupt(&clean, &spec)?.observed,
                clean: clean.clone(),
                truth: truth.clone(),
            };
            let run_cfg = SolverConfig {
                phi: job.phi.unwrap_or(cfg.phi),
                seed: cfg.seed.wrapping_add(job.run),
                ..cfg.clone()
            };
            let (seg, report) = bench.run(job.algo, &run_cfg)?;
            Ok(Row {
                algo: job.algo,
                phi: job.phi,
                seed: spec.seed,
                iterations: seg.trace.iterations(),
                converged: seg.trace.converged,
                wall_time_ms: seg.wall_time_ms,
                report,
            })
        })
        .collect::<Result<_>>()?;

    let mut csv =
        String::from("algo,phi,seed,sa,sds_macro,mcc_macro,iterations,converged,wall_time_ms\n");
    for row in &rows {
        let phi = row.phi.map(|p| p.to_string()).unwrap_or_default();
        let time = if args.no_timing {
            String::new()
        } else {
            format!("{:.3}", row.wall_time_ms)
        };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            row.algo.name(),
            phi,
            row.seed,
            row.report.sa,
            row.report.sds_macro,
            row.report.mcc_macro,
            row.iterations,
            row.converged,
            time
        )?;
    }
    create_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("benchmark.csv");
    write_text(&path, &csv)?;
    print!("{csv}");
    Ok(())
}

pub fn gen_synthetic(args: &GenSyntheticArgs) -> Result<()> {
    let mut spec = SyntheticSpec::evenly_spaced(args.width, args.height, args.geometry, args.c);
    if let Some(levels) = &args.levels {
        if levels.len() != args.c {
            bail!("{} levels given for {} regions", levels.len(), args.c);
        }
        spec.levels = levels.clone();
    }
    let (image, labels) = synthetic::gen_synthetic(&spec)?;
    create_dir(&args.out_dir)?;
    let clean: PathBuf = args.out_dir.join("clean.png");
    save_image(&image, &clean)?;
    save_label_map(&labels, args.c, &args.out_dir.join("truth.png"))?;
    println!("{}", clean.display());
    Ok(())
}
