use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use graph_frechet::community::{estimate_c, DEFAULT_CAP, DEFAULT_K};
use graph_frechet::optimizer::full_mean_spectrum;
use graph_frechet::{
    d_a, d_ac, fit_frechet_mean, regression_error, FitConfig, RegressionDataset, Spectrum,
};
use graph_frechet_cli::experiments::{run_experiment, ExperimentConfig, ExperimentName};
use graph_frechet_cli::files::{parse_graph, write_graph};
use graph_frechet_cli::manifest::DatasetManifest;
use graph_frechet_cli::output::{status_label, trace_csv, FitResultOut, RegressOut, RegressPointOut};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Fréchet means of graph datasets under truncated adjacency-spectral
/// pseudometrics, via stochastic block model fits.
#[derive(Parser)]
#[command(name = "graph-frechet", version, about)]
struct Cli {
    /// Override every embedded sampling seed (item i uses seed + i).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sampling and eigensolves.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph from a model config JSON.
    Sample {
        /// Path to a model config, e.g. {"model":"sbm","n":600,...}.
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the adjacency spectrum of a graph file.
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
        /// Truncate to the top-c eigenvalues.
        #[arg(long)]
        c: Option<usize>,
    },
    /// Truncated (or full) adjacency-spectral distance between two graphs.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        c: Option<usize>,
    },
    /// Estimate the number of communities from a dataset manifest.
    EstimateCommunities {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Fit the Fréchet-mean block model to a dataset manifest.
    FrechetMean {
        #[arg(long)]
        dataset: PathBuf,
        /// Fit configuration JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fréchet regression over a time-tagged dataset manifest.
    Regress {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated query times.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also fit at every sample time and report the errors (e, e_sbm).
        #[arg(long)]
        errors: bool,
    },
    /// Run a named experiment end to end, writing artifacts to --out.
    Experiment {
        #[arg(long, value_enum)]
        name: ExperimentName,
        /// Graph size override.
        #[arg(long)]
        n: Option<usize>,
        /// Dataset size override.
        #[arg(long)]
        samples: Option<usize>,
        /// Histogram bin count.
        #[arg(long)]
        bins: Option<usize>,
        /// Fixed block count for the fit.
        #[arg(long)]
        c: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(graph_frechet_cli::exit_code_for(&err));
        }
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    n: usize,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct DistanceOut {
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<usize>,
}

#[derive(Serialize)]
struct EstimateOut {
    c_star: usize,
    effective_c: usize,
    exhausted: bool,
    iterations: Vec<graph_frechet::community::ScanIteration>,
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { model } => {
            let text = std::fs::read_to_string(&model)
                .with_context(|| format!("cannot read {}", model.display()))?;
            let mut config: graph_frechet::ModelConfig =
                serde_json::from_str(&text).context("bad model config")?;
            if let Some(seed) = cli.seed {
                config = config.with_seed(seed);
            }
            let graph = config.sample()?;
            match &cli.out {
                Some(path) => write_graph(&graph, path)?,
                None => print!("{}", graph_frechet::graph::io::write_edge_list(&graph)),
            }
            Ok(())
        }
        Command::Spectrum { graph, c } => {
            let g = parse_graph(&graph)?;
            let spectrum = match c {
                Some(c) => g.truncated_spectrum(c)?,
                None => g.spectrum(),
            };
            let out = SpectrumOut {
                n: g.n(),
                values: spectrum.values().to_vec(),
            };
            emit_json(&out, cli.out.as_deref())
        }
        Command::Distance { a, b, c } => {
            let ga = parse_graph(&a)?;
            let gb = parse_graph(&b)?;
            let distance = match c {
                Some(c) => d_ac(&ga, &gb, c)?,
                None => d_a(&ga, &gb)?,
            };
            emit_json(&DistanceOut { distance, c }, cli.out.as_deref())
        }
        Command::EstimateCommunities { dataset, k, cap } => {
            let manifest = DatasetManifest::load(&dataset)?;
            let base = dataset.parent().unwrap_or(Path::new("."));
            let graphs = manifest.realise_graphs(base, cli.seed)?;
            let spectra: Vec<Spectrum> = graphs.iter().map(|g| g.spectrum()).collect();
            let mean = Spectrum::new(full_mean_spectrum(&spectra));
            let est = estimate_c(&mean, k, cap)?;
            let out = EstimateOut {
                c_star: est.c_star,
                effective_c: est.effective_c(),
                exhausted: est.exhausted,
                iterations: est.iterations,
            };
            emit_json(&out, cli.out.as_deref())
        }
        Command::FrechetMean { dataset, config } => {
            let manifest = DatasetManifest::load(&dataset)?;
            let base = dataset.parent().unwrap_or(Path::new("."));
            let graphs = manifest.realise_graphs(base, cli.seed)?;
            let fit_cfg = load_fit_config(config.as_deref())?;
            let start = Instant::now();
            let fit = fit_frechet_mean(&graphs, &fit_cfg)?;
            let out = FitResultOut::new(&fit, start.elapsed().as_secs_f64());
            emit_json(&out, cli.out.as_deref())?;
            if let Some(path) = &cli.out {
                let csv = path.with_extension("trace.csv");
                std::fs::write(&csv, trace_csv(&fit.trace))
                    .with_context(|| format!("cannot write {}", csv.display()))?;
            }
            Ok(())
        }
        Command::Regress {
            dataset,
            times,
            config,
            errors,
        } => {
            if times.is_empty() {
                bail!("no query times given");
            }
            let manifest = DatasetManifest::load(&dataset)?;
            let base = dataset.parent().unwrap_or(Path::new("."));
            let samples = manifest.realise_timed(base, cli.seed)?;
            let ds = RegressionDataset::new(samples)?;
            let fit_cfg = load_fit_config(config.as_deref())?;
            let start = Instant::now();
            let mut points = Vec::new();
            for &t in &times {
                let fit = ds.fit_regression_point(t, &fit_cfg)?;
                let (status, abort_reason) = status_label(&fit.status);
                points.push(RegressPointOut {
                    t,
                    params: (&fit.params).into(),
                    fitted_spectrum: fit.fitted_spectrum.clone(),
                    final_objective: fit.final_objective,
                    status,
                    abort_reason,
                    density_clamped: fit.density_clamped,
                });
            }
            let (e, e_sbm) = if errors {
                let mut fits = Vec::new();
                let mut sample_times: Vec<f64> = ds.samples().iter().map(|(t, _)| *t).collect();
                sample_times.sort_by(f64::total_cmp);
                sample_times.dedup_by(|a, b| a.total_cmp(b).is_eq());
                for t in sample_times {
                    fits.push((t, ds.fit_regression_point(t, &fit_cfg)?));
                }
                let (e, e_sbm) = regression_error(&ds, &fits)?;
                (Some(e), Some(e_sbm))
            } else {
                (None, None)
            };
            let out = RegressOut {
                pooled_c: ds.pooled_c(),
                points,
                e,
                e_sbm,
                timing_seconds: start.elapsed().as_secs_f64(),
            };
            emit_json(&out, cli.out.as_deref())
        }
        Command::Experiment {
            name,
            n,
            samples,
            bins,
            c,
        } => {
            let mut cfg = ExperimentConfig::preset(name);
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(samples) = samples {
                cfg.samples = samples;
            }
            if let Some(bins) = bins {
                cfg.bins = bins;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            cfg.c_override = c;
            let out_dir = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("experiment-{}", cfg.name.as_str())));
            let report = run_experiment(&cfg, &out_dir)?;
            println!(
                "{} finished: {} stages, artifacts in {}",
                report.experiment,
                report.stages.len(),
                out_dir.display()
            );
            Ok(())
        }
    }
}

fn load_fit_config(path: Option<&Path>) -> Result<FitConfig> {
    let cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("bad fit config {}", p.display()))?
        }
        None => FitConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}
