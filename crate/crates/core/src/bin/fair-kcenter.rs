use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fair_kcenter::io::{
    emit_plot_data, load_dataset, run_dataset_with_artifacts, Algorithm, Bounds, ColumnSpec,
    RunConfig, RunReport, SweepAxis, DEFAULT_TLE_SECONDS,
};
use fair_kcenter::synth::{self, SyntheticConfig};
use fair_kcenter::{Error, Result};

#[derive(Parser)]
#[command(name = "fair-kcenter", version, about = "Fair k-center clustering with overlapping groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write a JSON report.
    Run(RunArgs),
    /// Repeat `run` over a list of values for one parameter and write tidy plot data.
    Sweep(SweepArgs),
    /// Generate a synthetic Gaussian-blob dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Fair,
    Greedy,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Binary-search tolerance on the radius.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Upper bound on each group's share of a cluster (one value or one per group).
    #[arg(long, value_delimiter = ',', requires = "beta", conflicts_with = "delta")]
    alpha: Option<Vec<f64>>,
    /// Lower bound on each group's share of a cluster (one value or one per group).
    #[arg(long, value_delimiter = ',', requires = "alpha", conflicts_with = "delta")]
    beta: Option<Vec<f64>>,
    /// Derive bounds from the dataset's group ratios: alpha = r/(1-delta), beta = r(1-delta).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value = "fair")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include the binary-search trace in the report.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = DEFAULT_TLE_SECONDS)]
    tle_seconds: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    group_cols: Vec<String>,
    /// Feature columns; defaults to every non-group column.
    #[arg(long, value_delimiter = ',')]
    feature_cols: Option<Vec<String>>,
    /// Min-max scale every feature to [0, 1].
    #[arg(long)]
    normalize: bool,
    /// Write the frequency table at the final radius as CSV.
    #[arg(long)]
    dump_table: Option<PathBuf>,
    /// Write the LP at the final radius in text form.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    K,
    Delta,
    Alpha,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parameter to vary; its value from the base arguments is overridden.
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Directory for the per-run JSON reports.
    #[arg(long)]
    reports_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    blobs: usize,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 20.0)]
    extent: f64,
    #[arg(long, default_value_t = 0.5)]
    mixing: f64,
    #[arg(long, default_value_t = 0.0)]
    overlap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let bounds = match (&self.alpha, &self.beta, self.delta) {
            (Some(a), Some(b), None) => Bounds::Explicit {
                alpha: a.clone(),
                beta: b.clone(),
            },
            (None, None, Some(d)) => Bounds::Delta(d),
            _ => {
                return Err(Error::InvalidConfig(
                    "give either --alpha and --beta, or --delta".into(),
                ))
            }
        };
        Ok(RunConfig {
            input: self.input.clone(),
            columns: ColumnSpec {
                group_cols: self.group_cols.clone(),
                feature_cols: self.feature_cols.clone(),
                normalize: self.normalize,
            },
            k: self.k,
            epsilon: self.epsilon,
            bounds,
            algorithm: match self.algorithm {
                AlgorithmArg::Fair => Algorithm::Fair,
                AlgorithmArg::Greedy => Algorithm::Greedy,
            },
            seed: self.seed,
            repeats: self.repeats,
            trace: self.trace,
            tle_seconds: self.tle_seconds,
        })
    }
}

fn write_out(path: Option<&PathBuf>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = args.config()?;
    config.validate()?;
    let data = load_dataset(&config.input, &config.columns)?;
    let artifacts = run_dataset_with_artifacts(&data, &config)?;
    if let Some(search) = &artifacts.search {
        if let Some(p) = &args.dump_table {
            let f = fs::File::create(p)?;
            search.table.write_csv(&data.model, f)?;
        }
        if let Some(p) = &args.dump_lp {
            fs::write(p, search.lp.to_text())?;
        }
    }
    write_out(args.output.as_ref(), &artifacts.report.to_json()?)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let base = args.run.config()?;
    let data = load_dataset(&base.input, &base.columns)?;
    let axis = match args.axis {
        AxisArg::K => SweepAxis::K,
        AxisArg::Delta => SweepAxis::Delta,
        AxisArg::Alpha => SweepAxis::Alpha,
    };
    if let Some(dir) = &args.reports_dir {
        fs::create_dir_all(dir)?;
    }
    let mut reports: Vec<RunReport> = Vec::with_capacity(args.values.len());
    for (i, &v) in args.values.iter().enumerate() {
        let mut cfg = base.clone();
        match axis {
            SweepAxis::K => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!("k must be a positive integer, got {v}")));
                }
                cfg.k = v as usize;
            }
            SweepAxis::Delta => cfg.bounds = Bounds::Delta(v),
            SweepAxis::Alpha => {
                let beta = match &cfg.bounds {
                    Bounds::Explicit { beta, .. } => beta.clone(),
                    Bounds::Delta(_) => vec![0.0],
                };
                cfg.bounds = Bounds::Explicit { alpha: vec![v], beta };
            }
            SweepAxis::Groups => unreachable!("not offered on the command line"),
        }
        let report = run_dataset_with_artifacts(&data, &cfg)?.report;
        eprintln!(
            "{}={v}: status {:?}, cost {:?}, {:.2}s",
            axis.name(),
            report.status,
            report.cost,
            report.runtime_seconds
        );
        if let Some(dir) = &args.reports_dir {
            fs::write(dir.join(format!("run_{i:03}.json")), report.to_json()?)?;
        }
        reports.push(report);
    }
    write_out(args.run.output.as_ref(), &emit_plot_data(&reports, axis)?)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        n: args.n,
        dim: args.dim,
        blobs: args.blobs,
        groups: args.groups,
        spread: args.spread,
        extent: args.extent,
        mixing: args.mixing,
        overlap: args.overlap,
        seed: args.seed,
    };
    let data = synth::generate(&cfg)?;
    match &args.output {
        Some(p) => synth::write_csv(&data, fs::File::create(p)?),
        None => synth::write_csv(&data, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
