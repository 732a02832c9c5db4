use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use np_spectrum::config::{parse_config, parse_resolution, RunConfig};
use np_spectrum::pipeline::{run_coefficients, run_spectrum, run_study, stage_csv, stage_json, StagedOutputs};
use np_spectrum::report::SpectrumReport;
use np_spectrum::{Error, Result};

/// Spectrum of the Neumann–Poincaré operator on closed surfaces and its
/// curvature-based Weyl asymptotics.
///
/// Exit codes: 0 success, 2 usage, 3 config, 4 single layer not positive
/// definite, 5 numerical failure, 6 degenerate geometry or grid, 7 domain
/// error, 8 I/O.
#[derive(Parser)]
#[command(name = "np-spectrum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature integrals and predicted Weyl coefficients only.
    Coefficients(Common),
    /// Full pipeline: assembly, symmetrization, eigenvalues and fits.
    Spectrum(Common),
    /// Predicted against fitted Weyl constants.
    WeylCheck(Common),
    /// Plasmonic eigenvalues of the leading NP eigenvalues.
    Plasmon {
        #[command(flatten)]
        common: Common,
        /// Number of table rows to print.
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Negative eigenvalue counts across the configured resolutions.
    StudyNegatives(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for outputs; relative output paths in the config resolve
    /// against it, and a default report is written there.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution `NxM`, overriding the config.
    #[arg(long)]
    resolution: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let text = fs::read_to_string(&self.config)?;
        let mut config = parse_config(&text)?;
        if let Some(r) = &self.resolution {
            config.resolution = parse_resolution(r)?;
        }
        Ok(config)
    }

    /// Resolves a configured output, or the default file name when only
    /// `--out` is given.
    fn target(&self, configured: Option<&Path>, default: &str) -> Option<PathBuf> {
        match (configured, &self.out) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Some(dir)) if !default.is_empty() => Some(dir.join(default)),
            (None, _) => None,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // sequential dense kernels give bitwise reproducible reports
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Coefficients(common) => {
            let config = common.load()?;
            let report = run_coefficients(&config)?;
            let c = &report.coefficients;
            println!("surface nodes      {}", report.n_nodes);
            println!("A                  {:.10e}", c.a_total);
            println!("A+                 {:.10e}", c.a_plus);
            println!("A-                 {:.10e}", c.a_minus);
            println!("W (Willmore)       {:.10e}", c.willmore);
            println!("chi (Gauss-Bonnet) {:.10e}", c.euler_char);
            let mut staged = StagedOutputs::new();
            if let Some(t) = common.target(config.outputs.report_json.as_deref(), "coefficients.json") {
                stage_json(&mut staged, &t, &report)?;
            }
            finish(staged)
        }
        Command::Spectrum(common) => {
            let (report, staged) = spectrum_with_outputs(&common)?;
            let s = &report.spectrum;
            println!("nodes {}  positive {}  negative {}", s.n_nodes, s.lambda_plus.len(), s.lambda_minus.len());
            println!("largest {:.10e}  smallest {:.10e}", s.eigenvalues[0], s.eigenvalues[s.eigenvalues.len() - 1]);
            print_diagnostics(&report);
            finish(staged)
        }
        Command::WeylCheck(common) => {
            let (report, staged) = spectrum_with_outputs(&common)?;
            let c = &report.coefficients;
            let f = &report.fit;
            let show = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
            println!("{:<10} {:>12} {:>12}", "constant", "predicted", "fitted");
            println!("{:<10} {:>12.6} {:>12}", "C_total", c.c_total, show(f.c_total_hat));
            println!("{:<10} {:>12.6} {:>12}", "C_plus", c.c_plus, show(f.c_plus_hat));
            println!("{:<10} {:>12.6} {:>12}", "C_minus", c.c_minus, show(f.c_minus_hat));
            for note in &f.skipped {
                println!("skipped fit {note}");
            }
            finish(staged)
        }
        Command::Plasmon { common, limit } => {
            let (report, staged) = spectrum_with_outputs(&common)?;
            println!("{:>6} {:>22} {:>22}", "j", "lambda", "epsilon");
            let p = &report.plasmon;
            for (j, (l, e)) in p.lambda.iter().zip(&p.epsilon).take(limit).enumerate() {
                println!("{:>6} {l:>22.14e} {e:>22.14e}", j + 1);
            }
            finish(staged)
        }
        Command::StudyNegatives(common) => {
            let config = common.load()?;
            let report = run_study(&config)?;
            println!("{:>12} {:>8} {:>8} {:>22}", "resolution", "nodes", "count", "most negative");
            for r in &report.study.rows {
                let res = format!("{}x{}", r.resolution.0, r.resolution.1);
                println!("{res:>12} {:>8} {:>8} {:>22.14e}", r.n_nodes, r.count, r.most_negative);
            }
            let trend = serde_json::to_value(report.study.trend)?;
            println!("trend {}", trend.as_str().unwrap_or_default());
            let mut staged = StagedOutputs::new();
            if let Some(t) = common.target(config.outputs.report_json.as_deref(), "study.json") {
                stage_json(&mut staged, &t, &report)?;
            }
            finish(staged)
        }
    }
}

fn spectrum_with_outputs(common: &Common) -> Result<(SpectrumReport, StagedOutputs)> {
    let config = common.load()?;
    let mut staged = StagedOutputs::new();
    let report = match common.target(config.outputs.matrix_dump.as_deref(), "") {
        Some(t) => {
            let mut w = staged.create(&t)?;
            let report = run_spectrum(&config, Some(&mut w))?;
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            report
        }
        None => run_spectrum(&config, None)?,
    };
    if let Some(t) = common.target(config.outputs.report_json.as_deref(), "report.json") {
        stage_json(&mut staged, &t, &report)?;
    }
    if let Some(t) = common.target(config.outputs.eigen_csv.as_deref(), "eigenvalues.csv") {
        stage_csv(&mut staged, &t, &report)?;
    }
    Ok((report, staged))
}

fn print_diagnostics(report: &SpectrumReport) {
    let d = &report.diagnostics;
    println!("plemelj residual       {:.3e}", d.plemelj_residual);
    println!("asymmetry norm         {:.3e}", d.asymmetry_norm);
    println!("min eigenvalue of -S   {:.3e}", d.min_eig_neg_s);
    println!("row sum defect         {:.3e}", d.row_sum_defect);
    if let Some(c) = &d.cross_check {
        println!("raw eigen deviation    {:.3e}", c.raw_eigen_deviation);
        println!("symmetric sv gap       {:.3e}", c.symmetric_singular_gap);
    }
}

fn finish(staged: StagedOutputs) -> Result<()> {
    for path in staged.commit()? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
