//! End-to-end runs: geometry, coefficients, assembly, spectrum and report,
//! plus the output writers. Outputs are staged in temporary files and only
//! renamed into place once every requested output has been written.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Mat;

use crate::assembly::{assemble_layers, symmetrize, to_weighted_l2, DiscreteOperator};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::functionals::weyl_coefficients_signed;
use crate::geometry::{build_grid, QuadratureGrid};
use crate::linalg::{general_eigenvalues, singular_values, symmetric_eigenvalues};
use crate::report::{
    write_eigen_csv, write_json, CoefficientsReport, CoefficientsSection, CrossCheck, DiagnosticsSection, FitSection,
    PlasmonSection, SpectrumReport, SpectrumSection, StageTimings, StudyReport, REPORT_VERSION,
};
use crate::spectrum::{
    cluster_multiplicities, drop_trivial, moduli, negative_count_study, plasmon_map, split_spectrum, weyl_fit,
    TRIVIAL_EIGENVALUE,
};

/// Geometry and curvature integrals only.
pub fn run_coefficients(config: &RunConfig) -> Result<CoefficientsReport> {
    let grid = grid_for(config)?;
    let coefficients = weyl_coefficients_signed(&grid, config.angular_rule)?;
    Ok(CoefficientsReport {
        version: REPORT_VERSION,
        config_echo: config.clone(),
        resolution: config.resolution,
        n_nodes: grid.len(),
        coefficients: CoefficientsSection::from(&coefficients),
    })
}

/// The full pipeline. When `dump` is given, the Nyström double-layer matrix
/// is written to it before the dense solves.
pub fn run_spectrum(config: &RunConfig, dump: Option<&mut dyn Write>) -> Result<SpectrumReport> {
    let grid = grid_for(config)?;
    let coefficients = weyl_coefficients_signed(&grid, config.angular_rule)?;
    log::info!(
        "coefficients: A = {:.6e}, A+ = {:.6e}, A- = {:.6e}",
        coefficients.a_total,
        coefficients.a_plus,
        coefficients.a_minus
    );

    let n = grid.len();
    let cross_check = n <= config.cross_check_limit;
    let clock = Instant::now();
    let (k, s) = assemble_layers(&grid, &config.assembly_options())?;
    let assembly = clock.elapsed().as_secs_f64();
    log::info!("assembled {n} x {n} layer operators in {assembly:.1}s");
    if let Some(out) = dump {
        k.write_dump(out)?;
    }
    let row_sum_defect = row_sum_defect(&k);
    let raw = if cross_check { Some(general_eigenvalues(k.matrix().as_ref())?) } else { None };

    let (k, s) = (to_weighted_l2(k)?, to_weighted_l2(s)?);
    let l2_singular = if cross_check { Some(singular_values(k.matrix().as_ref())?) } else { None };
    let clock = Instant::now();
    let sym = symmetrize(&k, &s)?;
    let symmetrize_secs = clock.elapsed().as_secs_f64();
    drop((k, s));
    let clock = Instant::now();
    let eigenvalues = symmetric_eigenvalues(sym.matrix.as_ref())?;
    let eigensolve = clock.elapsed().as_secs_f64();
    log::info!("symmetrized in {symmetrize_secs:.1}s, eigensolve in {eigensolve:.1}s");

    let cross = match raw {
        Some(raw) => Some(cross_check_values(&raw, &eigenvalues, &sym.matrix)?),
        None => None,
    };

    let cutoff = config.noise_cutoff;
    let (plus_all, lambda_minus) = split_spectrum(&eigenvalues, cutoff);
    let lambda_plus = drop_trivial(&plus_all).to_vec();
    let trivial_eigenvalue = (lambda_plus.len() < plus_all.len()).then(|| plus_all[0]);
    let n_below_cutoff = eigenvalues.iter().filter(|l| l.abs() < cutoff).count();
    let mut all = moduli(&eigenvalues, cutoff);
    if trivial_eigenvalue.is_some() {
        if let Some(pos) = all.iter().position(|&m| (m - TRIVIAL_EIGENVALUE).abs() < 1e-6) {
            all.remove(pos);
        }
    }

    let mut skipped = Vec::new();
    let mut fit_of = |name: &str, seq: &[f64]| match weyl_fit(seq, config.fit_window) {
        Ok(f) => Some(f),
        Err(e) => {
            skipped.push(format!("{name}: {e}"));
            None
        }
    };
    let total = fit_of("total", &all);
    let plus = fit_of("plus", &lambda_plus);
    let minus = fit_of("minus", &lambda_minus);
    let fit = FitSection {
        c_total_hat: total.map(|f| f.c_hat),
        c_plus_hat: plus.map(|f| f.c_hat),
        c_minus_hat: minus.map(|f| f.c_hat),
        total,
        plus,
        minus,
        skipped,
    };

    let mut plasmon = PlasmonSection { lambda: Vec::new(), epsilon: Vec::new() };
    for &l in &eigenvalues {
        if let Ok(e) = plasmon_map(l) {
            plasmon.lambda.push(l);
            plasmon.epsilon.push(e);
        }
    }

    Ok(SpectrumReport {
        version: REPORT_VERSION,
        config_echo: config.clone(),
        coefficients: CoefficientsSection::from(&coefficients),
        spectrum: SpectrumSection {
            resolution: config.resolution,
            n_nodes: n,
            noise_cutoff: cutoff,
            clusters_plus: cluster_multiplicities(&plus_all, config.cluster_tolerance),
            eigenvalues,
            lambda_plus,
            lambda_minus,
            trivial_eigenvalue,
            n_below_cutoff,
            singular_values: l2_singular,
        },
        fit,
        plasmon,
        diagnostics: DiagnosticsSection {
            n_nodes: n,
            plemelj_residual: sym.diagnostics.plemelj_residual,
            min_eig_neg_s: sym.diagnostics.min_eig_neg_s,
            asymmetry_norm: sym.diagnostics.asymmetry_norm,
            constant_mode_residual: sym.diagnostics.constant_mode_residual,
            row_sum_defect,
            near_field: config.near_field,
            cross_check: cross,
        },
        timings: StageTimings { assembly, symmetrize: symmetrize_secs, eigensolve },
    })
}

pub fn run_study(config: &RunConfig) -> Result<StudyReport> {
    let surface = config.build_surface()?;
    let study =
        negative_count_study(&surface, &config.study.resolutions, config.study.threshold, &config.assembly_options())
            .map_err(|e| match e {
            Error::Config { path, message } if path.starts_with("study/") => {
                Error::Config { path: format!("/{path}"), message }
            }
            other => other,
        })?;
    Ok(StudyReport { version: REPORT_VERSION, config_echo: config.clone(), study })
}

fn grid_for(config: &RunConfig) -> Result<QuadratureGrid> {
    let surface = config.build_surface()?;
    let (n_u, n_v) = config.resolution;
    build_grid(&surface, n_u, n_v).map_err(|e| match e {
        Error::Config { path, message } if path.starts_with("resolution") => {
            Error::Config { path: format!("/{path}"), message }
        }
        other => other,
    })
}

fn row_sum_defect(k: &DiscreteOperator) -> f64 {
    let m = k.matrix();
    (0..m.nrows())
        .map(|i| {
            let row: f64 = (0..m.ncols()).map(|j| m[(i, j)]).sum();
            (row - TRIVIAL_EIGENVALUE).abs()
        })
        .fold(0.0, f64::max)
}

fn cross_check_values(raw: &[(f64, f64)], eigenvalues: &[f64], sym: &Mat<f64>) -> Result<CrossCheck> {
    let mut re: Vec<f64> = raw.iter().map(|z| z.0).collect();
    re.sort_by(|a, b| b.total_cmp(a));
    let raw_eigen_deviation = re.iter().zip(eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_imaginary_part = raw.iter().map(|z| z.1.abs()).fold(0.0, f64::max);
    let sv = singular_values(sym.as_ref())?;
    let mut abs: Vec<f64> = eigenvalues.iter().map(|l| l.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let symmetric_singular_gap = abs.iter().zip(&sv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(CrossCheck { raw_eigen_deviation, max_imaginary_part, symmetric_singular_gap })
}

/// Files written to temporary names and renamed into place on commit.
/// Dropping an uncommitted set removes the temporaries, so a failed run
/// leaves no partial outputs behind.
#[derive(Default)]
pub struct StagedOutputs {
    staged: Vec<(PathBuf, PathBuf)>,
}

impl StagedOutputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates the temporary file for `target` and returns a writer to it.
    pub fn create(&mut self, target: &Path) -> Result<BufWriter<File>> {
        if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut name = target.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(format!(".tmp{}", std::process::id()));
        let tmp = target.with_file_name(name);
        let file = File::create(&tmp)?;
        self.staged.push((tmp, target.to_path_buf()));
        Ok(BufWriter::new(file))
    }

    pub fn targets(&self) -> impl Iterator<Item = &Path> {
        self.staged.iter().map(|(_, t)| t.as_path())
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        let mut done = Vec::with_capacity(staged.len());
        for (tmp, target) in &staged {
            if let Err(e) = fs::rename(tmp, target) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                return Err(e.into());
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}

impl Drop for StagedOutputs {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}

/// Writes a JSON document through a staged file.
pub fn stage_json<T: serde::Serialize>(staged: &mut StagedOutputs, target: &Path, value: &T) -> Result<()> {
    let mut w = staged.create(target)?;
    write_json(value, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn stage_csv(staged: &mut StagedOutputs, target: &Path, report: &SpectrumReport) -> Result<()> {
    let mut w = staged.create(target)?;
    write_eigen_csv(report, &mut w)?;
    w.flush()?;
    Ok(())
}
