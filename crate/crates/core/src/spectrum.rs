//! Post-processing of the discrete NP spectrum: sign split, counting
//! functions, multiplicity clusters, the Weyl fit, the plasmonic map and
//! refinement studies of the negative eigenvalue count.

use serde::Serialize;

use crate::assembly::{assemble_layers, symmetrize, to_weighted_l2, AssemblyOptions, SymmetrizationDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{build_grid, ParametricSurface, QuadratureGrid};
use crate::linalg::symmetric_eigenvalues;

/// Eigenvalue of the constant eigenfunction.
pub const TRIVIAL_EIGENVALUE: f64 = 0.5;

/// Positive eigenvalues descending, and moduli of the negative ones
/// descending. Entries with `|λ| < cutoff` are dropped.
pub fn split_spectrum(eigs: &[f64], cutoff: f64) -> (Vec<f64>, Vec<f64>) {
    let mut plus: Vec<f64> = eigs.iter().copied().filter(|&l| l >= cutoff && l > 0.0).collect();
    let mut minus: Vec<f64> = eigs.iter().filter(|&&l| -l >= cutoff && l < 0.0).map(|l| -l).collect();
    plus.sort_by(|a, b| b.total_cmp(a));
    minus.sort_by(|a, b| b.total_cmp(a));
    (plus, minus)
}

/// Moduli of all eigenvalues with `|λ| ≥ cutoff`, descending.
pub fn moduli(eigs: &[f64], cutoff: f64) -> Vec<f64> {
    let mut m: Vec<f64> = eigs.iter().map(|l| l.abs()).filter(|&a| a >= cutoff && a > 0.0).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

/// Number of entries strictly greater than `level` in a descending
/// sequence.
pub fn counting_function(seq: &[f64], level: f64) -> Result<usize> {
    if level.is_nan() || level <= 0.0 {
        return Err(Error::Domain(format!("counting level must be positive, got {level}")));
    }
    Ok(seq.partition_point(|&x| x > level))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Greedy clustering of a sorted sequence: a value joins the current
/// cluster when it lies within `rel_tol` (relative) of the cluster mean.
pub fn cluster_multiplicities(seq: &[f64], rel_tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut sum = 0.0;
    for &x in seq {
        if let Some(last) = out.last_mut() {
            let mean = sum / last.multiplicity as f64;
            if (x - mean).abs() <= rel_tol * mean.abs().max(x.abs()) {
                sum += x;
                last.multiplicity += 1;
                last.value = sum / last.multiplicity as f64;
                continue;
            }
        }
        sum = x;
        out.push(Cluster { value: x, multiplicity: 1 });
    }
    out
}

/// Fit window, 1-based inclusive indices into the fitted sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// `[4, len/8]` where `len` is the length of the fitted sequence.
    Auto,
    Fixed(usize, usize),
}

impl FitWindow {
    pub fn resolve(self, len: usize) -> Result<(usize, usize)> {
        let (lo, hi) = match self {
            FitWindow::Auto => (4, len / 8),
            FitWindow::Fixed(lo, hi) => (lo, hi),
        };
        if lo < 1 || hi < lo || hi > len {
            return Err(Error::config(
                "fit_window",
                format!("window [{lo}, {hi}] does not fit a sequence of length {len}"),
            ));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylFit {
    /// Median of `λ_j √j` over the window; estimates `A^{1/2}`.
    pub c_hat: f64,
    /// Median of `λ_j² n(λ_j)` over the window; estimates `A`.
    pub counting_estimate: f64,
    pub window: (usize, usize),
}

/// Median-based fit of `λ_j ≈ C j^{−1/2}` on a descending sequence that
/// does not contain the trivial eigenvalue.
pub fn weyl_fit(seq: &[f64], window: FitWindow) -> Result<WeylFit> {
    let (lo, hi) = window.resolve(seq.len())?;
    let scaled: Vec<f64> = (lo..=hi).map(|j| seq[j - 1] * (j as f64).sqrt()).collect();
    let counted = (lo..=hi)
        .map(|j| {
            let l = seq[j - 1];
            Ok(l * l * counting_function(seq, l)? as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(WeylFit { c_hat: median(scaled), counting_estimate: median(counted), window: (lo, hi) })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Removes the leading trivial eigenvalue `1/2` from a descending positive
/// sequence when present.
pub fn drop_trivial(seq: &[f64]) -> &[f64] {
    match seq.first() {
        Some(&x) if (x - TRIVIAL_EIGENVALUE).abs() < 1e-6 => &seq[1..],
        _ => seq,
    }
}

/// Plasmonic eigenvalue `ε = 1 − 2λ / (λ − 1/2)`.
pub fn plasmon_map(lambda: f64) -> Result<f64> {
    if (lambda - TRIVIAL_EIGENVALUE).abs() <= 1e-12 {
        return Err(Error::Pole(lambda));
    }
    Ok(1.0 - 2.0 * lambda / (lambda - TRIVIAL_EIGENVALUE))
}

/// Eigenvalues of the symmetrized NP operator on a grid, descending, with
/// the symmetrization diagnostics.
pub fn np_eigenvalues(
    grid: &QuadratureGrid,
    options: &AssemblyOptions,
) -> Result<(Vec<f64>, SymmetrizationDiagnostics)> {
    let (k, s) = assemble_layers(grid, options)?;
    let (k, s) = (to_weighted_l2(k)?, to_weighted_l2(s)?);
    let sym = symmetrize(&k, &s)?;
    drop((k, s));
    Ok((symmetric_eigenvalues(sym.matrix.as_ref())?, sym.diagnostics))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NegativeTrend {
    /// Same count at the two finest resolutions.
    Bounded,
    /// Strictly increasing across all resolutions.
    Growing,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeCount {
    pub resolution: (usize, usize),
    pub n_nodes: usize,
    pub count: usize,
    pub most_negative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeStudy {
    pub threshold: f64,
    pub rows: Vec<NegativeCount>,
    pub trend: NegativeTrend,
}

pub fn classify_counts(counts: &[usize]) -> NegativeTrend {
    let n = counts.len();
    if n >= 2 && counts.windows(2).all(|w| w[1] > w[0]) {
        NegativeTrend::Growing
    } else if n >= 2 && counts[n - 1] == counts[n - 2] {
        NegativeTrend::Bounded
    } else {
        NegativeTrend::Indeterminate
    }
}

/// Counts eigenvalues below `−threshold` at each resolution and classifies
/// the trend.
pub fn negative_count_study(
    surface: &ParametricSurface,
    resolutions: &[(usize, usize)],
    threshold: f64,
    options: &AssemblyOptions,
) -> Result<NegativeStudy> {
    if resolutions.len() < 3 {
        return Err(Error::config("study/resolutions", "at least three resolutions are required"));
    }
    if resolutions.windows(2).any(|w| w[1].0 * w[1].1 <= w[0].0 * w[0].1) {
        return Err(Error::config("study/resolutions", "resolutions must increase"));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::config("study/threshold", "threshold must be positive"));
    }
    let mut rows = Vec::with_capacity(resolutions.len());
    for &(n_u, n_v) in resolutions {
        let grid = build_grid(surface, n_u, n_v)?;
        let (eigs, _) = np_eigenvalues(&grid, options)?;
        let count = eigs.iter().filter(|&&l| l < -threshold).count();
        let most_negative = eigs.last().copied().unwrap_or(0.0).min(0.0);
        log::info!("negative count at {n_u}x{n_v}: {count}");
        rows.push(NegativeCount { resolution: (n_u, n_v), n_nodes: grid.len(), count, most_negative });
    }
    let counts: Vec<usize> = rows.iter().map(|r| r.count).collect();
    Ok(NegativeStudy { threshold, trend: classify_counts(&counts), rows })
}
