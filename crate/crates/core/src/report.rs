//! Report types and their serialized forms: JSON with a fixed 17-digit
//! float format, and the eigenvalue CSV table.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::assembly::NearField;
use crate::config::RunConfig;
use crate::error::Result;
use crate::functionals::{AngularRule, WeylCoefficients};
use crate::spectrum::{Cluster, NegativeStudy, WeylFit};

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;
/// Version of the eigenvalue CSV layout, written into its header.
pub const CSV_VERSION: u32 = 1;
pub const CSV_COLUMNS: &str = "j,lambda,sign,mu_j,epsilon_j";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientsSection {
    #[serde(rename = "A_total")]
    pub a_total: f64,
    #[serde(rename = "A_plus")]
    pub a_plus: f64,
    #[serde(rename = "A_minus")]
    pub a_minus: f64,
    #[serde(rename = "C_total")]
    pub c_total: f64,
    #[serde(rename = "C_plus")]
    pub c_plus: f64,
    #[serde(rename = "C_minus")]
    pub c_minus: f64,
    pub willmore: f64,
    pub euler_char: f64,
    pub genus_euler_char: i64,
    /// `|A₊ + A₋ − A|`.
    pub split_defect: f64,
    pub angular_rule: AngularRule,
}

impl From<&WeylCoefficients> for CoefficientsSection {
    fn from(c: &WeylCoefficients) -> Self {
        CoefficientsSection {
            a_total: c.a_total,
            a_plus: c.a_plus,
            a_minus: c.a_minus,
            c_total: c.a_total.sqrt(),
            c_plus: c.a_plus.sqrt(),
            c_minus: c.a_minus.sqrt(),
            willmore: c.willmore,
            euler_char: c.euler_char,
            genus_euler_char: c.euler_char.round() as i64,
            split_defect: (c.a_plus + c.a_minus - c.a_total).abs(),
            angular_rule: c.angular_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSection {
    pub resolution: (usize, usize),
    pub n_nodes: usize,
    pub noise_cutoff: f64,
    /// All eigenvalues of the symmetrized operator, descending.
    pub eigenvalues: Vec<f64>,
    /// Positive eigenvalues above the cutoff, descending, without the
    /// trivial eigenvalue.
    pub lambda_plus: Vec<f64>,
    /// Moduli of the negative eigenvalues above the cutoff, descending.
    pub lambda_minus: Vec<f64>,
    pub trivial_eigenvalue: Option<f64>,
    pub n_below_cutoff: usize,
    pub clusters_plus: Vec<Cluster>,
    /// Singular values of the operator in the weighted L² basis, when
    /// computed.
    pub singular_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSection {
    #[serde(rename = "C_total_hat")]
    pub c_total_hat: Option<f64>,
    #[serde(rename = "C_plus_hat")]
    pub c_plus_hat: Option<f64>,
    #[serde(rename = "C_minus_hat")]
    pub c_minus_hat: Option<f64>,
    pub total: Option<WeylFit>,
    pub plus: Option<WeylFit>,
    pub minus: Option<WeylFit>,
    /// Reasons for fits that could not be made.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlasmonSection {
    /// Nontrivial eigenvalues, descending.
    pub lambda: Vec<f64>,
    /// Plasmonic eigenvalue of each entry of `lambda`.
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    /// Largest gap between sorted real parts of the raw Nyström eigenvalues
    /// and the symmetrized eigenvalues.
    pub raw_eigen_deviation: f64,
    pub max_imaginary_part: f64,
    /// Largest gap between sorted eigenvalue moduli and singular values of
    /// the symmetrized operator.
    pub symmetric_singular_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSection {
    pub n_nodes: usize,
    pub plemelj_residual: f64,
    pub min_eig_neg_s: f64,
    pub asymmetry_norm: f64,
    pub constant_mode_residual: f64,
    /// `max_i |Σ_j K_ij − 1/2|` of the Nyström matrix.
    pub row_sum_defect: f64,
    pub near_field: Option<NearField>,
    /// Absent above the configured cross-check size limit.
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub version: u32,
    pub config_echo: RunConfig,
    pub coefficients: CoefficientsSection,
    pub spectrum: SpectrumSection,
    pub fit: FitSection,
    pub plasmon: PlasmonSection,
    pub diagnostics: DiagnosticsSection,
    /// Wall-clock seconds per stage. Not serialized, so that reports stay
    /// reproducible byte for byte.
    #[serde(skip)]
    pub timings: StageTimings,
}

/// Wall-clock seconds spent in the expensive stages of a spectrum run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub assembly: f64,
    pub symmetrize: f64,
    pub eigensolve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientsReport {
    pub version: u32,
    pub config_echo: RunConfig,
    pub resolution: (usize, usize),
    pub n_nodes: usize,
    pub coefficients: CoefficientsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub version: u32,
    pub config_echo: RunConfig,
    pub study: NegativeStudy,
}

/// Pretty JSON formatter that writes every float in scientific notation
/// with 17 significant digits.
pub struct FixedDigitsFormatter {
    inner: PrettyFormatter<'static>,
}

impl FixedDigitsFormatter {
    pub fn new() -> Self {
        FixedDigitsFormatter { inner: PrettyFormatter::new() }
    }
}

impl Default for FixedDigitsFormatter {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for FixedDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes any report with [`FixedDigitsFormatter`], newline-terminated.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigitsFormatter::new());
    value.serialize(&mut ser)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(value, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Writes the eigenvalue table ordered by modulus, largest first. `mu_j` is
/// the j-th singular value when available, `epsilon_j` is blank for the
/// trivial eigenvalue, and `sign` is `0` below the noise cutoff.
pub fn write_eigen_csv<W: Write>(report: &SpectrumReport, mut out: W) -> Result<()> {
    let cutoff = report.spectrum.noise_cutoff;
    let mut by_modulus = report.spectrum.eigenvalues.clone();
    by_modulus.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    writeln!(out, "# np-spectrum eigenvalue table, csv version {CSV_VERSION}")?;
    writeln!(out, "{CSV_COLUMNS}")?;
    for (i, &lambda) in by_modulus.iter().enumerate() {
        let sign = if lambda.abs() < cutoff {
            "0"
        } else if lambda > 0.0 {
            "+"
        } else {
            "-"
        };
        let mu = match &report.spectrum.singular_values {
            Some(sv) => format!("{:.16e}", sv[i]),
            None => String::new(),
        };
        let eps = match crate::spectrum::plasmon_map(lambda) {
            Ok(e) => format!("{e:.16e}"),
            Err(_) => String::new(),
        };
        writeln!(out, "{},{lambda:.16e},{sign},{mu},{eps}", i + 1)?;
    }
    Ok(())
}
