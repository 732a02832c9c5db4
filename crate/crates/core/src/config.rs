//! JSON run configuration. Every schema error carries the JSON pointer of
//! the offending field.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::assembly::{AssemblyOptions, NearField};
use crate::error::{Error, Result};
use crate::functionals::AngularRule;
use crate::geometry::{mobius_invert, DerivativeMode, ParamKind, ParametricSurface, Vec3, DEFAULT_FD_STEP};
use crate::spectrum::FitWindow;

/// Catalog surface names accepted in a config.
pub const CATALOG: [&str; 6] = ["sphere", "ellipsoid", "oblate_spheroid", "prolate_spheroid", "torus", "peanut"];

/// Default sphere-type resolution `(n_θ, n_φ)`.
pub const SPHERE_RESOLUTION: (usize, usize) = (48, 96);
/// Default torus-type resolution.
pub const TORUS_RESOLUTION: (usize, usize) = (64, 64);

/// Surface description: a catalog entry or a wrapper around other entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSpec {
    Sphere {
        r: f64,
        offset: [f64; 3],
    },
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
        offset: [f64; 3],
    },
    OblateSpheroid {
        a: f64,
        c: f64,
        offset: [f64; 3],
    },
    ProlateSpheroid {
        a: f64,
        c: f64,
        offset: [f64; 3],
    },
    Torus {
        #[serde(rename = "R")]
        major: f64,
        r: f64,
        offset: [f64; 3],
    },
    Peanut {
        c: f64,
        d: f64,
        offset: [f64; 3],
    },
    Invert {
        center: [f64; 3],
        radius: f64,
        inner: Box<SurfaceSpec>,
    },
    Components(Vec<SurfaceSpec>),
}

impl SurfaceSpec {
    /// Builds the surface, reporting constructor errors under `pointer`.
    pub fn build(&self) -> Result<ParametricSurface> {
        self.build_at("/surface")
    }

    fn build_at(&self, pointer: &str) -> Result<ParametricSurface> {
        let at = |e: Error| match e {
            Error::Config { path, message } => Error::Config { path: format!("{pointer}/{path}"), message },
            other => other,
        };
        let shift = |s: ParametricSurface, o: &[f64; 3]| -> Result<ParametricSurface> {
            if o.iter().all(|&x| x == 0.0) {
                Ok(s)
            } else {
                s.translated(Vec3::from(*o))
            }
        };
        match self {
            SurfaceSpec::Sphere { r, offset } => shift(ParametricSurface::sphere(*r).map_err(at)?, offset),
            SurfaceSpec::Ellipsoid { a, b, c, offset } => {
                shift(ParametricSurface::ellipsoid(*a, *b, *c).map_err(at)?, offset)
            }
            SurfaceSpec::OblateSpheroid { a, c, offset } => {
                shift(ParametricSurface::oblate_spheroid(*a, *c).map_err(at)?, offset)
            }
            SurfaceSpec::ProlateSpheroid { a, c, offset } => {
                shift(ParametricSurface::prolate_spheroid(*a, *c).map_err(at)?, offset)
            }
            SurfaceSpec::Torus { major, r, offset } => shift(ParametricSurface::torus(*major, *r).map_err(at)?, offset),
            SurfaceSpec::Peanut { c, d, offset } => shift(ParametricSurface::peanut(*c, *d).map_err(at)?, offset),
            SurfaceSpec::Invert { center, radius, inner } => {
                let base = inner.build_at(&format!("{pointer}/invert/inner"))?;
                mobius_invert(&base, Vec3::from(*center), *radius).map_err(|e| match e {
                    Error::Config { path, message } => {
                        Error::Config { path: format!("{pointer}/invert/{path}"), message }
                    }
                    other => other,
                })
            }
            SurfaceSpec::Components(parts) => {
                let built = parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.build_at(&format!("{pointer}/components/{i}")))
                    .collect::<Result<Vec<_>>>()?;
                ParametricSurface::union(built)
            }
        }
    }

    /// Parameter kind of the first component, which picks the default
    /// resolution.
    fn kind(&self) -> ParamKind {
        match self {
            SurfaceSpec::Torus { .. } => ParamKind::Periodic,
            SurfaceSpec::Invert { inner, .. } => inner.kind(),
            SurfaceSpec::Components(parts) => parts.first().map_or(ParamKind::Polar, |p| p.kind()),
            _ => ParamKind::Polar,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Outputs {
    pub report_json: Option<PathBuf>,
    pub eigen_csv: Option<PathBuf>,
    pub matrix_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub resolutions: Vec<(usize, usize)>,
    pub threshold: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { resolutions: vec![(24, 24), (32, 32), (48, 48)], threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub derivatives: DerivativeMode,
    pub resolution: (usize, usize),
    pub angular_rule: AngularRule,
    pub fit_window: FitWindow,
    pub noise_cutoff: f64,
    pub cluster_tolerance: f64,
    pub near_field: Option<NearField>,
    /// Largest node count for which the nonsymmetric eigenvalues and the
    /// singular values are computed.
    pub cross_check_limit: usize,
    pub outputs: Outputs,
    pub study: StudyConfig,
}

impl RunConfig {
    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions { near_field: self.near_field }
    }

    /// The configured surface with the configured derivative mode.
    pub fn build_surface(&self) -> Result<ParametricSurface> {
        Ok(self.surface.build()?.with_derivative_mode(self.derivatives))
    }
}

impl serde::Serialize for DerivativeMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            DerivativeMode::Analytic => s.serialize_str("analytic"),
            DerivativeMode::FiniteDifference { step } => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("finite_difference", step)?;
                m.end()
            }
        }
    }
}

/// Parses and validates a JSON config, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text)?;
    let obj = object(&root, "")?;
    check_keys(
        obj,
        "",
        &[
            "surface",
            "derivatives",
            "resolution",
            "angular_rule",
            "angular_resolution",
            "fit_window",
            "noise_cutoff",
            "cluster_tolerance",
            "near_field",
            "cross_check_limit",
            "outputs",
            "study",
        ],
    )?;
    let surface = parse_surface(obj.get("surface").ok_or_else(|| missing("/surface"))?, "/surface")?;
    // constructor checks such as R > r > 0 run at parse time
    surface.build()?;
    let derivatives = match obj.get("derivatives") {
        None => DerivativeMode::Analytic,
        Some(Value::String(s)) if s == "analytic" => DerivativeMode::Analytic,
        Some(Value::String(s)) if s == "finite_difference" => {
            DerivativeMode::FiniteDifference { step: DEFAULT_FD_STEP }
        }
        Some(Value::Object(m)) => {
            check_keys(m, "/derivatives", &["finite_difference"])?;
            let pointer = "/derivatives/finite_difference";
            let step = positive(m.get("finite_difference").ok_or_else(|| missing(pointer))?, pointer)?;
            DerivativeMode::FiniteDifference { step }
        }
        Some(_) => {
            return Err(Error::config(
                "/derivatives",
                "expected \"analytic\", \"finite_difference\" or {\"finite_difference\": step}",
            ))
        }
    };
    let resolution = match obj.get("resolution") {
        None => match surface.kind() {
            ParamKind::Periodic => TORUS_RESOLUTION,
            ParamKind::Polar => SPHERE_RESOLUTION,
        },
        Some(v) => resolution_pair(v, "/resolution")?,
    };
    let n_theta = match obj.get("angular_resolution") {
        None => 64,
        Some(v) => {
            let n = count(v, "/angular_resolution")?;
            if n < 16 {
                return Err(Error::config("/angular_resolution", format!("must be at least 16, got {n}")));
            }
            n
        }
    };
    let angular_rule = match obj.get("angular_rule").map(|v| (v, v.as_str())) {
        None | Some((_, Some("exact"))) => AngularRule::Exact,
        Some((_, Some("trapezoid"))) => AngularRule::Trapezoid(n_theta),
        Some(_) => return Err(Error::config("/angular_rule", "expected \"exact\" or \"trapezoid\"")),
    };
    let fit_window = match obj.get("fit_window") {
        None => FitWindow::Auto,
        Some(Value::String(s)) if s == "auto" => FitWindow::Auto,
        Some(Value::Array(a)) if a.len() == 2 => {
            let lo = count(&a[0], "/fit_window/0")?;
            let hi = count(&a[1], "/fit_window/1")?;
            if lo < 1 || hi < lo {
                return Err(Error::config("/fit_window", format!("need 1 <= j_lo <= j_hi, got [{lo}, {hi}]")));
            }
            FitWindow::Fixed(lo, hi)
        }
        Some(_) => return Err(Error::config("/fit_window", "expected \"auto\" or [j_lo, j_hi]")),
    };
    let noise_cutoff = opt_positive(obj, "noise_cutoff", "", 1e-10)?;
    let cluster_tolerance = opt_positive(obj, "cluster_tolerance", "", 5e-2)?;
    let near_field = match obj.get("near_field") {
        None | Some(Value::Bool(true)) => Some(NearField::default()),
        Some(Value::Bool(false)) | Some(Value::Null) => None,
        Some(Value::Object(m)) => {
            check_keys(m, "/near_field", &["eta", "order", "close_ratio", "close_order"])?;
            let d = NearField::default();
            let close_ratio = match m.get("close_ratio") {
                None => d.close_ratio,
                Some(v) => non_negative(v, "/near_field/close_ratio")?,
            };
            Some(NearField {
                eta: opt_positive(m, "eta", "/near_field", d.eta)?,
                order: opt_count(m, "order", "/near_field", d.order)?,
                close_ratio,
                close_order: opt_count(m, "close_order", "/near_field", d.close_order)?,
            })
        }
        Some(_) => return Err(Error::config("/near_field", "expected a boolean or an object")),
    };
    let cross_check_limit = match obj.get("cross_check_limit") {
        None => 2304,
        Some(v) => v
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| Error::config("/cross_check_limit", "expected a non-negative integer"))?,
    };
    let outputs = match obj.get("outputs") {
        None => Outputs::default(),
        Some(Value::Array(list)) => {
            let mut out = Outputs::default();
            for (i, v) in list.iter().enumerate() {
                parse_outputs(v, &format!("/outputs/{i}"), &mut out)?;
            }
            out
        }
        Some(v) => {
            let mut out = Outputs::default();
            parse_outputs(v, "/outputs", &mut out)?;
            out
        }
    };
    let study = match obj.get("study") {
        None => StudyConfig::default(),
        Some(v) => {
            let m = object(v, "/study")?;
            check_keys(m, "/study", &["resolutions", "threshold"])?;
            let d = StudyConfig::default();
            let resolutions = match m.get("resolutions") {
                None => d.resolutions,
                Some(Value::Array(a)) => a
                    .iter()
                    .enumerate()
                    .map(|(i, r)| resolution_pair(r, &format!("/study/resolutions/{i}")))
                    .collect::<Result<Vec<_>>>()?,
                Some(_) => return Err(Error::config("/study/resolutions", "expected an array of [n_u, n_v] pairs")),
            };
            StudyConfig { resolutions, threshold: opt_positive(m, "threshold", "/study", d.threshold)? }
        }
    };
    Ok(RunConfig {
        surface,
        derivatives,
        resolution,
        angular_rule,
        fit_window,
        noise_cutoff,
        cluster_tolerance,
        near_field,
        cross_check_limit,
        outputs,
        study,
    })
}

/// Reads one `{report_json, eigen_csv, matrix_dump}` object into `out`.
/// Outputs may be given as one object or as a list of such objects.
fn parse_outputs(v: &Value, pointer: &str, out: &mut Outputs) -> Result<()> {
    let m = object(v, pointer)?;
    check_keys(m, pointer, &["report_json", "eigen_csv", "matrix_dump"])?;
    for (key, slot) in [
        ("report_json", &mut out.report_json),
        ("eigen_csv", &mut out.eigen_csv),
        ("matrix_dump", &mut out.matrix_dump),
    ] {
        match m.get(key) {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) if !s.is_empty() => {
                if slot.is_some() {
                    return Err(Error::config(format!("{pointer}/{key}"), "output given more than once"));
                }
                *slot = Some(PathBuf::from(s));
            }
            Some(_) => return Err(Error::config(format!("{pointer}/{key}"), "expected a non-empty path string")),
        }
    }
    Ok(())
}

fn missing(pointer: &str) -> Error {
    Error::config(pointer, "required field is missing")
}

fn object<'a>(v: &'a Value, pointer: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::config(pointer, "expected an object"))
}

fn check_keys(m: &Map<String, Value>, pointer: &str, allowed: &[&str]) -> Result<()> {
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::config(
                format!("{pointer}/{k}"),
                format!("unknown field; expected one of: {}", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn number(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| Error::config(pointer, "expected a finite number"))
}

fn positive(v: &Value, pointer: &str) -> Result<f64> {
    let x = number(v, pointer)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(pointer, format!("must be strictly positive, got {x}")))
    }
}

fn non_negative(v: &Value, pointer: &str) -> Result<f64> {
    let x = number(v, pointer)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::config(pointer, format!("must be non-negative, got {x}")))
    }
}

fn opt_positive(m: &Map<String, Value>, key: &str, pointer: &str, default: f64) -> Result<f64> {
    m.get(key).map_or(Ok(default), |v| positive(v, &format!("{pointer}/{key}")))
}

fn count(v: &Value, pointer: &str) -> Result<usize> {
    v.as_u64()
        .filter(|&n| n > 0)
        .map(|n| n as usize)
        .ok_or_else(|| Error::config(pointer, "expected a positive integer"))
}

fn opt_count(m: &Map<String, Value>, key: &str, pointer: &str, default: usize) -> Result<usize> {
    m.get(key).map_or(Ok(default), |v| count(v, &format!("{pointer}/{key}")))
}

fn resolution_pair(v: &Value, pointer: &str) -> Result<(usize, usize)> {
    match v.as_array() {
        Some(a) if a.len() == 2 => {
            let n_u = count(&a[0], &format!("{pointer}/0"))?;
            let n_v = count(&a[1], &format!("{pointer}/1"))?;
            for (i, n) in [n_u, n_v].into_iter().enumerate() {
                if n < 4 {
                    return Err(Error::config(format!("{pointer}/{i}"), format!("must be at least 4, got {n}")));
                }
            }
            Ok((n_u, n_v))
        }
        _ => Err(Error::config(pointer, "expected [n_u, n_v]")),
    }
}

/// Parses `NxM`, as given on the command line.
pub fn parse_resolution(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::config("--resolution", format!("expected NxM with N, M >= 4, got `{text}`"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let n_u: usize = a.trim().parse().map_err(|_| bad())?;
    let n_v: usize = b.trim().parse().map_err(|_| bad())?;
    if n_u < 4 || n_v < 4 {
        return Err(bad());
    }
    Ok((n_u, n_v))
}

fn catalog_list() -> String {
    format!("{} (or the wrappers `invert` and `components`)", CATALOG.join(", "))
}

fn parse_surface(v: &Value, pointer: &str) -> Result<SurfaceSpec> {
    let m = object(v, pointer)?;
    if let Some(inv) = m.get("invert") {
        check_keys(m, pointer, &["invert"])?;
        let p = format!("{pointer}/invert");
        let im = object(inv, &p)?;
        check_keys(im, &p, &["center", "radius", "inner"])?;
        let center = vec3(im.get("center").ok_or_else(|| missing(&format!("{p}/center")))?, &format!("{p}/center"))?;
        let radius =
            positive(im.get("radius").ok_or_else(|| missing(&format!("{p}/radius")))?, &format!("{p}/radius"))?;
        let inner =
            parse_surface(im.get("inner").ok_or_else(|| missing(&format!("{p}/inner")))?, &format!("{p}/inner"))?;
        return Ok(SurfaceSpec::Invert { center, radius, inner: Box::new(inner) });
    }
    if let Some(parts) = m.get("components") {
        check_keys(m, pointer, &["components"])?;
        let p = format!("{pointer}/components");
        let list = parts
            .as_array()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::config(&p, "expected a non-empty array"))?;
        return Ok(SurfaceSpec::Components(
            list.iter().enumerate().map(|(i, s)| parse_surface(s, &format!("{p}/{i}"))).collect::<Result<_>>()?,
        ));
    }
    let name_ptr = format!("{pointer}/name");
    let name = match m.get("name") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(Error::config(name_ptr, format!("expected a string naming one of: {}", catalog_list()))),
        None => return Err(Error::config(name_ptr, format!("required; valid surfaces: {}", catalog_list()))),
    };
    let req = |k: &str| -> Result<f64> {
        let p = format!("{pointer}/{k}");
        positive(m.get(k).ok_or_else(|| Error::config(&p, format!("required parameter of `{name}`")))?, &p)
    };
    let opt = |k: &str, d: f64| -> Result<f64> { m.get(k).map_or(Ok(d), |v| positive(v, &format!("{pointer}/{k}"))) };
    let offset = match m.get("offset") {
        None => [0.0; 3],
        Some(v) => vec3(v, &format!("{pointer}/offset"))?,
    };
    let (spec, keys): (SurfaceSpec, &[&str]) = match name {
        "sphere" => (SurfaceSpec::Sphere { r: req("r")?, offset }, &["r"]),
        "ellipsoid" => (SurfaceSpec::Ellipsoid { a: req("a")?, b: req("b")?, c: req("c")?, offset }, &["a", "b", "c"]),
        "oblate_spheroid" => (SurfaceSpec::OblateSpheroid { a: req("a")?, c: req("c")?, offset }, &["a", "c"]),
        "prolate_spheroid" => (SurfaceSpec::ProlateSpheroid { a: req("a")?, c: req("c")?, offset }, &["a", "c"]),
        "torus" => (SurfaceSpec::Torus { major: req("R")?, r: req("r")?, offset }, &["R", "r"]),
        "peanut" => (SurfaceSpec::Peanut { c: opt("c", 1.0)?, d: opt("d", 1.1)?, offset }, &["c", "d"]),
        other => {
            return Err(Error::config(
                name_ptr,
                format!("unknown surface `{other}`; valid surfaces: {}", catalog_list()),
            ))
        }
    };
    let mut allowed = vec!["name", "offset"];
    allowed.extend_from_slice(keys);
    check_keys(m, pointer, &allowed)?;
    Ok(spec)
}

fn vec3(v: &Value, pointer: &str) -> Result<[f64; 3]> {
    match v.as_array() {
        Some(a) if a.len() == 3 => Ok([
            number(&a[0], &format!("{pointer}/0"))?,
            number(&a[1], &format!("{pointer}/1"))?,
            number(&a[2], &format!("{pointer}/2"))?,
        ]),
        _ => Err(Error::config(pointer, "expected [x, y, z]")),
    }
}
