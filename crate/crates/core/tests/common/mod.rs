//! Oracles and invariant checks shared by the property suite and the
//! acceptance test. Every check returns the measured defect so callers can
//! both assert on it and report it.

#![allow(dead_code)]

use std::f64::consts::PI;

use np_spectrum::config::parse_config;
use np_spectrum::functionals::{curvature_form, signed_parts, weyl_coefficients_signed, AngularRule};
use np_spectrum::geometry::{
    build_grid, evaluate_frame, mobius_invert, principal_curvatures, ParametricSurface, QuadratureGrid, Similarity,
    Vec3,
};
use np_spectrum::pipeline::run_coefficients;

/// Step of the finite-difference frame oracle.
pub const FD_STEP: f64 = 1e-5;

pub struct CatalogEntry {
    pub name: &'static str,
    pub surface: ParametricSurface,
    /// Resolution at which Gauss–Bonnet is accurate to 1e-6.
    pub resolution: (usize, usize),
    pub euler_char: f64,
}

/// The catalog surfaces with their default parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name, surface: np_spectrum::Result<ParametricSurface>, resolution, euler_char| CatalogEntry {
        name,
        surface: surface.unwrap(),
        resolution,
        euler_char,
    };
    vec![
        entry("sphere", ParametricSurface::sphere(1.0), (48, 96), 2.0),
        entry("ellipsoid", ParametricSurface::ellipsoid(2.0, 1.2, 1.0), (48, 96), 2.0),
        entry("oblate_spheroid", ParametricSurface::oblate_spheroid(2.0, 1.0), (48, 96), 2.0),
        entry("prolate_spheroid", ParametricSurface::prolate_spheroid(1.0, 2.0), (48, 96), 2.0),
        entry("torus", ParametricSurface::torus(2.0, 1.0), (64, 64), 0.0),
        entry("peanut", ParametricSurface::peanut(1.0, 1.1), (64, 128), 2.0),
    ]
}

pub fn inverted_ellipsoid() -> ParametricSurface {
    let base = ParametricSurface::ellipsoid(2.0, 1.2, 1.0).unwrap();
    mobius_invert(&base, Vec3::new(0.0, 0.0, 2.0), 2.0).unwrap()
}

/// First and second fundamental forms by central differences with step
/// `h`. Tangents are differences of positions. The second derivatives are
/// differences of the analytic tangents, whose correctness the first-form
/// comparison already establishes; differencing positions twice would put
/// a rounding floor of about `ε|x|/h²` on the result.
pub fn fd_forms(surface: &ParametricSurface, chart: usize, u: f64, v: f64, h: f64) -> [f64; 6] {
    let p = |du: f64, dv: f64| surface.position(chart, u + du, v + dv);
    let xu = (p(h, 0.0) - p(-h, 0.0)) / (2.0 * h);
    let xv = (p(0.0, h) - p(0.0, -h)) / (2.0 * h);
    let jet = |du: f64, dv: f64| surface.jet(chart, u + du, v + dv);
    let xuu = (jet(h, 0.0).xu - jet(-h, 0.0).xu) / (2.0 * h);
    let xvv = (jet(0.0, h).xv - jet(0.0, -h).xv) / (2.0 * h);
    let xuv = (jet(0.0, h).xu - jet(0.0, -h).xu) / (2.0 * h);
    let n = xu.cross(xv).normalized() * surface.charts()[chart].orientation;
    [xu.dot(xu), xu.dot(xv), xv.dot(xv), xuu.dot(n), xuv.dot(n), xvv.dot(n)]
}

/// Largest discrepancy between analytic and finite-difference forms over
/// the grid nodes, relative to the size of each form.
pub fn frame_consistency_defect(grid: &QuadratureGrid) -> f64 {
    let surface = grid.surface();
    let mut worst = 0.0f64;
    for (node, a) in grid.nodes().iter().zip(grid.frames()) {
        let fd = fd_forms(surface, node.chart, node.u, node.v, FD_STEP);
        let analytic = [a.e, a.f, a.g, a.l, a.m, a.n];
        for form in [0..3, 3..6] {
            let scale = analytic[form.clone()].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for i in form {
                worst = worst.max((analytic[i] - fd[i]).abs() / scale);
            }
        }
    }
    worst
}

/// Largest defect of `k1 k2 = (LN − M²)/(EG − F²)` and of `k1 + k2` against
/// the trace of `I⁻¹ II`, with the shape operator built from an explicit
/// 2×2 inverse.
pub fn curvature_identity_defect(grid: &QuadratureGrid) -> f64 {
    let mut worst = 0.0f64;
    for f in grid.frames() {
        let c = principal_curvatures(f);
        let det = f.e * f.g - f.f * f.f;
        let inv = [[f.g / det, -f.f / det], [-f.f / det, f.e / det]];
        let second = [[f.l, f.m], [f.m, f.n]];
        let w = |i: usize, j: usize| inv[i][0] * second[0][j] + inv[i][1] * second[1][j];
        let trace = w(0, 0) + w(1, 1);
        let gauss = (f.l * f.n - f.m * f.m) / det;
        worst = worst.max((c.k1 * c.k2 - gauss).abs() / gauss.abs().max(1.0));
        worst = worst.max((c.k1 + c.k2 - trace).abs() / trace.abs().max(1.0));
    }
    worst
}

/// Largest change of the scaled curvatures `k·r` between spheres of radius
/// 1 and 3, and of the curvatures of the ellipsoid under a rigid motion.
pub fn scale_and_motion_defect() -> f64 {
    let mut worst = 0.0f64;
    let unit = ParametricSurface::sphere(1.0).unwrap();
    let big = ParametricSurface::sphere(3.0).unwrap();
    let (a, b) = (build_grid(&unit, 12, 24).unwrap(), build_grid(&big, 12, 24).unwrap());
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        let (ca, cb) = (principal_curvatures(fa), principal_curvatures(fb));
        worst = worst.max((ca.k1 - 3.0 * cb.k1).abs()).max((ca.k2 - 3.0 * cb.k2).abs());
    }
    let ell = ParametricSurface::ellipsoid(2.0, 1.2, 1.0).unwrap();
    let motion =
        Similarity::rotation(Vec3::new(1.0, -2.0, 0.5), 1.1).then(Similarity::translation(Vec3::new(3.0, 1.0, -2.0)));
    let moved = ell.transformed(motion).unwrap();
    let scaled = ell.transformed(motion.then(Similarity::scaling(3.0))).unwrap();
    for &(u, v) in &[(0.3, 0.2), (1.1, 2.5), (2.0, 4.0), (2.8, 5.9)] {
        let c0 = principal_curvatures(&evaluate_frame(&ell, 0, u, v).unwrap());
        let c1 = principal_curvatures(&evaluate_frame(&moved, 0, u, v).unwrap());
        let c3 = principal_curvatures(&evaluate_frame(&scaled, 0, u, v).unwrap());
        worst = worst.max((c0.k1 - c1.k1).abs()).max((c0.k2 - c1.k2).abs());
        worst = worst.max((c0.k1 - 3.0 * c3.k1).abs()).max((c0.k2 - 3.0 * c3.k2).abs());
    }
    worst
}

/// `∫_0^{2π} (k1 cos²θ + k2 sin²θ)² dθ = π(3k1² + 2k1k2 + 3k2²)/4`.
pub fn angular_square_integral(k1: f64, k2: f64) -> f64 {
    PI * (3.0 * k1 * k1 + 2.0 * k1 * k2 + 3.0 * k2 * k2) / 4.0
}

/// Pointwise `(x₊)² + (x₋)² = x²` on sampled angles at every node, and the
/// relative gap between `A₊ + A₋` and the surface integral of the closed
/// form above.
pub fn split_identity_defects(grid: &QuadratureGrid) -> (f64, f64) {
    let mut pointwise = 0.0f64;
    let mut square = 0.0;
    for (f, &w) in grid.frames().iter().zip(grid.weights()) {
        let c = principal_curvatures(f);
        for i in 0..16 {
            let x = curvature_form(c.k1, c.k2, i as f64 * PI / 8.0 + 0.1);
            let (p, m) = signed_parts(x);
            pointwise = pointwise.max((p * p + m * m - x * x).abs() / (x * x).max(1e-300));
        }
        square += w * angular_square_integral(c.k1, c.k2);
    }
    let co = weyl_coefficients_signed(grid, AngularRule::Exact).unwrap();
    let expected = square / (128.0 * PI * PI);
    (pointwise, ((co.a_plus + co.a_minus) - expected).abs() / expected)
}

/// Change in `A₊` and `A₋` when the configured angular resolution goes
/// from 64 to 128, through the config and coefficient pipeline.
pub fn angular_doubling_change(surface_json: &str, resolution: (usize, usize)) -> f64 {
    let at = |n: usize| {
        let cfg = parse_config(&format!(
            r#"{{"surface":{surface_json},"resolution":[{},{}],"angular_resolution":{n}}}"#,
            resolution.0, resolution.1
        ))
        .unwrap();
        run_coefficients(&cfg).unwrap().coefficients
    };
    let (a, b) = (at(64), at(128));
    (a.a_plus - b.a_plus).abs().max((a.a_minus - b.a_minus).abs())
}

/// JSON surface descriptions of the catalog entries, for config-level
/// checks.
pub fn catalog_json() -> Vec<(&'static str, &'static str, (usize, usize))> {
    vec![
        ("sphere", r#"{"name":"sphere","r":1}"#, (48, 96)),
        ("ellipsoid", r#"{"name":"ellipsoid","a":2,"b":1.2,"c":1}"#, (48, 96)),
        ("oblate_spheroid", r#"{"name":"oblate_spheroid","a":2,"c":1}"#, (48, 96)),
        ("prolate_spheroid", r#"{"name":"prolate_spheroid","a":1,"c":2}"#, (48, 96)),
        ("torus", r#"{"name":"torus","R":2,"r":1}"#, (64, 64)),
        ("peanut", r#"{"name":"peanut"}"#, (64, 128)),
    ]
}

/// Synthetic `C j^{-1/2} (1 + δ_j)` sequence with a deterministic
/// perturbation bounded by `amplitude`.
pub fn synthetic_weyl_sequence(c: f64, len: usize, amplitude: f64) -> Vec<f64> {
    let mut seq: Vec<f64> =
        (1..=len).map(|j| c / (j as f64).sqrt() * (1.0 + amplitude * (j as f64 * 1.7).sin())).collect();
    seq.sort_by(|a, b| b.total_cmp(a));
    seq
}
