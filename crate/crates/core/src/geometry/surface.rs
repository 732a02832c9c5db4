use std::f64::consts::PI;

use super::Vec3;
use crate::error::{Error, Result};

/// Central-difference step, in parameter units, for the finite-difference
/// derivative mode.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference { step: f64 },
}

/// How the first chart parameter `u` covers its range. The second parameter
/// `v` is always periodic on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// `u ∈ [0, 2π)`, periodic.
    Periodic,
    /// `u ∈ (0, π)`, a polar angle with degenerate poles at both ends.
    Polar,
}

impl ParamKind {
    pub fn range(self) -> (f64, f64) {
        match self {
            ParamKind::Periodic => (0.0, 2.0 * PI),
            ParamKind::Polar => (0.0, PI),
        }
    }
}

/// Position and first/second partial derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

/// Catalog shapes with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `(a sinθ cosφ, b sinθ sinφ, c cosθ)`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Round torus around the z axis; `u` is the toroidal angle, `v` the
    /// poloidal one.
    Torus { major: f64, minor: f64 },
    /// Axisymmetric body with radial profile
    /// `ρ(θ) = c·sqrt(cos 2θ + sqrt(d − sin² 2θ))`, a Cassini-oval surface of
    /// revolution. Non-convex near the waist for `d` close to 1.
    Peanut { c: f64, d: f64 },
}

impl Shape {
    fn param_kind(&self) -> ParamKind {
        match self {
            Shape::Torus { .. } => ParamKind::Periodic,
            Shape::Ellipsoid { .. } | Shape::Peanut { .. } => ParamKind::Polar,
        }
    }

    fn jet(&self, u: f64, v: f64) -> Jet {
        match *self {
            Shape::Ellipsoid { a, b, c } => {
                let (st, ct) = u.sin_cos();
                let (sp, cp) = v.sin_cos();
                Jet {
                    x: Vec3::new(a * st * cp, b * st * sp, c * ct),
                    xu: Vec3::new(a * ct * cp, b * ct * sp, -c * st),
                    xv: Vec3::new(-a * st * sp, b * st * cp, 0.0),
                    xuu: Vec3::new(-a * st * cp, -b * st * sp, -c * ct),
                    xuv: Vec3::new(-a * ct * sp, b * ct * cp, 0.0),
                    xvv: Vec3::new(-a * st * cp, -b * st * sp, 0.0),
                }
            }
            Shape::Torus { major, minor } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let rho = major + minor * cv;
                Jet {
                    x: Vec3::new(rho * cu, rho * su, minor * sv),
                    xu: Vec3::new(-rho * su, rho * cu, 0.0),
                    xv: Vec3::new(-minor * sv * cu, -minor * sv * su, minor * cv),
                    xuu: Vec3::new(-rho * cu, -rho * su, 0.0),
                    xuv: Vec3::new(minor * sv * su, -minor * sv * cu, 0.0),
                    xvv: Vec3::new(-minor * cv * cu, -minor * cv * su, -minor * sv),
                }
            }
            Shape::Peanut { c, d } => {
                let (r, dr, ddr) = peanut_profile(c, d, u);
                let (st, ct) = u.sin_cos();
                let (sp, cp) = v.sin_cos();
                let e = Vec3::new(st * cp, st * sp, ct);
                let et = Vec3::new(ct * cp, ct * sp, -st);
                let ep = Vec3::new(-st * sp, st * cp, 0.0);
                let etp = Vec3::new(-ct * sp, ct * cp, 0.0);
                let epp = Vec3::new(-st * cp, -st * sp, 0.0);
                Jet {
                    x: e * r,
                    xu: e * dr + et * r,
                    xv: ep * r,
                    xuu: e * (ddr - r) + et * (2.0 * dr),
                    xuv: ep * dr + etp * r,
                    xvv: epp * r,
                }
            }
        }
    }
}

/// Radial profile of the peanut body and its first two θ-derivatives.
fn peanut_profile(c: f64, d: f64, t: f64) -> (f64, f64, f64) {
    let (s, co) = (2.0 * t).sin_cos();
    let q = (d - s * s).sqrt();
    let g = co + q;
    let g1 = -2.0 * s - 2.0 * s * co / q;
    let g2 = -4.0 * co - 2.0 * (2.0 * (co * co - s * s) / q + 2.0 * s * s * co * co / (q * q * q));
    let sg = g.sqrt();
    let r = c * sg;
    let r1 = c * g1 / (2.0 * sg);
    let r2 = c * (g2 / (2.0 * sg) - g1 * g1 / (4.0 * g * sg));
    (r, r1, r2)
}

/// Rotation, uniform scaling and translation: `x ↦ scale·R·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub rotation: [[f64; 3]; 3],
    pub scale: f64,
    pub translation: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            scale: 1.0,
            translation: Vec3::ZERO,
        }
    }

    pub fn translation(t: Vec3) -> Self {
        Similarity { translation: t, ..Self::identity() }
    }

    pub fn scaling(s: f64) -> Self {
        Similarity { scale: s, ..Self::identity() }
    }

    /// Rodrigues rotation about `axis` by `angle` radians.
    pub fn rotation(axis: Vec3, angle: f64) -> Self {
        let k = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let rotation = [
            [c + k.x * k.x * t, k.x * k.y * t - k.z * s, k.x * k.z * t + k.y * s],
            [k.y * k.x * t + k.z * s, c + k.y * k.y * t, k.y * k.z * t - k.x * s],
            [k.z * k.x * t - k.y * s, k.z * k.y * t + k.x * s, c + k.z * k.z * t],
        ];
        Similarity { rotation, ..Self::identity() }
    }

    /// Applies `self` first, then `outer`.
    pub fn then(self, outer: Similarity) -> Similarity {
        let mut rotation = [[0.0; 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| outer.rotation[i][k] * self.rotation[k][j]).sum();
            }
        }
        Similarity { rotation, scale: outer.scale * self.scale, translation: outer.apply(self.translation) }
    }

    fn linear(&self, v: Vec3) -> Vec3 {
        let r = &self.rotation;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        ) * self.scale
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.linear(v) + self.translation
    }
}

/// A chart map: a catalog shape, possibly composed with similarities and
/// sphere inversions.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartMap {
    Catalog(Shape),
    Transformed { inner: Box<ChartMap>, map: Similarity },
    Inverted { inner: Box<ChartMap>, center: Vec3, radius: f64 },
}

impl ChartMap {
    pub fn param_kind(&self) -> ParamKind {
        match self {
            ChartMap::Catalog(s) => s.param_kind(),
            ChartMap::Transformed { inner, .. } | ChartMap::Inverted { inner, .. } => inner.param_kind(),
        }
    }

    /// Closed-form jet, composed through the chain rule.
    pub fn jet(&self, u: f64, v: f64) -> Jet {
        match self {
            ChartMap::Catalog(s) => s.jet(u, v),
            ChartMap::Transformed { inner, map } => {
                let j = inner.jet(u, v);
                Jet {
                    x: map.apply(j.x),
                    xu: map.linear(j.xu),
                    xv: map.linear(j.xv),
                    xuu: map.linear(j.xuu),
                    xuv: map.linear(j.xuv),
                    xvv: map.linear(j.xvv),
                }
            }
            ChartMap::Inverted { inner, center, radius } => invert_jet(&inner.jet(u, v), *center, *radius),
        }
    }

    pub fn position(&self, u: f64, v: f64) -> Vec3 {
        match self {
            ChartMap::Catalog(s) => s.jet(u, v).x,
            ChartMap::Transformed { inner, map } => map.apply(inner.position(u, v)),
            ChartMap::Inverted { inner, center, radius } => {
                let d = inner.position(u, v) - *center;
                *center + d * (radius * radius / d.norm_squared())
            }
        }
    }
}

/// Jet of `y = c + ρ² (x − c)/|x − c|²` given the jet of `x`.
fn invert_jet(j: &Jet, center: Vec3, radius: f64) -> Jet {
    let rho2 = radius * radius;
    let d = j.x - center;
    let s = 1.0 / d.norm_squared();
    // first derivative of the inversion applied to a tangent vector w
    let lin = |w: Vec3| (w * s - d * (2.0 * s * s * d.dot(w))) * rho2;
    // ∂_b of lin(x_a), with x_a held at `xa` and the direction derivative of
    // the map along `xb`
    let second = |xab: Vec3, xa: Vec3, xb: Vec3| {
        let sb = -2.0 * s * s * d.dot(xb);
        let t = xab * s - d * (2.0 * s * s * d.dot(xab)) + xa * sb
            - d * (4.0 * s * sb * d.dot(xa))
            - d * (2.0 * s * s * xb.dot(xa))
            - xb * (2.0 * s * s * d.dot(xa));
        t * rho2
    };
    Jet {
        x: center + d * (rho2 * s),
        xu: lin(j.xu),
        xv: lin(j.xv),
        xuu: second(j.xuu, j.xu, j.xu),
        xuv: second(j.xuv, j.xu, j.xv),
        xvv: second(j.xvv, j.xv, j.xv),
    }
}

/// One connected component: a chart map plus the sign (`±1`) that turns
/// `x_u × x_v` into the outer normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub map: ChartMap,
    pub orientation: f64,
}

/// A closed surface made of one or more disjoint components, each covered
/// by a single chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricSurface {
    charts: Vec<Chart>,
    derivative_mode: DerivativeMode,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(name, format!("must be a positive finite number, got {value}")))
    }
}

impl ParametricSurface {
    /// Builds a surface from chart maps, fixing each chart's orientation so
    /// that the normal at the sample farthest from the component centroid
    /// points away from it.
    pub fn from_maps(maps: Vec<ChartMap>, derivative_mode: DerivativeMode) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::config("surface", "a surface needs at least one chart"));
        }
        if let DerivativeMode::FiniteDifference { step } = derivative_mode {
            positive("derivative_step", step)?;
        }
        let charts = maps
            .into_iter()
            .map(|map| {
                let orientation = outward_orientation(&map);
                Chart { map, orientation }
            })
            .collect();
        Ok(ParametricSurface { charts, derivative_mode })
    }

    fn single(shape: Shape) -> Result<Self> {
        Self::from_maps(vec![ChartMap::Catalog(shape)], DerivativeMode::Analytic)
    }

    pub fn sphere(r: f64) -> Result<Self> {
        positive("r", r)?;
        Self::single(Shape::Ellipsoid { a: r, b: r, c: r })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        positive("c", c)?;
        Self::single(Shape::Ellipsoid { a, b, c })
    }

    /// Spheroid flattened along z: semi-axes `(a, a, c)` with `a > c`.
    pub fn oblate_spheroid(a: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        positive("c", c)?;
        if a <= c {
            return Err(Error::config("c", format!("oblate spheroid needs a > c, got a = {a}, c = {c}")));
        }
        Self::ellipsoid(a, a, c)
    }

    /// Spheroid elongated along z: semi-axes `(a, a, c)` with `c > a`.
    pub fn prolate_spheroid(a: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        positive("c", c)?;
        if c <= a {
            return Err(Error::config("c", format!("prolate spheroid needs c > a, got a = {a}, c = {c}")));
        }
        Self::ellipsoid(a, a, c)
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        positive("R", major)?;
        positive("r", minor)?;
        if major <= minor {
            return Err(Error::config("R", format!("torus needs R > r > 0, got R = {major}, r = {minor}")));
        }
        Self::single(Shape::Torus { major, minor })
    }

    /// Peanut body; `d > 1` keeps the profile smooth and positive.
    pub fn peanut(c: f64, d: f64) -> Result<Self> {
        positive("c", c)?;
        if !(d.is_finite() && d > 1.0) {
            return Err(Error::config("d", format!("peanut needs d > 1, got {d}")));
        }
        Self::single(Shape::Peanut { c, d })
    }

    /// Disjoint union of components. Components must not intersect; this is
    /// not checked.
    pub fn union(parts: Vec<ParametricSurface>) -> Result<Self> {
        let mode = parts.first().map(|p| p.derivative_mode).unwrap_or(DerivativeMode::Analytic);
        let maps = parts.into_iter().flat_map(|p| p.charts.into_iter().map(|c| c.map)).collect();
        Self::from_maps(maps, mode)
    }

    pub fn transformed(&self, map: Similarity) -> Result<Self> {
        positive("scale", map.scale)?;
        let maps = self.charts.iter().map(|c| ChartMap::Transformed { inner: Box::new(c.map.clone()), map }).collect();
        Self::from_maps(maps, self.derivative_mode)
    }

    pub fn translated(&self, t: Vec3) -> Result<Self> {
        self.transformed(Similarity::translation(t))
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = mode;
        self
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative_mode
    }

    pub fn param_kind(&self, chart: usize) -> ParamKind {
        self.charts[chart].map.param_kind()
    }

    pub fn position(&self, chart: usize, u: f64, v: f64) -> Vec3 {
        self.charts[chart].map.position(u, v)
    }

    /// Jet in the surface's derivative mode. Orientation is not applied.
    pub fn jet(&self, chart: usize, u: f64, v: f64) -> Jet {
        let map = &self.charts[chart].map;
        match self.derivative_mode {
            DerivativeMode::Analytic => map.jet(u, v),
            DerivativeMode::FiniteDifference { step: h } => {
                let p = |du: f64, dv: f64| map.position(u + du, v + dv);
                let x = p(0.0, 0.0);
                let (up, um) = (p(h, 0.0), p(-h, 0.0));
                let (vp, vm) = (p(0.0, h), p(0.0, -h));
                let h2 = h * h;
                Jet {
                    x,
                    xu: (up - um) / (2.0 * h),
                    xv: (vp - vm) / (2.0 * h),
                    xuu: (up - x * 2.0 + um) / h2,
                    xvv: (vp - x * 2.0 + vm) / h2,
                    xuv: (p(h, h) - p(h, -h) - p(-h, h) + p(-h, -h)) / (4.0 * h2),
                }
            }
        }
    }

    /// Closest distance from `point` to the surface, by sampling and
    /// Gauss–Newton refinement in parameter space.
    pub fn distance_to(&self, point: Vec3) -> f64 {
        self.charts.iter().map(|c| chart_distance(&c.map, point)).fold(f64::INFINITY, f64::min)
    }
}

fn sample_params(kind: ParamKind, n_u: usize, n_v: usize) -> impl Iterator<Item = (f64, f64)> {
    let (u0, u1) = kind.range();
    (0..n_u).flat_map(move |i| {
        let u = u0 + (u1 - u0) * (i as f64 + 0.5) / n_u as f64;
        (0..n_v).map(move |j| (u, 2.0 * PI * (j as f64 + 0.5) / n_v as f64))
    })
}

fn outward_orientation(map: &ChartMap) -> f64 {
    let samples: Vec<(Vec3, Vec3, f64)> = sample_params(map.param_kind(), 24, 48)
        .map(|(u, v)| {
            let j = map.jet(u, v);
            let n = j.xu.cross(j.xv);
            (j.x, n, n.norm())
        })
        .collect();
    let area: f64 = samples.iter().map(|s| s.2).sum();
    let centroid = samples.iter().fold(Vec3::ZERO, |acc, s| acc + s.0 * s.2) / area;
    let (x, n, _) = samples
        .iter()
        .max_by(|a, b| (a.0 - centroid).norm().total_cmp(&(b.0 - centroid).norm()))
        .expect("sample set is non-empty");
    if n.dot(*x - centroid) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn chart_distance(map: &ChartMap, point: Vec3) -> f64 {
    let kind = map.param_kind();
    let mut best: Vec<(f64, f64, f64)> =
        sample_params(kind, 64, 128).map(|(u, v)| ((map.position(u, v) - point).norm(), u, v)).collect();
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dist = best[0].0;
    if kind == ParamKind::Polar {
        for u in [0.0, PI] {
            dist = dist.min((map.position(u, 0.0) - point).norm());
        }
    }
    let (u_lo, u_hi) = kind.range();
    for &(_, mut u, mut v) in best.iter().take(8) {
        for _ in 0..50 {
            let j = map.jet(u, v);
            let r = j.x - point;
            let (a, b, c) = (j.xu.dot(j.xu), j.xu.dot(j.xv), j.xv.dot(j.xv));
            let (gu, gv) = (r.dot(j.xu), r.dot(j.xv));
            let det = a * c - b * b;
            if det <= 1e-300 {
                break;
            }
            let du = (c * gu - b * gv) / det;
            let dv = (a * gv - b * gu) / det;
            u -= du;
            v -= dv;
            if kind == ParamKind::Polar {
                u = u.clamp(u_lo + 1e-12, u_hi - 1e-12);
            }
            if du.abs() + dv.abs() < 1e-15 {
                break;
            }
        }
        dist = dist.min((map.position(u, v) - point).norm());
    }
    dist
}

/// Image of `surface` under the sphere inversion with the given center and
/// radius. Orientation of every component is recomputed, since inversion
/// reverses orientation.
pub fn mobius_invert(surface: &ParametricSurface, center: Vec3, radius: f64) -> Result<ParametricSurface> {
    positive("radius", radius)?;
    if !center.is_finite() {
        return Err(Error::config("center", "center must be finite"));
    }
    let scale = surface
        .charts
        .iter()
        .map(|c| sample_params(c.map.param_kind(), 8, 8).map(|(u, v)| c.map.position(u, v).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(center.norm())
        .max(1.0);
    let distance = surface.distance_to(center);
    if distance <= 1e-9 * scale {
        return Err(Error::SingularInversion { distance });
    }
    let maps =
        surface.charts.iter().map(|c| ChartMap::Inverted { inner: Box::new(c.map.clone()), center, radius }).collect();
    ParametricSurface::from_maps(maps, surface.derivative_mode)
}
