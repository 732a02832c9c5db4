use super::{ParametricSurface, Vec3};
use crate::error::{Error, Result};

/// Local differential geometry at one parameter point.
///
/// `(e, f, g)` is the first fundamental form and `(l, m, n)` the second,
/// taken against the outer normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    pub chart: usize,
    pub u: f64,
    pub v: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub area_element: f64,
}

impl SurfaceFrame {
    /// `EG − F²`.
    pub fn metric_det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvatures {
    /// Larger principal curvature.
    pub k1: f64,
    pub k2: f64,
    pub mean: f64,
    pub gauss: f64,
}

pub fn evaluate_frame(surface: &ParametricSurface, chart: usize, u: f64, v: f64) -> Result<SurfaceFrame> {
    let j = surface.jet(chart, u, v);
    let e = j.xu.dot(j.xu);
    let f = j.xu.dot(j.xv);
    let g = j.xv.dot(j.xv);
    let det = e * g - f * f;
    if !(det.is_finite() && det > f64::EPSILON * e * g) {
        return Err(Error::DegenerateChart { chart, u, v, det });
    }
    let cross = j.xu.cross(j.xv);
    let area_element = cross.norm();
    let normal = cross * (surface.charts()[chart].orientation / area_element);
    Ok(SurfaceFrame {
        chart,
        u,
        v,
        point: j.x,
        normal,
        e,
        f,
        g,
        l: j.xuu.dot(normal),
        m: j.xuv.dot(normal),
        n: j.xvv.dot(normal),
        area_element,
    })
}

/// Eigenvalues of the shape operator `I⁻¹ II`, with mean and Gauss
/// curvature.
pub fn principal_curvatures(frame: &SurfaceFrame) -> Curvatures {
    let det = frame.metric_det();
    let (e, f, g, l, m, n) = (frame.e, frame.f, frame.g, frame.l, frame.m, frame.n);
    let mean = (e * n - 2.0 * f * m + g * l) / (2.0 * det);
    let gauss = (l * n - m * m) / det;
    // H² − K from the shape operator entries, which avoids the cancellation
    // of the direct difference at umbilic points
    let w11 = (g * l - f * m) / det;
    let w12 = (g * m - f * n) / det;
    let w21 = (e * m - f * l) / det;
    let w22 = (e * n - f * m) / det;
    let half_gap = 0.5 * (w11 - w22);
    let disc = (half_gap * half_gap + w12 * w21).max(0.0).sqrt();
    Curvatures { k1: mean + disc, k2: mean - disc, mean, gauss }
}
