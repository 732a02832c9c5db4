use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{evaluate_frame, ParamKind, ParametricSurface, SurfaceFrame};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre_on, CompensatedSum};

/// Identity of a grid, used to check that operators were built on the same
/// discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridId(u64);

impl GridId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        GridId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub chart: usize,
    pub u: f64,
    pub v: f64,
}

/// Parameter rectangle owned by one node. The cells of a chart tile its
/// parameter domain, and the node weight equals the cell area to quadrature
/// accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

/// Tensor-product quadrature over every chart of a surface.
///
/// Polar directions use Gauss–Legendre nodes (which never touch the poles),
/// periodic directions use the equispaced trapezoidal rule. Weights include
/// the area element.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    id: GridId,
    surface: ParametricSurface,
    resolution: (usize, usize),
    nodes: Vec<Node>,
    weights: Vec<f64>,
    frames: Vec<SurfaceFrame>,
    cells: Vec<Cell>,
}

impl QuadratureGrid {
    pub fn id(&self) -> GridId {
        self.id
    }

    pub fn surface(&self) -> &ParametricSurface {
        &self.surface
    }

    /// `(n_u, n_v)` used for every chart.
    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn frames(&self) -> &[SurfaceFrame] {
        &self.frames
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Sum of the weights, i.e. the discrete surface area.
    pub fn area(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }
}

/// One-dimensional rule on a parameter direction: nodes, weights and the
/// cell edges around each node.
fn rule(kind: ParamKind, n: usize) -> (Vec<f64>, Vec<f64>, Vec<(f64, f64)>) {
    match kind {
        ParamKind::Periodic => {
            let h = 2.0 * PI / n as f64;
            let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let cells = nodes.iter().map(|&t| (t - 0.5 * h, t + 0.5 * h)).collect();
            (nodes, vec![h; n], cells)
        }
        ParamKind::Polar => {
            let (nodes, weights) = gauss_legendre_on(n, 0.0, PI);
            let mut edge = 0.0;
            let cells = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let lo = edge;
                    edge = if i + 1 == n { PI } else { edge + w };
                    (lo, edge)
                })
                .collect();
            (nodes, weights, cells)
        }
    }
}

/// Builds the tensor-product grid with `n_u × n_v` nodes per chart.
pub fn build_grid(surface: &ParametricSurface, n_u: usize, n_v: usize) -> Result<QuadratureGrid> {
    if n_u < 4 {
        return Err(Error::config("resolution/0", format!("n_u must be at least 4, got {n_u}")));
    }
    if n_v < 4 {
        return Err(Error::config("resolution/1", format!("n_v must be at least 4, got {n_v}")));
    }
    let per_chart = n_u * n_v;
    let total = per_chart * surface.charts().len();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut frames = Vec::with_capacity(total);
    let mut cells = Vec::with_capacity(total);
    for chart in 0..surface.charts().len() {
        let (us, wus, cus) = rule(surface.param_kind(chart), n_u);
        let (vs, wvs, cvs) = rule(ParamKind::Periodic, n_v);
        for i in 0..n_u {
            for j in 0..n_v {
                let frame = evaluate_frame(surface, chart, us[i], vs[j])?;
                nodes.push(Node { chart, u: us[i], v: vs[j] });
                weights.push(wus[i] * wvs[j] * frame.area_element);
                frames.push(frame);
                cells.push(Cell { u0: cus[i].0, u1: cus[i].1, v0: cvs[j].0, v1: cvs[j].1 });
            }
        }
    }
    Ok(QuadratureGrid {
        id: GridId::fresh(),
        surface: surface.clone(),
        resolution: (n_u, n_v),
        nodes,
        weights,
        frames,
        cells,
    })
}

/// `Σ f(frame_i) w_i` with compensated summation.
pub fn surface_integral<F>(grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&SurfaceFrame) -> f64,
{
    let mut sum = CompensatedSum::new();
    for (node, (frame, &w)) in grid.frames.iter().zip(&grid.weights).enumerate() {
        let value = f(frame);
        if !value.is_finite() {
            return Err(Error::Numerical { context: "surface integrand", node });
        }
        sum.add(value * w);
    }
    Ok(sum.value())
}
