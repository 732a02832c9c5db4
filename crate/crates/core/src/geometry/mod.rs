//! Smooth closed parametric surfaces, their differential geometry, and the
//! quadrature grids every later stage integrates over.
//!
//! Sign convention: normals point out of the enclosed body and the second
//! fundamental form is taken against that outer normal, so a round sphere
//! of radius `r` has both principal curvatures equal to `-1/r`.

mod frame;
mod grid;
mod surface;
mod vec3;

pub use frame::{evaluate_frame, principal_curvatures, Curvatures, SurfaceFrame};
pub use grid::{build_grid, surface_integral, Cell, GridId, Node, QuadratureGrid};
pub use surface::{
    mobius_invert, Chart, ChartMap, DerivativeMode, Jet, ParamKind, ParametricSurface, Shape, Similarity,
    DEFAULT_FD_STEP,
};
pub use vec3::Vec3;
