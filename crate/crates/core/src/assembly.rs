//! Dense Nyström discretizations of the double-layer (NP) and single-layer
//! operators, the weighted-L² change of basis, the Calderón residual and the
//! symmetrization `K̃ = (−S)^{−1/2} K (−S)^{1/2}`.
//!
//! Off-diagonal entries are point evaluations of the kernel times the source
//! weight. For node pairs closer than a few cell diameters the point value
//! is replaced by the kernel averaged over both cells with a tensor
//! Gauss–Legendre sub-rule. Without that averaging the anisotropic cells of
//! the polar grid produce spurious negative eigenvalues and an indefinite
//! `−S` near the poles.

use std::f64::consts::PI;
use std::io::{Read, Write};

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{GridId, QuadratureGrid, Vec3};
use crate::linalg::{spectral_norm, symmetric_eigen};
use crate::numerics::{gauss_legendre_on, CompensatedSum};

const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Which vector space a matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Acts on nodal values: `K_ij = k(x_i, x_j) w_j`.
    Nystrom,
    /// Conjugated by `diag(√w)`: `B_ij = k(x_i, x_j) √(w_i w_j)`.
    WeightedL2,
}

impl Basis {
    fn tag(self) -> u32 {
        match self {
            Basis::Nystrom => 0,
            Basis::WeightedL2 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    DoubleLayer,
    SingleLayer,
    Symmetrized,
}

impl OperatorKind {
    fn tag(self) -> u32 {
        match self {
            OperatorKind::DoubleLayer => 0,
            OperatorKind::SingleLayer => 1,
            OperatorKind::Symmetrized => 2,
        }
    }
}

/// Cell-averaging rule for nearby node pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearField {
    /// Pairs with `|x_i − x_j| < eta · max(diam_i, diam_j)` are averaged.
    pub eta: f64,
    /// Gauss–Legendre points per direction and cell.
    pub order: usize,
    /// Pairs with `|x_i − x_j| < close_ratio · max(diam_i, diam_j)` use
    /// `close_order` instead.
    pub close_ratio: f64,
    pub close_order: usize,
}

impl Default for NearField {
    fn default() -> Self {
        NearField { eta: 2.0, order: 4, close_ratio: 1.0, close_order: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// `None` gives the plain point Nyström matrix off the diagonal.
    pub near_field: Option<NearField>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { near_field: Some(NearField::default()) }
    }
}

/// A dense operator matrix together with the basis it is expressed in and
/// the grid it was assembled on.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Mat<f64>,
    basis: Basis,
    kind: OperatorKind,
    grid_id: GridId,
    weights: Vec<f64>,
}

impl DiscreteOperator {
    /// Wraps an explicit matrix. `grid` supplies the weights and identity.
    pub fn from_matrix(matrix: Mat<f64>, basis: Basis, kind: OperatorKind, grid: &QuadratureGrid) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::config(
                "matrix",
                format!("expected a {n}x{n} matrix, got {}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        Ok(DiscreteOperator { matrix, basis, kind, grid_id: grid.id(), weights: grid.weights().to_vec() })
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid_id(&self) -> GridId {
        self.grid_id
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Writes the matrix in the binary dump format.
    pub fn write_dump<W: Write>(&self, out: W) -> Result<()> {
        write_dump(out, self.matrix.as_ref(), self.basis, self.kind)
    }
}

/// Numbers recorded while symmetrizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetrizationDiagnostics {
    pub plemelj_residual: f64,
    /// Smallest eigenvalue of `−S` in the weighted-L² basis.
    pub min_eig_neg_s: f64,
    /// `‖K̃ − K̃ᵀ‖₂ / ‖K̃‖₂` before the explicit symmetrization.
    pub asymmetry_norm: f64,
    /// `‖Av − v/2‖` for the averaged matrix `A = (K̃ + K̃ᵀ)/2` and the unit
    /// image `v` of the constant function, before `v` is pinned as an exact
    /// eigenvector.
    pub constant_mode_residual: f64,
}

/// Exactly symmetric matrix whose eigenvalues estimate the NP spectrum.
#[derive(Debug, Clone)]
pub struct SymmetrizedOperator {
    pub matrix: Mat<f64>,
    pub diagnostics: SymmetrizationDiagnostics,
    pub grid_id: GridId,
}

impl SymmetrizedOperator {
    pub fn write_dump<W: Write>(&self, out: W) -> Result<()> {
        write_dump(out, self.matrix.as_ref(), Basis::WeightedL2, OperatorKind::Symmetrized)
    }
}

/// Sub-quadrature of every cell: points, outer normals and area weights,
/// `m²` per node, stored node-major.
struct CellRule {
    m2: usize,
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    weights: Vec<f64>,
    areas: Vec<f64>,
}

impl CellRule {
    fn new(grid: &QuadratureGrid, m: usize) -> Self {
        let surface = grid.surface();
        let m2 = m * m;
        let n = grid.len();
        let mut rule = CellRule {
            m2,
            points: Vec::with_capacity(n * m2),
            normals: Vec::with_capacity(n * m2),
            weights: Vec::with_capacity(n * m2),
            areas: Vec::with_capacity(n),
        };
        for (node, cell) in grid.nodes().iter().zip(grid.cells()) {
            let orientation = surface.charts()[node.chart].orientation;
            let (us, wus) = gauss_legendre_on(m, cell.u0, cell.u1);
            let (vs, wvs) = gauss_legendre_on(m, cell.v0, cell.v1);
            let mut area = CompensatedSum::new();
            for (u, wu) in us.iter().zip(&wus) {
                for (v, wv) in vs.iter().zip(&wvs) {
                    let jet = surface.jet(node.chart, *u, *v);
                    let cross = jet.xu.cross(jet.xv);
                    let da = cross.norm();
                    let w = wu * wv * da;
                    rule.points.push(jet.x);
                    rule.normals.push(cross * (orientation / da));
                    rule.weights.push(w);
                    area.add(w);
                }
            }
            rule.areas.push(area.value());
        }
        rule
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.m2..(i + 1) * self.m2
    }

    /// Cell-averaged `(k(i←j), k(j←i), 1/(4π r))` for the double-layer kernel
    /// in both directions and the single-layer magnitude.
    fn averaged(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let (mut kij, mut kji, mut s) = (0.0, 0.0, 0.0);
        for p in self.range(i) {
            let (xp, np, wp) = (self.points[p], self.normals[p], self.weights[p]);
            for q in self.range(j) {
                let d = self.points[q] - xp;
                let r2 = d.norm_squared();
                let r = r2.sqrt();
                let w = wp * self.weights[q] / (r2 * r);
                kij += w * d.dot(self.normals[q]);
                kji -= w * d.dot(np);
                s += w * r2;
            }
        }
        let scale = INV_4PI / (self.areas[i] * self.areas[j]);
        (kij * scale, kji * scale, s * scale)
    }

    /// Twice the largest distance from each node to its cell's sub-points.
    fn diameters(&self, grid: &QuadratureGrid) -> Vec<f64> {
        grid.frames()
            .iter()
            .enumerate()
            .map(|(i, f)| 2.0 * self.range(i).map(|p| (self.points[p] - f.point).norm()).fold(0.0, f64::max))
            .collect()
    }
}

/// Double and single layer in the Nyström basis, assembled in one pass.
pub fn assemble_layers(
    grid: &QuadratureGrid,
    options: &AssemblyOptions,
) -> Result<(DiscreteOperator, DiscreteOperator)> {
    let n = grid.len();
    if n < 16 {
        return Err(Error::Grid(format!("at least 16 nodes are required, got {n}")));
    }
    let frames = grid.frames();
    let w = grid.weights();
    let x: Vec<Vec3> = frames.iter().map(|f| f.point).collect();
    let normal: Vec<Vec3> = frames.iter().map(|f| f.normal).collect();

    let mut k = Mat::<f64>::zeros(n, n);
    let mut s = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let d = x[j] - x[i];
            let r2 = d.norm_squared();
            if r2 == 0.0 {
                return Err(Error::Grid(format!("nodes {i} and {j} coincide")));
            }
            let r = r2.sqrt();
            k[(i, j)] = INV_4PI * d.dot(normal[j]) / (r2 * r);
            s[(i, j)] = -INV_4PI / r;
        }
    }

    if let Some(rule) = options.near_field {
        near_field_correction(grid, &rule, &x, &mut k, &mut s)?;
    }

    for j in 0..n {
        for i in 0..n {
            k[(i, j)] *= w[j];
            s[(i, j)] *= w[j];
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| k[(i, j)]).collect::<CompensatedSum>().value();
        k[(i, i)] = 0.5 - off;
        s[(i, i)] = -0.5 * (w[i] / PI).sqrt();
    }
    for i in 0..n {
        if !k[(i, i)].is_finite() || !s[(i, i)].is_finite() {
            return Err(Error::Numerical { context: "layer potential assembly", node: i });
        }
    }
    let wrap =
        |m, kind| DiscreteOperator { matrix: m, basis: Basis::Nystrom, kind, grid_id: grid.id(), weights: w.to_vec() };
    Ok((wrap(k, OperatorKind::DoubleLayer), wrap(s, OperatorKind::SingleLayer)))
}

fn near_field_correction(
    grid: &QuadratureGrid,
    rule: &NearField,
    x: &[Vec3],
    k: &mut Mat<f64>,
    s: &mut Mat<f64>,
) -> Result<()> {
    if !(rule.eta > 0.0 && rule.close_ratio >= 0.0 && rule.order >= 1 && rule.close_order >= 1) {
        return Err(Error::config("near_field", "eta must be positive and orders at least 1"));
    }
    let base = CellRule::new(grid, rule.order);
    let close =
        (rule.close_ratio > 0.0 && rule.close_order != rule.order).then(|| CellRule::new(grid, rule.close_order));
    let diam = base.diameters(grid);
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let dm = diam[i].max(diam[j]);
            let r = (x[j] - x[i]).norm();
            if r >= rule.eta * dm {
                continue;
            }
            let cells = match &close {
                Some(c) if r < rule.close_ratio * dm => c,
                _ => &base,
            };
            let (kij, kji, sij) = cells.averaged(i, j);
            if !(kij.is_finite() && kji.is_finite() && sij.is_finite()) {
                return Err(Error::Numerical { context: "near-field cell average", node: i });
            }
            k[(i, j)] = kij;
            k[(j, i)] = kji;
            s[(i, j)] = -sij;
            s[(j, i)] = -sij;
        }
    }
    Ok(())
}

/// NP operator `K` in the Nyström basis with the default near-field rule.
pub fn assemble_double_layer(grid: &QuadratureGrid) -> Result<DiscreteOperator> {
    Ok(assemble_layers(grid, &AssemblyOptions::default())?.0)
}

/// Single-layer operator `S` in the Nyström basis with the default
/// near-field rule.
pub fn assemble_single_layer(grid: &QuadratureGrid) -> Result<DiscreteOperator> {
    Ok(assemble_layers(grid, &AssemblyOptions::default())?.1)
}

/// Conjugates a Nyström matrix by `diag(√w)`.
pub fn to_weighted_l2(op: DiscreteOperator) -> Result<DiscreteOperator> {
    if op.basis != Basis::Nystrom {
        return Err(Error::config("basis", "operator is already in the weighted-L2 basis"));
    }
    let sw: Vec<f64> = op.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = op.matrix;
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= sw[i] / sw[j];
        }
    }
    Ok(DiscreteOperator { matrix: m, basis: Basis::WeightedL2, ..op })
}

fn check_pair(k: &DiscreteOperator, s: &DiscreteOperator) -> Result<()> {
    if k.grid_id != s.grid_id {
        return Err(Error::config("grid", "operators were assembled on different grids"));
    }
    if k.basis != Basis::WeightedL2 || s.basis != Basis::WeightedL2 {
        return Err(Error::config("basis", "both operators must be in the weighted-L2 basis"));
    }
    if k.kind != OperatorKind::DoubleLayer || s.kind != OperatorKind::SingleLayer {
        return Err(Error::config("kind", "expected a double layer and a single layer"));
    }
    Ok(())
}

/// `‖S Kᵀ − K S‖₂ / (‖K‖₂ ‖S‖₂)`, the discrete Calderón residual.
pub fn plemelj_residual(k: &DiscreteOperator, s: &DiscreteOperator) -> Result<f64> {
    check_pair(k, s)?;
    let (km, sm) = (k.matrix.as_ref(), s.matrix.as_ref());
    let c = sm * km.transpose() - km * sm;
    Ok(spectral_norm(c.as_ref())? / (spectral_norm(km)? * spectral_norm(sm)?))
}

/// `(K̃ + K̃ᵀ)/2` with `K̃ = P⁻¹ K P`, `P = (−S)^{1/2}`, both operators in the
/// weighted-L² basis.
pub fn symmetrize(k: &DiscreteOperator, s: &DiscreteOperator) -> Result<SymmetrizedOperator> {
    check_pair(k, s)?;
    let n = k.len();
    let neg_s = Mat::<f64>::from_fn(n, n, |i, j| -0.5 * (s.matrix[(i, j)] + s.matrix[(j, i)]));
    let (lambda, q) = symmetric_eigen(neg_s.as_ref())?;
    drop(neg_s);
    let min_eig = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = lambda.iter().copied().fold(0.0, f64::max);
    if min_eig.is_nan() || min_eig <= n as f64 * f64::EPSILON * max_eig {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let root: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
    let q_root = Mat::<f64>::from_fn(n, n, |i, j| q[(i, j)] * root[j]);
    let q_inv_root = Mat::<f64>::from_fn(n, n, |i, j| q[(i, j)] / root[j]);
    let p = &q_root * q.transpose();
    let p_inv = &q_inv_root * q.transpose();
    drop((q_root, q_inv_root, q));
    let kt = &p_inv * (k.matrix.as_ref() * &p);

    // image of the constant function, the exact eigenvector of K̃ for 1/2
    let sqrt_w = Mat::<f64>::from_fn(n, 1, |i, _| k.weights[i].sqrt());
    let mut constant = &p_inv * &sqrt_w;
    drop((p, p_inv));
    let norm = constant.norm_l2();
    constant *= faer::Scale(1.0 / norm);

    let skew = Mat::<f64>::from_fn(n, n, |i, j| kt[(i, j)] - kt[(j, i)]);
    let asymmetry_norm = spectral_norm(skew.as_ref())? / spectral_norm(kt.as_ref())?;
    drop(skew);
    let mut sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (kt[(i, j)] + kt[(j, i)]));
    drop(kt);
    let constant_mode_residual = pin_constant_mode(&mut sym, &constant);
    let plemelj = plemelj_residual(k, s)?;
    Ok(SymmetrizedOperator {
        matrix: sym,
        diagnostics: SymmetrizationDiagnostics {
            plemelj_residual: plemelj,
            min_eig_neg_s: min_eig,
            asymmetry_norm,
            constant_mode_residual,
        },
        grid_id: k.grid_id,
    })
}

/// Replaces `A` by `(I − vvᵀ) A (I − vvᵀ) + ½ vvᵀ` for a unit vector `v`,
/// so that `v` is an exact eigenvector with eigenvalue 1/2. Averaging `K̃`
/// with its transpose keeps the eigenvalue 1/2 only to first order in the
/// asymmetry. Returns `‖Av − ½v‖` measured before the change.
fn pin_constant_mode(a: &mut Mat<f64>, v: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let av = &*a * v;
    let vav = (v.transpose() * &av)[(0, 0)];
    let residual = (0..n).map(|i| (av[(i, 0)] - 0.5 * v[(i, 0)]).powi(2)).sum::<f64>().sqrt();
    let c = 0.5 + vav;
    for j in 0..n {
        for i in j..n {
            let (vi, vj) = (v[(i, 0)], v[(j, 0)]);
            let value = a[(i, j)] - vi * av[(j, 0)] - av[(i, 0)] * vj + c * vi * vj;
            a[(i, j)] = value;
            a[(j, i)] = value;
        }
    }
    residual
}

const DUMP_MAGIC: &[u8; 4] = b"NPOP";
const DUMP_VERSION: u32 = 1;

/// Header of a matrix dump: 32 bytes, little-endian.
///
/// | bytes  | content                                   |
/// |--------|-------------------------------------------|
/// | 0..4   | magic `NPOP`                              |
/// | 4..8   | format version (`1`)                      |
/// | 8..12  | basis: 0 Nyström, 1 weighted-L²           |
/// | 12..16 | kind: 0 double, 1 single, 2 symmetrized   |
/// | 16..24 | dimension `n`                             |
/// | 24..32 | zero padding                              |
///
/// followed by `n²` row-major `f64` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub version: u32,
    pub basis_tag: u32,
    pub kind_tag: u32,
    pub n: u64,
}

fn write_dump<W: Write>(mut out: W, m: faer::MatRef<'_, f64>, basis: Basis, kind: OperatorKind) -> Result<()> {
    let n = m.nrows();
    let mut header = [0u8; 32];
    header[0..4].copy_from_slice(DUMP_MAGIC);
    header[4..8].copy_from_slice(&DUMP_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&basis.tag().to_le_bytes());
    header[12..16].copy_from_slice(&kind.tag().to_le_bytes());
    header[16..24].copy_from_slice(&(n as u64).to_le_bytes());
    out.write_all(&header)?;
    let mut row = Vec::with_capacity(8 * n);
    for i in 0..n {
        row.clear();
        for j in 0..n {
            row.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dump written by [`DiscreteOperator::write_dump`] or
/// [`SymmetrizedOperator::write_dump`].
pub fn read_dump<R: Read>(mut input: R) -> Result<(DumpHeader, Mat<f64>)> {
    let mut header = [0u8; 32];
    input.read_exact(&mut header)?;
    if &header[0..4] != DUMP_MAGIC {
        return Err(Error::config("dump", "missing NPOP magic"));
    }
    let le32 = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let h = DumpHeader {
        version: le32(&header[4..8]),
        basis_tag: le32(&header[8..12]),
        kind_tag: le32(&header[12..16]),
        n: u64::from_le_bytes(header[16..24].try_into().expect("8 bytes")),
    };
    let n = usize::try_from(h.n).map_err(|_| Error::config("dump", "dimension does not fit in memory"))?;
    let mut bytes = vec![0u8; 8 * n];
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        input.read_exact(&mut bytes)?;
        for j in 0..n {
            m[(i, j)] = f64::from_le_bytes(bytes[8 * j..8 * j + 8].try_into().expect("8 bytes"));
        }
    }
    Ok((h, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, ParametricSurface};
    use crate::linalg::{general_eigenvalues, symmetric_eigenvalues};

    fn sphere_grid(n_u: usize, n_v: usize) -> QuadratureGrid {
        build_grid(&ParametricSurface::sphere(1.0).unwrap(), n_u, n_v).unwrap()
    }

    fn row_sum_defect(k: &DiscreteOperator) -> f64 {
        let n = k.len();
        (0..n)
            .map(|i| ((0..n).map(|j| k.matrix()[(i, j)]).collect::<CompensatedSum>().value() - 0.5).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn double_layer_maps_constants_to_half() {
        for opts in [AssemblyOptions::default(), AssemblyOptions { near_field: None }] {
            let (k, _) = assemble_layers(&sphere_grid(8, 16), &opts).unwrap();
            assert!(row_sum_defect(&k) < 1e-14);
        }
    }

    #[test]
    fn coincident_nodes_are_a_grid_error() {
        let s = ParametricSurface::sphere(1.0).unwrap();
        let twice = ParametricSurface::union(vec![s.clone(), s]).unwrap();
        let g = build_grid(&twice, 4, 4).unwrap();
        assert!(matches!(assemble_double_layer(&g), Err(Error::Grid(_))));
    }

    /// Independent oracle for `∫_{S²} dS_y / (4π |x − y|)` at the north pole:
    /// with `|x − y| = 2 sin(t/2)` the integral reduces to
    /// `(1/2) ∫_0^π sin t / (2 sin(t/2)) dt`, done here by a midpoint rule.
    fn sphere_single_layer_of_one() -> f64 {
        let n = 200_000;
        let h = PI / n as f64;
        0.5 * (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                t.sin() / (2.0 * (t / 2.0).sin()) * h
            })
            .sum::<f64>()
    }

    #[test]
    fn single_layer_constant_residual_improves_under_refinement() {
        let exact = sphere_single_layer_of_one();
        assert!((exact - 1.0).abs() < 1e-9);
        let residual = |n_u, n_v| {
            let s = assemble_single_layer(&sphere_grid(n_u, n_v)).unwrap();
            let n = s.len();
            (0..n).map(|i| (-(0..n).map(|j| s.matrix()[(i, j)]).sum::<f64>() - exact).abs()).fold(0.0, f64::max)
        };
        let coarse = residual(16, 32);
        let fine = residual(32, 64);
        assert!(fine * 2.0 <= coarse, "{coarse} -> {fine}");
    }

    #[test]
    fn weighted_single_layer_is_symmetric_positive_definite() {
        let g = build_grid(&ParametricSurface::ellipsoid(2.0, 1.2, 1.0).unwrap(), 12, 24).unwrap();
        let s = to_weighted_l2(assemble_single_layer(&g).unwrap()).unwrap();
        let n = s.len();
        for i in 0..n {
            for j in 0..n {
                assert!((s.matrix()[(i, j)] - s.matrix()[(j, i)]).abs() <= 1e-12 * s.matrix()[(i, j)].abs().max(1e-3));
            }
        }
        let neg = Mat::<f64>::from_fn(n, n, |i, j| -s.matrix()[(i, j)]);
        assert!(*symmetric_eigenvalues(neg.as_ref()).unwrap().last().unwrap() > 0.0);
    }

    #[test]
    fn weighting_is_a_similarity() {
        let g = build_grid(&ParametricSurface::torus(2.0, 1.0).unwrap(), 10, 10).unwrap();
        let k = assemble_double_layer(&g).unwrap();
        let before = general_eigenvalues(k.matrix().as_ref()).unwrap();
        let kw = to_weighted_l2(k).unwrap();
        let after = general_eigenvalues(kw.matrix().as_ref()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10, "{a:?} {b:?}");
        }
        assert!(matches!(to_weighted_l2(kw), Err(Error::Config { .. })));
    }

    #[test]
    fn symmetrization_on_the_sphere_is_nearly_a_no_op() {
        let g = sphere_grid(10, 20);
        let (k, s) = assemble_layers(&g, &AssemblyOptions::default()).unwrap();
        let (k, s) = (to_weighted_l2(k).unwrap(), to_weighted_l2(s).unwrap());
        let sym = symmetrize(&k, &s).unwrap();
        let e = symmetric_eigenvalues(sym.matrix.as_ref()).unwrap();
        assert!((e[0] - 0.5).abs() < 1e-10);
        assert!(sym.diagnostics.constant_mode_residual < 1e-2, "{:?}", sym.diagnostics);
        assert!(sym.diagnostics.min_eig_neg_s > 0.0);
        let n = g.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(sym.matrix[(i, j)], sym.matrix[(j, i)]);
            }
        }
    }

    #[test]
    fn indefinite_single_layer_is_rejected() {
        let g = sphere_grid(4, 8);
        let k = to_weighted_l2(assemble_double_layer(&g).unwrap()).unwrap();
        let n = g.len();
        // −S = I − e eᵀ/n has a zero mode along the constants
        let s = Mat::<f64>::from_fn(n, n, |i, j| 1.0 / n as f64 - if i == j { 1.0 } else { 0.0 });
        let s = DiscreteOperator::from_matrix(s, Basis::WeightedL2, OperatorKind::SingleLayer, &g).unwrap();
        assert!(matches!(symmetrize(&k, &s), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let k = to_weighted_l2(assemble_double_layer(&sphere_grid(4, 8)).unwrap()).unwrap();
        let s = to_weighted_l2(assemble_single_layer(&sphere_grid(4, 8)).unwrap()).unwrap();
        assert!(matches!(plemelj_residual(&k, &s), Err(Error::Config { .. })));
    }

    #[test]
    fn dump_round_trip() {
        let g = sphere_grid(4, 8);
        let k = assemble_double_layer(&g).unwrap();
        let mut bytes = Vec::new();
        k.write_dump(&mut bytes).unwrap();
        assert_eq!(&bytes[0..4], b"NPOP");
        assert_eq!(bytes.len(), 32 + 8 * 32 * 32);
        let (h, m) = read_dump(bytes.as_slice()).unwrap();
        assert_eq!(h, DumpHeader { version: 1, basis_tag: 0, kind_tag: 0, n: 32 });
        assert_eq!(&m, k.matrix());
        assert!(read_dump(&b"XXXX"[..]).is_err());
    }
}
