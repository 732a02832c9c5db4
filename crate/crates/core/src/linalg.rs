//! Thin wrappers over the dense eigen and singular value solvers, plus a
//! Lanczos estimate of the spectral norm.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric matrix `a`, in descending order. Only the
/// lower triangle is read.
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let mut e = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigenvalues: {e:?}")))?;
    e.sort_by(|x, y| y.total_cmp(x));
    Ok(e)
}

/// Eigendecomposition `a = Q diag(λ) Qᵀ` of a symmetric matrix, eigenvalues
/// ascending with the columns of `Q` in matching order.
pub fn symmetric_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigendecomposition: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Singular values in descending order.
pub fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let mut s = a.singular_values().map_err(|e| Error::LinearAlgebra(format!("singular values: {e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs, sorted by
/// descending real part.
pub fn general_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<(f64, f64)>> {
    let mut e: Vec<(f64, f64)> = a
        .eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))?
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect();
    e.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)));
    Ok(e)
}

/// Largest singular value of `a`, from Lanczos on `aᵀa` with full
/// reorthogonalization. Deterministic start vector.
pub fn spectral_norm(a: MatRef<'_, f64>) -> Result<f64> {
    let n = a.ncols();
    if n == 0 {
        return Ok(0.0);
    }
    let steps = n.min(80);
    let mut basis: Vec<Mat<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut q = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin());
    let q_norm = q.norm_l2();
    q *= faer::Scale(1.0 / q_norm);
    for k in 0..steps {
        let aq = a * &q;
        let mut w = a.transpose() * &aq;
        let ak = (q.transpose() * &w)[(0, 0)];
        alpha.push(ak);
        basis.push(q.clone());
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = (b.transpose() * &w)[(0, 0)];
                w -= b * faer::Scale(c);
            }
        }
        let bk = w.norm_l2();
        if !bk.is_finite() || !ak.is_finite() {
            return Err(Error::LinearAlgebra("non-finite value in spectral norm iteration".into()));
        }
        if k + 1 == steps || bk <= 1e-14 * alpha.iter().fold(0.0f64, |m, &x| m.max(x.abs())) {
            break;
        }
        beta.push(bk);
        q = w * faer::Scale(1.0 / bk);
    }
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let top = symmetric_eigenvalues(t.as_ref())?[0];
    Ok(top.max(0.0).sqrt())
}
