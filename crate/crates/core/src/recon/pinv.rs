use faer::Mat;
use nalgebra::DMatrix;

use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const DEFAULT_PINV_TOLERANCE: f64 = 1e-10;

/// Moore-Penrose pseudo-inverse via the singular value decomposition.
///
/// Singular values at or below `rel_tolerance * sigma_max` are dropped.
pub fn pseudo_inverse(a: &DMatrix<f64>, rel_tolerance: f64) -> Result<DMatrix<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("pseudo-inverse of a matrix with non-finite entries".into()));
    }
    if !(rel_tolerance.is_finite() && rel_tolerance >= 0.0) {
        return Err(Error::Argument("pseudo-inverse tolerance must be non-negative".into()));
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(DMatrix::zeros(n, m));
    }
    let fa = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|e| Error::Estimation(format!("singular value decomposition failed: {e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tolerance * sigma_max;

    let mut out = DMatrix::zeros(n, m);
    for (k, &s) in sv.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            // rank-one update: v_k u_k^T / s_k
            for j in 0..m {
                let uj = u[(j, k)] / s;
                for i in 0..n {
                    out[(i, j)] += v[(i, k)] * uj;
                }
            }
        }
    }
    Ok(out)
}
