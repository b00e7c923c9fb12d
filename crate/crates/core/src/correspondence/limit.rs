//! `ħ → 0` extrapolation of enhanced Hamiltonians at a fixed label.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::correspondence::Hamiltonian;
use crate::error::{EqError, Result};

/// Default bound on the RMS fit residual, relative to `max(1, |H_c|)`.
pub const DEFAULT_FIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalLimit {
    /// Extrapolated `H_c(p,q)`.
    pub limit: f64,
    /// `dH/dħ` at `ħ = 0`.
    pub slope: f64,
    /// Lowest power of `ħ` with a significant coefficient; `None` when the
    /// values do not depend on `ħ`.
    pub leading_power: Option<u32>,
    /// Fit coefficients `c_0, c_1, ...` of `H ≈ Σ c_k ħ^k`.
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub hbars: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn classical_limit<H, F>(builder: F, p: f64, q: f64, hbars: &[f64]) -> Result<ClassicalLimit>
where
    H: Hamiltonian,
    F: FnMut(f64) -> Result<H>,
{
    classical_limit_with_tol(builder, p, q, hbars, DEFAULT_FIT_TOL)
}

/// Least-squares polynomial fit in `ħ` of degree `min(3, n − 2)`.
pub fn classical_limit_with_tol<H, F>(
    mut builder: F,
    p: f64,
    q: f64,
    hbars: &[f64],
    fit_tol: f64,
) -> Result<ClassicalLimit>
where
    H: Hamiltonian,
    F: FnMut(f64) -> Result<H>,
{
    if hbars.len() < 3 {
        return Err(EqError::invalid(
            "classical limit needs at least three hbar values",
        ));
    }
    if hbars.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(EqError::invalid("hbar values must be positive"));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EqError::invalid(
            "hbar sequence must be strictly decreasing",
        ));
    }
    let values = hbars
        .iter()
        .map(|&h| builder(h)?.value(p, q))
        .collect::<Result<Vec<f64>>>()?;

    let n = hbars.len();
    let degree = 3.min(n - 2);
    // scale ħ to unit range for conditioning
    let h0 = hbars[0];
    let a = DMatrix::from_fn(n, degree + 1, |i, k| (hbars[i] / h0).powi(k as i32));
    let b = DVector::from_column_slice(&values);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|e| {
        EqError::numerical(format!("least-squares fit failed: {e}"), values.clone())
    })?;
    let resid = &a * &x - &b;
    let residual = (resid.norm_squared() / n as f64).sqrt();
    let coefficients: Vec<f64> = (0..=degree).map(|k| x[k] / h0.powi(k as i32)).collect();
    let limit = coefficients[0];
    let scale = limit.abs().max(1.0);
    if !(residual <= fit_tol * scale) {
        let mut diag = resid.iter().copied().collect::<Vec<_>>();
        diag.push(residual);
        return Err(EqError::numerical(
            "hbar sequence does not fit a low-order polynomial",
            diag,
        ));
    }
    // a coefficient counts when its contribution at the largest ħ clears the fit noise
    let noise = (residual * 10.0).max(1e-10 * scale);
    let leading_power = (1..=degree)
        .find(|&k| (coefficients[k] * h0.powi(k as i32)).abs() > noise)
        .map(|k| k as u32);
    Ok(ClassicalLimit {
        limit,
        slope: coefficients[1],
        leading_power,
        coefficients,
        residual,
        hbars: hbars.to_vec(),
        values,
    })
}
