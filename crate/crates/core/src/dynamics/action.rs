//! Restricted action `∫[p q̇ − H(p,q)] dt` along sampled trajectories.
//!
//! Between samples the path is the cubic Hermite interpolant built from the
//! stored positions and velocities; each interval uses 3-point Gauss–Legendre.

use serde::{Deserialize, Serialize};

use crate::correspondence::Hamiltonian;
use crate::dynamics::trajectory::{Sample, Trajectory};
use crate::error::{EqError, Result};

const GL_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    /// `∫p q̇ dt`.
    pub kinetic: f64,
    /// `∫[p q̇ − H] dt`.
    pub raw: f64,
    /// `raw` with the constant zero-point term of `H` removed.
    pub shift_corrected: f64,
    pub energy_shift: f64,
}

/// Path value and derivative at a point of one interval.
#[derive(Debug, Clone, Copy)]
struct PathPoint {
    t: f64,
    p: f64,
    q: f64,
    dq: f64,
}

fn hermite(a: &Sample, b: &Sample, th: f64) -> PathPoint {
    let h = b.t - a.t;
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * th) * (1.0 - th).powi(2),
        th * (1.0 - th).powi(2),
        th * th * (3.0 - 2.0 * th),
        th * th * (th - 1.0),
    );
    // derivatives with respect to θ
    let (d00, d10, d01, d11) = (
        6.0 * th * th - 6.0 * th,
        3.0 * th * th - 4.0 * th + 1.0,
        -6.0 * th * th + 6.0 * th,
        3.0 * th * th - 2.0 * th,
    );
    let value =
        |y0: f64, f0: f64, y1: f64, f1: f64| h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
    let slope = |y0: f64, f0: f64, y1: f64, f1: f64| {
        (d00 * y0 + d10 * h * f0 + d01 * y1 + d11 * h * f1) / h
    };
    PathPoint {
        t: a.t + th * h,
        p: value(a.p, a.dp, b.p, b.dp),
        q: value(a.q, a.dq, b.q, b.dq),
        dq: slope(a.q, a.dq, b.q, b.dq),
    }
}

/// Gauss–Legendre sum of `f` over the interpolated path.
fn integrate_path(samples: &[Sample], mut f: impl FnMut(&PathPoint) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for w in samples.windows(2) {
        let half = 0.5 * (w[1].t - w[0].t);
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let pt = hermite(&w[0], &w[1], 0.5 * (1.0 + x));
            total += half * wt * f(&pt)?;
        }
    }
    Ok(total)
}

fn usable(trajectory: &Trajectory) -> Result<&[Sample]> {
    let s = &trajectory.samples;
    if s.len() < 3 {
        return Err(EqError::invalid(format!(
            "action quadrature needs at least 3 samples, got {}",
            s.len()
        )));
    }
    if s.iter().any(|x| !(x.dp.is_finite() && x.dq.is_finite())) {
        return Err(EqError::invalid("trajectory has non-finite velocities"));
    }
    Ok(s)
}

/// `∫p dq` along the trajectory.
pub fn loop_integral(trajectory: &Trajectory) -> Result<f64> {
    integrate_path(usable(trajectory)?, |x| Ok(x.p * x.dq))
}

pub fn restricted_action_value<H: Hamiltonian + ?Sized>(
    h: &H,
    trajectory: &Trajectory,
) -> Result<ActionValue> {
    let samples = usable(trajectory)?;
    let kinetic = integrate_path(samples, |x| Ok(x.p * x.dq))?;
    let energy = integrate_path(samples, |x| h.value(x.p, x.q))?;
    let duration = trajectory.last().t - trajectory.first().t;
    let shift = h.constant_shift();
    let raw = kinetic - energy;
    Ok(ActionValue {
        kinetic,
        raw,
        shift_corrected: raw + shift * duration,
        energy_shift: shift,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarityReport {
    pub epsilons: Vec<f64>,
    /// `|A(path + ε·η) − A(path)|`.
    pub deltas: Vec<f64>,
    /// Least-squares slope of `log|δA|` against `log ε`.
    pub slope: f64,
}

/// Action change under `(δp, δq) = ε·(sin(πs), sin(2πs))`, `s = (t − t₀)/T`,
/// which vanishes at both endpoints.
pub fn action_stationarity<H: Hamiltonian + ?Sized>(
    h: &H,
    trajectory: &Trajectory,
    epsilons: &[f64],
) -> Result<StationarityReport> {
    let samples = usable(trajectory)?;
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(EqError::invalid(
            "need at least two positive perturbation amplitudes",
        ));
    }
    let t0 = trajectory.first().t;
    let span = trajectory.last().t - t0;
    let pi = std::f64::consts::PI;
    let mut deltas = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        // difference of integrands, integrated directly
        let delta = integrate_path(samples, |x| {
            let s = (x.t - t0) / span;
            let (ep, eq) = (eps * (pi * s).sin(), eps * (2.0 * pi * s).sin());
            let deq = eps * 2.0 * pi / span * (2.0 * pi * s).cos();
            let base = x.p * x.dq - h.value(x.p, x.q)?;
            let moved = (x.p + ep) * (x.dq + deq) - h.value(x.p + ep, x.q + eq)?;
            Ok(moved - base)
        })?;
        deltas.push(delta.abs());
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(EqError::numerical(
            "action change vanished; slope undefined",
            deltas,
        ));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(StationarityReport {
        epsilons: epsilons.to_vec(),
        deltas,
        slope: sxy / sxx,
    })
}

/// `n` log-spaced amplitudes between `lo` and `hi`.
pub fn log_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}
