//! Hamilton's equations `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
//!
//! Default backend: Dormand–Prince 5(4) with step control and the
//! fourth-order dense output used to locate events. A fixed-step
//! leapfrog is available for separable Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::correspondence::{Hamiltonian, LabelDomain};
use crate::dynamics::trajectory::{Event, EventKind, PhasePoint, Sample, Termination, Trajectory};
use crate::error::{EqError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    Dopri5,
    Leapfrog { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowOptions {
    /// Per-step relative and absolute error target.
    pub tol: f64,
    /// On the half-plane, `q` below this is a singularity hit.
    pub q_floor: f64,
    /// Steps shorter than this fraction of the horizon count as a singularity hit.
    pub min_step_factor: f64,
    pub max_steps: usize,
    /// Uniform output spacing; `None` records every accepted step.
    pub output_interval: Option<f64>,
    /// Integrates the time-reversed field `(∂H/∂q, −∂H/∂p)`.
    pub reverse: bool,
    pub method: Method,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            q_floor: 1e-8,
            min_step_factor: 1e-14,
            max_steps: 5_000_000,
            output_interval: None,
            reverse: false,
            method: Method::Dopri5,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(EqError::invalid(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if !(self.q_floor >= 0.0) || !(self.min_step_factor > 0.0) {
            return Err(EqError::invalid(
                "q_floor must be >= 0 and min_step_factor > 0",
            ));
        }
        if let Some(dt) = self.output_interval {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(EqError::invalid("output interval must be positive"));
            }
        }
        if let Method::Leapfrog { dt } = self.method {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(EqError::invalid("leapfrog step must be positive"));
            }
        }
        Ok(())
    }
}

/// Adaptive flow with default options and the given tolerance.
pub fn hamiltonian_flow<H: Hamiltonian + ?Sized>(
    h: &H,
    x0: PhasePoint,
    duration: f64,
    tol: f64,
) -> Result<Trajectory> {
    hamiltonian_flow_with(h, x0, duration, &FlowOptions::with_tol(tol))
}

pub fn hamiltonian_flow_with<H: Hamiltonian + ?Sized>(
    h: &H,
    x0: PhasePoint,
    duration: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(EqError::invalid(format!(
            "duration must be positive, got {duration}"
        )));
    }
    h.domain().check(x0.p, x0.q)?;
    let mut run = Run::new(h, x0, duration, opts)?;
    match opts.method {
        Method::Dopri5 => run.dopri5()?,
        Method::Leapfrog { dt } => {
            if !h.is_separable() {
                return Err(EqError::invalid("leapfrog needs a separable Hamiltonian"));
            }
            run.leapfrog(dt)?
        }
    }
    run.finish()
}

#[derive(Debug, Clone, Copy)]
enum StageFail {
    Domain,
    NonFinite,
}

type Y = [f64; 2];

struct Run<'a, H: Hamiltonian + ?Sized> {
    h: &'a H,
    opts: &'a FlowOptions,
    sign: f64,
    t0: f64,
    t_end: f64,
    half_plane: bool,
    samples: Vec<Sample>,
    events: Vec<Event>,
    termination: Termination,
    next_output: f64,
}

impl<'a, H: Hamiltonian + ?Sized> Run<'a, H> {
    fn new(h: &'a H, x0: PhasePoint, duration: f64, opts: &'a FlowOptions) -> Result<Self> {
        let mut run = Self {
            h,
            opts,
            sign: if opts.reverse { -1.0 } else { 1.0 },
            t0: x0.t,
            t_end: x0.t + duration,
            half_plane: h.domain() == LabelDomain::HalfPlane,
            samples: Vec::new(),
            events: Vec::new(),
            termination: Termination::Completed,
            next_output: x0.t + opts.output_interval.unwrap_or(0.0),
        };
        let y0 = [x0.p, x0.q];
        let f0 = match run.field(y0)? {
            Ok(f) => f,
            Err(_) => {
                return Err(EqError::numerical(
                    "vector field is not finite at the initial point",
                    vec![x0.p, x0.q],
                ))
            }
        };
        run.push(x0.t, y0, f0, None)?;
        Ok(run)
    }

    fn field(&self, y: Y) -> Result<std::result::Result<Y, StageFail>> {
        match self.h.gradient(y[0], y[1]) {
            Ok((hp, hq)) => {
                let f = [-self.sign * hq, self.sign * hp];
                if f[0].is_finite() && f[1].is_finite() {
                    Ok(Ok(f))
                } else {
                    Ok(Err(StageFail::NonFinite))
                }
            }
            Err(EqError::DomainViolation(_)) => Ok(Err(StageFail::Domain)),
            Err(e) => Err(e),
        }
    }

    fn push(&mut self, t: f64, y: Y, f: Y, event: Option<EventKind>) -> Result<()> {
        if let Some(last) = self.samples.last_mut() {
            if !(t > last.t) {
                if event.is_some() && last.event.is_none() {
                    last.event = event;
                }
                return Ok(());
            }
        }
        let energy = self.h.value(y[0], y[1])?;
        self.samples.push(Sample {
            t,
            p: y[0],
            q: y[1],
            h: energy,
            dp: f[0],
            dq: f[1],
            event,
        });
        Ok(())
    }

    fn event(&mut self, t: f64, y: Y, kind: EventKind) {
        self.events.push(Event {
            t,
            p: y[0],
            q: y[1],
            kind,
        });
    }

    fn horizon(&self) -> f64 {
        self.t_end - self.t0
    }

    fn stop(&mut self, t: f64, y: Y, f: Option<Y>, kind: EventKind) -> Result<()> {
        self.event(t, y, kind);
        let f = match f {
            Some(f) => f,
            None => self.field(y)?.unwrap_or([f64::NAN, f64::NAN]),
        };
        if f[0].is_finite() && f[1].is_finite() {
            self.push(t, y, f, Some(kind))?;
        } else if let Some(last) = self.samples.last_mut() {
            last.event = Some(kind);
        }
        self.termination = match kind {
            EventKind::DomainExit => Termination::DomainExit,
            _ => Termination::SingularityHit,
        };
        Ok(())
    }

    fn finish(self) -> Result<Trajectory> {
        Trajectory::new(self.samples, self.events, self.termination)
    }

    fn initial_step(&self, y0: Y, f0: Y) -> Result<f64> {
        let tol = self.opts.tol;
        let sc = |i: usize| tol + tol * y0[i].abs();
        let norm = |v: Y| ((v[0] / sc(0)).powi(2) + (v[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
        let d0 = norm(y0);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(self.horizon());
        let y1 = [y0[0] + h0 * f0[0], y0[1] + h0 * f0[1]];
        let f1 = match self.field(y1)? {
            Ok(f) => f,
            Err(_) => return Ok(h0 * 1e-3),
        };
        let d2 = norm([f1[0] - f0[0], f1[1] - f0[1]]) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.horizon()))
    }

    fn dopri5(&mut self) -> Result<()> {
        let tol = self.opts.tol;
        let h_min = self.opts.min_step_factor * self.horizon();
        let s = &self.samples[0];
        let mut t = s.t;
        let mut y = [s.p, s.q];
        let mut f0 = [s.dp, s.dq];
        let mut step = self.initial_step(y, f0)?;
        let mut last_fail = StageFail::NonFinite;
        let mut steps = 0usize;

        while t < self.t_end {
            if steps >= self.opts.max_steps {
                return Err(EqError::numerical("step budget exhausted", vec![t, step]));
            }
            let remaining = self.t_end - t;
            let final_step = step >= remaining;
            let hs = if final_step { remaining } else { step };
            if hs < h_min && !final_step {
                let kind = match last_fail {
                    StageFail::Domain => EventKind::DomainExit,
                    StageFail::NonFinite => EventKind::SingularityHit,
                };
                return self.stop(t, y, Some(f0), kind);
            }
            steps += 1;
            let attempt = match self.dp_step(y, f0, hs)? {
                Ok(a) => a,
                Err(fail) => {
                    last_fail = fail;
                    step = hs * 0.25;
                    continue;
                }
            };
            let sc = |i: usize| tol + tol * y[i].abs().max(attempt.y1[i].abs());
            let err = ((attempt.err[0] / sc(0)).powi(2) + (attempt.err[1] / sc(1)).powi(2)).sqrt()
                / 2f64.sqrt();
            if !(err <= 1.0) {
                last_fail = StageFail::NonFinite;
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.2
                };
                step = hs * factor;
                continue;
            }
            let t1 = if final_step { self.t_end } else { t + hs };
            let dense = Dense::new(y, attempt.y1, f0, attempt.f1, &attempt.k, hs);

            // collapse towards the boundary of the half-plane
            if self.half_plane {
                if let Some(theta) = self.floor_crossing(&dense) {
                    let ty = t + theta * hs;
                    let yy = dense.eval(theta);
                    self.emit_outputs_until(ty, t, hs, &dense)?;
                    return self.stop(ty, yy, None, EventKind::SingularityHit);
                }
            }
            let bounce = if f0[1] < 0.0 && attempt.f1[1] >= 0.0 {
                self.locate_velocity_root(&dense)?
                    .map(|theta| (theta, t + theta * hs))
            } else {
                None
            };

            match bounce {
                Some((theta, tb)) => {
                    let yb = dense.eval(theta);
                    self.emit_outputs_until(tb, t, hs, &dense)?;
                    self.event(tb, yb, EventKind::Bounce);
                    let fb = self.field(yb)?.unwrap_or(f0);
                    self.push(tb, yb, fb, Some(EventKind::Bounce))?;
                    self.emit_outputs_until(t1, t, hs, &dense)?;
                }
                None => self.emit_outputs_until(t1, t, hs, &dense)?,
            }
            if self.opts.output_interval.is_none() || final_step {
                self.push(t1, attempt.y1, attempt.f1, None)?;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !final_step {
                step = hs * factor;
            }
            t = t1;
            y = attempt.y1;
            f0 = attempt.f1;
            last_fail = StageFail::NonFinite;
        }
        Ok(())
    }

    /// Uniform outputs in `(t_step, upto]` from the dense interpolant.
    fn emit_outputs_until(&mut self, upto: f64, t_step: f64, hs: f64, dense: &Dense) -> Result<()> {
        let Some(dt) = self.opts.output_interval else {
            return Ok(());
        };
        // tolerate round-off in the accumulated output grid
        let slack = 1e-12 * self.horizon();
        while self.next_output <= upto + slack && self.next_output <= self.t_end + slack {
            let to = self.next_output.min(self.t_end);
            let theta = ((to - t_step) / hs).clamp(0.0, 1.0);
            let yo = dense.eval(theta);
            let fo = match self.field(yo)? {
                Ok(f) => f,
                Err(_) => dense.derivative(theta),
            };
            self.push(to, yo, fo, None)?;
            let k = ((self.next_output - self.t0) / dt).round() + 1.0;
            self.next_output = self.t0 + k * dt;
        }
        Ok(())
    }

    fn floor_crossing(&self, dense: &Dense) -> Option<f64> {
        let floor = self.opts.q_floor;
        let below = |theta: f64| dense.eval(theta)[1] < floor;
        const SCAN: usize = 32;
        let mut prev = 0.0;
        for k in 1..=SCAN {
            let theta = k as f64 / SCAN as f64;
            if below(theta) {
                let (mut lo, mut hi) = (prev, theta);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = theta;
        }
        None
    }

    fn locate_velocity_root(&self, dense: &Dense) -> Result<Option<f64>> {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let v = match self.field(dense.eval(mid))? {
                Ok(f) => f[1],
                Err(_) => return Ok(None),
            };
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    fn dp_step(&self, y: Y, k1: Y, h: f64) -> Result<std::result::Result<Attempt, StageFail>> {
        let stage = |coefs: &[f64], ks: &[Y]| -> Y {
            let mut out = y;
            for (c, k) in coefs.iter().zip(ks) {
                out[0] += h * c * k[0];
                out[1] += h * c * k[1];
            }
            out
        };
        let mut ks: Vec<Y> = Vec::with_capacity(7);
        ks.push(k1);
        for row in A.iter() {
            let yi = stage(row, &ks);
            match self.field(yi)? {
                Ok(f) => ks.push(f),
                Err(e) => return Ok(Err(e)),
            }
        }
        // last row of A is the fifth-order solution (FSAL)
        let y1 = stage(A[5], &ks[..6]);
        let f1 = ks[6];
        let mut err = [0.0; 2];
        for (e, k) in E.iter().zip(&ks) {
            err[0] += h * e * k[0];
            err[1] += h * e * k[1];
        }
        let mut k = [[0.0; 2]; 7];
        k.copy_from_slice(&ks);
        Ok(Ok(Attempt { y1, f1, err, k }))
    }

    fn leapfrog(&mut self, dt: f64) -> Result<()> {
        let s = self.samples[0];
        let mut t = s.t;
        let mut y = [s.p, s.q];
        let mut f = [s.dp, s.dq];
        let hs_min = self.opts.min_step_factor * self.horizon();
        while t < self.t_end {
            let hs = dt.min(self.t_end - t);
            if hs < hs_min && t + hs < self.t_end {
                return self.stop(t, y, Some(f), EventKind::SingularityHit);
            }
            // kick-drift-kick; for separable H, ṗ depends on q and q̇ on p only
            let p_half = y[0] + 0.5 * hs * f[0];
            let drift = match self.field([p_half, y[1]])? {
                Ok(v) => v[1],
                Err(fail) => return self.stop(t, y, Some(f), fail_kind(fail)),
            };
            let q1 = y[1] + hs * drift;
            let kick = match self.field([p_half, q1])? {
                Ok(v) => v[0],
                Err(fail) => return self.stop(t, y, Some(f), fail_kind(fail)),
            };
            let y1 = [p_half + 0.5 * hs * kick, q1];
            let f1 = match self.field(y1)? {
                Ok(v) => v,
                Err(fail) => return self.stop(t, y, Some(f), fail_kind(fail)),
            };
            let t1 = if hs == self.t_end - t {
                self.t_end
            } else {
                t + hs
            };
            let herm = Hermite {
                t0: t,
                y0: y,
                f0: f,
                y1,
                f1,
                h: hs,
            };
            if self.half_plane && y1[1] < self.opts.q_floor {
                let (lo, hi) = (0.0, 1.0);
                let theta = bisect(lo, hi, |th| herm.eval(th)[1] < self.opts.q_floor);
                let te = t + theta * hs;
                let ye = herm.eval(theta);
                self.hermite_outputs(te, &herm)?;
                return self.stop(te, ye, None, EventKind::SingularityHit);
            }
            if f[1] < 0.0 && f1[1] >= 0.0 {
                let theta = f[1] / (f[1] - f1[1]);
                let te = t + theta * hs;
                let ye = herm.eval(theta);
                self.hermite_outputs(te, &herm)?;
                self.event(te, ye, EventKind::Bounce);
                let fe = self.field(ye)?.unwrap_or(f);
                self.push(te, ye, fe, Some(EventKind::Bounce))?;
            }
            self.hermite_outputs(t1, &herm)?;
            if self.opts.output_interval.is_none() || t1 >= self.t_end {
                self.push(t1, y1, f1, None)?;
            }
            t = t1;
            y = y1;
            f = f1;
        }
        Ok(())
    }

    fn hermite_outputs(&mut self, upto: f64, herm: &Hermite) -> Result<()> {
        let Some(dt) = self.opts.output_interval else {
            return Ok(());
        };
        let slack = 1e-12 * self.horizon();
        while self.next_output <= upto + slack && self.next_output <= self.t_end + slack {
            let to = self.next_output.min(self.t_end);
            let theta = ((to - herm.t0) / herm.h).clamp(0.0, 1.0);
            let yo = herm.eval(theta);
            let fo = self.field(yo)?.unwrap_or([f64::NAN; 2]);
            self.push(to, yo, fo, None)?;
            let k = ((self.next_output - self.t0) / dt).round() + 1.0;
            self.next_output = self.t0 + k * dt;
        }
        Ok(())
    }
}

fn fail_kind(f: StageFail) -> EventKind {
    match f {
        StageFail::Domain => EventKind::DomainExit,
        StageFail::NonFinite => EventKind::SingularityHit,
    }
}

fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

struct Attempt {
    y1: Y,
    f1: Y,
    err: Y,
    k: [Y; 7],
}

// Dormand–Prince tableau, rows 2..7
const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// fifth minus fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const DENSE: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct Dense {
    r: [Y; 5],
    h: f64,
}

impl Dense {
    fn new(y0: Y, y1: Y, f0: Y, f1: Y, k: &[Y; 7], h: f64) -> Self {
        let mut r = [[0.0; 2]; 5];
        for i in 0..2 {
            let ydiff = y1[i] - y0[i];
            let bspl = h * f0[i] - ydiff;
            r[0][i] = y0[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * f1[i] - bspl;
            r[4][i] = h * DENSE.iter().zip(k).map(|(d, kk)| d * kk[i]).sum::<f64>();
        }
        Self { r, h }
    }

    fn eval(&self, th: f64) -> Y {
        let t1 = 1.0 - th;
        let r = &self.r;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = r[0][i] + th * (r[1][i] + t1 * (r[2][i] + th * (r[3][i] + t1 * r[4][i])));
        }
        out
    }

    fn derivative(&self, th: f64) -> Y {
        let e = 1e-7;
        let a = self.eval((th - e).max(0.0));
        let b = self.eval((th + e).min(1.0));
        let w = (th + e).min(1.0) - (th - e).max(0.0);
        [(b[0] - a[0]) / (w * self.h), (b[1] - a[1]) / (w * self.h)]
    }
}

/// Cubic Hermite interpolant over one step.
struct Hermite {
    t0: f64,
    y0: Y,
    f0: Y,
    y1: Y,
    f1: Y,
    h: f64,
}

impl Hermite {
    fn eval(&self, th: f64) -> Y {
        let h00 = (1.0 + 2.0 * th) * (1.0 - th).powi(2);
        let h10 = th * (1.0 - th).powi(2);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.y0[i]
                + h10 * self.h * self.f0[i]
                + h01 * self.y1[i]
                + h11 * self.h * self.f1[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{EnhancedHamiltonian, LaurentPoly};
    use std::f64::consts::PI;

    fn oscillator() -> EnhancedHamiltonian {
        EnhancedHamiltonian::closed_form(
            "(p^2 + q^2)/2 + 1/2",
            LaurentPoly::from_triples(&[(0.5, 2, 0), (0.5, 0, 2), (0.5, 0, 0)]),
            1.0,
            LabelDomain::Plane,
        )
    }

    fn kepler() -> EnhancedHamiltonian {
        EnhancedHamiltonian::closed_form(
            "p^2/2 - 1/q",
            LaurentPoly::from_triples(&[(0.5, 2, 0), (-1.0, 0, -1)]),
            1.0,
            LabelDomain::HalfPlane,
        )
    }

    /// Collapse time from rest at q0 under −1/q: ∫₀^{q0} dq / √(2(1/q − 1/q0)),
    /// closed form π q0^{3/2} / (2√2).
    fn kepler_collapse_oracle(q0: f64) -> f64 {
        // midpoint rule after q = q0 sin²(u), which removes both endpoint singularities
        let n = 200_000;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64 * PI / 2.0;
            let q = q0 * u.sin().powi(2);
            let dq_du = 2.0 * q0 * u.sin() * u.cos();
            acc += dq_du / (2.0 * (1.0 / q - 1.0 / q0)).sqrt();
        }
        acc * PI / 2.0 / n as f64
    }

    #[test]
    fn harmonic_period_returns_home() {
        let tr = hamiltonian_flow(
            &oscillator(),
            PhasePoint::at_origin(0.0, 1.0),
            2.0 * PI,
            1e-10,
        )
        .unwrap();
        let end = tr.last();
        assert!(
            (end.p).abs() < 1e-6 && (end.q - 1.0).abs() < 1e-6,
            "{end:?}"
        );
        assert!(
            tr.max_relative_energy_drift() < 1e-8,
            "{}",
            tr.max_relative_energy_drift()
        );
        assert_eq!(tr.termination, Termination::Completed);
        // q has its minimum at t = π
        let b = tr.first_event(EventKind::Bounce).unwrap();
        assert!((b.t - PI).abs() < 1e-8 && (b.q + 1.0).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn kepler_oracle_matches_closed_form() {
        assert!((kepler_collapse_oracle(1.0) - PI / 8f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn kepler_collapses_at_oracle_time() {
        let tc = kepler_collapse_oracle(1.0);
        let tr =
            hamiltonian_flow(&kepler(), PhasePoint::at_origin(0.0, 1.0), 3.0 * tc, 1e-10).unwrap();
        let hit = tr.first_event(EventKind::SingularityHit).expect("collapse");
        assert!((hit.t - tc).abs() / tc < 1e-6, "{} vs {tc}", hit.t);
        assert_eq!(tr.termination, Termination::SingularityHit);
        assert_eq!(tr.last().event, Some(EventKind::SingularityHit));
    }

    #[test]
    fn time_reversal() {
        let h = EnhancedHamiltonian::closed_form(
            "p^2/2 - 1/q + 1/q^2",
            LaurentPoly::from_triples(&[(0.5, 2, 0), (-1.0, 0, -1), (1.0, 0, -2)]),
            1.0,
            LabelDomain::HalfPlane,
        );
        let x0 = PhasePoint::at_origin(-0.3, 1.5);
        let fwd = hamiltonian_flow(&h, x0, 12.0, 1e-10).unwrap();
        let end = fwd.last();
        let opts = FlowOptions {
            reverse: true,
            ..FlowOptions::default()
        };
        let back =
            hamiltonian_flow_with(&h, PhasePoint::at_origin(end.p, end.q), 12.0, &opts).unwrap();
        let b = back.last();
        assert!(
            (b.p - x0.p).abs() < 1e-6 && (b.q - x0.q).abs() < 1e-6,
            "{b:?}"
        );
    }

    #[test]
    fn uniform_outputs_hit_the_grid() {
        let opts = FlowOptions {
            output_interval: Some(0.25),
            ..FlowOptions::default()
        };
        let tr = hamiltonian_flow_with(&oscillator(), PhasePoint::at_origin(0.0, 1.0), 2.0, &opts)
            .unwrap();
        let plain: Vec<_> = tr.samples.iter().filter(|s| s.event.is_none()).collect();
        assert_eq!(plain.len(), 9);
        for (k, s) in plain.iter().enumerate() {
            assert!((s.t - 0.25 * k as f64).abs() < 1e-12);
            assert!((s.q - s.t.cos()).abs() < 1e-8);
            assert!((s.p + s.t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn leapfrog_tracks_the_oscillator() {
        let opts = FlowOptions {
            method: Method::Leapfrog { dt: 1e-3 },
            ..FlowOptions::default()
        };
        let tr = hamiltonian_flow_with(
            &oscillator(),
            PhasePoint::at_origin(0.0, 1.0),
            2.0 * PI,
            &opts,
        )
        .unwrap();
        let end = tr.last();
        assert!(end.p.abs() < 1e-5 && (end.q - 1.0).abs() < 1e-5);
        // symplectic: bounded energy error of order dt²
        assert!(tr.max_relative_energy_drift() < 1e-6);
        assert!(tr.has_event(EventKind::Bounce));
    }

    #[test]
    fn leapfrog_needs_separable() {
        let h = EnhancedHamiltonian::closed_form(
            "pq",
            LaurentPoly::from_triples(&[(1.0, 1, 1)]),
            1.0,
            LabelDomain::Plane,
        );
        let opts = FlowOptions {
            method: Method::Leapfrog { dt: 0.1 },
            ..FlowOptions::default()
        };
        assert!(hamiltonian_flow_with(&h, PhasePoint::at_origin(0.0, 1.0), 1.0, &opts).is_err());
    }

    #[test]
    fn linear_fall_exits_the_domain() {
        // p²/2 + q reaches q = 0 with finite speed
        let h = EnhancedHamiltonian::closed_form(
            "p^2/2 + q",
            LaurentPoly::from_triples(&[(0.5, 2, 0), (1.0, 0, 1)]),
            1.0,
            LabelDomain::HalfPlane,
        );
        let opts = FlowOptions {
            q_floor: 0.0,
            ..FlowOptions::default()
        };
        let tr = hamiltonian_flow_with(&h, PhasePoint::at_origin(0.0, 1.0), 5.0, &opts).unwrap();
        assert_eq!(tr.termination, Termination::DomainExit);
        assert!((tr.last().t - 2f64.sqrt()).abs() < 1e-6);
        // with the default floor the same fall registers as a singularity hit
        let tr = hamiltonian_flow(&h, PhasePoint::at_origin(0.0, 1.0), 5.0, 1e-10).unwrap();
        assert_eq!(tr.termination, Termination::SingularityHit);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = kepler();
        assert!(hamiltonian_flow(&h, PhasePoint::at_origin(0.0, -1.0), 1.0, 1e-10).is_err());
        assert!(hamiltonian_flow(&h, PhasePoint::at_origin(0.0, 1.0), 0.0, 1e-10).is_err());
        assert!(hamiltonian_flow(&h, PhasePoint::at_origin(0.0, 1.0), 1.0, 0.0).is_err());
    }
}
