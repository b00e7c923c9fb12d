//! Time-ordered phase-space samples with event annotations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub fn new(t: f64, p: f64, q: f64) -> Self {
        Self { t, p, q }
    }

    pub fn at_origin(p: f64, q: f64) -> Self {
        Self::new(0.0, p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SingularityHit,
    Bounce,
    DomainExit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SingularityHit => "singularity_hit",
            EventKind::Bounce => "bounce",
            EventKind::DomainExit => "domain_exit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub kind: EventKind,
}

/// One sample: position in phase space, energy and the velocity
/// `(ṗ, q̇)` of the integrated vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub dp: f64,
    pub dq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    SingularityHit,
    DomainExit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>, events: Vec<Event>, termination: Termination) -> Result<Self> {
        if samples.is_empty() {
            return Err(EqError::invalid("trajectory has no samples"));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(EqError::invalid(
                "trajectory times must be strictly increasing",
            ));
        }
        Ok(Self {
            samples,
            events,
            termination,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.h)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn has_event(&self, kind: EventKind) -> bool {
        self.events_of(kind).next().is_some()
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&Event> {
        self.events_of(kind).next()
    }

    /// Smallest `q` over samples and located events.
    pub fn min_q(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.q)
            .chain(self.events.iter().map(|e| e.q))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max |H(t) − H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub fn max_relative_energy_drift(&self) -> f64 {
        let h0 = self.first().h;
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.samples
            .iter()
            .map(|s| (s.h - h0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV body with columns `t,p,q,H,event`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,q,H,event\n");
        for s in &self.samples {
            let ev = s.event.map_or("", EventKind::as_str);
            let _ = writeln!(out, "{:?},{:?},{:?},{:?},{}", s.t, s.p, s.q, s.h, ev);
        }
        out
    }
}
