//! Deterministic trajectories the random per-vertex quantities track.
//!
//! Per round, the idealized conflict degree and palette size evolve as
//!
//! ```text
//! d_{t+1} = d_t (1 - (1/16) e^{-1/2} s_t/d_t) e^{-1/2}
//! s_{t+1} = s_t e^{-1/2}
//! ```
//!
//! so the ratio d_t/s_t drops by exactly (1/16)e^{-1/2} each round. Rounds
//! run while d_t/s_t >= 1/8. Alongside them runs the cumulative error budget
//! e_{t+1} = 3 e_t + beta * sqrt(psi / s_t), e_0 = 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// e^{-1/2}, the per-round survival/shrink factor.
pub fn shrink() -> f64 {
    (-0.5f64).exp()
}

/// Per-round decrement of d_t/s_t.
pub fn ratio_step() -> f64 {
    (1.0 / 16.0) * shrink()
}

/// The repeat-until block runs while d_t/s_t >= this.
pub const TERMINATION_RATIO: f64 = 1.0 / 8.0;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("invalid schedule params: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Maximum degree Δ.
    pub delta: u64,
    /// Colors used is floor(Δ/k).
    pub k: f64,
    /// Concentration exponent; defaults to 3 ln Δ.
    pub psi: f64,
    /// Error-recurrence constant; the analysis only asserts one exists, so it
    /// is exposed and defaults to 1.
    pub beta: f64,
}

impl ScheduleParams {
    pub fn new(delta: u64, k: f64) -> Self {
        let psi = 3.0 * (delta.max(2) as f64).ln();
        ScheduleParams { delta, k, psi, beta: 1.0 }
    }

    /// floor(Δ/k)
    pub fn num_colors(&self) -> u64 {
        (self.delta as f64 / self.k).floor() as u64
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        if self.delta == 0 {
            return Err(ScheduleError::InvalidParams("delta must be >= 1".into()));
        }
        if !(self.k > 0.0) {
            return Err(ScheduleError::InvalidParams("k must be > 0".into()));
        }
        if self.num_colors() < 1 {
            return Err(ScheduleError::InvalidParams(format!(
                "floor(delta/k) = floor({}/{}) < 1 color",
                self.delta, self.k
            )));
        }
        if !(self.psi > 0.0) {
            return Err(ScheduleError::InvalidParams("psi must be > 0".into()));
        }
        if !(self.beta > 0.0) {
            return Err(ScheduleError::InvalidParams("beta must be > 0".into()));
        }
        Ok(())
    }
}

/// Precomputed sequences for rounds 0..=t1, where t1 is the first round with
/// d_t/s_t < 1/8. A start ratio k already below 1/8 yields the degenerate
/// schedule with t1 = 0 and the loop body never runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub params: ScheduleParams,
    #[serde(rename = "d")]
    pub d_seq: Vec<f64>,
    #[serde(rename = "s")]
    pub s_seq: Vec<f64>,
    #[serde(rename = "e")]
    pub e_seq: Vec<f64>,
    /// p_t = min(1, 1/(4 d_t)). The raw 1/(4 d_t) can exceed 1 once d_t
    /// drops below 1/4 near termination.
    #[serde(rename = "p")]
    pub activation_p: Vec<f64>,
    pub t1: usize,
}

impl Schedule {
    pub fn build(params: ScheduleParams) -> Result<Schedule, ScheduleError> {
        params.validate()?;
        let shrink = shrink();
        let mut d_seq = vec![params.delta as f64];
        let mut s_seq = vec![params.delta as f64 / params.k];
        while d_seq.last().unwrap() / s_seq.last().unwrap() >= TERMINATION_RATIO {
            let d = *d_seq.last().unwrap();
            let s = *s_seq.last().unwrap();
            d_seq.push(d * (1.0 - (1.0 / 16.0) * shrink * s / d) * shrink);
            s_seq.push(s * shrink);
        }
        let t1 = d_seq.len() - 1;
        let mut e_seq = vec![0.0];
        for t in 0..t1 {
            let e = e_seq[t];
            e_seq.push(3.0 * e + params.beta * (params.psi / s_seq[t]).sqrt());
        }
        let activation_p = d_seq.iter().map(|d| (1.0 / (4.0 * d)).min(1.0)).collect();
        Ok(Schedule { params, d_seq, s_seq, e_seq, activation_p, t1 })
    }

    /// e_t, the cumulative error budget. Monotone nondecreasing; strictly
    /// increasing for t >= 1 when beta > 0.
    pub fn error_budget(&self, t: usize) -> f64 {
        self.e_seq[t]
    }

    /// Coarse growth curve 3^t sqrt(k psi exp(8 e^{1/2} k) / Δ), reported
    /// for comparison against the exact recurrence only.
    pub fn coarse_error_curve(&self, t: usize) -> f64 {
        let k = self.params.k;
        let inner =
            k * self.params.psi * (8.0 * 0.5f64.exp() * k).exp() / self.params.delta as f64;
        3f64.powi(t as i32) * inner.sqrt()
    }

    pub fn feasibility(&self) -> FeasibilityReport {
        self.feasibility_with_margins(&FeasibilityMargins::default())
    }

    pub fn feasibility_with_margins(&self, margins: &FeasibilityMargins) -> FeasibilityReport {
        let s_t1 = self.s_seq[self.t1];
        let e_t1 = self.e_seq[self.t1];
        let psi = self.params.psi;
        let s_ok = s_t1 >= margins.s_over_psi * psi;
        let e_ok = e_t1 <= margins.e_max;
        FeasibilityReport {
            t1: self.t1,
            s_t1,
            e_t1,
            psi,
            s_over_psi_required: margins.s_over_psi,
            e_max_required: margins.e_max,
            s_ok,
            e_ok,
            feasible: s_ok && e_ok,
        }
    }
}

/// Margins standing in for the asymptotic conditions s_{t1} >> psi and
/// e_{t1} << 1 at finite Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMargins {
    pub s_over_psi: f64,
    pub e_max: f64,
}

impl Default for FeasibilityMargins {
    fn default() -> Self {
        FeasibilityMargins { s_over_psi: 10.0, e_max: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub t1: usize,
    pub s_t1: f64,
    pub e_t1: f64,
    pub psi: f64,
    pub s_over_psi_required: f64,
    pub e_max_required: f64,
    pub s_ok: bool,
    pub e_ok: bool,
    pub feasible: bool,
}

/// Builds the schedule for `params` and reports whether the asymptotic
/// preconditions plausibly hold at this finite Δ.
pub fn feasibility_report(params: ScheduleParams) -> Result<FeasibilityReport, ScheduleError> {
    Ok(Schedule::build(params)?.feasibility())
}
