//! Fringe metrics on sampled traces.
//!
//! Traces are treated as one period of a `2 pi`-periodic signal: the first and
//! last samples are neighbours. A fringe is a local maximum (a run of equal
//! samples counts once) whose value exceeds `threshold * max`.

use serde::Serialize;

use crate::trace::Trace;
use crate::{Error, Result, TWO_PI};

/// Suppresses the numerically degenerate micro-peaks that appear around exact
/// zeros of a product trace.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeReport {
    pub threshold: f64,
    pub fringe_count: usize,
    /// Refined peak phases, ascending in `[0, 2 pi)`.
    pub peak_positions: Vec<f64>,
    /// Sampled peak values relative to the trace maximum.
    pub peak_heights: Vec<f64>,
    pub first_peak: f64,
    pub visibility: f64,
    /// Mean peak spacing; `2 pi` when the trace has a single fringe.
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Peak {
    phi: f64,
    value: f64,
}

/// Local maxima above `threshold * max`, sorted by phase.
fn find_peaks(trace: &Trace, threshold: f64) -> Vec<Peak> {
    let n = trace.len();
    let y = &trace.values;
    let max = trace.max();
    if n < 3 || !(max > 0.0) {
        return Vec::new();
    }
    let floor = threshold * max;
    let step = trace.step();

    // Start the scan at a sample that differs from its predecessor so that no
    // plateau straddles the wrap-around point.
    let Some(start) = (0..n).find(|&i| y[i] != y[(i + n - 1) % n]) else {
        return Vec::new(); // constant
    };

    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let first = (start + i) % n;
        let mut len = 1;
        while len < n && y[(first + len) % n] == y[first] {
            len += 1;
        }
        let last = (first + len - 1) % n;
        let prev = y[(first + n - 1) % n];
        let next = y[(last + 1) % n];
        let v = y[first];
        if v > prev && v > next && v > floor {
            let centre = if len == 1 {
                // vertex of the parabola through the three samples
                let denom = prev - 2.0 * v + next;
                let offset = if denom != 0.0 { 0.5 * (prev - next) / denom } else { 0.0 };
                trace.phis[first] + offset * step
            } else {
                trace.phis[first] + 0.5 * (len - 1) as f64 * step
            };
            peaks.push(Peak { phi: centre.rem_euclid(TWO_PI), value: v });
        }
        i += len;
    }
    peaks.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    peaks
}

/// Number of fringes above `threshold` (a fraction of the trace maximum).
pub fn count_fringes(trace: &Trace, threshold: f64) -> usize {
    find_peaks(trace, threshold).len()
}

/// Refined peak phases above `threshold`, ascending.
pub fn peak_positions(trace: &Trace, threshold: f64) -> Vec<f64> {
    find_peaks(trace, threshold).into_iter().map(|p| p.phi).collect()
}

/// Phase of the lowest-phase fringe at the default threshold.
pub fn first_peak(trace: &Trace) -> Result<f64> {
    first_peak_above(trace, DEFAULT_THRESHOLD)
}

pub fn first_peak_above(trace: &Trace, threshold: f64) -> Result<f64> {
    find_peaks(trace, threshold)
        .first()
        .map(|p| p.phi)
        .ok_or_else(|| Error::Analysis("trace has no local maximum".into()))
}

/// `(max - min) / (max + min)`.
pub fn visibility(trace: &Trace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Analysis("empty trace".into()));
    }
    let (max, min) = (trace.max(), trace.min());
    if !(max > 0.0) {
        return Err(Error::Analysis("visibility of an all-zero trace is undefined".into()));
    }
    Ok((max - min) / (max + min))
}

/// Mean spacing of adjacent fringes at the default threshold.
pub fn period_estimate(trace: &Trace) -> Result<f64> {
    spacing(&peak_positions(trace, DEFAULT_THRESHOLD))
}

fn spacing(positions: &[f64]) -> Result<f64> {
    match positions {
        [first, .., last] => Ok((last - first) / (positions.len() - 1) as f64),
        _ => Err(Error::Analysis(format!(
            "period needs at least two fringes, found {}",
            positions.len()
        ))),
    }
}

/// All metrics at once.
pub fn analyze(trace: &Trace, threshold: f64) -> Result<FringeReport> {
    let vis = visibility(trace)?;
    let peaks = find_peaks(trace, threshold);
    let first = peaks
        .first()
        .map(|p| p.phi)
        .ok_or_else(|| Error::Analysis("trace has no local maximum".into()))?;
    let positions: Vec<f64> = peaks.iter().map(|p| p.phi).collect();
    let period = if positions.len() >= 2 { spacing(&positions)? } else { TWO_PI };
    let max = trace.max();
    Ok(FringeReport {
        threshold,
        fringe_count: peaks.len(),
        peak_heights: peaks.iter().map(|p| p.value / max).collect(),
        peak_positions: positions,
        first_peak: first,
        visibility: vis,
        period,
    })
}
