//! Trace analysis: dominant frequencies and peak ordering.

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates below this (MHz) are reported as decoupled.
pub const DECOUPLED_MHZ: f64 = 0.2;

/// Dominant oscillation frequency (Hz) of uniformly sampled data, using a Hann
/// window, 8× zero padding and quadratic interpolation of the peak bin.
pub fn dominant_frequency(dt: f64, values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 8 || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("need ≥ 8 uniform samples, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / (n - 1) as f64).cos();
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm()).collect();
    let (k, _) = mag.iter().enumerate().skip(1).fold((1, f64::MIN), |best, (k, &m)| if m > best.1 { (k, m) } else { best });
    let offset = if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom.abs() > 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok((k as f64 + offset) / (padded as f64 * dt))
}

/// Peak-to-peak excursion of a trace.
pub fn swing(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

/// Centered moving average over `window` samples (odd widths are symmetric).
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub label: String,
    pub time_ns: f64,
    pub value: f64,
}

/// First local maximum at or after `start` that reaches half of the trace's
/// maximum over that range.
pub fn first_peak(times: &[f64], values: &[f64], start: usize) -> Option<(usize, f64)> {
    let tail = values.get(start..)?;
    let top = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let n = values.len();
    (start..n)
        .find(|&i| {
            let v = values[i];
            v >= 0.5 * top && (i == 0 || v >= values[i - 1]) && (i + 1 == n || v >= values[i + 1])
        })
        .map(|i| (i, times[i]))
}

/// Order in which groups of sites are visited, starting from `initial` (which
/// holds the population at t = 0) and ending with its return.
pub fn visit_order(times: &[f64], groups: &[(String, Vec<f64>)], initial: usize, smoothing: usize) -> Vec<Peak> {
    let smoothed: Vec<Vec<f64>> = groups.iter().map(|(_, v)| smooth(v, smoothing)).collect();
    let mut peaks: Vec<Peak> = Vec::new();
    for (g, (name, _)) in groups.iter().enumerate() {
        let start = if g == initial {
            // the return is searched from the trough after the population has left
            let v = &smoothed[g];
            let Some(mut i) = v.iter().position(|&x| x < 0.5 * v[0]) else { continue };
            while i + 1 < v.len() && v[i + 1] <= v[i] {
                i += 1;
            }
            i
        } else {
            0
        };
        if let Some((i, t)) = first_peak(times, &smoothed[g], start) {
            peaks.push(Peak { label: name.clone(), time_ns: t * 1e9, value: groups[g].1[i] });
        }
    }
    peaks.sort_by(|a, b| a.time_ns.total_cmp(&b.time_ns));
    let mut out = vec![Peak { label: groups[initial].0.clone(), time_ns: times[0] * 1e9, value: groups[initial].1[0] }];
    out.extend(peaks);
    out
}
