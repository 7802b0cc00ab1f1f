//! Post-processing of simulated time series: peaks, first negative values
//! and the oscillation envelope of the daily-death increments.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub value: f64,
    pub t: f64,
}

/// Global maximum over the discrete series; the first one wins on ties.
pub fn peak(times: &[f64], values: &[f64]) -> Option<Peak> {
    let mut best: Option<Peak> = None;
    for (&t, &v) in times.iter().zip(values) {
        if best.is_none_or(|b| v > b.value) {
            best = Some(Peak { value: v, t });
        }
    }
    best
}

/// First time the series is strictly negative.
pub fn first_negative(times: &[f64], values: &[f64]) -> Option<f64> {
    times.iter().zip(values).find(|(_, v)| **v < 0.0).map(|(t, _)| *t)
}

/// `max_k |x_k - x_0| / |x_0|`.
pub fn max_relative_drift(values: &[f64]) -> f64 {
    let Some(&x0) = values.first() else {
        return 0.0;
    };
    let scale = x0.abs();
    values
        .iter()
        .map(|v| (v - x0).abs())
        .fold(0.0, f64::max)
        / if scale > 0.0 { scale } else { 1.0 }
}

/// Forward differences `x_{k+1} - x_k`, tagged with the later time.
pub fn increments(times: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t = times.iter().skip(1).copied().collect();
    let v = values.windows(2).map(|w| w[1] - w[0]).collect();
    (t, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoint {
    pub t: f64,
    pub value: f64,
    pub is_max: bool,
}

/// Local extrema whose swing exceeds `threshold`.
///
/// Reversals smaller than the threshold are ignored, which keeps rounding
/// noise on flat stretches from producing spurious extrema. The last,
/// unconfirmed extreme is not reported.
pub fn turning_points(times: &[f64], values: &[f64], threshold: f64) -> Vec<TurningPoint> {
    let mut out = Vec::new();
    if values.is_empty() {
        return out;
    }
    // 0: no direction yet, 1: rising, -1: falling.
    let mut dir = 0i8;
    let (mut hi, mut lo, mut ext) = (0usize, 0usize, 0usize);
    for k in 1..values.len() {
        let v = values[k];
        match dir {
            0 => {
                if v > values[hi] {
                    hi = k;
                }
                if v < values[lo] {
                    lo = k;
                }
                if v - values[lo] > threshold && lo < k {
                    dir = 1;
                    ext = k;
                } else if values[hi] - v > threshold && hi < k {
                    dir = -1;
                    ext = k;
                }
            }
            1 => {
                if v > values[ext] {
                    ext = k;
                } else if values[ext] - v > threshold {
                    out.push(TurningPoint { t: times[ext], value: values[ext], is_max: true });
                    dir = -1;
                    ext = k;
                }
            }
            _ => {
                if v < values[ext] {
                    ext = k;
                } else if v - values[ext] > threshold {
                    out.push(TurningPoint { t: times[ext], value: values[ext], is_max: false });
                    dir = 1;
                    ext = k;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decaying,
    Growing,
    Mixed,
    /// Fewer than two swings to compare.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub turning_points: Vec<TurningPoint>,
    /// `|v_k - v_{k-1}|` between successive turning points.
    pub swings: Vec<f64>,
    /// `swings[k + 1] / swings[k]`.
    pub ratios: Vec<f64>,
    /// Number of local maxima.
    pub oscillations: usize,
    pub trend: Trend,
}

impl Envelope {
    pub fn from_turning_points(turning_points: Vec<TurningPoint>) -> Self {
        let swings: Vec<f64> = turning_points
            .windows(2)
            .map(|w| (w[1].value - w[0].value).abs())
            .collect();
        let ratios: Vec<f64> = swings.windows(2).map(|w| w[1] / w[0]).collect();
        let trend = if ratios.is_empty() {
            Trend::None
        } else if ratios.iter().all(|&r| r < 1.0) {
            Trend::Decaying
        } else if ratios.iter().all(|&r| r > 1.0) {
            Trend::Growing
        } else {
            Trend::Mixed
        };
        let oscillations = turning_points.iter().filter(|p| p.is_max).count();
        Self {
            turning_points,
            swings,
            ratios,
            oscillations,
            trend,
        }
    }

    /// Envelope built only from turning points at or after `t_from`.
    pub fn since(&self, t_from: f64) -> Self {
        Self::from_turning_points(
            self.turning_points
                .iter()
                .filter(|p| p.t >= t_from)
                .copied()
                .collect(),
        )
    }

    /// Ratios whose later swing ends at or after `t_from`. Unlike
    /// [`Envelope::since`], the earlier swing may start before `t_from`, so
    /// windows shorter than two periods still yield ratios.
    pub fn ratios_ending_since(&self, t_from: f64) -> Vec<f64> {
        self.ratios
            .iter()
            .enumerate()
            .filter(|(k, _)| self.turning_points[k + 2].t >= t_from)
            .map(|(_, r)| *r)
            .collect()
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }

    pub fn min_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::min)
    }
}

/// Relative hysteresis used for envelope detection.
pub const ENVELOPE_REL_THRESHOLD: f64 = 1e-6;

/// Envelope of the per-step increments of `values` (deaths in practice).
pub fn increment_envelope(times: &[f64], values: &[f64]) -> Envelope {
    let (t, inc) = increments(times, values);
    let (lo, hi) = inc
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = if inc.is_empty() { 0.0 } else { hi - lo };
    Envelope::from_turning_points(turning_points(&t, &inc, ENVELOPE_REL_THRESHOLD * range))
}
