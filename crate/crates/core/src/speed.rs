//! Interaction speed (IS per second) models and time estimates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpeedError {
    #[error("unknown speed model `{0}` (built-ins: overall, v1, v2)")]
    UnknownModel(String),
    #[error("invalid speed model: {0}")]
    InvalidModel(String),
    #[error("no samples")]
    Empty,
    #[error("durations must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("samples mix interaction-step counts {0} and {1}")]
    MixedIsCount(u64, u64),
    #[error("row weights must be positive")]
    ZeroWeight,
}

/// Mean interaction speed with an optional observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedModel {
    pub name: String,
    pub mean: f64,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub source: String,
}

impl SpeedModel {
    pub fn new(name: &str, mean: f64, min: Option<f64>, max: Option<f64>, source: &str) -> Result<Self, SpeedError> {
        let m = Self { name: name.to_string(), mean, min, max, source: source.to_string() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), SpeedError> {
        let bad = |msg: String| Err(SpeedError::InvalidModel(msg));
        if !(self.mean.is_finite() && self.mean > 0.0) {
            return bad(format!("mean speed must be positive, got {}", self.mean));
        }
        if let Some(min) = self.min {
            if !(min > 0.0 && min <= self.mean) {
                return bad(format!("need 0 < min <= mean, got min {min}, mean {}", self.mean));
            }
        }
        if let Some(max) = self.max {
            if !(max.is_finite() && max >= self.mean) {
                return bad(format!("need max >= mean, got max {max}, mean {}", self.mean));
            }
        }
        Ok(())
    }

    /// Built-in models: `overall` (mean 1.05, range 0.18 to 8.15), `v1`
    /// (mean 1.20) and `v2` (mean 0.66). The per-version models have no range.
    pub fn builtin(name: &str) -> Result<Self, SpeedError> {
        let source = "movie-booking study, IQR-filtered task times";
        match name {
            "overall" => Self::new("overall", 1.05, Some(0.18), Some(8.15), source),
            "v1" => Self::new("v1", 1.20, None, None, source),
            "v2" => Self::new("v2", 0.66, None, None, source),
            other => Err(SpeedError::UnknownModel(other.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SpeedError> {
        let m: SpeedModel = serde_json::from_str(text).map_err(|e| SpeedError::InvalidModel(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

/// Expected time plus the range implied by the model's speed range, when it
/// has one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeEstimate {
    pub expected: f64,
    pub fastest: Option<f64>,
    pub slowest: Option<f64>,
}

pub fn estimate_time(is_count: u64, model: &SpeedModel) -> TimeEstimate {
    let is = is_count as f64;
    TimeEstimate {
        expected: is / model.mean,
        fastest: model.max.map(|max| is / max),
        slowest: model.min.map(|min| is / min),
    }
}

/// Duration and speed summary of one group of equal-IS samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedStats {
    pub is_count: u64,
    pub n: usize,
    pub mean_time: f64,
    pub min_time: f64,
    pub max_time: f64,
    pub mean_speed: f64,
    pub max_speed: f64,
    pub min_speed: f64,
}

/// Speeds are derived from times: mean speed is IS over mean time, the fastest
/// speed comes from the shortest time and the slowest from the longest.
pub fn speed_stats(samples: &[(u64, f64)]) -> Result<SpeedStats, SpeedError> {
    let &(is_count, _) = samples.first().ok_or(SpeedError::Empty)?;
    let mut durations = Vec::with_capacity(samples.len());
    for &(is, d) in samples {
        if is != is_count {
            return Err(SpeedError::MixedIsCount(is_count, is));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(SpeedError::NonPositiveDuration(d));
        }
        durations.push(d);
    }
    // summation order must not depend on input order
    durations.sort_by(f64::total_cmp);
    let n = durations.len();
    let mean_time = durations.iter().sum::<f64>() / n as f64;
    let (min_time, max_time) = (durations[0], durations[n - 1]);
    let is = is_count as f64;
    Ok(SpeedStats {
        is_count,
        n,
        mean_time,
        min_time,
        max_time,
        mean_speed: is / mean_time,
        max_speed: is / min_time,
        min_speed: is / max_time,
    })
}

/// Sample-count-weighted mean of per-row mean speeds.
pub fn aggregate_speed(rows: &[(u64, f64)]) -> Result<f64, SpeedError> {
    if rows.is_empty() {
        return Err(SpeedError::Empty);
    }
    let mut weight = 0.0;
    let mut total = 0.0;
    for &(n, s) in rows {
        if n == 0 {
            return Err(SpeedError::ZeroWeight);
        }
        weight += n as f64;
        total += n as f64 * s;
    }
    Ok(total / weight)
}
