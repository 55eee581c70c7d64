//! Power schedules.

use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Simulated-annealing parameters for the distance-driven baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingParams {
    /// Temperature halves every `t_exploration`.
    pub t_exploration: Duration,
    pub total_budget: Duration,
    pub min_energy: f64,
    pub max_energy: f64,
}

impl Default for AnnealingParams {
    fn default() -> Self {
        AnnealingParams {
            t_exploration: Duration::from_secs(10),
            total_budget: Duration::from_secs(60),
            min_energy: 2.0,
            max_energy: 128.0,
        }
    }
}

impl AnnealingParams {
    /// `2^(-elapsed / t_exploration)`, in (0, 1].
    pub fn temperature(&self, elapsed: Duration) -> f64 {
        let t_x = self.t_exploration.as_secs_f64().max(f64::MIN_POSITIVE);
        (-elapsed.as_secs_f64() / t_x).exp2()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Prefer ETS-interesting seeds, then coverage-interesting, then newest.
    #[default]
    EtsPriority,
    Annealing(AnnealingParams),
}

/// Distance scaled into [0, 1] by the largest finite distance seen so far;
/// infinite distances map to 1.
pub fn normalized_distance(distance: f64, max_seen: f64) -> f64 {
    if !distance.is_finite() {
        1.0
    } else if max_seen <= 0.0 || !max_seen.is_finite() {
        0.0
    } else {
        (distance / max_seen).clamp(0.0, 1.0)
    }
}

/// Annealing energy.
///
/// `min + (max - min) * (1 - d) * (1 - T)`: every seed gets `min` while the
/// temperature is 1, and close seeds approach `max` as it decays.
pub fn energy(normalized_distance: f64, elapsed: Duration, params: &AnnealingParams) -> f64 {
    let d = normalized_distance.clamp(0.0, 1.0);
    let t = params.temperature(elapsed);
    params.min_energy + (params.max_energy - params.min_energy) * (1.0 - d) * (1.0 - t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_decreases() {
        let p = AnnealingParams::default();
        assert_eq!(p.temperature(Duration::ZERO), 1.0);
        assert!((p.temperature(p.t_exploration) - 0.5).abs() < 1e-12);
        assert!(p.temperature(Duration::from_secs(11)) < p.temperature(Duration::from_secs(10)));
    }

    #[test]
    fn cold_start_ignores_distance() {
        let p = AnnealingParams::default();
        for d in [0.0, 0.3, 1.0] {
            assert_eq!(energy(d, Duration::ZERO, &p), p.min_energy);
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalized_distance(f64::INFINITY, 4.0), 1.0);
        assert_eq!(normalized_distance(2.0, 4.0), 0.5);
        assert_eq!(normalized_distance(0.0, 0.0), 0.0);
    }
}
