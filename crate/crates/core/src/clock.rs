use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Maps the scheduler's nominal seconds onto wall-clock time.
///
/// Status parsing, queue refreshes and fuzzer synchronization are defined in
/// nominal seconds (1 s, 60 s, `max(60, 3t)`); a scale of 0.1 runs them ten
/// times faster than nominal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeScale(f64);

impl TimeScale {
    pub const DEFAULT: TimeScale = TimeScale(0.1);
    pub const REAL_TIME: TimeScale = TimeScale(1.0);

    pub fn new(wall_seconds_per_nominal_second: f64) -> Option<Self> {
        (wall_seconds_per_nominal_second.is_finite() && wall_seconds_per_nominal_second > 0.0)
            .then_some(TimeScale(wall_seconds_per_nominal_second))
    }

    pub fn factor(self) -> f64 {
        self.0
    }

    pub fn to_wall(self, nominal_secs: f64) -> Duration {
        Duration::from_secs_f64(nominal_secs * self.0)
    }

    pub fn to_nominal(self, wall: Duration) -> f64 {
        wall.as_secs_f64() / self.0
    }
}

impl Default for TimeScale {
    fn default() -> Self {
        TimeScale::DEFAULT
    }
}
