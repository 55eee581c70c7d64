/// Interval before the first synchronization, in nominal seconds.
pub const BASE_SYNC_INTERVAL_SECS: f64 = 60.0;
/// Multiplier on the time spent importing.
pub const SYNC_COST_FACTOR: f64 = 3.0;

/// Seconds until the next fuzzer synchronization, given how long the last
/// import took (`None` before the first one): `max(60, 3t)`.
pub fn next_sync_interval(last_import_secs: Option<f64>) -> f64 {
    match last_import_secs {
        None => BASE_SYNC_INTERVAL_SECS,
        Some(t) => BASE_SYNC_INTERVAL_SECS.max(SYNC_COST_FACTOR * t.max(0.0)),
    }
}
