/// Rounds half-up to two decimals. Values within 1e-9 of a half-cent boundary
/// are treated as lying on it, so `0.665` (stored as `0.66499…`) gives `0.67`.
pub fn round2(x: f64) -> f64 {
    let scaled = x * 100.0;
    let floor = scaled.floor();
    if (scaled - floor - 0.5).abs() < 1e-9 {
        (floor + 1.0) / 100.0
    } else {
        scaled.round() / 100.0
    }
}

/// Two-decimal presentation of a value, rounded with [`round2`].
pub fn fmt2(x: f64) -> String {
    format!("{:.2}", round2(x))
}
