//! Reference data for the two movie-booking interaction concepts: the
//! wizard-style V1 and the criteria-first V2.
//!
//! The concept files encode the user steps as defined. The `PUBLISHED_*`
//! constants are the hand-derived sums and formulas as they were reported for
//! the same concepts; several of them disagree with a mechanical summation of
//! the steps (V1 total 174 vs 171, V2 45 vs 46), which is why both are kept.

use crate::concept::{parse_concept, InteractionConcept};
use crate::symexpr::Binding;

pub const V1_CONCEPT: &str = include_str!("../data/v1.concept");
pub const V2_CONCEPT: &str = include_str!("../data/v2.concept");

pub fn v1() -> InteractionConcept {
    parse_concept(V1_CONCEPT).expect("bundled V1 concept parses")
}

pub fn v2() -> InteractionConcept {
    parse_concept(V2_CONCEPT).expect("bundled V2 concept parses")
}

/// Reported per-action sums `(T, E, C)`.
pub const V1_PUBLISHED_SUM: [&str; 3] = ["m + 2 + a*(r + t + d + s)", "4*a + 2", "7*a + 1"];
pub const V2_PUBLISHED_SUM: [&str; 3] = ["m + r + d + s + g + o + 1", "7", "4"];

/// Reported normalized interaction-step functions.
pub const V1_PUBLISHED_IS: &str = "m + 5 + a*(r + t + d + s + 11)";
pub const V2_PUBLISHED_IS: &str = "m + r + d + s + g + o + 12";

/// Reported simplified complexities and their class labels.
pub const V1_PUBLISHED_COMPLEXITY: (&str, &str) = ("a*(r + t + d + s + 11)", "quadratic");
pub const V2_PUBLISHED_COMPLEXITY: (&str, &str) = ("m + r + d + s + g + o", "linear");

/// Reported summed KLM formulas (`Q` = Glance, `T` = PointClick).
pub const V1_PUBLISHED_KLM: &str = "(m + a*(r + t + d + s + 2))*Q + (4 + 8*a)*T";
pub const V2_PUBLISHED_KLM: &str = "(m + r + t + d + s + o + 2)*Q + 9*T";

/// Binding used to instantiate the V1 interaction-step function (171 IS).
pub fn v1_complexity_binding() -> Binding {
    Binding::from_pairs([("m", 6), ("r", 4), ("t", 7), ("d", 4), ("s", 6), ("a", 5)])
}

/// Binding used to instantiate the V2 interaction-step function (46 IS).
pub fn v2_complexity_binding() -> Binding {
    Binding::from_pairs([("m", 6), ("r", 4), ("d", 4), ("s", 4), ("g", 9), ("o", 7)])
}

/// Binding used for the V1 KLM time (126.52 s). Note `d` and `s` differ
/// from [`v1_complexity_binding`].
pub fn v1_klm_binding() -> Binding {
    Binding::from_pairs([("m", 6), ("r", 4), ("t", 7), ("d", 6), ("s", 5), ("a", 5)])
}

/// Binding used for the V2 KLM time (29.57 s).
pub fn v2_klm_binding() -> Binding {
    Binding::from_pairs([("m", 6), ("r", 4), ("t", 7), ("d", 6), ("s", 5), ("o", 5)])
}

/// One row of the measured task-level speed table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredTask {
    pub label: &'static str,
    pub version: u8,
    pub training: bool,
    pub n: u32,
    pub is_count: u64,
    pub min_s: f64,
    pub max_s: f64,
    pub mean_s: f64,
    pub max_speed: f64,
    pub min_speed: f64,
    pub mean_speed: f64,
}

const fn row(
    label: &'static str,
    version: u8,
    training: bool,
    n: u32,
    is_count: u64,
    times: [f64; 3],
    speeds: [f64; 3],
) -> MeasuredTask {
    MeasuredTask {
        label,
        version,
        training,
        n,
        is_count,
        min_s: times[0],
        max_s: times[1],
        mean_s: times[2],
        max_speed: speeds[0],
        min_speed: speeds[1],
        mean_speed: speeds[2],
    }
}

/// Measured completion times and speeds after per-task IQR filtering.
pub const MEASURED_TASKS: [MeasuredTask; 7] = [
    row("V1 (1) training", 1, true, 74, 43, [16.54, 197.73, 80.50], [2.60, 0.22, 0.53]),
    row("V1 (1)", 1, false, 85, 43, [13.88, 238.76, 42.20], [3.10, 0.18, 1.02]),
    row("V1 (2)", 1, false, 86, 75, [19.54, 226.99, 65.45], [3.84, 0.33, 1.15]),
    row("V1 (3)", 1, false, 84, 107, [23.57, 217.44, 90.22], [4.54, 0.49, 1.19]),
    row("V1 (4)", 1, false, 165, 139, [17.12, 237.31, 98.64], [8.12, 0.59, 1.41]),
    row("V1 (5)", 1, false, 158, 171, [20.98, 238.26, 118.92], [8.15, 0.72, 1.44]),
    row("V2 (1)", 2, false, 260, 46, [13.06, 232.65, 70.15], [3.52, 0.20, 0.66]),
];

/// Reported pooled mean speeds.
pub const MEASURED_OVERALL_SPEED: f64 = 1.05;
pub const MEASURED_V1_SPEED: f64 = 1.20;

/// KLM-derived reference rows: `(label, attempts or None, IS, seconds, IS/sec)`.
pub const KLM_SPEEDS: [(&str, Option<u64>, u64, f64, f64); 6] = [
    ("V1 (1)", Some(1), 43, 32.76, 1.31),
    ("V1 (2)", Some(2), 75, 56.20, 1.33),
    ("V1 (3)", Some(3), 107, 79.64, 1.34),
    ("V1 (4)", Some(4), 139, 103.08, 1.35),
    ("V1 (5)", Some(5), 171, 126.52, 1.35),
    ("V2 (1)", None, 46, 29.57, 1.56),
];
