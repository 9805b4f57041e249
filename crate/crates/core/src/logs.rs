//! Interaction event logs (session, task, page visit, interaction step) and
//! the speed tables computed from them.
//!
//! Durations are filtered per group with the interquartile-range rule before
//! speeds are derived. Quartiles use linear interpolation at positions
//! `0.25·(n−1)` and `0.75·(n−1)` of the sorted samples.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::speed::{speed_stats, SpeedError};
use crate::symexpr::Binding;
use crate::util::fmt2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogError {
    #[error("malformed log: {0}")]
    Malformed(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("group `{group}` mixes interaction-step counts {first} and {other}")]
    MixedIsCount { group: String, first: u64, other: u64 },
    #[error("no samples")]
    Empty,
    #[error(transparent)]
    Speed(#[from] SpeedError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventLog {
    pub sessions: Vec<Session>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub session_id: String,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub task_id: String,
    pub concept_name: String,
    #[serde(default)]
    pub binding: Binding,
    pub is_count: u64,
    pub page_visits: Vec<PageVisit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageVisit {
    pub page: String,
    pub enter_ms: u64,
    pub exit_ms: u64,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub step_label: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub is_count: u64,
}

impl Task {
    /// Last page exit minus first page enter, in milliseconds. Gaps between
    /// page visits count towards the task.
    pub fn duration_ms(&self) -> u64 {
        let enter = self.page_visits.iter().map(|p| p.enter_ms).min().unwrap_or(0);
        let exit = self.page_visits.iter().map(|p| p.exit_ms).max().unwrap_or(0);
        exit.saturating_sub(enter)
    }
}

impl EventLog {
    pub fn validate(&self) -> Result<(), LogError> {
        let invalid = |path: String, message: &str| Err(LogError::Invalid { path, message: message.to_string() });
        for (si, session) in self.sessions.iter().enumerate() {
            for (ti, task) in session.tasks.iter().enumerate() {
                let tpath = format!("sessions[{si}].tasks[{ti}]");
                if task.page_visits.is_empty() {
                    return invalid(tpath, "task has no page visits");
                }
                for (pi, page) in task.page_visits.iter().enumerate() {
                    let ppath = format!("{tpath}.page_visits[{pi}]");
                    if page.exit_ms < page.enter_ms {
                        return invalid(ppath, "page visit exits before it is entered");
                    }
                    for (ri, step) in page.steps.iter().enumerate() {
                        let rpath = format!("{ppath}.steps[{ri}]");
                        if step.end_ms < step.start_ms {
                            return invalid(rpath, "step ends before it starts");
                        }
                        if step.start_ms < page.enter_ms || step.end_ms > page.exit_ms {
                            return invalid(rpath, "step lies outside its page visit");
                        }
                        if step.is_count == 0 {
                            return invalid(rpath, "step is_count must be at least 1");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Deterministic, pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serialization is infallible")
    }

    pub fn task_count(&self) -> usize {
        self.sessions.iter().map(|s| s.tasks.len()).sum()
    }
}

/// Parses and validates a JSON log.
pub fn load_log(bytes: &[u8]) -> Result<EventLog, LogError> {
    let log: EventLog = serde_json::from_slice(bytes).map_err(|e| LogError::Malformed(e.to_string()))?;
    log.validate()?;
    Ok(log)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IqrBounds {
    pub q1: f64,
    pub q3: f64,
    pub lower: f64,
    pub upper: f64,
}

impl IqrBounds {
    pub fn from_samples(samples: &[f64]) -> Result<Self, LogError> {
        if samples.is_empty() {
            return Err(LogError::Empty);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile(&sorted, 0.25);
        let q3 = quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        Ok(Self { q1, q3, lower: q1 - 1.5 * iqr, upper: q3 + 1.5 * iqr })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Keeps the samples inside the IQR fences, in their original order.
pub fn iqr_filter(samples: &[f64]) -> Result<(Vec<f64>, IqrBounds), LogError> {
    let bounds = IqrBounds::from_samples(samples)?;
    let retained = samples.iter().copied().filter(|&x| bounds.contains(x)).collect();
    Ok((retained, bounds))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupBy {
    /// One group per task id.
    #[default]
    Task,
    /// One group per concept.
    Concept,
    /// One group per concept and IS count, merging equivalent tasks.
    ConceptIs,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "task" => Ok(GroupBy::Task),
            "concept" => Ok(GroupBy::Concept),
            "concept-is" => Ok(GroupBy::ConceptIs),
            other => Err(format!("unknown grouping `{other}` (task, concept, concept-is)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub group: String,
    pub n: usize,
    pub is: u64,
    pub min_s: f64,
    pub max_s: f64,
    pub mean_s: f64,
    pub max_is_per_s: f64,
    pub min_is_per_s: f64,
    pub mean_is_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SpeedTable {
    pub rows: Vec<TableRow>,
    pub warnings: Vec<String>,
}

pub const COLUMNS: [&str; 9] =
    ["group", "n", "is", "min_s", "max_s", "mean_s", "max_is_per_s", "min_is_per_s", "mean_is_per_s"];

impl SpeedTable {
    fn cells(row: &TableRow) -> [String; 9] {
        [
            row.group.clone(),
            row.n.to_string(),
            row.is.to_string(),
            fmt2(row.min_s),
            fmt2(row.max_s),
            fmt2(row.mean_s),
            fmt2(row.max_is_per_s),
            fmt2(row.min_is_per_s),
            fmt2(row.mean_is_per_s),
        ]
    }

    /// Aligned text: group left-aligned, numbers right-aligned.
    pub fn render_text(&self) -> String {
        let cells: Vec<[String; 9]> = self.rows.iter().map(Self::cells).collect();
        let mut widths = COLUMNS.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let header = COLUMNS.map(str::to_string);
        for row in std::iter::once(&header).chain(&cells) {
            let mut line = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(line, "{c:<w$}");
                } else {
                    let _ = write!(line, "  {c:>w$}");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for row in &self.rows {
            w.write_record(Self::cells(row)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

fn build_table(groups: BTreeMap<String, Vec<(u64, u64)>>, what: &str) -> Result<SpeedTable, LogError> {
    let mut table = SpeedTable::default();
    for (group, samples) in groups {
        let first = samples[0].0;
        if let Some(&(other, _)) = samples.iter().find(|s| s.0 != first) {
            return Err(LogError::MixedIsCount { group, first, other });
        }
        let mut secs: Vec<f64> = samples.iter().filter(|s| s.1 > 0).map(|s| s.1 as f64 / 1000.0).collect();
        let zero = samples.len() - secs.len();
        if zero > 0 {
            table.warnings.push(format!("{what} `{group}`: dropped {zero} zero-length sample(s)"));
        }
        secs.sort_by(f64::total_cmp);
        let retained = match iqr_filter(&secs) {
            Ok((retained, _)) => retained,
            Err(_) => Vec::new(),
        };
        if retained.is_empty() {
            table.warnings.push(format!("{what} `{group}`: no samples left after filtering, row omitted"));
            continue;
        }
        let stats = speed_stats(&retained.iter().map(|&d| (first, d)).collect::<Vec<_>>())?;
        table.rows.push(TableRow {
            group,
            n: stats.n,
            is: first,
            min_s: stats.min_time,
            max_s: stats.max_time,
            mean_s: stats.mean_time,
            max_is_per_s: stats.max_speed,
            min_is_per_s: stats.min_speed,
            mean_is_per_s: stats.mean_speed,
        });
    }
    Ok(table)
}

/// Task-level speed table, one row per group, outliers removed per group.
pub fn task_table(log: &EventLog, group_by: GroupBy) -> Result<SpeedTable, LogError> {
    let mut groups: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
    for task in log.sessions.iter().flat_map(|s| &s.tasks) {
        let key = match group_by {
            GroupBy::Task => task.task_id.clone(),
            GroupBy::Concept => task.concept_name.clone(),
            GroupBy::ConceptIs => format!("{} ({} IS)", task.concept_name, task.is_count),
        };
        groups.entry(key).or_default().push((task.is_count, task.duration_ms()));
    }
    let mut table = build_table(groups, "group")?;
    if log.task_count() == 0 {
        table.warnings.push("log contains no tasks".to_string());
    }
    Ok(table)
}

/// Step-level speed table, one row per step label.
pub fn step_table(log: &EventLog) -> Result<SpeedTable, LogError> {
    let mut groups: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
    let records = log.sessions.iter().flat_map(|s| &s.tasks).flat_map(|t| &t.page_visits).flat_map(|p| &p.steps);
    for r in records {
        groups.entry(r.step_label.clone()).or_default().push((r.is_count, r.end_ms - r.start_ms));
    }
    build_table(groups, "step")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(label: &str, start: u64, end: u64, is: u64) -> StepRecord {
        StepRecord { step_label: label.into(), start_ms: start, end_ms: end, is_count: is }
    }

    fn task(id: &str, is: u64, visits: Vec<PageVisit>) -> Task {
        Task {
            task_id: id.into(),
            concept_name: "c".into(),
            binding: Binding::new(),
            is_count: is,
            page_visits: visits,
        }
    }

    fn page(enter: u64, exit: u64, steps: Vec<StepRecord>) -> PageVisit {
        PageVisit { page: "p".into(), enter_ms: enter, exit_ms: exit, steps }
    }

    fn log_of(tasks: Vec<Task>) -> EventLog {
        EventLog {
            sessions: tasks
                .into_iter()
                .enumerate()
                .map(|(i, t)| Session { session_id: format!("s{i}"), tasks: vec![t] })
                .collect(),
        }
    }

    #[test]
    fn minimal_log_loads() {
        let text = r#"{"sessions":[{"session_id":"s1","tasks":[{"task_id":"t1","concept_name":"c",
            "binding":{"m":3},"is_count":2,"page_visits":[{"page":"home","enter_ms":0,"exit_ms":2000,
            "steps":[{"step_label":"pick","start_ms":0,"end_ms":2000,"is_count":2}]}]}]}]}"#;
        let log = load_log(text.as_bytes()).unwrap();
        assert_eq!(log.sessions[0].tasks[0].page_visits[0].steps.len(), 1);
        assert_eq!(log.sessions[0].tasks[0].binding.get("m"), Some(3));
        assert_eq!(load_log(log.to_json().as_bytes()).unwrap(), log);
    }

    #[test]
    fn nesting_violations_name_the_record() {
        let bad = log_of(vec![task("t", 1, vec![page(0, 1000, vec![step("s", 500, 1500, 1)])])]);
        let err = load_log(bad.to_json().as_bytes()).unwrap_err();
        assert_eq!(
            err,
            LogError::Invalid {
                path: "sessions[0].tasks[0].page_visits[0].steps[0]".into(),
                message: "step lies outside its page visit".into()
            }
        );
        let bad = log_of(vec![task("t", 1, vec![page(10, 5, vec![])])]);
        assert!(matches!(bad.validate(), Err(LogError::Invalid { .. })));
        let bad = log_of(vec![task("t", 1, vec![page(0, 5, vec![step("s", 0, 5, 0)])])]);
        assert!(matches!(bad.validate(), Err(LogError::Invalid { .. })));
        let bad = log_of(vec![task("t", 1, vec![])]);
        assert!(matches!(bad.validate(), Err(LogError::Invalid { .. })));
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(load_log(b"{"), Err(LogError::Malformed(_))));
        assert!(matches!(load_log(br#"{"sessions":[],"extra":1}"#), Err(LogError::Malformed(_))));
        let negative = r#"{"sessions":[{"session_id":"s","tasks":[{"task_id":"t","concept_name":"c","is_count":1,
            "page_visits":[{"page":"p","enter_ms":-1,"exit_ms":0,"steps":[]}]}]}]}"#;
        assert!(matches!(load_log(negative.as_bytes()), Err(LogError::Malformed(_))));
    }

    #[test]
    fn iqr_examples() {
        let (kept, b) = iqr_filter(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((b.q1, b.q3, b.lower, b.upper), (2.0, 4.0, -1.0, 7.0));
        assert_eq!(kept, vec![1.0, 2.0, 3.0, 4.0]);
        let (kept, b) = iqr_filter(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(b.q3 - b.q1, 0.0);
        assert_eq!(kept, vec![5.0, 5.0, 5.0]);
        let (kept, b) = iqr_filter(&[7.0]).unwrap();
        assert_eq!((b.q1, b.q3), (7.0, 7.0));
        assert_eq!(kept, vec![7.0]);
        assert_eq!(iqr_filter(&[]), Err(LogError::Empty));
        // interpolation between ranks: positions 0.75 and 2.25 of four samples
        let b = IqrBounds::from_samples(&[40.0, 10.0, 30.0, 20.0]).unwrap();
        assert_eq!((b.q1, b.q3), (17.5, 32.5));
    }

    #[test]
    fn task_table_groups_and_filters() {
        let mut tasks = Vec::new();
        for (i, ms) in [10_000u64, 11_000, 12_000, 13_000, 100_000].into_iter().enumerate() {
            tasks.push(task("t1", 12, vec![page(0, ms, vec![])]));
            tasks.push(task("t2", 6, vec![page(1000, 1000 + 6000 + i as u64, vec![])]));
        }
        let table = task_table(&log_of(tasks), GroupBy::Task).unwrap();
        assert_eq!(table.rows.len(), 2);
        let t1 = &table.rows[0];
        assert_eq!((t1.group.as_str(), t1.n, t1.is), ("t1", 4, 12));
        assert_eq!(t1.mean_s, 11.5);
        assert!((t1.mean_is_per_s * t1.mean_s - 12.0).abs() < 1e-9);
        assert_eq!(table.rows[1].n, 5);
        assert!(table.warnings.is_empty());
    }

    #[test]
    fn task_duration_spans_all_page_visits() {
        let t = task("t", 1, vec![page(500, 900, vec![]), page(1000, 2500, vec![])]);
        assert_eq!(t.duration_ms(), 2000);
    }

    #[test]
    fn mixed_is_counts_are_rejected() {
        let log = log_of(vec![task("t", 3, vec![page(0, 10, vec![])]), task("t", 4, vec![page(0, 10, vec![])])]);
        assert!(matches!(task_table(&log, GroupBy::Task), Err(LogError::MixedIsCount { .. })));
        let by_is = task_table(&log, GroupBy::ConceptIs).unwrap();
        assert_eq!(by_is.rows.len(), 2);
        assert_eq!(by_is.rows[0].group, "c (3 IS)");
    }

    #[test]
    fn empty_and_degenerate_groups() {
        let table = task_table(&EventLog::default(), GroupBy::Task).unwrap();
        assert!(table.rows.is_empty());
        assert_eq!(table.warnings, vec!["log contains no tasks".to_string()]);

        let log =
            log_of(vec![task("t", 1, vec![page(0, 5000, vec![step("zero", 3000, 3000, 1), step("one", 0, 2000, 2)])])]);
        let steps = step_table(&log).unwrap();
        assert_eq!(steps.rows.len(), 1);
        assert_eq!(steps.rows[0].group, "one");
        assert_eq!(steps.rows[0].mean_is_per_s, 1.0);
        assert_eq!(steps.warnings.len(), 2);
    }

    #[test]
    fn step_table_reference_row() {
        // label 1a: 7 IS with a mean of 4.75 s
        let durations = [4000u64, 4500, 4750, 5000, 5500];
        let tasks = durations.iter().map(|&d| task("t", 7, vec![page(0, d, vec![step("1a", 0, d, 7)])])).collect();
        let steps = step_table(&log_of(tasks)).unwrap();
        assert_eq!(fmt2(steps.rows[0].mean_s), "4.75");
        assert_eq!(fmt2(steps.rows[0].mean_is_per_s), "1.47");
    }

    #[test]
    fn renderings() {
        let log = log_of(vec![task("a,b", 2, vec![page(0, 2000, vec![])])]);
        let table = task_table(&log, GroupBy::Task).unwrap();
        assert_eq!(
            table.render_csv(),
            "group,n,is,min_s,max_s,mean_s,max_is_per_s,min_is_per_s,mean_is_per_s\n\"a,b\",1,2,2.00,2.00,2.00,1.00,1.00,1.00\n"
        );
        let text = table.render_text();
        assert!(text.starts_with("group  n  is  min_s"));
        assert!(text.lines().nth(1).unwrap().ends_with("1.00"));
    }

    proptest! {
        #[test]
        fn filtering_once_on_original_bounds_is_idempotent(samples in proptest::collection::vec(0.0f64..1000.0, 1..60)) {
            let (kept, bounds) = iqr_filter(&samples).unwrap();
            prop_assert!(!kept.is_empty());
            let again: Vec<f64> = kept.iter().copied().filter(|&x| bounds.contains(x)).collect();
            prop_assert_eq!(&again, &kept);
            prop_assert!(bounds.q1 <= bounds.q3);
        }

        #[test]
        fn tables_ignore_session_order(durations in proptest::collection::vec(1u64..100_000, 1..30), seed in any::<u64>()) {
            let tasks: Vec<Task> = durations.iter().map(|&d| task("t", 5, vec![page(0, d, vec![step("s", 0, d, 5)])])).collect();
            let log = log_of(tasks);
            let mut shuffled = log.clone();
            // deterministic rotation + reversal
            let k = (seed as usize) % shuffled.sessions.len();
            shuffled.sessions.rotate_left(k);
            if seed & 1 == 1 {
                shuffled.sessions.reverse();
            }
            prop_assert_eq!(task_table(&log, GroupBy::Task).unwrap(), task_table(&shuffled, GroupBy::Task).unwrap());
            prop_assert_eq!(step_table(&log).unwrap(), step_table(&shuffled).unwrap());
            for row in task_table(&log, GroupBy::Task).unwrap().rows {
                prop_assert!((row.mean_is_per_s * row.mean_s - row.is as f64).abs() < 1e-9 * row.is as f64);
            }
        }
    }
}
