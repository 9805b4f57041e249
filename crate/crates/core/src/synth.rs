//! Brute-force action counting and seeded synthetic event logs.
//!
//! The counter executes each step `repeat` times and adds the evaluated
//! action counts. Leaf expressions are evaluated by walking the parse tree
//! directly, so no polynomial arithmetic is involved.
//!
//! Logs are generated with PCG-64 (`Lcg128Xsl64`, seeded through
//! `seed_from_u64`) and Box–Muller normal sampling: one draw of two 53-bit
//! uniforms `u1, u2` per speed, `z = sqrt(-2 ln u1) · cos(2π u2)`.

use std::collections::BTreeMap;
use std::fmt;

use rand_pcg::rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::Serialize;

use crate::concept::{ActionKind, InteractionConcept};
use crate::logs::{EventLog, PageVisit, Session, StepRecord, Task};
use crate::symexpr::{parse_ast, Ast, Binding, Expression};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("step `{step}`: {message}")]
    Inadmissible { step: String, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Concrete action counts at one binding.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ActionCounts {
    pub per_kind: BTreeMap<ActionKind, u64>,
    pub total: u64,
}

impl ActionCounts {
    pub fn get(&self, kind: ActionKind) -> u64 {
        self.per_kind.get(&kind).copied().unwrap_or(0)
    }
}

impl fmt::Display for ActionCounts {
    /// `T:35 E:6 C:4 total:45`; kinds with a zero count are left out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for kind in ActionKind::ALL {
            let n = self.get(kind);
            if n > 0 {
                write!(f, "{}:{n} ", kind.symbol())?;
            }
        }
        write!(f, "total:{}", self.total)
    }
}

fn interpret(ast: &Ast, b: &Binding) -> Result<i128, String> {
    let overflow = || "arithmetic overflow".to_string();
    Ok(match ast {
        Ast::Int(v) => *v as i128,
        Ast::Ident { name, .. } => b.get(name).ok_or_else(|| format!("unbound variable `{name}`"))? as i128,
        Ast::Neg(a) => interpret(a, b)?.checked_neg().ok_or_else(overflow)?,
        Ast::Add(x, y) => interpret(x, b)?.checked_add(interpret(y, b)?).ok_or_else(overflow)?,
        Ast::Sub(x, y) => interpret(x, b)?.checked_sub(interpret(y, b)?).ok_or_else(overflow)?,
        Ast::Mul(x, y) => interpret(x, b)?.checked_mul(interpret(y, b)?).ok_or_else(overflow)?,
    })
}

fn leaf(e: &Expression, b: &Binding, step: &str, what: &str) -> Result<u64, SynthError> {
    let err = |message: String| SynthError::Inadmissible { step: step.to_string(), message };
    let ast = parse_ast(&e.to_string()).map_err(|x| err(x.to_string()))?;
    let v = interpret(&ast, b).map_err(err)?;
    u64::try_from(v).map_err(|_| err(format!("{what} `{e}` evaluates to {v} under {b}")))
}

/// Counts actions by simulated execution.
pub fn count_actions(c: &InteractionConcept, b: &Binding) -> Result<ActionCounts, SynthError> {
    let mut counts = ActionCounts::default();
    for step in &c.steps {
        let repeat = leaf(&step.repeat, b, &step.label, "repeat")?;
        let mut once = Vec::new();
        for (kind, count) in &step.actions {
            once.push((*kind, leaf(count, b, &step.label, kind.name())?));
        }
        for _ in 0..repeat {
            for &(kind, n) in &once {
                *counts.per_kind.entry(kind).or_insert(0) += n;
                counts.total += n;
            }
        }
    }
    counts.per_kind.retain(|_, n| *n > 0);
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub concept: InteractionConcept,
    pub binding: Binding,
    pub sessions: usize,
    pub speed_mean: f64,
    pub speed_sd: f64,
    pub seed: u64,
}

pub const MIN_SPEED: f64 = 0.01;

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.sessions == 0 {
            return bad("sessions must be positive".into());
        }
        if !(self.speed_mean.is_finite() && self.speed_mean > 0.0) {
            return bad(format!("mean speed must be positive, got {}", self.speed_mean));
        }
        if !(self.speed_sd.is_finite() && self.speed_sd >= 0.0) {
            return bad(format!("speed deviation must be non-negative, got {}", self.speed_sd));
        }
        Ok(())
    }
}

fn unit(rng: &mut Pcg64) -> f64 {
    // (0, 1], so ln never sees zero
    ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
}

fn normal(rng: &mut Pcg64, mean: f64, sd: f64) -> f64 {
    let (u1, u2) = (unit(rng), unit(rng));
    mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One task per session, one page visit per step with a nonzero IS count.
/// With `speed_sd == 0` every task lasts `round(1000 · IS / speed_mean)` ms.
pub fn generate_log(cfg: &SynthConfig) -> Result<EventLog, SynthError> {
    cfg.validate()?;
    let mut plan = Vec::new();
    let mut total = 0u64;
    for step in &cfg.concept.steps {
        let one = count_actions(
            &InteractionConcept { steps: vec![step.clone()], ..InteractionConcept::new(&cfg.concept.name) },
            &cfg.binding,
        )?;
        if one.total > 0 {
            plan.push((step.label.clone(), one.total));
            total += one.total;
        }
    }
    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let width = cfg.sessions.to_string().len();
    let mut sessions = Vec::with_capacity(cfg.sessions);
    for i in 0..cfg.sessions {
        let mut visits = Vec::with_capacity(plan.len());
        let (mut elapsed, mut done_is, mut start_ms) = (0.0f64, 0u64, 0u64);
        for (label, is) in &plan {
            done_is += is;
            let end_s = if cfg.speed_sd == 0.0 {
                done_is as f64 / cfg.speed_mean
            } else {
                let speed = normal(&mut rng, cfg.speed_mean, cfg.speed_sd).max(MIN_SPEED);
                elapsed += *is as f64 / speed;
                elapsed
            };
            let end_ms = (end_s * 1000.0).round() as u64;
            visits.push(PageVisit {
                page: label.clone(),
                enter_ms: start_ms,
                exit_ms: end_ms,
                steps: vec![StepRecord { step_label: label.clone(), start_ms, end_ms, is_count: *is }],
            });
            start_ms = end_ms;
        }
        if visits.is_empty() {
            visits.push(PageVisit { page: "start".into(), enter_ms: 0, exit_ms: 0, steps: Vec::new() });
        }
        sessions.push(Session {
            session_id: format!("s{:0width$}", i + 1),
            tasks: vec![Task {
                task_id: cfg.concept.name.clone(),
                concept_name: cfg.concept.name.clone(),
                binding: cfg.binding.clone(),
                is_count: total,
                page_visits: visits,
            }],
        });
    }
    Ok(EventLog { sessions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigi::{instantiate, normalize, sum_steps};
    use crate::klm::{klm_from_concept, ActionMapping};
    use crate::logs::{load_log, task_table, GroupBy};
    use crate::movie_booking::{v1, v1_complexity_binding, v2, v2_complexity_binding};
    use crate::symexpr::parse_expr;
    use crate::util::fmt2;

    #[test]
    fn movie_booking_counts() {
        let c = count_actions(&v2(), &v2_complexity_binding()).unwrap();
        assert_eq!(c.to_string(), "T:35 E:6 C:4 total:45");
        let c = count_actions(&v1(), &v1_complexity_binding()).unwrap();
        assert_eq!(c.total, 174);
        let mut b = v1_complexity_binding();
        b.set("a", 1).unwrap();
        let c = count_actions(&v1(), &b).unwrap();
        assert_eq!((c.get(ActionKind::Think), c.get(ActionKind::Enter), c.get(ActionKind::Click)), (29, 6, 7));
        assert_eq!(c.total, 42);
    }

    #[test]
    fn empty_concept_counts_nothing() {
        let c = count_actions(&InteractionConcept::new("empty"), &Binding::new()).unwrap();
        assert_eq!(c, ActionCounts::default());
        assert_eq!(c.to_string(), "total:0");
    }

    #[test]
    fn inadmissible_bindings() {
        let mut b = v1_complexity_binding();
        b.set("a", 0).unwrap();
        let err = count_actions(&v1(), &b).unwrap_err();
        assert!(matches!(err, SynthError::Inadmissible { ref step, .. } if step.starts_with("7")), "{err}");
        let err = count_actions(&v1(), &Binding::from_pairs([("m", 1)])).unwrap_err();
        assert!(err.to_string().contains("unbound"), "{err}");
    }

    #[test]
    fn agrees_with_symbolic_and_klm_counts() {
        for (c, b) in [(v1(), v1_complexity_binding()), (v2(), v2_complexity_binding())] {
            let counts = count_actions(&c, &b).unwrap();
            let n = normalize(&sum_steps(&c).unwrap()).unwrap();
            assert_eq!(instantiate(&n, &b).unwrap(), counts.total);
            let mapping = ActionMapping::default();
            let klm = klm_from_concept(&c, &mapping).unwrap();
            let mut from_oracle = 0u64;
            for (kind, n) in &counts.per_kind {
                from_oracle += n * mapping.get(*kind).unwrap().len() as u64;
            }
            let from_klm: i64 = klm.iter().map(|(_, e)| e.eval(&b).unwrap()).sum();
            assert_eq!(from_klm as u64, from_oracle);
        }
    }

    fn config(sessions: usize, mean: f64, sd: f64, seed: u64) -> SynthConfig {
        SynthConfig { concept: v2(), binding: v2_complexity_binding(), sessions, speed_mean: mean, speed_sd: sd, seed }
    }

    #[test]
    fn constant_speed_logs() {
        let log = generate_log(&config(5, 0.66, 0.0, 1)).unwrap();
        for task in log.sessions.iter().flat_map(|s| &s.tasks) {
            assert_eq!(task.duration_ms(), (45_000.0f64 / 0.66).round() as u64);
            assert_eq!(task.page_visits.len(), 4);
        }
        let log = generate_log(&config(3, 1.0, 0.0, 1)).unwrap();
        let table = task_table(&log, GroupBy::Task).unwrap();
        assert_eq!(fmt2(table.rows[0].mean_is_per_s), "1.00");
    }

    #[test]
    fn seeded_logs_are_reproducible_and_valid() {
        let a = generate_log(&config(20, 1.05, 0.2, 7)).unwrap().to_json();
        let b = generate_log(&config(20, 1.05, 0.2, 7)).unwrap().to_json();
        let c = generate_log(&config(20, 1.05, 0.2, 8)).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let loaded = load_log(a.as_bytes()).unwrap();
        assert_eq!(loaded.to_json(), a);
    }

    #[test]
    fn config_validation() {
        assert!(generate_log(&config(0, 1.0, 0.0, 1)).is_err());
        assert!(generate_log(&config(1, 0.0, 0.0, 1)).is_err());
        assert!(generate_log(&config(1, 1.0, -0.1, 1)).is_err());
    }

    #[test]
    fn speed_floor_keeps_durations_finite() {
        let log = generate_log(&config(30, 0.05, 5.0, 3)).unwrap();
        let max_ms = (45.0 / MIN_SPEED * 1000.0) as u64 + 1;
        for task in log.sessions.iter().flat_map(|s| &s.tasks) {
            assert!(task.duration_ms() <= max_ms);
        }
        assert!(load_log(log.to_json().as_bytes()).is_ok());
    }

    #[test]
    fn degenerate_concept_still_logs_a_page() {
        let mut c = InteractionConcept::new("idle");
        c.steps.push(crate::concept::UserStep::new("wait").with_action(ActionKind::Think, parse_expr("0").unwrap()));
        let cfg =
            SynthConfig { concept: c, binding: Binding::new(), sessions: 2, speed_mean: 1.0, speed_sd: 0.0, seed: 0 };
        let log = generate_log(&cfg).unwrap();
        assert_eq!(log.sessions[0].tasks[0].is_count, 0);
        assert!(load_log(log.to_json().as_bytes()).is_ok());
    }
}
