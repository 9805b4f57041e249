//! Big-I interaction-complexity pipeline: per-step functions, summation by
//! action kind, normalization to interaction steps (IS), simplification to
//! the fastest-growing part with its coefficients, and instantiation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::concept::{validate, ActionKind, Diagnostic, InteractionConcept, Severity, UserStep};
use crate::symexpr::{parse_expr, Binding, ExprError, Expression};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BigiError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("step \"{step}\": {source}")]
    InadmissibleStep { step: String, source: ExprError },
    #[error("invalid concept: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConcept(Vec<Diagnostic>),
}

/// Expressions keyed by action kind. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct ActionVector {
    per_kind: BTreeMap<ActionKind, Expression>,
}

impl ActionVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(kind, expression text)` pairs.
    pub fn parse<'a>(pairs: impl IntoIterator<Item = (ActionKind, &'a str)>) -> Result<Self, ExprError> {
        let mut v = Self::new();
        for (kind, text) in pairs {
            v.add(kind, &parse_expr(text)?)?;
        }
        Ok(v)
    }

    pub fn get(&self, kind: ActionKind) -> Expression {
        self.per_kind.get(&kind).cloned().unwrap_or_default()
    }

    pub fn add(&mut self, kind: ActionKind, e: &Expression) -> Result<(), ExprError> {
        let sum = self.get(kind).checked_add(e)?;
        if sum.is_zero() {
            self.per_kind.remove(&kind);
        } else {
            self.per_kind.insert(kind, sum);
        }
        Ok(())
    }

    pub fn add_vector(&mut self, other: &ActionVector) -> Result<(), ExprError> {
        for (kind, e) in &other.per_kind {
            self.add(*kind, e)?;
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActionKind, &Expression)> {
        self.per_kind.iter().map(|(k, e)| (*k, e))
    }

    pub fn is_zero(&self) -> bool {
        self.per_kind.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.per_kind.values().flat_map(Expression::variables).collect()
    }
}

impl fmt::Display for ActionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, e)) in self.per_kind.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{k}: {e}")?;
        }
        Ok(())
    }
}

/// The summed function with every action replaced by one interaction step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedComplexity {
    pub is_function: Expression,
}

impl NormalizedComplexity {
    pub fn new(is_function: Expression) -> Self {
        Self { is_function }
    }
}

/// Growth class named after the total degree of the IS function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ComplexityClass {
    Constant,
    Linear,
    Quadratic,
    Cubic,
    Degree(u32),
}

impl ComplexityClass {
    pub fn from_degree(d: u32) -> Self {
        match d {
            0 => Self::Constant,
            1 => Self::Linear,
            2 => Self::Quadratic,
            3 => Self::Cubic,
            k => Self::Degree(k),
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            Self::Constant => 0,
            Self::Linear => 1,
            Self::Quadratic => 2,
            Self::Cubic => 3,
            Self::Degree(k) => k,
        }
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => f.write_str("constant"),
            Self::Linear => f.write_str("linear"),
            Self::Quadratic => f.write_str("quadratic"),
            Self::Cubic => f.write_str("cubic"),
            Self::Degree(k) => write!(f, "degree-{k}"),
        }
    }
}

impl Serialize for ComplexityClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimplifiedComplexity {
    pub retained: Expression,
    pub class_label: ComplexityClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepFunction {
    pub label: String,
    pub actions: ActionVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instantiation {
    pub binding: Binding,
    pub is_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub concept: String,
    pub per_step: Vec<StepFunction>,
    pub summed: ActionVector,
    pub normalized: NormalizedComplexity,
    pub simplified: SimplifiedComplexity,
    pub instantiated: Option<Instantiation>,
}

/// `repeat * count` for every action of the step, expanded.
pub fn step_function(step: &UserStep) -> Result<ActionVector, ExprError> {
    let mut v = ActionVector::new();
    for (kind, count) in &step.actions {
        v.add(*kind, &step.repeat.checked_mul(count)?)?;
    }
    Ok(v)
}

pub fn sum_steps(c: &InteractionConcept) -> Result<ActionVector, ExprError> {
    let mut total = ActionVector::new();
    for step in &c.steps {
        total.add_vector(&step_function(step)?)?;
    }
    Ok(total)
}

pub fn normalize(v: &ActionVector) -> Result<NormalizedComplexity, ExprError> {
    let mut is_function = Expression::zero();
    for (_, e) in v.iter() {
        is_function = is_function.checked_add(e)?;
    }
    Ok(NormalizedComplexity::new(is_function))
}

/// Keeps the highest-degree monomials plus every lower monomial whose
/// variables all occur together in one of them; drops constants and terms in
/// unrelated variables. A constant function is kept as is.
///
/// For `m + 5 + a*r + a*t + 11*a` this keeps `a*r + a*t + 11*a` (the `11*a`
/// shares `a` with the quadratic terms) and drops `m + 5`.
pub fn simplify(n: &NormalizedComplexity) -> SimplifiedComplexity {
    let e = &n.is_function;
    let degree = e.total_degree();
    let class_label = ComplexityClass::from_degree(degree);
    if degree == 0 {
        return SimplifiedComplexity { retained: e.clone(), class_label };
    }
    let leading: Vec<BTreeSet<&str>> =
        e.terms().filter(|(m, _)| m.degree() == degree).map(|(m, _)| m.variables().collect()).collect();
    let retained = e
        .terms()
        .filter(|(m, _)| {
            let vars: BTreeSet<&str> = m.variables().collect();
            !vars.is_empty() && leading.iter().any(|l| vars.is_subset(l))
        })
        .map(|(m, c)| (m.clone(), c));
    let retained = Expression::from_terms(retained).expect("subset of a canonical expression");
    SimplifiedComplexity { retained, class_label }
}

/// Number of interaction steps at a binding.
pub fn instantiate(n: &NormalizedComplexity, b: &Binding) -> Result<u64, ExprError> {
    Ok(n.is_function.eval(b)? as u64)
}

/// Checks that the step's repeat factor and every action count are
/// non-negative under `b`.
pub fn check_admissible(step: &UserStep, b: &Binding) -> Result<(), BigiError> {
    let wrap = |source| BigiError::InadmissibleStep { step: step.label.clone(), source };
    step.repeat.eval(b).map_err(wrap)?;
    for count in step.actions.values() {
        count.eval(b).map_err(wrap)?;
    }
    Ok(())
}

/// Runs the whole pipeline. With a binding, every step is checked for
/// admissibility before the IS count is computed.
pub fn analyze(c: &InteractionConcept, b: Option<&Binding>) -> Result<ComplexityReport, BigiError> {
    let errors: Vec<_> = validate(c).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if !errors.is_empty() {
        return Err(BigiError::InvalidConcept(errors));
    }
    let per_step = c
        .steps
        .iter()
        .map(|s| Ok(StepFunction { label: s.label.clone(), actions: step_function(s)? }))
        .collect::<Result<Vec<_>, ExprError>>()?;
    let mut summed = ActionVector::new();
    for s in &per_step {
        summed.add_vector(&s.actions)?;
    }
    let normalized = normalize(&summed)?;
    let simplified = simplify(&normalized);
    let instantiated = match b {
        Some(b) => {
            for step in &c.steps {
                check_admissible(step, b)?;
            }
            let is_count = instantiate(&normalized, b)?;
            Some(Instantiation { binding: b.clone(), is_count })
        }
        None => None,
    };
    Ok(ComplexityReport { concept: c.name.clone(), per_step, summed, normalized, simplified, instantiated })
}

impl ComplexityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// Human-readable report. The last line is `IS = <n>` when instantiated.
    pub fn render_text(&self) -> String {
        let mut out = format!("concept: {}\n", self.concept);
        out.push_str("per-step functions:\n");
        let width = self.per_step.iter().map(|s| s.label.chars().count()).max().unwrap_or(0);
        for s in &self.per_step {
            out.push_str(&format!("  {:<width$}  {}\n", s.label, s.actions));
        }
        out.push_str(&format!("summed:      {}\n", self.summed));
        out.push_str(&format!("normalized:  {} IS\n", self.normalized.is_function.factored()));
        out.push_str(&format!(
            "complexity:  I({})  {} interaction complexity\n",
            self.simplified.retained.factored(),
            self.simplified.class_label
        ));
        if let Some(inst) = &self.instantiated {
            out.push_str(&format!("binding:     {}\n", inst.binding));
            out.push_str(&format!("IS = {}\n", inst.is_count));
        }
        out
    }
}
