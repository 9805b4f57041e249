//! Keystroke-level model (KLM) execution-time estimates.
//!
//! Operator names are namespaced (`C_click`, `S_saccade`, `E_mental`,
//! `PointClick`, `Glance`) so they never collide with the abstract action
//! symbols `T`, `C`, `S`, `E`. In formula text, `Q` and `T` are accepted as
//! short names for `Glance` and `PointClick`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::concept::{ActionKind, InteractionConcept};
use crate::symexpr::{self, Ast, Binding, ExprError, Expression};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KlmError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("unknown operator `{name}` at byte {offset}{hint}")]
    UnknownOperator { name: String, offset: usize, hint: &'static str },
    #[error("operators cannot be multiplied with each other")]
    Nonlinear,
    #[error("term `{0}` has no operator")]
    MissingOperator(String),
    #[error("action {kind} used in step \"{step}\" has no operator mapping")]
    UnmappedAction { kind: &'static str, step: String },
    #[error("invalid KLM model: {0}")]
    InvalidModel(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    /// Single keystroke.
    Keystroke,
    /// Point with the mouse to a target.
    Point,
    /// Click and release the mouse button.
    Click,
    /// Eye saccade.
    Saccade,
    /// Perceive.
    Perceive,
    /// Retrieve from long-term memory.
    Retrieve,
    /// Execute a mental step.
    Mental,
    /// Point then click.
    PointClick,
    /// Saccade, perceive, mental step.
    Glance,
}

impl Operator {
    pub const ALL: [Operator; 9] = [
        Operator::Keystroke,
        Operator::Point,
        Operator::Click,
        Operator::Saccade,
        Operator::Perceive,
        Operator::Retrieve,
        Operator::Mental,
        Operator::PointClick,
        Operator::Glance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Keystroke => "K",
            Operator::Point => "M",
            Operator::Click => "C_click",
            Operator::Saccade => "S_saccade",
            Operator::Perceive => "P",
            Operator::Retrieve => "R",
            Operator::Mental => "E_mental",
            Operator::PointClick => "PointClick",
            Operator::Glance => "Glance",
        }
    }

    /// Resolves a canonical name or one of the aliases `Q`, `T`, `T_klm`.
    pub fn parse(name: &str) -> Option<Operator> {
        match name {
            "Q" => Some(Operator::Glance),
            "T" | "T_klm" => Some(Operator::PointClick),
            _ => Self::ALL.into_iter().find(|op| op.name() == name),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = KlmError;

    fn from_str(s: &str) -> Result<Self, KlmError> {
        Operator::parse(s).ok_or_else(|| KlmError::UnknownOperator { name: s.to_string(), offset: 0, hint: "" })
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Operator::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown operator `{s}`")))
    }
}

/// Primitive operator unit times in seconds. Composite operators are derived
/// on every lookup, so they always follow the primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KlmModel {
    #[serde(rename = "K")]
    pub keystroke: f64,
    #[serde(rename = "M")]
    pub point: f64,
    #[serde(rename = "C_click")]
    pub click: f64,
    #[serde(rename = "S_saccade")]
    pub saccade: f64,
    #[serde(rename = "P")]
    pub perceive: f64,
    #[serde(rename = "R")]
    pub retrieve: f64,
    #[serde(rename = "E_mental")]
    pub mental: f64,
}

impl Default for KlmModel {
    fn default() -> Self {
        Self { keystroke: 0.23, point: 1.5, click: 0.23, saccade: 0.23, perceive: 0.1, retrieve: 1.2, mental: 0.07 }
    }
}

impl KlmModel {
    pub fn point_click(&self) -> f64 {
        self.point + self.click
    }

    pub fn glance(&self) -> f64 {
        self.saccade + self.perceive + self.mental
    }

    pub fn unit_time(&self, op: Operator) -> f64 {
        match op {
            Operator::Keystroke => self.keystroke,
            Operator::Point => self.point,
            Operator::Click => self.click,
            Operator::Saccade => self.saccade,
            Operator::Perceive => self.perceive,
            Operator::Retrieve => self.retrieve,
            Operator::Mental => self.mental,
            Operator::PointClick => self.point_click(),
            Operator::Glance => self.glance(),
        }
    }

    pub fn validate(&self) -> Result<(), KlmError> {
        for op in &Operator::ALL[..7] {
            let t = self.unit_time(*op);
            if !(t.is_finite() && t > 0.0) {
                return Err(KlmError::InvalidModel(format!("unit time of {op} must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Reads a JSON override file; absent fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self, KlmError> {
        let model: KlmModel = serde_json::from_str(text).map_err(|e| KlmError::InvalidModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}

/// Operator sequence performed for each abstract action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMapping {
    map: BTreeMap<ActionKind, Vec<Operator>>,
}

impl Default for ActionMapping {
    /// Think → Glance, Enter → PointClick, Click → PointClick. Scroll and
    /// External are left unmapped.
    fn default() -> Self {
        let mut map = BTreeMap::new();
        map.insert(ActionKind::Think, vec![Operator::Glance]);
        map.insert(ActionKind::Enter, vec![Operator::PointClick]);
        map.insert(ActionKind::Click, vec![Operator::PointClick]);
        Self { map }
    }
}

impl ActionMapping {
    pub fn empty() -> Self {
        Self { map: BTreeMap::new() }
    }

    pub fn set(&mut self, kind: ActionKind, ops: Vec<Operator>) {
        self.map.insert(kind, ops);
    }

    pub fn get(&self, kind: ActionKind) -> Option<&[Operator]> {
        self.map.get(&kind).map(Vec::as_slice)
    }

    /// Parses `{"Think": ["Glance"], ...}`. Keys may be long names or symbols.
    pub fn from_json(text: &str) -> Result<Self, KlmError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| KlmError::InvalidMapping(e.to_string()))?;
        let mut out = Self::empty();
        for (k, ops) in raw {
            let kind =
                ActionKind::parse(&k).ok_or_else(|| KlmError::InvalidMapping(format!("unknown action `{k}`")))?;
            let ops = ops
                .iter()
                .map(|o| Operator::parse(o).ok_or_else(|| KlmError::InvalidMapping(format!("unknown operator `{o}`"))))
                .collect::<Result<_, _>>()?;
            out.map.insert(kind, ops);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, Vec<&str>> =
            self.map.iter().map(|(k, ops)| (k.name(), ops.iter().map(|o| o.name()).collect())).collect();
        serde_json::to_string(&raw).expect("mapping serialization is infallible")
    }
}

/// Operator counts as polynomials over concept variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct KlmExpression {
    per_op: BTreeMap<Operator, Expression>,
}

impl KlmExpression {
    pub fn get(&self, op: Operator) -> Expression {
        self.per_op.get(&op).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Operator, &Expression)> {
        self.per_op.iter().map(|(op, e)| (*op, e))
    }

    pub fn is_empty(&self) -> bool {
        self.per_op.is_empty()
    }

    pub fn add(&mut self, op: Operator, e: &Expression) -> Result<(), ExprError> {
        let sum = self.get(op).checked_add(e)?;
        if sum.is_zero() {
            self.per_op.remove(&op);
        } else {
            self.per_op.insert(op, sum);
        }
        Ok(())
    }

    /// Formula text that [`klm_parse`] reads back, e.g. `(m + 2)*Glance + 9*PointClick`.
    pub fn formula(&self) -> String {
        if self.is_empty() {
            return "0".to_string();
        }
        self.per_op
            .iter()
            .map(|(op, e)| match e.as_constant() {
                Some(1) => op.name().to_string(),
                Some(c) if c >= 0 => format!("{c}*{op}"),
                _ => format!("({})*{op}", e.factored()),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for KlmExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (op, e)) in self.per_op.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{op}: {e}")?;
        }
        Ok(())
    }
}

/// Operator counts for a concept under an action mapping.
pub fn klm_from_concept(c: &InteractionConcept, mapping: &ActionMapping) -> Result<KlmExpression, KlmError> {
    let mut out = KlmExpression::default();
    for step in &c.steps {
        for (kind, count) in &step.actions {
            if count.is_zero() {
                continue;
            }
            let ops = mapping
                .get(*kind)
                .ok_or_else(|| KlmError::UnmappedAction { kind: kind.name(), step: step.label.clone() })?;
            let total = step.repeat.checked_mul(count)?;
            for op in ops {
                out.add(*op, &total)?;
            }
        }
    }
    Ok(out)
}

/// Operator-linear form: a constant polynomial plus per-operator coefficients.
#[derive(Default)]
struct Linear {
    constant: Expression,
    ops: BTreeMap<Operator, Expression>,
}

impl Linear {
    fn has_ops(&self) -> bool {
        self.ops.values().any(|e| !e.is_zero())
    }

    fn map(self, f: impl Fn(&Expression) -> Result<Expression, ExprError>) -> Result<Linear, ExprError> {
        Ok(Linear {
            constant: f(&self.constant)?,
            ops: self.ops.iter().map(|(op, e)| Ok((*op, f(e)?))).collect::<Result<_, ExprError>>()?,
        })
    }

    fn merge(mut self, other: Linear, negate: bool) -> Result<Linear, ExprError> {
        let combine = |a: &Expression, b: &Expression| if negate { a.checked_sub(b) } else { a.checked_add(b) };
        self.constant = combine(&self.constant, &other.constant)?;
        for (op, e) in other.ops {
            let cur = self.ops.remove(&op).unwrap_or_default();
            self.ops.insert(op, combine(&cur, &e)?);
        }
        Ok(self)
    }
}

fn linearize(ast: &Ast) -> Result<Linear, KlmError> {
    Ok(match ast {
        Ast::Int(v) => Linear { constant: Expression::constant(*v), ..Default::default() },
        Ast::Ident { name, offset } => {
            if let Some(op) = Operator::parse(name) {
                let mut lin = Linear::default();
                lin.ops.insert(op, Expression::constant(1));
                lin
            } else if symexpr::is_valid_name(name) {
                Linear { constant: Expression::var(name)?, ..Default::default() }
            } else {
                let hint = match name.as_str() {
                    "C" => " (did you mean C_click?)",
                    "S" => " (did you mean S_saccade?)",
                    "E" => " (did you mean E_mental?)",
                    _ => "",
                };
                return Err(KlmError::UnknownOperator { name: name.clone(), offset: *offset, hint });
            }
        }
        Ast::Neg(a) => linearize(a)?.map(Expression::checked_neg)?,
        Ast::Add(a, b) => linearize(a)?.merge(linearize(b)?, false)?,
        Ast::Sub(a, b) => linearize(a)?.merge(linearize(b)?, true)?,
        Ast::Mul(a, b) => {
            let (a, b) = (linearize(a)?, linearize(b)?);
            match (a.has_ops(), b.has_ops()) {
                (true, true) => return Err(KlmError::Nonlinear),
                (false, _) => {
                    let k = a.constant;
                    b.map(|e| e.checked_mul(&k))?
                }
                (true, false) => {
                    let k = b.constant;
                    a.map(|e| e.checked_mul(&k))?
                }
            }
        }
    })
}

/// Parses a KLM formula such as `(m + a*(r + t + d + s + 2))*Q + (4 + 8*a)*T`.
/// Every term must carry exactly one operator.
pub fn klm_parse(text: &str) -> Result<KlmExpression, KlmError> {
    let lin = linearize(&symexpr::parse_ast(text)?)?;
    if !lin.constant.is_zero() {
        return Err(KlmError::MissingOperator(lin.constant.to_string()));
    }
    let mut out = KlmExpression::default();
    for (op, e) in &lin.ops {
        out.add(*op, e)?;
    }
    Ok(out)
}

/// Execution time in seconds at a binding.
pub fn klm_time(k: &KlmExpression, model: &KlmModel, b: &Binding) -> Result<f64, KlmError> {
    let mut total = 0.0;
    for (op, count) in k.iter() {
        total += count.eval(b)? as f64 * model.unit_time(op);
    }
    Ok(total)
}

/// Interaction steps per second.
pub fn klm_speed(is_count: u64, seconds: f64) -> Result<f64, KlmError> {
    if seconds.is_nan() || seconds <= 0.0 {
        return Err(KlmError::NonPositiveTime(seconds));
    }
    Ok(is_count as f64 / seconds)
}
