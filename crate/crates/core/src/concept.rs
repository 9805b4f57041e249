//! Interaction concepts: declared variables plus an ordered list of user steps,
//! each with a repetition factor and per-action symbolic counts.
//!
//! The text form is line-oriented; `#` starts a comment that runs to the end
//! of the line (outside string literals):
//!
//! ```text
//! concept "<name>"
//! var <ident>            # <description>
//! step "<label>" [repeat <expr>] { <A>: <expr> [; <A>: <expr>]* } [# note]
//! ```
//!
//! `<A>` is one of `T`, `E`, `C`, `S`, `X`. On a `var` line the trailing
//! comment is the variable's description, on a `step` line it is the step note.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::symexpr::{self, Ast, ExprError, Expression};

/// Abstract user action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Think,
    Enter,
    Click,
    Scroll,
    External,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] =
        [ActionKind::Think, ActionKind::Enter, ActionKind::Click, ActionKind::Scroll, ActionKind::External];

    pub fn symbol(self) -> &'static str {
        match self {
            ActionKind::Think => "T",
            ActionKind::Enter => "E",
            ActionKind::Click => "C",
            ActionKind::Scroll => "S",
            ActionKind::External => "X",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Think => "Think",
            ActionKind::Enter => "Enter",
            ActionKind::Click => "Click",
            ActionKind::Scroll => "Scroll",
            ActionKind::External => "External",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.symbol() == s)
    }

    /// Accepts either the one-letter symbol or the long name.
    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.symbol() == s || k.name() == s)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for ActionKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for ActionKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ActionKind::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown action kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserStep {
    pub label: String,
    #[serde(default = "one")]
    pub repeat: Expression,
    #[serde(default)]
    pub actions: BTreeMap<ActionKind, Expression>,
    #[serde(default)]
    pub note: Option<String>,
}

fn one() -> Expression {
    Expression::constant(1)
}

impl UserStep {
    pub fn new(label: impl Into<String>) -> Self {
        Self { label: label.into(), repeat: one(), actions: BTreeMap::new(), note: None }
    }

    pub fn with_repeat(mut self, repeat: Expression) -> Self {
        self.repeat = repeat;
        self
    }

    pub fn with_action(mut self, kind: ActionKind, count: Expression) -> Self {
        self.actions.insert(kind, count);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// True when the step can never produce an action.
    pub fn is_degenerate(&self) -> bool {
        self.repeat.is_zero() || self.actions.values().all(Expression::is_zero)
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut vars = self.repeat.variables();
        for e in self.actions.values() {
            vars.extend(e.variables());
        }
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InteractionConcept {
    pub name: String,
    #[serde(default)]
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub steps: Vec<UserStep>,
}

impl InteractionConcept {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), variables: Vec::new(), steps: Vec::new() }
    }

    pub fn declares(&self, var: &str) -> bool {
        self.variables.iter().any(|v| v.name == var)
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn step(&self, label: &str) -> Option<&UserStep> {
        self.steps.iter().find(|s| s.label == label)
    }

    /// Canonical JSON, two-space indented.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("concept serialization is infallible")
    }

    /// Parses the JSON form and rejects concepts with error diagnostics.
    pub fn from_json(text: &str) -> Result<Self, ConceptError> {
        let c: InteractionConcept = serde_json::from_str(text).map_err(|e| ConceptError::Json(e.to_string()))?;
        let errors: Vec<_> = validate(&c).into_iter().filter(|d| d.severity == Severity::Error).collect();
        if errors.is_empty() {
            Ok(c)
        } else {
            Err(ConceptError::Invalid(errors))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConceptError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: duplicate step label \"{label}\"")]
    DuplicateStep { line: usize, label: String },
    #[error("line {line}: duplicate variable `{name}`")]
    DuplicateVariable { line: usize, name: String },
    #[error("line {line}, column {column}: undeclared variable `{name}` in step \"{step}\"")]
    UndeclaredVariable { line: usize, column: usize, name: String, step: String },
    #[error("invalid concept JSON: {0}")]
    Json(String),
    #[error("invalid concept: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub step: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn error(step: Option<&str>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, step: step.map(str::to_string), message: message.into() }
    }

    fn warning(step: Option<&str>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, step: step.map(str::to_string), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.step {
            Some(step) => write!(f, "{sev}: step \"{step}\": {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

fn has_control(s: &str) -> bool {
    s.chars().any(char::is_control)
}

/// Checks every concept invariant. Zero-action steps are reported as warnings.
pub fn validate(c: &InteractionConcept) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if has_control(&c.name) {
        out.push(Diagnostic::error(None, "concept name contains control characters"));
    }
    let mut seen_vars = BTreeSet::new();
    for v in &c.variables {
        if !symexpr::is_valid_name(&v.name) {
            out.push(Diagnostic::error(None, format!("invalid variable name `{}`", v.name)));
        }
        if !seen_vars.insert(v.name.as_str()) {
            out.push(Diagnostic::error(None, format!("duplicate variable `{}`", v.name)));
        }
        if has_control(&v.description) {
            out.push(Diagnostic::error(None, format!("description of `{}` contains control characters", v.name)));
        }
    }
    let mut seen_labels = BTreeSet::new();
    for s in &c.steps {
        let label = Some(s.label.as_str());
        if s.label.is_empty() {
            out.push(Diagnostic::error(label, "empty step label"));
        }
        if has_control(&s.label) {
            out.push(Diagnostic::error(label, "label contains control characters"));
        }
        if !seen_labels.insert(s.label.as_str()) {
            out.push(Diagnostic::error(label, "duplicate step label"));
        }
        if s.note.as_deref().is_some_and(has_control) {
            out.push(Diagnostic::error(label, "note contains control characters"));
        }
        for var in s.variables() {
            if !seen_vars.contains(var) {
                out.push(Diagnostic::error(label, format!("undeclared variable `{var}`")));
            }
        }
        if s.is_degenerate() {
            out.push(Diagnostic::warning(label, "step contributes no interaction"));
        }
    }
    out
}

/// Splits a line into code and trailing comment, honouring string literals.
fn split_comment(line: &str) -> (&str, Option<&str>) {
    let mut in_string = false;
    let mut escaped = false;
    for (i, ch) in line.char_indices() {
        if in_string {
            match (escaped, ch) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
        } else if ch == '"' {
            in_string = true;
        } else if ch == '#' {
            return (&line[..i], Some(line[i + 1..].trim()));
        }
    }
    (line, None)
}

struct LineCursor<'a> {
    line: &'a str,
    line_no: usize,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn column(&self, pos: usize) -> usize {
        self.line[..pos].chars().count() + 1
    }

    fn err<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ConceptError> {
        Err(ConceptError::Syntax { line: self.line_no, column: self.column(pos), message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.line.len()
    }

    fn expect_end(&mut self) -> Result<(), ConceptError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(self.pos, format!("unexpected `{}`", self.rest().trim_end()))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn string(&mut self) -> Result<String, ConceptError> {
        self.skip_ws();
        let start = self.pos;
        if !self.eat('"') {
            return self.err(start, "expected a quoted string");
        }
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, ch)) = chars.next() {
            match ch {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, c @ ('"' | '\\'))) => out.push(c),
                    _ => return self.err(self.pos + i, "invalid escape in string"),
                },
                c => out.push(c),
            }
        }
        self.err(start, "unterminated string")
    }

    /// Takes text up to (not including) the first char in `stops`.
    fn take_until(&mut self, stops: &[char]) -> (usize, &'a str) {
        let start = self.pos;
        let rest = self.rest();
        let len = rest.find(|c| stops.contains(&c)).unwrap_or(rest.len());
        self.pos += len;
        (start, &rest[..len])
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

struct ConceptParser {
    concept: Option<InteractionConcept>,
    declared: BTreeSet<String>,
    labels: BTreeSet<String>,
}

impl ConceptParser {
    fn expr(&self, cur: &LineCursor<'_>, start: usize, text: &str, step: &str) -> Result<Expression, ConceptError> {
        let to_col = |off: usize| cur.column(start + off);
        let ast = symexpr::parse_ast(text).map_err(|e| {
            let (col, message) = match &e {
                ExprError::Empty => (to_col(0), "expected an expression".to_string()),
                ExprError::UnknownChar { ch, offset } => (to_col(*offset), format!("unexpected character {ch:?}")),
                ExprError::Syntax { offset, message } => (to_col(*offset), message.clone()),
                _ => (to_col(0), e.to_string()),
            };
            ConceptError::Syntax { line: cur.line_no, column: col, message }
        })?;
        self.check_idents(&ast, cur, start, step)?;
        symexpr::expand(&ast).map_err(|e| ConceptError::Syntax {
            line: cur.line_no,
            column: to_col(0),
            message: e.to_string(),
        })
    }

    fn check_idents(&self, ast: &Ast, cur: &LineCursor<'_>, start: usize, step: &str) -> Result<(), ConceptError> {
        match ast {
            Ast::Int(_) => Ok(()),
            Ast::Ident { name, offset } => {
                if self.declared.contains(name) {
                    Ok(())
                } else {
                    Err(ConceptError::UndeclaredVariable {
                        line: cur.line_no,
                        column: cur.column(start + offset),
                        name: name.clone(),
                        step: step.to_string(),
                    })
                }
            }
            Ast::Neg(a) => self.check_idents(a, cur, start, step),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => {
                self.check_idents(a, cur, start, step)?;
                self.check_idents(b, cur, start, step)
            }
        }
    }

    fn line(&mut self, cur: &mut LineCursor<'_>, comment: Option<&str>) -> Result<(), ConceptError> {
        let kw_pos = {
            cur.skip_ws();
            cur.pos
        };
        let keyword = cur.word();
        match (keyword, self.concept.is_some()) {
            ("concept", false) => {
                let name = cur.string()?;
                cur.expect_end()?;
                self.concept = Some(InteractionConcept::new(name));
                Ok(())
            }
            ("concept", true) => cur.err(kw_pos, "only one `concept` header is allowed"),
            (_, false) => cur.err(kw_pos, "expected `concept \"<name>\"` header"),
            ("var", true) => {
                let name_pos = {
                    cur.skip_ws();
                    cur.pos
                };
                let name = cur.word();
                if !symexpr::is_valid_name(name) {
                    return cur.err(name_pos, "expected a variable name matching [a-z][a-z0-9_]*");
                }
                cur.expect_end()?;
                if !self.declared.insert(name.to_string()) {
                    return Err(ConceptError::DuplicateVariable { line: cur.line_no, name: name.to_string() });
                }
                let concept = self.concept.as_mut().expect("header seen");
                concept
                    .variables
                    .push(Variable { name: name.to_string(), description: comment.unwrap_or_default().to_string() });
                Ok(())
            }
            ("step", true) => {
                let label = cur.string()?;
                if label.is_empty() {
                    return cur.err(kw_pos, "step label must not be empty");
                }
                let mut step = UserStep::new(label.clone());
                let save = cur.pos;
                if cur.word() == "repeat" {
                    let (start, text) = cur.take_until(&['{']);
                    step.repeat = self.expr(cur, start, text, &label)?;
                } else {
                    cur.pos = save;
                }
                if !cur.eat('{') {
                    return cur.err(cur.pos, "expected `{`");
                }
                loop {
                    if cur.eat('}') {
                        break;
                    }
                    let kind_pos = {
                        cur.skip_ws();
                        cur.pos
                    };
                    let sym = cur.word();
                    let Some(kind) = ActionKind::from_symbol(sym) else {
                        return cur.err(kind_pos, "expected an action kind (T, E, C, S or X)");
                    };
                    if step.actions.contains_key(&kind) {
                        return cur.err(kind_pos, format!("action `{sym}` given twice"));
                    }
                    if !cur.eat(':') {
                        return cur.err(cur.pos, "expected `:`");
                    }
                    let (start, text) = cur.take_until(&[';', '}']);
                    let count = self.expr(cur, start, text, &label)?;
                    step.actions.insert(kind, count);
                    if cur.eat(';') {
                        continue;
                    }
                    if cur.eat('}') {
                        break;
                    }
                    return cur.err(cur.pos, "expected `;` or `}`");
                }
                cur.expect_end()?;
                if !self.labels.insert(label.clone()) {
                    return Err(ConceptError::DuplicateStep { line: cur.line_no, label });
                }
                step.note = comment.filter(|c| !c.is_empty()).map(str::to_string);
                self.concept.as_mut().expect("header seen").steps.push(step);
                Ok(())
            }
            ("", true) => cur.err(kw_pos, "expected `var` or `step`"),
            (other, true) => cur.err(kw_pos, format!("unknown directive `{other}`")),
        }
    }
}

/// Parses the concept DSL. Every failure carries a line and column.
pub fn parse_concept(text: &str) -> Result<InteractionConcept, ConceptError> {
    let mut parser = ConceptParser { concept: None, declared: BTreeSet::new(), labels: BTreeSet::new() };
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        last_line = idx + 1;
        let (code, comment) = split_comment(raw);
        if code.trim().is_empty() {
            continue;
        }
        let mut cur = LineCursor { line: code, line_no: idx + 1, pos: 0 };
        parser.line(&mut cur, comment)?;
    }
    parser.concept.ok_or(ConceptError::Syntax {
        line: last_line,
        column: 1,
        message: "missing `concept \"<name>\"` header".to_string(),
    })
}

/// Canonical DSL text. `repeat 1` is elided.
pub fn serialize_concept(c: &InteractionConcept) -> String {
    let mut out = format!("concept {}\n", quote(&c.name));
    if !c.variables.is_empty() {
        out.push('\n');
        for v in &c.variables {
            if v.description.is_empty() {
                out.push_str(&format!("var {}\n", v.name));
            } else {
                out.push_str(&format!("var {}  # {}\n", v.name, v.description));
            }
        }
    }
    if !c.steps.is_empty() {
        out.push('\n');
        for s in &c.steps {
            out.push_str("step ");
            out.push_str(&quote(&s.label));
            if s.repeat != Expression::constant(1) {
                out.push_str(&format!(" repeat {}", s.repeat));
            }
            let body: Vec<String> = s.actions.iter().map(|(k, e)| format!("{k}: {e}")).collect();
            if body.is_empty() {
                out.push_str(" { }");
            } else {
                out.push_str(&format!(" {{ {} }}", body.join("; ")));
            }
            if let Some(note) = &s.note {
                out.push_str(&format!("  # {note}"));
            }
            out.push('\n');
        }
    }
    out
}
