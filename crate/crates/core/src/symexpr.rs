//! Exact multivariate polynomials over named, non-negative integer variables.
//!
//! Every count in the toolkit (user-step repetitions, action counts, KLM
//! operator counts) is an [`Expression`]: a sum of monomials with `i64`
//! coefficients, always held fully expanded and in canonical order. Arithmetic
//! is checked; overflow surfaces as [`ExprError::Overflow`] instead of wrapping.
//!
//! Text grammar accepted by [`parse_expr`]:
//!
//! ```text
//! expr   := term {("+" | "-") term}
//! term   := factor {"*" factor}
//! factor := "-" factor | INT | IDENT | "(" expr ")"
//! ```
//!
//! Canonical ordering sorts monomials by descending total degree, then by the
//! lexicographic order of their expanded variable lists, so `{m, 5, a*r}`
//! renders as `a*r + m + 5`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {ch:?} at byte {offset}")]
    UnknownChar { ch: char, offset: usize },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid variable name `{name}` at byte {offset} (expected [a-z][a-z0-9_]*)")]
    InvalidName { name: String, offset: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`{expr}` evaluates to {value}, a count cannot be negative")]
    Negative { expr: String, value: i128 },
    #[error("integer overflow")]
    Overflow,
}

pub type Result<T, E = ExprError> = std::result::Result<T, E>;

/// Returns true when `name` is a valid variable identifier (`[a-z][a-z0-9_]*`).
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A product of variables raised to positive exponents. The empty product is
/// the constant monomial `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    powers: BTreeMap<String, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(name: impl Into<String>) -> Self {
        let mut powers = BTreeMap::new();
        powers.insert(name.into(), 1);
        Self { powers }
    }

    pub fn degree(&self) -> u32 {
        self.powers.values().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn powers(&self) -> &BTreeMap<String, u32> {
        &self.powers
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.powers.keys().map(String::as_str)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.powers.contains_key(var)
    }

    fn expanded(&self) -> impl Iterator<Item = &str> {
        self.powers.iter().flat_map(|(v, &p)| std::iter::repeat_n(v.as_str(), p as usize))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut powers = self.powers.clone();
        for (v, p) in &other.powers {
            *powers.entry(v.clone()).or_insert(0) += p;
        }
        Monomial { powers }
    }

    /// Divides out one power of `var`. The caller guarantees `var` is present.
    fn div_var(&self, var: &str) -> Monomial {
        let mut powers = self.powers.clone();
        match powers.get_mut(var) {
            Some(p) if *p > 1 => *p -= 1,
            _ => {
                powers.remove(var);
            }
        }
        Monomial { powers }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        for (i, v) in self.expanded().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(v)?;
        }
        Ok(())
    }
}

/// Canonical expanded polynomial. The zero polynomial has no terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Expression {
    terms: BTreeMap<Monomial, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
}

impl Expression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut e = Self::zero();
        if c != 0 {
            e.terms.insert(Monomial::one(), c);
        }
        e
    }

    pub fn var(name: &str) -> Result<Self> {
        if !is_valid_name(name) {
            return Err(ExprError::InvalidName { name: name.to_string(), offset: 0 });
        }
        let mut e = Self::zero();
        e.terms.insert(Monomial::var(name), 1);
        Ok(e)
    }

    /// Builds an expression from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, i64)>) -> Result<Self> {
        let mut e = Self::zero();
        for (m, c) in terms {
            e.add_term(m, c)?;
        }
        Ok(e)
    }

    fn add_term(&mut self, m: Monomial, c: i64) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        let slot = self.terms.entry(m).or_insert(0);
        *slot = slot.checked_add(c).ok_or(ExprError::Overflow)?;
        if *slot == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> i64 {
        self.coefficient(&Monomial::one())
    }

    pub fn as_constant(&self) -> Option<i64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.terms.keys().flat_map(|m| m.variables()).collect()
    }

    /// Highest total degree over all monomials; 0 for constants and zero.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn checked_add(&self, other: &Expression) -> Result<Expression> {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c)?;
        }
        Ok(out)
    }

    pub fn checked_neg(&self) -> Result<Expression> {
        let mut out = Expression::zero();
        for (m, &c) in &self.terms {
            out.terms.insert(m.clone(), c.checked_neg().ok_or(ExprError::Overflow)?);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Expression) -> Result<Expression> {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c.checked_neg().ok_or(ExprError::Overflow)?)?;
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Expression) -> Result<Expression> {
        let mut out = Expression::zero();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let c = ca.checked_mul(cb).ok_or(ExprError::Overflow)?;
                out.add_term(ma.mul(mb), c)?;
            }
        }
        Ok(out)
    }

    pub fn checked_scale(&self, k: i64) -> Result<Expression> {
        self.checked_mul(&Expression::constant(k))
    }

    /// Evaluates without the non-negativity check.
    pub fn eval_signed(&self, binding: &Binding) -> Result<i64> {
        let mut acc: i128 = 0;
        for (m, &c) in &self.terms {
            let mut term = c as i128;
            for (v, &p) in &m.powers {
                let x = binding.get(v).ok_or_else(|| ExprError::Unbound(v.clone()))? as i128;
                for _ in 0..p {
                    term = term.checked_mul(x).ok_or(ExprError::Overflow)?;
                }
            }
            acc = acc.checked_add(term).ok_or(ExprError::Overflow)?;
        }
        i64::try_from(acc).map_err(|_| ExprError::Overflow)
    }

    /// Evaluates a count expression. Negative results mean the binding is
    /// inadmissible for this expression (e.g. `a = 0` in `a - 1`).
    pub fn eval(&self, binding: &Binding) -> Result<i64> {
        let value = self.eval_signed(binding)?;
        if value < 0 {
            return Err(ExprError::Negative { expr: self.to_string(), value: value as i128 });
        }
        Ok(value)
    }

    /// Rendering with greedy common-factor extraction, e.g.
    /// `a*(d + r + s + t + 11) + m + 5`. Cosmetic only; the expanded form is
    /// authoritative.
    pub fn factored(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        join_pieces(&factor_pieces(self))
    }
}

/// (negative, body) pairs, joined with `+`/`-` by [`join_pieces`].
fn factor_pieces(e: &Expression) -> Vec<(bool, String)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in e.terms.keys() {
        for v in m.variables() {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    // Most frequent variable; ties go to the alphabetically first one.
    let best = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .filter(|(_, &n)| n >= 2)
        .map(|(v, _)| v.to_string());

    let Some(var) = best else {
        return e.terms().map(|(m, c)| term_piece(m, c)).collect();
    };

    let mut quotient = Expression::zero();
    let mut rest = Expression::zero();
    for (m, &c) in &e.terms {
        if m.contains(&var) {
            quotient.terms.insert(m.div_var(&var), c);
        } else {
            rest.terms.insert(m.clone(), c);
        }
    }
    let mut pieces = vec![(false, format!("{var}*({})", join_pieces(&factor_pieces(&quotient))))];
    pieces.extend(factor_pieces(&rest));
    pieces
}

fn term_piece(m: &Monomial, c: i64) -> (bool, String) {
    let abs = c.unsigned_abs();
    let body = if m.is_constant() {
        abs.to_string()
    } else if abs == 1 {
        m.to_string()
    } else {
        format!("{abs}*{m}")
    };
    (c < 0, body)
}

fn join_pieces(pieces: &[(bool, String)]) -> String {
    let mut out = String::new();
    for (i, (neg, body)) in pieces.iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    out
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let pieces: Vec<_> = self.terms().map(|(m, c)| term_piece(m, c)).collect();
        f.write_str(&join_pieces(&pieces))
    }
}

impl FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_expr(&text).map_err(serde::de::Error::custom)
    }
}

pub fn combine(op: CombineOp, a: &Expression, b: &Expression) -> Result<Expression> {
    match op {
        CombineOp::Add => a.checked_add(b),
        CombineOp::Sub => a.checked_sub(b),
        CombineOp::Mul => a.checked_mul(b),
    }
}

/// Assignment of non-negative integers to variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Binding {
    values: BTreeMap<String, u64>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        let mut b = Self::new();
        for (k, v) in pairs {
            b.values.insert(k.to_string(), v);
        }
        b
    }

    pub fn set(&mut self, name: &str, value: u64) -> Result<()> {
        if !is_valid_name(name) {
            return Err(ExprError::InvalidName { name: name.to_string(), offset: 0 });
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.values.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Names from `vars` that this binding does not assign.
    pub fn missing<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        vars.into_iter().filter(|v| !self.contains(v)).collect()
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

/// Unexpanded parse tree. Identifiers are not restricted to variable names
/// here so other front-ends (KLM operator formulas) can reuse the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Int(i64),
    Ident { name: String, offset: usize },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i].parse::<i64>().map_err(|_| ExprError::Overflow)?;
                out.push((Tok::Int(value), start));
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ExprError::UnknownChar { ch, offset: i });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn syntax<T>(&self, message: &str) -> Result<T> {
        Err(ExprError::Syntax { offset: self.offset(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Ast::Neg(Box::new(self.factor()?)))
            }
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Ast::Int(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Ast::Ident { name, offset })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.syntax("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.syntax("expected a number, a name or `(`"),
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parses text into an unexpanded tree without validating identifier names.
pub fn parse_ast(text: &str) -> Result<Ast> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ExprError::Empty);
    }
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let ast = p.expr()?;
    if p.pos != p.toks.len() {
        return p.syntax("unexpected token");
    }
    Ok(ast)
}

/// Expands a tree into canonical form. Identifiers must be valid variable names.
pub fn expand(ast: &Ast) -> Result<Expression> {
    match ast {
        Ast::Int(v) => Ok(Expression::constant(*v)),
        Ast::Ident { name, offset } => {
            if !is_valid_name(name) {
                return Err(ExprError::InvalidName { name: name.clone(), offset: *offset });
            }
            Expression::var(name)
        }
        Ast::Neg(a) => expand(a)?.checked_neg(),
        Ast::Add(a, b) => expand(a)?.checked_add(&expand(b)?),
        Ast::Sub(a, b) => expand(a)?.checked_sub(&expand(b)?),
        Ast::Mul(a, b) => expand(a)?.checked_mul(&expand(b)?),
    }
}

/// Parses and expands an expression into canonical form.
pub fn parse_expr(text: &str) -> Result<Expression> {
    expand(&parse_ast(text)?)
}
