//! Sentences of two-variable logic with counting quantifiers: AST, parser,
//! renderer and size measure.
//!
//! Concrete grammar (one sentence per input):
//!
//! ```text
//! iff     := imp ( "<->" imp )*
//! imp     := or ( "->" imp )?
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | quant unary | atom | "(" iff ")"
//! quant   := "Ax" | "Ay" | "Ex" | "Ey" | "E>=" N var | "E<=" N var | "E=" N var
//! atom    := "true" | "false" | ident "(" var ")" | ident "(" var "," var ")" | var "=" var
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// One of the two logical variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Forall,
    Exists,
    AtLeast,
    AtMost,
    Exactly,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Unary(String, Var),
    Binary(String, Var, Var),
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `count` is `None` exactly for `Forall` and `Exists`.
    Quant {
        kind: QuantKind,
        count: Option<BigUint>,
        var: Var,
        body: Box<Formula>,
    },
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn unary(name: &str, v: Var) -> Formula {
        Formula::Unary(name.to_string(), v)
    }

    pub fn binary(name: &str, a: Var, b: Var) -> Formula {
        Formula::Binary(name.to_string(), a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Quant { kind: QuantKind::Forall, count: None, var: v, body: Box::new(body) }
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Quant { kind: QuantKind::Exists, count: None, var: v, body: Box::new(body) }
    }

    pub fn counting(kind: QuantKind, c: u64, v: Var, body: Formula) -> Formula {
        assert!(
            !matches!(kind, QuantKind::Forall | QuantKind::Exists),
            "counting quantifier expected"
        );
        Formula::Quant { kind, count: Some(BigUint::from(c)), var: v, body: Box::new(body) }
    }

    /// Conjunction of a list; `True` when empty.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; `False` when empty.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Quant { .. } => false,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            _ => true,
        }
    }

    pub fn mentions_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::Not(a) => a.mentions_equality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.mentions_equality() || b.mentions_equality()
            }
            Formula::Quant { body, .. } => body.mentions_equality(),
            _ => false,
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut [false, false], &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_free(&self, bound: &mut [bool; 2], out: &mut Vec<Var>) {
        let see = |v: Var, out: &mut Vec<Var>| {
            if !bound[v as usize] {
                out.push(v);
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Unary(_, v) => see(*v, out),
            Formula::Binary(_, a, b) | Formula::Eq(a, b) => {
                see(*a, out);
                see(*b, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Quant { var, body, .. } => {
                let saved = bound[*var as usize];
                bound[*var as usize] = true;
                body.collect_free(bound, out);
                bound[*var as usize] = saved;
            }
        }
    }

    /// Exchange the roles of `x` and `y` throughout (free and bound).
    pub fn swap_vars(&self) -> Formula {
        let s = |v: &Var| v.other();
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Unary(p, v) => Formula::Unary(p.clone(), s(v)),
            Formula::Binary(p, a, b) => Formula::Binary(p.clone(), s(a), s(b)),
            Formula::Eq(a, b) => Formula::Eq(s(a), s(b)),
            Formula::Not(a) => Formula::not(a.swap_vars()),
            Formula::And(a, b) => Formula::and(a.swap_vars(), b.swap_vars()),
            Formula::Or(a, b) => Formula::or(a.swap_vars(), b.swap_vars()),
            Formula::Implies(a, b) => Formula::implies(a.swap_vars(), b.swap_vars()),
            Formula::Iff(a, b) => Formula::iff(a.swap_vars(), b.swap_vars()),
            Formula::Quant { kind, count, var, body } => Formula::Quant {
                kind: *kind,
                count: count.clone(),
                var: var.other(),
                body: Box::new(body.swap_vars()),
            },
        }
    }

    /// Replace free occurrences of `from` by `to` in a quantifier-free formula.
    pub fn substitute_qf(&self, from: Var, to: Var) -> Formula {
        let s = |v: &Var| if *v == from { to } else { *v };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Unary(p, v) => Formula::Unary(p.clone(), s(v)),
            Formula::Binary(p, a, b) => Formula::Binary(p.clone(), s(a), s(b)),
            Formula::Eq(a, b) => Formula::Eq(s(a), s(b)),
            Formula::Not(a) => Formula::not(a.substitute_qf(from, to)),
            Formula::And(a, b) => Formula::and(a.substitute_qf(from, to), b.substitute_qf(from, to)),
            Formula::Or(a, b) => Formula::or(a.substitute_qf(from, to), b.substitute_qf(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute_qf(from, to), b.substitute_qf(from, to))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute_qf(from, to), b.substitute_qf(from, to)),
            Formula::Quant { .. } => panic!("substitute_qf on quantified formula"),
        }
    }
}

/// Number of binary digits of `c`, i.e. ceil(log2(c + 1)).
pub fn subscript_size(c: &BigUint) -> u64 {
    c.bits()
}

/// Size in symbols, with counting subscripts measured in binary.
pub fn formula_size(phi: &Formula) -> u64 {
    match phi {
        Formula::True
        | Formula::False
        | Formula::Unary(..)
        | Formula::Binary(..)
        | Formula::Eq(..) => 1,
        Formula::Not(a) => 1 + formula_size(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            1 + formula_size(a) + formula_size(b)
        }
        Formula::Quant { count, body, .. } => {
            1 + count.as_ref().map_or(0, subscript_size) + formula_size(body)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub name: String,
    pub arity: u8,
}

/// A relational signature of unary and binary predicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
}

impl Signature {
    pub fn new(unary: Vec<String>, binary: Vec<String>) -> Signature {
        Signature { unary, binary }
    }

    /// Number of predicate symbols.
    pub fn len(&self) -> usize {
        self.unary.len() + self.binary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unary_index(&self, name: &str) -> Option<usize> {
        self.unary.iter().position(|p| p == name)
    }

    pub fn binary_index(&self, name: &str) -> Option<usize> {
        self.binary.iter().position(|p| p == name)
    }

    pub fn predicates(&self) -> Vec<Predicate> {
        let u = self.unary.iter().map(|n| Predicate { name: n.clone(), arity: 1 });
        let b = self.binary.iter().map(|n| Predicate { name: n.clone(), arity: 2 });
        u.chain(b).collect()
    }

    /// True if every predicate of `other` is in `self` with the same arity.
    pub fn contains(&self, other: &Signature) -> bool {
        other.unary.iter().all(|p| self.unary.contains(p))
            && other.binary.iter().all(|p| self.binary.contains(p))
    }

    /// Union preserving the order of `self`, then new symbols of `other`.
    pub fn union(&self, other: &Signature) -> Signature {
        let mut out = self.clone();
        for p in &other.unary {
            if !out.unary.contains(p) {
                out.unary.push(p.clone());
            }
        }
        for p in &other.binary {
            if !out.binary.contains(p) {
                out.binary.push(p.clone());
            }
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable `{name}` at byte {pos}: only x and y are allowed")]
    ThirdVariable { pos: usize, name: String },
    #[error("predicate `{name}` used with arities 1 and 2")]
    ArityMismatch { name: String },
    #[error("variable {var} occurs free in the sentence")]
    FreeVariable { var: &'static str },
    #[error("counting subscript at byte {pos} must be positive")]
    ZeroSubscript { pos: usize },
}

/// Predicates occurring in `phi`, in sorted order; equality is not a predicate.
pub fn signature_of(phi: &Formula) -> Result<Signature, SyntaxError> {
    let mut seen: BTreeMap<String, u8> = BTreeMap::new();
    collect_preds(phi, &mut seen)?;
    let mut sig = Signature::default();
    for (name, arity) in seen {
        if arity == 1 {
            sig.unary.push(name);
        } else {
            sig.binary.push(name);
        }
    }
    Ok(sig)
}

fn collect_preds(phi: &Formula, seen: &mut BTreeMap<String, u8>) -> Result<(), SyntaxError> {
    let mut note = |name: &str, arity: u8| match seen.get(name) {
        Some(&a) if a != arity => Err(SyntaxError::ArityMismatch { name: name.to_string() }),
        Some(_) => Ok(()),
        None => {
            seen.insert(name.to_string(), arity);
            Ok(())
        }
    };
    match phi {
        Formula::Unary(p, _) => note(p, 1),
        Formula::Binary(p, _, _) => note(p, 2),
        Formula::Not(a) => collect_preds(a, seen),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_preds(a, seen)?;
            collect_preds(b, seen)
        }
        Formula::Quant { body, .. } => collect_preds(body, seen),
        Formula::True | Formula::False | Formula::Eq(..) => Ok(()),
    }
}

/// Parse a sentence (no free variables).
pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    let phi = parse_formula(text)?;
    if let Some(v) = phi.free_vars().first() {
        return Err(SyntaxError::FreeVariable { var: v.name() });
    }
    Ok(phi)
}

/// Parse a formula that may have free variables.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let phi = p.iff()?;
    if p.pos < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    signature_of(&phi)?;
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigUint),
    LParen,
    RParen,
    Comma,
    Not,
    And,
    Or,
    Arrow,
    DArrow,
    Eq,
    Ge,
    Le,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(text[start..i].parse().expect("digits"))
        } else {
            let rest = &text[i..];
            let (tok, len) = if rest.starts_with("<->") {
                (Tok::DArrow, 3)
            } else if rest.starts_with("->") {
                (Tok::Arrow, 2)
            } else if rest.starts_with(">=") {
                (Tok::Ge, 2)
            } else if rest.starts_with("<=") {
                (Tok::Le, 2)
            } else {
                let t = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b',' => Tok::Comma,
                    b'~' => Tok::Not,
                    b'&' => Tok::And,
                    b'|' => Tok::Or,
                    b'=' => Tok::Eq,
                    _ => {
                        let ch = rest.chars().next().unwrap_or('?');
                        return Err(SyntaxError::Syntax {
                            pos: start,
                            msg: format!("unexpected character `{ch}`"),
                        });
                    }
                };
                (t, 1)
            };
            i += len;
            tok
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error(&self, msg: &str) -> SyntaxError {
        SyntaxError::Syntax { pos: self.offset(), msg: msg.to_string() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.imp()?;
        while self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn var(&mut self) -> Result<Var, SyntaxError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                var_of(&name, at)
            }
            _ => Err(self.error("expected a variable")),
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let next = self.peek_at(1).cloned();
                let b = name.as_bytes();
                let quant_shaped =
                    b.len() == 2 && (b[0] == b'A' || b[0] == b'E') && b[1].is_ascii_lowercase();
                if next == Some(Tok::LParen) && !quant_shaped {
                    return self.atom(name);
                }
                if name == "true" {
                    self.pos += 1;
                    return Ok(Formula::True);
                }
                if name == "false" {
                    self.pos += 1;
                    return Ok(Formula::False);
                }
                if name == "E" && matches!(next, Some(Tok::Ge | Tok::Le | Tok::Eq)) {
                    self.pos += 1;
                    let kind = match self.peek() {
                        Some(Tok::Ge) => QuantKind::AtLeast,
                        Some(Tok::Le) => QuantKind::AtMost,
                        _ => QuantKind::Exactly,
                    };
                    self.pos += 1;
                    let num_at = self.offset();
                    let c = match self.peek().cloned() {
                        Some(Tok::Num(c)) => c,
                        _ => return Err(self.error("expected a counting subscript")),
                    };
                    self.pos += 1;
                    if c.is_zero() {
                        return Err(SyntaxError::ZeroSubscript { pos: num_at });
                    }
                    let var = self.var()?;
                    let body = self.unary()?;
                    return Ok(Formula::Quant { kind, count: Some(c), var, body: Box::new(body) });
                }
                if quant_shaped {
                    self.pos += 1;
                    let var = var_of(&name[1..], at + 1)?;
                    let kind = if b[0] == b'A' { QuantKind::Forall } else { QuantKind::Exists };
                    let body = self.unary()?;
                    return Ok(Formula::Quant { kind, count: None, var, body: Box::new(body) });
                }
                if (name == "A" || name == "E") && matches!(next, Some(Tok::Ident(_))) {
                    self.pos += 1;
                    let var = self.var()?;
                    let kind = if name == "A" { QuantKind::Forall } else { QuantKind::Exists };
                    let body = self.unary()?;
                    return Ok(Formula::Quant { kind, count: None, var, body: Box::new(body) });
                }
                // equality atom `v = w`
                if next == Some(Tok::Eq) {
                    let a = self.var()?;
                    self.pos += 1;
                    let b = self.var()?;
                    return Ok(Formula::Eq(a, b));
                }
                Err(self.error(&format!("unexpected identifier `{name}`")))
            }
            _ => Err(self.error("expected a formula")),
        }
    }

    fn atom(&mut self, name: String) -> Result<Formula, SyntaxError> {
        self.pos += 2;
        let a = self.var()?;
        if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            let b = self.var()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(Formula::Binary(name, a, b))
        } else {
            self.expect(Tok::RParen, "`)` or `,`")?;
            Ok(Formula::Unary(name, a))
        }
    }
}

fn var_of(name: &str, pos: usize) -> Result<Var, SyntaxError> {
    match name {
        "x" => Ok(Var::X),
        "y" => Ok(Var::Y),
        _ if name.len() == 1 && name.as_bytes()[0].is_ascii_lowercase() => {
            Err(SyntaxError::ThirdVariable { pos, name: name.to_string() })
        }
        _ => Err(SyntaxError::Syntax { pos, msg: format!("expected a variable, found `{name}`") }),
    }
}

impl fmt::Display for Formula {
    /// Fully parenthesized binary connectives; parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Unary(p, v) => write!(f, "{p}({})", v.name()),
            Formula::Binary(p, a, b) => write!(f, "{p}({},{})", a.name(), b.name()),
            Formula::Eq(a, b) => write!(f, "{}={}", a.name(), b.name()),
            Formula::Not(a) => write!(f, "~{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::Quant { kind, count, var, body } => {
                let v = var.name();
                match (kind, count) {
                    (QuantKind::Forall, _) => write!(f, "A{v} {body}"),
                    (QuantKind::Exists, _) => write!(f, "E{v} {body}"),
                    (QuantKind::AtLeast, Some(c)) => write!(f, "E>={c} {v} {body}"),
                    (QuantKind::AtMost, Some(c)) => write!(f, "E<={c} {v} {body}"),
                    (QuantKind::Exactly, Some(c)) => write!(f, "E={c} {v} {body}"),
                    _ => write!(f, "<malformed quantifier>"),
                }
            }
        }
    }
}

/// Render a formula in the concrete grammar.
pub fn render(phi: &Formula) -> String {
    phi.to_string()
}

/// Subscript as `u64`, or `None` if it does not fit.
pub fn subscript_u64(c: &BigUint) -> Option<u64> {
    c.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_functional_successor() {
        let phi = parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap();
        let expected = Formula::forall(
            Var::X,
            Formula::counting(
                QuantKind::Exactly,
                1,
                Var::Y,
                Formula::and(Formula::binary("f", Var::X, Var::Y), Formula::not(Formula::Eq(Var::X, Var::Y))),
            ),
        );
        assert_eq!(phi, expected);
    }

    #[test]
    fn rejects_third_variable() {
        assert!(matches!(parse("Ax Ay Az p(z)"), Err(SyntaxError::ThirdVariable { .. })));
    }

    #[test]
    fn rejects_zero_subscript() {
        assert!(matches!(parse("Ax E=0 y f(x,y)"), Err(SyntaxError::ZeroSubscript { .. })));
    }

    #[test]
    fn rejects_arity_mismatch_and_free_vars() {
        assert!(matches!(parse("Ax (p(x) & p(x,x))"), Err(SyntaxError::ArityMismatch { .. })));
        assert!(matches!(parse("Ax f(x,y)"), Err(SyntaxError::FreeVariable { var: "y" })));
        assert!(matches!(parse("Ax (p(x) &"), Err(SyntaxError::Syntax { .. })));
    }

    #[test]
    fn sizes() {
        assert_eq!(formula_size(&parse_formula("p(x)").unwrap()), 1);
        let one = parse("Ax E=1 y f(x,y)").unwrap();
        // forall + (quant + 1 subscript bit) + atom
        assert_eq!(formula_size(&one), 4);
        assert_eq!(subscript_size(&BigUint::from(1024u32)), 11);
        assert_eq!(subscript_size(&BigUint::from(1u32)), 1);
    }

    #[test]
    fn signatures() {
        let psi = parse("Ax E=1 y (f(x,y) & ~(x=y))").unwrap();
        assert_eq!(signature_of(&psi).unwrap(), Signature::new(vec![], vec!["f".into()]));
        let body = parse_formula("p(x) & f(x,y)").unwrap();
        assert_eq!(
            signature_of(&body).unwrap(),
            Signature::new(vec!["p".into()], vec!["f".into()])
        );
        let eq = parse("Ax x=x").unwrap();
        assert!(signature_of(&eq).unwrap().is_empty());
    }

    #[test]
    fn precedence() {
        let a = parse_formula("p(x) & q(x) | r(x) -> s(x) -> t(x)").unwrap();
        let b = parse_formula("((p(x) & q(x)) | r(x)) -> (s(x) -> t(x))").unwrap();
        assert_eq!(a, b);
        let q = parse("Ax p(x) & Ey q(y)").unwrap();
        assert!(matches!(q, Formula::And(..)));
        let spaced = parse("A x E >= 2 y f(x,y)").unwrap();
        assert_eq!(spaced, parse("Ax E>=2 y f(x,y)").unwrap());
    }

    fn arb_var() -> impl Strategy<Value = Var> {
        prop_oneof![Just(Var::X), Just(Var::Y)]
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            (prop_oneof![Just("p"), Just("q")], arb_var()).prop_map(|(p, v)| Formula::unary(p, v)),
            (prop_oneof![Just("f"), Just("g")], arb_var(), arb_var())
                .prop_map(|(p, a, b)| Formula::binary(p, a, b)),
            (arb_var(), arb_var()).prop_map(|(a, b)| Formula::Eq(a, b)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
                (arb_var(), inner.clone()).prop_map(|(v, b)| Formula::forall(v, b)),
                (arb_var(), inner.clone()).prop_map(|(v, b)| Formula::exists(v, b)),
                (1u64..2000, arb_var(), inner.clone())
                    .prop_map(|(c, v, b)| Formula::counting(QuantKind::AtMost, c, v, b)),
                (1u64..5, arb_var(), inner)
                    .prop_map(|(c, v, b)| Formula::counting(QuantKind::Exactly, c, v, b)),
            ]
        })
    }

    fn is_sub(sub: &Formula, sup: &Formula) -> bool {
        if sub == sup {
            return true;
        }
        match sup {
            Formula::Not(a) => is_sub(sub, a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                is_sub(sub, a) || is_sub(sub, b)
            }
            Formula::Quant { body, .. } => is_sub(sub, body),
            _ => false,
        }
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(phi in arb_formula()) {
            let text = render(&phi);
            prop_assert_eq!(parse_formula(&text).unwrap(), phi);
        }

        #[test]
        fn size_monotone_under_embedding(phi in arb_formula(), psi in arb_formula()) {
            let big = Formula::and(phi.clone(), Formula::not(psi));
            prop_assert!(is_sub(&phi, &big));
            prop_assert!(formula_size(&phi) < formula_size(&big));
        }
    }
}
