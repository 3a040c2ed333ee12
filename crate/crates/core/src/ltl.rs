//! Linear temporal logic: syntax, a text parser, and exact evaluation on
//! ultimately periodic (lasso) words.
//!
//! Surface grammar, tightest binding first:
//!
//! ```text
//! unary   ! X F G        (prefix)
//! until   U              (right associative)
//! and     &              (left associative)
//! or      |              (left associative)
//! implies ->             (right associative)
//! atoms   [a-z][a-z0-9_]*   constants   true false
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown operator `{op}` at byte {position}")]
    UnknownOperator { position: usize, op: String },
    #[error("invalid atomic proposition name `{0}`")]
    InvalidName(String),
    #[error("a lasso word needs a nonempty cycle")]
    EmptyCycle,
}

/// An atomic proposition, compared by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicProposition(String);

impl AtomicProposition {
    pub fn new(name: impl Into<String>) -> Result<Self, LtlError> {
        let name = name.into();
        if !is_identifier(&name) || name == "true" || name == "false" {
            return Err(LtlError::InvalidName(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AtomicProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

/// Builds a proposition list from names. Panics on an invalid name, so it is
/// meant for literals in code.
pub fn props(names: &[&str]) -> Vec<AtomicProposition> {
    names.iter().map(|n| AtomicProposition::new(*n).expect("valid proposition name")).collect()
}

/// One letter of a word: the set of propositions that hold.
pub type ApSet = BTreeSet<AtomicProposition>;

pub fn ap_set(names: &[&str]) -> ApSet {
    props(names).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(AtomicProposition),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Eventually(Box<Ltl>),
    Globally(Box<Ltl>),
}

impl std::ops::Not for Ltl {
    type Output = Ltl;

    fn not(self) -> Ltl {
        Ltl::Not(Box::new(self))
    }
}

impl Ltl {
    pub fn parse(text: &str) -> Result<Ltl, LtlError> {
        parse_ltl(text)
    }

    pub fn atom(name: &str) -> Ltl {
        Ltl::Atom(AtomicProposition::new(name).expect("valid proposition name"))
    }

    pub fn and(self, rhs: Ltl) -> Ltl {
        Ltl::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Ltl) -> Ltl {
        Ltl::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Ltl) -> Ltl {
        Ltl::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Ltl {
        Ltl::Next(Box::new(self))
    }

    pub fn until(self, rhs: Ltl) -> Ltl {
        Ltl::Until(Box::new(self), Box::new(rhs))
    }

    pub fn eventually(self) -> Ltl {
        Ltl::Eventually(Box::new(self))
    }

    pub fn globally(self) -> Ltl {
        Ltl::Globally(Box::new(self))
    }

    /// All propositions mentioned in the formula.
    pub fn atoms(&self) -> BTreeSet<AtomicProposition> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<AtomicProposition>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(p) => {
                out.insert(p.clone());
            }
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Eventually(f) | Ltl::Globally(f) => f.collect_atoms(out),
            Ltl::And(l, r) | Ltl::Or(l, r) | Ltl::Implies(l, r) | Ltl::Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// True when the formula uses no temporal operator.
    pub fn is_propositional(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => true,
            Ltl::Not(f) => f.is_propositional(),
            Ltl::And(l, r) | Ltl::Or(l, r) | Ltl::Implies(l, r) => l.is_propositional() && r.is_propositional(),
            Ltl::Next(_) | Ltl::Until(..) | Ltl::Eventually(_) | Ltl::Globally(_) => false,
        }
    }

    /// Evaluates a propositional formula on a single letter.
    ///
    /// Temporal operators are rejected with `None`.
    pub fn eval_letter(&self, letter: &dyn Fn(&AtomicProposition) -> bool) -> Option<bool> {
        Some(match self {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::Atom(p) => letter(p),
            Ltl::Not(f) => !f.eval_letter(letter)?,
            Ltl::And(l, r) => l.eval_letter(letter)? && r.eval_letter(letter)?,
            Ltl::Or(l, r) => l.eval_letter(letter)? || r.eval_letter(letter)?,
            Ltl::Implies(l, r) => !l.eval_letter(letter)? || r.eval_letter(letter)?,
            _ => return None,
        })
    }

    /// Rewrites into the core grammar `true | atom | & | ! | X | U`.
    pub fn expand_derived(&self) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::True.not(),
            Ltl::Atom(p) => Ltl::Atom(p.clone()),
            Ltl::Not(f) => f.expand_derived().not(),
            Ltl::And(l, r) => l.expand_derived().and(r.expand_derived()),
            Ltl::Or(l, r) => l.expand_derived().not().and(r.expand_derived().not()).not(),
            Ltl::Implies(l, r) => l.expand_derived().and(r.expand_derived().not()).not(),
            Ltl::Next(f) => f.expand_derived().next(),
            Ltl::Until(l, r) => l.expand_derived().until(r.expand_derived()),
            Ltl::Eventually(f) => Ltl::True.until(f.expand_derived()),
            Ltl::Globally(f) => Ltl::True.until(f.expand_derived().not()).not(),
        }
    }
}

/// Prints a normal form that parses back to the same tree: binary operators
/// are always parenthesized, unary operators are prefixes.
impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => f.write_str("true"),
            Ltl::False => f.write_str("false"),
            Ltl::Atom(p) => write!(f, "{p}"),
            Ltl::Not(x) => write!(f, "!{x}"),
            Ltl::Next(x) => write!(f, "X {x}"),
            Ltl::Eventually(x) => write!(f, "F {x}"),
            Ltl::Globally(x) => write!(f, "G {x}"),
            Ltl::And(l, r) => write!(f, "({l} & {r})"),
            Ltl::Or(l, r) => write!(f, "({l} | {r})"),
            Ltl::Implies(l, r) => write!(f, "({l} -> {r})"),
            Ltl::Until(l, r) => write!(f, "({l} U {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Eventually,
    Globally,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, LtlError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Token::Implies
                } else {
                    return Err(LtlError::Syntax { position: start, message: "expected `->`".into() });
                }
            }
            b'X' => Token::Next,
            b'U' => Token::Until,
            b'F' => Token::Eventually,
            b'G' => Token::Globally,
            b'a'..=b'z' => {
                while i + 1 < bytes.len() && matches!(bytes[i + 1], b'a'..=b'z' | b'0'..=b'9' | b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "true" => Token::True,
                    "false" => Token::False,
                    name => Token::Ident(name.to_string()),
                }
            }
            b'A'..=b'Z' | b'<' | b'=' | b'~' | b'^' | b'/' | b'\\' | b'*' | b'+' => {
                let op = text[start..].chars().next().unwrap_or('?').to_string();
                return Err(LtlError::UnknownOperator { position: start, op });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(LtlError::Syntax { position: start, message: format!("unexpected character `{ch}`") });
            }
        };
        tokens.push((start, token));
        i += 1;
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: &str) -> LtlError {
        LtlError::Syntax { position: self.offset(), message: message.to_string() }
    }

    fn implies(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            Ok(lhs.implies(self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.until()?;
        while self.eat(&Token::And) {
            lhs = lhs.and(self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.unary()?;
        if self.eat(&Token::Until) {
            Ok(lhs.until(self.until()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Ltl, LtlError> {
        let wrap: fn(Ltl) -> Ltl = match self.peek() {
            Some(Token::Not) => Ltl::not,
            Some(Token::Next) => Ltl::next,
            Some(Token::Eventually) => Ltl::eventually,
            Some(Token::Globally) => Ltl::globally,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<Ltl, LtlError> {
        let Some(token) = self.peek().cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        match token {
            Token::True => {
                self.pos += 1;
                Ok(Ltl::True)
            }
            Token::False => {
                self.pos += 1;
                Ok(Ltl::False)
            }
            Token::Ident(name) => {
                self.pos += 1;
                Ok(Ltl::Atom(AtomicProposition(name)))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.implies()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

pub fn parse_ltl(text: &str) -> Result<Ltl, LtlError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, end: text.len() };
    let formula = parser.implies()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(formula)
}

/// Parses the contents of a formula file: one formula, `#` starts a line
/// comment.
pub fn parse_ltl_file(text: &str) -> Result<Ltl, LtlError> {
    let body: Vec<&str> = text.lines().map(|line| line.split_once('#').map_or(line, |(code, _)| code)).collect();
    parse_ltl(&body.join("\n"))
}

/// The infinite word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    prefix: Vec<ApSet>,
    cycle: Vec<ApSet>,
}

impl LassoWord {
    pub fn new(prefix: Vec<ApSet>, cycle: Vec<ApSet>) -> Result<Self, LtlError> {
        if cycle.is_empty() {
            return Err(LtlError::EmptyCycle);
        }
        Ok(Self { prefix, cycle })
    }

    /// Convenience constructor from proposition names; panics on bad input.
    pub fn from_names(prefix: &[&[&str]], cycle: &[&[&str]]) -> Self {
        let conv = |xs: &[&[&str]]| xs.iter().map(|l| ap_set(l)).collect();
        Self::new(conv(prefix), conv(cycle)).expect("nonempty cycle")
    }

    pub fn prefix(&self) -> &[ApSet] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[ApSet] {
        &self.cycle
    }

    /// Number of distinct suffix classes, `|prefix| + |cycle|`.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, position: usize) -> &ApSet {
        if position < self.prefix.len() {
            &self.prefix[position]
        } else {
            &self.cycle[(position - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The suffix class reached after one step from `position`.
    pub fn successor(&self, position: usize) -> usize {
        if position + 1 < self.len() {
            position + 1
        } else {
            self.prefix.len()
        }
    }

    /// The same infinite word with `k` extra copies of the cycle moved into
    /// the prefix.
    pub fn unrolled(&self, k: usize) -> LassoWord {
        let mut prefix = self.prefix.clone();
        for _ in 0..k {
            prefix.extend(self.cycle.iter().cloned());
        }
        LassoWord { prefix, cycle: self.cycle.clone() }
    }
}

/// Every lasso word over `2^aps` with `|prefix| <= max_prefix` and
/// `1 <= |cycle| <= max_cycle`.
pub fn all_lasso_words(aps: &[AtomicProposition], max_prefix: usize, max_cycle: usize) -> Vec<LassoWord> {
    let letters: Vec<ApSet> = (0u32..1 << aps.len())
        .map(|mask| aps.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect())
        .collect();
    let sequences = |min: usize, max: usize| {
        let mut out: Vec<Vec<ApSet>> = Vec::new();
        let mut layer: Vec<Vec<ApSet>> = vec![Vec::new()];
        for len in 0..=max {
            if len >= min {
                out.extend(layer.iter().cloned());
            }
            layer = layer
                .iter()
                .flat_map(|seq| {
                    letters.iter().map(move |l| {
                        let mut s = seq.clone();
                        s.push(l.clone());
                        s
                    })
                })
                .collect();
        }
        out
    };
    let prefixes = sequences(0, max_prefix);
    let cycles = sequences(1, max_cycle);
    let mut words = Vec::with_capacity(prefixes.len() * cycles.len());
    for p in &prefixes {
        for c in &cycles {
            words.push(LassoWord { prefix: p.clone(), cycle: c.clone() });
        }
    }
    words
}

/// Decides whether `prefix · cycle^ω` satisfies `phi`.
///
/// Each subformula is evaluated once per suffix class; `U` is a least
/// fixpoint and `G` a greatest fixpoint over the successor map.
pub fn eval_lasso(phi: &Ltl, w: &LassoWord) -> bool {
    eval_positions(phi, w)[0]
}

fn eval_positions(phi: &Ltl, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match phi {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(p) => (0..n).map(|i| w.letter(i).contains(p)).collect(),
        Ltl::Not(f) => eval_positions(f, w).into_iter().map(|b| !b).collect(),
        Ltl::And(l, r) => zip_with(eval_positions(l, w), eval_positions(r, w), |a, b| a && b),
        Ltl::Or(l, r) => zip_with(eval_positions(l, w), eval_positions(r, w), |a, b| a || b),
        Ltl::Implies(l, r) => zip_with(eval_positions(l, w), eval_positions(r, w), |a, b| !a || b),
        Ltl::Next(f) => {
            let v = eval_positions(f, w);
            (0..n).map(|i| v[w.successor(i)]).collect()
        }
        Ltl::Until(l, r) => until_fixpoint(&eval_positions(l, w), eval_positions(r, w), w),
        Ltl::Eventually(f) => until_fixpoint(&vec![true; n], eval_positions(f, w), w),
        Ltl::Globally(f) => {
            let mut g = eval_positions(f, w);
            loop {
                let mut changed = false;
                for i in (0..n).rev() {
                    if g[i] && !g[w.successor(i)] {
                        g[i] = false;
                        changed = true;
                    }
                }
                if !changed {
                    return g;
                }
            }
        }
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn until_fixpoint(hold: &[bool], goal: Vec<bool>, w: &LassoWord) -> Vec<bool> {
    let mut u = goal;
    loop {
        let mut changed = false;
        for i in (0..u.len()).rev() {
            if !u[i] && hold[i] && u[w.successor(i)] {
                u[i] = true;
                changed = true;
            }
        }
        if !changed {
            return u;
        }
    }
}

/// `GF a & GF b & G !c`, the running example specification.
pub fn formula_gfa_gfb_gnc() -> Ltl {
    Ltl::atom("a")
        .eventually()
        .globally()
        .and(Ltl::atom("b").eventually().globally())
        .and(Ltl::atom("c").not().globally())
}
