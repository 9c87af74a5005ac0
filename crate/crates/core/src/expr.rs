//! A small expression language for the user functions `f(x1, …, y)` and
//! `R(x1, …)`.
//!
//! ```text
//! expr   := term (('+'|'-') term)* ;
//! term   := unary (('*'|'/') unary)* ;
//! unary  := '-' unary | power ;
//! power  := atom ('^' integer)? ;
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')' ;
//! ident  := 'y' | 'x' digits | builtin-name ;
//! ```
//!
//! Exponents are integers (optionally signed or parenthesized, `|k| ≤ 64`);
//! a chain `a^2^3` folds right to left into a single integer exponent.
//! Evaluation goes through [`Jet2`], so every parsed expression comes with
//! exact first and second derivatives.

use std::fmt;

use thiserror::Error;

use crate::jet::{Jet2, JetError};

pub const MAX_EXPONENT: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sqrt,
    Exp,
    Sin,
    Cos,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Sqrt, Builtin::Exp, Builtin::Sin, Builtin::Cos];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sqrt => "sqrt",
            Builtin::Exp => "exp",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Builtin::Sqrt => v.sqrt(),
            Builtin::Exp => v.exp(),
            Builtin::Sin => v.sin(),
            Builtin::Cos => v.cos(),
        }
    }

    fn apply_jet(self, u: &Jet2) -> Result<Jet2, JetError> {
        match self {
            Builtin::Sqrt => u.sqrt(),
            Builtin::Exp => Ok(u.exp()),
            Builtin::Sin => Ok(u.sin()),
            Builtin::Cos => Ok(u.cos()),
        }
    }
}

/// A variable reference. `Y` is always the last coordinate of the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Y,
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSpace {
    x_count: usize,
    has_y: bool,
}

impl VarSpace {
    /// `x1 … x(n-1), y`: the coordinates of an `n`-dimensional operator.
    pub fn with_y(n: usize) -> Self {
        Self {
            x_count: n.saturating_sub(1),
            has_y: true,
        }
    }

    /// `x1 … xm`: the base coordinates on which a remainder `R` lives.
    pub fn x_only(m: usize) -> Self {
        Self {
            x_count: m,
            has_y: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_count + usize::from(self.has_y)
    }

    fn describe(&self) -> String {
        let mut names: Vec<String> = (1..=self.x_count).map(|i| format!("x{i}")).collect();
        if self.has_y {
            names.push("y".into());
        }
        names.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Builtin, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("variable {name} out of range (valid variables: {valid})")]
    VariableOutOfRange { name: String, valid: String },
    #[error("non-integer exponent (use sqrt for roots)")]
    NonIntegerExponent,
    #[error("exponent {0} exceeds the limit of {MAX_EXPONENT}")]
    ExponentTooLarge(i64),
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
}

impl ParseError {
    fn new(kind: ParseErrorKind, position: usize) -> Self {
        Self { kind, position }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => format!("{s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal = &text[start..i];
            if literal.parse::<f64>().is_err() {
                return Err(ParseError::new(ParseErrorKind::BadNumber(literal.into()), start));
            }
            out.push((Tok::Num(literal.into()), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].into()), start));
        } else {
            let ch = text[start..].chars().next().unwrap_or('\0');
            return Err(ParseError::new(ParseErrorKind::UnexpectedChar(ch), start));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    vars: VarSpace,
    /// Offsets of currently open '(' tokens.
    open: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Tok::RParen if self.open.is_empty() => {
                ParseError::new(ParseErrorKind::UnbalancedParens, self.offset())
            }
            Tok::End if !self.open.is_empty() => ParseError::new(
                ParseErrorKind::UnbalancedParens,
                *self.open.last().expect("non-empty"),
            ),
            tok => ParseError::new(
                ParseErrorKind::Unexpected {
                    expected,
                    found: tok.describe(),
                },
                self.offset(),
            ),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    /// Parses the integer after '^', folding `a^b^c` to the right.
    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.offset();
        let value = self.signed_integer()?;
        let value = if *self.peek() == Tok::Caret {
            self.bump();
            let rest = self.exponent()?;
            if rest < 0 {
                return Err(ParseError::new(ParseErrorKind::NonIntegerExponent, start));
            }
            let folded = (value as f64).powi(rest);
            if folded.abs() > MAX_EXPONENT as f64 {
                return Err(ParseError::new(ParseErrorKind::ExponentTooLarge(folded as i64), start));
            }
            folded as i64
        } else {
            value
        };
        if value.abs() > MAX_EXPONENT as i64 {
            return Err(ParseError::new(ParseErrorKind::ExponentTooLarge(value), start));
        }
        Ok(value as i32)
    }

    fn signed_integer(&mut self) -> Result<i64, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(-self.signed_integer()?)
            }
            Tok::Num(literal) => {
                self.bump();
                if !literal.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(ParseError::new(ParseErrorKind::NonIntegerExponent, start));
                }
                literal
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(ParseErrorKind::ExponentTooLarge(i64::MAX), start))
            }
            Tok::LParen => {
                self.open.push(start);
                self.bump();
                let v = self.signed_integer()?;
                match self.peek() {
                    Tok::RParen => {
                        self.open.pop();
                        self.bump();
                        Ok(v)
                    }
                    Tok::End => Err(ParseError::new(ParseErrorKind::UnbalancedParens, start)),
                    _ => Err(ParseError::new(ParseErrorKind::NonIntegerExponent, start)),
                }
            }
            Tok::End | Tok::RParen => Err(self.unexpected("integer exponent")),
            _ => Err(ParseError::new(ParseErrorKind::NonIntegerExponent, start)),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(literal) => {
                self.bump();
                let v = literal
                    .parse::<f64>()
                    .map_err(|_| ParseError::new(ParseErrorKind::BadNumber(literal.clone()), start))?;
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(builtin) = Builtin::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected("'(' after function name"));
                    }
                    let arg = self.parenthesized()?;
                    return Ok(Expr::Call(builtin, Box::new(arg)));
                }
                self.variable(&name, start).map(Expr::Var)
            }
            Tok::LParen => self.parenthesized(),
            _ => Err(self.unexpected("a number, variable, or '('")),
        }
    }

    fn parenthesized(&mut self) -> Result<Expr, ParseError> {
        let (_, open_at) = self.bump();
        self.open.push(open_at);
        let inner = self.expr()?;
        match self.peek() {
            Tok::RParen => {
                self.open.pop();
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(ParseError::new(ParseErrorKind::UnbalancedParens, open_at)),
            _ => Err(self.unexpected("')'")),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<Var, ParseError> {
        let out_of_range = || {
            ParseError::new(
                ParseErrorKind::VariableOutOfRange {
                    name: name.into(),
                    valid: self.vars.describe(),
                },
                at,
            )
        };
        if name == "y" {
            return if self.vars.has_y { Ok(Var::Y) } else { Err(out_of_range()) };
        }
        // in two dimensions the plain name `x` stands for `x1`
        if name == "x" && self.vars.x_count == 1 {
            return Ok(Var::X(1));
        }
        let digits = name.strip_prefix('x').filter(|d| {
            !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())
        });
        match digits {
            Some(d) => match d.parse::<usize>() {
                Ok(i) if (1..=self.vars.x_count).contains(&i) => Ok(Var::X(i)),
                _ => Err(out_of_range()),
            },
            None => Err(ParseError::new(ParseErrorKind::UnknownIdentifier(name.into()), at)),
        }
    }
}

/// Parses an expression in the coordinates `x1 … x(n-1), y`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    parse_in(text, VarSpace::with_y(n))
}

pub fn parse_in(text: &str, vars: VarSpace) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        vars,
        open: Vec::new(),
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(e)
}

impl Expr {
    fn var_index(v: Var, dim: usize) -> usize {
        match v {
            Var::X(i) => i,
            Var::Y => dim,
        }
    }

    /// Jet of the expression at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<Jet2, JetError> {
        let n = point.len();
        Ok(match self {
            Expr::Const(c) => Jet2::constant(*c, n),
            Expr::Var(v) => Jet2::coord(Self::var_index(*v, n), point)?,
            Expr::Add(a, b) => a.eval(point)?.try_add(&b.eval(point)?)?,
            Expr::Sub(a, b) => a.eval(point)?.try_sub(&b.eval(point)?)?,
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)?.try_mul(&b.eval(point)?)?,
            Expr::Div(a, b) => a.eval(point)?.try_div(&b.eval(point)?)?,
            Expr::Pow(a, k) => a.eval(point)?.powi(*k)?,
            Expr::Call(f, a) => f.apply_jet(&a.eval(point)?)?,
        })
    }

    /// Plain floating-point evaluation, same operation order as [`Expr::eval`].
    pub fn eval_value(&self, point: &[f64]) -> f64 {
        let n = point.len();
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => point[Self::var_index(*v, n) - 1],
            Expr::Add(a, b) => a.eval_value(point) + b.eval_value(point),
            Expr::Sub(a, b) => a.eval_value(point) - b.eval_value(point),
            Expr::Neg(a) => -a.eval_value(point),
            Expr::Mul(a, b) => a.eval_value(point) * b.eval_value(point),
            Expr::Div(a, b) => a.eval_value(point) / b.eval_value(point),
            Expr::Pow(a, k) => match k {
                0 => 1.0,
                k => a.eval_value(point).powi(*k),
            },
            Expr::Call(f, a) => f.apply(a.eval_value(point)),
        }
    }
}

/// Canonical fully-parenthesized rendering; re-parses to the same tree.
pub fn format_expr(e: &Expr) -> String {
    e.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(Var::X(i)) => write!(f, "x{i}"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, k) => write!(f, "({a}^{k})"),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(Var::X(i)))
    }

    fn y() -> Box<Expr> {
        Box::new(Expr::Var(Var::Y))
    }

    #[test]
    fn parses_into_expected_tree() {
        let e = parse("y^2 + x1*y", 2).unwrap();
        assert_eq!(e, Expr::Add(Box::new(Expr::Pow(y(), 2)), Box::new(Expr::Mul(x(1), y()))));
        assert_eq!(format_expr(&e), "((y^2)+(x1*y))");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-y^2", 2).unwrap().to_string(), "(-(y^2))");
        assert_eq!(parse("x1 - y - 1", 2).unwrap().to_string(), "((x1-y)-1)");
        assert_eq!(parse("x1 / y * 2", 2).unwrap().to_string(), "((x1/y)*2)");
        assert_eq!(parse("y^2^3", 2).unwrap(), Expr::Pow(y(), 8));
        assert_eq!(parse("y^-1", 2).unwrap(), Expr::Pow(y(), -1));
        assert_eq!(parse("y^(2)", 2).unwrap(), Expr::Pow(y(), 2));
        assert_eq!(parse("  sqrt ( x1 )", 2).unwrap().to_string(), "sqrt(x1)");
        assert_eq!(parse("2.5", 2).unwrap().to_string(), "2.5");
        assert_eq!(parse("1.5e-3", 2).unwrap(), Expr::Const(1.5e-3));
    }

    #[test]
    fn reports_errors_with_positions() {
        let err = parse("x3 + y", 3).unwrap_err();
        assert_eq!(err.position, 0);
        assert_eq!(
            err.kind,
            ParseErrorKind::VariableOutOfRange { name: "x3".into(), valid: "x1, x2, y".into() }
        );

        let err = parse("y^(1/2)", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonIntegerExponent);
        assert_eq!(err.position, 2);
        assert_eq!(parse("y^1.5", 2).unwrap_err().kind, ParseErrorKind::NonIntegerExponent);
        assert_eq!(parse("y^x1", 2).unwrap_err().kind, ParseErrorKind::NonIntegerExponent);

        let err = parse("(x1 + y", 2).unwrap_err();
        assert_eq!((err.kind, err.position), (ParseErrorKind::UnbalancedParens, 0));
        let err = parse("x1 + y)", 2).unwrap_err();
        assert_eq!((err.kind, err.position), (ParseErrorKind::UnbalancedParens, 6));

        let err = parse("z + 1", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("z".into()));
        let err = parse("x1 $ y", 2).unwrap_err();
        assert_eq!((err.kind, err.position), (ParseErrorKind::UnexpectedChar('$'), 3));
        assert!(matches!(parse("y^65", 2).unwrap_err().kind, ParseErrorKind::ExponentTooLarge(65)));
        assert!(parse("x0", 2).is_err());
        assert!(parse("", 2).is_err());
        assert!(parse("sqrt y", 2).is_err());
        assert!(parse("y", 0).is_ok());
        assert!(parse_in("y", VarSpace::x_only(2)).is_err());
    }

    #[test]
    fn plain_x_only_in_two_dimensions() {
        assert_eq!(parse("x", 2).unwrap(), parse("x1", 2).unwrap());
        assert_eq!(parse_in("x", VarSpace::x_only(1)).unwrap(), parse_in("x1", VarSpace::x_only(1)).unwrap());
        assert_eq!(parse("x", 3).unwrap_err().kind, ParseErrorKind::UnknownIdentifier("x".into()));
    }

    #[test]
    fn evaluates_jets() {
        let e = parse("y^2 + x1*y", 2).unwrap();
        let j = e.eval(&[1.0, 2.0]).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.gradient(), &[2.0, 5.0]);
        assert_eq!(j.hessian(), &[0.0, 1.0, 1.0, 2.0]);

        let zero = parse("0", 3).unwrap().eval(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(zero, Jet2::zero(3));

        let err = parse("x1/y", 2).unwrap().eval(&[1.0, 0.0]).unwrap_err();
        assert_eq!(err, JetError::DenominatorVanishes { value: 0.0 });
    }

    #[test]
    fn remainder_space_uses_x_only() {
        let r = parse_in("x1^2/4", VarSpace::x_only(1)).unwrap();
        let j = r.eval(&[2.0]).unwrap();
        assert_eq!((j.value(), j.gradient()[0], j.hessian()[0]), (1.0, 1.0, 0.5));
    }
}
