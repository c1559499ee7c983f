//! Expression language for Finsler structures, vector fields and scalar fields.
//!
//! Grammar (EBNF; whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;            (* right associative *)
//! primary = number | variable | call | "(" expr ")" ;
//! call    = ("sqrt" | "exp" | "ln" | "abs") "(" expr ")"
//!         | "pow" "(" expr "," expr ")" ;       (* exponent must be constant *)
//! variable = ("x" | "y") digit { digit } ;      (* x1..xn, y1..yn *)
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```
//!
//! Error positions are 1-based byte offsets; end of input is reported as
//! `len + 1`.

use std::fmt;

use crate::error::{Error, Result};

/// Arithmetic needed to evaluate an [`Expr`]. Implemented for `f64` and for
/// truncated Taylor jets.
pub trait Scalar: Clone + Sized {
    /// A constant living in the same algebra as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn sqrt(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn abs(&self) -> Result<Self>;
    fn powi(&self, k: i32) -> Result<Self>;
    fn powf(&self, a: f64) -> Result<Self>;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::domain("division by zero"));
        }
        Ok(self / o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 {
            return Err(Error::domain(format!("sqrt of negative value {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self <= 0.0 {
            return Err(Error::domain(format!("ln of non-positive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn abs(&self) -> Result<Self> {
        Ok(f64::abs(*self))
    }
    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 && *self == 0.0 {
            return Err(Error::domain("negative power of zero"));
        }
        Ok(f64::powi(*self, k))
    }
    fn powf(&self, a: f64) -> Result<Self> {
        if *self < 0.0 || (*self == 0.0 && a < 0.0) {
            return Err(Error::domain(format!(
                "non-integer power {a} of non-positive base {self}"
            )));
        }
        Ok(f64::powf(*self, a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree. Variable indices are stored zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// `pow(base, exponent)` with a constant exponent.
    PowFn(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn uses_y(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::X(_) => false,
            Expr::Y(_) => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_y(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) | Expr::PowFn(a, b) => a.uses_y() || b.uses_y(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::X(_) | Expr::Y(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) | Expr::PowFn(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn contains_abs(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::X(_) | Expr::Y(_) => false,
            Expr::Call(Func::Abs, _) => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.contains_abs(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) | Expr::PowFn(a, b) => {
                a.contains_abs() || b.contains_abs()
            }
        }
    }

    /// Evaluates an expression that contains no variables.
    pub fn eval_const(&self) -> Result<f64> {
        self.eval_generic::<f64>(&[0.0], &[])
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let v = self.eval_generic(x, y)?;
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    /// Evaluates the tree in any [`Scalar`] algebra. `x` must be non-empty
    /// (its first element supplies the algebra for constants).
    pub fn eval_generic<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let proto = x.first().or_else(|| y.first()).ok_or_else(|| {
            Error::InvalidParameter("evaluation needs at least one input".into())
        })?;
        self.eval_inner(proto, x, y)
    }

    fn eval_inner<S: Scalar>(&self, proto: &S, x: &[S], y: &[S]) -> Result<S> {
        Ok(match self {
            Expr::Num(c) => proto.lift(*c),
            Expr::X(i) => x
                .get(*i)
                .cloned()
                .ok_or(Error::DimensionMismatch { expected: i + 1, got: x.len() })?,
            Expr::Y(i) => y
                .get(*i)
                .cloned()
                .ok_or(Error::DimensionMismatch { expected: i + 1, got: y.len() })?,
            Expr::Neg(e) => e.eval_inner(proto, x, y)?.neg(),
            Expr::Binary(op, a, b) => {
                let a = a.eval_inner(proto, x, y)?;
                let b = b.eval_inner(proto, x, y)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b)?,
                }
            }
            Expr::Pow(base, expo) | Expr::PowFn(base, expo) => {
                let b = base.eval_inner(proto, x, y)?;
                if expo.is_constant() {
                    let a = expo.eval_const()?;
                    if a.fract() == 0.0 && a.abs() <= 64.0 && matches!(self, Expr::Pow(..)) {
                        b.powi(a as i32)?
                    } else {
                        b.powf(a)?
                    }
                } else {
                    let e = expo.eval_inner(proto, x, y)?;
                    e.mul(&b.ln()?).exp()
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval_inner(proto, x, y)?;
                match f {
                    Func::Sqrt => v.sqrt()?,
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln()?,
                    Func::Abs => v.abs()?,
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, e.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                wrap(f, a, a.precedence() < p)?;
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                };
                f.write_str(sym)?;
                wrap(f, b, b.precedence() <= p)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                wrap(f, b, b.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::PowFn(a, b) => write!(f, "pow({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = i + 1;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, pos)),
            b'-' => out.push((Tok::Minus, pos)),
            b'*' => out.push((Tok::Star, pos)),
            b'/' => out.push((Tok::Slash, pos)),
            b'^' => out.push((Tok::Caret, pos)),
            b'(' => out.push((Tok::LParen, pos)),
            b')' => out.push((Tok::RParen, pos)),
            b',' => out.push((Tok::Comma, pos)),
            b'0'..=b'9' | b'.' => {
                let start = i;
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
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    position: pos,
                    expected: format!("a number, found `{text}`"),
                })?;
                out.push((Tok::Num(v), pos));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), pos));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    position: pos,
                    expected: "an operator, number, identifier or parenthesis".into(),
                })
            }
        }
        i += 1;
    }
    out.push((Tok::End, bytes.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.pos(),
                expected: format!("{what}, found {}", self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let expo = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(expo)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, pos),
            other => {
                // Report at the offending token, which `bump` has consumed.
                Err(Error::Syntax {
                    position: pos,
                    expected: format!("an operand, found {}", other.describe()),
                })
            }
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr> {
        let func = match name.as_str() {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "abs" => Some(Func::Abs),
            _ => None,
        };
        if let Some(func) = func {
            self.expect(Tok::LParen, "`(`")?;
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "pow" {
            self.expect(Tok::LParen, "`(`")?;
            let base = self.expr()?;
            self.expect(Tok::Comma, "`,`")?;
            let epos = self.pos();
            let expo = self.expr()?;
            if !expo.is_constant() {
                return Err(Error::Syntax {
                    position: epos,
                    expected: "a constant exponent in pow(·, rational)".into(),
                });
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::PowFn(Box::new(base), Box::new(expo)));
        }
        let (kind, digits) = name.split_at(1);
        if (kind == "x" || kind == "y") && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let idx: usize = digits.parse().unwrap_or(usize::MAX);
            if idx == 0 || idx > self.n {
                return Err(Error::IndexOutOfRange { name, position: pos, n: self.n });
            }
            return Ok(if kind == "x" { Expr::X(idx - 1) } else { Expr::Y(idx - 1) });
        }
        Err(Error::UnknownIdentifier { name, position: pos })
    }
}

/// Parses `src` as an expression over `x1..xn`, `y1..yn`.
pub fn parse_expr(src: &str, n: usize) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, at: 0, n };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax {
            position: p.pos(),
            expected: format!("an operator or end of input, found {}", p.peek().describe()),
        });
    }
    Ok(e)
}

/// A Finsler structure `F(x, y)` together with an optional domain guard that
/// is positive wherever `F` is defined.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    pub f: Expr,
    pub n: usize,
    pub guard: Option<Expr>,
    pub label: String,
}

pub fn parse_metric(source: &str, n: usize) -> Result<MetricField> {
    check_dim(n)?;
    let f = parse_expr(source, n)?;
    Ok(MetricField { f, n, guard: None, label: source.to_string() })
}

fn check_dim(n: usize) -> Result<()> {
    if !(1..=crate::jets::MAX_DIM).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "dimension {n} outside 1..={}",
            crate::jets::MAX_DIM
        )));
    }
    Ok(())
}

impl MetricField {
    /// Attaches a domain guard; it may only depend on `x`.
    pub fn with_guard(mut self, guard_src: &str) -> Result<Self> {
        let g = parse_expr(guard_src, self.n)?;
        if g.uses_y() {
            return Err(Error::InvalidParameter("domain guard must not depend on y".into()));
        }
        self.guard = Some(g);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Guard value at `x` (`+inf` when there is no guard).
    pub fn guard_value(&self, x: &[f64]) -> Result<f64> {
        match &self.guard {
            None => Ok(f64::INFINITY),
            Some(g) => g.eval(x, &[]),
        }
    }

    pub fn check_guard(&self, x: &[f64]) -> Result<()> {
        let v = self.guard_value(x)?;
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::GuardViolation { value: v })
        }
    }

    /// `F(x, y)`, guarded.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len().min(y.len()) });
        }
        self.check_guard(x)?;
        self.f.eval(x, y)
    }

    /// Relative homogeneity defect `max_λ |F(x,λy) − λF(x,y)| / (λF(x,y))`
    /// over λ ∈ {0.5, 2, 7}.
    pub fn homogeneity_defect(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let f = self.eval(x, y)?;
        let mut worst: f64 = 0.0;
        for lambda in [0.5, 2.0, 7.0] {
            let ys: Vec<f64> = y.iter().map(|v| lambda * v).collect();
            let fl = self.eval(x, &ys)?;
            worst = worst.max((fl - lambda * f).abs() / (lambda * f).abs().max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    }
}

/// A vector field `X(x)` on the base manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr {
    pub components: Vec<Expr>,
    pub n: usize,
}

pub fn parse_vector_field<S: AsRef<str>>(sources: &[S], n: usize) -> Result<VectorFieldExpr> {
    check_dim(n)?;
    if sources.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sources.len() });
    }
    let mut components = Vec::with_capacity(n);
    for (i, s) in sources.iter().enumerate() {
        let e = parse_expr(s.as_ref(), n)?;
        if e.uses_y() {
            return Err(Error::YVariableInVectorField { component: i + 1 });
        }
        components.push(e);
    }
    Ok(VectorFieldExpr { components, n })
}

impl VectorFieldExpr {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x, &[])).collect()
    }

    pub fn eval_generic<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.components.iter().map(|c| c.eval_generic(x, &[])).collect()
    }
}

/// A field on the slit tangent bundle, components over `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFieldExpr {
    pub components: Vec<Expr>,
    pub n: usize,
}

pub fn parse_tangent_field<S: AsRef<str>>(sources: &[S], n: usize) -> Result<TangentFieldExpr> {
    check_dim(n)?;
    let components = sources
        .iter()
        .map(|s| parse_expr(s.as_ref(), n))
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentFieldExpr { components, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_norm() {
        let m = parse_metric("sqrt(y1^2 + y2^2)", 2).unwrap();
        assert_eq!(m.eval(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(m.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn randers_substitution() {
        let m = parse_metric("sqrt(y1^2+y2^2) + 0.3*y1", 2).unwrap();
        assert!((m.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.3).abs() < 1e-15);
    }

    #[test]
    fn unbalanced_reports_end_position() {
        let err = parse_metric("sqrt(y1^2 +", 2).unwrap_err();
        match err {
            Error::Syntax { position, .. } => assert_eq!(position, 12),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_and_out_of_range() {
        assert!(matches!(
            parse_expr("sin(x1)", 2),
            Err(Error::UnknownIdentifier { position: 1, .. })
        ));
        assert!(matches!(
            parse_expr("x1 + y3", 2),
            Err(Error::IndexOutOfRange { position: 6, .. })
        ));
        assert!(matches!(parse_expr("x0", 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn vector_fields() {
        let rot = parse_vector_field(&["-x2", "x1"], 2).unwrap();
        assert_eq!(rot.eval(&[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let c = parse_vector_field(&["x1*(x1)", "x2*(x1)"], 2).unwrap();
        assert_eq!(c.eval(&[2.0, 1.0]).unwrap(), vec![4.0, 2.0]);
        assert!(matches!(
            parse_vector_field(&["y1"], 1),
            Err(Error::YVariableInVectorField { component: 1 })
        ));
    }

    #[test]
    fn domain_errors() {
        let e = parse_expr("ln(x1)", 1).unwrap();
        assert!(matches!(e.eval(&[-1.0], &[]), Err(Error::Domain(_))));
        let e = parse_expr("1/x1", 1).unwrap();
        assert!(matches!(e.eval(&[0.0], &[]), Err(Error::Domain(_))));
        let e = parse_expr("pow(x1, 1/3)", 1).unwrap();
        assert!(matches!(e.eval(&[-8.0], &[]), Err(Error::Domain(_))));
        assert!((e.eval(&[8.0], &[]).unwrap() - 2.0).abs() < 1e-15);
        // integer powers are fine on negative bases
        let e = parse_expr("x1^3", 1).unwrap();
        assert_eq!(e.eval(&[-2.0], &[]).unwrap(), -8.0);
    }

    #[test]
    fn guard_violation() {
        let m = parse_metric("sqrt(y1^2)", 1).unwrap().with_guard("1 - x1^2").unwrap();
        assert!(matches!(m.eval(&[2.0], &[1.0]), Err(Error::GuardViolation { .. })));
        assert!(parse_metric("y1", 1).unwrap().with_guard("y1").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("-x1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0], &[]).unwrap(), -9.0);
        let e = parse_expr("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0], &[]).unwrap(), 512.0);
        let e = parse_expr("8 - 2 - 1", 1).unwrap();
        assert_eq!(e.eval(&[0.0], &[]).unwrap(), 5.0);
        let e = parse_expr("8 / 2 / 2", 1).unwrap();
        assert_eq!(e.eval(&[0.0], &[]).unwrap(), 2.0);
        let e = parse_expr("1.5e-1 * 2E+1", 1).unwrap();
        assert!((e.eval(&[0.0], &[]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pow_requires_constant_exponent() {
        assert!(matches!(parse_expr("pow(x1, x1)", 1), Err(Error::Syntax { position: 9, .. })));
    }

    #[test]
    fn display_reparses() {
        for src in [
            "sqrt(y1^2 + y2^2) + 0.3*y1",
            "(a)",
            "-(x1 - x2) * (x1 + x2) / (1 - x1^2)",
            "2^-x1",
            "(x1^2)^3",
            "x1 - (x2 - x1)",
            "pow(y1^4 + y2^4, 1/4)",
            "--x1",
        ] {
            let Ok(e) = parse_expr(src, 2) else { continue };
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed, 2).unwrap(), e, "{src} -> {printed}");
        }
    }
}
