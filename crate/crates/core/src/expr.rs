//! A small expression language over named chart coordinates.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | ident "(" expr ")" | ident | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so `-x^2`
//! is `-(x^2)` and `2^3^2` is `2^9`. Recognised functions are `sin`, `cos`,
//! `exp`, `log`, `sqrt` and `tanh`; these names cannot be used as
//! coordinates.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::jets::Jet2;
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Function {
    pub const ALL: [Function; 6] = [
        Function::Sin,
        Function::Cos,
        Function::Exp,
        Function::Log,
        Function::Sqrt,
        Function::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Value, first and second derivative at `u`.
    fn taylor(self, u: f64) -> Result<(f64, f64, f64)> {
        Ok(match self {
            Function::Sin => {
                let (s, c) = (math::sin(u), math::cos(u));
                (s, c, -s)
            }
            Function::Cos => {
                let (s, c) = (math::sin(u), math::cos(u));
                (c, -s, -c)
            }
            Function::Exp => {
                let e = math::exp(u);
                (e, e, e)
            }
            Function::Log => {
                if u <= 0.0 {
                    return Err(Error::Domain { op: "log", value: u });
                }
                (math::ln(u), 1.0 / u, -1.0 / (u * u))
            }
            Function::Sqrt => {
                // sqrt(0) has no finite derivative
                if u <= 0.0 {
                    return Err(Error::Domain { op: "sqrt", value: u });
                }
                let s = math::sqrt(u);
                (s, 0.5 / s, -0.25 / (s * u))
            }
            Function::Tanh => {
                let t = math::tanh(u);
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
        })
    }

    fn apply(self, u: f64) -> Result<f64> {
        match self {
            Function::Log if u <= 0.0 => Err(Error::Domain { op: "log", value: u }),
            Function::Sqrt if u < 0.0 => Err(Error::Domain { op: "sqrt", value: u }),
            Function::Sin => Ok(math::sin(u)),
            Function::Cos => Ok(math::cos(u)),
            Function::Exp => Ok(math::exp(u)),
            Function::Log => Ok(math::ln(u)),
            Function::Sqrt => Ok(math::sqrt(u)),
            Function::Tanh => Ok(math::tanh(u)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(String),
    Neg(Box<Expr>),
    Call(Function, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Local coordinate names `x^1, .., x^m` of a chart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    pub fn new<I, S>(names: I) -> Result<Chart>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(Error::InvalidChart(format!("`{name}` is not an identifier")));
            }
            if Function::from_name(name).is_some() {
                return Err(Error::InvalidChart(format!("`{name}` is a reserved function name")));
            }
            if names[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        Ok(Chart { names })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0 };
    let e = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(e)
}

pub fn eval_jet2(e: &Expr, chart: &Chart, p: &[f64]) -> Result<Jet2> {
    e.eval_jet2(chart, p)
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn coord(name: &str) -> Expr {
        Expr::Coord(name.to_string())
    }

    pub fn call(f: Function, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    /// Literal value if the expression is a (possibly negated) number.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(inner) => inner.as_constant().map(|v| -v),
            _ => None,
        }
    }

    /// True when no coordinate occurs.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Coord(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Coordinates referenced by the expression, in first-occurrence order.
    pub fn coordinates(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_coords(&mut out);
        out
    }

    fn collect_coords<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Coord(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_coords(out),
            Expr::Binary(_, a, b) => {
                a.collect_coords(out);
                b.collect_coords(out);
            }
        }
    }

    /// Fails with `UnknownCoordinate` if a reference does not resolve in `chart`.
    pub fn check_coordinates(&self, chart: &Chart) -> Result<()> {
        match self.coordinates().into_iter().find(|c| chart.index_of(c).is_none()) {
            Some(c) => Err(Error::UnknownCoordinate(c.to_string())),
            None => Ok(()),
        }
    }

    /// Replaces every reference to `name` by `value`.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Coord(c) if c == name => value.clone(),
            Expr::Coord(c) => Expr::Coord(c.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(name, value))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(name, value))),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(name, value), b.substitute(name, value)),
        }
    }

    pub fn eval(&self, chart: &Chart, p: &[f64]) -> Result<f64> {
        chart.check_point(p)?;
        self.eval_unchecked(chart, p)
    }

    fn eval_unchecked(&self, chart: &Chart, p: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Coord(name) => p[lookup(chart, name)?],
            Expr::Neg(a) => -a.eval_unchecked(chart, p)?,
            Expr::Call(f, a) => f.apply(a.eval_unchecked(chart, p)?)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval_unchecked(chart, p)?;
                match op {
                    BinaryOp::Add => x + b.eval_unchecked(chart, p)?,
                    BinaryOp::Sub => x - b.eval_unchecked(chart, p)?,
                    BinaryOp::Mul => x * b.eval_unchecked(chart, p)?,
                    BinaryOp::Div => {
                        let y = b.eval_unchecked(chart, p)?;
                        if y == 0.0 {
                            return Err(Error::Domain { op: "division by zero", value: x });
                        }
                        x / y
                    }
                    BinaryOp::Pow => match integer_exponent(b, chart, p) {
                        Some(n) => pow_int_value(x, n)?,
                        None => {
                            let y = b.eval_unchecked(chart, p)?;
                            if x <= 0.0 {
                                return Err(Error::Domain { op: "non-positive base of real power", value: x });
                            }
                            math::exp(y * math::ln(x))
                        }
                    },
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Domain { op: "non-finite result", value: v });
        }
        Ok(v)
    }

    pub fn eval_jet2(&self, chart: &Chart, p: &[f64]) -> Result<Jet2> {
        chart.check_point(p)?;
        self.jet_unchecked(chart, p)
    }

    fn jet_unchecked(&self, chart: &Chart, p: &[f64]) -> Result<Jet2> {
        let m = chart.dim();
        let jet = match self {
            Expr::Num(v) => Jet2::constant(*v, m),
            Expr::Coord(name) => {
                let i = lookup(chart, name)?;
                Jet2::variable(p[i], i, m)
            }
            Expr::Neg(a) => a.jet_unchecked(chart, p)?.neg(),
            Expr::Call(f, a) => {
                let u = a.jet_unchecked(chart, p)?;
                let (v0, v1, v2) = f.taylor(u.value())?;
                u.compose(v0, v1, v2)
            }
            Expr::Binary(op, a, b) => {
                let x = a.jet_unchecked(chart, p)?;
                match op {
                    BinaryOp::Add => x.add(&b.jet_unchecked(chart, p)?),
                    BinaryOp::Sub => x.sub(&b.jet_unchecked(chart, p)?),
                    BinaryOp::Mul => x.mul(&b.jet_unchecked(chart, p)?),
                    BinaryOp::Div => {
                        let y = b.jet_unchecked(chart, p)?;
                        let d = y.value();
                        if d == 0.0 {
                            return Err(Error::Domain { op: "division by zero", value: x.value() });
                        }
                        x.mul(&y.compose(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d)))
                    }
                    BinaryOp::Pow => match integer_exponent(b, chart, p) {
                        Some(n) => pow_int_jet(&x, n)?,
                        None => {
                            let y = b.jet_unchecked(chart, p)?;
                            let base = x.value();
                            if base <= 0.0 {
                                return Err(Error::Domain { op: "non-positive base of real power", value: base });
                            }
                            // a^b = exp(b log a)
                            let log_a = x.compose(math::ln(base), 1.0 / base, -1.0 / (base * base));
                            let e = y.mul(&log_a);
                            let ev = math::exp(e.value());
                            e.compose(ev, ev, ev)
                        }
                    },
                }
            }
        };
        if !jet.is_finite() {
            return Err(Error::Domain { op: "non-finite result", value: jet.value() });
        }
        Ok(jet)
    }
}

fn lookup(chart: &Chart, name: &str) -> Result<usize> {
    chart
        .index_of(name)
        .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
}

/// The exponent as an integer when it is constant and integral, so that
/// `2^3^2` and `x^(-1)` take the exact path.
fn integer_exponent(e: &Expr, chart: &Chart, p: &[f64]) -> Option<i32> {
    let c = match e.as_constant() {
        Some(c) => c,
        None if e.is_constant() => e.eval_unchecked(chart, p).ok()?,
        None => return None,
    };
    if c == libm::trunc(c) && math::abs(c) <= i32::MAX as f64 {
        Some(c as i32)
    } else {
        None
    }
}

fn pow_int_value(x: f64, n: i32) -> Result<f64> {
    if n < 0 && x == 0.0 {
        return Err(Error::Domain { op: "zero to a negative power", value: x });
    }
    Ok(match n {
        0 => 1.0,
        1 => x,
        _ => math::powi(x, n),
    })
}

fn pow_int_jet(x: &Jet2, n: i32) -> Result<Jet2> {
    let u = x.value();
    if n < 0 && u == 0.0 {
        return Err(Error::Domain { op: "zero to a negative power", value: u });
    }
    Ok(match n {
        0 => Jet2::constant(1.0, x.dim()),
        1 => x.clone(),
        2 => x.compose(u * u, 2.0 * u, 2.0),
        _ => {
            let nf = n as f64;
            x.compose(
                math::powi(u, n),
                nf * math::powi(u, n - 1),
                nf * (nf - 1.0) * math::powi(u, n - 2),
            )
        }
    })
}

macro_rules! impl_op {
    ($trait:ident, $method:ident, $op:expr) => {
        impl core::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
    };
}

impl_op!(Add, add, BinaryOp::Add);
impl_op!(Sub, sub, BinaryOp::Sub);
impl_op!(Mul, mul, BinaryOp::Mul);
impl_op!(Div, div, BinaryOp::Div);

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Rendering precedence levels.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if v.is_sign_negative() => PREC_NEG,
            Expr::Num(_) | Expr::Coord(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_NEG,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
            Expr::Binary(BinaryOp::Pow, ..) => PREC_POW,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Renders with the minimal parentheses that reproduce the same tree shape.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Coord(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, PREC_POW)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let (left, right) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (PREC_ADD, PREC_MUL),
                    BinaryOp::Mul | BinaryOp::Div => (PREC_MUL, PREC_NEG),
                    BinaryOp::Pow => (PREC_ATOM, PREC_NEG),
                };
                a.fmt_child(f, left)?;
                f.write_str(op.symbol())?;
                b.fmt_child(f, right)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &[&'static str]) -> Error {
        Error::Syntax {
            offset: self.pos,
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')', ")")?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                // identifiers are ASCII, so this slice is valid UTF-8
                let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                if self.peek() == Some(b'(') {
                    let func = Function::from_name(name).ok_or_else(|| Error::UnknownFunction {
                        name: name.to_string(),
                        offset: start,
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(b')', ")")?;
                    return Ok(Expr::call(func, arg));
                }
                if Function::from_name(name).is_some() {
                    return Err(self.error(&["("]));
                }
                Ok(Expr::coord(name))
            }
            _ => Err(self.error(&["number", "identifier", "("])),
        }
    }

    fn expect(&mut self, byte: u8, label: &'static str) -> Result<()> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error(&["number"]));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent; leave `e` for the caller to reject
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax { offset: start, expected: alloc::vec!["number"] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Chart {
        Chart::new(["x", "y"]).unwrap()
    }

    #[test]
    fn evaluates_linear_monomial() {
        let e = parse("2*y").unwrap();
        assert_eq!(e.eval(&xy(), &[1.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn first_integral_vanishes_on_separatrix() {
        let e = parse("(y^2-1)*exp(x)").unwrap();
        assert_eq!(e.eval(&xy(), &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn unbalanced_parenthesis_reports_offset() {
        match parse("2*(y") {
            Err(Error::Syntax { offset, expected }) => {
                assert_eq!(offset, 4);
                assert_eq!(expected, alloc::vec![")"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_function_is_rejected() {
        assert!(matches!(
            parse("1 + foo(x)"),
            Err(Error::UnknownFunction { ref name, offset: 4 }) if name == "foo"
        ));
        assert!(matches!(parse("sin + 1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x y"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let c = xy();
        let at = |s: &str| parse(s).unwrap().eval(&c, &[2.0, 3.0]).unwrap();
        assert_eq!(at("-x^2"), -4.0);
        assert_eq!(at("2^3^2"), 512.0);
        assert_eq!(at("x - y - 1"), -2.0);
        assert_eq!(at("12/x/3"), 2.0);
        assert_eq!(at("x^-1"), 0.5);
        assert_eq!(at("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(Vec::<String>::new()).is_err());
        assert!(Chart::new(["x", "x"]).is_err());
        assert!(Chart::new(["x", "exp"]).is_err());
        assert!(Chart::new(["1x"]).is_err());
        assert!(Chart::new(["t_1", "phi2"]).is_ok());
    }

    #[test]
    fn domain_errors() {
        let c = xy();
        let err = |s: &str, p: [f64; 2]| parse(s).unwrap().eval_jet2(&c, &p).unwrap_err();
        assert!(matches!(err("log(x)", [-1.0, 0.0]), Error::Domain { .. }));
        assert!(matches!(err("sqrt(x)", [-1.0, 0.0]), Error::Domain { .. }));
        assert!(matches!(err("1/x", [0.0, 0.0]), Error::Domain { .. }));
        assert!(matches!(err("x^-2", [0.0, 0.0]), Error::Domain { .. }));
        assert!(matches!(err("x^0.5", [-1.0, 0.0]), Error::Domain { .. }));
        assert!(matches!(err("z", [0.0, 0.0]), Error::UnknownCoordinate(_)));
        // integer powers of negative bases are fine
        let j = parse("x^3").unwrap().eval_jet2(&c, &[-2.0, 0.0]).unwrap();
        assert_eq!(j.value(), -8.0);
        assert_eq!(j.gradient()[0], 12.0);
        assert_eq!(j.hessian(0, 0), -12.0);
    }

    #[test]
    fn jet_of_exp_cos_at_origin() {
        let j = parse("exp(x)*cos(y)").unwrap().eval_jet2(&xy(), &[0.0, 0.0]).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.gradient(), &[1.0, 0.0]);
        assert_eq!(j.hessian(0, 0), 1.0);
        assert_eq!(j.hessian(0, 1), 0.0);
        assert_eq!(j.hessian(1, 1), -1.0);
    }

    #[test]
    fn jet_of_coordinate() {
        let j = parse("x").unwrap().eval_jet2(&xy(), &[0.3, -7.0]).unwrap();
        assert_eq!(j.value(), 0.3);
        assert_eq!(j.gradient(), &[1.0, 0.0]);
        assert!((0..2).all(|a| (0..2).all(|b| j.hessian(a, b) == 0.0)));
    }

    #[test]
    fn render_uses_minimal_parentheses() {
        let cases = [
            ("(y^2-1)*exp(x)", "(y^2 - 1)*exp(x)"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("a - (b - c)", "a - (b - c)"),
            ("a - b - c", "a - b - c"),
            ("2^3^2", "2^3^2"),
            ("(2^3)^2", "(2^3)^2"),
            ("x^-2", "x^-2"),
            ("x*(y+1)/2", "x*(y + 1)/2"),
        ];
        for (src, want) in cases {
            assert_eq!(parse(src).unwrap().to_string(), want, "rendering {src}");
        }
    }

    #[test]
    fn substitution() {
        let e = parse("exp(t) + t").unwrap().substitute("t", &parse("y*x").unwrap());
        assert_eq!(e.to_string(), "exp(y*x) + y*x");
    }
}
