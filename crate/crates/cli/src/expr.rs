//! A small arithmetic interpreter for the expressions in problem files.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-u^2` is `-(u²)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Parse failure at a 1-based column of the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Cot,
    Sinh,
    Cosh,
    Tanh,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "cot" => (Func::Cot, 1),
            "sinh" => (Func::Sinh, 1),
            "cosh" => (Func::Cosh, 1),
            "tanh" => (Func::Tanh, 1),
            "abs" => (Func::Abs, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }

    fn call(self, x: f64, y: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Cot => 1.0 / x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
            Func::Min => x.min(y),
            Func::Max => x.max(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(x) => *x,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Pow(a, b) => pow(a.eval(vars), b.eval(vars)),
            Node::Call(f, args) => {
                let x = args[0].eval(vars);
                let y = args.get(1).map_or(0.0, |n| n.eval(vars));
                f.call(x, y)
            }
        }
    }

    fn uses(&self, var: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) => a.uses(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
            Node::Call(_, args) => args.iter().any(|n| n.uses(var)),
        }
    }
}

fn pow(x: f64, y: f64) -> f64 {
    if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}

/// A compiled expression over a fixed list of variable names.
#[derive(Clone)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Arc<Node>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?} in {:?})", self.source, self.vars)
    }
}

impl Expr {
    /// Compiles `source`; any name other than `vars`, `pi`, `e` or a known function is an error.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        Self::parse_with(source, vars, &BTreeMap::new())
    }

    /// As [`Expr::parse`], with named constants folded in as numbers.
    pub fn parse_with(source: &str, vars: &[&str], consts: &BTreeMap<String, f64>) -> Result<Self, ExprError> {
        let tokens = lex(source)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            vars,
            consts,
            end: source.chars().count() + 1,
        };
        let root = p.sum()?;
        if let Some(tok) = p.peek() {
            return Err(p.error_at(tok.column, format!("unexpected {}", tok.kind)));
        }
        Ok(Self {
            source: source.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root: Arc::new(root),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates with `values[i]` bound to the `i`-th variable name.
    pub fn eval(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.vars.len());
        self.root.eval(values)
    }

    pub fn uses(&self, name: &str) -> bool {
        self.vars.iter().position(|v| v == name).is_some_and(|i| self.root.uses(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Name(String),
    Op(char),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(x) => write!(f, "number {x}"),
            Kind::Name(n) => write!(f, "name `{n}`"),
            Kind::Op(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let x = text.parse::<f64>().map_err(|_| ExprError {
                column,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: Kind::Num(x),
                column,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Name(chars[start..i].iter().collect()),
                column,
            });
        } else if "+-*/^(),".contains(c) {
            out.push(Token {
                kind: Kind::Op(c),
                column,
            });
            i += 1;
        } else {
            return Err(ExprError {
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    consts: &'a BTreeMap<String, f64>,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn error_at(&self, column: usize, message: String) -> ExprError {
        ExprError { column, message }
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Kind::Op(c), .. }) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            return Ok(());
        }
        match self.peek() {
            Some(t) => Err(self.error_at(t.column, format!("expected `{op}`, found {}", t.kind))),
            None => Err(self.error_at(self.end, format!("expected `{op}`, found end of input"))),
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek() else {
            return Err(self.error_at(self.end, "unexpected end of input".into()));
        };
        self.pos += 1;
        match &tok.kind {
            Kind::Num(x) => Ok(Node::Num(*x)),
            Kind::Op('(') => {
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            Kind::Op(_) => Err(self.error_at(tok.column, format!("unexpected {}", tok.kind))),
            Kind::Name(name) => {
                if let Some(i) = self.vars.iter().position(|v| v == name) {
                    return Ok(Node::Var(i));
                }
                if let Some((f, arity)) = Func::lookup(name) {
                    self.expect('(')?;
                    let mut args = vec![self.sum()?];
                    while self.eat(',') {
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(self.error_at(
                            tok.column,
                            format!("`{name}` takes {arity} argument(s), got {}", args.len()),
                        ));
                    }
                    return Ok(Node::Call(f, args));
                }
                if let Some(&x) = self.consts.get(name) {
                    return Ok(Node::Num(x));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(self.error_at(
                        tok.column,
                        format!("unknown name `{name}` (variables here: {})", self.vars.join(", ")),
                    )),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, vars: &[&str], vals: &[f64]) -> f64 {
        Expr::parse(src, vars).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2*3", &[], &[]), 7.0);
        assert_eq!(eval("2^3^2", &[], &[]), 512.0);
        assert_eq!(eval("-2^2", &[], &[]), -4.0);
        assert_eq!(eval("2^-1", &[], &[]), 0.5);
        assert_eq!(eval("8/4/2", &[], &[]), 1.0);
        assert_eq!(eval("(1+2)*3", &[], &[]), 9.0);
        assert_eq!(eval("1.5e2 + .5", &[], &[]), 150.5);
    }

    #[test]
    fn variables_and_functions() {
        let v = eval("0.25*exp(u)*t", &["t", "u"], &[2.0, 0.0]);
        assert_eq!(v, 0.5);
        let w = eval("min(abs(u), 3) + max(sinh(0), cosh(0))", &["u"], &[-2.0]);
        assert_eq!(w, 3.0);
        assert!((eval("sin(pi/2) + cot(pi/4)", &[], &[]) - 2.0).abs() < 1e-15);
        assert!((eval("ln(e)", &[], &[]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn named_constants() {
        let consts = BTreeMap::from([("lambda".to_string(), 0.5)]);
        let e = Expr::parse_with("lambda*exp(u)", &["u"], &consts).unwrap();
        assert_eq!(e.eval(&[0.0]), 0.5);
        let e = Expr::parse_with("u", &["u"], &BTreeMap::from([("u".to_string(), 3.0)])).unwrap();
        assert_eq!(e.eval(&[1.0]), 1.0);
    }

    #[test]
    fn usage_detection() {
        let e = Expr::parse("exp(-abs(u))", &["t", "u"]).unwrap();
        assert!(e.uses("u"));
        assert!(!e.uses("t"));
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + foo(u)", &["u"]).unwrap_err();
        assert_eq!(e.column, 5);
        let e = Expr::parse("2 * (u + 1", &["u"]).unwrap_err();
        assert_eq!(e.column, 11);
        let e = Expr::parse("u $ 2", &["u"]).unwrap_err();
        assert_eq!(e.column, 3);
        let e = Expr::parse("min(u)", &["u"]).unwrap_err();
        assert!(e.message.contains("2 argument"));
        let e = Expr::parse("u u", &["u"]).unwrap_err();
        assert_eq!(e.column, 3);
    }
}
