//! Arithmetic expressions over `x, z, t, u` for initial, boundary and
//! source data.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-x^2 = -(x^2)`. Functions: `sin cos exp` (one argument), `min max`
//! (two). Constants: `pi`, and any extra names supplied by the caller.

use std::fmt;

use richards_core::ScalarField;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at column {})", self.msg, self.pos + 1)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    X,
    Z,
    T,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Min,
    Max,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Self::Min | Self::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, v: &[f64; 4]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(var) => v[*var as usize],
            Node::Neg(a) => -a.eval(v),
            Node::Add(a, b) => a.eval(v) + b.eval(v),
            Node::Sub(a, b) => a.eval(v) - b.eval(v),
            Node::Mul(a, b) => a.eval(v) * b.eval(v),
            Node::Div(a, b) => a.eval(v) / b.eval(v),
            Node::Pow(a, b) => a.eval(v).powf(b.eval(v)),
            Node::Call(f, args) => {
                let a = args[0].eval(v);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Min => a.min(args[1].eval(v)),
                    Func::Max => a.max(args[1].eval(v)),
                }
            }
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) => a.has_vars(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.has_vars() || b.has_vars()
            }
            Node::Call(_, args) => args.iter().any(Node::has_vars),
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
}

impl Expr {
    /// Parses `src`; `constants` adds named values (e.g. `ustar`).
    pub fn parse(src: &str, constants: &[(&str, f64)]) -> Result<Self, ParseError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, constants };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.s.len() {
            return Err(p.err(format!("unexpected '{}'", p.s[p.pos] as char)));
        }
        Ok(Self { src: src.trim().to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, x: f64, z: f64, t: f64, u: f64) -> f64 {
        self.root.eval(&[x, z, t, u])
    }

    /// Value of an expression without variables.
    pub fn constant(&self) -> Option<f64> {
        (!self.root.has_vars()).then(|| self.root.eval(&[0.0; 4]))
    }
}

impl ScalarField for Expr {
    fn eval(&self, x: f64, z: f64, t: f64, u: f64) -> f64 {
        Expr::eval(self, x, z, t, u)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    constants: &'a [(&'a str, f64)],
}

impl Parser<'_> {
    fn err(&self, msg: String) -> ParseError {
        ParseError { pos: self.pos, msg }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.err(format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.s.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ParseError { pos: start, msg: format!("malformed number '{text}'") })
    }

    fn name(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(b'(') {
                return Err(self.err(format!("expected '(' after {name}")));
            }
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.err("expected ')'".into()));
            }
            if args.len() != f.arity() {
                return Err(ParseError {
                    pos: start,
                    msg: format!("{name} takes {} argument(s), got {}", f.arity(), args.len()),
                });
            }
            return Ok(Node::Call(f, args));
        }
        let var = match name {
            "x" => Some(Var::X),
            "z" => Some(Var::Z),
            "t" => Some(Var::T),
            "u" => Some(Var::U),
            _ => None,
        };
        if let Some(v) = var {
            return Ok(Node::Var(v));
        }
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        if let Some(&(_, v)) = self.constants.iter().find(|(n, _)| *n == name) {
            return Ok(Node::Num(v));
        }
        Err(ParseError { pos: start, msg: format!("unknown name '{name}'") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> f64 {
        Expr::parse(s, &[("ustar", 2.0)]).unwrap().eval(0.5, 0.25, 2.0, -1.0)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3"), 7.0);
        assert_eq!(ev("(1 + 2) * 3"), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(ev("-2 ^ 2"), -4.0);
        assert_eq!(ev("2 ^ -1"), 0.5);
        assert_eq!(ev("8 / 4 / 2"), 1.0);
        assert_eq!(ev("1 - 2 - 3"), -4.0);
        assert_eq!(ev("1.5e1 + .5 + 2E-1"), 15.7);
    }

    #[test]
    fn variables_functions_and_constants() {
        assert_eq!(ev("x + z + t + u"), 1.75);
        assert!((ev("sin(pi*x)") - 1.0).abs() < 1e-15);
        assert_eq!(ev("exp(0) + cos(0)"), 2.0);
        assert_eq!(ev("min(x, z) + max(t, u)"), 2.25);
        assert_eq!(ev("ustar * z"), 0.5);
        assert_eq!(Expr::parse("5/3", &[]).unwrap().constant(), Some(5.0 / 3.0));
        assert_eq!(Expr::parse("z", &[]).unwrap().constant(), None);
    }

    #[test]
    fn errors_carry_positions() {
        let e = Expr::parse("1 + foo", &[]).unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(e.msg.contains("foo"));
        assert!(Expr::parse("min(1)", &[]).is_err());
        assert!(Expr::parse("(1 + 2", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
        assert!(Expr::parse("", &[]).is_err());
        assert!(Expr::parse("sin 1", &[]).is_err());
        assert!(Expr::parse("ustar", &[]).is_err());
    }
}
