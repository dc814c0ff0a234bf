//! Arithmetic expressions over (x, y, z, t, tag) for coefficient fields,
//! boundary data and exact solutions.
//!
//! Precedence: `^` (right-associative) binds tighter than unary minus,
//! which binds tighter than `*`/`/`, which bind tighter than `+`/`-`.
//! The `tag` variable carries the owning entity tag of the element being
//! integrated, so piecewise-by-region coefficients need no conditionals.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
    T,
    Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    /// Pointwise evaluation with IEEE semantics (no error on NaN/Inf).
    pub fn eval(&self, x: f64, y: f64, z: f64, t: f64, tag: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Var(Var::Z) => z,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::Tag) => tag,
            Expr::Neg(e) => -e.eval(x, y, z, t, tag),
            Expr::Bin(op, a, b) => {
                let av = a.eval(x, y, z, t, tag);
                let bv = b.eval(x, y, z, t, tag);
                match op {
                    BinOp::Add => av + bv,
                    BinOp::Sub => av - bv,
                    BinOp::Mul => av * bv,
                    BinOp::Div => av / bv,
                    BinOp::Pow => av.powf(bv),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(x, y, z, t, tag)),
        }
    }

    /// Batch evaluation; errors with `NonFiniteValue` if any output is
    /// NaN or infinite.
    pub fn eval_batch(&self, points: &[[f64; 3]], t: f64, tags: &[i32]) -> Result<Vec<f64>> {
        assert_eq!(points.len(), tags.len(), "points/tags length mismatch");
        let mut out = Vec::with_capacity(points.len());
        for (p, &tag) in points.iter().zip(tags) {
            let v = self.eval(p[0], p[1], p[2], t, tag as f64);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    expr: self.to_string(),
                    x: p[0],
                    y: p[1],
                    z: p[2],
                });
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Evaluation of a single point with finiteness check.
    pub fn eval_checked(&self, p: [f64; 3], t: f64, tag: i32) -> Result<f64> {
        let v = self.eval(p[0], p[1], p[2], t, tag as f64);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                expr: self.to_string(),
                x: p[0],
                y: p[1],
                z: p[2],
            });
        }
        Ok(v)
    }

    /// True when the expression references the time variable.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::T,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_time(),
            Expr::Bin(_, a, b) => a.depends_on_time() || b.depends_on_time(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.prec() < min {
                write!(f, "(")?;
                print(f, e)?;
                write!(f, ")")
            } else {
                print(f, e)
            }
        }
        fn print(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
            match e {
                Expr::Num(v) => write!(f, "{v}"),
                Expr::Var(Var::X) => write!(f, "x"),
                Expr::Var(Var::Y) => write!(f, "y"),
                Expr::Var(Var::Z) => write!(f, "z"),
                Expr::Var(Var::T) => write!(f, "t"),
                Expr::Var(Var::Tag) => write!(f, "tag"),
                Expr::Neg(inner) => {
                    write!(f, "-")?;
                    wrap(f, inner, 3)
                }
                Expr::Bin(op, a, b) => {
                    let (sym, p) = match op {
                        BinOp::Add => (" + ", 1),
                        BinOp::Sub => (" - ", 1),
                        BinOp::Mul => ("*", 2),
                        BinOp::Div => ("/", 2),
                        BinOp::Pow => ("^", 4),
                    };
                    if *op == BinOp::Pow {
                        // right-associative
                        wrap(f, a, p + 1)?;
                        write!(f, "{sym}")?;
                        wrap(f, b, p)
                    } else {
                        wrap(f, a, p)?;
                        write!(f, "{sym}")?;
                        wrap(f, b, p + 1)
                    }
                }
                Expr::Call(func, arg) => {
                    write!(f, "{}(", func.name())?;
                    print(f, arg)?;
                    write!(f, ")")
                }
            }
        }
        print(f, self)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
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
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::SyntaxError {
                    offset: start,
                    detail: format!("bad number literal \"{text}\""),
                })?;
                tokens.push((Token::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::SyntaxError {
                    offset: i,
                    detail: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::SyntaxError {
                offset: off,
                detail: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let exp = self.factor()?; // right-assoc, signed exponent allowed
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "tan" => Func::Tan,
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        _ => return Err(Error::UnknownIdentifier { name, offset: off }),
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "closing parenthesis")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    match name.as_str() {
                        "x" => Ok(Expr::Var(Var::X)),
                        "y" => Ok(Expr::Var(Var::Y)),
                        "z" => Ok(Expr::Var(Var::Z)),
                        "t" => Ok(Expr::Var(Var::T)),
                        "tag" => Ok(Expr::Var(Var::Tag)),
                        "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                        _ => Err(Error::UnknownIdentifier { name, offset: off }),
                    }
                }
            }
            _ => Err(Error::SyntaxError {
                offset: off,
                detail: "expected a value".to_string(),
            }),
        }
    }
}

/// Parse an expression source string.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::SyntaxError {
            offset: p.offset(),
            detail: "trailing input".to_string(),
        });
    }
    Ok(e)
}

/// A coefficient slot of the problem: scalar, velocity vector, or
/// diffusion matrix (row-major components).
#[derive(Debug, Clone)]
pub enum CoefficientField {
    Scalar(Expr),
    Vector3(Box<[Expr; 3]>),
    Matrix3(Box<[Expr; 9]>),
}

impl CoefficientField {
    pub fn constant(v: f64) -> Self {
        CoefficientField::Scalar(Expr::Num(v))
    }

    /// Diagonal matrix field `k * I` from a scalar expression.
    pub fn isotropic(k: Expr) -> Self {
        let zero = || Expr::Num(0.0);
        CoefficientField::Matrix3(Box::new([
            k.clone(),
            zero(),
            zero(),
            zero(),
            k.clone(),
            zero(),
            zero(),
            zero(),
            k,
        ]))
    }

    pub fn as_scalar(&self) -> &Expr {
        match self {
            CoefficientField::Scalar(e) => e,
            _ => panic!("coefficient is not scalar"),
        }
    }

    pub fn depends_on_time(&self) -> bool {
        match self {
            CoefficientField::Scalar(e) => e.depends_on_time(),
            CoefficientField::Vector3(v) => v.iter().any(|e| e.depends_on_time()),
            CoefficientField::Matrix3(m) => m.iter().any(|e| e.depends_on_time()),
        }
    }
}
