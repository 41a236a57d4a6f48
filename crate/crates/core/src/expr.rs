//! A small arithmetic expression language for weights and nonlinearities.
//!
//! Grammar (`^` is right-associative and binds tighter than unary minus's
//! operand only):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! The only free variables are `t` and `s`; both bind to the single
//! evaluation argument. `pi` and `e` are constants.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
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
    Atan,
    Max,
    Min,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "atan" | "arctan" => Func::Atan,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan => "atan",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Max | Func::Min => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Parsed expression. Keeps the source text it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    source: String,
}

impl Expression {
    pub fn parse(src: &str) -> Result<Expression> {
        parse_expression(src)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluate with the free variable bound to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        eval_node(&self.root, x)
    }

    /// Variables referenced anywhere in the expression.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        collect_vars(&self.root, &mut out);
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)
    }
}

fn collect_vars(node: &Node, out: &mut Vec<Var>) {
    match node {
        Node::Num(_) => {}
        Node::Var(v) => {
            if !out.contains(v) {
                out.push(*v)
            }
        }
        Node::Neg(a) => collect_vars(a, out),
        Node::Bin(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Node::Call(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
    }
}

fn eval_node(node: &Node, x: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(_) => x,
        Node::Neg(a) => -eval_node(a, x),
        Node::Bin(op, a, b) => {
            let l = eval_node(a, x);
            let r = eval_node(b, x);
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                // guarded: x/0 evaluates to 0
                BinOp::Div => {
                    if r == 0.0 {
                        0.0
                    } else {
                        l / r
                    }
                }
                BinOp::Pow => l.powf(r),
            }
        }
        Node::Call(func, args) => {
            let a = eval_node(&args[0], x);
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Atan => a.atan(),
                Func::Max => a.max(eval_node(&args[1], x)),
                Func::Min => a.min(eval_node(&args[1], x)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part
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
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
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

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.unary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.atom()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.here();
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(Error::Parse {
                            pos: at,
                            msg: format!("unknown function '{name}'"),
                        });
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if args.len() != func.arity() {
                        return Err(Error::Parse {
                            pos: at,
                            msg: format!(
                                "{} takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "t" => Ok(Node::Var(Var::T)),
                    "s" => Ok(Node::Var(Var::S)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(Error::Parse {
                        pos: at,
                        msg: format!("unknown identifier '{name}'"),
                    }),
                }
            }
            _ => self.err("expected a number, identifier or '('"),
        }
    }
}

/// Parse `src` into an [`Expression`].
pub fn parse_expression(src: &str) -> Result<Expression> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let root = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(Expression {
        root,
        source: src.trim().to_string(),
    })
}

/// Parse a comma separated list of constant expressions, e.g. `3*pi, 1, 7`.
pub fn parse_constant_args(src: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(constant(&src[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !src[start..].trim().is_empty() || !out.is_empty() {
        out.push(constant(&src[start..])?);
    }
    Ok(out)
}

fn constant(src: &str) -> Result<f64> {
    let e = parse_expression(src)?;
    if !e.is_constant() {
        return Err(Error::Config(format!("'{}' must be a constant", src.trim())));
    }
    Ok(e.eval(0.0))
}

/// Split `name(args)` into its name and argument text.
pub fn split_call(src: &str) -> Option<(&str, &str)> {
    let src = src.trim();
    let open = src.find('(')?;
    if !src.ends_with(')') {
        return None;
    }
    let name = src[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    // the opening paren must match the final one
    let mut depth = 0;
    for (i, c) in src[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && open + i != src.len() - 1 {
                    return None;
                }
            }
            _ => {}
        }
    }
    Some((name, &src[open + 1..src.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_is_right_associative() {
        assert_eq!(parse_expression("2^3^2").unwrap().eval(0.0), 512.0);
    }

    #[test]
    fn sine_quarter_period() {
        let e = parse_expression("sin(2*3.141592653589793*t)").unwrap();
        assert!((e.eval(0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clamped_arctan_nonlinearity() {
        let e = parse_expression("max(0, 100*s*atan(abs(s)))").unwrap();
        let want = 100.0 * std::f64::consts::FRAC_PI_4;
        assert!((e.eval(1.0) - want).abs() < 1e-12);
        assert_eq!(e.eval(-2.0), 0.0);
        assert_eq!(e.variables(), vec![Var::S]);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let ev = |s: &str| parse_expression(s).unwrap().eval(0.0);
        assert_eq!(ev("1+2*3"), 7.0);
        assert_eq!(ev("(1+2)*3"), 9.0);
        assert_eq!(ev("-2^2"), 4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("8/4/2"), 1.0);
        assert_eq!(ev("1-2-3"), -4.0);
        assert_eq!(ev("1e-3*1000"), 1.0);
        assert_eq!(ev("min(3, max(1, 2))"), 2.0);
    }

    #[test]
    fn division_by_zero_is_guarded() {
        assert_eq!(parse_expression("1/t").unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn errors_carry_position() {
        match parse_expression("1 + foo") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_expression("sin(1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_expression("1 $ 2").is_err());
        assert!(parse_expression("bogus(1)").is_err());
        assert!(parse_expression("max(1)").is_err());
        assert!(parse_expression("1 2").is_err());
        assert!(parse_expression("").is_err());
    }

    #[test]
    fn constant_argument_lists() {
        let v = parse_constant_args("3*pi, 1, max(2,7)").unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 3.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(v[2], 7.0);
        assert!(parse_constant_args("t, 1").is_err());
        assert_eq!(split_call("sin_pm(2, 1, 3)"), Some(("sin_pm", "2, 1, 3")));
        assert_eq!(split_call("f(1)+g(2)"), None);
    }
}
