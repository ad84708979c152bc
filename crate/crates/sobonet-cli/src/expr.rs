//! Inline target expressions for one or two variables.
//!
//! Grammar: sums, products, quotients, unary minus, integer powers with
//! `^`, parentheses, the constant `pi`, variables `x` and `y`, and the
//! functions `sin`, `cos`, `exp`. Derivatives come from nested central
//! differences, which is accurate enough for coefficient fits and
//! measured-error grids at the orders the pipeline uses.

use sobonet_core::metrics::TargetFn;

/// Central-difference step. Nested differencing loses roughly h^2 in
/// truncation and machine-eps/h^order in noise; 5e-4 balances the two up
/// to third order.
const FD_STEP: f64 = 5e-4;

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Pow(a, n) => a.eval(x).powi(*n as i32),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
            Node::Exp(a) => a.eval(x).exp(),
        }
    }

    fn max_var(&self) -> usize {
        match self {
            Node::Num(_) => 0,
            Node::Var(i) => i + 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                a.max_var()
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

/// A parsed expression usable as a synthesis target. `dim` may exceed the
/// variables mentioned (a constant expression in dimension one).
pub struct ExprTarget {
    node: Node,
    dim: usize,
}

impl TargetFn for ExprTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn deriv(&self, x: &[f64], alpha: &[u8]) -> f64 {
        if let Some(axis) = alpha.iter().position(|&a| a > 0) {
            let mut lower = alpha.to_vec();
            lower[axis] -= 1;
            let mut plus = x.to_vec();
            plus[axis] += FD_STEP;
            let mut minus = x.to_vec();
            minus[axis] -= FD_STEP;
            (self.deriv(&plus, &lower) - self.deriv(&minus, &lower)) / (2.0 * FD_STEP)
        } else {
            self.node.eval(x)
        }
    }
}

/// Parses `text` into a target. `dim_hint` fixes the dimension when the
/// expression does not mention its last variable.
pub fn parse_target(text: &str, dim_hint: Option<usize>) -> Result<ExprTarget, String> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let node = p.expression()?;
    if p.pos != p.tokens.len() {
        return Err(format!("unexpected {:?} after a complete expression", p.tokens[p.pos]));
    }
    let used = node.max_var();
    let dim = match dim_hint {
        Some(d) if d < used => {
            return Err(format!("expression uses {used} variables but d = {d}"));
        }
        Some(d) => d,
        None => used.max(1),
    };
    if dim > 2 {
        return Err("inline expressions support at most two variables".into());
    }
    Ok(ExprTarget { node, dim })
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
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                let lit = &text[start..i];
                let v: f64 =
                    lit.parse().map_err(|_| format!("bad number literal {lit:?}"))?;
                out.push(Token::Num(v));
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_lowercase() {
                    i += 1;
                }
                out.push(Token::Ident(text[start..i].to_string()));
            }
            _ => return Err(format!("unexpected character {c:?}")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expression(&mut self) -> Result<Node, String> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node, String> {
        let mut node = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, String> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= 12.0 => {
                    self.pos += 1;
                    Ok(Node::Pow(Box::new(base), v as u32))
                }
                _ => Err("exponent must be an integer between 0 and 12".into()),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, String> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.atom()?)))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let node = self.expression()?;
                if self.peek() != Some(&Token::Close) {
                    return Err("missing closing parenthesis".into());
                }
                self.pos += 1;
                Ok(node)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Node::Var(0)),
                    "y" => Ok(Node::Var(1)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        if self.peek() != Some(&Token::Open) {
                            return Err(format!("{name} needs a parenthesized argument"));
                        }
                        self.pos += 1;
                        let arg = Box::new(self.expression()?);
                        if self.peek() != Some(&Token::Close) {
                            return Err("missing closing parenthesis".into());
                        }
                        self.pos += 1;
                        Ok(match name.as_str() {
                            "sin" => Node::Sin(arg),
                            "cos" => Node::Cos(arg),
                            _ => Node::Exp(arg),
                        })
                    }
                    _ => Err(format!(
                        "unknown name {name:?}; allowed: x, y, pi, sin, cos, exp"
                    )),
                }
            }
            _ => Err("expected a number, variable, or function".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let t = parse_target("sin(2*pi*x)/7", None).unwrap();
        assert_eq!(t.dim(), 1);
        let v = t.deriv(&[0.25], &[0]);
        assert!((v - 1.0 / 7.0).abs() < 1e-15, "got {v}");

        let t = parse_target("exp(-(x-0.5)^2 - (y-0.5)^2)", None).unwrap();
        assert_eq!(t.dim(), 2);
        let v = t.deriv(&[0.5, 0.5], &[0, 0]);
        assert!((v - 1.0).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn finite_difference_orders_match_closed_forms() {
        let t = parse_target("sin(2*pi*x)/7", None).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        for (alpha, want) in [
            (vec![1u8], tau * (tau * 0.3).cos() / 7.0),
            (vec![2u8], -tau * tau * (tau * 0.3).sin() / 7.0),
        ] {
            let got = t.deriv(&[0.3], &alpha);
            let rel = (got - want).abs() / want.abs().max(1.0);
            assert!(rel < 1e-5, "alpha {alpha:?}: got {got}, want {want}");
        }
    }

    #[test]
    fn rejects_out_of_whitelist_constructs() {
        assert!(parse_target("tan(x)", None).is_err());
        assert!(parse_target("x^2.5", None).is_err());
        assert!(parse_target("x + ", None).is_err());
        assert!(parse_target("x * z", None).is_err());
        assert!(parse_target("x + y", Some(1)).is_err());
        assert!(parse_target("sin x", None).is_err());
    }
}
