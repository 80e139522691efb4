//! Tokenizer and expression grammar shared by every textual payload.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary ("*" unary)*
//! unary := "-" unary | power
//! power := atom ("^" (INT | "(" RATIONAL ")"))?
//! atom  := INT | IDENT | "(" expr ")" | "[" expr "]"
//! ```
//! Parsing stops at the first token that cannot continue an expression, so
//! expressions can be embedded in descriptors (`modulus=u^2+u+1 vars=...`).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Int(u64),
    Ident(String),
    Sym(char),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Int(n) => write!(f, "{n}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Sym(c) => write!(f, "{c}"),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse::<u64>()
                .map_err(|_| Error::parse(&s, "integer literal too large"))?;
            out.push(Token::Int(n));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),;=[]{}|".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::parse(c.to_string(), "unexpected character"));
        }
    }
    Ok(out)
}

/// An exact rational exponent `num/den` with `den > 0` and lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }
    pub fn int(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }
    pub fn is_integer(&self) -> bool {
        self.den == 1
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(u64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Rational),
    /// `[a]`, a Teichmüller representative; rings of characteristic `p`
    /// read it as `a` itself.
    Teich(Box<Expr>),
}

pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        Parser { toks, pos: 0 }
    }

    pub fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }
    pub fn peek_at(&self, k: usize) -> Option<&Token> {
        self.toks.get(self.pos + k)
    }
    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
    pub fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }
    pub fn pos(&self) -> usize {
        self.pos
    }

    fn here(&self) -> String {
        self.peek().map(|t| t.to_string()).unwrap_or_else(|| "<end>".into())
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(Error::parse(self.here(), format!("expected `{c}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Token::Ident(s)) => Ok(s),
            other => Err(Error::parse(
                other.map(|t| t.to_string()).unwrap_or_else(|| "<end>".into()),
                "expected identifier",
            )),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Token::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::parse(self.here(), format!("expected `{kw}`"))),
        }
    }

    pub fn expect_int(&mut self) -> Result<u64> {
        match self.next() {
            Some(Token::Int(n)) => Ok(n),
            other => Err(Error::parse(
                other.map(|t| t.to_string()).unwrap_or_else(|| "<end>".into()),
                "expected integer",
            )),
        }
    }

    /// `key =`
    pub fn expect_key(&mut self, key: &str) -> Result<()> {
        self.expect_keyword(key)?;
        self.expect_sym('=')
    }

    pub fn is_key(&self, key: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(s)) if s == key)
            && self.peek_at(1) == Some(&Token::Sym('='))
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(Error::parse(self.here(), "unexpected trailing input"))
        }
    }

    pub fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat_sym('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            let exp = if self.eat_sym('(') {
                let r = self.rational()?;
                self.expect_sym(')')?;
                r
            } else {
                Rational::int(self.expect_int()? as i64)
            };
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    pub fn rational(&mut self) -> Result<Rational> {
        let neg = self.eat_sym('-');
        let num = self.expect_int()? as i64;
        let den = if self.eat_sym('/') {
            self.expect_int()? as i64
        } else {
            1
        };
        if den == 0 {
            return Err(Error::parse("0", "zero denominator"));
        }
        Ok(Rational::new(if neg { -num } else { num }, den))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Int(n)) => Ok(Expr::Int(n)),
            Some(Token::Ident(s)) => Ok(Expr::Var(s)),
            Some(Token::Sym('(')) => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some(Token::Sym('[')) => {
                let e = self.expr()?;
                self.expect_sym(']')?;
                Ok(Expr::Teich(Box::new(e)))
            }
            other => Err(Error::parse(
                other.map(|t| t.to_string()).unwrap_or_else(|| "<end>".into()),
                "expected integer, variable or `(`",
            )),
        }
    }
}

/// Parses a complete expression string.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(&toks);
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Evaluates an expression in one variable with integer coefficients to a
/// dense coefficient list (low degree first). Used for moduli.
pub fn eval_dense_int(e: &Expr, var: &str) -> Result<Vec<i64>> {
    fn add(a: &[i64], b: &[i64], sign: i64) -> Vec<i64> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| a.get(i).copied().unwrap_or(0) + sign * b.get(i).copied().unwrap_or(0))
            .collect()
    }
    fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0i64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    let mut v = match e {
        Expr::Int(n) => vec![*n as i64],
        Expr::Var(s) if s == var => vec![0, 1],
        Expr::Var(s) => return Err(Error::UnknownVariable(s.clone())),
        Expr::Add(a, b) => add(&eval_dense_int(a, var)?, &eval_dense_int(b, var)?, 1),
        Expr::Sub(a, b) => add(&eval_dense_int(a, var)?, &eval_dense_int(b, var)?, -1),
        Expr::Mul(a, b) => mul(&eval_dense_int(a, var)?, &eval_dense_int(b, var)?),
        Expr::Neg(a) => eval_dense_int(a, var)?.iter().map(|x| -x).collect(),
        Expr::Teich(_) => return Err(Error::parse("[", "Teichmüller brackets are not allowed here")),
        Expr::Pow(a, r) => {
            if !r.is_integer() || r.num < 0 {
                return Err(Error::parse(
                    format!("^({}/{})", r.num, r.den),
                    "only non-negative integer powers are allowed here",
                ));
            }
            let base = eval_dense_int(a, var)?;
            let mut acc = vec![1i64];
            for _ in 0..r.num {
                acc = mul(&acc, &base);
            }
            acc
        }
    };
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_rational_powers() {
        let e = parse_expr("x^(1/3) * x^(-2/6) + 2*y").unwrap();
        let expected = Expr::Add(
            Box::new(Expr::Mul(
                Box::new(Expr::Pow(Box::new(Expr::Var("x".into())), Rational::new(1, 3))),
                Box::new(Expr::Pow(Box::new(Expr::Var("x".into())), Rational::new(-1, 3))),
            )),
            Box::new(Expr::Mul(Box::new(Expr::Int(2)), Box::new(Expr::Var("y".into())))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn dense_eval() {
        let e = parse_expr("(u+1)^2 - 2*u").unwrap();
        assert_eq!(eval_dense_int(&e, "u").unwrap(), vec![1, 0, 1]);
        assert!(eval_dense_int(&e, "v").is_err());
    }

    #[test]
    fn stops_at_keyword() {
        let toks = tokenize("u^2+u+1 vars=x").unwrap();
        let mut p = Parser::new(&toks);
        p.expr().unwrap();
        assert!(p.is_key("vars"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("x +").is_err());
        assert!(parse_expr("x $ y").is_err());
        assert!(parse_expr("x^(1/0)").is_err());
    }
}
