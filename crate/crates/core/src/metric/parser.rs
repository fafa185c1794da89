//! Lexer and recursive-descent parser for component expressions.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, `^`. The power
//! operator is right-associative and binds tighter than unary minus, so
//! `-x^2` is `-(x^2)`. Exponents must fold to rational constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{BinOp, Expr};
use super::ParseError;
use crate::jet::{ElementaryFn, RationalExponent};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Assign,
    /// Statement separator: newline or `;`.
    Sep,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |tok: Tok, out: &mut Vec<Token>| out.push(Token { tok, line: line_no, column });
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '0'..='9' | '.' => {
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
                    if text.matches('.').count() > 1 || text == "." {
                        return Err(ParseError::syntax(line_no, column, format!("malformed number '{text}'")));
                    }
                    push(Tok::Number(text), &mut out);
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    push(Tok::Ident(chars[start..i].iter().collect()), &mut out);
                }
                '+' | '-' | '*' | '/' | '^' => {
                    push(Tok::Op(c), &mut out);
                    i += 1;
                }
                '(' | ')' | '[' | ']' | ',' | '=' | ';' => {
                    let tok = match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        ',' => Tok::Comma,
                        '=' => Tok::Assign,
                        _ => Tok::Sep,
                    };
                    push(tok, &mut out);
                    i += 1;
                }
                other => {
                    return Err(ParseError::syntax(line_no, column, format!("unexpected character '{other}'")));
                }
            }
        }
        out.push(Token { tok: Tok::Sep, line: line_no, column: chars.len() + 1 });
    }
    Ok(out)
}

/// Parses a complete expression from a token slice.
pub(crate) fn parse_expr_tokens(tokens: &[Token], coords: &[String], end: (usize, usize)) -> Result<Expr, ParseError> {
    let mut parser = ExprParser { tokens, pos: 0, coords, end };
    let expr = parser.sum()?;
    if let Some(t) = parser.peek() {
        return Err(ParseError::syntax(t.line, t.column, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(expr)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Number(s) => format!("number '{s}'"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Op(c) => format!("operator '{c}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Assign => "'='".into(),
        Tok::Sep => "end of statement".into(),
    }
}

struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    coords: &'a [String],
    /// Position reported for errors at end of input.
    end: (usize, usize),
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn peek_op(&self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token { tok: Tok::Op(c), .. }) if ops.contains(c) => Some(*c),
            _ => None,
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.peek().map(|t| (t.line, t.column)).unwrap_or(self.end);
        ParseError::syntax(line, column, message)
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(op) = self.peek_op(&['+', '-']) {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if let Some(op) = self.peek_op(&['*', '/']) {
                self.pos += 1;
                let rhs = self.unary()?;
                let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
                lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
            } else if matches!(
                self.peek().map(|t| &t.tok),
                Some(Tok::Number(_) | Tok::Ident(_) | Tok::LParen)
            ) {
                return Err(self.error_here("implicit multiplication is not allowed; use '*'"));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek_op(&['-', '+']) {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(_) => {
                self.pos += 1;
                self.unary()
            }
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_op(&['^']).is_none() {
            return Ok(base);
        }
        let caret = self.next().cloned().expect("peeked");
        // Right operand at unary level gives right associativity and allows `x^-2`.
        let exponent = self.unary()?;
        let value = fold_rational(&exponent)
            .ok_or_else(|| ParseError::syntax(caret.line, caret.column, "exponent must be a rational constant"))?;
        let exponent = to_exponent(&value)
            .ok_or_else(|| ParseError::syntax(caret.line, caret.column, "exponent out of range"))?;
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(token) = self.next().cloned() else {
            let (line, column) = self.end;
            return Err(ParseError::syntax(line, column, "unexpected end of expression"));
        };
        match token.tok {
            Tok::Number(text) => {
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(token.line, token.column, format!("malformed number '{text}'")))?;
                Ok(Expr::Number(value))
            }
            Tok::LParen => {
                let inner = self.sum()?;
                match self.next() {
                    Some(Token { tok: Tok::RParen, .. }) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.error_here("expected ')'"))
                    }
                }
            }
            Tok::Ident(name) => {
                if let Some(f) = ElementaryFn::from_name(&name) {
                    match self.next() {
                        Some(Token { tok: Tok::LParen, .. }) => {}
                        _ => {
                            self.pos -= 1;
                            return Err(self.error_here(format!("expected '(' after {name}")));
                        }
                    }
                    let arg = self.sum()?;
                    match self.next() {
                        Some(Token { tok: Tok::RParen, .. }) => Ok(Expr::Call(f, Box::new(arg))),
                        _ => {
                            self.pos -= 1;
                            Err(self.error_here("expected ')'"))
                        }
                    }
                } else if name == "pi" {
                    Ok(Expr::Pi)
                } else if name == "e" {
                    Ok(Expr::E)
                } else if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    Ok(Expr::Coord(i))
                } else {
                    Err(ParseError::UnknownIdentifier { name, line: token.line, column: token.column })
                }
            }
            other => Err(ParseError::syntax(token.line, token.column, format!("unexpected {}", describe(&other)))),
        }
    }
}

/// Exact value of a decimal literal such as `2.5e-3`.
fn decimal_to_rational(value: f64) -> Option<BigRational> {
    // Literals reach here already parsed; recover the exact decimal through
    // the shortest round-trip representation.
    let text = format!("{value:e}");
    let (mantissa, exp) = text.split_once('e')?;
    let exp: i64 = exp.parse().ok()?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if scale.unsigned_abs() > 400 {
        return None;
    }
    Some(if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

fn fold_rational(expr: &Expr) -> Option<BigRational> {
    match expr {
        Expr::Number(v) => decimal_to_rational(*v),
        Expr::Neg(a) => fold_rational(a).map(|v| -v),
        Expr::Binary(op, a, b) => {
            let (a, b) = (fold_rational(a)?, fold_rational(b)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => (!b.is_zero()).then(|| a / b),
            }
        }
        Expr::Pow(a, e) if e.is_integer() && e.num().abs() <= 64 => {
            let base = fold_rational(a)?;
            if base.is_zero() && e.num() < 0 {
                return None;
            }
            let mut acc = BigRational::one();
            for _ in 0..e.num().abs() {
                acc *= &base;
            }
            Some(if e.num() < 0 { acc.recip() } else { acc })
        }
        _ => None,
    }
}

fn to_exponent(value: &BigRational) -> Option<RationalExponent> {
    let num = value.numer().to_i64()?;
    let den = value.denom().to_i64()?;
    if value.denom().is_negative() {
        return None;
    }
    RationalExponent::new(num, den)
}
