//! Component expressions and their evaluation on jets.

use std::fmt;

use crate::jet::{ElementaryFn, Jet, JetError, RationalExponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(&self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree for one metric component.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative literal; negation is always an explicit [`Expr::Neg`].
    Number(f64),
    Pi,
    E,
    /// Index into the coordinate list.
    Coord(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, RationalExponent),
    Call(ElementaryFn, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Number(0.0)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Number(v) if *v == 0.0)
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Number(_) | Expr::Pi | Expr::E => None,
            Expr::Coord(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_coord(),
            Expr::Binary(_, a, b) => a.max_coord().max(b.max_coord()),
        }
    }

    /// Whether the expression depends on coordinate `index`.
    pub fn references(&self, index: usize) -> bool {
        match self {
            Expr::Number(_) | Expr::Pi | Expr::E => false,
            Expr::Coord(i) => *i == index,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.references(index),
            Expr::Binary(_, a, b) => a.references(index) || b.references(index),
        }
    }

    /// The `order`-jet of the expression at `point`.
    pub fn eval(&self, point: &[f64], order: usize) -> Result<Jet, JetError> {
        let coords = (0..point.len())
            .map(|v| Jet::seed(point, v, order))
            .collect::<Result<Vec<_>, _>>()?;
        self.eval_with(&coords)
    }

    /// Evaluates with each coordinate replaced by the given jet.
    ///
    /// All coordinate jets must share a shape; they may be arbitrary
    /// functions, which is how metrics are pulled back along a map.
    pub fn eval_with(&self, coords: &[Jet]) -> Result<Jet, JetError> {
        let template = coords.first().ok_or(JetError::IndexOutOfRange { index: 0, n_vars: 0 })?;
        let constant = |v: f64| Jet::constant(template.n_vars(), template.order(), v);
        Ok(match self {
            Expr::Number(v) => constant(*v),
            Expr::Pi => constant(std::f64::consts::PI),
            Expr::E => constant(std::f64::consts::E),
            Expr::Coord(i) => coords
                .get(*i)
                .cloned()
                .ok_or(JetError::IndexOutOfRange { index: *i, n_vars: coords.len() })?,
            Expr::Neg(a) => -a.eval_with(coords)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_with(coords)?;
                let b = b.eval_with(coords)?;
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => &a * &b.recip()?,
                }
            }
            Expr::Pow(a, e) => a.eval_with(coords)?.pow(*e)?,
            Expr::Call(f, a) => a.eval_with(coords)?.apply(*f)?,
        })
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        match self {
            Expr::Number(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Coord(i) => point[*i],
            Expr::Neg(a) => -a.eval_f64(point),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval_f64(point), b.eval_f64(point));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(a, e) => ElementaryFn::Pow(*e).eval_f64(a.eval_f64(point)),
            Expr::Call(f, a) => f.eval_f64(a.eval_f64(point)),
        }
    }

    /// Fully parenthesized rendering that reparses to the same tree.
    pub fn display<'a>(&'a self, coords: &'a [String]) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, coords }
    }
}

struct ExprDisplay<'a> {
    expr: &'a Expr,
    coords: &'a [String],
}

impl<'a> fmt::Display for ExprDisplay<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'a Expr| ExprDisplay { expr: e, coords: self.coords };
        match self.expr {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Coord(i) => f.write_str(&self.coords[*i]),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Expr::Pow(a, e) if e.is_integer() && e.num() >= 0 => write!(f, "({}^{})", sub(a), e),
            Expr::Pow(a, e) => write!(f, "({}^({}))", sub(a), e),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}
