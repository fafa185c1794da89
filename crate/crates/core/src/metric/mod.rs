//! Metric definition files.
//!
//! A metric file is a list of statements separated by newlines or `;`,
//! with `#` starting a comment:
//!
//! ```text
//! dim = 2
//! coords = [x, y]
//! signature = [1, 1]      # optional, defaults to all +1
//! g[1,1] = 1
//! g[2,2] = sin(x)^2
//! ```
//!
//! Indices in `g[i,j]` are 1-based. Off-diagonal entries that are not
//! given are zero; every diagonal entry must be given.

mod expr;
mod parser;

use std::fmt;

use thiserror::Error;

pub use expr::{BinOp, Expr};
use parser::{parse_expr_tokens, tokenize, Tok, Token};

use crate::jet::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier '{name}' at {line}:{column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
    #[error("missing diagonal component g[{index},{index}]")]
    MissingDiagonal { index: usize },
    #[error("dimension mismatch: {what} has {found} entries, expected {expected}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("missing '{0}' declaration")]
    MissingDeclaration(&'static str),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax { line, column, message: message.into() }
    }
}

/// A metric in coordinates: one section of the bundle of non-degenerate
/// quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    coords: Vec<String>,
    signature: Vec<i8>,
    /// Upper triangle, row-major: (0,0), (0,1), ..., (1,1), ...
    components: Vec<Expr>,
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// Builds a metric from a full set of upper-triangle components.
    ///
    /// `components` is indexed by `(i, j)` with `i ≤ j`, 0-based.
    pub fn new(
        coords: Vec<String>,
        signature: Option<Vec<i8>>,
        mut component: impl FnMut(usize, usize) -> Expr,
    ) -> Result<MetricSpec, ParseError> {
        let n = coords.len();
        let signature = signature.unwrap_or_else(|| vec![1; n]);
        if signature.len() != n {
            return Err(ParseError::DimensionMismatch {
                what: "signature".into(),
                expected: n,
                found: signature.len(),
            });
        }
        let mut components = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let e = component(i, j);
                if let Some(max) = e.max_coord() {
                    if max >= n {
                        return Err(ParseError::DimensionMismatch {
                            what: format!("coordinate reference in g[{},{}]", i + 1, j + 1),
                            expected: n,
                            found: max + 1,
                        });
                    }
                }
                components.push(e);
            }
        }
        Ok(MetricSpec { coords, signature, components })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn is_riemannian(&self) -> bool {
        self.signature.iter().all(|&s| s > 0)
    }

    /// Component `g_ij` (0-based, symmetric).
    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[packed_index(self.dim(), i, j)]
    }

    /// Whether any component depends on coordinate `index`.
    pub fn depends_on(&self, index: usize) -> bool {
        self.components.iter().any(|e| e.references(index))
    }

    /// Parses an expression over this metric's coordinates.
    pub fn parse_expr(&self, text: &str) -> Result<Expr, ParseError> {
        parse_expression(text, &self.coords)
    }

    /// Resolves `name=value` assignments (values are constant expressions)
    /// into a coordinate vector.
    pub fn parse_point(&self, text: &str) -> Result<Vec<f64>, ParseError> {
        let values = self.parse_assignments(text, |value| Ok(vec![parse_constant(value)?]))?;
        Ok(values.into_iter().map(|v| v[0]).collect())
    }

    /// Resolves `name=lo:hi` assignments into per-coordinate intervals.
    pub fn parse_box(&self, text: &str) -> Result<Vec<(f64, f64)>, ParseError> {
        let values = self.parse_assignments(text, |value| {
            let (lo, hi) = value
                .split_once(':')
                .ok_or_else(|| ParseError::syntax(1, 1, format!("expected lo:hi, found '{value}'")))?;
            let (lo, hi) = (parse_constant(lo)?, parse_constant(hi)?);
            if !(lo <= hi) {
                return Err(ParseError::syntax(1, 1, format!("empty interval '{value}'")));
            }
            Ok(vec![lo, hi])
        })?;
        Ok(values.into_iter().map(|v| (v[0], v[1])).collect())
    }

    fn parse_assignments(
        &self,
        text: &str,
        mut value: impl FnMut(&str) -> Result<Vec<f64>, ParseError>,
    ) -> Result<Vec<Vec<f64>>, ParseError> {
        let mut out: Vec<Option<Vec<f64>>> = vec![None; self.dim()];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, rhs) = part
                .split_once('=')
                .ok_or_else(|| ParseError::syntax(1, 1, format!("expected name=value, found '{part}'")))?;
            let name = name.trim();
            let i = self.coords.iter().position(|c| c == name).ok_or_else(|| ParseError::UnknownIdentifier {
                name: name.to_string(),
                line: 1,
                column: 1,
            })?;
            if out[i].is_some() {
                return Err(ParseError::syntax(1, 1, format!("coordinate '{name}' given twice")));
            }
            out[i] = Some(value(rhs.trim())?);
        }
        let found = out.iter().filter(|v| v.is_some()).count();
        if found != self.dim() {
            return Err(ParseError::DimensionMismatch { what: "coordinate assignment".into(), expected: self.dim(), found });
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }
}

/// Component access shared by parsed metrics and derived ones (such as
/// pullbacks built in tests).
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;

    fn signature(&self) -> Vec<i8>;

    /// Full symmetric `n×n` matrix of component jets, row-major.
    fn component_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, JetError>;

    fn is_riemannian(&self) -> bool {
        self.signature().iter().all(|&s| s > 0)
    }
}

impl MetricSource for MetricSpec {
    fn dim(&self) -> usize {
        MetricSpec::dim(self)
    }

    fn signature(&self) -> Vec<i8> {
        self.signature.clone()
    }

    fn component_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
        let n = self.dim();
        if point.len() != n {
            return Err(JetError::IndexOutOfRange { index: point.len(), n_vars: n });
        }
        let seeds = (0..n).map(|v| Jet::seed(point, v, order)).collect::<Result<Vec<_>, _>>()?;
        let packed = self.components.iter().map(|e| e.eval_with(&seeds)).collect::<Result<Vec<_>, _>>()?;
        Ok((0..n * n).map(|k| packed[packed_index(n, k / n, k % n)].clone()).collect())
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        writeln!(f, "dim = {n}")?;
        writeln!(f, "coords = [{}]", self.coords.join(", "))?;
        let sig: Vec<String> = self.signature.iter().map(|s| s.to_string()).collect();
        writeln!(f, "signature = [{}]", sig.join(", "))?;
        for i in 0..n {
            for j in i..n {
                let e = self.component(i, j);
                if i == j || !e.is_zero_literal() {
                    writeln!(f, "g[{},{}] = {}", i + 1, j + 1, e.display(&self.coords))?;
                }
            }
        }
        Ok(())
    }
}

const RESERVED: &[&str] =
    &["pi", "e", "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "dim", "coords", "signature", "g"];

/// Parses an expression over the given coordinate names.
pub fn parse_expression(text: &str, coords: &[String]) -> Result<Expr, ParseError> {
    let mut tokens = tokenize(text)?;
    if let Some(pos) = tokens.iter().position(|t| t.tok == Tok::Sep) {
        if tokens[pos + 1..].iter().any(|t| t.tok != Tok::Sep) {
            let t = &tokens[pos];
            return Err(ParseError::syntax(t.line, t.column, "expected a single expression"));
        }
    }
    tokens.retain(|t| t.tok != Tok::Sep);
    let end = (1, text.lines().next().map_or(0, |l| l.chars().count()) + 1);
    parse_expr_tokens(&tokens, coords, end)
}

/// Evaluates a constant expression such as `pi/2`.
pub fn parse_constant(text: &str) -> Result<f64, ParseError> {
    Ok(parse_expression(text, &[])?.eval_f64(&[]))
}

fn expect(tokens: &[Token], pos: &mut usize, want: &Tok, what: &str) -> Result<(), ParseError> {
    match tokens.get(*pos) {
        Some(t) if t.tok == *want => {
            *pos += 1;
            Ok(())
        }
        Some(t) => Err(ParseError::syntax(t.line, t.column, format!("expected {what}"))),
        None => Err(ParseError::syntax(0, 0, format!("expected {what}"))),
    }
}

fn expect_int(tokens: &[Token], pos: &mut usize, what: &str) -> Result<(i64, usize, usize), ParseError> {
    let t = tokens.get(*pos).ok_or_else(|| ParseError::syntax(0, 0, format!("expected {what}")))?;
    let mut sign = 1;
    let mut idx = *pos;
    if let Tok::Op(c @ ('+' | '-')) = t.tok {
        sign = if c == '-' { -1 } else { 1 };
        idx += 1;
    }
    match tokens.get(idx) {
        Some(Token { tok: Tok::Number(text), .. }) if text.chars().all(|c| c.is_ascii_digit()) => {
            let value: i64 = text.parse().map_err(|_| ParseError::syntax(t.line, t.column, "integer too large"))?;
            *pos = idx + 1;
            Ok((sign * value, t.line, t.column))
        }
        _ => Err(ParseError::syntax(t.line, t.column, format!("expected {what}"))),
    }
}

/// Parses a metric definition file.
pub fn parse_metric(text: &str) -> Result<MetricSpec, ParseError> {
    let tokens = tokenize(text)?;
    let statements: Vec<&[Token]> = tokens.split(|t| t.tok == Tok::Sep).filter(|s| !s.is_empty()).collect();

    let mut dim: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut signature: Option<Vec<i8>> = None;
    // (i, j, rhs tokens, line, column), 0-based indices
    let mut entries: Vec<(usize, usize, &[Token], usize, usize)> = Vec::new();

    for stmt in statements {
        let head = &stmt[0];
        let Tok::Ident(keyword) = &head.tok else {
            return Err(ParseError::syntax(head.line, head.column, "expected 'dim', 'coords', 'signature' or 'g[i,j]'"));
        };
        let mut pos = 1;
        let duplicate = |what: &str| ParseError::syntax(head.line, head.column, format!("'{what}' declared twice"));
        match keyword.as_str() {
            "dim" => {
                expect(stmt, &mut pos, &Tok::Assign, "'='")?;
                let (value, line, column) = expect_int(stmt, &mut pos, "an integer dimension")?;
                if value < 2 {
                    return Err(ParseError::syntax(line, column, format!("dimension must be at least 2, found {value}")));
                }
                if dim.replace(value as usize).is_some() {
                    return Err(duplicate("dim"));
                }
            }
            "coords" => {
                expect(stmt, &mut pos, &Tok::Assign, "'='")?;
                expect(stmt, &mut pos, &Tok::LBracket, "'['")?;
                let mut names = Vec::new();
                loop {
                    match stmt.get(pos) {
                        Some(Token { tok: Tok::Ident(name), line, column }) => {
                            if RESERVED.contains(&name.as_str()) {
                                return Err(ParseError::syntax(*line, *column, format!("'{name}' is reserved")));
                            }
                            if names.contains(name) {
                                return Err(ParseError::syntax(*line, *column, format!("duplicate coordinate '{name}'")));
                            }
                            names.push(name.clone());
                            pos += 1;
                        }
                        Some(t) => return Err(ParseError::syntax(t.line, t.column, "expected a coordinate name")),
                        None => return Err(ParseError::syntax(head.line, head.column, "unterminated coordinate list")),
                    }
                    match stmt.get(pos).map(|t| &t.tok) {
                        Some(Tok::Comma) => pos += 1,
                        Some(Tok::RBracket) => {
                            pos += 1;
                            break;
                        }
                        _ => {
                            let t = stmt.get(pos).unwrap_or(head);
                            return Err(ParseError::syntax(t.line, t.column, "expected ',' or ']'"));
                        }
                    }
                }
                if coords.replace(names).is_some() {
                    return Err(duplicate("coords"));
                }
            }
            "signature" => {
                expect(stmt, &mut pos, &Tok::Assign, "'='")?;
                expect(stmt, &mut pos, &Tok::LBracket, "'['")?;
                let mut values = Vec::new();
                loop {
                    let (v, line, column) = expect_int(stmt, &mut pos, "+1 or -1")?;
                    if v != 1 && v != -1 {
                        return Err(ParseError::syntax(line, column, "signature entries must be +1 or -1"));
                    }
                    values.push(v as i8);
                    match stmt.get(pos).map(|t| &t.tok) {
                        Some(Tok::Comma) => pos += 1,
                        Some(Tok::RBracket) => {
                            pos += 1;
                            break;
                        }
                        _ => {
                            let t = stmt.get(pos).unwrap_or(head);
                            return Err(ParseError::syntax(t.line, t.column, "expected ',' or ']'"));
                        }
                    }
                }
                if signature.replace(values).is_some() {
                    return Err(duplicate("signature"));
                }
            }
            "g" => {
                expect(stmt, &mut pos, &Tok::LBracket, "'['")?;
                let (i, _, _) = expect_int(stmt, &mut pos, "a component index")?;
                expect(stmt, &mut pos, &Tok::Comma, "','")?;
                let (j, _, _) = expect_int(stmt, &mut pos, "a component index")?;
                expect(stmt, &mut pos, &Tok::RBracket, "']'")?;
                expect(stmt, &mut pos, &Tok::Assign, "'='")?;
                if i < 1 || j < 1 {
                    return Err(ParseError::syntax(head.line, head.column, "component indices are 1-based"));
                }
                let (i, j) = ((i - 1) as usize, (j - 1) as usize);
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                entries.push((i, j, &stmt[pos..], head.line, head.column));
            }
            other => {
                return Err(ParseError::syntax(head.line, head.column, format!("unknown statement '{other}'")));
            }
        }
        if pos < stmt.len() && keyword != "g" {
            let t = &stmt[pos];
            return Err(ParseError::syntax(t.line, t.column, "unexpected trailing input"));
        }
    }

    let dim = dim.ok_or(ParseError::MissingDeclaration("dim"))?;
    let coords = coords.ok_or(ParseError::MissingDeclaration("coords"))?;
    if coords.len() != dim {
        return Err(ParseError::DimensionMismatch { what: "coords".into(), expected: dim, found: coords.len() });
    }
    if let Some(sig) = &signature {
        if sig.len() != dim {
            return Err(ParseError::DimensionMismatch { what: "signature".into(), expected: dim, found: sig.len() });
        }
    }

    let mut slots: Vec<Option<Expr>> = vec![None; dim * (dim + 1) / 2];
    for (i, j, rhs, line, column) in entries {
        if j >= dim {
            return Err(ParseError::DimensionMismatch {
                what: format!("component index g[{},{}] at {line}:{column}", i + 1, j + 1),
                expected: dim,
                found: j + 1,
            });
        }
        let end = rhs.last().map_or((line, column), |t| (t.line, t.column + 1));
        let expr = parse_expr_tokens(rhs, &coords, end)?;
        let slot = &mut slots[packed_index(dim, i, j)];
        if slot.replace(expr).is_some() {
            return Err(ParseError::syntax(line, column, format!("g[{},{}] defined twice", i + 1, j + 1)));
        }
    }
    for i in 0..dim {
        if slots[packed_index(dim, i, i)].is_none() {
            return Err(ParseError::MissingDiagonal { index: i + 1 });
        }
    }
    MetricSpec::new(coords, signature, |i, j| slots[packed_index(dim, i, j)].take().unwrap_or_else(Expr::zero))
}
