//! Truncated multivariate Taylor expansions ("jets") at a point.
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `c_α = ∂^α f / α!` for every multi-index `|α| ≤ K`, densely, in graded
//! order (all degree-0 terms, then degree 1, ...). Because the layout is
//! graded, truncating to a lower order is a prefix slice, and
//! multiplication is a plain convolution over a precomputed table.
//!
//! Layout tables are shared between all jets of the same `(n, K)` through a
//! process-wide cache.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet shapes differ: ({0}, {1}) vs ({2}, {3}) (n_vars, order)")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },
    #[error("derivative of order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
}

/// Exponent of a rational power `p/q` with `q > 0` and `gcd(p, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExponent {
    num: i64,
    den: i64,
}

impl RationalExponent {
    pub fn new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let g = num_integer::gcd(num, den);
        let sign = if den < 0 { -1 } else { 1 };
        Some(Self { num: sign * num / g, den: sign * den / g })
    }

    pub fn integer(p: i64) -> Self {
        Self { num: p, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Neg,
    Recip,
    Pow(RationalExponent),
}

impl ElementaryFn {
    /// Looks up a named function as it appears in expressions.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Sinh => "sinh",
            Self::Cosh => "cosh",
            Self::Tanh => "tanh",
            Self::Neg => "neg",
            Self::Recip => "recip",
            Self::Pow(_) => "pow",
        }
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, x: f64) -> f64 {
        match self {
            Self::Sin => x.sin(),
            Self::Cos => x.cos(),
            Self::Tan => x.tan(),
            Self::Exp => x.exp(),
            Self::Log => x.ln(),
            Self::Sqrt => x.sqrt(),
            Self::Sinh => x.sinh(),
            Self::Cosh => x.cosh(),
            Self::Tanh => x.tanh(),
            Self::Neg => -x,
            Self::Recip => 1.0 / x,
            Self::Pow(e) if e.is_integer() => x.powi(e.num() as i32),
            Self::Pow(e) => x.powf(e.to_f64()),
        }
    }
}

/// Multi-index layout shared by every jet with the same `(n_vars, order)`.
#[derive(Debug)]
pub struct Shape {
    n_vars: usize,
    order: usize,
    /// Flattened multi-indices, `n_vars` entries each, graded order.
    exponents: Vec<u8>,
    degree: Vec<usize>,
    /// `prefix_len[d]` = number of multi-indices of degree `≤ d`.
    prefix_len: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `α_i + α_j = α_k` and `|α_k| ≤ order`.
    mul_table: Vec<(u32, u32, u32)>,
    /// `raise[v][i]` = index of `α_i + e_v`, for every `|α_i| < order`.
    raise: Vec<Vec<u32>>,
}

impl Shape {
    fn build(n_vars: usize, order: usize) -> Shape {
        let mut exponents = Vec::new();
        let mut degree = Vec::new();
        let mut prefix_len = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut current = vec![0u8; n_vars];
            push_degree(&mut current, 0, d, &mut exponents);
            let count = exponents.len() / n_vars.max(1);
            degree.resize(count, d);
            prefix_len.push(count);
        }
        if n_vars == 0 {
            // Only the constant term exists.
            degree = vec![0];
            prefix_len = vec![1; order + 1];
        }
        let len = degree.len();
        let multi = |i: usize| &exponents[i * n_vars..(i + 1) * n_vars];
        let lookup: HashMap<Vec<u8>, usize> = (0..len).map(|i| (multi(i).to_vec(), i)).collect();

        let mut mul_table = Vec::new();
        for i in 0..len {
            let room = order - degree[i];
            for j in 0..prefix_len[room] {
                let sum: Vec<u8> = multi(i).iter().zip(multi(j)).map(|(a, b)| a + b).collect();
                let k = lookup[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }

        let lower = if order == 0 { 0 } else { prefix_len[order - 1] };
        let raise = (0..n_vars)
            .map(|v| {
                (0..lower)
                    .map(|i| {
                        let mut up = multi(i).to_vec();
                        up[v] += 1;
                        lookup[&up] as u32
                    })
                    .collect()
            })
            .collect();

        Shape { n_vars, order, exponents, degree, prefix_len, lookup, mul_table, raise }
    }

    fn get(n_vars: usize, order: usize) -> Arc<Shape> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Shape>>>> = OnceLock::new();
        thread_local! {
            static LOCAL: RefCell<HashMap<(usize, usize), Arc<Shape>>> = RefCell::new(HashMap::new());
        }
        LOCAL.with(|local| {
            local
                .borrow_mut()
                .entry((n_vars, order))
                .or_insert_with(|| {
                    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
                    let mut guard = cache.lock().expect("jet shape cache poisoned");
                    guard
                        .entry((n_vars, order))
                        .or_insert_with(|| Arc::new(Shape::build(n_vars, order)))
                        .clone()
                })
                .clone()
        })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.exponents[i * self.n_vars..(i + 1) * self.n_vars]
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.n_vars || alpha.iter().any(|&a| a > u8::MAX as usize) {
            return None;
        }
        let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        self.lookup.get(&key).copied()
    }
}

fn push_degree(current: &mut [u8], slot: usize, remaining: usize, out: &mut Vec<u8>) {
    if current.is_empty() {
        return;
    }
    if slot == current.len() - 1 {
        current[slot] = remaining as u8;
        out.extend_from_slice(current);
        current[slot] = 0;
        return;
    }
    for take in (0..=remaining).rev() {
        current[slot] = take as u8;
        push_degree(current, slot + 1, remaining - take, out);
    }
    current[slot] = 0;
}

/// Truncated Taylor expansion of a scalar function of `n_vars` variables.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<Shape>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.shape.n_vars)
            .field("order", &self.shape.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.compatible(other) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(n_vars: usize, order: usize) -> Jet {
        let shape = Shape::get(n_vars, order);
        let coeffs = vec![0.0; shape.len()];
        Jet { shape, coeffs }
    }

    pub fn constant(n_vars: usize, order: usize, value: f64) -> Jet {
        let mut jet = Jet::zero(n_vars, order);
        jet.coeffs[0] = value;
        jet
    }

    /// The jet of the coordinate function `x^var` at `point`.
    pub fn seed(point: &[f64], var: usize, order: usize) -> Result<Jet, JetError> {
        let n_vars = point.len();
        if var >= n_vars {
            return Err(JetError::IndexOutOfRange { index: var, n_vars });
        }
        let mut jet = Jet::constant(n_vars, order, point[var]);
        if order > 0 {
            let mut alpha = vec![0; n_vars];
            alpha[var] = 1;
            let i = jet.shape.index_of(&alpha).expect("linear term exists");
            jet.coeffs[i] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from its graded coefficient vector.
    pub fn from_coeffs(n_vars: usize, order: usize, coeffs: Vec<f64>) -> Option<Jet> {
        let shape = Shape::get(n_vars, order);
        (coeffs.len() == shape.len()).then_some(Jet { shape, coeffs })
    }

    pub fn n_vars(&self) -> usize {
        self.shape.n_vars
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The constant term, i.e. the function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `c_α`, or `None` when `|α|` exceeds the order.
    pub fn coeff(&self, alpha: &[usize]) -> Option<f64> {
        self.shape.index_of(alpha).map(|i| self.coeffs[i])
    }

    pub fn compatible(&self, other: &Jet) -> bool {
        Arc::ptr_eq(&self.shape, &other.shape)
            || (self.n_vars() == other.n_vars() && self.order() == other.order())
    }

    fn check_compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(JetError::ShapeMismatch(self.n_vars(), self.order(), other.n_vars(), other.order()))
        }
    }

    /// The mixed partial derivative `∂^α f = α! · c_α` at the base point.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64, JetError> {
        if alpha.len() != self.n_vars() {
            return Err(JetError::IndexOutOfRange { index: alpha.len(), n_vars: self.n_vars() });
        }
        let total: usize = alpha.iter().sum();
        if total > self.order() {
            return Err(JetError::OrderExceeded { requested: total, order: self.order() });
        }
        let factorial: f64 = alpha.iter().map(|&a| (1..=a).map(|k| k as f64).product::<f64>()).product();
        Ok(factorial * self.coeff(alpha).expect("index within order"))
    }

    /// First partial derivatives at the base point.
    pub fn gradient(&self) -> Result<Vec<f64>, JetError> {
        if self.order() == 0 {
            return Err(JetError::OrderExceeded { requested: 1, order: 0 });
        }
        Ok((0..self.n_vars()).map(|v| self.coeffs[1 + v]).collect())
    }

    /// The jet of `∂f/∂x^var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.n_vars() {
            return Err(JetError::IndexOutOfRange { index: var, n_vars: self.n_vars() });
        }
        if self.order() == 0 {
            return Err(JetError::OrderExceeded { requested: 1, order: 0 });
        }
        let mut out = Jet::zero(self.n_vars(), self.order() - 1);
        let raise = &self.shape.raise[var];
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let up = raise[i] as usize;
            let power = self.shape.multi_index(up)[var] as f64;
            *c = power * self.coeffs[up];
        }
        Ok(out)
    }

    /// Drops every term of degree above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let shape = Shape::get(self.n_vars(), order);
        let len = self.shape.prefix_len[order];
        Jet { shape, coeffs: self.coeffs[..len].to_vec() }
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let mut out = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.shape.mul_table {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet { shape: self.shape.clone(), coeffs: out })
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet { shape: self.shape.clone(), coeffs })
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet { shape: self.shape.clone(), coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `Σ a_m h^m` where `h` is the non-constant part of `self` and `a_m`
    /// the Taylor coefficients of the outer function at the constant term.
    fn compose(&self, outer: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = outer.len() - 1;
        let mut acc = Jet::constant(self.n_vars(), self.order(), outer[top]);
        for m in (0..top).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += outer[m];
        }
        acc
    }

    fn outer_coeffs(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..=self.order()).map(f).collect()
    }

    fn finite(self, function: &'static str, value: f64) -> Result<Jet, JetError> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(JetError::Domain { function, value })
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let c = self.value();
        if c == 0.0 || !c.is_finite() {
            return Err(JetError::Domain { function: "recip", value: c });
        }
        let inv = 1.0 / c;
        let outer = self.outer_coeffs(|m| if m % 2 == 0 { inv.powi(m as i32 + 1) } else { -inv.powi(m as i32 + 1) });
        self.compose(&outer).finite("recip", c)
    }

    pub fn powi(&self, p: i64) -> Result<Jet, JetError> {
        if p < 0 {
            return self.recip()?.powi(-p);
        }
        let mut result = Jet::constant(self.n_vars(), self.order(), 1.0);
        let mut base = self.clone();
        let mut e = p as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result.finite("pow", self.value())
    }

    pub fn pow(&self, exponent: RationalExponent) -> Result<Jet, JetError> {
        if exponent.is_integer() {
            return self.powi(exponent.num());
        }
        let c = self.value();
        let r = exponent.to_f64();
        if c == 0.0 && self.order() == 0 && r > 0.0 {
            return Ok(Jet::zero(self.n_vars(), 0));
        }
        if c <= 0.0 || !c.is_finite() {
            return Err(JetError::Domain { function: "pow", value: c });
        }
        let lead = c.powf(r);
        let mut outer = Vec::with_capacity(self.order() + 1);
        let mut term = lead;
        for m in 0..=self.order() {
            outer.push(term);
            term *= (r - m as f64) / ((m + 1) as f64 * c);
        }
        self.compose(&outer).finite("pow", c)
    }

    /// Composes an elementary function with this jet.
    pub fn apply(&self, f: ElementaryFn) -> Result<Jet, JetError> {
        let c = self.value();
        let fact = |m: usize| (1..=m).map(|k| k as f64).product::<f64>();
        let jet = match f {
            ElementaryFn::Neg => return Ok(-self),
            ElementaryFn::Recip => return self.recip(),
            ElementaryFn::Pow(e) => return self.pow(e),
            ElementaryFn::Sqrt => return self.pow(RationalExponent::new(1, 2).expect("nonzero")),
            ElementaryFn::Exp => {
                let e = c.exp();
                self.compose(&self.outer_coeffs(|m| e / fact(m)))
            }
            ElementaryFn::Log => {
                if c <= 0.0 || !c.is_finite() {
                    return Err(JetError::Domain { function: "log", value: c });
                }
                self.compose(&self.outer_coeffs(|m| match m {
                    0 => c.ln(),
                    _ => {
                        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                        sign / (m as f64 * c.powi(m as i32))
                    }
                }))
            }
            ElementaryFn::Sin | ElementaryFn::Cos => {
                let (s, co) = c.sin_cos();
                let cycle = match f {
                    ElementaryFn::Sin => [s, co, -s, -co],
                    _ => [co, -s, -co, s],
                };
                self.compose(&self.outer_coeffs(|m| cycle[m % 4] / fact(m)))
            }
            ElementaryFn::Sinh | ElementaryFn::Cosh => {
                let (sh, ch) = (c.sinh(), c.cosh());
                let pair = match f {
                    ElementaryFn::Sinh => [sh, ch],
                    _ => [ch, sh],
                };
                self.compose(&self.outer_coeffs(|m| pair[m % 2] / fact(m)))
            }
            ElementaryFn::Tan => {
                let cos = self.apply(ElementaryFn::Cos)?;
                let sec = cos.recip().map_err(|_| JetError::Domain { function: "tan", value: c })?;
                &self.apply(ElementaryFn::Sin)? * &sec
            }
            ElementaryFn::Tanh => {
                let sech = self.apply(ElementaryFn::Cosh)?.recip()?;
                &self.apply(ElementaryFn::Sinh)? * &sech
            }
        };
        jet.finite(f.name(), c)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet shape mismatch in add")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert!(self.compatible(rhs), "jet shape mismatch in sub");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Jet { shape: self.shape.clone(), coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet shape mismatch in mul")
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        assert!(self.compatible(rhs), "jet shape mismatch in add_assign");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        assert!(self.compatible(rhs), "jet shape mismatch in sub_assign");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Jet {
    /// `self += a * b` without allocating the product.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        assert!(self.compatible(a) && self.compatible(b), "jet shape mismatch in add_product");
        for &(i, j, k) in &self.shape.mul_table {
            self.coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
    }
}
