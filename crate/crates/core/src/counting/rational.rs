use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::CountingError;

/// `z^shift · num(z) / den(z)` with integer coefficients, lowest degree first.
///
/// Always reduced: numerator and denominator share no polynomial factor
/// (including powers of `z`, which live in `shift`), the coefficients have
/// no common integer content, and the denominator's constant term is
/// positive. The zero function is `0 / 1` with shift 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Vec<BigInt>,
    den: Vec<BigInt>,
    shift: i64,
}

fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    trim(&mut out);
    out
}

fn shifted(p: &[BigInt], by: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); by];
    out.extend_from_slice(p);
    out
}

fn to_rational(p: &[BigInt]) -> Vec<BigRational> {
    p.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

/// Remainder of `a` modulo `b` over the rationals.
fn rem_q(mut a: Vec<BigRational>, b: &[BigRational]) -> Vec<BigRational> {
    let lead = b.last().expect("nonzero divisor");
    while a.len() >= b.len() && !a.is_empty() {
        let factor = a.last().expect("nonempty") / lead;
        let offset = a.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            a[offset + i] -= &factor * c;
        }
        a.pop();
        trim(&mut a);
    }
    a
}

/// Exact quotient of `a` by `b` over the rationals (`b` must divide `a`).
fn div_q(mut a: Vec<BigRational>, b: &[BigRational]) -> Vec<BigRational> {
    if a.len() < b.len() {
        return Vec::new();
    }
    let lead = b.last().expect("nonzero divisor");
    let mut q = vec![BigRational::zero(); a.len() - b.len() + 1];
    while a.len() >= b.len() && !a.is_empty() {
        let factor = a.last().expect("nonempty") / lead;
        let offset = a.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            a[offset + i] -= &factor * c;
        }
        q[offset] = factor;
        a.pop();
        trim(&mut a);
    }
    debug_assert!(a.is_empty(), "inexact polynomial division");
    q
}

fn gcd_q(a: &[BigInt], b: &[BigInt]) -> Vec<BigRational> {
    let mut x = to_rational(a);
    let mut y = to_rational(b);
    while !y.is_empty() {
        let r = rem_q(x, &y);
        x = y;
        y = r;
    }
    x
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn low_zeros(p: &[BigInt]) -> usize {
    p.iter().take_while(|c| c.is_zero()).count()
}

impl RationalFunction {
    /// Builds and reduces `z^shift · num / den`.
    pub fn new(num: Vec<BigInt>, den: Vec<BigInt>, shift: i64) -> Result<RationalFunction, CountingError> {
        let mut num = num;
        let mut den = den;
        trim(&mut num);
        trim(&mut den);
        if den.is_empty() {
            return Err(CountingError::ZeroDenominator);
        }
        if num.is_empty() {
            return Ok(RationalFunction::zero());
        }
        let nz = low_zeros(&num);
        let dz = low_zeros(&den);
        num.drain(..nz);
        den.drain(..dz);
        let shift = shift + nz as i64 - dz as i64;

        let g = gcd_q(&num, &den);
        if g.len() > 1 {
            let (n, d) = (div_q(to_rational(&num), &g), div_q(to_rational(&den), &g));
            // a common rational scale keeps the ratio intact
            let both: Vec<BigRational> = n.iter().chain(d.iter()).cloned().collect();
            let lcm = both.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            let scale = BigRational::from_integer(lcm);
            num = n.iter().map(|c| (c * &scale).to_integer()).collect();
            den = d.iter().map(|c| (c * &scale).to_integer()).collect();
        }
        let c = content(&num).gcd(&content(&den));
        let sign = if den[0].is_negative() { -BigInt::one() } else { BigInt::one() };
        let divisor = c * sign;
        for x in num.iter_mut().chain(den.iter_mut()) {
            *x = &*x / &divisor;
        }
        Ok(RationalFunction { num, den, shift })
    }

    pub fn zero() -> RationalFunction {
        RationalFunction { num: Vec::new(), den: vec![BigInt::one()], shift: 0 }
    }

    pub fn constant(c: impl Into<BigInt>) -> RationalFunction {
        RationalFunction::polynomial(vec![c.into()])
    }

    /// Integer polynomial, lowest degree first.
    pub fn polynomial(coeffs: Vec<BigInt>) -> RationalFunction {
        RationalFunction::new(coeffs, vec![BigInt::one()], 0).expect("unit denominator")
    }

    /// `z^k` for any integer `k`.
    pub fn monomial(k: i64) -> RationalFunction {
        RationalFunction { num: vec![BigInt::one()], den: vec![BigInt::one()], shift: k }
    }

    /// `1 / (1 − z)^m`.
    pub fn geometric_power(m: u32) -> RationalFunction {
        let mut den = vec![BigInt::one()];
        for _ in 0..m {
            den = poly_mul(&den, &[BigInt::one(), -BigInt::one()]);
        }
        RationalFunction::new(vec![BigInt::one()], den, 0).expect("nonzero denominator")
    }

    pub fn numerator(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &[BigInt] {
        &self.den
    }

    /// Power of `z` factored out of the numerator (negative: a pole at 0).
    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// True when no negative power of `z` survives reduction.
    pub fn is_regular_at_zero(&self) -> bool {
        self.is_zero() || self.shift >= 0
    }

    /// Numerator with the shift absorbed (`shift ≥ 0`), or denominator with
    /// it absorbed (`shift < 0`).
    fn absorbed(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        if self.shift >= 0 {
            (shifted(&self.num, self.shift as usize), self.den.clone())
        } else {
            (self.num.clone(), shifted(&self.den, (-self.shift) as usize))
        }
    }

    /// Exact Taylor coefficients `c_0 ..= c_{k_max}` at `z = 0`.
    pub fn series(&self, k_max: usize) -> Result<Vec<BigInt>, CountingError> {
        if !self.is_regular_at_zero() {
            return Err(CountingError::PoleAtZero { order: (-self.shift) as u64 });
        }
        let mut out = vec![BigInt::zero(); k_max + 1];
        if self.is_zero() {
            return Ok(out);
        }
        let start = self.shift as usize;
        let d0 = &self.den[0];
        for m in 0..=k_max.saturating_sub(start) {
            if start + m > k_max {
                break;
            }
            let mut acc = self.num.get(m).cloned().unwrap_or_default();
            for i in 1..self.den.len().min(m + 1) {
                acc -= &self.den[i] * &out[start + m - i];
            }
            let (q, r) = acc.div_rem(d0);
            if !r.is_zero() {
                return Err(CountingError::NonIntegralSeries { index: start + m });
            }
            out[start + m] = q;
        }
        Ok(out)
    }

    /// Multiplicity of the pole at `z = 1` (0 if there is none).
    pub fn pole_order_at_one(&self) -> u32 {
        fn multiplicity(p: &[BigInt]) -> u32 {
            let mut p = p.to_vec();
            let mut count = 0;
            loop {
                if p.is_empty() {
                    return count;
                }
                let sum = p.iter().fold(BigInt::zero(), |s, c| s + c);
                if !sum.is_zero() {
                    return count;
                }
                // synthetic division by (z − 1)
                let mut q = vec![BigInt::zero(); p.len() - 1];
                let mut carry = BigInt::zero();
                for i in (1..p.len()).rev() {
                    carry += &p[i];
                    q[i - 1] = carry.clone();
                }
                p = q;
                count += 1;
            }
        }
        if self.is_zero() {
            return 0;
        }
        multiplicity(&self.den).saturating_sub(multiplicity(&self.num))
    }

    pub fn checked_div(&self, other: &RationalFunction) -> Result<RationalFunction, CountingError> {
        if other.is_zero() {
            return Err(CountingError::ZeroDenominator);
        }
        RationalFunction::new(poly_mul(&self.num, &other.den), poly_mul(&self.den, &other.num), self.shift - other.shift)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let base = self.shift.min(other.shift);
        let a = shifted(&self.num, (self.shift - base) as usize);
        let b = shifted(&other.num, (other.shift - base) as usize);
        let num = poly_add(&poly_mul(&a, &other.den), &poly_mul(&b, &self.den));
        RationalFunction::new(num, poly_mul(&self.den, &other.den), base).expect("nonzero denominator")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: self.num.iter().map(|c| -c).collect(), den: self.den.clone(), shift: self.shift }
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, other: &RationalFunction) -> RationalFunction {
        self + &(-other)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(poly_mul(&self.num, &other.num), poly_mul(&self.den, &other.den), self.shift + other.shift)
            .expect("nonzero denominator")
    }
}

impl Div for &RationalFunction {
    type Output = RationalFunction;
    /// Panics on division by zero; see [`RationalFunction::checked_div`].
    fn div(self, other: &RationalFunction) -> RationalFunction {
        self.checked_div(other).expect("division by the zero rational function")
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &[BigInt]) -> fmt::Result {
    let mut first = true;
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let sign = if c.is_negative() { "-" } else { "+" };
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        first = false;
        let abs = c.abs();
        match (i, abs.is_one()) {
            (0, _) => write!(f, "{abs}")?,
            (1, true) => write!(f, "z")?,
            (1, false) => write!(f, "{abs}*z")?,
            (_, true) => write!(f, "z^{i}")?,
            (_, false) => write!(f, "{abs}*z^{i}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den) = self.absorbed();
        write!(f, "(")?;
        write_poly(f, &num)?;
        write!(f, ") / (")?;
        write_poly(f, &den)?;
        write!(f, ")")
    }
}
