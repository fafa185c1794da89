//! Exact counts of independent scalar differential invariants of metrics:
//! `s_k` (order ≤ k), `δ_k` (pure order k), the Poincaré function
//! `P(z) = Σ δ_k z^k` and `Q(z) = Σ s_k z^k = P(z)/(1 − z)`.

mod rational;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

pub use rational::RationalFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("rational function has a pole of order {order} at z = 0")]
    PoleAtZero { order: u64 },
    #[error("series coefficient {index} is not an integer")]
    NonIntegralSeries { index: usize },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("internal: negative powers of z survive in P(z) for n = {0}")]
    LaurentRemainder(u32),
}

fn check_dim(n: u32) -> Result<(), CountingError> {
    if n < 2 {
        Err(CountingError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn exact_div(num: BigInt, den: BigInt) -> BigInt {
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "count formula is not integral");
    q
}

/// Number of independent invariants of order at most `k` in dimension `n`.
pub fn s_count(n: u32, k: u32) -> Result<BigInt, CountingError> {
    check_dim(n)?;
    if k < 2 {
        return Ok(BigInt::zero());
    }
    let (nb, kb) = (BigInt::from(n), BigInt::from(k));
    if n == 2 {
        let base = exact_div((&kb + 1) * (&kb - 2), BigInt::from(2));
        return Ok(if k == 2 { base + 1 } else { base });
    }
    let factor = &nb * &nb * (&kb - 1) - &nb * (&kb + 1);
    let body = exact_div(factor * binomial(u64::from(n + k), u64::from(k)), 2 * (&kb + 1));
    Ok(nb + body)
}

/// Number of independent invariants of pure order `k` in dimension `n`.
pub fn delta_count(n: u32, k: u32) -> Result<BigInt, CountingError> {
    check_dim(n)?;
    if k < 2 {
        return Ok(BigInt::zero());
    }
    let (nb, kb) = (BigInt::from(n), BigInt::from(k));
    if n == 2 {
        return Ok(if k == 3 { kb - 2 } else { kb - 1 });
    }
    if k == 2 {
        let r = exact_div((&nb + 2) * (&nb + 1) * &nb * (&nb - 3), BigInt::from(12));
        return Ok(nb + r);
    }
    let c = binomial(u64::from(n + k - 1), u64::from(k + 1));
    Ok(exact_div(&nb * (&kb - 1) * c, BigInt::from(2)))
}

/// The Poincaré function `P(z) = Σ_k δ_k z^k` in closed form.
pub fn poincare(n: u32) -> Result<RationalFunction, CountingError> {
    check_dim(n)?;
    let int = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    if n == 2 {
        let num = &RationalFunction::monomial(2) * &RationalFunction::polynomial(int(&[1, -1, 2, -1]));
        return Ok(&num * &RationalFunction::geometric_power(2));
    }
    let nn = RationalFunction::constant(n);
    let n_over_z = &nn * &RationalFunction::monomial(-1);
    let c2 = RationalFunction::constant(binomial(u64::from(n), 2));
    let c2_plus = RationalFunction::constant(binomial(u64::from(n) + 1, 2));
    let one_minus_z2 = RationalFunction::polynomial(int(&[1, 0, -1]));
    let tail = &RationalFunction::geometric_power(n) * &(&n_over_z - &c2_plus);
    let p = &(&n_over_z + &(&c2 * &one_minus_z2)) - &tail;
    if !p.is_regular_at_zero() {
        return Err(CountingError::LaurentRemainder(n));
    }
    Ok(p)
}

/// `Q(z) = P(z)/(1 − z) = Σ_k s_k z^k`.
pub fn generating_function(n: u32) -> Result<RationalFunction, CountingError> {
    Ok(&poincare(n)? * &RationalFunction::geometric_power(1))
}

/// Taylor coefficients `c_0 ..= c_{k_max}`.
pub fn series_expand(f: &RationalFunction, k_max: usize) -> Result<Vec<BigInt>, CountingError> {
    f.series(k_max)
}

pub fn pole_order_at_one(f: &RationalFunction) -> u32 {
    f.pole_order_at_one()
}
