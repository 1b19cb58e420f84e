//! Coefficient fields for the series machinery.
//!
//! Everything downstream is generic over [`Coeff`]: exact arbitrary-precision
//! rationals ([`Rat`]) for identities, `f64` for asymptotic-size runs.
//! Combinatorial helpers (factorials, binomials, Stirling numbers) live here
//! too since both backends consume them through `from_rat`.

use num::bigint::BigInt;
use num::traits::{Signed, ToPrimitive, Zero};
use crate::{Error, Result};

/// Arbitrary-precision rational.
pub type Rat = num::BigRational;

/// Coefficient field: exact rationals or hardware floats.
///
/// All operations are by reference; implementations must be exact field
/// arithmetic up to the backend's precision. `from_rat` is the only entry
/// point for external exact data, so a backend controls its own rounding.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_u64(n: u64) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn to_f64(&self) -> f64;

    fn add_assign(&mut self, rhs: &Self) {
        *self = self.add(rhs);
    }
}

impl Coeff for Rat {
    fn zero() -> Self {
        num::Zero::zero()
    }
    fn one() -> Self {
        num::One::one()
    }
    fn is_zero(&self) -> bool {
        num::Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_u64(n: u64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Rational from an integer.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational p/q. q must be nonzero.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Converts a rational to the nearest f64, scaling down oversized numerators
/// and denominators so huge-but-balanced ratios don't collapse to NaN.
pub fn rat_to_f64(r: &Rat) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    if let (Some(x), Some(y)) = (numer.to_f64(), denom.to_f64()) {
        if x.is_finite() && y.is_finite() && y != 0.0 {
            return x / y;
        }
    }
    let bits = numer.bits().max(denom.bits());
    let shift = bits.saturating_sub(900);
    let sn = (numer >> shift).to_f64().unwrap_or(f64::NAN);
    let sd = (denom >> shift).to_f64().unwrap_or(f64::NAN);
    sn / sd
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"` or `"p/q"` (optionally signed) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational (expected `p` or `p/q`)"));
    match s.split_once('/') {
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(p))
        }
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("`{s}` has a zero denominator")));
            }
            Ok(Rat::new(p, q))
        }
    }
}

pub fn big_factorial(n: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

pub fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Falling factorial n·(n−1)⋯(n−r+1) over the integers; empty product for r = 0.
pub fn big_falling(n: u64, r: u64) -> BigInt {
    if r > n {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for i in 0..r {
        acc *= BigInt::from(n - i);
    }
    acc
}

/// Stirling numbers of the second kind S(r, ℓ) for 0 ≤ ℓ ≤ r ≤ r_max.
pub fn stirling2_table(r_max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::from(0); r_max + 1]; r_max + 1];
    s[0][0] = BigInt::from(1);
    for r in 1..=r_max {
        for l in 1..=r {
            let t = &s[r - 1][l] * BigInt::from(l as u64) + &s[r - 1][l - 1];
            s[r][l] = t;
        }
    }
    s
}

/// Signed Stirling numbers of the first kind s(r, ℓ): x^{falling r} = Σ_ℓ s(r,ℓ) x^ℓ.
pub fn stirling1_signed_table(r_max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::from(0); r_max + 1]; r_max + 1];
    s[0][0] = BigInt::from(1);
    for r in 1..=r_max {
        for l in 0..=r {
            let mut t = if l > 0 { s[r - 1][l - 1].clone() } else { BigInt::from(0) };
            t -= &s[r - 1][l] * BigInt::from((r - 1) as u64);
            s[r][l] = t;
        }
    }
    s
}

/// Σ_{i=0}^{n−1} i^p as an exact integer (the empty sum for n = 0; 0^0 = 1).
pub fn power_sum(n: u64, p: u64) -> BigInt {
    let mut acc = BigInt::from(0);
    for i in 0..n {
        let mut term = BigInt::from(1);
        for _ in 0..p {
            term *= BigInt::from(i);
        }
        acc += term;
    }
    acc
}

/// |a − b| as f64, for residual reporting.
pub fn rat_abs_f64(r: &Rat) -> f64 {
    rat_to_f64(&r.abs())
}
