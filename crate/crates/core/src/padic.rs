//! Exact arithmetic in the rational subfield of the p-adic numbers.
//!
//! Every element is an exact rational `n/d`. Valuations, base-`p` digits and
//! coset representatives modulo the balls `Λ_k = p^k Δ_p` are computed on demand
//! from the rational, so no precision parameter appears anywhere.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::characters::Angle;
use crate::error::{Error, Result};

/// A rational prime, checked by trial division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2u64;
        while d.saturating_mul(d) <= p {
            if p % d == 0 {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^e` as an exact rational; `e` may be negative.
    pub fn rational_pow(self, e: i64) -> BigRational {
        let magnitude = num_traits::pow(self.big(), e.unsigned_abs() as usize);
        if e >= 0 {
            BigRational::from_integer(magnitude)
        } else {
            BigRational::new(BigInt::one(), magnitude)
        }
    }

    /// `p^e` as a machine integer, if it fits.
    pub fn checked_pow(self, e: u32) -> Option<u64> {
        self.0.checked_pow(e)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An integer extended by `+∞`.
///
/// Used both for valuations (`v(0) = +∞`) and for ball levels, where level
/// `+∞` is the trivial subgroup `{0}` and level `k` is `Λ_k`. The derived
/// ordering places `Infinity` above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtInt {
    Finite(i64),
    Infinity,
}

pub type Valuation = ExtInt;
pub type BallLevel = ExtInt;

impl ExtInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Finite(k) => Some(k),
            ExtInt::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtInt::Infinity)
    }

    /// Shift by a finite amount; `+∞` stays put.
    pub fn shifted(self, by: i64) -> Self {
        match self {
            ExtInt::Finite(k) => ExtInt::Finite(k + by),
            ExtInt::Infinity => ExtInt::Infinity,
        }
    }

    /// `Λ_self ⊇ Λ_other`.
    pub fn ball_contains(self, other: BallLevel) -> bool {
        self <= other
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Finite(k) => write!(f, "{k}"),
            ExtInt::Infinity => write!(f, "inf"),
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub(crate) fn int_valuation(n: &BigInt, p: Prime) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn rational_valuation(q: &BigRational, p: Prime) -> Valuation {
    if q.is_zero() {
        ExtInt::Infinity
    } else {
        ExtInt::Finite(int_valuation(q.numer(), p) - int_valuation(q.denom(), p))
    }
}

/// The integer `r ∈ [0, p^n)` with `q ≡ r (mod p^n Δ_p)`; requires `v(q) ≥ 0`.
pub(crate) fn residue(q: &BigRational, p: Prime, n: u32) -> BigInt {
    if n == 0 {
        return BigInt::zero();
    }
    let modulus = num_traits::pow(p.big(), n as usize);
    let den_inv = q.denom().modinv(&modulus).expect("denominator is prime to p");
    (q.numer() * den_inv).mod_floor(&modulus)
}

/// An exact element of the rational subfield of `Ω_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    prime: Prime,
    value: BigRational,
}

/// `α = p^k c` with `c` a p-adic unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutomorphismDecomposition {
    pub k: i64,
    /// `c mod p`, always in `1..p`.
    pub c0: u64,
    pub one_minus_alpha_valuation: Valuation,
}

impl PAdicScalar {
    pub fn new(prime: Prime, value: BigRational) -> Self {
        PAdicScalar { prime, value }
    }

    pub fn from_integer(prime: Prime, n: i64) -> Self {
        Self::new(prime, BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(prime: Prime, n: i64, d: i64) -> Self {
        Self::new(prime, BigRational::new(n.into(), d.into()))
    }

    pub fn zero(prime: Prime) -> Self {
        Self::new(prime, BigRational::zero())
    }

    pub fn one(prime: Prime) -> Self {
        Self::new(prime, BigRational::one())
    }

    /// `p^k`.
    pub fn p_power(prime: Prime, k: i64) -> Self {
        Self::new(prime, prime.rational_pow(k))
    }

    /// Parse `n` or `n/d` with an optional leading sign and no whitespace.
    pub fn parse(text: &str, prime: Prime) -> Result<Self> {
        parse_rational(text).map(|q| Self::new(prime, q))
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        rational_valuation(&self.value, self.prime)
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::new(self.prime, &self.value + &other.value))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::new(self.prime, &self.value - &other.value))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(Self::new(self.prime, &self.value * &other.value))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(self.prime, &self.value / &other.value))
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(self.prime, self.value.recip()))
    }

    /// Base-`p` digits `x_j` for `lo ≤ j < hi`.
    pub fn digits(&self, lo: i64, hi: i64) -> Vec<u64> {
        if hi <= lo {
            return Vec::new();
        }
        let width = (hi - lo) as usize;
        let v = match self.valuation() {
            ExtInt::Infinity => return vec![0; width],
            ExtInt::Finite(v) => v,
        };
        if hi <= v {
            return vec![0; width];
        }
        let start = lo.min(v);
        let scaled = &self.value * self.prime.rational_pow(-start);
        let mut r = residue(&scaled, self.prime, (hi - start) as u32);
        let pb = self.prime.big();
        let mut out = Vec::with_capacity(width);
        for j in start..hi {
            let (q, d) = r.div_rem(&pb);
            if j >= lo {
                out.push(u64::try_from(d).expect("digit below p"));
            }
            r = q;
        }
        out
    }

    /// Canonical representative of `self + Λ_n`: the truncated digit sum
    /// `Σ_{v(x) ≤ j < n} x_j p^j`, a nonnegative rational.
    pub fn reduce_mod_level(&self, n: i64) -> Self {
        let v = match self.valuation() {
            ExtInt::Infinity => return Self::zero(self.prime),
            ExtInt::Finite(v) => v,
        };
        if n <= v {
            return Self::zero(self.prime);
        }
        let unit = &self.value * self.prime.rational_pow(-v);
        let r = residue(&unit, self.prime, (n - v) as u32);
        Self::new(self.prime, BigRational::from_integer(r) * self.prime.rational_pow(v))
    }

    /// The p-adic fractional part: the unique `r/p^m ∈ [0,1)` with
    /// `self − r/p^m ∈ Δ_p`.
    pub fn frac_p(&self) -> Angle {
        let m = int_valuation(self.value.denom(), self.prime);
        if m == 0 {
            return Angle::zero(self.prime);
        }
        let pm = num_traits::pow(self.prime.big(), m as usize);
        let cofactor = self.value.denom() / &pm;
        let inv = cofactor.modinv(&pm).expect("cofactor is prime to p");
        let r = (self.value.numer() * inv).mod_floor(&pm);
        Angle::new(self.prime, BigRational::new(r, pm))
    }

    pub fn decompose_automorphism(&self) -> Result<AutomorphismDecomposition> {
        let k = self.valuation().finite().ok_or(Error::ZeroAutomorphism)?;
        let unit = &self.value * self.prime.rational_pow(-k);
        let c0 = residue(&unit, self.prime, 1);
        let one_minus = Self::new(self.prime, BigRational::one() - &self.value);
        Ok(AutomorphismDecomposition {
            k,
            c0: u64::try_from(c0).expect("residue below p"),
            one_minus_alpha_valuation: one_minus.valuation(),
        })
    }

    /// The unit part `c = α / p^{v(α)}`.
    pub fn unit_part(&self) -> Result<Self> {
        let k = self.valuation().finite().ok_or(Error::ZeroAutomorphism)?;
        Ok(Self::new(self.prime, &self.value * self.prime.rational_pow(-k)))
    }

    /// `self mod p^n` as an integer; requires `v(self) ≥ 0`.
    pub fn residue_mod(&self, n: u32) -> BigInt {
        debug_assert!(self.valuation() >= ExtInt::Finite(0));
        residue(&self.value, self.prime, n)
    }
}

pub(crate) fn parse_rational(text: &str) -> Result<BigRational> {
    let malformed = || Error::MalformedLiteral(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let unsigned = num.strip_prefix(['-', '+']).unwrap_or(num);
    if unsigned.is_empty() || !unsigned.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let n = BigInt::from_str(num).map_err(|_| malformed())?;
    let d = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let d = BigInt::from_str(d).map_err(|_| malformed())?;
            if d.is_zero() {
                return Err(Error::ZeroDenominator(text.to_string()));
            }
            d
        }
    };
    Ok(BigRational::new(n, d))
}

pub(crate) fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.value))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&PAdicScalar> for &PAdicScalar {
            type Output = PAdicScalar;
            fn $method(self, rhs: &PAdicScalar) -> PAdicScalar {
                self.$checked(rhs).expect("operands share a prime")
            }
        }
        impl $tr<PAdicScalar> for PAdicScalar {
            type Output = PAdicScalar;
            fn $method(self, rhs: PAdicScalar) -> PAdicScalar {
                (&self).$checked(&rhs).expect("operands share a prime")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &PAdicScalar {
    type Output = PAdicScalar;
    fn neg(self) -> PAdicScalar {
        PAdicScalar::new(self.prime, -&self.value)
    }
}

impl Neg for PAdicScalar {
    type Output = PAdicScalar;
    fn neg(self) -> PAdicScalar {
        PAdicScalar::new(self.prime, -self.value)
    }
}
