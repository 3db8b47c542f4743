//! Characters of `Ω_p`.
//!
//! `Ω_p` is self-dual: the character `y` takes the value `exp(2πi·t)` at `x`,
//! where `t ∈ Z(p^∞)` is the [`Angle`] returned by [`pairing`]. Values of
//! characteristic functions live in prime-power cyclotomic fields, see
//! [`CyclotomicValue`].

mod cyclotomic;

use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

pub use self::cyclotomic::CyclotomicValue;
use crate::error::{Error, Result};
use crate::padic::{format_rational, int_valuation, ExtInt, PAdicScalar, Prime};

/// An element of `Z(p^∞)`: a rational in `[0, 1)` whose denominator is a power of `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    prime: Prime,
    value: BigRational,
}

impl Angle {
    /// Reduces `value` modulo 1. The denominator must be a power of `p`.
    pub fn new(prime: Prime, value: BigRational) -> Self {
        let frac = &value - value.floor();
        debug_assert!(
            frac.is_zero() || {
                let d = frac.denom();
                let m = int_valuation(d, prime);
                num_traits::pow(prime.big(), m as usize) == *d
            },
            "angle denominator must be a power of p"
        );
        Angle { prime, value: frac }
    }

    pub fn zero(prime: Prime) -> Self {
        Angle { prime, value: BigRational::zero() }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `m` such that the reduced denominator is `p^m`.
    pub fn order_exponent(&self) -> u32 {
        if self.value.is_zero() {
            0
        } else {
            int_valuation(self.value.denom(), self.prime) as u32
        }
    }

    fn check(&self, other: &Angle) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()))
        }
    }

    pub fn checked_add(&self, other: &Angle) -> Result<Angle> {
        self.check(other)?;
        Ok(Angle::new(self.prime, &self.value + &other.value))
    }

    pub fn neg(&self) -> Angle {
        Angle::new(self.prime, -&self.value)
    }

    pub fn scale(&self, n: i64) -> Angle {
        Angle::new(self.prime, &self.value * BigRational::from_integer(n.into()))
    }
}

impl std::ops::Add<&Angle> for &Angle {
    type Output = Angle;
    fn add(self, rhs: &Angle) -> Angle {
        self.checked_add(rhs).expect("angles share a prime")
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.value))
    }
}

/// `(x, y)` as an angle: `frac_p(x·y/p)`.
pub fn pairing(x: &PAdicScalar, y: &PAdicScalar) -> Result<Angle> {
    let prod = x.checked_mul(y)?;
    let p = x.prime();
    let scaled = PAdicScalar::new(p, prod.into_value() / BigRational::from_integer(p.big()));
    Ok(scaled.frac_p())
}

/// Digit index bounds `[lo, hi)` applied to both arguments of [`pairing_digit_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitWindow {
    pub lo: i64,
    pub hi: i64,
}

impl DigitWindow {
    /// Smallest window containing every digit pair that contributes a
    /// non-integer term.
    pub fn sufficient(x: &PAdicScalar, y: &PAdicScalar) -> DigitWindow {
        match (x.valuation(), y.valuation()) {
            (ExtInt::Finite(vx), ExtInt::Finite(vy)) => {
                DigitWindow { lo: vx.min(vy), hi: (1 - vx).max(1 - vy).max(vx.min(vy) + 1) }
            }
            _ => DigitWindow { lo: 0, hi: 0 },
        }
    }

    fn covers(&self, x: &PAdicScalar, y: &PAdicScalar) -> bool {
        let need = DigitWindow::sufficient(x, y);
        x.is_zero() || y.is_zero() || (self.lo <= need.lo && self.hi >= need.hi)
    }
}

/// The pairing computed literally from digits,
/// `Σ_n x_n Σ_{s ≥ n} y_{-s} p^{-s+n-1}`, keeping only the finitely many
/// terms inside `window`.
pub fn pairing_digit_sum(x: &PAdicScalar, y: &PAdicScalar, window: DigitWindow) -> Result<Angle> {
    if x.prime() != y.prime() {
        return Err(Error::PrimeMismatch(x.prime().get(), y.prime().get()));
    }
    let p = x.prime();
    if x.is_zero() || y.is_zero() {
        return Ok(Angle::zero(p));
    }
    if !window.covers(x, y) {
        return Err(Error::InvalidParameter(format!(
            "digit window [{}, {}) misses contributing digits",
            window.lo, window.hi
        )));
    }
    let xd = x.digits(window.lo, window.hi);
    let yd = y.digits(window.lo, window.hi);
    let mut total = BigRational::zero();
    for (i, &xn) in xd.iter().enumerate() {
        if xn == 0 {
            continue;
        }
        let n = window.lo + i as i64;
        // y_m with m = -s and s ≥ n, i.e. m ≤ -n
        for (j, &ym) in yd.iter().enumerate() {
            let m = window.lo + j as i64;
            if ym == 0 || m > -n {
                continue;
            }
            total += BigRational::from_integer((xn * ym).into()) * p.rational_pow(n + m - 1);
        }
    }
    let whole = total.numer().div_floor(total.denom());
    Ok(Angle::new(p, total - BigRational::from_integer(whole)))
}

/// `exp(2πi·t)` evaluated exactly.
pub fn character_value(x: &PAdicScalar, y: &PAdicScalar) -> Result<CyclotomicValue> {
    Ok(CyclotomicValue::from_angle(&pairing(x, y)?))
}
