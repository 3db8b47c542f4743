use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::Angle;
use crate::padic::{format_rational, Prime};

/// An exact element of the `p^m`-th cyclotomic field `Q(ζ)`, `ζ = exp(2πi/p^m)`.
///
/// Stored in the power basis `1, ζ, …, ζ^{φ(p^m)-1}` modulo
/// `Φ_{p^m}(t) = Σ_{j<p} t^{j p^{m-1}}`, always at the smallest `m` whose field
/// contains the value. That makes the representation canonical, so the
/// derived `Eq` and `Hash` are value equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicValue {
    prime: Prime,
    order: u32,
    coeffs: Vec<BigRational>,
}

fn pow_usize(p: u64, e: u32) -> usize {
    usize::try_from(p.pow(e)).expect("cyclotomic order fits in usize")
}

fn phi(p: u64, m: u32) -> usize {
    if m == 0 {
        1
    } else {
        pow_usize(p, m - 1) * (p as usize - 1)
    }
}

/// Fold a cyclic vector indexed by exponents mod `p^m` into the power basis.
fn fold_cyclic(p: u64, m: u32, mut acc: Vec<BigRational>) -> Vec<BigRational> {
    if m == 0 {
        let total = acc.into_iter().fold(BigRational::zero(), |a, b| a + b);
        return vec![total];
    }
    let n = phi(p, m);
    let q = pow_usize(p, m - 1);
    for e in n..acc.len() {
        if acc[e].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut acc[e], BigRational::zero());
        // ζ^{(p-1)q + r} = -Σ_{j=0}^{p-2} ζ^{r + jq}
        let r = e - n;
        for j in 0..(p as usize - 1) {
            acc[r + j * q] -= &c;
        }
    }
    acc.truncate(n);
    acc
}

impl CyclotomicValue {
    pub fn rational(prime: Prime, q: BigRational) -> Self {
        CyclotomicValue { prime, order: 0, coeffs: vec![q] }
    }

    pub fn zero(prime: Prime) -> Self {
        Self::rational(prime, BigRational::zero())
    }

    pub fn one(prime: Prime) -> Self {
        Self::rational(prime, BigRational::one())
    }

    /// `exp(2πi·a)`.
    pub fn from_angle(angle: &Angle) -> Self {
        let p = angle.prime();
        let m = angle.order_exponent();
        let r = if m == 0 { 0 } else { usize::try_from(angle.value().numer().clone()).expect("angle numerator fits") };
        let mut acc = vec![BigRational::zero(); pow_usize(p.get(), m)];
        acc[r] = BigRational::one();
        Self::from_parts(p, m, fold_cyclic(p.get(), m, acc))
    }

    fn from_parts(prime: Prime, order: u32, coeffs: Vec<BigRational>) -> Self {
        let mut v = CyclotomicValue { prime, order, coeffs };
        v.demote();
        v
    }

    fn demote(&mut self) {
        let p = self.prime.get() as usize;
        loop {
            match self.order {
                0 => return,
                1 => {
                    if self.coeffs[1..].iter().all(Zero::is_zero) {
                        self.coeffs.truncate(1);
                        self.order = 0;
                    }
                    return;
                }
                _ => {
                    let sub = self.coeffs.iter().enumerate().all(|(i, c)| i % p == 0 || c.is_zero());
                    if !sub {
                        return;
                    }
                    self.coeffs = self.coeffs.iter().step_by(p).cloned().collect();
                    self.order -= 1;
                }
            }
        }
    }

    /// Coordinates after embedding into the `p^target`-th field, as a cyclic
    /// vector of length `p^target` (not yet folded).
    fn cyclic_at(&self, target: u32) -> Vec<BigRational> {
        debug_assert!(target >= self.order);
        let p = self.prime.get();
        let len = pow_usize(p, target);
        let stride = pow_usize(p, target - self.order);
        let mut acc = vec![BigRational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc[(i * stride) % len] += c;
            }
        }
        acc
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// The exponent `m` of the smallest cyclotomic field containing the value.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.order == 0 && self.coeffs[0].is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.order == 0).then(|| &self.coeffs[0])
    }

    fn assert_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "cyclotomic values over different primes");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_prime(other);
        if self.order == other.order {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
            return Self::from_parts(self.prime, self.order, coeffs);
        }
        let m = self.order.max(other.order);
        let mut acc = self.cyclic_at(m);
        for (slot, c) in acc.iter_mut().zip(other.cyclic_at(m)) {
            *slot += c;
        }
        Self::from_parts(self.prime, m, fold_cyclic(self.prime.get(), m, acc))
    }

    pub fn neg(&self) -> Self {
        CyclotomicValue { prime: self.prime, order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero(self.prime);
        }
        CyclotomicValue { prime: self.prime, order: self.order, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_prime(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.prime);
        }
        if let Some(q) = self.as_rational() {
            return other.scale(q);
        }
        if let Some(q) = other.as_rational() {
            return self.scale(q);
        }
        let p = self.prime.get();
        let m = self.order.max(other.order);
        let len = pow_usize(p, m);
        let a = self.cyclic_at(m);
        let b = other.cyclic_at(m);
        let mut acc = vec![BigRational::zero(); len];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                acc[(i + j) % len] += x * y;
            }
        }
        Self::from_parts(self.prime, m, fold_cyclic(p, m, acc))
    }

    /// Complex conjugation, `ζ ↦ ζ^{-1}`.
    pub fn conjugate(&self) -> Self {
        if self.order == 0 {
            return self.clone();
        }
        let p = self.prime.get();
        let len = pow_usize(p, self.order);
        let mut acc = vec![BigRational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            acc[(len - i) % len] += c;
        }
        Self::from_parts(self.prime, self.order, fold_cyclic(p, self.order, acc))
    }

    /// Nonzero power-basis terms as `(angle i/p^m, coefficient)`.
    pub fn terms(&self) -> Vec<(Angle, BigRational)> {
        let denom = BigInt::from(self.prime.get()).pow(self.order);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let angle = Angle::new(self.prime, BigRational::new(BigInt::from(i), denom.clone()));
                (angle, c.clone())
            })
            .collect()
    }
}

impl fmt::Display for CyclotomicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return f.write_str(&format_rational(q));
        }
        let parts: Vec<String> = self
            .terms()
            .iter()
            .map(|(a, c)| if a.is_zero() { format_rational(c) } else { format!("{}*e({})", format_rational(c), a) })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
