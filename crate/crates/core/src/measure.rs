//! Finite mixtures of shifted Haar measures on balls and point masses.
//!
//! A component `(a, x, k)` is `a·m_{x+Λ_k}` for finite `k` and the point mass
//! `a·E_x` for `k = +∞`. The class is closed under convolution, reflection and
//! pushforward by nonzero scalars, and characteristic functions are finite sums
//! of characters times ball indicators, so everything here is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::characters::{pairing, CyclotomicValue};
use crate::error::{Error, Result};
use crate::padic::{format_rational, BallLevel, ExtInt, PAdicScalar, Prime, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    weight: BigRational,
    shift: PAdicScalar,
    level: BallLevel,
}

impl Component {
    pub fn new(weight: BigRational, shift: PAdicScalar, level: BallLevel) -> Self {
        Component { weight, shift, level }
    }

    pub fn ball(weight: BigRational, shift: PAdicScalar, k: i64) -> Self {
        Self::new(weight, shift, ExtInt::Finite(k))
    }

    pub fn point(weight: BigRational, shift: PAdicScalar) -> Self {
        Self::new(weight, shift, ExtInt::Infinity)
    }

    pub fn weight(&self) -> &BigRational {
        &self.weight
    }

    pub fn shift(&self) -> &PAdicScalar {
        &self.shift
    }

    pub fn level(&self) -> BallLevel {
        self.level
    }

    pub fn is_point(&self) -> bool {
        self.level.is_infinite()
    }

    /// The shift reduced modulo the ball, so equal balls get equal shifts.
    pub fn canonical_shift(&self) -> PAdicScalar {
        match self.level {
            ExtInt::Finite(k) => self.shift.reduce_mod_level(k),
            ExtInt::Infinity => self.shift.clone(),
        }
    }

    /// Smallest `t` with `Λ_t` inside the annihilator of the ball, i.e. the
    /// indicator factor of the characteristic function is `[v(y) ≥ t]`.
    pub fn threshold(&self) -> Option<i64> {
        self.level.finite().map(|k| 1 - k)
    }
}

/// A probability distribution on `Ω_p` from the shifted-Haar-mixture class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    prime: Prime,
    components: Vec<Component>,
}

/// Exact probabilities of the `Λ_n`-cosets met by the ball components, plus
/// the atoms of the point-mass components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Density {
    /// `n*`, the finest finite component level, if any ball is present.
    pub level: Option<i64>,
    /// Canonical coset representatives with their probabilities, sorted.
    pub cells: Vec<(PAdicScalar, BigRational)>,
    pub atoms: Vec<(PAdicScalar, BigRational)>,
}

/// The characteristic function of the shift-stripped distribution as a step
/// function of `v(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharFnProfile {
    /// threshold `t` ↦ total weight of balls whose indicator switches on at `v(y) = t`
    pub steps: BTreeMap<i64, BigRational>,
    /// limit as `v(y) → -∞`: the total point-mass weight
    pub tail: BigRational,
    /// per-component shifts, the character factors dropped by stripping
    pub shifts: Vec<PAdicScalar>,
}

impl CharFnProfile {
    pub fn value_at(&self, v: Valuation) -> BigRational {
        self.steps.iter().filter(|(t, _)| ExtInt::Finite(**t) <= v).fold(self.tail.clone(), |acc, (_, w)| acc + w)
    }

    pub fn thresholds(&self) -> Vec<i64> {
        self.steps.keys().copied().collect()
    }
}

impl Distribution {
    pub fn new(prime: Prime, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut total = BigRational::zero();
        for c in &components {
            if c.shift.prime() != prime {
                return Err(Error::PrimeMismatch(prime.get(), c.shift.prime().get()));
            }
            if c.weight <= BigRational::zero() {
                return Err(Error::NonPositiveWeight(format_rational(&c.weight)));
            }
            total += &c.weight;
        }
        if !total.is_one() {
            return Err(Error::WeightSum(format_rational(&total)));
        }
        Ok(Distribution { prime, components })
    }

    /// `m_{Λ_k}`.
    pub fn haar(prime: Prime, k: i64) -> Self {
        Self::haar_shifted(PAdicScalar::zero(prime), k)
    }

    /// `m_{x+Λ_k}`.
    pub fn haar_shifted(shift: PAdicScalar, k: i64) -> Self {
        let prime = shift.prime();
        Distribution { prime, components: vec![Component::ball(BigRational::one(), shift, k)] }
    }

    /// `E_x`.
    pub fn point_mass(x: PAdicScalar) -> Self {
        let prime = x.prime();
        Distribution { prime, components: vec![Component::point(BigRational::one(), x)] }
    }

    /// `a·m_{Λ_k1} + (1-a)·m_{Λ_k2}`, centered.
    pub fn two_level(prime: Prime, a: &BigRational, k1: i64, k2: i64) -> Result<Self> {
        let zero = PAdicScalar::zero(prime);
        Self::new(
            prime,
            vec![Component::ball(a.clone(), zero.clone(), k1), Component::ball(BigRational::one() - a, zero, k2)],
        )
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn has_point_mass(&self) -> bool {
        self.components.iter().any(Component::is_point)
    }

    pub fn point_mass_weight(&self) -> BigRational {
        self.components.iter().filter(|c| c.is_point()).fold(BigRational::zero(), |acc, c| acc + &c.weight)
    }

    /// Merge components with equal level and equal shift coset, sorted by
    /// `(level, representative)`.
    pub fn normalized(&self) -> Self {
        let mut merged: BTreeMap<(BallLevel, BigRational), BigRational> = BTreeMap::new();
        for c in &self.components {
            let key = (c.level, c.canonical_shift().into_value());
            *merged.entry(key).or_insert_with(BigRational::zero) += &c.weight;
        }
        let components = merged
            .into_iter()
            .map(|((level, shift), weight)| Component::new(weight, PAdicScalar::new(self.prime, shift), level))
            .collect();
        Distribution { prime: self.prime, components }
    }

    /// `μ̂(y) = Σ_j a_j (x_j, y) [v(y) ≥ 1 - k_j]`.
    pub fn charfn(&self, y: &PAdicScalar) -> Result<CyclotomicValue> {
        if y.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), y.prime().get()));
        }
        let v = y.valuation();
        let mut rational = BigRational::zero();
        let mut value = CyclotomicValue::zero(self.prime);
        for c in &self.components {
            if let Some(t) = c.threshold() {
                if v < ExtInt::Finite(t) {
                    continue;
                }
            }
            let angle = pairing(&c.shift, y)?;
            if angle.is_zero() {
                rational += &c.weight;
            } else {
                value = value.add(&CyclotomicValue::from_angle(&angle).scale(&c.weight));
            }
        }
        Ok(value.add(&CyclotomicValue::rational(self.prime, rational)))
    }

    pub fn convolve(&self, other: &Distribution) -> Result<Distribution> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        let mut components = Vec::with_capacity(self.components.len() * other.components.len());
        for a in &self.components {
            for b in &other.components {
                components.push(Component::new(&a.weight * &b.weight, &a.shift + &b.shift, a.level.min(b.level)));
            }
        }
        Ok(Distribution { prime: self.prime, components }.normalized())
    }

    /// `μ̄(E) = μ(-E)`.
    pub fn reflect(&self) -> Distribution {
        self.map_components(|c| Component::new(c.weight.clone(), -&c.shift, c.level))
    }

    /// Convolution with `E_x`.
    pub fn translate(&self, x: &PAdicScalar) -> Distribution {
        self.map_components(|c| Component::new(c.weight.clone(), &c.shift + x, c.level))
    }

    /// Law of `β·ξ` for `ξ ~ self`.
    pub fn pushforward(&self, beta: &PAdicScalar) -> Result<Distribution> {
        let k = beta.valuation().finite().ok_or(Error::ZeroAutomorphism)?;
        if beta.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), beta.prime().get()));
        }
        Ok(self.map_components(|c| Component::new(c.weight.clone(), &c.shift * beta, c.level.shifted(k))))
    }

    /// Same weights and levels, every shift set to zero.
    pub fn strip_shifts(&self) -> Distribution {
        let zero = PAdicScalar::zero(self.prime);
        self.map_components(|c| Component::new(c.weight.clone(), zero.clone(), c.level))
    }

    fn map_components(&self, f: impl Fn(&Component) -> Component) -> Distribution {
        Distribution { prime: self.prime, components: self.components.iter().map(f).collect() }
    }

    pub fn profile(&self) -> CharFnProfile {
        let mut steps = BTreeMap::new();
        for c in &self.components {
            if let Some(t) = c.threshold() {
                *steps.entry(t).or_insert_with(BigRational::zero) += &c.weight;
            }
        }
        CharFnProfile {
            steps,
            tail: self.point_mass_weight(),
            shifts: self.components.iter().map(|c| c.shift.clone()).collect(),
        }
    }

    pub fn canonical_density(&self) -> Density {
        let finest = self.components.iter().filter_map(|c| c.level.finite()).max();
        let p = self.prime;
        let mut cells: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        let mut atoms: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        for c in &self.components {
            match c.level {
                ExtInt::Infinity => {
                    *atoms.entry(c.shift.value().clone()).or_insert_with(BigRational::zero) += &c.weight;
                }
                ExtInt::Finite(k) => {
                    let n = finest.expect("a ball is present");
                    let base = c.shift.reduce_mod_level(k).into_value();
                    let step = p.rational_pow(k);
                    let count = p.get().pow((n - k) as u32);
                    let each = &c.weight / BigRational::from_integer(count.into());
                    for i in 0..count {
                        let rep = &base + &step * BigRational::from_integer(i.into());
                        *cells.entry(rep).or_insert_with(BigRational::zero) += &each;
                    }
                }
            }
        }
        let wrap =
            |m: BTreeMap<BigRational, BigRational>| m.into_iter().map(|(x, w)| (PAdicScalar::new(p, x), w)).collect();
        Density { level: finest, cells: wrap(cells), atoms: wrap(atoms) }
    }

    /// `Some(k)` when the distribution is a shift of `m_{Λ_k}`, with `k = +∞`
    /// for a point mass.
    pub fn idempotent_level(&self) -> Option<BallLevel> {
        let d = self.canonical_density();
        if d.cells.is_empty() {
            return (d.atoms.len() == 1).then_some(ExtInt::Infinity);
        }
        if !d.atoms.is_empty() {
            return None;
        }
        let n = d.level.expect("cells imply a finite level");
        let p = self.prime.get();
        let count = d.cells.len() as u64;
        let mut j = 0u32;
        let mut size = 1u64;
        while size < count {
            size *= p;
            j += 1;
        }
        if size != count {
            return None;
        }
        let k = n - j as i64;
        let first = &d.cells[0];
        let uniform = d.cells.iter().all(|(_, w)| *w == first.1);
        let coset = first.0.reduce_mod_level(k);
        let same_coset = d.cells.iter().all(|(x, _)| x.reduce_mod_level(k) == coset);
        (uniform && same_coset).then_some(ExtInt::Finite(k))
    }

    pub fn is_idempotent(&self) -> bool {
        self.idempotent_level().is_some()
    }

    pub fn is_degenerate(&self) -> bool {
        self.idempotent_level() == Some(ExtInt::Infinity)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let w = format_rational(&c.weight);
                match c.level {
                    ExtInt::Finite(k) => format!("{w}*m[{} + L{k}]", c.shift),
                    ExtInt::Infinity => format!("{w}*E[{}]", c.shift),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
