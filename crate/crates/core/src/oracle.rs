//! Brute-force independence test on a finite quotient `Λ_{W_low}/Λ_{W_high}`.
//!
//! Distributions are projected to the cyclic group of order
//! `p^(W_high - W_low)`, the joint law of `(ξ1 + ξ2, ξ1 + αξ2)` is enumerated
//! exactly, and independence is read off as factorization into the product of
//! the marginals. No characteristic functions are involved.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::independence::{IndependenceVerdict, Method, VerificationWindow};
use crate::measure::Distribution;
use crate::padic::{ExtInt, PAdicScalar, Prime};

/// Largest quotient order the oracle enumerates.
const MAX_ORDER: u64 = 1 << 14;

/// A distribution on `Λ_{w_low}/Λ_{w_high}`. Element `i` stands for the
/// canonical representative of `i·p^{w_low}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientDistribution {
    prime: Prime,
    w_low: i64,
    w_high: i64,
    masses: BTreeMap<u64, BigRational>,
    /// Whether the projection determines the distribution (no point masses).
    faithful: bool,
}

fn order(prime: Prime, w_low: i64, w_high: i64) -> Result<u64> {
    if w_low >= w_high {
        return Err(Error::WindowInconsistent { low: w_low, high: w_high, reason: "empty quotient".into() });
    }
    u32::try_from(w_high - w_low)
        .ok()
        .and_then(|n| prime.checked_pow(n))
        .filter(|&m| m <= MAX_ORDER)
        .ok_or_else(|| Error::WindowTooLarge(format!("{prime}^{} elements", w_high - w_low)))
}

fn index_of(x: &PAdicScalar, w_low: i64, w_high: i64) -> u64 {
    let p = x.prime();
    let scaled = PAdicScalar::new(p, x.value() / p.rational_pow(w_low));
    scaled.residue_mod((w_high - w_low) as u32).to_u64().expect("index below the quotient order")
}

impl QuotientDistribution {
    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn window(&self) -> (i64, i64) {
        (self.w_low, self.w_high)
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    pub fn representative(&self, index: u64) -> PAdicScalar {
        let x = BigRational::from_integer(BigInt::from(index)) * self.prime.rational_pow(self.w_low);
        PAdicScalar::new(self.prime, x).reduce_mod_level(self.w_high)
    }

    /// Canonical representatives with their probabilities, by index.
    pub fn probabilities(&self) -> Vec<(PAdicScalar, BigRational)> {
        self.masses.iter().map(|(&i, w)| (self.representative(i), w.clone())).collect()
    }

    pub fn mass_of(&self, x: &PAdicScalar) -> BigRational {
        if x.valuation() < ExtInt::Finite(self.w_low) {
            return BigRational::zero();
        }
        self.masses.get(&index_of(x, self.w_low, self.w_high)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Law of the sum of independent variables, computed in the quotient.
    pub fn convolve(&self, other: &QuotientDistribution) -> Result<QuotientDistribution> {
        if self.window() != other.window() || self.prime != other.prime {
            return Err(Error::InvalidParameter("quotients differ".into()));
        }
        let m = order(self.prime, self.w_low, self.w_high)?;
        let mut masses = BTreeMap::new();
        for (&i, a) in &self.masses {
            for (&j, b) in &other.masses {
                *masses.entry((i + j) % m).or_insert_with(BigRational::zero) += a * b;
            }
        }
        Ok(QuotientDistribution { masses, faithful: self.faithful && other.faithful, ..self.clone() })
    }
}

pub fn project_to_quotient(mu: &Distribution, w_low: i64, w_high: i64) -> Result<QuotientDistribution> {
    let p = mu.prime();
    let m = order(p, w_low, w_high)?;
    let mut masses = BTreeMap::new();
    for c in mu.components() {
        let shift = c.canonical_shift();
        if shift.valuation() < ExtInt::Finite(w_low) {
            return Err(Error::SupportExceedsWindow(format!("shift {shift} lies outside L{w_low}")));
        }
        let start = index_of(&shift, w_low, w_high);
        match c.level() {
            ExtInt::Infinity => {
                *masses.entry(start).or_insert_with(BigRational::zero) += c.weight();
            }
            ExtInt::Finite(k) if k < w_low || k > w_high => {
                return Err(Error::SupportExceedsWindow(format!("ball level {k} outside [{w_low}, {w_high}]")));
            }
            ExtInt::Finite(k) => {
                let stride = p.get().pow((k - w_low) as u32);
                let count = m / stride;
                let each = c.weight() / BigRational::from_integer(count.into());
                for i in 0..count {
                    *masses.entry((start + i * stride) % m).or_insert_with(BigRational::zero) += &each;
                }
            }
        }
    }
    Ok(QuotientDistribution { prime: p, w_low, w_high, masses, faithful: !mu.has_point_mass() })
}

/// Exact joint law of `(g1 + g2, g1 + αg2)` on the quotient, stored as
/// integer numerators over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointLaw {
    prime: Prime,
    w_low: i64,
    w_high: i64,
    numerators: HashMap<(u64, u64), u128>,
    denominator: u128,
}

fn common_numerators(q: &QuotientDistribution) -> Result<(Vec<(u64, u128)>, u128)> {
    let overflow = || Error::WindowTooLarge("probability denominators overflow".into());
    let mut den = BigInt::from(1);
    for w in q.masses.values() {
        den = den.lcm(w.denom());
    }
    let entries = q
        .masses
        .iter()
        .map(|(&i, w)| (w.numer() * (&den / w.denom())).to_u128().map(|n| (i, n)).ok_or_else(overflow))
        .collect::<Result<Vec<_>>>()?;
    Ok((entries, den.to_u128().ok_or_else(overflow)?))
}

impl JointLaw {
    pub fn probability(&self, s: u64, t: u64) -> BigRational {
        let n = self.numerators.get(&(s, t)).copied().unwrap_or(0);
        BigRational::new(BigInt::from(n), BigInt::from(self.denominator))
    }

    pub fn support_size(&self) -> usize {
        self.numerators.len()
    }

    fn marginal_numerators(&self, first: bool) -> HashMap<u64, u128> {
        let mut out = HashMap::new();
        for (&(s, t), &n) in &self.numerators {
            *out.entry(if first { s } else { t }).or_insert(0) += n;
        }
        out
    }

    fn to_quotient(&self, numerators: HashMap<u64, u128>) -> QuotientDistribution {
        let masses = numerators
            .into_iter()
            .map(|(i, n)| (i, BigRational::new(BigInt::from(n), BigInt::from(self.denominator))))
            .collect();
        QuotientDistribution { prime: self.prime, w_low: self.w_low, w_high: self.w_high, masses, faithful: false }
    }

    /// Law of `L1`.
    pub fn first_marginal(&self) -> QuotientDistribution {
        self.to_quotient(self.marginal_numerators(true))
    }

    /// Law of `L2`.
    pub fn second_marginal(&self) -> QuotientDistribution {
        self.to_quotient(self.marginal_numerators(false))
    }

    /// `P(s, t) = P(s)·P(t)` for every pair, including pairs off the support.
    pub fn factorizes(&self) -> Result<bool> {
        let m1 = self.marginal_numerators(true);
        let m2 = self.marginal_numerators(false);
        if m1.len() * m2.len() != self.numerators.len() {
            return Ok(false);
        }
        for (&(s, t), &n) in &self.numerators {
            let lhs = n
                .checked_mul(self.denominator)
                .ok_or_else(|| Error::WindowTooLarge("joint law numerators overflow".into()))?;
            let rhs = m1[&s]
                .checked_mul(m2[&t])
                .ok_or_else(|| Error::WindowTooLarge("joint law numerators overflow".into()))?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn joint_law(q1: &QuotientDistribution, q2: &QuotientDistribution, alpha: &PAdicScalar) -> Result<JointLaw> {
    if q1.window() != q2.window() || q1.prime != q2.prime || alpha.prime() != q1.prime {
        return Err(Error::InvalidParameter("quotients differ".into()));
    }
    if alpha.valuation() < ExtInt::Finite(0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} does not map the quotient to itself")));
    }
    let (w_low, w_high) = q1.window();
    let m = order(q1.prime, w_low, w_high)?;
    let a = alpha.residue_mod((w_high - w_low) as u32).to_u64().expect("below the order");
    let (e1, d1) = common_numerators(q1)?;
    let (e2, d2) = common_numerators(q2)?;
    let overflow = || Error::WindowTooLarge("joint law denominators overflow".into());
    let denominator = d1.checked_mul(d2).ok_or_else(overflow)?;
    let mut numerators = HashMap::new();
    for &(g1, n1) in &e1 {
        for &(g2, n2) in &e2 {
            let s = (g1 + g2) % m;
            let t = ((u128::from(g1) + u128::from(a) * u128::from(g2)) % u128::from(m)) as u64;
            *numerators.entry((s, t)).or_insert(0u128) += n1 * n2;
        }
    }
    Ok(JointLaw { prime: q1.prime, w_low, w_high, numerators, denominator })
}

/// `(ξ2, α)` replaced by `(αξ2, α^{-1})` when `v(α) < 0`.
fn reduce(mu2: &Distribution, alpha: &PAdicScalar) -> Result<(Distribution, PAdicScalar, bool)> {
    if alpha.is_zero() {
        return Err(Error::ZeroAutomorphism);
    }
    if alpha.valuation() < ExtInt::Finite(0) {
        Ok((mu2.pushforward(alpha)?, alpha.inverse()?, true))
    } else {
        Ok((mu2.clone(), alpha.clone(), false))
    }
}

/// A quotient on which factorization is equivalent to independence for
/// ball-only inputs: `W_low` covers every support, `W_high` is the finest
/// level, refined by `v(1 - α)` when `α ≡ 1` to first order and by one step
/// when `α = 1`.
pub fn oracle_window(mu1: &Distribution, mu2: &Distribution, alpha: &PAdicScalar) -> Result<VerificationWindow> {
    let (mu2, alpha_r, reduced) = reduce(mu2, alpha)?;
    let components = || mu1.components().iter().chain(mu2.components());
    let finest = components().filter_map(|c| c.level().finite()).max();
    let w_low = components()
        .flat_map(|c| [c.level().finite(), c.canonical_shift().valuation().finite()])
        .flatten()
        .min()
        .unwrap_or(0);
    let decomposition = alpha_r.decompose_automorphism()?;
    let refine = match (decomposition.k, decomposition.one_minus_alpha_valuation) {
        (0, ExtInt::Infinity) => 1,
        (0, ExtInt::Finite(e)) => e.max(0),
        _ => 0,
    };
    let w_high = (finest.unwrap_or(w_low) + refine).max(w_low + 1);
    Ok(VerificationWindow { prime: alpha.prime(), w_low, w_high, deep_probes: 0, thresholds: Vec::new(), reduced })
}

/// Factorization test on the quotient given by `window`, which refers to the
/// problem after the `v(α) < 0` reduction. A dependent verdict is always
/// conclusive; an independent one is conclusive for ball-only inputs on a
/// window containing [`oracle_window`].
pub fn oracle_check(
    mu1: &Distribution,
    mu2: &Distribution,
    alpha: &PAdicScalar,
    window: &VerificationWindow,
) -> Result<IndependenceVerdict> {
    let (mu2_r, alpha_r, _) = reduce(mu2, alpha)?;
    let q1 = project_to_quotient(mu1, window.w_low, window.w_high)?;
    let q2 = project_to_quotient(&mu2_r, window.w_low, window.w_high)?;
    let joint = joint_law(&q1, &q2, &alpha_r)?;
    let independent = joint.factorizes()?;
    let sufficient = oracle_window(mu1, mu2, alpha)?;
    let faithful =
        q1.is_faithful() && q2.is_faithful() && window.w_low <= sufficient.w_low && window.w_high >= sufficient.w_high;
    Ok(IndependenceVerdict {
        independent,
        witness: None,
        window: window.clone(),
        method: Method::Oracle,
        conclusive: !independent || faithful,
        pairs_evaluated: (q1.masses.len() * q2.masses.len()) as u128,
    })
}

/// [`oracle_window`] followed by [`oracle_check`].
pub fn oracle_decide(mu1: &Distribution, mu2: &Distribution, alpha: &PAdicScalar) -> Result<IndependenceVerdict> {
    oracle_check(mu1, mu2, alpha, &oracle_window(mu1, mu2, alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::independence::decide;
    use crate::measure::Component;
    use crate::padic::parse_rational;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn s(text: &str, prime: u64) -> PAdicScalar {
        PAdicScalar::parse(text, p(prime)).unwrap()
    }

    fn q(text: &str) -> BigRational {
        parse_rational(text).unwrap()
    }

    fn two_level_pair(prime: u64, k: i64) -> (Distribution, Distribution) {
        let a = q("1/2");
        (
            Distribution::two_level(p(prime), &a, 1, 2 - k).unwrap(),
            Distribution::two_level(p(prime), &a, 2 - k, 1 - k).unwrap(),
        )
    }

    fn window(prime: u64, w_low: i64, w_high: i64) -> VerificationWindow {
        VerificationWindow { prime: p(prime), w_low, w_high, deep_probes: 0, thresholds: vec![], reduced: false }
    }

    #[test]
    fn projection_examples() {
        let q0 = project_to_quotient(&Distribution::haar(p(3), 0), 0, 2).unwrap();
        let probs = q0.probabilities();
        assert_eq!(probs.len(), 9);
        assert!(probs.iter().all(|(_, w)| *w == q("1/9")));
        assert!(q0.is_faithful());

        let (_, mu2) = two_level_pair(3, 2);
        let q2 = project_to_quotient(&mu2, -1, 3).unwrap();
        let probs = q2.probabilities();
        // 1/2 uniform over Λ_0 (27 cosets) plus 1/2 uniform over Λ_{-1} (81 cosets)
        assert_eq!(probs.len(), 81);
        assert_eq!(q2.mass_of(&s("0", 3)), q("1/54") + q("1/162"));
        assert_eq!(q2.mass_of(&s("1/3", 3)), q("1/162"));
        let total = probs.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w);
        assert_eq!(total, q("1"));

        let e5 = project_to_quotient(&Distribution::point_mass(s("5", 3)), 0, 2).unwrap();
        assert_eq!(e5.probabilities(), vec![(s("5", 3), q("1"))]);
        assert!(!e5.is_faithful());
    }

    #[test]
    fn projection_errors() {
        let m = Distribution::haar(p(3), -1);
        assert!(matches!(project_to_quotient(&m, 0, 2), Err(Error::SupportExceedsWindow(_))));
        let m = Distribution::haar(p(3), 3);
        assert!(matches!(project_to_quotient(&m, 0, 2), Err(Error::SupportExceedsWindow(_))));
        let e = Distribution::point_mass(s("1/3", 3));
        assert!(matches!(project_to_quotient(&e, 0, 2), Err(Error::SupportExceedsWindow(_))));
    }

    #[test]
    fn joint_law_examples() {
        let u = project_to_quotient(&Distribution::haar(p(3), 0), 0, 1).unwrap();
        let j = joint_law(&u, &u, &s("1", 3)).unwrap();
        for sv in 0..3 {
            for t in 0..3 {
                let expected = if sv == t { q("1/3") } else { q("0") };
                assert_eq!(j.probability(sv, t), expected);
            }
        }
        let e = project_to_quotient(&Distribution::point_mass(s("0", 3)), 0, 1).unwrap();
        let j = joint_law(&e, &e, &s("2", 3)).unwrap();
        assert_eq!(j.support_size(), 1);
        assert_eq!(j.probability(0, 0), q("1"));

        let u = project_to_quotient(&Distribution::haar(p(3), 0), 0, 2).unwrap();
        let j = joint_law(&u, &u, &s("4", 3)).unwrap();
        assert!(!j.factorizes().unwrap());
        assert!(joint_law(&u, &u, &s("1/3", 3)).is_err());
    }

    #[test]
    fn oracle_examples() {
        let (m1, m2) = two_level_pair(3, 2);
        let v = oracle_check(&m1, &m2, &s("9", 3), &window(3, -1, 3)).unwrap();
        assert!(v.independent && v.conclusive);
        assert_eq!(v.method, Method::Oracle);
        let m = Distribution::haar(p(3), 0);
        assert!(!oracle_decide(&m, &m, &s("4", 3)).unwrap().independent);
        let e = Distribution::point_mass(s("0", 3));
        for alpha in ["1", "2", "9", "1/3"] {
            let v = oracle_decide(&e, &e, &s(alpha, 3)).unwrap();
            assert!(v.independent && !v.conclusive);
        }
    }

    #[test]
    fn marginal_of_sum_matches_quotient_convolution() {
        let (m1, m2) = two_level_pair(3, 2);
        let alpha = s("9", 3);
        let (w_low, w_high) = (-1, 3);
        let q1 = project_to_quotient(&m1, w_low, w_high).unwrap();
        let q2 = project_to_quotient(&m2, w_low, w_high).unwrap();
        let joint = joint_law(&q1, &q2, &alpha).unwrap();
        let direct = project_to_quotient(&m1.convolve(&m2).unwrap(), w_low, w_high).unwrap();
        assert_eq!(joint.first_marginal().probabilities(), direct.probabilities());
        assert_eq!(joint.first_marginal().probabilities(), q1.convolve(&q2).unwrap().probabilities());
        let pushed = project_to_quotient(&m2.pushforward(&alpha).unwrap(), w_low, w_high).unwrap();
        assert_eq!(joint.second_marginal().probabilities(), q1.convolve(&pushed).unwrap().probabilities());
    }

    fn arb_ball_distribution(prime: Prime) -> impl Strategy<Value = Distribution> {
        proptest::collection::vec((1u32..4, -2i64..3, 0i64..9), 1..4).prop_map(move |parts| {
            let total: u32 = parts.iter().map(|t| t.0).sum();
            let components = parts
                .into_iter()
                .map(|(w, k, n)| {
                    Component::ball(BigRational::new(w.into(), total.into()), PAdicScalar::from_integer(prime, n), k)
                })
                .collect();
            Distribution::new(prime, components).unwrap()
        })
    }

    fn arb_problem() -> impl Strategy<Value = (Distribution, Distribution, PAdicScalar)> {
        prop_oneof![Just(p(2)), Just(p(3))].prop_flat_map(|prime| {
            let alpha = (-2i64..3, prop_oneof![Just(1i64), Just(2), Just(-1), Just(5), Just(7)]).prop_filter_map(
                "unit",
                move |(k, c)| {
                    (c % prime.get() as i64 != 0)
                        .then(|| PAdicScalar::new(prime, BigRational::from_integer(c.into()) * prime.rational_pow(k)))
                },
            );
            (arb_ball_distribution(prime), arb_ball_distribution(prime), alpha)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn agrees_with_checker((m1, m2, alpha) in arb_problem()) {
            prop_assert_eq!(
                oracle_decide(&m1, &m2, &alpha).unwrap().independent,
                decide(&m1, &m2, &alpha).unwrap().independent
            );
        }

        #[test]
        fn level_stable((m1, m2, alpha) in arb_problem()) {
            let mut w = oracle_window(&m1, &m2, &alpha).unwrap();
            let base = oracle_check(&m1, &m2, &alpha, &w).unwrap().independent;
            w.w_high += 1;
            prop_assert_eq!(oracle_check(&m1, &m2, &alpha, &w).unwrap().independent, base);
        }
    }
}
