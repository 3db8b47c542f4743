//! Classification of `α` by `k = v(α)` and `c0`, the non-idempotent
//! counterexample for `|k| ≥ 2`, and falsification sweeps of the case
//! conclusions over finite families of distributions.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::independence::decide;
use crate::measure::{Component, Distribution};
use crate::padic::{format_rational, ExtInt, PAdicScalar, Prime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CaseTag {
    #[serde(rename = "K0-degenerate")]
    K0Degenerate,
    #[serde(rename = "K0-idempotent")]
    K0Idempotent,
    #[serde(rename = "K1")]
    K1,
    #[serde(rename = "K-counterexample")]
    KCounterexample,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::K0Degenerate => "K0-degenerate",
            CaseTag::K0Idempotent => "K0-idempotent",
            CaseTag::K1 => "K1",
            CaseTag::KCounterexample => "K-counterexample",
        })
    }
}

impl CaseTag {
    pub fn conclusion(self) -> &'static str {
        match self {
            CaseTag::K0Degenerate => "both distributions are degenerate",
            CaseTag::K0Idempotent => "both distributions are shifts of the Haar distribution of one subgroup",
            CaseTag::K1 => "at least one distribution is idempotent",
            CaseTag::KCounterexample => "independence does not force idempotence",
        }
    }

    /// Whether an independent pair satisfies the conclusion; `None` when the
    /// case asserts nothing about individual pairs.
    pub fn holds_for(self, mu1: &Distribution, mu2: &Distribution) -> Option<bool> {
        match self {
            CaseTag::K0Degenerate => Some(mu1.is_degenerate() && mu2.is_degenerate()),
            CaseTag::K0Idempotent => Some(is_common_haar_shape(mu1, mu2)),
            CaseTag::K1 => Some(mu1.is_idempotent() || mu2.is_idempotent()),
            CaseTag::KCounterexample => None,
        }
    }
}

/// `μ_j = m_K ∗ E_{x_j}` for one subgroup `K`.
pub fn is_common_haar_shape(mu1: &Distribution, mu2: &Distribution) -> bool {
    match (mu1.idempotent_level(), mu2.idempotent_level()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremCase {
    pub alpha: PAdicScalar,
    pub k: i64,
    pub c0: u64,
    pub tag: CaseTag,
    pub witnesses: Option<(Distribution, Distribution)>,
}

impl TheoremCase {
    pub fn conclusion(&self) -> &'static str {
        self.tag.conclusion()
    }
}

pub fn classify(alpha: &PAdicScalar) -> Result<TheoremCase> {
    let d = alpha.decompose_automorphism()?;
    let tag = match (d.k.abs(), d.c0) {
        (0, 1) => CaseTag::K0Degenerate,
        (0, _) => CaseTag::K0Idempotent,
        (1, _) => CaseTag::K1,
        _ => CaseTag::KCounterexample,
    };
    let witnesses = match tag {
        CaseTag::KCounterexample => {
            let half = BigRational::new(1.into(), 2.into());
            Some(build_counterexample(alpha.prime(), d.k, &half)?)
        }
        _ => None,
    };
    Ok(TheoremCase { alpha: alpha.clone(), k: d.k, c0: d.c0, tag, witnesses })
}

/// `μ1 = a·m_{Λ_1} + (1-a)·m_{Λ_{2-k}}`, `μ2 = a·m_{Λ_{2-k}} + (1-a)·m_{Λ_{1-k}}`,
/// independent for `α = p^k` with neither idempotent. For `k < 0` the second
/// distribution is the image of the `|k|` one under `ξ ↦ p^{|k|}ξ`.
pub fn build_counterexample(prime: Prime, k: i64, a: &BigRational) -> Result<(Distribution, Distribution)> {
    if k.abs() < 2 {
        return Err(Error::InvalidParameter(format!("|k| must be at least 2, got k = {k}")));
    }
    if *a <= BigRational::zero() || *a >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("a = {} is not in (0, 1)", format_rational(a))));
    }
    let n = k.abs();
    let mu1 = Distribution::two_level(prime, a, 1, 2 - n)?;
    let mu2 = Distribution::two_level(prime, a, 2 - n, 1 - n)?;
    if k < 0 {
        let mu2 = mu2.pushforward(&PAdicScalar::p_power(prime, n))?;
        return Ok((mu1, mu2));
    }
    Ok((mu1, mu2))
}

/// Single balls and atoms, centered two-level mixtures over levels
/// `{-1, 0, 1, ∞}` with weights `{1/4, 1/2, 3/4}`, and equal-weight mixtures
/// of the two cosets at shifts 0 and 1. Duplicates are removed.
pub fn standard_family(prime: Prime) -> Vec<Distribution> {
    let zero = PAdicScalar::zero(prime);
    let one = PAdicScalar::one(prime);
    let levels = [ExtInt::Finite(-1), ExtInt::Finite(0), ExtInt::Finite(1), ExtInt::Infinity];
    let weights = ["1/4", "1/2", "3/4"].map(|w| crate::padic::parse_rational(w).expect("literal"));
    let whole = BigRational::one();
    let half = BigRational::new(1.into(), 2.into());

    let mut family = vec![
        Distribution::haar(prime, -1),
        Distribution::haar(prime, 0),
        Distribution::haar(prime, 1),
        Distribution::haar_shifted(one.clone(), 1),
        Distribution::point_mass(zero.clone()),
        Distribution::point_mass(one.clone()),
    ];
    for (i, &l1) in levels.iter().enumerate() {
        for &l2 in &levels[i + 1..] {
            for w in &weights {
                family.push(
                    Distribution::new(
                        prime,
                        vec![Component::new(w.clone(), zero.clone(), l1), Component::new(&whole - w, zero.clone(), l2)],
                    )
                    .expect("weights sum to 1"),
                );
            }
        }
    }
    for level in [ExtInt::Finite(1), ExtInt::Infinity] {
        family.push(
            Distribution::new(
                prime,
                vec![
                    Component::new(half.clone(), zero.clone(), level),
                    Component::new(half.clone(), one.clone(), level),
                ],
            )
            .expect("weights sum to 1"),
        );
    }
    let mut seen = BTreeSet::new();
    family.retain(|mu| seen.insert(mu.normalized().to_string()));
    family
}

/// Every ordered pair from `family`.
pub fn all_pairs(family: &[Distribution]) -> Vec<(Distribution, Distribution)> {
    family.iter().flat_map(|a| family.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub index: usize,
    pub independent: bool,
    /// Outcome of the case conclusion, for independent pairs in cases that assert one.
    pub conclusion_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub case: TheoremCase,
    pub pairs_checked: usize,
    /// Independent pairs, in family order.
    pub independent: Vec<PairOutcome>,
}

impl CaseReport {
    pub fn violations(&self) -> Vec<usize> {
        self.independent.iter().filter(|o| o.conclusion_holds == Some(false)).map(|o| o.index).collect()
    }
}

pub fn verify_case(alpha: &PAdicScalar, family: &[(Distribution, Distribution)]) -> Result<CaseReport> {
    let case = classify(alpha)?;
    let outcomes = family
        .par_iter()
        .enumerate()
        .map(|(index, (mu1, mu2))| {
            let independent = decide(mu1, mu2, alpha)?.independent;
            Ok(PairOutcome {
                index,
                independent,
                conclusion_holds: if independent { case.tag.holds_for(mu1, mu2) } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CaseReport {
        case,
        pairs_checked: family.len(),
        independent: outcomes.into_iter().filter(|o| o.independent).collect(),
    })
}

/// Expected idempotence of each member; `None` leaves a member unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdempotencePattern {
    pub first: Option<bool>,
    pub second: Option<bool>,
    pub degenerate: Option<bool>,
}

impl IdempotencePattern {
    pub fn matches(&self, mu1: &Distribution, mu2: &Distribution) -> bool {
        self.first.is_none_or(|e| mu1.is_idempotent() == e)
            && self.second.is_none_or(|e| mu2.is_idempotent() == e)
            && self.degenerate.is_none_or(|e| (mu1.is_degenerate() || mu2.is_degenerate()) == e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedExample {
    pub label: String,
    pub alpha: PAdicScalar,
    pub mu1: Distribution,
    pub mu2: Distribution,
    pub expected_independent: bool,
    pub pattern: IdempotencePattern,
}

pub fn named_examples(prime: Prime) -> Vec<NamedExample> {
    let p = prime.get() as i64;
    let half = BigRational::new(1.into(), 2.into());
    let delta = Distribution::haar(prime, 0);
    let two_level = Distribution::two_level(prime, &half, 1, 0).expect("valid mixture");
    let both_haar = IdempotencePattern { first: Some(true), second: Some(true), degenerate: Some(false) };
    let mut out = Vec::new();
    if p > 2 {
        out.push(NamedExample {
            label: "unit alpha with c0 != 1, Haar on the integers".into(),
            alpha: PAdicScalar::from_integer(prime, 2),
            mu1: delta.clone(),
            mu2: delta.clone(),
            expected_independent: true,
            pattern: both_haar,
        });
    }
    // c = 2 is not a unit for p = 2, so use c = 3 there
    let second_unit = if p == 2 { 3 } else { 2 };
    for c in [1, second_unit] {
        out.push(NamedExample {
            label: format!("k = 1, c = {c}: one idempotent, one not"),
            alpha: PAdicScalar::from_integer(prime, c * p),
            mu1: Distribution::haar(prime, 1),
            mu2: two_level.clone(),
            expected_independent: true,
            pattern: IdempotencePattern { first: Some(true), second: Some(false), degenerate: Some(false) },
        });
    }
    out.push(NamedExample {
        label: "sum and difference, Haar on the integers".into(),
        alpha: PAdicScalar::from_integer(prime, -1),
        mu1: delta.clone(),
        mu2: delta,
        expected_independent: p > 2,
        pattern: both_haar,
    });
    let (mu1, mu2) = build_counterexample(prime, 2, &half).expect("k = 2");
    out.push(NamedExample {
        label: "k = 2 counterexample".into(),
        alpha: PAdicScalar::from_integer(prime, p * p),
        mu1,
        mu2,
        expected_independent: true,
        pattern: IdempotencePattern { first: Some(false), second: Some(false), degenerate: Some(false) },
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Family sweeps for `p ∈ {2, 3}` and the named examples, one claim each.
pub fn run_harness() -> Result<Vec<Claim>> {
    let mut claims = Vec::new();
    for prime in [2u64, 3] {
        let prime = Prime::new(prime)?;
        let family = all_pairs(&standard_family(prime));
        let alphas: &[i64] = if prime.get() == 2 { &[3, 2, 4, -1] } else { &[2, 4, 3, 6, -1] };
        for &alpha in alphas {
            let alpha = PAdicScalar::from_integer(prime, alpha);
            let report = verify_case(&alpha, &family)?;
            let violations = report.violations();
            claims.push(Claim {
                name: format!("p={prime} alpha={alpha} {}: {}", report.case.tag, report.case.conclusion()),
                passed: violations.is_empty(),
                detail: format!(
                    "{} of {} pairs independent, {} violations",
                    report.independent.len(),
                    report.pairs_checked,
                    violations.len()
                ),
            });
        }
        for ex in named_examples(prime) {
            let verdict = decide(&ex.mu1, &ex.mu2, &ex.alpha)?;
            let passed = verdict.independent == ex.expected_independent && ex.pattern.matches(&ex.mu1, &ex.mu2);
            claims.push(Claim {
                name: format!("p={prime} alpha={} {}", ex.alpha, ex.label),
                passed,
                detail: format!("independent={} (expected {})", verdict.independent, ex.expected_independent),
            });
        }
    }
    Ok(claims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::parse_rational;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn s(text: &str, prime: u64) -> PAdicScalar {
        PAdicScalar::parse(text, p(prime)).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&s("2", 3)).unwrap().tag, CaseTag::K0Idempotent);
        assert_eq!(classify(&s("-1", 2)).unwrap().tag, CaseTag::K0Degenerate);
        let case = classify(&s("9", 3)).unwrap();
        assert_eq!((case.tag, case.k), (CaseTag::KCounterexample, 2));
        assert!(case.witnesses.is_some());
        assert_eq!(classify(&s("1", 5)).unwrap().tag, CaseTag::K0Degenerate);
        assert_eq!(classify(&s("2/3", 3)).unwrap().tag, CaseTag::K1);
        assert_eq!(classify(&s("1/25", 5)).unwrap().tag, CaseTag::KCounterexample);
        assert_eq!(classify(&s("0", 5)), Err(Error::ZeroAutomorphism));
        for n in [1i64, 3, 5, 7, -3, 11] {
            assert_eq!(classify(&PAdicScalar::from_integer(p(2), n)).unwrap().tag, CaseTag::K0Degenerate);
        }
    }

    #[test]
    fn classification_depends_on_residue_only() {
        for (a, b) in [("2", "5"), ("2", "-1"), ("6", "15"), ("9", "36/7")] {
            assert_eq!(classify(&s(a, 3)).unwrap().tag, classify(&s(b, 3)).unwrap().tag);
        }
    }

    #[test]
    fn counterexample_examples() {
        let half = parse_rational("1/2").unwrap();
        let (mu1, mu2) = build_counterexample(p(3), 2, &half).unwrap();
        assert_eq!(mu1, Distribution::two_level(p(3), &half, 1, 0).unwrap());
        assert_eq!(mu2, Distribution::two_level(p(3), &half, 0, -1).unwrap());
        let (_, mu2) = build_counterexample(p(2), 3, &half).unwrap();
        assert_eq!(mu2, Distribution::two_level(p(2), &half, -1, -2).unwrap());
        assert!(build_counterexample(p(3), 1, &half).is_err());
        assert!(build_counterexample(p(3), 2, &BigRational::one()).is_err());
        assert!(build_counterexample(p(3), 2, &BigRational::zero()).is_err());
    }

    #[test]
    fn counterexamples_are_independent() {
        let third = parse_rational("1/3").unwrap();
        for (prime, k) in [(2u64, 2i64), (3, 2), (2, -2), (3, -3)] {
            let (mu1, mu2) = build_counterexample(p(prime), k, &third).unwrap();
            let alpha = PAdicScalar::p_power(p(prime), k);
            assert!(!mu1.is_idempotent() && !mu2.is_idempotent());
            assert!(decide(&mu1, &mu2, &alpha).unwrap().independent, "p={prime} k={k}");
        }
    }

    #[test]
    fn family_is_deduplicated() {
        let family = standard_family(p(3));
        assert_eq!(family.len(), 26);
        let names: BTreeSet<String> = family.iter().map(|m| m.normalized().to_string()).collect();
        assert_eq!(names.len(), family.len());
    }

    #[test]
    fn named_examples_hold() {
        for prime in [2u64, 3, 5] {
            for ex in named_examples(p(prime)) {
                let verdict = decide(&ex.mu1, &ex.mu2, &ex.alpha).unwrap();
                assert_eq!(verdict.independent, ex.expected_independent, "p={prime} {}", ex.label);
                assert!(ex.pattern.matches(&ex.mu1, &ex.mu2), "p={prime} {}", ex.label);
            }
        }
    }
}
