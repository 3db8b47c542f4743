//! Deciding independence of `L1 = ξ1 + ξ2` and `L2 = ξ1 + αξ2`.
//!
//! The forms are independent iff
//! `μ̂1(u+v) μ̂2(u+αv) = μ̂1(u) μ̂2(u) μ̂1(v) μ̂2(αv)` for all `u, v`.
//! Both sides are evaluated exactly on a finite grid of coset representatives
//! of `Λ_{W_low}/Λ_{W_high}` that is exhaustive for ball-only mixtures. Point
//! masses give the characteristic functions a nonzero tail; for those the
//! verdict follows from the support structure, and the grid, deep probes and
//! an optional random audit look for an explicit witness.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::CyclotomicValue;
use crate::error::{Error, Result};
use crate::measure::Distribution;
use crate::padic::{ExtInt, PAdicScalar, Prime};

pub const DEFAULT_MARGIN_LOW: i64 = 2;

/// Largest grid side `p^(W_high - W_low)` the checker will enumerate.
const MAX_GRID: u64 = 1 << 16;
/// Grid side limit when deepening the window in search of a witness.
const ESCALATION_GRID: u64 = 1 << 12;
const AUDIT_SEED: u64 = 0x5eed_1e55;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactWindow,
    Oracle,
    Structural,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ExactWindow => "exact-window",
            Method::Oracle => "oracle",
            Method::Structural => "structural",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationWindow {
    pub prime: Prime,
    pub w_low: i64,
    pub w_high: i64,
    /// Depths `j` of the probes `r·p^(W_low - j)`, used when a point mass is present.
    pub deep_probes: u32,
    /// Thresholds of the centered (and, for `v(α) < 0`, reduced) problem.
    pub thresholds: Vec<i64>,
    /// Whether `v(α) < 0` was reduced to `α^{-1}` with `ξ2 ↦ αξ2`.
    pub reduced: bool,
}

impl VerificationWindow {
    /// Number of representatives per variable, `p^(W_high - W_low)`.
    pub fn classes(&self) -> Option<u64> {
        self.prime.checked_pow(u32::try_from(self.w_high - self.w_low).ok()?)
    }

    /// Number of `(u, v)` pairs on the grid.
    pub fn pair_count(&self) -> Option<u128> {
        self.classes().map(|c| u128::from(c) * u128::from(c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceVerdict {
    pub independent: bool,
    /// `(u, v)` at which the two sides differ, for the distributions and `α` as given.
    pub witness: Option<(PAdicScalar, PAdicScalar)>,
    pub window: VerificationWindow,
    pub method: Method,
    /// False only for oracle verdicts that are necessary conditions.
    pub conclusive: bool,
    pub pairs_evaluated: u128,
}

/// Reduce `(α1ξ1 + α2ξ2, β1ξ1 + β2ξ2)` to `(ξ1' + ξ2', ξ1' + αξ2')`.
pub fn canonicalize_forms(
    alpha1: &PAdicScalar,
    alpha2: &PAdicScalar,
    beta1: &PAdicScalar,
    beta2: &PAdicScalar,
    mu1: &Distribution,
    mu2: &Distribution,
) -> Result<(PAdicScalar, Distribution, Distribution)> {
    for c in [alpha1, alpha2, beta1, beta2] {
        if c.is_zero() {
            return Err(Error::InvalidParameter("linear form coefficient is zero".into()));
        }
    }
    let alpha = beta2.checked_mul(alpha1)?.checked_div(&beta1.checked_mul(alpha2)?)?;
    Ok((alpha, mu1.pushforward(alpha1)?, mu2.pushforward(alpha2)?))
}

/// `(1 - α)Λ_m ⊇ Λ_m`, i.e. `v(1 - α) ≤ 0`. The level does not matter.
pub fn ball_self_pair_check(alpha: &PAdicScalar, _m: i64) -> bool {
    let one_minus = &PAdicScalar::one(alpha.prime()) - alpha;
    one_minus.valuation() <= ExtInt::Finite(0)
}

/// Both sides of the functional equation at `(u, v)`.
pub fn equation_sides(
    mu1: &Distribution,
    mu2: &Distribution,
    alpha: &PAdicScalar,
    u: &PAdicScalar,
    v: &PAdicScalar,
) -> Result<(CyclotomicValue, CyclotomicValue)> {
    let av = alpha.checked_mul(v)?;
    let lhs = mu1.charfn(&u.checked_add(v)?)?.mul(&mu2.charfn(&u.checked_add(&av)?)?);
    let rhs = mu1.charfn(u)?.mul(&mu2.charfn(u)?).mul(&mu1.charfn(v)?).mul(&mu2.charfn(&av)?);
    Ok((lhs, rhs))
}

/// Translate so that the first component sits at the origin, merging
/// components and reducing shifts modulo their balls.
fn center(mu: &Distribution) -> Distribution {
    let x0 = mu.components()[0].canonical_shift();
    mu.translate(&-&x0).normalized()
}

/// The problem after the `v(α) < 0` reduction and centering.
struct Reduced {
    mu1: Distribution,
    mu2: Distribution,
    alpha: PAdicScalar,
    swapped: bool,
}

fn reduce(mu1: &Distribution, mu2: &Distribution, alpha: &PAdicScalar) -> Result<Reduced> {
    if alpha.is_zero() {
        return Err(Error::ZeroAutomorphism);
    }
    if mu1.prime() != mu2.prime() || mu1.prime() != alpha.prime() {
        return Err(Error::PrimeMismatch(mu1.prime().get(), mu2.prime().get().max(alpha.prime().get())));
    }
    let k = alpha.valuation().finite().expect("nonzero");
    let (mu2, alpha, swapped) =
        if k < 0 { (mu2.pushforward(alpha)?, alpha.inverse()?, true) } else { (mu2.clone(), alpha.clone(), false) };
    Ok(Reduced { mu1: center(mu1), mu2: center(&mu2), alpha, swapped })
}

struct Bounds {
    thresholds: Vec<i64>,
    t_min: i64,
    t_max: i64,
    /// `v(1 - α)` when `v(α) = 0` and `α ≠ 1`, otherwise 0.
    extra: i64,
    k: i64,
    has_point_mass: bool,
}

fn bounds(r: &Reduced) -> Bounds {
    let mut ball = Vec::new();
    let mut all = Vec::new();
    for mu in [&r.mu1, &r.mu2] {
        for c in mu.components() {
            if let Some(t) = c.threshold() {
                ball.push(t);
                all.push(t);
            }
            if let ExtInt::Finite(vx) = c.shift().valuation() {
                all.push(1 - vx);
            }
        }
    }
    all.sort_unstable();
    all.dedup();
    let t_max = all.last().copied().unwrap_or(0);
    let t_min = ball.iter().copied().min().unwrap_or(t_max.min(0));
    let decomposition = r.alpha.decompose_automorphism().expect("nonzero");
    let extra = match (decomposition.k, decomposition.one_minus_alpha_valuation) {
        (0, ExtInt::Finite(e)) => e.max(0),
        _ => 0,
    };
    Bounds {
        thresholds: all,
        t_min,
        t_max,
        extra,
        k: decomposition.k,
        has_point_mass: r.mu1.has_point_mass() || r.mu2.has_point_mass(),
    }
}

pub fn verification_window(
    mu1: &Distribution,
    mu2: &Distribution,
    alpha: &PAdicScalar,
    margin_low: i64,
) -> Result<VerificationWindow> {
    if margin_low < 1 {
        return Err(Error::InvalidParameter(format!("margin_low must be at least 1, got {margin_low}")));
    }
    let r = reduce(mu1, mu2, alpha)?;
    let b = bounds(&r);
    let negative_k = alpha.valuation().finite().expect("nonzero").min(0).abs();
    let mut w_low = b.t_min - margin_low - negative_k - b.extra;
    if b.has_point_mass {
        w_low -= b.k;
    }
    let w_high = b.t_max.max(w_low + 1);
    Ok(VerificationWindow {
        prime: alpha.prime(),
        w_low,
        w_high,
        deep_probes: if b.has_point_mass { 2 } else { 0 },
        thresholds: b.thresholds,
        reduced: r.swapped,
    })
}

/// Whether the pair is independent, decided from the support structure.
/// Ball-only pairs are left to the grid.
fn structural_verdict(r: &Reduced) -> Option<bool> {
    (r.mu1.has_point_mass() || r.mu2.has_point_mass()).then(|| r.mu1.is_degenerate() && r.mu2.is_degenerate())
}

fn grid_scalar(p: Prime, i: u64, w_low: i64) -> PAdicScalar {
    PAdicScalar::new(p, BigRational::from_integer(BigInt::from(i)) * p.rational_pow(w_low))
}

/// Index step of the subgroup outside which `μ̂` vanishes on the grid:
/// index `i` can carry a nonzero value only if `step | i`.
fn support_step(mu: &Distribution, p: Prime, w_low: i64, n: u32) -> u64 {
    if mu.has_point_mass() {
        return 1;
    }
    let t = mu.components().iter().filter_map(|c| c.threshold()).min().expect("ball-only");
    let depth = (t - w_low).clamp(0, i64::from(n));
    p.get().pow(depth as u32)
}

/// First `(i, j)` in lexicographic order where the sides differ, on the grid
/// `i·p^{w_low}` modulo `Λ_{w_high}`. Pairs where both sides vanish by
/// support alone are skipped.
fn search_grid(r: &Reduced, w_low: i64, w_high: i64) -> Result<Option<(u64, u64)>> {
    let p = r.alpha.prime();
    let n = u32::try_from(w_high - w_low).expect("w_low < w_high");
    let m = p
        .checked_pow(n)
        .filter(|&m| m <= MAX_GRID)
        .ok_or_else(|| Error::WindowTooLarge(format!("{p}^{n} representatives per variable")))?;
    let a = r.alpha.residue_mod(n).to_u64().expect("residue below the grid size");
    let table = |mu: &Distribution| -> Result<Vec<CyclotomicValue>> {
        (0..m).into_par_iter().map(|i| mu.charfn(&grid_scalar(p, i, w_low))).collect()
    };
    let f1 = table(&r.mu1)?;
    let f2 = table(&r.mu2)?;
    let alpha_index = |j: u64| ((u128::from(a) * u128::from(j)) % u128::from(m)) as u64;
    let g: Vec<CyclotomicValue> = (0..m as usize).into_par_iter().map(|i| f1[i].mul(&f2[i])).collect();
    let h: Vec<CyclotomicValue> =
        (0..m).into_par_iter().map(|j| f1[j as usize].mul(&f2[alpha_index(j) as usize])).collect();
    let h_support: Vec<u64> = (0..m).filter(|&j| !h[j as usize].is_zero()).collect();
    let d1 = support_step(&r.mu1, p, w_low, n);
    let d2 = support_step(&r.mu2, p, w_low, n);

    let hit = (0..m).into_par_iter().find_map_first(|i| {
        // j with i + j in the support of μ̂1 and i + αj in the support of μ̂2
        let first = (d1 - i % d1) % d1;
        let mut candidates: Vec<u64> =
            (first..m).step_by(d1 as usize).filter(|&j| ((i + alpha_index(j)) % m) % d2 == 0).collect();
        if !g[i as usize].is_zero() {
            candidates.extend_from_slice(&h_support);
            candidates.sort_unstable();
            candidates.dedup();
        }
        candidates.into_iter().find_map(|j| {
            let x = &f1[((i + j) % m) as usize];
            let y = &f2[((i + alpha_index(j)) % m) as usize];
            let rhs_zero = g[i as usize].is_zero() || h[j as usize].is_zero();
            if x.is_zero() || y.is_zero() {
                return (!rhs_zero).then_some((i, j));
            }
            if rhs_zero {
                return Some((i, j));
            }
            (x.mul(y) != g[i as usize].mul(&h[j as usize])).then_some((i, j))
        })
    });
    Ok(hit)
}

fn differs(r: &Reduced, u: &PAdicScalar, v: &PAdicScalar) -> Result<bool> {
    let (lhs, rhs) = equation_sides(&r.mu1, &r.mu2, &r.alpha, u, v)?;
    Ok(lhs != rhs)
}

fn deep_probe_witness(r: &Reduced, w_low: i64, w_high: i64, depth: u32) -> Result<Option<(PAdicScalar, PAdicScalar)>> {
    let p = r.alpha.prime();
    let mut probes = Vec::new();
    for j in 1..=i64::from(depth) {
        for digit in 1..p.get() {
            probes.push(PAdicScalar::new(p, BigRational::from_integer(digit.into()) * p.rational_pow(w_low - j)));
        }
    }
    let n = u32::try_from(w_high - w_low).expect("w_low < w_high");
    let m = p.checked_pow(n).unwrap_or(0);
    let mut partners: Vec<PAdicScalar> = (0..m).map(|i| grid_scalar(p, i, w_low)).collect();
    partners.extend(probes.iter().cloned());
    for probe in &probes {
        for other in &partners {
            if differs(r, probe, other)? {
                return Ok(Some((probe.clone(), other.clone())));
            }
            if differs(r, other, probe)? {
                return Ok(Some((other.clone(), probe.clone())));
            }
        }
    }
    Ok(None)
}

fn random_scalar(rng: &mut ChaCha8Rng, p: Prime, lo: i64, hi: i64) -> PAdicScalar {
    let unit = |rng: &mut ChaCha8Rng| loop {
        let n: i64 = rng.gen_range(1..=(p.get() as i64).pow(3));
        if n % p.get() as i64 != 0 {
            return n;
        }
    };
    let e = rng.gen_range(lo..=hi);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let q = BigRational::new(BigInt::from(sign * unit(rng)), BigInt::from(unit(rng)));
    PAdicScalar::new(p, q * p.rational_pow(e))
}

fn audit_witness(
    r: &Reduced,
    window: &VerificationWindow,
    samples: usize,
) -> Result<Option<(PAdicScalar, PAdicScalar)>> {
    let p = r.alpha.prime();
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    for _ in 0..samples {
        let u = random_scalar(&mut rng, p, window.w_low - 3, window.w_high + 3);
        let v = random_scalar(&mut rng, p, window.w_low - 3, window.w_high + 3);
        if differs(r, &u, &v)? {
            return Ok(Some((u, v)));
        }
    }
    Ok(None)
}

/// The smallest window the grid search is exhaustive on for ball-only inputs.
fn required(r: &Reduced) -> (i64, i64) {
    let b = bounds(r);
    (b.t_min - 1 - b.extra, b.t_max)
}

pub fn check_independence(
    mu1: &Distribution,
    mu2: &Distribution,
    alpha: &PAdicScalar,
    window: &VerificationWindow,
    sample_count: usize,
) -> Result<IndependenceVerdict> {
    let r = reduce(mu1, mu2, alpha)?;
    let (need_low, need_high) = required(&r);
    if window.w_low >= window.w_high || window.w_low > need_low || window.w_high < need_high {
        return Err(Error::WindowInconsistent {
            low: window.w_low,
            high: window.w_high,
            reason: format!("need low <= {need_low} and high >= {need_high}"),
        });
    }
    let p = alpha.prime();
    let structural = structural_verdict(&r);
    // With a point mass the verdict is structural and the grid only hunts for
    // a witness, so an oversized grid is trimmed from below.
    let search_low = match structural {
        Some(_) => {
            let mut depth = 0i64;
            while p.checked_pow(depth as u32 + 1).is_some_and(|s| s <= ESCALATION_GRID) {
                depth += 1;
            }
            window.w_low.max(window.w_high - depth)
        }
        None => window.w_low,
    };
    let side = u128::from(p.checked_pow((window.w_high - search_low) as u32).unwrap_or(u64::MAX));
    let mut pairs = side * side;
    let mut witness = search_grid(&r, search_low, window.w_high)?
        .map(|(i, j)| (grid_scalar(p, i, search_low), grid_scalar(p, j, search_low)));
    if witness.is_none() && window.deep_probes > 0 {
        witness = deep_probe_witness(&r, search_low, window.w_high, window.deep_probes)?;
    }
    if witness.is_none() && sample_count > 0 {
        witness = audit_witness(&r, window, sample_count)?;
    }
    if witness.is_none() && structural == Some(false) {
        let mut w_low = search_low - 1;
        while witness.is_none() {
            let side = p.checked_pow(u32::try_from(window.w_high - w_low).unwrap_or(u32::MAX));
            match side {
                Some(side) if side <= ESCALATION_GRID => {
                    pairs += u128::from(side) * u128::from(side);
                    witness = search_grid(&r, w_low, window.w_high)?
                        .map(|(i, j)| (grid_scalar(p, i, w_low), grid_scalar(p, j, w_low)));
                    w_low -= 1;
                }
                _ => break,
            }
        }
    }
    let method = match (&witness, structural) {
        (None, Some(false)) => Method::Structural,
        _ => Method::ExactWindow,
    };
    let witness = witness.map(|(u, v)| if r.swapped { (v, u) } else { (u, v) });
    if let Some((u, v)) = &witness {
        let (lhs, rhs) = equation_sides(mu1, mu2, alpha, u, v)?;
        assert_ne!(lhs, rhs, "witness must violate the functional equation");
    }
    Ok(IndependenceVerdict {
        independent: witness.is_none() && structural != Some(false),
        witness,
        window: window.clone(),
        method,
        conclusive: true,
        pairs_evaluated: pairs,
    })
}

/// [`verification_window`] with the default margin followed by [`check_independence`].
pub fn decide(mu1: &Distribution, mu2: &Distribution, alpha: &PAdicScalar) -> Result<IndependenceVerdict> {
    let window = verification_window(mu1, mu2, alpha, DEFAULT_MARGIN_LOW)?;
    check_independence(mu1, mu2, alpha, &window, 0)
}

/// Whether some `Λ_l` with `l` in the window has both characteristic
/// functions identically 1 on it.
pub fn common_trivial_level(mu1: &Distribution, mu2: &Distribution, window: &VerificationWindow) -> Option<i64> {
    (window.w_low..=window.w_high).find(|&l| {
        [mu1, mu2].iter().all(|mu| {
            let profile = mu.profile();
            profile.value_at(ExtInt::Finite(l)).is_one()
                && mu.components().iter().all(|c| c.shift().is_zero() || c.shift().valuation() >= ExtInt::Finite(1 - l))
        })
    })
}
