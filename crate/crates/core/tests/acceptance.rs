//! Acceptance criteria, run as a plain binary so every criterion prints one
//! pass/fail line. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use padic_indep::characters::{pairing, pairing_digit_sum, CyclotomicValue, DigitWindow};
use padic_indep::independence::decide;
use padic_indep::measure::{Component, Distribution};
use padic_indep::oracle::oracle_decide;
use padic_indep::padic::{ExtInt, PAdicScalar, Prime};
use padic_indep::theorem::{
    all_pairs, build_counterexample, is_common_haar_shape, standard_family, verify_case, CaseTag,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn scaled(p: Prime, q: BigRational, e: i64) -> PAdicScalar {
    PAdicScalar::new(p, q * p.rational_pow(e))
}

fn unit(rng: &mut ChaCha8Rng, p: Prime, bound: i64) -> i64 {
    loop {
        let n = rng.gen_range(1..=bound);
        if n % p.get() as i64 != 0 {
            return if rng.gen_bool(0.5) { n } else { -n };
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Check {
    let cases = [(2, 2, ratio(1, 2)), (2, 3, ratio(1, 2)), (3, 2, ratio(1, 3)), (5, 2, ratio(1, 2))];
    for (p, k, a) in &cases {
        let p = prime(*p);
        let (mu1, mu2) = build_counterexample(p, *k, a).map_err(|e| e.to_string())?;
        let alpha = PAdicScalar::p_power(p, *k);
        let exact = decide(&mu1, &mu2, &alpha).map_err(|e| e.to_string())?;
        let oracle = oracle_decide(&mu1, &mu2, &alpha).map_err(|e| e.to_string())?;
        ensure(exact.independent, || format!("p={p} k={k}: checker says dependent"))?;
        ensure(oracle.independent && oracle.conclusive, || format!("p={p} k={k}: oracle disagrees"))?;
        ensure(!mu1.is_idempotent() && !mu2.is_idempotent(), || format!("p={p} k={k}: idempotent member"))?;
    }
    Ok(format!("{} counterexamples independent, non-idempotent, oracle agrees", cases.len()))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let per_prime = 1000;
    for p in [2, 3, 5].map(prime) {
        for _ in 0..per_prime {
            let draw = |rng: &mut ChaCha8Rng| {
                let e = rng.gen_range(-6..=6);
                scaled(p, ratio(unit(rng, p, 500), unit(rng, p, 60).abs()), e)
            };
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            let closed = pairing(&x, &y).map_err(|e| e.to_string())?;
            let digits = pairing_digit_sum(&x, &y, DigitWindow::sufficient(&x, &y)).map_err(|e| e.to_string())?;
            ensure(closed == digits, || format!("p={p} x={x} y={y}: {closed} vs {digits}"))?;
        }
    }
    Ok(format!("{per_prime} random pairs per prime agree"))
}

fn criterion_3() -> Check {
    let mut checked = 0;
    for p in [2, 3, 5].map(prime) {
        for m in -3i64..=3 {
            let xs: Vec<PAdicScalar> = (1..p.get() as i64).map(|r| scaled(p, ratio(r, 1), m)).collect();
            let (lo, hi) = (-m - 2, -m + 3);
            let classes = p.get().pow((hi - lo) as u32);
            for i in 0..classes {
                let y = scaled(p, ratio(i as i64, 1), lo);
                let annihilated = xs.iter().all(|x| pairing(x, &y).unwrap().is_zero());
                let expected = y.valuation() >= ExtInt::Finite(1 - m);
                ensure(annihilated == expected, || format!("p={p} m={m} y={y}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} representatives match the annihilator levels"))
}

fn criterion_4() -> Check {
    let mut checked = 0;
    for p in [2, 3].map(prime) {
        for k in -2i64..=2 {
            let m = Distribution::haar(p, k);
            for v in -4i64..=4 {
                let y = scaled(p, ratio(p.get() as i64 - 1, 1), v);
                let expected = if v >= 1 - k { 1 } else { 0 };
                let value = m.charfn(&y).map_err(|e| e.to_string())?;
                ensure(value == CyclotomicValue::rational(p, ratio(expected, 1)), || {
                    format!("p={p} k={k} v={v}: {value}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} valuation classes match the indicator"))
}

fn criterion_5() -> Check {
    let mut alphas = Vec::new();
    for p in [3, 5].map(prime) {
        for e in -2i64..=2 {
            for u in [1i64, 2, 4, 7, 8, 11] {
                if u % p.get() as i64 == 0 {
                    continue;
                }
                let alpha = &PAdicScalar::one(p) - &scaled(p, ratio(u, 1), e);
                if !alpha.is_zero() {
                    alphas.push(alpha);
                }
            }
        }
    }
    ensure(alphas.len() >= 50, || format!("only {} values of alpha", alphas.len()))?;
    for alpha in &alphas {
        let p = alpha.prime();
        let expected = (&PAdicScalar::one(p) - alpha).valuation() <= ExtInt::Finite(0);
        for m in -1i64..=1 {
            let haar = Distribution::haar(p, m);
            let verdict = decide(&haar, &haar, alpha).map_err(|e| e.to_string())?;
            ensure(verdict.independent == expected, || format!("p={p} alpha={alpha} m={m}"))?;
        }
    }
    Ok(format!("{} values of alpha x 3 levels agree with v(1 - alpha) <= 0", alphas.len()))
}

fn sweep(p: u64, alpha: i64) -> Result<(padic_indep::theorem::CaseReport, Vec<(Distribution, Distribution)>), String> {
    let p = prime(p);
    let family = all_pairs(&standard_family(p));
    let report = verify_case(&PAdicScalar::from_integer(p, alpha), &family).map_err(|e| e.to_string())?;
    Ok((report, family))
}

fn criterion_6() -> Check {
    let mut lines = Vec::new();
    for (p, alpha, tag) in [(3, 2, CaseTag::K0Idempotent), (3, 4, CaseTag::K0Degenerate), (2, 3, CaseTag::K0Degenerate)]
    {
        let (report, _) = sweep(p, alpha)?;
        ensure(report.case.tag == tag, || format!("p={p} alpha={alpha}: case {}", report.case.tag))?;
        let violations = report.violations();
        ensure(violations.is_empty(), || format!("p={p} alpha={alpha}: violating pairs {violations:?}"))?;
        lines.push(format!("p={p} alpha={alpha}: {}/{}", report.independent.len(), report.pairs_checked));
    }
    Ok(format!("no violations ({})", lines.join(", ")))
}

fn criterion_7() -> Check {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for p in [2u64, 3] {
        for alpha in [p as i64, 2 * p as i64] {
            let (report, family) = sweep(p, alpha)?;
            let offending: Vec<String> = report
                .independent
                .iter()
                .map(|o| &family[o.index])
                .filter(|(a, b)| !a.is_idempotent() && !b.is_idempotent())
                .map(|(a, b)| format!("({a}, {b})"))
                .collect();
            let pp = prime(p);
            let mu1 = Distribution::haar(pp, 1);
            let mu2 = Distribution::two_level(pp, &ratio(1, 2), 1, 0).unwrap();
            let alpha_pair = decide(&mu1, &mu2, &PAdicScalar::from_integer(pp, alpha)).map_err(|e| e.to_string())?;
            let alpha_pair_ok = alpha_pair.independent && !mu2.is_idempotent();
            let ok = offending.is_empty() && alpha_pair_ok;
            let line = format!(
                "    [{}] p={p} alpha={alpha} ({}): {}/{} independent, {} without idempotent member, one-idempotent pair {}",
                if ok { "PASS" } else { "FAIL" },
                report.case.tag,
                report.independent.len(),
                report.pairs_checked,
                offending.len(),
                if alpha_pair_ok { "independent" } else { "not independent" },
            );
            println!("{line}");
            if !ok {
                failures.push(format!("p={p} alpha={alpha}: {}", offending.join(", ")));
            }
            lines.push(format!("p={p} alpha={alpha}"));
        }
    }
    if failures.is_empty() {
        Ok(format!("no violations ({})", lines.join(", ")))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_8() -> Check {
    let (report, family) = sweep(2, -1)?;
    for o in &report.independent {
        let (a, b) = &family[o.index];
        ensure(a.is_degenerate() && b.is_degenerate(), || format!("p=2: ({a}, {b}) independent"))?;
    }
    let p3 = prime(3);
    let haar = Distribution::haar(p3, 0);
    let verdict = decide(&haar, &haar, &PAdicScalar::from_integer(p3, -1)).map_err(|e| e.to_string())?;
    ensure(verdict.independent, || "p=3: Haar pair dependent".into())?;
    let (report3, family3) = sweep(3, -1)?;
    for o in &report3.independent {
        let (a, b) = &family3[o.index];
        ensure(is_common_haar_shape(a, b), || format!("p=3: ({a}, {b}) independent"))?;
    }
    Ok(format!(
        "p=2: {} independent pairs, all degenerate; p=3: {} independent pairs, all shifted Haar",
        report.independent.len(),
        report3.independent.len()
    ))
}

fn random_distribution(rng: &mut ChaCha8Rng, p: Prime, points: bool) -> Distribution {
    let n = rng.gen_range(1..=3);
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let components = weights
        .into_iter()
        .map(|w| {
            let shift = scaled(p, ratio(rng.gen_range(0..=(p.get() as i64).pow(3)), 1), rng.gen_range(-1..=1));
            let weight = ratio(w, total);
            if points && rng.gen_bool(0.25) {
                Component::point(weight, shift)
            } else {
                Component::ball(weight, shift, rng.gen_range(-2..=2))
            }
        })
        .collect();
    Distribution::new(p, components).unwrap()
}

fn random_alpha(rng: &mut ChaCha8Rng, p: Prime) -> PAdicScalar {
    let c = [1i64, 2, 3, 5, 7, -1].into_iter().filter(|c| c % p.get() as i64 != 0).collect::<Vec<_>>();
    let c = c[rng.gen_range(0..c.len())];
    scaled(p, ratio(c, 1), rng.gen_range(-2..=2))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut independent = 0;
    for trial in 0..200 {
        let p = prime(if trial % 2 == 0 { 2 } else { 3 });
        let mu1 = random_distribution(&mut rng, p, false);
        let mu2 = random_distribution(&mut rng, p, false);
        let alpha = random_alpha(&mut rng, p);
        let exact = decide(&mu1, &mu2, &alpha).map_err(|e| e.to_string())?;
        let oracle = oracle_decide(&mu1, &mu2, &alpha).map_err(|e| e.to_string())?;
        ensure(exact.independent == oracle.independent, || {
            format!(
                "p={p} alpha={alpha} mu1={mu1} mu2={mu2}: checker {} oracle {}",
                exact.independent, oracle.independent
            )
        })?;
        independent += usize::from(exact.independent);
    }
    Ok(format!("200 configurations agree ({independent} independent)"))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut symmetrized = 0;
    let trials = 120;
    for trial in 0..trials {
        let p = prime(if trial % 2 == 0 { 2 } else { 3 });
        let mu1 = random_distribution(&mut rng, p, true);
        let mu2 = random_distribution(&mut rng, p, true);
        let alpha = random_alpha(&mut rng, p);
        let base = decide(&mu1, &mu2, &alpha).map_err(|e| e.to_string())?.independent;
        let mut shift = || scaled(p, ratio(unit(&mut rng, p, 200), unit(&mut rng, p, 20).abs()), rng.gen_range(-3..=3));
        let (x1, x2) = (shift(), shift());
        let moved = decide(&mu1.translate(&x1), &mu2.translate(&x2), &alpha).map_err(|e| e.to_string())?;
        ensure(moved.independent == base, || format!("shift changed the verdict: {mu1} | {mu2} | {alpha}"))?;
        let gamma = scaled(p, ratio(unit(&mut rng, p, 30), unit(&mut rng, p, 10).abs()), rng.gen_range(-2..=2));
        let pushed = decide(&mu1.pushforward(&gamma).unwrap(), &mu2.pushforward(&gamma).unwrap(), &alpha)
            .map_err(|e| e.to_string())?;
        ensure(pushed.independent == base, || format!("scaling changed the verdict: {mu1} | {mu2} | {alpha}"))?;
        if base {
            let s1 = mu1.convolve(&mu1.reflect()).unwrap();
            let s2 = mu2.convolve(&mu2.reflect()).unwrap();
            let sym = decide(&s1, &s2, &alpha).map_err(|e| e.to_string())?;
            ensure(sym.independent, || format!("symmetrization broke independence: {mu1} | {mu2} | {alpha}"))?;
            symmetrized += 1;
        }
    }
    Ok(format!("{trials} configurations invariant, {symmetrized} symmetrized"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("counterexample reproduction", criterion_1),
        ("pairing digit-sum cross-check", criterion_2),
        ("annihilator law", criterion_3),
        ("Haar characteristic functions", criterion_4),
        ("ball self-pair criterion", criterion_5),
        ("k = 0 falsification harness", criterion_6),
        ("|k| = 1 harness", criterion_7),
        ("alpha = -1", criterion_8),
        ("checker-oracle agreement", criterion_9),
        ("invariance suite", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
