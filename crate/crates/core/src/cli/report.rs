use std::fmt::Write as _;

use serde::Serialize;

use super::config::{component_specs, ComponentSpec, ConfigFile};
use super::CliError;
use crate::characters::CyclotomicValue;
use crate::independence::{equation_sides, IndependenceVerdict, VerificationWindow};
use crate::measure::Distribution;
use crate::padic::{format_rational, PAdicScalar};
use crate::theorem::{Claim, TheoremCase};

#[derive(Debug, Clone, Serialize)]
pub struct WindowJson {
    pub low: i64,
    pub high: i64,
    pub thresholds: Vec<i64>,
    /// `p^(high - low)`, as a decimal string
    pub classes: Option<String>,
    /// the checker works on `(ξ1, αξ2)` with `α^{-1}` when `v(α) < 0`
    pub alpha_inverted: bool,
}

impl From<&VerificationWindow> for WindowJson {
    fn from(w: &VerificationWindow) -> Self {
        WindowJson {
            low: w.w_low,
            high: w.w_high,
            thresholds: w.thresholds.clone(),
            classes: w.classes().map(|c| c.to_string()),
            alpha_inverted: w.reduced,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessJson {
    pub u: String,
    pub v: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictJson {
    pub independent: bool,
    pub conclusive: bool,
    pub method: String,
    pub witness: Option<WitnessJson>,
    pub window: WindowJson,
    pub pairs: String,
}

impl VerdictJson {
    pub fn new(
        v: &IndependenceVerdict,
        mu1: &Distribution,
        mu2: &Distribution,
        alpha: &PAdicScalar,
    ) -> Result<Self, CliError> {
        let witness = match &v.witness {
            Some((u, w)) => {
                let (lhs, rhs) = equation_sides(mu1, mu2, alpha, u, w)?;
                Some(WitnessJson { u: u.to_string(), v: w.to_string(), lhs: lhs.to_string(), rhs: rhs.to_string() })
            }
            None => None,
        };
        Ok(VerdictJson {
            independent: v.independent,
            conclusive: v.conclusive,
            method: v.method.to_string(),
            witness,
            window: WindowJson::from(&v.window),
            pairs: v.pairs_evaluated.to_string(),
        })
    }

    fn write_text(&self, out: &mut String, label: &str) {
        let verdict = if self.independent { "independent" } else { "dependent" };
        let note = if self.conclusive { "" } else { " (necessary condition only)" };
        let _ = writeln!(out, "{label}: {verdict}{note} [{}]", self.method);
        let _ = writeln!(
            out,
            "  window: [{}, {}], thresholds {:?}, {} classes per variable, {} pairs",
            self.window.low,
            self.window.high,
            self.window.thresholds,
            self.window.classes.as_deref().unwrap_or("too many"),
            self.pairs
        );
        if self.window.alpha_inverted {
            let _ = writeln!(out, "  v(alpha) < 0: checked (xi1, alpha*xi2) with 1/alpha");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "  witness: u = {}, v = {}", w.u, w.v);
            let _ = writeln!(out, "    lhs = {}", w.lhs);
            let _ = writeln!(out, "    rhs = {}", w.rhs);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairJson {
    pub mu1: Vec<ComponentSpec>,
    pub mu2: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseJson {
    pub alpha: String,
    pub k: i64,
    pub c0: u64,
    pub case: String,
    pub conclusion: String,
    pub witnesses: Option<PairJson>,
}

impl CaseJson {
    pub fn new(case: &TheoremCase) -> Self {
        CaseJson {
            alpha: case.alpha.to_string(),
            k: case.k,
            c0: case.c0,
            case: case.tag.to_string(),
            conclusion: case.conclusion().to_string(),
            witnesses: case
                .witnesses
                .as_ref()
                .map(|(a, b)| PairJson { mu1: component_specs(a), mu2: component_specs(b) }),
        }
    }

    fn write_text(&self, out: &mut String, with_witnesses: bool) {
        let _ = writeln!(out, "alpha = {}: k = {}, c0 = {}, case {}", self.alpha, self.k, self.c0, self.case);
        let _ = writeln!(out, "  independent pairs: {}", self.conclusion);
        if let Some(pair) = self.witnesses.as_ref().filter(|_| with_witnesses) {
            let _ = writeln!(out, "  mu1 = {}", describe(&pair.mu1));
            let _ = writeln!(out, "  mu2 = {}", describe(&pair.mu2));
        }
    }
}

fn describe(specs: &[ComponentSpec]) -> String {
    specs
        .iter()
        .map(|c| match c.level {
            Some(k) => format!("{}*m[{} + L{k}]", c.weight, c.shift),
            None => format!("{}*E[{}]", c.weight, c.shift),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub p: u64,
    /// `α` of the equivalent forms `(ξ1 + ξ2, ξ1 + αξ2)`
    pub alpha: String,
    pub general_forms: bool,
    pub case: CaseJson,
    pub mu1_idempotent: bool,
    pub mu2_idempotent: bool,
    pub verdict: VerdictJson,
    pub oracle: Option<VerdictJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub p: u64,
    pub k: i64,
    pub a: String,
    pub alpha: String,
    pub written_to: Option<String>,
    pub mu1_idempotent: bool,
    pub mu2_idempotent: bool,
    pub verdict: VerdictJson,
    pub oracle: VerdictJson,
    pub config: ConfigFile,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermJson {
    pub angle: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharfnReport {
    pub p: u64,
    pub at: String,
    pub dist: u8,
    pub value: String,
    /// `value = Σ coefficient·exp(2πi·angle)` in the power basis
    pub terms: Vec<TermJson>,
}

impl CharfnReport {
    pub fn new(p: u64, y: &PAdicScalar, dist: u8, value: &CyclotomicValue) -> Self {
        CharfnReport {
            p,
            at: y.to_string(),
            dist,
            value: value.to_string(),
            terms: value
                .terms()
                .into_iter()
                .map(|(a, c)| TermJson { angle: a.to_string(), coefficient: format_rational(&c) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub p: u64,
    pub alpha: String,
    pub verdict: VerdictJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub passed: usize,
    pub failed: usize,
    pub claims: Vec<Claim>,
}

impl HarnessReport {
    pub fn new(claims: Vec<Claim>) -> Self {
        let passed = claims.iter().filter(|c| c.passed).count();
        HarnessReport { passed, failed: claims.len() - passed, claims }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Report {
    Classify(CaseJson),
    Check(CheckReport),
    Counterexample(CounterexampleReport),
    Charfn(CharfnReport),
    Oracle(OracleReport),
    Harness(HarnessReport),
}

impl Report {
    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))
    }

    pub fn to_text(&self) -> Result<String, CliError> {
        let mut out = String::new();
        match self {
            Report::Classify(case) => case.write_text(&mut out, true),
            Report::Check(r) => {
                let _ = writeln!(out, "p = {}, alpha = {}", r.p, r.alpha);
                if r.general_forms {
                    let _ = writeln!(out, "  general forms reduced to (xi1 + xi2, xi1 + alpha*xi2)");
                }
                r.case.write_text(&mut out, false);
                let _ = writeln!(out, "idempotent: mu1 {}, mu2 {}", r.mu1_idempotent, r.mu2_idempotent);
                r.verdict.write_text(&mut out, "verdict");
                if let Some(o) = &r.oracle {
                    o.write_text(&mut out, "oracle");
                }
            }
            Report::Counterexample(r) => {
                let _ = writeln!(out, "p = {}, k = {}, a = {}, alpha = {}", r.p, r.k, r.a, r.alpha);
                let _ = writeln!(out, "  mu1 = {}", describe(&r.config.mu1));
                let _ = writeln!(out, "  mu2 = {}", describe(&r.config.mu2));
                let _ = writeln!(out, "idempotent: mu1 {}, mu2 {}", r.mu1_idempotent, r.mu2_idempotent);
                r.verdict.write_text(&mut out, "verdict");
                r.oracle.write_text(&mut out, "oracle");
                if let Some(path) = &r.written_to {
                    let _ = writeln!(out, "config written to {path}");
                }
            }
            Report::Charfn(r) => {
                let _ = writeln!(out, "mu{}^({}) = {}", r.dist, r.at, r.value);
            }
            Report::Oracle(r) => {
                let _ = writeln!(out, "p = {}, alpha = {}", r.p, r.alpha);
                r.verdict.write_text(&mut out, "oracle");
            }
            Report::Harness(r) => {
                for c in &r.claims {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    let _ = writeln!(out, "[{tag}] {}: {}", c.name, c.detail);
                }
                let _ = writeln!(out, "{} passed, {} failed", r.passed, r.failed);
            }
        }
        Ok(out.trim_end().to_string())
    }
}
