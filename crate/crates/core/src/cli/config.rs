use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::independence::canonicalize_forms;
use crate::measure::{Component, Distribution};
use crate::padic::{format_rational, parse_rational, ExtInt, PAdicScalar, Prime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ball,
    Point,
}

/// One mixture component as written in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i64>,
    pub shift: String,
}

impl From<&Component> for ComponentSpec {
    fn from(c: &Component) -> Self {
        let (kind, level) = match c.level() {
            ExtInt::Finite(k) => (Kind::Ball, Some(k)),
            ExtInt::Infinity => (Kind::Point, None),
        };
        ComponentSpec { weight: format_rational(c.weight()), kind, level, shift: c.shift().to_string() }
    }
}

pub fn component_specs(mu: &Distribution) -> Vec<ComponentSpec> {
    mu.components().iter().map(ComponentSpec::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<String>,
    pub mu1: Vec<ComponentSpec>,
    pub mu2: Vec<ComponentSpec>,
}

/// The linear forms of a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Forms {
    /// `(ξ1 + ξ2, ξ1 + αξ2)`
    Standard(PAdicScalar),
    /// `(α1ξ1 + α2ξ2, β1ξ1 + β2ξ2)`
    General { alpha1: PAdicScalar, alpha2: PAdicScalar, beta1: PAdicScalar, beta2: PAdicScalar },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub prime: Prime,
    pub forms: Forms,
    pub mu1: Distribution,
    pub mu2: Distribution,
}

fn parse_distribution(prime: Prime, specs: &[ComponentSpec], name: &str) -> Result<Distribution, CliError> {
    let components = specs
        .iter()
        .map(|spec| {
            let weight = parse_rational(&spec.weight)?;
            let shift = PAdicScalar::parse(&spec.shift, prime)?;
            match (spec.kind, spec.level) {
                (Kind::Ball, Some(k)) => Ok(Component::ball(weight, shift, k)),
                (Kind::Point, None) => Ok(Component::point(weight, shift)),
                (Kind::Ball, None) => Err(CliError::Config(format!("{name}: ball component without a level"))),
                (Kind::Point, Some(_)) => Err(CliError::Config(format!("{name}: point component with a level"))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Distribution::new(prime, components).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn nonzero(text: &str, prime: Prime, name: &str) -> Result<PAdicScalar, CliError> {
    let x = PAdicScalar::parse(text, prime)?;
    if x.is_zero() {
        return Err(CliError::Config(format!("{name} is zero")));
    }
    Ok(x)
}

impl Config {
    pub fn from_file(file: &ConfigFile) -> Result<Config, CliError> {
        let prime = Prime::new(file.p)?;
        let general = [&file.alpha1, &file.alpha2, &file.beta1, &file.beta2];
        let forms = match (&file.alpha, general) {
            (Some(alpha), [None, None, None, None]) => Forms::Standard(nonzero(alpha, prime, "alpha")?),
            (None, [Some(a1), Some(a2), Some(b1), Some(b2)]) => Forms::General {
                alpha1: nonzero(a1, prime, "alpha1")?,
                alpha2: nonzero(a2, prime, "alpha2")?,
                beta1: nonzero(b1, prime, "beta1")?,
                beta2: nonzero(b2, prime, "beta2")?,
            },
            _ => return Err(CliError::Config("give either alpha or all of alpha1, alpha2, beta1, beta2".into())),
        };
        Ok(Config {
            prime,
            forms,
            mu1: parse_distribution(prime, &file.mu1, "mu1")?,
            mu2: parse_distribution(prime, &file.mu2, "mu2")?,
        })
    }

    pub fn parse(text: &str) -> Result<Config, CliError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
        Config::from_file(&file)
    }

    pub fn to_file(&self) -> ConfigFile {
        let text = |x: &PAdicScalar| Some(x.to_string());
        let (alpha, alpha1, alpha2, beta1, beta2) = match &self.forms {
            Forms::Standard(a) => (text(a), None, None, None, None),
            Forms::General { alpha1, alpha2, beta1, beta2 } => {
                (None, text(alpha1), text(alpha2), text(beta1), text(beta2))
            }
        };
        ConfigFile {
            p: self.prime.get(),
            alpha,
            alpha1,
            alpha2,
            beta1,
            beta2,
            mu1: component_specs(&self.mu1),
            mu2: component_specs(&self.mu2),
        }
    }

    /// `(α, μ1', μ2')` for the equivalent forms `(ξ1' + ξ2', ξ1' + αξ2')`.
    pub fn standard_forms(&self) -> Result<(PAdicScalar, Distribution, Distribution), CliError> {
        match &self.forms {
            Forms::Standard(alpha) => Ok((alpha.clone(), self.mu1.clone(), self.mu2.clone())),
            Forms::General { alpha1, alpha2, beta1, beta2 } => {
                Ok(canonicalize_forms(alpha1, alpha2, beta1, beta2, &self.mu1, &self.mu2)?)
            }
        }
    }
}

pub fn parse_config(path: &Path) -> Result<Config, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
    Config::parse(&text)
}
