//! Run configuration: a flat TOML table whose keys can also be set from the
//! command line.
//!
//! ```toml
//! kind = "strip"          # or "annulus"
//! b = "3/10"              # exact fraction, or a decimal number
//! degree = 1
//! ntheta = 256
//! nt = 52
//! bc_bottom = "neumann"   # inner circle on annuli
//! bc_top = "neumann"
//! h1 = [0.0]              # annulus profiles: [a0, a1, b1, a2, b2, ...]
//! h2 = [1.0, 0.1]
//! k = 3
//! restarts = 8
//! seed = 2011
//! tol = 1e-8
//! count = 10
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{parse_rational, to_f64, Bc, BcPair, Rational};
use crate::discretization::{DomainSpec, Profile};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Strip,
    Annulus,
}

/// A width given either as a decimal number or as an exact string such as
/// `"3/10"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Width {
    Number(f64),
    Text(String),
}

impl Width {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Width::Text(s) => parse_rational(s),
            Width::Number(x) => parse_rational(&format!("{x}")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kind: Option<Kind>,
    pub b: Option<Width>,
    pub degree: Option<u32>,
    pub ntheta: Option<usize>,
    pub nt: Option<usize>,
    pub bc_bottom: Option<Bc>,
    pub bc_top: Option<Bc>,
    pub h1: Option<Vec<f64>>,
    pub h2: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub count: Option<usize>,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overlay(self, other: Config) -> Config {
        Config {
            kind: other.kind.or(self.kind),
            b: other.b.or(self.b),
            degree: other.degree.or(self.degree),
            ntheta: other.ntheta.or(self.ntheta),
            nt: other.nt.or(self.nt),
            bc_bottom: other.bc_bottom.or(self.bc_bottom),
            bc_top: other.bc_top.or(self.bc_top),
            h1: other.h1.or(self.h1),
            h2: other.h2.or(self.h2),
            k: other.k.or(self.k),
            restarts: other.restarts.or(self.restarts),
            seed: other.seed.or(self.seed),
            tol: other.tol.or(self.tol),
            count: other.count.or(self.count),
        }
    }

    pub fn width(&self) -> Result<Rational> {
        let b = self
            .b
            .as_ref()
            .ok_or_else(|| Error::Config("missing key `b`".into()))?
            .to_rational()?;
        if b <= Rational::from_integer(0) {
            return Err(Error::Config(format!("`b` must be positive, got {b}")));
        }
        Ok(b)
    }

    pub fn bc(&self) -> BcPair {
        BcPair::new(
            self.bc_bottom.unwrap_or(Bc::Neumann),
            self.bc_top.unwrap_or(Bc::Neumann),
        )
    }

    /// Domain described by the configuration. Missing keys default to a
    /// degree-1 Neumann strip and a round annulus.
    pub fn domain(&self) -> Result<DomainSpec> {
        let b = to_f64(self.width()?);
        let degree = self.degree.unwrap_or(1);
        let bc = self.bc();
        let spec = match self.kind.unwrap_or(Kind::Strip) {
            Kind::Strip => {
                if self.h1.is_some() || self.h2.is_some() {
                    return Err(Error::Config("profiles `h1`/`h2` only apply to annuli".into()));
                }
                DomainSpec::strip(b, degree, bc)
            }
            Kind::Annulus => {
                let h1 = Profile::fourier(self.h1.clone().unwrap_or_else(|| vec![0.0]));
                let h2 = Profile::fourier(self.h2.clone().unwrap_or_else(|| vec![1.0]));
                DomainSpec::annulus(b, h1, h2, degree, bc)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid_size(&self) -> Result<(usize, usize)> {
        match (self.ntheta, self.nt) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Config("both `ntheta` and `nt` are required".into())),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::DomainKind;

    #[test]
    fn parses_the_documented_schema() {
        let c = Config::from_toml_str(
            r#"
            kind = "annulus"
            b = "1/10"
            degree = 2
            ntheta = 64
            nt = 8
            bc_bottom = "dirichlet"
            h1 = [0.0]
            h2 = [1.0, 0.2]
            k = 3
            seed = 5
            tol = 1e-9
            "#,
        )
        .unwrap();
        assert_eq!(c.width().unwrap(), Rational::new(1, 10));
        assert_eq!(c.bc(), BcPair::DN);
        let d = c.domain().unwrap();
        assert_eq!(d.degree(), 2);
        assert!(matches!(d.kind, DomainKind::Annulus { .. }));
        assert_eq!(c.grid_size().unwrap(), (64, 8));
    }

    #[test]
    fn decimal_width_is_exact() {
        let c = Config::from_toml_str("b = 0.3").unwrap();
        assert_eq!(c.width().unwrap(), Rational::new(3, 10));
    }

    #[test]
    fn overlay_prefers_the_override() {
        let base = Config::from_toml_str("b = 0.3\nk = 3\nnt = 10").unwrap();
        let over = Config {
            k: Some(5),
            ..Config::default()
        };
        let c = base.overlay(over);
        assert_eq!(c.k, Some(5));
        assert_eq!(c.nt, Some(10));
    }

    #[test]
    fn rejects_unknown_and_bad_keys() {
        assert!(matches!(Config::from_toml_str("width = 1"), Err(Error::Config(_))));
        assert!(Config::from_toml_str("b = -1").unwrap().width().is_err());
        assert!(Config::from_toml_str("b = 0.2\nh1 = [0.0]").unwrap().domain().is_err());
        assert!(Config::default().grid_size().is_err());
    }
}
