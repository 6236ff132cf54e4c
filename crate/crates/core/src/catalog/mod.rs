//! Closed-form spectra and partition-eigenvalue predictions for the model
//! domains.
//!
//! Everything on the cylinder strip is computed in exact rational arithmetic:
//! eigenvalues are reported as rational multiples of `π²`. The annulus oracle
//! in [`radial`] is semi-analytic (a 1D Sturm–Liouville solve per angular
//! mode).

mod radial;
mod strip;

pub use radial::{annulus_spectrum_round, annulus_spectrum_round_cover, RadialEigenvalue};
pub use strip::{
    circle_partition_eigenvalue, BoundStatus, courant_sharp_classification, cylinder_spectrum,
    mixed_second_eigenvalue, predicted_l3, thin_threshold, CirclePartition, CourantClassification,
    DeckClass, L3Prediction, MixedSecond, SharpnessFlag, SharpnessVerdict, SpectrumEntry,
    StripCase, ThresholdBranch, ThinnessThreshold,
};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for widths and eigenvalues over `π²`.
pub type Rational = Ratio<i64>;

pub const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

/// Boundary condition on one boundary component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Neumann,
    Dirichlet,
}

impl Bc {
    pub fn letter(self) -> char {
        match self {
            Bc::Neumann => 'N',
            Bc::Dirichlet => 'D',
        }
    }
}

impl std::str::FromStr for Bc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "neumann" => Ok(Bc::Neumann),
            "d" | "dirichlet" => Ok(Bc::Dirichlet),
            other => Err(Error::invalid(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Conditions on the bottom (`y = 0`, inner circle) and top (`y = b`, outer
/// circle) boundary components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BcPair {
    pub bottom: Bc,
    pub top: Bc,
}

impl BcPair {
    pub const NN: BcPair = BcPair::new(Bc::Neumann, Bc::Neumann);
    pub const ND: BcPair = BcPair::new(Bc::Neumann, Bc::Dirichlet);
    pub const DN: BcPair = BcPair::new(Bc::Dirichlet, Bc::Neumann);
    pub const DD: BcPair = BcPair::new(Bc::Dirichlet, Bc::Dirichlet);

    pub const fn new(bottom: Bc, top: Bc) -> Self {
        BcPair { bottom, top }
    }

    pub fn is_mixed(self) -> bool {
        self.bottom != self.top
    }

    pub fn code(self) -> String {
        format!("{}{}", self.bottom.letter(), self.top.letter())
    }
}

impl std::fmt::Display for BcPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.code())
    }
}

impl std::str::FromStr for BcPair {
    type Err = Error;

    /// Accepts two-letter codes such as `NN`, `nd`, `DN`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 2 {
            return Err(Error::invalid(format!("boundary pair must be two letters, got {s:?}")));
        }
        let bottom = chars[0].to_string().parse()?;
        let top = chars[1].to_string().parse()?;
        Ok(BcPair { bottom, top })
    }
}

/// Parses an exact rational from `"0.3"`, `"3/10"` or `"2"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as an exact rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if frac_part.len() > 15 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    let int: i64 = if int_digits.is_empty() {
        0
    } else {
        int_digits.parse().map_err(|_| bad())?
    };
    let scale = 10_i64.pow(frac_part.len() as u32);
    let frac: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let magnitude = Rational::new(int * scale + frac, scale);
    Ok(if negative { -magnitude } else { magnitude })
}

/// Best rational approximation of a float width, for callers holding `f64`.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::approximate_float(x)
        .ok_or_else(|| Error::invalid(format!("{x} has no rational approximation")))
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.3").unwrap(), Rational::new(3, 10));
        assert_eq!(parse_rational("3/10").unwrap(), Rational::new(3, 10));
        assert_eq!(parse_rational("2").unwrap(), Rational::from_integer(2));
        assert_eq!(parse_rational("1.5").unwrap(), Rational::new(3, 2));
        assert_eq!(parse_rational(".25").unwrap(), Rational::new(1, 4));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn bc_pair_codes() {
        assert_eq!("nd".parse::<BcPair>().unwrap(), BcPair::ND);
        assert_eq!(BcPair::DN.code(), "DN");
        assert!("N".parse::<BcPair>().is_err());
    }
}
