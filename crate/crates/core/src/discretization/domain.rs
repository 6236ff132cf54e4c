use serde::{Deserialize, Serialize};

use crate::catalog::BcPair;
use crate::error::{Error, Result};

/// A `2π`-periodic radial profile given by its Fourier coefficients
/// `[a0, a1, b1, a2, b2, ...]`, i.e. `a0 + Σ aₖ cos kθ + bₖ sin kθ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub coefficients: Vec<f64>,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile {
            coefficients: vec![c],
        }
    }

    pub fn fourier(coefficients: Vec<f64>) -> Self {
        Profile { coefficients }
    }

    pub fn value(&self, theta: f64) -> f64 {
        let c = &self.coefficients;
        let mut v = c.first().copied().unwrap_or(0.0);
        for (k, pair) in c[1.min(c.len())..].chunks(2).enumerate() {
            let kf = (k + 1) as f64 * theta;
            v += pair[0] * kf.cos();
            if let Some(s) = pair.get(1) {
                v += s * kf.sin();
            }
        }
        v
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let c = &self.coefficients;
        let mut v = 0.0;
        for (k, pair) in c[1.min(c.len())..].chunks(2).enumerate() {
            let kk = (k + 1) as f64;
            let kf = kk * theta;
            v -= kk * pair[0] * kf.sin();
            if let Some(s) = pair.get(1) {
                v += kk * s * kf.cos();
            }
        }
        v
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    /// `S¹ × (0, b)` with perimeter `degree` (1 is the strip, 2 its double
    /// cover).
    CylinderStrip { b: f64, degree: u32 },
    /// `1 + b·h1(θ) < r < 1 + b·h2(θ)` around the unit circle, or its
    /// `degree`-fold angular cover.
    Annulus {
        b: f64,
        h1: Profile,
        h2: Profile,
        degree: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub bc: BcPair,
}

impl DomainSpec {
    pub fn strip(b: f64, degree: u32, bc: BcPair) -> Self {
        DomainSpec {
            kind: DomainKind::CylinderStrip { b, degree },
            bc,
        }
    }

    pub fn annulus(b: f64, h1: Profile, h2: Profile, degree: u32, bc: BcPair) -> Self {
        DomainSpec {
            kind: DomainKind::Annulus { b, h1, h2, degree },
            bc,
        }
    }

    /// Round annulus `1 < r < 1 + b`.
    pub fn round_annulus(b: f64, degree: u32, bc: BcPair) -> Self {
        Self::annulus(b, Profile::constant(0.0), Profile::constant(1.0), degree, bc)
    }

    pub fn width(&self) -> f64 {
        match self.kind {
            DomainKind::CylinderStrip { b, .. } | DomainKind::Annulus { b, .. } => b,
        }
    }

    pub fn degree(&self) -> u32 {
        match self.kind {
            DomainKind::CylinderStrip { degree, .. } | DomainKind::Annulus { degree, .. } => degree,
        }
    }

    pub fn with_bc(&self, bc: BcPair) -> Self {
        DomainSpec {
            kind: self.kind.clone(),
            bc,
        }
    }

    pub fn with_degree(&self, degree: u32) -> Self {
        let kind = match &self.kind {
            DomainKind::CylinderStrip { b, .. } => DomainKind::CylinderStrip { b: *b, degree },
            DomainKind::Annulus { b, h1, h2, .. } => DomainKind::Annulus {
                b: *b,
                h1: h1.clone(),
                h2: h2.clone(),
                degree,
            },
        };
        DomainSpec { kind, bc: self.bc }
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.width();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidDomain(format!("width must be positive, got {b}")));
        }
        let d = self.degree();
        if d != 1 && d != 2 {
            return Err(Error::InvalidDomain(format!(
                "covering degree must be 1 or 2, got {d}"
            )));
        }
        Ok(())
    }
}
