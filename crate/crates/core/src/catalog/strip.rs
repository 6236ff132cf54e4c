use serde::Serialize;

use super::{to_f64, BcPair, Rational, PI2};
use crate::error::{Error, Result};

/// Parity class of a mode under the half-period shift of the double cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeckClass {
    Symmetric,
    Antisymmetric,
    /// A merged tie containing modes of both parities.
    Mixed,
    NotApplicable,
}

impl DeckClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DeckClass::Symmetric => "symmetric",
            DeckClass::Antisymmetric => "antisymmetric",
            DeckClass::Mixed => "mixed",
            DeckClass::NotApplicable => "not-applicable",
        }
    }
}

/// One distinct eigenvalue of a strip, with every `(m, n)` mode realizing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    #[serde(serialize_with = "ser_ratio")]
    pub value_over_pi2: Rational,
    /// `(m, n)` pairs: `m` angular, `n` transverse.
    pub modes: Vec<(u32, u32)>,
    pub multiplicity: u32,
    pub deck_class: DeckClass,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl SpectrumEntry {
    pub fn value(&self) -> f64 {
        to_f64(self.value_over_pi2) * PI2
    }

    /// Lowest angular index among the modes of this entry.
    pub fn m(&self) -> u32 {
        self.modes.iter().map(|&(m, _)| m).min().unwrap_or(0)
    }

    pub fn n(&self) -> u32 {
        self.modes.iter().map(|&(_, n)| n).min().unwrap_or(0)
    }
}

fn angular_term(m: u32, degree: u32) -> Rational {
    // (2m/d)^2
    let m = i64::from(m);
    match degree {
        1 => Rational::from_integer(4 * m * m),
        _ => Rational::from_integer(m * m),
    }
}

fn transverse_term(n: u32, b: Rational, bc: BcPair) -> Rational {
    let n = i64::from(n);
    let inv_b2 = (b * b).recip();
    if bc.is_mixed() {
        Rational::new((2 * n + 1) * (2 * n + 1), 4) * inv_b2
    } else {
        Rational::from_integer(n * n) * inv_b2
    }
}

fn first_transverse(bc: BcPair) -> u32 {
    if bc == BcPair::DD {
        1
    } else {
        0
    }
}

fn mode_multiplicity(m: u32) -> u32 {
    if m == 0 {
        1
    } else {
        2
    }
}

/// Exact low spectrum of `-Δ` on the strip `S¹(degree) × (0, b)`.
///
/// Eigenvalues are `π²((2m/d)² + τ(n))` with `τ(n) = n²/b²` for equal
/// conditions (`n ≥ 1` when both are Dirichlet) and `τ(n) = (2n+1)²/(4b²)`
/// for mixed conditions. Entries are merged on exact ties and cover at least
/// the first `count` eigenvalues counted with multiplicity; the last entry is
/// never split.
pub fn cylinder_spectrum(
    b: Rational,
    degree: u32,
    bc: BcPair,
    count: usize,
) -> Result<Vec<SpectrumEntry>> {
    if b <= Rational::from_integer(0) {
        return Err(Error::invalid(format!("width must be positive, got {b}")));
    }
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    if degree != 1 && degree != 2 {
        return Err(Error::invalid(format!("covering degree must be 1 or 2, got {degree}")));
    }
    let n0 = first_transverse(bc);
    let base = transverse_term(n0, b, bc);

    // The count-th value along either ladder bounds the count-th eigenvalue.
    let mut seen = 0usize;
    let mut m = 0u32;
    let ladder_m = loop {
        seen += mode_multiplicity(m) as usize;
        if seen >= count {
            break angular_term(m, degree) + base;
        }
        m += 1;
    };
    let ladder_n = transverse_term(n0 + count as u32 - 1, b, bc);
    let cap = ladder_m.min(ladder_n);

    let mut modes: Vec<(Rational, u32, u32)> = Vec::new();
    let mut m = 0u32;
    while angular_term(m, degree) + base <= cap {
        let mut n = n0;
        loop {
            let v = angular_term(m, degree) + transverse_term(n, b, bc);
            if v > cap {
                break;
            }
            modes.push((v, m, n));
            n += 1;
        }
        m += 1;
    }
    modes.sort();

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for (v, m, n) in modes {
        let class = if degree == 2 {
            if m % 2 == 0 {
                DeckClass::Symmetric
            } else {
                DeckClass::Antisymmetric
            }
        } else {
            DeckClass::NotApplicable
        };
        match entries.last_mut() {
            Some(last) if last.value_over_pi2 == v => {
                last.modes.push((m, n));
                last.multiplicity += mode_multiplicity(m);
                if last.deck_class != class {
                    last.deck_class = DeckClass::Mixed;
                }
            }
            _ => entries.push(SpectrumEntry {
                value_over_pi2: v,
                modes: vec![(m, n)],
                multiplicity: mode_multiplicity(m),
                deck_class: class,
            }),
        }
    }

    let mut total = 0usize;
    let keep = entries
        .iter()
        .position(|e| {
            total += e.multiplicity as usize;
            total >= count
        })
        .map_or(entries.len(), |i| i + 1);
    entries.truncate(keep);
    Ok(entries)
}

/// Second eigenvalue of the mixed Neumann/Dirichlet strip, in two versions.
///
/// `separation` is what mode enumeration gives, `min(9/(4b²), 1/(4b²) + 4)`.
/// `printed` is the closed form `min(1/b², 1/(4b²) + 4)`. The two agree when
/// the second argument binds, which is when `b² ≤ 1/8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MixedSecond {
    pub separation: Rational,
    pub printed: Rational,
}

impl MixedSecond {
    pub fn discrepant(&self) -> bool {
        self.separation != self.printed
    }
}

pub fn mixed_second_eigenvalue(b: Rational) -> Result<MixedSecond> {
    if b <= Rational::from_integer(0) {
        return Err(Error::invalid(format!("width must be positive, got {b}")));
    }
    let inv_b2 = (b * b).recip();
    let quarter = inv_b2 / 4;
    let four = Rational::from_integer(4);
    Ok(MixedSecond {
        separation: (quarter * 9).min(quarter + four),
        printed: inv_b2.min(quarter + four),
    })
}

/// `𝔏ₖ` of the unit-perimeter circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CirclePartition {
    pub k: u32,
    pub value_over_pi2: u64,
    pub is_eigenvalue: bool,
    /// `false` for `k = 1`, where only the parity rule is extrapolated.
    pub covered_by_theory: bool,
}

impl CirclePartition {
    pub fn value(&self) -> f64 {
        self.value_over_pi2 as f64 * PI2
    }
}

pub fn circle_partition_eigenvalue(k: u32) -> Result<CirclePartition> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(CirclePartition {
        k,
        value_over_pi2: u64::from(k) * u64::from(k),
        is_eigenvalue: k % 2 == 0,
        covered_by_theory: k != 1,
    })
}

/// Regime of the Neumann strip `C(1, b)` by the ordering of its low modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StripCase {
    /// `b < 1/2`: `λ₂ = λ₃ = 4π² < λ₄`.
    Thin,
    /// `b = 1/2`: `π²/b² = 4π²`, a triple eigenvalue. Not one of the four
    /// listed regimes.
    Transition,
    /// `1/2 < b < 1`: `λ₂ = π²/b²`, `λ₃ = λ₄ = 4π²`.
    Intermediate,
    /// `b = 1`: `λ₂ = π²`, `λ₃ = λ₄ = λ₅ = 4π²`.
    Square,
    /// `b > 1`: `λ₂ = π²/b²`, `λ₃ = 4π²/b²`.
    Wide,
}

impl StripCase {
    /// Case number 1–4, `None` at the transition width.
    pub fn index(self) -> Option<u8> {
        match self {
            StripCase::Thin => Some(1),
            StripCase::Transition => None,
            StripCase::Intermediate => Some(2),
            StripCase::Square => Some(3),
            StripCase::Wide => Some(4),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharpnessVerdict {
    Sharp,
    NotSharp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SharpnessFlag {
    /// 1-based eigenvalue index.
    pub index: usize,
    pub verdict: SharpnessVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CourantClassification {
    pub case: StripCase,
    pub low_spectrum: Vec<SpectrumEntry>,
    pub flags: Vec<SharpnessFlag>,
}

impl CourantClassification {
    pub fn verdict(&self, index: usize) -> Option<SharpnessVerdict> {
        self.flags.iter().find(|f| f.index == index).map(|f| f.verdict)
    }
}

/// Courant-sharpness facts for the low Neumann eigenvalues of `C(1, b)`.
pub fn courant_sharp_classification(b: Rational) -> Result<CourantClassification> {
    let half = Rational::new(1, 2);
    let one = Rational::from_integer(1);
    let low_spectrum = cylinder_spectrum(b, 1, BcPair::NN, 6)?;
    let case = if b < half {
        StripCase::Thin
    } else if b == half {
        StripCase::Transition
    } else if b < one {
        StripCase::Intermediate
    } else if b == one {
        StripCase::Square
    } else {
        StripCase::Wide
    };
    let mut flags = vec![SharpnessFlag {
        index: 3,
        verdict: if b >= one {
            SharpnessVerdict::Sharp
        } else {
            SharpnessVerdict::NotSharp
        },
    }];
    if b > half && b <= one {
        flags.push(SharpnessFlag {
            index: 4,
            verdict: SharpnessVerdict::NotSharp,
        });
    }
    if b == one {
        flags.push(SharpnessFlag {
            index: 5,
            verdict: SharpnessVerdict::NotSharp,
        });
    }
    Ok(CourantClassification {
        case,
        low_spectrum,
        flags,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThresholdBranch {
    /// `k ≡ 3 (mod 4)`: `b ≤ 1/√((3k+1)(k−1))`.
    ThreeModFour,
    /// `k ≡ 1 (mod 4)`: `b ≤ 1/√((3k−1)(k+1))`.
    OneModFour,
}

/// Width below which the `k` equal sectors are a minimal `k`-partition of
/// the Neumann strip, with energy `k²π²`. The bound is `1/√radicand`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThinnessThreshold {
    pub k: u32,
    pub radicand: u64,
    pub branch: ThresholdBranch,
}

impl ThinnessThreshold {
    pub fn bound(&self) -> f64 {
        1.0 / (self.radicand as f64).sqrt()
    }

    /// `bound²`, exactly.
    pub fn bound_squared(&self) -> Rational {
        Rational::new(1, self.radicand as i64)
    }

    /// Exact test `b ≤ bound`.
    pub fn admits(&self, b: Rational) -> bool {
        b > Rational::from_integer(0) && b * b <= self.bound_squared()
    }

    pub fn surd(&self) -> String {
        format!("1/sqrt({})", self.radicand)
    }
}

pub fn thin_threshold(k: u32) -> Result<ThinnessThreshold> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::invalid(format!("k must be odd and at least 3, got {k}")));
    }
    let kk = u64::from(k);
    let (radicand, branch) = if k % 4 == 3 {
        ((3 * kk + 1) * (kk - 1), ThresholdBranch::ThreeModFour)
    } else {
        ((3 * kk - 1) * (kk + 1), ThresholdBranch::OneModFour)
    };
    Ok(ThinnessThreshold {
        k,
        radicand,
        branch,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    /// A nodal 3-partition is known to beat the equal sectors.
    NodalBeatable,
    Unknown,
}

/// What is known about `𝔏₃` of the Neumann strip `C(1, b)`, over `π²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum L3Prediction {
    Exact {
        #[serde(serialize_with = "ser_ratio")]
        value_over_pi2: Rational,
    },
    UpperBound {
        #[serde(serialize_with = "ser_ratio")]
        value_over_pi2: Rational,
        status: BoundStatus,
    },
}

impl L3Prediction {
    pub fn value_over_pi2(&self) -> Rational {
        match *self {
            L3Prediction::Exact { value_over_pi2 } => value_over_pi2,
            L3Prediction::UpperBound { value_over_pi2, .. } => value_over_pi2,
        }
    }

    pub fn value(&self) -> f64 {
        to_f64(self.value_over_pi2()) * PI2
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, L3Prediction::Exact { .. })
    }
}

pub fn predicted_l3(b: Rational) -> Result<L3Prediction> {
    if b <= Rational::from_integer(0) {
        return Err(Error::invalid(format!("width must be positive, got {b}")));
    }
    let one = Rational::from_integer(1);
    let nine = Rational::from_integer(9);
    let wide = Rational::from_integer(4) / (b * b);
    Ok(if b * b <= Rational::new(1, 20) {
        L3Prediction::Exact { value_over_pi2: nine }
    } else if b >= one {
        L3Prediction::Exact { value_over_pi2: wide }
    } else if b > Rational::new(2, 3) {
        L3Prediction::UpperBound {
            value_over_pi2: nine.min(wide),
            status: BoundStatus::NodalBeatable,
        }
    } else {
        L3Prediction::UpperBound {
            value_over_pi2: nine,
            status: BoundStatus::Unknown,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn values(entries: &[SpectrumEntry]) -> Vec<(Rational, u32)> {
        entries
            .iter()
            .map(|e| (e.value_over_pi2, e.multiplicity))
            .collect()
    }

    /// Independent oracle: enumerate every mode in a fixed generous box and
    /// sort, expanding multiplicities.
    fn brute_force(b: Rational, degree: u32, bc: BcPair, count: usize) -> Vec<Rational> {
        let mut all = Vec::new();
        for m in 0..50u32 {
            let ang = Rational::from_integer(i64::from(2 * m * 2 * m) / i64::from(degree * degree));
            for n in 0..50u32 {
                let nn = i64::from(n);
                let tr = match (bc.bottom, bc.top) {
                    (a, c) if a != c => r((2 * nn + 1) * (2 * nn + 1), 4) / (b * b),
                    (super::super::Bc::Dirichlet, _) if n == 0 => continue,
                    _ => Rational::from_integer(nn * nn) / (b * b),
                };
                let mult = if m == 0 { 1 } else { 2 };
                for _ in 0..mult {
                    all.push(ang + tr);
                }
            }
        }
        all.sort();
        all.truncate(count);
        all
    }

    fn expand(entries: &[SpectrumEntry], count: usize) -> Vec<Rational> {
        let mut out = Vec::new();
        for e in entries {
            for _ in 0..e.multiplicity {
                out.push(e.value_over_pi2);
            }
        }
        out.truncate(count);
        out
    }

    #[test]
    fn thin_strip_low_modes() {
        let s = cylinder_spectrum(r(1, 5), 1, BcPair::NN, 4).unwrap();
        assert_eq!(
            values(&s),
            vec![(r(0, 1), 1), (r(4, 1), 2), (r(16, 1), 2)]
        );
        let s = cylinder_spectrum(r(1, 5), 1, BcPair::NN, 6).unwrap();
        assert_eq!(s[3].value_over_pi2, r(25, 1));
        assert_eq!(s[3].multiplicity, 1);
        assert_eq!(s[3].modes, vec![(0, 1)]);
    }

    #[test]
    fn double_cover_low_modes() {
        let s = cylinder_spectrum(r(3, 10), 2, BcPair::NN, 7).unwrap();
        assert_eq!(
            values(&s),
            vec![(r(0, 1), 1), (r(1, 1), 2), (r(4, 1), 2), (r(9, 1), 2)]
        );
        assert_eq!(s[3].deck_class, DeckClass::Antisymmetric);
        assert_eq!(s[2].deck_class, DeckClass::Symmetric);
    }

    #[test]
    fn wide_strip_second_eigenvalue() {
        let s = cylinder_spectrum(r(2, 1), 1, BcPair::NN, 2).unwrap();
        assert_eq!(s[1].value_over_pi2, r(1, 4));
    }

    #[test]
    fn mixed_strip_values() {
        let s = cylinder_spectrum(r(1, 5), 1, BcPair::ND, 1).unwrap();
        assert_eq!(values(&s), vec![(r(25, 4), 1)]);
        let s = cylinder_spectrum(r(1, 5), 1, BcPair::ND, 3).unwrap();
        assert_eq!(values(&s), vec![(r(25, 4), 1), (r(41, 4), 2)]);
        let dn = cylinder_spectrum(r(1, 5), 1, BcPair::DN, 3).unwrap();
        assert_eq!(values(&dn), values(&s));
    }

    #[test]
    fn agrees_with_brute_force() {
        let widths = [r(1, 5), r(3, 10), r(7, 10), r(1, 1), r(3, 2), r(2, 1), r(1, 10)];
        for &b in &widths {
            for degree in [1, 2] {
                for bc in [BcPair::NN, BcPair::ND, BcPair::DN, BcPair::DD] {
                    for count in [1, 2, 5, 9, 17] {
                        let got = expand(&cylinder_spectrum(b, degree, bc, count).unwrap(), count);
                        assert_eq!(got, brute_force(b, degree, bc, count), "b={b} d={degree} {bc} {count}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(cylinder_spectrum(r(0, 1), 1, BcPair::NN, 3).is_err());
        assert!(cylinder_spectrum(r(-1, 5), 1, BcPair::NN, 3).is_err());
        assert!(cylinder_spectrum(r(1, 5), 1, BcPair::NN, 0).is_err());
        assert!(cylinder_spectrum(r(1, 5), 3, BcPair::NN, 2).is_err());
    }

    #[test]
    fn circle_values() {
        let c2 = circle_partition_eigenvalue(2).unwrap();
        assert_eq!((c2.value_over_pi2, c2.is_eigenvalue), (4, true));
        let c3 = circle_partition_eigenvalue(3).unwrap();
        assert_eq!((c3.value_over_pi2, c3.is_eigenvalue), (9, false));
        let c6 = circle_partition_eigenvalue(6).unwrap();
        assert_eq!((c6.value_over_pi2, c6.is_eigenvalue), (36, true));
        let c1 = circle_partition_eigenvalue(1).unwrap();
        assert!(!c1.is_eigenvalue && !c1.covered_by_theory);
    }

    #[test]
    fn classification_cases() {
        let c = courant_sharp_classification(r(2, 5)).unwrap();
        assert_eq!(c.case.index(), Some(1));
        assert_eq!(c.verdict(3), Some(SharpnessVerdict::NotSharp));

        let c = courant_sharp_classification(r(1, 1)).unwrap();
        assert_eq!(c.case.index(), Some(3));
        assert_eq!(c.verdict(3), Some(SharpnessVerdict::Sharp));
        assert_eq!(c.verdict(5), Some(SharpnessVerdict::NotSharp));

        let c = courant_sharp_classification(r(2, 1)).unwrap();
        assert_eq!(c.case.index(), Some(4));
        assert_eq!(c.verdict(3), Some(SharpnessVerdict::Sharp));
        assert_eq!(c.low_spectrum[2].value_over_pi2, r(1, 1));

        let c = courant_sharp_classification(r(7, 10)).unwrap();
        assert_eq!(c.case.index(), Some(2));
        assert_eq!(c.verdict(4), Some(SharpnessVerdict::NotSharp));

        assert_eq!(courant_sharp_classification(r(1, 2)).unwrap().case, StripCase::Transition);
    }

    #[test]
    fn thresholds() {
        let t3 = thin_threshold(3).unwrap();
        assert_eq!(t3.radicand, 20);
        assert!((t3.bound() - 0.223_606_797_749_979).abs() < 1e-15);
        assert_eq!(thin_threshold(5).unwrap().radicand, 84);
        assert_eq!(thin_threshold(7).unwrap().radicand, 132);
        assert_eq!(thin_threshold(5).unwrap().branch, ThresholdBranch::OneModFour);
        assert!(thin_threshold(4).is_err());
        assert!(thin_threshold(1).is_err());
        for k in (3..40).step_by(2) {
            let t = thin_threshold(k).unwrap();
            let kk = i64::from(k);
            let product = match t.branch {
                ThresholdBranch::ThreeModFour => (3 * kk + 1) * (kk - 1),
                ThresholdBranch::OneModFour => (3 * kk - 1) * (kk + 1),
            };
            assert_eq!(t.bound_squared() * product, Rational::from_integer(1));
        }
    }

    #[test]
    fn threshold_matches_mixed_spectrum_condition() {
        // The bound is exactly where the ((k+1)/2)-th mixed eigenvalue
        // reaches k^2, found here by bisection over exact rational widths.
        for k in [3u32, 5, 7, 9, 11] {
            let t = thin_threshold(k).unwrap();
            let idx = ((k + 1) / 2) as usize;
            let holds = |b: Rational| {
                let e = expand(&cylinder_spectrum(b, 1, BcPair::DN, idx).unwrap(), idx);
                e[idx - 1] >= Rational::from_integer(i64::from(k * k))
            };
            let below = rational_below(t.bound(), 1e-6);
            let above = rational_below(t.bound() * (1.0 + 2e-6), 0.0);
            assert!(holds(below), "k={k}");
            assert!(!holds(above), "k={k}");
        }
    }

    fn rational_below(x: f64, rel: f64) -> Rational {
        let scale = 1_000_000_000i64;
        Rational::new((x * (1.0 - rel) * scale as f64).floor() as i64, scale)
    }

    #[test]
    fn mixed_second_discrepancy() {
        let thin = mixed_second_eigenvalue(r(1, 5)).unwrap();
        assert!(!thin.discrepant());
        assert_eq!(thin.separation, r(41, 4));
        let wide = mixed_second_eigenvalue(r(1, 1)).unwrap();
        assert!(wide.discrepant());
        assert_eq!(wide.separation, r(9, 4));
        assert_eq!(wide.printed, r(1, 1));
        // The k = 3 threshold condition is unaffected.
        let at = mixed_second_eigenvalue(r(1, 5)).unwrap();
        assert!(at.separation >= Rational::from_integer(9));
    }

    #[test]
    fn l3_predictions() {
        assert_eq!(
            predicted_l3(r(1, 5)).unwrap(),
            L3Prediction::Exact { value_over_pi2: r(9, 1) }
        );
        assert_eq!(
            predicted_l3(r(2, 1)).unwrap(),
            L3Prediction::Exact { value_over_pi2: r(1, 1) }
        );
        assert_eq!(
            predicted_l3(r(4, 5)).unwrap(),
            L3Prediction::UpperBound {
                value_over_pi2: r(25, 4),
                status: BoundStatus::NodalBeatable
            }
        );
        assert!(matches!(
            predicted_l3(r(1, 2)).unwrap(),
            L3Prediction::UpperBound { status: BoundStatus::Unknown, .. }
        ));
    }
}
