//! Named verification scenarios. Each scenario runs a fixed computation,
//! compares measured values with an oracle and returns a report of claims.

mod scenarios;

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::export::Artifacts;

/// Where the expected value of a claim comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Oracle {
    /// Closed-form separable spectra and exact rational arithmetic.
    #[serde(rename = "analytic")]
    Analytic,
    /// The one-dimensional radial eigenvalue solver.
    #[serde(rename = "1D-radial")]
    Radial1D,
    /// A value stated exactly by the theory being checked.
    #[serde(rename = "paper-exact")]
    PaperExact,
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Oracle::Analytic => "[analytic]",
            Oracle::Radial1D => "[1D-radial]",
            Oracle::PaperExact => "[paper-exact]",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub description: String,
    pub expected: String,
    pub measured: String,
    pub tolerance: String,
    pub oracle: Oracle,
    pub pass: bool,
}

impl Claim {
    /// `|measured / expected − 1| ≤ rel`, or `|measured| ≤ rel` when the
    /// expected value is zero.
    pub fn relative(description: impl Into<String>, expected: f64, measured: f64, rel: f64, oracle: Oracle) -> Claim {
        let err = if expected == 0.0 {
            measured.abs()
        } else {
            (measured / expected - 1.0).abs()
        };
        Claim {
            description: description.into(),
            expected: format!("{expected:.6}"),
            measured: format!("{measured:.6}"),
            tolerance: if expected == 0.0 {
                format!("abs {rel:e}")
            } else {
                format!("rel {rel:e}")
            },
            oracle,
            pass: err <= rel,
        }
    }

    pub fn within(description: impl Into<String>, lo: f64, hi: f64, measured: f64, oracle: Oracle) -> Claim {
        Claim {
            description: description.into(),
            expected: format!("[{lo:.6}, {hi:.6}]"),
            measured: format!("{measured:.6}"),
            tolerance: "interval".into(),
            oracle,
            pass: (lo..=hi).contains(&measured),
        }
    }

    pub fn at_most(description: impl Into<String>, bound: f64, measured: f64, oracle: Oracle) -> Claim {
        Claim {
            description: description.into(),
            expected: format!("<= {bound:.6}"),
            measured: format!("{measured:.6}"),
            tolerance: "none".into(),
            oracle,
            pass: measured <= bound,
        }
    }

    pub fn exact(
        description: impl Into<String>,
        expected: impl fmt::Display,
        measured: impl fmt::Display,
        pass: bool,
        oracle: Oracle,
    ) -> Claim {
        Claim {
            description: description.into(),
            expected: expected.to_string(),
            measured: measured.to_string(),
            tolerance: "exact".into(),
            oracle,
            pass,
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: expected {}, measured {} ({}) {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.description,
            self.expected,
            self.measured,
            self.tolerance,
            self.oracle
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Inputs {
    pub b: String,
    pub k: Option<usize>,
    /// Grids as `ntheta x nt (degree d)`.
    pub grids: Vec<String>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub anchor: String,
    pub inputs: Inputs,
    pub claims: Vec<Claim>,
    /// Artifact paths relative to the output directory.
    pub artifacts: Vec<String>,
    /// Kept out of the serialized report so reports stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!("scenario {} ({})\n", self.id, self.anchor);
        for c in &self.claims {
            out.push_str(&format!("  {c}\n"));
        }
        out.push_str(&format!(
            "  => {} in {:.1} s\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.wall_time.as_secs_f64()
        ));
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScenarioInfo {
    pub id: &'static str,
    /// The single statement the scenario checks.
    pub anchor: &'static str,
    pub description: &'static str,
}

const SCENARIOS: [ScenarioInfo; 5] = [
    ScenarioInfo {
        id: "lemma-C2",
        anchor: "low Neumann spectrum of the double cover; lambda_6 is Courant sharp for b <= 1/3",
        description: "numeric spectrum of C(2,b) against the exact list, clustering, and a nodal witness for lambda_6",
    },
    ScenarioInfo {
        id: "thm-cylinder",
        anchor: "minimal 3-partition energy is 9 pi^2 for b <= 1/(2 sqrt 5)",
        description: "partition search on C(1,b): energy, equal-third cuts, property B and the K3 neighbour graph",
    },
    ScenarioInfo {
        id: "prop-2-3",
        anchor: "minimal 3-partition energy is below 9 pi^2 for 2/3 < b < 1",
        description: "nodal 3-partition of the transverse mode and the partition search against 4 pi^2 / b^2",
    },
    ScenarioInfo {
        id: "k-thresholds",
        anchor: "minimal k-partition energy is k^2 pi^2 below the thinness threshold",
        description: "exact thresholds, the mixed-spectrum sufficient condition, and the partition search for k parts",
    },
    ScenarioInfo {
        id: "annulus-condthin",
        anchor: "thin annulus: lambda_6 of the cover is antisymmetric, Courant sharp and below the mixed lambda_2",
        description: "round annulus against the radial solver, deck splitting and the thinness condition",
    },
];

/// Registered scenarios in a fixed order.
pub fn list_scenarios() -> &'static [ScenarioInfo] {
    &SCENARIOS
}

/// Runs scenario `id`. Keys set in `overrides` replace the scenario's
/// defaults; artifacts are written when `artifacts` is given.
pub fn run_scenario(id: &str, overrides: &Config, artifacts: Option<&mut Artifacts>) -> Result<ScenarioReport> {
    let info = SCENARIOS.iter().find(|s| s.id == id).ok_or_else(|| {
        let known: Vec<&str> = SCENARIOS.iter().map(|s| s.id).collect();
        Error::invalid(format!("unknown scenario {id:?}; known: {}", known.join(", ")))
    })?;
    let start = Instant::now();
    let mut sink = artifacts;
    let (inputs, claims) = match info.id {
        "lemma-C2" => scenarios::lemma_c2(overrides, &mut sink)?,
        "thm-cylinder" => scenarios::thm_cylinder(overrides, &mut sink)?,
        "prop-2-3" => scenarios::prop_2_3(overrides, &mut sink)?,
        "k-thresholds" => scenarios::k_thresholds(overrides, &mut sink)?,
        "annulus-condthin" => scenarios::annulus_condthin(overrides, &mut sink)?,
        _ => unreachable!("registry and dispatch agree"),
    };
    let artifacts = sink
        .as_ref()
        .map(|a| a.entries().iter().map(|e| e.path.clone()).collect())
        .unwrap_or_default();
    Ok(ScenarioReport {
        id: info.id.to_string(),
        anchor: info.anchor.to_string(),
        inputs,
        claims,
        artifacts,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_stable_and_unique() {
        let ids: Vec<&str> = list_scenarios().iter().map(|s| s.id).collect();
        assert_eq!(ids, ["lemma-C2", "thm-cylinder", "prop-2-3", "k-thresholds", "annulus-condthin"]);
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn unknown_scenario_is_invalid() {
        assert!(matches!(
            run_scenario("nope", &Config::default(), None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn claims_render_with_oracle() {
        let c = Claim::relative("x", 2.0, 2.01, 0.01, Oracle::Analytic);
        assert!(c.pass);
        assert!(c.to_string().starts_with("[PASS] x:"));
        assert!(c.to_string().ends_with("[analytic]"));
        assert!(!Claim::relative("y", 0.0, 1e-3, 1e-6, Oracle::Radial1D).pass);
        assert!(Claim::within("z", 1.0, 2.0, 1.5, Oracle::PaperExact).pass);
    }
}
