use thinpart::config::Config;
use thinpart::export::{sha256_hex, Artifacts};
use thinpart::verify::{run_scenario, Oracle};

fn report_bytes(id: &str, over: &Config) -> (Vec<u8>, bool) {
    let dir = tempfile::tempdir().unwrap();
    let mut artifacts = Artifacts::new(dir.path()).unwrap();
    let report = run_scenario(id, over, Some(&mut artifacts)).unwrap();
    assert!(!report.artifacts.is_empty());
    for name in &report.artifacts {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    (serde_json::to_vec(&report).unwrap(), report.passed())
}

#[test]
fn annulus_report_is_reproducible_and_passes() {
    let (a, pass) = report_bytes("annulus-condthin", &Config::default());
    let (b, _) = report_bytes("annulus-condthin", &Config::default());
    assert!(pass);
    assert_eq!(sha256_hex(&a), sha256_hex(&b));
}

#[test]
fn every_claim_names_its_oracle() {
    let over = Config::from_toml_str("ntheta = 128\nnt = 20").unwrap();
    let report = run_scenario("lemma-C2", &over, None).unwrap();
    assert!(report.artifacts.is_empty());
    assert!(report.claims.iter().any(|c| c.oracle == Oracle::PaperExact));
    assert!(report.claims.iter().any(|c| c.oracle == Oracle::Analytic));
    for c in &report.claims {
        let line = c.to_string();
        assert!(
            line.ends_with("[analytic]") || line.ends_with("[1D-radial]") || line.ends_with("[paper-exact]"),
            "{line}"
        );
    }
    assert_eq!(report.passed(), report.claims.iter().all(|c| c.pass));
}

#[test]
fn overrides_outside_the_scenario_are_rejected() {
    let over = Config::from_toml_str("kind = \"annulus\"").unwrap();
    assert!(run_scenario("thm-cylinder", &over, None).is_err());
    let over = Config::from_toml_str("k = 4").unwrap();
    assert!(run_scenario("thm-cylinder", &over, None).is_err());
}
