use liouville_core::{Boundary, Cadence, ConeSpec, Geometry, HomogeneousGradientField, InitialData, Perturbation, SolverConfig, StopRule};
use liouville_lab::config::{CampaignConfig, Family, SimulationConfig};
use liouville_lab::harness::{envelope_from, run_campaign, run_member, RunStatus};
use liouville_lab::output::{regenerate, trace_path, write_campaign};
use liouville_lab::LabError;

fn flat_sim() -> SimulationConfig {
    SimulationConfig {
        geometry: Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann),
        nodes: 11,
        initial: InitialData::Flat { values: vec![0.0] },
        perturbation: Perturbation::NONE,
        solver: SolverConfig::default(),
        stop: StopRule::sup_norm(1e6),
        cadence: Cadence::default(),
    }
}

fn flat_campaign(runs: usize, value: f64) -> CampaignConfig {
    CampaignConfig {
        runs,
        family: Family::Fixed { data: InitialData::Flat { values: vec![value] } },
        cone: ConeSpec::default(),
        amplitude_scale: 1.0,
        check_every: 10,
    }
}

#[test]
fn flat_run_recovers_the_exact_constant() {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let (report, _) = run_campaign(&field, &flat_sim(), &flat_campaign(1, 5.0), 0).unwrap();
    assert!(report.c_tilde_forced);
    assert_eq!(report.c_tilde, 0.0);
    assert_eq!(report.violations, 0);
    let exact = 0.5f64.sqrt();
    assert!((report.c / exact - 1.0).abs() < 0.05, "{}", report.c);
}

#[test]
fn flat_rate_table() {
    for p in [2.0, 3.0, 4.0] {
        let field = HomogeneousGradientField::scalar_power(p).unwrap();
        let (report, _) = run_campaign(&field, &flat_sim(), &flat_campaign(1, 2.0), 0).unwrap();
        let run = &report.runs[0];
        assert_eq!(run.status, RunStatus::Blowup, "{run:?}");
        let beta = run.beta_fit.unwrap();
        assert!((beta - 1.0 / (p - 1.0)).abs() < 0.02, "p={p} β={beta}");
    }
}

#[test]
fn empty_campaign_is_an_error() {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let r = run_campaign(&field, &flat_sim(), &flat_campaign(0, 5.0), 0);
    assert!(matches!(r, Err(LabError::EmptyCampaign)));
}

#[test]
fn failed_run_is_reported() {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let sim = flat_sim();
    let capped = SimulationConfig { stop: StopRule { time: None, sup_norm: None, steps: Some(3) }, ..sim.clone() };
    let campaign = flat_campaign(2, 5.0);
    let outcomes = vec![run_member(&field, &sim, &campaign, 0, 0), run_member(&field, &capped, &campaign, 1, 1)];
    assert_eq!(outcomes[1].record.status, RunStatus::Failed);
    let report = envelope_from(field.beta(), &sim, &outcomes);
    assert_eq!(report.failures().count(), 1);
    let dir = tempfile::tempdir().unwrap();
    write_campaign(dir.path(), &report, &outcomes).unwrap();
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    let failures = md.split("## Failures").nth(1).unwrap();
    let failures = failures.split("## ").next().unwrap();
    assert!(failures.contains("run-0001"), "{md}");
    assert!(!failures.contains("run-0000"), "{md}");
}

#[test]
fn fixed_seed_gives_identical_files() {
    let field = HomogeneousGradientField::gradient_coupled(0.0, 0.5).unwrap();
    let sim = SimulationConfig {
        geometry: Geometry::line(20.0, Boundary::FarField, Boundary::FarField),
        nodes: 201,
        initial: InitialData::Flat { values: vec![0.0, 0.0] },
        stop: StopRule::time(1.0).or_sup_norm(1e5),
        ..flat_sim()
    };
    let campaign = CampaignConfig {
        runs: 6,
        family: Family::RandomInCone { amplitude: 4.0, bumps: 3 },
        cone: ConeSpec::pair([4, 4, 4, 4]),
        amplitude_scale: 1.0,
        check_every: 10,
    };
    let read = |seed| {
        let (report, outcomes) = run_campaign(&field, &sim, &campaign, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_campaign(dir.path(), &report, &outcomes).unwrap();
        ["summary.csv", "envelope.svg", "report.md"].map(|f| std::fs::read(dir.path().join(f)).unwrap())
    };
    assert_eq!(read(9), read(9));
    assert_ne!(read(9)[0], read(10)[0]);
}

#[test]
fn report_regenerates_and_needs_every_trace() {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let (report, outcomes) = run_campaign(&field, &flat_sim(), &flat_campaign(2, 5.0), 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_campaign(dir.path(), &report, &outcomes).unwrap();
    let before = std::fs::read(dir.path().join("summary.csv")).unwrap();
    std::fs::remove_file(dir.path().join("summary.csv")).unwrap();
    assert_eq!(regenerate(dir.path()).unwrap(), report);
    assert_eq!(std::fs::read(dir.path().join("summary.csv")).unwrap(), before);
    std::fs::remove_file(trace_path(dir.path(), "run-0001")).unwrap();
    assert!(matches!(regenerate(dir.path()), Err(LabError::MissingTrace(_))));
}
