use confound_core::synth::{Family, NoiseKind};
use confound_core::{RngSeed, VerdictTag};
use confound_harness::{run_accuracy, run_sensitivity, Algorithm, DatasetRecord, ExperimentPlan, RunConfig};

fn plan(family: Family, algorithms: &[Algorithm]) -> ExperimentPlan {
    ExperimentPlan::new(family, NoiseKind::Uniform01, 4, 150, RngSeed(31)).with_algorithms(algorithms)
}

fn mirrored(v: VerdictTag) -> VerdictTag {
    match v {
        VerdictTag::AtoB => VerdictTag::BtoA,
        VerdictTag::BtoA => VerdictTag::AtoB,
        other => other,
    }
}

#[test]
fn column_swap_mirrors_verdicts() {
    let cfg = RunConfig::default();
    let algorithms = [Algorithm::IGCI, Algorithm::ModIGCI, Algorithm::KCDC];
    let base = plan(Family::DirectedMult4, &algorithms);
    let swapped = ExperimentPlan { swap_columns: true, ..base.clone() };
    let (r1, r2) = (run_accuracy(&base, &cfg).unwrap(), run_accuracy(&swapped, &cfg).unwrap());
    for alg in algorithms {
        let (s1, s2) = (r1.summary(alg).unwrap(), r2.summary(alg).unwrap());
        assert_eq!(s1.accuracy, s2.accuracy, "{alg}");
        for (a, b) in s1.records.iter().zip(&s2.records) {
            assert_eq!(b.truth, VerdictTag::BtoA);
            assert_eq!(b.verdict, mirrored(a.verdict), "{alg} {}", a.dataset_id);
            if let (Some(m1), Some(m2)) = (a.mean, b.mean) {
                assert!((m1 - m2).abs() < 1e-9, "{alg}: {m1} vs {m2}");
            }
        }
    }
}

fn strip_timing(records: &[DatasetRecord]) -> Vec<DatasetRecord> {
    records.iter().cloned().map(|r| DatasetRecord { runtime_ms: 0.0, ..r }).collect()
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    let cfg = RunConfig::default();
    let p = plan(Family::CommonMixed5, &[Algorithm::ModKCDC, Algorithm::ModIGCI]);
    let single = ExperimentPlan { threads: 1, ..p.clone() };
    let (a, b) = (run_accuracy(&p, &cfg).unwrap(), run_accuracy(&single, &cfg).unwrap());
    for (s1, s2) in a.summaries.iter().zip(&b.summaries) {
        assert_eq!(strip_timing(&s1.records), strip_timing(&s2.records));
        for (r1, r2) in s1.records.iter().zip(&s2.records) {
            let bits = |d: &[f64]| d.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&r1.deltas), bits(&r2.deltas));
        }
    }
}

#[test]
fn records_carry_bootstrap_summaries() {
    let cfg = RunConfig { n_bootstraps: 7, ..RunConfig::default() };
    let report = run_accuracy(&plan(Family::CommonAdd1, &[Algorithm::ModIGCI, Algorithm::IGCI]), &cfg).unwrap();
    let modified = report.summary(Algorithm::ModIGCI).unwrap();
    assert!(modified.records.iter().all(|r| r.deltas.len() == 7 && r.mean.is_some() && r.var.is_some()));
    let plain = report.summary(Algorithm::IGCI).unwrap();
    assert!(plain.records.iter().all(|r| r.deltas.is_empty() && r.truth == VerdictTag::CommonCause));
    // a plain scorer never outputs common cause
    assert_eq!(plain.correct, 0);
}

#[test]
fn sensitivity_points_cover_grid() {
    let pts = run_sensitivity(&[0.0, 2.0], &[Algorithm::ModIGCI, Algorithm::IGCI], 2, 80, RngSeed(5), &RunConfig::default()).unwrap();
    assert_eq!(pts.len(), 4);
    for p in &pts {
        for acc in [p.directed_accuracy, p.common_accuracy].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&acc));
        }
    }
}
