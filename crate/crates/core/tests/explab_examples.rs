mod common;

use common::{large, small, trial_factor};
use multlab_core::characters::enumerate_characters;
use multlab_core::explab::{chord, run, ExperimentConfig, Outcome, Report, Verdict, SOURCE_HASH};
use multlab_core::Error;

fn report_with(json: &str, sieve: &multlab_core::arith::Sieve) -> Report {
    let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
    run(&cfg, Some(sieve)).unwrap()
}

fn report(json: &str) -> Report {
    report_with(json, small())
}

fn gap(r: &Report) -> &multlab_core::explab::GapReport {
    match &r.outcome {
        Outcome::Gap(g) => g,
        _ => panic!("not a gap report"),
    }
}

#[test]
fn liouville_first_zero_gap() {
    let r = report(r#"{"experiment": "gap", "f": {"kind": "fixture", "name": "liouville"}, "x": 1000000}"#);
    // λ(2) = λ(3) = −1
    let first = (1..).find(|&n: &u64| trial_factor(n).iter().map(|p| p.1).sum::<u32>() % 2 == trial_factor(n + 1).iter().map(|p| p.1).sum::<u32>() % 2);
    assert_eq!(gap(&r).first_zero_gap, first);
    assert_eq!(first, Some(2));
    assert_eq!(*gap(&r).running_min.last().unwrap(), 0.0);
    assert_eq!(r.verdict(), Verdict::Consistent);
}

#[test]
fn alternating_gap_stays_two() {
    let r = report(r#"{"experiment": "gap", "f": {"kind": "fixture", "name": "alternating"}, "x": 1000000,
                      "checkpoints": {"geometric": 12}, "lower_bound": 2.0}"#);
    assert!(gap(&r).running_min.iter().all(|&m| m == 2.0));
    // not completely multiplicative, so the decay check is inconclusive rather than failed
    assert_eq!(r.exit_code(), 0);
    assert!(r.checks.iter().any(|c| c.verdict == Verdict::Inconclusive));
}

#[test]
fn mod_nine_gap_at_least_one() {
    for name in ["chi9", "chi9_gap"] {
        let r = report(&format!(
            r#"{{"experiment": "gap", "f": {{"kind": "fixture", "name": "{name}"}}, "x": 1000000, "lower_bound": 1.0}}"#
        ));
        assert!(gap(&r).running_min.iter().all(|&m| m >= 1.0 - 1e-12), "{name}");
        assert_eq!(r.exit_code(), 0);
    }
}

#[test]
fn running_minimum_is_nonincreasing() {
    for name in ["random_unimodular", "irrational_rotation", "chi9_root6_twist", "chi9_thin"] {
        let r = report(&format!(
            r#"{{"experiment": "gap", "f": {{"kind": "fixture", "name": "{name}"}}, "x": 300000, "checkpoints": {{"geometric": 20}}}}"#
        ));
        assert!(gap(&r).running_min.windows(2).all(|w| w[1] <= w[0]), "{name}");
    }
}

#[test]
fn epsthm_and_scan_modes_report_signals() {
    let r = report(
        r#"{"experiment": "gap", "mode": "epsthm", "f": {"kind": "fixture", "name": "chi9_root6_twist"}, "x": 100000,
            "epsthm": {"q": 3, "t": 1.0, "orbit_len": 12, "max_modulus": 9, "t_max": 1.5}}"#,
    );
    let g = gap(&r);
    assert_eq!(g.orbit.as_ref().unwrap().len(), 13);
    assert!(g.pretender.is_some());
    let r = report(
        r#"{"experiment": "gap", "mode": "scan", "f": {"kind": "fixture", "name": "random_unimodular"}, "x": 100000,
            "scan": {"epsilon": 0.5}}"#,
    );
    assert!(gap(&r).largelog.is_some());
    assert!(gap(&r).discrepancy.as_ref().unwrap().holds);
}

fn ks(r: &Report) -> &multlab_core::explab::KsReport {
    match &r.outcome {
        Outcome::Ks(k) => k,
        _ => panic!("not a ks report"),
    }
}

#[test]
fn cubic_values_hit_three_bins() {
    let r = report(
        r#"{"experiment": "ks", "f": {"kind": "fixture", "name": "cubic_const"}, "x": 1000000,
            "targets": [{"type": "root", "a": 1, "b": 6}], "max_coverage": 0.03}"#,
    );
    let k = ks(&r);
    assert_eq!(k.histogram.iter().filter(|&&c| c > 0).count(), 3);
    assert_eq!(k.histogram.iter().sum::<u64>(), k.samples);
    assert!(k.targets[0].min_gap >= chord(1.0 / 6.0, 0.0) - 1e-12);
    assert_eq!(r.verdict(), Verdict::Consistent);
}

#[test]
fn irrational_rotation_coverage_regression() {
    let r = report(r#"{"experiment": "ks", "f": {"kind": "fixture", "name": "irrational_rotation"}, "x": 1000000, "bins": 100}"#);
    let k = ks(&r);
    assert_eq!(k.histogram.iter().sum::<u64>(), k.samples);
    assert_eq!(k.coverage, 0.37);
}

#[test]
fn ks_with_target_one_is_the_gap_experiment() {
    let a = report(r#"{"experiment": "ks", "f": {"kind": "fixture", "name": "liouville"}, "x": 100000}"#);
    let b = report(r#"{"experiment": "gap", "f": {"kind": "fixture", "name": "liouville"}, "x": 100000, "checkpoints": "final"}"#);
    assert_eq!(ks(&a).targets[0].min_gap, gap(&b).running_min[0]);
    assert_eq!(ks(&a).targets[0].argmin, gap(&b).argmin[0]);
}

fn arith(r: &Report) -> &multlab_core::explab::ArithReport {
    match &r.outcome {
        Outcome::Arith(a) => a,
        _ => panic!("not an arith report"),
    }
}

fn big_omega_in(n: u64, keep: impl Fn(u64) -> bool) -> u32 {
    trial_factor(n).into_iter().filter(|&(p, _)| keep(p)).map(|(_, e)| e).sum()
}

#[test]
fn omega_parity_witnesses() {
    let r = report(r#"{"experiment": "arith", "classes": [{"set": "all", "modulus": 2}], "x": 100000, "list_limit": 100000}"#);
    let a = arith(&r);
    assert_eq!(a.first_witness, Some(2));
    let oracle: Vec<u64> = (1..=100_000u64)
        .filter(|&n| big_omega_in(n, |_| true) % 2 == big_omega_in(n + 1, |_| true) % 2)
        .collect();
    assert_eq!(a.witnesses, oracle);
}

#[test]
fn equal_omega_count_regression() {
    // modulus larger than any Ω(n) up to 10^6 turns the congruence into equality
    let r = report(r#"{"experiment": "arith", "classes": [{"set": "all", "modulus": 64}], "x": 1000000}"#);
    assert_eq!(arith(&r).count, 135_212);
    let oracle = (1..=20_000u64).filter(|&n| big_omega_in(n, |_| true) == big_omega_in(n + 1, |_| true)).count();
    let r = report(r#"{"experiment": "arith", "classes": [{"set": "all", "modulus": 64}], "x": 20000, "checkpoints": "final"}"#);
    assert_eq!(arith(&r).count, oracle as u64);
}

#[test]
fn two_classes_have_witnesses() {
    let r = report(
        r#"{"experiment": "arith", "x": 1000000, "list_limit": 1000, "classes": [
            {"set": {"residues": {"modulus": 4, "residues": [1]}}, "modulus": 2},
            {"set": {"residues": {"modulus": 4, "residues": [3]}}, "modulus": 3}]}"#,
    );
    let a = arith(&r);
    assert_eq!(a.count, 166_986);
    for &n in &a.witnesses {
        for (r4, q) in [(1u64, 2u32), (3, 3)] {
            assert_eq!(big_omega_in(n, |p| p % 4 == r4) % q, big_omega_in(n + 1, |p| p % 4 == r4) % q, "n = {n}");
        }
    }
}

#[test]
fn arith_config_errors() {
    let overlap: ExperimentConfig = serde_json::from_str(
        r#"{"experiment": "arith", "x": 1000, "classes": [{"set": "all", "modulus": 2}, {"set": {"listed": [5]}, "modulus": 3}]}"#,
    )
    .unwrap();
    assert!(matches!(run(&overlap, None), Err(Error::Domain(_))));
    let shared: ExperimentConfig = serde_json::from_str(
        r#"{"experiment": "arith", "x": 1000, "classes": [{"set": {"listed": [3]}, "modulus": 2}, {"set": {"listed": [5]}, "modulus": 4}]}"#,
    )
    .unwrap();
    assert!(matches!(run(&shared, None), Err(Error::Config(_))));
}

fn chudakov(r: &Report) -> &multlab_core::explab::ChudakovReport {
    match &r.outcome {
        Outcome::Chudakov(c) => c,
        _ => panic!("not a chudakov report"),
    }
}

#[test]
fn mod_nine_partial_sums_bounded() {
    let r = report_with(
        r#"{"experiment": "chudakov", "setup": {"kind": "fixture", "name": "chi9"}, "x": 10000000,
            "correlation_x": 1000000, "e_max": 1000}"#,
        large(),
    );
    assert!(chudakov(&r).running_sup.iter().all(|&s| s <= 9.0));
    assert_eq!(r.verdict(), Verdict::Consistent, "{:#?}", r.checks);
}

#[test]
fn partial_sum_regressions() {
    let r = report(r#"{"experiment": "chudakov", "f": {"kind": "fixture", "name": "chi9_flip2"}, "x": 1000000, "checkpoints": "final"}"#);
    assert!((chudakov(&r).running_sup[0] - 11.357816691602606).abs() < 1e-9);
    let r = report(r#"{"experiment": "chudakov", "f": {"kind": "fixture", "name": "liouville"}, "x": 1000000, "checkpoints": "final"}"#);
    assert_eq!(chudakov(&r).running_sup[0], 1253.0);
}

#[test]
fn degenerate_setup_is_inconclusive() {
    let r = report(
        r#"{"experiment": "chudakov", "setup": {"kind": "fixture", "name": "chi5_F3neg"}, "x": 200000, "dmax": 4}"#,
    );
    assert!(r.checks.iter().any(|c| c.verdict == Verdict::Inconclusive));
    assert_eq!(r.exit_code(), 0);
}

fn cohn(r: &Report) -> &multlab_core::explab::CohnReport {
    match &r.outcome {
        Outcome::Cohn(c) => c,
        _ => panic!("not a cohn report"),
    }
}

#[test]
fn cohn_same_character_gives_exact_ratios() {
    let r = report(r#"{"experiment": "cohn", "f": {"kind": "character", "q": 5, "index": 1}, "chi": {"q": 5, "index": 1},
                      "h_max": 5, "x": 100000, "expect": "match"}"#);
    for row in &cohn(&r).rows {
        assert_eq!(row.f_corr, row.chi_corr);
        assert!(row.deviation == 0.0);
    }
    assert_eq!(r.verdict(), Verdict::Consistent);
}

#[test]
fn cohn_other_primitive_character_matches() {
    let chars = enumerate_characters(5).unwrap();
    let idx: Vec<usize> = chars.iter().filter(|c| c.is_primitive()).map(|c| c.index().unwrap()).collect();
    let r = report_with(
        &format!(
            r#"{{"experiment": "cohn", "f": {{"kind": "character", "q": 5, "index": {}}}, "chi": {{"q": 5, "index": {}}},
                "h_max": 5, "x": 10000000, "expect": "match"}}"#,
            idx[1], idx[0]
        ),
        large(),
    );
    assert_eq!(r.verdict(), Verdict::Consistent, "{:#?}", cohn(&r).rows);
}

#[test]
fn cohn_liouville_differs() {
    let r = report(r#"{"experiment": "cohn", "f": {"kind": "fixture", "name": "liouville"}, "chi": {"q": 5, "index": 1},
                      "h_max": 5, "x": 1000000, "expect": "differ"}"#);
    let row = &cohn(&r).rows[0];
    assert!(row.chi_corr.re < -0.19 && row.f_corr.norm() < 0.05);
    assert_eq!(r.verdict(), Verdict::Consistent);
}

#[test]
fn reports_are_deterministic_and_self_describing() {
    let cfgs = [
        r#"{"experiment": "gap", "f": {"kind": "fixture", "name": "random_unimodular"}, "x": 100000}"#,
        r#"{"experiment": "ks", "f": {"kind": "fixture", "name": "chi9_root6"}, "x": 100000}"#,
        r#"{"experiment": "arith", "classes": [{"set": "all", "modulus": 3}], "x": 100000}"#,
        r#"{"experiment": "chudakov", "setup": {"kind": "fixture", "name": "chi9_F7_e13"}, "x": 100000, "e_max": 200, "poscoeffs_truncations": [10, 100]}"#,
        r#"{"experiment": "cohn", "f": {"kind": "fixture", "name": "chi3"}, "chi": {"q": 3, "index": 1}, "h_max": 3, "x": 100000}"#,
    ];
    for c in cfgs {
        let cfg: ExperimentConfig = serde_json::from_str(c).unwrap();
        let a = run(&cfg, None).unwrap().to_json().unwrap();
        let b = run(&cfg, Some(small())).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let back: Report = serde_json::from_str(&a).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(back.source_hash, SOURCE_HASH);
        assert!(!a.contains("time"));
    }
}
