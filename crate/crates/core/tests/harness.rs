use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use wavelab::harness::RunConfig;
use wavelab::harness::{
    append_records, emit_csv, emit_plotdata, expectation_for, parse_plotdata, parse_store, read_store, summarize,
    unique_records, StoreEntry,
};
use wavelab::sharpness::record::exponent;
use wavelab::sharpness::ExperimentRecord;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::INFINITY), Just(1.0), Just(2.0), 1.0f64..16.0]
}

fn record() -> impl Strategy<Value = ExperimentRecord> {
    (
        prop_oneof![
            Just("case1"),
            Just("case2"),
            Just("case3"),
            Just("upper"),
            Just("kernel")
        ],
        1usize..=2,
        exponent(),
        exponent(),
        -2.0f64..1.0,
        1i32..12,
        (1e-30f64..1e30, 1e-30f64..1e30),
        prop::collection::vec(1e-10f64..1e10, 0..3),
        any::<u64>(),
        prop::collection::btree_map("[a-z_]{1,8}", -1e6f64..1e6, 0..3),
    )
        .prop_map(|(case, n, p, q, m, j, (value, ratio), input_norms, seed, extra)| {
            let r = 1.0 / (1.0 / p + 1.0 / q);
            ExperimentRecord {
                case: case.into(),
                n,
                p,
                q,
                r,
                m,
                j,
                value,
                input_norms,
                ratio,
                grid: None,
                seed,
                extra,
            }
        })
}

/// A run of records on consecutive scales sharing one configuration.
fn series() -> impl Strategy<Value = Vec<ExperimentRecord>> {
    (
        record(),
        3usize..8,
        -3.0f64..3.0,
        prop::collection::vec(-0.2f64..0.2, 8),
    )
        .prop_map(|(base, len, slope, noise)| {
            (0..len)
                .map(|k| ExperimentRecord {
                    j: base.j + k as i32,
                    ratio: 2f64.powf(slope * k as f64 + noise[k]),
                    extra: BTreeMap::new(),
                    ..base.clone()
                })
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn record_json_round_trip(r in record()) {
        let text = serde_json::to_string(&r).unwrap();
        let back: ExperimentRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn store_lines_verify(rs in prop::collection::vec(record(), 1..6)) {
        let text: String = rs.iter().map(|r| serde_json::to_string(&StoreEntry::new(r.clone())).unwrap() + "\n").collect();
        let entries = parse_store(&text).unwrap();
        prop_assert_eq!(entries.iter().map(|e| e.record.clone()).collect::<Vec<_>>(), rs);
        prop_assert!(entries.iter().all(StoreEntry::verify));
    }

    #[test]
    fn verdicts_follow_the_expectation(rs in series()) {
        let s = summarize(&rs);
        prop_assert_eq!(s.len(), 1);
        let fit = s[0].fit.clone().unwrap();
        let want = expectation_for(&s[0].case, s[0].n, s[0].p, s[0].q, s[0].m).judge(fit.slope);
        prop_assert_eq!(s[0].verdict, want);
    }

    #[test]
    fn plotdata_refits_to_the_stored_slope(rs in series()) {
        let parsed = parse_plotdata(&emit_plotdata(&rs).unwrap()).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        let stored = parsed[0].stored_slope().unwrap();
        prop_assert!((parsed[0].refit().unwrap().slope - stored).abs() <= 1e-12 * (1.0 + stored.abs()));
    }
}

#[test]
fn tampered_lines_are_rejected() {
    let mut rs = Vec::new();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..2 {
        rs.push(record().new_tree(&mut runner).unwrap().current());
    }
    let line = serde_json::to_string(&StoreEntry::new(rs[0].clone())).unwrap();
    let tampered = line.replacen("\"seed\":", "\"seed\":1", 1);
    assert_ne!(line, tampered);
    assert!(parse_store(&tampered).is_err());
    assert!(parse_store("{not json").is_err());
    assert!(parse_store("\n\n").unwrap().is_empty());
}

#[test]
fn repeated_runs_are_deduplicated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("records.jsonl");
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let rs = series().new_tree(&mut runner).unwrap().current();
    append_records(&path, &rs).unwrap();
    append_records(&path, &rs).unwrap();
    let entries = read_store(&path).unwrap();
    assert_eq!(entries.len(), 2 * rs.len());
    assert_eq!(unique_records(&entries), rs);

    let csv = emit_csv(&rs).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("case,n,p,q,m,j,value,ratio,slope,stderr,r2,verdict"));
    assert_eq!(lines.count(), rs.len() + 1);
    assert!(emit_csv(&[]).is_err());
}

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "{}", dir.display());
    out
}

#[test]
fn fuzz_seeds_exercise_the_parsers() {
    for (name, text) in corpus("fuzz_config") {
        assert_eq!(RunConfig::parse(&text).is_ok(), name != "unknown_key.toml", "{name}");
    }
    for (name, text) in corpus("fuzz_records") {
        assert!(parse_store(&text).is_ok(), "{name}");
    }
    for (name, text) in corpus("fuzz_plotdata") {
        let series = parse_plotdata(&text).unwrap();
        for s in series.iter().filter(|s| s.points.len() >= 3) {
            assert!(
                (s.refit().unwrap().slope - s.stored_slope().unwrap()).abs() <= 1e-12,
                "{name}"
            );
        }
    }
    for (name, text) in corpus("fuzz_exponent") {
        assert!(exponent::parse(&text).is_some(), "{name}");
    }
}
