//! File formats against the shipped fixtures.

use std::path::PathBuf;

use ibnr_core::chain_ladder::TriangleKind;
use ibnr_core::io::{
    read_error_table, read_event_log, read_event_log_with_origin, read_triangle, write_error_table,
    write_event_log, write_event_log_dates, write_triangle, ValueFormat,
};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn triangle_fixtures_round_trip() {
    let dir = TempDir::new().unwrap();
    for (name, rows, cols) in [
        ("table3_upper.csv", 6, 6),
        ("table3_printed.csv", 6, 6),
        ("table4_upper.csv", 7, 7),
        ("table4_printed.csv", 7, 7),
        ("table6_printed.csv", 6, 6),
        ("table7_printed.csv", 7, 7),
    ] {
        let t = read_triangle(fixture(name)).unwrap();
        assert_eq!((t.rows(), t.cols(), t.origin_year()), (rows, cols, 2010), "{name}");
        assert_eq!(t.kind(), TriangleKind::Cumulative);
        let copy = dir.path().join(name);
        write_triangle(&t, &copy, ValueFormat::Exact).unwrap();
        assert_eq!(read_triangle(&copy).unwrap(), t, "{name}");
    }
}

#[test]
fn error_table_fixtures_round_trip() {
    let dir = TempDir::new().unwrap();
    for name in ["table5_printed.csv", "table8_printed.csv"] {
        let t = read_error_table(fixture(name)).unwrap();
        assert_eq!(t.cells.iter().flatten().flatten().count(), 15, "{name}");
        let copy = dir.path().join(name);
        write_error_table(&t, &copy).unwrap();
        assert_eq!(std::fs::read_to_string(&copy).unwrap(), std::fs::read_to_string(fixture(name)).unwrap());
    }
}

#[test]
fn simulated_log_fixture() {
    let log = read_event_log(fixture("simulated_log.csv")).unwrap();
    assert_eq!(log.len(), 200);
    let last = log.records().last().unwrap();
    assert!(last.t < 7.0 && last.t > 6.99);
    assert!(log.records().iter().all(|r| r.s >= r.t));

    let dir = TempDir::new().unwrap();
    let copy = dir.path().join("log.csv");
    write_event_log(&log, &copy).unwrap();
    assert_eq!(read_event_log(&copy).unwrap(), log);

    // Dates lose the time of day; every time moves by less than a day.
    let dated = dir.path().join("dated.csv");
    write_event_log_dates(&log, 2010, &dated).unwrap();
    let (back, origin) = read_event_log_with_origin(&dated).unwrap();
    assert_eq!(origin, Some(2010));
    for (a, b) in back.records().iter().zip(log.records()) {
        assert!((a.t - b.t).abs() < 1.0 / 365.0 && (a.s - b.s).abs() < 1.0 / 365.0);
    }
}
