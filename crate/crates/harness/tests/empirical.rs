use chrono::NaiveDate;

use harness::empirical::{adjust_window_for_jumps, emit_csv, ingest_csv, run_empirical, EmpiricalConfig, IngestSpec, JumpCalendar, WindowPlan};
use harness::HarnessError;

fn date(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 3, d).unwrap()
}

fn calendar(flags: &[(u32, bool)]) -> JumpCalendar {
    JumpCalendar { days: flags.iter().map(|&(d, f)| (date(d), f)).collect() }
}

/// One-minute mesh on a ten-minute session.
fn spec() -> IngestSpec {
    IngestSpec::new(60, 600)
}

#[test]
fn three_rows_fill_the_session() {
    let csv = "timestamp,price\n2020-03-02T09:30:00,100\n2020-03-02T09:34:30,101\n2020-03-02T09:40:00,99\n";
    let data = ingest_csv(csv.as_bytes(), &spec()).unwrap();
    assert_eq!(data.dates, vec![date(2)]);
    assert_eq!(data.prices, vec![100.0, 100.0, 100.0, 100.0, 100.0, 101.0, 101.0, 101.0, 101.0, 101.0, 99.0]);
    assert_eq!(data.gaps, 8);
    assert!((data.path.values[10] - 99f64.ln()).abs() < 1e-15);
}

#[test]
fn one_missing_minute_is_one_gap() {
    let mut csv = String::from("timestamp,price\n");
    for m in (0..=10).filter(|m| *m != 4) {
        csv += &format!("2020-03-02 09:{:02}:00,{}\n", 30 + m, 100 + m);
    }
    let data = ingest_csv(csv.as_bytes(), &spec()).unwrap();
    assert_eq!(data.gaps, 1);
    assert_eq!(data.prices[4], 103.0);
}

#[test]
fn epoch_and_offset_timestamps_parse() {
    let csv = "timestamp,price\n1583141400,100\n2020-03-02T09:35:00+00:00,101\n";
    let data = ingest_csv(csv.as_bytes(), &spec()).unwrap();
    assert_eq!(data.prices[5], 101.0);
}

#[test]
fn emitted_series_ingests_bit_exactly() {
    let mut csv = String::from("timestamp,price\n");
    for d in [2, 3, 4] {
        for s in (0..600).step_by(37) {
            csv += &format!("2020-03-{d:02}T09:{:02}:{:02},{}\n", 30 + s / 60, s % 60, 100.0 + (s as f64 * 0.731).sin() + d as f64 * 0.013);
        }
    }
    let data = ingest_csv(csv.as_bytes(), &spec()).unwrap();
    let mut out = Vec::new();
    emit_csv(&data, &mut out).unwrap();
    let again = ingest_csv(out.as_slice(), &spec()).unwrap();
    assert_eq!(again.prices, data.prices);
    assert_eq!(again.path.values, data.path.values);
    assert_eq!(again.dates, data.dates);
}

#[test]
fn malformed_files_report_the_row() {
    let cases = [
        ("timestamp,price\n2020-03-02T09:30:00,100\n2020-03-02T09:29:00,101\n", "row 3"),
        ("timestamp,price\n2020-03-02T09:30:00,-1\n", "positive"),
        ("timestamp,price\nyesterday,1\n", "timestamp"),
        ("time,price\n2020-03-02T09:30:00,1\n", "timestamp"),
        ("timestamp,price\n", "no ticks"),
    ];
    for (csv, needle) in cases {
        match ingest_csv(csv.as_bytes(), &spec()) {
            Err(HarnessError::Data(m)) => assert!(m.contains(needle), "{m}"),
            other => panic!("expected a data error, got {other:?}"),
        }
    }
    assert!(matches!(ingest_csv("timestamp,price\n".as_bytes(), &IngestSpec::new(7, 600)), Err(HarnessError::Config(_))));
}

#[test]
fn jump_rule() {
    let dates: Vec<NaiveDate> = (2..=9).map(date).collect();
    let quiet = calendar(&(2..=9).map(|d| (d, false)).collect::<Vec<_>>());
    assert_eq!(adjust_window_for_jumps(5, 1.5, &quiet, &dates, 0.25, 3).unwrap(), WindowPlan::Windows(vec![1.5; 3]));
    // Empty calendar: no jumps anywhere.
    assert_eq!(adjust_window_for_jumps(0, 1.5, &JumpCalendar::default(), &dates, 0.25, 2).unwrap(), WindowPlan::Windows(vec![1.5; 2]));

    let mut on_day = quiet.clone();
    on_day.days.insert(date(7), true);
    assert_eq!(adjust_window_for_jumps(5, 1.5, &on_day, &dates, 0.25, 3).unwrap(), WindowPlan::Skip);
    let mut day_before = quiet.clone();
    day_before.days.insert(date(6), true);
    assert_eq!(adjust_window_for_jumps(5, 1.5, &day_before, &dates, 0.25, 3).unwrap(), WindowPlan::Skip);

    // Jump two days back: windows may reach one day back, growing with the instant.
    let mut two_back = quiet.clone();
    two_back.days.insert(date(5), true);
    let step = 1.0 / 72.0;
    let WindowPlan::Windows(w) = adjust_window_for_jumps(5, 2.5, &two_back, &dates, step, 73).unwrap() else { panic!("skipped") };
    for (i, x) in w.iter().enumerate() {
        assert!((x - (1.0 + i as f64 * step)).abs() < 1e-12);
    }
    // Jumps beyond the window reach leave it alone.
    let WindowPlan::Windows(w) = adjust_window_for_jumps(6, 0.5, &two_back, &dates, step, 3).unwrap() else { panic!("skipped") };
    assert_eq!(w, vec![0.5; 3]);

    let partial = calendar(&[(7, false), (6, false)]);
    assert!(matches!(adjust_window_for_jumps(5, 1.5, &partial, &dates, 0.25, 3), Err(HarnessError::Data(_))));
}

#[test]
fn calendar_parses_flags() {
    let cal = JumpCalendar::from_csv("date,has_jump\n2020-03-02,true\n2020-03-03,0\n".as_bytes()).unwrap();
    assert_eq!(cal.days.get(&date(2)), Some(&true));
    assert_eq!(cal.days.get(&date(3)), Some(&false));
    assert!(JumpCalendar::from_csv("date,has_jump\n2020-03-02,maybe\n".as_bytes()).is_err());
}

#[test]
fn jump_days_are_skipped_in_the_series() {
    let mut csv = String::from("timestamp,price\n");
    for d in 2..=6 {
        for m in 0..=10 {
            csv += &format!("2020-03-{d:02}T09:{:02}:00,{}\n", 30 + m, 100.0 + ((d * 11 + m) as f64).sin());
        }
    }
    let cfg = EmpiricalConfig::from_toml(
        "mode = \"fixed\"\nkappa = 0.02\ngrid_multiples = [1]\n[ingest]\nmesh_seconds = 60\nsession_seconds = 600\n",
    )
    .unwrap();
    let data = ingest_csv(csv.as_bytes(), &cfg.ingest).unwrap();
    let cal = calendar(&[(2, false), (3, false), (4, true), (5, false), (6, false)]);
    let rows = run_empirical(&data, &cal, &cfg).unwrap();
    let reasons: Vec<Option<&str>> = rows.iter().map(|r| r.skip_reason.as_deref()).collect();
    assert_eq!(reasons[2], Some("jump"));
    assert_eq!(reasons[3], Some("jump"));
    assert!(rows[4].psrv.is_some());
    // The first day lacks calendar history for its window.
    assert_eq!(reasons[0], Some("calendar"));
}
