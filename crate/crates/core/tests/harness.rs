use std::fs;

use hsync_core::harness::{
    emit_outputs, parse_config, run_scenario, ConfigError, ScenarioRegistry,
};
use hsync_core::interference::ScanDomain;
use hsync_core::sync_protocol::DecayModel;

fn run(
    text: &str,
) -> (
    hsync_core::harness::RunSummary,
    Vec<hsync_core::harness::DataTable>,
) {
    run_scenario(&parse_config(text).unwrap(), &ScenarioRegistry::builtin()).unwrap()
}

#[test]
fn minimal_config_gets_operating_point() {
    let c = parse_config("scenario = enhancement\n").unwrap();
    let p = &c.protocol;
    assert_eq!(p.n_write_max, 12);
    assert_eq!(p.dt_write_ns, 800.0);
    assert_eq!(p.dt_read_ns, 400.0);
    assert_eq!(p.tau_c_us, 12.0);
    assert_eq!(p.decay_model, DecayModel::GaussianHalf);
    for s in [&p.source_a, &p.source_b] {
        assert_eq!(s.p_as, Some(2.0e-3));
        assert_eq!(s.gamma0, 0.08);
    }
    assert_eq!(c.seed, 0);
}

#[test]
fn config_errors_name_the_key() {
    assert_eq!(
        parse_config("").unwrap_err(),
        ConfigError::Missing {
            key: "scenario".into()
        }
    );
    let dup = parse_config("scenario = chsh\nhom.points = 3\nhom.points = 4\n").unwrap_err();
    assert_eq!(dup.key(), Some("hom.points"));
    assert!(dup.to_string().contains("line 3"));
    let ty = parse_config("scenario = chsh\nprotocol.tau_c_us = long\n").unwrap_err();
    assert!(matches!(ty, ConfigError::Type { line: 2, .. }));
    assert_eq!(ty.key(), Some("protocol.tau_c_us"));
}

#[test]
fn enhancement_scenario() {
    let (summary, tables) = run("scenario = enhancement\n");
    let e = summary.metric("enhancement").unwrap();
    assert!((129.0..=143.0).contains(&e), "{e}");
    assert_eq!(
        tables[0].columns,
        ["tau_c_us", "n_write_max", "enhancement"]
    );
    assert_eq!(tables[0].rows.len(), 12);
}

#[test]
fn hom_time_scan_width() {
    let (summary, tables) = run("scenario = hom_scan\nhom.domain = time\n");
    assert_eq!(summary.metric("fwhm"), Some(25.0));
    assert_eq!(tables[0].columns[0], "delay_ns");
    assert_eq!(tables[0].rows.len(), 121);
}

#[test]
fn hom_scan_table_dips_at_zero() {
    let (summary, tables) = run("scenario = hom_scan\nhom.domain = frequency\n");
    let csv = tables[0].to_csv().unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let (x_min, c_min) = rows
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(x_min, 0.0);
    assert!((c_min - summary.metric("c_dip").unwrap()).abs() < 1e-12);
    assert_eq!(
        parse_config("scenario = hom_scan\nhom.domain = frequency\n")
            .unwrap()
            .hom
            .domain,
        ScanDomain::Frequency
    );
}

#[test]
fn chsh_analytic_value() {
    let (summary, _) = run("scenario = chsh\nchsh.alpha_a = 0.12\nchsh.alpha_b = 0.17\n");
    assert!((summary.metric("S").unwrap() - 2.2911).abs() < 5e-4);
}

#[test]
fn chsh_alpha_from_source() {
    let (summary, _) = run(
        "scenario = chsh\nchsh.alpha_a = source\nchsh.alpha_b = source\nsource_a.chi = 0.02\nsource_a.eta_as = 0.1\nsource_b.chi = 0.02\nsource_b.eta_as = 0.1\n",
    );
    let a = summary.metric("alpha_bar").unwrap();
    assert!(a > 0.05 && a < 0.2, "{a}");
}

#[test]
fn protocol_sim_summary_keys() {
    let (summary, tables) = run("scenario = protocol_sim\ntrials = 1000\n");
    for key in ["p4c_hat", "p4c_closed_form", "std_err"] {
        assert!(summary.metrics.contains_key(key), "{key}");
    }
    assert!(tables.is_empty());
}

#[test]
fn emitted_files_round_trip_and_repeat() {
    let text = "scenario = enhancement\nsweep.tau_c_us = 1, 12, 100\n";
    let (summary, tables) = run(text);
    let dir = tempfile::tempdir().unwrap();
    let first = emit_outputs(&summary, &tables, &dir.path().join("a")).unwrap();
    let (summary2, tables2) = run(text);
    let second = emit_outputs(&summary2, &tables2, &dir.path().join("b")).unwrap();
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    let csv = fs::read_to_string(dir.path().join("a/enhancement_sweep.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    for (record, row) in reader.records().zip(&tables[0].rows) {
        let record = record.unwrap();
        let e: f64 = record[2].parse().unwrap();
        assert_eq!(hsync_core::harness::Cell::Num(e), row[2]);
    }

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/summary.json")).unwrap())
            .unwrap();
    assert_eq!(json["scenario"], "enhancement");
    assert_eq!(
        json["metrics"]["enhancement"].as_f64(),
        summary.metric("enhancement")
    );
}
