use std::path::Path;
use std::process::Command;

use serde_json::Value;

use ordnoise::stats::fixtures;
use ordnoise::RngSpec;

fn run(args: &[&str]) -> (String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["ordnoise"];
    argv.extend_from_slice(args);
    ordnoise_cli::run(argv, &mut out, &mut err).unwrap_or_else(|e| panic!("{args:?}: {}", e.to_json()));
    (String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn comment(csv: &str, key: &str) -> Option<String> {
    csv.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim_start_matches(": ").to_string()))
}

#[test]
fn exact_bounds_table() {
    let (out, err) = run(&[
        "bounds",
        "--scheme",
        "1-6,7-8,9-10",
        "--method",
        "exact",
        "--vmax",
        "9",
        "--seed",
        "3",
    ]);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("0,1,1,"));
    assert!(comment(&out, "seed").unwrap().contains("ignored"));
    assert!(comment(&out, "tool").unwrap().starts_with("ordnoise "));
    assert!(err.contains("--seed is ignored"));
}

#[test]
fn bounds_json_report() {
    let (out, _) = run(&["bounds", "--format", "json", "--vmax", "2"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "bounds");
    assert_eq!(v["seed"], Value::Null);
    let recs = v["results"]["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[1]["accuracy_upper"].as_f64().unwrap(), 0.814814814815);
    assert_eq!(recs[1]["accuracy_ratio"], serde_json::json!([22, 27]));
}

#[test]
fn monte_carlo_bounds_carry_seed_and_std() {
    let (out, _) = run(&[
        "bounds",
        "--method",
        "mc",
        "--vmax",
        "1",
        "--n",
        "1000",
        "--iterations",
        "20",
    ]);
    let seed: u64 = comment(&out, "seed").unwrap().parse().unwrap();
    let header = out.lines().find(|l| l.starts_with("v,")).unwrap();
    assert!(header.ends_with("population_accuracy_std"));
    let (again, _) = run(&[
        "bounds",
        "--method",
        "mc",
        "--vmax",
        "1",
        "--n",
        "1000",
        "--iterations",
        "20",
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(out, again);
}

#[test]
fn sweep_row_counts() {
    let (out, _) = run(&["sweep-bins", "--k", "3"]);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 360);
    assert!(out.contains("\n\"1-6,7-8,9-10\",narrow,1,"));
    let (two, _) = run(&["sweep-bins", "--k", "2"]);
    assert_eq!(data_lines(&two).len(), 90);
    let (summary, _) = run(&["sweep-bins", "--k", "3", "--table", "summary"]);
    assert_eq!(data_lines(&summary).len(), 30);
}

#[test]
fn rmse_curve_table() {
    let (out, _) = run(&["rmse-curve", "--n", "2000", "--seed", "9"]);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "0,0");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn estimate_on_surrogate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    let input = input.to_str().unwrap();
    run(&[
        "synth",
        "--n",
        "10000",
        "--v",
        "3",
        "--one-hot",
        "--seed",
        "33",
        "--output",
        input,
    ]);
    let (out, _) = run(&[
        "estimate",
        "--input",
        input,
        "--actual",
        "0.5",
        "--iterations",
        "200",
        "--seed",
        "4",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["results"];
    let v_hat = r["v_hat"].as_f64().unwrap();
    assert!((v_hat - 3.0).abs() <= 0.5, "{v_hat}");
    assert!((r["full_fit_v_hat"].as_f64().unwrap() - 3.0).abs() <= 0.2);
    let ceiling = r["accuracy_ceiling"].as_f64().unwrap();
    assert!((r["relative_score"].as_f64().unwrap() - 0.5 / ceiling).abs() < 1e-9);
    assert_eq!(v["seed"], 4);
    assert_eq!(r["features"], 10);
}

#[test]
fn chi2_report() {
    let dir = tempfile::tempdir().unwrap();
    let counts = |c: [u64; 10]| {
        let mut s = String::from("score,count\n");
        for (i, n) in c.iter().enumerate() {
            s.push_str(&format!("{},{n}\n", i + 1));
        }
        s
    };
    let u = write(dir.path(), "u.csv", &counts(fixtures::UNCALIBRATED));
    let c = write(dir.path(), "c.csv", &counts(fixtures::CALIBRATED));
    let (out, _) = run(&["chi2", "--uncalibrated", &u, "--calibrated", &c]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let variants = v["results"]["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 3);
    for x in variants {
        assert_eq!(x["verdict"], "calibrated-more-uniform");
    }
    assert_eq!(variants[0]["variant"], "full");
    assert!(v["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().contains("interpretation")));
}

#[test]
fn city_stats_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("score,self_category\n");
    for (s, c) in fixtures::city_responses(400, &RngSpec::new(5)) {
        text.push_str(&format!("{s},{c}\n"));
    }
    let p = write(dir.path(), "city.csv", &text);
    let (out, _) = run(&["city-stats", "--input", &p]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["results"];
    assert_eq!(r["responses"], 400);
    assert!(r["spread"]["display"].as_str().unwrap().contains('±'));
    assert_eq!(r["crosstab"]["labels"], serde_json::json!(["bad", "great", "okay"]));
    assert_eq!(r["uniformity"].as_array().unwrap().len(), 3);
}

#[test]
fn synth_round_trips_through_the_reader() {
    let (out, _) = run(&["synth", "--n", "50", "--v", "2", "--seed", "8"]);
    let f = ordnoise::io::read_survey(out.as_bytes()).unwrap();
    assert_eq!(f.dataset.len(), 50);
    assert!(f.dataset.records().iter().all(|r| r.unbiased_score.is_some()));
    assert!(comment(&out, "config").unwrap().contains("\"v\":2"));
}

#[test]
fn binary_reports_errors_as_json() {
    let bin = env!("CARGO_BIN_EXE_ordnoise");
    let out = Command::new(bin)
        .args(["bounds", "--scheme", "1-6,8-10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "bad_scheme");
    assert!(err["error"]["message"].as_str().unwrap().contains("gap at 7"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "id,score\na,3\nb,11\n");
    let out = Command::new(bin)
        .args(["city-stats", "--input", &bad])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("line 3"));

    let out = Command::new(bin).args(["bounds", "--vmax", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");

    let out = Command::new(bin).args(["sweep-bins", "--k", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = Command::new(bin).arg("--version").output().unwrap();
    assert!(out.status.success());
}
