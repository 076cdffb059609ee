use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pairstop::simulator::{PathConfig, PathGenerator};
use pairstop::{CostFactors, MarketParams, PriceSeries};
use serde_json::Value;

const REFERENCE: [&str; 14] = [
    "--mu1", "0.09696", "--mu2", "0.14347", "--s11", "0.19082", "--s12", "0.04036", "--s22", "0.13988", "--rho", "0.5",
    "--K", "0.001",
];

fn pairstop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairstop"))
        .args(args)
        .env_remove("PAIRSTOP_CONFIG")
        .output()
        .expect("binary runs")
}

fn with_reference<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(REFERENCE.iter()).chain(tail).copied().collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("pairstop-cli-{}-{name}", std::process::id()))
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

fn read_csv(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn long_flat_thresholds_match_the_published_example() {
    let o = pairstop(&with_reference(&["thresholds", "--model", "long-flat"], &[]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("k1=0.85527 k2=1.28061\n"), "{}", stdout(&o));
}

#[test]
fn three_regime_thresholds_match_the_published_example() {
    let o = pairstop(&with_reference(&["thresholds", "--model", "long-flat-short"], &[]));
    assert!(o.status.success());
    assert!(stdout(&o).contains("k1*=0.85527 k2*=1.32175\n"), "{}", stdout(&o));
}

#[test]
fn missing_rho_is_a_usage_error() {
    let args: Vec<&str> = ["thresholds"].iter().chain(&REFERENCE[..10]).chain(&REFERENCE[12..]).copied().collect();
    let o = pairstop(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--rho") && stderr(&o).contains("Usage:"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_flags_and_values_are_rejected() {
    assert_eq!(pairstop(&with_reference(&["thresholds"], &["--seed", "3"])).status.code(), Some(2));
    assert_eq!(pairstop(&with_reference(&["thresholds"], &["--model", "short"])).status.code(), Some(2));
    assert_eq!(pairstop(&["frobnicate"]).status.code(), Some(2));
    // rho below mu2 fails validation.
    let mut low = with_reference(&["thresholds"], &[]);
    low[12] = "0.1";
    let o = pairstop(&low);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("must exceed both drifts"), "{}", stderr(&o));
}

#[test]
fn json_carries_full_precision() {
    let o = pairstop(&with_reference(&["thresholds", "--format", "json"], &[]));
    assert!(o.status.success());
    let v = json(&o);
    let p = &v["policies"];
    assert_eq!(p[0]["model"], "long-flat");
    assert_eq!(p[1]["model"], "long-flat-short");
    // Frozen high-precision values.
    assert!((p[0]["k_lower"].as_f64().unwrap() - 0.855_270_603_336_381_2).abs() < 1e-13);
    assert!((p[0]["k_upper"].as_f64().unwrap() - 1.280_608_538_154_395_6).abs() < 1e-13);
    assert!((p[1]["k_upper"].as_f64().unwrap() - 1.321_747_586_055_202_7).abs() < 1e-13);
    assert_eq!(v["params"]["K"], 0.001);
}

#[test]
fn csv_output_reproduces_json_at_printed_precision() {
    let j = json(&pairstop(&with_reference(&["thresholds", "--format", "json"], &[])));
    let rows = read_csv(&stdout(&pairstop(&with_reference(&["thresholds", "--format", "csv"], &[]))));
    let keys = ["k_lower", "k_upper", "c1", "c2", "delta1", "delta2", "lambda"];
    for (row, policy) in rows.iter().zip(j["policies"].as_array().unwrap()) {
        assert_eq!(row[0], policy["model"].as_str().unwrap());
        for (cell, key) in row[1..].iter().zip(keys) {
            assert_eq!(*cell, format!("{:.5}", policy[key].as_f64().unwrap()), "{key}");
        }
    }

    let j = json(&pairstop(&["tables", "--format", "json"]));
    let rows = read_csv(&stdout(&pairstop(&["tables", "--format", "csv"])));
    let flat: Vec<(String, [f64; 3])> = j
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|t| {
            let model = t["model"].as_str().unwrap().to_string();
            t["rows"].as_array().unwrap().iter().map(move |r| {
                (model.clone(), ["value", "lower", "upper"].map(|k| r[k].as_f64().unwrap()))
            })
        })
        .collect();
    assert_eq!(rows.len(), 70);
    assert_eq!(flat.len(), 70);
    for (row, (model, nums)) in rows.iter().zip(&flat) {
        assert_eq!(&row[0], model);
        for (cell, x) in row[2..].iter().zip(nums) {
            assert_eq!(*cell, format!("{x:.5}"));
        }
    }
}

#[test]
fn tables_default_to_the_shipped_reference() {
    let o = pairstop(&["tables", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&stdout(&o));
    let find = |model: &str, param: &str, value: &str| {
        rows.iter()
            .find(|r| r[0] == model && r[1] == param && r[2] == value)
            .unwrap_or_else(|| panic!("{model} {param} {value}"))
            .clone()
    };
    // First row of the mu1 sweep, long/flat.
    assert_eq!(find("long-flat", "mu1", "-0.00304")[3..], ["0.91380", "1.54188"]);
    assert_eq!(find("long-flat", "mu1", "0.19696")[3..], ["0.72644", "0.96334"]);
    // sigma12 sweep, long/flat/short.
    assert_eq!(find("long-flat-short", "sigma12", "-0.05964")[4], "1.54345");
    assert_eq!(find("long-flat-short", "K", "0.00000")[3..], ["0.85698", "1.31911"]);

    let text = stdout(&pairstop(&["tables", "--model", "long-flat"]));
    assert!(text.starts_with("k1 and k2 with varying mu1\n"));
    assert_eq!(text.matches("with varying").count(), 7);
}

#[test]
fn config_file_flags_override_and_env_fallback() {
    let path = scratch("config.json");
    std::fs::write(&path, include_str!("../config/reference.json")).unwrap();
    let p = path.to_str().unwrap();

    let o = pairstop(&["thresholds", "--model", "long-flat", "--config", p]);
    assert!(stdout(&o).contains("k1=0.85527 k2=1.28061"), "{}", stderr(&o));

    // K = 0 from a flag: the K sweep's first row.
    let o = pairstop(&["thresholds", "--model", "long-flat", "--config", p, "--K", "0"]);
    assert!(stdout(&o).contains("k1=0.85698 k2=1.27670"), "{}", stdout(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_pairstop"))
        .args(["thresholds", "--model", "long-flat-short"])
        .env("PAIRSTOP_CONFIG", &path)
        .output()
        .unwrap();
    assert!(stdout(&o).contains("k1*=0.85527 k2*=1.32175"), "{}", stderr(&o));

    std::fs::write(&path, r#"{"mu1": 0.1, "sigma": 3}"#).unwrap();
    let o = pairstop(&["thresholds", "--config", p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
    std::fs::remove_file(&path).unwrap();

    let o = pairstop(&["thresholds", "--config", "/nonexistent/pairstop.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_for_the_solution_and_fails_for_a_corrupted_threshold() {
    let o = pairstop(&with_reference(&["verify", "--points", "2000"], &[]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("long-flat: PASS") && text.contains("long-flat-short: PASS"));
    assert!(!text.contains("FAIL"));

    let o = pairstop(&with_reference(&["verify", "--model", "long-flat", "--upper", "1.3"], &[]));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("long-flat: FAIL"));

    let o = pairstop(&with_reference(&["verify", "--model", "long-flat-short", "--lower", "0.8"], &[]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_json_report_shape() {
    let o = pairstop(&with_reference(&["verify", "--format", "json", "--points", "500"], &[]));
    assert!(o.status.success());
    let reports = json(&o);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let counts: Vec<usize> = reports.iter().map(|r| r["inequalities"].as_array().unwrap().len()).collect();
    assert_eq!(counts, [6, 7]);
    for r in reports {
        assert_eq!(r["passed"], true);
        assert_eq!(r["grid"]["points"], 500);
        for i in r["inequalities"].as_array().unwrap() {
            for key in ["label", "regions", "evaluated", "worst_residual", "worst_at", "passed"] {
                assert!(i.get(key).is_some(), "{key}");
            }
        }
        assert!(!r["smooth_fit"].as_array().unwrap().is_empty());
    }
}

#[test]
fn simulate_requires_a_seed_and_is_reproducible() {
    let o = pairstop(&with_reference(&["simulate", "--paths", "10"], &[]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));

    let args = with_reference(&["simulate", "--format", "json"], &["--seed", "9", "--paths", "200", "--tmax", "5", "--dt", "0.004"]);
    let a = pairstop(&args);
    let b = pairstop(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_immediate_exercise_is_exact() {
    // Long Z with y = 0.8 below k1: sell at once.
    let o = pairstop(&with_reference(
        &["simulate", "--format", "json", "--model", "long-flat"],
        &["--seed", "1", "--paths", "50", "--tmax", "1", "--position", "long", "--x1", "100", "--x2", "80"],
    ));
    assert!(o.status.success(), "{}", stderr(&o));
    let r = &json(&o)["results"][0];
    let c = CostFactors::from_rate(0.001);
    let exact = c.beta_s * 100.0 - c.beta_b * 80.0;
    assert_eq!(r["estimate"]["mean"].as_f64().unwrap(), exact);
    assert_eq!(r["estimate"]["stderr"].as_f64().unwrap(), 0.0);
    assert!((r["closed_form"].as_f64().unwrap() - exact).abs() < 1e-12);
}

#[test]
fn simulate_short_start_uses_the_three_regime_model() {
    let base = with_reference(&["simulate", "--format", "json"], &["--seed", "2", "--paths", "20", "--tmax", "1", "--position", "short"]);
    let v = json(&pairstop(&base));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["model"], "long-flat-short");

    let mut lf = base.clone();
    lf.extend(["--model", "long-flat"]);
    assert_eq!(pairstop(&lf).status.code(), Some(2));
}

#[test]
fn simulate_agrees_with_the_closed_form() {
    let o = pairstop(&with_reference(
        &["simulate", "--format", "json"],
        &["--seed", "17", "--paths", "4000", "--tmax", "25", "--dt", "0.004"],
    ));
    assert!(o.status.success());
    for r in json(&o)["results"].as_array().unwrap() {
        let (mean, se) = (r["estimate"]["mean"].as_f64().unwrap(), r["estimate"]["stderr"].as_f64().unwrap());
        let cf = r["closed_form"].as_f64().unwrap();
        // Four standard errors plus room for the discrete-monitoring bias
        // at this step size and the truncated horizon.
        assert!((mean - cf).abs() <= 4.0 * se + 0.05, "{}: {mean} +/- {se} vs {cf}", r["model"]);
    }
}

fn write_synthetic(path: &Path, seed: u64) -> MarketParams {
    let v = MarketParams::REFERENCE.validate().unwrap();
    let cfg = PathConfig { x1_0: 50.0, x2_0: 70.0, dt: 1.0 / 252.0, t_max: 10.0, n_paths: 1, seed };
    let p = PathGenerator::new(&v, &cfg).unwrap().path(0);
    let start = "2010-01-04".parse().unwrap();
    let series = PriceSeries::on_weekdays(start, p.x1(), p.x2()).unwrap();
    series.write_csv(std::fs::File::create(path).unwrap()).unwrap();
    MarketParams::REFERENCE
}

#[test]
fn calibrate_recovers_synthetic_parameters() {
    let path = scratch("synthetic.csv");
    let truth = write_synthetic(&path, 2010);
    let p = path.to_str().unwrap();
    let o = pairstop(&["calibrate", "--csv", p, "--rho", "0.5", "--K", "0.001", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["calibration"]["diagnostics"]["returns"], 2520);
    let sigma = &v["params"]["sigma"];
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let got = sigma[i][j].as_f64().unwrap();
        assert!((got - truth.sigma[i][j]).abs() < 0.02, "sigma{i}{j} = {got}");
    }
    assert_eq!(v["policies"].as_array().unwrap().len(), 2);

    let half = pairstop(&["calibrate", "--csv", p, "--rho", "0.5", "--K", "0.001", "--split", "0.5", "--format", "json"]);
    assert_eq!(json(&half)["calibration"]["diagnostics"]["returns"], 1259);

    let text = stdout(&pairstop(&["calibrate", "--csv", p, "--rho", "0.5", "--K", "0.001"]));
    assert!(text.starts_with("returns=2520 dt=0.00397\n"), "{text}");
    assert!(text.contains("model=long-flat\n") && text.contains("model=long-flat-short\n"));

    // The price file is the only source: drift flags conflict with it.
    let o = pairstop(&["calibrate", "--csv", p, "--rho", "0.5", "--K", "0.001", "--mu1", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pairstop(&["calibrate", "--csv", p, "--K", "0.001"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn calibrate_rejects_constant_prices() {
    let path = scratch("constant.csv");
    let mut text = String::from("date,price1,price2\n");
    for d in 1..=20 {
        text.push_str(&format!("2021-03-{d:02},10,20\n"));
    }
    std::fs::write(&path, text).unwrap();
    let o = pairstop(&["calibrate", "--csv", path.to_str().unwrap(), "--rho", "0.5", "--K", "0.001"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate diffusion"), "{}", stderr(&o));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn thresholds_from_a_price_file() {
    let path = scratch("thresholds.csv");
    write_synthetic(&path, 3);
    let o = pairstop(&["thresholds", "--csv", path.to_str().unwrap(), "--rho", "0.5", "--K", "0.001", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(json(&o)["calibration"].is_object());
    std::fs::remove_file(&path).unwrap();
    assert_eq!(pairstop(&with_reference(&["thresholds", "--split", "0.5"], &[])).status.code(), Some(2));
}

#[test]
fn backtest_ledger_matches_golden_file() {
    let prices = data("prices.csv");
    let o = pairstop(&with_reference(&["backtest", "--format", "csv", "--csv", prices.to_str().unwrap()], &[]));
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = std::fs::read_to_string(data("ledger_long_flat.csv")).unwrap();
    assert_eq!(stdout(&o), golden);

    // Independent check of the cash flows: buy Z on the fourth row, sell it
    // on the eighth, discounted at rho = 0.5 with 252 rows a year.
    let c = CostFactors::from_rate(0.001);
    let rows = read_csv(&golden);
    let t_open: f64 = 3.0 / 252.0;
    let t_close: f64 = 7.0 / 252.0;
    let open = (-0.5 * t_open).exp() * -(c.beta_b * 100.0 - c.beta_s * 133.0);
    let close = (-0.5 * t_close).exp() * (c.beta_s * 120.0 - c.beta_b * 100.0);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "open_long_Z");
    assert_eq!(rows[1][1], "close_long_Z");
    assert!((rows[0][4].parse::<f64>().unwrap() - open).abs() < 1e-12);
    assert!((rows[1][4].parse::<f64>().unwrap() - close).abs() < 1e-12);
}

#[test]
fn backtest_table_and_out_file() {
    let prices = data("prices.csv");
    let out = scratch("ledger.txt");
    let o = pairstop(&with_reference(
        &["backtest", "--model", "long-flat-short", "--csv", prices.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    ));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    std::fs::remove_file(&out).unwrap();
    assert!(text.starts_with("model=long-flat-short position=flat rows=10 k1*=0.85527 k2*=1.32175\n"), "{text}");
    assert!(text.contains("2020-01-07") && text.contains("2020-01-13"));
    assert!(text.ends_with("total=52.07971\n"));

    // A short start is not available in the long/flat model.
    let o = pairstop(&with_reference(&["backtest", "--position", "short", "--csv", prices.to_str().unwrap()], &[]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn guide_transcript_matches_the_binary() {
    let chapter = include_str!("../../../book/src/cli.md");
    let block = chapter.split("```console\n").nth(1).unwrap().split("```").next().unwrap();
    let mut lines = block.lines();
    let mut command = String::new();
    for line in lines.by_ref() {
        let line = line.trim_start_matches("$ ").trim();
        command.push_str(line.trim_end_matches('\\'));
        command.push(' ');
        if !line.ends_with('\\') {
            break;
        }
    }
    let expected: String = lines.map(|l| format!("{l}\n")).collect();
    let args: Vec<&str> = command.split_whitespace().skip(1).collect();
    assert_eq!(stdout(&pairstop(&args)), expected);
}
