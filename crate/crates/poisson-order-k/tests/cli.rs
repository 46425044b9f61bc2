//! End-to-end checks of the command-line surface: output formats, exit codes,
//! and the JSON round-trip contract.

use std::process::{Command, Output};

use poisson_order_k::LambdaPolynomial;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poisson-order-k"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn table_csv_shape() {
    let out = run(&["table", "--k", "2", "--lambda", "1.0", "--n-max", "8", "--method", "alt", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,probability,log_probability,cumulative");
    assert_eq!(lines.len(), 10); // header + 9 data rows
    let mut prev = 0.0;
    for line in &lines[1..] {
        let cumulative: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(cumulative >= prev);
        prev = cumulative;
    }
    assert!(!text.contains('\r'));
}

#[test]
fn table_single_row() {
    let out = run(&["table", "--k", "2", "--lambda", "1.0", "--n-max", "0", "--method", "oracle", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let p: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((p - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn table_json_entries() {
    let out = run(&["table", "--k", "3", "--lambda", "0.5", "--n-max", "30", "--method", "km", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 31);
    for (n, e) in entries.iter().enumerate() {
        assert_eq!(e["n"].as_u64().unwrap(), n as u64);
        let p = e["probability"].as_f64().unwrap();
        assert!(p > 0.0 && p < 1.0);
        // cross-check against the library's oracle engine
        let poly = poisson_order_k::oracle_polynomial(3, n as u64);
        let params = poisson_order_k::OrderKParams::new(3, 0.5).unwrap();
        let expected = poisson_order_k::evaluate_pmf(&poly, &params).unwrap();
        assert!((p - expected.probability).abs() < 1e-12 * expected.probability.max(1e-300));
    }
}

#[test]
fn exact_text_fixture() {
    let out = run(&["exact", "--k", "2", "--n", "6", "--method", "alt"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "λ^6/720 + λ^5/24 + λ^4/4 + λ^3/6");

    let out = run(&["exact", "--k", "2", "--n", "0", "--method", "km"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1");

    let out = run(&["exact", "--k", "2", "--n", "6", "--method", "alt", "--ascii"]);
    assert_eq!(stdout(&out).trim(), "L^6/720 + L^5/24 + L^4/4 + L^3/6");
}

#[test]
fn exact_methods_agree() {
    let alt = run(&["exact", "--k", "4", "--n", "9", "--method", "alt"]);
    let oracle = run(&["exact", "--k", "4", "--n", "9", "--method", "oracle"]);
    assert!(alt.status.success() && oracle.status.success());
    assert_eq!(stdout(&alt), stdout(&oracle));
}

#[test]
fn exact_json_round_trip_is_byte_identical() {
    let out = run(&["exact", "--k", "3", "--n", "11", "--method", "alt", "--format", "json"]);
    assert!(out.status.success());
    let emitted = stdout(&out);
    let parsed = LambdaPolynomial::from_json(emitted.trim()).unwrap();
    assert_eq!(parsed.to_json(), emitted.trim());
}

#[test]
fn verify_pass_cases() {
    let out = run(&["verify", "--k", "2", "--n-max", "8", "--methods", "oracle,km,alt,k2"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.starts_with("PASS")));

    let out = run(&["verify", "--k", "1", "--n-max", "30", "--methods", "oracle,alt"]);
    assert!(out.status.success());

    let out = run(&["verify", "--k", "5", "--n-max", "50", "--methods", "oracle,km,alt"]);
    assert!(out.status.success());
}

#[test]
fn census_alt_generates_no_low_degree_terms() {
    let out = run(&["census", "--k", "3", "--n-max", "30", "--methods", "km,alt", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,n,km_total,km_low_degree,alt_total,alt_low_degree,savings_ratio");
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        let n: u64 = cols[1].parse().unwrap();
        let km_total: u64 = cols[2].parse().unwrap();
        let alt_total: u64 = cols[4].parse().unwrap();
        let alt_low: u64 = cols[5].parse().unwrap();
        assert_eq!(alt_low, 0);
        assert!(alt_total <= km_total, "n={n}");
    }
}

#[test]
fn exit_codes() {
    // config error: k2 with wrong k
    let out = run(&["exact", "--k", "3", "--n", "2", "--method", "k2"]);
    assert_eq!(out.status.code(), Some(2));

    // config error: census with oracle
    let out = run(&["census", "--k", "2", "--n-max", "5", "--methods", "oracle"]);
    assert_eq!(out.status.code(), Some(2));

    // config error: bad lambda
    let out = run(&["table", "--k", "2", "--lambda", "-1", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["table", "--k", "2", "--lambda", "1e3", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(2));

    // clap usage error
    let out = run(&["table", "--k", "2", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(2));

    // success
    let out = run(&["verify", "--k", "2", "--n-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bench_smoke() {
    let out = run(&["bench", "--k", "2", "--n-max", "40", "--methods", "km,alt", "--rounds", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,k,n,median_ns,term_count");
    assert_eq!(lines.len(), 1 + 2 * 40);
    // term counts per (n) comparable across methods
    let count = |method: &str, n: u64| -> u64 {
        lines[1..]
            .iter()
            .find_map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[0] == method && c[2] == n.to_string()).then(|| c[4].parse().unwrap())
            })
            .unwrap()
    };
    for n in 1..=40 {
        assert!(count("alt", n) <= count("km", n), "n={n}");
    }
}
