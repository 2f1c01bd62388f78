use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use incomedist::empirical::{build_ccdf, IncomeSample};
use incomedist::fit::fit_pipeline;
use incomedist::ingest::{load_samples, write_samples, InputSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const FIG1: &str = "T = 37000\nm0 = 160000\nm1 = 300000\nalpha = 2.8643\nalpha1 = 0.70\n";

fn incomedist(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incomedist"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = incomedist(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup() -> (TempDir, PathBuf) {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_path_buf();
    fs::write(dir.join("fig1.txt"), FIG1).unwrap();
    (tmp, dir)
}

fn table(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn kv_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim().to_string())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn eval_table_shape() {
    let (_t, dir) = setup();
    ok(&dir, &["eval", "--params", "fig1.txt", "--out-dir", "out"]);
    let raw = fs::read_to_string(dir.join("out/eval.tsv")).unwrap();
    let first = raw.lines().nth(1).unwrap();
    assert_eq!(first.split('\t').nth(2), Some("1.00000000000e0"));
    let rows = table(&dir.join("out/eval.tsv"));
    assert_eq!(rows.len(), 200);
    assert!(rows.windows(2).all(|w| w[1][2] <= w[0][2]));
    let last = rows.last().unwrap();
    let decade = rows.iter().find(|r| r[0] >= last[0] / 10.0).unwrap();
    let slope = (last[2] / decade[2]).ln() / (last[0] / decade[0]).ln();
    assert!((slope / -0.70 - 1.0).abs() < 0.01, "tail slope {slope}");
    let plot = table(&dir.join("out/eval_plot.tsv"));
    assert!(plot.iter().all(|r| r.len() == 2 && r[0] > 0.0));
}

#[test]
fn invalid_parameters_exit_3() {
    let (_t, dir) = setup();
    fs::write(dir.join("bad.txt"), FIG1.replace("2.8643", "0.5")).unwrap();
    let out = incomedist(&dir, &["eval", "--params", "bad.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sampling_needs_seed_and_repeats() {
    let (_t, dir) = setup();
    let out = incomedist(&dir, &["sample", "--params", "fig1.txt", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    for d in ["a", "b"] {
        ok(&dir, &["sample", "--params", "fig1.txt", "--n", "5000", "--seed", "8", "--out-dir", d]);
    }
    assert_eq!(
        fs::read(dir.join("a/samples.csv")).unwrap(),
        fs::read(dir.join("b/samples.csv")).unwrap()
    );
}

#[test]
fn sample_then_fit_matches_library() {
    let (_t, dir) = setup();
    ok(&dir, &["sample", "--params", "fig1.txt", "--n", "100000", "--seed", "1", "--out-dir", "s"]);
    let stdout = ok(&dir, &["fit", "--samples", "s/samples.csv", "--out-dir", "f"]);
    let (samples, _) = load_samples(dir.join("s/samples.csv"), &InputSchema::default()).unwrap();
    let report = fit_pipeline(&build_ccdf(&samples).unwrap(), None).unwrap();
    assert_eq!(
        fs::read_to_string(dir.join("f/fit_report.txt")).unwrap(),
        report.to_kv().to_text()
    );
    assert_eq!(kv_value(&stdout, "infinite_variance_high_class"), "true");
    // the report doubles as a parameter file
    ok(&dir, &["eval", "--params", "f/fit_report.txt", "--out-dir", "e"]);
}

#[test]
fn fit_overrides_echoed() {
    let (_t, dir) = setup();
    ok(&dir, &["sample", "--params", "fig1.txt", "--n", "50000", "--seed", "2", "--out-dir", "s"]);
    let stdout = ok(
        &dir,
        &["fit", "--samples", "s/samples.csv", "--m0", "160000", "--m1", "300000", "--out-dir", "f"],
    );
    assert_eq!(kv_value(&stdout, "crossovers"), "manual");
    assert_eq!(kv_value(&stdout, "m0"), "1.60000000000e5");
    assert_eq!(kv_value(&stdout, "m1"), "3.00000000000e5");
    let out = incomedist(&dir, &["fit", "--samples", "s/samples.csv", "--m0", "160000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_samples_exit_2_with_lines() {
    let (_t, dir) = setup();
    fs::write(dir.join("bad.csv"), "income\n100\nabc\n300\n-5\n").unwrap();
    let out = incomedist(&dir, &["fit", "--samples", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("line 5"), "{err}");
}

fn write_sample_file(path: &Path, samples: &[IncomeSample]) {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples).unwrap();
    fs::write(path, buf).unwrap();
}

#[test]
fn merge_with_empty_wealth_is_identity() {
    let (_t, dir) = setup();
    let survey: Vec<_> = [1200.5, 30000.0, 81234.25]
        .into_iter()
        .map(|m| IncomeSample { year: Some(2007), ..IncomeSample::survey(m) })
        .collect();
    write_sample_file(&dir.join("survey.csv"), &survey);
    fs::write(dir.join("wealth.csv"), "").unwrap();
    let stdout = ok(&dir, &["merge", "--survey", "survey.csv", "--wealth", "wealth.csv", "--out-dir", "m"]);
    assert_eq!(
        fs::read(dir.join("survey.csv")).unwrap(),
        fs::read(dir.join("m/merged.csv")).unwrap()
    );
    assert_eq!(kv_value(&stdout, "scale_factor"), "1.00000000000e0");
}

#[test]
fn merge_recovers_fixture_factor() {
    let (_t, dir) = setup();
    // Pareto sample split at its 99th percentile; the top part is the rich
    // list, recorded as wealth gains inflated a hundredfold
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut x: Vec<f64> = (0..100_000)
        .map(|_| 1e4 * (1.0 - rng.gen::<f64>()).powf(-1.0 / 0.7))
        .collect();
    x.sort_by(f64::total_cmp);
    let (low, high) = x.split_at(99_000);
    let survey: Vec<_> = low.iter().copied().map(IncomeSample::survey).collect();
    write_sample_file(&dir.join("survey.csv"), &survey);
    let mut wealth = String::from("id,year,wealth,currency\n");
    for (i, m) in high.iter().enumerate() {
        wealth += &format!("e{i},2006,1,USD\ne{i},2007,{},USD\n", 1.0 + 100.0 * m);
    }
    fs::write(dir.join("wealth.csv"), wealth).unwrap();
    let stdout = ok(
        &dir,
        &[
            "merge", "--survey", "survey.csv", "--wealth", "wealth.csv", "--fx-rate", "1",
            "--year-from", "2006", "--year-to", "2007", "--out-dir", "m",
        ],
    );
    let f: f64 = kv_value(&stdout, "scale_factor").parse().unwrap();
    assert!((f / 0.01 - 1.0).abs() < 0.2, "factor {f}");
    assert_eq!(kv_value(&stdout, "n_richlist_kept"), "1000");
}

#[test]
fn manifests_are_deterministic_and_replay() {
    let (_t, dir) = setup();
    let digest = |p: &str| fs::read(dir.join(p)).unwrap();
    let input_before = digest("fig1.txt");
    ok(&dir, &["sample", "--params", "fig1.txt", "--n", "20000", "--seed", "3", "--out-dir", "a"]);
    let first = digest("a/manifest.txt");
    ok(&dir, &["sample", "--params", "fig1.txt", "--n", "20000", "--seed", "3", "--out-dir", "a"]);
    assert_eq!(first, digest("a/manifest.txt"));
    assert_eq!(input_before, digest("fig1.txt"));

    ok(&dir, &["--config", "a/manifest.txt", "sample", "--out-dir", "b"]);
    assert_eq!(digest("a/samples.csv"), digest("b/samples.csv"));
    assert_eq!(first, digest("b/manifest.txt"));

    ok(&dir, &["fit", "--samples", "a/samples.csv", "--out-dir", "f1"]);
    ok(&dir, &["fit", "--config", "f1/manifest.txt", "--out-dir", "f2"]);
    assert_eq!(digest("f1/fit_report.txt"), digest("f2/fit_report.txt"));

    // a changed input is refused on replay
    fs::write(dir.join("a/samples.csv"), "income\n1\n2\n").unwrap();
    let out = incomedist(&dir, &["fit", "--config", "f1/manifest.txt", "--out-dir", "f3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_reports_ks_and_repeats() {
    let (_t, dir) = setup();
    let args = [
        "simulate", "--params", "fig1.txt", "--seed", "42", "--n-walkers", "1000",
        "--burn-in", "100000", "--sample-every", "200", "--total-samples", "100000",
    ];
    let mut a = args.to_vec();
    a.extend(["--out-dir", "s1"]);
    let stdout = ok(&dir, &a);
    let ks: f64 = kv_value(&stdout, "ks_distance").parse().unwrap();
    assert!(ks < 0.03, "ks {ks}");
    ok(&dir, &["simulate", "--config", "s1/manifest.txt", "--out-dir", "s2"]);
    assert_eq!(
        fs::read(dir.join("s1/histogram.tsv")).unwrap(),
        fs::read(dir.join("s2/histogram.tsv")).unwrap()
    );
    let hist = table(&dir.join("s1/histogram.tsv"));
    let mass: f64 = hist.iter().map(|r| (r[1] - r[0]) * r[2]).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn slope_table_written() {
    let (_t, dir) = setup();
    ok(&dir, &["sample", "--params", "fig1.txt", "--n", "5000", "--seed", "4", "--out-dir", "s"]);
    ok(&dir, &["slope", "--samples", "s/samples.csv", "--window", "51", "--out-dir", "o"]);
    let rows = table(&dir.join("o/slope.tsv"));
    assert_eq!(rows.len(), 5000 - 51 + 1);
    assert!(rows.iter().all(|r| r[1] < 0.0));
}
