use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coherence-kit"));
    c.env_remove("COHERENCE_KIT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

fn toy(dir: &Path) -> PathBuf {
    let out = dir.join("toy");
    ok(&["synth", "--toy", "--out", p(&out)]);
    out
}

fn small_synth(dir: &Path, seed: u64) -> PathBuf {
    let out = dir.join(format!("synth-{seed}"));
    ok(&["synth", "--firms", "600", "--seed", &seed.to_string(), "--out", p(&out)]);
    out
}

fn gamma_column(csv: &str) -> Vec<(String, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn toy_coherence_column() {
    let dir = TempDir::new().unwrap();
    let t = toy(dir.path());
    let out = dir.path().join("coh");
    ok(&[
        "coherence",
        "--families",
        p(&t.join("families.csv")),
        "--relatedness",
        p(&t.join("relatedness.csv")),
        "--out",
        p(&out),
    ]);
    let g = gamma_column(&read(out.join("coherence.csv")));
    assert_eq!(
        g,
        vec![("x".into(), 3.5), ("y".into(), 3.0), ("z".into(), 2.6)]
    );
    let manifest = json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "coherence");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn toy_ingest_density() {
    let dir = TempDir::new().unwrap();
    let t = toy(dir.path());
    let out = dir.path().join("ingest");
    let stdout = ok(&["ingest", "--families", p(&t.join("families.csv")), "--out", p(&out)]);
    let s: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    // 8 + 3 + 5 ones in a 3 × 11 matrix.
    assert_eq!(s["nnz"], 16);
    assert_eq!(s["firms"], 3);
    assert_eq!(s["codes"], 11);
    assert_eq!(s["density"].as_f64().unwrap(), 16.0 / 33.0);
    assert_eq!(s, json(out.join("summary.json")));
}

#[test]
fn missing_input_is_a_usage_error_naming_the_path() {
    let out = run(&["ingest", "--families", "/no/such/families.csv", "--out", "/tmp/ck-unused"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/families.csv"));
}

#[test]
fn empty_year_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let t = toy(dir.path());
    let out = run(&[
        "ingest",
        "--families",
        p(&t.join("families.csv")),
        "--year",
        "1950",
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1950"));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(run(&["relatedness", "--kind", "jaccard"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = bin()
        .env("COHERENCE_KIT_THREADS", "0")
        .args(["synth", "--toy", "--out", "/tmp/ck-unused"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn relatedness_all_kinds_with_trees() {
    let dir = TempDir::new().unwrap();
    let t = toy(dir.path());
    let ing = dir.path().join("ingest");
    ok(&["ingest", "--families", p(&t.join("families.csv")), "--out", p(&ing)]);
    let out = dir.path().join("rel");
    ok(&[
        "relatedness",
        "--matrix",
        p(&ing.join("binary.csv")),
        "--kind",
        "all",
        "--tree",
        "--out",
        p(&out),
    ]);
    for kind in ["cooccurrence", "tau", "proximity", "taxonomy"] {
        assert!(out.join(format!("{kind}.csv")).exists(), "{kind}");
    }
    // The toy B is connected through firm z: T − 1 tree edges.
    let tree = read(out.join("taxonomy_tree.csv"));
    assert_eq!(tree.lines().count(), 10);
    let summary = json(out.join("summary.json"));
    assert_eq!(summary["matrices"].as_array().unwrap().len(), 4);
}

#[test]
fn taxonomy_adjacency_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let t = toy(dir.path());
    let out = dir.path().join("rel");
    ok(&[
        "relatedness",
        "--families",
        p(&t.join("families.csv")),
        "--format",
        "adjacency",
        "--out",
        p(&out),
    ]);
    let text = read(out.join("taxonomy.csv"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let m: Vec<Vec<u8>> = coherence_kit::synth::TOY_M.iter().map(|r| r.to_vec()).collect();
    let oracle = coherence_oracle::taxonomy(&m);
    for i in 0..11 {
        for j in 0..11 {
            assert!((rows[i][j] - oracle[i][j]).abs() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn singleton_firm_is_flagged() {
    let dir = TempDir::new().unwrap();
    let fam = dir.path().join("families.csv");
    std::fs::write(
        &fam,
        "family_id,year,applicants,ipc_codes,triadic\n\
         f1,2010,A,A01B;B01B,1\n\
         f2,2010,B,A01B,1\n\
         f3,2010,C,B01B;C01B,1\n",
    )
    .unwrap();
    let out = dir.path().join("coh");
    ok(&["coherence", "--families", p(&fam), "--legacy", "--out", p(&out)]);
    let csv = read(out.join("coherence.csv"));
    let b = csv.lines().find(|l| l.starts_with("B,")).unwrap();
    assert!(b.contains("singleton"), "{b}");
    assert!(!csv.lines().find(|l| l.starts_with("A,")).unwrap().contains("singleton"));
    assert!(out.join("coherence.json").exists());
}

#[test]
fn country_taxonomy_is_labelled() {
    let dir = TempDir::new().unwrap();
    let s = small_synth(dir.path(), 3);
    let out = dir.path().join("coh");
    ok(&[
        "coherence",
        "--families",
        p(&s.join("families.csv")),
        "--financials",
        p(&s.join("financials.csv")),
        "--aggregate",
        "country",
        "--out",
        p(&out),
    ]);
    let csv = read(out.join("coherence.csv"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",country")));

    let no_fin = run(&["coherence", "--families", p(&s.join("families.csv")), "--aggregate", "country", "--out", p(&out)]);
    assert_eq!(no_fin.status.code(), Some(2));
}

#[test]
fn analyze_outputs() {
    let dir = TempDir::new().unwrap();
    let s = small_synth(dir.path(), 4);
    let out = dir.path().join("an");
    let stdout = ok(&[
        "analyze",
        "--families",
        p(&s.join("families.csv")),
        "--financials",
        p(&s.join("financials.csv")),
        "--cells",
        "6",
        "--out",
        p(&out),
    ]);
    assert!(stdout.starts_with("VARIABLES"));
    let header = stdout.lines().next().unwrap();
    for label in ["(0)", "(1)", "(2)", "(3)"] {
        assert!(header.contains(label));
    }
    let regs = json(out.join("regressions.json"));
    let spec1 = &regs[1]["result"];
    let gamma = spec1["terms"].as_array().unwrap().iter().find(|t| t["name"] == "Coherent Div.").unwrap();
    assert!(gamma["coef"].as_f64().unwrap() > 0.0);
    assert!(gamma["p"].as_f64().unwrap() < 0.01);
    let gamma_row = stdout.lines().find(|l| l.starts_with("Coherent Div.")).unwrap();
    assert!(gamma_row.contains("***"));

    let n = json(out.join("frame_report.json"))["joined"].as_u64().unwrap();
    for grid in ["grid_diversification_gamma.csv", "grid_size_gamma.csv"] {
        let text = read(out.join(grid));
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 36);
        let total: u64 = rows.iter().map(|l| l.split(',').nth(6).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, n);
    }
    let curve = read(out.join("curve_gamma.csv"));
    assert_eq!(curve.lines().count(), 11);
}

#[test]
fn analyze_spec_subset_from_config() {
    let dir = TempDir::new().unwrap();
    let s = small_synth(dir.path(), 5);
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "families = {:?}\nfinancials = {:?}\nspecs = [1, 3]\ncovariance = \"hc1\"\nbins = 4\n",
            p(&s.join("families.csv")),
            p(&s.join("financials.csv"))
        ),
    )
    .unwrap();
    let out = dir.path().join("an");
    ok(&["analyze", "--config", p(&cfg), "--bins", "5", "--out", p(&out)]);
    let regs = json(out.join("regressions.json"));
    let labels: Vec<&str> = regs.as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["(1)", "(3)"]);
    assert_eq!(regs[0]["result"]["covariance"], "hc1");
    // Flag wins over the config file.
    assert_eq!(read(out.join("curve_gamma.csv")).lines().count(), 6);
    assert_eq!(json(out.join("manifest.json"))["config"]["bins"], 5);
}

#[test]
fn synth_round_trips_through_ingest() {
    let dir = TempDir::new().unwrap();
    let s = small_synth(dir.path(), 6);
    let out = dir.path().join("ing");
    let summary: serde_json::Value =
        serde_json::from_str(&ok(&["ingest", "--families", p(&s.join("families.csv")), "--out", p(&out)])).unwrap();
    assert_eq!(summary["firms"], 600);
    let recovery = json(s.join("recovery.json"));
    assert!(recovery["spearman_block_gamma"].as_f64().unwrap() > 0.8);
    assert_eq!(recovery["gamma_positive_significant"], true);
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = TempDir::new().unwrap();
    let s = small_synth(dir.path(), 7);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("an-{threads}"));
        let status = bin()
            .env("COHERENCE_KIT_THREADS", threads)
            .args([
                "analyze",
                "--families",
                p(&s.join("families.csv")),
                "--financials",
                p(&s.join("financials.csv")),
                "--legacy",
                "--out",
                p(&out),
            ])
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        outputs.push(data_files(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
}
