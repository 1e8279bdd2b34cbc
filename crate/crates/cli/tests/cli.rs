use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coda"));
    c.env_remove("CODA_OUTPUT_DIR");
    c
}

/// Deterministic strictly positive 24-row, 5-part table with three groups.
fn write_input(dir: &Path) -> PathBuf {
    let mut s = String::from("id,group,A,B,C,D,E\n");
    for i in 0..24u32 {
        let g = ["x", "y", "z"][(i % 3) as usize];
        let vals: Vec<String> = (0..5u32)
            .map(|j| {
                let h = (i * 37 + j * 101 + i * j * 13) % 97;
                format!("{}", 1.0 + h as f64 / 7.0 + if g == "x" && j == 0 { 9.0 } else { 0.0 })
            })
            .collect();
        s.push_str(&format!("s{i},{g},{}\n", vals.join(",")));
    }
    let p = dir.join("in.csv");
    std::fs::write(&p, s).unwrap();
    p
}

fn run(args: &[&str], input: &Path, out: &Path) -> Output {
    let o = bin()
        .args(args)
        .arg("--input")
        .arg(input)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap();
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

const COMMANDS: &[&[&str]] = &[
    &["transform", "--kind", "ilr", "--tree", "ward"],
    &["variance"],
    &["ordinate", "--method", "lra", "--ellipses", "--replicates", "50"],
    &["ordinate", "--method", "ca", "--alpha", "0.5"],
    &["findalr"],
    &["step", "--top", "3"],
    &["backstep", "--min-explained", "60"],
    &["theta", "--permutations", "10"],
    &["cluster", "--method", "amalg"],
    &["cluster", "--method", "kmeans", "--k", "3", "--compare", "alr"],
    &["diagnose", "coherence", "--reps", "8"],
    &["diagnose", "alphasweep", "--alphas", "1,0.5,0.1"],
    &["shrink"],
];

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    for args in COMMANDS {
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        let mut seeded: Vec<&str> = args.to_vec();
        seeded.extend(["--seed", "11"]);
        run(&seeded, &input, &a);
        run(&seeded, &input, &b);
        let (fa, fb) = (artifacts(&a), artifacts(&b));
        assert!(!fa.is_empty(), "{args:?} wrote nothing");
        assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
        for (name, bytes) in &fa {
            assert!(bytes == &fb[name], "{args:?}: {name} differs between runs");
        }
    }
}

#[test]
fn manifest_records_inputs_config_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let out = tmp.path().join("o");
    run(&["step", "--seed", "42"], &input, &out);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("step.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["run"]["seed"], 42);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["versions"]["coda-core"].is_string());
    assert!(m["timings_ms"]["compute"].is_number());
    assert_eq!(m["outputs"][0], "step.csv");
}

#[test]
fn step_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let out = tmp.path().join("o");
    run(&["step"], &input, &out);
    let (header, rows) = read_csv(&out.join("step.csv"));
    assert_eq!(header, ["step", "ratio", "row", "col", "R2cum", "Procr"]);
    assert_eq!(rows.len(), 4);
    let last: f64 = rows[3][4].parse().unwrap();
    assert!((last - 100.0).abs() < 1e-6);
    for r in &rows {
        let (j, k): (usize, usize) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((1..=5).contains(&j) && (1..=5).contains(&k) && j != k);
    }
    let (_, cand) = read_csv(&out.join("step-candidates.csv"));
    assert!(cand.iter().filter(|r| r[0] == "1").count() <= 20);
}

#[test]
fn clr_and_lr_outputs_reconcile() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let (o1, o2) = (tmp.path().join("clr"), tmp.path().join("lr"));
    run(&["transform", "--kind", "clr"], &input, &o1);
    run(&["transform", "--kind", "lr"], &input, &o2);
    let (ch, crows) = read_csv(&o1.join("transform.csv"));
    let (lh, lrows) = read_csv(&o2.join("transform.csv"));
    for (q, label) in lh.iter().enumerate().skip(1) {
        let (a, b) = label.split_once('/').unwrap();
        let ja = ch.iter().position(|h| h == a).unwrap();
        let jb = ch.iter().position(|h| h == b).unwrap();
        for i in 0..crows.len() {
            let f = |s: &str| s.parse::<f64>().unwrap();
            let diff = f(&crows[i][ja]) - f(&crows[i][jb]);
            assert!((diff - f(&lrows[i][q])).abs() < 1e-8, "{label} row {i}");
        }
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let out = tmp.path().join("o");
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"input": {:?}, "out_dir": {:?}, "seed": 1, "top": 2, "max_steps": 2}}"#,
            input.to_str().unwrap(),
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = bin().args(["step", "--config"]).arg(&cfg).args(["--seed", "7"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("step.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["params"]["top"], 2);
    let (_, rows) = read_csv(&out.join("step.csv"));
    assert_eq!(rows.len(), 2);
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let out = tmp.path().join("env-out");
    let o = bin()
        .args(["findalr", "--input"])
        .arg(&input)
        .env("CODA_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("findalr.csv").exists());
}

fn error_line(o: &Output) -> String {
    let err = String::from_utf8_lossy(&o.stderr).into_owned();
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error[")).collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    lines[0].to_string()
}

#[test]
fn errors_are_single_coded_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "id,a,b\nr1,1,2\nr2,1,oops\n").unwrap();
    let o = bin().args(["variance", "--input"]).arg(&bad).arg("--out-dir").arg(&out).output().unwrap();
    assert!(!o.status.success());
    let line = error_line(&o);
    assert!(line.starts_with("error[E_PARSE]: line 3"), "{line}");

    let zeros = tmp.path().join("zeros.csv");
    std::fs::write(&zeros, "id,a,b,c\nr1,1,0,2\nr2,2,1,3\nr3,1,1,1\n").unwrap();
    let o = bin().args(["variance", "--input"]).arg(&zeros).arg("--out-dir").arg(&out).output().unwrap();
    assert!(!o.status.success());
    assert!(error_line(&o).starts_with("error[E_ZERO_ENTRIES]"));

    let o = bin().args(["variance", "--zero-replace", "0.65", "--input"]).arg(&zeros).arg("--out-dir").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = bin().args(["theta", "--input"]).arg(&zeros).arg("--out-dir").arg(&out).arg("--zero-replace").arg("0.5").output().unwrap();
    assert!(error_line(&o).starts_with("error[E_NO_GROUPS]"));

    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("error[E_USAGE]"));

    let o = bin().args(["variance"]).output().unwrap();
    assert!(error_line(&o).starts_with("error[E_CONFIG]"));
}

#[test]
fn biplot_and_dendrogram_svgs_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let out = tmp.path().join("o");
    run(&["ordinate", "--contribution", "--ellipses", "--replicates", "30"], &input, &out);
    let s = std::fs::read_to_string(out.join("ordinate-biplot.svg")).unwrap();
    assert!(s.contains("version=\"1.1\"") && s.contains("<path"));
    run(&["cluster", "--method", "ward"], &input, &out);
    let d: Value = serde_json::from_str(&std::fs::read_to_string(out.join("cluster-dendrogram.json")).unwrap()).unwrap();
    assert_eq!(d["merges"].as_array().unwrap().len(), 4);
    assert!(out.join("cluster-dendrogram.svg").exists());
}
