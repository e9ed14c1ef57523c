use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use tensorinf_core::io::{write_dataset, write_tensor, TNSR_MAGIC};
use tensorinf_core::Tensor3;
use tensorinf_simlab::generate::{gen_observation, gen_orth_instance, gen_regression, gen_tucker_instance};
use tensorinf_simlab::rng::{substream, Stream};
use tensorinf_simlab::NoiseKind;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tensorinf").chain(args.iter().copied());
    let code = tensorinf_cli::run(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn small_tensor(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("x.tnsr");
    let t = Tensor3::from_fn([2, 3, 4], |i, j, k| (i * 12 + j * 4 + k) as f64);
    write_tensor(&path, &t).unwrap();
    path
}

fn tucker_tensor(dir: &TempDir) -> PathBuf {
    let mut rng = substream(11, 0, Stream::Truth);
    let truth = gen_tucker_instance(20, 2, 1.2, &mut rng).unwrap().reconstruct();
    let a = gen_observation(&truth, 1.0, NoiseKind::Gaussian, &mut substream(11, 0, Stream::Noise));
    let path = dir.path().join("tucker.tnsr");
    write_tensor(&path, &a).unwrap();
    path
}

fn orth_tensor(dir: &TempDir, r: usize) -> PathBuf {
    let truth = gen_orth_instance(15, r, 40.0, &mut substream(5, 0, Stream::Truth)).unwrap();
    let a = gen_observation(&truth.reconstruct(), 1.0, NoiseKind::Gaussian, &mut substream(5, 0, Stream::Noise));
    let path = dir.path().join(format!("orth{r}.tnsr"));
    write_tensor(&path, &a).unwrap();
    path
}

fn dataset(dir: &TempDir) -> PathBuf {
    let truth = gen_tucker_instance(5, 2, 1.0, &mut substream(3, 0, Stream::Truth)).unwrap().reconstruct();
    let data = gen_regression(
        &truth,
        400,
        0.5,
        NoiseKind::Gaussian,
        &mut substream(3, 0, Stream::Design),
        &mut substream(3, 0, Stream::Noise),
    )
    .unwrap();
    let path = dir.path().join("reg.dat");
    write_dataset(&path, &data).unwrap();
    path
}

fn json(o: &Output) -> Value {
    assert_eq!(o.code, 0, "stderr: {}", o.stderr);
    serde_json::from_str(&o.stdout).unwrap()
}

#[test]
fn sim_pca_normal_reports_ks_and_echoes_config() {
    let o = run(&["sim", "pca-normal", "--p", "12", "--r", "2", "--gamma", "0.9", "--reps", "6", "--seed", "7"]);
    let doc = json(&o);
    assert!(doc["summary"]["ks"].as_f64().is_some());
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["generator"], "chacha8-splittable-v1");
    assert_eq!(doc["config"]["p"], 12);
    assert_eq!(doc["config"]["alpha"], 0.05);
    assert_eq!(doc["replicates"]["oracle"].as_array().unwrap().len(), 6);
    assert_valid("sim.schema.json", &doc);
}

#[test]
fn every_sim_kind_validates_against_schema() {
    let cases: &[&[&str]] = &[
        &["sim", "pca-plugin", "--p", "10", "--r", "2", "--reps", "3"],
        &["sim", "orth", "--p", "10", "--r", "2", "--reps", "3", "--init", "oracle:0.1"],
        &["sim", "rank1-linear", "--p", "10", "--reps", "3"],
        &["sim", "rank1-entry", "--p", "10", "--reps", "3", "--floor", "off"],
        &["sim", "coverage-entry", "--p", "10", "--reps", "3", "--floor", "0.01"],
        &["sim", "coverage-subspace", "--p", "10", "--r", "2", "--reps", "3"],
        &["sim", "regression", "--p", "4", "--r", "2", "--reps", "2", "--init", "oracle", "--gamma", "1"],
        &["sim", "rank1-subgaussian", "--p", "10", "--reps", "3", "--noise", "rademacher", "--localized"],
    ];
    for args in cases {
        let doc = json(&run(args));
        assert_valid("sim.schema.json", &doc);
        assert_eq!(doc["summary"]["failures"], 0, "{args:?}");
    }
}

#[test]
fn sim_output_independent_of_thread_count() {
    let base = ["sim", "orth", "--p", "10", "--r", "2", "--reps", "8", "--seed", "3"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.code, 0, "{}", one.stderr);
    assert_eq!(one.stdout.as_bytes(), four.stdout.as_bytes());
}

#[test]
fn sim_csv_has_header_comment_and_one_row_per_replicate() {
    let o = run(&["sim", "pca-normal", "--p", "8", "--r", "2", "--reps", "4", "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    let header: Value = serde_json::from_str(lines[0].strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["config"]["reps"], 4);
    assert_eq!(lines[1], "replicate,oracle,plug_in,raw,covered,sigma_ratio,max_sin_theta,error");
    assert_eq!(lines.len(), 6);
    assert!(lines[2].starts_with("0,"));
}

#[test]
fn sim_writes_to_out_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["sim", "pca-normal", "--p", "8", "--r", "2", "--reps", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_valid("sim.schema.json", &doc);
}

#[test]
fn argument_errors_exit_two() {
    let o = run(&["sim", "pca-normal", "--reps", "3"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error[argument]:"), "{}", o.stderr);
    assert!(o.stderr.contains("--p"));
    assert!(o.stderr.contains("Usage:"));

    for args in [
        &["sim", "pca-normal", "--p", "10", "--bogus"][..],
        &["sim", "no-such-kind", "--p", "10"],
        &["sim", "pca-normal", "--p", "10", "--r", "11"],
        &["sim", "pca-normal", "--p", "10", "--alpha", "1.5"],
        &["sim", "pca-normal", "--p", "10", "--init", "oracle:2"],
        &["sim", "pca-normal", "--p", "10", "--noise", "cauchy"],
        &["sim", "regression", "--p", "10", "--n", "3"],
        &["fit", "pca", "/nonexistent/file.tnsr"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.code, 2, "{args:?}: {}", o.stderr);
        assert!(o.stderr.starts_with("error["), "{args:?}: {}", o.stderr);
    }
}

#[test]
fn help_goes_to_stdout() {
    let o = run(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("sim") && o.stdout.contains("fit") && o.stdout.contains("info"));
    assert!(o.stderr.is_empty());
}

#[test]
fn info_prints_dims() {
    let dir = TempDir::new().unwrap();
    let path = small_tensor(&dir);
    let o = run(&["info", path.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("dims: (2, 3, 4)"), "{}", o.stdout);

    let doc = json(&run(&["info", path.to_str().unwrap(), "--format", "json"]));
    assert_eq!(doc["file"]["dims"], serde_json::json!([2, 3, 4]));
    assert_valid("info.schema.json", &doc);

    let data = dataset(&dir);
    let doc = json(&run(&["info", data.to_str().unwrap(), "--format", "json"]));
    assert_eq!(doc["file"]["kind"], "dataset");
    assert_eq!(doc["file"]["n"], 400);
    assert_valid("info.schema.json", &doc);
}

#[test]
fn malformed_files_are_format_errors() {
    let dir = TempDir::new().unwrap();
    let good = std::fs::read(small_tensor(&dir)).unwrap();

    let truncated = dir.path().join("short.tnsr");
    std::fs::write(&truncated, &good[..good.len() - 5]).unwrap();
    for args in [&["info", truncated.to_str().unwrap()][..], &["fit", "pca", truncated.to_str().unwrap(), "--r", "1"]] {
        let o = run(args);
        assert_eq!(o.code, 2);
        assert!(o.stderr.starts_with("error[format]:"), "{}", o.stderr);
        assert!(o.stderr.contains("offset"), "{}", o.stderr);
    }

    let mut wrong = good.clone();
    wrong[..TNSR_MAGIC.len()].copy_from_slice(b"TNSR9\n");
    let bad = dir.path().join("bad.tnsr");
    std::fs::write(&bad, &wrong).unwrap();
    let o = run(&["fit", "rank1", bad.to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.starts_with("error[format]:"), "{}", o.stderr);
}

#[test]
fn fit_pca_reports_regions_per_mode() {
    let dir = TempDir::new().unwrap();
    let path = tucker_tensor(&dir);
    let doc = json(&run(&["fit", "pca", path.to_str().unwrap(), "--r", "2", "--alpha", "0.1"]));
    assert_valid("fit.schema.json", &doc);
    let modes = doc["result"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    for m in modes {
        let region = &m["region"];
        assert!(region["radius"].as_f64().unwrap() > region["center"].as_f64().unwrap());
        assert_eq!(m["factor"].as_array().unwrap().len(), 20);
    }
    assert_eq!(doc["sigma_source"], "estimated");
    let s = doc["sigma_hat"].as_f64().unwrap();
    assert!((0.8..1.1).contains(&s), "sigma_hat {s}");

    let given = json(&run(&["fit", "pca", path.to_str().unwrap(), "--r", "2,2,2", "--sigma", "1"]));
    assert_eq!(given["sigma_hat"], 1.0);
    assert_eq!(given["sigma_source"], "given");
    assert_eq!(run(&["fit", "pca", path.to_str().unwrap(), "--r", "2,2"]).code, 2);
}

#[test]
fn fit_orth_and_rank1() {
    let dir = TempDir::new().unwrap();
    let path = orth_tensor(&dir, 2);
    let doc = json(&run(&["fit", "orth", path.to_str().unwrap(), "--r", "2"]));
    assert_valid("fit.schema.json", &doc);
    let comps = doc["result"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    // lambdas are (2, 1) * 40
    let mut lam: Vec<f64> = comps.iter().map(|c| c["lambda_hat"].as_f64().unwrap()).collect();
    lam.sort_by(f64::total_cmp);
    assert!((lam[0] - 40.0).abs() < 5.0 && (lam[1] - 80.0).abs() < 5.0, "{lam:?}");

    let path = orth_tensor(&dir, 1);
    let doc = json(&run(&["fit", "rank1", path.to_str().unwrap(), "--entry", "0,0,0", "--entry", "1,2,3"]));
    assert_valid("fit.schema.json", &doc);
    let entries = doc["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        let iv = &e["interval"];
        assert!(iv["lower"].as_f64().unwrap() <= iv["upper"].as_f64().unwrap());
    }
    assert_eq!(run(&["fit", "rank1", path.to_str().unwrap(), "--entry", "0,0"]).code, 2);
    assert_eq!(run(&["fit", "rank1", path.to_str().unwrap(), "--entry", "99,0,0"]).code, 2);
}

#[test]
fn fit_regression_from_dataset() {
    let dir = TempDir::new().unwrap();
    let path = dataset(&dir);
    let doc = json(&run(&["fit", "regression", path.to_str().unwrap(), "--r", "2", "--holdout", "100"]));
    assert_valid("fit.schema.json", &doc);
    assert_eq!(doc["config"]["n"], 400);
    assert_eq!(doc["config"]["holdout"], 100);
    let s = doc["sigma_hat"].as_f64().unwrap();
    assert!((0.35..0.7).contains(&s), "sigma_hat {s}");
    assert_eq!(run(&["fit", "regression", path.to_str().unwrap(), "--r", "2", "--holdout", "400"]).code, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tensorinf");
    let o = Command::new(bin).args(["sim", "pca-normal"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage:"));
    let o = Command::new(bin).args(["sim", "pca-normal", "--p", "6", "--r", "1", "--reps", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["summary"].is_object());
}

#[test]
fn schemas_reject_malformed_reports() {
    let doc = json(&run(&["sim", "pca-normal", "--p", "6", "--r", "1", "--reps", "2"]));
    let v = schema("sim.schema.json");
    assert!(v.is_valid(&doc));
    let mut missing = doc.clone();
    missing.as_object_mut().unwrap().remove("summary");
    assert!(!v.is_valid(&missing));
    let mut bad_ks = doc.clone();
    bad_ks["summary"]["ks"] = serde_json::json!(1.5);
    assert!(!v.is_valid(&bad_ks));
    let mut extra = doc;
    extra["config"]["surprise"] = serde_json::json!(true);
    assert!(!v.is_valid(&extra));
}
