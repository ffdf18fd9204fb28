#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use mpr_core::rng::rng_from_seed;
use mpr_core::{load_schema, AttributeSchema, JointDistribution};
use serde_json::Value;
use tempfile::TempDir;

pub const SCHEMA: &str = r#"{"attributes":[{"name":"gender","categories":["male","female"]},{"name":"age","categories":["young","old"]},{"name":"race","categories":["a","b","c"]}]}"#;

pub const GENERATED: [f64; 12] = [
    0.2, 0.1, 0.05, 0.05, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.1, 0.05,
];
pub const REFERENCE: [f64; 12] = [
    0.1, 0.1, 0.05, 0.05, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05, 0.1, 0.1,
];

pub fn schema() -> Arc<AttributeSchema> {
    Arc::new(load_schema(SCHEMA).unwrap())
}

pub fn distribution(probs: &[f64]) -> JointDistribution {
    let s = schema();
    let cells = s.joint_cells().unwrap();
    JointDistribution::new(s, cells.into_iter().zip(probs.iter().copied()).collect()).unwrap()
}

pub fn proportions_json(probs: &[f64]) -> String {
    let s = schema();
    let entries: Vec<String> = s
        .joint_cells()
        .unwrap()
        .iter()
        .zip(probs)
        .map(|(c, p)| format!("\"{}\":{p}", s.joint_key(c)))
        .collect();
    format!("{{{}}}", entries.join(","))
}

/// Draw `n` rows from `probs` and render them as a CSV table.
pub fn sample_csv(probs: &[f64], n: usize, seed: u64) -> String {
    let s = schema();
    let set = distribution(probs)
        .sample(n, &mut rng_from_seed(seed), "csv")
        .unwrap();
    let mut out = String::from("gender,age,race\n");
    for cell in set.cells() {
        let names: Vec<&str> = cell
            .iter()
            .enumerate()
            .map(|(a, &c)| s.attributes()[a].categories[c].as_str())
            .collect();
        out.push_str(&names.join(","));
        out.push('\n');
    }
    out
}

/// A scratch directory holding a schema, two sample files and proportions.
pub struct Fixture {
    pub dir: TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        let f = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("schema.json", SCHEMA);
        f.write("gen.csv", &sample_csv(&GENERATED, 300, 1));
        f.write("ref.csv", &sample_csv(&REFERENCE, 250, 2));
        f.write("props.json", &proportions_json(&REFERENCE));
        f
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    pub fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(&p, contents).unwrap();
        p
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn data_args(&self) -> Vec<String> {
        vec![
            "--schema".into(),
            self.arg("schema.json"),
            "--generated".into(),
            self.arg("gen.csv"),
            "--reference".into(),
            self.arg("ref.csv"),
        ]
    }
}

pub fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    run_env(args, &[])
}

pub fn run_env<S: AsRef<std::ffi::OsStr>>(args: &[S], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mpr"));
    cmd.args(args).env_remove("MPR_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run mpr")
}

/// Parse stdout of a successful run.
pub fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// The report with the wall-clock field removed, serialised back to bytes.
pub fn stable_bytes(out: &Output) -> Vec<u8> {
    let mut v = ok_json(out);
    v.as_object_mut().unwrap().remove("wall_clock_ms");
    serde_json::to_vec(&v).unwrap()
}
