use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = "\
# small settings for a fast end-to-end run
seed = 7
preset = tiny
max_len = 64
vocab_size = 200
steps = 5
batch_size = 4
accumulation_steps = 1
learning_rate = 0.001
";

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        fs::write(ws.path("run.conf"), CONFIG).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn tempo(&self, args: &[&str]) -> Output {
        self.tempo_env(args, None)
    }

    fn tempo_env(&self, args: &[&str], seed: Option<&str>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tempo"));
        cmd.current_dir(self.dir.path()).env_remove("TEMPO_SEED").args(["--config", "run.conf"]).args(args);
        if let Some(s) = seed {
            cmd.env("TEMPO_SEED", s);
        }
        cmd.output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.tempo(args);
        assert!(
            out.status.success(),
            "tempo {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn lines(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}

const THREE_RECORDS: &str = r#"{"id":"a","timestamp":"1995-03-02","text":"On March 2, 1995, the council met before the vote."}
{"id":"b","timestamp":"1995-04-10","text":"The strike began in April 1995 and ended after two weeks."}
{"id":"c","timestamp":"1996-01-05","text":"During 1995 prices rose; in January 1996 they fell."}
"#;

#[test]
fn annotate_writes_one_record_per_input() {
    let ws = Workspace::new();
    fs::write(ws.path("in.jsonl"), THREE_RECORDS).unwrap();
    ws.ok(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl"]);
    let text = ws.read("ann.jsonl");
    assert_eq!(lines(&text), 3);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["id"], "a");
    let manifest = ws.json("ann.jsonl.manifest.json");
    assert_eq!(manifest["stage"], "annotate");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"][0]["path"], "ann.jsonl");
}

#[test]
fn missing_timestamp_is_a_line_numbered_error() {
    let ws = Workspace::new();
    let bad = THREE_RECORDS.replacen(r#""timestamp":"1995-04-10","#, "", 1);
    fs::write(ws.path("in.jsonl"), bad).unwrap();
    let out = ws.tempo(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(!ws.path("ann.jsonl").exists());

    ws.ok(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl", "--skip-bad"]);
    assert_eq!(lines(&ws.read("ann.jsonl")), 2);
}

#[test]
fn rerun_is_a_no_op_with_identical_checksums() {
    let ws = Workspace::new();
    fs::write(ws.path("in.jsonl"), THREE_RECORDS).unwrap();
    ws.ok(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl"]);
    let first = ws.json("ann.jsonl.manifest.json");
    let again = ws.ok(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl"]);
    assert!(stderr(&again).contains("up to date"));
    assert_eq!(ws.json("ann.jsonl.manifest.json"), first);

    ws.ok(&["annotate", "--in", "in.jsonl", "--out", "ann.jsonl", "--force"]);
    let forced = ws.json("ann.jsonl.manifest.json");
    assert_eq!(forced["outputs"], first["outputs"]);
}

#[test]
fn missing_upstream_artifact_names_the_stage() {
    let ws = Workspace::new();
    let out = ws.tempo(&["refine"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("stage refine") && msg.contains("annotated.jsonl"), "{msg}");
}

#[test]
fn invalid_rates_fail_validation() {
    let ws = Workspace::new();
    fs::write(ws.path("bad.conf"), "total_rate = 1.5\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tempo"))
        .current_dir(ws.dir.path())
        .args(["--config", "bad.conf", "baseline", "--classes", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("total_rate"));
}

#[test]
fn baseline_prints_random_guess_metrics() {
    let ws = Workspace::new();
    let out = ws.ok(&["baseline", "--classes", "21", "--per-class", "50"]);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let acc: f64 = text.lines().find(|l| l.starts_with("ACC")).unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!((acc - 4.76).abs() < 0.3, "{text}");
}

/// Synthetic corpus through annotate, refine, calendar and vocab.
fn prepare(ws: &Workspace, jobs: &str) {
    ws.ok(&["synth", "--kind", "corpus", "--n", "60", "--out", "corpus.jsonl"]);
    ws.ok(&["annotate", "--in", "corpus.jsonl", "--jobs", jobs]);
    ws.ok(&["refine"]);
    ws.ok(&["calendar"]);
    ws.ok(&["vocab"]);
}

#[test]
fn examples_are_deterministic_across_runs_and_jobs() {
    let ws = Workspace::new();
    prepare(&ws, "1");
    let annotated = ws.read("annotated.jsonl");
    ws.ok(&["--force", "annotate", "--in", "corpus.jsonl", "--jobs", "4"]);
    assert_eq!(ws.read("annotated.jsonl"), annotated);

    let args = ["examples", "--objectives", "etamlm,dd,tser", "--seed", "7"];
    ws.ok(&[&args[..], &["--out", "ex1.jsonl"]].concat());
    ws.ok(&[&args[..], &["--out", "ex2.jsonl", "--jobs", "4"]].concat());
    assert_eq!(ws.read("ex1.jsonl"), ws.read("ex2.jsonl"));
    assert_eq!(lines(&ws.read("ex1.jsonl")), lines(&ws.read("refined.jsonl")));

    let env = ws.tempo_env(&["examples", "--objectives", "etamlm,dd,tser", "--out", "ex3.jsonl"], Some("99"));
    assert!(env.status.success());
    assert_ne!(ws.read("ex3.jsonl"), ws.read("ex1.jsonl"));
    let env = ws.tempo_env(&["examples", "--objectives", "etamlm,dd,tser", "--out", "ex4.jsonl"], Some("7"));
    assert!(env.status.success());
    assert_eq!(ws.read("ex4.jsonl"), ws.read("ex1.jsonl"));

    let empty = ws.tempo(&["examples", "--objectives", "", "--out", "ex5.jsonl"]);
    assert_eq!(empty.status.code(), Some(2));
}

/// Month-labelled dating task built from the synthetic corpus.
fn month_task(ws: &Workspace, name: &str, skip: usize, take: usize) {
    let records: Vec<Value> =
        ws.read("corpus.jsonl").lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let mut out = String::new();
    for r in records.iter().skip(skip).take(take) {
        let time = &r["timestamp"].as_str().unwrap()[..7];
        out.push_str(&serde_json::json!({"text": r["text"], "time": time}).to_string());
        out.push('\n');
    }
    fs::write(ws.path(name), out).unwrap();
}

#[test]
fn full_pipeline_produces_reports() {
    let ws = Workspace::new();
    prepare(&ws, "2");
    ws.ok(&["pretrain"]);
    let log = ws.read("pretrain_log.jsonl");
    let steps: Vec<u64> =
        log.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["step"].as_u64().unwrap()).collect();
    assert_eq!(steps, vec![0, 1, 2, 3, 4]);
    let ckpt = fs::read(ws.path("pretrained.ckpt")).unwrap();
    ws.ok(&["--force", "pretrain"]);
    assert_eq!(fs::read(ws.path("pretrained.ckpt")).unwrap(), ckpt);

    month_task(&ws, "train.jsonl", 0, 48);
    month_task(&ws, "val.jsonl", 48, 12);
    let ft = [
        "finetune", "--train", "train.jsonl", "--val", "val.jsonl", "--granularity", "month", "--grid", "desk",
        "--batch-sizes", "16", "--epochs", "1,2", "--runs", "2",
    ];
    ws.ok(&ft);
    assert!(ws.path("finetuned.ckpt").exists() && ws.path("finetuned.ckpt.run1").exists());
    let info = ws.json("finetuned.ckpt.task.json");
    assert_eq!(info["granularity"], "month");
    assert_eq!(info["classes"], 24);

    let out = ws.ok(&["eval", "--task", "document-dating", "--test", "val.jsonl", "--granularity", "month"]);
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(table.contains("ACC (%)") && table.contains("MAE"), "{table}");
    let report = ws.json("report.json");
    assert!(report["acc"].is_number() && report["mae"].is_number());
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert!(report["acc_std"].is_number());
    assert!(report["random_guess"]["acc"].is_number());

    let wrong = ws.tempo(&["eval", "--task", "document-dating", "--test", "val.jsonl", "--granularity", "year"]);
    assert_eq!(wrong.status.code(), Some(2));

    fs::write(ws.path("questions.jsonl"), "{\"text\":\"Who spoke about the strike in the harbor?\"}\n").unwrap();
    ws.ok(&["timescope", "--questions", "questions.jsonl"]);
    let scope: Value = serde_json::from_str(ws.read("timescope.jsonl").lines().next().unwrap()).unwrap();
    assert!(scope["start"].as_str().unwrap() <= scope["end"].as_str().unwrap());

    ws.ok(&["synth", "--kind", "leakage", "--n", "5", "--out", "events.jsonl"]);
    let out = ws.ok(&["similarity", "--events", "events.jsonl"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("MRR"));
    for line in ws.read("similarity.jsonl").lines() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["ranking"].as_array().unwrap().len(), 21);
    }

    ws.ok(&["synth", "--kind", "shift", "--out", "shift"]);
    ws.ok(&[
        "eval", "--task", "semantic-change", "--t1", "shift/t1.txt", "--t2", "shift/t2.txt", "--gold", "shift/gold.tsv",
        "--report", "shift_report.json",
    ]);
    let shift = ws.json("shift_report.json");
    assert_eq!(shift["words"].as_array().unwrap().len(), 3);
    assert!(shift["spearman"].is_number());
}

#[test]
fn timescope_requires_month_classifier() {
    let ws = Workspace::new();
    prepare(&ws, "1");
    ws.ok(&["pretrain"]);
    ws.ok(&["synth", "--kind", "leakage", "--n", "40", "--out", "leak.jsonl"]);
    ws.ok(&["finetune", "--train", "leak.jsonl", "--granularity", "year", "--grid", "desk", "--batch-sizes", "16", "--epochs", "1"]);
    fs::write(ws.path("q.jsonl"), "{\"text\":\"When?\"}\n").unwrap();
    let out = ws.tempo(&["timescope", "--questions", "q.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("month"));
}
