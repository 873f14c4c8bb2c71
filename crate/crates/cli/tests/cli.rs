use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tgforge_analysis::adf::{AblationRecord, EmbeddingRecord};
use tgforge_analysis::{write_dump, Component, Dump, DumpHeader, Pooling};

fn tgforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgforge"))
        .args(args)
        .env_remove("TGFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_spec(dir: &Path) -> String {
    let path = dir.join("spec.toml");
    fs::write(&path, "single_count = 20\nnested_count = 6\n").unwrap();
    path.display().to_string()
}

#[test]
fn transform_prints_input_and_output() {
    let o = tgforge(&[
        "transform", "--rule", "A", "--template", "p1.past",
        "--bind", "subj=teacher:sg", "--bind", "verb=grade", "--bind", "obj=exam:pl",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "The teacher graded the exams.\nThe exams were graded by the teacher.\n");
}

#[test]
fn compose_prints_every_step() {
    let o = tgforge(&[
        "compose", "--rules", "C+H", "--template", "p3.particle",
        "--bind", "subj=baker", "--bind", "verb=take", "--bind", "obj=muffin", "--bind", "adv=away",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last(), Some("Was the muffin taken away by the baker?"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(tgforge(&["transform", "--rule", "Q", "--template", "p1.past"]).status.code(), Some(2));
    assert_eq!(tgforge(&["--config", "/nonexistent.toml", "generate", "--out", "/tmp/x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    let o = tgforge(&["--config", bad.to_str().unwrap(), "generate", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let o = tgforge(&[
        "evaluate", "--gold", missing.to_str().unwrap(), "--pred", missing.to_str().unwrap(),
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = tgforge(&["--seed", seed, "generate", "--spec", &spec, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "3");
    let b = run("b", "3");
    let c = run("c", "4");
    for f in ["splits/train.jsonl", "single_np_passive_1.jsonl", "prompts/train.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(json(&a.join("run.json"))["outputs"], json(&b.join("run.json"))["outputs"]);
    assert_ne!(fs::read(a.join("splits/train.jsonl")).unwrap(), fs::read(c.join("splits/train.jsonl")).unwrap());
    let manifest = json(&a.join("run.json"));
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["config"]["seed"], 3);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let out = |name: &str| dir.path().join(name);
    let flag = tgforge(&["--seed", "8", "generate", "--spec", &spec, "--out", out("flag").to_str().unwrap()]);
    assert!(flag.status.success());
    let env = Command::new(env!("CARGO_BIN_EXE_tgforge"))
        .args(["generate", "--spec", &spec, "--out", out("env").to_str().unwrap()])
        .env("TGFORGE_SEED", "8")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(
        fs::read(out("flag").join("splits/val.jsonl")).unwrap(),
        fs::read(out("env").join("splits/val.jsonl")).unwrap()
    );
}

#[test]
fn evaluate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eval");
    let out = dir.path().join("eval");
    let o = tgforge(&[
        "evaluate",
        "--gold", fixtures.join("gold.jsonl").to_str().unwrap(),
        "--pred", fixtures.join("predictions.jsonl").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    let expected = json(&fixtures.join("expected.json"));
    let single = report["buckets"].as_array().unwrap().iter().find(|r| r["bucket"] == "Single").unwrap();
    assert_eq!(single["exact"], expected["buckets"]["Single"]["exact"]);
    assert!(fs::read_to_string(out.join("report.md")).unwrap().contains("| Setting | n | Exact match | Partial match |"));

    let summary = dir.path().join("summary");
    let o = tgforge(&["report", "--in", out.join("report.json").to_str().unwrap(), "--out", summary.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(summary.join("summary.md")).unwrap().contains("Single transformation"));
}

fn tiny_dump(path: &Path) {
    let mut dump = Dump::new(DumpHeader {
        model_id: "synthetic".into(),
        revision: "step2000".into(),
        d_model: 3,
        n_layers: 2,
        n_heads: 1,
        pooling: vec![Pooling::Mean],
        tokenizer_hash: String::new(),
    });
    for (rule, axis) in [('A', 0usize), ('H', 1)] {
        for i in 0..6 {
            let id = format!("{rule}-{i:05}");
            let base = vec![i as f64 * 0.125, 0.5, -0.25];
            let mut out = base.clone();
            out[axis] += 2.0 + i as f64 * 0.0625;
            for (role, v) in [("input", base), ("output", out)] {
                dump.embeddings.push(EmbeddingRecord {
                    sentence_id: format!("{id}/{role}"),
                    checkpoint: "step2000".into(),
                    layer: 2,
                    pooling: Pooling::Mean,
                    vec: v,
                });
            }
        }
    }
    dump.ablations.push(AblationRecord {
        sentence_id: "A-00000/input".into(),
        component: Component::Mlp { layer: 1 },
        p_clean: 0.75,
        p_ablated: 0.25,
        target_token: 3,
    });
    write_dump(&dump, path).unwrap();
}

#[test]
fn analyze_writes_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("d.adf");
    tiny_dump(&dump);
    for (kind, extra) in [("diff", vec![]), ("cluster", vec!["--k", "2"]), ("ablation", vec![])] {
        let out = dir.path().join(kind);
        let mut args = vec!["analyze", kind, "--in", dump.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(extra);
        let o = tgforge(&args);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&out.join(format!("{kind}.json")))["analysis"], kind);
        let manifest = json(&out.join("run.json"));
        assert!(manifest["inputs"].to_string().contains("d.adf"));
    }
    let cluster = json(&dir.path().join("cluster/cluster.json"));
    assert_eq!(cluster["adjusted_rand_index"], 1.0);
}
