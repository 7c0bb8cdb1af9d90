use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use biblatex::{Bibliography, ChunksExt};
use litreview::document::{latex_to_plain, validate_latex, BibEntry};
use litreview::pipeline::{resume, run_pipeline, PipelineConfig, RunManifest, Stage, StageStatus};

const COMPARED: [&str; 4] = ["review.tex", "review.bib", "topics.json", "metrics.jsonl"];

fn mock_in(dir: &Path, topic: &str) -> PipelineConfig {
    PipelineConfig { output_dir: dir.to_path_buf(), ..PipelineConfig::mock(topic) }
}

#[test]
fn two_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ca, cb) = (mock_in(a.path(), "Explainable Artificial Intelligence"), mock_in(b.path(), "Explainable Artificial Intelligence"));
    let ma = run_pipeline(&ca, None).unwrap();
    let mb = run_pipeline(&cb, None).unwrap();
    assert!(ma.is_complete() && mb.is_complete());
    assert_eq!(ma.run_id, mb.run_id);
    for name in COMPARED {
        let x = std::fs::read(ca.run_dir().join(name)).unwrap();
        let y = std::fs::read(cb.run_dir().join(name)).unwrap();
        assert!(!x.is_empty());
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn review_validates_and_bib_parses_back() {
    let out = tempfile::tempdir().unwrap();
    let cfg = mock_in(out.path(), "Blockchain");
    run_pipeline(&cfg, None).unwrap();
    let dir = cfg.run_dir();
    let tex = std::fs::read_to_string(dir.join("review.tex")).unwrap();
    let bib = std::fs::read_to_string(dir.join("review.bib")).unwrap();
    assert!(tex.contains("\\bibliography{review}"));

    let parsed = Bibliography::parse(&bib).unwrap();
    let keys: BTreeSet<String> = parsed.keys().map(str::to_string).collect();
    validate_latex(&tex, &keys).unwrap();

    let review: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("review.json")).unwrap()).unwrap();
    let ours: Vec<BibEntry> = serde_json::from_value(review["bibliography"].clone()).unwrap();
    assert_eq!(ours.len(), parsed.len());
    for e in &ours {
        let got = parsed.get(&e.key).unwrap_or_else(|| panic!("{} missing", e.key));
        let field = |name: &str| got.fields.get(name).map(|c| c.format_verbatim()).unwrap_or_default();
        assert_eq!(got.entry_type.to_string(), "article");
        assert_eq!(latex_to_plain(&field("title")), e.title);
        assert_eq!(latex_to_plain(&field("author")), e.authors.join(" and "));
        assert_eq!(field("year"), e.year);
        assert_eq!(field("eprint"), e.eprint);
        assert_eq!(field("url"), e.url);
    }
}

#[test]
fn resume_skips_done_stages_and_reruns_after_tampering() {
    let out = tempfile::tempdir().unwrap();
    let cfg = mock_in(out.path(), "Virtual Reality");
    let first = run_pipeline(&cfg, Some(Stage::Cluster)).unwrap();
    assert_eq!(first.record(Stage::Cluster).status, StageStatus::Done);
    assert_eq!(first.record(Stage::Summarize).status, StageStatus::Pending);

    let resumed = resume(out.path(), &first.run_id, None).unwrap();
    assert!(resumed.is_complete());
    // Untouched stages keep their original records.
    assert_eq!(resumed.record(Stage::Screen), first.record(Stage::Screen));
    let tex_before = std::fs::read(cfg.run_dir().join("review.tex")).unwrap();

    let topics = cfg.run_dir().join("topics.json");
    let mut text = std::fs::read_to_string(&topics).unwrap();
    text.push(' ');
    std::fs::write(&topics, text).unwrap();
    let mut m = RunManifest::load(&cfg.run_dir()).unwrap();
    assert_eq!(m.reset_from_first_invalid(&cfg.run_dir()), Some(Stage::Cluster));

    let again = resume(out.path(), &first.run_id, None).unwrap();
    assert!(again.is_complete());
    assert_eq!(again.record(Stage::Screen), first.record(Stage::Screen));
    assert_eq!(again.record(Stage::Cluster).files, resumed.record(Stage::Cluster).files);
    assert_eq!(std::fs::read(cfg.run_dir().join("review.tex")).unwrap(), tex_before);
}

#[test]
fn deleted_checkpoint_is_regenerated() {
    let out = tempfile::tempdir().unwrap();
    let cfg = mock_in(out.path(), "Large Language Models");
    let m = run_pipeline(&cfg, None).unwrap();
    std::fs::remove_file(cfg.run_dir().join("summaries.jsonl")).unwrap();
    let again = resume(out.path(), &m.run_id, None).unwrap();
    assert!(again.is_complete());
    assert!(cfg.run_dir().join("summaries.jsonl").exists());
    assert_eq!(again.record(Stage::Cluster), m.record(Stage::Cluster));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_litreview")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let ok = cli(&["run", "--topic", "Neural Machine Translation", "--mock", "--out", o]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    let run_id = stdout.lines().next().unwrap().trim_start_matches("run ").to_string();

    assert_eq!(cli(&["eval", "--run", &run_id, "--out", o]).status.code(), Some(0));
    assert_eq!(cli(&["resume", &run_id, "--out", o]).status.code(), Some(0));

    // validation failures
    assert_eq!(cli(&["run", "--topic", "", "--mock", "--out", o]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--topic", "X", "--mock", "--top-k", "0", "--out", o]).status.code(), Some(1));
    assert_eq!(cli(&["resume", "no-such-run", "--out", o]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--topic", "X", "--mock", "--until", "bogus", "--out", o]).status.code(), Some(1));

    // a stage failure: one paper cannot be clustered into topics
    let failed = cli(&["run", "--topic", "X", "--mock", "--top-k", "1", "--out", o]);
    assert_eq!(failed.status.code(), Some(2), "{}", String::from_utf8_lossy(&failed.stderr));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("stage cluster failed"));

    // a tampered checkpoint is regenerated rather than trusted
    std::fs::write(out.path().join(&run_id).join("retrieved.jsonl"), "{not json").unwrap();
    assert_eq!(cli(&["resume", &run_id, "--out", o]).status.code(), Some(0));
}
