//! Acceptance check for the batch front end: the full pipeline run twice
//! with the same seed must produce byte-identical outputs, effective-config
//! echoes included. Prints an `ACCEPTANCE <n>: PASS` line (run with
//! `--nocapture` to see it).

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

fn criterion<F: FnOnce() + UnwindSafe>(n: usize, label: &str, body: F) {
    match catch_unwind(body) {
        Ok(()) => println!("ACCEPTANCE {n} ({label}): PASS"),
        Err(cause) => {
            println!("ACCEPTANCE {n} ({label}): FAIL");
            resume_unwind(cause);
        }
    }
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("demandcast-acc-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn run_ok(args: &[&str]) {
    let output = Command::new(env!("CARGO_BIN_EXE_demandcast"))
        .args(args)
        .output()
        .expect("binary launches");
    assert!(
        output.status.success(),
        "command {:?} failed with {:?}:\n{}",
        args,
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Relative path -> bytes for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, files: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, files);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("under root")
                    .to_string_lossy()
                    .into_owned();
                files.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut files = BTreeMap::new();
    walk(dir, dir, &mut files);
    files
}

#[test]
fn acceptance_10_end_to_end_determinism() {
    criterion(10, "end-to-end determinism", || {
        let dir = workdir("determinism");
        let pipeline = |dir: &Path| {
            let p = |tail: &str| dir.join(tail).to_string_lossy().into_owned();
            run_ok(&["synth", "--seed", "11", "--out", &p("corpus")]);
            run_ok(&[
                "aggregate",
                "--events",
                &p("corpus/events.csv"),
                "--out",
                &p("weekly.csv"),
            ]);
            run_ok(&[
                "indices",
                "--weekly",
                &p("weekly.csv"),
                "--out",
                &p("indices.csv"),
            ]);
            run_ok(&[
                "fit-arima",
                "--weekly",
                &p("weekly.csv"),
                "--spec",
                "1,0,0:0,0,0:1",
                "--si-lags",
                "10",
                "--out",
                &p("model.json"),
            ]);
            run_ok(&[
                "forecast",
                "--model",
                &p("model.json"),
                "--weekly",
                &p("weekly.csv"),
                "--horizon",
                "20",
                "--out",
                &p("forecast.csv"),
            ]);
            run_ok(&[
                "evaluate",
                "--model",
                &p("model.json"),
                "--weekly",
                &p("weekly.csv"),
                "--horizon",
                "20",
                "--out",
                &p("evaluation.json"),
            ]);
        };

        pipeline(&dir);
        let first = snapshot(&dir);
        // Three corpus files plus five step outputs and six config echoes.
        assert!(
            first.len() >= 14,
            "expected a full output set, found {} files",
            first.len()
        );

        pipeline(&dir);
        let second = snapshot(&dir);

        assert_eq!(
            first.keys().collect::<Vec<_>>(),
            second.keys().collect::<Vec<_>>(),
            "reruns must produce the same file set"
        );
        for (name, bytes) in &first {
            assert!(
                bytes == &second[name],
                "file {name} changed between identical runs"
            );
        }
        let _ = std::fs::remove_dir_all(&dir);
    });
}
