//! Acceptance criterion 14: every CLI command with a fixed seed produces
//! byte-identical primary outputs across two runs (wallclock columns
//! excluded).

use std::path::{Path, PathBuf};
use std::process::Command;

fn hee() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hee"))
}

fn dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("hee_accept14_{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn assert_identical(a: &Path, b: &Path, what: &str) {
    let x = std::fs::read(a).unwrap();
    let y = std::fs::read(b).unwrap();
    assert_eq!(x, y, "{what}: outputs differ between identical runs");
}

/// Compare CSVs after dropping the named column (for wallclock fields).
fn assert_identical_excluding(a: &Path, b: &Path, drop_col: &str, what: &str) {
    let strip = |p: &Path| {
        let body = std::fs::read_to_string(p).unwrap();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        let keep: Vec<usize> = header
            .split(',')
            .enumerate()
            .filter(|(_, name)| *name != drop_col)
            .map(|(i, _)| i)
            .collect();
        let mut out = String::new();
        for line in std::iter::once(header).chain(lines) {
            let cells: Vec<&str> = line.split(',').collect();
            let kept: Vec<&str> = keep.iter().filter_map(|&i| cells.get(i).copied()).collect();
            out.push_str(&kept.join(","));
            out.push('\n');
        }
        out
    };
    assert_eq!(strip(a), strip(b), "{what}: non-wallclock columns differ");
}

#[test]
fn criterion_14_cli_reproducibility() {
    let d = dir();
    let cfg = d.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
  "version": 1,
  "spec": {"sizes": [2, 3, 3], "families": ["sigmoid", "sigmoid", "sigmoid"], "activation": "tanh"},
  "data": {"generator": "mog4", "n": 512, "seed": 7},
  "sampler": {"dt": 0.02, "tau_u": 0.2},
  "train": {"lr": 0.15, "lr_final": 0.05, "epochs": 2, "batch_size": 32, "inference_steps": 40, "eval_every": 8, "seed": 1}
}"#,
    )
    .unwrap();

    // two independent full runs of every command
    for run in ["r1", "r2"] {
        let model = d.join(format!("{run}_model.json"));
        let status = hee()
            .args(["train", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&model)
            .arg("--log")
            .arg(d.join(format!("{run}_log.csv")))
            .status()
            .unwrap();
        assert!(status.success(), "train failed on {run}");

        for (mode, extra) in [("ancestral", vec![]), ("joint", vec!["--thin", "10"]), ("marginal", vec!["--thin", "10"])] {
            let out = d.join(format!("{run}_{mode}.csv"));
            let status = hee()
                .args(["generate", "--mode", mode, "--n", "200", "--seed", "9", "--burn-in", "200"])
                .args(extra)
                .arg("--model")
                .arg(&model)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "generate {mode} failed on {run}");
        }

        let status = hee()
            .args(["analyze", "depthwidth", "--units", "8", "--depths", "1,2", "--trials", "3", "--seed", "5"])
            .arg("--out")
            .arg(d.join(format!("{run}_dw.csv")))
            .arg("--svg")
            .arg(d.join(format!("{run}_dw.svg")))
            .status()
            .unwrap();
        assert!(status.success(), "depthwidth failed on {run}");

        let status = hee()
            .args(["bench", "sampler", "--m", "0,4", "--seeds", "3", "--steps", "400"])
            .arg("--out")
            .arg(d.join(format!("{run}_bench.csv")))
            .status()
            .unwrap();
        assert!(status.success(), "bench failed on {run}");
    }

    assert_identical(&d.join("r1_model.json"), &d.join("r2_model.json"), "checkpoint");
    for mode in ["ancestral", "joint", "marginal"] {
        assert_identical(
            &d.join(format!("r1_{mode}.csv")),
            &d.join(format!("r2_{mode}.csv")),
            &format!("generate --mode {mode}"),
        );
    }
    assert_identical(&d.join("r1_dw.csv"), &d.join("r2_dw.csv"), "depthwidth CSV");
    assert_identical(&d.join("r1_dw.svg"), &d.join("r2_dw.svg"), "depthwidth SVG");
    assert_identical_excluding(
        &d.join("r1_log.csv"),
        &d.join("r2_log.csv"),
        "wallclock_s",
        "training log",
    );
    assert_identical_excluding(
        &d.join("r1_bench.csv"),
        &d.join("r2_bench.csv"),
        "wallclock_s",
        "bench CSV",
    );
    println!("[PASS] criterion 14: byte-identical primary outputs across two seeded runs of train/generate/analyze/bench");
}
