//! Acceptance criterion 9: repeated runs with identical configuration
//! produce byte-identical outputs, including a round trip through the
//! emitted config echo.

use std::path::Path;
use std::process::Command;

fn run(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_stochgas"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn file_bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|_| panic!("{name} exists"))
}

fn report(pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE 9 [{verdict}] determinism: {detail}");
    assert!(pass, "criterion 9 failed: {detail}");
}

#[test]
fn acceptance_9_determinism() {
    let root = tempfile::tempdir().unwrap();
    let fields_args = [
        "fields", "--profile", "riemann-step", "--sigma1", "0.05", "--sigma2", "0.05", "--t", "1",
        "--x0", "-2", "--x1", "1", "--nx", "41",
    ];
    let mc_args = [
        "mc", "--seed", "42", "--n", "50000", "--bins", "50", "--bins-lo", "-2", "--bins-hi", "1",
        "--export-particles",
    ];

    let mut checked = Vec::new();
    let mut identical = true;

    // repeated runs, fresh directories
    for (name, args, files) in [
        ("fields", &fields_args[..], &["fields.csv", "fields_summary.json"][..]),
        ("mc", &mc_args[..], &["mc_bins.csv", "mc_compare.csv", "particles.csv", "mc_summary.json"][..]),
    ] {
        let a = root.path().join(format!("{name}_a"));
        let b = root.path().join(format!("{name}_b"));
        run(&a, args);
        run(&b, args);
        for file in files {
            let same = file_bytes(&a, file) == file_bytes(&b, file);
            identical &= same;
            checked.push(format!("{file}: {}", if same { "identical" } else { "DIFFERS" }));
        }

        // round trip through the emitted config echo
        let summary = if name == "fields" { "fields_summary.json" } else { "mc_summary.json" };
        let echo: serde_json::Value =
            serde_json::from_slice(&file_bytes(&a, summary)).expect("summary parses");
        let config_path = root.path().join(format!("{name}_config.json"));
        std::fs::write(&config_path, serde_json::to_string_pretty(&echo["config"]).unwrap())
            .unwrap();
        let c = root.path().join(format!("{name}_c"));
        run(&c, &[name, "--config", config_path.to_str().unwrap()]);
        for file in files {
            let same = file_bytes(&a, file) == file_bytes(&c, file);
            identical &= same;
            checked.push(format!("{file} (config round-trip): {}", if same { "identical" } else { "DIFFERS" }));
        }
    }

    report(identical, &checked.join("; "));
}
