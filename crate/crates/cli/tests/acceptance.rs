//! Acceptance criterion 10: identical command lines produce byte-identical
//! output files. Nothing in the pipeline is randomized, the propagators are
//! fixed-order deterministic algorithms, and floats are written in shortest
//! round-trip form, so reruns must agree to the byte.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_opgrowth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).expect("output file exists")
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "simulate.csv",
            vec![
                "simulate".into(),
                "--model".into(),
                "A".into(),
                "--definition".into(),
                "1".into(),
                "--v1".into(),
                "0.3".into(),
                "--v3".into(),
                "1.0".into(),
                "-n".into(),
                "60".into(),
                "--t-max".into(),
                "1.5".into(),
                "--points".into(),
                "40".into(),
            ],
        ),
        (
            "sweep.csv",
            vec![
                "sweep".into(),
                "--model".into(),
                "B".into(),
                "--definition".into(),
                "2".into(),
                "--v4".into(),
                "1.0".into(),
                "-n".into(),
                "40".into(),
                "--t-max".into(),
                "1.0".into(),
                "--points".into(),
                "12".into(),
                "--ratio-list".into(),
                "0.5,1.0,2.0,2.5".into(),
            ],
        ),
        (
            "spectrum.csv",
            vec![
                "spectrum".into(),
                "--model".into(),
                "A".into(),
                "--definition".into(),
                "1".into(),
                "--v1".into(),
                "0.5".into(),
                "--v3".into(),
                "1.0".into(),
                "--n-list".into(),
                "20,24,28,32".into(),
            ],
        ),
        (
            "compare.json",
            vec![
                "compare".into(),
                "--model".into(),
                "B".into(),
                "--definition".into(),
                "2".into(),
                "--v1".into(),
                "0.5".into(),
                "--v4".into(),
                "1.0".into(),
                "-n".into(),
                "80".into(),
                "--points".into(),
                "9".into(),
                // Wide tolerances: this case checks byte-identity, not accuracy.
                "--tol-mean".into(),
                "0.5".into(),
                "--tol-dist".into(),
                "0.5".into(),
            ],
        ),
        (
            "verify.json",
            vec!["verify".into(), "--max-spin-n".into(), "6".into()],
        ),
    ];

    for (file, args) in cases {
        let out_a = dir.path().join(format!("a_{file}"));
        let out_b = dir.path().join(format!("b_{file}"));
        for out in [&out_a, &out_b] {
            let mut argv: Vec<String> = args.clone();
            argv.push("--output".into());
            argv.push(out.to_string_lossy().into_owned());
            let argv_ref: Vec<&str> = argv.iter().map(String::as_str).collect();
            let output = run(&argv_ref);
            assert!(
                output.status.success(),
                "{file}: run failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
        }
        let bytes_a = read(&out_a);
        let bytes_b = read(&out_b);
        assert!(!bytes_a.is_empty());
        assert_eq!(bytes_a, bytes_b, "criterion 10 FAIL: {file} reruns differ");
        println!("criterion 10 ({file}): PASS — {} bytes identical", bytes_a.len());
    }
}
