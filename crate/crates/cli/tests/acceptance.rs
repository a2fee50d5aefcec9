//! CLI half of the internal-consistency acceptance criterion: fixed-seed
//! invocations are byte-identical.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoii"))
}

#[test]
fn criterion_7_fixed_seed_runs_are_byte_identical() {
    let dir_a = std::env::temp_dir().join("aoii_accept_a");
    let dir_b = std::env::temp_dir().join("aoii_accept_b");
    for dir in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(dir);
        let status = bin()
            .args([
                "--mode",
                "compare",
                "--assumption",
                "a1",
                "--delay",
                "geometric:0.7",
                "--tmax",
                "5",
                "--p",
                "0.1,0.3",
                "--tau",
                "0,2,inf",
                "--runs",
                "15",
                "--epochs",
                "25000",
                "--seed",
                "5",
                "--out",
            ])
            .arg(dir)
            .status()
            .expect("binary runs");
        assert!(status.success(), "compare run failed");
    }
    let a = std::fs::read(dir_a.join("results.csv")).unwrap();
    let b = std::fs::read(dir_b.join("results.csv")).unwrap();
    assert_eq!(a, b, "fixed-seed CSV outputs differ");
    println!(
        "criterion 7 (byte-identical fixed-seed CLI runs): PASS ({} bytes)",
        a.len()
    );
}
