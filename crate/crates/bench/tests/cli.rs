use std::process::Command;

fn maqd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maqd"))
}

const TINY: &str = "[code]\nz = 4\nrate = \"2/3\"\n[decoder]\nmax_iter = 3\n[design]\nebn0 = 3.0\nframes = 64\ninits = 2\n";

#[test]
fn design_inspect_and_fer_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let design = dir.path().join("d.txt");
    let st = maqd()
        .env("MAQD_WORKERS", "2")
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "design",
            "-o",
            design.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(st.success());
    let out = maqd()
        .args(["inspect", design.to_str().unwrap(), "--boundaries"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().next(), Some("iteration,region,b1"));
    // 13 rows per iteration, minus regions that were never used
    let rows = table.lines().skip(1).count();
    assert!(rows > 2 * 13 && rows <= 3 * 13, "{rows}");
    let out = maqd()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "fer",
            "-d",
            design.to_str().unwrap(),
        ])
        .args(["--ebn0", "3.0", "--max-frames", "64", "--noiseless"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("ebn0_db,frames,frame_errors,"));
    assert!(csv.lines().nth(1).unwrap().starts_with("3.0,64,0,0,"));
}

#[test]
fn validation_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[decoder]\nmsg_width = 6\n").unwrap();
    let st = maqd()
        .args(["--config", bad.to_str().unwrap(), "design"])
        .status()
        .unwrap();
    assert!(!st.success());
    let garbage = dir.path().join("g.txt");
    std::fs::write(&garbage, "not a design\n").unwrap();
    assert!(!maqd()
        .args(["inspect", garbage.to_str().unwrap()])
        .status()
        .unwrap()
        .success());
    assert!(!maqd()
        .env("MAQD_WORKERS", "zero")
        .args(["inspect", garbage.to_str().unwrap()])
        .status()
        .unwrap()
        .success());
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, TINY).unwrap();
    // a design for z = 4 used with z = 8
    let design = dir.path().join("d.txt");
    assert!(maqd()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "design",
            "-o",
            design.to_str().unwrap()
        ])
        .status()
        .unwrap()
        .success());
    let st = maqd()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--z",
            "8",
            "fer",
            "-d",
            design.to_str().unwrap(),
            "--max-frames",
            "10",
        ])
        .status()
        .unwrap();
    assert!(!st.success());
}
