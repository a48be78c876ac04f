use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
[grid]
size = 16

[data]
seed = 5
coils = 2
mask_turns = 4

[model]
order = ORDER

[solver]
tau_v = 0.25
tau_q = 11.0
delta = 0.08333333333333333
iterations = 20
log_every = 5
"#;

fn sphcoil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphcoil")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn small(dir: &Path, name: &str, order: usize) -> PathBuf {
    write_config(dir, name, &SMALL.replace("ORDER", &order.to_string()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn missing_config_is_a_config_error() {
    let out = sphcoil(&["run", "--config", "/definitely/not/here.toml"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[grid]\nsize = 16\nspacing = 3\n");
    assert_eq!(code(&sphcoil(&["run", "--config", s(&cfg)])), 3);
}

#[test]
fn invalid_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "c.toml", 2);
    assert_eq!(code(&sphcoil(&["run", "--config", s(&cfg), "--iters", "0"])), 3);
}

#[test]
fn diverging_solver_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("ORDER", "2").replace("tau_v = 0.25", "tau_v = 1e300");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out_dir = dir.path().join("out");
    let out = sphcoil(&["run", "--config", s(&cfg), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "c.toml", 2);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = sphcoil(&["run", "--config", s(&cfg), "--out", s(&blocker.join("sub"))]);
    assert_eq!(code(&out), 5);
}

#[test]
fn missing_phantom_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("ORDER", "2")
        .replace("[data]", "[data]\nphantom_file = \"absent.png\"");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = sphcoil(&["run", "--config", s(&cfg), "--out", s(&dir.path().join("out"))]);
    assert_eq!(code(&out), 5);
}

#[test]
fn run_writes_coefficient_tables_for_each_order() {
    let dir = tempfile::tempdir().unwrap();
    for (order, per_coil) in [(2usize, 9usize), (5, 36)] {
        let cfg = small(dir.path(), &format!("o{order}.toml"), order);
        let out_dir = dir.path().join(format!("out{order}"));
        let out = sphcoil(&["run", "--config", s(&cfg), "--out", s(&out_dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let table = fs::read_to_string(out_dir.join("coefficients.csv")).unwrap();
        let cells: usize = table
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(2).filter(|c| !c.is_empty()).count())
            .sum();
        assert_eq!(cells, 2 * per_coil);
        assert_eq!(table.lines().count(), 1 + 2 * (order + 1));
        for name in [
            "reconstruction.cimg",
            "reconstruction.png",
            "coils/coil_02.png",
            "history.csv",
            "manifest.toml",
        ] {
            assert!(out_dir.join(name).is_file(), "missing {name}");
        }
    }
}

#[test]
fn overrides_are_echoed_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "c.toml", 1);
    let out_dir = dir.path().join("out");
    let out = sphcoil(&[
        "run",
        "--config",
        s(&cfg),
        "--out",
        s(&out_dir),
        "--seed",
        "77",
        "--iters",
        "7",
    ]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(out_dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 77"));
    assert!(manifest.contains("iterations = 7"));
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("reconstruction,proposed,1,7,"));

    // the manifest alone reproduces the run
    let again = dir.path().join("again");
    let out = sphcoil(&["run", "--config", s(&out_dir.join("manifest.toml")), "--out", s(&again)]);
    assert!(out.status.success());
    for name in ["metrics.csv", "coefficients.csv", "history.csv"] {
        assert_eq!(
            fs::read(out_dir.join(name)).unwrap(),
            fs::read(again.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "c.toml", 2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sphcoil(&["run", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(sphcoil(&["run", "--config", s(&cfg), "--out", s(&b)]).status.success());
    for name in [
        "metrics.csv",
        "coefficients.csv",
        "true_coefficients.csv",
        "history.csv",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn basis_writes_one_image_per_function() {
    let dir = tempfile::tempdir().unwrap();
    for (order, count) in [(0usize, 1usize), (2, 9)] {
        let cfg = small(dir.path(), &format!("b{order}.toml"), order);
        let out_dir = dir.path().join(format!("basis{order}"));
        let out = sphcoil(&["basis", "--config", s(&cfg), "--out", s(&out_dir)]);
        assert!(out.status.success());
        assert_eq!(fs::read_dir(out_dir.join("basis")).unwrap().count(), count);
        assert!(out_dir.join("basis_montage.png").is_file());
    }
}

#[test]
fn compare_tabulates_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let low = small(dir.path(), "low.toml", 2);
    let high = small(dir.path(), "high.toml", 5);
    let base = write_config(
        dir.path(),
        "base.toml",
        &SMALL
            .replace("ORDER", "2")
            .replace("[model]", "[model]\nkind = \"baseline\""),
    );
    let out_dir = dir.path().join("cmp");
    let out = sphcoil(&[
        "compare",
        "--config",
        s(&low),
        "--config",
        s(&high),
        "--config",
        s(&base),
        "--out",
        s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], "config,model,order,iterations,psnr_db,ssim");
    assert!(rows[1].starts_with("low,proposed,2,20,"));
    assert!(rows[2].starts_with("high,proposed,5,20,"));
    assert!(rows[3].starts_with("base,baseline,,20,"));

    let single = dir.path().join("single");
    assert!(sphcoil(&["compare", "--config", s(&low), "--out", s(&single)])
        .status
        .success());
    assert_eq!(
        fs::read_to_string(single.join("comparison.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn compare_rejects_mismatched_grids() {
    let dir = tempfile::tempdir().unwrap();
    let a = small(dir.path(), "a.toml", 2);
    let b = write_config(
        dir.path(),
        "b.toml",
        &SMALL.replace("ORDER", "2").replace("size = 16", "size = 20"),
    );
    let out = sphcoil(&[
        "compare",
        "--config",
        s(&a),
        "--config",
        s(&b),
        "--out",
        s(&dir.path().join("cmp")),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn run_takes_a_single_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = small(dir.path(), "a.toml", 2);
    assert_eq!(code(&sphcoil(&["run", "--config", s(&a), "--config", s(&a)])), 3);
}
