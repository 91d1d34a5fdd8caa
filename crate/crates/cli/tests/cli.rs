use std::path::Path;
use std::process::{Command, Output};

fn weylscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylscope"))
        .args(args)
        .env("WEYLSCOPE_THREADS", "1")
        .output()
        .expect("spawn weylscope")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_torus(dir: &Path, name: &str, lmax: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["gen", "torus", "--dim", "2", "--side", "6.283185307179586", "--lmax", lmax, "-o", path(&out)];
    args.extend_from_slice(extra);
    let o = weylscope(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn count_matches_lattice_points() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "20", &[]);
    let out = dir.path().join("n.txt");
    let o = weylscope(&["count", "-i", path(&spec), "--grid", "1:3:1", "-o", path(&out)]);
    assert!(o.status.success());
    let rows = data_rows(&std::fs::read_to_string(&out).unwrap());
    // #{n ∈ Z² : |n| < λ} for λ = 1, 2, 3.
    assert_eq!(rows, vec![vec![1.0, 1.0], vec![2.0, 9.0], vec![3.0, 25.0]]);
}

#[test]
fn riesz_output_is_reproducible_and_headed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "40", &[]);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let o = weylscope(&["riesz", "-i", path(&spec), "--k", "2", "--grid", "5:30:0.5", "-o", path(out)]);
        assert!(o.status.success());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert!(ta.starts_with("# weylscope riesz k=2 grid=5:30:0.5"));
    assert_eq!(data_rows(&ta).len(), 51);
}

#[test]
fn query_past_the_bound_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "20", &[]);
    let o = weylscope(&["riesz", "-i", path(&spec), "--grid", "10:25:1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("completeness"), "{err}");
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1.0\nnot-a-number\n").unwrap();
    let o = weylscope(&["count", "-i", path(&bad), "--grid", "0:1:0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = weylscope(&["count", "-i", path(&bad), "--grid", "1:0:0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(weylscope(&["--help"]).status.code(), Some(0));
}

#[test]
fn plain_eigenvalue_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("ev.txt");
    std::fs::write(&f, "0\n2\n2\n6\n6\n6\n").unwrap();
    let o = weylscope(&["count", "-i", path(&f), "--eigenvalues", "--input-lmax", "3", "--grid", "1:3:1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows, vec![vec![1.0, 1.0], vec![2.0, 3.0], vec![3.0, 6.0]]);
}

#[test]
fn audit_flags_a_removed_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "100", &["--remove", "25"]);
    let report = dir.path().join("r.toml");
    let o = weylscope(&[
        "audit", "-i", path(&spec), "--coeffs", "torus", "--grid", "20:90:0.05", "-o", path(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("anomalies-found"), "{stdout}");
    assert!(stdout.contains("missing eigenvalue near 25."), "{stdout}");
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("sign = \"missing\""));
}

#[test]
fn sphere_gen_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.txt");
    let o = weylscope(&["gen", "sphere", "--dim", "2", "--lmax", "60", "-o", path(&spec)]);
    assert!(o.status.success());
    let o = weylscope(&["count", "-i", path(&spec), "--grid", "2:3:1"]);
    // √2 and √6 lie below 3; √12 does not.
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows, vec![vec![2.0, 4.0], vec![3.0, 9.0]]);
    let o = weylscope(&["audit", "-i", path(&spec), "--coeffs", "sphere", "--k", "2", "--grid", "10:50:0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn mollify_modes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "200", &[]);
    let o = weylscope(&[
        "mollify", "-i", path(&spec), "--kernel", "plateau", "--h", "0.01", "--scale", "1", "--grid", "50:50:1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    // The reach far exceeds λmax, so the point is reported as incomplete.
    assert_eq!(rows[0][2], 0.0);
    assert!((rows[0][1] - std::f64::consts::PI * 2500.0).abs() < 1e-2);

    let o = weylscope(&[
        "mollify", "-i", path(&spec), "--kernel", "nonneg", "--h", "0.01", "--scale", "16", "--mode", "gap",
        "--grid", "20:30:5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&String::from_utf8(o.stdout).unwrap()).len(), 3);
}

#[test]
fn wavetrace_peaks_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_torus(dir.path(), "t.txt", "100", &[]);
    let trace = dir.path().join("f.txt");
    let peaks = dir.path().join("p.txt");
    let o = weylscope(&[
        "wavetrace", "-i", path(&spec), "--center", "40", "--sigma", "10", "--tgrid", "1:15:0.01", "--peaks", "3",
        "-o", path(&trace), "--peaks-out", path(&peaks),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&std::fs::read_to_string(&trace).unwrap()).len(), 1401);
    assert_eq!(data_rows(&std::fs::read_to_string(&peaks).unwrap()).len(), 3);

    let o = weylscope(&["wavetrace", "-i", path(&spec), "--center", "95", "--sigma", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_export() {
    let o = weylscope(&["kernel", "--kernel", "plateau", "--h", "0.01", "--stride", "1000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("mass="));
    let rows = data_rows(&text);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 3.0 / (4.0 * std::f64::consts::PI)).abs() < 0.1);
}
