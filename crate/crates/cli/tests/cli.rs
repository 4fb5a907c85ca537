use std::process::{Command, Output};

fn msf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cohomology_text() {
    let o = msf(&["cohomology", "--preset", "3dN1", "--cutoff", "8"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("H^0\t(1,2,0,0,0,0,0,0,0)"), "{s}");
    assert!(s.contains("H^-1\t(0,0,0,2,1,0,0,0,0)"), "{s}");
}

#[test]
fn cohomology_json() {
    let o = msf(&["cohomology", "--preset", "qm1", "--cutoff", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["hilbert"]["0"], serde_json::json!([1, 1, 0, 0, 0, 0]));
    assert_eq!(v["complete_intersection_in_window"], true);
}

#[test]
fn chiral_array() {
    let o = msf(&["multiplet", "--preset", "4dN1", "--input", "4d-chiral-onshell", "--cutoff", "6", "--format", "text-array"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "[2 4 2 -; - 2 4 2]");
}

#[test]
fn recognize_vector_antifield() {
    let o = msf(&["recognize", "--preset", "4dN1", "--input", "4d-vector-antifield", "--cutoff", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("NOT underived-representable: degrees {-1,0}"));
}

#[test]
fn resolve_with_oracle() {
    let o = msf(&["resolve", "--preset", "3dN1", "--cutoff", "6", "--oracle"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("oracle: agrees"));
    assert!(s.contains("1\t0\t0\t3\t0"), "{s}");
}

#[test]
fn roundtrip_bundled_module() {
    let o = msf(&["roundtrip", "--input", "3d-H0", "--cutoff", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("roundtrip (a) passed"));
}

#[test]
fn out_file() {
    let dir = std::env::temp_dir().join(format!("msf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cat.txt");
    let o = msf(&["catalog", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().contains("4d-chiral-onshell"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(msf(&["cohomology", "--preset", "nope"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("msf-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"class": "weird", "algebra": "3dN1"}"#).unwrap();
    assert_eq!(msf(&["multiplet", "--input", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_3() {
    // H0 has fields up to weight 3, which a cutoff of 3 cannot trust
    let o = msf(&["roundtrip", "--input", "3d-H0", "--cutoff", "3"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
