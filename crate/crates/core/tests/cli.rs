use std::path::Path;
use std::process::{Command, Output};

fn hamrec(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamrec"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HAMREC_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_names_every_bundled_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hamrec(&["list"], tmp.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for name in hamrec::scenario::bundled_names() {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn describe_mentions_the_optimized_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hamrec(&["describe", "tq_xy_0_pi_detuned"], tmp.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("IZ ZI"), "{}", stdout(&o));
}

#[test]
fn validate_accepts_bundled_and_rejects_unknown() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = hamrec(&["validate", "sq_two_axis"], tmp.path());
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("sq_two_axis: ok"));
    let missing = hamrec(&["validate", "no_such_scenario"], tmp.path());
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn single_initial_state_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = hamrec::scenario::bundled("sq_pi_flat_top").unwrap();
    s.reconstruction.initial_states = vec!["+X".into()];
    let path = tmp.path().join("one_state.toml");
    std::fs::write(&path, s.to_toml()).unwrap();
    let o = hamrec(&["validate", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("S >= 2"), "{}", stderr(&o));
    let run = hamrec(&["run", path.to_str().unwrap()], tmp.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_field_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let text = hamrec::scenario::bundled("sq_pi_flat_top").unwrap().to_toml() + "\nbogus = 1\n";
    let path = tmp.path().join("bogus.toml");
    std::fs::write(&path, text).unwrap();
    let o = hamrec(&["validate", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn run_writes_artifacts_and_reruns_from_its_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hamrec(&["run", "sq_pi_flat_top", "--out", "a", "--seed", "5", "--shots", "200"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("a/sq_pi_flat_top_seed5");
    for f in hamrec::scenario::ARTIFACTS {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let manifest = dir.join("manifest.json");
    let again = hamrec(&["run", manifest.to_str().unwrap(), "--out", "b"], tmp.path());
    assert!(again.status.success(), "{}", stderr(&again));
    for f in hamrec::scenario::ARTIFACTS {
        let a = std::fs::read(dir.join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b/sq_pi_flat_top_seed5").join(f)).unwrap();
        assert!(a == b, "{f} differs between run and manifest re-run");
    }
}

#[test]
fn noiseless_flag_and_default_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hamrec(&["run", "sq_two_axis", "--noiseless"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(tmp.path().join("out/sq_two_axis_seed1/manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["scenario"]["noiseless"], true);
    assert_eq!(v["resolved"]["shots_simulated"], 1);
}
