use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const SMALL_FIG2: &str = "\
# small Fig. 2 run
sites = 4
g_max = 0.4
g_step = 0.2
fidelities = 0.6, 0.9
noise = 0.0, 0.3
trials = 2
seed = 7
";

fn qcm(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcm"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("fig2.conf");
    std::fs::write(&path, SMALL_FIG2).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fig2_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempdir().unwrap();
    let conf = write_config(dir.path());
    let a = qcm(&["fig2", "--config", &conf], &[]);
    let b = qcm(&["fig2", "--config", &conf], &[("RAYON_NUM_THREADS", "1")]);
    let c = qcm(&["fig2", "--config", &conf], &[("RAYON_NUM_THREADS", "3")]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let other_seed = qcm(&["fig2", "--config", &conf, "--seed", "8"], &[]);
    assert_ne!(a.stdout, other_seed.stdout);
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let dir = tempdir().unwrap();
    let conf = write_config(dir.path());
    let csv_path = dir.path().join("out.csv");
    let json_path = dir.path().join("out.json");
    assert!(qcm(&["fig2", "--config", &conf, "--out", csv_path.to_str().unwrap()], &[]).status.success());
    assert!(qcm(&["fig2", "--config", &conf, "--format", "json", "--out", json_path.to_str().unwrap()], &[]).status.success());

    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(!text.contains('\r'));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["g", "F_target", "F_achieved", "p", "trial_index", "M_exact", "M_direct", "M_L4", "status"]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows = json.as_array().unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // 3 g values x 2 fidelities x 2 noise levels x 2 trials
    assert_eq!(records.len(), 24);
    assert_eq!(rows.len(), records.len());
    for (rec, obj) in records.iter().zip(rows) {
        for (key, cell) in header.iter().zip(rec.iter()) {
            let v = &obj[key];
            match (cell.parse::<f64>(), v) {
                _ if cell.is_empty() => assert!(v.is_null(), "{key}"),
                (Ok(x), serde_json::Value::Number(n)) => assert_eq!(n.as_f64().unwrap(), x, "{key}"),
                (_, serde_json::Value::String(s)) => assert_eq!(s, cell),
                other => panic!("{key}: {other:?}"),
            }
        }
    }
}

#[test]
fn exit_codes() {
    let ok = qcm(&["census", "--rows", "2", "--cols", "2", "--corr-j", "3"], &[]);
    assert_eq!(ok.status.code(), Some(0));
    let table = String::from_utf8(ok.stdout).unwrap();
    assert!(table.starts_with("convention"));
    assert!(table.contains("union+I"));

    let bad_value = qcm(&["fig2", "--noise-mode", "sideways"], &[]);
    assert_eq!(bad_value.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_value.stderr).starts_with("error:"));

    let dir = tempdir().unwrap();
    let bad_key = dir.path().join("bad.conf");
    std::fs::write(&bad_key, "colour = blue\n").unwrap();
    assert_eq!(qcm(&["fig1", "--config", bad_key.to_str().unwrap()], &[]).status.code(), Some(2));

    let missing = dir.path().join("nope.conf");
    assert_eq!(qcm(&["fig1", "--config", missing.to_str().unwrap()], &[]).status.code(), Some(1));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let out = qcm(&["census", "--rows", "2", "--cols", "2", "--corr-j", "3", "--out", unwritable.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_then_import_round_trips() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("h.txt");
    let out = qcm(&["export", "--model", "staggered", "--sites", "4", "--out", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    let exported = std::fs::read_to_string(&path).unwrap();
    let imported = qcm(&["import", path.to_str().unwrap()], &[]);
    assert!(imported.status.success());
    assert_eq!(String::from_utf8(imported.stdout).unwrap(), exported);

    let bound = qcm(&["import", path.to_str().unwrap(), "--bind", "g=0"], &[]);
    let text = String::from_utf8(bound.stdout).unwrap();
    assert!(!text.contains('g'), "{text}");
}

#[test]
fn small_fig1_run() {
    let out = qcm(&["fig1", "--rows", "2", "--cols", "2", "--corr-j", "3", "--x-min", "-0.5", "--x-max", "0.5", "--x-step", "0.5"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,trial_label,E_exact,E_direct,E_L4,C_exact,C_direct,C_L4,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("0,x=0,"));
}
