use std::path::Path;
use std::process::{Command, Output};

fn pillai(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pillai"))
        .args(args)
        .current_dir(dir)
        .env_remove("PILLAI_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn enumerate_lists_the_five_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = pillai(dir.path(), &["enumerate", "--instance", "5,2,3,1,2", "--xmax", "3", "--ymax", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let pairs: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(' ').next().unwrap().to_string())
        .collect();
    assert_eq!(pairs, ["(0,0)", "(0,1)", "(1,0)", "(1,2)", "(3,6)"]);
}

#[test]
fn verify_theorem1_passes_and_names_a_corrupted_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = pillai(dir.path(), &["verify-theorem1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("9/9 rows verified"));

    let o = pillai(dir.path(), &["verify-theorem1", "--json"]);
    let rows: serde_json::Value = serde_json::from_str(stdout(&o).rsplit_once("\n9/9").unwrap().0).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 9);

    std::fs::write(
        dir.path().join("rows.txt"),
        "(3,2,1,1,2; 0,0,1,0,1,1,2,2)\n(3,2,7,1,2; 0,2,2,0,1,1,2,4)\n",
    )
    .unwrap();
    let o = pillai(dir.path(), &["verify-theorem1", "--fixtures", "rows.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn sharded_search_merges_to_the_single_run_and_certchecks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("desk.cfg"), "case=20b\nbase_max=24\nbound=1e6\n").unwrap();
    let o = pillai(d, &["search", "--config", "desk.cfg", "--out", "one.jsonl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut parts = vec![];
    for r in 0..4 {
        let name = format!("s{r}.jsonl");
        let o = pillai(d, &["search", "--config", "desk.cfg", "--shard", &format!("{r}/4"), "--out", &name]);
        assert_eq!(o.status.code(), Some(0));
        parts.push(name);
    }
    let mut args = vec!["merge", "--out", "merged.jsonl", "--in"];
    args.extend(parts.iter().map(String::as_str));
    assert_eq!(pillai(d, &args).status.code(), Some(0));
    let one = std::fs::read(d.join("one.jsonl")).unwrap();
    assert_eq!(one, std::fs::read(d.join("merged.jsonl")).unwrap());

    let o = pillai(d, &["certcheck", "--in", "merged.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 failed, 0 unresolved"));

    let manifest = std::fs::read_to_string(d.join("one.jsonl.manifest.jsonl")).unwrap();
    let m: serde_json::Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    use sha2::Digest;
    assert_eq!(m["digest"], hex::encode(sha2::Sha256::digest(&one)));
    assert_eq!(m["schema"], 1);
}

#[test]
fn errors_exit_one_with_distinct_messages() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = pillai(d, &["search", "--case", "20b", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--frobnicate"));

    std::fs::write(d.join("bad.cfg"), "case=20b\nbase_max=ten\n").unwrap();
    let o = pillai(d, &["search", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let args = ["search", "--case", "20b", "--base-max", "8", "--checkpoint", "cp.json"];
    assert_eq!(pillai(d, &args).status.code(), Some(0));
    let o = pillai(d, &["search", "--case", "20b", "--base-max", "9", "--checkpoint", "cp.json", "--resume"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("different configuration"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_pillai"))
        .args(["eliminate", "--instance", "5,2,3,1,2", "--method", "lattice"])
        .env("PILLAI_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("PILLAI_PRECISION"));
}

#[test]
fn missing_solutions_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = pillai(
        dir.path(),
        &["eliminate", "--instance", "(5,2,3,1,2; 0,0,0,1,1,0)", "--method", "exhaust", "--ymax", "8"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("further solution (1,2)"));
}

#[test]
fn eliminate_writes_a_checkable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = pillai(
        d,
        &["eliminate", "--instance", "(56744,1477,83810889,1478,56743; 0,1,1,0,3,4)", "--method", "bootstrap", "--anchor", "3,4", "--out", "c.jsonl"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(pillai(d, &["certcheck", "--in", "c.jsonl"]).status.code(), Some(0));
}
