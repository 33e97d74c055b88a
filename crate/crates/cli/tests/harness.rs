use std::fs;
use std::path::Path;
use std::process::Command;

use lclt_harness::{run, write_outputs, Artifacts, Kind, Manifest};
use serde_json::Value;

fn lclt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lclt")).args(args).output().unwrap()
}

fn results(dir: &Path) -> String {
    fs::read_to_string(dir.join("results.csv")).unwrap()
}

fn with_workers(text: &str, out: &Path, workers: usize) -> Manifest {
    let mut m = Manifest::parse(text).unwrap();
    m.out = Some(out.join(format!("w{workers}")));
    m.workers = Some(workers);
    m
}

#[test]
fn results_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifests = [
        "kind = \"pmf\"\nn = 20\np = 0.3\nsamples = 40000\nseed = 5\n",
        "kind = \"charfn\"\nn = 60\np = 0.3\nsamples = 3000\nseed = 5\npoints = 6\n",
        "kind = \"decoupling\"\nn = 80\np = 0.3\nm = 40\ntrials = 20\nt = [0.5, 2.0]\nsamples = 1000\n",
        "kind = \"distances\"\nn = [12, 16]\np = 0.5\nsamples = 20000\n",
    ];
    for text in manifests {
        let outputs: Vec<String> = [1, 2, 5]
            .iter()
            .map(|&w| results(&run(with_workers(text, dir.path(), w)).unwrap()))
            .collect();
        assert_eq!(outputs[0], outputs[1], "{text}");
        assert_eq!(outputs[0], outputs[2], "{text}");
        assert!(outputs[0].lines().count() > 1);
    }
}

#[test]
fn small_pmf_comes_from_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lclt(&["pmf", "--n", "6", "--p", "0.3", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = String::from_utf8(o.stdout).unwrap();
    let path = Path::new(path.trim());
    assert!(path.file_name().unwrap().to_str().unwrap().starts_with("pmf_"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(path.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["source"], "exact-oracle");
    let csv = results(path);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",,exact-oracle")));
    let echo = Manifest::parse(&fs::read_to_string(path.join("manifest.echo")).unwrap()).unwrap();
    assert_eq!(echo.n, vec![6]);
    assert!(Path::new(out).join("cache/triangle_table_n6.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();
    let cfg = dir.path().join("g.toml");
    fs::write(&cfg, "kind = \"charfn\"\nn = 100\np = 0.3\ngamma = 0.2\n").unwrap();
    let o = lclt(&["charfn", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));

    // kind in the file disagrees with the subcommand
    assert_eq!(lclt(&["pmf", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    assert_eq!(lclt(&["pmf", "--n", "6", "--p", "1.5", "--out", out]).status.code(), Some(2));

    // single-vertex trials need p < 1/2
    let sv = dir.path().join("sv.toml");
    fs::write(&sv, "kind = \"decoupling\"\nmode = \"single-vertex\"\nn = 100\np = 0.7\ntrials = 5\n").unwrap();
    let o = lclt(&["decouple", "--config", sv.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    // no m with 4/p² < m < n/2
    assert_eq!(lclt(&["cover", "--n", "1000", "--p", "0.05", "--out", out]).status.code(), Some(3));

    let entries: Vec<_> = fs::read_dir(out).into_iter().flatten().map(|e| e.unwrap().file_name()).collect();
    assert!(entries.iter().all(|e| e == "cache"), "{entries:?}");
}

#[test]
fn failed_write_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = Manifest::new(Kind::CoverCheck);
    m.out = Some(dir.path().to_path_buf());
    let a = Artifacts {
        csv: "x\n".into(),
        summary: Value::Null,
        extra: vec![("missing/report.json".into(), "{}".into())],
    };
    assert!(write_outputs(&m, &a).is_err());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let ok = Artifacts { extra: Vec::new(), ..a };
    let dest = write_outputs(&m, &ok).unwrap();
    assert_eq!(results(&dest), "x\n");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn rerun_replaces_and_keys_differ_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = "kind = \"pmf\"\nn = 10\np = 0.4\nsamples = 10000\n";
    let first = run(with_workers(text, dir.path(), 1)).unwrap();
    let again = run(with_workers(text, dir.path(), 1)).unwrap();
    assert_eq!(first, again);
    let mut other = with_workers(text, dir.path(), 1);
    other.seed = 9;
    let moved = run(other).unwrap();
    assert_ne!(first, moved);
    assert_ne!(results(&first), results(&moved));
}

#[test]
fn verify_and_cover_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lclt(&["verify", "--out", out]);
    assert!(o.status.success());
    let path = String::from_utf8(o.stdout).unwrap();
    let csv = results(Path::new(path.trim()));
    assert_eq!(csv.lines().next().unwrap(), "check,cases,violations,max_excess,pass");
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")), "{csv}");

    let cfg = dir.path().join("cover.toml");
    fs::write(&cfg, "kind = \"cover-check\"\nn = 10000000\np = 0.49\ngamma = 0.05\n").unwrap();
    let o = lclt(&["cover", "--config", cfg.to_str().unwrap(), "--out", out]);
    let path = String::from_utf8(o.stdout).unwrap();
    let csv = results(Path::new(path.trim()));
    assert!(csv.lines().nth(1).unwrap().ends_with(",false,true,true"), "{csv}");
}
