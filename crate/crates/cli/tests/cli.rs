use std::path::Path;
use std::process::{Command, Output};

fn tle(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tle")).args(args).current_dir(cwd).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_SAMPLE: &str = "experiment = sample\nn = 2\nhalf_width = 1.5\ndt = 0.1\nchains = 3\nsamples = 300\nthin = 5\nburn_in = 200\n";

#[test]
fn fs_reference_has_the_airy_origin_row() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.cfg", "experiment = fs-reference\noutput = out\n");
    let o = tle(&["run", "--config", "c.cfg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(text.starts_with("x,ai,ai_prime,fs_density,fs_cdf\n"));
    let row = text.lines().find(|l| l.starts_with("0,")).unwrap();
    let ai0: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((ai0 - 0.3550280539).abs() < 1e-10);
    assert!(dir.path().join("out/fs_density.csv").is_file());
    let r = tle(&["report", "out"], dir.path());
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("Ai(0) = 0.3550280539"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.cfg", SMALL_SAMPLE);
    for (threads, out) in [("1", "a"), ("3", "b"), ("1", "c")] {
        let o = tle(&["run", "--config", "c.cfg", "--threads", threads, "--output", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("results.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
    let o = tle(&["run", "--config", "c.cfg", "--seed", "2", "--output", "d"], dir.path());
    assert!(o.status.success());
    assert_ne!(read("a"), read("d"));
}

#[test]
fn resume_from_finished_checkpoints_reproduces_results() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.cfg", SMALL_SAMPLE);
    assert!(tle(&["run", "--config", "c.cfg", "--output", "a"], dir.path()).status.success());
    let first = std::fs::read(dir.path().join("a/results.csv")).unwrap();
    assert!(dir.path().join("a/checkpoints/sample-chain0.ckpt").is_file());
    assert!(tle(&["run", "--config", "c.cfg", "--output", "a", "--resume"], dir.path()).status.success());
    assert_eq!(std::fs::read(dir.path().join("a/results.csv")).unwrap(), first);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "lambda.cfg", "experiment = sample\nlambda = 0.5\n");
    let o = tle(&["run", "--config", "lambda.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda must exceed 1"));

    write(dir.path(), "key.cfg", "# comment\nexperiment = sample\ncolour = blue\n");
    let o = tle(&["run", "--config", "key.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3: field `colour`: unknown key"), "{}", stderr(&o));

    write(dir.path(), "value.cfg", "experiment = sample\nn = two\n");
    let o = tle(&["run", "--config", "value.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2: field `n`"));

    write(dir.path(), "kind.cfg", "experiment = nonsense\n");
    assert_eq!(tle(&["run", "--config", "kind.cfg"], dir.path()).status.code(), Some(2));
    write(dir.path(), "dup.cfg", "n = 2\nn = 3\n");
    assert!(stderr(&tle(&["run", "--config", "dup.cfg"], dir.path())).contains("duplicate key"));
    write(dir.path(), "eq.cfg", "n 2\n");
    assert_eq!(tle(&["run", "--config", "eq.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn canonical_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.cfg",
        "experiment = lower-tail\nmodel = fs\neps = 0.05, 0.1,0.3\ndt = 0.025\nburn_in = auto\nboundary = free\nlambda = 3.5\n",
    );
    let o = tle(&["config", "--config", "c.cfg"], dir.path());
    assert!(o.status.success());
    let canon = String::from_utf8(o.stdout).unwrap();
    assert!(canon.contains("eps = 0.05,0.1,0.3\n"));
    assert!(canon.contains("burn_in = auto\n"));
    write(dir.path(), "canon.cfg", &canon);
    let again = tle(&["config", "--config", "canon.cfg"], dir.path());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), canon);
}

#[test]
fn report_errors_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let o = tle(&["report", "empty"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("results.csv"));

    // a tolerance no fit can meet makes the report fail
    write(
        dir.path(),
        "c.cfg",
        "experiment = upper-tail\nmodel = fs\ntrials = 200000\nfit_min = 1\nfit_max = 2.5\ntolerance = 1e-9\noutput = tail\n",
    );
    assert!(tle(&["run", "--config", "c.cfg"], dir.path()).status.success());
    let r = tle(&["report", "tail"], dir.path());
    assert_eq!(r.status.code(), Some(4));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("target 0.9428") && text.contains("FAIL"), "{text}");
}

#[test]
fn small_runs_of_every_chain_experiment_complete() {
    let dir = tempfile::tempdir().unwrap();
    let base = "n = 2\nhalf_width = 1\ndt = 0.1\nchains = 2\nsamples = 200\nthin = 2\nburn_in = 100\n";
    let cases = [
        "experiment = confinement\nwindow = 0.5\n",
        "experiment = covariance\nlags = 1,2,4\n",
        "experiment = lower-tail\n",
        "experiment = scaling\n",
        "experiment = couple\nhalf_widths = 1,2\ntrials = 4\nresample_sweeps = 20\nu = 0.5\n",
        "experiment = free-vs-zero\nhalf_widths = 1,2\n",
        "experiment = pinned-exceedance\nks = 1,2\nvs = 0.5\ntrials = 100\n",
    ];
    for (i, c) in cases.iter().enumerate() {
        let out = format!("o{i}");
        write(dir.path(), "c.cfg", &format!("{base}{c}output = {out}\n"));
        let o = tle(&["run", "--config", "c.cfg"], dir.path());
        assert!(o.status.success(), "{c}: {}", stderr(&o));
        let r = tle(&["report", &out], dir.path());
        assert!(matches!(r.status.code(), Some(0) | Some(4)), "{c}: {}", stderr(&r));
    }
}
