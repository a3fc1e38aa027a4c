use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relgeneric::io::{read_dump, read_timeseries};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relgeneric"))
}

fn committed(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(experiment)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL_KFP: &str = "experiment = kfp
model.gamma = 0.5
potential.kind = harmonic
grid.nq = 16
grid.np = 16
grid.lq = 6
grid.pmax = 6
solver.t_final = 0.2
solver.record_every = 2
output.dump_every = 2
";

#[test]
fn verify_passes_with_committed_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &committed("verify.cfg"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("verify.txt")).unwrap();
    assert!(report.contains("0 failed"));
}

#[test]
fn kfp_outputs_are_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kfp.cfg", SMALL_KFP);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run("kfp", &cfg, out, &["--seed", "5"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(a.join("timeseries.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("timeseries.csv")).unwrap());
    let records = read_timeseries(&a.join("timeseries.csv")).unwrap();
    let dump = read_dump(&a.join("density_final.txt")).unwrap();
    assert_eq!((dump.nq, dump.np), (16, 16));
    let volume = (dump.lq / dump.nq as f64) * (2.0 * dump.pmax / dump.np as f64);
    let mass: f64 = dump.rho.iter().sum::<f64>() * volume;
    assert!((mass - records.last().unwrap().mass).abs() < 1e-14);
    assert!(a.join("density_00000.txt").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("theta.cfg", "experiment = kfp\nmodel.theta = -1\n", "model.theta"),
        ("unknown.cfg", "experiment = kfp\nmodel.tmperature = 1\n", "model.tmperature"),
        ("mismatch.cfg", "experiment = heat\n", "experiment"),
    ];
    for (name, text, needle) in cases {
        let cfg = write_config(dir.path(), name, text);
        let o = run("kfp", &cfg, dir.path(), &[]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle), "{name}");
    }
    let o = run("kfp", &dir.path().join("missing.cfg"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin().arg("nonsense").arg("--config").arg("x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_convergence_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "st.cfg",
        "experiment = stationary
model.variants = dh
grid.nq = 8
grid.np = 64
grid.lq = 6
grid.pmax = 34
solver.t_final = 0.05
solver.tolerance = 1e-6
init.kind = shifted-maxwellian
init.p0 = 1
",
    );
    let o = run("stationary", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no convergence"));
}

#[test]
fn heat_limit_study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lim.cfg",
        "experiment = limit-study\nlimit.system = heat\nlimit.speeds = 10,100\ngrid.n = 32\nsolver.t_final = 0.01\n",
    );
    let o = run("limit-study", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("limit.csv")).unwrap();
    assert!(csv.starts_with("c,deviation\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn heat_run_writes_series_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "heat.cfg",
        "experiment = heat\ngrid.n = 64\nsolver.t_final = 0.01\ninit.kind = bump\noutput.dump_every = 1\n",
    );
    let o = run("heat", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records = read_timeseries(&dir.path().join("timeseries.csv")).unwrap();
    assert!(records.iter().all(|r| r.rel_ent.is_none()));
    let dump = read_dump(&dir.path().join("density_final.txt")).unwrap();
    assert_eq!(dump.rho.len(), 64);
}
