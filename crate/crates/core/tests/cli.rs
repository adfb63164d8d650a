use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evosim"))
        .args(args)
        .env("EVOSIM_THREADS", "1")
        .output()
        .expect("spawn evosim")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

const SMALL: &str = "pop_size = 40\nrun_length = 250\nera_length = 50\ntournament_size = 8\nsample_interval = 10\nseed = 9\n";

#[test]
fn run_writes_timeseries_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = evosim(&["run", "--config", path(&cfg), "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = fs::read_to_string(a.join("run_timeseries.csv")).unwrap();
    let tb = fs::read_to_string(b.join("run_timeseries.csv")).unwrap();
    assert_eq!(ta, tb);
    assert!(ta.contains(
        "\nbirths,mean_fitness,mean_genome_length,mean_mutation_rate,mean_fitness_increase,sd_fitness,sd_genome_length,sd_mutation_rate\n"
    ));
    let rows = data_rows(&ta);
    assert_eq!(rows.len(), 26);
    assert!(rows[0].starts_with("0,"));
    assert!(rows[25].starts_with("250,"));

    let c = dir.path().join("c");
    let o = evosim(&[
        "run",
        "--config",
        path(&cfg),
        "--out",
        path(&c),
        "--seed",
        "10",
    ]);
    assert!(o.status.success());
    assert_ne!(
        fs::read_to_string(c.join("run_timeseries.csv")).unwrap(),
        ta
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = Command::new(env!("CARGO_BIN_EXE_evosim"))
            .args([
                "experiment",
                "8",
                "--scale",
                "0.0005",
                "--runs",
                "3",
                "--values",
                "5,7",
            ])
            .args(["--seed", "4", "--out", path(&out)])
            .env("EVOSIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        texts.push((
            fs::read_to_string(out.join("experiment8_sweep.csv")).unwrap(),
            fs::read_to_string(out.join("experiment8_runs.csv")).unwrap(),
        ));
    }
    assert_eq!(texts[0], texts[1]);
    let sweep = &texts[0].0;
    assert!(sweep.contains(
        "\nparam_value,mean_last_novel_birth,fraction_runs_nonzero_rate,mean_final_fitness,mean_final_mutation_rate\n"
    ));
    assert_eq!(data_rows(sweep).len(), 2);
    assert_eq!(data_rows(&texts[0].1).len(), 6);
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let o = evosim(&[
        "sweep",
        "--param",
        "era_length",
        "--values",
        "25,50",
        "--config",
        path(&cfg),
        "--runs",
        "2",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(dir.path().join("sweep_era_length_sweep.csv")).unwrap();
    let rows = data_rows(&sweep);
    assert!(rows[0].starts_with("25,") && rows[1].starts_with("50,"));

    let o = evosim(&["run", "--config", path(&cfg), "--out", path(dir.path())]);
    assert!(o.status.success());
    let svg = dir.path().join("plots/run.svg");
    let csv = dir.path().join("run_timeseries.csv");
    let o = evosim(&[
        "plot",
        "--csv",
        path(&csv),
        "--columns",
        "mean_fitness,mean_mutation_rate",
        "--out",
        path(&svg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("mean_mutation_rate"));

    let o = evosim(&[
        "plot",
        "--csv",
        path(&csv),
        "--columns",
        "nope",
        "--out",
        path(&svg),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = evosim(&["experiment", "9", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = evosim(&["experiment", "1", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "pop_size = 10\ntournament_size = 1\n").unwrap();
    let o = evosim(&["run", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = evosim(&[
        "sweep",
        "--param",
        "colour",
        "--values",
        "1",
        "--config",
        path(&cfg),
        "--runs",
        "1",
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("missing.cfg");
    let o = evosim(&["run", "--config", path(&missing)]);
    assert_eq!(o.status.code(), Some(1));
}
