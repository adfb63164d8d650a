//! Acceptance criteria for the simulator. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fail.
//!
//! `cargo test --test acceptance -- 3 5` runs only criteria 3 and 5.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use evosim::bits::BitString;
use evosim::engine::{evaluate_fitness, Target};
use evosim::experiments::{preset, run_experiment, ExperimentSpec, Outcome, SweepPoint};
use evosim::rng::{RandomSource, SimRng};
use evosim::{decode_mutation_rate, AggregateResult, Genome, RunResult, SimConfig, SimState};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

const MASTER_SEED: u64 = 0;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spec(id: u8, scale: f64, runs: usize) -> ExperimentSpec {
    preset(id)
        .and_then(|s| s.scaled(scale))
        .unwrap()
        .with_seed(MASTER_SEED)
        .with_runs(runs)
}

fn series(spec: &ExperimentSpec) -> (Vec<RunResult>, AggregateResult) {
    match run_experiment(spec).unwrap().outcome {
        Outcome::Series { runs, aggregate } => (runs, aggregate),
        Outcome::Sweep { .. } => panic!("{} is a sweep", spec.name()),
    }
}

fn sweep_points(spec: &ExperimentSpec) -> Vec<SweepPoint> {
    match run_experiment(spec).unwrap().outcome {
        Outcome::Sweep { points, .. } => points,
        Outcome::Series { .. } => panic!("{} is not a sweep", spec.name()),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Experiment 1 at full scale: fitness and genome length rise, the mutation
/// rate falls from 0.5, and fitness drops when the target changes.
fn baseline_trends() -> Verdict {
    let (_, agg) = series(&spec(1, 1.0, 100));
    let at = |b: usize| &agg.samples[b];
    let fit = |b| at(b).mean_fitness;
    let len = |b| at(b).mean_genome_length;
    let rate = |b| at(b).mean_mutation_rate;
    let drops = (1..10).filter(|k| fit(k * 100) < fit(k * 100 - 1)).count();
    let ok = fit(1000) > fit(200)
        && len(1000) > len(200)
        && len(1000) > 10.0
        && (rate(0) - 0.5).abs() <= 0.02
        && rate(1000) < rate(100)
        && drops >= 7;
    check(
        ok,
        format!(
            "fitness {:.4} -> {:.4}, length {:.4} -> {:.4}, rate(0) {:.4}, rate {:.4} -> {:.4}, drops at {drops}/9 era boundaries",
            fit(200),
            fit(1000),
            len(200),
            len(1000),
            rate(0),
            rate(100),
            rate(1000)
        ),
    )
}

/// Experiment 3 with a 10^6 cap: every run freezes with all rates zero.
fn static_target_freezes() -> Verdict {
    let s = spec(3, 0.1, 5);
    let (runs, agg) = series(&s);
    let cap = s.base_config.run_length;
    let times: Vec<String> = runs
        .iter()
        .map(|r| {
            r.last_novel_birth
                .map_or_else(|| format!(">{cap}"), |t| t.to_string())
        })
        .collect();
    let all_before_cap = runs
        .iter()
        .all(|r| r.last_novel_birth.is_some_and(|t| t < cap));
    let m = agg.mean_last_novel_birth;
    check(
        all_before_cap && (20_000.0..=600_000.0).contains(&m),
        format!(
            "last novel births [{}], mean {m:.0} (band 20000..600000)",
            times.join(", ")
        ),
    )
}

/// Experiment 4 at rates {0, 0.08, 0.2} over 300,000 births.
fn change_rate_endpoints() -> Verdict {
    let s = spec(4, 0.3, 5).with_values(vec![0.0, 0.08, 0.2]).unwrap();
    let p = sweep_points(&s);
    let frac: Vec<f64> = p.iter().map(|q| q.fraction_runs_nonzero_rate).collect();
    let ok = frac.windows(2).all(|w| w[0] <= w[1])
        && frac[0] == 0.0
        && frac[2] == 1.0
        && p[2].mean_last_novel_birth > p[0].mean_last_novel_birth;
    check(
        ok,
        format!(
            "fraction nonzero {frac:?}, mean last novel birth {:.0} / {:.0} / {:.0}",
            p[0].mean_last_novel_birth, p[1].mean_last_novel_birth, p[2].mean_last_novel_birth
        ),
    )
}

/// Experiment 2 over 100,000 births: late eras gain more fitness than early ones.
fn accelerating_pace() -> Verdict {
    let (runs, _) = series(&spec(2, 0.01, 3));
    let eras = runs[0].era_records.len();
    let tenth = eras / 10;
    let window = |lo: usize, hi: usize| {
        mean(
            runs.iter()
                .flat_map(|r| r.era_records[lo..hi].iter().map(|e| e.increase())),
        )
    };
    let early = window(0, tenth);
    let late = window(eras - tenth, eras);
    check(
        late > early,
        format!("mean era increase, first {tenth} eras {early:.4}, last {tenth} eras {late:.4}"),
    )
}

/// Experiment 2 over 10^6 births: the late mutation rate settles in [0.01, 0.10].
fn rate_stabilizes() -> Verdict {
    let (_, agg) = series(&spec(2, 0.1, 3));
    let n = agg.samples.len();
    let tail = &agg.samples[n - n / 5..];
    let m = mean(tail.iter().map(|s| s.mean_mutation_rate));
    check(
        (0.01..=0.10).contains(&m),
        format!(
            "mean rate over last {} samples {m:.4} (band 0.01..0.10)",
            tail.len()
        ),
    )
}

/// `experiment 1 --seed 7` is byte-identical across invocations and to the
/// frozen golden files.
fn golden_regression() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_evosim"))
            .args(["experiment", "1", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        if !o.status.success() {
            return Err(format!(
                "evosim failed: {}",
                String::from_utf8_lossy(&o.stderr)
            ));
        }
        let read = |f: &str| fs::read(out.join(f)).unwrap();
        outputs.push((
            read("experiment1_timeseries.csv"),
            read("experiment1_runs.csv"),
        ));
    }
    let frozen = (
        fs::read(golden.join("experiment1_seed7_timeseries.csv")).unwrap(),
        fs::read(golden.join("experiment1_seed7_runs.csv")).unwrap(),
    );
    let repeat = outputs[0] == outputs[1];
    let matches = outputs[0] == frozen;
    check(
        repeat && matches,
        format!("two invocations identical: {repeat}, golden match: {matches}"),
    )
}

fn random_bits(n: usize, rng: &mut SimRng) -> BitString {
    let mut b = BitString::new();
    for _ in 0..n {
        b.push(rng.coin());
    }
    b
}

/// Decode oracle, fitness oracle, and engine invariants over random steps.
fn property_suite() -> Verdict {
    let mut failures = Vec::new();

    // all 2^8 codes against place-value accumulation
    for v in 0u32..256 {
        let mut code = BitString::new();
        let mut acc = 0.0;
        for i in (0..8).rev() {
            let bit = (v >> i) & 1 == 1;
            code.push(bit);
            acc = acc * 2.0 + if bit { 1.0 } else { 0.0 };
        }
        let got = decode_mutation_rate(&Genome::new(code, 0), 8);
        if got != acc / 255.0 {
            failures.push(format!("decode {v:08b}: {got}"));
        }
    }

    let mut rng = SimRng::seed_from_u64(77);
    for case in 0..10_000 {
        let code_length = 2 + rng.below(8);
        let g = random_bits(code_length + rng.below(200), &mut rng);
        let t = random_bits(rng.below(200), &mut rng);
        let naive = (code_length..g.len())
            .zip(0..t.len())
            .filter(|&(i, j)| g.get(i) == t.get(j))
            .count() as u32;
        let got = evaluate_fitness(&Genome::new(g, 0), &Target(t), code_length);
        if got != naive {
            failures.push(format!("fitness case {case}: {got} != {naive}"));
            break;
        }
    }

    let cfg = SimConfig {
        pop_size: 20,
        run_length: 10_000,
        era_length: 50,
        target_change_rate: 0.2,
        tournament_size: 4,
        mutation_code_length: 4,
        seed: 11,
        sample_interval: 100,
        stop_on_zero_mutation: false,
    };
    let mut state = SimState::new(cfg.clone()).unwrap();
    let mut target_len = state.target().len();
    let mut min_fit = state.population().min_fitness();
    while !state.is_finished() {
        let out = state.step().unwrap();
        let pop = state.population();
        let tlen = state.target().len();
        let mut bad = Vec::new();
        if pop.len() != cfg.pop_size {
            bad.push("population size changed");
        }
        if tlen < target_len {
            bad.push("target shrank");
        }
        for (g, &f) in pop.genomes().iter().zip(pop.fitnesses()) {
            if g.len() < cfg.mutation_code_length {
                bad.push("genome below code length");
            }
            if f as usize > (g.len() - cfg.mutation_code_length).min(tlen) {
                bad.push("fitness above overlap");
            }
            if g.len() - cfg.mutation_code_length > tlen {
                bad.push("phenotype longer than target");
            }
        }
        if out.era.is_none() {
            if pop.min_fitness() < min_fit {
                bad.push("min fitness fell within an era");
            }
            if pop.mean_fitness() < state.era_start_fitness() - 1e-12 {
                bad.push("negative fitness increase within an era");
            }
        }
        if !bad.is_empty() {
            bad.dedup();
            failures.push(format!("birth {}: {}", out.child_num, bad.join(", ")));
            break;
        }
        target_len = tlen;
        min_fit = pop.min_fitness();
    }

    if failures.is_empty() {
        Ok("256 decode codes, 10000 fitness pairs, 10000 engine steps".into())
    } else {
        Err(failures.join("; "))
    }
}

/// Experiment 8 at code lengths {5, 10}: finer codes keep mutating at least
/// as often as coarse ones.
fn code_length_quantization() -> Verdict {
    let s = spec(8, 0.3, 5).with_values(vec![5.0, 10.0]).unwrap();
    let p = sweep_points(&s);
    let (f5, f10) = (
        p[0].fraction_runs_nonzero_rate,
        p[1].fraction_runs_nonzero_rate,
    );
    check(
        f10 >= f5,
        format!("fraction nonzero at code length 5: {f5}, at 10: {f10}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("experiment 1 baseline trends", baseline_trends),
        (
            "experiment 3 static target reaches zero mutation",
            static_target_freezes,
        ),
        (
            "experiment 4 target change rate endpoints",
            change_rate_endpoints,
        ),
        ("experiment 2 accelerating pace", accelerating_pace),
        ("experiment 2 mutation rate stabilization", rate_stabilizes),
        ("determinism golden files", golden_regression),
        ("property suite", property_suite),
        (
            "experiment 8 code length quantization",
            code_length_quantization,
        ),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let verdict = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n} {tag}: {name}: {detail} ({secs:.1}s)");
        failed += usize::from(verdict.is_err());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
