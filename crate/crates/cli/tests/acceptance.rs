//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtchain::analysis::{analyze, utilization, AnalysisConfig, Verdict};
use rtchain::derive::Derivation;
use rtchain::generate::{random_model, GeneratorConfig};
use rtchain::model::{validate, ArrivalPattern, SystemModel, Tick};
use rtchain::sim::sweep;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load(name: &str) -> SystemModel {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    rtchain::parse(&text).expect("fixture parses")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtchain"))
        .args(args)
        .output()
        .expect("binary runs")
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn criterion_1() -> Outcome {
    let m = load("agc.rts");
    ensure!(validate(&m).is_clean(), "diagnostics: {}", validate(&m));
    ensure!(m.transactions.len() == 3, "{} transactions", m.transactions.len());
    let actions = m.actions().count();
    ensure!(actions == 12, "{actions} actions");
    let d = Derivation::new(&m).map_err(|e| e.to_string())?;
    let costs: Vec<Tick> = d.jobs.iter().map(|j| j.cost).collect();
    let prios: Vec<u32> = d.jobs.iter().map(|j| j.priority).collect();
    let deadlines: Vec<Tick> = m.transactions.iter().map(|t| t.deadline()).collect();
    ensure!(costs == [16, 5, 10, 27, 25, 30], "job costs {costs:?}");
    ensure!(prios == [10, 10, 9, 9, 8, 7], "priorities {prios:?}");
    ensure!(deadlines == [60, 125, 250], "deadlines {deadlines:?}");
    Ok(format!(
        "costs {costs:?}, priorities {prios:?}, deadlines {deadlines:?}"
    ))
}

/// Arrivals strictly before `limit`, by enumeration.
fn arrivals_before(p: &ArrivalPattern, limit: Tick) -> u64 {
    let mut count = 0;
    for burst in 0.. {
        let base = burst * p.outer_period;
        if base >= limit {
            break;
        }
        for k in 0..u64::from(p.burst) {
            if base + k * p.inner_period < limit {
                count += 1;
            }
        }
    }
    count
}

/// Single-instance fixed point `w = B + C + Σ N_s(w)·C_s` over the AGC
/// transactions, written out from the table values.
fn agc_oracle() -> [Tick; 3] {
    let patterns = [
        ArrivalPattern::periodic(60, 3),
        ArrivalPattern::aperiodic(200, 5),
        ArrivalPattern::sporadic(900, 300, 3, 0),
    ];
    let cost = [16 + 5, 10 + 27, 25 + 30];
    // Lower-priority jobs that can be running at the critical instant:
    // the τ3 jobs (25, 30) below τ1 and τ2; nothing below τ3's lowest job.
    let blocking = [30, 30, 0];
    // Transactions with a job at or above each chain's lowest priority.
    let sources: [&[usize]; 3] = [&[], &[0], &[0, 1]];
    let mut out = [0; 3];
    for i in 0..3 {
        let mut w = blocking[i] + cost[i];
        loop {
            let interference: Tick = sources[i]
                .iter()
                .map(|&s| arrivals_before(&patterns[s], w + patterns[s].jitter) * cost[s])
                .sum();
            let next = blocking[i] + cost[i] + interference;
            if next == w {
                break;
            }
            w = next;
        }
        out[i] = w + patterns[i].jitter;
    }
    out
}

fn criterion_2() -> Outcome {
    let m = load("agc.rts");
    let oracle = agc_oracle();
    ensure!(oracle == [54, 114, 155], "oracle disagrees with goldens: {oracle:?}");
    let start = Instant::now();
    let report = analyze(&m, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let wcrt: Vec<Option<Tick>> = report.results.iter().map(|r| r.wcrt).collect();
    ensure!(wcrt == [Some(54), Some(114), Some(155)], "wcrt {wcrt:?}");
    ensure!(
        report.results.iter().all(|r| r.verdict == Verdict::Schedulable),
        "not all schedulable"
    );
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("R = {{54, 114, 155}} in {elapsed:.2?}"))
}

fn check_sound(m: &SystemModel, count: u64, seed: u64) -> Result<u64, String> {
    let report = analyze(m, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let summary = sweep(m, count, seed).map_err(|e| e.to_string())?;
    for (r, s) in report.results.iter().zip(&summary.transactions) {
        if let (Some(bound), Some(seen)) = (r.wcrt, s.max_response) {
            ensure!(
                seen <= bound,
                "{}: {} observed {seen} > wcrt {bound} (scenario seed {:?})",
                m.name,
                r.transaction,
                s.worst_seed
            );
        }
    }
    Ok(summary.scenarios)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let agc = load("agc.rts");
    let mut scenarios = check_sound(&agc, 10_000, 1)?;
    let config = GeneratorConfig::default();
    let mut models = 0;
    let mut seed = 0;
    let mut random_scenarios = 0;
    while models < 50 {
        let m = random_model(seed, &config);
        seed += 1;
        let bounded = analyze(&m, &AnalysisConfig::default())
            .map_err(|e| e.to_string())?
            .results
            .iter()
            .all(|r| r.wcrt.is_some());
        if !bounded {
            continue;
        }
        random_scenarios += check_sound(&m, 200, seed)?;
        models += 1;
    }
    scenarios += random_scenarios;
    let elapsed = start.elapsed();
    ensure!(
        random_scenarios >= 10_000,
        "only {random_scenarios} random-model scenarios"
    );
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{scenarios} scenarios over AGC and {models} random models ({} unbounded skipped), 0 violations, {elapsed:.1?}",
        seed - models
    ))
}

/// Response-time recurrence for independent periodic tasks under
/// non-preemptive fixed priorities, examining every instance of the busy
/// period. Tasks are `(cost, period, priority)`.
fn classic_wcrt(tasks: &[(Tick, Tick, u32)], i: usize) -> Tick {
    let (c, t, p) = tasks[i];
    let b = tasks.iter().filter(|x| x.2 < p).map(|x| x.0).max().unwrap_or(0);
    let hp: Vec<(Tick, Tick)> = tasks
        .iter()
        .enumerate()
        .filter(|&(j, x)| j != i && x.2 >= p)
        .map(|(_, x)| (x.0, x.1))
        .collect();
    let mut worst = 0;
    for q in 0.. {
        let mut w = b + (q + 1) * c;
        loop {
            let next = b + (q + 1) * c + hp.iter().map(|&(cj, tj)| w.div_ceil(tj) * cj).sum::<Tick>();
            if next == w {
                break;
            }
            w = next;
        }
        worst = worst.max(w - q * t);
        if w <= (q + 1) * t {
            break;
        }
    }
    worst
}

fn criterion_4() -> Outcome {
    let config = GeneratorConfig::periodic_tasks();
    let mut compared = 0;
    for seed in 0..20 {
        let m = random_model(1000 + seed, &config);
        let tasks: Vec<(Tick, Tick, u32)> = m
            .transactions
            .iter()
            .map(|t| (t.actions[0].cost(), t.pattern().outer_period, t.actions[0].priority))
            .collect();
        let report = analyze(&m, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
        for (i, r) in report.results.iter().enumerate() {
            let expected = classic_wcrt(&tasks, i);
            ensure!(
                r.wcrt == Some(expected),
                "seed {seed} {}: engine {:?}, oracle {expected}",
                r.transaction,
                r.wcrt
            );
            compared += 1;
        }
    }
    Ok(format!("{compared} task WCRTs match on 20 task sets"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0u64;
    for _ in 0..100 {
        let outer: Tick = rng.gen_range(1..=60);
        let plain = ArrivalPattern::periodic(outer, 0);
        for w in 0..=10 * outer {
            let n = plain.release_count(w);
            ensure!(n == w.div_ceil(outer), "T={outer} w={w}: {n}");
            ensure!(
                rtchain::analysis::release_count(&plain, w) == n,
                "free function disagrees"
            );
            checks += 1;
        }
        let burst = rng.gen_range(1..=4u32);
        let inner = rng.gen_range(1..=(outer / Tick::from(burst)).max(1));
        let outer = outer.max(inner * Tick::from(burst));
        for jitter in 0..=outer {
            let p = ArrivalPattern::sporadic(outer, inner, burst, jitter);
            let wider = p.with_jitter(jitter + 1);
            let mut prev = 0;
            for w in 0..=10 * outer {
                let n = p.release_count(w);
                ensure!(n >= prev, "{p:?}: N({w}) = {n} < N({}) = {prev}", w - 1);
                ensure!(wider.release_count(w) >= n, "{p:?}: not monotone in jitter at w={w}");
                ensure!(
                    n == arrivals_before(&p, w + jitter),
                    "{p:?}: N({w}) = {n} disagrees with enumeration"
                );
                prev = n;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} integer checks"))
}

fn wcrts(m: &SystemModel) -> Result<Vec<Option<Tick>>, String> {
    let report = analyze(m, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    Ok(report.results.iter().map(|r| r.wcrt).collect())
}

fn not_smaller(before: &[Option<Tick>], after: &[Option<Tick>]) -> bool {
    before.iter().zip(after).all(|(b, a)| match (b, a) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(b), Some(a)) => a >= b,
    })
}

fn criterion_6() -> Outcome {
    let config = GeneratorConfig::default();
    let mut bumps = 0;
    for seed in 0..100 {
        let m = random_model(2000 + seed, &config);
        let base = wcrts(&m)?;
        let roots: Vec<String> = Derivation::new(&m)
            .map_err(|e| e.to_string())?
            .jobs
            .iter()
            .map(|j| j.root.to_string())
            .collect();
        for delta in 1..=5 {
            for root in &roots {
                let mut bumped = m.clone();
                let a = bumped.action_mut(root).expect("root exists");
                let c = a.sub_actions()[0].cost;
                a.set_sub_cost(0, c + delta);
                let after = wcrts(&bumped)?;
                ensure!(
                    not_smaller(&base, &after),
                    "seed {seed}: cost of {root} +{delta}: {base:?} -> {after:?}"
                );
                bumps += 1;
            }
            for t in 0..m.transactions.len() {
                let mut bumped = m.clone();
                let p = &mut bumped.transactions[t].external.pattern;
                p.jitter += delta;
                let after = wcrts(&bumped)?;
                ensure!(
                    not_smaller(&base, &after),
                    "seed {seed}: jitter of {} +{delta}: {base:?} -> {after:?}",
                    m.transactions[t].id
                );
                bumps += 1;
            }
        }
    }
    Ok(format!("{bumps} bumps on 100 models, no WCRT decreased"))
}

fn criterion_7() -> Outcome {
    let m = load("agc.rts");
    let expected = Ratio::new(16 + 5, 60) + Ratio::new(10 + 27, 200) + Ratio::new(3 * (25 + 30), 900);
    ensure!(expected == Ratio::new(431, 600), "table sum {expected}");
    let u = utilization(&m);
    ensure!(u == expected, "utilization {u}");
    Ok(format!("U = {u}"))
}

fn criterion_8() -> Outcome {
    let base = analyze(&load("agc.rts"), &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    ensure!(base.schedulable(), "baseline not schedulable");
    let m = load("agc_a12_60.rts");
    let report = analyze(&m, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    ensure!(!report.schedulable(), "still schedulable");
    let t1 = report.result("T1").ok_or("no T1")?;
    ensure!(t1.verdict == Verdict::Infeasible, "T1 verdict {:?}", t1.verdict);
    ensure!(t1.blocking == 60, "T1 blocking {}", t1.blocking);
    let r = t1.wcrt.ok_or("T1 unbounded")?;
    ensure!(r > 60, "T1 wcrt {r}");
    let status = cli(&["analyze", fixture("agc_a12_60.rts").to_str().unwrap()])
        .status
        .code();
    ensure!(status == Some(1), "analyze exit {status:?}");
    Ok(format!("T1 blocking 60, R = {r} > 60, analyze exits 1"))
}

fn criterion_9() -> Outcome {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(fixture("")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "rts") {
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let first = rtchain::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let rendered = rtchain::render(&first);
            let second = rtchain::parse(&rendered).map_err(|e| format!("re-parse {}: {e}", path.display()))?;
            ensure!(first == second, "{} changed across render", path.display());
            ensure!(
                rtchain::render(&second) == rendered,
                "{} render not stable",
                path.display()
            );
            names.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    names.sort();
    ensure!(names.len() >= 3, "fixtures found: {names:?}");
    let agc = fixture("agc.rts");
    for seed in ["7", "123"] {
        let args = ["simulate", agc.to_str().unwrap(), "--seed", seed, "--scenarios", "300"];
        let a = cli(&args);
        let b = cli(&args);
        ensure!(a.status.success(), "simulate exit {:?}", a.status.code());
        ensure!(
            a.stdout == b.stdout && a.stderr == b.stderr,
            "seed {seed}: output differs"
        );
    }
    Ok(format!(
        "fixpoint on {}; simulate output byte-identical",
        names.join(", ")
    ))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("agc.svg");
    let status = cli(&[
        "gantt",
        fixture("agc.rts").to_str().unwrap(),
        "--scenario",
        "adversarial",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    ensure!(status.success(), "gantt exit {:?}", status.code());
    let svg = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&svg).map_err(|e| format!("malformed SVG: {e}"))?;
    ensure!(doc.root_element().tag_name().name() == "svg", "root is not svg");
    let lanes = doc
        .descendants()
        .filter(|n| n.has_tag_name("g") && n.attribute("class") == Some("lane"))
        .count();
    ensure!(lanes == 6, "{lanes} lanes");
    Ok("well-formed SVG with 6 job lanes".to_owned())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AGC fixture fidelity", criterion_1),
        ("golden WCRTs", criterion_2),
        ("oracle soundness", criterion_3),
        ("classical reduction", criterion_4),
        ("release count reduction and monotonicity", criterion_5),
        ("engine monotonicity", criterion_6),
        ("utilization", criterion_7),
        ("verdict flip", criterion_8),
        ("round-trip and determinism", criterion_9),
        ("timeline smoke", criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
