use rtchain::analysis::{
    analyze, blocking, end_to_end_wcrt, stage_bounds, stage_wcrt, utilization, AnalysisConfig, Verdict,
};
use rtchain::derive::{chains, jobs, partial_cost, sync_set, Derivation};
use rtchain::fixtures::{AGC, AGC_A12_60};
use rtchain::model::{validate, ActionId, SystemModel};
use rtchain::sim::{adversarial_scenario, simulate, sweep, JitterPolicy, Scenario};
use rtchain::{parse, render};

fn agc() -> SystemModel {
    parse(AGC).unwrap()
}

fn ids(v: &[ActionId]) -> Vec<&str> {
    v.iter().map(ActionId::as_str).collect()
}

#[test]
fn fixture_shape() {
    let m = agc();
    assert!(validate(&m).is_clean());
    assert_eq!(m.transactions.len(), 3);
    assert_eq!(m.actions().count(), 12);
    let mut events: Vec<String> = m.events().iter().map(|e| e.id.to_string()).collect();
    events.sort_by_key(|e| e[1..].parse::<u32>().unwrap());
    let expected: Vec<String> = (1..=12).map(|i| format!("E{i}")).collect();
    assert_eq!(events, expected);
}

#[test]
fn render_round_trip() {
    for text in [AGC, AGC_A12_60] {
        let m = parse(text).unwrap();
        assert_eq!(parse(&render(&m)).unwrap(), m);
    }
}

#[test]
fn synchronous_sets() {
    let m = agc();
    let a1 = sync_set(&m, "A1").unwrap();
    assert_eq!((ids(&a1.members), a1.cost), (vec!["A1", "A4", "A6"], 16));
    let a5 = sync_set(&m, "A5").unwrap();
    assert_eq!((ids(&a5.members), a5.cost), (vec!["A5"], 5));
    let a7 = sync_set(&m, "A7").unwrap();
    assert_eq!((ids(&a7.members), a7.cost), (vec!["A7", "A8", "A9"], 27));
    assert!(sync_set(&m, "A99").is_err());
}

#[test]
fn job_list() {
    let js = jobs(&agc()).unwrap();
    let roots: Vec<&str> = js.iter().map(|j| j.root.as_str()).collect();
    assert_eq!(roots, ["A1", "A5", "A2", "A7", "A3", "A12"]);
    let costs: Vec<u64> = js.iter().map(|j| j.cost).collect();
    assert_eq!(costs, [16, 5, 10, 27, 25, 30]);
    let prios: Vec<u32> = js.iter().map(|j| j.priority).collect();
    assert_eq!(prios, [10, 10, 9, 9, 8, 7]);
}

#[test]
fn emission_offsets() {
    let m = agc();
    let d = Derivation::new(&m).unwrap();
    let cs = chains(&m).unwrap();
    let offsets: Vec<Vec<(String, u64)>> = cs
        .iter()
        .map(|c| c.emission_offsets(&d).map(|(e, _, o)| (e.to_string(), o)).collect())
        .collect();
    assert_eq!(offsets[0], [("E5".to_owned(), 12)]);
    assert_eq!(offsets[1], [("E7".to_owned(), 5)]);
    assert_eq!(offsets[2], [("E12".to_owned(), 21)]);
    assert_eq!(cs.iter().map(|c| c.total_cost).collect::<Vec<_>>(), [21, 37, 55]);
}

#[test]
fn partial_costs() {
    let m = agc();
    assert_eq!(partial_cost(m.action("A2").unwrap(), 1, 2).unwrap(), 5);
    assert_eq!(partial_cost(m.action("A3").unwrap(), 1, 5).unwrap(), 10);
    let a7 = m.action("A7").unwrap();
    for p in 1..=4 {
        assert_eq!(partial_cost(a7, p, p).unwrap(), a7.sub_actions()[p - 1].cost);
    }
    assert!(partial_cost(a7, 3, 2).is_err());
    assert!(partial_cost(a7, 1, 5).is_err());
}

#[test]
fn blocking_terms() {
    let d = Derivation::new(&agc()).unwrap();
    let b: Vec<u64> = (0..3).map(|c| blocking(&d, c)).collect();
    assert_eq!(b, [30, 30, 0]);
}

#[test]
fn golden_response_times() {
    let m = agc();
    let config = AnalysisConfig::default();
    for (tx, r) in [("T1", 54), ("T2", 114), ("T3", 155)] {
        let res = end_to_end_wcrt(&m, tx, &config).unwrap();
        assert_eq!(res.wcrt, Some(r), "{tx}");
        assert_eq!(res.verdict, Verdict::Schedulable);
    }
    let t3 = end_to_end_wcrt(&m, "T3", &config).unwrap();
    assert_eq!(t3.instances_examined, 1);
    let report = analyze(&m, &config).unwrap();
    assert!(report.schedulable());
    assert_eq!(utilization(&m), num_rational::Ratio::new(431, 600));
}

#[test]
fn stage_bound_examples() {
    let m = agc();
    let config = AnalysisConfig::default();

    // Υ(A1) with nothing else in the model.
    let mut alone = m.clone();
    alone.transactions.truncate(1);
    let t = &mut alone.transactions[0];
    t.actions.retain(|a| a.id.as_str() != "A5");
    let a1 = t.actions.iter_mut().find(|a| a.id.as_str() == "A1").unwrap();
    let subs: Vec<_> = a1
        .sub_actions()
        .iter()
        .cloned()
        .map(|mut s| {
            if s.emission.as_ref().is_some_and(|e| e.event.as_str() == "E5") {
                s.emission = None;
            }
            s
        })
        .collect();
    a1.set_sub_actions(subs);
    assert!(validate(&alone).is_clean(), "{}", validate(&alone));
    assert_eq!(stage_wcrt(&alone, "A1", &config).unwrap(), Some(19));

    let stages = stage_bounds(&m, &config).unwrap();
    let a5 = stages.iter().find(|s| s.root.as_str() == "A5").unwrap();
    assert!(a5.jitter >= 12, "{}", a5.jitter);
    assert_eq!(stage_wcrt(&m, "A5", &config).unwrap(), a5.wcrt);
    assert!(stage_wcrt(&m, "A4", &config).is_err());
}

#[test]
fn simulated_responses_within_bounds() {
    let m = agc();
    let trace = simulate(&m, &Scenario::aligned(&m, 1800, JitterPolicy::Zero)).unwrap();
    assert_eq!(trace.total_misses(), 0);
    let max: Vec<u64> = trace.transactions.iter().map(|t| t.max_response().unwrap()).collect();
    for (seen, bound) in max.iter().zip([54, 114, 155]) {
        assert!(*seen <= bound, "{max:?}");
    }

    let adv = simulate(&m, &adversarial_scenario(&m)).unwrap();
    let t1 = adv.transactions[0].max_response().unwrap();
    // The A12 blocker starts one tick before τ1 is released.
    assert!(t1 >= 50, "{t1}");
    assert!(t1 <= 54);
}

#[test]
fn sweep_determinism() {
    let m = agc();
    assert_eq!(sweep(&m, 1, 99).unwrap(), sweep(&m, 1, 99).unwrap());
    let s = sweep(&m, 500, 3).unwrap();
    assert_eq!(s.misses(), 0);
}

#[test]
fn infeasible_variant() {
    let m = parse(AGC_A12_60).unwrap();
    let report = analyze(&m, &AnalysisConfig::default()).unwrap();
    assert!(!report.schedulable());
    let t1 = report.result("T1").unwrap();
    assert_eq!(t1.blocking, 60);
    assert!(t1.wcrt.unwrap() >= 84);
    assert_eq!(t1.verdict, Verdict::Infeasible);
    assert!(sweep(&m, 50, 1).unwrap().misses() > 0);
}
