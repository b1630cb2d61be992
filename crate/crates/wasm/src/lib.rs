//! Browser bindings: analyze a model, render a simulated timeline, and plot
//! release counts of an arrival pattern.

use rtchain::analysis::{analyze, AnalysisConfig};
use rtchain::gantt::render_svg;
use rtchain::model::{validate, ArrivalPattern, SystemModel, Tick};
use rtchain::report::ReportDocument;
use rtchain::sim::{adversarial_scenario, default_horizon, simulate, JitterPolicy, Scenario};
use wasm_bindgen::prelude::*;

fn load(source: &str) -> Result<SystemModel, String> {
    let model = rtchain::parse(source).map_err(|e| e.to_string())?;
    let report = validate(&model);
    if report.is_clean() {
        Ok(model)
    } else {
        Err(report.to_string())
    }
}

/// The bundled example model.
#[wasm_bindgen]
pub fn example_model() -> String {
    rtchain::fixtures::AGC.to_owned()
}

/// Analysis report as JSON.
#[wasm_bindgen]
pub fn analyze_model(source: &str) -> Result<String, String> {
    let model = load(source)?;
    let config = AnalysisConfig {
        max_window: None,
        stages: true,
    };
    let report = analyze(&model, &config).map_err(|e| e.to_string())?;
    Ok(ReportDocument::new(&model, &config, &report).to_json())
}

/// SVG timeline. `scenario` is `adversarial`, `aligned` or `random`;
/// a zero `duration` selects the default horizon.
#[wasm_bindgen]
pub fn gantt_svg(source: &str, scenario: &str, seed: u64, duration: u64) -> Result<String, String> {
    let model = load(source)?;
    let horizon = if duration == 0 {
        default_horizon(&model)
    } else {
        duration
    };
    let mut sc = match scenario {
        "adversarial" => adversarial_scenario(&model),
        "aligned" => Scenario::aligned(&model, horizon, JitterPolicy::Zero),
        "random" => Scenario::random(&model, horizon, seed, JitterPolicy::Random),
        other => return Err(format!("unknown scenario `{other}`")),
    };
    if duration != 0 {
        sc.duration = duration;
    }
    let trace = simulate(&model, &sc).map_err(|e| e.to_string())?;
    Ok(render_svg(&trace, &format!("{} ({scenario})", model.name)))
}

/// Release counts for windows `0..=window_max`.
#[wasm_bindgen]
pub fn release_curve(outer: u64, inner: u64, burst: u32, jitter: u64, window_max: u64) -> Result<Vec<u32>, String> {
    if outer == 0 || (burst > 1 && inner == 0) {
        return Err("periods must be positive".into());
    }
    let pattern = match (inner, burst) {
        (0, _) | (_, 0 | 1) => ArrivalPattern::periodic(outer, jitter),
        _ => ArrivalPattern::sporadic(outer, inner, burst, jitter),
    };
    Ok((0..=window_max)
        .map(|w: Tick| u32::try_from(pattern.release_count(w)).unwrap_or(u32::MAX))
        .collect())
}
