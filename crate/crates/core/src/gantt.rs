//! Timeline rendering of simulation traces: one lane per job.

use std::fmt::Write;

use crate::model::Tick;
use crate::sim::{RecordKind, Trace};

const LABEL_WIDTH: f64 = 150.0;
const LANE_HEIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const MAX_PLOT_WIDTH: f64 = 1800.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Pick a round axis step giving roughly ten labels.
fn axis_step(end: Tick) -> Tick {
    let raw = (end / 10).max(1);
    let mut step = 1;
    while step * 10 <= raw {
        step *= 10;
    }
    if step * 5 <= raw {
        step * 5
    } else if step * 2 <= raw {
        step * 2
    } else {
        step
    }
}

/// SVG document with execution rectangles, arrival markers carrying jitter
/// whiskers, release and emission markers, and deadline lines.
pub fn render_svg(trace: &Trace, title: &str) -> String {
    let end = trace.end().max(1);
    let scale = (MAX_PLOT_WIDTH / end as f64).min(8.0);
    let x = |t: Tick| LABEL_WIDTH + t as f64 * scale;
    let width = x(end) + 20.0;
    let height = TOP + LANE_HEIGHT * trace.jobs.len() as f64 + 30.0;
    let lane_y = |lane: usize| TOP + LANE_HEIGHT * lane as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    out.push_str(
        "<style>text{font:11px sans-serif}.exec{fill:#4a7bd0;stroke:#1d3f7a;stroke-width:0.5}\
         .arrival{stroke:#222}.jitter{stroke:#d08a2a;stroke-width:2}.release{fill:#d08a2a}\
         .emission{stroke:#2a9d4a;stroke-width:1.5}.deadline{stroke:#c0392b;stroke-dasharray:3 2}\
         .axis{stroke:#999}.grid{stroke:#eee}</style>\n",
    );
    let _ = writeln!(out, r#"<text x="8" y="16">{}</text>"#, escape(title));

    let step = axis_step(end);
    let axis_y = lane_y(trace.jobs.len()) + 4.0;
    let _ = writeln!(out, r#"<g class="time-axis">"#);
    let mut t = 0;
    while t <= end {
        let _ = writeln!(
            out,
            r#"<line class="grid" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
            x(t),
            TOP - 6.0,
            axis_y,
            axis_y + 14.0,
            t
        );
        t += step;
    }
    let _ = writeln!(out, "</g>");

    let executions = trace.executions();
    let chain_root: Vec<Option<usize>> = trace
        .transactions
        .iter()
        .map(|tx| trace.jobs.iter().position(|j| j.transaction == tx.transaction))
        .collect();

    for (lane, job) in trace.jobs.iter().enumerate() {
        let y = lane_y(lane);
        let _ = writeln!(
            out,
            r#"<g class="lane" data-job="{}" data-transaction="{}">"#,
            escape(&job.root),
            escape(&job.transaction)
        );
        let _ = writeln!(
            out,
            r#"<text x="8" y="{:.2}">{} · {} · p{}</text>"#,
            y + LANE_HEIGHT * 0.6,
            escape(&job.root),
            escape(&job.transaction),
            job.priority
        );
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}"/>"#,
            LABEL_WIDTH,
            y + LANE_HEIGHT - 4.0,
            x(end)
        );
        for &(j, inst, start, stop) in executions.iter().filter(|e| e.0 == lane) {
            let _ = writeln!(
                out,
                r#"<rect class="exec" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"><title>{} #{} [{}, {})</title></rect>"#,
                x(start),
                y + 6.0,
                (stop - start) as f64 * scale,
                LANE_HEIGHT - 12.0,
                escape(&trace.jobs[j].root),
                inst,
                start,
                stop
            );
        }
        for r in trace.records.iter().filter(|r| r.job == lane) {
            match r.kind {
                RecordKind::Emission => {
                    let _ = writeln!(
                        out,
                        r#"<line class="emission" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
                        x(r.time),
                        y + 2.0,
                        y + LANE_HEIGHT - 4.0
                    );
                }
                RecordKind::Release => {
                    let _ = writeln!(
                        out,
                        r#"<circle class="release" cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                        x(r.time),
                        y + 4.0
                    );
                }
                _ => {}
            }
        }
        for (tx, root) in chain_root.iter().enumerate() {
            if *root != Some(lane) {
                continue;
            }
            let t = &trace.transactions[tx];
            for inst in &t.instances {
                let ax = x(inst.arrival);
                let _ = writeln!(
                    out,
                    r#"<line class="arrival" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
                    ax,
                    y,
                    y + 10.0
                );
                if t.jitter > 0 {
                    let _ = writeln!(
                        out,
                        r#"<line class="jitter" x1="{:.2}" y1="{2:.2}" x2="{:.2}" y2="{2:.2}"/>"#,
                        ax,
                        x(inst.arrival + t.jitter),
                        y + 2.0
                    );
                }
                if t.deadline != Tick::MAX {
                    let dx = x(inst.arrival + t.deadline);
                    let _ = writeln!(
                        out,
                        r#"<line class="deadline" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
                        dx,
                        y,
                        y + LANE_HEIGHT - 4.0
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

/// One character per tick per lane: `#` while the job executes, `.` otherwise.
pub fn render_text(trace: &Trace) -> String {
    let end = trace.end() as usize;
    let label_width = trace.jobs.iter().map(|j| j.root.len()).max().unwrap_or(0);
    let mut lanes: Vec<Vec<u8>> = vec![vec![b'.'; end]; trace.jobs.len()];
    for (job, _, start, stop) in trace.executions() {
        for cell in &mut lanes[job][start as usize..stop as usize] {
            *cell = b'#';
        }
    }
    let mut out = String::new();
    for (job, cells) in trace.jobs.iter().zip(lanes) {
        let _ = writeln!(
            out,
            "{:<label_width$} {}",
            job.root,
            String::from_utf8(cells).expect("ascii")
        );
    }
    out
}
