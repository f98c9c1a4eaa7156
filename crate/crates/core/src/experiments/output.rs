//! CSV and SVG writers.

use std::fmt::Write as _;

use crate::diagnostics::{energy_e_with_b, energy_w, EnergyConfig};
use crate::integrator::Trajectory;
use crate::problem::Problem;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x_1..x_d,v_1..v_d,value_gap,speed,dist_to_xstar,energy_E,energy_W`
pub fn trajectory_header(dim: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=dim).map(|i| format!("x_{i}")));
    cols.extend((1..=dim).map(|i| format!("v_{i}")));
    cols.extend(
        ["value_gap", "speed", "dist_to_xstar", "energy_E", "energy_W"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

/// One row per sample. `energy_E` uses the default mixing coefficient,
/// falling back to `alpha / 2` when no admissible configuration exists.
pub fn trajectory_csv(traj: &Trajectory, problem: &Problem) -> String {
    let params = &traj.meta.params;
    let b = EnergyConfig::default_for(params)
        .map(|c| c.b)
        .unwrap_or(params.alpha / 2.0);
    let mut out = trajectory_header(problem.dim());
    out.push('\n');
    for s in &traj.samples {
        let mut row: Vec<String> = Vec::with_capacity(2 * problem.dim() + 6);
        row.push(fmt_f64(s.t()));
        row.extend(s.state.x.iter().map(|&v| fmt_f64(v)));
        row.extend(s.state.v.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(s.value_gap));
        row.push(fmt_f64(s.speed));
        row.push(fmt_f64(s.dist_to_xstar));
        row.push(fmt_f64(energy_e_with_b(&s.state, params, problem, b)));
        row.push(fmt_f64(energy_w(&s.state, params, problem)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Side-by-side `dist_to_xstar` and `value_gap` columns per labelled run.
pub fn comparison_csv(runs: &[(String, &Trajectory)]) -> String {
    let mut out = String::from("t");
    for (label, _) in runs {
        let _ = write!(out, ",dist_to_xstar[{label}],value_gap[{label}]");
    }
    out.push('\n');
    let rows = runs.iter().map(|(_, t)| t.samples.len()).max().unwrap_or(0);
    let Some(reference) = runs.iter().map(|(_, t)| *t).max_by_key(|t| t.samples.len()) else {
        return out;
    };
    for i in 0..rows {
        out.push_str(&fmt_f64(reference.samples[i].t()));
        for (_, traj) in runs {
            match traj.samples.get(i) {
                Some(s) => {
                    let _ = write!(out, ",{},{}", fmt_f64(s.dist_to_xstar), fmt_f64(s.value_gap));
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

/// Static line chart with a log-scaled y axis. Non-positive values are
/// dropped. `log_x` switches the x axis to log scale as well.
pub fn line_chart_svg(title: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)], log_x: bool) -> String {
    let (w, h) = (720.0, 460.0);
    let (ml, mr, mt, mb) = (80.0, 150.0, 40.0, 50.0);
    let pw = w - ml - mr;
    let ph = h - mt - mb;

    let fx = |x: f64| if log_x { x.log10() } else { x };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| {
            s.iter()
                .filter(|(x, y)| *y > 0.0 && y.is_finite() && x.is_finite() && (!log_x || *x > 0.0))
                .map(|&(x, y)| (fx(x), y.log10()))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, ml + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let step = ((y1 - y0) / 10.0).ceil().max(1.0) as i64;
    let mut e = y0 as i64;
    while e as f64 <= y1 {
        let y = sy(e as f64);
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, ml + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, ml - 6.0, y + 4.0);
        e += step;
    }
    for k in 0..=5 {
        let xv = x0 + (x1 - x0) * k as f64 / 5.0;
        let label = if log_x { format!("{:.3e}", 10f64.powf(xv)) } else { format!("{xv:.4}") };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            sx(xv),
            mt + ph + 18.0,
            label
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, ml + pw / 2.0, h - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(y_label)
    );

    for (i, ((label, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !p.is_empty() {
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = mt + 16.0 + 18.0 * i as f64;
        let lx = ml + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
