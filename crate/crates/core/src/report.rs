//! Run outputs: `metrics.csv`, `summary.txt` and SVG plots.
//!
//! Every verdict in the summary can be recomputed from the CSV alone: a
//! region is "entered" at the first sample after which `U <= eps_bound`
//! holds for every remaining sample.

use std::fmt::Write as _;
use std::io;

use crate::bounds::{AveragingReport, TrackingReport};
use crate::sim::{MetricsRecord, Scenario};

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "U_p",
        "U_R",
        "rho_p",
        "rho_R",
        "eps_bound_p",
        "eps_bound_R",
        "min_eig_S",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=n).map(|i| format!("err_cam_{i}")));
    h
}

/// Writes all records; floats use shortest round-trip formatting.
pub fn write_metrics_csv<W: io::Write>(out: W, records: &[MetricsRecord]) -> csv::Result<()> {
    let n = records.first().map_or(0, |r| r.err_cam.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(n))?;
    for r in records {
        let mut row = vec![
            r.t.to_string(),
            r.u_p.to_string(),
            r.u_r.to_string(),
            r.rho_p.to_string(),
            r.rho_r.to_string(),
            r.eps_bound_p.to_string(),
            r.eps_bound_r.to_string(),
            r.min_eig_s.to_string(),
        ];
        row.extend(r.err_cam.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// First time after which `value <= bound` for all remaining samples.
/// `None` if the last sample violates it or the bound is NaN there.
pub fn entered_at(samples: impl IntoIterator<Item = (f64, f64, f64)>) -> Option<f64> {
    let mut entry = None;
    for (t, value, bound) in samples {
        if value <= bound {
            entry.get_or_insert(t);
        } else {
            entry = None;
        }
    }
    entry
}

fn verdict_line(label: &str, at: Option<f64>) -> String {
    match at {
        Some(t) => format!("{label}: entered at t={t}"),
        None => format!("{label}: not entered"),
    }
}

/// Summary of a run. The level shown in `Ω_p(level)` comes from the
/// averaging report for static targets and the final tracking report for
/// moving ones; the entry times come from the `eps_bound_*` columns.
pub fn summary_text(
    sc: &Scenario,
    records: &[MetricsRecord],
    averaging: Option<&AveragingReport>,
    tracking: Option<&TrackingReport>,
) -> String {
    let mut s = String::new();
    let Some(last) = records.last() else {
        return "no samples\n".into();
    };
    let _ = writeln!(s, "cameras: {}", sc.len());
    let _ = writeln!(s, "gains: k_e={} k_s={}", sc.gains.k_e, sc.gains.k_s);
    let _ = writeln!(s, "dt={} horizon={} samples={}", sc.dt, sc.horizon, records.len());
    let _ = writeln!(s, "targets: {}", if sc.is_static() { "static" } else { "moving" });
    if let Some(a) = averaging {
        let _ = writeln!(
            s,
            "averaging bound: W={} beta={:.6} epsilon={} c={} eps_p={:.6e} eps_R={:.6e}",
            a.w_const, a.beta, a.epsilon, a.c, a.eps_p, a.eps_r
        );
    }
    if let Some(tr) = tracking {
        let _ = writeln!(
            s,
            "tracking bound: gamma={:.6} mu={:.6} rho'_p={:.6e} rho'_R={:.6e} eps'_p={:.6} eps'_R={:.6}",
            tr.gamma, tr.mu, tr.rho_p_sup, tr.rho_r_sup, tr.eps_p_track, tr.eps_r_track
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "final t={}", last.t);
    let _ = writeln!(
        s,
        "final U_p={:.6e} rho_p={:.6e} ratio={:.6e}",
        last.u_p,
        last.rho_p,
        last.u_p / last.rho_p
    );
    let _ = writeln!(
        s,
        "final U_R={:.6e} rho_R={:.6e} ratio={:.6e}",
        last.u_r,
        last.rho_r,
        last.u_r / last.rho_r
    );
    let _ = writeln!(
        s,
        "final eps_bound_p={:.6e} eps_bound_R={:.6e}",
        last.eps_bound_p, last.eps_bound_r
    );
    let _ = writeln!(s, "final min_eig_S={:.6}", last.min_eig_s);
    for (i, e) in last.err_cam.iter().enumerate() {
        let _ = writeln!(s, "final err_cam_{}={:.6e}", i + 1, e);
    }
    let _ = writeln!(s);
    let p = entered_at(records.iter().map(|r| (r.t, r.u_p, r.eps_bound_p)));
    let r = entered_at(records.iter().map(|r| (r.t, r.u_r, r.eps_bound_r)));
    let level = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{}", (v * 100.0).round() / 100.0));
    let (lp, lr) = match (averaging, tracking) {
        (Some(a), _) => (Some(a.eps_p), Some(a.eps_r)),
        (None, Some(t)) => (Some(t.eps_p_track), Some(t.eps_r_track)),
        _ => (None, None),
    };
    let _ = writeln!(s, "{}", verdict_line(&format!("Ω_p({})", level(lp)), p));
    let _ = writeln!(s, "{}", verdict_line(&format!("Ω_R({})", level(lr)), r));
    let left_s = records.iter().find(|r| !(r.min_eig_s > 0.0));
    let _ = writeln!(
        s,
        "S: {}",
        match left_s {
            Some(r) => format!("left at t={}", r.t),
            None => "stayed inside".into(),
        }
    );
    let f = &last.flags;
    let _ = writeln!(
        s,
        "assumptions: balanced={} strongly_connected={} distinct_pair={} targets_pd={} average_pd={}",
        f.graph.balanced,
        f.graph.strongly_connected,
        f.distinct_pair,
        f.targets_pairwise_pd(),
        f.average_pd()
    );
    s
}

/// One curve of an SVG plot. A dashed series reuses the colour of the
/// series before it (bound overlays).
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Line plot with a log-scale y axis. Nonpositive and NaN values are skipped.
pub fn svg_log_plot(title: &str, series: &[Series<'_>]) -> String {
    let (w, h, ml, mr, mt, mb) = (720.0, 420.0, 70.0, 150.0, 30.0, 40.0);
    let pts = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(_, y)| *y > 0.0 && y.is_finite())
    };
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| mt + (y1 - y.log10()) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{ml}" y="18" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    let mut e = y0 as i32;
    while e as f64 <= y1 {
        let y = sy(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" x2="{}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"##,
            w - mr,
            ml - 4.0,
            y + 4.0
        );
        e += 1;
    }
    for k in 0..=4 {
        let xv = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.3}</text>"#,
            sx(xv),
            h - mb + 14.0,
            xv
        );
    }
    let mut color_idx = 0usize;
    for (k, ser) in series.iter().enumerate() {
        if !ser.dashed || k == 0 {
            color_idx = k;
        }
        let color = COLORS[color_idx % COLORS.len()];
        let dash = if ser.dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let stride = (ser.points.len() / 1000).max(1);
        let path: Vec<String> = ser
            .points
            .iter()
            .step_by(stride)
            .filter(|(_, y)| *y > 0.0 && y.is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = mt + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            w - mr + 8.0,
            w - mr + 24.0,
            w - mr + 28.0,
            ly + 4.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `(file name, svg)` pairs for a run: energies against bounds, and
/// per-camera estimation errors.
pub fn run_plots(records: &[MetricsRecord]) -> Vec<(String, String)> {
    let col = |f: fn(&MetricsRecord) -> f64| records.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let energy = svg_log_plot(
        "energies and bounds",
        &[
            Series {
                label: "U_p",
                points: col(|r| r.u_p),
                dashed: false,
            },
            Series {
                label: "eps_bound_p",
                points: col(|r| r.eps_bound_p),
                dashed: true,
            },
            Series {
                label: "U_R",
                points: col(|r| r.u_r),
                dashed: false,
            },
            Series {
                label: "eps_bound_R",
                points: col(|r| r.eps_bound_r),
                dashed: true,
            },
        ],
    );
    let n = records.first().map_or(0, |r| r.err_cam.len());
    let labels: Vec<String> = (1..=n).map(|i| format!("err_cam_{i}")).collect();
    let errs: Vec<Series<'_>> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| Series {
            label: l,
            points: records.iter().map(|r| (r.t, r.err_cam[i])).collect(),
            dashed: false,
        })
        .collect();
    vec![
        ("energy.svg".into(), energy),
        ("errors.svg".into(), svg_log_plot("per-camera estimation error", &errs)),
    ]
}
