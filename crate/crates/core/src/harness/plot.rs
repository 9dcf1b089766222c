//! Minimal SVG output: trajectories over the map and learning curves.

use super::episode::EpisodeLog;
use crate::geom::Rect;
use crate::terrain::Scenario;
use std::fmt::Write as _;

const SIZE: f64 = 600.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

struct Frame {
    bounds: Rect,
    scale: f64,
}

impl Frame {
    fn new(bounds: Rect) -> Self {
        let span = (bounds.max_x - bounds.min_x).max(bounds.max_y - bounds.min_y).max(1e-9);
        Self { bounds, scale: SIZE / span }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.bounds.min_x) * self.scale, SIZE - (y - self.bounds.min_y) * self.scale)
    }
}

fn trace_bounds(logs: &[EpisodeLog]) -> Rect {
    let mut b = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for l in logs {
        let pts = l.records.iter().map(|r| (r.state.x, r.state.y)).chain([(l.goal.x, l.goal.y)]);
        for (x, y) in pts {
            b = Rect::new(b.min_x.min(x), b.min_y.min(y), b.max_x.max(x), b.max_y.max(y));
        }
    }
    if !b.is_valid() {
        return Rect::new(0.0, 0.0, 1.0, 1.0);
    }
    Rect::new(b.min_x - 1.0, b.min_y - 1.0, b.max_x + 1.0, b.max_y + 1.0)
}

fn rect(out: &mut String, f: &Frame, r: &Rect, style: &str) {
    let (x0, y0) = f.px(r.min_x, r.max_y);
    let (x1, y1) = f.px(r.max_x, r.min_y);
    let _ = writeln!(out, r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" {style}/>"#, x1 - x0, y1 - y0);
}

/// Trajectories drawn over the scenario's shaded terrain and objects. Without
/// a scenario the view is fitted to the traces.
pub fn trajectory_svg(scenario: Option<&Scenario>, logs: &[EpisodeLog]) -> String {
    let frame = Frame::new(scenario.map(|s| s.grid.bounds()).unwrap_or_else(|| trace_bounds(logs)));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#f4f1ea"/>"##);

    if let Some(s) = scenario {
        let g = &s.grid;
        let (lo, hi) = g.heights().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| (a.min(h), b.max(h)));
        let stride = (g.width_cells().max(g.height_cells()) / 40).max(1);
        let c = g.cell_size();
        for j in (0..g.height_cells()).step_by(stride) {
            for i in (0..g.width_cells()).step_by(stride) {
                let t = if hi > lo { (g.node_height(i, j) - lo) / (hi - lo) } else { 0.5 };
                let shade = (230.0 - 110.0 * t) as u8;
                let p = g.node_position(i, j);
                let half = 0.5 * c * stride as f64;
                let cell = Rect::new(p.x - half, p.y - half, p.x + half, p.y + half);
                rect(&mut out, &frame, &cell, &format!(r#"fill="rgb({shade},{shade},{})""#, shade / 2 + 100));
            }
        }
        rect(&mut out, &frame, &s.start_zone, r##"fill="none" stroke="#2ca02c" stroke-width="2""##);
        if let Some(z) = &s.goal_zone {
            rect(&mut out, &frame, z, r##"fill="none" stroke="#d62728" stroke-width="2""##);
        }
        for o in &s.objects {
            let (x, y) = frame.px(o.position.x, o.position.y);
            let fill = if o.class.is_cover() { "#2e7d32" } else { "#7f7f7f" };
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{fill}" fill-opacity="0.8"/>"#,
                o.footprint_radius * frame.scale
            );
        }
    }

    for (k, log) in logs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = log
            .records
            .iter()
            .map(|r| {
                let (x, y) = frame.px(r.state.x, r.state.y);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ =
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for r in log.records.iter().filter(|r| r.cover.is_cover) {
            let (x, y) = frame.px(r.state.x, r.state.y);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
        }
        let (gx, gy) = frame.px(log.goal.x, log.goal.y);
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2} l8,8 m0,-8 l-8,8" stroke="{color}" stroke-width="2"/>"#,
            gx - 4.0,
            gy - 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Episode returns with a 10-episode moving average.
pub fn curve_svg(curve: &[f64]) -> String {
    let (w, h, pad) = (SIZE, SIZE * 0.6, 40.0);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let finite: Vec<f64> = curve.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0) };
    let n = curve.len().max(2) as f64 - 1.0;
    let px =
        |i: usize, v: f64| (pad + (w - 2.0 * pad) * i as f64 / n, h - pad - (h - 2.0 * pad) * (v - lo) / (hi - lo));
    let _ = writeln!(out, r##"<path d="M{pad},{pad} V{} H{}" fill="none" stroke="#333"/>"##, h - pad, w - pad);
    let _ = writeln!(out, r#"<text x="{pad}" y="{}" font-size="11">{hi:.1}</text>"#, pad - 6.0);
    let _ = writeln!(out, r#"<text x="{pad}" y="{}" font-size="11">{lo:.1}</text>"#, h - pad + 14.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11">episode</text>"#, w / 2.0, h - 8.0);

    let line = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| {
                let (x, y) = px(i, v);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#9ecae1" stroke-width="1"/>"##, line(curve));
    let smooth: Vec<f64> = (0..curve.len())
        .map(|i| {
            let win = &curve[i.saturating_sub(9)..=i];
            win.iter().sum::<f64>() / win.len() as f64
        })
        .collect();
    let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="2"/>"##, line(&smooth));
    out.push_str("</svg>\n");
    out
}
