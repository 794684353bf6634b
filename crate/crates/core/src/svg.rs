//! Fan-chart rendering of percentile curves as standalone SVG 1.1.

use std::fmt::Write as _;

use crate::lms::ChartCurveSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub stroke: String,
    pub stroke_width: f64,
    pub font_size: f64,
    /// Extra curves drawn dashed underneath, e.g. a reference chart.
    pub overlay: Option<(ChartCurveSet, String)>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 800.0,
            height: 600.0,
            title: None,
            stroke: "#c0392b".into(),
            stroke_width: 1.5,
            font_size: 12.0,
            overlay: None,
        }
    }
}

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 50.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Tick step from {1, 2, 5}·10^k giving at most about `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn level_label(level: f64) -> String {
    fmt_num(level)
}

/// Renders `chart`: one polyline per level, ticks at integer ages and round
/// measure values, level labels at the right edge. Output depends only on
/// the inputs.
pub fn render_svg(chart: &ChartCurveSet, style: &SvgStyle) -> String {
    let all = chart
        .values
        .iter()
        .flatten()
        .chain(style.overlay.iter().flat_map(|(c, _)| c.values.iter().flatten()))
        .copied()
        .filter(|v| v.is_finite());
    let (mut y_lo, mut y_hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let y_step = nice_step(y_hi - y_lo, 8.0);
    let (y_min, y_max) = ((y_lo / y_step).floor() * y_step, (y_hi / y_step).ceil() * y_step);
    let first = chart.ages.first().copied().unwrap_or(0.0);
    let last = chart.ages.last().copied().unwrap_or(1.0);
    let x_min = first.floor();
    let x_max = if last.ceil() > x_min { last.ceil() } else { x_min + 1.0 };

    let plot_w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = style.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |t: f64| MARGIN_LEFT + (t - x_min) / (x_max - x_min) * plot_w;
    let py = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;
    let fs = style.font_size;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="{fs}">"#,
        w = fmt_num(style.width),
        h = fmt_num(style.height),
        fs = fmt_num(fs)
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, fmt_num(style.width), fmt_num(style.height));
    if let Some(title) = &style.title {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="{}">{}</text>"#,
            fmt_num(style.width / 2.0),
            fmt_num(MARGIN_TOP / 2.0 + fs / 2.0),
            fmt_num(fs * 1.25),
            escape(title)
        );
    }

    // grid and ticks
    let _ = writeln!(out, r##"<g stroke="#dddddd" stroke-width="0.5">"##);
    let mut age = x_min;
    while age <= x_max + 1e-9 {
        let _ = writeln!(out, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, fmt_num(MARGIN_TOP), fmt_num(MARGIN_TOP + plot_h), x = fmt_num(px(age)));
        age += 1.0;
    }
    let n_y = ((y_max - y_min) / y_step).round() as usize;
    for i in 0..=n_y {
        let v = y_min + i as f64 * y_step;
        let _ = writeln!(out, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, fmt_num(MARGIN_LEFT), fmt_num(MARGIN_LEFT + plot_w), y = fmt_num(py(v)));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt_num(MARGIN_LEFT),
        fmt_num(MARGIN_TOP),
        fmt_num(plot_w),
        fmt_num(plot_h)
    );
    let _ = writeln!(out, r#"<g text-anchor="middle">"#);
    let mut age = x_min;
    while age <= x_max + 1e-9 {
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, fmt_num(px(age)), fmt_num(MARGIN_TOP + plot_h + fs + 4.0), fmt_num(age));
        age += 1.0;
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}">Age (years)</text>"#, fmt_num(MARGIN_LEFT + plot_w / 2.0), fmt_num(style.height - 10.0));
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g text-anchor="end">"#);
    for i in 0..=n_y {
        let v = y_min + i as f64 * y_step;
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, fmt_num(MARGIN_LEFT - 6.0), fmt_num(py(v) + fs / 3.0), fmt_num(v));
    }
    let _ = writeln!(out, "</g>");
    if let Some(m) = chart.measure {
        let (x, y) = (fmt_num(14.0), fmt_num(MARGIN_TOP + plot_h / 2.0));
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="middle" transform="rotate(-90 {x} {y})">{m} ({})</text>"#, m.unit());
    }

    let points = |set: &ChartCurveSet, col: &[f64]| {
        set.ages
            .iter()
            .zip(col)
            .filter(|(_, v)| v.is_finite())
            .map(|(&t, &v)| format!("{},{}", fmt_num(px(t)), fmt_num(py(v))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    if let Some((overlay, colour)) = &style.overlay {
        let _ = writeln!(out, r#"<g fill="none" stroke="{}" stroke-width="1" stroke-dasharray="4 3">"#, escape(colour));
        for col in &overlay.values {
            let _ = writeln!(out, r#"<path d="M {}"/>"#, points(overlay, col).replace(' ', " L "));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r#"<g fill="none" stroke="{}" stroke-width="{}">"#, escape(&style.stroke), fmt_num(style.stroke_width));
    for (level, col) in chart.levels.iter().zip(&chart.values) {
        let _ = writeln!(out, r#"<polyline data-level="{}" points="{}"/>"#, level_label(level.0), points(chart, col));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g fill="{}">"#, escape(&style.stroke));
    for (level, col) in chart.levels.iter().zip(&chart.values) {
        if let Some(&v) = col.iter().rev().find(|v| v.is_finite()) {
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, fmt_num(MARGIN_LEFT + plot_w + 4.0), fmt_num(py(v) + fs / 3.0), level_label(level.0));
        }
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Level, Measure};

    fn chart(levels: &[f64], ages: &[f64]) -> ChartCurveSet {
        ChartCurveSet {
            measure: Some(Measure::Weight),
            sex: None,
            ages: ages.to_vec(),
            levels: levels.iter().map(|&l| Level(l)).collect(),
            values: levels.iter().map(|l| ages.iter().map(|t| 10.0 + t * 3.0 + l / 5.0).collect()).collect(),
        }
    }

    #[test]
    fn one_polyline_for_one_level() {
        let svg = render_svg(&chart(&[50.0], &[2.0, 3.0]), &SvgStyle::default());
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn nine_levels_labelled() {
        let levels = [3.0, 5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0, 97.0];
        let ages: Vec<f64> = (0..=72).map(|i| 2.0 + 0.25 * i as f64).collect();
        let c = chart(&levels, &ages);
        let svg = render_svg(&c, &SvgStyle::default());
        assert_eq!(svg.matches("<polyline").count(), 9);
        for l in levels {
            assert!(svg.contains(&format!(">{l}</text>")), "{l}");
        }
        for age in 2..=20 {
            assert!(svg.contains(&format!(">{age}</text>")));
        }
        assert_eq!(svg, render_svg(&c, &SvgStyle::default()));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_step(83.0, 8.0), 20.0);
        assert_eq!(nice_step(7.0, 8.0), 1.0);
        assert_eq!(nice_step(0.3, 8.0), 0.05);
        assert_eq!(fmt_num(12.5), "12.5");
        assert_eq!(fmt_num(-0.0001), "0");
    }

    #[test]
    fn overlay_and_title() {
        let c = chart(&[50.0], &[2.0, 3.0]);
        let style = SvgStyle { title: Some("a < b".into()), overlay: Some((c.clone(), "black".into())), ..SvgStyle::default() };
        let svg = render_svg(&c, &style);
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<path").count(), 1);
    }
}
