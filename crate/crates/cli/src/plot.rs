//! Plain-text SVG rendering of curves and transforms. Output depends only
//! on the input values, so identical runs give identical files.

use ectmol::EctDescriptor;
use std::fmt::Write as _;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

fn values_attr(values: &[i32]) -> String {
    values.iter().map(i32::to_string).collect::<Vec<_>>().join(" ")
}

/// Step plot of one Euler characteristic curve: thresholds on x, χ on y.
pub fn ecc_svg(thresholds: &[f64], ecc: &[i32], title: &str) -> String {
    assert_eq!(thresholds.len(), ecc.len());
    let (t_min, t_max) = (thresholds[0], thresholds[thresholds.len() - 1]);
    let lo = ecc.iter().copied().min().unwrap_or(0).min(0);
    let hi = ecc.iter().copied().max().unwrap_or(0).max(lo + 1);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |t: f64| {
        if t_max > t_min {
            MARGIN + (t - t_min) / (t_max - t_min) * plot_w
        } else {
            MARGIN + plot_w / 2.0
        }
    };
    let y = |v: i32| HEIGHT - MARGIN - f64::from(v - lo) / f64::from(hi - lo) * plot_h;

    let mut path = format!("M{:.2},{:.2}", x(thresholds[0]), y(ecc[0]));
    for i in 1..ecc.len() {
        let _ = write!(path, " H{:.2} V{:.2}", x(thresholds[i]), y(ecc[i]));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>"#,
        b = HEIGHT - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">threshold</text>"#,
        WIDTH / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {:.2})">χ</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for v in [lo, hi] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v}</text>"#,
            MARGIN - 4.0,
            y(v) + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<path class="ecc" d="{path}" fill="none" stroke="black" stroke-width="2" data-values="{}"/>"#,
        values_attr(ecc)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Transform as a grid: one column per direction, one row per threshold
/// (lowest threshold at the bottom). Gray level is linear in χ, black at
/// the minimum and white at the maximum.
pub fn heatmap_svg(ect: &EctDescriptor, title: &str) -> String {
    let cell = 16.0;
    let (cols, rows) = (ect.directions, ect.thresholds);
    let w = cols as f64 * cell + 2.0 * MARGIN;
    let h = rows as f64 * cell + 2.0 * MARGIN;
    let lo = ect.values.iter().copied().min().unwrap_or(0);
    let hi = ect.values.iter().copied().max().unwrap_or(0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g class="ect" data-directions="{cols}" data-thresholds="{rows}" data-min="{lo}" data-max="{hi}">"#
    );
    for d in 0..cols {
        for t in 0..rows {
            let v = ect.get(d, t);
            let level = if hi > lo {
                (f64::from(v - lo) / f64::from(hi - lo) * 255.0).round() as u8
            } else {
                0
            };
            let x = MARGIN + d as f64 * cell;
            let y = MARGIN + (rows - 1 - t) as f64 * cell;
            let _ = writeln!(
                svg,
                r#"<rect class="cell" x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({level},{level},{level})" data-d="{d}" data-t="{t}" data-chi="{v}"/>"#
            );
        }
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">direction</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">threshold</text>"#,
        h / 2.0,
        h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
