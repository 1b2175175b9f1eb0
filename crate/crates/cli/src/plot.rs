//! A dependency-free SVG line plot of peak age against arrival rate.

use std::fmt::Write as _;

use timely_coding::schemes::SchemeKind;

use crate::sweep::SweepRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// The y axis is clipped at this multiple of the smallest plotted value so
/// that points near the stability boundary do not flatten the curves.
const Y_CLIP_FACTOR: f64 = 4.0;

fn color(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::Ideal => "#1f77b4",
        SchemeKind::Naive => "#d62728",
        SchemeKind::Predictive => "#2ca02c",
        SchemeKind::Adaptive => "#9467bd",
    }
}

/// "Nice" tick spacing giving roughly `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Renders empirical (solid, with markers) and analytic (dashed) peak age
/// per scheme. Diverged points are left out of the empirical curves.
pub fn render_sweep_svg(rows: &[SweepRow]) -> String {
    let mut schemes: Vec<SchemeKind> = Vec::new();
    for r in rows {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    let empirical = |k: SchemeKind| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.scheme == k && !r.diverged)
            .filter_map(|r| r.empirical_paoi.filter(|v| v.is_finite()).map(|v| (r.q, v)))
            .collect()
    };
    let analytic = |k: SchemeKind| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.scheme == k)
            .filter_map(|r| r.analytic_paoi.filter(|v| v.is_finite()).map(|v| (r.q, v)))
            .collect()
    };
    let all: Vec<(f64, f64)> =
        schemes.iter().flat_map(|&k| empirical(k).into_iter().chain(analytic(k))).collect();

    let x_min = rows.iter().map(|r| r.q).fold(f64::INFINITY, f64::min);
    let x_max = rows.iter().map(|r| r.q).fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if x_min < x_max { (x_min, x_max) } else { (x_min - 0.01, x_min + 0.01) };
    let y_lo = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_hi = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (y_min, y_max) =
        if all.is_empty() { (0.0, 1.0) } else { (0.0, y_hi.min(Y_CLIP_FACTOR * y_lo).max(y_lo + 1.0)) };

    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| MARGIN_TOP + ph - (y.min(y_max) - y_min) / (y_max - y_min) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    let xs = tick_step(x_max - x_min, 6.0);
    let mut x = (x_min / xs).ceil() * xs;
    while x <= x_max + 1e-12 {
        let px = sx(x);
        writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{MARGIN_TOP}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 18.0,
            (x * 1e6).round() / 1e6
        )
        .unwrap();
        x += xs;
    }
    let ys = tick_step(y_max - y_min, 6.0);
    let mut y = (y_min / ys).ceil() * ys;
    while y <= y_max + 1e-9 {
        let py = sy(y);
        writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            py + 4.0,
            (y * 1e6).round() / 1e6
        )
        .unwrap();
        y += ys;
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">arrival probability q</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">average peak age</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0
    )
    .unwrap();

    let polyline = |pts: &[(f64, f64)], color: &str, dashed: bool| -> String {
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        format!(
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            coords.join(" ")
        )
    };
    for (i, &k) in schemes.iter().enumerate() {
        let c = color(k);
        let a = analytic(k);
        if a.len() >= 2 {
            writeln!(s, "{}", polyline(&a, c, true)).unwrap();
        }
        let e = empirical(k);
        if !e.is_empty() {
            writeln!(s, "{}", polyline(&e, c, false)).unwrap();
            for &(x, y) in e.iter().filter(|p| p.1 <= y_max) {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#, sx(x), sy(y)).unwrap();
            }
        }
        let ly = MARGIN_TOP + 16.0 + 20.0 * i as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{k}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        )
        .unwrap();
    }
    let ly = MARGIN_TOP + 16.0 + 20.0 * schemes.len() as f64 + 10.0;
    writeln!(
        s,
        r#"<text x="{:.2}" y="{ly:.2}" font-size="10">dashed: closed form</text>"#,
        MARGIN_LEFT + pw + 12.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
