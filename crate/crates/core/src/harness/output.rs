//! CSV and SVG rendering. All functions return strings; callers decide
//! where they go.

use std::fmt::Write;

use crate::analysis::FieldSample;
use crate::dynamics::Trajectory;
use crate::model::{Group, ModelParams};

/// Shortest `%g`-style rendering with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Column names `R_0..R_L`, then `Q_*` and `U_*` when those groups exist.
pub fn state_columns(params: &ModelParams) -> Vec<String> {
    params
        .variant
        .groups()
        .iter()
        .flat_map(|g| (0..=params.steps()).map(move |k| format!("{}_{k}", g.symbol())))
        .collect()
}

pub fn trajectory_csv(traj: &Trajectory, params: &ModelParams) -> String {
    let mut out = String::from("t,");
    out.push_str(&state_columns(params).join(","));
    out.push_str(",pc,conservation_error\n");
    for i in 0..traj.len() {
        let mut row = vec![fmt_num(traj.times[i])];
        row.extend(traj.states[i].as_slice().iter().map(|&x| fmt_num(x)));
        row.push(fmt_num(traj.pc[i]));
        row.push(fmt_num(traj.conservation_error[i]));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Two-column `key,value` table.
pub fn summary_csv(rows: &[(String, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut out = String::from("R0,R2,dR0,dR2\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(s.r0),
            fmt_num(s.r2),
            fmt_num(s.dr0),
            fmt_num(s.dr2)
        );
    }
    out
}

/// Blue at 0 to yellow at 1 in 256 steps; values outside are clamped.
pub fn ramp_color(v: f64) -> (u8, u8, u8) {
    let i = if v.is_nan() {
        0
    } else {
        (v.clamp(0.0, 1.0) * 255.0).round() as u8
    };
    (i, i, 255 - i)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Heatmap with one cell per `(axis1, axis2)` pair. `cells[i][j]` holds the
/// value at `axis1[i]`, `axis2[j]` and its CSV rendering, which is repeated
/// verbatim in the cell's `data-value` attribute.
pub fn heatmap_svg(
    title: &str,
    axis1: (&str, &[f64]),
    axis2: (&str, &[f64]),
    cells: &[Vec<(f64, String)>],
) -> String {
    let cell = 24.0;
    let (left, top) = (70.0, 40.0);
    let (n1, n2) = (axis1.1.len(), axis2.1.len());
    let width = left + n1 as f64 * cell + 90.0;
    let height = top + n2 as f64 * cell + 60.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">{}</text>"#,
        escape(title)
    );
    // axis1 runs left to right, axis2 bottom to top
    for (i, row) in cells.iter().enumerate() {
        for (j, (v, text)) in row.iter().enumerate() {
            let (r, g, b) = ramp_color(*v);
            let x = left + i as f64 * cell;
            let y = top + (n2 - 1 - j) as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({r},{g},{b})" data-{}="{}" data-{}="{}" data-value="{text}"/>"#,
                axis1.0,
                fmt_num(axis1.1[i]),
                axis2.0,
                fmt_num(axis2.1[j]),
            );
        }
    }
    let bottom = top + n2 as f64 * cell;
    for (i, v) in axis1.1.iter().enumerate().step_by(n1.div_ceil(6).max(1)) {
        let x = left + (i as f64 + 0.5) * cell;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            bottom + 14.0,
            fmt_num(*v)
        );
    }
    for (j, v) in axis2.1.iter().enumerate().step_by(n2.div_ceil(6).max(1)) {
        let y = top + (n2 - 1 - j) as f64 * cell + cell * 0.5 + 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            left - 6.0,
            fmt_num(*v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + n1 as f64 * cell / 2.0,
        bottom + 34.0,
        escape(axis1.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        top + n2 as f64 * cell / 2.0,
        top + n2 as f64 * cell / 2.0,
        escape(axis2.0)
    );
    // colour bar
    let bar_x = left + n1 as f64 * cell + 20.0;
    let bar_h = n2 as f64 * cell;
    for step in 0..64 {
        let v = step as f64 / 63.0;
        let (r, g, b) = ramp_color(v);
        let y = top + bar_h * (1.0 - (step + 1) as f64 / 64.0);
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{y:.3}" width="14" height="{:.3}" fill="rgb({r},{g},{b})"/>"#,
            bar_h / 64.0 + 0.5
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">1</text>"#,
        bar_x + 18.0,
        top + 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">0</text>"#,
        bar_x + 18.0,
        top + bar_h
    );
    s.push_str("</svg>\n");
    s
}

/// Arrows of the reduced three-level field over the `(R0, R2)` simplex.
pub fn field_svg(title: &str, samples: &[FieldSample]) -> String {
    let size = 400.0;
    let (left, top) = (50.0, 40.0);
    let to_x = |r0: f64| left + r0 * size;
    let to_y = |r2: f64| top + (1.0 - r2) * size;
    let n = samples.len().max(1) as f64;
    // roughly sqrt(2 * samples) lattice points per side
    let spacing = size / ((2.0 * n).sqrt() - 1.0).max(1.0);
    let longest = samples
        .iter()
        .map(|s| s.dr0.hypot(s.dr2))
        .fold(0.0, f64::max);
    let scale = if longest > 0.0 {
        0.9 * spacing / longest
    } else {
        0.0
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        left + size + 30.0,
        top + size + 50.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    s.push_str(
        r#"<defs><marker id="head" viewBox="0 0 6 6" refX="5" refY="3" markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L6,3 L0,6 z"/></marker></defs>"#,
    );
    s.push('\n');
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<path d="M{},{} L{},{} L{},{} z" fill="none" stroke="#999"/>"##,
        to_x(0.0),
        to_y(0.0),
        to_x(1.0),
        to_y(0.0),
        to_x(0.0),
        to_y(1.0)
    );
    for p in samples {
        let (x, y) = (to_x(p.r0), to_y(p.r2));
        if p.dr0 == 0.0 && p.dr2 == 0.0 {
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2.5" fill="red"/>"#);
            continue;
        }
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{y:.3}" x2="{:.3}" y2="{:.3}" stroke="black" marker-end="url(#head)"/>"#,
            x + p.dr0 * scale,
            y - p.dr2 * scale
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">R0</text>"#,
        to_x(0.5),
        to_y(0.0) + 30.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">R2</text>"#,
        left - 8.0,
        to_y(0.5)
    );
    s.push_str("</svg>\n");
    s
}

/// Line chart of every level's mass over time, one polyline per column.
pub fn trajectory_svg(title: &str, traj: &Trajectory, params: &ModelParams) -> String {
    let (w, h) = (560.0, 320.0);
    let (left, top) = (50.0, 40.0);
    let t_max = traj
        .times
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let columns = state_columns(params);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        left + w + 90.0,
        top + h + 40.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="20" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#999"/>"##
    );
    let levels = params.grid.len();
    for (c, name) in columns.iter().enumerate() {
        let k = c % levels;
        let (r, g, b) = ramp_color(k as f64 / (levels - 1).max(1) as f64);
        let dash = if c / levels == Group::Regular.index() {
            ""
        } else {
            r#" stroke-dasharray="4 2""#
        };
        let points: Vec<String> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, st)| {
                let x = left + t / t_max * w;
                let y = top + (1.0 - st.as_slice()[c]) * h;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="rgb({r},{g},{b})"{dash} points="{}"><title>{name}</title></polyline>"#,
            points.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        left + w / 2.0,
        top + h + 28.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">0</text>"#,
        left - 4.0,
        top + h
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">1</text>"#,
        left - 4.0,
        top + 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">{}</text>"#,
        left + w - 10.0,
        top + h + 14.0,
        fmt_num(t_max)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.5296), "0.5296");
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 100.0), "66.6666666667");
        assert_eq!(fmt_num(1.5e-9), "1.5e-9");
        assert_eq!(fmt_num(1e15), "1e15");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(0.0), (0, 0, 255));
        assert_eq!(ramp_color(1.0), (255, 255, 0));
        assert_eq!(ramp_color(2.0), (255, 255, 0));
    }

    #[test]
    fn heatmap_cells_carry_csv_text() {
        let cells = vec![vec![(0.5, "0.5".to_string()), (1.0, "1".to_string())]];
        let svg = heatmap_svg("t", ("alpha", &[0.0]), ("sigma", &[0.0, 1.0]), &cells);
        assert_eq!(svg.matches("data-value=").count(), 2);
        assert!(svg.contains(r#"data-value="0.5""#));
        assert!(svg.contains("rgb(128,128,127)"));
    }
}
