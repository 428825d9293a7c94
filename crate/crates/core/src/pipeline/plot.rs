//! Self-contained SVG figures. Every coordinate is printed with fixed
//! precision so equal inputs give byte-identical files.

use std::fmt::Write;

use crate::estimation::{OddsRatio, ProbabilityCurve};

const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="Helvetica, Arial, sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round numbers for an axis over `[lo, hi]`, about `target` of them.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Forest plot: one row per effect, point at the odds ratio and whiskers
/// over the 95% interval, on a log-scaled axis with a reference line at 1.
pub fn forest_plot(rows: &[OddsRatio], title: &str) -> String {
    let left = 190.0;
    let right = 40.0;
    let top = 50.0;
    let row_h = 28.0;
    let plot_w = 420.0;
    let height = top + row_h * rows.len().max(1) as f64 + 60.0;
    let width = left + plot_w + right;
    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    let finite: Vec<f64> = rows
        .iter()
        .flat_map(|r| [r.ci_low, r.ci_high, r.odds_ratio])
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let lo = finite.iter().copied().fold(1.0, f64::min).ln();
    let hi = finite.iter().copied().fold(1.0, f64::max).ln();
    let pad = ((hi - lo) * 0.08).max(0.05);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |v: f64| left + (v.max(1e-300).ln().clamp(lo, hi) - lo) / (hi - lo) * plot_w;
    let bottom = top + row_h * rows.len().max(1) as f64;

    let _ = writeln!(
        out,
        r#"<line x1="{left:.1}" y1="{bottom:.1}" x2="{:.1}" y2="{bottom:.1}" stroke="black"/>"#,
        left + plot_w
    );
    let tick_ln = nice_ticks(lo / std::f64::consts::LN_2, hi / std::f64::consts::LN_2, 6);
    for t in tick_ln {
        let v = 2f64.powf(t);
        let tx = x(v);
        let _ = writeln!(
            out,
            r#"<line x1="{tx:.1}" y1="{bottom:.1}" x2="{tx:.1}" y2="{:.1}" stroke="black"/>"#,
            bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            fmt_tick(v)
        );
    }
    let one = x(1.0);
    let _ = writeln!(
        out,
        r##"<line x1="{one:.1}" y1="{top:.1}" x2="{one:.1}" y2="{bottom:.1}" stroke="#888888" stroke-dasharray="4 3"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Odds ratio (log scale)</text>"#,
        left + plot_w / 2.0,
        bottom + 38.0
    );
    for (i, r) in rows.iter().enumerate() {
        let y = top + row_h * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 10.0,
            y + 4.0,
            escape(&r.name)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="1.5"/>"#,
            x(r.ci_low),
            x(r.ci_high)
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{y:.1}" r="4" fill="{}"/>"#,
            x(r.odds_ratio),
            PALETTE[0]
        );
    }
    if rows.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">no effects to display</text>"#,
            left + plot_w / 2.0,
            top + 18.0
        );
    }
    out.push_str("</svg>\n");
    out
}

struct Panel<'a> {
    title: &'a str,
    y_label: &'a str,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

fn panel(out: &mut String, p: &Panel, x0: f64, y0: f64, w: f64, h: f64, x_label: &str) {
    let xs: Vec<f64> = p
        .series
        .iter()
        .flat_map(|s| s.1.iter().map(|q| q.0))
        .collect();
    let ys: Vec<f64> = p
        .series
        .iter()
        .flat_map(|s| s.1.iter().map(|q| q.1))
        .collect();
    let xmin = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymax = ys.iter().copied().fold(0.0, f64::max).max(1e-6) * 1.05;
    let (xmin, xmax) = if xmin < xmax {
        (xmin, xmax)
    } else {
        (xmin - 1.0, xmin + 1.0)
    };
    let px = |v: f64| x0 + (v - xmin) / (xmax - xmin) * w;
    let py = |v: f64| y0 + h - v / ymax * h;

    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
        x0 + w / 2.0,
        y0 - 12.0,
        escape(p.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.1}" y="{y0:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(xmin, xmax, 6) {
        let tx = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{tx:.1}" y1="{:.1}" x2="{tx:.1}" y2="{:.1}" stroke="black"/>"#,
            y0 + h,
            y0 + h + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + h + 18.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(0.0, ymax, 5) {
        let ty = py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ty:.1}" x2="{x0:.1}" y2="{ty:.1}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            ty + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        x0 + w / 2.0,
        y0 + h + 36.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 - 44.0,
        y0 + h / 2.0,
        x0 - 44.0,
        y0 + h / 2.0,
        escape(p.y_label)
    );
    for (k, (name, pts)) in p.series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            path.join(" ")
        );
        let ly = y0 + 14.0 + 16.0 * k as f64;
        let lx = x0 + w + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(name)
        );
    }
}

/// Probability curves over the Load grid: one line per response category
/// for the ordered model, then the top-box probability of the binary
/// models side by side when supplied.
pub fn probability_plot(
    ordered: Option<&ProbabilityCurve>,
    binary: &[(&str, &ProbabilityCurve)],
    x_label: &str,
) -> String {
    let panels_n = usize::from(ordered.is_some()) + usize::from(!binary.is_empty());
    let (w, h) = (420.0, 280.0);
    let width = 40.0 + (w + 190.0) * panels_n.max(1) as f64;
    let height = h + 110.0;
    let mut out = String::new();
    header(&mut out, width, height);
    let mut x0 = 70.0;
    if let Some(c) = ordered {
        let series = (0..c.probs.first().map_or(0, Vec::len))
            .map(|j| {
                (
                    format!("Efficiency {}", j + 1),
                    c.grid
                        .iter()
                        .zip(&c.probs)
                        .map(|(&g, p)| (g, p[j]))
                        .collect(),
                )
            })
            .collect();
        panel(
            &mut out,
            &Panel {
                title: "Ordered model",
                y_label: "Predicted probability",
                series,
            },
            x0,
            50.0,
            w,
            h,
            x_label,
        );
        x0 += w + 190.0;
    }
    if !binary.is_empty() {
        let series = binary
            .iter()
            .map(|(name, c)| {
                (
                    name.to_string(),
                    c.grid.iter().copied().zip(c.top()).collect(),
                )
            })
            .collect();
        panel(
            &mut out,
            &Panel {
                title: "Binary efficiency",
                y_label: "P(top efficiency)",
                series,
            },
            x0,
            50.0,
            w,
            h,
            x_label,
        );
    }
    if panels_n == 0 {
        let _ = writeln!(
            out,
            r#"<text x="20" y="40">no fitted model to display</text>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::ModelKind;

    #[test]
    fn ticks_are_round() {
        assert_eq!(
            nice_ticks(0.0, 1.0, 5),
            vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
        );
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(2.0), "2");
    }

    #[test]
    fn forest_plot_is_well_formed() {
        let rows = vec![
            OddsRatio {
                name: "Knowledge: Complex".into(),
                odds_ratio: 2.64,
                ci_low: 2.15,
                ci_high: 3.24,
            },
            OddsRatio {
                name: "A & B".into(),
                odds_ratio: 0.6,
                ci_low: 0.35,
                ci_high: 1.02,
            },
        ];
        let svg = forest_plot(&rows, "Odds ratios");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("A &amp; B"));
        assert_eq!(svg, forest_plot(&rows, "Odds ratios"));
    }

    #[test]
    fn probability_plot_has_one_line_per_category() {
        let c = ProbabilityCurve {
            kind: ModelKind::OrderedLogit,
            column: "Load".into(),
            grid: vec![0.0, 10.0, 20.0],
            probs: vec![
                vec![0.2, 0.3, 0.5],
                vec![0.3, 0.3, 0.4],
                vec![0.4, 0.3, 0.3],
            ],
        };
        let svg = probability_plot(Some(&c), &[], "Load");
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
