use std::fmt::Write;

use kgbench::stats::{describe, quantile_sorted};

const WIDTH_PER_BOX: f64 = 90.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;

/// Five-number box with Tukey whiskers at 1.5 IQR.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let s = describe(values)?;
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let (lo, hi) = (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1));
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
    Some(BoxStats {
        q1,
        median: s.median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: sorted.into_iter().filter(|v| !(lo..=hi).contains(v)).collect(),
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders one box per group. The raw values are embedded as a CSV
/// comment so the figure can be checked against its data.
pub fn boxplot_svg(title: &str, metric: &str, groups: &[(String, Vec<f64>)]) -> String {
    let all = groups
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite());
    let (lo, hi) = all.fold((0.0f64, 1.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y = |v: f64| MARGIN_TOP + plot_h * (hi - v) / (hi - lo);
    let width = MARGIN_LEFT + MARGIN_RIGHT + WIDTH_PER_BOX * groups.len().max(1) as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{HEIGHT}" viewBox="0 0 {width} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<!-- data\ngroup,{}", metric.replace("--", "- -"));
    for (name, values) in groups {
        for v in values {
            let _ = writeln!(out, "{},{v}", name.replace("--", "- -").replace(',', ";"));
        }
    }
    let _ = writeln!(out, "-->");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    // Axis with five ticks.
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{}" stroke="black"/>"#,
        MARGIN_TOP + plot_h
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            MARGIN_LEFT,
            width - MARGIN_RIGHT,
            MARGIN_LEFT - 6.0,
            y(v) + 4.0,
            yy = y(v),
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(metric)
    );

    for (i, (name, values)) in groups.iter().enumerate() {
        let cx = MARGIN_LEFT + WIDTH_PER_BOX * (i as f64 + 0.5);
        let half = WIDTH_PER_BOX * 0.3;
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="end" transform="rotate(-30 {cx:.2} {:.2})">{}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            escape(name)
        );
        let Some(b) = box_stats(values) else { continue };
        let _ = writeln!(out, r#"<g class="box" data-group="{}">"#, escape(name));
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.whisker_high),
            y(b.q3)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.q1),
            y(b.whisker_low)
        );
        for w in [b.whisker_low, b.whisker_high] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                y(w),
                cx + half / 2.0,
                y(w)
            );
        }
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(b.median),
            cx + half,
            y(b.median)
        );
        for o in &b.outliers {
            let _ = writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#,
                y(*o)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whiskers_stop_at_last_point_inside_fence() {
        let b = box_stats(&[0.0, 0.5, 0.5, 0.5, 0.5, 0.6, 10.0]).unwrap();
        assert_eq!(b.median, 0.5);
        assert_eq!(b.outliers, vec![0.0, 10.0]);
        assert_eq!((b.whisker_low, b.whisker_high), (0.5, 0.6));
    }

    #[test]
    fn data_comment_and_boxes() {
        let svg = boxplot_svg(
            "t2s <demo>",
            "max_combined",
            &[
                ("a".into(), vec![0.1, 0.9]),
                ("b--c".into(), vec![1.0]),
                ("empty".into(), vec![]),
            ],
        );
        assert!(svg.contains("<!-- data\ngroup,max_combined\na,0.1\na,0.9\nb- -c,1\n-->"));
        assert_eq!(svg.matches(r#"<g class="box""#).count(), 2);
        assert!(svg.contains("t2s &lt;demo&gt;"));
        let comment = &svg[svg.find("<!--").unwrap() + 4..svg.find("-->").unwrap()];
        assert!(!comment.contains("--"));
    }
}
