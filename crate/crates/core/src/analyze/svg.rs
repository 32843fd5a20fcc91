//! Minimal SVG line-chart writer for the sweep outputs. Each series is
//! normalized to its own vertical range and drawn as a polyline with a
//! labeled axis box; no external plotting dependencies.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Write `series` (name, y-values) against shared x-values.
pub fn write_line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    xs: &[f64],
    series: &[(&str, Vec<f64>)],
) -> Result<()> {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        xml_escape(title)
    );

    let x0 = MARGIN;
    let x1 = W - MARGIN;
    let y0 = H - MARGIN;
    let y1 = MARGIN;
    let _ = writeln!(
        svg,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>",
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        H - 18.0,
        xml_escape(x_label)
    );

    let (xmin, xmax) = bounds(xs);
    let px = |x: f64| x0 + (x - xmin) / (xmax - xmin).max(1e-300) * (x1 - x0);

    for (si, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let (ymin, ymax) = bounds(ys);
        let py = |y: f64| y0 - (y - ymin) / (ymax - ymin).max(1e-300) * (y0 - y1);
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        for p in &pts {
            let mut it = p.split(',');
            let (cx, cy) = (it.next().unwrap(), it.next().unwrap());
            let _ = writeln!(svg, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = y1 + 16.0 + 18.0 * si as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            x0 + 8.0,
            x0 + 32.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{} [{:.3}, {:.3}]</text>",
            x0 + 38.0,
            ly + 4.0,
            xml_escape(name),
            ymin,
            ymax
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg)?;
    Ok(())
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_wellformed_svg() {
        let dir = std::env::temp_dir().join("hee_svg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("chart.svg");
        write_line_chart(
            &path,
            "sweep",
            "L",
            &[1.0, 2.0, 4.0, 8.0],
            &[("lambda_min", vec![0.1, 0.2, 0.3, 0.4]), ("log_det", vec![4.0, 3.0, 2.0, 1.0])],
        )
        .unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("<svg"));
        assert!(body.contains("polyline"));
        assert!(body.trim_end().ends_with("</svg>"));
    }
}
