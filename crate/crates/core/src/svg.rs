//! Static SVG figures. Every writer also emits a CSV with the plotted numbers.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 150.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Optional `(lo, hi)` band drawn behind the line.
    pub band: Option<(Vec<f64>, Vec<f64>)>,
}

impl Series {
    pub fn line(name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Series { name: name.to_string(), x, y, band: None }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let d = lo.abs().max(1.0) * 0.05;
        return (lo - d, hi + d);
    }
    let d = 0.05 * (hi - lo);
    (lo - d, hi + d)
}

/// Multi-series line chart with optional shaded bands and a zero line.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.x.iter().copied());
    let (x0, x1) = range(xs);
    let ys = series.iter().flat_map(|s| {
        let band = s.band.iter().flat_map(|(l, h)| l.iter().chain(h.iter()).copied());
        s.y.iter().copied().chain(band).collect::<Vec<_>>()
    });
    let (y0, y1) = range(ys.chain(std::iter::once(0.0)));
    let px = |x: f64| PAD_L + (x - x0) / (x1 - x0) * (W - PAD_L - PAD_R);
    let py = |y: f64| H - PAD_B - (y - y0) / (y1 - y0) * (H - PAD_T - PAD_B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (bx0, bx1, by0, by1) = (PAD_L, W - PAD_R, PAD_T, H - PAD_B);
    let _ = writeln!(s, r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#, bx1 - bx0, by1 - by0);
    for k in 0..=4 {
        let yv = y0 + (y1 - y0) * k as f64 / 4.0;
        let xv = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#, bx0 - 4.0, py(yv) + 4.0, yv);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.1}</text>"#, px(xv), by1 + 16.0, xv);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{bx0}" x2="{bx1}" y1="{0:.1}" y2="{0:.1}" stroke="#999" stroke-dasharray="4 3"/>"##, py(0.0));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (bx0 + bx1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (by0 + by1) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        if let Some((lo, hi)) = &ser.band {
            let mut pts: Vec<String> = ser.x.iter().zip(hi).map(|(x, y)| format!("{:.1},{:.1}", px(*x), py(*y))).collect();
            pts.extend(ser.x.iter().zip(lo).rev().map(|(x, y)| format!("{:.1},{:.1}", px(*x), py(*y))));
            let _ = writeln!(s, r#"<polygon points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#, pts.join(" "));
        }
        let pts: Vec<String> = ser.x.iter().zip(&ser.y).map(|(x, y)| format!("{:.1},{:.1}", px(*x), py(*y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
        let ly = by0 + 14.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{0}" x2="{1}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, bx1 + 10.0, bx1 + 28.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx1 + 32.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn series_csv(series: &[Series]) -> csv::Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["series", "x", "y", "lo", "hi"])?;
    for ser in series {
        for (i, (x, y)) in ser.x.iter().zip(&ser.y).enumerate() {
            let (lo, hi) = match &ser.band {
                Some((l, h)) => (format!("{:.10}", l[i]), format!("{:.10}", h[i])),
                None => (String::new(), String::new()),
            };
            wtr.write_record([ser.name.clone(), format!("{x}"), format!("{y:.10}"), lo, hi])?;
        }
    }
    wtr.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

/// Write `<stem>.svg` and `<stem>.csv` into `dir`.
pub fn write_line_chart(dir: &Path, stem: &str, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> io::Result<()> {
    std::fs::write(dir.join(format!("{stem}.svg")), line_chart(title, x_label, y_label, series))?;
    let csv = series_csv(series).map_err(io::Error::other)?;
    std::fs::write(dir.join(format!("{stem}.csv")), csv)
}

/// Diverging heat map, green for positive and red for negative cells, with
/// optional text labels per cell.
pub fn heat_map(title: &str, rows: &[String], cols: &[String], values: &[Vec<f64>], labels: &[Vec<String>]) -> String {
    let cell_w = 64.0;
    let cell_h = 18.0;
    let left = 190.0;
    let top = 130.0;
    let width = left + cell_w * cols.len() as f64 + 20.0;
    let height = top + cell_h * rows.len() as f64 + 20.0;
    let vmax = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#);
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="10" y="18" font-size="14">{}</text>"#, escape(title));
    for (j, c) in cols.iter().enumerate() {
        let x = left + cell_w * (j as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="{x}" y="{0}" transform="rotate(-60 {x} {0})">{1}</text>"#, top - 6.0, escape(c));
    }
    for (i, r) in rows.iter().enumerate() {
        let y = top + cell_h * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, y + 13.0, escape(r));
        for j in 0..cols.len() {
            let v = values[i][j];
            let a = (v.abs() / vmax).clamp(0.0, 1.0);
            let (r0, g0, b0) = if v >= 0.0 { (44.0, 160.0, 44.0) } else { (214.0, 39.0, 40.0) };
            let mix = |c: f64| (255.0 + (c - 255.0) * a).round() as u8;
            let x = left + cell_w * j as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" fill="rgb({},{},{})" stroke="white"/>"#,
                mix(r0),
                mix(g0),
                mix(b0)
            );
            let label = labels.get(i).and_then(|l| l.get(j)).map(String::as_str).unwrap_or("");
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{:.2}{}</text>"#, x + cell_w / 2.0, y + 13.0, v, escape(label));
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let s = line_chart("a<b", "h", "%", &[Series::line("x", vec![0.0, 1.0], vec![1.0, -1.0])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        let hm = heat_map("t", &["r".into()], &["c".into()], &[vec![-0.5]], &[vec!["*".into()]]);
        assert!(hm.contains("-0.50*"));
    }
}
