use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Shortest round-trip text for `x`; exponent form outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `out.csv` -> `out.csv.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Line chart of `series` against `x` in a fixed 800x500 view box.
pub fn line_chart(title: &str, x_label: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let finite = |v: &&f64| v.is_finite();
    let (x_min, x_max) = bounds(x.iter().filter(finite).copied());
    let (y_min, y_max) = bounds(series.iter().flat_map(|(_, ys)| ys.iter().filter(finite).copied()));
    let sx = |v: f64| MARGIN + (v - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    if y_min < 0.0 && y_max > 0.0 {
        let z = sy(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{z:.2}" x2="{x1}" y2="{z:.2}" stroke="#999" stroke-dasharray="4 4"/>"##
        );
    }
    for (value, anchor, px, py) in [
        (x_min, "start", x0, y0 + 20.0),
        (x_max, "end", x1, y0 + 20.0),
    ] {
        let _ = writeln!(
            svg,
            r#"<text x="{px}" y="{py}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
            short(value)
        );
    }
    for (value, py) in [(y_min, y0), (y_max, y1 + 4.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{py}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
            x0 - 6.0,
            short(value)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| format!("{:.2},{:.2}", sx(*a), sy(*b)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            x1 - 110.0,
            x1 - 90.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            x1 - 85.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn short(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, -0.101_123, 1e-7, 3.5e20, 2.0f64.sqrt(), f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["t".into(), "x".into()]);
        t.push(vec![0.0, 0.5]);
        t.push(vec![1.0, -2.0]);
        assert_eq!(t.to_csv(), "t,x\n0,0.5\n1,-2\n");
        assert_eq!(t.column("x").unwrap(), vec![0.5, -2.0]);
    }

    #[test]
    fn chart_has_one_polyline_per_series() {
        let x = [0.0, 1.0, 2.0];
        let svg = line_chart(
            "a < b",
            "t",
            &x,
            &[("s1".into(), vec![0.0, 1.0, 0.5]), ("s2".into(), vec![1.0, 1.0, 1.0])],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"viewBox="0 0 800 500""#));
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("dir/out.csv")), PathBuf::from("dir/out.csv.meta.json"));
    }
}
