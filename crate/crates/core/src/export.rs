//! Field dumps and static plots.

use std::fmt::Write as _;
use std::io::Write;

use crate::helmholtz::FieldMap;
use crate::Result;

/// Full grid including the zero boundary, one row per z index from z = 0,
/// preceded by a `#` header line carrying the side length and resolution.
pub fn write_field_csv<W: Write>(field: &FieldMap, mut out: W) -> Result<()> {
    let res = field.grid.resolution;
    let m = field.grid.interior();
    writeln!(out, "# side_m={:e},resolution={res}", field.grid.side)?;
    let mut line = String::new();
    for j in 0..res {
        line.clear();
        for i in 0..res {
            if i > 0 {
                line.push(',');
            }
            let interior = (1..=m).contains(&i) && (1..=m).contains(&j);
            let v = if interior {
                field.value(i - 1, j - 1)
            } else {
                0.0
            };
            write!(line, "{v:.6e}").expect("string write");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Binary 8-bit graymap, max-normalized, z increasing upwards.
pub fn write_field_pgm<W: Write>(field: &FieldMap, mut out: W) -> Result<()> {
    let res = field.grid.resolution;
    let m = field.grid.interior();
    let peak = field.values.iter().cloned().fold(0.0f64, f64::max);
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    write!(out, "P5\n{res} {res}\n255\n")?;
    let mut row = vec![0u8; res];
    for j in (0..res).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            let interior = (1..=m).contains(&i) && (1..=m).contains(&j);
            *px = if interior {
                (field.value(i - 1, j - 1) * scale)
                    .round()
                    .clamp(0.0, 255.0) as u8
            } else {
                0
            };
        }
        out.write_all(&row)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Horizontal reference line (value, label).
    pub reference: Option<(f64, String)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl LinePlot {
    /// Static SVG. Non-positive values are dropped on a log axis.
    pub fn to_svg(&self) -> String {
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let usable =
            |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0);
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(self.reference.iter().map(|(v, _)| (f64::NAN, *v)))
            .filter(|p| usable(&(0.0, p.1)))
            .collect();
        let xs = pts.iter().map(|p| p.0).filter(|x| x.is_finite());
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        let (y0, y1) = pts
            .iter()
            .map(|p| ty(p.1))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
                (a.min(y), b.max(y))
            });
        let (x0, x1) = if x0 < x1 {
            (x0, x1)
        } else {
            (x0 - 1.0, x0 + 1.0)
        };
        let (y0, y1) = if self.log_y {
            (y0.floor(), y1.ceil().max(y0.floor() + 1.0))
        } else if y0 < y1 {
            (y0, y1)
        } else {
            (y0 - 1.0, y0 + 1.0)
        };
        let (ml, mr, mt, mb) = MARGIN;
        let px = |x: f64| ml + (x - x0) / (x1 - x0) * (WIDTH - ml - mr);
        let py = |y: f64| HEIGHT - mb - (ty(y) - y0) / (y1 - y0) * (HEIGHT - mt - mb);

        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            w,
            r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - ml - mr,
            HEIGHT - mt - mb
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (ml + WIDTH - mr) / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            w,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (mt + HEIGHT - mb) / 2.0,
            escape(&self.y_label)
        );
        for k in 0..=4 {
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let _ = writeln!(
                w,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
                px(x),
                HEIGHT - mb + 16.0,
                format_tick(x)
            );
        }
        if self.log_y {
            for e in (y0 as i32)..=(y1 as i32) {
                let y = 10f64.powi(e);
                let _ = writeln!(
                    w,
                    r#"<text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#,
                    ml - 6.0,
                    py(y) + 4.0
                );
            }
        } else {
            for k in 0..=4 {
                let y = y0 + (y1 - y0) * k as f64 / 4.0;
                let _ = writeln!(
                    w,
                    r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                    ml - 6.0,
                    py(y) + 4.0,
                    format_tick(y)
                );
            }
        }
        if let Some((v, label)) = &self.reference {
            if usable(&(0.0, *v)) {
                let _ = writeln!(
                    w,
                    r#"<line x1="{ml}" x2="{0}" y1="{1:.1}" y2="{1:.1}" stroke="gray" stroke-dasharray="6 4"/>"#,
                    WIDTH - mr,
                    py(*v)
                );
                let _ = writeln!(
                    w,
                    r#"<text x="{}" y="{:.1}" text-anchor="end" fill="gray">{}</text>"#,
                    WIDTH - mr - 4.0,
                    py(*v) - 4.0,
                    escape(label)
                );
            }
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|p| usable(p))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                w,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
            let _ = writeln!(
                w,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                ml + 10.0,
                mt + 16.0 * (i + 1) as f64,
                escape(&series.label)
            );
        }
        let _ = writeln!(w, "</svg>");
        s
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{}", (v * 100.0).round() / 100.0)
    } else {
        format!("{v:.1e}")
    }
}
