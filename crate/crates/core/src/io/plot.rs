//! Self-contained SVG line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            style: Style::Line,
        }
    }

    pub fn with_style(mut self, style: Style) -> Self {
        self.style = style;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    /// Explicit x tick positions; decades (log) or a nice step (linear) otherwise.
    pub x_ticks: Option<Vec<f64>>,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>, x_scale: Scale) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale,
            x_ticks: None,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, series: Series) {
        self.series.push(series);
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn y_bounds(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if lo == hi {
        if hi > 0.0 {
            (0.0, hi)
        } else {
            (hi - 1.0, hi + 1.0)
        }
    } else {
        (lo, hi)
    };
    let step = nice_step(hi - lo);
    let snap = |q: f64, f: fn(f64) -> f64| {
        if (q - q.round()).abs() < 1e-9 {
            q.round()
        } else {
            f(q)
        }
    };
    let a = snap(lo / step, f64::floor) * step;
    let b = snap(hi / step, f64::ceil) * step;
    (a, b, step)
}

/// Compact engineering label: 10k, 2.5M, 64, 0.001.
pub fn si_label(x: f64) -> String {
    let ax = x.abs();
    let (v, suffix) = if ax >= 1e9 {
        (x / 1e9, "G")
    } else if ax >= 1e6 {
        (x / 1e6, "M")
    } else if ax >= 1e4 {
        (x / 1e3, "k")
    } else {
        (x, "")
    };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}{suffix}")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    scale: Scale,
}

impl Frame {
    fn tx(&self, x: f64) -> f64 {
        let (a, b, v) = match self.scale {
            Scale::Linear => (self.x0, self.x1, x),
            Scale::Log10 => (self.x0.log10(), self.x1.log10(), x.log10()),
        };
        let t = if b > a { (v - a) / (b - a) } else { 0.5 };
        LEFT + t * (WIDTH - LEFT - RIGHT)
    }

    fn ty(&self, y: f64) -> f64 {
        let t = (y - self.y0) / (self.y1 - self.y0);
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

/// Renders `chart` to an SVG document.
pub fn render_svg(chart: &Chart) -> Result<String> {
    if chart.series.is_empty() {
        return Err(Error::Plot("chart has no curves".into()));
    }
    let usable = |&(x, y): &(f64, f64)| {
        x.is_finite() && y.is_finite() && (chart.x_scale == Scale::Linear || x > 0.0)
    };
    let all: Vec<(f64, f64)> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(usable)
        .collect();
    if all.is_empty() {
        return Err(Error::Plot("no plottable points".into()));
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| {
        all.iter().map(pick).fold(init, f)
    };
    let x0 = fold(f64::min, f64::INFINITY, |p| p.0);
    let x1 = fold(f64::max, f64::NEG_INFINITY, |p| p.0);
    let (y0, y1, ystep) = y_bounds(
        fold(f64::min, f64::INFINITY, |p| p.1),
        fold(f64::max, f64::NEG_INFINITY, |p| p.1),
    );
    let frame = Frame {
        x0,
        x1,
        y0,
        y1,
        scale: chart.x_scale,
    };

    let mut svg = String::new();
    let px = |v: f64| format!("{v:.2}");
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        px((LEFT + WIDTH - RIGHT) / 2.0),
        escape(&chart.title)
    )
    .unwrap();

    // Axes frame
    let (left, right) = (LEFT, WIDTH - RIGHT);
    let (top, bottom) = (TOP, HEIGHT - BOTTOM);
    writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px(left),
        px(top),
        px(right - left),
        px(bottom - top)
    )
    .unwrap();

    // Y ticks
    let n_y = ((y1 - y0) / ystep).round() as i64;
    for i in 0..=n_y {
        let y = y0 + i as f64 * ystep;
        let py = frame.ty(y);
        writeln!(
            svg,
            r##"<line x1="{l}" y1="{p}" x2="{r}" y2="{p}" stroke="#dddddd"/><text x="{t}" y="{ty}" text-anchor="end">{label}</text>"##,
            l = px(left),
            r = px(right),
            p = px(py),
            t = px(left - 6.0),
            ty = px(py + 4.0),
            label = format!("{:.*}", decimals(ystep), y)
        )
        .unwrap();
    }

    // X ticks
    let ticks: Vec<f64> = match (&chart.x_ticks, chart.x_scale) {
        (Some(t), _) => t.iter().copied().filter(|&t| t >= x0 && t <= x1).collect(),
        (None, Scale::Log10) => {
            let a = x0.log10().ceil() as i32;
            let b = x1.log10().floor() as i32;
            (a..=b).map(|e| 10f64.powi(e)).collect()
        }
        (None, Scale::Linear) => {
            let step = nice_step(x1 - x0);
            let first = (x0 / step).ceil() as i64;
            let last = (x1 / step).floor() as i64;
            (first..=last).map(|i| i as f64 * step).collect()
        }
    };
    for t in ticks {
        let p = frame.tx(t);
        writeln!(
            svg,
            r##"<line x1="{p}" y1="{t0}" x2="{p}" y2="{b}" stroke="#dddddd"/><text x="{p}" y="{ly}" text-anchor="middle">{label}</text>"##,
            p = px(p),
            t0 = px(top),
            b = px(bottom),
            ly = px(bottom + 16.0),
            label = escape(&si_label(t))
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        px((left + right) / 2.0),
        px(HEIGHT - 14.0),
        escape(&chart.x_label)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(&chart.y_label),
        y = px((top + bottom) / 2.0)
    )
    .unwrap();

    // Curves
    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(usable)
            .map(|(x, y)| (frame.tx(x), frame.ty(y)))
            .collect();
        match s.style {
            Style::Line | Style::Dashed => {
                let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", px(x), px(y))).collect();
                let dash = if s.style == Style::Dashed {
                    r#" stroke-dasharray="6 4""#
                } else {
                    ""
                };
                writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    coords.join(" ")
                )
                .unwrap();
            }
            Style::Markers => {
                let mut g = format!(r#"<g fill="{color}">"#);
                for (x, y) in pts {
                    write!(g, r#"<circle cx="{}" cy="{}" r="3"/>"#, px(x), px(y)).unwrap();
                }
                g.push_str("</g>");
                writeln!(svg, "{g}").unwrap();
            }
        }

        // Legend
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let sample = match s.style {
            Style::Markers => format!(r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, px(lx + 11.0), px(ly)),
            _ => format!(
                r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#,
                px(lx),
                px(lx + 22.0),
                y = px(ly)
            ),
        };
        writeln!(
            svg,
            r#"<g class="legend">{sample}<text x="{}" y="{}">{}</text></g>"#,
            px(lx + 28.0),
            px(ly + 4.0),
            escape(&s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn decimals(step: f64) -> usize {
    if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    }
}

pub fn render_plot(chart: &Chart, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(chart)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(series: Vec<Series>) -> Chart {
        let mut c = Chart::new("t", "R_on (ohm)", "k'/k", Scale::Log10);
        c.series = series;
        c
    }

    #[test]
    fn flat_curve_sits_on_top_edge() {
        let svg = render_svg(&chart(vec![Series::line("ideal", vec![(1e4, 1.0), (1e8, 1.0)])])).unwrap();
        let top = format!("{:.2}", TOP);
        let expected = format!(
            r#"points="{:.2},{top} {:.2},{top}""#,
            LEFT,
            WIDTH - RIGHT
        );
        assert!(svg.contains(&expected), "{svg}");
    }

    #[test]
    fn one_polyline_per_curve_and_legend() {
        let s = |l: &str| Series::line(l, vec![(1e4, 0.5), (1e5, 0.8), (1e6, 0.6)]);
        let svg = render_svg(&chart(vec![s("baseline"), s("\u{2212}R_T"), s("a<b")])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 3);
        assert!(svg.contains("\u{2212}R_T"));
        assert!(svg.contains("a&lt;b"));
        for t in ["10k", "100k", "1M"] {
            assert!(svg.contains(&format!(">{t}</text>")), "{t}");
        }
    }

    #[test]
    fn markers_style() {
        let svg = render_svg(&chart(vec![
            Series::line("sim", vec![(1e4, 0.5), (1e5, 0.8)]).with_style(Style::Markers)
        ]))
        .unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn empty_is_error() {
        assert!(render_svg(&chart(vec![])).is_err());
        assert!(render_svg(&chart(vec![Series::line("x", vec![(-1.0, 0.5)])])).is_err());
    }

    #[test]
    fn y_axis_bounds() {
        assert_eq!(y_bounds(1.0, 1.0).0, 0.0);
        assert_eq!(y_bounds(1.0, 1.0).1, 1.0);
        let (a, b, _) = y_bounds(0.47, 0.99);
        assert!(a <= 0.47 && b >= 0.99 && b <= 1.0 + 1e-12);
    }

    #[test]
    fn si_labels() {
        assert_eq!(si_label(10e3), "10k");
        assert_eq!(si_label(2.5e6), "2.5M");
        assert_eq!(si_label(1024.0), "1024");
        assert_eq!(si_label(1e9), "1G");
    }
}
