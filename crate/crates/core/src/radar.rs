//! Self-contained radar chart SVG output.
//!
//! Output is a pure function of the input: coordinates are printed with two
//! decimals, series keep their input order, and nothing time-dependent is
//! written.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 600.0;
const CX: f64 = 300.0;
const CY: f64 = 310.0;
/// Radius of the outer (100%) ring.
pub const OUTER_RADIUS: f64 = 200.0;
const RINGS: usize = 4;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub name: String,
    /// Percentages, one per axis.
    pub values: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadarError {
    #[error("a radar chart needs at least 3 axes, got {0}")]
    TooFewAxes(usize),
    #[error("series {series} has {got} values for {expected} axes")]
    LengthMismatch { series: String, expected: usize, got: usize },
    #[error("series {series} value {value} on axis {axis} exceeds 100")]
    AboveMaximum { series: String, axis: String, value: f64 },
    #[error("series {series} has a non-finite value on axis {axis}")]
    NotFinite { series: String, axis: String },
    #[error("axis minimum {0} must lie in [0, 100)")]
    InvalidAxisMin(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampWarning {
    pub series: String,
    pub axis: String,
    pub value: f64,
    pub clamped_to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarChart {
    pub svg: String,
    pub warnings: Vec<ClampWarning>,
}

/// Chart builder; [`radar_svg`] covers the common case.
#[derive(Debug, Clone)]
pub struct Radar<'a> {
    axes: &'a [&'a str],
    axis_min: f64,
    title: Option<&'a str>,
    comment: Option<&'a str>,
}

impl<'a> Radar<'a> {
    pub fn new(axes: &'a [&'a str], axis_min: f64) -> Self {
        Self { axes, axis_min, title: None, comment: None }
    }

    pub fn title(mut self, title: &'a str) -> Self {
        self.title = Some(title);
        self
    }

    /// Embeds `comment` as an XML comment after the root element.
    pub fn comment(mut self, comment: &'a str) -> Self {
        self.comment = Some(comment);
        self
    }

    fn angle(&self, axis: usize) -> f64 {
        -PI / 2.0 + 2.0 * PI * axis as f64 / self.axes.len() as f64
    }

    fn point(&self, axis: usize, radius: f64) -> (f64, f64) {
        let a = self.angle(axis);
        (CX + radius * libm::cos(a), CY + radius * libm::sin(a))
    }

    fn radius_of(&self, value: f64) -> f64 {
        OUTER_RADIUS * (value - self.axis_min) / (100.0 - self.axis_min)
    }

    pub fn render(&self, series: &[RadarSeries]) -> Result<RadarChart, RadarError> {
        let n = self.axes.len();
        if n < 3 {
            return Err(RadarError::TooFewAxes(n));
        }
        if !(0.0..100.0).contains(&self.axis_min) {
            return Err(RadarError::InvalidAxisMin(self.axis_min));
        }
        let mut warnings = Vec::new();
        let mut clamped: Vec<Vec<f64>> = Vec::with_capacity(series.len());
        for s in series {
            if s.values.len() != n {
                return Err(RadarError::LengthMismatch { series: s.name.clone(), expected: n, got: s.values.len() });
            }
            let mut vals = Vec::with_capacity(n);
            for (i, &v) in s.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(RadarError::NotFinite { series: s.name.clone(), axis: self.axes[i].into() });
                }
                if v > 100.0 {
                    return Err(RadarError::AboveMaximum {
                        series: s.name.clone(),
                        axis: self.axes[i].into(),
                        value: v,
                    });
                }
                if v < self.axis_min {
                    warnings.push(ClampWarning {
                        series: s.name.clone(),
                        axis: self.axes[i].into(),
                        value: v,
                        clamped_to: self.axis_min,
                    });
                    vals.push(self.axis_min);
                } else {
                    vals.push(v);
                }
            }
            clamped.push(vals);
        }

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        if let Some(c) = self.comment {
            let _ = writeln!(svg, "<!-- {} -->", c.replace("--", "- -"));
        }
        let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
        if let Some(t) = self.title {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="24" text-anchor="middle" font-size="16" font-weight="bold">{}</text>"#,
                num(CX),
                escape(t)
            );
        }

        // rings and their percent labels along the first axis
        let _ = writeln!(svg, r##"<g class="grid" fill="none" stroke="#cccccc" stroke-width="1">"##);
        for ring in 1..=RINGS {
            let r = OUTER_RADIUS * ring as f64 / RINGS as f64;
            let pts: Vec<(f64, f64)> = (0..n).map(|i| self.point(i, r)).collect();
            let _ = writeln!(svg, r#"<polygon points="{}"/>"#, points(&pts));
        }
        for i in 0..n {
            let (x, y) = self.point(i, OUTER_RADIUS);
            let _ = writeln!(svg, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, num(CX), num(CY), num(x), num(y));
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(svg, r##"<g class="ring-labels" fill="#888888" font-size="10">"##);
        for ring in 0..=RINGS {
            let r = OUTER_RADIUS * ring as f64 / RINGS as f64;
            let pct = self.axis_min + (100.0 - self.axis_min) * ring as f64 / RINGS as f64;
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}%</text>"#, num(CX + 4.0), num(CY - r - 2.0), num(pct));
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(svg, r#"<g class="axis-labels">"#);
        for (i, label) in self.axes.iter().enumerate() {
            let (x, y) = self.point(i, OUTER_RADIUS + 18.0);
            let c = libm::cos(self.angle(i));
            let anchor = if c > 0.1 {
                "start"
            } else if c < -0.1 {
                "end"
            } else {
                "middle"
            };
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="{}" dominant-baseline="middle">{}</text>"#,
                num(x),
                num(y),
                anchor,
                escape(label)
            );
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(svg, r#"<g class="series">"#);
        for (k, (s, vals)) in series.iter().zip(&clamped).enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<(f64, f64)> =
                vals.iter().enumerate().map(|(i, &v)| self.point(i, self.radius_of(v))).collect();
            let _ = writeln!(
                svg,
                r#"<polygon data-series="{}" points="{}" fill="{c}" fill-opacity="0.15" stroke="{c}" stroke-width="2"/>"#,
                escape(&s.name),
                points(&pts),
                c = color
            );
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(svg, r#"<g class="legend">"#);
        for (k, s) in series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let y = 50.0 + 22.0 * k as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="580" y="{}" width="14" height="14" fill="{}"/><text x="600" y="{}">{}</text>"#,
                num(y),
                color,
                num(y + 11.0),
                escape(&s.name)
            );
        }
        let _ = writeln!(svg, "</g>");
        svg.push_str("</svg>\n");
        Ok(RadarChart { svg, warnings })
    }
}

/// Renders `series` over `axes`, with the centre of the chart at `axis_min`
/// percent. Values below `axis_min` are clamped and reported as warnings.
pub fn radar_svg(axes: &[&str], series: &[RadarSeries], axis_min: f64) -> Result<RadarChart, RadarError> {
    Radar::new(axes, axis_min).render(series)
}

fn num(x: f64) -> String {
    let r = libm::round(x * 100.0) / 100.0;
    // avoid "-0.00"
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.2}")
}

fn points(pts: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&num(*x));
        s.push(',');
        s.push_str(&num(*y));
    }
    s
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const NINE: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];

    fn series_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.contains("data-series"))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end]
                    .split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_full_series_is_regular_polygon_on_outer_ring() {
        let s = RadarSeries { name: "full".into(), values: vec![100.0; 9] };
        let chart = radar_svg(&NINE, &[s], 40.0).unwrap();
        let pts = &series_points(&chart.svg)[0];
        assert_eq!(pts.len(), 9);
        let side = |i: usize| {
            let (a, b) = (pts[i], pts[(i + 1) % 9]);
            libm::hypot(a.0 - b.0, a.1 - b.1)
        };
        for (i, &(x, y)) in pts.iter().enumerate() {
            assert!((libm::hypot(x - CX, y - CY) - OUTER_RADIUS).abs() < 0.01);
            assert!((side(i) - side(0)).abs() < 0.02);
        }
        assert!(chart.warnings.is_empty());
    }

    #[test]
    fn output_is_byte_stable() {
        let s = vec![
            RadarSeries { name: "A".into(), values: vec![55.5, 60.0, 70.25, 80.0, 90.0, 100.0, 45.0, 50.0, 65.0] },
            RadarSeries { name: "B & C".into(), values: vec![41.0; 9] },
        ];
        let a = radar_svg(&NINE, &s, 40.0).unwrap();
        let b = radar_svg(&NINE, &s, 40.0).unwrap();
        assert_eq!(a.svg, b.svg);
        assert!(a.svg.contains("B &amp; C"));
        assert_eq!(a.svg.matches("data-series").count(), 2);
        assert!(!a.svg.contains("-0.00"));
    }

    #[test]
    fn values_below_axis_min_are_clamped() {
        let mut values = vec![50.0; 9];
        values[2] = 30.0;
        let chart = radar_svg(&NINE, &[RadarSeries { name: "s".into(), values }], 40.0).unwrap();
        assert_eq!(chart.warnings.len(), 1);
        assert_eq!(chart.warnings[0].value, 30.0);
        assert_eq!(chart.warnings[0].clamped_to, 40.0);
        let (x, y) = series_points(&chart.svg)[0][2];
        assert!(libm::hypot(x - CX, y - CY) < 0.01);
    }

    #[test]
    fn errors() {
        let s = |v: Vec<f64>| RadarSeries { name: "s".into(), values: v };
        assert_eq!(radar_svg(&["a", "b"], &[], 0.0).unwrap_err(), RadarError::TooFewAxes(2));
        assert!(matches!(radar_svg(&NINE, &[s(vec![101.0; 9])], 0.0), Err(RadarError::AboveMaximum { .. })));
        assert!(matches!(radar_svg(&NINE, &[s(vec![50.0; 8])], 0.0), Err(RadarError::LengthMismatch { .. })));
        assert!(matches!(radar_svg(&NINE, &[s(vec![f64::NAN; 9])], 0.0), Err(RadarError::NotFinite { .. })));
        assert!(matches!(radar_svg(&NINE, &[], 100.0), Err(RadarError::InvalidAxisMin(_))));
    }

    #[test]
    fn title_and_comment_embedded() {
        let chart = Radar::new(&NINE, 0.0).title("Story <1>").comment("fingerprint: abc").render(&[]).unwrap();
        assert!(chart.svg.contains("Story &lt;1&gt;"));
        assert!(chart.svg.contains("<!-- fingerprint: abc -->"));
        assert!(chart.svg.starts_with("<svg"));
        assert!(chart.svg.trim_end().ends_with("</svg>"));
    }
}
