//! Hand-rolled SVG line plots of summary tables: one polyline per
//! algorithm, ticks, legend, optional log axes. No drawing dependency —
//! the output is a few hundred bytes of plain XML.

use crate::summary::SummaryRow;
use crate::{BenchError, Result};

#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "sweep value".into(),
            y_label: "metric".into(),
            log_x: false,
            log_y: false,
            width: 640,
            height: 420,
        }
    }
}

const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 46.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e4 || a < 1e-3) {
        format!("{:.1e}", v)
    } else {
        let s = format!("{:.4}", v);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fwd(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }

    /// Map a data value to [0, 1] along the axis.
    fn unit(&self, v: f64) -> f64 {
        let (a, b) = (self.fwd(self.lo), self.fwd(self.hi));
        if b - a == 0.0 {
            0.5
        } else {
            (self.fwd(v) - a) / (b - a)
        }
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        let (a, b) = (self.fwd(self.lo), self.fwd(self.hi));
        (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

/// Render the median-vs-sweep_value curves of a summary table. Returns the
/// document and the number of points dropped (NaN stats, or nonpositive
/// values under a log axis).
pub fn render_plot(rows: &[SummaryRow], spec: &PlotSpec) -> Result<(String, usize)> {
    // series per algorithm, in first-appearance order
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut dropped = 0usize;
    for r in rows {
        let keep = !r.median.is_nan()
            && !r.sweep_value.is_nan()
            && (!spec.log_y || r.median > 0.0)
            && (!spec.log_x || r.sweep_value > 0.0);
        if !keep {
            dropped += 1;
            continue;
        }
        match series.iter_mut().find(|(name, _)| *name == r.algorithm) {
            Some((_, pts)) => pts.push((r.sweep_value, r.median)),
            None => series.push((r.algorithm.clone(), vec![(r.sweep_value, r.median)])),
        }
    }
    series.retain(|(_, pts)| !pts.is_empty());
    if series.is_empty() {
        return Err(BenchError::Runtime(
            "nothing to plot: no finite points".into(),
        ));
    }

    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let x_axis = Axis {
        lo: all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        hi: all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        log: spec.log_x,
    };
    let y_axis = Axis {
        lo: all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        hi: all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        log: spec.log_y,
    };

    let w = spec.width as f64;
    let h = spec.height as f64;
    let px = |x: f64| MARGIN_LEFT + x_axis.unit(x) * (w - MARGIN_LEFT - MARGIN_RIGHT);
    let py = |y: f64| h - MARGIN_BOTTOM - y_axis.unit(y) * (h - MARGIN_TOP - MARGIN_BOTTOM);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        spec.width, spec.height, spec.width, spec.height
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        spec.width, spec.height
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(&spec.title)
    ));

    // frame
    svg.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        MARGIN_LEFT,
        MARGIN_TOP,
        w - MARGIN_LEFT - MARGIN_RIGHT,
        h - MARGIN_TOP - MARGIN_BOTTOM
    ));

    for tv in x_axis.ticks(5) {
        let x = px(tv);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            x,
            h - MARGIN_BOTTOM,
            x,
            h - MARGIN_BOTTOM + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            x,
            h - MARGIN_BOTTOM + 18.0,
            fmt_tick(tv)
        ));
    }
    for tv in y_axis.ticks(5) {
        let y = py(tv);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0,
            y,
            MARGIN_LEFT,
            y
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            fmt_tick(tv)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        MARGIN_LEFT + (w - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        h - 8.0,
        escape(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 {:.1})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        escape(&spec.y_label)
    ));

    for (si, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color,
            coords.join(" ")
        ));
        // legend entry
        let ly = MARGIN_TOP + 14.0 + 16.0 * si as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            w - MARGIN_RIGHT - 120.0,
            ly,
            w - MARGIN_RIGHT - 96.0,
            ly,
            color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            w - MARGIN_RIGHT - 90.0,
            ly + 4.0,
            escape(name)
        ));
    }

    svg.push_str("</svg>\n");
    Ok((svg, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, sv: f64, median: f64) -> SummaryRow {
        SummaryRow {
            experiment: "isr_vs_beta".into(),
            algorithm: alg.into(),
            sweep_value: sv,
            n_runs: 10,
            mean: median,
            median,
            q25: median,
            q75: median,
            n_excluded: 0,
        }
    }

    #[test]
    fn single_series_two_points_one_polyline() {
        let rows = vec![row("ebm", 0.1, 1.0), row("ebm", 0.5, 0.2)];
        let (svg, dropped) = render_plot(&rows, &PlotSpec::default()).unwrap();
        assert_eq!(dropped, 0);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(pts.split(' ').count(), 2);
    }

    #[test]
    fn empty_summary_is_an_error() {
        assert!(render_plot(&[], &PlotSpec::default()).is_err());
    }

    #[test]
    fn nonpositive_points_dropped_under_log_with_count() {
        let rows = vec![row("ebm", 0.1, 0.0), row("ebm", 0.3, 0.5), row("ebm", 0.5, 0.2)];
        let spec = PlotSpec {
            log_y: true,
            ..Default::default()
        };
        let (svg, dropped) = render_plot(&rows, &spec).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn one_polyline_per_algorithm_and_legend_entries() {
        let rows = vec![
            row("ebm", 0.1, 1.0),
            row("ebm", 0.5, 0.5),
            row("sparse_ebm", 0.1, 0.8),
            row("sparse_ebm", 0.5, 0.1),
        ];
        let (svg, _) = render_plot(&rows, &PlotSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">ebm<"));
        assert!(svg.contains(">sparse_ebm<"));
    }

    #[test]
    fn coordinates_invert_back_to_data_within_half_pixel() {
        let rows = vec![
            row("ebm", 0.1, 3.0),
            row("ebm", 0.25, 7.0),
            row("ebm", 0.5, 5.0),
        ];
        let spec = PlotSpec::default();
        let (svg, _) = render_plot(&rows, &spec).unwrap();
        let pts_attr = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        // rebuild the forward transform and check round trip
        let (w, h) = (spec.width as f64, spec.height as f64);
        let (xlo, xhi, ylo, yhi) = (0.1, 0.5, 3.0, 7.0);
        for (pair, (dx, dy)) in pts_attr.split(' ').zip([(0.1, 3.0), (0.25, 7.0), (0.5, 5.0)]) {
            let mut it = pair.split(',');
            let px: f64 = it.next().unwrap().parse().unwrap();
            let py: f64 = it.next().unwrap().parse().unwrap();
            let expect_x = MARGIN_LEFT + (dx - xlo) / (xhi - xlo) * (w - MARGIN_LEFT - MARGIN_RIGHT);
            let expect_y =
                h - MARGIN_BOTTOM - (dy - ylo) / (yhi - ylo) * (h - MARGIN_TOP - MARGIN_BOTTOM);
            assert!((px - expect_x).abs() < 0.5, "{} vs {}", px, expect_x);
            assert!((py - expect_y).abs() < 0.5, "{} vs {}", py, expect_y);
        }
    }

    #[test]
    fn output_is_well_formed_enough_for_xml_parsers() {
        let rows = vec![row("ebm", 0.1, 1.0), row("ebm", 0.5, 0.2)];
        let spec = PlotSpec {
            title: "a < b & c".into(),
            ..Default::default()
        };
        let (svg, _) = render_plot(&rows, &spec).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // every escaped entity, no raw ampersands or angle brackets in text
        assert!(svg.contains("a &lt; b &amp; c"));
        // tag balance: each opening tag type closes or self-closes
        assert_eq!(svg.matches("<svg").count(), svg.matches("</svg>").count());
        assert_eq!(svg.matches("<text").count(), svg.matches("</text>").count());
    }
}
