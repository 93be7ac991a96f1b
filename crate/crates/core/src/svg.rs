//! Minimal self-contained SVG line plots with log axes and reference-slope
//! guide lines. No external assets, deterministic output.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A straight reference line through `anchor` with the given slope in the
/// plot's (possibly log-transformed) coordinates.
pub struct Guide {
    pub slope: f64,
    pub anchor: (f64, f64),
    pub label: String,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub guides: Vec<Guide>,
}

impl Plot {
    fn tx(&self, x: f64) -> Option<f64> {
        if self.log_x {
            (x > 0.0).then(|| x.log10())
        } else {
            Some(x)
        }
    }

    fn ty(&self, y: f64) -> Option<f64> {
        if self.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            Some(y)
        }
    }

    pub fn render(&self) -> String {
        let mut pts: Vec<Vec<(f64, f64)>> = Vec::new();
        let mut xmin = f64::INFINITY;
        let mut xmax = f64::NEG_INFINITY;
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for s in &self.series {
            let mut tp = Vec::with_capacity(s.points.len());
            for &(x, y) in &s.points {
                if let (Some(tx), Some(ty)) = (self.tx(x), self.ty(y)) {
                    xmin = xmin.min(tx);
                    xmax = xmax.max(tx);
                    ymin = ymin.min(ty);
                    ymax = ymax.max(ty);
                    tp.push((tx, ty));
                }
            }
            pts.push(tp);
        }
        if !xmin.is_finite() {
            xmin = 0.0;
            xmax = 1.0;
        }
        if !ymin.is_finite() {
            ymin = 0.0;
            ymax = 1.0;
        }
        if xmax - xmin < 1e-12 {
            xmax = xmin + 1.0;
        }
        if ymax - ymin < 1e-12 {
            ymax = ymin + 1.0;
        }
        let pad_y = 0.05 * (ymax - ymin);
        let (ymin, ymax) = (ymin - pad_y, ymax + pad_y);

        let px = |tx: f64| MARGIN_L + (tx - xmin) / (xmax - xmin) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |ty: f64| HEIGHT - MARGIN_B - (ty - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut out = String::new();
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="12">"#
        );
        let _ = write!(
            out,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{:.1}" y="22" font-size="15">{}</text>"#,
            MARGIN_L,
            escape(&self.title)
        );

        // frame
        let _ = write!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
            MARGIN_L,
            MARGIN_T,
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        );

        // ticks: decades on log axes, 5 even ticks otherwise
        let x_ticks = ticks(xmin, xmax, self.log_x);
        for t in &x_ticks {
            let x = px(*t);
            let _ = write!(
                out,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ccc"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                MARGIN_T,
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 16.0,
                tick_label(*t, self.log_x)
            );
        }
        let y_ticks = ticks(ymin, ymax, self.log_y);
        for t in &y_ticks {
            let y = py(*t);
            let _ = write!(
                out,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ccc"/><text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"##,
                MARGIN_L,
                WIDTH - MARGIN_R,
                MARGIN_L - 6.0,
                tick_label(*t, self.log_y)
            );
        }

        // guide lines
        for g in &self.guides {
            if let (Some(ax), Some(ay)) = (self.tx(g.anchor.0), self.ty(g.anchor.1)) {
                let y0 = ay + g.slope * (xmin - ax);
                let y1 = ay + g.slope * (xmax - ax);
                let _ = write!(
                    out,
                    r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" fill="#666">{}</text>"##,
                    px(xmin),
                    py(y0),
                    px(xmax),
                    py(y1),
                    px(xmin) + 8.0,
                    py(y0) - 6.0,
                    escape(&g.label)
                );
            }
        }

        // data
        for (i, tp) in pts.iter().enumerate() {
            if tp.is_empty() {
                continue;
            }
            let color = PALETTE[i % PALETTE.len()];
            let mut path = String::new();
            for (j, &(tx, ty)) in tp.iter().enumerate() {
                let _ = write!(
                    path,
                    "{}{:.2},{:.2}",
                    if j == 0 { "M" } else { " L" },
                    px(tx),
                    py(ty)
                );
            }
            let _ = write!(
                out,
                r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
            let ly = MARGIN_T + 16.0 * i as f64 + 12.0;
            let _ = write!(
                out,
                r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                WIDTH - MARGIN_R + 10.0,
                WIDTH - MARGIN_R + 34.0,
                WIDTH - MARGIN_R + 40.0,
                ly + 4.0,
                escape(&self.series[i].label)
            );
        }

        // axis labels
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
            MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label),
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        out.push_str("</svg>");
        out
    }
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let a = lo.ceil() as i64;
        let b = hi.floor() as i64;
        if b >= a && (b - a) <= 24 {
            return (a..=b).map(|k| k as f64).collect();
        }
    }
    (0..=4)
        .map(|i| lo + (hi - lo) * i as f64 / 4.0)
        .collect()
}

fn tick_label(t: f64, log: bool) -> String {
    if log && (t - t.round()).abs() < 1e-9 {
        format!("1e{}", t.round() as i64)
    } else {
        format!("{t:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_self_contained_svg() {
        let plot = Plot {
            title: "decay".into(),
            x_label: "t".into(),
            y_label: "norm".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "l2".into(),
                points: (1..=100).map(|i| (i as f64, (i as f64).powf(-0.25))).collect(),
            }],
            guides: vec![Guide {
                slope: -0.25,
                anchor: (10.0, 10.0_f64.powf(-0.25)),
                label: "slope -1/4".into(),
            }],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert!(svg.contains("polyline") || svg.contains("<path"));
        assert!(!svg.contains("http://") || svg.contains("xmlns"));
        // nonpositive points are skipped, not NaN-rendered
        let with_zero = Plot {
            title: "z".into(),
            x_label: "t".into(),
            y_label: "v".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 0.0), (10.0, 1.0), (100.0, 0.1)],
            }],
            guides: vec![],
        };
        let svg = with_zero.render();
        assert!(!svg.contains("NaN"));
    }
}
