//! Dependency-light SVG quick-look plots: polylines over log or linear
//! axes with decade ticks and a legend. The CSV files are the contract;
//! these are for eyeballing runs.

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 620.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub curves: Vec<Curve>,
}

fn axis_value(v: f64, log: bool) -> Option<f64> {
    if log {
        if v > 0.0 {
            Some(v.log10())
        } else {
            None
        }
    } else {
        Some(v)
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for c in &self.curves {
            for &(x, y) in &c.points {
                if let (Some(ax), Some(ay)) = (axis_value(x, self.log_x), axis_value(y, self.log_y))
                {
                    if ax.is_finite() && ay.is_finite() {
                        xs.push(ax);
                        ys.push(ay);
                    }
                }
            }
        }
        let (x_lo, x_hi) = span(&xs);
        let (y_lo, y_hi) = span(&ys);
        let to_px = |ax: f64, ay: f64| -> (f64, f64) {
            let fx = (ax - x_lo) / (x_hi - x_lo);
            let fy = (ay - y_lo) / (y_hi - y_lo);
            (
                MARGIN_L + fx * (WIDTH - MARGIN_L - MARGIN_R),
                HEIGHT - MARGIN_B - fy * (HEIGHT - MARGIN_T - MARGIN_B),
            )
        };

        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"13\">\n"
        ));
        s.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // axes frame
        s.push_str(&format!(
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" \
             fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        ));

        for (t, label) in ticks(x_lo, x_hi, self.log_x) {
            let (px, _) = to_px(t, y_lo);
            s.push_str(&format!(
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"#cccccc\"/>\n",
                MARGIN_T,
                HEIGHT - MARGIN_B
            ));
            s.push_str(&format!(
                "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{label}</text>\n",
                HEIGHT - MARGIN_B + 18.0
            ));
        }
        for (t, label) in ticks(y_lo, y_hi, self.log_y) {
            let (_, py) = to_px(x_lo, t);
            s.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#cccccc\"/>\n",
                WIDTH - MARGIN_R
            ));
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{label}</text>\n",
                MARGIN_L - 6.0,
                py + 4.0
            ));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        s.push_str(&format!(
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        ));

        for (ci, c) in self.curves.iter().enumerate() {
            let color = PALETTE[ci % PALETTE.len()];
            let pts: Vec<String> = c
                .points
                .iter()
                .filter_map(|&(x, y)| {
                    let ax = axis_value(x, self.log_x)?;
                    let ay = axis_value(y, self.log_y)?;
                    if !(ax.is_finite() && ay.is_finite()) {
                        return None;
                    }
                    let (px, py) = to_px(ax, ay);
                    Some(format!("{px:.2},{py:.2}"))
                })
                .collect();
            if !pts.is_empty() {
                s.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    pts.join(" ")
                ));
            }
            let ly = MARGIN_T + 16.0 + 18.0 * ci as f64;
            let lx = WIDTH - MARGIN_R - 220.0;
            s.push_str(&format!(
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                lx + 24.0
            ));
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">{}</text>\n",
                lx + 30.0,
                ly + 4.0,
                escape(&c.label)
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn span(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    if log {
        let a = lo.ceil() as i64;
        let b = hi.floor() as i64;
        let step = (((b - a) / 8) + 1).max(1);
        (a..=b)
            .step_by(step as usize)
            .map(|e| (e as f64, format!("1e{e}")))
            .collect()
    } else {
        (0..=5)
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / 5.0;
                (v, format!("{v:.3}"))
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
