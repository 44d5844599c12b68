//! Minimal SVG writer in world coordinates (y up).

use std::fmt::Write;

pub struct Svg {
    elements: Vec<String>,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Default for Svg {
    fn default() -> Self {
        Self::new()
    }
}

fn points_attr(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (x, y) in points {
        let _ = write!(s, "{x:.4},{y:.4} ");
    }
    s.trim_end().to_string()
}

impl Svg {
    pub fn new() -> Self {
        Self {
            elements: Vec::new(),
            lo: (f64::INFINITY, f64::INFINITY),
            hi: (f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn extend(&mut self, x: f64, y: f64) {
        if x.is_finite() && y.is_finite() {
            self.lo = (self.lo.0.min(x), self.lo.1.min(y));
            self.hi = (self.hi.0.max(x), self.hi.1.max(y));
        }
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        points.iter().for_each(|&(x, y)| self.extend(x, y));
        self.elements.push(format!(
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}" vector-effect="non-scaling-stroke"/>"#,
            points_attr(points)
        ));
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], stroke: &str, fill: &str, opacity: f64) {
        points.iter().for_each(|&(x, y)| self.extend(x, y));
        self.elements.push(format!(
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="1" vector-effect="non-scaling-stroke"/>"#,
            points_attr(points)
        ));
    }

    /// Ellipse with semi-axes `(a, b)` rotated by `theta`.
    pub fn ellipse(&mut self, center: (f64, f64), (a, b): (f64, f64), theta: f64, stroke: &str, fill: &str, opacity: f64) {
        let r = a.max(b);
        self.extend(center.0 - r, center.1 - r);
        self.extend(center.0 + r, center.1 + r);
        self.elements.push(format!(
            r#"<ellipse cx="0" cy="0" rx="{a}" ry="{b}" transform="translate({:.4} {:.4}) rotate({:.4})" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="1" vector-effect="non-scaling-stroke"/>"#,
            center.0,
            center.1,
            theta.to_degrees()
        ));
    }

    pub fn circle(&mut self, center: (f64, f64), r: f64, stroke: &str, fill: &str, opacity: f64) {
        self.ellipse(center, (r, r), 0.0, stroke, fill, opacity);
    }

    pub fn render(&self) -> String {
        let (lo, hi) = if self.lo.0.is_finite() {
            (self.lo, self.hi)
        } else {
            ((0.0, 0.0), (1.0, 1.0))
        };
        let pad = 0.05 * (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
        let (x0, y0) = (lo.0 - pad, lo.1 - pad);
        let (w, h) = (hi.0 - lo.0 + 2.0 * pad, hi.1 - lo.1 + 2.0 * pad);
        let px = 800.0;
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{px}\" height=\"{:.0}\" viewBox=\"{x0:.4} {:.4} {w:.4} {h:.4}\">\n",
            px * h / w,
            -(y0 + h),
        );
        out.push_str("<g transform=\"scale(1,-1)\">\n");
        for e in &self.elements {
            out.push_str(e);
            out.push('\n');
        }
        out.push_str("</g>\n</svg>\n");
        out
    }
}
