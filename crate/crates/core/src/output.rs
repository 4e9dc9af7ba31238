//! Serialisation of results: CSV as the canonical data product, JSON
//! reports, and SVG figures written by hand.
//!
//! Every writer is a pure function of its input, so equal inputs give equal
//! bytes.

use std::fmt::Write as _;

use serde::Serialize;

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("in-memory JSON serialisation");
    v.push(b'\n');
    v
}

/// CSV from a header and rows of already formatted fields.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> csv::Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Empty for `None`, shortest round-trip text otherwise.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const PLUS_COLOUR: &str = "#1f77b4";
pub const MINUS_COLOUR: &str = "#ff7f0e";
pub const SLIDING_COLOUR: &str = "#2ca02c";
pub const RED: &str = "#d62728";
pub const BLUE: &str = "#1f3fbf";

/// Data-space rectangle mapped onto a fixed pixel canvas.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Frame {
    /// Bounding box of `points`, padded by 5% (and widened if degenerate).
    pub fn fit<I: IntoIterator<Item = [f64; 2]>>(points: I) -> Self {
        let (mut x, mut y) = ([f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY]);
        for p in points.into_iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
            x = [x[0].min(p[0]), x[1].max(p[0])];
            y = [y[0].min(p[1]), y[1].max(p[1])];
        }
        let pad = |r: [f64; 2]| {
            if !r[0].is_finite() {
                return [-1.0, 1.0];
            }
            let w = r[1] - r[0];
            let m = if w > 0.0 { 0.05 * w } else { 0.5 * r[0].abs().max(1e-3) };
            [r[0] - m, r[1] + m]
        };
        Self { x: pad(x), y: pad(y) }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Minimal SVG canvas with a data frame and axes.
pub struct Svg {
    frame: Frame,
    body: String,
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn label(v: f64) -> String {
    format!("{v:.4}")
}

impl Svg {
    pub fn new(frame: Frame, title: &str, x_label: &str, y_label: &str) -> Self {
        let mut s = Self { frame, body: String::new() };
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s.body,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            r - l,
            b - t
        );
        let text = |s: &mut Self, x: f64, y: f64, anchor: &str, content: &str| {
            let _ = writeln!(
                s.body,
                r#"<text x="{}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
                num(x),
                num(y),
                escape(content)
            );
        };
        text(&mut s, WIDTH / 2.0, 28.0, "middle", title);
        text(&mut s, WIDTH / 2.0, HEIGHT - 12.0, "middle", x_label);
        text(&mut s, 14.0, HEIGHT / 2.0, "start", y_label);
        text(&mut s, l, b + 16.0, "start", &label(frame.x[0]));
        text(&mut s, r, b + 16.0, "end", &label(frame.x[1]));
        text(&mut s, l - 4.0, b, "end", &label(frame.y[0]));
        text(&mut s, l - 4.0, t + 10.0, "end", &label(frame.y[1]));
        s
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let f = &self.frame;
        let u = MARGIN + (p[0] - f.x[0]) / (f.x[1] - f.x[0]) * (WIDTH - 2.0 * MARGIN);
        let v = HEIGHT - MARGIN - (p[1] - f.y[0]) / (f.y[1] - f.y[0]) * (HEIGHT - 2.0 * MARGIN);
        (u, v)
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], colour: &str, width: f64, dashed: bool) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (u, v) = self.px(*p);
                format!("{},{}", num(u), num(v))
            })
            .collect();
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="{width}"{dash} clip-path="url(#plot)"/>"#,
            coords.join(" ")
        );
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], colour: &str, dashed: bool) {
        self.polyline(&[a, b], colour, 1.0, dashed);
    }

    pub fn dot(&mut self, p: [f64; 2], r: f64, fill: &str) {
        let (u, v) = self.px(p);
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{r}" fill="{fill}"/>"#, num(u), num(v));
    }

    /// Hollow square, used for fold points.
    pub fn square(&mut self, p: [f64; 2], colour: &str) {
        let (u, v) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="8" height="8" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            num(u - 4.0),
            num(v - 4.0)
        );
    }

    pub fn cross(&mut self, p: [f64; 2], colour: &str) {
        let (u, v) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="{colour}" stroke-width="2"/>"#,
            num(u - 5.0),
            num(v - 5.0),
            num(u + 5.0),
            num(v + 5.0),
            num(u - 5.0),
            num(v + 5.0),
            num(u + 5.0),
            num(v - 5.0)
        );
    }

    /// Legend entries stacked in the top right corner.
    pub fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (colour, text)) in entries.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * i as f64;
            let x = WIDTH - MARGIN - 150.0;
            let _ = writeln!(
                self.body,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
                num(x),
                num(y - 9.0),
                num(x + 14.0),
                num(y),
                escape(text)
            );
        }
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            out,
            r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath></defs>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push('\n');
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out.into_bytes()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let bytes = csv_bytes(&["a", "b"], vec![vec!["1".to_string(), opt(None)]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n1,\n");
    }

    #[test]
    fn frame_pads_degenerate_ranges() {
        let f = Frame::fit([[1.0, 2.0]]);
        assert!(f.x[0] < 1.0 && f.x[1] > 1.0 && f.y[0] < 2.0 && f.y[1] > 2.0);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let mut s = Svg::new(Frame::fit([[0.0, 0.0], [1.0, 1.0]]), "t <x>", "x", "y");
        s.polyline(&[[0.0, 0.0], [1.0, 1.0]], RED, 1.0, false);
        s.dot([0.5, 0.5], 3.0, RED);
        let text = String::from_utf8(s.finish()).unwrap();
        assert!(text.starts_with("<svg") && text.ends_with("</svg>\n"));
        assert!(text.contains("t &lt;x&gt;"));
    }
}
