//! Minimal SVG writer. Output is a pure function of the calls made, so the
//! same drawing always produces the same bytes.

use std::fmt::Write;

pub const NEGATIVE: &str = "#d62728";
pub const POSITIVE: &str = "#1f77b4";
pub const INK: &str = "#222222";
pub const GRID: &str = "#cccccc";

/// Fill colour and class suffix for a correlation sign: red below zero, blue otherwise.
pub fn sign_style(r: f64) -> (&'static str, &'static str) {
    if r < 0.0 {
        (NEGATIVE, "neg")
    } else {
        (POSITIVE, "pos")
    }
}

const SUBCLASS_PALETTE: [&str; 16] = [
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#9467bd", "#ff7f0e", "#2ca02c", "#aec7e8", "#ffbb78",
    "#98df8a", "#c5b0d5", "#c49c94", "#f7b6d2", "#dbdb8d", "#9edae5",
];

pub fn subclass_color(subclass: Option<&str>) -> &'static str {
    subclass
        .and_then(|s| {
            crate::cohort::LIPID_PREFIXES
                .iter()
                .position(|p| p.trim_end_matches('_') == s)
        })
        .map_or("#555555", |i| SUBCLASS_PALETTE[i % SUBCLASS_PALETTE.len()])
}

/// Rounds to four decimals; every number written into a figure goes through this or [`sig4`].
pub fn round4(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds to four significant digits (used for p-values).
pub fn sig4(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.3e}").parse().expect("formatted float parses")
}

/// Text form of a number, identical to its JSON serialisation.
pub fn num(v: f64) -> String {
    serde_json::Number::from_f64(v).map_or_else(|| "null".into(), |n| n.to_string())
}

fn coord(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

impl Anchor {
    fn name(self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Middle => "middle",
            Anchor::End => "end",
        }
    }
}

pub struct Svg {
    buf: String,
    depth: usize,
}

impl Svg {
    pub fn new(width: f64, height: f64, title: &str) -> Self {
        let mut buf = String::new();
        buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
             font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">",
            w = coord(width),
            h = coord(height)
        );
        let _ = writeln!(buf, "  <title>{}</title>", escape(title));
        let _ = writeln!(
            buf,
            "  <rect class=\"background\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
            coord(width),
            coord(height)
        );
        let mut svg = Self { buf, depth: 1 };
        svg.text(width / 2.0, 22.0, Anchor::Middle, "title", title);
        svg
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.buf.push_str("  ");
        }
    }

    pub fn open_group(&mut self, class: &str) {
        self.indent();
        let _ = writeln!(self.buf, "<g class=\"{}\">", escape(class));
        self.depth += 1;
    }

    pub fn open_group_at(&mut self, class: &str, dx: f64, dy: f64) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<g class=\"{}\" transform=\"translate({},{})\">",
            escape(class),
            coord(dx),
            coord(dy)
        );
        self.depth += 1;
    }

    pub fn close_group(&mut self) {
        self.depth -= 1;
        self.indent();
        self.buf.push_str("</g>\n");
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, class: &str, fill: &str) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>",
            coord(x),
            coord(y),
            coord(w.max(0.0)),
            coord(h.max(0.0))
        );
    }

    pub fn outline_rect(&mut self, x: f64, y: f64, w: f64, h: f64, class: &str, stroke: &str) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{stroke}\"/>",
            coord(x),
            coord(y),
            coord(w.max(0.0)),
            coord(h.max(0.0))
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, class: &str, fill: &str) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"/>",
            coord(cx),
            coord(cy),
            coord(r)
        );
    }

    #[allow(clippy::too_many_arguments)]
    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, class: &str, stroke: &str, width: f64) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            coord(x1),
            coord(y1),
            coord(x2),
            coord(y2),
            coord(width)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], class: &str, stroke: &str, width: f64) {
        self.indent();
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", coord(x), coord(y)))
            .collect();
        let _ = writeln!(
            self.buf,
            "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            pts.join(" "),
            coord(width)
        );
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], class: &str, fill: &str, opacity: f64) {
        self.indent();
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", coord(x), coord(y)))
            .collect();
        let _ = writeln!(
            self.buf,
            "<polygon class=\"{class}\" points=\"{}\" fill=\"{fill}\" fill-opacity=\"{}\" stroke=\"none\"/>",
            pts.join(" "),
            coord(opacity)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: Anchor, class: &str, content: &str) {
        self.indent();
        let _ = writeln!(
            self.buf,
            "<text class=\"{class}\" x=\"{}\" y=\"{}\" text-anchor=\"{}\">{}</text>",
            coord(x),
            coord(y),
            anchor.name(),
            escape(content)
        );
    }

    /// Text rotated by −90° about its anchor point, for column labels.
    pub fn vertical_text(&mut self, x: f64, y: f64, class: &str, content: &str) {
        self.indent();
        let (x, y) = (coord(x), coord(y));
        let _ = writeln!(
            self.buf,
            "<text class=\"{class}\" x=\"{x}\" y=\"{y}\" text-anchor=\"start\" transform=\"rotate(-90 {x} {y})\">{}</text>",
            escape(content)
        );
    }

    pub fn finish(mut self) -> String {
        while self.depth > 1 {
            self.close_group();
        }
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub d0: f64,
    pub d1: f64,
    pub p0: f64,
    pub p1: f64,
}

impl Scale {
    pub fn new(domain: (f64, f64), range: (f64, f64)) -> Self {
        let (d0, mut d1) = domain;
        if d1 <= d0 {
            d1 = d0 + 1.0;
        }
        Self {
            d0,
            d1,
            p0: range.0,
            p1: range.1,
        }
    }

    pub fn map(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

/// Round tick positions covering `[lo, hi]`, at most about `target` of them.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![round4(lo)];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    let scale = 10f64.powi((1 - step.log10().floor() as i32).max(0));
    (first..=last)
        .map(|i| (i as f64 * step * scale).round() / scale + 0.0)
        .collect()
}
