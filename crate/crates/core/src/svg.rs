//! Dependency-free SVG rendering of diagrams, barcodes and death histograms.
//!
//! Output is a pure function of the input: fixed viewport, fixed number
//! formatting, no timestamps.

use std::fmt::Write as _;

use crate::diagram::DeathHistogram;
use crate::persistence::{Interval, PersistenceDiagram};

const DIM_COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

#[derive(Debug, Clone, Copy)]
pub enum SvgData<'a> {
    Diagram(&'a PersistenceDiagram),
    Barcode(&'a PersistenceDiagram),
    Histogram(&'a DeathHistogram),
}

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
    pub title: String,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 480, height: 480, title: String::new() }
    }
}

struct Canvas {
    out: String,
    w: f64,
    h: f64,
    margin: f64,
}

impl Canvas {
    fn new(opts: &SvgOptions) -> Self {
        let (w, h) = (opts.width as f64, opts.height as f64);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        if !opts.title.is_empty() {
            let _ = writeln!(out, r#"<text x="{:.2}" y="16" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, escape(&opts.title));
        }
        Canvas { out, w, h, margin: 44.0 }
    }

    fn plot_w(&self) -> f64 {
        self.w - 2.0 * self.margin
    }

    fn plot_h(&self) -> f64 {
        self.h - 2.0 * self.margin
    }

    fn frame(&mut self) {
        let m = self.margin;
        let _ = writeln!(
            self.out,
            r#"<rect x="{m:.2}" y="{m:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            self.plot_w(),
            self.plot_h()
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(s));
    }

    fn note_empty(&mut self) {
        let (x, y) = (self.w / 2.0, self.h / 2.0);
        self.text(x, y, "middle", "no intervals");
    }

    fn finish(mut self) -> Vec<u8> {
        self.out.push_str("</svg>\n");
        self.out.into_bytes()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

/// Upper end of the value axis: largest finite value, at least 1.
fn axis_max(intervals: &[Interval]) -> f64 {
    intervals
        .iter()
        .flat_map(|i| [i.birth, i.death])
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max)
}

pub fn emit_svg(data: SvgData<'_>, opts: &SvgOptions) -> Vec<u8> {
    match data {
        SvgData::Diagram(pd) => diagram_svg(pd, opts),
        SvgData::Barcode(pd) => barcode_svg(pd, opts),
        SvgData::Histogram(h) => histogram_svg(h, opts),
    }
}

/// Scatter of (birth, death) with the diagonal. Essential classes sit on a
/// dashed line above the plot labelled `inf`; repeated points get a larger
/// marker and a `xN` label.
fn diagram_svg(pd: &PersistenceDiagram, opts: &SvgOptions) -> Vec<u8> {
    let mut c = Canvas::new(opts);
    c.frame();
    let top = axis_max(pd.intervals()) * 1.05;
    let m = c.margin;
    let (pw, ph) = (c.plot_w(), c.plot_h());
    let sx = |v: f64| m + v / top * pw;
    let sy = |v: f64| m + ph - v / top * ph;
    let _ = writeln!(
        c.out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
        sx(0.0),
        sy(0.0),
        sx(top),
        sy(top)
    );
    let inf_y = m - 10.0;
    let _ = writeln!(
        c.out,
        r#"<line x1="{m:.2}" y1="{inf_y:.2}" x2="{:.2}" y2="{inf_y:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        m + pw
    );
    c.text(m - 4.0, inf_y + 4.0, "end", "inf");
    c.text(m, m + ph + 16.0, "middle", "0");
    c.text(m + pw, m + ph + 16.0, "middle", &fmt_tick(top));
    c.text(m - 4.0, m + 4.0, "end", &fmt_tick(top));
    c.text(m + pw / 2.0, c.h - 8.0, "middle", "birth");
    if pd.is_empty() {
        c.note_empty();
        return c.finish();
    }
    let iv = pd.intervals();
    let mut k = 0;
    while k < iv.len() {
        let mult = iv[k..].iter().take_while(|j| **j == iv[k]).count();
        let i = iv[k];
        let (x, y) = (sx(i.birth), if i.is_essential() { inf_y } else { sy(i.death) });
        let r = if mult > 1 { 5.5 } else { 3.5 };
        let _ = writeln!(
            c.out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{}" fill-opacity="0.8"/>"#,
            DIM_COLORS[i.dim as usize % 2]
        );
        if mult > 1 {
            c.text(x + 7.0, y - 5.0, "start", &format!("x{mult}"));
        }
        k += mult;
    }
    legend(&mut c, pd);
    c.finish()
}

fn legend(c: &mut Canvas, pd: &PersistenceDiagram) {
    let mut y = c.margin + 14.0;
    let x = c.margin + c.plot_w() - 60.0;
    for dim in 0..2u8 {
        if pd.in_dim(dim).next().is_some() {
            let _ = writeln!(c.out, r#"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="{}"/>"#, y - 4.0, DIM_COLORS[dim as usize]);
            c.text(x + 8.0, y, "start", &format!("H{dim}"));
            y += 14.0;
        }
    }
}

/// One horizontal bar per interval, duplicates included.
fn barcode_svg(pd: &PersistenceDiagram, opts: &SvgOptions) -> Vec<u8> {
    let mut c = Canvas::new(opts);
    c.frame();
    let top = axis_max(pd.intervals()) * 1.05;
    let m = c.margin;
    let (pw, ph) = (c.plot_w(), c.plot_h());
    c.text(m, m + ph + 16.0, "middle", "0");
    c.text(m + pw, m + ph + 16.0, "middle", &fmt_tick(top));
    if pd.is_empty() {
        c.note_empty();
        return c.finish();
    }
    let n = pd.len() as f64;
    let step = ph / n;
    let thick = (step * 0.6).clamp(0.5, 8.0);
    let sx = |v: f64| m + v / top * pw;
    for (row, i) in pd.intervals().iter().enumerate() {
        let y = m + step * (row as f64 + 0.5);
        let x2 = if i.is_essential() { m + pw } else { sx(i.death) };
        let _ = writeln!(
            c.out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" stroke="{}" stroke-width="{thick:.2}"/>"#,
            sx(i.birth),
            DIM_COLORS[i.dim as usize % 2]
        );
        if i.is_essential() {
            c.text(m + pw + 3.0, y + 4.0, "start", "inf");
        }
    }
    legend(&mut c, pd);
    c.finish()
}

fn histogram_svg(h: &DeathHistogram, opts: &SvgOptions) -> Vec<u8> {
    let mut c = Canvas::new(opts);
    c.frame();
    let m = c.margin;
    let (pw, ph) = (c.plot_w(), c.plot_h());
    if h.bins.is_empty() {
        c.note_empty();
        return c.finish();
    }
    let peak = h.bins.iter().map(|b| b.1).max().unwrap_or(0).max(1) as f64;
    let bw = pw / h.bins.len() as f64;
    for (k, &(edge, count)) in h.bins.iter().enumerate() {
        let bh = count as f64 / peak * ph;
        let x = m + k as f64 * bw;
        let _ = writeln!(
            c.out,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{}" stroke="white"/>"#,
            m + ph - bh,
            bw,
            DIM_COLORS[1]
        );
        c.text(x + bw / 2.0, m + ph + 16.0, "middle", &fmt_tick(edge));
        if count > 0 {
            c.text(x + bw / 2.0, m + ph - bh - 4.0, "middle", &count.to_string());
        }
    }
    if h.infinite > 0 {
        c.text(m + pw, m - 6.0, "end", &format!("essential: {}", h.infinite));
    }
    c.text(m + pw / 2.0, c.h - 8.0, "middle", "death");
    c.finish()
}
