//! Deterministic SVG output for a [`PlotSession`].
//!
//! Angles run clockwise from 12 o'clock; all numbers are written with three
//! decimals. Every data row becomes one element carrying the `datum` class.

use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::data::{AttachValue, AttachmentRow, DatasetData, KaryotypeBlock, LinkRow};
use super::layout::{angular_scale, pack_lanes, radial_bands, AngularScale, Band, Normalizer};
use super::{Direction, PlotSession, RenderError, TrackBinding, TrackStyle};
use crate::config::{TrackAddr, TrackKind};

/// Categorical colors, assigned to qualitative values in first-seen order.
pub const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn point(r: f64, deg: f64) -> (f64, f64) {
    let t = deg.to_radians();
    (r * t.sin(), -r * t.cos())
}

fn xy(p: (f64, f64)) -> String {
    format!("{},{}", num(p.0), num(p.1))
}

/// Arc commands from `a0` to `a1` at radius `r`, split so that no single
/// arc exceeds 180°. Assumes the pen already sits at `a0`.
fn arc_to(d: &mut String, r: f64, a0: f64, a1: f64) {
    let pieces = ((a1 - a0).abs() / 180.0).ceil().max(1.0) as usize;
    let sweep = if a1 >= a0 { 1 } else { 0 };
    for i in 1..=pieces {
        let a = a0 + (a1 - a0) * i as f64 / pieces as f64;
        let _ = write!(d, " A{},{} 0 0 {} {}", num(r), num(r), sweep, xy(point(r, a)));
    }
}

/// Closed annular sector path.
fn sector(r0: f64, r1: f64, a0: f64, a1: f64) -> String {
    let mut d = format!("M{}", xy(point(r1, a0)));
    arc_to(&mut d, r1, a0, a1);
    if r0 > 0.0 {
        let _ = write!(d, " L{}", xy(point(r0, a1)));
        arc_to(&mut d, r0, a1, a0);
    } else {
        d.push_str(" L0.000,0.000");
    }
    d.push_str(" Z");
    d
}

fn parse_hex(c: &str) -> Option<[u8; 3]> {
    let h = c.strip_prefix('#')?;
    if h.len() != 6 || !h.is_ascii() {
        return None;
    }
    let b = |i: usize| u8::from_str_radix(&h[i..i + 2], 16).ok();
    Some([b(0)?, b(2)?, b(4)?])
}

/// Linear ramp between the style's first two colors.
fn ramp(style: &TrackStyle, t: f64) -> String {
    let lo = style.colors.first().and_then(|c| parse_hex(c));
    let hi = style.colors.get(1).and_then(|c| parse_hex(c));
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            let ch = |i: usize| (lo[i] as f64 + (hi[i] as f64 - lo[i] as f64) * t).round() as u8;
            format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
        }
        _ => style.primary().to_string(),
    }
}

/// First-seen palette assignment for qualitative values.
#[derive(Default)]
struct Categories<'a> {
    seen: HashMap<&'a str, usize>,
}

impl<'a> Categories<'a> {
    fn color(&mut self, v: &'a str) -> &'static str {
        let n = self.seen.len();
        let i = *self.seen.entry(v).or_insert(n);
        PALETTE[i % PALETTE.len()]
    }
}

struct Ctx<'a> {
    scale: &'a AngularScale,
    band: Band,
    bezier: f64,
    marker: f64,
}

fn numeric(v: &AttachValue) -> Option<f64> {
    match v {
        AttachValue::Num(x) => Some(*x),
        AttachValue::Cat(_) => None,
    }
}

fn open_track(out: &mut String, b: &TrackBinding) {
    let _ = writeln!(
        out,
        "<g class=\"track track-{}\" data-track=\"{}\" data-dataset=\"{}\" fill-opacity=\"{}\">",
        b.kind.name(),
        b.track,
        escape(&b.dataset_id),
        num(b.style.opacity)
    );
}

fn ideogram(out: &mut String, ctx: &Ctx, style: &TrackStyle, blocks: &[KaryotypeBlock]) {
    let Band { inner, outer } = ctx.band;
    for b in blocks {
        let Some(span) = ctx.scale.block(&b.id) else { continue };
        let fill = if b.color.is_empty() { style.primary() } else { &b.color };
        let _ = writeln!(
            out,
            "<path class=\"datum block\" data-block=\"{}\" d=\"{}\" fill=\"{}\"/>",
            escape(&b.id),
            sector(inner, outer, span.start_deg, span.end_deg),
            escape(fill)
        );
        let mid = (span.start_deg + span.end_deg) / 2.0;
        let (x, y) = point(outer + 12.0, mid);
        let _ = writeln!(
            out,
            "<text class=\"label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-size=\"10\">{}</text>",
            num(x),
            num(y),
            escape(&b.label)
        );
    }
}

/// Rows whose block is missing from the axis are dropped.
fn placed<'r>(ctx: &Ctx, rows: &'r [AttachmentRow]) -> Vec<(&'r AttachmentRow, f64, f64)> {
    rows.iter()
        .filter_map(|r| {
            let s = ctx.scale.block(&r.block)?;
            Some((r, s.angle(r.start as f64), s.angle(r.end as f64)))
        })
        .collect()
}

fn attachment(out: &mut String, ctx: &Ctx, kind: TrackKind, style: &TrackStyle, rows: &[AttachmentRow]) {
    let Band { inner, outer } = ctx.band;
    let thickness = ctx.band.thickness();
    let values: Vec<f64> = rows.iter().filter_map(|r| numeric(&r.value)).collect();
    let norm = Normalizer::new(style.domain, &values);
    let mut cats = Categories::default();
    let rows = placed(ctx, rows);
    // Radial position of a normalized value.
    let radius = |t: f64| match style.direction {
        Direction::Out => inner + t * thickness,
        Direction::In => outer - t * thickness,
    };
    match kind {
        TrackKind::Histogram => {
            for (r, a0, a1) in rows {
                let (t, fill) = match &r.value {
                    AttachValue::Num(v) => (norm.apply(*v), style.primary()),
                    AttachValue::Cat(c) => (1.0, cats.color(c)),
                };
                let (r0, r1) = match style.direction {
                    Direction::Out => (inner, inner + t * thickness),
                    Direction::In => (outer - t * thickness, outer),
                };
                let _ = writeln!(
                    out,
                    "<path class=\"datum bar\" data-r0=\"{}\" data-r1=\"{}\" d=\"{}\" fill=\"{}\"/>",
                    num(r0),
                    num(r1),
                    sector(r0, r1, a0, a1),
                    escape(fill)
                );
            }
        }
        TrackKind::Line | TrackKind::Scatter => {
            let mut trace: Vec<(&str, String)> = Vec::new();
            for (r, a0, a1) in rows {
                let (t, fill) = match &r.value {
                    AttachValue::Num(v) => (norm.apply(*v), style.primary()),
                    AttachValue::Cat(c) => (1.0, cats.color(c)),
                };
                let p = point(radius(t), (a0 + a1) / 2.0);
                let (class, rad) =
                    if kind == TrackKind::Line { ("vertex", ctx.marker / 2.0) } else { ("marker", ctx.marker) };
                let _ = writeln!(
                    out,
                    "<circle class=\"datum {class}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>",
                    num(p.0),
                    num(p.1),
                    num(rad),
                    escape(fill)
                );
                trace.push((r.block.as_str(), xy(p)));
            }
            if kind == TrackKind::Line {
                // One polyline per consecutive run within a block, so the
                // trace never crosses a gap.
                let mut i = 0;
                while i < trace.len() {
                    let j = (i..trace.len()).find(|&j| trace[j].0 != trace[i].0).unwrap_or(trace.len());
                    let pts: Vec<&str> = trace[i..j].iter().map(|(_, p)| p.as_str()).collect();
                    let _ = writeln!(
                        out,
                        "<polyline class=\"trace\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.000\"/>",
                        pts.join(" "),
                        escape(style.primary())
                    );
                    i = j;
                }
            }
        }
        TrackKind::Heatmap => {
            for (r, a0, a1) in rows {
                let fill = match &r.value {
                    AttachValue::Num(v) => ramp(style, norm.apply(*v)),
                    AttachValue::Cat(c) => cats.color(c).to_string(),
                };
                let _ = writeln!(
                    out,
                    "<path class=\"datum cell\" d=\"{}\" fill=\"{}\"/>",
                    sector(inner, outer, a0, a1),
                    escape(&fill)
                );
            }
        }
        TrackKind::Tile => {
            let intervals: Vec<(&str, u64, u64)> =
                rows.iter().map(|(r, _, _)| (r.block.as_str(), r.start, r.end)).collect();
            let lanes = pack_lanes(&intervals);
            let count = lanes.iter().max().map_or(1, |m| m + 1);
            let h = thickness / count as f64;
            for ((r, a0, a1), lane) in rows.into_iter().zip(lanes) {
                let fill = match &r.value {
                    AttachValue::Num(_) => style.primary(),
                    AttachValue::Cat(c) => cats.color(c),
                };
                let r0 = inner + h * lane as f64;
                let _ = writeln!(
                    out,
                    "<path class=\"datum tile\" data-lane=\"{lane}\" d=\"{}\" fill=\"{}\"/>",
                    sector(r0, r0 + h, a0, a1),
                    escape(fill)
                );
            }
        }
        // Highlight, others, and attachment data bound to an ideogram slot.
        _ => {
            let class = if kind == TrackKind::Highlight { "highlight" } else { "region" };
            for (r, a0, a1) in rows {
                let fill = match &r.value {
                    AttachValue::Num(_) => style.primary(),
                    AttachValue::Cat(c) => cats.color(c),
                };
                let _ = writeln!(
                    out,
                    "<path class=\"datum {class}\" d=\"{}\" fill=\"{}\"/>",
                    sector(inner, outer, a0, a1),
                    escape(fill)
                );
            }
        }
    }
}

fn chord(out: &mut String, ctx: &Ctx, style: &TrackStyle, rows: &[LinkRow]) {
    let r = ctx.band.outer;
    let c = ctx.bezier * r;
    for row in rows {
        let (Some(s), Some(t)) = (ctx.scale.block(&row.src.block), ctx.scale.block(&row.dst.block)) else {
            continue;
        };
        let (s0, s1) = (s.angle(row.src.start as f64), s.angle(row.src.end as f64));
        let (d0, d1) = (t.angle(row.dst.start as f64), t.angle(row.dst.end as f64));
        let mut d = format!("M{}", xy(point(r, s0)));
        arc_to(&mut d, r, s0, s1);
        let _ = write!(d, " C{} {} {}", xy(point(c, s1)), xy(point(c, d0)), xy(point(r, d0)));
        arc_to(&mut d, r, d0, d1);
        let _ = write!(d, " C{} {} {} Z", xy(point(c, d1)), xy(point(c, s0)), xy(point(r, s0)));
        let _ = writeln!(
            out,
            "<path class=\"datum ribbon\" data-value=\"{}\" d=\"{d}\" fill=\"{}\"/>",
            num(row.value),
            escape(style.primary())
        );
    }
}

/// Empty group standing in for a track that cannot be drawn.
fn unbound(out: &mut String, addr: TrackAddr, kind: TrackKind, why: &str) {
    let _ = writeln!(
        out,
        "<g class=\"track track-{}\" data-track=\"{addr}\" data-unbound=\"true\">\n<!-- warning: {} track {addr} skipped: {why} -->\n</g>",
        kind.name(),
        kind.name()
    );
}

/// Renders the session. Identical sessions give byte-identical output.
pub fn render_svg(session: &PlotSession) -> Result<String, RenderError> {
    let canvas = &session.canvas;
    let (w, h) = (canvas.width, canvas.height);
    if !(w > 0.0 && h > 0.0) {
        return Err(super::LayoutError::InvalidCanvas(format!("{w}x{h}")).into());
    }
    let (cx, cy) = canvas.center();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(out, "<g class=\"plot\" transform=\"translate({},{})\">", num(cx), num(cy));
    if !session.config.is_empty() {
        let axis = session.axis_blocks();
        let scale = if axis.is_empty() {
            None
        } else {
            Some(angular_scale(axis.iter().map(|b| (b.id.as_str(), b.length)), canvas.gap_degrees)?)
        };
        let bands = radial_bands(&session.config, canvas)?;
        let tracks: Vec<(TrackAddr, TrackKind)> = session.config.tracks().collect();
        for (ring, band) in bands.iter().enumerate() {
            let _ = writeln!(
                out,
                "<g class=\"ring\" data-ring=\"{ring}\" data-r0=\"{}\" data-r1=\"{}\">",
                num(band.inner),
                num(band.outer)
            );
            for &(addr, kind) in tracks.iter().filter(|(a, _)| a.ring == ring) {
                let binding = session.binding(addr).filter(|b| b.kind == kind);
                let dataset = binding.and_then(|b| session.dataset(&b.dataset_id));
                let (Some(scale), Some(b), Some(ds)) = (&scale, binding, dataset) else {
                    let why = if scale.is_none() {
                        "no karyotype defines the genome axis"
                    } else if binding.is_none() {
                        "no dataset bound"
                    } else {
                        "bound dataset was removed"
                    };
                    unbound(&mut out, addr, kind, why);
                    continue;
                };
                let ctx =
                    Ctx { scale, band: *band, bezier: canvas.bezier_control_factor, marker: canvas.marker_radius };
                open_track(&mut out, b);
                match &ds.data {
                    DatasetData::Karyotype(blocks) => ideogram(&mut out, &ctx, &b.style, blocks),
                    DatasetData::Attachment(rows) => attachment(&mut out, &ctx, kind, &b.style, rows),
                    DatasetData::Link(rows) => chord(&mut out, &ctx, &b.style, rows),
                }
                out.push_str("</g>\n");
            }
            out.push_str("</g>\n");
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Hex SHA-256 of the rendered document.
pub fn render_hash(svg: &str) -> String {
    Sha256::digest(svg.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
