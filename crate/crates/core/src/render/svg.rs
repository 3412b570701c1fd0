use std::fmt::Write as _;

use super::{Bar, PlotData, PlotDocument, Style, PLOT_SCHEMA};
use crate::error::{Error, Result};

const TOP: f64 = 44.0;
const BOTTOM: f64 = 40.0;
const RIGHT: f64 = 60.0;

/// Two-decimal coordinates keep output stable; `-0.00` is normalized.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn esc(s: &str) -> String {
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

fn parse_hex(c: &str) -> (f64, f64, f64) {
    let c = c.trim_start_matches('#');
    let ch = |i: usize| u8::from_str_radix(c.get(i..i + 2).unwrap_or("00"), 16).unwrap_or(0) as f64;
    (ch(0), ch(2), ch(4))
}

/// Linear RGB blend from `a` (t = 0) to `b` (t = 1).
pub(crate) fn gradient(a: &str, b: &str, t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (a, b) = (parse_hex(a), parse_hex(b));
    let mix = |x: f64, y: f64| (x + (y - x) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn fmt_value(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Canvas {
    out: String,
    width: f64,
    height: f64,
    font: String,
}

impl Canvas {
    fn new(width: f64, height: f64, style: &Style) -> Self {
        Canvas {
            out: String::new(),
            width,
            height,
            font: style.font_family.clone(),
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, opacity: Option<f64>) {
        let _ = write!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}""#,
            n(x),
            n(y),
            n(w.max(0.0)),
            n(h.max(0.0)),
            esc(fill)
        );
        if let Some(o) = opacity {
            let _ = write!(self.out, r#" fill-opacity="{}""#, n(o));
        }
        self.out.push_str("/>\n");
    }

    #[allow(clippy::too_many_arguments)]
    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dashed: bool) {
        let _ = write!(
            self.out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}""#,
            n(x1),
            n(y1),
            n(x2),
            n(y2),
            esc(stroke),
            n(width)
        );
        if dashed {
            self.out.push_str(r#" stroke-dasharray="6 4""#);
        }
        self.out.push_str("/>\n");
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            n(cx),
            n(cy),
            n(r),
            esc(fill)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", n(x), n(y))).collect();
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            esc(stroke)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, s: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="{}" font-family="{}">{}</text>"#,
            n(x),
            n(y),
            n(size),
            esc(&self.font),
            esc(s)
        );
    }

    fn finish(self, doc: &PlotDocument) -> Result<String> {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-schema="{}" data-kind="{}">"#,
            PLOT_SCHEMA,
            doc.kind().as_str(),
            w = n(self.width),
            h = n(self.height),
        );
        if let Some(meta) = &doc.metadata {
            let _ = writeln!(svg, "<metadata>{}</metadata>", esc(&serde_json::to_string(meta)?));
        }
        let _ = writeln!(
            svg,
            r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
            n(self.width),
            n(self.height)
        );
        svg.push_str(&self.out);
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

/// Maps a value interval onto a pixel interval.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPlot(format!("{what} is not finite")))
    }
}

fn check_axis(axis: (f64, f64)) -> Result<()> {
    finite(axis.0, "axis start")?;
    finite(axis.1, "axis end")?;
    if axis.0 >= axis.1 {
        return Err(Error::InvalidPlot(format!("axis [{}, {}] is empty", axis.0, axis.1)));
    }
    Ok(())
}

fn check_grid(axis: &[f64], categories: &Option<Vec<String>>, name: &str) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidPlot(format!("{name} axis is empty")));
    }
    for &v in axis {
        finite(v, name)?;
    }
    if let Some(c) = categories {
        if c.len() != axis.len() {
            return Err(Error::InvalidPlot(format!(
                "{name} has {} categories for {} points",
                c.len(),
                axis.len()
            )));
        }
    }
    Ok(())
}

/// Structural checks a document must pass before it can be drawn.
pub(crate) fn validate(doc: &PlotDocument) -> Result<()> {
    if doc.schema != PLOT_SCHEMA {
        return Err(Error::InvalidPlot(format!("unsupported schema '{}'", doc.schema)));
    }
    match &doc.data {
        PlotData::InfluenceBar { axis, bars, cu_ref, .. } => {
            check_axis(*axis)?;
            finite(*cu_ref, "cu_ref")?;
            bars.iter().try_for_each(|b| finite(b.value, "bar value"))
        }
        PlotData::ContrastiveBar { axis, bars } => {
            check_axis(*axis)?;
            bars.iter().try_for_each(|b| finite(b.value, "bar value"))
        }
        PlotData::PiOverlap { axis, bars, .. } => {
            check_axis(*axis)?;
            bars.iter().try_for_each(|b| {
                finite(b.transparent, "bar length")?;
                finite(b.solid, "bar length")
            })
        }
        PlotData::PiColor { axis, bars, .. } => {
            check_axis(*axis)?;
            bars.iter().try_for_each(|b| finite(b.ci, "bar length"))
        }
        PlotData::IoPlot {
            x,
            categories,
            series,
            y_range,
            instance_x,
            ..
        } => {
            check_grid(x, categories, "x")?;
            check_axis(*y_range)?;
            finite(*instance_x, "instance x")?;
            if series.is_empty() {
                return Err(Error::InvalidPlot("io plot has no series".into()));
            }
            for s in series {
                if s.y.len() != x.len() {
                    return Err(Error::InvalidPlot(format!(
                        "series '{}' has {} values for {} points",
                        s.name,
                        s.y.len(),
                        x.len()
                    )));
                }
                s.y.iter().try_for_each(|&v| finite(v, "curve value"))?;
                finite(s.out_value, "instance output")?;
            }
            Ok(())
        }
        PlotData::HeatmapSurface {
            x,
            y,
            z,
            range,
            x_categories,
            y_categories,
            instance,
            ..
        } => {
            check_grid(x, x_categories, "x")?;
            check_grid(y, y_categories, "y")?;
            check_axis(*range)?;
            finite(instance.0, "instance")?;
            finite(instance.1, "instance")?;
            if z.len() != y.len() || z.iter().any(|row| row.len() != x.len()) {
                return Err(Error::InvalidPlot(format!(
                    "surface grid must be {} rows of {} values",
                    y.len(),
                    x.len()
                )));
            }
            z.iter().flatten().try_for_each(|&v| finite(v, "surface value"))
        }
        PlotData::Beeswarm { axis, bins, lanes, .. } => {
            check_axis(*axis)?;
            if *bins == 0 || lanes.is_empty() {
                return Err(Error::InvalidPlot("beeswarm needs bins and lanes".into()));
            }
            for d in lanes.iter().flat_map(|l| &l.dots) {
                finite(d.value, "dot value")?;
                if d.bin >= *bins {
                    return Err(Error::InvalidPlot(format!("dot bin {} out of range", d.bin)));
                }
            }
            Ok(())
        }
    }
}

/// Header with optional title and a subtitle line.
fn header(c: &mut Canvas, doc: &PlotDocument, subtitle: &str) {
    let mid = c.width / 2.0;
    match &doc.title {
        Some(t) => {
            c.text(mid, 18.0, "middle", 15.0, t);
            c.text(mid, 34.0, "middle", 11.0, subtitle);
        }
        None => c.text(mid, 24.0, "middle", 13.0, subtitle),
    }
}

fn x_ticks(c: &mut Canvas, scale: Scale, ticks: &[f64], y: f64) {
    c.line(scale.p0, y, scale.p1, y, "#333333", 1.0, false);
    for &t in ticks {
        let x = scale.at(t);
        c.line(x, y, x, y + 4.0, "#333333", 1.0, false);
        c.text(x, y + 16.0, "middle", 10.0, &fmt_tick(t));
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn ticks(axis: (f64, f64), include_zero: bool) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=4).map(|i| axis.0 + (axis.1 - axis.0) * i as f64 / 4.0).collect();
    if include_zero && axis.0 < 0.0 && axis.1 > 0.0 && !t.iter().any(|v| v.abs() < 1e-12) {
        t.push(0.0);
        t.sort_by(f64::total_cmp);
    }
    t
}

/// Signed bars from zero, shared by influence and contrastive plots.
fn diverging(doc: &PlotDocument, axis: (f64, f64), bars: &[Bar], subtitle: &str, style: &Style) -> Result<String> {
    let h = TOP + bars.len().max(1) as f64 * style.row_height + BOTTOM;
    let mut c = Canvas::new(style.width, h, style);
    header(&mut c, doc, subtitle);
    let scale = Scale {
        d0: axis.0,
        d1: axis.1,
        p0: style.label_width,
        p1: style.width - RIGHT,
    };
    let zero = scale.at(0.0_f64.clamp(axis.0, axis.1));
    for (i, b) in bars.iter().enumerate() {
        let y = TOP + i as f64 * style.row_height;
        let bh = style.row_height * 0.7;
        c.text(style.label_width - 8.0, y + bh * 0.75, "end", 11.0, &b.label);
        let end = scale.at(b.value.clamp(axis.0, axis.1));
        let fill = if b.value < 0.0 { &style.negative } else { &style.positive };
        c.rect(zero.min(end), y, (end - zero).abs(), bh, fill, None);
        let (tx, anchor) = if b.value < 0.0 { (zero.min(end) - 4.0, "end") } else { (zero.max(end) + 4.0, "start") };
        c.text(tx, y + bh * 0.75, anchor, 10.0, &fmt_value(b.value));
    }
    let axis_y = h - BOTTOM + 4.0;
    c.line(zero, TOP - 4.0, zero, axis_y, "#333333", 1.0, false);
    x_ticks(&mut c, scale, &ticks(axis, true), axis_y);
    c.finish(doc)
}

fn pi_layout(doc: &PlotDocument, n_bars: usize, style: &Style, subtitle: &str) -> (Canvas, Scale) {
    let h = TOP + n_bars.max(1) as f64 * style.row_height + BOTTOM;
    let mut c = Canvas::new(style.width, h, style);
    header(&mut c, doc, subtitle);
    let scale = Scale {
        d0: 0.0,
        d1: 1.0,
        p0: style.label_width,
        p1: style.width - RIGHT,
    };
    (c, scale)
}

/// Pixel scale for a grid axis: numeric values map linearly, categories to
/// evenly spaced slots.
fn grid_scale(values: &[f64], categorical: bool, p0: f64, p1: f64) -> Scale {
    if categorical || values.len() < 2 {
        let k = values.len().max(1) as f64;
        Scale {
            d0: -0.5,
            d1: k - 0.5,
            p0,
            p1,
        }
    } else {
        Scale {
            d0: values[0],
            d1: values[values.len() - 1],
            p0,
            p1,
        }
    }
}

fn render_io(doc: &PlotDocument, style: &Style) -> Result<String> {
    let PlotData::IoPlot {
        feature,
        categories,
        x,
        instance_x,
        y_range,
        series,
        ..
    } = &doc.data
    else {
        unreachable!()
    };
    let (left, plot_h) = (70.0, 320.0);
    let legend_h = 18.0 * series.len() as f64;
    let h = TOP + plot_h + BOTTOM + 16.0 + legend_h;
    let mut c = Canvas::new(style.width, h, style);
    let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
    header(&mut c, doc, &format!("{} vs {feature}", names.join(", ")));

    let mut lo = y_range.0;
    let mut hi = y_range.1;
    for s in series {
        for v in s.y.iter().chain([&s.out_value]).chain(s.ymin.iter()).chain(s.ymax.iter()) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let ys = Scale {
        d0: lo,
        d1: hi,
        p0: TOP + plot_h,
        p1: TOP,
    };
    let xs = grid_scale(x, categories.is_some(), left, style.width - RIGHT);
    let px = |v: f64| match categories {
        Some(_) => xs.at(x.iter().position(|&c| c == v).map(|i| i as f64).unwrap_or(v)),
        None => xs.at(v),
    };

    c.line(left, TOP, left, TOP + plot_h, "#333333", 1.0, false);
    for t in ticks((lo, hi), false) {
        let y = ys.at(t);
        c.line(left - 4.0, y, left, y, "#333333", 1.0, false);
        c.text(left - 6.0, y + 3.5, "end", 10.0, &fmt_tick(t));
    }
    let axis_y = TOP + plot_h;
    c.line(left, axis_y, style.width - RIGHT, axis_y, "#333333", 1.0, false);
    match categories {
        Some(cats) => {
            for (i, cat) in cats.iter().enumerate() {
                let xx = xs.at(i as f64);
                c.line(xx, axis_y, xx, axis_y + 4.0, "#333333", 1.0, false);
                c.text(xx, axis_y + 16.0, "middle", 10.0, cat);
            }
        }
        None => {
            for t in ticks((x[0], x[x.len() - 1]), false) {
                let xx = xs.at(t);
                c.line(xx, axis_y, xx, axis_y + 4.0, "#333333", 1.0, false);
                c.text(xx, axis_y + 16.0, "middle", 10.0, &fmt_tick(t));
            }
        }
    }
    c.text((left + style.width - RIGHT) / 2.0, axis_y + 32.0, "middle", 11.0, feature);

    let (x0, x1) = (left, style.width - RIGHT);
    for (k, s) in series.iter().enumerate() {
        let color = &style.series[k % style.series.len()];
        if let Some(v) = s.ymin {
            c.line(x0, ys.at(v), x1, ys.at(v), &style.ymin_line, 1.5, false);
        }
        if let Some(v) = s.ymax {
            c.line(x0, ys.at(v), x1, ys.at(v), &style.ymax_line, 1.5, false);
        }
        if let Some(v) = s.neutral {
            c.line(x0, ys.at(v), x1, ys.at(v), &style.neutral_line, 1.5, true);
        }
        match categories {
            Some(_) => {
                for (i, &v) in s.y.iter().enumerate() {
                    let cx = xs.at(i as f64);
                    c.line(cx, ys.at(lo), cx, ys.at(v), color, 2.0, false);
                    c.circle(cx, ys.at(v), 4.0, color);
                }
            }
            None => {
                let pts: Vec<(f64, f64)> = x.iter().zip(&s.y).map(|(&a, &b)| (xs.at(a), ys.at(b))).collect();
                c.polyline(&pts, color);
            }
        }
        c.circle(px(*instance_x), ys.at(s.out_value), 5.0, &style.instance);
        let ly = TOP + plot_h + BOTTOM + 16.0 + 18.0 * k as f64;
        c.rect(left, ly - 9.0, 14.0, 10.0, color, None);
        c.text(left + 20.0, ly, "start", 11.0, &s.name);
    }
    c.finish(doc)
}

fn color_bar(c: &mut Canvas, x: f64, y: f64, w: f64, low: &str, high: &str, labels: (&str, &str)) {
    let steps = 20;
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        c.rect(x + w * i as f64 / steps as f64, y, w / steps as f64, 10.0, &gradient(low, high, t), None);
    }
    c.text(x, y + 22.0, "start", 10.0, labels.0);
    c.text(x + w, y + 22.0, "end", 10.0, labels.1);
}

const HEAT_LOW: &str = "#f7fbff";
const HEAT_HIGH: &str = "#08306b";

fn render_heatmap(doc: &PlotDocument, style: &Style) -> Result<String> {
    let PlotData::HeatmapSurface {
        output,
        x_feature,
        y_feature,
        x_categories,
        y_categories,
        x,
        y,
        z,
        range,
        instance,
    } = &doc.data
    else {
        unreachable!()
    };
    let (left, side) = (90.0, 360.0);
    let h = TOP + side + BOTTOM + 60.0;
    let mut c = Canvas::new(style.width, h, style);
    header(&mut c, doc, &format!("{output} over {x_feature} × {y_feature}"));
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (cw, ch) = (side / nx, side / ny);
    for (iy, row) in z.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            let t = (v - range.0) / (range.1 - range.0);
            c.rect(
                left + ix as f64 * cw,
                TOP + side - (iy as f64 + 1.0) * ch,
                cw,
                ch,
                &gradient(HEAT_LOW, HEAT_HIGH, t),
                None,
            );
        }
    }
    // Instance position in cell-centre coordinates.
    let pos = |v: f64, axis: &[f64], cats: &Option<Vec<String>>| -> f64 {
        if cats.is_some() || axis.len() < 2 {
            axis.iter().position(|&a| a == v).map(|i| i as f64).unwrap_or(0.0)
        } else {
            (v - axis[0]) / (axis[axis.len() - 1] - axis[0]) * (axis.len() - 1) as f64
        }
    };
    let ix = pos(instance.0, x, x_categories);
    let iy = pos(instance.1, y, y_categories);
    c.circle(left + (ix + 0.5) * cw, TOP + side - (iy + 0.5) * ch, 5.0, &style.instance);

    let axis_y = TOP + side;
    let label = |axis: &[f64], cats: &Option<Vec<String>>, i: usize| match cats {
        Some(cs) => cs[i].clone(),
        None => fmt_tick(axis[i]),
    };
    let every = |len: usize| (len / 5).max(1);
    for i in (0..x.len()).step_by(every(x.len())).chain(std::iter::once(x.len() - 1)) {
        c.text(left + (i as f64 + 0.5) * cw, axis_y + 14.0, "middle", 10.0, &label(x, x_categories, i));
    }
    for i in (0..y.len()).step_by(every(y.len())).chain(std::iter::once(y.len() - 1)) {
        c.text(left - 6.0, axis_y - (i as f64 + 0.5) * ch + 3.5, "end", 10.0, &label(y, y_categories, i));
    }
    c.text(left + side / 2.0, axis_y + 30.0, "middle", 11.0, x_feature);
    c.text(14.0, TOP + side / 2.0, "start", 11.0, y_feature);
    color_bar(
        &mut c,
        left + side + 30.0,
        TOP + side / 2.0,
        style.width - (left + side + 30.0) - RIGHT,
        HEAT_LOW,
        HEAT_HIGH,
        (&fmt_tick(range.0), &fmt_tick(range.1)),
    );
    c.text(left + side + 30.0, TOP + side / 2.0 - 8.0, "start", 10.0, &format!("{output} range"));
    c.finish(doc)
}

fn render_beeswarm(doc: &PlotDocument, style: &Style) -> Result<String> {
    let PlotData::Beeswarm {
        statistic,
        axis,
        lanes,
        ..
    } = &doc.data
    else {
        unreachable!()
    };
    let lane_h = style.row_height * 2.0;
    let h = TOP + lane_h * lanes.len() as f64 + BOTTOM + 36.0;
    let mut c = Canvas::new(style.width, h, style);
    let stat = match statistic {
        super::BeeswarmStatistic::Ci => "CI",
        super::BeeswarmStatistic::Cu => "CU",
        super::BeeswarmStatistic::Influence => "influence",
    };
    header(&mut c, doc, &format!("{stat} per feature and instance"));
    let scale = Scale {
        d0: axis.0,
        d1: axis.1,
        p0: style.label_width,
        p1: style.width - RIGHT,
    };
    let max_slot = lanes
        .iter()
        .flat_map(|l| &l.dots)
        .map(|d| d.slot.unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    // Shrink dots until the tallest stack fits inside a lane.
    let r = style.dot_radius.min(lane_h / (2.0 * (2.0 * max_slot + 1.0)));
    for (i, lane) in lanes.iter().enumerate() {
        let cy = TOP + (i as f64 + 0.5) * lane_h;
        c.line(scale.p0, cy, scale.p1, cy, "#e0e0e0", 1.0, false);
        c.text(style.label_width - 8.0, cy + 3.5, "end", 11.0, &lane.label);
        for d in &lane.dots {
            let fill = match d.color_value {
                Some(t) => gradient(&style.low, &style.high, t),
                None => style.missing.clone(),
            };
            c.circle(
                scale.at(d.value.clamp(axis.0, axis.1)),
                cy - d.slot as f64 * 2.0 * r,
                r,
                &fill,
            );
        }
    }
    let axis_y = TOP + lane_h * lanes.len() as f64 + 4.0;
    if axis.0 < 0.0 && axis.1 > 0.0 {
        let z = scale.at(0.0);
        c.line(z, TOP, z, axis_y, "#999999", 1.0, true);
    }
    x_ticks(&mut c, scale, &ticks(*axis, true), axis_y);
    color_bar(
        &mut c,
        style.width - RIGHT - 160.0,
        axis_y + 24.0,
        160.0,
        &style.low,
        &style.high,
        ("low value", "high value"),
    );
    c.finish(doc)
}

/// Draw a plot document. Output depends only on the document and style.
pub fn render_svg(doc: &PlotDocument, style: &Style) -> Result<String> {
    validate(doc)?;
    match &doc.data {
        PlotData::InfluenceBar {
            output, axis, bars, cu_ref,
        } => diverging(
            doc,
            *axis,
            bars,
            &format!("Contextual influence on {output} (CU_ref={})", fmt_tick(*cu_ref)),
            style,
        ),
        PlotData::ContrastiveBar { axis, bars } => diverging(doc, *axis, bars, "Contrastive influence", style),
        PlotData::PiOverlap { output, bars, .. } => {
            let (mut c, scale) = pi_layout(doc, bars.len(), style, &format!("Potential influence on {output}"));
            for (i, b) in bars.iter().enumerate() {
                let y = TOP + i as f64 * style.row_height;
                let bh = style.row_height * 0.7;
                c.text(style.label_width - 8.0, y + bh * 0.75, "end", 11.0, &b.label);
                let w = scale.at(b.transparent.clamp(0.0, 1.0)) - scale.p0;
                c.rect(scale.p0, y, w, bh, &style.positive, Some(style.transparent_opacity));
                let w = scale.at(b.solid.clamp(0.0, 1.0)) - scale.p0;
                c.rect(scale.p0, y, w, bh, &style.positive, None);
            }
            let axis_y = c.height - BOTTOM + 4.0;
            x_ticks(&mut c, scale, &ticks((0.0, 1.0), false), axis_y);
            c.finish(doc)
        }
        PlotData::PiColor { output, bars, .. } => {
            let (mut c, scale) = pi_layout(doc, bars.len(), style, &format!("Importance and utility for {output}"));
            for (i, b) in bars.iter().enumerate() {
                let y = TOP + i as f64 * style.row_height;
                let bh = style.row_height * 0.7;
                c.text(style.label_width - 8.0, y + bh * 0.75, "end", 11.0, &b.label);
                let w = scale.at(b.ci.clamp(0.0, 1.0)) - scale.p0;
                c.rect(scale.p0, y, w, bh, &b.color, None);
            }
            let axis_y = c.height - BOTTOM + 4.0;
            x_ticks(&mut c, scale, &ticks((0.0, 1.0), false), axis_y);
            c.finish(doc)
        }
        PlotData::IoPlot { .. } => render_io(doc, style),
        PlotData::HeatmapSurface { .. } => render_heatmap(doc, style),
        PlotData::Beeswarm { .. } => render_beeswarm(doc, style),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpers() {
        assert_eq!(n(-0.001), "0.00");
        assert_eq!(esc("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
        assert_eq!(gradient("#000000", "#ffffff", 0.5), "#808080");
        assert_eq!(gradient("#d73027", "#1a9850", 0.0), "#d73027");
        assert_eq!(gradient("#d73027", "#1a9850", 1.0), "#1a9850");
        assert_eq!(fmt_tick(-0.5), "-0.5");
        assert_eq!(fmt_tick(1.0), "1");
    }
}
