//! SVG 1.1 figures: biplots, dendrograms, coherence box plots and curves.

use std::fmt::Write;

use crate::cluster::Dendrogram;
use crate::diagnostics::CoherenceReport;
use crate::error::{invalid, Result};
use crate::io::fmt_num;
use crate::ordination::{EllipseSet, Ordination};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn px(x: f64) -> String {
    format!("{x:.2}")
}

/// Linear map from a data window onto the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if (b - a).abs() < 1e-300 { (a - 0.5, b + 0.5) } else { (a, b) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }
    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }
    fn sy(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
    fn inside(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, esc(title));
    s
}

fn axes(s: &mut String, f: &Frame, xlab: &str, ylab: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
    for (v, anchor) in [(f.x0, "start"), (f.x1, "end")] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#, px(f.sx(v)), b + 14.0, fmt_num(round3(v)));
    }
    for v in [f.y0, f.y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, px(f.sy(v) + 4.0), fmt_num(round3(v)));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 18.0, esc(xlab));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylab)
    );
}

fn round3(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let mag = 10f64.powi(2 - v.abs().log10().floor() as i32);
    (v * mag).round() / mag
}

#[derive(Debug, Clone, Default)]
pub struct BiplotOptions<'a> {
    /// Zero-based dimensions to plot.
    pub dims: (usize, usize),
    /// Column labels drawn only where true; all columns when absent.
    pub flagged: Option<&'a [bool]>,
    /// Group label per row, for colouring.
    pub groups: Option<&'a [String]>,
    pub ellipses: Option<&'a EllipseSet>,
    /// Zoom window `[xmin, xmax, ymin, ymax]`.
    pub window: Option<[f64; 4]>,
    /// Use contribution coordinates for columns instead of standard ones.
    pub contribution: bool,
    /// Multiplier applied to column coordinates.
    pub column_scale: f64,
}

/// Rows in principal coordinates, columns as arrows.
pub fn biplot(o: &Ordination, opts: &BiplotOptions) -> Result<String> {
    let (a, b) = opts.dims;
    if a >= o.rank() || b >= o.rank() || a == b {
        return Err(invalid(format!(
            "biplot dimensions ({}, {}) invalid for rank {}",
            a + 1,
            b + 1,
            o.rank()
        )));
    }
    if let Some(g) = opts.groups {
        if g.len() != o.row_ids.len() {
            return Err(invalid("group labels do not match the rows"));
        }
    }
    let cols = if opts.contribution { o.contribution_coordinates() } else { o.col_standard.clone() };
    let scale = if opts.column_scale > 0.0 { opts.column_scale } else { 1.0 };
    let rows = &o.row_principal;
    let mut xs: Vec<f64> = rows.column(a).iter().copied().collect();
    let mut ys: Vec<f64> = rows.column(b).iter().copied().collect();
    xs.extend(cols.column(a).iter().map(|v| v * scale));
    ys.extend(cols.column(b).iter().map(|v| v * scale));
    xs.push(0.0);
    ys.push(0.0);
    let f = match opts.window {
        Some([x0, x1, y0, y1]) => Frame::new(x0, x1, y0, y1),
        None => {
            let mm = |v: &[f64]| v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
            let ((x0, x1), (y0, y1)) = (mm(&xs), mm(&ys));
            let (dx, dy) = ((x1 - x0) * 0.08, (y1 - y0) * 0.08);
            Frame::new(x0 - dx, x1 + dx, y0 - dy, y1 + dy)
        }
    };
    let pct = |k: usize| 100.0 * o.explained_shares.get(k).copied().unwrap_or(0.0);
    let mut s = open(&format!("{:?} biplot", o.method));
    axes(
        &mut s,
        &f,
        &format!("dim {} ({:.1}%)", a + 1, pct(a)),
        &format!("dim {} ({:.1}%)", b + 1, pct(b)),
    );
    let (ox, oy) = (f.sx(0.0), f.sy(0.0));
    let _ = writeln!(s, r##"<g stroke="#bbb" stroke-dasharray="3,3"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"##,
        px(MARGIN), px(oy), px(W - MARGIN), px(oy), px(ox), px(MARGIN), px(ox), px(H - MARGIN));

    let levels: Vec<String> = match opts.groups {
        Some(g) => crate::compmat::encode_labels(g).0,
        None => Vec::new(),
    };
    let colour = |label: &str| {
        levels
            .iter()
            .position(|l| l == label)
            .map_or("#333333", |k| PALETTE[k % PALETTE.len()])
    };
    let _ = writeln!(s, "<g>");
    for i in 0..rows.nrows() {
        let (x, y) = (rows[(i, a)], rows[(i, b)]);
        if !f.inside(x, y) {
            continue;
        }
        let c = opts.groups.map_or("#333333", |g| colour(&g[i]));
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{c}" fill-opacity="0.7"/>"#, px(f.sx(x)), px(f.sy(y)));
    }
    let _ = writeln!(s, "</g>");

    if let Some(es) = opts.ellipses {
        if es.dims == (a, b) {
            for e in &es.ellipses {
                let c = colour(&e.group);
                let n = 72;
                let mut path = String::new();
                for t in 0..=n {
                    let th = t as f64 / n as f64 * std::f64::consts::TAU;
                    let (u, v) = (e.semi_axes[0] * th.cos(), e.semi_axes[1] * th.sin());
                    let x = e.center[0] + u * e.angle.cos() - v * e.angle.sin();
                    let y = e.center[1] + u * e.angle.sin() + v * e.angle.cos();
                    let _ = write!(path, "{}{},{} ", if t == 0 { "M" } else { "L" }, px(f.sx(x)), px(f.sy(y)));
                }
                let _ = writeln!(s, r#"<path d="{}Z" fill="{c}" fill-opacity="0.15" stroke="{c}"/>"#, path.trim_end());
                let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}" font-weight="bold">{}</text>"#,
                    px(f.sx(e.center[0]) + 4.0), px(f.sy(e.center[1]) - 4.0), esc(&e.group));
            }
        }
    }

    let _ = writeln!(s, r##"<g stroke="#b2182b" fill="#b2182b">"##);
    for j in 0..cols.nrows() {
        let shown = opts.flagged.is_none_or(|fl| fl.get(j).copied().unwrap_or(false));
        let (x, y) = (cols[(j, a)] * scale, cols[(j, b)] * scale);
        if !f.inside(x, y) {
            continue;
        }
        let (x, y) = (f.sx(x), f.sy(y));
        let opacity = if shown { "1" } else { "0.25" };
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-opacity="{opacity}"/>"#, px(ox), px(oy), px(x), px(y));
        if shown {
            let _ = writeln!(s, r#"<text x="{}" y="{}" stroke="none">{}</text>"#, px(x + 3.0), px(y - 3.0), esc(&o.col_labels[j]));
        }
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

/// Dendrogram with leaves along the bottom and heights upwards.
pub fn dendrogram(d: &Dendrogram) -> String {
    let n = d.nleaves();
    let order = d.order();
    let mut xpos = vec![0.0; n + d.merges.len()];
    for (rank, &leaf) in order.iter().enumerate() {
        xpos[leaf] = rank as f64;
    }
    let mut ypos = vec![0.0; n + d.merges.len()];
    let hmax = d.merges.iter().map(|m| m.height).fold(0.0, f64::max);
    let f = Frame::new(-0.5, n as f64 - 0.5, 0.0, if hmax > 0.0 { hmax * 1.05 } else { 1.0 });
    let ylab = match d.height_kind {
        crate::cluster::HeightKind::WardDistance => "height",
        crate::cluster::HeightKind::VarianceLossPercent => "variance lost (%)",
    };
    let mut s = open("Cluster dendrogram");
    axes(&mut s, &f, "", ylab);
    let _ = writeln!(s, r##"<g stroke="#222" fill="none">"##);
    for (i, m) in d.merges.iter().enumerate() {
        let node = n + i;
        xpos[node] = (xpos[m.left] + xpos[m.right]) / 2.0;
        ypos[node] = m.height;
        let (xl, xr) = (f.sx(xpos[m.left]), f.sx(xpos[m.right]));
        let (yl, yr, yt) = (f.sy(ypos[m.left]), f.sy(ypos[m.right]), f.sy(m.height));
        let _ = writeln!(s, r#"<path d="M{},{} L{},{} L{},{} L{},{}"/>"#, px(xl), px(yl), px(xl), px(yt), px(xr), px(yt), px(xr), px(yr));
    }
    let _ = writeln!(s, "</g>");
    for &leaf in &order {
        let (x, y) = (f.sx(xpos[leaf]), H - MARGIN + 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" transform="rotate(-90 {} {})">{}</text>"#,
            px(x + 3.0), px(y), px(x + 3.0), px(y), esc(&d.leaf_names[leaf]));
    }
    s.push_str("</svg>\n");
    s
}

/// Box-whisker plot per subcomposition size: median, 2.5/97.5 percentile
/// whiskers, and the count of correlations above 0.999.
pub fn coherence_plot(r: &CoherenceReport) -> String {
    let lo = r.sizes.iter().map(|z| z.lower).fold(1.0, f64::min);
    let nx = r.sizes.len().max(1) as f64;
    let f = Frame::new(-0.5, nx - 0.5, lo.min(0.99) - 0.01 * (1.0 - lo).max(0.01), 1.0);
    let mut s = open(&format!("Subcompositional coherence ({:?})", r.geometry));
    axes(&mut s, &f, "subcomposition size", "Procrustes correlation");
    for (k, z) in r.sizes.iter().enumerate() {
        let x = f.sx(k as f64);
        let sorted = {
            let mut v = z.correlations.clone();
            v.sort_by(f64::total_cmp);
            v
        };
        let q1 = crate::diagnostics::quantile(&sorted, 0.25);
        let q3 = crate::diagnostics::quantile(&sorted, 0.75);
        let half = 0.3 * (W - 2.0 * MARGIN) / nx;
        let _ = writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#444"/>"##, px(x), px(f.sy(z.lower)), px(x), px(f.sy(z.upper)));
        let _ = writeln!(s, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#d1e5f0" stroke="#2166ac"/>"##,
            px(x - half), px(f.sy(q3)), px(2.0 * half), px((f.sy(q1) - f.sy(q3)).max(0.5)));
        let _ = writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#b2182b" stroke-width="2"/>"##,
            px(x - half), px(f.sy(z.median)), px(x + half), px(f.sy(z.median)));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(x), px(H - MARGIN + 26.0), z.size);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="9">{}</text>"#, px(x), px(MARGIN - 6.0), z.above_0999);
    }
    s.push_str("</svg>\n");
    s
}

/// Line plot of `y` against `x`, with markers.
pub fn curve_plot(title: &str, xlab: &str, ylab: &str, x: &[f64], y: &[f64]) -> Result<String> {
    if x.len() != y.len() || x.is_empty() {
        return Err(invalid("curve needs equal-length, non-empty series"));
    }
    let mm = |v: &[f64]| {
        v.iter()
            .filter(|t| t.is_finite())
            .fold((f64::MAX, f64::MIN), |(l, h), &t| (l.min(t), h.max(t)))
    };
    let ((x0, x1), (y0, y1)) = (mm(x), mm(y));
    if x0 > x1 || y0 > y1 {
        return Err(invalid("curve has no finite points"));
    }
    let dy = (y1 - y0) * 0.05;
    let f = Frame::new(x0, x1, y0 - dy, y1 + dy);
    let mut s = open(title);
    axes(&mut s, &f, xlab, ylab);
    let mut path = String::new();
    for (k, (&a, &b)) in x.iter().zip(y).filter(|(_, b)| b.is_finite()).enumerate() {
        let _ = write!(path, "{}{},{} ", if k == 0 { "M" } else { "L" }, px(f.sx(a)), px(f.sy(b)));
    }
    let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#2166ac" stroke-width="1.5"/>"##, path.trim_end());
    for (&a, &b) in x.iter().zip(y).filter(|(_, b)| b.is_finite()) {
        let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="2" fill="#2166ac"/>"##, px(f.sx(a)), px(f.sy(b)));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
