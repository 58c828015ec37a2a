//! Deterministic SVG figures: first-quadrant polar scatter of Y-indexes,
//! collaboration-network drawings, and the publications/citations
//! timeline.
//!
//! Rendering the same inputs twice yields byte-identical documents: no
//! timestamps, no generated ids, fixed-precision coordinates ("{:.2}").
//!
//! Viewport mapping (needed to invert plotted coordinates, also carried as
//! `data-` attributes on the root element):
//!
//! * polar: `px = margin + x·scale`, `py = origin_y − y·scale` with
//!   `origin_y = height − margin` and
//!   `scale = (min(width, height) − 2·margin) / grid_max`, where
//!   `grid_max` is the outermost gridline radius (the smallest multiple of
//!   the gridline step covering the largest j).
//! * network/timeline: data bounding box mapped into the margin-inset
//!   rectangle, preserving aspect ratio, y flipped.

use std::fmt::Write as _;

use crate::conetwork::{CoNetwork, Layout, Partition};
use crate::corpus::TimelinePeriod;
use crate::yindex::YIndex;
use crate::{Error, Result};

/// Figure geometry and styling.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    /// Only entities with j at/above this get a text label.
    pub label_min_j: u32,
    /// Fill colors cycled by community index (network) / series (charts).
    pub palette: Vec<String>,
}

impl Default for PlotSpec {
    fn default() -> PlotSpec {
        PlotSpec {
            width: 800,
            height: 600,
            margin: 60,
            label_min_j: 5,
            palette: [
                "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949", "#b07aa1",
                "#ff9da7", "#9c755f", "#bab0ac",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig(
                "plot width and height must be positive".to_string(),
            ));
        }
        if self.palette.is_empty() {
            return Err(Error::InvalidConfig(
                "plot palette must be non-empty".to_string(),
            ));
        }
        if 2 * self.margin >= self.width.min(self.height) {
            return Err(Error::InvalidConfig(format!(
                "margin {} leaves no drawing area in {}x{}",
                self.margin, self.width, self.height
            )));
        }
        Ok(())
    }

    fn color(&self, index: usize) -> &str {
        &self.palette[index % self.palette.len()]
    }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

fn svg_open(spec: &PlotSpec, extra_attrs: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"Helvetica, Arial, sans-serif\"{extra}>\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
        w = spec.width,
        h = spec.height,
        extra = extra_attrs,
    )
}

/// First-quadrant polar scatter: each entity at (j·cos h, j·sin h), with
/// quarter-circle gridlines at integer j steps and a dashed diagonal at
/// h = π/4 (equal first-author / corresponding-author emphasis).
/// Empty input renders axes only.
pub fn render_polar(yindices: &[YIndex], spec: &PlotSpec) -> String {
    let j_max = yindices.iter().map(|e| e.j).max().unwrap_or(0);
    let step = 1.max((f64::from(j_max) / 8.0).ceil() as u32);
    let grid_max = if j_max == 0 {
        step
    } else {
        step * j_max.div_ceil(step)
    };

    let margin = f64::from(spec.margin);
    let inner = f64::from(spec.width.min(spec.height)) - 2.0 * margin;
    let scale = inner / f64::from(grid_max);
    let origin_y = f64::from(spec.height) - margin;

    let mut svg = svg_open(
        spec,
        &format!(
            " data-figure=\"polar\" data-margin=\"{}\" data-origin-y=\"{}\" data-scale=\"{}\"",
            fmt2(margin),
            fmt2(origin_y),
            fmt6(scale)
        ),
    );

    // Gridlines: quarter arcs from the x-axis up to the y-axis.
    for ring in (step..=grid_max).step_by(step as usize) {
        let r = f64::from(ring) * scale;
        let _ = writeln!(
            svg,
            "<path class=\"grid\" d=\"M {sx} {sy} A {r} {r} 0 0 0 {ex} {ey}\" \
             fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            sx = fmt2(margin + r),
            sy = fmt2(origin_y),
            r = fmt2(r),
            ex = fmt2(margin),
            ey = fmt2(origin_y - r),
        );
        let _ = writeln!(
            svg,
            "<text class=\"grid-label\" x=\"{x}\" y=\"{y}\" font-size=\"10\" \
             fill=\"#666666\" text-anchor=\"middle\">{ring}</text>",
            x = fmt2(margin + r),
            y = fmt2(origin_y + 16.0),
        );
    }

    // Axes.
    let extent = f64::from(grid_max) * scale;
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>",
        x0 = fmt2(margin),
        y0 = fmt2(origin_y),
        x1 = fmt2(margin + extent),
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>",
        x0 = fmt2(margin),
        y0 = fmt2(origin_y),
        y1 = fmt2(origin_y - extent),
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" fill=\"#333333\" \
         text-anchor=\"middle\">x = j cos h</text>",
        x = fmt2(margin + extent / 2.0),
        y = fmt2(origin_y + 34.0),
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" fill=\"#333333\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {x} {y})\">y = j sin h</text>",
        x = fmt2(margin - 34.0),
        y = fmt2(origin_y - extent / 2.0),
    );

    // Equal-emphasis diagonal at h = π/4.
    let diag = std::f64::consts::FRAC_1_SQRT_2 * extent;
    let _ = writeln!(
        svg,
        "<line class=\"diagonal\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y1}\" \
         stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>",
        x0 = fmt2(margin),
        y0 = fmt2(origin_y),
        x1 = fmt2(margin + diag),
        y1 = fmt2(origin_y - diag),
    );

    // Points, then collision-adjusted labels (offset along the radial
    // direction; nothing is dropped).
    let mut label_anchors: Vec<(f64, f64)> = Vec::new();
    let mut labels = String::new();
    for entry in yindices {
        let px = margin + entry.x * scale;
        let py = origin_y - entry.y * scale;
        let _ = writeln!(
            svg,
            "<circle class=\"point\" cx=\"{cx}\" cy=\"{cy}\" r=\"4\" fill=\"{color}\" \
             fill-opacity=\"0.85\" data-entity=\"{entity}\" data-fp=\"{fp}\" \
             data-rp=\"{rp}\" data-j=\"{j}\" data-h=\"{h:.3}\"/>",
            cx = fmt2(px),
            cy = fmt2(py),
            color = spec.color(0),
            entity = escape_xml(&entry.entity),
            fp = entry.fp,
            rp = entry.rp,
            j = entry.j,
            h = entry.h,
        );
        if entry.j >= spec.label_min_j {
            // Unit radial direction; points at the origin label rightward.
            let norm = (entry.x * entry.x + entry.y * entry.y).sqrt();
            let (ux, uy) = if norm > 0.0 {
                (entry.x / norm, entry.y / norm)
            } else {
                (1.0, 0.0)
            };
            let (mut lx, mut ly) = (px + 7.0 * ux, py - 7.0 * uy);
            while label_anchors
                .iter()
                .any(|&(ax, ay)| ((ax - lx).powi(2) + (ay - ly).powi(2)).sqrt() < 10.0)
            {
                lx += 10.0 * ux;
                ly -= 10.0 * uy;
            }
            label_anchors.push((lx, ly));
            let _ = writeln!(
                labels,
                "<text class=\"label\" x=\"{x}\" y=\"{y}\" font-size=\"11\" \
                 fill=\"#222222\">{text}</text>",
                x = fmt2(lx),
                y = fmt2(ly),
                text = escape_xml(&entry.entity),
            );
        }
    }
    svg.push_str(&labels);
    svg.push_str("</svg>\n");
    svg
}

/// Map data-space positions into the margin-inset viewport, preserving
/// aspect ratio and flipping y. Returns (px, py) per input point.
fn fit_positions(points: &[(f64, f64)], spec: &PlotSpec) -> Vec<(f64, f64)> {
    let margin = f64::from(spec.margin);
    let inner_w = f64::from(spec.width) - 2.0 * margin;
    let inner_h = f64::from(spec.height) - 2.0 * margin;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    if points.is_empty() {
        return Vec::new();
    }
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let scale = (inner_w / span_x).min(inner_h / span_y);
    let (cx, cy) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
    let (vx, vy) = (margin + inner_w / 2.0, margin + inner_h / 2.0);
    points
        .iter()
        .map(|&(x, y)| (vx + (x - cx) * scale, vy - (y - cy) * scale))
        .collect()
}

/// Draw a collaboration network: node area proportional to weighted degree
/// (radius ∝ √degree), edge stroke width proportional to weight, fill
/// color by community. The 20 highest-degree nodes are labeled.
pub fn render_network(
    network: &CoNetwork,
    partition: &Partition,
    layout: &Layout,
    degrees: &std::collections::BTreeMap<String, u64>,
    spec: &PlotSpec,
) -> String {
    let positions: Vec<(f64, f64)> = network
        .nodes
        .iter()
        .map(|n| layout.positions.get(n).copied().unwrap_or((0.0, 0.0)))
        .collect();
    let screen = fit_positions(&positions, spec);

    let degree_of = |name: &str| degrees.get(name).copied().unwrap_or(0);
    let d_max = network
        .nodes
        .iter()
        .map(|n| degree_of(n))
        .max()
        .unwrap_or(0);
    let w_max = network.edges.iter().map(|&(_, _, w)| w).max().unwrap_or(0);
    let radius = |d: u64| -> f64 {
        if d == 0 || d_max == 0 {
            3.0
        } else {
            18.0 * ((d as f64) / (d_max as f64)).sqrt()
        }
    };

    let mut svg = svg_open(spec, " data-figure=\"network\"");
    for &(u, v, w) in &network.edges {
        let (x1, y1) = screen[u];
        let (x2, y2) = screen[v];
        let _ = writeln!(
            svg,
            "<line class=\"edge\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" \
             stroke=\"#999999\" stroke-opacity=\"0.6\" stroke-width=\"{sw}\" \
             data-weight=\"{w}\"/>",
            x1 = fmt2(x1),
            y1 = fmt2(y1),
            x2 = fmt2(x2),
            y2 = fmt2(y2),
            sw = fmt2(4.0 * f64::from(w) / f64::from(w_max.max(1))),
        );
    }
    for (i, name) in network.nodes.iter().enumerate() {
        let (cx, cy) = screen[i];
        let community = partition.assignment.get(name).copied().unwrap_or(0);
        let degree = degree_of(name);
        let _ = writeln!(
            svg,
            "<circle class=\"node\" cx=\"{cx}\" cy=\"{cy}\" r=\"{r}\" fill=\"{color}\" \
             stroke=\"#333333\" stroke-width=\"0.75\" data-node=\"{name}\" \
             data-community=\"{community}\" data-degree=\"{degree}\"/>",
            cx = fmt2(cx),
            cy = fmt2(cy),
            r = fmt2(radius(degree)),
            color = spec.color(community),
            name = escape_xml(name),
        );
    }

    // Label the 20 highest-degree nodes (ties by name).
    let mut by_degree: Vec<(&String, u64)> =
        network.nodes.iter().map(|n| (n, degree_of(n))).collect();
    by_degree.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let labeled: std::collections::BTreeSet<&String> =
        by_degree.iter().take(20).map(|&(n, _)| n).collect();
    for (i, name) in network.nodes.iter().enumerate() {
        if !labeled.contains(name) {
            continue;
        }
        let (cx, cy) = screen[i];
        let r = radius(degree_of(name));
        let _ = writeln!(
            svg,
            "<text class=\"label\" x=\"{x}\" y=\"{y}\" font-size=\"11\" \
             fill=\"#222222\">{text}</text>",
            x = fmt2(cx + r + 3.0),
            y = fmt2(cy + 4.0),
            text = escape_xml(name),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Dual-axis timeline: bars for publication counts (left axis), a line
/// for mean citations (right axis).
pub fn render_timeline(periods: &[TimelinePeriod], spec: &PlotSpec) -> String {
    let margin = f64::from(spec.margin);
    let inner_w = f64::from(spec.width) - 2.0 * margin;
    let inner_h = f64::from(spec.height) - 2.0 * margin;
    let baseline = f64::from(spec.height) - margin;
    let count_max = periods
        .iter()
        .map(|p| p.pub_count)
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let cite_max = periods
        .iter()
        .map(|p| p.mean_citations)
        .fold(0.0_f64, f64::max)
        .max(1.0);

    let mut svg = svg_open(spec, " data-figure=\"timeline\"");

    // Axes.
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>",
        x0 = fmt2(margin),
        y = fmt2(baseline),
        x1 = fmt2(margin + inner_w),
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>",
        x = fmt2(margin),
        y0 = fmt2(baseline),
        y1 = fmt2(baseline - inner_h),
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>",
        x = fmt2(margin + inner_w),
        y0 = fmt2(baseline),
        y1 = fmt2(baseline - inner_h),
    );
    // Axis scale ticks: counts on the left, mean citations on the right.
    for tick in 0..=4u32 {
        let frac = f64::from(tick) / 4.0;
        let y = baseline - frac * inner_h;
        let _ = writeln!(
            svg,
            "<text class=\"tick-left\" x=\"{x}\" y=\"{ty}\" font-size=\"10\" \
             fill=\"#666666\" text-anchor=\"end\">{val}</text>",
            x = fmt2(margin - 6.0),
            ty = fmt2(y + 3.0),
            val = fmt2(frac * count_max),
        );
        let _ = writeln!(
            svg,
            "<text class=\"tick-right\" x=\"{x}\" y=\"{ty}\" font-size=\"10\" \
             fill=\"#666666\" text-anchor=\"start\">{val}</text>",
            x = fmt2(margin + inner_w + 6.0),
            ty = fmt2(y + 3.0),
            val = fmt2(frac * cite_max),
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" fill=\"{c}\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {x} {y})\">publications</text>",
        x = fmt2(margin - 38.0),
        y = fmt2(baseline - inner_h / 2.0),
        c = spec.color(0),
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" fill=\"{c}\" \
         text-anchor=\"middle\" transform=\"rotate(90 {x} {y})\">mean citations</text>",
        x = fmt2(margin + inner_w + 40.0),
        y = fmt2(baseline - inner_h / 2.0),
        c = spec.color(1),
    );

    if periods.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let slot = inner_w / periods.len() as f64;
    let bar_width = slot * 0.6;
    let mut line_points = String::new();
    let mut markers = String::new();
    for (i, period) in periods.iter().enumerate() {
        let center = margin + (i as f64 + 0.5) * slot;
        let bar_h = period.pub_count as f64 / count_max * inner_h;
        let _ = writeln!(
            svg,
            "<rect class=\"bar\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" \
             fill=\"{color}\" fill-opacity=\"0.85\" data-count=\"{count}\" \
             data-period=\"{label}\"/>",
            x = fmt2(center - bar_width / 2.0),
            y = fmt2(baseline - bar_h),
            w = fmt2(bar_width),
            h = fmt2(bar_h),
            color = spec.color(0),
            count = period.pub_count,
            label = escape_xml(&period.label),
        );
        let _ = writeln!(
            svg,
            "<text class=\"period-label\" x=\"{x}\" y=\"{y}\" font-size=\"11\" \
             fill=\"#333333\" text-anchor=\"middle\">{label}</text>",
            x = fmt2(center),
            y = fmt2(baseline + 18.0),
            label = escape_xml(&period.label),
        );
        let line_y = baseline - period.mean_citations / cite_max * inner_h;
        let _ = write!(line_points, "{},{} ", fmt2(center), fmt2(line_y));
        let _ = writeln!(
            markers,
            "<circle class=\"line-point\" cx=\"{cx}\" cy=\"{cy}\" r=\"3.5\" \
             fill=\"{color}\" data-mean=\"{mean}\"/>",
            cx = fmt2(center),
            cy = fmt2(line_y),
            color = spec.color(1),
            mean = fmt2(period.mean_citations),
        );
    }
    let _ = writeln!(
        svg,
        "<polyline class=\"line\" points=\"{pts}\" fill=\"none\" stroke=\"{color}\" \
         stroke-width=\"2\"/>",
        pts = line_points.trim_end(),
        color = spec.color(1),
    );
    svg.push_str(&markers);
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yindex::compute_y_index;
    use crate::Level;
    use std::collections::BTreeMap;

    /// Extract `attr="…"` values from every element containing `marker`.
    fn attr_values(svg: &str, marker: &str, attr: &str) -> Vec<String> {
        let needle = format!("{attr}=\"");
        svg.lines()
            .filter(|line| line.contains(marker))
            .filter_map(|line| {
                let start = line.find(&needle)? + needle.len();
                let end = line[start..].find('"')? + start;
                Some(line[start..end].to_string())
            })
            .collect()
    }

    fn floats(svg: &str, marker: &str, attr: &str) -> Vec<f64> {
        attr_values(svg, marker, attr)
            .into_iter()
            .map(|v| v.parse().unwrap())
            .collect()
    }

    fn root_float(svg: &str, attr: &str) -> f64 {
        floats(svg, "<svg", attr)[0]
    }

    #[test]
    fn equal_credit_point_lies_on_the_diagonal() {
        let spec = PlotSpec::default();
        let svg = render_polar(&[compute_y_index("both", 3, 3).unwrap()], &spec);
        let margin = root_float(&svg, "data-margin");
        let origin_y = root_float(&svg, "data-origin-y");
        let cx = floats(&svg, "class=\"point\"", "cx")[0];
        let cy = floats(&svg, "class=\"point\"", "cy")[0];
        // On the h = π/4 diagonal, the x-offset equals the y-offset.
        assert!(((cx - margin) - (origin_y - cy)).abs() < 0.5);
    }

    #[test]
    fn first_author_only_point_sits_on_the_x_axis_at_its_gridline() {
        let spec = PlotSpec::default();
        let svg = render_polar(&[compute_y_index("solo", 5, 0).unwrap()], &spec);
        let margin = root_float(&svg, "data-margin");
        let origin_y = root_float(&svg, "data-origin-y");
        let scale = root_float(&svg, "data-scale");
        let cx = floats(&svg, "class=\"point\"", "cx")[0];
        let cy = floats(&svg, "class=\"point\"", "cy")[0];
        assert!(
            (cy - origin_y).abs() < 0.5,
            "point off the x-axis: {cy} vs {origin_y}"
        );
        assert!((cx - (margin + 5.0 * scale)).abs() < 0.5);
        // j_max = 5 → unit gridline step; the outermost ring sits exactly
        // at the point's radial coordinate (checked via its axis label).
        let labels = attr_values(&svg, "class=\"grid-label\"", "x");
        let outer: f64 = labels.last().unwrap().parse().unwrap();
        assert!((outer - cx).abs() < 0.5);
    }

    #[test]
    fn radial_distances_scale_with_j() {
        // USA (253, 258) vs UK (44, 41): j 511 vs 85, a ≈6.01× ratio.
        let spec = PlotSpec::default();
        let usa = compute_y_index("usa", 253, 258).unwrap();
        let uk = compute_y_index("uk", 44, 41).unwrap();
        let svg = render_polar(&[usa, uk], &spec);
        let margin = root_float(&svg, "data-margin");
        let origin_y = root_float(&svg, "data-origin-y");
        let cx = floats(&svg, "class=\"point\"", "cx");
        let cy = floats(&svg, "class=\"point\"", "cy");
        let radial =
            |i: usize| -> f64 { ((cx[i] - margin).powi(2) + (origin_y - cy[i]).powi(2)).sqrt() };
        let ratio = radial(0) / radial(1);
        assert!((5.9..=6.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn plotted_points_invert_through_the_documented_mapping() {
        let spec = PlotSpec::default();
        let entries = vec![
            compute_y_index("a", 253, 258).unwrap(),
            compute_y_index("b", 44, 41).unwrap(),
            compute_y_index("c", 9, 8).unwrap(),
            compute_y_index("d", 19, 20).unwrap(),
            compute_y_index("e", 7, 0).unwrap(),
            compute_y_index("f", 0, 6).unwrap(),
        ];
        let svg = render_polar(&entries, &spec);
        let margin = root_float(&svg, "data-margin");
        let origin_y = root_float(&svg, "data-origin-y");
        let scale = root_float(&svg, "data-scale");
        let cx = floats(&svg, "class=\"point\"", "cx");
        let cy = floats(&svg, "class=\"point\"", "cy");
        for (i, entry) in entries.iter().enumerate() {
            let expected_x = margin + entry.x * scale;
            let expected_y = origin_y - entry.y * scale;
            assert!((cx[i] - expected_x).abs() < 0.5, "{}: cx", entry.entity);
            assert!((cy[i] - expected_y).abs() < 0.5, "{}: cy", entry.entity);
        }
    }

    #[test]
    fn empty_polar_input_yields_axes_only() {
        let spec = PlotSpec::default();
        let svg = render_polar(&[], &spec);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert_eq!(svg.matches("class=\"point\"").count(), 0);
        assert!(svg.contains("class=\"diagonal\""));
    }

    #[test]
    fn labels_respect_the_cutoff_and_never_collide() {
        let spec = PlotSpec::default();
        let entries = vec![
            compute_y_index("labeled-a", 3, 3).unwrap(),
            compute_y_index("labeled-b", 3, 3).unwrap(), // same point: collision
            compute_y_index("tiny", 2, 1).unwrap(),      // j = 3 < 5: no label
        ];
        let svg = render_polar(&entries, &spec);
        assert!(svg.contains(">labeled-a</text>"));
        assert!(svg.contains(">labeled-b</text>"));
        assert!(!svg.contains(">tiny</text>"));
        let lx = floats(&svg, "class=\"label\"", "x");
        let ly = floats(&svg, "class=\"label\"", "y");
        let dist = ((lx[0] - lx[1]).powi(2) + (ly[0] - ly[1]).powi(2)).sqrt();
        assert!(dist >= 9.9, "labels too close: {dist}");
    }

    fn sample_network() -> (CoNetwork, Partition, Layout, BTreeMap<String, u64>) {
        // Star: center has weighted degree 4 (4 unit edges), leaves 1.
        let net = CoNetwork {
            level: Level::Author,
            nodes: vec![
                "center".into(),
                "l1".into(),
                "l2".into(),
                "l3".into(),
                "l4".into(),
            ],
            edges: vec![(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 2)],
        };
        let assignment: BTreeMap<String, usize> = [
            ("center".to_string(), 0),
            ("l1".to_string(), 0),
            ("l2".to_string(), 0),
            ("l3".to_string(), 1),
            ("l4".to_string(), 1),
        ]
        .into();
        let partition = Partition {
            assignment,
            modularity: 0.0,
        };
        let positions: BTreeMap<String, (f64, f64)> = [
            ("center".to_string(), (0.0, 0.0)),
            ("l1".to_string(), (1.0, 0.0)),
            ("l2".to_string(), (0.0, 1.0)),
            ("l3".to_string(), (-1.0, 0.0)),
            ("l4".to_string(), (0.0, -1.0)),
        ]
        .into();
        let layout = Layout {
            positions,
            stress: 0.0,
        };
        let degrees = crate::conetwork::network_degrees(&net);
        (net, partition, layout, degrees)
    }

    #[test]
    fn node_radius_follows_the_square_root_area_rule() {
        let (net, partition, layout, degrees) = sample_network();
        // center degree 5; craft a comparison: degree 4 vs 1 → radius 2×.
        let mut degrees = degrees;
        degrees.insert("center".to_string(), 4);
        degrees.insert("l1".to_string(), 1);
        let spec = PlotSpec::default();
        let svg = render_network(&net, &partition, &layout, &degrees, &spec);
        let r = floats(&svg, "class=\"node\"", "r");
        let d: Vec<u64> = attr_values(&svg, "class=\"node\"", "data-degree")
            .into_iter()
            .map(|v| v.parse().unwrap())
            .collect();
        let idx4 = d.iter().position(|&x| x == 4).unwrap();
        let idx1 = d.iter().position(|&x| x == 1).unwrap();
        let ratio = r[idx4] / r[idx1];
        assert!((ratio - 2.0).abs() < 0.01, "radius ratio {ratio}");
    }

    #[test]
    fn edge_stroke_width_is_proportional_to_weight() {
        let (net, partition, layout, degrees) = sample_network();
        let spec = PlotSpec::default();
        let svg = render_network(&net, &partition, &layout, &degrees, &spec);
        let widths = floats(&svg, "class=\"edge\"", "stroke-width");
        let weights: Vec<f64> = attr_values(&svg, "class=\"edge\"", "data-weight")
            .into_iter()
            .map(|v| v.parse().unwrap())
            .collect();
        let per_unit: Vec<f64> = widths.iter().zip(&weights).map(|(sw, w)| sw / w).collect();
        for pu in &per_unit {
            assert!((pu - per_unit[0]).abs() < 0.01);
        }
        let w2 = weights.iter().position(|&w| w == 2.0).unwrap();
        let w1 = weights.iter().position(|&w| w == 1.0).unwrap();
        assert!(((widths[w2] / widths[w1]) - 2.0).abs() < 0.01);
    }

    #[test]
    fn communities_use_distinct_palette_colors() {
        let (net, partition, layout, degrees) = sample_network();
        let spec = PlotSpec::default();
        let svg = render_network(&net, &partition, &layout, &degrees, &spec);
        let fills = attr_values(&svg, "class=\"node\"", "fill");
        let distinct: std::collections::BTreeSet<&String> = fills.iter().collect();
        assert_eq!(distinct.len(), 2);
        assert!(fills.contains(&spec.palette[0]));
        assert!(fills.contains(&spec.palette[1]));
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let spec = PlotSpec::default();
        let entries = vec![
            compute_y_index("a", 6, 4).unwrap(),
            compute_y_index("b", 9, 8).unwrap(),
        ];
        assert_eq!(render_polar(&entries, &spec), render_polar(&entries, &spec));

        let (net, partition, layout, degrees) = sample_network();
        assert_eq!(
            render_network(&net, &partition, &layout, &degrees, &spec),
            render_network(&net, &partition, &layout, &degrees, &spec)
        );

        let periods = vec![TimelinePeriod {
            label: "1991-1995".to_string(),
            start: 1991,
            end_exclusive: 1996,
            pub_count: 2,
            mean_citations: 150.0,
        }];
        assert_eq!(
            render_timeline(&periods, &spec),
            render_timeline(&periods, &spec)
        );
    }

    fn period(label: &str, count: usize, mean: f64) -> TimelinePeriod {
        TimelinePeriod {
            label: label.to_string(),
            start: 0,
            end_exclusive: 1,
            pub_count: count,
            mean_citations: mean,
        }
    }

    #[test]
    fn single_period_renders_one_bar_and_one_line_point() {
        let spec = PlotSpec::default();
        let svg = render_timeline(&[period("1991-1995", 2, 150.0)], &spec);
        assert_eq!(svg.matches("class=\"bar\"").count(), 1);
        assert_eq!(svg.matches("class=\"line-point\"").count(), 1);
        assert!(svg.contains("data-count=\"2\""));
        assert!(svg.contains("data-mean=\"150.00\""));
    }

    #[test]
    fn five_periods_render_five_bars() {
        let spec = PlotSpec::default();
        let periods: Vec<TimelinePeriod> = [
            "1991-1995",
            "1996-2000",
            "2001-2005",
            "2006-2010",
            "2011-2017",
        ]
        .iter()
        .enumerate()
        .map(|(i, label)| period(label, i + 1, 10.0 * (i + 1) as f64))
        .collect();
        let svg = render_timeline(&periods, &spec);
        assert_eq!(svg.matches("class=\"bar\"").count(), 5);
        assert_eq!(svg.matches("class=\"period-label\"").count(), 5);
        for label in ["1991-1995", "2011-2017"] {
            assert!(svg.contains(&format!(">{label}</text>")));
        }
    }

    #[test]
    fn zero_count_period_renders_zero_height_bar_at_baseline() {
        let spec = PlotSpec::default();
        let svg = render_timeline(&[period("empty", 0, 0.0), period("busy", 4, 100.0)], &spec);
        let heights = floats(&svg, "class=\"bar\"", "height");
        assert_eq!(heights[0], 0.0);
        assert!(heights[1] > 0.0);
        let baseline = f64::from(spec.height - spec.margin);
        let line_y = floats(&svg, "class=\"line-point\"", "cy");
        assert!((line_y[0] - baseline).abs() < 0.01);
    }

    #[test]
    fn plot_spec_validation() {
        assert!(PlotSpec::default().validate().is_ok());
        let mut bad = PlotSpec::default();
        bad.palette.clear();
        assert!(bad.validate().is_err());
        let zero = PlotSpec {
            width: 0,
            ..PlotSpec::default()
        };
        assert!(zero.validate().is_err());
        let fat_margin = PlotSpec {
            margin: 400,
            ..PlotSpec::default()
        };
        assert!(fat_margin.validate().is_err());
    }
}
