//! Phase-portrait rendering: direct SVG path emission into a fixed 800x800
//! viewport. No timestamps or other nondeterminism; identical inputs give
//! byte-identical files.

use crn_planar::dynamics::{integrate, IntegrateOptions};
use crn_planar::field::VectorField;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 50.0;

pub struct PortraitSpec {
    pub field: VectorField,
    pub xrange: (f64, f64),
    pub yrange: (f64, f64),
    pub grid: usize,
    pub t: f64,
    pub log_axes: bool,
    pub equilibrium: Option<(f64, f64)>,
    pub section: bool,
}

pub struct RenderedPortrait {
    pub svg: String,
    pub failures: usize,
}

struct Mapper {
    xr: (f64, f64),
    yr: (f64, f64),
    log: bool,
}

impl Mapper {
    fn coord(v: f64, range: (f64, f64), log: bool) -> f64 {
        if log {
            (v.ln() - range.0.ln()) / (range.1.ln() - range.0.ln())
        } else {
            (v - range.0) / (range.1 - range.0)
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = Self::coord(x, self.xr, self.log);
        let fy = Self::coord(y, self.yr, self.log);
        (
            MARGIN + fx * (SIZE - 2.0 * MARGIN),
            SIZE - MARGIN - fy * (SIZE - 2.0 * MARGIN),
        )
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        x >= self.xr.0 && x <= self.xr.1 && y >= self.yr.0 && y <= self.yr.1
    }
}

fn grid_points(range: (f64, f64), n: usize, log: bool) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let f = (i as f64 + 0.5) / n as f64;
            if log {
                (range.0.ln() + f * (range.1.ln() - range.0.ln())).exp()
            } else {
                range.0 + f * (range.1 - range.0)
            }
        })
        .collect()
}

pub fn render_portrait(spec: &PortraitSpec) -> RenderedPortrait {
    let mapper = Mapper {
        xr: spec.xrange,
        yr: spec.yrange,
        log: spec.log_axes,
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n",
        s = SIZE as u32
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes frame with range labels.
    svg.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{w}\" fill=\"none\" stroke=\"black\"/>\n",
        m = MARGIN,
        w = SIZE - 2.0 * MARGIN
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\">x: {:.4} .. {:.4}{}</text>\n",
        MARGIN,
        SIZE - MARGIN / 3.0,
        spec.xrange.0,
        spec.xrange.1,
        if spec.log_axes { " (log)" } else { "" }
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" transform=\"rotate(-90 {} {})\">y: {:.4} .. {:.4}</text>\n",
        MARGIN / 3.0,
        SIZE - MARGIN,
        MARGIN / 3.0,
        SIZE - MARGIN,
        spec.yrange.0,
        spec.yrange.1
    ));
    let mut failures = 0usize;
    let opts = IntegrateOptions {
        rtol: 1e-9,
        atol: 1e-11,
        boundary_tol: 1e-8,
        escape_bound: 1e8,
        ..Default::default()
    };
    for &x0 in &grid_points(spec.xrange, spec.grid, spec.log_axes) {
        for &y0 in &grid_points(spec.yrange, spec.grid, spec.log_axes) {
            let traj = integrate(&spec.field, (x0, y0), spec.t, &opts);
            if traj.points.len() < 2 && spec.t > 0.0 {
                failures += 1;
                continue;
            }
            let mut path = String::new();
            let mut pen_down = false;
            for &(x, y) in &traj.points {
                if mapper.inside(x, y) {
                    let (px, py) = mapper.map(x, y);
                    path.push_str(&format!(
                        "{}{:.2} {:.2} ",
                        if pen_down { "L" } else { "M" },
                        px,
                        py
                    ));
                    pen_down = true;
                } else {
                    pen_down = false;
                }
            }
            if path.contains('L') {
                svg.push_str(&format!(
                    "<path d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
                    path.trim_end()
                ));
            }
        }
    }
    if let Some((ex, ey)) = spec.equilibrium {
        if mapper.inside(ex, ey) {
            let (px, py) = mapper.map(ex, ey);
            svg.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"#d62728\"/>\n"
            ));
            if spec.section {
                let (qx, qy) = mapper.map(spec.xrange.1, ey);
                svg.push_str(&format!(
                    "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{qx:.2}\" y2=\"{qy:.2}\" stroke=\"#2ca02c\" stroke-dasharray=\"6 4\"/>\n"
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    RenderedPortrait { svg, failures }
}
