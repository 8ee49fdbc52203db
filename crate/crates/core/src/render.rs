//! SVG output for the risk box, its isoclines and the gasket.
//!
//! Math coordinates have equity `e` to the right and debt `d` upward; the
//! renderer flips the vertical axis for screen space and uses one scale for
//! both axes so slopes survive. Numbers are printed with three decimals and
//! no timestamps are embedded, so output is byte-for-byte reproducible.

use std::fmt::Write as _;

use thiserror::Error;

use crate::gasket::{DyadicTriangle, GasketError, GasketState};
use crate::irbox::{isocline, GeometryError, IrBox, IsoclineKind, Point, Region};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("no layers requested")]
    EmptyLayerSet,
    #[error("canvas {0}x{1} is too small")]
    BadCanvas(u32, u32),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gasket(#[from] GasketError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Points,
    UnityLine,
    Isoclines {
        kind: IsoclineKind,
        levels: Vec<f64>,
    },
    Gasket {
        depth: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub layers: Vec<Layer>,
}

impl RenderSpec {
    pub fn validate(&self, depth_cap: u32) -> Result<(), RenderError> {
        if self.layers.is_empty() {
            return Err(RenderError::EmptyLayerSet);
        }
        if self.width < 2 * MARGIN as u32 + 10 || self.height < 2 * MARGIN as u32 + 10 {
            return Err(RenderError::BadCanvas(self.width, self.height));
        }
        for layer in &self.layers {
            if let Layer::Gasket { depth } = layer {
                if *depth > depth_cap {
                    return Err(GasketError::DepthLimit {
                        requested: *depth,
                        cap: depth_cap,
                    }
                    .into());
                }
            }
        }
        Ok(())
    }
}

const MARGIN: f64 = 20.0;

/// Accumulates SVG elements over a math-space view rectangle.
pub struct Canvas {
    width: f64,
    height: f64,
    e_lo: f64,
    d_lo: f64,
    scale: f64,
    body: String,
}

fn num(v: f64) -> String {
    // +0.0 folds -0.0 into 0.0 so tiny negatives print as 0.000
    format!("{:.3}", (v * 1000.0).round() / 1000.0 + 0.0)
}

impl Canvas {
    /// Canvas showing `[e_lo, e_hi] × [d_lo, d_hi]` with a uniform scale.
    pub fn new(width: u32, height: u32, e_lo: f64, e_hi: f64, d_lo: f64, d_hi: f64) -> Self {
        let (w, h) = (width as f64, height as f64);
        let span_e = (e_hi - e_lo).max(f64::MIN_POSITIVE);
        let span_d = (d_hi - d_lo).max(f64::MIN_POSITIVE);
        let scale = ((w - 2.0 * MARGIN) / span_e).min((h - 2.0 * MARGIN) / span_d);
        Canvas {
            width: w,
            height: h,
            e_lo,
            d_lo,
            scale,
            body: String::new(),
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        let x = MARGIN + (p.e - self.e_lo) * self.scale;
        let y = self.height - MARGIN - (p.d - self.d_lo) * self.scale;
        (x.clamp(0.0, self.width), y.clamp(0.0, self.height))
    }

    pub fn line(&mut self, a: Point, b: Point, class: &str, extra: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}"{extra} x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    pub fn polygon(&mut self, pts: &[Point], class: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{}"/>"#,
            coords.join(" ")
        );
    }

    pub fn circle(&mut self, p: Point, r: f64, class: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{}" cy="{}" r="{}"/>"#,
            num(x),
            num(y),
            num(r)
        );
    }

    pub fn rect(&mut self, lo: Point, hi: Point, class: &str) {
        let (x0, y1) = self.map(lo);
        let (x1, y0) = self.map(hi);
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{}" y="{}" width="{}" height="{}"/>"#,
            num(x0),
            num(y0),
            num(x1 - x0),
            num(y1 - y0)
        );
    }

    pub fn open_group(&mut self, class: &str) {
        let _ = writeln!(self.body, r#"<g class="{class}">"#);
    }

    pub fn close_group(&mut self) {
        self.body.push_str("</g>\n");
    }

    pub fn finish(self) -> String {
        let mut out = String::with_capacity(self.body.len() + 512);
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        out.push_str(STYLE);
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

const STYLE: &str = "<style>\
.irbox{fill:none;stroke:#000;stroke-width:1}\
.unity{stroke:#555;stroke-dasharray:4 3}\
.tr{stroke:#1f77b4}.nr{stroke:#2ca02c}.aco{stroke:#9467bd}.firi{stroke:#d62728}\
.gasket{fill:#333;stroke:none}\
.above-unity{fill:#d62728}.on-unity{fill:#555}.below-unity{fill:#2ca02c}.distress{fill:#ff7f0e}\
</style>\n";

fn triangle_points(t: &DyadicTriangle, scale: f64) -> [Point; 3] {
    t.vertices_f64()
        .map(|(x, y)| Point::new(x * scale, y * scale))
}

/// Risk-box figure: box outline plus the requested layers. Points carry
/// their region as the CSS class. The gasket layer is the unit gasket
/// stretched over `[0, side]²`.
pub fn render_irbox(
    bx: &IrBox,
    points: &[(Point, Region)],
    spec: &RenderSpec,
    depth_cap: u32,
) -> Result<String, RenderError> {
    spec.validate(depth_cap)?;
    let side = if bx.side > 0.0 { bx.side } else { 1.0 };
    let e_lo = bx.e_low();
    let mut canvas = Canvas::new(spec.width, spec.height, e_lo, side, 0.0, side);
    canvas.rect(Point::new(e_lo, 0.0), Point::new(side, side), "irbox");

    for layer in &spec.layers {
        match layer {
            Layer::Gasket { depth } => {
                let state = GasketState::at_depth(*depth, depth_cap)?;
                canvas.open_group("gasket");
                for t in state.triangles() {
                    canvas.polygon(&triangle_points(t, side), "gasket");
                }
                canvas.close_group();
            }
            Layer::UnityLine => {
                canvas.line(Point::new(0.0, 0.0), Point::new(side, side), "unity", "");
            }
            Layer::Isoclines { kind, levels } => {
                canvas.open_group(&format!("isoclines {}", kind.name()));
                for &level in levels {
                    let iso = isocline(bx, *kind, level)?;
                    let extra = format!(r#" data-level="{level}""#);
                    for seg in &iso.segments {
                        canvas.line(
                            seg.from,
                            seg.to,
                            &format!("isocline {}", kind.name()),
                            &extra,
                        );
                    }
                }
                canvas.close_group();
            }
            Layer::Points => {
                canvas.open_group("points");
                for &(p, region) in points {
                    canvas.circle(p, 3.0, region.name());
                }
                canvas.close_group();
            }
        }
    }
    Ok(canvas.finish())
}

/// The remaining triangles of a gasket state on the unit square.
pub fn render_gasket(state: &GasketState, width: u32, height: u32) -> Result<String, RenderError> {
    if width < 2 * MARGIN as u32 + 10 || height < 2 * MARGIN as u32 + 10 {
        return Err(RenderError::BadCanvas(width, height));
    }
    let mut canvas = Canvas::new(width, height, 0.0, 1.0, 0.0, 1.0);
    canvas.rect(Point::new(0.0, 0.0), Point::new(1.0, 1.0), "irbox");
    canvas.open_group("gasket");
    for t in state.triangles() {
        canvas.polygon(&triangle_points(t, 1.0), "gasket");
    }
    canvas.close_group();
    Ok(canvas.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::initial_state;

    #[test]
    fn empty_layers_rejected() {
        let spec = RenderSpec {
            width: 400,
            height: 400,
            layers: vec![],
        };
        assert_eq!(
            render_irbox(&IrBox::new(1.0, None), &[], &spec, 12),
            Err(RenderError::EmptyLayerSet)
        );
    }

    #[test]
    fn gasket_depth_is_capped() {
        let spec = RenderSpec {
            width: 400,
            height: 400,
            layers: vec![Layer::Gasket { depth: 9 }],
        };
        assert!(matches!(
            render_irbox(&IrBox::new(1.0, None), &[], &spec, 8),
            Err(RenderError::Gasket(GasketError::DepthLimit { .. }))
        ));
    }

    #[test]
    fn y_axis_is_flipped() {
        let mut c = Canvas::new(140, 140, 0.0, 1.0, 0.0, 1.0);
        assert_eq!(c.map(Point::new(0.0, 0.0)), (20.0, 120.0));
        assert_eq!(c.map(Point::new(1.0, 1.0)), (120.0, 20.0));
        c.line(Point::new(0.0, 0.0), Point::new(1.0, 1.0), "unity", "");
        let svg = c.finish();
        assert!(svg.contains(r#"x1="20.000" y1="120.000" x2="120.000" y2="20.000""#));
    }

    #[test]
    fn gasket_svg_has_one_polygon_per_triangle() {
        let svg = render_gasket(&initial_state(), 200, 200).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(num(-0.0001), "0.000");
    }
}
