//! SVG drawings of planar fragments.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lattice::{CellRange, CrystalFramework, PlacedEdge};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    /// Pixels per length unit.
    pub scale: f64,
    pub margin: f64,
    pub vertex_radius: f64,
    /// Draw the translates of edges that leave the box.
    pub dangling: bool,
    /// Outline the cell-zero parallelogram.
    pub unit_cell: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            scale: 100.0,
            margin: 20.0,
            vertex_radius: 4.0,
            dangling: true,
            unit_cell: true,
        }
    }
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, p: &[f64; 2]) -> (f64, f64) {
        (
            self.margin + (p[0] - self.min_x) * self.scale,
            self.margin + (self.max_y - p[1]) * self.scale,
        )
    }
}

fn xy<T: Scalar>(p: &DVector<T>) -> [f64; 2] {
    [p[0].as_f64(), p[1].as_f64()]
}

/// Draws the fragment owned by `range`: one `line` per edge translate, one
/// `circle` per vertex and the unit cell as a `polygon`.
///
/// Internal edges have class `edge`; edges leaving the box have class
/// `edge dangling`.
pub fn render_svg<T: Scalar>(
    fw: &CrystalFramework<T>,
    range: &CellRange,
    options: &SvgOptions,
) -> Result<String> {
    if fw.dim() != 2 {
        return Err(Error::NotPlanar { d: fw.dim() });
    }
    let frag = fw.fragment(range)?;
    let z = fw.lattice().matrix();
    let a1 = [z[(0, 0)].as_f64(), z[(1, 0)].as_f64()];
    let a2 = [z[(0, 1)].as_f64(), z[(1, 1)].as_f64()];
    let cell = [[0.0, 0.0], a1, [a1[0] + a2[0], a1[1] + a2[1]], a2];

    let mut extent: Vec<[f64; 2]> = frag.points.iter().map(|p| xy(&p.position)).collect();
    if options.dangling {
        for e in &frag.dangling {
            extent.push(xy(&e.from.position));
            extent.push(xy(&e.to.position));
        }
    }
    if options.unit_cell {
        extent.extend(cell);
    }
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (0f64, 0f64, 0f64, 0f64);
    if let Some(first) = extent.first() {
        (min_x, max_x, min_y, max_y) = (first[0], first[0], first[1], first[1]);
    }
    for p in &extent {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let frame = Frame {
        min_x,
        max_y,
        scale: options.scale,
        margin: options.margin,
    };
    let width = (max_x - min_x) * options.scale + 2.0 * options.margin;
    let height = (max_y - min_y) * options.scale + 2.0 * options.margin;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(
        out,
        "<style>.edge{{stroke:#222;stroke-width:2}} .dangling{{stroke:#999;stroke-dasharray:4 3}} \
         .cell{{fill:none;stroke:#c33;stroke-width:1}} .vertex{{fill:#fff;stroke:#222;stroke-width:1.5}}</style>"
    );
    if options.unit_cell {
        let pts: Vec<String> = cell
            .iter()
            .map(|p| {
                let (x, y) = frame.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon class="cell" points="{}"/>"#, pts.join(" "));
    }
    let line = |out: &mut String, e: &PlacedEdge<T>, class: &str| {
        let (x1, y1) = frame.map(&xy(&e.from.position));
        let (x2, y2) = frame.map(&xy(&e.to.position));
        let _ = writeln!(
            out,
            r#"<line class="{class}" data-class="{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#,
            e.class
        );
    };
    for e in &frag.edges {
        line(&mut out, e, "edge");
    }
    if options.dangling {
        for e in &frag.dangling {
            line(&mut out, e, "edge dangling");
        }
    }
    for p in &frag.points {
        let (x, y) = frame.map(&xy(&p.position));
        let _ = writeln!(
            out,
            r#"<circle class="vertex" data-vertex="{}" cx="{x:.2}" cy="{y:.2}" r="{:.2}"/>"#,
            p.label.vertex, options.vertex_radius
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_framework;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn kagome_three_by_three() {
        let k = builtin_framework::<f64>("kagome").unwrap();
        let svg = render_svg(&k, &CellRange::cube(2, 3).unwrap(), &SvgOptions::default()).unwrap();
        assert_eq!(count(&svg, "<circle "), 27);
        assert_eq!(count(&svg, "<line "), 54);
        assert_eq!(count(&svg, r#"class="edge""#), 43);
        assert_eq!(count(&svg, r#"class="edge dangling""#), 11);
        assert_eq!(count(&svg, "<polygon "), 1);
    }

    #[test]
    fn square_single_cell() {
        let sq = builtin_framework::<f64>("square_grid").unwrap();
        let range = CellRange::cube(2, 1).unwrap();
        let svg = render_svg(&sq, &range, &SvgOptions::default()).unwrap();
        assert_eq!(count(&svg, "<circle "), 1);
        assert_eq!(count(&svg, r#"class="edge""#), 0);
        let bare = SvgOptions {
            dangling: false,
            ..SvgOptions::default()
        };
        assert_eq!(count(&render_svg(&sq, &range, &bare).unwrap(), "<line "), 0);
    }

    #[test]
    fn deterministic() {
        let k = builtin_framework::<f64>("kagome").unwrap();
        let r = CellRange::cube(2, 2).unwrap();
        let o = SvgOptions::default();
        assert_eq!(
            render_svg(&k, &r, &o).unwrap(),
            render_svg(&k, &r, &o).unwrap()
        );
    }

    #[test]
    fn three_dimensional_is_rejected() {
        let h = builtin_framework::<f64>("hexahedron").unwrap();
        let err =
            render_svg(&h, &CellRange::cube(3, 1).unwrap(), &SvgOptions::default()).unwrap_err();
        assert!(err.to_string().contains("dimension ≠ 2"));
    }
}
