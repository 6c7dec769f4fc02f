//! Static SVG drawings of planar divisions.

use std::fmt::Write as _;
use std::sync::Arc;

use pdm_core::division::DivisionRecord;
use pdm_core::error::{Error, Result};

pub const SVG_SCHEMA: &str = "pdm-svg/v1";
const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;

/// Cell outlines, barycenters and configuration points of a 2-D division.
pub fn render_division(rec: &DivisionRecord) -> Result<String> {
    let root = Arc::new(rec.root.clone());
    if root.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "snapshots need a 2-D division, got d = {}",
            root.dim()
        )));
    }
    let (lo, w) = (root.lower(), [root.width(0), root.width(1)]);
    let scale = CANVAS / w[0].max(w[1]);
    let size = [w[0] * scale + 2.0 * MARGIN, w[1] * scale + 2.0 * MARGIN];
    let map = |p: &[f64]| -> (f64, f64) {
        (
            MARGIN + (p[0] - lo[0]) * scale,
            size[1] - MARGIN - (p[1] - lo[1]) * scale,
        )
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        size[0].ceil(),
        size[1].ceil(),
        size[0],
        size[1]
    );
    let _ = writeln!(s, "<!-- schema={SVG_SCHEMA} cells={} -->", rec.cells.len());
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000" stroke-width="1.5"/>"##,
        w[0] * scale,
        w[1] * scale
    );
    let mut centers = Vec::with_capacity(rec.cells.len());
    for cell in &rec.cells {
        let shape = cell.to_shape(&root)?;
        let b = shape.barycenter();
        let mut verts = shape.vertices();
        // Counter-clockwise around the barycenter.
        verts.sort_by(|p, q| {
            let a = (p[1] - b[1]).atan2(p[0] - b[0]);
            let c = (q[1] - b[1]).atan2(q[0] - b[0]);
            a.total_cmp(&c)
        });
        let pts: Vec<String> = verts
            .iter()
            .map(|v| {
                let (x, y) = map(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polygon data-id="{}" points="{}" fill="#e8eef7" stroke="#345" stroke-width="0.8"/>"##,
            cell.id,
            pts.join(" ")
        );
        centers.push(b);
    }
    for b in &centers {
        let (x, y) = map(b);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="1.8" fill="#678"/>"##);
    }
    for p in &rec.gamma {
        let (x, y) = map(p);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="#c22"/>"##);
    }
    s.push_str("</svg>\n");
    Ok(s)
}
