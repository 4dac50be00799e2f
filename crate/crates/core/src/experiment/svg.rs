//! SVG export of the mesh, the piecewise planar interface and its image
//! under the deformation.

use std::fmt::Write as _;
use std::path::Path;

use crate::deform::Deformation;
use crate::error::{Error, Result};
use crate::levelset::CutTopology;
use crate::mesh::{Mesh, Point};

/// Samples per interface segment.
pub const SAMPLES: usize = 10;

/// `Gamma_h` sampled at `SAMPLES` points per cut element, endpoints included.
pub fn gamma_h_samples(mesh: &Mesh, ct: &CutTopology, d: &Deformation) -> Vec<Vec<Point>> {
    ct.cuts()
        .iter()
        .map(|cut| {
            let [a, b] = cut.segment;
            (0..SAMPLES)
                .map(|i| {
                    let s = i as f64 / (SAMPLES - 1) as f64;
                    d.apply(mesh, cut.element, &(a + (b - a) * s))
                })
                .collect()
        })
        .collect()
}

pub fn render_svg(mesh: &Mesh, ct: &CutTopology, d: &Deformation) -> String {
    let (mut lo, mut hi) = (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY));
    for v in mesh.vertices() {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let width = 800.0;
    let margin = 10.0;
    let scale = width / (hi.x - lo.x).max(hi.y - lo.y);
    let to_px = |p: &Point| ((p.x - lo.x) * scale + margin, (hi.y - p.y) * scale + margin);
    let w = (hi.x - lo.x) * scale + 2.0 * margin;
    let h = (hi.y - lo.y) * scale + 2.0 * margin;

    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.3}\" height=\"{h:.3}\" viewBox=\"0 0 {w:.3} {h:.3}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = write!(s, "<path id=\"mesh\" fill=\"none\" stroke=\"gray\" stroke-width=\"0.5\" d=\"");
    for [a, b] in mesh.edges() {
        let (p, q) = (to_px(&mesh.vertex(*a)), to_px(&mesh.vertex(*b)));
        let _ = write!(s, "M{:.3} {:.3}L{:.3} {:.3}", p.0, p.1, q.0, q.1);
    }
    let _ = writeln!(s, "\"/>");
    if !ct.cuts().is_empty() {
        let _ = write!(s, "<path id=\"gamma-lin\" fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\" d=\"");
        for cut in ct.cuts() {
            let map = mesh.map(cut.element);
            let (p, q) = (to_px(&map.apply(&cut.segment[0])), to_px(&map.apply(&cut.segment[1])));
            let _ = write!(s, "M{:.3} {:.3}L{:.3} {:.3}", p.0, p.1, q.0, q.1);
        }
        let _ = writeln!(s, "\"/>");
        let _ = write!(s, "<path id=\"gamma-h\" fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" d=\"");
        for curve in gamma_h_samples(mesh, ct, d) {
            for (i, p) in curve.iter().enumerate() {
                let (x, y) = to_px(p);
                let _ = write!(s, "{}{x:.3} {y:.3}", if i == 0 { 'M' } else { 'L' });
            }
        }
        let _ = writeln!(s, "\"/>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn export_geometry(mesh: &Mesh, ct: &CutTopology, d: &Deformation, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(mesh, ct, d)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
