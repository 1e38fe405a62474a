//! Static SVG snapshots: orthographic projection onto a coordinate plane.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{DddError, Result};
use crate::geometry::DislocationNetwork;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;

/// Pair of axes spanning the projection plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Yz,
    Xz,
}

impl Plane {
    fn axes(self) -> (usize, usize) {
        match self {
            Plane::Xy => (0, 1),
            Plane::Yz => (1, 2),
            Plane::Xz => (0, 2),
        }
    }
}

impl FromStr for Plane {
    type Err = DddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xy" => Ok(Plane::Xy),
            "yz" => Ok(Plane::Yz),
            "xz" => Ok(Plane::Xz),
            _ => Err(DddError::invalid("plane", format!("expected xy, yz or xz, got `{s}`"))),
        }
    }
}

// stable across platforms and toolchains, unlike the std hasher
fn burgers_color(lattice_coords: &[i64; 3]) -> String {
    let [a, b, c] = *lattice_coords;
    let hue = (a * 137 + b * 59 + c * 211).rem_euclid(360);
    format!("hsl({hue},70%,40%)")
}

/// SVG document for `s`. World coordinates are recorded in the `data-bbox`
/// attribute of the root element.
pub fn svg_string(s: &DislocationNetwork, plane: Plane) -> Result<String> {
    if s.is_empty() {
        return Err(DddError::EmptyNetwork);
    }
    let (i, j) = plane.axes();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for x in s.flat_nodes() {
        for (k, a) in [i, j].into_iter().enumerate() {
            lo[k] = lo[k].min(x[a]);
            hi[k] = hi[k].max(x[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(s.epsilon());
    let scale = (SIZE - 2.0 * MARGIN) / span;
    // y grows downwards in SVG
    let px = |u: f64, v: f64| (MARGIN + (u - lo[0]) * scale, SIZE - MARGIN - (v - lo[1]) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" data-bbox="{} {} {} {}">"#,
        lo[0], lo[1], hi[0], hi[1]
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, l) in s.loops().iter().enumerate() {
        let mut d = String::new();
        for (n, x) in l.nodes().iter().enumerate() {
            let (u, v) = px(x[i], x[j]);
            let _ = write!(d, "{}{u:.3} {v:.3} ", if n == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let b = l.burgers().lattice_coords;
        let _ = writeln!(
            out,
            r#"<path class="loop" data-loop="{k}" d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            burgers_color(&b)
        );
    }
    // scale bar of length ε in the lower left corner
    let bar = s.epsilon() * scale;
    let y = SIZE - 0.4 * MARGIN;
    let _ = writeln!(
        out,
        r#"<line class="scale-bar" x1="{MARGIN}" y1="{y}" x2="{:.3}" y2="{y}" stroke="black" stroke-width="2"/>"#,
        MARGIN + bar
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{y}" font-size="12" font-family="sans-serif">ε = {}</text>"#,
        MARGIN + bar + 5.0,
        s.epsilon()
    );
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_svg(s: &DislocationNetwork, plane: Plane, path: &Path) -> Result<()> {
    let text = svg_string(s, plane)?;
    std::fs::write(path, text).map_err(|e| DddError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::Vec3;
    use crate::geometry::{regular_polygon, Lattice, Loop};

    fn net(centers: &[Vec3]) -> DislocationNetwork {
        let lat = Lattice::simple_cubic();
        let loops = centers
            .iter()
            .map(|c| Loop::new(regular_polygon(*c, Vec3::x(), Vec3::y(), 4.0, 24), lat.burgers([1, 0, 0]).unwrap()).unwrap())
            .collect();
        DislocationNetwork::new(lat, loops, 1.0).unwrap()
    }

    #[test]
    fn circle_projects_to_one_closed_path_with_node_extents() {
        let svg = svg_string(&net(&[Vec3::zeros()]), Plane::Xy).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains("Z\""));
        let bbox: Vec<f64> = svg
            .split("data-bbox=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .split(' ')
            .map(|v| v.parse().unwrap())
            .collect();
        let expect = [-4.0, -4.0, 4.0, 4.0];
        for (a, b) in bbox.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{bbox:?}");
        }
        assert!(svg.contains("scale-bar"));
    }

    #[test]
    fn two_loops_give_two_paths() {
        let svg = svg_string(&net(&[Vec3::zeros(), Vec3::new(10.0, 0.0, 0.0)]), Plane::Xz).unwrap();
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn empty_network_is_an_error() {
        let s = net(&[]);
        assert!(svg_string(&s, Plane::Xy).is_err());
        assert!("ab".parse::<Plane>().is_err());
    }
}
