//! Configuration, file formats, snapshot rendering and the self-check used
//! by the command-line tool.

pub mod check;
pub mod config;
pub mod svg;

use std::io::Write;

use crate::elasticity::Vec3;
use crate::error::{DddError, Result};
use crate::kernels::KernelEvaluator;

pub use check::{run_checks, CheckOptions, CheckReport, SuiteResult};
pub use config::{load_config, SimulationConfig};
pub use svg::{render_svg, svg_string, Plane};

// Floats use the shortest round-trip form, with exponents for tiny values.

/// `K^ε` and `J^ε` along the ray `r·dir`, one CSV row per radius:
/// `r, max|K|, max|J|` followed by the 81 components of `K` (row-major in
/// `abcd`).
pub fn write_kernel_table<W: Write>(out: W, ev: &KernelEvaluator, dir: &Vec3, radii: &[f64]) -> Result<()> {
    let n = dir.norm();
    if !(n > 0.0) {
        return Err(DddError::ZeroVector);
    }
    let dir = dir / n;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["r".to_string(), "k_max".to_string(), "j_max".to_string()];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    header.push(format!("K{a}{b}{c}{d}"));
                }
            }
        }
    }
    let fmt = |e: csv::Error| DddError::Format(e.to_string());
    w.write_record(&header).map_err(fmt)?;
    for &r in radii {
        let s = dir * r;
        let k = ev.eval_K(&s);
        let j = ev.eval_J(&s);
        let mut row = vec![format!("{r:?}"), format!("{:?}", k.max_abs()), format!("{:?}", j.max_abs())];
        row.extend(k.0.iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(fmt)?;
    }
    w.flush().map_err(|e| DddError::Format(e.to_string()))
}

/// Per-node force table: `loop, node, x, y, z, fx, fy, fz`.
pub fn write_force_table<W: Write>(out: W, s: &crate::geometry::DislocationNetwork, force: &[Vec3]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| DddError::Format(e.to_string());
    w.write_record(["loop", "node", "x", "y", "z", "fx", "fy", "fz"]).map_err(fmt)?;
    let mut k = 0;
    for (i, l) in s.loops().iter().enumerate() {
        for (n, x) in l.nodes().iter().enumerate() {
            let f = force[k];
            k += 1;
            let mut row = vec![i.to_string(), n.to_string()];
            row.extend([x.x, x.y, x.z, f.x, f.y, f.z].iter().map(|v| format!("{v:?}")));
            w.write_record(row).map_err(fmt)?;
        }
    }
    w.flush().map_err(|e| DddError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_force::tests::iso;

    #[test]
    fn kernel_table_has_one_row_per_radius() {
        let mut out = Vec::new();
        write_kernel_table(&mut out, &iso(1.0), &Vec3::new(1.0, 1.0, 0.0), &[0.0, 1.0, 10.0]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].split(',').count(), 84);
        assert!(write_kernel_table(Vec::new(), &iso(1.0), &Vec3::zeros(), &[1.0]).is_err());
    }
}
