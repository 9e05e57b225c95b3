//! File output: solution fields on the subcell mesh in legacy VTK, line and
//! radial profiles as CSV, convergence rate tables, and diagnostic dumps of
//! the reference operators, the subdivision geometry, and the face ledger.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::connectivity::{CorrSide, LedgerSlot};
use crate::driver::ConvergenceRow;
use crate::error::Result;
use crate::operators::{bernstein_projection, condition, RefOperators};
use crate::physics::Model;
use crate::residual::Discretization;
use crate::stepper::SolutionState;
use crate::subdivision::SubcellTopology;

fn var_names(model: &Model) -> &'static [&'static str] {
    match model {
        Model::Euler { .. } => &["rho", "mom_x", "mom_y", "energy"],
        _ => &["u"],
    }
}

/// Writes the subcell polygons with their submean fields as an ASCII legacy
/// VTK unstructured grid. Euler runs get derived pressure and speed arrays;
/// `extra` appends caller-supplied per-subcell scalars such as correction
/// activity maps.
pub fn write_vtk(
    path: &Path,
    disc: &Discretization,
    state: &SolutionState,
    extra: &[(&str, &[f64])],
) -> Result<()> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let n_total = disc.conn.n_subcells();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "subcell fields at t = {:.12e}, step {}", state.t, state.step)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    let n_points: usize =
        disc.conn.geom.iter().map(|g| g.sub_vertices.iter().map(Vec::len).sum::<usize>()).sum();
    writeln!(w, "POINTS {n_points} double")?;
    for g in &disc.conn.geom {
        for poly in &g.sub_vertices {
            for p in poly {
                writeln!(w, "{:.12e} {:.12e} 0.0", p.x, p.y)?;
            }
        }
    }
    let cell_ints: usize = n_total
        + disc.conn.geom.iter().map(|g| g.sub_vertices.iter().map(Vec::len).sum::<usize>()).sum::<usize>();
    writeln!(w, "CELLS {n_total} {cell_ints}")?;
    let mut offset = 0usize;
    for g in &disc.conn.geom {
        for poly in &g.sub_vertices {
            write!(w, "{}", poly.len())?;
            for i in 0..poly.len() {
                write!(w, " {}", offset + i)?;
            }
            writeln!(w)?;
            offset += poly.len();
        }
    }
    writeln!(w, "CELL_TYPES {n_total}")?;
    for _ in 0..n_total {
        // 7 is the VTK polygon cell type.
        writeln!(w, "7")?;
    }
    writeln!(w, "CELL_DATA {n_total}")?;
    let submean = |v: usize, s: usize| state.submeans[((s / n_sub) * nv + v) * n_sub + s % n_sub];
    for (v, name) in var_names(&disc.model).iter().enumerate() {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for s in 0..n_total {
            writeln!(w, "{:.12e}", submean(v, s))?;
        }
    }
    if let Model::Euler { gamma } = disc.model {
        writeln!(w, "SCALARS pressure double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for s in 0..n_total {
            let rho = submean(0, s);
            let ke = 0.5 * (submean(1, s).powi(2) + submean(2, s).powi(2)) / rho;
            writeln!(w, "{:.12e}", (gamma - 1.0) * (submean(3, s) - ke))?;
        }
        writeln!(w, "SCALARS speed double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for s in 0..n_total {
            let rho = submean(0, s);
            writeln!(w, "{:.12e}", (submean(1, s).hypot(submean(2, s))) / rho)?;
        }
    }
    for (name, values) in extra {
        assert_eq!(values.len(), n_total, "extra array '{name}' length mismatch");
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for value in *values {
            writeln!(w, "{:.12e}", value)?;
        }
    }
    Ok(())
}

/// Projection axis of a one-dimensional profile through the solution.
#[derive(Debug, Clone, Copy)]
pub enum ProfileAxis {
    /// Coordinate x + y - 1, across the diagonal transport direction.
    Diagonal,
    /// Distance from the origin.
    Radius,
    /// Subcells straddling the horizontal line y = y0, coordinate x.
    XLine { y: f64 },
    /// Subcells straddling the vertical line x = x0, coordinate y.
    YLine { x: f64 },
}

/// One row per selected subcell, sorted by the profile coordinate:
/// coordinate, submeans, and the derived pressure and speed for gas runs.
pub fn write_profile_csv(
    path: &Path,
    disc: &Discretization,
    state: &SolutionState,
    axis: ProfileAxis,
) -> Result<()> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let submean = |v: usize, s: usize| state.submeans[((s / n_sub) * nv + v) * n_sub + s % n_sub];
    let mut rows: Vec<(f64, usize)> = Vec::new();
    for s in 0..disc.conn.n_subcells() {
        let (c, m) = (s / n_sub, s % n_sub);
        let centroid = disc.conn.geom[c].sub_centroids[m];
        let poly = &disc.conn.geom[c].sub_vertices[m];
        let coord = match axis {
            ProfileAxis::Diagonal => centroid.x + centroid.y - 1.0,
            ProfileAxis::Radius => centroid.norm(),
            ProfileAxis::XLine { y } => {
                let (lo, hi) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                    (a.min(p.y), b.max(p.y))
                });
                if !(lo <= y && y <= hi) {
                    continue;
                }
                centroid.x
            }
            ProfileAxis::YLine { x } => {
                let (lo, hi) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                    (a.min(p.x), b.max(p.x))
                });
                if !(lo <= x && x <= hi) {
                    continue;
                }
                centroid.y
            }
        };
        rows.push((coord, s));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = BufWriter::new(File::create(path)?);
    let names = var_names(&disc.model);
    write!(w, "coord")?;
    for name in names {
        write!(w, ",{name}")?;
    }
    if matches!(disc.model, Model::Euler { .. }) {
        write!(w, ",pressure,speed")?;
    }
    writeln!(w)?;
    for (coord, s) in rows {
        write!(w, "{coord:.12e}")?;
        for v in 0..nv {
            write!(w, ",{:.12e}", submean(v, s))?;
        }
        if let Model::Euler { gamma } = disc.model {
            let rho = submean(0, s);
            let ke = 0.5 * (submean(1, s).powi(2) + submean(2, s).powi(2)) / rho;
            write!(w, ",{:.12e},{:.12e}", (gamma - 1.0) * (submean(3, s) - ke), submean(1, s).hypot(submean(2, s)) / rho)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_rate_table_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "resolution,cells,h,l1,q1,l2,q2,linf,qinf")?;
    for r in rows {
        let q = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{}",
            r.resolution,
            r.n_cells,
            r.h,
            r.l1,
            q(r.q1),
            r.l2,
            q(r.q2),
            r.linf,
            q(r.qinf)
        )?;
    }
    Ok(())
}

/// Aligned text form of a rate table for terminal output.
pub fn format_rate_table(rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6} {:>8} {:>12} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}\n",
        "1/h", "cells", "L1", "", "q1", "L2", "q2", "Linf", "qinf"
    ));
    for r in rows {
        let q = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:>6} {:>8} {:>12.4e} {:>12} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}\n",
            r.resolution,
            r.n_cells,
            r.l1,
            "",
            q(r.q1),
            r.l2,
            q(r.q2),
            r.linf,
            q(r.qinf)
        ));
    }
    out
}

fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{:.17e}", m[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// All reference operators of one subdivision as CSV matrices plus a text
/// summary with the audit condition numbers.
pub fn write_operator_dump(dir: &Path, ops: &RefOperators) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("projection.csv"), &ops.proj)?;
    write_matrix_csv(&dir.join("projection_inverse.csv"), &ops.proj_inv)?;
    write_matrix_csv(&dir.join("adjacency.csv"), &ops.adjacency)?;
    write_matrix_csv(&dir.join("laplacian.csv"), &ops.laplacian)?;
    write_matrix_csv(&dir.join("laplacian_pseudoinverse.csv"), &ops.lap_pinv)?;
    write_matrix_csv(&dir.join("subresolution.csv"), &ops.subres)?;
    let mut w = BufWriter::new(File::create(dir.join("summary.txt"))?);
    writeln!(w, "{}", operator_summary(ops))?;
    Ok(())
}

pub fn operator_summary(ops: &RefOperators) -> String {
    let c = condition(&ops.proj);
    let cb = condition(&bernstein_projection(&ops.topo));
    format!(
        "scheme {} k={}: {} modes, {} subcells, {} interior faces\n\
         projection condition {:.6e} (modal), {:.6e} (audit basis)",
        ops.topo.scheme.kind.name(),
        ops.k,
        ops.basis.len(),
        ops.topo.n_sub,
        ops.topo.interior_faces.len(),
        c.cond_abs,
        cb.cond_abs,
    )
}

/// Reference subdivision geometry: one CSV of polygon vertices and one of
/// interior faces, in barycentric-plane coordinates.
pub fn write_subdivision_dump(dir: &Path, topo: &SubcellTopology) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("polygons.csv"))?);
    writeln!(w, "subcell,vertex,x,y")?;
    for (m, poly) in topo.polygons.iter().enumerate() {
        for (i, p) in poly.iter().enumerate() {
            writeln!(w, "{m},{i},{:.17e},{:.17e}", p.x, p.y)?;
        }
    }
    let mut w = BufWriter::new(File::create(dir.join("interior_faces.csv"))?);
    writeln!(w, "face,sub_left,sub_right,ax,ay,bx,by,length,nx,ny")?;
    for (f, face) in topo.interior_faces.iter().enumerate() {
        writeln!(
            w,
            "{f},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            face.sub_left,
            face.sub_right,
            face.a.x,
            face.a.y,
            face.b.x,
            face.b.y,
            face.length,
            face.normal.x,
            face.normal.y
        )?;
    }
    let mut w = BufWriter::new(File::create(dir.join("areas.csv"))?);
    writeln!(w, "subcell,reference_area,area_fraction")?;
    for m in 0..topo.n_sub {
        writeln!(w, "{m},{:.17e},{:.17e}", topo.ref_areas[m], topo.area_fractions[m])?;
    }
    Ok(())
}

/// Per-face dump of reconstructed flux values for one assembled stage:
/// geometry, ledger slot kind, and the stored value of each variable.
pub fn write_ledger_csv(path: &Path, disc: &Discretization, face_values: &[f64]) -> Result<()> {
    let nv = disc.n_vars();
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "face,kind,left_subcell,right,midx,midy,nx,ny,length")?;
    for v in 0..nv {
        write!(w, ",value{v}")?;
    }
    writeln!(w)?;
    for (fi, face) in disc.conn.corr_faces.iter().enumerate() {
        let kind = match face.ledger {
            LedgerSlot::CellInterior { .. } => "interior",
            LedgerSlot::CrossSubface { .. } => "cross",
            LedgerSlot::BoundarySubface { .. } => "boundary",
        };
        let right = match &face.right {
            CorrSide::Sub(r) => format!("{r}"),
            CorrSide::Ghost(_) => "ghost".into(),
        };
        write!(
            w,
            "{fi},{kind},{},{right},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            face.left, face.midpoint.x, face.midpoint.y, face.normal.x, face.normal.y, face.length
        )?;
        for v in 0..nv {
            write!(w, ",{:.17e}", face_values[fi * nv + v])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
