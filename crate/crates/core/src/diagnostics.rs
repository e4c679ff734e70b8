//! Integral diagnostics, blending statistics and file output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{Mesh2D, SolutionField};
use crate::indicator::BlendField;
use crate::lgl::ElementOperators;
use crate::physics::GasModel;
use crate::real::Real;

/// Quadrature of the entropy density `-rho s / (gamma - 1)` over the
/// domain.
pub fn total_entropy<T: Real>(
    u: &SolutionField<T>,
    ops: &ElementOperators<T>,
    mesh: &Mesh2D<T>,
    gas: &GasModel<T>,
) -> Result<T> {
    let w = ops.weights();
    let n = ops.n_nodes();
    let jac = mesh.jacobian();
    let mut total = T::zero();
    for k in 0..u.n_elements() {
        let mut elem = T::zero();
        for i in 0..n {
            for j in 0..n {
                elem = elem + w[i] * w[j] * gas.entropy_density(u.get(k, i, j))?;
            }
        }
        total = total + elem * jac;
    }
    Ok(total)
}

/// Running statistics of the blending coefficients over the stages of a
/// sampling window.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaWindow<T> {
    stages: usize,
    max_alpha: T,
    sum_mean_alpha: T,
    max_correction: T,
    sum_mean_correction: T,
    /// Largest `alpha` seen per element.
    element_max: Vec<T>,
}

impl<T: Real> AlphaWindow<T> {
    pub fn new(n_elements: usize) -> Self {
        Self {
            stages: 0,
            max_alpha: T::zero(),
            sum_mean_alpha: T::zero(),
            max_correction: T::zero(),
            sum_mean_correction: T::zero(),
            element_max: vec![T::zero(); n_elements],
        }
    }

    pub fn push(&mut self, blend: &BlendField<T>) {
        self.stages += 1;
        self.max_alpha = self.max_alpha.max(blend.max_alpha());
        self.sum_mean_alpha = self.sum_mean_alpha + blend.mean_alpha();
        self.max_correction = self.max_correction.max(blend.max_correction());
        self.sum_mean_correction = self.sum_mean_correction + blend.mean_correction();
        for (m, &a) in self.element_max.iter_mut().zip(&blend.alpha) {
            *m = m.max(a);
        }
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    /// `(max, mean)` of `alpha`, or of `delta_alpha` when `use_correction`.
    pub fn statistics(&self, use_correction: bool) -> Result<(T, T)> {
        if self.stages == 0 {
            return Err(Error::EmptyWindow);
        }
        let ns = T::from_usize_lossy(self.stages);
        Ok(if use_correction {
            (self.max_correction, self.sum_mean_correction / ns)
        } else {
            (self.max_alpha, self.sum_mean_alpha / ns)
        })
    }

    pub fn element_max(&self) -> &[T] {
        &self.element_max
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.element_max.len());
    }
}

/// Maximum and stage-averaged element mean of `alpha` (or `delta_alpha`)
/// over a window of stages.
pub fn alpha_statistics<T: Real>(window: &[BlendField<T>], use_correction: bool) -> Result<(T, T)> {
    let n = window.first().map_or(0, BlendField::len);
    let mut acc = AlphaWindow::new(n);
    for b in window {
        acc.push(b);
    }
    acc.statistics(use_correction)
}

/// One line of `series.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow<T> {
    pub t: T,
    pub entropy: T,
    pub max_alpha: T,
    pub mean_alpha: T,
    pub max_dalpha: T,
    pub mean_dalpha: T,
    pub mass: T,
    pub mom_x: T,
    pub mom_y: T,
    pub energy: T,
    pub min_rho: T,
    pub min_p: T,
}

impl<T: Real> SeriesRow<T> {
    /// Mean blending in percent.
    pub fn fv_fraction_pct(&self) -> T {
        self.mean_alpha * T::lit(100.0)
    }

    pub fn totals(&self) -> [T; 4] {
        [self.mass, self.mom_x, self.mom_y, self.energy]
    }
}

pub const SERIES_HEADER: &str =
    "t,entropy,max_alpha,mean_alpha,max_dalpha,mean_dalpha,fv_fraction_pct,mass,mom_x,mom_y,energy,min_rho,min_p";

/// Float with 17 significant digits.
fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

/// Writer for `series.csv`, flushed after every row.
pub struct SeriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{SERIES_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(Self { path, out })
    }

    pub fn write_row<T: Real>(&mut self, row: &SeriesRow<T>) -> Result<()> {
        let fields = [
            row.t,
            row.entropy,
            row.max_alpha,
            row.mean_alpha,
            row.max_dalpha,
            row.mean_dalpha,
            row.fv_fraction_pct(),
            row.mass,
            row.mom_x,
            row.mom_y,
            row.energy,
            row.min_rho,
            row.min_p,
        ];
        let line = fields.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(",");
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// `snap_<step>_<t>`, shared by the VTK file and its CSV sidecar.
pub fn snapshot_stem(step: usize, t: f64) -> String {
    format!("snap_{step:06}_{t:.6}")
}

/// Snapshot input that is not part of the solution itself.
pub struct SnapshotData<'a, T> {
    pub ops: &'a ElementOperators<T>,
    pub mesh: &'a Mesh2D<T>,
    pub gas: &'a GasModel<T>,
    pub alpha: &'a [T],
    pub alpha_window_max: &'a [T],
}

/// Writes `<dir>/<stem>.vtk` (legacy ASCII rectilinear grid) and
/// `<dir>/<stem>.csv`. Interface coordinates appear once per adjacent
/// element, so the grid has `elements_x (N+1)` by `elements_y (N+1)`
/// points.
pub fn write_snapshot<T: Real>(
    u: &SolutionField<T>,
    data: &SnapshotData<'_, T>,
    t: T,
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mesh = data.mesh;
    let n = u.nodes_per_side();
    if data.alpha.len() != u.n_elements() || data.alpha_window_max.len() != u.n_elements() {
        return Err(Error::DimensionMismatch {
            expected: u.n_elements(),
            got: data.alpha.len().min(data.alpha_window_max.len()),
        });
    }
    let (gx, gy) = (mesh.elements_x() * n, mesh.elements_y() * n);

    // point (px, py) -> (element, i, j)
    let point = |px: usize, py: usize| {
        let k = mesh.element_index(px / n, py / n);
        (k, px % n, py % n)
    };
    let xs: Vec<T> = (0..gx)
        .map(|px| mesh.node_position(data.ops, px / n, px % n, 0).0)
        .collect();
    let ys: Vec<T> = (0..gy)
        .map(|py| mesh.node_position(data.ops, mesh.element_index(0, py / n), 0, py % n).1)
        .collect();

    struct Node<T> {
        k: usize,
        i: usize,
        j: usize,
        x: T,
        y: T,
        rho: T,
        v1: T,
        v2: T,
        p: T,
    }
    let mut nodes = Vec::with_capacity(gx * gy);
    for py in 0..gy {
        for px in 0..gx {
            let (k, i, j) = point(px, py);
            let prim = u.get(k, i, j).to_primitive(data.gas);
            nodes.push(Node {
                k,
                i,
                j,
                x: xs[px],
                y: ys[py],
                rho: prim.rho,
                v1: prim.v1,
                v2: prim.v2,
                p: prim.p,
            });
        }
    }

    let vtk_path = dir.join(format!("{stem}.vtk"));
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::io(p, e)
    };
    {
        let mut w = BufWriter::new(File::create(&vtk_path).map_err(io_err(&vtk_path))?);
        let mut body = String::new();
        body.push_str("# vtk DataFile Version 3.0\n");
        body.push_str(&format!("blendsem snapshot t={}\n", fmt(t)));
        body.push_str("ASCII\nDATASET RECTILINEAR_GRID\n");
        body.push_str(&format!("DIMENSIONS {gx} {gy} 1\n"));
        let coords = |name: &str, v: &[T], out: &mut String| {
            out.push_str(&format!("{name} {} double\n", v.len()));
            out.push_str(&v.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(" "));
            out.push('\n');
        };
        coords("X_COORDINATES", &xs, &mut body);
        coords("Y_COORDINATES", &ys, &mut body);
        body.push_str("Z_COORDINATES 1 double\n0\n");
        body.push_str(&format!("POINT_DATA {}\n", nodes.len()));
        type Column<'a, T> = (&'static str, Box<dyn Fn(&Node<T>) -> T + 'a>);
        let fields: [Column<T>; 7] = [
            ("rho", Box::new(|n: &Node<T>| n.rho)),
            ("v1", Box::new(|n: &Node<T>| n.v1)),
            ("v2", Box::new(|n: &Node<T>| n.v2)),
            ("p", Box::new(|n: &Node<T>| n.p)),
            ("log10_rho", Box::new(|n: &Node<T>| n.rho.log10())),
            ("alpha", Box::new(|n: &Node<T>| data.alpha[n.k])),
            ("alpha_max_window", Box::new(|n: &Node<T>| data.alpha_window_max[n.k])),
        ];
        for (name, f) in &fields {
            body.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
            for node in &nodes {
                body.push_str(&fmt(f(node)));
                body.push('\n');
            }
        }
        w.write_all(body.as_bytes()).map_err(io_err(&vtk_path))?;
        w.flush().map_err(io_err(&vtk_path))?;
    }

    let csv_path = dir.join(format!("{stem}.csv"));
    {
        let mut w = BufWriter::new(File::create(&csv_path).map_err(io_err(&csv_path))?);
        let mut body = String::from("element,i,j,x,y,rho,v1,v2,p,log10_rho,alpha,alpha_max_window\n");
        for n in &nodes {
            body.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                n.k,
                n.i,
                n.j,
                fmt(n.x),
                fmt(n.y),
                fmt(n.rho),
                fmt(n.v1),
                fmt(n.v2),
                fmt(n.p),
                fmt(n.rho.log10()),
                fmt(data.alpha[n.k]),
                fmt(data.alpha_window_max[n.k]),
            ));
        }
        w.write_all(body.as_bytes()).map_err(io_err(&csv_path))?;
        w.flush().map_err(io_err(&csv_path))?;
    }
    Ok((vtk_path, csv_path))
}
