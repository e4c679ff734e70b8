//! Semi-discrete operators on the periodic Cartesian mesh: the DGSEM
//! (standard or flux-differencing volume term), the LGL-subcell
//! first-order finite volume scheme, and their element-wise convex blend.
//!
//! Both operators are tensor products of one-dimensional line operators.
//! Interface fluxes at element faces are computed once per face and
//! shared by the two schemes, so that their element totals coincide and
//! any element-wise blend stays conservative.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Floor, Result};
use crate::field::{Mesh2D, NodalField, SolutionField};
use crate::flux::{ec_kep_inner, FluxKind};
use crate::indicator::BlendField;
use crate::lgl::ElementOperators;
use crate::physics::{Axis, ConservativeState, GasModel};
use crate::real::Real;

/// Volume term of the DGSEM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeForm {
    /// Collocated derivative of the physical flux.
    Standard,
    /// Flux differencing with the EC/KEP two-point flux.
    Split,
}

impl fmt::Display for VolumeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolumeForm::Standard => "standard",
            VolumeForm::Split => "split",
        })
    }
}

impl FromStr for VolumeForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "weak" | "strong" => Ok(VolumeForm::Standard),
            "split" | "es" | "flux_differencing" => Ok(VolumeForm::Split),
            other => Err(format!("unknown volume form `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VolumeKernel {
    Standard,
    SplitEc,
    /// Arithmetic mean of physical fluxes; the split form then reduces to
    /// the standard one, which the tests exploit.
    #[cfg(test)]
    SplitCentral,
}

/// Time derivatives of one stage: DG part, FV part and their blend.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsField<T> {
    pub dg: NodalField<T>,
    pub fv: NodalField<T>,
    pub blended: NodalField<T>,
}

/// Spatial discretization bound to a mesh, operators and flux choices.
#[derive(Clone, Debug)]
pub struct Discretization<T> {
    pub ops: ElementOperators<T>,
    pub mesh: Mesh2D<T>,
    pub gas: GasModel<T>,
    pub surface_flux: FluxKind,
    pub volume_form: VolumeForm,
}

/// Interface fluxes: `x_faces[k * n + j]` is the flux through the left
/// face of element `k`, `y_faces[k * n + i]` through its bottom face.
struct FaceFluxes<T> {
    x_faces: Vec<ConservativeState<T>>,
    y_faces: Vec<ConservativeState<T>>,
}

/// DG and FV derivatives, each only when requested.
type Parts<T> = (Option<NodalField<T>>, Option<NodalField<T>>);

impl<T: Real> Discretization<T> {
    pub fn new(
        ops: ElementOperators<T>,
        mesh: Mesh2D<T>,
        gas: GasModel<T>,
        surface_flux: FluxKind,
        volume_form: VolumeForm,
    ) -> Self {
        Self {
            ops,
            mesh,
            gas,
            surface_flux,
            volume_form,
        }
    }

    fn volume_kernel(&self) -> VolumeKernel {
        match self.volume_form {
            VolumeForm::Standard => VolumeKernel::Standard,
            VolumeForm::Split => VolumeKernel::SplitEc,
        }
    }

    /// Nodal pressures, or the first inadmissible node as an error.
    pub fn admissible_pressures(&self, u: &SolutionField<T>) -> Result<Vec<T>> {
        self.check_field(u)?;
        let pressures: Vec<T> = u.values().par_iter().map(|s| s.pressure_unchecked(&self.gas)).collect();
        let bad = u
            .values()
            .iter()
            .zip(&pressures)
            .position(|(s, &p)| !(s.rho() > T::zero()) || !(p > T::zero()));
        if let Some(flat) = bad {
            let s = u.values()[flat];
            return Err(Error::InadmissibleNode {
                location: u.location(flat),
                floor: if s.rho() > T::zero() {
                    Floor::Pressure
                } else {
                    Floor::Density
                },
                rho: s.rho().as_f64(),
                p: pressures[flat].as_f64(),
            });
        }
        Ok(pressures)
    }

    fn check_field(&self, u: &SolutionField<T>) -> Result<()> {
        if u.degree() != self.ops.degree() || u.n_elements() != self.mesh.n_elements() {
            return Err(Error::DimensionMismatch {
                expected: self.mesh.n_elements() * self.ops.n_nodes() * self.ops.n_nodes(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn face_fluxes(&self, u: &SolutionField<T>, p: &[T]) -> FaceFluxes<T> {
        let n = self.ops.n_nodes();
        let last = n - 1;
        let kinds = self.surface_flux;
        let gas = &self.gas;
        let mesh = &self.mesh;
        let x_faces = (0..mesh.n_elements() * n)
            .into_par_iter()
            .map(|idx| {
                let (k, j) = (idx / n, idx % n);
                let left = mesh.neighbors(k).left;
                let il = u.index(left, last, j);
                let ir = u.index(k, 0, j);
                kinds.evaluate_inner(&u.values()[il], &u.values()[ir], p[il], p[ir], gas, Axis::X)
            })
            .collect();
        let y_faces = (0..mesh.n_elements() * n)
            .into_par_iter()
            .map(|idx| {
                let (k, i) = (idx / n, idx % n);
                let below = mesh.neighbors(k).bottom;
                let il = u.index(below, i, last);
                let ir = u.index(k, i, 0);
                kinds.evaluate_inner(&u.values()[il], &u.values()[ir], p[il], p[ir], gas, Axis::Y)
            })
            .collect();
        FaceFluxes { x_faces, y_faces }
    }

    /// High-order DGSEM time derivative.
    pub fn dg_rhs(&self, u: &SolutionField<T>) -> Result<NodalField<T>> {
        let (dg, _) = self.assemble(u, self.volume_kernel(), true, false)?;
        Ok(dg.expect("requested"))
    }

    /// Subcell finite-volume time derivative.
    pub fn fv_rhs(&self, u: &SolutionField<T>) -> Result<NodalField<T>> {
        let (_, fv) = self.assemble(u, self.volume_kernel(), false, true)?;
        Ok(fv.expect("requested"))
    }

    /// Both parts, sharing interface fluxes.
    pub fn rhs_parts(&self, u: &SolutionField<T>) -> Result<(NodalField<T>, NodalField<T>)> {
        let (dg, fv) = self.assemble(u, self.volume_kernel(), true, true)?;
        Ok((dg.expect("requested"), fv.expect("requested")))
    }

    /// DG parts, FV parts, and the blend for the given coefficients.
    pub fn evaluate(&self, u: &SolutionField<T>, alpha: &BlendField<T>) -> Result<RhsField<T>> {
        let (dg, fv) = self.rhs_parts(u)?;
        blended_rhs(dg, fv, alpha)
    }

    fn assemble(&self, u: &SolutionField<T>, kernel: VolumeKernel, want_dg: bool, want_fv: bool) -> Result<Parts<T>> {
        let pressures = self.admissible_pressures(u)?;
        let faces = self.face_fluxes(u, &pressures);
        let degree = self.ops.degree();
        let k_total = self.mesh.n_elements();
        let mut dg = want_dg.then(|| NodalField::zeros(k_total, degree));
        let mut fv = want_fv.then(|| NodalField::zeros(k_total, degree));
        let nn = self.ops.n_nodes() * self.ops.n_nodes();

        let ctx = ElementKernel {
            disc: self,
            u,
            p: &pressures,
            faces: &faces,
            kernel,
        };
        match (&mut dg, &mut fv) {
            (Some(dg), Some(fv)) => dg
                .values_mut()
                .par_chunks_mut(nn)
                .zip(fv.values_mut().par_chunks_mut(nn))
                .enumerate()
                .for_each(|(k, (d, f))| ctx.run(k, Some(d), Some(f))),
            (Some(dg), None) => dg
                .values_mut()
                .par_chunks_mut(nn)
                .enumerate()
                .for_each(|(k, d)| ctx.run(k, Some(d), None)),
            (None, Some(fv)) => fv
                .values_mut()
                .par_chunks_mut(nn)
                .enumerate()
                .for_each(|(k, f)| ctx.run(k, None, Some(f))),
            (None, None) => {}
        }
        Ok((dg, fv))
    }
}

struct ElementKernel<'a, T> {
    disc: &'a Discretization<T>,
    u: &'a SolutionField<T>,
    p: &'a [T],
    faces: &'a FaceFluxes<T>,
    kernel: VolumeKernel,
}

/// Scratch for one node line.
struct Line<T> {
    states: Vec<ConservativeState<T>>,
    pressures: Vec<T>,
    dg: Vec<ConservativeState<T>>,
    fv: Vec<ConservativeState<T>>,
    flux: Vec<ConservativeState<T>>,
}

impl<'a, T: Real> ElementKernel<'a, T> {
    fn run(&self, k: usize, mut dg: Option<&mut [ConservativeState<T>]>, mut fv: Option<&mut [ConservativeState<T>]>) {
        let disc = self.disc;
        let n = disc.ops.n_nodes();
        let mesh = &disc.mesh;
        let right = mesh.neighbors(k).right;
        let top = mesh.neighbors(k).top;
        let base = k * n * n;
        let mut line = Line {
            states: vec![ConservativeState::zero(); n],
            pressures: vec![T::zero(); n],
            dg: vec![ConservativeState::zero(); n],
            fv: vec![ConservativeState::zero(); n],
            flux: vec![ConservativeState::zero(); n],
        };

        // x lines: j fixed, i varies
        for j in 0..n {
            for i in 0..n {
                line.states[i] = self.u.values()[base + i * n + j];
                line.pressures[i] = self.p[base + i * n + j];
            }
            let left_flux = self.faces.x_faces[k * n + j];
            let right_flux = self.faces.x_faces[right * n + j];
            self.line_operator(
                &mut line,
                left_flux,
                right_flux,
                Axis::X,
                mesh.metric_x(),
                dg.is_some(),
                fv.is_some(),
            );
            for i in 0..n {
                if let Some(d) = dg.as_deref_mut() {
                    d[i * n + j] += line.dg[i];
                }
                if let Some(f) = fv.as_deref_mut() {
                    f[i * n + j] += line.fv[i];
                }
            }
        }
        // y lines: i fixed, j varies
        for i in 0..n {
            for j in 0..n {
                line.states[j] = self.u.values()[base + i * n + j];
                line.pressures[j] = self.p[base + i * n + j];
            }
            let bottom_flux = self.faces.y_faces[k * n + i];
            let top_flux = self.faces.y_faces[top * n + i];
            self.line_operator(
                &mut line,
                bottom_flux,
                top_flux,
                Axis::Y,
                mesh.metric_y(),
                dg.is_some(),
                fv.is_some(),
            );
            for j in 0..n {
                if let Some(d) = dg.as_deref_mut() {
                    d[i * n + j] += line.dg[j];
                }
                if let Some(f) = fv.as_deref_mut() {
                    f[i * n + j] += line.fv[j];
                }
            }
        }
    }

    /// One-dimensional DG and FV operators on a line of `N + 1` nodes.
    #[allow(clippy::too_many_arguments)]
    fn line_operator(
        &self,
        line: &mut Line<T>,
        left_flux: ConservativeState<T>,
        right_flux: ConservativeState<T>,
        axis: Axis,
        metric: T,
        want_dg: bool,
        want_fv: bool,
    ) {
        let disc = self.disc;
        let gas = &disc.gas;
        let n = disc.ops.n_nodes();
        let last = n - 1;
        let d = disc.ops.deriv_matrix();
        let w = disc.ops.weights();
        let inv_metric = metric.recip();

        for m in 0..n {
            line.flux[m] = gas.flux_with_pressure(&line.states[m], line.pressures[m], axis);
        }

        if want_dg {
            for v in line.dg.iter_mut() {
                *v = ConservativeState::zero();
            }
            match self.kernel {
                VolumeKernel::Standard => {
                    for r in 0..n {
                        let row = d.row(r);
                        let mut acc = ConservativeState::zero();
                        for m in 0..n {
                            acc = acc.axpy(row[m], &line.flux[m]);
                        }
                        line.dg[r] = acc * (-inv_metric);
                    }
                }
                kernel => {
                    let two_point = |a: usize, b: usize| -> ConservativeState<T> {
                        match kernel {
                            VolumeKernel::SplitEc => ec_kep_inner(
                                &line.states[a],
                                &line.states[b],
                                line.pressures[a],
                                line.pressures[b],
                                gas,
                                axis,
                            ),
                            #[cfg(test)]
                            VolumeKernel::SplitCentral => (line.flux[a] + line.flux[b]) * T::lit(0.5),
                            VolumeKernel::Standard => unreachable!(),
                        }
                    };
                    let mut acc = vec![ConservativeState::zero(); n];
                    for r in 0..n {
                        acc[r] = acc[r].axpy(d[(r, r)], &line.flux[r]);
                        for m in (r + 1)..n {
                            let f = two_point(r, m);
                            acc[r] = acc[r].axpy(d[(r, m)], &f);
                            acc[m] = acc[m].axpy(d[(m, r)], &f);
                        }
                    }
                    let scale = -(inv_metric + inv_metric);
                    for r in 0..n {
                        line.dg[r] = acc[r] * scale;
                    }
                }
            }
            let right = (line.flux[last] - right_flux) * (inv_metric / w[last]);
            let left = (line.flux[0] - left_flux) * (inv_metric / w[0]);
            line.dg[last] += right;
            line.dg[0] -= left;
        }

        if want_fv {
            let mut prev = left_flux;
            for m in 0..n {
                let next = if m == last {
                    right_flux
                } else {
                    disc.surface_flux.evaluate_inner(
                        &line.states[m],
                        &line.states[m + 1],
                        line.pressures[m],
                        line.pressures[m + 1],
                        gas,
                        axis,
                    )
                };
                line.fv[m] = (prev - next) * (inv_metric / w[m]);
                prev = next;
            }
        }
    }
}

/// `(1 - alpha_k) dg + alpha_k fv` element-wise.
pub fn blended_rhs<T: Real>(dg: NodalField<T>, fv: NodalField<T>, alpha: &BlendField<T>) -> Result<RhsField<T>> {
    dg.check_shape(&fv)?;
    if alpha.len() != dg.n_elements() {
        return Err(Error::DimensionMismatch {
            expected: dg.n_elements(),
            got: alpha.len(),
        });
    }
    alpha.validate()?;
    let mut blended = dg.clone();
    let nn = dg.nodes_per_element();
    blended
        .values_mut()
        .par_chunks_mut(nn)
        .zip(fv.values().par_chunks(nn))
        .enumerate()
        .for_each(|(k, (b, f))| {
            let a = alpha.alpha[k];
            if a == T::zero() {
                return;
            }
            if a == T::one() {
                b.copy_from_slice(f);
                return;
            }
            let one_minus = T::one() - a;
            for (bv, fvv) in b.iter_mut().zip(f) {
                *bv = (*bv * one_minus).axpy(a, fvv);
            }
        });
    Ok(RhsField { dg, fv, blended })
}
