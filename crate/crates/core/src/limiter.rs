//! A-posteriori positivity limiter acting on the element-wise blending
//! coefficient.
//!
//! After each Runge–Kutta stage the candidate state obtained with the
//! blended time derivative is compared against the "safe" state obtained
//! with the pure subcell FV derivative. Wherever a node falls below
//! `beta * rho_safe` or `beta * p_safe`, the element's blending
//! coefficient is raised just enough to restore the floor. Because the
//! candidate is affine in `alpha`, raising it by `d_alpha` moves the
//! state by `d_alpha * dt_s * (u_fv - u_dg)` and the derivative by
//! `d_alpha * (u_fv - u_dg)`; at `alpha = 1` the candidate coincides
//! with the safe state.

use rayon::prelude::*;

use crate::error::{Error, Floor, Result};
use crate::field::{NodalField, SolutionField};
use crate::indicator::BlendField;
use crate::physics::{ConservativeState, GasModel};
use crate::real::Real;
use crate::spatial::RhsField;

/// Denominators and Newton derivatives below this magnitude fall back to
/// a pure FV element.
const DEGENERATE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterSettings<T> {
    pub enabled: bool,
    /// Fraction of the safe density and pressure that must be retained.
    pub beta: T,
    pub newton_max_iter: usize,
    /// Newton stops once `|p - beta p_safe| <= newton_tol * p_safe`.
    pub newton_tol: T,
}

impl<T: Real> Default for LimiterSettings<T> {
    fn default() -> Self {
        Self {
            enabled: true,
            beta: T::lit(0.1),
            newton_max_iter: 10,
            newton_tol: T::lit(1e-12),
        }
    }
}

/// Everything the limiter needs for one stage.
#[derive(Clone, Debug)]
pub struct StageContext<T> {
    /// `b_ss * dt`
    pub stage_dt: T,
    /// `u^{s+1}` built with the blended derivative; corrected in place.
    pub candidate: SolutionField<T>,
    /// `u^{s+1}_safe` built with the FV derivative.
    pub safe: SolutionField<T>,
    /// DG, FV and blended derivatives; `blended` is corrected in place.
    pub rhs: RhsField<T>,
    /// Blending used to build the candidate; raised in place.
    pub alpha: BlendField<T>,
    pub gas: GasModel<T>,
    pub settings: LimiterSettings<T>,
}

/// Smallest distances to the floors over all nodes, after limiting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorMargins<T> {
    /// `min (rho - beta rho_safe)`
    pub density: T,
    /// `min (p - beta p_safe)`
    pub pressure: T,
    pub min_rho: T,
    pub min_p: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport<T> {
    pub margins: FloorMargins<T>,
    pub corrected_elements: usize,
}

/// `base + dt_s * fv`, the stage update with `alpha = 1`, checked for
/// admissibility. `base` holds every term of the stage update except the
/// current derivative.
pub fn compute_safe_candidate<T: Real>(
    base: &SolutionField<T>,
    stage_dt: T,
    fv: &NodalField<T>,
    gas: &GasModel<T>,
    stage: usize,
) -> Result<SolutionField<T>> {
    base.check_shape(fv)?;
    let mut safe = base.clone();
    safe.axpy(stage_dt, fv);
    check_safe(&safe, gas, stage)?;
    Ok(safe)
}

/// Errors with the first node of `safe` that is not admissible.
pub fn check_safe<T: Real>(safe: &SolutionField<T>, gas: &GasModel<T>, stage: usize) -> Result<()> {
    if let Some(flat) = safe.first_inadmissible(gas) {
        let s = safe.values()[flat];
        let floor = if s.rho() > T::zero() {
            Floor::Pressure
        } else {
            Floor::Density
        };
        let p = if s.rho() != T::zero() {
            s.pressure_unchecked(gas).as_f64()
        } else {
            f64::NAN
        };
        return Err(Error::SafeViolation {
            location: safe.location(flat),
            stage,
            floor,
            rho: s.rho().as_f64(),
            p,
        });
    }
    Ok(())
}

/// Node-level data of one element.
struct ElementView<'a, T> {
    candidate: &'a [ConservativeState<T>],
    safe: &'a [ConservativeState<T>],
    dg: &'a [ConservativeState<T>],
    fv: &'a [ConservativeState<T>],
}

fn density_alpha<T: Real>(view: &ElementView<'_, T>, alpha: T, stage_dt: T, beta: T) -> T {
    let mut new_alpha = alpha;
    for n in 0..view.candidate.len() {
        let rho = view.candidate[n].rho();
        let a_rho = beta * view.safe[n].rho() - rho;
        if !(a_rho > T::zero()) {
            continue;
        }
        let denom = stage_dt * (view.fv[n].rho() - view.dg[n].rho());
        if !(denom > T::lit(DEGENERATE)) {
            return T::one();
        }
        let node_alpha = alpha + a_rho / denom;
        if !(node_alpha < T::one()) {
            return T::one();
        }
        new_alpha = new_alpha.max(node_alpha);
    }
    new_alpha
}

/// Result of the Newton iteration at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOutcome<T> {
    pub alpha: T,
    pub iterations: usize,
    /// `false` when the iteration gave up and fell back to `alpha = 1`.
    pub converged: bool,
}

/// Solves `p(u + (a - alpha_start) du_dalpha) = target` for `a` by
/// Newton's method, starting from `alpha_start`.
pub fn newton_pressure_alpha<T: Real>(
    state: &ConservativeState<T>,
    du_dalpha: &ConservativeState<T>,
    alpha_start: T,
    target: T,
    tol_abs: T,
    max_iter: usize,
    gas: &GasModel<T>,
) -> NewtonOutcome<T> {
    let fallback = |iterations| NewtonOutcome {
        alpha: T::one(),
        iterations,
        converged: false,
    };
    let mut alpha = alpha_start;
    for iter in 0..=max_iter {
        let u = state.axpy(alpha - alpha_start, du_dalpha);
        let g = u.pressure_unchecked(gas) - target;
        if !g.is_finite() {
            return fallback(iter);
        }
        if g.abs() <= tol_abs {
            return NewtonOutcome {
                alpha,
                iterations: iter,
                converged: true,
            };
        }
        if iter == max_iter {
            break;
        }
        let slope = gas.pressure_gradient(&u).dot(du_dalpha);
        if !(slope.abs() >= T::lit(DEGENERATE)) {
            return fallback(iter);
        }
        alpha = alpha - g / slope;
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return fallback(iter + 1);
        }
    }
    fallback(max_iter)
}

fn pressure_alpha<T: Real>(
    view: &ElementView<'_, T>,
    alpha_start: T,
    stage_dt: T,
    gas: &GasModel<T>,
    settings: &LimiterSettings<T>,
) -> T {
    let beta = settings.beta;
    let mut new_alpha = alpha_start;
    for n in 0..view.candidate.len() {
        let u = view.candidate[n];
        let p_safe = view.safe[n].pressure_unchecked(gas);
        let target = beta * p_safe;
        let p = if u.rho() > T::zero() {
            u.pressure_unchecked(gas)
        } else {
            return T::one();
        };
        if p >= target {
            continue;
        }
        let du_dalpha = (view.fv[n] - view.dg[n]) * stage_dt;
        let outcome = newton_pressure_alpha(
            &u,
            &du_dalpha,
            alpha_start,
            target,
            settings.newton_tol * p_safe,
            settings.newton_max_iter,
            gas,
        );
        if !outcome.converged {
            return T::one();
        }
        new_alpha = new_alpha.max(outcome.alpha);
    }
    new_alpha.min(T::one())
}

fn apply_to_element<T: Real>(
    candidate: &mut [ConservativeState<T>],
    blended: &mut [ConservativeState<T>],
    dg: &[ConservativeState<T>],
    fv: &[ConservativeState<T>],
    delta: T,
    stage_dt: T,
) {
    if delta == T::zero() {
        return;
    }
    let step = delta * stage_dt;
    for n in 0..candidate.len() {
        let diff = fv[n] - dg[n];
        candidate[n] = candidate[n].axpy(step, &diff);
        blended[n] = blended[n].axpy(delta, &diff);
    }
}

impl<T: Real> StageContext<T> {
    fn view(&self, element: usize) -> ElementView<'_, T> {
        ElementView {
            candidate: self.candidate.element(element),
            safe: self.safe.element(element),
            dg: self.rhs.dg.element(element),
            fv: self.rhs.fv.element(element),
        }
    }

    /// Blending coefficient that lifts every node of `element` to the
    /// density floor, i.e. the largest node-wise
    /// `alpha + a_rho / (dt_s (rho_fv - rho_dg))`.
    pub fn density_correction(&self, element: usize) -> T {
        density_alpha(
            &self.view(element),
            self.alpha.alpha[element],
            self.stage_dt,
            self.settings.beta,
        )
    }

    /// Blending coefficient that lifts every node of `element` to the
    /// pressure floor, by Newton iteration from `alpha_start`. The
    /// candidate must already correspond to `alpha_start`.
    pub fn pressure_correction(&self, element: usize, alpha_start: T) -> T {
        pressure_alpha(
            &self.view(element),
            alpha_start,
            self.stage_dt,
            &self.gas,
            &self.settings,
        )
    }

    /// Raises the element's blending coefficient to `alpha_new` and updates
    /// candidate state and blended derivative accordingly.
    pub fn apply_correction(&mut self, element: usize, alpha_new: T) -> Result<()> {
        let current = self.alpha.alpha[element];
        if alpha_new < current || alpha_new > T::one() {
            return Err(Error::AlphaDecrease {
                element,
                current: current.as_f64(),
                requested: alpha_new.as_f64(),
            });
        }
        let delta = alpha_new - current;
        apply_to_element(
            self.candidate.element_mut(element),
            self.rhs.blended.element_mut(element),
            self.rhs.dg.element(element),
            self.rhs.fv.element(element),
            delta,
            self.stage_dt,
        );
        self.alpha.alpha[element] = alpha_new;
        self.alpha.alpha_correction[element] = self.alpha.alpha_correction[element] + delta;
        Ok(())
    }

    /// Density pass followed by pressure pass on every element.
    pub fn limit_stage(&mut self) -> Result<LimitReport<T>> {
        let nn = self.candidate.nodes_per_element();
        let stage_dt = self.stage_dt;
        let gas = self.gas;
        let settings = self.settings;
        let safe = &self.safe;
        let dg = &self.rhs.dg;
        let fv = &self.rhs.fv;

        let corrected = self
            .candidate
            .values_mut()
            .par_chunks_mut(nn)
            .zip(self.rhs.blended.values_mut().par_chunks_mut(nn))
            .zip(self.alpha.alpha.par_iter_mut())
            .zip(self.alpha.alpha_correction.par_iter_mut())
            .enumerate()
            .map(|(k, (((cand, blended), alpha), correction))| {
                let start = *alpha;
                let (dg_k, fv_k) = (dg.element(k), fv.element(k));
                let view = ElementView {
                    candidate: &*cand,
                    safe: safe.element(k),
                    dg: dg_k,
                    fv: fv_k,
                };
                let after_density = density_alpha(&view, start, stage_dt, settings.beta).max(start);
                apply_to_element(cand, blended, dg_k, fv_k, after_density - start, stage_dt);

                let view = ElementView {
                    candidate: &*cand,
                    safe: safe.element(k),
                    dg: dg_k,
                    fv: fv_k,
                };
                let after_pressure = pressure_alpha(&view, after_density, stage_dt, &gas, &settings).max(after_density);
                apply_to_element(cand, blended, dg_k, fv_k, after_pressure - after_density, stage_dt);

                *alpha = after_pressure;
                *correction = *correction + (after_pressure - start);
                usize::from(after_pressure > start)
            })
            .sum();

        Ok(LimitReport {
            margins: floor_margins(&self.candidate, &self.safe, &self.gas, self.settings.beta),
            corrected_elements: corrected,
        })
    }
}

/// Minimum distance of `u` to the floors defined by `safe`.
pub fn floor_margins<T: Real>(
    u: &SolutionField<T>,
    safe: &SolutionField<T>,
    gas: &GasModel<T>,
    beta: T,
) -> FloorMargins<T> {
    let inf = T::infinity();
    let init = FloorMargins {
        density: inf,
        pressure: inf,
        min_rho: inf,
        min_p: inf,
    };
    u.values().iter().zip(safe.values()).fold(init, |m, (a, s)| {
        let p = if a.rho() > T::zero() {
            a.pressure_unchecked(gas)
        } else {
            T::neg_infinity()
        };
        FloorMargins {
            density: m.density.min(a.rho() - beta * s.rho()),
            pressure: m.pressure.min(p - beta * s.pressure_unchecked(gas)),
            min_rho: m.min_rho.min(a.rho()),
            min_p: m.min_p.min(p),
        }
    })
}
