//! Element-wise blending coefficients and the modal-energy shock
//! indicator on pressure.

use crate::error::{Error, Result};
use crate::field::{Mesh2D, SolutionField};
use crate::lgl::ElementOperators;
use crate::physics::GasModel;
use crate::real::Real;

/// Sharpness of the logistic map from modal energy to blending.
pub const SHARPNESS: f64 = 9.21024;

/// Total modal energies below this are treated as a constant field.
const ENERGY_FLOOR: f64 = 1e-28;

/// Per-element blending coefficients `alpha` in `[0, 1]` together with
/// the positivity correction `delta_alpha` applied during the current
/// stage.
#[derive(Clone, Debug, PartialEq)]
pub struct BlendField<T> {
    pub alpha: Vec<T>,
    pub alpha_correction: Vec<T>,
}

impl<T: Real> BlendField<T> {
    pub fn zeros(n_elements: usize) -> Self {
        Self::uniform(n_elements, T::zero())
    }

    pub fn uniform(n_elements: usize, value: T) -> Self {
        Self {
            alpha: vec![value; n_elements],
            alpha_correction: vec![T::zero(); n_elements],
        }
    }

    pub fn from_alpha(alpha: Vec<T>) -> Self {
        let n = alpha.len();
        Self {
            alpha,
            alpha_correction: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (element, &a) in self.alpha.iter().enumerate() {
            if !(a >= T::zero() && a <= T::one()) {
                return Err(Error::AlphaOutOfRange {
                    element,
                    value: a.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn max_alpha(&self) -> T {
        self.alpha.iter().fold(T::zero(), |m, &a| m.max(a))
    }

    pub fn mean_alpha(&self) -> T {
        mean(&self.alpha)
    }

    pub fn max_correction(&self) -> T {
        self.alpha_correction.iter().fold(T::zero(), |m, &a| m.max(a))
    }

    pub fn mean_correction(&self) -> T {
        mean(&self.alpha_correction)
    }
}

fn mean<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// Tunables of the indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndicatorSettings<T> {
    pub alpha_min: T,
    pub alpha_max: T,
}

impl<T: Real> Default for IndicatorSettings<T> {
    fn default() -> Self {
        Self {
            alpha_min: T::lit(1e-3),
            alpha_max: T::lit(0.5),
        }
    }
}

/// Threshold `T(N) = 0.5 * 10^(-1.8 (N+1)^0.25)`.
pub fn threshold<T: Real>(degree: usize) -> T {
    let n1 = T::from_usize_lossy(degree + 1);
    T::lit(0.5) * T::lit(10.0).powf(T::lit(-1.8) * n1.powf(T::lit(0.25)))
}

/// Relative energy of the two highest modal shells of the element's
/// pressure, shells taken by `max(i, j)`.
pub fn modal_energy_indicator<T: Real>(
    u: &SolutionField<T>,
    ops: &ElementOperators<T>,
    gas: &GasModel<T>,
    element: usize,
) -> Result<T> {
    let pressure: Vec<T> = u
        .element(element)
        .iter()
        .map(|s| gas.admissible_pressure(s))
        .collect::<Result<_>>()?;
    let modes = ops.nodal_to_modal_2d(&pressure)?;
    Ok(shell_energy(&modes, ops.degree()))
}

fn shell_energy<T: Real>(modes: &[T], degree: usize) -> T {
    let n = degree + 1;
    let mut total = T::zero();
    let mut top = T::zero();
    let mut below_top = T::zero();
    let mut second = T::zero();
    for p in 0..n {
        for q in 0..n {
            let e = modes[p * n + q] * modes[p * n + q];
            total = total + e;
            let shell = p.max(q);
            if shell == degree {
                top = top + e;
            } else {
                below_top = below_top + e;
                if shell + 1 == degree {
                    second = second + e;
                }
            }
        }
    }
    if total < T::lit(ENERGY_FLOOR) {
        return T::zero();
    }
    let e_top = top / total;
    if degree < 2 || below_top < T::lit(ENERGY_FLOOR) {
        return e_top;
    }
    e_top.max(second / below_top)
}

/// Logistic map of the modal energy with cut-off below `alpha_min` and
/// clamp above `alpha_max`.
pub fn indicator_alpha<T: Real>(energy: T, degree: usize, settings: &IndicatorSettings<T>) -> T {
    let alpha = raw_indicator_alpha(energy, degree);
    if alpha < settings.alpha_min {
        T::zero()
    } else {
        alpha.min(settings.alpha_max)
    }
}

/// The logistic value before cut-off and clamp.
pub fn raw_indicator_alpha<T: Real>(energy: T, degree: usize) -> T {
    let t = threshold::<T>(degree);
    let s = T::lit(SHARPNESS);
    (T::one() + (-s / t * (energy - t)).exp()).recip()
}

/// One Jacobi sweep `alpha_k <- max(alpha_k, 0.5 alpha_E)` over the four
/// face neighbours, reading only pre-sweep values.
pub fn propagation_sweep<T: Real>(blend: &BlendField<T>, mesh: &Mesh2D<T>) -> BlendField<T> {
    let half = T::lit(0.5);
    let alpha = (0..blend.len())
        .map(|k| {
            mesh.neighbors(k)
                .as_array()
                .iter()
                .fold(blend.alpha[k], |acc, &nb| acc.max(half * blend.alpha[nb]))
        })
        .collect();
    BlendField {
        alpha,
        alpha_correction: blend.alpha_correction.clone(),
    }
}

/// Indicator value for every element, optionally followed by one sweep.
pub fn compute_blending<T: Real>(
    u: &SolutionField<T>,
    ops: &ElementOperators<T>,
    mesh: &Mesh2D<T>,
    gas: &GasModel<T>,
    settings: &IndicatorSettings<T>,
    sweep: bool,
) -> Result<BlendField<T>> {
    use rayon::prelude::*;
    let alpha = (0..u.n_elements())
        .into_par_iter()
        .map(|k| modal_energy_indicator(u, ops, gas, k).map(|e| indicator_alpha(e, ops.degree(), settings)))
        .collect::<Result<Vec<T>>>()?;
    let blend = BlendField::from_alpha(alpha);
    Ok(if sweep { propagation_sweep(&blend, mesh) } else { blend })
}
