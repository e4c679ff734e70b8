//! Two-point numerical fluxes: Rusanov and HLLE interface fluxes and the
//! entropy-conserving, kinetic-energy-preserving volume flux.

use std::fmt;
use std::str::FromStr;

use crate::error::Result;
use crate::physics::{Axis, ConservativeState, GasModel};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluxKind {
    Rusanov,
    Hlle,
    /// Chandrashekar's entropy-conserving / kinetic-energy-preserving flux.
    ChandrashekarEc,
}

impl FluxKind {
    pub fn evaluate<T: Real>(
        self,
        ul: &ConservativeState<T>,
        ur: &ConservativeState<T>,
        gas: &GasModel<T>,
        axis: Axis,
    ) -> Result<ConservativeState<T>> {
        match self {
            FluxKind::Rusanov => rusanov_flux(ul, ur, gas, axis),
            FluxKind::Hlle => hlle_flux(ul, ur, gas, axis),
            FluxKind::ChandrashekarEc => ec_kep_flux(ul, ur, gas, axis),
        }
    }

    /// Same as [`FluxKind::evaluate`] with pressures already known to be
    /// positive.
    #[inline]
    pub(crate) fn evaluate_inner<T: Real>(
        self,
        ul: &ConservativeState<T>,
        ur: &ConservativeState<T>,
        pl: T,
        pr: T,
        gas: &GasModel<T>,
        axis: Axis,
    ) -> ConservativeState<T> {
        match self {
            FluxKind::Rusanov => rusanov_inner(ul, ur, pl, pr, gas, axis),
            FluxKind::Hlle => hlle_inner(ul, ur, pl, pr, gas, axis),
            FluxKind::ChandrashekarEc => ec_kep_inner(ul, ur, pl, pr, gas, axis),
        }
    }

    /// Interface fluxes allowed in configuration files.
    pub fn is_surface_flux(self) -> bool {
        matches!(self, FluxKind::Rusanov | FluxKind::Hlle)
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluxKind::Rusanov => "rusanov",
            FluxKind::Hlle => "hlle",
            FluxKind::ChandrashekarEc => "ec_kep",
        })
    }
}

impl FromStr for FluxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rusanov" | "llf" => Ok(FluxKind::Rusanov),
            "hlle" => Ok(FluxKind::Hlle),
            "ec_kep" | "chandrashekar" => Ok(FluxKind::ChandrashekarEc),
            other => Err(format!("unknown flux `{other}`")),
        }
    }
}

/// Local Lax–Friedrichs flux.
pub fn rusanov_flux<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    gas: &GasModel<T>,
    axis: Axis,
) -> Result<ConservativeState<T>> {
    let pl = gas.admissible_pressure(ul)?;
    let pr = gas.admissible_pressure(ur)?;
    Ok(rusanov_inner(ul, ur, pl, pr, gas, axis))
}

#[inline]
fn rusanov_inner<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    pl: T,
    pr: T,
    gas: &GasModel<T>,
    axis: Axis,
) -> ConservativeState<T> {
    let fl = gas.flux_with_pressure(ul, pl, axis);
    let fr = gas.flux_with_pressure(ur, pr, axis);
    let m = axis.mom_index();
    let sl = (ul[m] / ul.rho()).abs() + gas.sound_speed(ul.rho(), pl);
    let sr = (ur[m] / ur.rho()).abs() + gas.sound_speed(ur.rho(), pr);
    let lambda = sl.max(sr);
    let half = T::lit(0.5);
    ConservativeState(std::array::from_fn(|v| {
        half * (fl[v] + fr[v]) - half * lambda * (ur[v] - ul[v])
    }))
}

/// Signal speeds `(S_L, S_R)` of the HLLE solver, using Einfeldt's
/// bounds with Roe averages.
pub fn hlle_wave_speeds<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    gas: &GasModel<T>,
    axis: Axis,
) -> Result<(T, T)> {
    let pl = gas.admissible_pressure(ul)?;
    let pr = gas.admissible_pressure(ur)?;
    Ok(hlle_speeds_inner(ul, ur, pl, pr, gas, axis))
}

fn hlle_speeds_inner<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    pl: T,
    pr: T,
    gas: &GasModel<T>,
    axis: Axis,
) -> (T, T) {
    let m = axis.mom_index();
    let (rl, rr) = (ul.rho(), ur.rho());
    let [ul1, ul2] = ul.velocity();
    let [ur1, ur2] = ur.velocity();
    let vnl = ul[m] / rl;
    let vnr = ur[m] / rr;
    let cl = gas.sound_speed(rl, pl);
    let cr = gas.sound_speed(rr, pr);

    let (sql, sqr) = (rl.sqrt(), rr.sqrt());
    let inv = (sql + sqr).recip();
    let v1 = (sql * ul1 + sqr * ur1) * inv;
    let v2 = (sql * ul2 + sqr * ur2) * inv;
    let hl = (ul.energy() + pl) / rl;
    let hr = (ur.energy() + pr) / rr;
    let h = (sql * hl + sqr * hr) * inv;
    let c2 = (gas.gamma - T::one()) * (h - T::lit(0.5) * (v1 * v1 + v2 * v2));
    let c = c2.max(T::zero()).sqrt();
    let vn = match axis {
        Axis::X => v1,
        Axis::Y => v2,
    };
    ((vnl - cl).min(vn - c), (vnr + cr).max(vn + c))
}

/// Harten–Lax–van Leer flux with Einfeldt wave speeds.
pub fn hlle_flux<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    gas: &GasModel<T>,
    axis: Axis,
) -> Result<ConservativeState<T>> {
    let pl = gas.admissible_pressure(ul)?;
    let pr = gas.admissible_pressure(ur)?;
    Ok(hlle_inner(ul, ur, pl, pr, gas, axis))
}

#[inline]
fn hlle_inner<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    pl: T,
    pr: T,
    gas: &GasModel<T>,
    axis: Axis,
) -> ConservativeState<T> {
    let fl = gas.flux_with_pressure(ul, pl, axis);
    let fr = gas.flux_with_pressure(ur, pr, axis);
    let (sl, sr) = hlle_speeds_inner(ul, ur, pl, pr, gas, axis);
    if sl >= T::zero() {
        return fl;
    }
    if sr <= T::zero() {
        return fr;
    }
    let width = sr - sl;
    if width < T::lit(1e-14) {
        return (fl + fr) * T::lit(0.5);
    }
    let inv = width.recip();
    ConservativeState(std::array::from_fn(|v| {
        (sr * fl[v] - sl * fr[v] + sl * sr * (ur[v] - ul[v])) * inv
    }))
}

/// Logarithmic mean `(a - b) / (ln a - ln b)` for positive arguments,
/// with a series expansion near `a = b`.
pub fn ln_mean<T: Real>(a: T, b: T) -> T {
    // ordered so that the result is bitwise symmetric
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let zeta = a / b;
    let f = (zeta - T::one()) / (zeta + T::one());
    let u = f * f;
    let big_f = if u < T::lit(1e-4) {
        T::one() + u / T::lit(3.0) + u * u / T::lit(5.0) + u * u * u / T::lit(7.0)
    } else {
        zeta.ln() / (T::lit(2.0) * f)
    };
    (a + b) / (T::lit(2.0) * big_f)
}

/// Chandrashekar's entropy-conserving, kinetic-energy-preserving flux.
pub fn ec_kep_flux<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    gas: &GasModel<T>,
    axis: Axis,
) -> Result<ConservativeState<T>> {
    let pl = gas.admissible_pressure(ul)?;
    let pr = gas.admissible_pressure(ur)?;
    Ok(ec_kep_inner(ul, ur, pl, pr, gas, axis))
}

#[inline]
pub(crate) fn ec_kep_inner<T: Real>(
    ul: &ConservativeState<T>,
    ur: &ConservativeState<T>,
    pl: T,
    pr: T,
    gas: &GasModel<T>,
    axis: Axis,
) -> ConservativeState<T> {
    let half = T::lit(0.5);
    let (rl, rr) = (ul.rho(), ur.rho());
    let [v1l, v2l] = ul.velocity();
    let [v1r, v2r] = ur.velocity();
    let beta_l = half * rl / pl;
    let beta_r = half * rr / pr;

    let rho_avg = half * (rl + rr);
    let rho_mean = ln_mean(rl, rr);
    let beta_mean = ln_mean(beta_l, beta_r);
    let beta_avg = half * (beta_l + beta_r);
    let v1 = half * (v1l + v1r);
    let v2 = half * (v2l + v2r);
    let p_mean = half * rho_avg / beta_avg;
    let vel_sq_avg = half * (v1l * v1l + v2l * v2l + v1r * v1r + v2r * v2r);
    let internal = half / ((gas.gamma - T::one()) * beta_mean);

    let (f1, f2, f3) = match axis {
        Axis::X => {
            let f1 = rho_mean * v1;
            (f1, f1 * v1 + p_mean, f1 * v2)
        }
        Axis::Y => {
            let f1 = rho_mean * v2;
            (f1, f1 * v1, f1 * v2 + p_mean)
        }
    };
    let f4 = f1 * (internal - half * vel_sq_avg) + f2 * v1 + f3 * v2;
    ConservativeState([f1, f2, f3, f4])
}
