//! Compressible Euler equations for a calorically perfect gas.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::real::Real;

/// Cartesian direction of a flux evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Index of the momentum component along this axis.
    #[inline]
    pub fn mom_index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
        }
    }
}

/// Conservative variables `(rho, rho v1, rho v2, rho E)` at one node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConservativeState<T>(pub [T; 4]);

/// Primitive variables `(rho, v1, v2, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Primitive<T> {
    pub rho: T,
    pub v1: T,
    pub v2: T,
    pub p: T,
}

impl<T: Real> ConservativeState<T> {
    pub fn new(rho: T, mom_x: T, mom_y: T, energy: T) -> Self {
        Self([rho, mom_x, mom_y, energy])
    }

    pub fn zero() -> Self {
        Self([T::zero(); 4])
    }

    pub fn from_primitive(prim: Primitive<T>, gas: &GasModel<T>) -> Self {
        let Primitive { rho, v1, v2, p } = prim;
        let kinetic = T::lit(0.5) * rho * (v1 * v1 + v2 * v2);
        Self([rho, rho * v1, rho * v2, p / (gas.gamma - T::one()) + kinetic])
    }

    #[inline]
    pub fn rho(&self) -> T {
        self.0[0]
    }

    #[inline]
    pub fn mom(&self) -> [T; 2] {
        [self.0[1], self.0[2]]
    }

    #[inline]
    pub fn energy(&self) -> T {
        self.0[3]
    }

    /// Velocity; only meaningful for `rho > 0`.
    #[inline]
    pub fn velocity(&self) -> [T; 2] {
        [self.0[1] / self.0[0], self.0[2] / self.0[0]]
    }

    /// Pressure without the density check. Used in hot loops after
    /// admissibility has been established.
    #[inline]
    pub fn pressure_unchecked(&self, gas: &GasModel<T>) -> T {
        let [rho, mx, my, e] = self.0;
        (gas.gamma - T::one()) * (e - T::lit(0.5) * (mx * mx + my * my) / rho)
    }

    pub fn to_primitive(&self, gas: &GasModel<T>) -> Primitive<T> {
        let [v1, v2] = self.velocity();
        Primitive {
            rho: self.rho(),
            v1,
            v2,
            p: self.pressure_unchecked(gas),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self + scale * other`
    #[inline]
    pub fn axpy(&self, scale: T, other: &Self) -> Self {
        Self(std::array::from_fn(|v| self.0[v] + scale * other.0[v]))
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

impl<T> Index<usize> for ConservativeState<T> {
    type Output = T;
    #[inline]
    fn index(&self, v: usize) -> &T {
        &self.0[v]
    }
}

impl<T> IndexMut<usize> for ConservativeState<T> {
    #[inline]
    fn index_mut(&mut self, v: usize) -> &mut T {
        &mut self.0[v]
    }
}

impl<T: Real> Add for ConservativeState<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|v| self.0[v] + rhs.0[v]))
    }
}

impl<T: Real> Sub for ConservativeState<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|v| self.0[v] - rhs.0[v]))
    }
}

impl<T: Real> Neg for ConservativeState<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl<T: Real> Mul<T> for ConservativeState<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self(self.0.map(|v| v * s))
    }
}

impl<T: Real> AddAssign for ConservativeState<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for v in 0..4 {
            self.0[v] = self.0[v] + rhs.0[v];
        }
    }
}

impl<T: Real> SubAssign for ConservativeState<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        for v in 0..4 {
            self.0[v] = self.0[v] - rhs.0[v];
        }
    }
}

/// Ideal gas with constant heat capacity ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel<T> {
    pub gamma: T,
}

impl<T: Real> Default for GasModel<T> {
    fn default() -> Self {
        Self { gamma: T::lit(1.4) }
    }
}

impl<T: Real> GasModel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::config("gas.gamma", format!("must be > 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// `(gamma - 1) (rho E - |m|^2 / (2 rho))`. Errors only on
    /// non-positive density; the result itself may be non-positive.
    pub fn pressure(&self, u: &ConservativeState<T>) -> Result<T> {
        if !(u.rho() > T::zero()) {
            return Err(Error::NonPositiveDensity { rho: u.rho().as_f64() });
        }
        Ok(u.pressure_unchecked(self))
    }

    /// Strictly positive density and pressure.
    #[inline]
    pub fn is_admissible(&self, u: &ConservativeState<T>) -> bool {
        u.rho() > T::zero() && u.pressure_unchecked(self) > T::zero()
    }

    /// Returns the pressure of an admissible state.
    #[inline]
    pub fn admissible_pressure(&self, u: &ConservativeState<T>) -> Result<T> {
        let rho = u.rho();
        if !(rho > T::zero()) {
            return Err(self.inadmissible(u));
        }
        let p = u.pressure_unchecked(self);
        if !(p > T::zero()) {
            return Err(self.inadmissible(u));
        }
        Ok(p)
    }

    fn inadmissible(&self, u: &ConservativeState<T>) -> Error {
        let p = if u.rho() != T::zero() {
            u.pressure_unchecked(self).as_f64()
        } else {
            f64::NAN
        };
        Error::InadmissibleState {
            rho: u.rho().as_f64(),
            p,
        }
    }

    pub fn sound_speed(&self, rho: T, p: T) -> T {
        (self.gamma * p / rho).sqrt()
    }

    /// Euler flux along `axis`.
    pub fn physical_flux(&self, u: &ConservativeState<T>, axis: Axis) -> Result<ConservativeState<T>> {
        let p = self.admissible_pressure(u)?;
        Ok(self.flux_with_pressure(u, p, axis))
    }

    #[inline]
    pub(crate) fn flux_with_pressure(&self, u: &ConservativeState<T>, p: T, axis: Axis) -> ConservativeState<T> {
        let [rho, mx, my, e] = u.0;
        let vn = u.0[axis.mom_index()] / rho;
        match axis {
            Axis::X => ConservativeState([mx, mx * vn + p, my * vn, vn * (e + p)]),
            Axis::Y => ConservativeState([my, mx * vn, my * vn + p, vn * (e + p)]),
        }
    }

    /// `|v_axis| + c`.
    pub fn max_wave_speed(&self, u: &ConservativeState<T>, axis: Axis) -> Result<T> {
        let p = self.admissible_pressure(u)?;
        let vn = u.0[axis.mom_index()] / u.rho();
        Ok(vn.abs() + self.sound_speed(u.rho(), p))
    }

    /// Mathematical entropy `-rho s / (gamma - 1)`, `s = ln(p rho^-gamma)`.
    pub fn entropy_density(&self, u: &ConservativeState<T>) -> Result<T> {
        let p = self.admissible_pressure(u)?;
        let rho = u.rho();
        let s = p.ln() - self.gamma * rho.ln();
        Ok(-rho * s / (self.gamma - T::one()))
    }

    /// Entropy variables `w = dS/du` for the entropy above.
    pub fn entropy_variables(&self, u: &ConservativeState<T>) -> Result<ConservativeState<T>> {
        let p = self.admissible_pressure(u)?;
        let rho = u.rho();
        let [v1, v2] = u.velocity();
        let gm1 = self.gamma - T::one();
        let s = p.ln() - self.gamma * rho.ln();
        let beta = rho / p;
        Ok(ConservativeState([
            (self.gamma - s) / gm1 - T::lit(0.5) * beta * (v1 * v1 + v2 * v2),
            beta * v1,
            beta * v2,
            -beta,
        ]))
    }

    /// Gradient of pressure with respect to the conservative variables.
    pub fn pressure_gradient(&self, u: &ConservativeState<T>) -> ConservativeState<T> {
        let [v1, v2] = u.velocity();
        let gm1 = self.gamma - T::one();
        ConservativeState([gm1 * T::lit(0.5) * (v1 * v1 + v2 * v2), -gm1 * v1, -gm1 * v2, gm1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gas() -> GasModel<f64> {
        GasModel::default()
    }

    fn prim(rho: f64, v1: f64, v2: f64, p: f64) -> ConservativeState<f64> {
        ConservativeState::from_primitive(Primitive { rho, v1, v2, p }, &gas())
    }

    #[test]
    fn pressure_examples() {
        let g = gas();
        let p = g.pressure(&ConservativeState::new(1.0, 0.0, 0.0, 2.5)).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        let p = g.pressure(&ConservativeState::new(2.0, 2.0, 0.0, 3.0)).unwrap();
        assert_abs_diff_eq!(p, 0.8, epsilon = 1e-15);
        let zero = ConservativeState::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(g.pressure(&zero).unwrap(), 0.0);
        assert!(!g.is_admissible(&zero));
        assert!(matches!(
            g.pressure(&ConservativeState::new(0.0, 0.0, 0.0, 1.0)),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn flux_examples() {
        let g = gas();
        let f = g.physical_flux(&prim(1.0, 0.0, 0.0, 1.0), Axis::X).unwrap();
        assert_eq!(f.0, [0.0, 1.0, 0.0, 0.0]);

        let u = prim(1.0, 1.0, 0.0, 1.0);
        assert_abs_diff_eq!(u.energy(), 3.0, epsilon = 1e-15);
        let f = g.physical_flux(&u, Axis::X).unwrap();
        for (a, b) in f.0.iter().zip([1.0, 2.0, 0.0, 4.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }

        let a = prim(1.3, 0.4, -0.7, 2.0);
        let b = prim(1.3, -0.7, 0.4, 2.0);
        let fx = g.physical_flux(&a, Axis::X).unwrap();
        let fy = g.physical_flux(&b, Axis::Y).unwrap();
        assert_abs_diff_eq!(fy[0], fx[0], epsilon = 1e-15);
        assert_abs_diff_eq!(fy[1], fx[2], epsilon = 1e-15);
        assert_abs_diff_eq!(fy[2], fx[1], epsilon = 1e-15);
        assert_abs_diff_eq!(fy[3], fx[3], epsilon = 1e-15);

        assert!(g
            .physical_flux(&ConservativeState::new(1.0, 0.0, 0.0, 0.0), Axis::X)
            .is_err());
    }

    #[test]
    fn wave_speed_examples() {
        let g = gas();
        let c = g.max_wave_speed(&prim(1.0, 0.0, 0.0, 1.0), Axis::Y).unwrap();
        assert_abs_diff_eq!(c, 1.4f64.sqrt(), epsilon = 1e-15);
        let c = g.max_wave_speed(&prim(1.0, 2.0, 0.0, 1.0), Axis::X).unwrap();
        assert_abs_diff_eq!(c, 2.0 + 1.4f64.sqrt(), epsilon = 1e-15);
        let c = g.max_wave_speed(&prim(4.0, 0.0, 0.0, 1.0), Axis::X).unwrap();
        assert_abs_diff_eq!(c, 0.5916079783099616, epsilon = 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let g = gas();
        assert_abs_diff_eq!(
            g.entropy_density(&prim(1.0, 0.0, 0.0, 1.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            g.entropy_density(&prim(1.0, 0.0, 0.0, e)).unwrap(),
            -2.5,
            epsilon = 1e-14
        );
        let moving = g.entropy_density(&prim(1.0, 3.0, -1.0, e)).unwrap();
        assert_abs_diff_eq!(moving, -2.5, epsilon = 1e-14);
    }

    #[test]
    fn entropy_variables_match_finite_differences() {
        let g = gas();
        let u = prim(1.7, 0.3, -0.2, 0.9);
        let w = g.entropy_variables(&u).unwrap();
        for v in 0..4 {
            let h = 1e-6;
            let mut up = u;
            let mut dn = u;
            up[v] += h;
            dn[v] -= h;
            let fd = (g.entropy_density(&up).unwrap() - g.entropy_density(&dn).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(w[v], fd, epsilon = 1e-8);
        }
    }

    proptest! {
        #[test]
        fn primitive_round_trip(rho in 0.01f64..10.0, v1 in -5.0f64..5.0, v2 in -5.0f64..5.0, p in 0.01f64..10.0) {
            let u = prim(rho, v1, v2, p);
            let back = gas().pressure(&u).unwrap();
            prop_assert!((back - p).abs() <= 1e-13 * (1.0 + p.abs() + 0.5 * rho * (v1 * v1 + v2 * v2)));
        }
    }
}
