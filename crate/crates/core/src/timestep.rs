//! Strong-stability-preserving Runge–Kutta stepping with per-stage
//! positivity limiting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Mesh2D, NodalField, SolutionField};
use crate::indicator::BlendField;
use crate::limiter::{compute_safe_candidate, FloorMargins, LimiterSettings, StageContext};
use crate::physics::GasModel;
use crate::real::Real;
use crate::spatial::{Discretization, RhsField};

/// Shu–Osher coefficients of an explicit SSP scheme.
///
/// Stage `s` (0-based) produces
/// `u^{s+1} = sum_{i<=s} a[s][i] u^i + dt b[s][i] u'^i`, with `u^0` the
/// state at the start of the step.
#[derive(Clone, Debug, PartialEq)]
pub struct RkScheme<T> {
    a: Vec<Vec<T>>,
    b: Vec<Vec<T>>,
    order: usize,
}

impl<T: Real> RkScheme<T> {
    /// Five-stage, fourth-order scheme of Spiteri and Ruuth.
    pub fn ssprk54() -> Self {
        let l = T::lit;
        let z = T::zero();
        let a = vec![
            vec![l(1.0)],
            vec![l(0.444370493651235), l(0.555629506348765)],
            vec![l(0.620101851488403), z, l(0.379898148511597)],
            vec![l(0.178079954393132), z, z, l(0.821920045606868)],
            vec![z, z, l(0.517231671970585), l(0.096059710526147), l(0.386708617503269)],
        ];
        let b = vec![
            vec![l(0.391752226571890)],
            vec![z, l(0.368410593050371)],
            vec![z, z, l(0.251891774271694)],
            vec![z, z, z, l(0.544974750228521)],
            vec![z, z, z, l(0.063692468666290), l(0.226007483236906)],
        ];
        Self { a, b, order: 4 }
    }

    /// Single forward Euler stage.
    pub fn forward_euler() -> Self {
        Self {
            a: vec![vec![T::one()]],
            b: vec![vec![T::one()]],
            order: 1,
        }
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self, stage: usize, i: usize) -> T {
        self.a[stage][i]
    }

    pub fn b(&self, stage: usize, i: usize) -> T {
        self.b[stage][i]
    }

    /// `b_ss`, the factor turning `dt` into the stage step `dt_s`.
    pub fn stage_dt_factor(&self, stage: usize) -> T {
        self.b[stage][stage]
    }

    /// Non-negative coefficients and unit row sums of `a`.
    pub fn is_ssp(&self) -> bool {
        self.a.iter().zip(&self.b).all(|(ra, rb)| {
            let sum: T = ra.iter().copied().sum();
            ra.iter().chain(rb).all(|&c| c >= T::zero()) && (sum - T::one()).abs() <= T::lit(1e-14)
        })
    }

    /// Whether stage `stage` refers back to the result of stage `i`. The
    /// `a` term of the step start always cancels in the increment form.
    fn has_history(&self, stage: usize, i: usize) -> bool {
        (i > 0 && self.a[stage][i] != T::zero()) || self.b[stage][i] != T::zero()
    }
}

/// Semi-discrete operator `u' = L(u)` split into its DG and FV parts.
pub trait SemiDiscrete<T: Real>: Sync {
    fn evaluate(&self, u: &SolutionField<T>, alpha: &BlendField<T>) -> Result<RhsField<T>>;
    fn gas(&self) -> GasModel<T>;
}

impl<T: Real> SemiDiscrete<T> for Discretization<T> {
    fn evaluate(&self, u: &SolutionField<T>, alpha: &BlendField<T>) -> Result<RhsField<T>> {
        Discretization::evaluate(self, u, alpha)
    }

    fn gas(&self) -> GasModel<T> {
        self.gas
    }
}

/// What happened in one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageRecord<T> {
    pub stage: usize,
    /// Final blending of the stage, with the limiter's `delta_alpha`.
    pub blend: BlendField<T>,
    /// `None` when the limiter is disabled.
    pub margins: Option<FloorMargins<T>>,
    pub corrected_elements: usize,
}

#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub state: SolutionField<T>,
    /// Step size actually taken, after any halvings.
    pub dt: T,
    pub halvings: usize,
    pub stages: Vec<StageRecord<T>>,
}

/// Runge–Kutta driver combining the semi-discrete operator and the
/// limiter.
#[derive(Clone, Debug)]
pub struct TimeIntegrator<T> {
    pub scheme: RkScheme<T>,
    pub limiter: LimiterSettings<T>,
    pub dt_halving_max: usize,
}

impl<T: Real> TimeIntegrator<T> {
    pub fn new(scheme: RkScheme<T>, limiter: LimiterSettings<T>, dt_halving_max: usize) -> Self {
        Self {
            scheme,
            limiter,
            dt_halving_max,
        }
    }

    /// One step of size `dt`, without retries.
    ///
    /// `alpha_at(stage, u)` supplies the blending each stage starts from.
    pub fn try_step<Op, F>(
        &self,
        op: &Op,
        u0: &SolutionField<T>,
        dt: T,
        alpha_at: &mut F,
    ) -> Result<(SolutionField<T>, Vec<StageRecord<T>>)>
    where
        Op: SemiDiscrete<T> + ?Sized,
        F: FnMut(usize, &SolutionField<T>) -> Result<BlendField<T>>,
    {
        let stages = self.scheme.stages();
        let gas = op.gas();
        // history[t] = sum over finished stages i < t of
        //   a[t][i] (u^i - u^0) + dt b[t][i] u'^i
        let mut history: Vec<Option<NodalField<T>>> = vec![None; stages];
        let mut records = Vec::with_capacity(stages);
        let mut current = u0.clone();

        for s in 0..stages {
            let blend = alpha_at(s, &current)?;
            let rhs = op.evaluate(&current, &blend)?;
            let stage_dt = self.scheme.stage_dt_factor(s) * dt;

            // every term of the update except the current derivative
            let a_ss = self.scheme.a(s, s);
            let mut base = u0.clone();
            base.values_mut()
                .par_iter_mut()
                .zip(current.values().par_iter())
                .zip(u0.values().par_iter())
                .for_each(|((b, c), z)| *b = b.axpy(a_ss, &(*c - *z)));
            if let Some(h) = &history[s] {
                base.axpy(T::one(), h);
            }

            let (next, rhs, blend, margins, corrected) = if self.limiter.enabled {
                let safe = compute_safe_candidate(&base, stage_dt, &rhs.fv, &gas, s)?;
                let mut candidate = base;
                candidate.axpy(stage_dt, &rhs.blended);
                let mut ctx = StageContext {
                    stage_dt,
                    candidate,
                    safe,
                    rhs,
                    alpha: blend,
                    gas,
                    settings: self.limiter,
                };
                let report = ctx.limit_stage()?;
                (
                    ctx.candidate,
                    ctx.rhs,
                    ctx.alpha,
                    Some(report.margins),
                    report.corrected_elements,
                )
            } else {
                let mut candidate = base;
                candidate.axpy(stage_dt, &rhs.blended);
                (candidate, rhs, blend, None, 0)
            };

            for t in s + 1..stages {
                if !self.scheme.has_history(t, s) {
                    continue;
                }
                let (a_ts, b_ts) = (self.scheme.a(t, s), self.scheme.b(t, s));
                let h = history[t].get_or_insert_with(|| NodalField::zeros(u0.n_elements(), u0.degree()));
                h.values_mut()
                    .par_iter_mut()
                    .zip(current.values().par_iter())
                    .zip(u0.values().par_iter())
                    .zip(rhs.blended.values().par_iter())
                    .for_each(|(((h, c), z), d)| {
                        *h = h.axpy(a_ts, &(*c - *z)).axpy(dt * b_ts, d);
                    });
            }

            records.push(StageRecord {
                stage: s,
                blend,
                margins,
                corrected_elements: corrected,
            });
            current = next;
        }
        Ok((current, records))
    }

    /// One step, halving `dt` and restarting whenever a safe state is
    /// inadmissible.
    pub fn advance_step<Op, F>(&self, op: &Op, u0: &SolutionField<T>, dt: T, mut alpha_at: F) -> Result<StepOutcome<T>>
    where
        Op: SemiDiscrete<T> + ?Sized,
        F: FnMut(usize, &SolutionField<T>) -> Result<BlendField<T>>,
    {
        let mut dt = dt;
        let mut halvings = 0;
        loop {
            match self.try_step(op, u0, dt, &mut alpha_at) {
                Ok((state, stages)) => {
                    return Ok(StepOutcome {
                        state,
                        dt,
                        halvings,
                        stages,
                    })
                }
                Err(e @ Error::SafeViolation { .. }) => {
                    if halvings >= self.dt_halving_max {
                        return Err(e);
                    }
                    halvings += 1;
                    dt = dt * T::lit(0.5);
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// `cfl * min(dx, dy) / ((2N + 1) max(|v1| + |v2| + 2c))`.
pub fn compute_dt<T: Real>(u: &SolutionField<T>, mesh: &Mesh2D<T>, gas: &GasModel<T>, cfl: T) -> Result<T> {
    if let Some(flat) = u.first_inadmissible(gas) {
        let s = u.values()[flat];
        return Err(Error::InadmissibleNode {
            location: u.location(flat),
            floor: if s.rho() > T::zero() {
                crate::error::Floor::Pressure
            } else {
                crate::error::Floor::Density
            },
            rho: s.rho().as_f64(),
            p: s.pressure_unchecked(gas).as_f64(),
        });
    }
    let speed = u
        .values()
        .par_iter()
        .map(|s| {
            let [v1, v2] = s.velocity();
            let c = gas.sound_speed(s.rho(), s.pressure_unchecked(gas));
            v1.abs() + v2.abs() + T::lit(2.0) * c
        })
        .reduce(T::zero, |a, b| a.max(b));
    let h = mesh.dx().min(mesh.dy());
    let dof = T::from_usize_lossy(2 * u.degree() + 1);
    Ok(cfl * h / (dof * speed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{ConservativeState, Primitive};
    use approx::assert_abs_diff_eq;

    /// `u' = lambda u` on every component, identical DG and FV parts.
    struct Linear {
        lambda: f64,
    }

    impl SemiDiscrete<f64> for Linear {
        fn evaluate(&self, u: &SolutionField<f64>, _alpha: &BlendField<f64>) -> Result<RhsField<f64>> {
            let mut d = u.clone();
            d.scale(self.lambda);
            Ok(RhsField {
                dg: d.clone(),
                fv: d.clone(),
                blended: d,
            })
        }

        fn gas(&self) -> GasModel<f64> {
            GasModel::default()
        }
    }

    fn no_limiter() -> TimeIntegrator<f64> {
        let limiter = LimiterSettings {
            enabled: false,
            ..Default::default()
        };
        TimeIntegrator::new(RkScheme::ssprk54(), limiter, 5)
    }

    fn zero_alpha(k: usize) -> impl FnMut(usize, &SolutionField<f64>) -> Result<BlendField<f64>> {
        move |_, _| Ok(BlendField::zeros(k))
    }

    #[test]
    fn coefficients_are_ssp() {
        let s = RkScheme::<f64>::ssprk54();
        assert!(s.is_ssp());
        assert_eq!(s.stages(), 5);
        assert_eq!(s.order(), 4);
        assert!(RkScheme::<f64>::forward_euler().is_ssp());
    }

    #[test]
    fn fourth_order_on_exponential() {
        let op = Linear { lambda: -1.0 };
        let integ = no_limiter();
        let u0 = SolutionField::uniform(1, 1, ConservativeState::new(1.0, 1.0, 1.0, 1.0));
        let t_end = 1.0;
        let errors: Vec<f64> = (0..5)
            .map(|level| {
                let steps = 4usize << level;
                let dt = t_end / steps as f64;
                let mut u = u0.clone();
                for _ in 0..steps {
                    u = integ.advance_step(&op, &u, dt, zero_alpha(1)).unwrap().state;
                }
                (u.values()[0].rho() - (-t_end).exp()).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.9, "order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn forward_euler_safe_state() {
        let op = Linear { lambda: -2.0 };
        let integ = TimeIntegrator::new(RkScheme::forward_euler(), LimiterSettings::default(), 0);
        let u0 = SolutionField::uniform(2, 1, ConservativeState::new(1.0, 0.0, 0.0, 2.5));
        let out = integ.advance_step(&op, &u0, 0.1, zero_alpha(2)).unwrap();
        for s in out.state.values() {
            assert_abs_diff_eq!(s.rho(), 0.8, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_rhs_leaves_state_bitwise() {
        let op = Linear { lambda: 0.0 };
        let integ = TimeIntegrator::new(RkScheme::ssprk54(), LimiterSettings::default(), 5);
        let u0 = SolutionField::uniform(4, 2, ConservativeState::new(1.3, 0.1, -0.7, 1.75));
        let out = integ
            .advance_step(&op, &u0, 0.37, |_, _| Ok(BlendField::uniform(4, 0.3)))
            .unwrap();
        assert_eq!(out.state, u0);
        assert!(out.stages.iter().all(|r| r.corrected_elements == 0));
    }

    #[test]
    fn quiescent_flow_stays_at_rest() {
        let gas = GasModel::default();
        let ops = crate::lgl::ElementOperators::new(3).unwrap();
        let mesh = Mesh2D::new(3, 3, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let state = ConservativeState::from_primitive(
            Primitive {
                rho: 1.3,
                v1: 0.0,
                v2: 0.0,
                p: 0.7,
            },
            &gas,
        );
        let u0 = SolutionField::uniform(9, 3, state);
        let disc = Discretization::new(
            ops,
            mesh.clone(),
            gas,
            crate::flux::FluxKind::Rusanov,
            crate::spatial::VolumeForm::Split,
        );
        let integ = TimeIntegrator::new(RkScheme::ssprk54(), LimiterSettings::default(), 5);
        let dt = compute_dt(&u0, &mesh, &gas, 0.5).unwrap();
        let out = integ
            .advance_step(&disc, &u0, dt, |_, _| Ok(BlendField::uniform(9, 0.3)))
            .unwrap();
        for (a, b) in out.state.values().iter().zip(u0.values()) {
            for v in 0..4 {
                assert_abs_diff_eq!(a[v], b[v], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rest_state_time_step() {
        let gas = GasModel::default();
        let mesh = Mesh2D::new(16, 16, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let state = ConservativeState::from_primitive(
            Primitive {
                rho: 1.0,
                v1: 0.0,
                v2: 0.0,
                p: 1.0,
            },
            &gas,
        );
        let u = SolutionField::uniform(256, 3, state);
        let dt = compute_dt(&u, &mesh, &gas, 0.5).unwrap();
        assert_abs_diff_eq!(dt, 0.003773010065752306, epsilon = 1e-16);
        assert_abs_diff_eq!(dt, 0.5 * 0.125 / (7.0 * 2.0 * 1.4f64.sqrt()), epsilon = 1e-17);

        let fine = Mesh2D::new(32, 32, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let u_fine = SolutionField::uniform(1024, 3, state);
        assert_eq!(compute_dt(&u_fine, &fine, &gas, 0.5).unwrap(), dt / 2.0);
        assert_eq!(compute_dt(&u, &mesh, &gas, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn compute_dt_rejects_inadmissible() {
        let gas = GasModel::default();
        let mesh = Mesh2D::new(2, 2, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut u = SolutionField::uniform(4, 1, ConservativeState::new(1.0, 0.0, 0.0, 2.5));
        *u.get_mut(2, 1, 0) = ConservativeState::new(1.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            compute_dt(&u, &mesh, &gas, 0.5),
            Err(Error::InadmissibleNode { .. })
        ));
    }

    /// Always reports an inadmissible safe state unless `dt` is small.
    struct Explosive;

    impl SemiDiscrete<f64> for Explosive {
        fn evaluate(&self, u: &SolutionField<f64>, _alpha: &BlendField<f64>) -> Result<RhsField<f64>> {
            let d = NodalField::uniform(u.n_elements(), u.degree(), ConservativeState::new(-10.0, 0.0, 0.0, 0.0));
            Ok(RhsField {
                dg: d.clone(),
                fv: d.clone(),
                blended: d,
            })
        }

        fn gas(&self) -> GasModel<f64> {
            GasModel::default()
        }
    }

    #[test]
    fn safe_violation_halves_dt() {
        let integ = TimeIntegrator::new(RkScheme::forward_euler(), LimiterSettings::default(), 5);
        let u0 = SolutionField::uniform(1, 1, ConservativeState::new(1.0, 0.0, 0.0, 2.5));
        // rho after the step is 1 - 10 dt, positive once dt < 0.1
        let out = integ.advance_step(&Explosive, &u0, 0.3, zero_alpha(1)).unwrap();
        assert_eq!(out.halvings, 2);
        assert_eq!(out.dt, 0.075);

        let strict = TimeIntegrator::new(RkScheme::forward_euler(), LimiterSettings::default(), 1);
        assert!(matches!(
            strict.advance_step(&Explosive, &u0, 0.3, zero_alpha(1)),
            Err(Error::SafeViolation { .. })
        ));
    }
}
