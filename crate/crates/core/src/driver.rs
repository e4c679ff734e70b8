//! Initial conditions and the top-level run loop.

use std::path::{Path, PathBuf};

use crate::config::{Experiment, RunConfig};
use crate::diagnostics::{
    snapshot_stem, total_entropy, write_snapshot, AlphaWindow, SeriesRow, SeriesWriter, SnapshotData,
};
use crate::error::{Error, Result};
use crate::field::{Mesh2D, SolutionField};
use crate::indicator::{compute_blending, BlendField, IndicatorSettings};
use crate::lgl::ElementOperators;
use crate::limiter::LimiterSettings;
use crate::physics::{ConservativeState, GasModel, Primitive};
use crate::real::Real;
use crate::spatial::Discretization;
use crate::timestep::{compute_dt, RkScheme, StageRecord, TimeIntegrator};

/// Kelvin–Helmholtz shear layer on `[-1, 1]^2`.
pub fn khi_primitive<T: Real>(x: T, y: T) -> Primitive<T> {
    let l = T::lit;
    let b = (l(15.0) * y + l(7.5)).tanh() - (l(15.0) * y - l(7.5)).tanh();
    Primitive {
        rho: l(0.5) + l(0.75) * b,
        v1: l(0.5) * (b - T::one()),
        v2: l(0.1) * (l(2.0) * T::PI() * x).sin(),
        p: T::one(),
    }
}

/// Gaussian density and pressure pulse of the Sedov blast.
pub fn sedov_primitive<T: Real>(x: T, y: T, gas: &GasModel<T>) -> Primitive<T> {
    let l = T::lit;
    let r2 = x * x + y * y;
    let (sig_rho, sig_p) = (l(0.25), l(0.15));
    let pulse = |sigma: T| (-r2 / (l(2.0) * sigma * sigma)).exp() / (l(4.0) * T::PI() * sigma * sigma);
    Primitive {
        rho: T::one() + pulse(sig_rho),
        v1: T::zero(),
        v2: T::zero(),
        p: l(1e-5) + (gas.gamma - T::one()) * pulse(sig_p),
    }
}

pub fn init_khi<T: Real>(mesh: &Mesh2D<T>, ops: &ElementOperators<T>, gas: &GasModel<T>) -> SolutionField<T> {
    SolutionField::from_fn(mesh, ops, |x, y| {
        ConservativeState::from_primitive(khi_primitive(x, y), gas)
    })
}

pub fn init_sedov<T: Real>(mesh: &Mesh2D<T>, ops: &ElementOperators<T>, gas: &GasModel<T>) -> SolutionField<T> {
    SolutionField::from_fn(mesh, ops, |x, y| {
        ConservativeState::from_primitive(sedov_primitive(x, y, gas), gas)
    })
}

/// Hooks into the run loop; every method defaults to doing nothing.
pub trait RunObserver<T> {
    fn on_stage(&mut self, _step: usize, _time: T, _record: &StageRecord<T>) {}
    fn on_sample(&mut self, _row: &SeriesRow<T>) {}
    fn on_step(&mut self, _step: usize, _time: T, _state: &SolutionField<T>) {}
}

impl<T> RunObserver<T> for () {}

#[derive(Clone, Debug)]
pub struct RunSummary<T> {
    pub steps: usize,
    pub final_time: T,
    pub reached_t_end: bool,
    pub samples: Vec<SeriesRow<T>>,
    pub snapshots: Vec<PathBuf>,
    /// Total number of step-size halvings caused by inadmissible safe
    /// states.
    pub halvings: usize,
}

/// A configured run: discretization, integrator and current state.
pub struct Simulation<T: Real> {
    pub config: RunConfig,
    pub disc: Discretization<T>,
    pub integrator: TimeIntegrator<T>,
    pub state: SolutionField<T>,
    pub time: T,
    pub step: usize,
    indicator: IndicatorSettings<T>,
}

impl<T: Real> Simulation<T> {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let l = T::lit;
        let ops = ElementOperators::new(config.degree)?;
        let m = &config.mesh;
        let mesh = Mesh2D::new(
            m.elements_x,
            m.elements_y,
            (l(m.x_range.0), l(m.x_range.1)),
            (l(m.y_range.0), l(m.y_range.1)),
        )?;
        let gas = GasModel::new(l(config.gamma))?;
        let state = match config.experiment {
            Experiment::KelvinHelmholtz => init_khi(&mesh, &ops, &gas),
            Experiment::Sedov => init_sedov(&mesh, &ops, &gas),
            Experiment::Custom => {
                let c = config.custom;
                let prim = Primitive {
                    rho: l(c.rho),
                    v1: l(c.v1),
                    v2: l(c.v2),
                    p: l(c.p),
                };
                SolutionField::uniform(
                    mesh.n_elements(),
                    ops.degree(),
                    ConservativeState::from_primitive(prim, &gas),
                )
            }
        };
        let limiter = LimiterSettings {
            enabled: config.limiter.enabled,
            beta: l(config.limiter.beta),
            newton_max_iter: config.limiter.newton_max_iter,
            newton_tol: l(config.limiter.newton_tol),
        };
        let integrator = TimeIntegrator::new(RkScheme::ssprk54(), limiter, config.time.dt_halving_max);
        let indicator = IndicatorSettings {
            alpha_min: l(config.indicator.settings.alpha_min),
            alpha_max: l(config.indicator.settings.alpha_max),
        };
        let disc = Discretization::new(ops, mesh, gas, config.surface_flux, config.volume_form);
        Ok(Self {
            config,
            disc,
            integrator,
            state,
            time: T::zero(),
            step: 0,
            indicator,
        })
    }

    fn blending(&self, u: &SolutionField<T>) -> Result<BlendField<T>> {
        if !self.config.indicator.enabled {
            return Ok(BlendField::zeros(u.n_elements()));
        }
        compute_blending(
            u,
            &self.disc.ops,
            &self.disc.mesh,
            &self.disc.gas,
            &self.indicator,
            self.config.indicator.propagation_sweep,
        )
    }

    /// Diagnostics of the current state with blending statistics from
    /// `window`, or zeros if it is empty.
    pub fn sample(&self, window: &AlphaWindow<T>) -> Result<SeriesRow<T>> {
        let (max_alpha, mean_alpha) = window.statistics(false).unwrap_or((T::zero(), T::zero()));
        let (max_dalpha, mean_dalpha) = window.statistics(true).unwrap_or((T::zero(), T::zero()));
        let entropy = total_entropy(&self.state, &self.disc.ops, &self.disc.mesh, &self.disc.gas)?;
        let [mass, mom_x, mom_y, energy] = self.state.totals(&self.disc.ops, &self.disc.mesh);
        let gas = &self.disc.gas;
        let (min_rho, min_p) = self
            .state
            .values()
            .iter()
            .fold((T::infinity(), T::infinity()), |(r, p), s| {
                (r.min(s.rho()), p.min(s.pressure_unchecked(gas)))
            });
        Ok(SeriesRow {
            t: self.time,
            entropy,
            max_alpha,
            mean_alpha,
            max_dalpha,
            mean_dalpha,
            mass,
            mom_x,
            mom_y,
            energy,
            min_rho,
            min_p,
        })
    }

    fn snapshot(&self, dir: &Path, alpha: &[T], window: &AlphaWindow<T>) -> Result<PathBuf> {
        let data = SnapshotData {
            ops: &self.disc.ops,
            mesh: &self.disc.mesh,
            gas: &self.disc.gas,
            alpha,
            alpha_window_max: window.element_max(),
        };
        let stem = snapshot_stem(self.step, self.time.as_f64());
        write_snapshot(&self.state, &data, self.time, dir, &stem).map(|(vtk, _)| vtk)
    }

    fn abort(&self, source: Error) -> Error {
        Error::Aborted {
            step: self.step,
            time: self.time.as_f64(),
            source: Box::new(source),
        }
    }

    /// Advances to `time.t_end` or `time.max_steps`, writing `series.csv`
    /// and snapshots below `out_dir` when given. Solver failures are
    /// returned as [`Error::Aborted`].
    pub fn run(&mut self, out_dir: Option<&Path>, observer: &mut dyn RunObserver<T>) -> Result<RunSummary<T>> {
        let l = T::lit;
        let t_end = l(self.config.time.t_end);
        let tau = self.config.output.sample_interval;
        let snap_every = self.config.output.snapshot_interval.filter(|_| out_dir.is_some());
        let k = self.disc.mesh.n_elements();
        let close = |a: T, b: T| (a - b).abs() <= l(1e-12) * T::one().max(b.abs());

        let mut writer = match out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                Some(SeriesWriter::create(dir.join("series.csv"))?)
            }
            None => None,
        };
        let snap_dir = out_dir.map(|d| d.join("snapshots"));

        let mut summary = RunSummary {
            steps: 0,
            final_time: self.time,
            reached_t_end: false,
            samples: Vec::new(),
            snapshots: Vec::new(),
            halvings: 0,
        };
        let mut sample_window = AlphaWindow::new(k);
        let mut snap_window = AlphaWindow::new(k);
        let mut last_alpha = vec![T::zero(); k];

        let first = self.sample(&sample_window).map_err(|e| self.abort(e))?;
        observer.on_sample(&first);
        if let Some(w) = writer.as_mut() {
            w.write_row(&first)?;
        }
        summary.samples.push(first);
        if let (Some(dir), Some(_)) = (&snap_dir, snap_every) {
            summary.snapshots.push(self.snapshot(dir, &last_alpha, &snap_window)?);
        }

        // event times are index * interval, clipped to t_end
        let event = |idx: usize, every: f64| {
            let t = l(idx as f64 * every);
            if t > t_end || close(t, t_end) {
                t_end
            } else {
                t
            }
        };
        let mut sample_idx = 1;
        let mut snap_idx = 1;

        while self.time < t_end && !close(self.time, t_end) && self.step < self.config.time.max_steps {
            let next_sample = event(sample_idx, tau);
            let next_snap = snap_every.map_or(t_end, |s| event(snap_idx, s));
            let target = next_sample.min(next_snap).min(t_end);

            let mut dt = compute_dt(&self.state, &self.disc.mesh, &self.disc.gas, l(self.config.time.cfl))
                .map_err(|e| self.abort(e))?;
            let clipped = self.time + dt >= target;
            if clipped {
                dt = target - self.time;
            }
            if !(dt > T::zero()) {
                return Err(self.abort(Error::config("time.cfl", "time step collapsed to zero")));
            }

            let step_alpha = if self.config.indicator.per_stage {
                None
            } else {
                Some(self.blending(&self.state).map_err(|e| self.abort(e))?)
            };
            let outcome = {
                let this = &*self;
                this.integrator
                    .advance_step(&this.disc, &this.state, dt, |_, u| match &step_alpha {
                        Some(a) => Ok(a.clone()),
                        None => this.blending(u),
                    })
            }
            .map_err(|e| self.abort(e))?;

            self.time = if clipped && outcome.halvings == 0 {
                target
            } else {
                self.time + outcome.dt
            };
            self.step += 1;
            self.state = outcome.state;
            summary.halvings += outcome.halvings;
            for rec in &outcome.stages {
                observer.on_stage(self.step, self.time, rec);
                sample_window.push(&rec.blend);
                snap_window.push(&rec.blend);
            }
            if let Some(rec) = outcome.stages.last() {
                last_alpha.clone_from(&rec.blend.alpha);
            }
            observer.on_step(self.step, self.time, &self.state);

            let at_end = close(self.time, t_end);
            let out_of_steps = self.step >= self.config.time.max_steps;
            if close(self.time, next_sample) || self.time > next_sample || at_end || out_of_steps {
                let row = self.sample(&sample_window).map_err(|e| self.abort(e))?;
                observer.on_sample(&row);
                if let Some(w) = writer.as_mut() {
                    w.write_row(&row)?;
                }
                summary.samples.push(row);
                sample_window.reset();
                while event(sample_idx, tau) <= self.time && !close(event(sample_idx, tau), t_end) {
                    sample_idx += 1;
                }
            }
            if let (Some(dir), Some(every)) = (&snap_dir, snap_every) {
                if close(self.time, next_snap) || self.time > next_snap || at_end || out_of_steps {
                    summary.snapshots.push(self.snapshot(dir, &last_alpha, &snap_window)?);
                    snap_window.reset();
                    while event(snap_idx, every) <= self.time && !close(event(snap_idx, every), t_end) {
                        snap_idx += 1;
                    }
                }
            }
        }

        summary.steps = self.step;
        summary.final_time = self.time;
        summary.reached_t_end = self.time >= t_end || close(self.time, t_end);
        Ok(summary)
    }
}
