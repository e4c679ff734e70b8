mod common;

use std::sync::Mutex;

use blendsem_core::field::{NodalField, SolutionField};
use blendsem_core::lgl::ElementOperators;
use blendsem_core::spatial::RhsField;
use blendsem_core::timestep::{compute_dt, SemiDiscrete};
use blendsem_core::{
    BlendField, Discretization, FluxKind, GasModel, LimiterSettings, Mesh2D, Result, RkScheme, TimeIntegrator,
    VolumeForm,
};
use common::{gas, max_abs, max_abs_diff, rng, rough_field, smooth_field};
use rand::Rng;

/// Returns a fixed sequence of derivatives, one per call, ignoring `u`.
struct Replay {
    fields: Vec<NodalField<f64>>,
    calls: Mutex<usize>,
}

impl SemiDiscrete<f64> for Replay {
    fn evaluate(&self, _u: &SolutionField<f64>, _alpha: &BlendField<f64>) -> Result<RhsField<f64>> {
        let mut n = self.calls.lock().unwrap();
        let f = self.fields[*n].clone();
        *n += 1;
        Ok(RhsField {
            dg: f.clone(),
            fv: f.clone(),
            blended: f,
        })
    }

    fn gas(&self) -> GasModel<f64> {
        gas()
    }
}

/// Shu–Osher form with every stage stored.
fn dense_step(
    scheme: &RkScheme<f64>,
    u0: &SolutionField<f64>,
    dt: f64,
    mut rhs: impl FnMut(&SolutionField<f64>) -> NodalField<f64>,
) -> SolutionField<f64> {
    let mut us = vec![u0.clone()];
    let mut ls = Vec::new();
    for s in 0..scheme.stages() {
        ls.push(rhs(&us[s]));
        let mut next = NodalField::zeros(u0.n_elements(), u0.degree());
        for i in 0..=s {
            next.axpy(scheme.a(s, i), &us[i]);
            next.axpy(dt * scheme.b(s, i), &ls[i]);
        }
        us.push(next);
    }
    us.pop().unwrap()
}

fn unlimited() -> TimeIntegrator<f64> {
    TimeIntegrator::new(
        RkScheme::ssprk54(),
        LimiterSettings {
            enabled: false,
            ..LimiterSettings::default()
        },
        0,
    )
}

#[test]
fn low_storage_matches_dense_on_replayed_derivatives() {
    let g = gas();
    let scheme = RkScheme::ssprk54();
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let u0 = rough_field(&mut r, 6, 2, &g);
        let fields: Vec<_> = (0..scheme.stages())
            .map(|_| {
                let mut f = NodalField::zeros(6, 2);
                for s in f.values_mut() {
                    for v in 0..4 {
                        s[v] = r.gen_range(-5.0..5.0);
                    }
                }
                f
            })
            .collect();
        let dt = r.gen_range(0.01..0.2);
        let op = Replay {
            fields: fields.clone(),
            calls: Mutex::new(0),
        };
        let (got, _) = unlimited()
            .try_step(&op, &u0, dt, &mut |_, u: &SolutionField<f64>| {
                Ok(BlendField::zeros(u.n_elements()))
            })
            .unwrap();
        assert_eq!(*op.calls.lock().unwrap(), scheme.stages());

        let mut k = 0;
        let expect = dense_step(&scheme, &u0, dt, |_| {
            k += 1;
            fields[k - 1].clone()
        });
        let scale = max_abs(&expect).max(1.0);
        assert!(max_abs_diff(&got, &expect) <= 1e-13 * scale, "seed {seed}");
    }
}

fn smooth_disc() -> Discretization<f64> {
    Discretization::new(
        ElementOperators::new(3).unwrap(),
        Mesh2D::new(4, 4, (0.0, 1.0), (0.0, 1.0)).unwrap(),
        gas(),
        FluxKind::Hlle,
        VolumeForm::Split,
    )
}

#[test]
fn low_storage_matches_dense_on_the_operator() {
    let d = smooth_disc();
    let g = gas();
    let mut r = rng(7);
    let u0 = smooth_field(&mut r, &d.mesh, &d.ops, &g);
    let dt = compute_dt(&u0, &d.mesh, &g, 0.5).unwrap();
    let zero = BlendField::zeros(d.mesh.n_elements());
    let (got, _) = unlimited()
        .try_step(&d, &u0, dt, &mut |_, u: &SolutionField<f64>| {
            Ok(BlendField::zeros(u.n_elements()))
        })
        .unwrap();
    let expect = dense_step(&RkScheme::ssprk54(), &u0, dt, |u| d.evaluate(u, &zero).unwrap().blended);
    assert!(max_abs_diff(&got, &expect) <= 1e-12 * max_abs(&expect));
}

#[test]
fn limited_steps_conserve_totals() {
    let d = smooth_disc();
    let g = gas();
    let mut r = rng(8);
    let mut u = smooth_field(&mut r, &d.mesh, &d.ops, &g);
    let integrator = TimeIntegrator::new(RkScheme::ssprk54(), LimiterSettings::default(), 4);
    let scale = {
        let t = u.totals(&d.ops, &d.mesh);
        t.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    for _ in 0..20 {
        let before = u.totals(&d.ops, &d.mesh);
        let dt = compute_dt(&u, &d.mesh, &g, 0.5).unwrap();
        let alphas: Vec<f64> = (0..d.mesh.n_elements()).map(|_| r.gen_range(0.0..0.5)).collect();
        let out = integrator
            .advance_step(&d, &u, dt, |_, _| Ok(BlendField::from_alpha(alphas.clone())))
            .unwrap();
        u = out.state;
        let after = u.totals(&d.ops, &d.mesh);
        for v in 0..4 {
            assert!(
                (after[v] - before[v]).abs() <= 1e-11 * scale,
                "var {v}: {} vs {}",
                after[v],
                before[v]
            );
        }
    }
}

#[test]
fn limiter_keeps_rough_data_admissible() {
    let d = smooth_disc();
    let g = gas();
    let integrator = TimeIntegrator::new(RkScheme::ssprk54(), LimiterSettings::default(), 6);
    for seed in 0..5 {
        let mut r = rng(200 + seed);
        let mut u = rough_field(&mut r, d.mesh.n_elements(), 3, &g);
        for _ in 0..5 {
            let dt = compute_dt(&u, &d.mesh, &g, 0.5).unwrap();
            let out = integrator
                .advance_step(&d, &u, dt, |_, u: &SolutionField<f64>| {
                    Ok(BlendField::zeros(u.n_elements()))
                })
                .unwrap();
            for st in &out.stages {
                let m = st.margins.unwrap();
                assert!(m.min_rho > 0.0 && m.min_p > 0.0, "seed {seed}: {m:?}");
            }
            u = out.state;
            assert!(u.first_inadmissible(&g).is_none());
        }
    }
}
