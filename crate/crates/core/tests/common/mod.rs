#![allow(dead_code)]

use blendsem_core::field::SolutionField;
use blendsem_core::lgl::ElementOperators;
use blendsem_core::{ConservativeState, GasModel, Mesh2D, Primitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gas() -> GasModel<f64> {
    GasModel::default()
}

/// Admissible state with density and pressure spread over two decades.
pub fn random_state(rng: &mut impl Rng, gas: &GasModel<f64>) -> ConservativeState<f64> {
    let prim = Primitive {
        rho: 10f64.powf(rng.gen_range(-1.0..1.0)),
        v1: rng.gen_range(-2.0..2.0),
        v2: rng.gen_range(-2.0..2.0),
        p: 10f64.powf(rng.gen_range(-1.0..1.0)),
    };
    ConservativeState::from_primitive(prim, gas)
}

/// Smooth periodic field on `[0, 1]^2` with random phases.
pub fn smooth_field(
    rng: &mut impl Rng,
    mesh: &Mesh2D<f64>,
    ops: &ElementOperators<f64>,
    gas: &GasModel<f64>,
) -> SolutionField<f64> {
    use std::f64::consts::TAU;
    let (lx, ly) = (mesh.x_range().1 - mesh.x_range().0, mesh.y_range().1 - mesh.y_range().0);
    let ph: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
    SolutionField::from_fn(mesh, ops, |x, y| {
        let (sx, sy) = (TAU * x / lx, TAU * y / ly);
        let prim = Primitive {
            rho: 1.0 + 0.3 * (sx + ph[0]).sin() * (sy + ph[1]).cos(),
            v1: 0.4 * (sy + ph[2]).sin(),
            v2: -0.3 * (sx + ph[3]).cos(),
            p: 1.0 + 0.2 * (sx + sy + ph[1]).cos(),
        };
        ConservativeState::from_primitive(prim, gas)
    })
}

/// Node-wise random admissible field, discontinuous between elements.
pub fn rough_field(rng: &mut impl Rng, n_elements: usize, degree: usize, gas: &GasModel<f64>) -> SolutionField<f64> {
    let mut u = SolutionField::zeros(n_elements, degree);
    for s in u.values_mut() {
        *s = random_state(rng, gas);
    }
    u
}

pub fn max_abs_diff(a: &SolutionField<f64>, b: &SolutionField<f64>) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .flat_map(|(x, y)| (0..4).map(move |v| (x[v] - y[v]).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &SolutionField<f64>) -> f64 {
    a.values().iter().flat_map(|x| x.0).fold(0.0, |m, v| m.max(v.abs()))
}

/// `sum_k sum_ij w_i w_j J u'` per component.
pub fn quadrature_sum(f: &SolutionField<f64>, ops: &ElementOperators<f64>, mesh: &Mesh2D<f64>) -> [f64; 4] {
    f.totals(ops, mesh)
}
