mod common;

use blendsem_core::lgl::ElementOperators;
use blendsem_core::spatial::blended_rhs;
use blendsem_core::{BlendField, ConservativeState, Discretization, FluxKind, Mesh2D, Primitive, VolumeForm};
use common::{gas, max_abs, quadrature_sum, rng, rough_field, smooth_field};
use rand::Rng;

fn disc(degree: usize, k: usize, surface: FluxKind, form: VolumeForm) -> Discretization<f64> {
    Discretization::new(
        ElementOperators::new(degree).unwrap(),
        Mesh2D::new(k, k + 1, (0.0, 1.0), (0.0, 1.3)).unwrap(),
        gas(),
        surface,
        form,
    )
}

#[test]
fn free_stream_is_preserved() {
    let g = gas();
    let s = ConservativeState::from_primitive(
        Primitive {
            rho: 1.0,
            v1: 0.1,
            v2: 0.2,
            p: 1.0,
        },
        &g,
    );
    for form in [VolumeForm::Standard, VolumeForm::Split] {
        for surface in [FluxKind::Rusanov, FluxKind::Hlle] {
            for degree in [1, 3, 7] {
                let d = disc(degree, 3, surface, form);
                let u = blendsem_core::NodalField::uniform(d.mesh.n_elements(), degree, s);
                for alpha in [0.0, 0.3, 1.0] {
                    let rhs = d
                        .evaluate(&u, &BlendField::uniform(d.mesh.n_elements(), alpha))
                        .unwrap();
                    assert!(max_abs(&rhs.blended) <= 1e-12, "{form} {surface} N={degree} a={alpha}");
                }
            }
        }
    }
}

#[test]
fn conservation_for_arbitrary_blending() {
    let g = gas();
    let mut r = rng(11);
    for form in [VolumeForm::Standard, VolumeForm::Split] {
        for surface in [FluxKind::Rusanov, FluxKind::Hlle] {
            let d = disc(3, 4, surface, form);
            let k = d.mesh.n_elements();
            for _ in 0..5 {
                let u = rough_field(&mut r, k, 3, &g);
                let alpha = BlendField::from_alpha((0..k).map(|_| r.gen_range(0.0..1.0)).collect());
                let rhs = d.evaluate(&u, &alpha).unwrap();
                for part in [&rhs.dg, &rhs.fv, &rhs.blended] {
                    let sums = quadrature_sum(part, &d.ops, &d.mesh);
                    // relative to the size of the individual contributions
                    let scale = max_abs(part).max(1.0) * d.mesh.jacobian();
                    for s in sums {
                        assert!(s.abs() <= 1e-11 * scale * k as f64, "{form} {surface}: {sums:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn blend_matches_definition() {
    let g = gas();
    let mut r = rng(12);
    let d = disc(2, 3, FluxKind::Hlle, VolumeForm::Split);
    let k = d.mesh.n_elements();
    let u = smooth_field(&mut r, &d.mesh, &d.ops, &g);
    let alpha = BlendField::from_alpha((0..k).map(|_| r.gen_range(0.0..1.0)).collect());
    let rhs = d.evaluate(&u, &alpha).unwrap();
    let nn = u.nodes_per_element();
    for e in 0..k {
        let a = alpha.alpha[e];
        for n in 0..nn {
            let idx = e * nn + n;
            for v in 0..4 {
                let expect = (1.0 - a) * rhs.dg.values()[idx][v] + a * rhs.fv.values()[idx][v];
                assert!((rhs.blended.values()[idx][v] - expect).abs() <= 1e-14 * expect.abs().max(1.0));
            }
        }
    }
    let again = blended_rhs(rhs.dg.clone(), rhs.fv.clone(), &alpha).unwrap();
    assert_eq!(again.blended, rhs.blended);
}

#[test]
fn entropy_conservative_split_form() {
    // EC volume and EC surface fluxes: the entropy-variable contraction of
    // the time derivative vanishes
    let g = gas();
    let mut r = rng(13);
    for degree in [2, 3, 5] {
        let d = disc(degree, 3, FluxKind::ChandrashekarEc, VolumeForm::Split);
        for _ in 0..3 {
            let u = smooth_field(&mut r, &d.mesh, &d.ops, &g);
            let du = d.dg_rhs(&u).unwrap();
            let w = d.ops.weights();
            let n = d.ops.n_nodes();
            let mut prod = 0.0;
            for e in 0..d.mesh.n_elements() {
                for i in 0..n {
                    for j in 0..n {
                        let wv = g.entropy_variables(u.get(e, i, j)).unwrap();
                        prod += w[i] * w[j] * d.mesh.jacobian() * wv.dot(du.get(e, i, j));
                    }
                }
            }
            assert!(prod.abs() <= 1e-10, "N={degree}: {prod}");
        }
    }
}

#[test]
fn dissipative_surface_produces_entropy_decay() {
    let g = gas();
    let mut r = rng(14);
    let d = disc(3, 3, FluxKind::Rusanov, VolumeForm::Split);
    let u = rough_field(&mut r, d.mesh.n_elements(), 3, &g);
    let du = d.dg_rhs(&u).unwrap();
    let w = d.ops.weights();
    let mut prod = 0.0;
    for e in 0..d.mesh.n_elements() {
        for i in 0..4 {
            for j in 0..4 {
                let wv = g.entropy_variables(u.get(e, i, j)).unwrap();
                prod += w[i] * w[j] * d.mesh.jacobian() * wv.dot(du.get(e, i, j));
            }
        }
    }
    assert!(prod < 0.0, "{prod}");
}

#[test]
fn fv_free_stream_and_mass_flux_direction() {
    let g = gas();
    let d = disc(4, 2, FluxKind::Rusanov, VolumeForm::Standard);
    let s = ConservativeState::from_primitive(
        Primitive {
            rho: 0.7,
            v1: -0.4,
            v2: 0.9,
            p: 2.0,
        },
        &g,
    );
    let u = blendsem_core::NodalField::uniform(d.mesh.n_elements(), 4, s);
    assert!(max_abs(&d.fv_rhs(&u).unwrap()) <= 1e-12);
}
