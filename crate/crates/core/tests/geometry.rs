//! Connection coefficients, homothety and Killing-tensor residuals on the
//! catalog metrics.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use approx::assert_abs_diff_eq;
use kepler_ermakov::geometry::{
    christoffel, cone, cone_homothety, ermakov_killing_tensor, flat, flat_spherical, gradient_check, homothety_residual,
    killing_tensor_residual, sphere2, HomotheticData, KillingTensorSpec,
};
use kepler_ermakov::prelude::*;

fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[test]
fn sphere_connection() {
    let g = christoffel(&sphere2(), &[FRAC_PI_2, 0.3]).unwrap();
    assert_abs_diff_eq!(g.get(0, 1, 1), 0.0, epsilon = 1e-15);
    let g = christoffel(&sphere2(), &[FRAC_PI_4, 0.3]).unwrap();
    assert_abs_diff_eq!(g.get(1, 0, 1), 1.0, epsilon = 1e-14);
    assert_eq!(christoffel(&flat(3, 1.0), &[0.4, -2.0, 7.0]).unwrap().max_abs(), 0.0);
}

#[test]
fn connection_is_symmetric_and_differencing_agrees() {
    let metric = flat_spherical();
    let q = [1.3, 0.7, 2.1];
    let (a, d) = (christoffel(&metric, &q).unwrap(), christoffel(&metric.differenced(), &q).unwrap());
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(d.get(i, j, k), d.get(i, k, j));
                let (x, y) = (a.get(i, j, k), d.get(i, j, k));
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "Γ^{i}_{j}{k}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn cone_radial_field_is_homothetic_and_gradient() {
    let metric = cone(1.0, sphere2());
    let hv = cone_homothety(1.0, 3);
    let q = [2.0, 1.1, 0.4];
    assert!(max_abs(&homothety_residual(&metric, &hv, &q).unwrap()) <= 1e-10);
    assert!(gradient_check(&metric, &hv, &q).unwrap().iter().all(|r| r.abs() <= 1e-10));

    // L_{2u∂u} g = 4g, so the residual against ψ = 1 is 2g.
    let doubled = hv.scaled(2.0);
    let r = homothety_residual(&metric, &doubled, &q).unwrap();
    assert_abs_diff_eq!(r[(0, 0)], 2.0, epsilon = 1e-8);

    // H = u² instead of u²/2 leaves −u in the radial component.
    let wrong = hv.with_h(|q| q[0] * q[0]);
    let r = gradient_check(&metric, &wrong, &q).unwrap();
    assert_abs_diff_eq!(r[0], -2.0, epsilon = 1e-8);
}

#[test]
fn homothety_residual_is_linear_in_the_field() {
    let metric = cone(1.0, sphere2());
    let q = [1.4, 0.9, 0.2];
    let a = HomotheticData::new(|q| vec![q[0], 0.0, 0.0], |_| 0.0, 0.0);
    let b = HomotheticData::new(|q| vec![0.0, q[2].sin(), q[1]], |_| 0.0, 0.0);
    let sum = HomotheticData::new(|q| vec![q[0], q[2].sin(), q[1]], |_| 0.0, 0.0);
    let (ra, rb, rs) = (
        homothety_residual(&metric, &a, &q).unwrap(),
        homothety_residual(&metric, &b, &q).unwrap(),
        homothety_residual(&metric, &sum, &q).unwrap(),
    );
    assert!(max_abs(&(ra + rb - rs)) <= 1e-9);
}

#[test]
fn catalog_homotheties_certify() {
    for name in ["fr_cosmo_raw", "scalar_cosmo_raw", "scalar_cosmo_u", "fr_cosmo_uvw", "frw4", "calogero_moser"] {
        let rec = recipe(name).unwrap();
        let sys = rec.build().unwrap();
        let hv = sys.homothety().unwrap();
        for s in sample_states(&sys, 6, 10, &rec.sample).unwrap() {
            let r = max_abs(&homothety_residual(&sys.kinetic, hv, &s.q).unwrap());
            let g = gradient_check(&sys.kinetic, hv, &s.q).unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(r <= 1e-6 && g <= 1e-6, "{name}: homothety {r:e}, gradient {g:e}");
        }
    }
}

#[test]
fn angular_killing_tensor_of_flat_space() {
    let metric = flat_spherical();
    let q = [1.3, 0.7, 0.0];
    let kt = KillingTensorSpec::new(|q| {
        let (r4, s) = (q[0].powi(4), q[1].sin());
        nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, r4, r4 * s * s]))
    });
    assert!(killing_tensor_residual(&metric, &kt, &q).unwrap().max_abs() <= 1e-6);
    assert!(killing_tensor_residual(&metric, &KillingTensorSpec::from_metric(&metric), &q).unwrap().max_abs() <= 1e-10);

    let cubic = KillingTensorSpec::new(|q| {
        let (r3, s) = (q[0].powi(3), q[1].sin());
        nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, r3, r3 * s * s]))
    });
    assert!(killing_tensor_residual(&metric, &cubic, &q).unwrap().max_abs() > 1e-2);
}

#[test]
fn ermakov_killing_tensor_from_the_homothety() {
    let metric = flat_spherical();
    let kt = ermakov_killing_tensor(&metric, &cone_homothety(1.0, 3));
    for q in [[1.3, 0.7, 0.0], [0.8, 2.0, 1.5]] {
        assert!(killing_tensor_residual(&metric, &kt, &q).unwrap().max_abs() <= 1e-6);
    }
}

#[test]
fn singular_metric_is_reported() {
    let err = christoffel(&flat_spherical(), &[1.0, 0.0, 0.3]).unwrap_err();
    assert!(matches!(err, Error::SingularMetric { .. }), "{err}");
}
