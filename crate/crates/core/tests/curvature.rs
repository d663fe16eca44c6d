use std::sync::Arc;

use nlcurv::curvature::*;
use nlcurv::oracle::{sphere_h, sphere_k};
use nlcurv::quadrature::QuadratureSpec;
use nlcurv::specfun::{beta, beta_integral, gamma};
use nlcurv::surface::{SurfaceScene, Torus, Vec3};

fn quick() -> QuadratureSpec {
    QuadratureSpec { n_dir: 32, n_polar: 96, n_azimuth: 64, n_phi: 256, ..Default::default() }
}

#[test]
fn sphere_quantities_match_closed_forms() {
    let spec = quick();
    for (n, rho) in [(2, 0.5), (3, 1.0), (3, 2.0)] {
        let s = SurfaceScene::sphere(n, Vec3::zeros(), rho).unwrap();
        let z = if n == 3 { Vec3::new(0.36, 0.48, 0.8) * rho } else { Vec3::new(0.6, 0.8, 0.0) * rho };
        for sigma in [0.25, 0.5, 0.75] {
            let k = sphere_k(n, rho, sigma).unwrap();
            let e = frame_at(&s, &z).unwrap().direction(0.3);
            let num = directional_curvature(&s, &z, &e, sigma, &spec).unwrap().value;
            assert!(((num - k) / k).abs() < 1e-6, "n={n} rho={rho} sigma={sigma}: {num} vs {k}");
            let h = sphere_h(n, rho, sigma).unwrap();
            let hv = mean_curvature_volume(&s, &z, sigma, &spec).unwrap();
            assert!(((hv - h) / h).abs() < 1e-3, "H n={n} rho={rho} sigma={sigma}: {hv} vs {h}");
        }
    }
}

#[test]
fn inward_orientation_flips_the_sign() {
    let s = SurfaceScene::sphere(3, Vec3::zeros(), 1.0).unwrap().flipped();
    let z = Vec3::new(0.0, 0.0, 1.0);
    let e = frame_at(&s, &z).unwrap().direction(0.0);
    let v = directional_curvature(&s, &z, &e, 0.5, &quick()).unwrap().value;
    assert!((v - sphere_k(3, 1.0, 0.5).unwrap().abs()).abs() < 1e-6, "{v}");
}

#[test]
fn torus_tensor_representations_agree() {
    let s = SurfaceScene::implicit(Arc::new(Torus::new(2.0, 0.5).unwrap())).unwrap();
    let spec = quick();
    let z = Vec3::new(2.5, 0.0, 0.0);
    let a = curvature_tensor(&s, &z, 0.5, &spec, Representation::Angular).unwrap();
    let f = curvature_tensor(&s, &z, 0.5, &spec, Representation::Fullspace).unwrap();
    assert!(a.max_diff(&f).unwrap() < 1e-2 * a.norm(), "{a:?} vs {f:?}");
    let k_det = gaussian_curvature(&a);
    let k_dbl = gaussian_double_integral(&s, &z, 0.5, &spec).unwrap();
    assert!((k_det - k_dbl).abs() < 2e-2 * k_det.abs(), "{k_det} vs {k_dbl}");
}

#[test]
fn plane_is_flat() {
    let s = SurfaceScene::plane(3, Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let z = Vec3::new(0.2, -0.1, 0.0);
    let t = curvature_tensor(&s, &z, 0.4, &quick(), Representation::Angular).unwrap();
    assert!(t.norm() < 1e-12);
}

#[test]
fn sigma_to_one_limit_of_the_sphere() {
    let spec = quick();
    let s = SurfaceScene::sphere(3, Vec3::zeros(), 0.5).unwrap();
    let z = Vec3::new(0.5, 0.0, 0.0);
    let e = frame_at(&s, &z).unwrap().direction(0.0);
    let samples: Vec<(f64, f64)> =
        [0.9, 0.95, 0.99].iter().map(|&sg| (sg, directional_curvature(&s, &z, &e, sg, &spec).unwrap().value)).collect();
    let lim = sigma_to_one_limit(&samples).unwrap();
    assert!((lim.estimate + 2.0).abs() < 0.04, "{lim:?}");
}

#[test]
fn special_functions_agree() {
    assert!((gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let (x, y) = (0.7, 1.9);
    assert!(((beta(x, y).unwrap() - beta_integral(x, y).unwrap()) / beta(x, y).unwrap()).abs() < 1e-8);
    assert!(gamma(-1.0).is_err());
}
