mod common;

use common::{admissible, far_field_transversality, radial_limit_ratio, rand_cluster, rand_tensors, translation_covariance, wave_z};
use dimer_core::assembly::{assemble_full_system, assemble_reduced_system};
use dimer_core::fields::{
    far_field_grid, reduced_far_field, reduced_far_field_grid, reduced_scattered_field, scattering_cross_section,
    FarFieldConvention, FieldContext, IncidentWave,
};
use dimer_core::kernels::{complexify, Vec3R};
use dimer_core::solver::{solve_dense, DEFAULT_DENSE_CAP};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solved(seed: u64) -> (dimer_core::geometry::ClusterGeometry, dimer_core::assembly::FullMoments) {
    let p = admissible(0.005);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rand_tensors(&mut rng, 1.0);
    let g = rand_cluster(&p, 6, seed);
    let (m, _) = solve_dense(&assemble_full_system(&g, &p, &t, &wave_z(p.k)).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    (g, m)
}

#[test]
fn far_field_is_transverse() {
    let (g, m) = solved(1);
    assert!(far_field_transversality(&m, &g, 1.0, 200, 5) <= 1e-12);
}

#[test]
fn scattered_field_decays_to_far_field() {
    let (g, m) = solved(2);
    for xhat in [Vec3R::z(), Vec3R::new(0.3, -0.4, 0.5).normalize(), -Vec3R::x()] {
        let ratio = radial_limit_ratio(&m, &g, 1.0, 0.005, &xhat);
        assert!((8.0..=12.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn translation_multiplies_by_phase() {
    let p = admissible(0.005);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = rand_tensors(&mut rng, 1.0);
    let g = rand_cluster(&p, 5, 3);
    let inc = IncidentWave::from_angles(0.6, 1.1, 0.3, p.k).unwrap();
    let (resolved, fixed) = translation_covariance(&g, &p, &t, &inc, &Vec3R::new(0.7, -1.3, 2.1), 50);
    assert!(resolved <= 1e-10, "{resolved:e}");
    assert!(fixed <= 1e-10, "{fixed:e}");
}

#[test]
fn reduced_far_field_is_radial_limit_of_reduced_field() {
    let p = admissible(0.005);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = rand_tensors(&mut rng, 1.0);
    let g = rand_cluster(&p, 4, 4);
    let (m, _) = solve_dense(&assemble_reduced_system(&g, &p, &t, &wave_z(p.k)).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    let ctx = FieldContext::new(p.k, p.a);
    let xhat = Vec3R::new(-0.2, 0.9, 0.1).normalize();
    let einf = reduced_far_field(&xhat, &m, &g, p.k, FarFieldConvention::RadialLimit).unwrap();
    assert!(complexify(&xhat).dot(&einf).norm() <= 1e-12 * einf.norm());
    let err = |r: f64| {
        let es = reduced_scattered_field(&(xhat * r), &m, &g, &ctx).unwrap();
        (es * (Complex64::new(0.0, -p.k * r).exp() * r) - einf).norm()
    };
    let ratio = err(1e2) / err(1e3);
    assert!((8.0..=12.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn cross_section_converges_with_grid() {
    let (g, m) = solved(5);
    let conv = FarFieldConvention::RadialLimit;
    let coarse = scattering_cross_section(&far_field_grid(&m, &g, 1.0, conv, 8, 16).unwrap());
    let fine = scattering_cross_section(&far_field_grid(&m, &g, 1.0, conv, 24, 48).unwrap());
    assert!(fine > 0.0);
    assert!((coarse - fine).abs() <= 1e-10 * fine);
    let printed = scattering_cross_section(&far_field_grid(&m, &g, 1.0, FarFieldConvention::AsPrinted, 24, 48).unwrap());
    assert!(printed > 0.0);
}

#[test]
fn pattern_csv_columns() {
    let p = admissible(0.005);
    let g = rand_cluster(&p, 2, 6);
    let (m, _) =
        solve_dense(&assemble_reduced_system(&g, &p, &rand_tensors(&mut ChaCha8Rng::seed_from_u64(6), 1.0), &wave_z(p.k)).unwrap(), DEFAULT_DENSE_CAP)
            .unwrap();
    let pat = reduced_far_field_grid(&m, &g, p.k, FarFieldConvention::RadialLimit, 4, 6).unwrap();
    let mut buf = Vec::new();
    pat.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta,phi,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez,intensity");
    assert_eq!(lines.count(), 24);
}
