#![allow(dead_code)]

pub mod transcription;

use dimer_core::geometry::{ClusterGeometry, DimerSites};
use dimer_core::kernels::{Mat3C, Vec3R};
use dimer_core::materials::{ModelParams, PolarizationTensors, Sign};
use nalgebra::SMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use transcription::{Scalars, Tensors, M3, P3};

/// `h = 1.9`, `t₁ = t₂ = 0.3`, unit constants, both signs `+`.
pub fn admissible(a: f64) -> ModelParams {
    ModelParams {
        a,
        h: 1.9,
        t1: 0.3,
        t2: 0.3,
        alpha0: 0.5,
        beta0: 1.0,
        k: 1.0,
        eta0: Complex64::new(1.0, 0.0),
        eta2: Complex64::new(1.0, 0.0),
        c0: 1.0,
        d0: 1.0,
        sign_c: Sign::Plus,
        sign_d: Sign::Plus,
        eps0: 1.0,
        mu0: 1.0,
    }
}

pub fn scalars(p: &ModelParams) -> Scalars {
    Scalars {
        a: p.a,
        h: p.h,
        k: p.k,
        eta0: p.eta0,
        eta2: p.eta2,
        c0s: p.sign_c.value() * p.c0,
        d0s: p.sign_d.value() * p.d0,
    }
}

pub fn m3(m: &Mat3C) -> M3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

pub fn tensors(t: &PolarizationTensors) -> Tensors {
    Tensors { p011: m3(&t.p011), p012: m3(&t.p012), p021: m3(&t.p021), p022: m3(&t.p022) }
}

pub fn p3(v: &Vec3R) -> P3 {
    [v.x, v.y, v.z]
}

pub fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Well-conditioned random tensor `s(I + 0.3 X)`.
pub fn rand_tensor(rng: &mut ChaCha8Rng, s: f64) -> Mat3C {
    let x = Mat3C::from_fn(|_, _| rand_c(rng));
    (Mat3C::identity() + x * Complex64::from(0.3)) * Complex64::from(s)
}

pub fn rand_tensors(rng: &mut ChaCha8Rng, s: f64) -> PolarizationTensors {
    PolarizationTensors {
        p011: rand_tensor(rng, s),
        p012: rand_tensor(rng, s),
        p021: rand_tensor(rng, s),
        p022: rand_tensor(rng, s),
    }
}

pub fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3R {
    loop {
        let v = Vec3R::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random dimer of length `d_in` with its midpoint in the unit cube.
pub fn rand_dimer(rng: &mut ChaCha8Rng, d_in: f64) -> DimerSites {
    let z0 = Vec3R::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
    let u = rand_unit(rng) * (d_in / 2.0);
    DimerSites::new(z0 - u, z0 + u).unwrap()
}

/// Two random dimers whose midpoints are at least `d_out` apart.
pub fn rand_pair(rng: &mut ChaCha8Rng, d_in: f64, d_out: f64) -> ClusterGeometry {
    let a = rand_dimer(rng, d_in);
    loop {
        let b = rand_dimer(rng, d_in);
        if (a.z0 - b.z0).norm() >= d_out {
            return ClusterGeometry::from_dimers(vec![a, b]).unwrap();
        }
    }
}

/// Largest entrywise deviation, each 3×3 sub-block measured against its
/// own largest oracle entry.
pub fn block_rel_err<const N: usize>(lib: &SMatrix<Complex64, N, N>, oracle: &[[Complex64; N]; N]) -> f64 {
    let mut worst: f64 = 0.0;
    for br in 0..N / 3 {
        for bc in 0..N / 3 {
            let mut scale: f64 = 0.0;
            let mut diff: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let (r, c) = (3 * br + i, 3 * bc + j);
                    scale = scale.max(oracle[r][c].norm());
                    diff = diff.max((lib[(r, c)] - oracle[r][c]).norm());
                }
            }
            let e = if scale == 0.0 { diff } else { diff / scale };
            worst = worst.max(e);
        }
    }
    worst
}

/// Entrywise deviation of a vector, each 3-component slot measured against
/// its own largest oracle entry.
pub fn vec_rel_err(lib: &[Complex64], oracle: &[Complex64]) -> f64 {
    assert_eq!(lib.len(), oracle.len());
    lib.chunks(3)
        .zip(oracle.chunks(3))
        .map(|(x, y)| {
            let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                diff
            } else {
                diff / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Largest relative deviation between every assembled block of a two-or-more
/// dimer configuration and the transcription oracle.
pub fn assembly_oracle_error(
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
    inc: &dimer_core::fields::IncidentWave,
) -> f64 {
    use dimer_core::assembly as asm;
    use transcription as tr;
    let s = scalars(p);
    let tt = tensors(t);
    let theta = p3(inc.direction());
    let pol = p3(inc.polarization());
    let mut worst: f64 = 0.0;
    for m in 0..g.len() {
        let dm = g.dimer(m);
        let (m1, m2) = (p3(&dm.z1), p3(&dm.z2));
        let b = asm::assemble_b(m, g, p, t).unwrap();
        worst = worst.max(block_rel_err(&b, &tr::b_block(&m1, &m2, &s, &tt)));
        let src = asm::assemble_source(m, g, p, t, inc).unwrap();
        worst = worst.max(vec_rel_err(src.as_slice(), &tr::source(&m1, &m2, &theta, &pol, &s, &tt)));
        let a = asm::assemble_a(m, g, p, t).unwrap();
        worst = worst.max(block_rel_err(&a, &tr::a_block(&m1, &m2, &s, &tt)));
        let rs = asm::assemble_reduced_source(m, g, inc).unwrap();
        worst = worst.max(vec_rel_err(rs.as_slice(), &tr::reduced_source(&m1, &m2, &theta, &pol, p.k)));
        for j in (0..g.len()).filter(|&j| j != m) {
            let dj = g.dimer(j);
            let (j1, j2) = (p3(&dj.z1), p3(&dj.z2));
            let psi = asm::assemble_psi(m, j, g, p, t).unwrap();
            worst = worst.max(block_rel_err(&psi, &tr::psi_block(&m1, &m2, &j1, &j2, &s, &tt)));
            let c = asm::assemble_c(m, j, g, p).unwrap();
            worst = worst.max(block_rel_err(&c, &tr::c_block(&m1, &m2, &j1, &j2, p.k)));
        }
    }
    worst
}

/// Worst errors of the kernel suite over random `(x, y, k)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelSuite {
    pub grad_fd: f64,
    pub hess_fd: f64,
    /// `|tr Υ - 2Φ|` over the Frobenius norm of `Υ`.
    pub trace_upsilon: f64,
    /// `|tr ∇∇Φ + k²Φ|` over the Frobenius norm of `∇∇Φ`.
    pub trace_hessian: f64,
    /// The same two trace errors measured against `|Φ|` and `k²|Φ|`.
    pub trace_upsilon_vs_phi: f64,
    pub trace_hessian_vs_phi: f64,
}

/// `r` log-uniform on `[0.01, 10]`, `k` uniform on `[0.5, 5]`, directions
/// uniform. Derivatives are checked against central differences of `Φ` alone.
pub fn kernel_suite(samples: usize, seed: u64) -> KernelSuite {
    use dimer_core::kernels::{grad_phi_k, hess_phi_k, phi_k, upsilon_k, Vec3C};
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = KernelSuite::default();
    for _ in 0..samples {
        let r = 10f64.powf(rng.gen_range(-2.0..1.0));
        let k = rng.gen_range(0.5..5.0);
        let y = Vec3R::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let x = y + rand_unit(&mut rng) * r;
        let kc = Complex64::new(k, 0.0);
        let f = |v: &Vec3R| phi_k(v, &y, kc).unwrap();
        let phi = f(&x);
        let grad = grad_phi_k(&x, &y, kc).unwrap();
        let hess = hess_phi_k(&x, &y, kc).unwrap();
        let ups = upsilon_k(&x, &y, kc).unwrap();

        let step = 3e-4 * r.min(1.0 / k);
        let unit = |i: usize| {
            let mut e = Vec3R::zeros();
            e[i] = step;
            e
        };
        let mut gfd = Vec3C::zeros();
        let mut hfd = Mat3C::zeros();
        for i in 0..3 {
            let ei = unit(i);
            gfd[i] = (f(&(x + ei)) - f(&(x - ei))) / (2.0 * step);
            for j in 0..3 {
                let ej = unit(j);
                hfd[(i, j)] = (f(&(x + ei + ej)) - f(&(x + ei - ej)) - f(&(x - ei + ej)) + f(&(x - ei - ej))) / (4.0 * step * step);
            }
        }
        s.grad_fd = s.grad_fd.max((gfd - grad).norm() / grad.norm());
        s.hess_fd = s.hess_fd.max((hfd - hess).norm() / hess.norm());
        let tu = (ups.trace() - phi * 2.0).norm();
        let th = (hess.trace() + phi * (k * k)).norm();
        s.trace_upsilon = s.trace_upsilon.max(tu / ups.norm());
        s.trace_hessian = s.trace_hessian.max(th / hess.norm());
        s.trace_upsilon_vs_phi = s.trace_upsilon_vs_phi.max(tu / (2.0 * phi.norm()));
        s.trace_hessian_vs_phi = s.trace_hessian_vs_phi.max(th / (k * k * phi.norm()));
    }
    s
}

/// Random cluster of `n` dimers placed by the library's rejection sampler.
pub fn rand_cluster(p: &ModelParams, n: usize, seed: u64) -> ClusterGeometry {
    use dimer_core::geometry::{make_random_cluster, RandomClusterOptions};
    let opts = RandomClusterOptions { seed, max_attempts: 1_000_000, orientation: None, count_override: Some(n) };
    make_random_cluster(&p.scaling(), &opts).unwrap()
}

pub fn wave_z(k: f64) -> dimer_core::fields::IncidentWave {
    dimer_core::fields::IncidentWave::new(Vec3R::z(), Vec3R::x(), k).unwrap()
}

/// Largest `|x̂·E∞| / ‖E∞‖` over `n` random directions.
pub fn far_field_transversality(
    m: &dimer_core::assembly::FullMoments,
    g: &ClusterGeometry,
    k: f64,
    n: usize,
    seed: u64,
) -> f64 {
    use dimer_core::fields::{far_field, FarFieldConvention};
    use dimer_core::kernels::complexify;
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let xhat = rand_unit(&mut rng);
        for conv in [FarFieldConvention::RadialLimit, FarFieldConvention::AsPrinted] {
            let e = far_field(&xhat, m, g, k, conv).unwrap();
            worst = worst.max(complexify(&xhat).dot(&e).norm() / e.norm());
        }
    }
    worst
}

/// `err(10²) / err(10³)` with `err(R) = ‖R e^{-ikR} E^s(R x̂) - E∞(x̂)‖`.
pub fn radial_limit_ratio(
    m: &dimer_core::assembly::FullMoments,
    g: &ClusterGeometry,
    k: f64,
    a: f64,
    xhat: &Vec3R,
) -> f64 {
    use dimer_core::fields::{far_field, scattered_field, FarFieldConvention, FieldContext};
    let ctx = FieldContext::new(k, a);
    let einf = far_field(xhat, m, g, k, FarFieldConvention::RadialLimit).unwrap();
    let err = |r: f64| {
        let es = scattered_field(&(xhat * r), m, g, &ctx).unwrap();
        (es * (Complex64::new(0.0, -k * r).exp() * r) - einf).norm()
    };
    err(1e2) / err(1e3)
}

/// Far fields of a cluster and of its translate by `d`, compared against the
/// phase factors `e^{ik(θ - x̂)·d}` (moments re-solved) and `e^{-ikx̂·d}`
/// (moments held fixed). Returns the two worst relative deviations.
pub fn translation_covariance(
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
    inc: &dimer_core::fields::IncidentWave,
    d: &Vec3R,
    n_dirs: usize,
) -> (f64, f64) {
    use dimer_core::assembly::assemble_full_system;
    use dimer_core::fields::{far_field, FarFieldConvention};
    use dimer_core::solver::{solve_dense, DEFAULT_DENSE_CAP};
    use rand::SeedableRng;
    let gt = g.translated(d);
    let (m, _) = solve_dense(&assemble_full_system(g, p, t, inc).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    let (mt, _) = solve_dense(&assemble_full_system(&gt, p, t, inc).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut resolved, mut fixed): (f64, f64) = (0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..n_dirs {
        let xhat = rand_unit(&mut rng);
        let conv = FarFieldConvention::RadialLimit;
        let e = far_field(&xhat, &m, g, p.k, conv).unwrap();
        let et = far_field(&xhat, &mt, &gt, p.k, conv).unwrap();
        let ef = far_field(&xhat, &m, &gt, p.k, conv).unwrap();
        let phase_resolved = (i * p.k * (inc.direction() - xhat).dot(d)).exp();
        let phase_fixed = (-i * p.k * xhat.dot(d)).exp();
        resolved = resolved.max((et - e * phase_resolved).norm() / e.norm());
        fixed = fixed.max((ef - e * phase_fixed).norm() / e.norm());
    }
    (resolved, fixed)
}

/// Relative gap between the dominant full-system moments `(Q1, R2)` and the
/// reduced-system moments on an 8-dimer lattice with identity tensors.
pub fn reduced_full_gap(a: f64) -> f64 {
    use dimer_core::assembly::{assemble_full_system, assemble_reduced_system};
    use dimer_core::geometry::make_lattice_cluster;
    use dimer_core::solver::{solve_dense, DEFAULT_DENSE_CAP};
    let p = admissible(a);
    let one = Complex64::new(1.0, 0.0);
    let t = PolarizationTensors::isotropic(one, one, one, one);
    let g = make_lattice_cluster(&p.scaling(), &Vec3R::new(1.0, 1.0, 1.0).normalize(), Some(8)).unwrap();
    let inc = wave_z(p.k);
    let (full, _) = solve_dense(&assemble_full_system(&g, &p, &t, &inc).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    let (red, _) = solve_dense(&assemble_reduced_system(&g, &p, &t, &inc).unwrap(), DEFAULT_DENSE_CAP).unwrap();
    let dom = full.dominant();
    dom.sub(&red).norm() / dom.norm()
}
