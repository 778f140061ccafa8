//! Straight-line transcription of the block formulas, written against plain
//! arrays and a separately derived dyadic kernel. Used as an oracle for the
//! library assembly.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type P3 = [f64; 3];
pub type V3 = [C; 3];
pub type M3 = [[C; 3]; 3];

const J: C = C::new(0.0, 1.0);

/// Scalar inputs of the formulas.
#[derive(Clone, Copy, Debug)]
pub struct Scalars {
    pub a: f64,
    pub h: f64,
    pub k: f64,
    pub eta0: C,
    pub eta2: C,
    /// `±c₀` with its sign applied
    pub c0s: f64,
    /// `±d₀` with its sign applied
    pub d0s: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Tensors {
    pub p011: M3,
    pub p012: M3,
    pub p021: M3,
    pub p022: M3,
}

fn zero3() -> M3 {
    [[C::new(0.0, 0.0); 3]; 3]
}

fn sub(x: &P3, y: &P3) -> P3 {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

fn dist(x: &P3, y: &P3) -> f64 {
    let d = sub(x, y);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn phi(x: &P3, y: &P3, k: f64) -> C {
    let r = dist(x, y);
    (J * k * r).exp() / (4.0 * PI * r)
}

/// `∂/∂x_i Φ = (ikr - 1) e^{ikr} (x_i - y_i) / (4πr³)`.
pub fn grad(x: &P3, y: &P3, k: f64) -> V3 {
    let r = dist(x, y);
    let d = sub(x, y);
    let f = (J * k * r - 1.0) * (J * k * r).exp() / (4.0 * PI * r * r * r);
    [f * d[0], f * d[1], f * d[2]]
}

/// `Φ[(1 + i/(kr) - 1/(kr)²) δ_ij + (-1 - 3i/(kr) + 3/(kr)²) r̂_i r̂_j]`.
pub fn dyadic(x: &P3, y: &P3, k: f64) -> M3 {
    let r = dist(x, y);
    let d = sub(x, y);
    let u = [d[0] / r, d[1] / r, d[2] / r];
    let kr = k * r;
    let p = phi(x, y, k);
    let alpha = p * (1.0 + J / kr - 1.0 / (kr * kr));
    let beta = p * (-1.0 - 3.0 * J / kr + 3.0 / (kr * kr));
    let mut m = zero3();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = beta * (u[i] * u[j]);
            if i == j {
                m[i][j] += alpha;
            }
        }
    }
    m
}

/// `[v]_× w = v × w`.
pub fn crossmat(v: &V3) -> M3 {
    let z = C::new(0.0, 0.0);
    [[z, -v[2], v[1]], [v[2], z, -v[0]], [-v[1], v[0], z]]
}

pub fn mul(a: &M3, b: &M3) -> M3 {
    let mut m = zero3();
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                m[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    m
}

pub fn mulv(a: &M3, v: &V3) -> V3 {
    let mut w = [C::new(0.0, 0.0); 3];
    for i in 0..3 {
        for l in 0..3 {
            w[i] += a[i][l] * v[l];
        }
    }
    w
}

pub fn scale(a: &M3, s: C) -> M3 {
    let mut m = *a;
    for row in m.iter_mut() {
        for e in row.iter_mut() {
            *e *= s;
        }
    }
    m
}

/// Inverse by the adjugate formula.
pub fn inv3(m: &M3) -> M3 {
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let mut out = zero3();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c(j, i) / det;
        }
    }
    out
}

fn put<const N: usize>(dst: &mut [[C; N]; N], br: usize, bc: usize, b: &M3) {
    for i in 0..3 {
        for j in 0..3 {
            dst[3 * br + i][3 * bc + j] = b[i][j];
        }
    }
}

fn neg(a: &M3) -> M3 {
    scale(a, C::new(-1.0, 0.0))
}

pub type M12 = [[C; 12]; 12];
pub type M6 = [[C; 6]; 6];

/// Self-interaction block of one dimer with centers `z1`, `z2`.
pub fn b_block(z1: &P3, z2: &P3, s: &Scalars, t: &Tensors) -> M12 {
    let k = s.k;
    let res = s.a.powf(3.0 - s.h);
    let y12 = dyadic(z1, z2, k);
    let y21 = dyadic(z2, z1, k);
    let g12 = crossmat(&grad(z1, z2, k));
    let g21 = crossmat(&grad(z2, z1, k));

    let b13 = scale(&mul(&t.p011, &y12), s.eta0 * k.powi(4) / s.c0s * res);
    let b14 = scale(&mul(&t.p011, &g12), s.eta0 * k.powi(2) / s.c0s * res);
    let b23 = scale(&mul(&t.p012, &g12), C::from(k.powi(2) * s.a.powi(3)));
    let b24 = scale(&mul(&t.p012, &y12), C::from(k.powi(2) * s.a.powi(3)));
    let b31 = scale(&mul(&t.p021, &y21), s.eta2 * k.powi(4) * s.a.powi(5));
    let b32 = scale(&mul(&t.p021, &g21), s.eta2 * k.powi(4) * s.a.powi(5));
    let b41 = scale(&mul(&t.p022, &g21), s.eta2 * k.powi(2) / s.d0s * res);
    let b42 = scale(&mul(&t.p022, &y21), s.eta2 * k.powi(2) / s.d0s * res);

    let mut m = [[C::new(0.0, 0.0); 12]; 12];
    for i in 0..12 {
        m[i][i] = C::new(1.0, 0.0);
    }
    put(&mut m, 0, 2, &neg(&b13));
    put(&mut m, 0, 3, &neg(&b14));
    put(&mut m, 1, 2, &neg(&b23));
    put(&mut m, 1, 3, &neg(&b24));
    put(&mut m, 2, 0, &neg(&b31));
    put(&mut m, 2, 1, &neg(&b32));
    put(&mut m, 3, 0, &neg(&b41));
    put(&mut m, 3, 1, &neg(&b42));
    m
}

/// Pair block between dimer `m` (centers `m1`, `m2`) and dimer `j`.
pub fn psi_block(m1: &P3, m2: &P3, j1: &P3, j2: &P3, s: &Scalars, t: &Tensors) -> M12 {
    let k = s.k;
    let res = s.a.powf(3.0 - s.h);
    let r1_dy = s.eta0 * k.powi(4) / s.c0s * res;
    let r1_gr = s.eta0 * k.powi(2) / s.c0s * res;
    let r2 = C::from(k.powi(2) * s.a.powi(3));
    let r3_k4 = s.eta2 * k.powi(4) * s.a.powi(5);
    let r3_k2 = s.eta2 * k.powi(2) * s.a.powi(5);
    let r4 = s.eta2 * k.powi(2) / s.d0s * res;

    let y = |x: &P3, z: &P3| dyadic(x, z, k);
    let g = |x: &P3, z: &P3| crossmat(&grad(x, z, k));

    let mut m = [[C::new(0.0, 0.0); 12]; 12];
    put(&mut m, 0, 0, &scale(&mul(&t.p011, &y(m1, j1)), r1_dy));
    put(&mut m, 0, 1, &scale(&mul(&t.p011, &g(m1, j1)), r1_gr));
    put(&mut m, 0, 2, &scale(&mul(&t.p011, &y(m1, j2)), r1_dy));
    put(&mut m, 0, 3, &scale(&mul(&t.p011, &g(m1, j2)), r1_gr));
    put(&mut m, 1, 0, &scale(&mul(&t.p012, &g(m1, j1)), r2));
    put(&mut m, 1, 1, &scale(&mul(&t.p012, &y(m1, j1)), r2));
    put(&mut m, 1, 2, &scale(&mul(&t.p012, &g(m1, j2)), r2));
    put(&mut m, 1, 3, &scale(&mul(&t.p012, &y(m1, j2)), r2));
    put(&mut m, 2, 0, &scale(&mul(&t.p021, &y(m2, j1)), r3_k4));
    put(&mut m, 2, 1, &scale(&mul(&t.p021, &g(m2, j1)), r3_k2));
    put(&mut m, 2, 2, &scale(&mul(&t.p021, &y(m2, j2)), r3_k4));
    put(&mut m, 2, 3, &scale(&mul(&t.p021, &g(m2, j2)), r3_k2));
    put(&mut m, 3, 0, &scale(&mul(&t.p022, &g(m2, j1)), r4));
    put(&mut m, 3, 1, &scale(&mul(&t.p022, &y(m2, j1)), r4));
    put(&mut m, 3, 2, &scale(&mul(&t.p022, &g(m2, j2)), r4));
    put(&mut m, 3, 3, &scale(&mul(&t.p022, &y(m2, j2)), r4));
    m
}

/// `(E, H)` of the plane wave `p e^{ikθ·x}`.
pub fn plane_wave(x: &P3, theta: &P3, p: &P3, k: f64) -> (V3, V3) {
    let ph = (J * k * (theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2])).exp();
    let h = [
        theta[1] * p[2] - theta[2] * p[1],
        theta[2] * p[0] - theta[0] * p[2],
        theta[0] * p[1] - theta[1] * p[0],
    ];
    ([ph * p[0], ph * p[1], ph * p[2]], [ph * h[0], ph * h[1], ph * h[2]])
}

pub fn source(z1: &P3, z2: &P3, theta: &P3, pol: &P3, s: &Scalars, t: &Tensors) -> [C; 12] {
    let k = s.k;
    let res = s.a.powf(3.0 - s.h);
    let (e1, h1) = plane_wave(z1, theta, pol, k);
    let (e2, h2) = plane_wave(z2, theta, pol, k);
    let v1 = mulv(&scale(&t.p011, J * k * s.eta0 / s.c0s * res), &h1);
    let v2 = mulv(&scale(&t.p012, C::from(s.a.powi(3))), &e1);
    let v3 = mulv(&scale(&t.p021, J * k * s.a.powi(5)), &h2);
    let v4 = mulv(&scale(&t.p022, s.eta2 / s.d0s * res), &e2);
    let mut out = [C::new(0.0, 0.0); 12];
    for i in 0..3 {
        out[i] = v1[i];
        out[3 + i] = v2[i];
        out[6 + i] = v3[i];
        out[9 + i] = v4[i];
    }
    out
}

/// Reduced single-dimer matrix.
pub fn a_block(z1: &P3, z2: &P3, s: &Scalars, t: &Tensors) -> M6 {
    let k = s.k;
    let inv_res = s.a.powf(s.h - 3.0);
    let g = crossmat(&grad(z1, z2, k));
    let mut m = [[C::new(0.0, 0.0); 6]; 6];
    put(&mut m, 0, 0, &scale(&inv3(&t.p011), inv_res * s.c0s / (J * k * s.eta0)));
    put(&mut m, 0, 1, &scale(&g, J * k));
    put(&mut m, 1, 0, &scale(&g, C::from(-k * k)));
    put(&mut m, 1, 1, &scale(&inv3(&t.p022), inv_res * s.d0s / s.eta2));
    m
}

/// Reduced pair block.
pub fn c_block(m1: &P3, m2: &P3, j1: &P3, j2: &P3, k: f64) -> M6 {
    let mut m = [[C::new(0.0, 0.0); 6]; 6];
    put(&mut m, 0, 0, &scale(&dyadic(m1, j1, k), -J * k * k * k));
    put(&mut m, 0, 1, &scale(&crossmat(&grad(m1, j2, k)), -J * k));
    put(&mut m, 1, 0, &scale(&crossmat(&grad(m2, j1, k)), C::from(k * k)));
    put(&mut m, 1, 1, &scale(&dyadic(m2, j2, k), C::from(k * k)));
    m
}

pub fn reduced_source(z1: &P3, z2: &P3, theta: &P3, pol: &P3, k: f64) -> [C; 6] {
    let (_, h1) = plane_wave(z1, theta, pol, k);
    let (e2, _) = plane_wave(z2, theta, pol, k);
    [h1[0], h1[1], h1[2], e2[0], e2[1], e2[2]]
}
