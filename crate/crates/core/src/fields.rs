//! Incident plane waves, scattered and far fields of solved moments, and
//! quadrature over the unit sphere.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{FullMoments, ReducedMoments};
use crate::geometry::ClusterGeometry;
use crate::kernels::{complexify, Helmholtz, KernelError, Mat3C, Vec3C, Vec3R};

const I: Complex64 = Complex64::new(0.0, 1.0);
const UNIT_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FieldsError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{what} must be a unit vector (|v| = {norm})")]
    NonUnitVector { what: &'static str, norm: f64 },
    #[error("polarization is not transverse to the incident direction (theta . p = {dot:e})")]
    NonTransversePolarization { dot: f64 },
    #[error("observation point is {distance:.3e} from a particle center, inside the exclusion radius {radius:.3e}")]
    ObservationTooClose { distance: f64, radius: f64 },
    #[error("quadrature grid needs n_theta, n_phi >= 2 (got {n_theta} x {n_phi})")]
    GridTooSmall { n_theta: usize, n_phi: usize },
}

fn check_unit(v: &Vec3R, what: &'static str) -> Result<(), FieldsError> {
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(FieldsError::NonUnitVector { what, norm });
    }
    Ok(())
}

/// Plane wave `E = p e^{ikθ·x}`, `H = (θ×p) e^{ikθ·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    theta: Vec3R,
    p: Vec3R,
    k: f64,
}

impl IncidentWave {
    pub fn new(theta: Vec3R, p: Vec3R, k: f64) -> Result<Self, FieldsError> {
        check_unit(&theta, "incident direction")?;
        check_unit(&p, "polarization")?;
        let w = IncidentWave { theta, p, k };
        w.check_transverse()?;
        Ok(w)
    }

    /// Direction from spherical angles `(polar, azimuth)`; polarization at
    /// angle `psi` from `e_θ` towards `e_φ` in the transverse plane.
    pub fn from_angles(polar: f64, azimuth: f64, psi: f64, k: f64) -> Result<Self, FieldsError> {
        let (st, ct) = polar.sin_cos();
        let (sp, cp) = azimuth.sin_cos();
        let dir = Vec3R::new(st * cp, st * sp, ct);
        let e_theta = Vec3R::new(ct * cp, ct * sp, -st);
        let e_phi = Vec3R::new(-sp, cp, 0.0);
        let pol = e_theta * psi.cos() + e_phi * psi.sin();
        IncidentWave::new(dir.normalize(), pol.normalize(), k)
    }

    pub fn direction(&self) -> &Vec3R {
        &self.theta
    }

    pub fn polarization(&self) -> &Vec3R {
        &self.p
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn check_transverse(&self) -> Result<(), FieldsError> {
        let dot = self.theta.dot(&self.p);
        if dot.abs() > UNIT_TOL {
            return Err(FieldsError::NonTransversePolarization { dot });
        }
        Ok(())
    }
}

/// `(E^Inc(x), H^Inc(x))`.
pub fn incident_fields(w: &IncidentWave, x: &Vec3R) -> Result<(Vec3C, Vec3C), FieldsError> {
    w.check_transverse()?;
    let phase = (I * w.k * w.theta.dot(x)).exp();
    let e = complexify(&w.p) * phase;
    let h = complexify(&w.theta.cross(&w.p)) * phase;
    Ok((e, h))
}

/// Wavenumber and observation guard for field evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldContext {
    pub k: f64,
    /// Minimum distance from any particle center, `2a` by default.
    pub exclusion_radius: f64,
}

impl FieldContext {
    pub fn new(k: f64, a: f64) -> Self {
        FieldContext { k, exclusion_radius: 2.0 * a }
    }

    fn kernel(&self) -> Helmholtz {
        Helmholtz::new(self.k)
    }

    fn check_clear<'a>(&self, x: &Vec3R, sites: impl IntoIterator<Item = &'a Vec3R>) -> Result<(), FieldsError> {
        for z in sites {
            let distance = (x - z).norm();
            if distance < self.exclusion_radius {
                return Err(FieldsError::ObservationTooClose { distance, radius: self.exclusion_radius });
            }
        }
        Ok(())
    }

    /// `∇_yΦ_k(x, z) × Q - Υ_k(x, z)·R` for one particle.
    fn particle_term(&self, x: &Vec3R, z: &Vec3R, q: &Vec3C, r: &Vec3C) -> Result<Vec3C, FieldsError> {
        let kernel = self.kernel();
        let grad_y = kernel.grad_phi(z, x)?;
        Ok(grad_y.cross(q) - kernel.upsilon(x, z)? * r)
    }
}

/// Scattered field of the full model:
/// `E^s(x) = -k² Σ_m Σ_ℓ [∇_yΦ_k(x, z_mℓ) × Q_mℓ - Υ_k(x, z_mℓ)·R_mℓ]`.
pub fn scattered_field(x: &Vec3R, m: &FullMoments, g: &ClusterGeometry, ctx: &FieldContext) -> Result<Vec3C, FieldsError> {
    assert_eq!(m.len(), g.len(), "moments do not match geometry");
    ctx.check_clear(x, g.dimers().iter().flat_map(|d| [&d.z1, &d.z2]))?;
    let mut sum = Vec3C::zeros();
    for (i, d) in g.dimers().iter().enumerate() {
        sum += ctx.particle_term(x, &d.z1, &m.q1(i), &m.r1(i))?;
        sum += ctx.particle_term(x, &d.z2, &m.q2(i), &m.r2(i))?;
    }
    Ok(sum * Complex64::from(-ctx.k * ctx.k))
}

/// Scattered field of the reduced model, kernels anchored at midpoints.
pub fn reduced_scattered_field(
    x: &Vec3R,
    m: &ReducedMoments,
    g: &ClusterGeometry,
    ctx: &FieldContext,
) -> Result<Vec3C, FieldsError> {
    assert_eq!(m.len(), g.len(), "moments do not match geometry");
    ctx.check_clear(x, g.dimers().iter().flat_map(|d| [&d.z1, &d.z2, &d.z0]))?;
    let mut sum = Vec3C::zeros();
    for (i, d) in g.dimers().iter().enumerate() {
        sum += ctx.particle_term(x, &d.z0, &m.q1(i), &m.r2(i))?;
    }
    Ok(sum * Complex64::from(-ctx.k * ctx.k))
}

/// Normalization of the far-field pattern.
///
/// `RadialLimit` is the limit `|x| e^{-ik|x|} E^s(|x| x̂)` of the scattered
/// field formulas above:
/// `k²/(4π) Σ e^{-ikx̂·z}[ik x̂×Q + (I - x̂x̂)R]`.
///
/// `AsPrinted` is the moment expansion in its published form,
/// `Σ e^{-ikx̂·z}[-ik x̂×Q + (I - x̂x̂)R]`, which differs from the radial limit
/// by the factor `k²/(4π)` and the sign of the magnetic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarFieldConvention {
    #[default]
    RadialLimit,
    AsPrinted,
}

fn transverse_projector(xhat: &Vec3R) -> Mat3C {
    (Matrix3::<f64>::identity() - xhat * xhat.transpose()).map(Complex64::from)
}

/// `(scale, magnetic sign)` such that a particle contributes
/// `scale · e^{-ikx̂·z}[sign·ik x̂×Q + (I - x̂x̂)R]`.
fn convention_factors(k: f64, conv: FarFieldConvention) -> (f64, f64) {
    match conv {
        FarFieldConvention::RadialLimit => (k * k / (4.0 * PI), 1.0),
        FarFieldConvention::AsPrinted => (1.0, -1.0),
    }
}

fn far_term(xhat: &Vec3R, z: &Vec3R, q: &Vec3C, r: &Vec3C, k: f64, sign: f64, proj: &Mat3C) -> Vec3C {
    let phase = (-I * k * xhat.dot(z)).exp();
    let xc = complexify(xhat);
    (xc.cross(q) * (I * k * sign) + proj * r) * phase
}

pub fn far_field(
    xhat: &Vec3R,
    m: &FullMoments,
    g: &ClusterGeometry,
    k: f64,
    conv: FarFieldConvention,
) -> Result<Vec3C, FieldsError> {
    check_unit(xhat, "far-field direction")?;
    assert_eq!(m.len(), g.len(), "moments do not match geometry");
    let (scale, sign) = convention_factors(k, conv);
    let proj = transverse_projector(xhat);
    let mut sum = Vec3C::zeros();
    for (i, d) in g.dimers().iter().enumerate() {
        sum += far_term(xhat, &d.z1, &m.q1(i), &m.r1(i), k, sign, &proj);
        sum += far_term(xhat, &d.z2, &m.q2(i), &m.r2(i), k, sign, &proj);
    }
    Ok(sum * Complex64::from(scale))
}

pub fn reduced_far_field(
    xhat: &Vec3R,
    m: &ReducedMoments,
    g: &ClusterGeometry,
    k: f64,
    conv: FarFieldConvention,
) -> Result<Vec3C, FieldsError> {
    check_unit(xhat, "far-field direction")?;
    assert_eq!(m.len(), g.len(), "moments do not match geometry");
    let (scale, sign) = convention_factors(k, conv);
    let proj = transverse_projector(xhat);
    let mut sum = Vec3C::zeros();
    for (i, d) in g.dimers().iter().enumerate() {
        sum += far_term(xhat, &d.z0, &m.q1(i), &m.r2(i), k, sign, &proj);
    }
    Ok(sum * Complex64::from(scale))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product rule on the sphere: Gauss–Legendre in `cos θ`, trapezoid in `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub directions: Vec<Vec3R>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self, FieldsError> {
        if n_theta < 2 || n_phi < 2 {
            return Err(FieldsError::GridTooSmall { n_theta, n_phi });
        }
        let (nodes, gl_weights) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut grid = SphereGrid { theta: vec![], phi: vec![], directions: vec![], weights: vec![] };
        for (ct, w) in nodes.iter().zip(&gl_weights) {
            let theta = ct.acos();
            let st = (1.0 - ct * ct).sqrt();
            for j in 0..n_phi {
                let phi = j as f64 * dphi;
                grid.theta.push(theta);
                grid.phi.push(phi);
                grid.directions.push(Vec3R::new(st * phi.cos(), st * phi.sin(), *ct).normalize());
                grid.weights.push(w * dphi);
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Evaluates `f` at every node.
    pub fn sample<F>(&self, f: F) -> Result<FarFieldPattern, FieldsError>
    where
        F: Fn(&Vec3R) -> Result<Vec3C, FieldsError> + Sync,
    {
        let values = self.directions.par_iter().map(&f).collect::<Result<Vec<_>, _>>()?;
        Ok(FarFieldPattern { grid: self.clone(), values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub grid: SphereGrid,
    pub values: Vec<Vec3C>,
}

impl FarFieldPattern {
    pub fn directions(&self) -> &[Vec3R] {
        &self.grid.directions
    }

    /// Writes `theta, phi, re/im of each component, |E∞|²` per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,phi,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez,intensity")?;
        for (i, e) in self.values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.grid.theta[i],
                self.grid.phi[i],
                e.x.re,
                e.x.im,
                e.y.re,
                e.y.im,
                e.z.re,
                e.z.im,
                e.norm_squared()
            )?;
        }
        Ok(())
    }
}

pub fn far_field_grid(
    m: &FullMoments,
    g: &ClusterGeometry,
    k: f64,
    conv: FarFieldConvention,
    n_theta: usize,
    n_phi: usize,
) -> Result<FarFieldPattern, FieldsError> {
    SphereGrid::new(n_theta, n_phi)?.sample(|x| far_field(x, m, g, k, conv))
}

pub fn reduced_far_field_grid(
    m: &ReducedMoments,
    g: &ClusterGeometry,
    k: f64,
    conv: FarFieldConvention,
    n_theta: usize,
    n_phi: usize,
) -> Result<FarFieldPattern, FieldsError> {
    SphereGrid::new(n_theta, n_phi)?.sample(|x| reduced_far_field(x, m, g, k, conv))
}

/// Quadrature approximation of `∫_{S²} |E∞|² dΩ`.
pub fn scattering_cross_section(pat: &FarFieldPattern) -> f64 {
    pat.values.iter().zip(&pat.grid.weights).map(|(e, w)| w * e.norm_squared()).sum()
}
