//! Free-space Helmholtz kernels.
//!
//! Everything here is a closed-form function of two points and a wavenumber:
//! the scalar fundamental solution `Φ_k(x, y) = e^{ik|x-y|} / (4π|x-y|)`, its
//! gradient and Hessian with respect to `x`, the dyadic Green's kernel
//! `Υ_k = ∇∇Φ_k / k² + Φ_k I₃` and its static counterpart `Υ₀ = ∇∇Φ₀`.
//!
//! All derivatives are taken with respect to the **first** argument. Callers
//! that need `∇_y Φ_k(x, y)` should use `grad_phi_k(y, x, k)` (the kernel is
//! symmetric, so this is the same thing as `-grad_phi_k(x, y, k)`).

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub type Vec3R = Vector3<f64>;
pub type Vec3C = Vector3<Complex64>;
pub type Mat3C = Matrix3<Complex64>;

/// Distances below this are treated as coincident points.
pub const DEFAULT_R_MIN: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Error, Debug, Clone, Copy, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at coincident points (|x - y| = {distance:.3e} < r_min = {r_min:.3e})")]
    CoincidentPoints { distance: f64, r_min: f64 },
    #[error("dyadic Green's kernel requires a nonzero wavenumber")]
    ZeroWavenumber,
}

/// Helmholtz kernel family for a fixed wavenumber and coincidence guard.
///
/// The wavenumber may be complex (lossy background); the model itself only
/// ever feeds real values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helmholtz {
    pub k: Complex64,
    pub r_min: f64,
}

/// Separation data shared by every kernel evaluation.
struct Separation {
    r: f64,
    unit: Vec3R,
}

impl Helmholtz {
    pub fn new(k: impl Into<Complex64>) -> Self {
        Helmholtz { k: k.into(), r_min: DEFAULT_R_MIN }
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    fn separation(&self, x: &Vec3R, y: &Vec3R) -> Result<Separation, KernelError> {
        let d = x - y;
        let r = d.norm();
        if !(r >= self.r_min) {
            return Err(KernelError::CoincidentPoints { distance: r, r_min: self.r_min });
        }
        Ok(Separation { r, unit: d / r })
    }

    fn phi_at(&self, r: f64) -> Complex64 {
        (I * self.k * r).exp() / (4.0 * PI * r)
    }

    pub fn phi(&self, x: &Vec3R, y: &Vec3R) -> Result<Complex64, KernelError> {
        let s = self.separation(x, y)?;
        Ok(self.phi_at(s.r))
    }

    /// `∇_x Φ_k(x, y) = (ik - 1/r) Φ_k (x - y)/r`.
    pub fn grad_phi(&self, x: &Vec3R, y: &Vec3R) -> Result<Vec3C, KernelError> {
        let s = self.separation(x, y)?;
        let radial = (I * self.k - 1.0 / s.r) * self.phi_at(s.r);
        Ok(s.unit.map(|u| radial * u))
    }

    /// Exact Hessian of `e^{ikr}/(4πr)` with respect to `x`:
    /// `Φ [(3/r² - 3ik/r - k²) r̂r̂ᵀ + (ik/r - 1/r²) I]`.
    pub fn hess_phi(&self, x: &Vec3R, y: &Vec3R) -> Result<Mat3C, KernelError> {
        let s = self.separation(x, y)?;
        let phi = self.phi_at(s.r);
        let k = self.k;
        let r = s.r;
        let radial = (3.0 / (r * r) - 3.0 * I * k / r - k * k) * phi;
        let isotropic = (I * k / r - 1.0 / (r * r)) * phi;
        Ok(outer_real(&s.unit).map(|e| radial * e) + Mat3C::identity() * isotropic)
    }

    /// `Υ_k = ∇∇Φ_k / k² + Φ_k I₃`.
    pub fn upsilon(&self, x: &Vec3R, y: &Vec3R) -> Result<Mat3C, KernelError> {
        if self.k == Complex64::new(0.0, 0.0) {
            return Err(KernelError::ZeroWavenumber);
        }
        let hess = self.hess_phi(x, y)?;
        let phi = self.phi(x, y)?;
        Ok(hess / (self.k * self.k) + Mat3C::identity() * phi)
    }
}

fn outer_real(u: &Vec3R) -> Mat3C {
    (u * u.transpose()).map(Complex64::from)
}

pub fn phi_k(x: &Vec3R, y: &Vec3R, k: Complex64) -> Result<Complex64, KernelError> {
    Helmholtz::new(k).phi(x, y)
}

pub fn grad_phi_k(x: &Vec3R, y: &Vec3R, k: Complex64) -> Result<Vec3C, KernelError> {
    Helmholtz::new(k).grad_phi(x, y)
}

pub fn hess_phi_k(x: &Vec3R, y: &Vec3R, k: Complex64) -> Result<Mat3C, KernelError> {
    Helmholtz::new(k).hess_phi(x, y)
}

pub fn upsilon_k(x: &Vec3R, y: &Vec3R, k: Complex64) -> Result<Mat3C, KernelError> {
    Helmholtz::new(k).upsilon(x, y)
}

/// Static dyadic kernel `∇∇(1/(4π|x-y|)) = (3r̂r̂ᵀ - I)/(4πr³)`.
pub fn upsilon_0(x: &Vec3R, y: &Vec3R) -> Result<Mat3C, KernelError> {
    let s = Helmholtz::new(0.0).separation(x, y)?;
    let scale = 1.0 / (4.0 * PI * s.r.powi(3));
    let m = (3.0 * s.unit * s.unit.transpose() - nalgebra::Matrix3::<f64>::identity()) * scale;
    Ok(m.map(Complex64::from))
}

/// Matrix of the operator `w ↦ v × w`.
pub fn cross_matrix(v: &Vec3C) -> Mat3C {
    let z = Complex64::new(0.0, 0.0);
    Mat3C::new(
        z, -v.z, v.y, //
        v.z, z, -v.x, //
        -v.y, v.x, z,
    )
}

/// Real unit vector promoted to complex components.
pub fn complexify(v: &Vec3R) -> Vec3C {
    v.map(Complex64::from)
}
