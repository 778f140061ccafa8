//! Material contrasts, polarization tensors and the regime conditions under
//! which the dimer model is valid and its block system invertible.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::ScalingParams;
use crate::kernels::Mat3C;

/// Tolerance on `Im(η₀)` for the real-wavenumber resonance formula.
pub const REAL_ETA0_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MaterialsError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("resonance radicand {value} is not positive")]
    NonPositiveRadicand { value: f64 },
    #[error("resonance formula needs real eta0, got Im(eta0) = {im:e}")]
    ComplexEta0Unsupported { im: f64 },
}

/// Branch of the `±c₀aʰ`, `±d₀aʰ` resonance detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub h: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub k: f64,
    pub eta0: Complex64,
    pub eta2: Complex64,
    pub c0: f64,
    pub d0: f64,
    pub sign_c: Sign,
    pub sign_d: Sign,
    pub eps0: f64,
    pub mu0: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), MaterialsError> {
        let bad = |m: String| Err(MaterialsError::InvalidParams(m));
        if !(self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.eta0.re > 0.0) {
            return bad(format!("Re(eta0) must be positive, got {}", self.eta0.re));
        }
        if !(self.c0 > 0.0 && self.d0 > 0.0) {
            return bad(format!("c0, d0 must be positive, got {}, {}", self.c0, self.d0));
        }
        if !(self.eps0 > 0.0 && self.mu0 > 0.0) {
            return bad("eps0, mu0 must be positive".into());
        }
        let finite = [self.h, self.t1, self.t2, self.alpha0, self.beta0, self.k];
        if finite.iter().any(|v| !v.is_finite()) || !self.eta2.is_finite() || !self.eta0.is_finite() {
            return bad("non-finite parameter".into());
        }
        Ok(())
    }

    /// `η₁ = η₀ a⁻²`.
    pub fn eta1(&self) -> Complex64 {
        self.eta0 / (self.a * self.a)
    }

    pub fn scaling(&self) -> ScalingParams {
        ScalingParams { a: self.a, t1: self.t1, t2: self.t2, alpha0: self.alpha0, beta0: self.beta0 }
    }

    pub fn d_in(&self) -> f64 {
        self.scaling().d_in()
    }

    pub fn d_out(&self) -> f64 {
        self.scaling().d_out()
    }

    /// Signed `±c₀`.
    pub fn signed_c0(&self) -> f64 {
        self.sign_c.value() * self.c0
    }

    /// Signed `±d₀`.
    pub fn signed_d0(&self) -> f64 {
        self.sign_d.value() * self.d0
    }

    /// Same parameters at another particle size.
    pub fn with_a(&self, a: f64) -> Self {
        ModelParams { a, ..*self }
    }
}

/// The four 3×3 polarization tensors `P₀,₁⁽¹⁾, P₀,₁⁽²⁾, P₀,₂⁽¹⁾, P₀,₂⁽²⁾`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationTensors {
    pub p011: Mat3C,
    pub p012: Mat3C,
    pub p021: Mat3C,
    pub p022: Mat3C,
}

impl PolarizationTensors {
    pub fn isotropic(c011: Complex64, c012: Complex64, c021: Complex64, c022: Complex64) -> Self {
        PolarizationTensors {
            p011: isotropic_tensor(c011),
            p012: isotropic_tensor(c012),
            p021: isotropic_tensor(c021),
            p022: isotropic_tensor(c022),
        }
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::isotropic(z, z, z, z)
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::isotropic(one, one, one, one)
    }
}

pub fn isotropic_tensor(c: Complex64) -> Mat3C {
    Mat3C::identity() * c
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat3C) -> f64 {
    m.singular_values().max()
}

/// Solves `1 - k²η₁a²λ = ±c₀aʰ` for a real `k`:
/// `k² = (1 - (±c₀)aʰ) / (η₀λ)` with the sign taken from `sign_c`.
pub fn wavenumber_from_resonance(lambda_n0: f64, p: &ModelParams) -> Result<f64, MaterialsError> {
    if p.eta0.im.abs() > REAL_ETA0_TOL {
        return Err(MaterialsError::ComplexEta0Unsupported { im: p.eta0.im });
    }
    if !(lambda_n0 > 0.0) {
        return Err(MaterialsError::InvalidParams(format!("lambda_n0 must be positive, got {lambda_n0}")));
    }
    let radicand = (1.0 - p.signed_c0() * p.a.powf(p.h)) / (p.eta0.re * lambda_n0);
    if !(radicand > 0.0) {
        return Err(MaterialsError::NonPositiveRadicand { value: radicand });
    }
    Ok(radicand.sqrt())
}

/// One inequality of a regime check with the values that decided it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub value: f64,
    /// Upper bound for `value` (lower bound where noted in `name`).
    pub bound: f64,
    /// Positive iff the condition holds.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub conditions: Vec<Condition>,
    pub all_pass: bool,
}

impl RegimeReport {
    fn new(conditions: Vec<Condition>) -> Self {
        let all_pass = conditions.iter().all(|c| c.pass);
        RegimeReport { conditions, all_pass }
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Upper end of the admissible `h` window, `min{2, 5 - 8t₁}`.
pub fn h_upper(t1: f64) -> f64 {
    2.0f64.min(5.0 - 8.0 * t1)
}

/// Checks `0 < t₂ ≤ t₁ < 1`, `9/5 < h < min{2, 5-8t₁}` and
/// `k⁴/((4π)⁴c₀²d₀²) < 1`.
pub fn check_regime(p: &ModelParams) -> RegimeReport {
    let t_margin = p.t2.min(p.t1 - p.t2).min(1.0 - p.t1);
    let t_ok = 0.0 < p.t2 && p.t2 <= p.t1 && p.t1 < 1.0;
    let upper = h_upper(p.t1);
    let h_margin = (p.h - 1.8).min(upper - p.h);
    let contrast = p.k.powi(4) / ((4.0 * PI).powi(4) * p.c0 * p.c0 * p.d0 * p.d0);
    RegimeReport::new(vec![
        Condition { name: "exponents: 0 < t2 <= t1 < 1", value: p.t2, bound: p.t1, margin: t_margin, pass: t_ok },
        Condition { name: "window: 9/5 < h < min(2, 5-8*t1)", value: p.h, bound: upper, margin: h_margin, pass: 1.8 < p.h && p.h < upper },
        Condition { name: "contrast: k^4/((4pi)^4 c0^2 d0^2) < 1", value: contrast, bound: 1.0, margin: 1.0 - contrast, pass: contrast < 1.0 },
    ])
}

/// The two smallness bounds `L1 < 1`, `L2 < 1` that make the block system
/// invertible. `L2` is reported as `+∞` when `L1 ≥ 1`.
pub fn invertibility_bounds(p: &ModelParams, t: &PolarizationTensors) -> (f64, f64) {
    let k2 = p.k * p.k;
    let n011 = spectral_norm(&t.p011);
    let n022 = spectral_norm(&t.p022);
    let eta0 = p.eta0.norm();
    let eta2 = p.eta2.norm();
    let size = p.a.powf(3.0 - p.h);
    let l1 = k2 / 2.0 * (k2 * eta0 / p.c0 * n011 + eta2 / p.d0 * n022) * size * p.d_in().powi(-3);
    let l2 = if l1 < 1.0 {
        k2 * (k2.max(1.0) * eta0 / p.c0 * n011 + eta2 / p.d0 * n022) / (1.0 - l1) * size * p.d_out().powi(-3)
    } else {
        f64::INFINITY
    };
    (l1, l2)
}

pub fn check_invertibility(p: &ModelParams, t: &PolarizationTensors) -> RegimeReport {
    let (l1, l2) = invertibility_bounds(p, t);
    RegimeReport::new(vec![
        Condition { name: "invertibility: L1 < 1", value: l1, bound: 1.0, margin: 1.0 - l1, pass: l1 < 1.0 },
        Condition { name: "invertibility: L2 < 1", value: l2, bound: 1.0, margin: 1.0 - l2, pass: l2 < 1.0 },
    ])
}
