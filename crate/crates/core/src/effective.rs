//! Dimer polarizability, local fields, susceptibilities and effective
//! constitutive tensors of a cluster of identical, identically oriented
//! dimers.
//!
//! Block order is `(H, E)` throughout: a [`Polarizability6`] is
//! `[[α_HH, α_HE], [α_EH, α_EE]]`, matching the reduced unknowns `(Q̊₁, R̊₂)`
//! and sources `(H^Inc, E^Inc)`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble_a_for, block3, AssemblyError, Block6, ReducedMoments, ReducedSystem, Vec6};
use crate::kernels::{cross_matrix, Helmholtz, KernelError, Mat3C, Vec3R};
use crate::materials::{check_regime, spectral_norm, ModelParams, PolarizationTensors};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EffectiveError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("single-dimer matrix is numerically singular (sigma_min/sigma_max = {ratio:.3e})")]
    SingularA { ratio: f64 },
    #[error("intra-dimer vector has length {actual:.6e}, expected alpha0*a^t1 = {expected:.6e}")]
    SeparationMismatch { actual: f64, expected: f64 },
    #[error("a = {a:e} violates the admissible regime")]
    RegimeViolation { a: f64 },
    #[error("sweep needs at least 4 values of a spanning one decade")]
    InsufficientSweep,
    #[error("orientation must be a nonzero vector")]
    ZeroOrientation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability6 {
    pub matrix: Block6,
}

impl Polarizability6 {
    pub fn from_blocks(hh: &Mat3C, he: &Mat3C, eh: &Mat3C, ee: &Mat3C) -> Self {
        let mut matrix = Block6::zeros();
        matrix.fixed_view_mut::<3, 3>(0, 0).copy_from(hh);
        matrix.fixed_view_mut::<3, 3>(0, 3).copy_from(he);
        matrix.fixed_view_mut::<3, 3>(3, 0).copy_from(eh);
        matrix.fixed_view_mut::<3, 3>(3, 3).copy_from(ee);
        Polarizability6 { matrix }
    }

    pub fn hh(&self) -> Mat3C {
        block3(&self.matrix, 0, 0)
    }
    pub fn he(&self) -> Mat3C {
        block3(&self.matrix, 0, 1)
    }
    pub fn eh(&self) -> Mat3C {
        block3(&self.matrix, 1, 0)
    }
    pub fn ee(&self) -> Mat3C {
        block3(&self.matrix, 1, 1)
    }
}

/// `𝒫 = 𝔸⁻¹`.
pub fn dimer_polarizability(a: &Block6) -> Result<Polarizability6, EffectiveError> {
    let sv = a.singular_values();
    let ratio = sv.min() / sv.max();
    if !(ratio > 1e-12) {
        return Err(EffectiveError::SingularA { ratio });
    }
    let matrix = a.try_inverse().ok_or(EffectiveError::SingularA { ratio })?;
    Ok(Polarizability6 { matrix })
}

/// `ℱ_m^loc = ℱ_m^inc + Σ_{j≠m} ℂ_mj 𝒰_j`.
pub fn local_fields(sol: &ReducedMoments, sys: &ReducedSystem) -> Vec<Vec6> {
    (0..sys.n_blocks()).map(|m| sys.source(m) + sys.interaction(m, sol)).collect()
}

/// `ρ_a = β₀⁻³ a^{-3t₂}`.
pub fn number_density(p: &ModelParams) -> f64 {
    p.beta0.powi(-3) * p.a.powf(-3.0 * p.t2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilitySet {
    pub chi_hh: Mat3C,
    pub chi_he: Mat3C,
    pub chi_eh: Mat3C,
    pub chi_ee: Mat3C,
    pub rho: f64,
}

pub fn susceptibilities(pol: &Polarizability6, rho: f64) -> SusceptibilitySet {
    let r = Complex64::from(rho);
    SusceptibilitySet { chi_hh: pol.hh() * r, chi_he: pol.he() * r, chi_eh: pol.eh() * r, chi_ee: pol.ee() * r, rho }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTensors {
    pub eps_eff: Mat3C,
    pub mu_eff: Mat3C,
    pub xi: Mat3C,
    pub zeta: Mat3C,
    /// `min_{|v|=1} Re(v*·ε_eff·v)`.
    pub min_re_eps: f64,
    /// `min_{|v|=1} Re(v*·μ_eff·v)`.
    pub min_re_mu: f64,
}

impl EffectiveTensors {
    pub fn eps_negative(&self) -> bool {
        self.min_re_eps < 0.0
    }

    pub fn mu_negative(&self) -> bool {
        self.min_re_mu < 0.0
    }

    pub fn double_negative(&self) -> bool {
        self.eps_negative() && self.mu_negative()
    }
}

/// Smallest eigenvalue of the Hermitian part `(M + M*)/2`.
pub fn min_hermitian_eigenvalue(m: &Mat3C) -> f64 {
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    h.symmetric_eigenvalues().min()
}

pub fn effective_tensors(chi: &SusceptibilitySet, p: &ModelParams) -> EffectiveTensors {
    let id = Mat3C::identity();
    let eps = Complex64::from(p.eps0);
    let mu = Complex64::from(p.mu0);
    let eps_eff = (id + chi.chi_ee) * eps;
    let mu_eff = (id + chi.chi_hh) * mu;
    EffectiveTensors {
        eps_eff,
        mu_eff,
        xi: chi.chi_eh * eps,
        zeta: chi.chi_he * mu,
        min_re_eps: min_hermitian_eigenvalue(&eps_eff),
        min_re_mu: min_hermitian_eigenvalue(&mu_eff),
    }
}

/// Leading-order closed forms of `𝔸⁻¹` for a dimer with `z₂ - z₁ = d_in_vec`.
///
/// The off-diagonal prefactors use the unsigned product `c₀d₀`.
pub fn dominant_polarizability(
    p: &ModelParams,
    t: &PolarizationTensors,
    d_in_vec: &Vec3R,
) -> Result<Polarizability6, EffectiveError> {
    let expected = p.d_in();
    let actual = d_in_vec.norm();
    if (actual - expected).abs() > 1e-9 * expected {
        return Err(EffectiveError::SeparationMismatch { actual, expected });
    }
    let g = cross_matrix(&Helmholtz::new(p.k).grad_phi(&Vec3R::zeros(), d_in_vec)?);
    let resonant = p.a.powf(3.0 - p.h);
    let coupled = p.eta0 * p.eta2 / (p.c0 * p.d0) * p.a.powf(6.0 - 2.0 * p.h);
    let hh = t.p011 * (I * p.k * p.eta0 / p.signed_c0() * resonant);
    let ee = t.p022 * (p.eta2 / p.signed_d0() * resonant);
    let he = t.p011 * g * t.p022 * (coupled * p.k.powi(2));
    let eh = t.p022 * g * t.p011 * (coupled * I * p.k.powi(3));
    Ok(Polarizability6::from_blocks(&hh, &he, &eh, &ee))
}

/// Which polarizability feeds a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPath {
    Dominant,
    FullInverse,
}

/// Polarizability of one dimer along `orientation`, by either path.
pub fn polarizability_for(
    p: &ModelParams,
    t: &PolarizationTensors,
    orientation: &Vec3R,
    path: SweepPath,
) -> Result<Polarizability6, EffectiveError> {
    let n = orientation.norm();
    if !(n > 0.0) {
        return Err(EffectiveError::ZeroOrientation);
    }
    let d = orientation / n * p.d_in();
    match path {
        SweepPath::Dominant => dominant_polarizability(p, t, &d),
        SweepPath::FullInverse => dimer_polarizability(&assemble_a_for(&Vec3R::zeros(), &d, p, t)?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub chi_hh: f64,
    pub chi_he: f64,
    pub chi_eh: f64,
    pub chi_ee: f64,
    pub min_re_eps: f64,
    pub min_re_mu: f64,
    pub eps_negative: bool,
    pub mu_negative: bool,
}

/// Least-squares line `log‖χ‖ = slope·log a + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute regression residual.
    pub max_residual: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> SlopeFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx.iter().zip(&ly).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    SlopeFit { slope, intercept, max_residual }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub path: SweepPath,
    pub rows: Vec<SweepRow>,
    pub fit_hh: SlopeFit,
    pub fit_he: SlopeFit,
    pub fit_eh: SlopeFit,
    pub fit_ee: SlopeFit,
}

/// Predicted exponents `(3 - h - 3t₂, 6 - 2h - 2t₁ - 3t₂)`.
pub fn predicted_exponents(p: &ModelParams) -> (f64, f64) {
    (3.0 - p.h - 3.0 * p.t2, 6.0 - 2.0 * p.h - 2.0 * p.t1 - 3.0 * p.t2)
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a,chi_hh,chi_he,chi_eh,chi_ee,min_re_eps,min_re_mu,eps_negative,mu_negative")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.a, r.chi_hh, r.chi_he, r.chi_eh, r.chi_ee, r.min_re_eps, r.min_re_mu, r.eps_negative, r.mu_negative
            )?;
        }
        Ok(())
    }
}

/// Sweeps `a` with every other parameter of `template` fixed and fits the
/// log-log slopes of the four susceptibility blocks.
pub fn scaling_sweep(
    template: &ModelParams,
    t: &PolarizationTensors,
    a_values: &[f64],
    path: SweepPath,
    orientation: &Vec3R,
) -> Result<SweepResult, EffectiveError> {
    let (lo, hi) = a_values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    if a_values.len() < 4 || !(lo > 0.0) || hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(EffectiveError::InsufficientSweep);
    }
    let rows = a_values
        .par_iter()
        .map(|&a| {
            let p = template.with_a(a);
            if !check_regime(&p).all_pass {
                return Err(EffectiveError::RegimeViolation { a });
            }
            let pol = polarizability_for(&p, t, orientation, path)?;
            let chi = susceptibilities(&pol, number_density(&p));
            let eff = effective_tensors(&chi, &p);
            Ok(SweepRow {
                a,
                chi_hh: spectral_norm(&chi.chi_hh),
                chi_he: spectral_norm(&chi.chi_he),
                chi_eh: spectral_norm(&chi.chi_eh),
                chi_ee: spectral_norm(&chi.chi_ee),
                min_re_eps: eff.min_re_eps,
                min_re_mu: eff.min_re_mu,
                eps_negative: eff.eps_negative(),
                mu_negative: eff.mu_negative(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.a).collect();
    let fit = |f: fn(&SweepRow) -> f64| fit_loglog(&xs, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(SweepResult {
        path,
        fit_hh: fit(|r| r.chi_hh),
        fit_he: fit(|r| r.chi_he),
        fit_eh: fit(|r| r.chi_eh),
        fit_ee: fit(|r| r.chi_ee),
        rows,
    })
}

/// Real 6×6 embedding `[[Re, -Im], [Im, Re]]` of a complex 3×3 matrix.
#[cfg(test)]
fn realify(m: &Mat3C) -> nalgebra::Matrix6<f64> {
    let mut r = nalgebra::Matrix6::zeros();
    let re: nalgebra::Matrix3<f64> = m.map(|z| z.re);
    let im: nalgebra::Matrix3<f64> = m.map(|z| z.im);
    r.fixed_view_mut::<3, 3>(0, 0).copy_from(&re);
    r.fixed_view_mut::<3, 3>(0, 3).copy_from(&-im);
    r.fixed_view_mut::<3, 3>(3, 0).copy_from(&im);
    r.fixed_view_mut::<3, 3>(3, 3).copy_from(&re);
    r
}
