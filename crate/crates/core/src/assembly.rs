//! Assembly of the Foldy–Lax block systems.
//!
//! The full model couples four 3-vectors per dimer, `𝔘_m = (Q_m1, R_m1, Q_m2,
//! R_m2)`, through 12×12 blocks: the self-interaction `𝔅_m` on the diagonal
//! and the pair interactions `Ψ_mj` off it, with the system read as
//! `𝔅_m 𝔘_m - Σ_{j≠m} Ψ_mj 𝔘_j = S_m`.
//!
//! The reduced model keeps only `(Q̊_m1, R̊_m2)` and has the same shape with
//! 6×6 blocks `𝔸_m` and `ℂ_mj`. Both are stored as [`BlockSystem`].
//!
//! Kernel arguments follow the printed formulas verbatim: pair blocks use the
//! particle centers `z_mℓ`, never the midpoints. Note that rows 3 of `Ψ_mj`
//! carry `k²η₂a⁵` on the gradient blocks `𝒞₃₂, 𝒞₃₄` but `k⁴η₂a⁵` on the
//! dyadic ones, while `𝔅_m` uses `k⁴η₂a⁵` for both `ℬ₃₁` and `ℬ₃₂`. The
//! prefactors are kept exactly as stated.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{incident_fields, FieldsError, IncidentWave};
use crate::geometry::ClusterGeometry;
use crate::kernels::{cross_matrix, Helmholtz, KernelError, Mat3C, Vec3C, Vec3R};
use crate::materials::{ModelParams, PolarizationTensors};

pub type Block12 = SMatrix<Complex64, 12, 12>;
pub type Block6 = SMatrix<Complex64, 6, 6>;
pub type Vec12 = SVector<Complex64, 12>;
pub type Vec6 = SVector<Complex64, 6>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error("pair block requested for m = j = {0}")]
    IndexEqual(usize),
    #[error("dimer index {index} out of range for {len} dimers")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("polarization tensor {0} is numerically singular")]
    SingularTensor(&'static str),
    #[error("incident wavenumber {incident} differs from model wavenumber {model}")]
    WavenumberMismatch { incident: f64, model: f64 },
}

/// Block-structured linear system `diag[m]·x_m - Σ_{j≠m} offdiag[m,j]·x_j = source[m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem<const N: usize> {
    diag: Vec<SMatrix<Complex64, N, N>>,
    /// Row-major over `m`, skipping `j = m`.
    offdiag: Vec<SMatrix<Complex64, N, N>>,
    source: Vec<SVector<Complex64, N>>,
}

/// Full 12ℵ Foldy–Lax system.
pub type FullSystem = BlockSystem<12>;
/// Reduced 6ℵ dipole system.
pub type ReducedSystem = BlockSystem<6>;

impl<const N: usize> BlockSystem<N> {
    /// `offdiag` is indexed row-major over `(m, j)` with the diagonal skipped.
    pub fn from_parts(
        diag: Vec<SMatrix<Complex64, N, N>>,
        offdiag: Vec<SMatrix<Complex64, N, N>>,
        source: Vec<SVector<Complex64, N>>,
    ) -> Self {
        let n = diag.len();
        assert_eq!(source.len(), n, "one source block per dimer");
        assert_eq!(offdiag.len(), n * n.saturating_sub(1), "one pair block per ordered pair");
        BlockSystem { diag, offdiag, source }
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn n_unknowns(&self) -> usize {
        N * self.diag.len()
    }

    fn pair_index(&self, m: usize, j: usize) -> usize {
        debug_assert!(m != j);
        m * (self.n_blocks() - 1) + if j < m { j } else { j - 1 }
    }

    pub fn diag(&self, m: usize) -> &SMatrix<Complex64, N, N> {
        &self.diag[m]
    }

    /// Pair block for `m ≠ j`; panics on `m == j`.
    pub fn offdiag(&self, m: usize, j: usize) -> &SMatrix<Complex64, N, N> {
        assert_ne!(m, j, "no pair block on the diagonal");
        &self.offdiag[self.pair_index(m, j)]
    }

    pub fn source(&self, m: usize) -> &SVector<Complex64, N> {
        &self.source[m]
    }

    pub fn sources(&self) -> &[SVector<Complex64, N>] {
        &self.source
    }

    pub fn with_source(&self, source: Vec<SVector<Complex64, N>>) -> Self {
        assert_eq!(source.len(), self.n_blocks());
        BlockSystem { source, ..self.clone() }
    }

    /// Dense realization: diagonal blocks as stored, pair blocks negated.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.n_blocks();
        let mut a = DMatrix::zeros(N * n, N * n);
        for m in 0..n {
            for j in 0..n {
                let block = if m == j { self.diag[m] } else { -self.offdiag(m, j) };
                a.view_mut((N * m, N * j), (N, N)).copy_from(&block);
            }
        }
        a
    }

    pub fn stacked_source(&self) -> DVector<Complex64> {
        stack(&self.source)
    }

    /// Block-wise product with the system matrix.
    pub fn apply(&self, x: &Moments<N>) -> Moments<N> {
        let n = self.n_blocks();
        assert_eq!(x.len(), n);
        let blocks = (0..n)
            .into_par_iter()
            .map(|m| {
                let mut y = self.diag[m] * x.block(m);
                for j in (0..n).filter(|&j| j != m) {
                    y -= self.offdiag(m, j) * x.block(j);
                }
                y
            })
            .collect();
        Moments::new(blocks)
    }

    /// `Σ_{j≠m} offdiag[m,j]·x_j`, the interaction felt by block `m`.
    pub fn interaction(&self, m: usize, x: &Moments<N>) -> SVector<Complex64, N> {
        (0..self.n_blocks())
            .filter(|&j| j != m)
            .fold(SVector::zeros(), |acc, j| acc + self.offdiag(m, j) * x.block(j))
    }

    /// Euclidean residual `‖A·x - b‖ / ‖b‖` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &Moments<N>) -> f64 {
        let ax = self.apply(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for m in 0..self.n_blocks() {
            num += (ax.block(m) - self.source[m]).norm_squared();
            den += self.source[m].norm_squared();
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Writes the dense matrix as CSV, each row holding `re, im` pairs.
    pub fn write_dense_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let a = self.to_dense();
        for r in 0..a.nrows() {
            let row: Vec<String> = (0..a.ncols()).flat_map(|c| [a[(r, c)].re.to_string(), a[(r, c)].im.to_string()]).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn stack<const N: usize>(blocks: &[SVector<Complex64, N>]) -> DVector<Complex64> {
    DVector::from_iterator(N * blocks.len(), blocks.iter().flat_map(|b| b.iter().copied()))
}

/// Per-dimer unknowns: `(Q_m1, R_m1, Q_m2, R_m2)` for `N = 12`,
/// `(Q̊_m1, R̊_m2)` for `N = 6`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<const N: usize> {
    blocks: Vec<SVector<Complex64, N>>,
}

pub type FullMoments = Moments<12>;
pub type ReducedMoments = Moments<6>;

impl<const N: usize> Moments<N> {
    pub fn new(blocks: Vec<SVector<Complex64, N>>) -> Self {
        Moments { blocks }
    }

    pub fn zeros(n: usize) -> Self {
        Moments { blocks: vec![SVector::zeros(); n] }
    }

    pub fn from_stacked(x: &DVector<Complex64>) -> Self {
        assert_eq!(x.len() % N, 0);
        let blocks = (0..x.len() / N).map(|m| SVector::from_fn(|i, _| x[N * m + i])).collect();
        Moments { blocks }
    }

    pub fn to_stacked(&self) -> DVector<Complex64> {
        stack(&self.blocks)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, m: usize) -> &SVector<Complex64, N> {
        &self.blocks[m]
    }

    pub fn blocks(&self) -> &[SVector<Complex64, N>] {
        &self.blocks
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Moments { blocks: self.blocks.iter().map(|b| b * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Moments { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect() }
    }

    /// Vector slot `s` (three components) of dimer `m`.
    pub fn slot(&self, m: usize, s: usize) -> Vec3C {
        self.blocks[m].fixed_rows::<3>(3 * s).into_owned()
    }

    /// Reorders blocks so that new block `i` is old block `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Moments { blocks: order.iter().map(|&i| self.blocks[i]).collect() }
    }
}

impl FullMoments {
    pub fn q1(&self, m: usize) -> Vec3C {
        self.slot(m, 0)
    }
    pub fn r1(&self, m: usize) -> Vec3C {
        self.slot(m, 1)
    }
    pub fn q2(&self, m: usize) -> Vec3C {
        self.slot(m, 2)
    }
    pub fn r2(&self, m: usize) -> Vec3C {
        self.slot(m, 3)
    }

    /// Builds moments from per-dimer `(Q1, R1, Q2, R2)`.
    pub fn from_slots(slots: &[[Vec3C; 4]]) -> Self {
        let blocks = slots.iter().map(|s| SVector::from_fn(|i, _| s[i / 3][i % 3])).collect();
        Moments { blocks }
    }

    /// The dominant pair `(Q_m1, R_m2)` of every dimer, comparable with the
    /// reduced unknowns.
    pub fn dominant(&self) -> ReducedMoments {
        let blocks = (0..self.len())
            .map(|m| {
                let (q, r) = (self.q1(m), self.r2(m));
                Vec6::new(q.x, q.y, q.z, r.x, r.y, r.z)
            })
            .collect();
        Moments { blocks }
    }
}

impl ReducedMoments {
    pub fn q1(&self, m: usize) -> Vec3C {
        self.slot(m, 0)
    }
    pub fn r2(&self, m: usize) -> Vec3C {
        self.slot(m, 1)
    }

    pub fn from_slots(slots: &[[Vec3C; 2]]) -> Self {
        let blocks = slots.iter().map(|s| SVector::from_fn(|i, _| s[i / 3][i % 3])).collect();
        Moments { blocks }
    }
}

fn set_block<const N: usize>(target: &mut SMatrix<Complex64, N, N>, r: usize, c: usize, b: &Mat3C) {
    target.fixed_view_mut::<3, 3>(3 * r, 3 * c).copy_from(b);
}

/// Reads the 3×3 block `(r, c)` of a block matrix.
pub fn block3<const N: usize>(m: &SMatrix<Complex64, N, N>, r: usize, c: usize) -> Mat3C {
    m.fixed_view::<3, 3>(3 * r, 3 * c).into_owned()
}

/// Scalar prefactors of the block formulas, one per particle/moment row.
#[derive(Debug, Clone, Copy)]
struct Prefactors {
    /// `k⁴η₀/(±c₀) a^{3-h}`
    row1_dyadic: Complex64,
    /// `k²η₀/(±c₀) a^{3-h}`
    row1_grad: Complex64,
    /// `k²a³`
    row2: f64,
    /// `k⁴η₂a⁵`
    row3_k4: Complex64,
    /// `k²η₂a⁵`
    row3_k2: Complex64,
    /// `k²η₂/(±d₀) a^{3-h}`
    row4: Complex64,
}

impl Prefactors {
    fn new(p: &ModelParams) -> Self {
        let k2 = p.k * p.k;
        let k4 = k2 * k2;
        let resonant = p.a.powf(3.0 - p.h);
        let a5 = p.a.powi(5);
        Prefactors {
            row1_dyadic: p.eta0 * (k4 / p.signed_c0() * resonant),
            row1_grad: p.eta0 * (k2 / p.signed_c0() * resonant),
            row2: k2 * p.a.powi(3),
            row3_k4: p.eta2 * (k4 * a5),
            row3_k2: p.eta2 * (k2 * a5),
            row4: p.eta2 * (k2 / p.signed_d0() * resonant),
        }
    }
}

/// `Υ_k(x, y)` and `∇Φ_k(x, y)×` for one ordered pair of sites.
struct PairKernels {
    dyadic: Mat3C,
    cross: Mat3C,
}

impl PairKernels {
    fn new(kernel: &Helmholtz, x: &Vec3R, y: &Vec3R) -> Result<Self, KernelError> {
        Ok(PairKernels { dyadic: kernel.upsilon(x, y)?, cross: cross_matrix(&kernel.grad_phi(x, y)?) })
    }
}

fn check_index(m: usize, g: &ClusterGeometry) -> Result<(), AssemblyError> {
    if m >= g.len() {
        return Err(AssemblyError::IndexOutOfRange { index: m, len: g.len() });
    }
    Ok(())
}

/// Self-interaction block `𝔅_m`.
pub fn assemble_b(m: usize, g: &ClusterGeometry, p: &ModelParams, t: &PolarizationTensors) -> Result<Block12, AssemblyError> {
    check_index(m, g)?;
    let d = g.dimer(m);
    let kernel = Helmholtz::new(p.k);
    let f = Prefactors::new(p);
    let k12 = PairKernels::new(&kernel, &d.z1, &d.z2)?;
    let k21 = PairKernels::new(&kernel, &d.z2, &d.z1)?;

    let mut b = Block12::identity();
    set_block(&mut b, 0, 2, &-(t.p011 * k12.dyadic * f.row1_dyadic));
    set_block(&mut b, 0, 3, &-(t.p011 * k12.cross * f.row1_grad));
    set_block(&mut b, 1, 2, &-(t.p012 * k12.cross * Complex64::from(f.row2)));
    set_block(&mut b, 1, 3, &-(t.p012 * k12.dyadic * Complex64::from(f.row2)));
    set_block(&mut b, 2, 0, &-(t.p021 * k21.dyadic * f.row3_k4));
    set_block(&mut b, 2, 1, &-(t.p021 * k21.cross * f.row3_k4));
    set_block(&mut b, 3, 0, &-(t.p022 * k21.cross * f.row4));
    set_block(&mut b, 3, 1, &-(t.p022 * k21.dyadic * f.row4));
    Ok(b)
}

/// Pair-interaction block `Ψ_mj`, `m ≠ j`.
pub fn assemble_psi(
    m: usize,
    j: usize,
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
) -> Result<Block12, AssemblyError> {
    check_index(m, g)?;
    check_index(j, g)?;
    if m == j {
        return Err(AssemblyError::IndexEqual(m));
    }
    let kernel = Helmholtz::new(p.k);
    let f = Prefactors::new(p);
    let (dm, dj) = (g.dimer(m), g.dimer(j));
    let k11 = PairKernels::new(&kernel, &dm.z1, &dj.z1)?;
    let k12 = PairKernels::new(&kernel, &dm.z1, &dj.z2)?;
    let k21 = PairKernels::new(&kernel, &dm.z2, &dj.z1)?;
    let k22 = PairKernels::new(&kernel, &dm.z2, &dj.z2)?;
    let row2 = Complex64::from(f.row2);

    let mut psi = Block12::zeros();
    set_block(&mut psi, 0, 0, &(t.p011 * k11.dyadic * f.row1_dyadic));
    set_block(&mut psi, 0, 1, &(t.p011 * k11.cross * f.row1_grad));
    set_block(&mut psi, 0, 2, &(t.p011 * k12.dyadic * f.row1_dyadic));
    set_block(&mut psi, 0, 3, &(t.p011 * k12.cross * f.row1_grad));

    set_block(&mut psi, 1, 0, &(t.p012 * k11.cross * row2));
    set_block(&mut psi, 1, 1, &(t.p012 * k11.dyadic * row2));
    set_block(&mut psi, 1, 2, &(t.p012 * k12.cross * row2));
    set_block(&mut psi, 1, 3, &(t.p012 * k12.dyadic * row2));

    set_block(&mut psi, 2, 0, &(t.p021 * k21.dyadic * f.row3_k4));
    set_block(&mut psi, 2, 1, &(t.p021 * k21.cross * f.row3_k2));
    set_block(&mut psi, 2, 2, &(t.p021 * k22.dyadic * f.row3_k4));
    set_block(&mut psi, 2, 3, &(t.p021 * k22.cross * f.row3_k2));

    set_block(&mut psi, 3, 0, &(t.p022 * k21.cross * f.row4));
    set_block(&mut psi, 3, 1, &(t.p022 * k21.dyadic * f.row4));
    set_block(&mut psi, 3, 2, &(t.p022 * k22.cross * f.row4));
    set_block(&mut psi, 3, 3, &(t.p022 * k22.dyadic * f.row4));
    Ok(psi)
}

fn check_wavenumber(p: &ModelParams, inc: &IncidentWave) -> Result<(), AssemblyError> {
    if (inc.k() - p.k).abs() > 1e-12 * p.k.abs().max(1.0) {
        return Err(AssemblyError::WavenumberMismatch { incident: inc.k(), model: p.k });
    }
    Ok(())
}

/// Source vector `S_m` (a column stack of four 3-vectors).
pub fn assemble_source(
    m: usize,
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
    inc: &IncidentWave,
) -> Result<Vec12, AssemblyError> {
    check_index(m, g)?;
    check_wavenumber(p, inc)?;
    inc.check_transverse()?;
    let d = g.dimer(m);
    let (e1, h1) = incident_fields(inc, &d.z1)?;
    let (e2, h2) = incident_fields(inc, &d.z2)?;
    let resonant = p.a.powf(3.0 - p.h);
    let s1 = t.p011 * h1 * (I * p.k * p.eta0 / p.signed_c0() * resonant);
    let s2 = t.p012 * e1 * Complex64::from(p.a.powi(3));
    let s3 = t.p021 * h2 * (I * p.k * p.a.powi(5));
    let s4 = t.p022 * e2 * (p.eta2 / p.signed_d0() * resonant);
    Ok(SVector::from_fn(|i, _| [s1, s2, s3, s4][i / 3][i % 3]))
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|m| (0..n).filter(move |&j| j != m).map(move |j| (m, j))).collect()
}

pub fn assemble_full_system(
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
    inc: &IncidentWave,
) -> Result<FullSystem, AssemblyError> {
    check_wavenumber(p, inc)?;
    let n = g.len();
    let diag = (0..n).map(|m| assemble_b(m, g, p, t)).collect::<Result<Vec<_>, _>>()?;
    let offdiag =
        ordered_pairs(n).into_par_iter().map(|(m, j)| assemble_psi(m, j, g, p, t)).collect::<Result<Vec<_>, _>>()?;
    let source = (0..n).map(|m| assemble_source(m, g, p, t, inc)).collect::<Result<Vec<_>, _>>()?;
    Ok(BlockSystem::from_parts(diag, offdiag, source))
}

/// Inverts a polarization tensor after checking `σ_min > 1e-12·σ_max`.
pub fn invert_tensor(m: &Mat3C, name: &'static str) -> Result<Mat3C, AssemblyError> {
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0 && lo > 1e-12 * hi) {
        return Err(AssemblyError::SingularTensor(name));
    }
    m.try_inverse().ok_or(AssemblyError::SingularTensor(name))
}

/// Single-dimer matrix `𝔸_m` of the reduced model, given the intra-dimer
/// sites. Depends only on `z2 - z1`.
pub fn assemble_a_for(z1: &Vec3R, z2: &Vec3R, p: &ModelParams, t: &PolarizationTensors) -> Result<Block6, AssemblyError> {
    let inv011 = invert_tensor(&t.p011, "P011")?;
    let inv022 = invert_tensor(&t.p022, "P022")?;
    let kernel = Helmholtz::new(p.k);
    let g = cross_matrix(&kernel.grad_phi(z1, z2)?);
    let inv_resonant = p.a.powf(p.h - 3.0);
    let mut a = Block6::zeros();
    set_block(&mut a, 0, 0, &(inv011 * (p.signed_c0() / (I * p.k * p.eta0) * inv_resonant)));
    set_block(&mut a, 0, 1, &(g * (I * p.k)));
    set_block(&mut a, 1, 0, &(g * Complex64::from(-p.k * p.k)));
    set_block(&mut a, 1, 1, &(inv022 * (p.signed_d0() / p.eta2 * inv_resonant)));
    Ok(a)
}

pub fn assemble_a(m: usize, g: &ClusterGeometry, p: &ModelParams, t: &PolarizationTensors) -> Result<Block6, AssemblyError> {
    check_index(m, g)?;
    let d = g.dimer(m);
    assemble_a_for(&d.z1, &d.z2, p, t)
}

/// Reduced pair block `ℂ_mj`, `m ≠ j`.
pub fn assemble_c(m: usize, j: usize, g: &ClusterGeometry, p: &ModelParams) -> Result<Block6, AssemblyError> {
    check_index(m, g)?;
    check_index(j, g)?;
    if m == j {
        return Err(AssemblyError::IndexEqual(m));
    }
    let kernel = Helmholtz::new(p.k);
    let (dm, dj) = (g.dimer(m), g.dimer(j));
    let k = p.k;
    let mut c = Block6::zeros();
    set_block(&mut c, 0, 0, &(kernel.upsilon(&dm.z1, &dj.z1)? * (-I * k.powi(3))));
    set_block(&mut c, 0, 1, &(cross_matrix(&kernel.grad_phi(&dm.z1, &dj.z2)?) * (-I * k)));
    set_block(&mut c, 1, 0, &(cross_matrix(&kernel.grad_phi(&dm.z2, &dj.z1)?) * Complex64::from(k * k)));
    set_block(&mut c, 1, 1, &(kernel.upsilon(&dm.z2, &dj.z2)? * Complex64::from(k * k)));
    Ok(c)
}

/// Reduced source `(H^Inc(z_m1), E^Inc(z_m2))`.
pub fn assemble_reduced_source(m: usize, g: &ClusterGeometry, inc: &IncidentWave) -> Result<Vec6, AssemblyError> {
    check_index(m, g)?;
    let d = g.dimer(m);
    let (_, h1) = incident_fields(inc, &d.z1)?;
    let (e2, _) = incident_fields(inc, &d.z2)?;
    Ok(Vec6::new(h1.x, h1.y, h1.z, e2.x, e2.y, e2.z))
}

pub fn assemble_reduced_system(
    g: &ClusterGeometry,
    p: &ModelParams,
    t: &PolarizationTensors,
    inc: &IncidentWave,
) -> Result<ReducedSystem, AssemblyError> {
    check_wavenumber(p, inc)?;
    let n = g.len();
    let diag = (0..n).map(|m| assemble_a(m, g, p, t)).collect::<Result<Vec<_>, _>>()?;
    let offdiag = ordered_pairs(n).into_par_iter().map(|(m, j)| assemble_c(m, j, g, p)).collect::<Result<Vec<_>, _>>()?;
    let source = (0..n).map(|m| assemble_reduced_source(m, g, inc)).collect::<Result<Vec<_>, _>>()?;
    Ok(BlockSystem::from_parts(diag, offdiag, source))
}
