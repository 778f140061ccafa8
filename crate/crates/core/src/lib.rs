//! Multiple scattering by clusters of dielectric-plasmonic dimers.
//!
//! Each dimer pairs a high-contrast dielectric particle with a plasmonic one.
//! The crate assembles the coupled moment systems of a cluster (the full
//! four-moment model and the reduced dipole model), solves them, evaluates
//! scattered and far fields, and derives effective constitutive tensors.
//!
//! Modules, from the bottom up:
//!
//! * [`kernels`]: Helmholtz fundamental solution, its derivatives and the dyadic kernel.
//! * [`geometry`]: dimer placement and distance bookkeeping.
//! * [`materials`]: model parameters, polarization tensors and regime checks.
//! * [`assembly`]: block systems for the full and reduced models.
//! * [`solver`]: dense and block-iterative solves.
//! * [`fields`]: incident, scattered and far fields.
//! * [`effective`]: polarizabilities, susceptibilities and effective tensors.

pub mod assembly;
pub mod effective;
pub mod fields;
pub mod geometry;
pub mod kernels;
pub mod materials;
pub mod solver;

use thiserror::Error;

/// Union of every module error, with a stable machine-readable code.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] kernels::KernelError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Materials(#[from] materials::MaterialsError),
    #[error(transparent)]
    Assembly(#[from] assembly::AssemblyError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    Fields(#[from] fields::FieldsError),
    #[error(transparent)]
    Effective(#[from] effective::EffectiveError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        use assembly::AssemblyError as A;
        use effective::EffectiveError as Ef;
        use fields::FieldsError as F;
        use geometry::GeometryError as G;
        use kernels::KernelError as K;
        use materials::MaterialsError as M;
        use solver::SolverError as S;
        fn kernel(e: &K) -> &'static str {
            match e {
                K::CoincidentPoints { .. } => "E_KERNEL_COINCIDENT",
                K::ZeroWavenumber => "E_KERNEL_ZERO_K",
            }
        }
        fn field(e: &F) -> &'static str {
            match e {
                F::Kernel(k) => kernel(k),
                F::NonUnitVector { .. } => "E_FIELDS_NON_UNIT",
                F::NonTransversePolarization { .. } => "E_FIELDS_NON_TRANSVERSE",
                F::ObservationTooClose { .. } => "E_FIELDS_TOO_CLOSE",
                F::GridTooSmall { .. } => "E_FIELDS_GRID",
            }
        }
        fn assembly(e: &A) -> &'static str {
            match e {
                A::Kernel(k) => kernel(k),
                A::Fields(f) => field(f),
                A::IndexEqual(_) => "E_ASSEMBLY_INDEX_EQUAL",
                A::IndexOutOfRange { .. } => "E_ASSEMBLY_INDEX_RANGE",
                A::SingularTensor(_) => "E_ASSEMBLY_SINGULAR_TENSOR",
                A::WavenumberMismatch { .. } => "E_ASSEMBLY_K_MISMATCH",
            }
        }
        match self {
            Error::Kernel(e) => kernel(e),
            Error::Geometry(e) => match e {
                G::InvalidScaling(_) => "E_GEOMETRY_SCALING",
                G::TooDense { .. } => "E_GEOMETRY_TOO_DENSE",
                G::DoesNotFit { .. } => "E_GEOMETRY_DOES_NOT_FIT",
                G::PlacementFailed { .. } => "E_GEOMETRY_PLACEMENT",
                G::DegenerateDimer { .. } => "E_GEOMETRY_DEGENERATE",
                G::NotUnitVector { .. } => "E_GEOMETRY_ORIENTATION",
                G::EmptyCluster => "E_GEOMETRY_EMPTY",
                G::Format(_) => "E_GEOMETRY_FORMAT",
            },
            Error::Materials(e) => match e {
                M::InvalidParams(_) => "E_MATERIALS_PARAMS",
                M::NonPositiveRadicand { .. } => "E_MATERIALS_RESONANCE",
                M::ComplexEta0Unsupported { .. } => "E_MATERIALS_COMPLEX_ETA0",
            },
            Error::Assembly(e) => assembly(e),
            Error::Solver(e) => match e {
                S::SingularMatrix { .. } => "E_SOLVER_SINGULAR",
                S::SizeCapExceeded { .. } => "E_SOLVER_SIZE_CAP",
                S::DiagonalBlockSingular(_) => "E_SOLVER_DIAGONAL_SINGULAR",
                S::NotConverged { .. } => "E_SOLVER_NOT_CONVERGED",
                S::ShapeMismatch(..) => "E_SOLVER_SHAPE",
            },
            Error::Fields(e) => field(e),
            Error::Effective(e) => match e {
                Ef::Kernel(k) => kernel(k),
                Ef::Assembly(a) => assembly(a),
                Ef::SingularA { .. } => "E_EFFECTIVE_SINGULAR_A",
                Ef::SeparationMismatch { .. } => "E_EFFECTIVE_SEPARATION",
                Ef::RegimeViolation { .. } => "E_EFFECTIVE_REGIME",
                Ef::InsufficientSweep => "E_EFFECTIVE_SWEEP",
                Ef::ZeroOrientation => "E_EFFECTIVE_ORIENTATION",
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
