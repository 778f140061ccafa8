//! Dimer clusters inside the unit cube.
//!
//! A dimer is a pair of point sites: the dielectric particle center `z1`, the
//! plasmonic particle center `z2`, and their midpoint `z0`, which anchors the
//! reduced model and is the point used for inter-dimer distances.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::Vec3R;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid scaling parameters: {0}")]
    InvalidScaling(String),
    #[error("dimers too dense: intra-dimer distance {d_in:.6e} >= inter-dimer distance {d_out:.6e}")]
    TooDense { d_in: f64, d_out: f64 },
    #[error("lattice of {count} dimers with pitch {pitch:.6e} does not fit in the unit cube")]
    DoesNotFit { count: usize, pitch: f64 },
    #[error("placed {placed} of {requested} dimers after {attempts} attempts")]
    PlacementFailed { placed: usize, requested: usize, attempts: usize },
    #[error("dimer {index} has coincident particle centers")]
    DegenerateDimer { index: usize },
    #[error("orientation must be a unit vector (|v| = {norm})")]
    NotUnitVector { norm: f64 },
    #[error("a cluster needs at least one dimer")]
    EmptyCluster,
    #[error("geometry file: {0}")]
    Format(String),
}

/// Particle centers of one dimer. `z0` is always derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerSites {
    pub z1: Vec3R,
    pub z2: Vec3R,
    pub z0: Vec3R,
}

impl DimerSites {
    pub fn new(z1: Vec3R, z2: Vec3R) -> Result<Self, GeometryError> {
        if z1 == z2 {
            return Err(GeometryError::DegenerateDimer { index: 0 });
        }
        Ok(DimerSites { z1, z2, z0: z1 + (z2 - z1) / 2.0 })
    }

    /// Intra-dimer separation vector `z2 - z1`.
    pub fn axis(&self) -> Vec3R {
        self.z2 - self.z1
    }

    pub fn translated(&self, d: &Vec3R) -> Self {
        let (z1, z2) = (self.z1 + d, self.z2 + d);
        DimerSites { z1, z2, z0: z1 + (z2 - z1) / 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGeometry {
    dimers: Vec<DimerSites>,
    pub realized_d_in: f64,
    /// `+∞` for a single dimer.
    pub realized_d_out: f64,
}

impl ClusterGeometry {
    pub fn from_dimers(dimers: Vec<DimerSites>) -> Result<Self, GeometryError> {
        if dimers.is_empty() {
            return Err(GeometryError::EmptyCluster);
        }
        for (index, d) in dimers.iter().enumerate() {
            if d.z1 == d.z2 {
                return Err(GeometryError::DegenerateDimer { index });
            }
        }
        let (realized_d_in, realized_d_out) = scan_distances(&dimers);
        Ok(ClusterGeometry { dimers, realized_d_in, realized_d_out })
    }

    pub fn dimers(&self) -> &[DimerSites] {
        &self.dimers
    }

    pub fn len(&self) -> usize {
        self.dimers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimers.is_empty()
    }

    pub fn dimer(&self, m: usize) -> &DimerSites {
        &self.dimers[m]
    }

    pub fn translated(&self, d: &Vec3R) -> Self {
        let dimers = self.dimers.iter().map(|s| s.translated(d)).collect();
        ClusterGeometry::from_dimers(dimers).expect("translation preserves validity")
    }

    /// Reorders dimers so that new dimer `i` is old dimer `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len());
        let dimers = order.iter().map(|&i| self.dimers[i]).collect();
        ClusterGeometry::from_dimers(dimers).expect("permutation preserves validity")
    }

    /// All dimers share the same axis `z2 - z1` up to `rel_tol`.
    pub fn is_identically_oriented(&self, rel_tol: f64) -> bool {
        let axis = self.dimers[0].axis();
        self.dimers.iter().all(|d| (d.axis() - axis).norm() <= rel_tol * axis.norm())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), GeometryError> {
        let mut w = csv::Writer::from_writer(writer);
        for d in &self.dimers {
            w.serialize(DimerRecord::from(d)).map_err(|e| GeometryError::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| GeometryError::Format(e.to_string()))
    }

    /// Reads `(z1, z2)` records; `#` lines are comments and `z0` is recomputed.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GeometryError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut dimers = Vec::new();
        for (index, rec) in r.deserialize::<DimerRecord>().enumerate() {
            let rec = rec.map_err(|e| GeometryError::Format(e.to_string()))?;
            let z1 = Vec3R::new(rec.z1x, rec.z1y, rec.z1z);
            let z2 = Vec3R::new(rec.z2x, rec.z2y, rec.z2z);
            dimers.push(DimerSites::new(z1, z2).map_err(|_| GeometryError::DegenerateDimer { index })?);
        }
        ClusterGeometry::from_dimers(dimers)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DimerRecord {
    z1x: f64,
    z1y: f64,
    z1z: f64,
    z2x: f64,
    z2y: f64,
    z2z: f64,
}

impl From<&DimerSites> for DimerRecord {
    fn from(d: &DimerSites) -> Self {
        DimerRecord { z1x: d.z1.x, z1y: d.z1.y, z1z: d.z1.z, z2x: d.z2.x, z2y: d.z2.y, z2z: d.z2.z }
    }
}

/// Exhaustive O(ℵ²) scan for `(min |z1 - z2|, min_{m≠j} |z_m0 - z_j0|)`.
pub fn scan_distances(dimers: &[DimerSites]) -> (f64, f64) {
    let d_in = dimers.iter().map(|d| (d.z1 - d.z2).norm()).fold(f64::INFINITY, f64::min);
    let mut d_out = f64::INFINITY;
    for (m, a) in dimers.iter().enumerate() {
        for b in &dimers[m + 1..] {
            d_out = d_out.min((a.z0 - b.z0).norm());
        }
    }
    (d_in, d_out)
}

/// Scaling laws `d_in = α₀aᵗ¹`, `d_out = β₀aᵗ²`, `ℵ = ⌊d_out⁻³⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub a: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl ScalingParams {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: String| Err(GeometryError::InvalidScaling(msg));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.alpha0 > 0.0 && self.beta0 > 0.0) {
            return bad(format!("alpha0, beta0 must be positive, got {}, {}", self.alpha0, self.beta0));
        }
        if !(0.0 < self.t2 && self.t2 <= self.t1 && self.t1 < 1.0) {
            return bad(format!("need 0 < t2 <= t1 < 1, got t1 = {}, t2 = {}", self.t1, self.t2));
        }
        Ok(())
    }

    pub fn d_in(&self) -> f64 {
        self.alpha0 * self.a.powf(self.t1)
    }

    pub fn d_out(&self) -> f64 {
        self.beta0 * self.a.powf(self.t2)
    }

    /// The floor absorbs a few ulps so that exact cubes such as
    /// `(0.01^{1/3})^{-3} = 100` are not rounded down.
    pub fn dimer_count(&self) -> usize {
        (self.d_out().powi(-3) * (1.0 + 1e-12)).floor() as usize
    }
}

fn check_unit(v: &Vec3R) -> Result<(), GeometryError> {
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(GeometryError::NotUnitVector { norm });
    }
    Ok(())
}

fn dimer_about(z0: Vec3R, axis: &Vec3R, d_in: f64) -> DimerSites {
    let half = axis * (d_in / 2.0);
    DimerSites::new(z0 - half, z0 + half).expect("d_in > 0")
}

/// Places dimers on a cubic lattice of pitch `d_out`, centered in `[0,1]³`.
///
/// Lattice sites are filled in lexicographic order, so counts that are not
/// perfect cubes leave the last layer partially occupied.
pub fn make_lattice_cluster(
    s: &ScalingParams,
    orientation: &Vec3R,
    count_override: Option<usize>,
) -> Result<ClusterGeometry, GeometryError> {
    s.validate()?;
    check_unit(orientation)?;
    let (d_in, pitch) = (s.d_in(), s.d_out());
    if d_in >= pitch {
        return Err(GeometryError::TooDense { d_in, d_out: pitch });
    }
    let count = count_override.unwrap_or_else(|| s.dimer_count());
    if count == 0 {
        return Err(GeometryError::EmptyCluster);
    }
    let side = cube_side(count);
    let span = (side - 1) as f64 * pitch;
    if span + d_in > 1.0 {
        return Err(GeometryError::DoesNotFit { count, pitch });
    }
    let offset = (1.0 - span) / 2.0;
    let dimers = (0..count)
        .map(|n| {
            let (i, j, l) = (n / (side * side), (n / side) % side, n % side);
            let z0 = Vec3R::new(i as f64, j as f64, l as f64) * pitch + Vec3R::repeat(offset);
            dimer_about(z0, orientation, d_in)
        })
        .collect();
    ClusterGeometry::from_dimers(dimers)
}

/// Smallest `n` with `n³ >= count`.
fn cube_side(count: usize) -> usize {
    let mut n = (count as f64).cbrt().round() as usize;
    while n * n * n < count {
        n += 1;
    }
    while n > 1 && (n - 1).pow(3) >= count {
        n -= 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomClusterOptions {
    pub seed: u64,
    pub max_attempts: usize,
    /// Shared dimer axis; `None` draws each axis uniformly on the sphere.
    pub orientation: Option<Vec3R>,
    pub count_override: Option<usize>,
}

/// Rejection-samples midpoints in the unit cube with pairwise distance at
/// least `d_out`. Midpoints stay `d_in/2` away from the cube faces so both
/// particles lie inside.
pub fn make_random_cluster(s: &ScalingParams, opts: &RandomClusterOptions) -> Result<ClusterGeometry, GeometryError> {
    s.validate()?;
    if let Some(o) = &opts.orientation {
        check_unit(o)?;
    }
    let (d_in, d_out) = (s.d_in(), s.d_out());
    if d_in >= d_out {
        return Err(GeometryError::TooDense { d_in, d_out });
    }
    let count = opts.count_override.unwrap_or_else(|| s.dimer_count());
    if count == 0 {
        return Err(GeometryError::EmptyCluster);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let margin = d_in / 2.0;
    let width = 1.0 - 2.0 * margin;
    let mut centers: Vec<Vec3R> = Vec::with_capacity(count);
    let mut attempts = 0;
    while centers.len() < count {
        if attempts >= opts.max_attempts {
            return Err(GeometryError::PlacementFailed { placed: centers.len(), requested: count, attempts });
        }
        attempts += 1;
        let p = Vec3R::from_fn(|_, _| margin + width * rng.gen::<f64>());
        if centers.iter().all(|c| (c - p).norm() >= d_out) {
            centers.push(p);
        }
    }
    let dimers = centers
        .into_iter()
        .map(|z0| {
            let axis = match &opts.orientation {
                Some(o) => *o,
                None => random_unit(&mut rng),
            };
            dimer_about(z0, &axis, d_in)
        })
        .collect();
    ClusterGeometry::from_dimers(dimers)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3R {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vec3R::new(rho * phi.cos(), rho * phi.sin(), z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dimer_count: usize,
    pub expected_count: usize,
    pub count_matches: bool,
    pub d_in_scan: f64,
    pub d_in_target: f64,
    pub d_in_rel_deviation: f64,
    pub d_in_ok: bool,
    /// `None` (serialized as null) for a single dimer.
    pub d_out_scan: Option<f64>,
    pub d_out_target: f64,
    pub d_out_ok: bool,
    pub d_out_degenerate: bool,
    pub midpoints_ok: bool,
    pub stored_minima_ok: bool,
    pub all_ok: bool,
}

/// Recomputes the distance minima by exhaustive scan and compares them with
/// the scaling targets. `d_in` must match `α₀aᵗ¹` to relative `tol`; `d_out`
/// must not fall below `β₀aᵗ²` by more than relative `tol`.
pub fn validate_geometry(g: &ClusterGeometry, s: &ScalingParams, tol: f64) -> ValidationReport {
    let (d_in_scan, d_out_scan) = scan_distances(g.dimers());
    let (d_in_target, d_out_target) = (s.d_in(), s.d_out());
    let d_in_rel_deviation = (d_in_scan - d_in_target).abs() / d_in_target;
    let d_in_ok = d_in_rel_deviation <= tol;
    let d_out_ok = d_out_scan >= d_out_target * (1.0 - tol);
    let d_out_degenerate = d_out_scan == 0.0;
    let midpoints_ok = g.dimers().iter().all(|d| d.z0 == d.z1 + (d.z2 - d.z1) / 2.0);
    let stored_minima_ok = d_in_scan == g.realized_d_in && d_out_scan == g.realized_d_out;
    let expected_count = s.dimer_count();
    ValidationReport {
        dimer_count: g.len(),
        expected_count,
        count_matches: g.len() == expected_count,
        d_in_scan,
        d_in_target,
        d_in_rel_deviation,
        d_in_ok,
        d_out_scan: d_out_scan.is_finite().then_some(d_out_scan),
        d_out_target,
        d_out_ok,
        d_out_degenerate,
        midpoints_ok,
        stored_minima_ok,
        all_ok: d_in_ok && d_out_ok && !d_out_degenerate && midpoints_ok && stored_minima_ok,
    }
}
