//! Physical parameters and atomic position samples.
//!
//! Samples are generated with a fixed, documented PRNG scheme so that a
//! `(geometry, seed, n)` triple reproduces bit-identical positions across
//! runs, platforms, and thread counts:
//!
//! - the generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), keyed with
//!   `SeedableRng::seed_from_u64(seed)`;
//! - candidate points are drawn as coordinate triples `(x, y, z)`, each
//!   uniform in `[-1, 1)`, in that order, one triple per attempt;
//! - a candidate is accepted if it lies in the closed unit ball and is no
//!   closer than the separation floor to every previously accepted point,
//!   otherwise it is discarded and the next triple is drawn;
//! - accepted unit-ball points are scaled by the ball radius.
//!
//! Scaling happens last, so samples of different radii at the same seed are
//! exact rescalings of one another.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Minimum pairwise separation between atoms, as a fraction of the natural
/// length scale of the generating operation (the ball radius for
/// [`uniform_ball_sample`], `1/k0` for [`dicke_cluster`]). The kernel
/// diverges at zero distance, so coincident or near-coincident atoms are
/// resampled.
pub const MIN_SEPARATION_SCALE: f64 = 1e-6;

/// Dicke-limit guard: `epsilon * k0` must stay below this bound.
pub const DICKE_CONDITION: f64 = 0.05;

/// Consecutive rejections tolerated per point before the generator gives up.
const MAX_ATTEMPTS_PER_POINT: usize = 100_000;

/// Largest sample size the generators will attempt.
const MAX_ATOMS: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MediumError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "Dicke condition violated: epsilon * k0 = {product:.6e} but the cluster \
         must satisfy epsilon * k0 < {DICKE_CONDITION}"
    )]
    DickeConditionViolated { product: f64 },
    #[error(
        "could not satisfy the minimum pairwise separation {min_separation:.3e} \
         after {attempts} attempts while placing atom {index}"
    )]
    SeparationUnsatisfiable {
        index: usize,
        min_separation: f64,
        attempts: usize,
    },
    #[error("coincident atoms at indices {a} and {b}")]
    CoincidentAtoms { a: usize, b: usize },
}

impl MediumError {
    pub fn kind(&self) -> crate::FailureKind {
        crate::FailureKind::InvalidInput
    }
}

/// Wavenumber, inverse correlation length, and number density describing the
/// medium. All decay rates are normalized to the isolated-atom rate, so these
/// three are the only dimensionful inputs; only the dimensionless products
/// `k0*R`, `mu/k0` and `rho/k0^3` affect results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    k0: f64,
    mu: f64,
    rho: f64,
}

impl PhysicalParams {
    /// `k0 > 0`, `mu >= 0` (`mu = 0` is the unregularized limit), `rho > 0`.
    pub fn new(k0: f64, mu: f64, rho: f64) -> Result<Self, MediumError> {
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(MediumError::InvalidArgument(format!(
                "wavenumber k0 must be finite and positive, got {k0}"
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(MediumError::InvalidArgument(format!(
                "inverse correlation length mu must be finite and nonnegative, got {mu}"
            )));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(MediumError::InvalidArgument(format!(
                "number density rho must be finite and positive, got {rho}"
            )));
        }
        Ok(Self { k0, mu, rho })
    }

    /// Resonant wavenumber.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Inverse correlation length (0 = unregularized).
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Atomic number density.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same medium with a different regulator.
    pub fn with_mu(&self, mu: f64) -> Result<Self, MediumError> {
        Self::new(self.k0, mu, self.rho)
    }
}

/// How a sample's positions were generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Uniform i.i.d. points in a ball of this radius.
    UniformBall { radius: f64 },
    /// Uniform points in a ball small compared to the resonant wavelength.
    DickeCluster { radius: f64 },
    /// Caller-supplied positions.
    Explicit,
}

impl Geometry {
    pub fn label(&self) -> &'static str {
        match self {
            Geometry::UniformBall { .. } => "uniform_ball",
            Geometry::DickeCluster { .. } => "dicke_cluster",
            Geometry::Explicit => "explicit",
        }
    }

    /// Generating radius, if the geometry has one.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Geometry::UniformBall { radius } | Geometry::DickeCluster { radius } => Some(*radius),
            Geometry::Explicit => None,
        }
    }
}

/// A concrete set of atomic positions plus its generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    positions: Vec<[f64; 3]>,
    geometry: Geometry,
    seed: u64,
}

impl Sample {
    /// Wrap caller-supplied positions. Positions must be finite and pairwise
    /// distinct (coordinate triples may not repeat).
    pub fn from_positions(positions: Vec<[f64; 3]>) -> Result<Self, MediumError> {
        if positions.is_empty() {
            return Err(MediumError::InvalidArgument(
                "a sample needs at least one atom".into(),
            ));
        }
        let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(positions.len());
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(MediumError::InvalidArgument(format!(
                    "position {i} has non-finite coordinates: {p:?}"
                )));
            }
            // normalize -0.0 so the duplicate check is by numeric value
            let key = [
                (p[0] + 0.0).to_bits(),
                (p[1] + 0.0).to_bits(),
                (p[2] + 0.0).to_bits(),
            ];
            if let Some(&j) = seen.get(&key) {
                return Err(MediumError::CoincidentAtoms { a: j, b: i });
            }
            seen.insert(key, i);
        }
        Ok(Self {
            positions,
            geometry: Geometry::Explicit,
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// CSV serialization: header `x,y,z`, one row per atom, 17 significant
    /// digits per coordinate.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,z")?;
        for p in &self.positions {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2])?;
        }
        Ok(())
    }

    /// JSON sidecar describing how the sample was generated:
    /// `{geometry, seed, n, radius}` (`radius` is null for explicit samples).
    pub fn sidecar_json(&self) -> serde_json::Value {
        json!({
            "geometry": self.geometry.label(),
            "seed": self.seed,
            "n": self.n(),
            "radius": self.geometry.radius(),
        })
    }
}

/// `n` i.i.d. uniform points in the ball of the given radius, reproducible
/// per seed. Points closer than [`MIN_SEPARATION_SCALE`] times the radius to
/// an earlier point are rejected and redrawn.
pub fn uniform_ball_sample(n: usize, radius: f64, seed: u64) -> Result<Sample, MediumError> {
    if n == 0 {
        return Err(MediumError::InvalidArgument(
            "atom count n must be at least 1".into(),
        ));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MediumError::InvalidArgument(format!(
            "ball radius must be finite and positive, got {radius}"
        )));
    }
    let unit = unit_ball_points(n, seed, MIN_SEPARATION_SCALE)?;
    Ok(Sample {
        positions: scale_points(unit, radius),
        geometry: Geometry::UniformBall { radius },
        seed,
    })
}

/// `n` uniform points in a ball of radius `epsilon` deep inside the Dicke
/// regime, which is enforced as `epsilon * k0 < 0.05`. The separation floor
/// is `1e-6 / k0`.
pub fn dicke_cluster(n: usize, epsilon: f64, k0: f64, seed: u64) -> Result<Sample, MediumError> {
    if n == 0 {
        return Err(MediumError::InvalidArgument(
            "atom count n must be at least 1".into(),
        ));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MediumError::InvalidArgument(format!(
            "cluster radius epsilon must be finite and positive, got {epsilon}"
        )));
    }
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(MediumError::InvalidArgument(format!(
            "wavenumber k0 must be finite and positive, got {k0}"
        )));
    }
    let product = epsilon * k0;
    if product >= DICKE_CONDITION {
        return Err(MediumError::DickeConditionViolated { product });
    }
    let floor_unit = MIN_SEPARATION_SCALE / (k0 * epsilon);
    let unit = unit_ball_points(n, seed, floor_unit)?;
    Ok(Sample {
        positions: scale_points(unit, epsilon),
        geometry: Geometry::DickeCluster { radius: epsilon },
        seed,
    })
}

/// Number of atoms a density implies for a ball: `round(rho * (4π/3) * R³)`,
/// clamped below at 1.
pub fn density_to_count(params: &PhysicalParams, radius: f64) -> Result<usize, MediumError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MediumError::InvalidArgument(format!(
            "ball radius must be finite and positive, got {radius}"
        )));
    }
    let count = (params.rho() * std::f64::consts::FRAC_PI_3 * 4.0 * radius.powi(3)).round();
    if count > MAX_ATOMS as f64 {
        return Err(MediumError::InvalidArgument(format!(
            "rho * (4π/3) * R³ = {count:.3e} exceeds the supported sample size {MAX_ATOMS}"
        )));
    }
    Ok((count as usize).max(1))
}

fn scale_points(unit: Vec<[f64; 3]>, radius: f64) -> Vec<[f64; 3]> {
    unit.into_iter()
        .map(|p| [p[0] * radius, p[1] * radius, p[2] * radius])
        .collect()
}

/// Rejection-sample `n` points in the closed unit ball, enforcing a minimum
/// pairwise separation `floor` (in unit-ball coordinates). Neighbor lookups
/// go through a cell hash so large samples stay O(n).
fn unit_ball_points(n: usize, seed: u64, floor: f64) -> Result<Vec<[f64; 3]>, MediumError> {
    if n > MAX_ATOMS {
        return Err(MediumError::InvalidArgument(format!(
            "atom count {n} exceeds the supported sample size {MAX_ATOMS}"
        )));
    }
    if n >= 2 && floor >= 2.0 {
        return Err(MediumError::InvalidArgument(format!(
            "separation floor {floor:.3e} exceeds the ball diameter; \
             no two atoms can be placed"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<[f64; 3]> = Vec::with_capacity(n);
    let mut grid = CellGrid::new(floor);
    while points.len() < n {
        let mut attempts = 0usize;
        let accepted = loop {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            let z: f64 = rng.random_range(-1.0..1.0);
            let candidate = [x, y, z];
            attempts += 1;
            let in_ball = x * x + y * y + z * z <= 1.0;
            if in_ball && grid.is_clear(candidate, floor, &points) {
                break Some(candidate);
            }
            if attempts >= MAX_ATTEMPTS_PER_POINT {
                break None;
            }
        };
        match accepted {
            Some(p) => {
                grid.insert(p, points.len());
                points.push(p);
            }
            None => {
                return Err(MediumError::SeparationUnsatisfiable {
                    index: points.len(),
                    min_separation: floor,
                    attempts: MAX_ATTEMPTS_PER_POINT,
                });
            }
        }
    }
    Ok(points)
}

/// Uniform cell hash over unit-ball coordinates with cell edge equal to the
/// separation floor, so only the 27 surrounding cells need checking.
struct CellGrid {
    cell: f64,
    occupied: HashMap<[i64; 3], Vec<usize>>,
}

impl CellGrid {
    fn new(floor: f64) -> Self {
        // cell edge must be >= floor for the 27-cell neighborhood to suffice
        let cell = floor.max(1e-9);
        CellGrid {
            cell,
            occupied: HashMap::new(),
        }
    }

    fn key(&self, p: [f64; 3]) -> [i64; 3] {
        [
            (p[0] / self.cell).floor() as i64,
            (p[1] / self.cell).floor() as i64,
            (p[2] / self.cell).floor() as i64,
        ]
    }

    fn is_clear(&self, p: [f64; 3], floor: f64, points: &[[f64; 3]]) -> bool {
        if floor <= 0.0 {
            return true;
        }
        let k = self.key(p);
        let floor_sq = floor * floor;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let neighbor = [k[0] + dx, k[1] + dy, k[2] + dz];
                    if let Some(indices) = self.occupied.get(&neighbor) {
                        for &i in indices {
                            let q = points[i];
                            let d2 = (p[0] - q[0]).powi(2)
                                + (p[1] - q[1]).powi(2)
                                + (p[2] - q[2]).powi(2);
                            if d2 < floor_sq {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: [f64; 3], index: usize) {
        self.occupied.entry(self.key(p)).or_default().push(index);
    }
}
