//! One-tier hexagonal layout (seven cells), user and antenna-cluster
//! placement, and the distribution of user-to-cluster distances.
//!
//! Lengths are measured in inscribed-circle radii: every cell's inscribed
//! circle has radius 1, cell 0 is centred at the origin and neighbour `i`
//! is centred at polar `(2, i·π/3 − π/6)`. Users and clusters live in the
//! inscribed circle only; the hexagon corners are never populated.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Number of cells in the one-tier layout.
pub const CELLS: usize = 7;

/// A point in polar coordinates about the origin of cell 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub rho: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub const ORIGIN: PolarPoint = PolarPoint { rho: 0.0, theta: 0.0 };

    /// Builds a point, folding `theta` into `[0, 2π)`.
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("polar point ({rho}, {theta})")));
        }
        Ok(Self { rho, theta: theta.rem_euclid(TAU) })
    }

    pub fn from_xy(x: f64, y: f64) -> Self {
        Self { rho: x.hypot(y), theta: y.atan2(x).rem_euclid(TAU) }
    }

    #[inline]
    pub fn to_xy(self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.rho * c, self.rho * s]
    }

    pub fn distance(self, other: PolarPoint) -> f64 {
        let [ax, ay] = self.to_xy();
        let [bx, by] = other.to_xy();
        (ax - bx).hypot(ay - by)
    }
}

/// Index of a cell in the one-tier layout, `0` being the serving cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(u8);

impl CellIndex {
    pub const SERVING: CellIndex = CellIndex(0);

    pub fn new(i: usize) -> Result<Self> {
        if i < CELLS {
            Ok(Self(i as u8))
        } else {
            Err(Error::Domain(format!("cell index {i} outside 0..=6")))
        }
    }

    pub fn neighbor(i: usize) -> Result<Self> {
        if (1..CELLS).contains(&i) {
            Ok(Self(i as u8))
        } else {
            Err(Error::Domain(format!("neighbor cell index {i} outside 1..=6")))
        }
    }

    pub fn neighbors() -> impl Iterator<Item = CellIndex> {
        (1..CELLS as u8).map(CellIndex)
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Angular position of the cell centre, `i·π/3 − π/6` (neighbours only).
    pub fn angle(self) -> f64 {
        self.0 as f64 * PI / 3.0 - PI / 6.0
    }

    pub fn center(self) -> PolarPoint {
        if self.0 == 0 {
            PolarPoint::ORIGIN
        } else {
            PolarPoint { rho: 2.0, theta: self.angle() }
        }
    }
}

/// Antenna layout of the base stations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    /// All antennas at the cell centre.
    Ca,
    /// Jointly processed clusters spread over the cell.
    Da,
    /// Same placement as `Da`, each cluster an independent base station.
    #[serde(alias = "small-cell", alias = "small_cell")]
    SmallCell,
}

impl LayoutKind {
    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Ca => "ca",
            LayoutKind::Da => "da",
            LayoutKind::SmallCell => "smallcell",
        }
    }
}

impl std::str::FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ca" => Ok(LayoutKind::Ca),
            "da" => Ok(LayoutKind::Da),
            "smallcell" | "small-cell" | "small_cell" | "sc" => Ok(LayoutKind::SmallCell),
            other => Err(Error::Config(format!("unknown layout `{other}`"))),
        }
    }
}

/// Antenna-cluster positions in all seven cells.
///
/// Clusters are stored per cell; within a cell, antenna `m` belongs to
/// cluster `m / antennas_per_cluster` (cluster-major ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRealization {
    kind: LayoutKind,
    clusters: Vec<Vec<PolarPoint>>,
    xy: Vec<Vec<[f64; 2]>>,
    antennas_per_cluster: usize,
}

impl LayoutRealization {
    pub fn new(
        kind: LayoutKind,
        clusters: Vec<Vec<PolarPoint>>,
        antennas_per_cluster: usize,
    ) -> Result<Self> {
        if clusters.len() != CELLS {
            return Err(Error::Domain(format!("layout needs {CELLS} cells, got {}", clusters.len())));
        }
        let per_cell = clusters[0].len();
        if per_cell == 0 || clusters.iter().any(|c| c.len() != per_cell) {
            return Err(Error::Domain("every cell needs the same nonzero cluster count".into()));
        }
        if kind == LayoutKind::Ca && per_cell != 1 {
            return Err(Error::Domain("a co-located layout has one cluster per cell".into()));
        }
        if antennas_per_cluster == 0 {
            return Err(Error::Domain("clusters need at least one antenna".into()));
        }
        let xy = clusters.iter().map(|c| c.iter().map(|p| p.to_xy()).collect()).collect();
        Ok(Self { kind, clusters, xy, antennas_per_cluster })
    }

    /// The deterministic co-located layout with `antennas` per cell.
    pub fn co_located(antennas: usize) -> Self {
        let clusters = (0..CELLS).map(|i| vec![CellIndex(i as u8).center()]).collect();
        Self::new(LayoutKind::Ca, clusters, antennas).expect("static layout is valid")
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn clusters(&self, cell: CellIndex) -> &[PolarPoint] {
        &self.clusters[cell.get()]
    }

    pub(crate) fn cluster_xy(&self, cell: usize) -> &[[f64; 2]] {
        &self.xy[cell]
    }

    pub fn clusters_per_cell(&self) -> usize {
        self.clusters[0].len()
    }

    pub fn antennas_per_cluster(&self) -> usize {
        self.antennas_per_cluster
    }

    /// Antennas per cell, `M`.
    pub fn antennas_per_cell(&self) -> usize {
        self.clusters_per_cell() * self.antennas_per_cluster
    }
}

/// Uniform point in the unit disk via the `sqrt(u)` radius transform.
pub fn sample_unit_disk<R: Rng + ?Sized>(rng: &mut R) -> PolarPoint {
    let rho = rng.random::<f64>().sqrt();
    let theta = TAU * rng.random::<f64>();
    PolarPoint { rho, theta }
}

/// Uniform user position in the inscribed circle of cell 0.
pub fn sample_user_position<R: Rng + ?Sized>(rng: &mut R) -> PolarPoint {
    sample_unit_disk(rng)
}

/// Draws a layout realization.
///
/// For distributed and small-cell layouts each cell gets its own child
/// stream seeded from `rng`, so the first `L` clusters of a cell are the
/// same whatever `L` is.
pub fn sample_layout<R: Rng + ?Sized>(
    kind: LayoutKind,
    params: &SystemParams,
    rng: &mut R,
) -> Result<LayoutRealization> {
    let (l, n) = (params.clusters, params.user_antennas);
    if l == 0 || n == 0 {
        return Err(Error::Domain("layout needs L ≥ 1 and N ≥ 1".into()));
    }
    if kind == LayoutKind::Ca {
        return Ok(LayoutRealization::co_located(params.bs_antennas()));
    }
    let clusters = (0..CELLS)
        .map(|i| {
            let [cx, cy] = CellIndex(i as u8).center().to_xy();
            let mut cell_rng = SimRng::seed_from_u64(rng.random());
            (0..l)
                .map(|_| {
                    let [x, y] = sample_unit_disk(&mut cell_rng).to_xy();
                    PolarPoint::from_xy(cx + x, cy + y)
                })
                .collect()
        })
        .collect();
    LayoutRealization::new(kind, clusters, n)
}

#[inline]
fn clamped_acos(v: f64) -> f64 {
    v.clamp(-1.0, 1.0).acos()
}

fn check_radius(y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain(format!("user radius {y} outside [0, 1]")))
    }
}

/// CDF of the distance from a user at radius `y` to a point uniform in the
/// unit disk of its own cell.
pub fn own_cell_distance_cdf(x: f64, y: f64) -> Result<f64> {
    check_radius(y)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 + y {
        return Ok(1.0);
    }
    if x <= 1.0 - y {
        return Ok(x * x);
    }
    // Heron's formula for the triangle with sides 1, x, y.
    let s = 0.5 * (1.0 + x + y);
    let heron = (s * (s - 1.0) * (s - x) * (s - y)).max(0.0).sqrt();
    let v = x * x * (1.0 - clamped_acos((1.0 - x * x - y * y) / (2.0 * x * y)) / PI)
        + clamped_acos((1.0 - x * x + y * y) / (2.0 * y)) / PI
        - 2.0 / PI * heron;
    Ok(v.clamp(0.0, 1.0))
}

/// Density matching [`own_cell_distance_cdf`]; support `[0, 1 + y]`.
pub fn own_cell_distance_pdf(x: f64, y: f64) -> Result<f64> {
    check_radius(y)?;
    Ok(if x <= 0.0 || x >= 1.0 + y {
        0.0
    } else if x <= 1.0 - y {
        2.0 * x
    } else {
        2.0 * x / PI * clamped_acos((x * x + y * y - 1.0) / (2.0 * x * y))
    })
}

/// Distance from a user at `(y, z)` to the centre of neighbour cell `i`.
pub fn neighbor_center_distance(y: f64, z: f64, cell: CellIndex) -> f64 {
    (y * y + 4.0 - 4.0 * y * (z - cell.angle()).cos()).max(0.0).sqrt()
}

/// Support `[D − 1, D + 1]` of the neighbour-cell distance.
pub fn neighbor_cell_distance_support(y: f64, z: f64, cell: CellIndex) -> Result<(f64, f64)> {
    check_radius(y)?;
    check_neighbor(cell)?;
    let d = neighbor_center_distance(y, z, cell);
    Ok((d - 1.0, d + 1.0))
}

fn check_neighbor(cell: CellIndex) -> Result<()> {
    if cell.get() == 0 {
        Err(Error::Domain("neighbor distance needs a cell index in 1..=6".into()))
    } else {
        Ok(())
    }
}

/// Density of the distance from a user at `(y, z)` in cell 0 to a point
/// uniform in the inscribed circle of neighbour cell `i`.
pub fn neighbor_cell_distance_pdf(x: f64, y: f64, z: f64, cell: CellIndex) -> Result<f64> {
    check_radius(y)?;
    check_neighbor(cell)?;
    let d = neighbor_center_distance(y, z, cell);
    Ok(disk_distance_pdf(x, d))
}

/// CDF matching [`neighbor_cell_distance_pdf`]: the share of the neighbour
/// disk covered by the circle of radius `x` around the user.
pub fn neighbor_cell_distance_cdf(x: f64, y: f64, z: f64, cell: CellIndex) -> Result<f64> {
    check_radius(y)?;
    check_neighbor(cell)?;
    Ok(disk_coverage(x, neighbor_center_distance(y, z, cell)))
}

/// Density of `|p − u|` for `p` uniform in a unit disk whose centre is at
/// distance `d ≥ 1` from `u`.
pub(crate) fn disk_distance_pdf(x: f64, d: f64) -> f64 {
    if x <= (d - 1.0).max(0.0) || x >= d + 1.0 {
        return 0.0;
    }
    2.0 * x / PI * clamped_acos((x * x + d * d - 1.0) / (2.0 * x * d))
}

/// Fraction of a unit disk lying within distance `x` of a point at distance
/// `d` from the disk centre.
pub fn disk_coverage(x: f64, d: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= d + 1.0 {
        return 1.0;
    }
    if x + d <= 1.0 {
        return x * x;
    }
    if x + 1.0 <= d {
        return 0.0;
    }
    let kite = ((-d + x + 1.0) * (d + x - 1.0) * (d - x + 1.0) * (d + x + 1.0)).max(0.0).sqrt();
    let area = x * x * clamped_acos((d * d + x * x - 1.0) / (2.0 * d * x))
        + clamped_acos((d * d + 1.0 - x * x) / (2.0 * d))
        - 0.5 * kite;
    (area / PI).clamp(0.0, 1.0)
}

fn check_count(n_clusters: usize) -> Result<()> {
    if n_clusters == 0 {
        Err(Error::Domain("minimum over zero clusters".into()))
    } else {
        Ok(())
    }
}

/// Density of the smallest of `n_clusters` i.i.d. own-cell distances.
pub fn min_access_distance_pdf(x: f64, y: f64, n_clusters: usize) -> Result<f64> {
    check_count(n_clusters)?;
    let f = own_cell_distance_pdf(x, y)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    let survival = 1.0 - own_cell_distance_cdf(x, y)?;
    Ok(n_clusters as f64 * survival.powi(n_clusters as i32 - 1) * f)
}

pub fn min_access_distance_cdf(x: f64, y: f64, n_clusters: usize) -> Result<f64> {
    check_count(n_clusters)?;
    let survival = 1.0 - own_cell_distance_cdf(x, y)?;
    Ok(1.0 - survival.powi(n_clusters as i32))
}
