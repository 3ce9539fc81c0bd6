//! Normalized inter-cell interference power and its Monte Carlo moments.

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::geometry::{sample_layout, sample_unit_disk, CellIndex, LayoutKind, LayoutRealization, PolarPoint, CELLS};
use crate::parallel::{map_indexed, Execution};
use crate::rng::{substream, Stream};

/// Interference power seen by a user of the co-located layout:
/// `Σᵢ (ρ² + 4 − 4ρ cos(θ − φᵢ))^(−α/2)`.
pub fn intercell_power_ca(user: PolarPoint, alpha: f64) -> f64 {
    CellIndex::neighbors()
        .map(|c| {
            let d2 = user.rho * user.rho + 4.0 - 4.0 * user.rho * (user.theta - c.angle()).cos();
            d2.powf(-alpha / 2.0)
        })
        .sum()
}

/// `(1/L) Σᵢ Σₗ d^(−α)` over the clusters of the six neighbour cells.
///
/// Works for every layout; with one cluster per cell at the cell centres it
/// reproduces [`intercell_power_ca`].
pub fn intercell_power(user: PolarPoint, layout: &LayoutRealization, alpha: f64) -> Result<f64> {
    let [ux, uy] = user.to_xy();
    let mut total = 0.0;
    for cell in 1..CELLS {
        for &[x, y] in layout.cluster_xy(cell) {
            let d2 = (ux - x) * (ux - x) + (uy - y) * (uy - y);
            if d2 == 0.0 {
                return Err(Error::Coincident);
            }
            total += d2.powf(-alpha / 2.0);
        }
    }
    Ok(total / layout.clusters_per_cell() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSample {
    pub p_int: f64,
    pub layout_kind: LayoutKind,
    pub user: PolarPoint,
}

pub fn interference_sample(user: PolarPoint, layout: &LayoutRealization, alpha: f64) -> Result<InterferenceSample> {
    Ok(InterferenceSample { p_int: intercell_power(user, layout, alpha)?, layout_kind: layout.kind(), user })
}

/// Inter-cell interference covariance `snr · P_int · I_N`, stored as its
/// diagonal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceCovariance {
    pub dim: usize,
    pub diag: f64,
}

impl InterferenceCovariance {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal_element(self.dim, self.dim, self.diag)
    }
}

pub fn intercell_covariance(
    user: PolarPoint,
    layout: &LayoutRealization,
    params: &SystemParams,
) -> Result<InterferenceCovariance> {
    let p_int = intercell_power(user, layout, params.alpha)?;
    Ok(InterferenceCovariance { dim: params.user_antennas, diag: params.snr * p_int })
}

/// Interference power for one user over `layouts` independent layout draws.
/// Layout `r` comes from its own substream, so different users see the same
/// layouts.
pub fn intercell_power_samples(
    user: PolarPoint,
    kind: LayoutKind,
    params: &SystemParams,
    layouts: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    map_indexed(exec, layouts, |r| {
        let mut rng = substream(seed, Stream::Layout, &[r as u64]);
        loop {
            let layout = sample_layout(kind, params, &mut rng)?;
            match intercell_power(user, &layout, params.alpha) {
                Err(Error::Coincident) => continue,
                other => return other,
            }
        }
    })
    .into_iter()
    .collect()
}

/// Running-mean and tail diagnostics of `E[P_int^n]`.
///
/// A divergent moment has no meaningful point estimate, so the trajectory
/// and the tail index are reported instead of a single number.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDiagnostics {
    pub order: u32,
    pub samples: usize,
    /// `(sample count, running mean)` at logarithmically spaced counts,
    /// ending at the full sample.
    pub trajectory: Vec<(usize, f64)>,
    /// Hill estimate of the tail index of the sampled powers; values below
    /// `order` mean the moment is infinite.
    pub tail_index: f64,
    /// `|m(n) − m(n/10)|` for the final decade of the running mean.
    pub final_decade_drift: f64,
}

impl MomentDiagnostics {
    pub fn mean(&self) -> f64 {
        self.trajectory.last().map_or(f64::NAN, |p| p.1)
    }

    pub fn relative_drift(&self) -> f64 {
        self.final_decade_drift / self.mean().abs()
    }
}

const CHUNK: usize = 4096;

/// Monte Carlo of the `order`-th moment of the interference power with
/// `params.clusters` fresh neighbour clusters per cell in every draw.
pub fn intercell_moment_mc(
    user: PolarPoint,
    order: u32,
    params: &SystemParams,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<MomentDiagnostics> {
    if order == 0 {
        return Err(Error::Domain("moment order must be at least 1".into()));
    }
    if trials < 10 {
        return Err(Error::Domain("need at least 10 trials".into()));
    }
    let [ux, uy] = user.to_xy();
    let l = params.clusters;
    let alpha = params.alpha;
    let centers: Vec<[f64; 2]> = CellIndex::neighbors().map(|c| c.center().to_xy()).collect();
    let chunks = trials.div_ceil(CHUNK);
    let values: Vec<f64> = map_indexed(exec, chunks, |c| {
        let mut rng = substream(seed, Stream::Interference, &[c as u64]);
        let count = CHUNK.min(trials - c * CHUNK);
        (0..count)
            .map(|_| {
                let mut total = 0.0;
                for &[cx, cy] in &centers {
                    for _ in 0..l {
                        let d2 = loop {
                            let [x, y] = sample_unit_disk(&mut rng).to_xy();
                            let d2 = (cx + x - ux).powi(2) + (cy + y - uy).powi(2);
                            if d2 > 0.0 {
                                break d2;
                            }
                        };
                        total += d2.powf(-alpha / 2.0);
                    }
                }
                (total / l as f64).powi(order as i32)
            })
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut trajectory = Vec::new();
    let mut checkpoints = checkpoints(trials).into_iter().peekable();
    let mut sum = 0.0;
    let mut at_tenth = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        let n = i + 1;
        if n == trials / 10 {
            at_tenth = sum / n as f64;
        }
        if checkpoints.peek() == Some(&n) {
            trajectory.push((n, sum / n as f64));
            checkpoints.next();
        }
    }
    let final_mean = sum / trials as f64;
    Ok(MomentDiagnostics {
        order,
        samples: trials,
        trajectory,
        tail_index: hill_estimate(values),
        final_decade_drift: (final_mean - at_tenth).abs(),
    })
}

fn checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    while decade <= n {
        for m in [1, 2, 5] {
            if m * decade <= n {
                out.push(m * decade);
            }
        }
        decade *= 10;
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Hill estimator over the top `sqrt(n)` order statistics.
fn hill_estimate(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| b.total_cmp(a));
    let k = ((values.len() as f64).sqrt() as usize).clamp(2, values.len() - 1);
    let threshold = values[k].ln();
    let mean_excess = values[..k].iter().map(|v| v.ln() - threshold).sum::<f64>() / k as f64;
    1.0 / mean_excess
}

/// Draws a user uniformly in cell 0 that does not coincide with any cluster.
pub(crate) fn draw_user<R: Rng + ?Sized>(layout: &LayoutRealization, rng: &mut R) -> PolarPoint {
    loop {
        let u = crate::geometry::sample_user_position(rng);
        let [ux, uy] = u.to_xy();
        let clear = (0..CELLS).all(|c| layout.cluster_xy(c).iter().all(|&[x, y]| x != ux || y != uy));
        if clear {
            return u;
        }
    }
}
