//! Monte Carlo estimation of per-antenna ergodic rates.
//!
//! Every rate is per user antenna, in bits/s/Hz. Noise power is one and a
//! user with serving-cell power gain `‖γ‖²` sees the effective SINR
//! `(1/K)‖γ‖² / (1/snr + P_int)`; the single-user capacity is the `K = 1`,
//! `P_int = 0` case. Power is water-filled over the effective subchannels
//! with that SINR as budget.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{compose_channel, gain_from_xy, sample_small_scale, serving_gains, ChannelRealization, SystemParams};
use crate::error::{Error, Result};
use crate::geometry::{sample_layout, LayoutKind, LayoutRealization, PolarPoint, CELLS};
use crate::interference::{draw_user, intercell_power};
use crate::parallel::{map_indexed, Execution};
use crate::precoding::{bd_effective_spectra, equal_power_rate, gram_spectrum, waterfill_rate};
use crate::rng::{substream, Stream};
use crate::stats::Summary;

/// Requested Monte Carlo draw counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawCounts {
    pub positions: usize,
    pub layouts: usize,
    pub channels: usize,
}

impl Default for DrawCounts {
    fn default() -> Self {
        Self { positions: 100, layouts: 100, channels: 200 }
    }
}

impl DrawCounts {
    pub fn new(positions: usize, layouts: usize, channels: usize) -> Result<Self> {
        let d = Self { positions, layouts, channels };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions == 0 || self.layouts == 0 || self.channels == 0 {
            return Err(Error::Domain("draw counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws actually consumed at each averaging level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialCounts {
    pub channels: usize,
    pub positions: usize,
    pub layouts: usize,
}

/// Monte Carlo mean with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub mean: f64,
    pub half_width: f64,
    /// Number of outer samples the confidence interval is computed from.
    pub outer_samples: usize,
    pub trials: TrialCounts,
    pub params: SystemParams,
    pub layout_kind: LayoutKind,
}

impl RateEstimate {
    fn new(summary: Summary, trials: TrialCounts, params: SystemParams, layout_kind: LayoutKind) -> Self {
        Self { mean: summary.mean, half_width: summary.half_width(), outer_samples: summary.n, trials, params, layout_kind }
    }
}

/// Single-user capacity of one channel realization.
pub fn single_user_rate(chan: &ChannelRealization, params: &SystemParams) -> Result<f64> {
    waterfill_rate(&gram_spectrum(&chan.g_tilde)?, params.per_user_snr() * chan.gain())
}

/// Capacity of a lone user averaged over small-scale fading. Interference
/// is ignored.
pub fn single_user_capacity<R: Rng + ?Sized>(
    user: PolarPoint,
    layout: &LayoutRealization,
    params: &SystemParams,
    channel_draws: usize,
    rng: &mut R,
) -> Result<RateEstimate> {
    let rates = (0..channel_draws)
        .map(|_| single_user_rate(&compose_channel(layout, user, params, rng)?, params))
        .collect::<Result<Vec<_>>>()?;
    let trials = TrialCounts { channels: channel_draws, positions: 1, layouts: 1 };
    Ok(RateEstimate::new(Summary::of(&rates), trials, *params, layout.kind()))
}

/// The rates compared by the nearest-cluster lower-bound argument, on one
/// realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundChain {
    /// Water-filled capacity.
    pub full: f64,
    /// Equal power over the `N` subchannels.
    pub equal_power: f64,
    /// Equal power, keeping only the nearest cluster's `N × N` block.
    pub nearest_cluster: f64,
}

/// Evaluates [`BoundChain`] for a lone user with small-scale fading `h`
/// (`N × M`, cluster-major columns).
pub fn rate_bound_chain(
    layout: &LayoutRealization,
    user: PolarPoint,
    params: &SystemParams,
    h: DMatrix<Complex64>,
) -> Result<BoundChain> {
    let n = params.user_antennas;
    let snr = params.per_user_snr();
    let chan = ChannelRealization::from_parts(serving_gains(layout, user, params.alpha)?, h)?;
    let spectrum = gram_spectrum(&chan.g_tilde)?;
    let full = waterfill_rate(&spectrum, snr * chan.gain())?;
    let equal_power = equal_power_rate(&spectrum, snr * chan.gain());
    let per = layout.antennas_per_cluster();
    let (nearest, gain) = chan
        .gamma
        .iter()
        .step_by(per)
        .enumerate()
        .fold((0, 0.0), |best, (l, &g)| if g > best.1 { (l, g) } else { best });
    let block = chan.h.columns(nearest * per, n).into_owned();
    let nearest_cluster = equal_power_rate(&gram_spectrum(&block)?, snr * gain * gain);
    Ok(BoundChain { full, equal_power, nearest_cluster })
}

/// Large-scale quantities of one multi-user drop that do not change with
/// the small-scale fading.
struct BdDrop {
    users: Vec<PolarPoint>,
    /// `1 / (K (1/snr + P_int))` per user.
    sinr_scale: Vec<f64>,
}

impl BdDrop {
    fn new(users: &[PolarPoint], layout: &LayoutRealization, params: &SystemParams, interference: bool) -> Result<Self> {
        if users.len() != params.users {
            return Err(Error::Domain(format!("{} users given, K = {}", users.len(), params.users)));
        }
        let sinr_scale = users
            .iter()
            .map(|&u| {
                let p_int = if interference { intercell_power(u, layout, params.alpha)? } else { 0.0 };
                Ok(1.0 / (params.users as f64 * (1.0 / params.snr + p_int)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { users: users.to_vec(), sinr_scale })
    }

    fn rates<R: Rng + ?Sized>(&self, layout: &LayoutRealization, params: &SystemParams, rng: &mut R) -> Result<Vec<f64>> {
        let chans = self
            .users
            .iter()
            .map(|&u| compose_channel(layout, u, params, rng))
            .collect::<Result<Vec<_>>>()?;
        let spectra = bd_effective_spectra(&chans)?;
        chans
            .iter()
            .zip(&spectra)
            .zip(&self.sinr_scale)
            .map(|((c, s), k)| waterfill_rate(s, c.gain() * k))
            .collect()
    }
}

/// BD rates of all `K` users of cell 0 over `channel_draws` fading draws,
/// one [`Summary`] per user.
pub fn bd_user_rates<R: Rng + ?Sized>(
    users: &[PolarPoint],
    layout: &LayoutRealization,
    params: &SystemParams,
    channel_draws: usize,
    interference: bool,
    rng: &mut R,
) -> Result<Vec<Summary>> {
    let drop = BdDrop::new(users, layout, params, interference)?;
    let draws = (0..channel_draws).map(|_| drop.rates(layout, params, rng)).collect::<Result<Vec<_>>>()?;
    Ok((0..users.len()).map(|k| Summary::of(&draws.iter().map(|r| r[k]).collect::<Vec<_>>())).collect())
}

/// BD rate of `user_index` among `users`, with inter-cell interference
/// from the layout's neighbour cells.
pub fn bd_per_antenna_rate<R: Rng + ?Sized>(
    user_index: usize,
    users: &[PolarPoint],
    layout: &LayoutRealization,
    params: &SystemParams,
    channel_draws: usize,
    rng: &mut R,
) -> Result<RateEstimate> {
    if user_index >= users.len() {
        return Err(Error::Domain(format!("user {user_index} out of range")));
    }
    let s = bd_user_rates(users, layout, params, channel_draws, true, rng)?.swap_remove(user_index);
    let trials = TrialCounts { channels: channel_draws, positions: 1, layouts: 1 };
    Ok(RateEstimate::new(s, trials, *params, layout.kind()))
}

/// Greedy user-to-small-cell assignment in user order: each user takes the
/// nearest cell-0 base station not yet taken, ties going to the lower index.
pub fn assign_small_cells(users: &[PolarPoint], layout: &LayoutRealization) -> Result<Vec<usize>> {
    let l = layout.clusters_per_cell();
    if users.len() > l {
        return Err(Error::TooManyUsers { users: users.len(), cells: l });
    }
    let bs = layout.cluster_xy(0);
    let mut taken = vec![false; l];
    Ok(users
        .iter()
        .map(|u| {
            let [ux, uy] = u.to_xy();
            let mut best = (usize::MAX, f64::INFINITY);
            for (i, &[x, y]) in bs.iter().enumerate() {
                let d2 = (ux - x).powi(2) + (uy - y).powi(2);
                if !taken[i] && d2 < best.1 {
                    best = (i, d2);
                }
            }
            taken[best.0] = true;
            best.0
        })
        .collect())
}

/// Large-scale state of one small-cell drop.
struct SmallCellDrop {
    sinr: Vec<f64>,
}

impl SmallCellDrop {
    /// Interference comes from the other users' base stations in cell 0 and
    /// from the first `K` base stations of each neighbour cell, all
    /// transmitting `snr / K`.
    fn new(users: &[PolarPoint], assignments: &[usize], layout: &LayoutRealization, params: &SystemParams) -> Result<Self> {
        let k = users.len();
        if k != params.users || assignments.len() != k {
            return Err(Error::Domain("users, assignments and K disagree".into()));
        }
        if k > layout.clusters_per_cell() {
            return Err(Error::TooManyUsers { users: k, cells: layout.clusters_per_cell() });
        }
        let alpha = params.alpha;
        let own = layout.cluster_xy(0);
        let sinr = users
            .iter()
            .enumerate()
            .map(|(j, u)| {
                let [ux, uy] = u.to_xy();
                let power = |[x, y]: [f64; 2]| gain_from_xy(ux - x, uy - y, alpha).map(|g| g * g);
                let signal = power(own[assignments[j]])?;
                let mut interference = 0.0;
                for (i, &a) in assignments.iter().enumerate() {
                    if i != j {
                        interference += power(own[a])?;
                    }
                }
                for cell in 1..CELLS {
                    for &p in &layout.cluster_xy(cell)[..k] {
                        interference += power(p)?;
                    }
                }
                // ‖γ‖² of an N-antenna base station is N·d^(−α).
                let n = params.user_antennas as f64;
                Ok(n * signal / (k as f64) / (1.0 / params.snr + interference / k as f64))
            })
            .collect::<Result<_>>()?;
        Ok(Self { sinr })
    }

    fn rates<R: Rng + ?Sized>(&self, params: &SystemParams, rng: &mut R) -> Result<Vec<f64>> {
        let n = params.user_antennas;
        let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        self.sinr
            .iter()
            .map(|&sinr| {
                let h = sample_small_scale(n, n, rng) * scale;
                waterfill_rate(&gram_spectrum(&h)?, sinr)
            })
            .collect()
    }
}

/// Rate of `user_index` served by its assigned small cell.
pub fn small_cell_rate<R: Rng + ?Sized>(
    user_index: usize,
    users: &[PolarPoint],
    assignments: &[usize],
    layout: &LayoutRealization,
    params: &SystemParams,
    channel_draws: usize,
    rng: &mut R,
) -> Result<RateEstimate> {
    if user_index >= users.len() {
        return Err(Error::Domain(format!("user {user_index} out of range")));
    }
    let drop = SmallCellDrop::new(users, assignments, layout, params)?;
    let rates = (0..channel_draws)
        .map(|_| drop.rates(params, rng).map(|r| r[user_index]))
        .collect::<Result<Vec<_>>>()?;
    let trials = TrialCounts { channels: channel_draws, positions: 1, layouts: 1 };
    Ok(RateEstimate::new(Summary::of(&rates), trials, *params, LayoutKind::SmallCell))
}

pub(crate) fn layout_for(kind: LayoutKind, params: &SystemParams, seed: u64, r: usize) -> Result<LayoutRealization> {
    match kind {
        LayoutKind::Ca => Ok(LayoutRealization::co_located(params.bs_antennas())),
        _ => sample_layout(kind, params, &mut substream(seed, Stream::Layout, &[r as u64])),
    }
}

/// Users of drop `(r, d)`, drawn in order from their own substream so that
/// the first users are shared between runs with different `K`.
pub(crate) fn drop_users(layout: &LayoutRealization, k: usize, seed: u64, r: usize, d: usize) -> Vec<PolarPoint> {
    let mut rng = substream(seed, Stream::Position, &[r as u64, d as u64]);
    (0..k).map(|_| draw_user(layout, &mut rng)).collect()
}

/// Position- and layout-averaged per-antenna rate.
///
/// * `K = 1` with the co-located or distributed layout gives the
///   single-user capacity. Outer samples are `positions` user positions,
///   each averaged over `layouts` layouts (one for the co-located layout)
///   and `channels` fading draws; the confidence interval is over the
///   per-position means.
/// * `K > 1`, or the small-cell layout, gives the multi-user rate with
///   inter-cell interference. There are `layouts` outer slots, each with a
///   fresh layout and `ceil(positions / K)` drops of `K` users; every drop
///   is averaged over all its users and `channels` fading draws. The
///   confidence interval is over the per-slot means. For the co-located
///   layout a slot only indexes independent user drops.
pub fn average_rate(
    kind: LayoutKind,
    params: &SystemParams,
    draws: DrawCounts,
    seed: u64,
    exec: Execution,
) -> Result<RateEstimate> {
    params.validate()?;
    draws.validate()?;
    if params.users == 1 && kind != LayoutKind::SmallCell {
        single_user_average(kind, params, draws, seed, exec)
    } else {
        multi_user_average(kind, params, draws, seed, exec)
    }
}

fn single_user_average(
    kind: LayoutKind,
    params: &SystemParams,
    draws: DrawCounts,
    seed: u64,
    exec: Execution,
) -> Result<RateEstimate> {
    let nl = if kind == LayoutKind::Ca { 1 } else { draws.layouts };
    let layouts = map_indexed(exec, nl, |r| layout_for(kind, params, seed, r)).into_iter().collect::<Result<Vec<_>>>()?;
    let cells = map_indexed(exec, draws.positions * nl, |i| {
        let (q, r) = (i / nl, i % nl);
        let layout = &layouts[r];
        let user = draw_user(layout, &mut substream(seed, Stream::Position, &[q as u64]));
        let mut rng = substream(seed, Stream::Fading, &[q as u64, r as u64]);
        let mut sum = 0.0;
        for _ in 0..draws.channels {
            sum += single_user_rate(&compose_channel(layout, user, params, &mut rng)?, params)?;
        }
        Ok(sum / draws.channels as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let per_position: Vec<f64> = cells.chunks(nl).map(|c| c.iter().sum::<f64>() / nl as f64).collect();
    let trials = TrialCounts { channels: draws.channels, positions: draws.positions, layouts: nl };
    Ok(RateEstimate::new(Summary::of(&per_position), trials, *params, kind))
}

fn multi_user_average(
    kind: LayoutKind,
    params: &SystemParams,
    draws: DrawCounts,
    seed: u64,
    exec: Execution,
) -> Result<RateEstimate> {
    let k = params.users;
    let slots = draws.layouts;
    let drops = draws.positions.div_ceil(k);
    let layouts = map_indexed(exec, if kind == LayoutKind::Ca { 1 } else { slots }, |r| layout_for(kind, params, seed, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_drop = map_indexed(exec, slots * drops, |i| {
        let (r, d) = (i / drops, i % drops);
        let layout = &layouts[if kind == LayoutKind::Ca { 0 } else { r }];
        let users = drop_users(layout, k, seed, r, d);
        let mut rng = substream(seed, Stream::Fading, &[r as u64, d as u64]);
        let mut sum = 0.0;
        if kind == LayoutKind::SmallCell {
            let assignments = assign_small_cells(&users, layout)?;
            let drop = SmallCellDrop::new(&users, &assignments, layout, params)?;
            for _ in 0..draws.channels {
                sum += drop.rates(params, &mut rng)?.iter().sum::<f64>();
            }
        } else {
            let drop = BdDrop::new(&users, layout, params, true)?;
            for _ in 0..draws.channels {
                sum += drop.rates(layout, params, &mut rng)?.iter().sum::<f64>();
            }
        }
        Ok(sum / (draws.channels * k) as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let per_slot: Vec<f64> = per_drop.chunks(drops).map(|c| c.iter().sum::<f64>() / drops as f64).collect();
    let trials = TrialCounts {
        channels: draws.channels,
        positions: drops * k,
        layouts: if kind == LayoutKind::Ca { 1 } else { slots },
    };
    Ok(RateEstimate::new(Summary::of(&per_slot), trials, *params, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{ca_su_rate, phi};
    use crate::geometry::CellIndex;
    use crate::quad::Quadrature;
    use std::f64::consts::PI;

    fn at(rho: f64, theta: f64) -> PolarPoint {
        PolarPoint::new(rho, theta).unwrap()
    }

    #[test]
    fn scalar_channel_matches_quadrature() {
        // N = M = 1 at unit distance: E[log2(1 + snr |h|²)] with |h|² ~ Exp(1).
        let p = SystemParams::new(4.0, 10.0, 1, 1, 1).unwrap();
        let clusters = (0..CELLS)
            .map(|i| vec![if i == 0 { at(1.0, 0.0) } else { CellIndex::new(i).unwrap().center() }])
            .collect();
        let lay = LayoutRealization::new(LayoutKind::Da, clusters, 1).unwrap();
        let est = single_user_capacity(PolarPoint::ORIGIN, &lay, &p, 200_000, &mut substream(1, Stream::Fading, &[]))
            .unwrap();
        let exact = Quadrature::default()
            .integrate_pieces(|t: f64| (1.0 + 10.0 * t).log2() * (-t).exp(), &[0.0, 1.0, 10.0, 60.0])
            .value;
        assert!((est.mean - exact).abs() < 3.0 * est.half_width.max(1e-3), "{} vs {exact}", est.mean);
    }

    #[test]
    fn co_located_large_l_approaches_asymptote() {
        let p = SystemParams::new(4.0, 10.0, 1, 128, 2).unwrap();
        let lay = LayoutRealization::co_located(p.bs_antennas());
        let user = at(0.6, 1.0);
        let est = single_user_capacity(user, &lay, &p, 200, &mut substream(2, Stream::Fading, &[])).unwrap();
        let asym = ca_su_rate(0.6, 128, &p).unwrap().value;
        assert!((est.mean - asym).abs() < 0.05, "{} vs {asym}", est.mean);
    }

    #[test]
    fn distributed_rate_exceeds_nearest_cluster_bound() {
        let p = SystemParams::new(4.0, 10.0, 1, 32, 8).unwrap();
        let lay = sample_layout(LayoutKind::Da, &p, &mut substream(4, Stream::Layout, &[])).unwrap();
        let user = at(0.3, 2.0);
        let est = single_user_capacity(user, &lay, &p, 50, &mut substream(4, Stream::Fading, &[])).unwrap();
        let d_min = lay.clusters(CellIndex::SERVING).iter().map(|c| c.distance(user)).fold(f64::INFINITY, f64::min);
        let bound = phi(10.0 * d_min.powi(-4)).unwrap();
        assert!(est.mean > bound - est.half_width, "{} vs {bound}", est.mean);
    }

    #[test]
    fn bound_chain_holds() {
        for n in [2, 4, 8] {
            let p = SystemParams::new(4.0, 10.0, 1, 16, n).unwrap();
            for s in 0..10u64 {
                let lay = sample_layout(LayoutKind::Da, &p, &mut substream(s, Stream::Layout, &[])).unwrap();
                let mut rng = substream(s, Stream::Fading, &[]);
                let user = draw_user(&lay, &mut rng);
                let h = sample_small_scale(n, p.bs_antennas(), &mut rng);
                let c = rate_bound_chain(&lay, user, &p, h).unwrap();
                assert!(c.full >= c.equal_power - 1e-9 && c.equal_power >= c.nearest_cluster - 1e-9, "{c:?}");
            }
        }
    }

    #[test]
    fn single_user_bd_without_interference_is_capacity() {
        let p = SystemParams::new(4.0, 10.0, 1, 8, 2).unwrap();
        let lay = sample_layout(LayoutKind::Da, &p, &mut substream(6, Stream::Layout, &[])).unwrap();
        let user = [at(0.5, 0.5)];
        let bd = bd_user_rates(&user, &lay, &p, 20, false, &mut substream(6, Stream::Fading, &[])).unwrap();
        let su = single_user_capacity(user[0], &lay, &p, 20, &mut substream(6, Stream::Fading, &[])).unwrap();
        assert!((bd[0].mean - su.mean).abs() < 1e-12);
    }

    #[test]
    fn bd_rate_with_interference_is_lower() {
        let p = SystemParams::new(4.0, 10.0, 3, 8, 2).unwrap();
        let lay = sample_layout(LayoutKind::Da, &p, &mut substream(7, Stream::Layout, &[])).unwrap();
        let users = [at(0.2, 0.1), at(0.8, 2.0), at(0.5, 4.0)];
        let with = bd_per_antenna_rate(1, &users, &lay, &p, 10, &mut substream(7, Stream::Fading, &[])).unwrap();
        let without = bd_user_rates(&users, &lay, &p, 10, false, &mut substream(7, Stream::Fading, &[])).unwrap();
        assert!(with.mean < without[1].mean);
        assert!(bd_per_antenna_rate(3, &users, &lay, &p, 1, &mut substream(7, Stream::Fading, &[])).is_err());
    }

    #[test]
    fn small_cell_assignment() {
        let p = SystemParams::new(4.0, 10.0, 2, 3, 2).unwrap();
        let mut clusters: Vec<Vec<PolarPoint>> =
            (0..CELLS).map(|i| vec![CellIndex::new(i).unwrap().center(); 3]).collect();
        clusters[0] = vec![at(0.5, 0.0), at(0.5, PI), at(0.5, 0.0)];
        let lay = LayoutRealization::new(LayoutKind::SmallCell, clusters, 2).unwrap();
        // Both users are nearest to the east station; the first keeps it
        // (the lower of the two tied indices) and the second takes the tie.
        let users = [at(0.6, 0.0), at(0.7, 0.0)];
        assert_eq!(assign_small_cells(&users, &lay).unwrap(), vec![0, 2]);
        let too_many = [at(0.1, 0.0); 4];
        assert_eq!(assign_small_cells(&too_many, &lay), Err(Error::TooManyUsers { users: 4, cells: 3 }));
        let _ = p;
    }

    #[test]
    fn small_cell_single_user_sees_only_neighbours() {
        let p = SystemParams::new(4.0, 10.0, 1, 1, 2).unwrap();
        let user = at(0.4, 1.0);
        let clusters = (0..CELLS)
            .map(|i| vec![if i == 0 { at(0.5, 1.2) } else { CellIndex::new(i).unwrap().center() }])
            .collect();
        let lay = LayoutRealization::new(LayoutKind::SmallCell, clusters, 2).unwrap();
        let drop = SmallCellDrop::new(&[user], &[0], &lay, &p).unwrap();
        let d = user.distance(at(0.5, 1.2));
        let expect = 2.0 * d.powi(-4) / (0.1 + crate::interference::intercell_power_ca(user, 4.0));
        assert!((drop.sinr[0] - expect).abs() < 1e-9 * expect);
        let est = small_cell_rate(0, &[user], &[0], &lay, &p, 10, &mut substream(1, Stream::Fading, &[])).unwrap();
        assert!(est.mean > 0.0);
    }

    #[test]
    fn average_rate_is_reproducible_and_mode_independent() {
        let p = SystemParams::new(4.0, 10.0, 1, 8, 2).unwrap();
        let d = DrawCounts::new(6, 4, 3).unwrap();
        let a = average_rate(LayoutKind::Da, &p, d, 11, Execution::Parallel).unwrap();
        let b = average_rate(LayoutKind::Da, &p, d, 11, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, TrialCounts { channels: 3, positions: 6, layouts: 4 });
        let pm = SystemParams::new(4.0, 10.0, 3, 6, 2).unwrap();
        for kind in [LayoutKind::Ca, LayoutKind::Da, LayoutKind::SmallCell] {
            let a = average_rate(kind, &pm, d, 11, Execution::Parallel).unwrap();
            let b = average_rate(kind, &pm, d, 11, Execution::Sequential).unwrap();
            assert_eq!(a, b);
            assert!(a.mean > 0.0 && a.half_width >= 0.0);
        }
    }

    #[test]
    fn half_width_shrinks_with_more_positions() {
        let p = SystemParams::new(4.0, 10.0, 1, 16, 2).unwrap();
        let hw = |n| average_rate(LayoutKind::Ca, &p, DrawCounts::new(n, 1, 4).unwrap(), 3, Execution::Parallel)
            .unwrap()
            .half_width;
        let ratio = hw(400) / hw(1600);
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn rate_grows_with_snr() {
        let mut last = 0.0;
        for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
            let p = SystemParams::with_snr_db(4.0, db, 2, 4, 2).unwrap();
            let r = average_rate(LayoutKind::Da, &p, DrawCounts::new(4, 4, 2).unwrap(), 5, Execution::Parallel)
                .unwrap()
                .mean;
            assert!(r >= last, "{db}: {r} < {last}");
            last = r;
        }
    }
}
