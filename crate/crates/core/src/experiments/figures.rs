//! Per-figure experiment drivers. Each figure has a fixed column schema.

use std::f64::consts::FRAC_PI_6;

use crate::asymptotics::{
    ca_mu_avg, ca_mu_avg_exact, ca_su_avg, ca_su_rate, da_mu_avg_lb_with, da_su_avg_lb, da_su_lb, psi_d, sc_avg_lb,
    AsymptoticValue,
};
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::experiments::config::{ExperimentConfig, FigureId};
use crate::experiments::table::{Cell, ResultTable};
use crate::geometry::{CellIndex, LayoutKind, LayoutRealization, PolarPoint};
use crate::interference::{draw_user, intercell_power_ca, intercell_power_samples};
use crate::parallel::{map_indexed, Execution};
use crate::rate_sim::{average_rate, bd_user_rates, drop_users, layout_for, single_user_capacity, DrawCounts};
use crate::rng::{substream, Stream};
use crate::stats::Summary;

/// Largest BS antenna count per cell used by desk-scale runs.
pub const DESK_MAX_ANTENNAS: usize = 256;

/// Header of each figure's CSV.
pub fn schema(id: FigureId) -> &'static [&'static str] {
    match id {
        FigureId::Fig2 => &["layout", "position", "access_distance", "simulated", "half_width", "asymptotic", "formula_id"],
        FigureId::Fig3 | FigureId::Fig5a | FigureId::Fig5b | FigureId::Fig9 => {
            &["layout", "clusters", "users", "simulated", "half_width", "asymptotic", "formula_id"]
        }
        FigureId::Fig4 => &["rho", "ca_power", "da_mean", "da_std_dev", "da_half_width"],
        FigureId::Fig6 => &["layout", "drop", "user", "rho", "theta", "rate", "half_width"],
        FigureId::Fig8 => &["layout", "users", "ratio", "clusters", "asymptotic", "formula_id"],
    }
}

/// Scalar settings shared by every figure after applying overrides.
struct Common {
    alpha: f64,
    snr_db: f64,
    n: usize,
    seed: u64,
    full: bool,
}

impl Common {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            alpha: ExperimentConfig::scalar(&cfg.grid.alpha, 4.0),
            snr_db: ExperimentConfig::scalar(&cfg.grid.snr_db, 10.0),
            n: ExperimentConfig::scalar(&cfg.grid.user_antennas, 2),
            seed: cfg.seed,
            full: cfg.full,
        }
    }

    fn params(&self, k: usize, l: usize) -> Result<SystemParams> {
        SystemParams::with_snr_db(self.alpha, self.snr_db, k, l, self.n)
    }

    fn desk_fits(&self, l: usize) -> bool {
        self.full || l * self.n <= DESK_MAX_ANTENNAS
    }
}

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |&l| Some(l * 2)).take_while(|&l| l <= to).collect()
}

fn layouts(cfg: &ExperimentConfig, default: &[LayoutKind], allowed: &[LayoutKind], id: FigureId) -> Result<Vec<LayoutKind>> {
    let kinds = cfg.grid.layout.clone().unwrap_or_else(|| default.to_vec());
    if let Some(bad) = kinds.iter().find(|k| !allowed.contains(k)) {
        return Err(Error::Config(format!("{id} does not support the {} layout", bad.name())));
    }
    if kinds.is_empty() {
        return Err(Error::Config(format!("{id} needs at least one layout")));
    }
    Ok(kinds)
}

fn asym_cells(a: &AsymptoticValue) -> [Cell; 2] {
    [a.value.into(), a.formula_id.into()]
}

/// Runs figure `id` with the overrides in `cfg`.
pub fn run_figure(id: FigureId, cfg: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let c = Common::new(cfg);
    let mut t = ResultTable::new(id.name(), schema(id));
    match id {
        FigureId::Fig2 => fig2(&c, cfg, exec, &mut t)?,
        FigureId::Fig3 => fig3(&c, cfg, exec, &mut t)?,
        FigureId::Fig4 => fig4(&c, cfg, exec, &mut t)?,
        FigureId::Fig5a | FigureId::Fig5b => fig5(id, &c, cfg, exec, &mut t)?,
        FigureId::Fig6 => fig6(&c, cfg, exec, &mut t)?,
        FigureId::Fig8 => fig8(&c, cfg, &mut t)?,
        FigureId::Fig9 => fig9(&c, cfg, exec, &mut t)?,
    }
    Ok(t)
}

/// Single-user rate against the minimum access distance, one row per
/// sampled position. The distributed layout is redrawn for every position.
fn fig2(c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let both = [LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &both, &both, FigureId::Fig2)?;
    let l = ExperimentConfig::scalar(&cfg.grid.clusters, 50);
    let draws = cfg.draws.resolve(DrawCounts { positions: 100, layouts: 1, channels: 50 })?;
    let p = c.params(1, l)?;
    for kind in kinds {
        let rows = map_indexed(exec, draws.positions, |q| -> Result<Vec<Cell>> {
            let layout = layout_for(kind, &p, c.seed, q)?;
            let user = draw_user(&layout, &mut substream(c.seed, Stream::Position, &[q as u64]));
            let mut rng = substream(c.seed, Stream::Fading, &[q as u64]);
            let est = single_user_capacity(user, &layout, &p, draws.channels, &mut rng)?;
            let (x, asym) = match kind {
                LayoutKind::Ca => (user.rho, ca_su_rate(user.rho, l, &p)?),
                _ => {
                    let d = min_distance(&layout, user);
                    (d, da_su_lb(d, &p)?)
                }
            };
            let [a, f] = asym_cells(&asym);
            Ok(vec![kind.name().into(), q.into(), x.into(), est.mean.into(), est.half_width.into(), a, f])
        });
        for r in rows {
            t.push(r?)?;
        }
    }
    Ok(())
}

fn min_distance(layout: &LayoutRealization, user: PolarPoint) -> f64 {
    layout.clusters(CellIndex::SERVING).iter().map(|c| c.distance(user)).fold(f64::INFINITY, f64::min)
}

/// Single-user average capacity against `L`.
fn fig3(c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let both = [LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &both, &both, FigureId::Fig3)?;
    let ls = cfg.grid.clusters.clone().unwrap_or_else(|| doubling(1, if c.full { 512 } else { 128 }));
    let draws = cfg.draws.resolve(DrawCounts { positions: 100, layouts: 100, channels: 10 })?;
    for kind in kinds {
        for &l in &ls {
            let p = c.params(1, l)?;
            let est = average_rate(kind, &p, draws, c.seed, exec)?;
            let asym = if kind == LayoutKind::Ca { ca_su_avg(l, &p)? } else { da_su_avg_lb(l, &p)? };
            let [a, f] = asym_cells(&asym);
            t.push(vec![kind.name().into(), l.into(), 1usize.into(), est.mean.into(), est.half_width.into(), a, f])?;
        }
    }
    Ok(())
}

/// Interference power along the ray `θ = π/6` towards neighbour cell 1.
fn fig4(c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let k = ExperimentConfig::scalar(&cfg.grid.users, 50);
    let l = ExperimentConfig::scalar(&cfg.grid.clusters, 200);
    let draws = cfg.draws.resolve(DrawCounts { positions: 1, layouts: 100, channels: 1 })?;
    let p = c.params(k, l)?;
    for i in 0..=20 {
        let rho = i as f64 / 20.0;
        let user = PolarPoint::new(rho, FRAC_PI_6)?;
        let samples = intercell_power_samples(user, LayoutKind::Da, &p, draws.layouts, c.seed, exec)?;
        let s = Summary::of(&samples);
        t.push(vec![
            rho.into(),
            intercell_power_ca(user, c.alpha).into(),
            s.mean.into(),
            s.std_dev.into(),
            s.half_width().into(),
        ])?;
    }
    Ok(())
}

/// Multi-user BD average rate against `L`, at `L/K = 2` (5a) or fixed `K` (5b).
fn fig5(id: FigureId, c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let both = [LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &both, &both, id)?;
    let top = if c.full { 512 } else { DESK_MAX_ANTENNAS / c.n };
    let points: Vec<(usize, usize)> = if id == FigureId::Fig5a {
        let ls = cfg.grid.clusters.clone().unwrap_or_else(|| doubling(8, top));
        ls.into_iter().map(|l| (l, (l / 2).max(1))).collect()
    } else {
        let k = ExperimentConfig::scalar(&cfg.grid.users, 20);
        let ls = cfg.grid.clusters.clone().unwrap_or_else(|| {
            let mut v = vec![20, 32];
            v.extend(doubling(64, top));
            v
        });
        ls.into_iter().filter(|&l| l >= k).map(|l| (l, k)).collect()
    };
    let draws = cfg.draws.resolve(DrawCounts { positions: 100, layouts: 100, channels: 2 })?;
    multi_user_rows(c, &kinds, &points, draws, exec, t)
}

fn multi_user_rows(
    c: &Common,
    kinds: &[LayoutKind],
    points: &[(usize, usize)],
    draws: DrawCounts,
    exec: Execution,
    t: &mut ResultTable,
) -> Result<()> {
    let psi = if kinds.contains(&LayoutKind::Da) { Some(psi_d(c.alpha)?) } else { None };
    for &kind in kinds {
        for &(l, k) in points {
            if kind != LayoutKind::SmallCell && !c.desk_fits(l) {
                continue;
            }
            let p = c.params(k, l)?;
            let est = average_rate(kind, &p, draws, c.seed, exec)?;
            let asym = match kind {
                LayoutKind::Ca => ca_mu_avg_exact(l, k, &p)?,
                LayoutKind::Da => da_mu_avg_lb_with(l, k, &p, psi.expect("computed for DA"))?,
                LayoutKind::SmallCell => sc_avg_lb(l, k, &p)?,
            };
            let [a, f] = asym_cells(&asym);
            t.push(vec![kind.name().into(), l.into(), k.into(), est.mean.into(), est.half_width.into(), a, f])?;
        }
    }
    Ok(())
}

/// Per-user BD rates against position. Each drop places `K` users in a
/// fresh layout; the rate of each user is averaged over fading only.
fn fig6(c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let both = [LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &both, &both, FigureId::Fig6)?;
    let (l0, k0) = if c.full { (400, 200) } else { (DESK_MAX_ANTENNAS / c.n, DESK_MAX_ANTENNAS / (2 * c.n)) };
    let l = ExperimentConfig::scalar(&cfg.grid.clusters, l0);
    let k = ExperimentConfig::scalar(&cfg.grid.users, k0);
    if !c.desk_fits(l) {
        return Err(Error::Config(format!("fig6 at M = {} needs --full", l * c.n)));
    }
    let draws = cfg.draws.resolve(DrawCounts { positions: 8 * k, layouts: 1, channels: 10 })?;
    let drops = draws.positions.div_ceil(k);
    let p = c.params(k, l)?;
    for kind in kinds {
        let per_drop = map_indexed(exec, drops, |d| -> Result<Vec<Vec<Cell>>> {
            let layout = layout_for(kind, &p, c.seed, d)?;
            let users = drop_users(&layout, k, c.seed, d, 0);
            let mut rng = substream(c.seed, Stream::Fading, &[d as u64]);
            let rates = bd_user_rates(&users, &layout, &p, draws.channels, true, &mut rng)?;
            Ok(users
                .iter()
                .zip(rates)
                .enumerate()
                .map(|(j, (u, s))| {
                    vec![kind.name().into(), d.into(), j.into(), u.rho.into(), u.theta.into(), s.mean.into(), s.half_width().into()]
                })
                .collect())
        });
        for rows in per_drop {
            for r in rows? {
                t.push(r)?;
            }
        }
    }
    Ok(())
}

/// Variance of the fig6 per-user rates beyond radius `rho_min`, distributed
/// over co-located.
pub fn edge_variance_ratio(fig6: &ResultTable, rho_min: f64) -> Result<f64> {
    let (li, ri, vi) = match (fig6.column("layout"), fig6.column("rho"), fig6.column("rate")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Domain("not a fig6 table".into())),
    };
    let edge = |kind: LayoutKind| {
        let v: Vec<f64> = fig6
            .rows
            .iter()
            .filter(|r| r[li].render() == kind.name() && r[ri].as_f64().is_some_and(|x| x > rho_min))
            .filter_map(|r| r[vi].as_f64())
            .collect();
        Summary::of(&v).variance()
    };
    Ok(edge(LayoutKind::Da) / edge(LayoutKind::Ca))
}

/// Asymptotic BD rates against `L/K`.
fn fig8(c: &Common, cfg: &ExperimentConfig, t: &mut ResultTable) -> Result<()> {
    let both = [LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &both, &both, FigureId::Fig8)?;
    let ks = cfg.grid.users.clone().unwrap_or_else(|| vec![10, 20, 50]);
    let psi = psi_d(c.alpha)?;
    for kind in kinds {
        let ks_for: &[usize] = if kind == LayoutKind::Ca { &ks[..1.min(ks.len())] } else { &ks };
        for &k in ks_for {
            for ratio in 2..=20usize {
                let l = ratio * k;
                let p = c.params(k, l)?;
                let (users, asym) = match kind {
                    LayoutKind::Ca => (Cell::Empty, ca_mu_avg(l, k, &p)?),
                    _ => (k.into(), da_mu_avg_lb_with(l, k, &p, psi)?),
                };
                let [a, f] = asym_cells(&asym);
                t.push(vec![kind.name().into(), users, ratio.into(), l.into(), a, f])?;
            }
        }
    }
    Ok(())
}

/// Small cells against the jointly processed layouts at `L/K = 5`.
fn fig9(c: &Common, cfg: &ExperimentConfig, exec: Execution, t: &mut ResultTable) -> Result<()> {
    let all = [LayoutKind::SmallCell, LayoutKind::Ca, LayoutKind::Da];
    let kinds = layouts(cfg, &all, &all, FigureId::Fig9)?;
    let ls = cfg.grid.clusters.clone().unwrap_or_else(|| vec![25, 50, 100, 200, 400]);
    let points: Vec<(usize, usize)> = ls.into_iter().map(|l| (l, (l / 5).max(1))).collect();
    let draws = cfg.draws.resolve(DrawCounts { positions: 100, layouts: 100, channels: 4 })?;
    multi_user_rows(c, &kinds, &points, draws, exec, t)
}
