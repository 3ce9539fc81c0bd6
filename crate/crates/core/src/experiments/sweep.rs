//! Free-form parameter sweeps with deterministic sharding.

use crate::asymptotics::{
    ca_mu_avg, ca_mu_avg_exact, ca_su_avg, ca_su_avg_approx, da_mu_avg_lb, da_su_avg_lb, psi_c, psi_d, sc_avg_lb,
    sc_avg_lb_exact, upsilon, AsymptoticValue, ValueKind,
};
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::experiments::config::{ExperimentConfig, Grid, Quantity};
use crate::experiments::table::{Cell, ResultTable};
use crate::geometry::LayoutKind;
use crate::parallel::{map_indexed, Execution};
use crate::rate_sim::{average_rate, DrawCounts};
use crate::rng::{derive_seed, Stream};

pub const SWEEP_COLUMNS: [&str; 12] = [
    "point",
    "alpha",
    "snr_db",
    "users",
    "clusters",
    "user_antennas",
    "layout",
    "quantity",
    "value",
    "half_width",
    "kind",
    "formula_id",
];

/// One grid point. `index` is its position in the full grid, independent
/// of sharding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub alpha: f64,
    pub snr_db: f64,
    pub users: usize,
    pub clusters: usize,
    pub user_antennas: usize,
    pub layout: LayoutKind,
}

impl SweepPoint {
    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::with_snr_db(self.alpha, self.snr_db, self.users, self.clusters, self.user_antennas)
    }

    /// Seed of this point, a function of the base seed and the point's
    /// coordinate values only.
    pub fn seed(&self, base: u64) -> u64 {
        derive_seed(
            base,
            Stream::Misc,
            &[
                self.alpha.to_bits(),
                self.snr_db.to_bits(),
                self.users as u64,
                self.clusters as u64,
                self.user_antennas as u64,
                self.layout as u64,
            ],
        )
    }
}

fn axis<T: Clone>(v: &Option<Vec<T>>, default: T) -> Vec<T> {
    v.clone().unwrap_or_else(|| vec![default])
}

/// Cartesian product of the grid axes in row-major order (alpha slowest,
/// layout fastest). Unset axes take a single default value.
pub fn sweep_points(grid: &Grid) -> Result<Vec<SweepPoint>> {
    let alphas = axis(&grid.alpha, 4.0);
    let snrs = axis(&grid.snr_db, 10.0);
    let users = axis(&grid.users, 1);
    let clusters = axis(&grid.clusters, 16);
    let ns = axis(&grid.user_antennas, 2);
    let kinds = axis(&grid.layout, LayoutKind::Ca);
    let mut out = Vec::new();
    for &alpha in &alphas {
        for &snr_db in &snrs {
            for &k in &users {
                for &l in &clusters {
                    for &n in &ns {
                        for &layout in &kinds {
                            let index = out.len();
                            out.push(SweepPoint { index, alpha, snr_db, users: k, clusters: l, user_antennas: n, layout });
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(out)
}

struct Evaluated {
    value: f64,
    half_width: Option<f64>,
    kind: &'static str,
    formula_id: &'static str,
}

impl From<AsymptoticValue> for Evaluated {
    fn from(a: AsymptoticValue) -> Self {
        let kind = match a.kind {
            ValueKind::ExactAsymptotic => "exact_asymptotic",
            ValueKind::LowerBound => "lower_bound",
            ValueKind::Approximation => "approximation",
        };
        Self { value: a.value, half_width: None, kind, formula_id: a.formula_id }
    }
}

fn constant(value: f64, formula_id: &'static str) -> Evaluated {
    Evaluated { value, half_width: None, kind: "constant", formula_id }
}

fn evaluate(q: Quantity, pt: &SweepPoint, draws: DrawCounts, seed: u64, exec: Execution) -> Result<Evaluated> {
    let p = pt.params()?;
    let (l, k) = (pt.clusters, pt.users);
    Ok(match q {
        Quantity::AverageRate => {
            let est = average_rate(pt.layout, &p, draws, pt.seed(seed), exec)?;
            Evaluated { value: est.mean, half_width: Some(est.half_width), kind: "monte_carlo", formula_id: "simulation" }
        }
        Quantity::CaSuAvg => ca_su_avg(l, &p)?.into(),
        Quantity::CaSuAvgApprox => ca_su_avg_approx(l, &p)?.into(),
        Quantity::DaSuAvgLb => da_su_avg_lb(l, &p)?.into(),
        Quantity::CaMuAvg => ca_mu_avg(l, k, &p)?.into(),
        Quantity::CaMuAvgExact => ca_mu_avg_exact(l, k, &p)?.into(),
        Quantity::DaMuAvgLb => da_mu_avg_lb(l, k, &p)?.into(),
        Quantity::ScAvgLb => sc_avg_lb(l, k, &p)?.into(),
        Quantity::ScAvgLbExact => sc_avg_lb_exact(l, k, &p)?.into(),
        Quantity::PsiC => constant(psi_c(pt.alpha)?, "co_located_interference_constant"),
        Quantity::PsiD => constant(psi_d(pt.alpha)?, "distributed_interference_constant"),
        Quantity::Upsilon => constant(upsilon(pt.alpha)?, "neighbor_mean_path_gain_from_center"),
    })
}

/// Runs the configured sweep, restricted to the configured shard.
///
/// Every grid point is validated before anything runs. Rows come out in
/// grid order.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<ResultTable> {
    let points = sweep_points(&cfg.grid)?;
    for pt in &points {
        pt.params()?;
    }
    let draws = cfg.draws.resolve(DrawCounts { positions: 100, layouts: 100, channels: 10 })?;
    let mine: Vec<SweepPoint> =
        points.into_iter().filter(|p| cfg.sweep.shard.is_none_or(|s| s.contains(p.index))).collect();
    let q = cfg.sweep.quantity;
    let results = map_indexed(exec, mine.len(), |i| evaluate(q, &mine[i], draws, cfg.seed, exec));
    let mut t = ResultTable::new(table_name(cfg), &SWEEP_COLUMNS);
    for (pt, r) in mine.iter().zip(results) {
        let e = r?;
        t.push(vec![
            pt.index.into(),
            pt.alpha.into(),
            pt.snr_db.into(),
            pt.users.into(),
            pt.clusters.into(),
            pt.user_antennas.into(),
            pt.layout.name().into(),
            q.name().into(),
            e.value.into(),
            e.half_width.into(),
            e.kind.into(),
            e.formula_id.into(),
        ])?;
    }
    Ok(t)
}

pub fn table_name(cfg: &ExperimentConfig) -> String {
    match cfg.sweep.shard {
        Some(s) => format!("sweep.shard-{}-of-{}", s.index, s.count),
        None => "sweep".into(),
    }
}

/// Merges shard tables back into grid order. Fails on schema mismatch or
/// duplicated points.
pub fn merge_shards(shards: &[ResultTable]) -> Result<ResultTable> {
    let first = shards.first().ok_or(Error::EmptySweep)?;
    let pi = first.column("point").ok_or_else(|| Error::Config("sweep tables need a `point` column".into()))?;
    let mut rows: Vec<(u64, Vec<Cell>)> = Vec::new();
    for s in shards {
        if s.columns != first.columns {
            return Err(Error::Config(format!("shard `{}` has a different schema", s.name)));
        }
        for r in &s.rows {
            let idx = r[pi].render().parse::<u64>().map_err(|_| Error::Config("non-integer point index".into()))?;
            rows.push((idx, r.clone()));
        }
    }
    rows.sort_by_key(|r| r.0);
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Config("point present in more than one shard".into()));
    }
    let mut t = ResultTable { name: "sweep".into(), columns: first.columns.clone(), rows: Vec::new() };
    t.rows = rows.into_iter().map(|r| r.1).collect();
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{DrawOverrides, Shard, SweepSpec};

    #[test]
    fn psi_c_over_three_alphas() {
        let cfg = ExperimentConfig {
            grid: Grid { alpha: Some(vec![3.0, 4.0, 5.0]), ..Default::default() },
            sweep: SweepSpec { quantity: Quantity::PsiC, shard: None },
            ..Default::default()
        };
        let t = run_sweep(&cfg, Execution::Parallel).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[1][8].as_f64(), Some(psi_c(4.0).unwrap()));
    }

    #[test]
    fn empty_axis_is_an_empty_sweep() {
        let cfg = ExperimentConfig {
            grid: Grid { clusters: Some(vec![]), ..Default::default() },
            ..Default::default()
        };
        let err = run_sweep(&cfg, Execution::Parallel).unwrap_err();
        assert_eq!(err, Error::EmptySweep);
        assert_eq!(err.to_string(), "empty sweep");
    }

    #[test]
    fn infeasible_point_fails_before_running() {
        let cfg = ExperimentConfig {
            grid: Grid { users: Some(vec![2, 40]), clusters: Some(vec![32]), ..Default::default() },
            ..Default::default()
        };
        assert!(matches!(run_sweep(&cfg, Execution::Parallel), Err(Error::Infeasible(_))));
    }

    #[test]
    fn shards_merge_to_single_run() {
        let mut cfg = ExperimentConfig {
            grid: Grid {
                clusters: Some(vec![4, 8, 16]),
                layout: Some(vec![LayoutKind::Ca, LayoutKind::Da]),
                ..Default::default()
            },
            draws: DrawOverrides { positions: Some(3), layouts: Some(2), channels: Some(2) },
            ..Default::default()
        };
        let whole = run_sweep(&cfg, Execution::Parallel).unwrap().to_csv_string().unwrap();
        let mut parts = Vec::new();
        for i in 0..2 {
            cfg.sweep.shard = Some(Shard::new(i, 2).unwrap());
            let csv = run_sweep(&cfg, Execution::Sequential).unwrap().to_csv_string().unwrap();
            parts.push(ResultTable::read_csv("part", csv.as_bytes()).unwrap());
        }
        let merged = merge_shards(&parts).unwrap().to_csv_string().unwrap();
        assert_eq!(merged, whole);
        parts.push(parts[0].clone());
        assert!(merge_shards(&parts).is_err());
    }
}
