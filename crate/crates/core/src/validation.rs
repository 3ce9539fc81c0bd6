//! Quick invariant suite behind the `validate` subcommand.
//!
//! Each check is cheap (well under a second) and reports its worst
//! observed deviation.

use std::f64::consts::FRAC_PI_6;

use crate::asymptotics::{phi, psi_c, upsilon, MarchenkoPastur};
use crate::channel::{compose_channel, sample_small_scale, SystemParams};
use crate::geometry::{
    min_access_distance_pdf, neighbor_cell_distance_pdf, neighbor_cell_distance_support, own_cell_distance_pdf,
    sample_layout, CellIndex, LayoutKind, PolarPoint,
};
use crate::interference::{draw_user, intercell_power_ca};
use crate::precoding::{bd_effective_spectra, bd_precoder, svd_precoder, waterfill, EigSpectrum};
use crate::quad::Quadrature;
use crate::rate_sim::rate_bound_chain;
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check { name, passed: worst <= tol, detail: format!("worst deviation {worst:.3e}, tolerance {tol:.0e}") }
}

fn run<F: FnOnce() -> crate::Result<f64>>(name: &'static str, tol: f64, f: F) -> Check {
    match f() {
        Ok(worst) => check(name, worst, tol),
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

/// Runs every check; `seed` drives the random instances.
pub fn run_validation(seed: u64) -> Vec<Check> {
    let q = Quadrature::default();
    vec![
        run("co-located interference at cell centre is 3/8", 1e-15, || {
            Ok((intercell_power_ca(PolarPoint::ORIGIN, 4.0) - 0.375).abs())
        }),
        run("co-located interference at the cell corner", 5e-3, || {
            Ok((intercell_power_ca(PolarPoint::new(1.0, FRAC_PI_6)?, 4.0) - 1.275).abs())
        }),
        run("neighbour mean path gain from the centre is 1/9", 1e-4, || Ok((upsilon(4.0)? - 1.0 / 9.0).abs())),
        run("co-located interference constant near 3.54", 0.05, || Ok((psi_c(4.0)? - 3.54).abs())),
        run("eigenvalue laws integrate to one", 1e-6, || {
            let mut worst = 0.0f64;
            for (l, k) in [(1, 1), (4, 1), (16, 4)] {
                let mp = MarchenkoPastur::block_diagonal(l, k)?;
                let (a, b) = mp.support();
                worst = worst.max((q.integrate(|x| mp.density(x), a, b).value - 1.0).abs());
            }
            Ok(worst)
        }),
        run("phi increasing and concave", 0.0, || {
            let xs: Vec<f64> = (-30..=30).map(|i| 10f64.powf(i as f64 / 6.0)).collect();
            let v: Vec<f64> = xs.iter().map(|&x| phi(x)).collect::<crate::Result<_>>()?;
            let bad = (1..xs.len() - 1)
                .filter(|&i| {
                    let chord = v[i - 1] + (v[i + 1] - v[i - 1]) * (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
                    v[i] <= v[i - 1] || v[i] < chord
                })
                .count();
            Ok(bad as f64)
        }),
        run("distance densities integrate to one", 1e-6, || {
            let mut worst = 0.0f64;
            for y in [0.0, 0.3, 0.9] {
                let own = q.integrate_pieces(|x| own_cell_distance_pdf(x, y).unwrap_or(0.0), &[0.0, 1.0 - y, 1.0 + y]);
                let min = q.integrate_pieces(|x| min_access_distance_pdf(x, y, 20).unwrap_or(0.0), &[0.0, 0.1, 1.0 - y, 1.0 + y]);
                let c = CellIndex::neighbor(1)?;
                let (a, b) = neighbor_cell_distance_support(y, 0.4, c)?;
                let nb = q.integrate(|x| neighbor_cell_distance_pdf(x, y, 0.4, c).unwrap_or(0.0), a, b);
                for e in [own, min, nb] {
                    worst = worst.max((e.value - 1.0).abs());
                }
            }
            Ok(worst)
        }),
        run("water-filling budget and KKT", 1e-9, || {
            let mut rng = substream(seed, Stream::Misc, &[1]);
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let h = sample_small_scale(4, 4, &mut rng);
                let eigs = EigSpectrum::new((&h * h.adjoint()).symmetric_eigenvalues().iter().copied().collect())?;
                let wf = waterfill(&eigs, 3.0, 1.0)?;
                worst = worst.max((wf.powers.iter().sum::<f64>() - 3.0).abs());
                for (&l, &p) in eigs.values().iter().zip(&wf.powers) {
                    let floor = 1.0 / l;
                    let kkt = if p > 0.0 { (p + floor - wf.water_level).abs() } else { (wf.water_level - floor).max(0.0) };
                    worst = worst.max(kkt);
                }
            }
            Ok(worst)
        }),
        run("BD nulls intra-cell interference", 1e-8, || {
            let mut worst = 0.0f64;
            for s in 0..20u64 {
                let chans = random_users(seed, s, 3, 8, 2)?;
                for k in 0..chans.len() {
                    let pre = bd_precoder(&chans, k, 1.0, 1.0)?;
                    let own = (&chans[k].g_tilde * &pre.w).norm();
                    for c in chans.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, c)| c) {
                        worst = worst.max((&c.g_tilde * &pre.w).norm() / own);
                    }
                }
            }
            Ok(worst)
        }),
        run("BD with one user equals SVD transmission", 1e-9, || {
            let mut worst = 0.0f64;
            for s in 0..20u64 {
                let chans = random_users(seed, s, 1, 6, 2)?;
                let a = bd_precoder(&chans, 0, 5.0, 1.0)?.per_antenna_rate();
                let b = svd_precoder(&chans[0], 5.0, 1.0)?.per_antenna_rate();
                worst = worst.max((a - b).abs());
            }
            Ok(worst)
        }),
        run("fast BD spectra match the explicit precoders", 1e-8, || {
            let mut worst = 0.0f64;
            for s in 0..10u64 {
                let chans = random_users(seed, s, 3, 6, 2)?;
                let fast = bd_effective_spectra(&chans)?;
                for (k, f) in fast.iter().enumerate() {
                    let slow = bd_precoder(&chans, k, 1.0, 1.0)?.effective_eigs;
                    for (a, b) in f.values().iter().zip(slow.values()) {
                        worst = worst.max((a - b).abs() / b.max(1e-300));
                    }
                }
            }
            Ok(worst)
        }),
        run("rate chain full ≥ equal power ≥ nearest cluster", 1e-9, || {
            let p = SystemParams::new(4.0, 10.0, 1, 16, 4)?;
            let mut worst = 0.0f64;
            for s in 0..20u64 {
                let mut rng = substream(seed, Stream::Misc, &[3, s]);
                let layout = sample_layout(LayoutKind::Da, &p, &mut rng)?;
                let user = draw_user(&layout, &mut rng);
                let h = sample_small_scale(4, p.bs_antennas(), &mut rng);
                let c = rate_bound_chain(&layout, user, &p, h)?;
                worst = worst.max(c.equal_power - c.full).max(c.nearest_cluster - c.equal_power);
            }
            Ok(worst)
        }),
    ]
}

fn random_users(
    seed: u64,
    s: u64,
    k: usize,
    l: usize,
    n: usize,
) -> crate::Result<Vec<crate::channel::ChannelRealization>> {
    let p = SystemParams::new(4.0, 10.0, k, l, n)?;
    let mut rng = substream(seed, Stream::Misc, &[2, s]);
    let layout = sample_layout(LayoutKind::Da, &p, &mut rng)?;
    (0..k).map(|_| {
        let u = draw_user(&layout, &mut rng);
        compose_channel(&layout, u, &p, &mut rng)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_validation(7) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
