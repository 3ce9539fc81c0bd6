//! Large-scale and small-scale fading and the composite channel matrices.
//!
//! Noise power is normalized to one, so `snr` is the total transmit power
//! per cell and each user is allotted `snr / K`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellIndex, LayoutRealization, PolarPoint, CELLS};

/// Global scalars shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Total transmit power over noise power, linear.
    pub snr: f64,
    /// Users per cell, `K`.
    pub users: usize,
    /// Antenna clusters per cell, `L = M / N`.
    pub clusters: usize,
    /// Antennas per user (and per cluster), `N`.
    pub user_antennas: usize,
}

impl SystemParams {
    pub fn new(alpha: f64, snr: f64, users: usize, clusters: usize, user_antennas: usize) -> Result<Self> {
        let p = Self { alpha, snr, users, clusters, user_antennas };
        p.validate()?;
        Ok(p)
    }

    pub fn with_snr_db(alpha: f64, snr_db: f64, users: usize, clusters: usize, user_antennas: usize) -> Result<Self> {
        Self::new(alpha, db_to_linear(snr_db), users, clusters, user_antennas)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!("path-loss exponent {} must exceed 2", self.alpha)));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::Domain(format!("snr {} must be positive", self.snr)));
        }
        if self.users == 0 || self.user_antennas == 0 {
            return Err(Error::Domain("K and N must be at least 1".into()));
        }
        if self.clusters < self.users {
            return Err(Error::Infeasible(format!(
                "L = {} clusters cannot serve K = {} users",
                self.clusters, self.users
            )));
        }
        Ok(())
    }

    /// BS antennas per cell, `M = L·N`.
    pub fn bs_antennas(&self) -> usize {
        self.clusters * self.user_antennas
    }

    pub fn per_user_power_fraction(&self) -> f64 {
        1.0 / self.users as f64
    }

    /// Per-user transmit power over noise.
    pub fn per_user_snr(&self) -> f64 {
        self.snr / self.users as f64
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Amplitude gain `d^(−α/2)` between a user and an antenna.
pub fn large_scale_fading(user: PolarPoint, antenna: PolarPoint, alpha: f64) -> Result<f64> {
    let [ux, uy] = user.to_xy();
    let [ax, ay] = antenna.to_xy();
    gain_from_xy(ux - ax, uy - ay, alpha)
}

#[inline]
pub(crate) fn gain_from_xy(dx: f64, dy: f64, alpha: f64) -> Result<f64> {
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(Error::Coincident);
    }
    Ok(d2.powf(-alpha / 4.0))
}

/// Per-cell amplitude gains for the co-located layout: index 0 is the
/// serving cell, `ρ^(−α/2)`, and index `i` the neighbour-cell value
/// `(ρ² + 4 − 4ρ cos(θ − φᵢ))^(−α/4)`.
pub fn ca_large_scale_vector(user: PolarPoint, alpha: f64) -> Result<[f64; CELLS]> {
    if user.rho == 0.0 {
        return Err(Error::Coincident);
    }
    let mut g = [0.0; CELLS];
    g[0] = user.rho.powf(-alpha / 2.0);
    for c in CellIndex::neighbors() {
        let d2 = user.rho * user.rho + 4.0 - 4.0 * user.rho * (user.theta - c.angle()).cos();
        if d2 <= 0.0 {
            return Err(Error::Coincident);
        }
        g[c.get()] = d2.powf(-alpha / 4.0);
    }
    Ok(g)
}

/// `rows × cols` matrix of i.i.d. CN(0, 1) entries, drawn column by column.
pub fn sample_small_scale<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Serving-cell amplitude gains of a user, one entry per antenna, cluster
/// major.
pub fn serving_gains(layout: &LayoutRealization, user: PolarPoint, alpha: f64) -> Result<DVector<f64>> {
    let per = layout.antennas_per_cluster();
    let [ux, uy] = user.to_xy();
    let mut gamma = DVector::zeros(layout.antennas_per_cell());
    for (l, &[cx, cy]) in layout.cluster_xy(0).iter().enumerate() {
        let g = gain_from_xy(ux - cx, uy - cy, alpha)?;
        gamma.rows_mut(l * per, per).fill(g);
    }
    Ok(gamma)
}

/// One user's channel from the serving cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Amplitude gains `γ`, length `M`.
    pub gamma: DVector<f64>,
    /// `γ / ‖γ‖`.
    pub beta: DVector<f64>,
    /// Small-scale fading, `N × M`.
    pub h: DMatrix<Complex64>,
    /// `G = Γ ∘ H` with every row of `Γ` equal to `γ`.
    pub g: DMatrix<Complex64>,
    /// `G̃ = B ∘ H`.
    pub g_tilde: DMatrix<Complex64>,
}

impl ChannelRealization {
    pub fn from_parts(gamma: DVector<f64>, h: DMatrix<Complex64>) -> Result<Self> {
        if gamma.len() != h.ncols() {
            return Err(Error::Domain(format!("γ has {} entries but H has {} columns", gamma.len(), h.ncols())));
        }
        if gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Domain("large-scale gains must be positive and finite".into()));
        }
        let beta = &gamma / gamma.norm();
        let g = scale_columns(&h, &gamma);
        let g_tilde = scale_columns(&h, &beta);
        Ok(Self { gamma, beta, h, g, g_tilde })
    }

    /// `‖γ‖²`, the total serving-cell power gain.
    pub fn gain(&self) -> f64 {
        self.gamma.norm_squared()
    }

    pub fn user_antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn bs_antennas(&self) -> usize {
        self.h.ncols()
    }
}

pub(crate) fn scale_columns(h: &DMatrix<Complex64>, w: &DVector<f64>) -> DMatrix<Complex64> {
    let mut out = h.clone();
    for (mut col, &s) in out.column_iter_mut().zip(w.iter()) {
        col *= Complex64::new(s, 0.0);
    }
    out
}

/// Draws the small-scale fading and builds the user's channel.
pub fn compose_channel<R: Rng + ?Sized>(
    layout: &LayoutRealization,
    user: PolarPoint,
    params: &SystemParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let gamma = serving_gains(layout, user, params.alpha)?;
    let h = sample_small_scale(params.user_antennas, gamma.len(), rng);
    ChannelRealization::from_parts(gamma, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_layout, LayoutKind};
    use crate::rng::{substream, Stream};
    use std::f64::consts::PI;

    fn params(l: usize, n: usize) -> SystemParams {
        SystemParams::new(4.0, 10.0, 1, l, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(2.0, 10.0, 1, 4, 2).is_err());
        assert!(SystemParams::new(4.0, 0.0, 1, 4, 2).is_err());
        assert!(matches!(SystemParams::new(4.0, 10.0, 5, 4, 2), Err(Error::Infeasible(_))));
        let p = SystemParams::with_snr_db(4.0, 10.0, 4, 8, 2).unwrap();
        assert!((p.snr - 10.0).abs() < 1e-12);
        assert_eq!(p.bs_antennas(), 16);
        assert_eq!(p.per_user_power_fraction(), 0.25);
        assert!((p.per_user_snr() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn large_scale_examples() {
        let at = |rho, theta| PolarPoint::new(rho, theta).unwrap();
        assert!((large_scale_fading(PolarPoint::ORIGIN, at(1.0, 0.3), 3.3).unwrap() - 1.0).abs() < 1e-15);
        assert!((large_scale_fading(PolarPoint::ORIGIN, at(0.5, 0.0), 4.0).unwrap() - 4.0).abs() < 1e-12);
        let c1 = CellIndex::neighbor(1).unwrap().center();
        assert!((large_scale_fading(PolarPoint::ORIGIN, c1, 4.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(large_scale_fading(c1, c1, 4.0), Err(Error::Coincident));
    }

    #[test]
    fn squared_gain_is_inverse_fourth_power() {
        let u = PolarPoint::new(0.3, 1.0).unwrap();
        for &(r, t) in &[(0.9, 2.0), (1.7, 0.2), (2.5, 4.0)] {
            let a = PolarPoint::new(r, t).unwrap();
            let g = large_scale_fading(u, a, 4.0).unwrap();
            assert!((g * g - u.distance(a).powi(-4)).abs() < 1e-12 * g * g);
        }
    }

    #[test]
    fn co_located_vector_examples() {
        let g = ca_large_scale_vector(PolarPoint::new(1.0, PI / 6.0).unwrap(), 4.0).unwrap();
        assert_eq!(g[0], 1.0);
        let g = ca_large_scale_vector(PolarPoint::new(1e-300, 0.0).unwrap(), 4.0).unwrap();
        for v in &g[1..] {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let g = ca_large_scale_vector(PolarPoint::new(0.5, 0.0).unwrap(), 4.0).unwrap();
        assert!((g[1] - g[6]).abs() < 1e-15);
        assert_eq!(ca_large_scale_vector(PolarPoint::ORIGIN, 4.0), Err(Error::Coincident));
    }

    #[test]
    fn small_scale_moments() {
        let mut rng = substream(3, Stream::Fading, &[]);
        let h = sample_small_scale(1000, 1000, &mut rng);
        let n = 1e6;
        let power = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let mean = h.iter().sum::<Complex64>() / n;
        let re2 = h.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((power - 1.0).abs() < 0.01, "{power}");
        assert!(mean.norm() < 0.005, "{mean}");
        assert!((re2 - 0.5).abs() < 0.005, "{re2}");
    }

    #[test]
    fn co_located_channel_has_flat_beta() {
        let p = params(8, 2);
        let lay = LayoutRealization::co_located(p.bs_antennas());
        let user = PolarPoint::new(0.4, 1.0).unwrap();
        let ch = compose_channel(&lay, user, &p, &mut substream(1, Stream::Fading, &[])).unwrap();
        let m = p.bs_antennas() as f64;
        for b in ch.beta.iter() {
            assert!((b - (1.0 / m).sqrt()).abs() < 1e-15);
        }
        let expect = ch.h.map(|z| z * (1.0 / m).sqrt());
        assert!((&ch.g_tilde - expect).norm() < 1e-13);
    }

    #[test]
    fn distributed_channel_structure() {
        let p = params(16, 2);
        let lay = sample_layout(LayoutKind::Da, &p, &mut substream(5, Stream::Layout, &[])).unwrap();
        let user = PolarPoint::new(0.7, 2.0).unwrap();
        let ch = compose_channel(&lay, user, &p, &mut substream(5, Stream::Fading, &[])).unwrap();
        assert!((ch.beta.norm() - 1.0).abs() < 1e-12);
        for l in 0..16 {
            assert_eq!(ch.gamma[2 * l], ch.gamma[2 * l + 1]);
            let d = user.distance(lay.clusters(CellIndex::SERVING)[l]);
            assert!((ch.gamma[2 * l] - d.powf(-2.0)).abs() < 1e-10 * ch.gamma[2 * l]);
        }
        for i in 0..2 {
            for j in 0..32 {
                assert!((ch.g[(i, j)] - ch.h[(i, j)] * ch.gamma[j]).norm() < 1e-12 * ch.g[(i, j)].norm().max(1.0));
            }
        }
    }

    #[test]
    fn co_located_trace_mean_is_n() {
        let p = params(16, 4);
        let lay = LayoutRealization::co_located(p.bs_antennas());
        let user = PolarPoint::new(0.5, 0.0).unwrap();
        let mut rng = substream(9, Stream::Fading, &[]);
        let trials = 4000;
        let mean = (0..trials)
            .map(|_| compose_channel(&lay, user, &p, &mut rng).unwrap().g_tilde.norm_squared())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 4.0).abs() < 0.04, "{mean}");
    }
}
