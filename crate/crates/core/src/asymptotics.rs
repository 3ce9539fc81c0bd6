//! Large-antenna limits and lower bounds of the per-antenna rate, evaluated
//! in closed form or by adaptive quadrature.
//!
//! Large-`L` approximations are exposed next to the exact forms they
//! simplify, so the approximation gap can be measured.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, LN_2, LOG2_E, PI};

use serde::Serialize;

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::geometry::{disk_distance_pdf, min_access_distance_pdf, neighbor_center_distance, CellIndex};
use crate::interference::intercell_power_ca;
use crate::quad::Quadrature;

/// Below this many clusters the large-`L` forms are flagged.
pub const SMALL_L: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    ExactAsymptotic,
    LowerBound,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticValue {
    /// Bits/s/Hz per antenna.
    pub value: f64,
    pub kind: ValueKind,
    pub formula_id: &'static str,
    /// The formula was evaluated at `L < 10`, outside its intended regime.
    pub small_l: bool,
}

impl AsymptoticValue {
    fn new(value: f64, kind: ValueKind, formula_id: &'static str, l: usize) -> Self {
        Self { value, kind, formula_id, small_l: l < SMALL_L }
    }
}

fn tight() -> Quadrature {
    Quadrature::new(1e-10, 1e-10).with_max_intervals(4000)
}

fn pieces(mut points: Vec<f64>) -> Vec<f64> {
    points.retain(|p| p.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Limiting eigenvalue law of `A·A†` for an `N × L'N` Gaussian block
/// normalized by `LN`: density `(1/(2πx))√((x₊ − Lx)(Lx − x₋))` with
/// `x± = (√L' ± 1)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoPastur {
    effective_ratio: f64,
    scale: f64,
}

impl MarchenkoPastur {
    pub fn new(effective_ratio: f64, scale: f64) -> Result<Self> {
        if !(effective_ratio >= 1.0) || !(scale > 0.0) {
            return Err(Error::Domain(format!("MP law needs ratio ≥ 1 and scale > 0, got {effective_ratio}, {scale}")));
        }
        Ok(Self { effective_ratio, scale })
    }

    /// Eigenvalues of `G̃G̃†` for the co-located single-user channel.
    pub fn single_user(l: usize) -> Result<Self> {
        Self::new(l as f64, l as f64)
    }

    /// Eigenvalues of the projected BD channel: `L − K + 1` effective ratio.
    pub fn block_diagonal(l: usize, k: usize) -> Result<Self> {
        if k == 0 || k > l {
            return Err(Error::Infeasible(format!("BD law needs 1 ≤ K ≤ L, got K = {k}, L = {l}")));
        }
        Self::new((l - k + 1) as f64, l as f64)
    }

    /// The square case, density `(1/(2πx))√(4x − x²)` on `[0, 4]`.
    pub fn quarter_circle() -> Self {
        Self { effective_ratio: 1.0, scale: 1.0 }
    }

    fn edges(&self) -> (f64, f64) {
        let r = self.effective_ratio.sqrt();
        ((r - 1.0).powi(2), (r + 1.0).powi(2))
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.edges();
        (lo / self.scale, hi / self.scale)
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.edges();
        let t = self.scale * x;
        if x <= 0.0 || t <= lo || t >= hi {
            return 0.0;
        }
        ((hi - t) * (t - lo)).sqrt() / (2.0 * PI * x)
    }

    /// Mean `L'/L`.
    pub fn mean(&self) -> f64 {
        self.effective_ratio / self.scale
    }

    /// `E[f(λ)]`, integrated in the angle `φ` with `Lλ = x₋ + (x₊ − x₋)sin²φ`,
    /// which removes the square-root edges.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.expect_up_to(f, FRAC_PI_2)
    }

    fn expect_up_to<F: Fn(f64) -> f64>(&self, f: F, phi_max: f64) -> f64 {
        let (lo, hi) = self.edges();
        let w = hi - lo;
        let g = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let t = lo + w * s * s;
            if t <= 0.0 {
                return 0.0;
            }
            f(t / self.scale) * w * w * 2.0 * s * s * c * c / (2.0 * PI * t)
        };
        tight().integrate(g, 0.0, phi_max).value
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.edges();
        let t = self.scale * x;
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let phi = ((t - lo) / (hi - lo)).sqrt().asin();
        self.expect_up_to(|_| 1.0, phi).clamp(0.0, 1.0)
    }
}

/// `E[log₂(1 + xλ)]` under the quarter-circle law:
/// `2log₂((1+s)/2) − (log₂e/(4x))(s − 1)²` with `s = √(1 + 4x)`.
///
/// Rearranged so that neither term cancels for small or large `x`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("phi needs a finite x > 0, got {x}")));
    }
    let s1 = 1.0 + (1.0 + 4.0 * x).sqrt();
    Ok(2.0 * (2.0 * x / s1).ln_1p() / LN_2 - 4.0 * x / (s1 * s1 * LN_2))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("path-loss exponent must exceed 2, got {alpha}")))
    }
}

fn check_lk(l: usize, k: usize) -> Result<()> {
    if k == 0 || l == 0 {
        return Err(Error::Domain("L and K must be positive".into()));
    }
    if k > l {
        return Err(Error::Infeasible(format!("BD needs L ≥ K, got L = {l}, K = {k}")));
    }
    Ok(())
}

/// Co-located single-user rate at radius `rho`: `log₂(1 + L·P̄·ρ^(−α))`.
pub fn ca_su_rate(rho: f64, l: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("radius {rho} outside (0, 1]")));
    }
    check_lk(l, 1)?;
    let v = (l as f64 * params.per_user_snr() * rho.powf(-params.alpha)).ln_1p() / LN_2;
    Ok(AsymptoticValue::new(v, ValueKind::ExactAsymptotic, "ca_single_user_rate", l))
}

/// Position average of [`ca_su_rate`] over a uniform user (`f_ρ = 2x`).
pub fn ca_su_avg(l: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, 1)?;
    let c = l as f64 * params.per_user_snr();
    let alpha = params.alpha;
    let f = |x: f64| 2.0 * x * (c * x.powf(-alpha)).ln_1p() / LN_2;
    let v = tight().integrate_pieces(f, &[0.0, 0.01, 0.1, 1.0]).value;
    Ok(AsymptoticValue::new(v, ValueKind::ExactAsymptotic, "ca_single_user_average_integral", l))
}

/// Large-`L` form of [`ca_su_avg`]: `log₂P̄ + α/ln4 + log₂L`.
pub fn ca_su_avg_approx(l: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, 1)?;
    let v = params.per_user_snr().log2() + params.alpha / 4f64.ln() + (l as f64).log2();
    Ok(AsymptoticValue::new(v, ValueKind::Approximation, "ca_single_user_average_log_order", l))
}

/// Nearest-cluster lower bound `Φ(P̄·d^(−α))` for a lone user whose
/// closest cluster is at `d_min`.
pub fn da_su_lb(d_min: f64, params: &SystemParams) -> Result<AsymptoticValue> {
    if !(d_min > 0.0) {
        return Err(Error::Domain(format!("access distance must be positive, got {d_min}")));
    }
    let v = phi(params.per_user_snr() * d_min.powf(-params.alpha))?;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "da_single_user_nearest_cluster_bound", params.clusters))
}

/// High-SNR form of [`da_su_lb`]: `log₂(P̄·d^(−α)) − log₂e`.
pub fn da_su_lb_approx(d_min: f64, params: &SystemParams) -> Result<AsymptoticValue> {
    if !(d_min > 0.0) {
        return Err(Error::Domain(format!("access distance must be positive, got {d_min}")));
    }
    let v = (params.per_user_snr() * d_min.powf(-params.alpha)).log2() - LOG2_E;
    Ok(AsymptoticValue::new(v, ValueKind::Approximation, "da_single_user_nearest_cluster_bound_high_snr", params.clusters))
}

/// `E[log₂ d]` for the nearest of `n` clusters to a uniform user in cell 0.
pub fn mean_log2_min_distance(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("minimum over zero clusters".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let inner = |y: f64| {
        let mut pts = vec![0.0, 1.0 - y, 1.0 + y];
        pts.extend([0.1, 0.5, 1.0, 2.0, 4.0, 8.0].map(|c| c * scale).into_iter().filter(|&p| p < 1.0 + y));
        let f = |x: f64| x.log2() * min_access_distance_pdf(x, y, n).unwrap_or(0.0);
        tight().integrate_pieces(f, &pieces(pts)).value
    };
    Ok(Quadrature::new(1e-9, 1e-10).integrate(|y| 2.0 * y * inner(y), 0.0, 1.0).value)
}

/// Average of the nearest-cluster bound over positions and layouts,
/// `−α·E[log₂ d_min] + log₂P̄ − log₂e`.
pub fn da_su_avg_lb(l: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, 1)?;
    let v = -params.alpha * mean_log2_min_distance(l)? + params.per_user_snr().log2() - LOG2_E;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "da_single_user_average_bound", l))
}

fn ca_mu_sinr_rate(rho: f64, p_int: f64, l: usize, k: usize, params: &SystemParams) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("radius {rho} outside (0, 1]")));
    }
    check_lk(l, k)?;
    let gain = (l - k + 1) as f64 / k as f64;
    Ok((gain * rho.powf(-params.alpha) / (1.0 / params.snr + p_int)).ln_1p() / LN_2)
}

/// Co-located BD rate at `(rho, theta)`:
/// `log₂(1 + ((L−K+1)/K)·ρ^(−α) / (1/snr + P_int))`.
pub fn ca_mu_rate(rho: f64, theta: f64, l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    let p_int = intercell_power_ca(crate::geometry::PolarPoint::new(rho, theta)?, params.alpha);
    let v = ca_mu_sinr_rate(rho, p_int, l, k, params)?;
    Ok(AsymptoticValue::new(v, ValueKind::ExactAsymptotic, "ca_bd_rate", l))
}

/// [`ca_mu_rate`] with the neighbour cells switched off.
pub fn ca_mu_rate_isolated(rho: f64, l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    let v = ca_mu_sinr_rate(rho, 0.0, l, k, params)?;
    Ok(AsymptoticValue::new(v, ValueKind::ExactAsymptotic, "ca_bd_rate_isolated", l))
}

/// Integrates `g(ρ, θ)` against the uniform density on the unit disk using
/// the twelve-fold symmetry of the neighbour layout (`θ ∈ [0, π/6]`).
fn disk_average<G: Fn(f64, f64) -> f64>(g: G, rho_breaks: &[f64], q_inner: Quadrature, q_outer: Quadrature) -> f64 {
    let inner = |z: f64| q_inner.integrate_pieces(|y| y * g(y, z), rho_breaks).value;
    12.0 / PI * q_outer.integrate(inner, 0.0, FRAC_PI_6).value
}

/// `α/ln4 − E[log₂ Σᵢ dᵢ^(−α)]` over a uniform user, `dᵢ` the distance to
/// the centre of neighbour cell `i`.
pub fn psi_c(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let g = |y: f64, z: f64| {
        let s: f64 = CellIndex::neighbors()
            .map(|c| (y * y + 4.0 - 4.0 * y * (z - c.angle()).cos()).powf(-alpha / 2.0))
            .sum();
        s.log2()
    };
    let q = Quadrature::new(1e-11, 1e-11);
    Ok(alpha / 4f64.ln() - disk_average(g, &[0.0, 0.5, 0.9, 1.0], q, q))
}

/// Position average of [`ca_mu_rate`] by quadrature over the cell.
pub fn ca_mu_avg_exact(l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    let gain = (l - k + 1) as f64 / k as f64;
    let alpha = params.alpha;
    let noise = 1.0 / params.snr;
    let g = |y: f64, z: f64| {
        let p_int: f64 = CellIndex::neighbors()
            .map(|c| (y * y + 4.0 - 4.0 * y * (z - c.angle()).cos()).powf(-alpha / 2.0))
            .sum();
        (gain * y.powf(-alpha) / (noise + p_int)).ln_1p() / LN_2
    };
    let q = Quadrature::new(1e-10, 1e-10);
    let v = disk_average(g, &[0.0, 0.01, 0.1, 0.5, 1.0], q, q);
    Ok(AsymptoticValue::new(v, ValueKind::ExactAsymptotic, "ca_bd_average_integral", l))
}

/// `log₂(L/K − 1) + Ψ^C(α)`, valid for `L ≫ K ≫ 1` at high SNR.
pub fn ca_mu_avg(l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    if l <= k {
        return Err(Error::Domain("the log-order form needs L > K".into()));
    }
    let v = (l as f64 / k as f64 - 1.0).log2() + psi_c(params.alpha)?;
    Ok(AsymptoticValue::new(v, ValueKind::Approximation, "ca_bd_average_log_order", l))
}

/// Nearest-cluster lower bound for BD with the distributed layout:
/// `Φ((1/K)·d̃^(−α) / (1/snr + P_int))`.
pub fn da_mu_lb(d_min_tilde: f64, p_int: f64, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    let v = phi(da_mu_sinr(d_min_tilde, p_int, k, params)?)?;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "da_bd_nearest_cluster_bound", params.clusters))
}

/// High-SNR form of [`da_mu_lb`]: `log₂((1/K)·d̃^(−α) / P_int) − log₂e`.
pub fn da_mu_lb_approx(d_min_tilde: f64, p_int: f64, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    da_mu_sinr(d_min_tilde, p_int, k, params)?;
    if !(p_int > 0.0) {
        return Err(Error::Domain("the high-SNR form needs positive interference".into()));
    }
    let v = (d_min_tilde.powf(-params.alpha) / (k as f64 * p_int)).log2() - LOG2_E;
    Ok(AsymptoticValue::new(v, ValueKind::Approximation, "da_bd_nearest_cluster_bound_high_snr", params.clusters))
}

fn da_mu_sinr(d: f64, p_int: f64, k: usize, params: &SystemParams) -> Result<f64> {
    if !(d > 0.0) || !(p_int >= 0.0) || k == 0 {
        return Err(Error::Domain(format!("need d > 0, P_int ≥ 0, K ≥ 1; got {d}, {p_int}, {k}")));
    }
    Ok(d.powf(-params.alpha) / (k as f64 * (1.0 / params.snr + p_int)))
}

/// `E[d^(−α)]` for `d` the distance from a point to a uniform point of a
/// unit disk whose centre is `center_distance > 1` away.
pub fn neighbor_mean_path_gain(center_distance: f64, alpha: f64) -> f64 {
    let dc = center_distance;
    let lo = dc - 1.0;
    // x = (D − 1) + 2 sin²φ flattens the square-root edges of the density.
    let f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let x = lo + 2.0 * s * s;
        x.powf(-alpha) * disk_distance_pdf(x, dc) * 4.0 * s * c
    };
    let knee = (lo / 2.0).sqrt();
    let pts = pieces(vec![0.0, knee, 4.0 * knee, 16.0 * knee, FRAC_PI_2].into_iter().filter(|&p| p <= FRAC_PI_2).collect());
    Quadrature::new(0.0, 1e-10).integrate_pieces(f, &pts).value
}

/// Expected neighbour-cell interference power `Σᵢ E[dᵢ^(−α)]` seen by a
/// user at `(y, z)` when every neighbour cluster is uniform in its cell.
pub fn mean_intercell_power_da(y: f64, z: f64, alpha: f64) -> f64 {
    CellIndex::neighbors()
        .map(|c| neighbor_mean_path_gain(neighbor_center_distance(y, z, c), alpha))
        .sum()
}

/// `−E[log₂ Σᵢ E[dᵢ^(−α) | ρ, θ]] − log₂e` over a uniform user.
pub fn psi_d(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let g = |y: f64, z: f64| mean_intercell_power_da(y, z, alpha).log2();
    // The inner expectation diverges at the cell edge facing a neighbour;
    // the log keeps the singularity integrable.
    let q = Quadrature::new(1e-9, 1e-9);
    Ok(-disk_average(g, &[0.0, 0.5, 0.9, 0.99, 1.0], q, q) - LOG2_E)
}

/// Average BD lower bound with the distributed layout:
/// `−log₂K − α·E[log₂ d̃] + Ψ^D(α)`, `d̃` the nearest of `L − K + 1` clusters.
pub fn da_mu_avg_lb(l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    da_mu_avg_lb_with(l, k, params, psi_d(params.alpha)?)
}

/// [`da_mu_avg_lb`] with a precomputed `Ψ^D(α)`, for sweeps over `L`.
pub fn da_mu_avg_lb_with(l: usize, k: usize, params: &SystemParams, psi_d: f64) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    let v = -(k as f64).log2() - params.alpha * mean_log2_min_distance(l - k + 1)? + psi_d;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "da_bd_average_bound", l))
}

/// `(2/π)∫₁³ x^(1−α) arccos((x² + 3)/(4x)) dx`, the mean path gain from the
/// centre of cell 0 to a uniform point of one neighbour cell.
pub fn upsilon(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let f = |x: f64| 2.0 / PI * x.powf(1.0 - alpha) * ((x * x + 3.0) / (4.0 * x)).clamp(-1.0, 1.0).acos();
    Ok(tight().integrate_pieces(f, &[1.0, 2.0, 3.0]).value)
}

/// Density `2Lx(1 − x²)^(L−1)` of the nearest of `L` stations to the cell
/// centre, with breakpoints around its bulk.
fn center_min_pdf(l: usize) -> (impl Fn(f64) -> f64, Vec<f64>) {
    let lf = l as f64;
    let f = move |x: f64| 2.0 * lf * x * (1.0 - x * x).powi(l as i32 - 1);
    let s = 1.0 / lf.sqrt();
    let pts = pieces([0.0, 0.25 * s, 0.5 * s, s, 2.0 * s, 4.0 * s, 8.0 * s, 1.0].into_iter().filter(|&p| p <= 1.0).collect());
    (f, pts)
}

/// Small-cell lower bound for a user at the cell centre:
/// `∫ Φ(((α−2)/2)·x^(−2)/K) · 2Lx(1−x²)^(L−1) dx`.
pub fn sc_avg_lb(l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    let c = (params.alpha - 2.0) / (2.0 * k as f64);
    let (pdf, pts) = center_min_pdf(l);
    let v = tight().integrate_pieces(|x| phi(c / (x * x)).unwrap_or(0.0) * pdf(x), &pts).value;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "small_cell_center_user_bound", l))
}

/// [`sc_avg_lb`] before the small-distance simplification: the SINR keeps
/// the noise, the neighbour term `6Υ(α)` and the exact mean in-cell
/// interference.
pub fn sc_avg_lb_exact(l: usize, k: usize, params: &SystemParams) -> Result<AsymptoticValue> {
    check_lk(l, k)?;
    let alpha = params.alpha;
    let floor = 1.0 / params.snr + 6.0 * upsilon(alpha)?;
    let kf = k as f64;
    let sinr = move |x: f64| {
        // (x² − x^α)/(1 − x²) = x²·expm1((α−2)u)/expm1(2u) with u = ln x,
        // tending to (α − 2)/2 at the cell edge.
        let u = x.ln();
        let ratio = if u == 0.0 { (alpha - 2.0) / 2.0 } else { ((alpha - 2.0) * u).exp_m1() / (2.0 * u).exp_m1() };
        (1.0 / kf) / (x.powf(alpha) * floor + 2.0 / (alpha - 2.0) * x * x * ratio)
    };
    let (pdf, pts) = center_min_pdf(l);
    let v = tight().integrate_pieces(|x| phi(sinr(x)).unwrap_or(0.0) * pdf(x), &pts).value;
    Ok(AsymptoticValue::new(v, ValueKind::LowerBound, "small_cell_center_user_bound_exact", l))
}

/// Mean path gain from the centre of cell 0 to a uniform point of one
/// neighbour cell computed by coverage differentiation, for cross-checks.
#[cfg(test)]
fn upsilon_by_coverage(alpha: f64) -> f64 {
    use crate::geometry::disk_coverage;
    // E[d^(−α)] = ∫ α x^(−α−1) F(x) dx over [1, 3] plus the 3^(−α) boundary.
    let f = |x: f64| alpha * x.powf(-alpha - 1.0) * disk_coverage(x, 2.0);
    3f64.powf(-alpha) + tight().integrate(f, 1.0, 3.0).value
}
