//! SVD transmission with water-filling for a single user, and block
//! diagonalization (BD) with per-user water-filling for many users.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Nonnegative subchannel eigenvalues, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigSpectrum {
    values: Vec<f64>,
}

impl EigSpectrum {
    /// Sorts `values` in descending order. Round-off negatives (relative
    /// size below 1e-12) are clamped to zero; larger negatives are errors.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite eigenvalue".into()));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in &mut values {
            if *v < 0.0 {
                if *v < -1e-12 * scale {
                    return Err(Error::Domain(format!("negative eigenvalue {v}")));
                }
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Powers aligned with the (descending) spectrum and the water level `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    pub powers: Vec<f64>,
    pub water_level: f64,
}

/// Water-filling `P_n = (ζ − noise/λ_n)⁺` with `Σ P_n = budget`.
///
/// The active set is found analytically: with the `k` strongest channels
/// active, `ζ = (budget + Σ_{n<k} noise/λ_n) / k`, and the largest `k` whose
/// weakest channel still sits strictly below the water level wins. A channel
/// whose floor equals `ζ` exactly is left inactive.
pub fn waterfill(eigs: &EigSpectrum, budget: f64, noise: f64) -> Result<WaterFill> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::Domain(format!("power budget {budget} must be positive")));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Domain(format!("noise {noise} must be nonnegative")));
    }
    let lam = eigs.values();
    let positive = lam.iter().take_while(|&&l| l > 0.0).count();
    if positive == 0 {
        return Err(Error::RankZero);
    }
    let floors: Vec<f64> = lam[..positive].iter().map(|l| noise / l).collect();
    let mut prefix = floors.iter().sum::<f64>();
    let mut k = positive;
    let mut zeta = (budget + prefix) / k as f64;
    while k > 1 && zeta <= floors[k - 1] {
        prefix -= floors[k - 1];
        k -= 1;
        zeta = (budget + prefix) / k as f64;
    }
    let mut powers = vec![0.0; lam.len()];
    for (p, f) in powers.iter_mut().zip(&floors[..k]) {
        *p = zeta - f;
    }
    Ok(WaterFill { powers, water_level: zeta })
}

/// `(1/N) Σ log₂(1 + λ_n P_n / noise)` over the `N` entries of `eigs`.
pub fn spectrum_rate(eigs: &EigSpectrum, powers: &[f64], noise: f64) -> f64 {
    let n = eigs.len() as f64;
    eigs.values().iter().zip(powers).map(|(l, p)| (l * p / noise).ln_1p()).sum::<f64>()
        / (n * std::f64::consts::LN_2)
}

/// Per-antenna rate with optimal power over the subchannels when the
/// effective SINR (signal power gain over interference plus noise) is
/// `sinr`. Equivalent to water-filling a budget of `sinr` over unit noise.
pub fn waterfill_rate(eigs: &EigSpectrum, sinr: f64) -> Result<f64> {
    let wf = waterfill(eigs, sinr, 1.0)?;
    Ok(spectrum_rate(eigs, &wf.powers, 1.0))
}

/// Per-antenna rate with the budget split equally over all `N` subchannels.
pub fn equal_power_rate(eigs: &EigSpectrum, sinr: f64) -> f64 {
    let p = vec![sinr / eigs.len() as f64; eigs.len()];
    spectrum_rate(eigs, &p, 1.0)
}

/// Eigenvalues of `A·A†`.
pub fn gram_spectrum(a: &DMatrix<Complex64>) -> Result<EigSpectrum> {
    if a.nrows() == 1 {
        return EigSpectrum::new(vec![a.norm_squared()]);
    }
    let gram = a * a.adjoint();
    EigSpectrum::new(SymmetricEigen::new(gram).eigenvalues.iter().copied().collect())
}

/// A precoder together with its power allocation.
#[derive(Debug, Clone)]
pub struct PrecodeResult {
    /// `M × N` precoding matrix.
    pub w: DMatrix<Complex64>,
    pub powers: Vec<f64>,
    pub water_level: f64,
    pub effective_eigs: EigSpectrum,
    pub budget: f64,
    pub noise: f64,
}

impl PrecodeResult {
    pub fn per_antenna_rate(&self) -> f64 {
        spectrum_rate(&self.effective_eigs, &self.powers, self.noise)
    }

    /// `Tr(W W†)`, the fraction of the budget actually radiated.
    pub fn trace(&self) -> f64 {
        self.w.norm_squared()
    }
}

/// Singular values (descending) and the matching right singular vectors as
/// columns of an `ncols × rank` matrix.
fn right_singular(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(a.ncols(), order.len(), |r, c| v_t[(order[c], r)].conj());
    (sigma, v)
}

fn precode(basis_v: DMatrix<Complex64>, sigma: &[f64], budget: f64, noise: f64) -> Result<PrecodeResult> {
    let eigs = EigSpectrum::new(sigma.iter().map(|s| s * s).collect())?;
    let wf = waterfill(&eigs, budget, noise)?;
    let mut w = basis_v;
    for (mut col, p) in w.column_iter_mut().zip(&wf.powers) {
        col *= Complex64::new((p / budget).sqrt(), 0.0);
    }
    Ok(PrecodeResult { w, powers: wf.powers, water_level: wf.water_level, effective_eigs: eigs, budget, noise })
}

/// `W = V Ω` with `V` the right singular vectors of `G̃` and
/// `Ω_nn = sqrt(P_n / budget)`.
pub fn svd_precoder(chan: &ChannelRealization, budget: f64, noise: f64) -> Result<PrecodeResult> {
    let (sigma, v) = right_singular(&chan.g_tilde);
    precode(v, &sigma, budget, noise)
}

/// Orthonormal basis (`m × (m − rows)`) of the null space of `x`.
///
/// Uses the SVD of `x` zero-padded to `m × m`; singular values below
/// `m · ε · σ_max` count as zero.
pub fn null_space_basis(x: &DMatrix<Complex64>, m: usize) -> Result<DMatrix<Complex64>> {
    let rows = x.nrows();
    if rows > 0 && x.ncols() != m {
        return Err(Error::Domain(format!("matrix has {} columns, expected {m}", x.ncols())));
    }
    if rows >= m {
        return Err(Error::Infeasible(format!("{rows} constraints leave no null space in dimension {m}")));
    }
    if rows == 0 {
        return Ok(DMatrix::identity(m, m));
    }
    let mut padded = DMatrix::zeros(m, m);
    padded.rows_mut(0, rows).copy_from(x);
    let (sigma, v) = right_singular(&padded);
    let tol = m as f64 * f64::EPSILON * sigma[0];
    let rank = sigma.iter().filter(|&&s| s > tol).count();
    if rank < rows {
        return Err(Error::RankDeficient { rank, expected: rows });
    }
    Ok(v.columns(rows, m - rows).into_owned())
}

fn check_bd(channels: &[ChannelRealization]) -> Result<(usize, usize)> {
    let first = channels.first().ok_or_else(|| Error::Domain("no users".into()))?;
    let (n, m) = (first.user_antennas(), first.bs_antennas());
    if channels.iter().any(|c| c.user_antennas() != n || c.bs_antennas() != m) {
        return Err(Error::Domain("users must share N and M".into()));
    }
    if m < channels.len() * n {
        return Err(Error::Infeasible(format!(
            "M = {m} antennas cannot serve K·N = {} user antennas",
            channels.len() * n
        )));
    }
    Ok((n, m))
}

/// Block-diagonalization precoder of `user`: projects onto the null space
/// of the other users' normalized channels, then applies SVD transmission.
pub fn bd_precoder(channels: &[ChannelRealization], user: usize, budget: f64, noise: f64) -> Result<PrecodeResult> {
    let (n, m) = check_bd(channels)?;
    if user >= channels.len() {
        return Err(Error::Domain(format!("user {user} out of range")));
    }
    let mut x = DMatrix::zeros((channels.len() - 1) * n, m);
    for (row, c) in channels.iter().enumerate().filter(|(j, _)| *j != user).map(|(_, c)| c).enumerate() {
        x.rows_mut(row * n, n).copy_from(&c.g_tilde);
    }
    let basis = null_space_basis(&x, m)?;
    let x_tilde = &channels[user].g_tilde * &basis;
    let (sigma, v) = right_singular(&x_tilde);
    precode(basis * v, &sigma, budget, noise)
}

/// Effective BD eigenvalues of every user without forming any precoder.
///
/// With `A` the stacked normalized channels of all users, the effective
/// channel Gram matrix of user `k` is the Schur complement of the other
/// users' block in `A·A†`, which is the inverse of the `k`-th diagonal
/// block of `(A·A†)⁻¹`. The Gram matrix is formed with real products and
/// inverted through a real Cholesky factor of its symmetric embedding.
pub fn bd_effective_spectra(channels: &[ChannelRealization]) -> Result<Vec<EigSpectrum>> {
    let (n, m) = check_bd(channels)?;
    if channels.len() == 1 {
        return Ok(vec![gram_spectrum(&channels[0].g_tilde)?]);
    }
    let rows = channels.len() * n;
    // [Re A, Im A] and [Im A, −Re A], each rows × 2m.
    let mut re_im = DMatrix::<f64>::zeros(rows, 2 * m);
    let mut im_re = DMatrix::<f64>::zeros(rows, 2 * m);
    for (k, c) in channels.iter().enumerate() {
        for j in 0..m {
            for i in 0..n {
                let z = c.g_tilde[(i, j)];
                let r = k * n + i;
                re_im[(r, j)] = z.re;
                re_im[(r, m + j)] = z.im;
                im_re[(r, j)] = z.im;
                im_re[(r, m + j)] = -z.re;
            }
        }
    }
    let t = re_im.transpose();
    let gram_re = &re_im * &t;
    let gram_im = &im_re * &t;
    // Real symmetric embedding [[R, −I], [I, R]] of the Hermitian Gram matrix.
    let mut s = DMatrix::<f64>::zeros(2 * rows, 2 * rows);
    s.view_mut((0, 0), (rows, rows)).copy_from(&gram_re);
    s.view_mut((rows, rows), (rows, rows)).copy_from(&gram_re);
    s.view_mut((rows, 0), (rows, rows)).copy_from(&gram_im);
    s.view_mut((0, rows), (rows, rows)).copy_from(&(-gram_im.transpose()));
    let chol = Cholesky::new(s).ok_or(Error::RankDeficient { rank: 0, expected: rows })?;
    let mut linv = DMatrix::<f64>::identity(2 * rows, 2 * rows);
    if !chol.l_dirty().solve_lower_triangular_mut(&mut linv) {
        return Err(Error::RankDeficient { rank: 0, expected: rows });
    }
    // (S⁻¹)_{ab} = Σ_i L⁻¹_{ia} L⁻¹_{ib}; L⁻¹ is lower triangular so the sum
    // starts at row max(a, b).
    let inv_entry = |a: usize, b: usize| -> f64 {
        let start = a.max(b);
        let ca = linv.column(a);
        let cb = linv.column(b);
        (start..2 * rows).map(|i| ca[i] * cb[i]).sum()
    };
    channels
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let block = DMatrix::from_fn(n, n, |i, j| {
                let (a, b) = (k * n + i, k * n + j);
                Complex64::new(inv_entry(a, b), inv_entry(rows + a, b))
            });
            let mu = SymmetricEigen::new(block).eigenvalues;
            if mu.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::RankDeficient { rank: 0, expected: rows });
            }
            EigSpectrum::new(mu.iter().map(|v| 1.0 / v).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_small_scale;
    use crate::rng::{substream, Stream};
    use nalgebra::DVector;

    fn spectrum(v: &[f64]) -> EigSpectrum {
        EigSpectrum::new(v.to_vec()).unwrap()
    }

    fn random_channels(k: usize, n: usize, m: usize, seed: u64) -> Vec<ChannelRealization> {
        let mut rng = substream(seed, Stream::Fading, &[]);
        (0..k)
            .map(|_| {
                let gamma = DVector::from_fn(m, |_, _| 0.2 + rand::Rng::random::<f64>(&mut rng));
                ChannelRealization::from_parts(gamma, sample_small_scale(n, m, &mut rng)).unwrap()
            })
            .collect()
    }

    #[test]
    fn waterfill_examples() {
        let wf = waterfill(&spectrum(&[1.0, 1.0]), 2.0, 1.0).unwrap();
        assert_eq!(wf.powers, vec![1.0, 1.0]);
        let wf = waterfill(&spectrum(&[1.0, 0.5]), 1.0, 1.0).unwrap();
        assert_eq!(wf.powers, vec![1.0, 0.0]);
        assert_eq!(wf.water_level, 2.0);
        let wf = waterfill(&spectrum(&[0.7]), 3.5, 1.0).unwrap();
        assert_eq!(wf.powers, vec![3.5]);
    }

    #[test]
    fn waterfill_errors() {
        assert_eq!(waterfill(&spectrum(&[0.0, 0.0]), 1.0, 1.0), Err(Error::RankZero));
        assert!(waterfill(&spectrum(&[1.0]), 0.0, 1.0).is_err());
        assert!(EigSpectrum::new(vec![1.0, -0.5]).is_err());
        assert_eq!(EigSpectrum::new(vec![-1e-18, 2.0]).unwrap().values(), &[2.0, 0.0]);
    }

    #[test]
    fn waterfill_matches_bisection() {
        // Independent route: bisect on the water level.
        let eigs = spectrum(&[2.3, 1.1, 0.4, 0.05]);
        for &budget in &[0.1, 1.0, 5.0, 40.0] {
            let wf = waterfill(&eigs, budget, 0.7).unwrap();
            let used = |z: f64| eigs.values().iter().map(|l| (z - 0.7 / l).max(0.0)).sum::<f64>();
            let (mut lo, mut hi) = (0.0, 1e3);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if used(mid) < budget {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((wf.water_level - lo).abs() < 1e-9, "{budget}");
        }
    }

    #[test]
    fn svd_precoder_diagonalizes() {
        let ch = &random_channels(1, 3, 8, 2)[0];
        let pre = svd_precoder(ch, 5.0, 1.0).unwrap();
        // G̃W = UΣΩ, so its Gram matrix is diagonal whatever U is.
        let gw = &ch.g_tilde * &pre.w;
        let gw = gw.adjoint() * gw;
        let off: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|(i, j)| i != j)
            .map(|(i, j)| gw[(i, j)].norm_sqr()).sum();
        assert!(off.sqrt() < 1e-10);
        assert!((pre.trace() - 1.0).abs() < 1e-10);
        assert!((pre.powers.iter().sum::<f64>() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn svd_precoder_single_antenna_is_mrt() {
        let ch = &random_channels(1, 1, 6, 4)[0];
        let pre = svd_precoder(ch, 2.0, 1.0).unwrap();
        let mrt = ch.g_tilde.adjoint() / Complex64::new(ch.g_tilde.norm(), 0.0);
        let phase = pre.w[(0, 0)] / mrt[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!((&pre.w - mrt * phase).norm() < 1e-10);
    }

    #[test]
    fn svd_precoder_orthonormal_rows_equal_split() {
        // G̃ = [I, 0] / sqrt(N): flat spectrum 1/N, equal powers.
        let n = 3;
        let h = DMatrix::from_fn(n, 6, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let gamma = DVector::from_element(6, 1.0);
        let mut ch = ChannelRealization::from_parts(gamma, h).unwrap();
        ch.g_tilde = ch.h.map(|z| z / (n as f64).sqrt());
        let pre = svd_precoder(&ch, 3.0, 1.0).unwrap();
        for (&l, &p) in pre.effective_eigs.values().iter().zip(&pre.powers) {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn null_space_examples() {
        let basis = null_space_basis(&DMatrix::zeros(0, 5), 5).unwrap();
        assert_eq!(basis, DMatrix::identity(5, 5));

        let x = DMatrix::from_fn(2, 5, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let basis = null_space_basis(&x, 5).unwrap();
        assert_eq!(basis.ncols(), 3);
        assert!(basis.rows(0, 2).norm() < 1e-12);
        let proj = basis.rows(2, 3) * basis.rows(2, 3).adjoint();
        assert!((proj - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-12);

        let mut rng = substream(8, Stream::Fading, &[]);
        let x = sample_small_scale(2, 8, &mut rng);
        let basis = null_space_basis(&x, 8).unwrap();
        assert_eq!(basis.ncols(), 6);
        assert!((&x * &basis).norm() < 1e-9 * x.norm());
        assert!((basis.adjoint() * &basis - DMatrix::<Complex64>::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn null_space_rank_deficient() {
        let row = sample_small_scale(1, 6, &mut substream(1, Stream::Fading, &[]));
        let mut x = DMatrix::zeros(2, 6);
        x.row_mut(0).copy_from(&row);
        x.row_mut(1).copy_from(&(row * Complex64::new(0.0, 2.0)));
        assert_eq!(null_space_basis(&x, 6), Err(Error::RankDeficient { rank: 1, expected: 2 }));
    }

    #[test]
    fn bd_nulls_other_users() {
        let chans = random_channels(2, 2, 4, 10);
        let w: Vec<_> = (0..2).map(|k| bd_precoder(&chans, k, 3.0, 1.0).unwrap()).collect();
        assert!((&chans[0].g_tilde * &w[1].w).norm() < 1e-9);
        assert!((&chans[1].g_tilde * &w[0].w).norm() < 1e-9);
        assert_eq!(w[0].effective_eigs.len(), 2);
    }

    #[test]
    fn bd_single_user_is_svd() {
        let chans = random_channels(1, 2, 6, 12);
        let bd = bd_precoder(&chans, 0, 4.0, 1.0).unwrap();
        let svd = svd_precoder(&chans[0], 4.0, 1.0).unwrap();
        assert!((bd.per_antenna_rate() - svd.per_antenna_rate()).abs() < 1e-9);
    }

    #[test]
    fn bd_infeasible() {
        let chans = random_channels(3, 2, 5, 1);
        assert!(matches!(bd_precoder(&chans, 0, 1.0, 1.0), Err(Error::Infeasible(_))));
        assert!(matches!(bd_effective_spectra(&chans), Err(Error::Infeasible(_))));
    }

    #[test]
    fn schur_route_matches_precoder_route() {
        for (k, n, m, seed) in [(2, 2, 4, 1), (3, 2, 12, 2), (4, 3, 16, 3), (4, 1, 4, 4)] {
            let chans = random_channels(k, n, m, seed);
            let fast = bd_effective_spectra(&chans).unwrap();
            for (u, f) in fast.iter().enumerate() {
                let slow = bd_precoder(&chans, u, 1.0, 1.0).unwrap().effective_eigs;
                for (a, b) in f.values().iter().zip(slow.values()) {
                    assert!((a - b).abs() < 1e-9 * b.max(1e-3), "k={k} u={u}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn gram_spectrum_matches_singular_values() {
        let ch = &random_channels(1, 4, 9, 6)[0];
        let eig = gram_spectrum(&ch.g_tilde).unwrap();
        let svd = svd_precoder(ch, 1.0, 1.0).unwrap().effective_eigs;
        for (a, b) in eig.values().iter().zip(svd.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
