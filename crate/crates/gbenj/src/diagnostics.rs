//! Conserved quantities, Gevrey/Sobolev norms, the Gevrey-flux identity,
//! windowed discrete Bourgain norms, and the almost-conservation audit.
//!
//! Normalisation: with the transform convention of [`crate::spectral`], the
//! squared Gevrey norm is `(1/L) sum_k <k>^{2s} exp(2 sigma |k|) |u_hat(k)|^2`,
//! so `sigma = s = 0` reduces to the discrete `L^2` norm squared, i.e.
//! `2 * mass`. Brackets follow the convention `<x> = 1 + |x|`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::analyticity::RadiusFit;
use crate::error::{Error, Result};
use crate::operators::{
    derivative, gevrey_multiplier, hilbert, phase_symbol, GevreyIndex, ModelParams, EXP_GUARD,
};
use crate::solver::{apply_dealias_mask, integrate_two_sided, SolverConfig, Trajectory};
use crate::spectral::{to_real, to_spectral, RealField, SpectralField};

/// Mass `M(u) = (1/2) \int u^2 dx`, conserved by the flow.
pub fn mass(u: &RealField) -> f64 {
    0.5 * u.values().iter().map(|v| v * v).sum::<f64>() * u.grid().dx()
}

/// Energy functional conserved by the flow,
///
/// ```text
/// E(u) = \int [ (1/2)(u_x)^2 - (l/2) u H(u_x) + u^{p+2}/((p+1)(p+2)) ] dx.
/// ```
///
/// The Hilbert-term coefficient is the equation coefficient `l`; both it and
/// the nonlinear coefficient are pinned by the drift test along solver
/// trajectories.
pub fn energy(u: &RealField, params: &ModelParams) -> Result<f64> {
    let u_hat = to_spectral(u)?;
    let ux = to_real(&derivative(&u_hat, 1))?;
    let hux = to_real(&hilbert(&derivative(&u_hat, 1)))?;
    let dx = u.grid().dx();
    let l = params.l();
    let p = params.p() as i32;
    let nl_coeff = 1.0 / ((p as f64 + 1.0) * (p as f64 + 2.0));
    let mut total = 0.0;
    for j in 0..u.grid().n_points() {
        let uj = u.values()[j];
        total += 0.5 * ux.values()[j] * ux.values()[j] - 0.5 * l * uj * hux.values()[j]
            + nl_coeff * uj.powi(p + 2);
    }
    Ok(total * dx)
}

fn gevrey_weight(k: f64, idx: &GevreyIndex) -> f64 {
    (1.0 + k.abs()).powf(2.0 * idx.s) * (2.0 * idx.sigma * k.abs()).exp()
}

/// Gevrey norm of a spectral field (see the module docs for normalisation).
pub fn gevrey_norm_spectral(field: &SpectralField, idx: &GevreyIndex) -> Result<f64> {
    let worst = idx.sigma * field.grid().k_max();
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }
    let mut total = 0.0;
    for (i, &k) in field.grid().wavenumbers().iter().enumerate() {
        total += gevrey_weight(k, idx) * field.coeff(i).norm_sqr();
    }
    Ok((total / field.grid().length()).sqrt())
}

/// Gevrey norm `||u||_{G^{sigma,s}}` of a real field.
pub fn gevrey_norm(u: &RealField, idx: &GevreyIndex) -> Result<f64> {
    gevrey_norm_spectral(&to_spectral(u)?, idx)
}

/// Sobolev norm `H^s` (the `sigma = 0` Gevrey norm).
pub fn sobolev_norm(u: &RealField, s: f64) -> Result<f64> {
    gevrey_norm(u, &GevreyIndex { sigma: 0.0, s })
}

/// Result of checking the embedding `G^{sigma,s} \subset G^{sigma',s'}`
/// with the sharp discrete constant.
#[derive(Clone, Copy, Debug)]
pub struct EmbeddingCheck {
    /// `sup_k <k>^{s'-s} exp((sigma'-sigma)|k|)` over the grid lattice.
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Verify `||u||_{G^{sigma',s'}} <= C ||u||_{G^{sigma,s}}` for
/// `0 <= sigma' <= sigma` with the sharp grid constant `C`.
pub fn gevrey_embedding_check(
    u: &RealField,
    from: &GevreyIndex,
    to: &GevreyIndex,
) -> Result<EmbeddingCheck> {
    if to.sigma > from.sigma {
        return Err(Error::Precondition(format!(
            "embedding requires sigma' <= sigma, got sigma' = {} > sigma = {}",
            to.sigma, from.sigma
        )));
    }
    let grid = u.grid();
    let mut constant: f64 = 0.0;
    for &k in grid.wavenumbers() {
        let w = (1.0 + k.abs()).powf(to.s - from.s) * ((to.sigma - from.sigma) * k.abs()).exp();
        constant = constant.max(w);
    }
    let lhs = gevrey_norm(u, to)?;
    let rhs = constant * gevrey_norm(u, from)?;
    Ok(EmbeddingCheck { constant, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

/// Commutator field `F` of the Gevrey-flux identity and the scalar flux
/// `\int exp(sigma|D|)u * F dx`, for the quadratic nonlinearity (p = 1):
///
/// ```text
/// (1/2) d/dt ||u(t)||^2_{G^{sigma,0}} = \int exp(sigma|D|)u * F dx,
/// F = (1/2) [ d/dx (exp(sigma|D|)u)^2 - d/dx exp(sigma|D|)(u^2) ].
/// ```
///
/// `dealias_cut` must match the solver's mask for the identity to hold
/// exactly along discrete trajectories (pass the run's cutoff, or `None`
/// for an un-dealiased run). For `sigma = 0` the two terms coincide and
/// `F` vanishes identically.
pub fn gevrey_flux(
    u: &RealField,
    sigma: f64,
    params: &ModelParams,
    dealias_cut: Option<f64>,
) -> Result<(RealField, f64)> {
    if params.p() != 1 {
        return Err(Error::Precondition(format!(
            "the Gevrey-flux identity is derived for p = 1, got p = {}",
            params.p()
        )));
    }
    let grid = u.grid();
    let u_hat = to_spectral(u)?;
    let w_hat = gevrey_multiplier(sigma, &u_hat)?;
    let w = to_real(&w_hat)?;

    let mask = |mut f: SpectralField| {
        if let Some(cut) = dealias_cut {
            apply_dealias_mask(&mut f, cut);
        }
        f
    };

    // (1/2) d/dx T[(T w)^2]
    let tw = to_real(&mask(w_hat.clone()))?;
    let tw_sq = RealField::from_values(grid, tw.values().iter().map(|v| v * v).collect())?;
    let term1 = mask(derivative(&to_spectral(&tw_sq)?, 1));

    // (1/2) d/dx A T[(T u)^2]
    let tu = to_real(&mask(u_hat))?;
    let tu_sq = RealField::from_values(grid, tu.values().iter().map(|v| v * v).collect())?;
    let term2 = derivative(&gevrey_multiplier(sigma, &mask(to_spectral(&tu_sq)?))?, 1);

    let mut f_hat = term1;
    for (a, b) in f_hat.coeffs_mut().iter_mut().zip(term2.coeffs()) {
        *a = 0.5 * (*a - b);
    }
    // F is a difference of near-equal real fields; strip roundoff asymmetry.
    f_hat.symmetrize();
    let f = to_real(&f_hat)?;
    let flux = w
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * grid.dx();
    Ok((f, flux))
}

/// Bourgain weight exponents `(sigma, s, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BourgainIndex {
    pub sigma: f64,
    pub s: f64,
    pub b: f64,
}

impl BourgainIndex {
    pub fn new(sigma: f64, s: f64, b: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0 && s.is_finite() && b.is_finite()) {
            return Err(Error::Precondition(format!(
                "BourgainIndex requires finite entries with sigma >= 0, got ({sigma}, {s}, {b})"
            )));
        }
        Ok(BourgainIndex { sigma, s, b })
    }
}

/// Smooth time cutoff: 1 on the window core `[t0, t1]`, a `C^\infty` bump
/// flank of width `t1 - t0` on each side, 0 beyond.
#[derive(Clone, Copy, Debug)]
pub struct TimeWindow {
    t0: f64,
    t1: f64,
}

impl TimeWindow {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::Precondition(format!("require t1 > t0, got [{t0}, {t1}]")));
        }
        Ok(TimeWindow { t0, t1 })
    }

    pub fn core(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn width(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Support of the cutoff, `[t0 - W, t1 + W]`.
    pub fn support(&self) -> (f64, f64) {
        (self.t0 - self.width(), self.t1 + self.width())
    }

    /// Cutoff value `psi(t)`: the bump profile `exp(1 - 1/(1 - x^2))` on the
    /// flanks, with `x` the normalised distance past the core.
    pub fn eval(&self, t: f64) -> f64 {
        let w = self.width();
        let x = if t < self.t0 {
            (self.t0 - t) / w
        } else if t > self.t1 {
            (t - self.t1) / w
        } else {
            return 1.0;
        };
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }
}

/// Windowed discrete Bourgain norm of the cutoff extension `psi * u`: a
/// computable upper-bound proxy for the restricted norm over the window
/// core.
///
/// Implementation: per spatial mode the snapshot series is multiplied by
/// `psi` and by `exp(-i phi(k) t)` (so the time frequency measured is
/// `lambda = tau - phi(k)` directly), zero-padded, transformed, and summed
/// with the weights `exp(2 sigma|k|) <k>^{2s} <lambda>^{2b}`.
pub fn bourgain_norm_window(
    traj: &Trajectory,
    idx: &BourgainIndex,
    win: &TimeWindow,
    params: &ModelParams,
) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let grid = traj.grid().clone();
    let worst = idx.sigma * grid.k_max();
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }
    let dt = traj.snapshot_dt()?;
    let (lo, hi) = win.support();
    if !traj.covers(lo, hi) {
        return Err(Error::InsufficientCoverage { t_lo: lo, t_hi: hi });
    }
    let eps = 1e-9 * dt;
    let used: Vec<usize> = (0..traj.len())
        .filter(|&i| traj.time(i) >= lo - eps && traj.time(i) <= hi + eps)
        .collect();
    let n_used = used.len();
    if n_used < 4 {
        return Err(Error::InsufficientCoverage { t_lo: lo, t_hi: hi });
    }

    let m_pad = (4 * n_used).next_power_of_two();
    let t_pad = m_pad as f64 * dt;
    let fft = FftPlanner::new().plan_fft_forward(m_pad);

    let psi: Vec<f64> = used.iter().map(|&i| win.eval(traj.time(i))).collect();
    let lambda_weight: Vec<f64> = (0..m_pad)
        .map(|j| {
            let jj = if j <= m_pad / 2 { j as f64 } else { j as f64 - m_pad as f64 };
            let lambda = 2.0 * std::f64::consts::PI * jj / t_pad;
            (1.0 + lambda.abs()).powf(2.0 * idx.b)
        })
        .collect();

    let mut total = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); m_pad];
    for (ki, &k) in grid.wavenumbers().iter().enumerate() {
        let phi = phase_symbol(params, k);
        for c in buf.iter_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        for (n, &i) in used.iter().enumerate() {
            let t = traj.time(i);
            let modulation = Complex64::from_polar(psi[n] * dt, -phi * t);
            buf[n] = traj.spectrum(i).coeff(ki) * modulation;
        }
        fft.process(&mut buf);
        let mut mode_sum = 0.0;
        for (j, c) in buf.iter().enumerate() {
            mode_sum += lambda_weight[j] * c.norm_sqr();
        }
        let spatial = (1.0 + k.abs()).powf(2.0 * idx.s) * (2.0 * idx.sigma * k.abs()).exp();
        total += spatial * mode_sum;
    }
    Ok((total / (grid.length() * t_pad)).sqrt())
}

/// One row of the almost-conservation audit.
#[derive(Clone, Copy, Debug)]
pub struct AuditRow {
    pub sigma: f64,
    /// `||u(0)||^2_{G^{sigma,0}}`.
    pub initial_sq: f64,
    /// `sup over snapshot times in [0, T]` of the squared norm.
    pub sup_sq: f64,
    /// `sup - initial` (nonnegative since `t = 0` is included in the sup).
    pub delta: f64,
    /// Bourgain proxy `||psi u||_{X^{sigma,0,b}}`.
    pub bourgain: f64,
    /// Ratio `delta / (sigma^theta * bourgain^3)`; `None` for `sigma = 0`.
    pub ratio: Option<f64>,
}

/// Almost-conservation audit table across a sigma sweep.
#[derive(Clone, Debug)]
pub struct AuditTable {
    pub rows: Vec<AuditRow>,
    pub theta: f64,
    pub b: f64,
    pub t_horizon: f64,
    /// Slope of `log delta` vs `log sigma` over the small-sigma end.
    pub theta_fit: Option<f64>,
}

/// Audit the almost-conservation law
/// `sup_t ||u(t)||^2_{G^{sigma,0}} <= ||u(0)||^2 + C sigma^theta ||u||^3_X`
/// over a list of Gevrey weights, for the quadratic nonlinearity.
///
/// One two-sided trajectory covering the cutoff support `[-3T, 3T]` is
/// shared by every row (the solver run does not depend on `sigma`).
pub fn almost_conservation_audit(
    u0: &RealField,
    params: &ModelParams,
    cfg: &SolverConfig,
    sigmas: &[f64],
    t_horizon: f64,
    theta: f64,
    b: f64,
) -> Result<AuditTable> {
    if params.p() != 1 {
        return Err(Error::Precondition(format!(
            "almost-conservation audit is for p = 1, got p = {}",
            params.p()
        )));
    }
    if !(theta > 0.0 && theta < 0.75) {
        return Err(Error::Precondition(format!("require theta in (0, 3/4), got {theta}")));
    }
    if !(b > 0.5 && b < 1.0) {
        return Err(Error::Precondition(format!("require b in (1/2, 1), got {b}")));
    }
    if !(t_horizon > 0.0) {
        return Err(Error::Precondition("require T > 0".into()));
    }
    for &s in sigmas {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Precondition(format!("sigma must be >= 0, got {s}")));
        }
        let worst = s * u0.grid().k_max();
        if worst > EXP_GUARD {
            return Err(Error::OverflowGuard { exponent: worst });
        }
    }

    let win = TimeWindow::new(-t_horizon, t_horizon)?;
    let (lo, hi) = win.support();
    let traj = integrate_two_sided(u0, params, cfg, -lo, hi)?;

    let zero_idx = (0..traj.len())
        .find(|&i| traj.time(i).abs() < 1e-9)
        .ok_or_else(|| Error::Precondition("trajectory has no t = 0 snapshot".into()))?;

    let mut rows = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let idx = GevreyIndex { sigma, s: 0.0 };
        let initial_sq = gevrey_norm_spectral(traj.spectrum(zero_idx), &idx)?.powi(2);
        let mut sup_sq = initial_sq;
        for i in 0..traj.len() {
            let t = traj.time(i);
            if t < -1e-12 || t > t_horizon + 1e-9 {
                continue;
            }
            sup_sq = sup_sq.max(gevrey_norm_spectral(traj.spectrum(i), &idx)?.powi(2));
        }
        let delta = sup_sq - initial_sq;
        let bidx = BourgainIndex { sigma, s: 0.0, b };
        let bourgain = bourgain_norm_window(&traj, &bidx, &win, params)?;
        let ratio = if sigma > 0.0 {
            Some(delta / (sigma.powf(theta) * bourgain.powi(3)))
        } else {
            None
        };
        rows.push(AuditRow { sigma, initial_sq, sup_sq, delta, bourgain, ratio });
    }

    let theta_fit = fit_theta(&rows);
    Ok(AuditTable { rows, theta, b, t_horizon, theta_fit })
}

/// Least-squares slope of `log delta` vs `log sigma` over the smallest
/// `floor(n/2) + 1` positive-sigma rows with positive delta.
fn fit_theta(rows: &[AuditRow]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sigma > 0.0 && r.delta > 0.0)
        .map(|r| (r.sigma.ln(), r.delta.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let keep = (pts.len() / 2 + 1).max(2);
    pts.truncate(keep);
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// One diagnostics record per snapshot, as emitted to the harness sinks.
#[derive(Clone, Debug)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub sobolev_s: Option<f64>,
    pub gevrey: Vec<(GevreyIndex, f64)>,
    pub sigma_fit: Option<RadiusFit>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MollifierSpec;
    use crate::solver::{dealias_cutoff, integrate, Dealias};
    use crate::spectral::Grid;
    use crate::testutil::random_spectrum;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    #[test]
    fn mass_of_cosine_is_half_pi() {
        let grid = Grid::new(128, 2.0 * PI).unwrap();
        let u = RealField::from_fn(&grid, |x| x.cos());
        assert!((mass(&u) - PI / 2.0).abs() < 1e-12);
        assert_eq!(mass(&RealField::zeros(&grid)), 0.0);
    }

    /// Composite-Simpson quadrature against analytic integrands.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn energy_of_cosine_matches_quadrature_oracle() {
        let grid = Grid::new(256, 2.0 * PI).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let u = RealField::from_fn(&grid, |x| x.cos());
        let e = energy(&u, &params).unwrap();

        // closed-form value: pi/2 - l*pi/2 = pi/4 (cubic term integrates to 0)
        assert!((e - PI / 4.0).abs() < 1e-12, "energy {e}");

        // quadrature oracle on the three integrands; H(d/dx cos) = cos
        let l = params.l();
        let oracle = simpson(
            |x| 0.5 * x.sin().powi(2) - 0.5 * l * x.cos() * x.cos() + x.cos().powi(3) / 6.0,
            0.0,
            2.0 * PI,
            20_000,
        );
        assert!((e - oracle).abs() < 1e-10, "energy {e} vs quadrature {oracle}");

        assert_eq!(energy(&RealField::zeros(&grid), &params).unwrap(), 0.0);
    }

    #[test]
    fn mass_and_energy_drift_along_short_trajectory() {
        let grid = Grid::new(256, 40.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let mut cfg = SolverConfig::new(1e-3, 1.0);
        cfg.snapshot_stride = 100;
        let u0 = RealField::from_fn(&grid, |x| (-(x * x) / 4.0).exp());
        let traj = integrate(&u0, &params, &cfg, &mut []).unwrap();
        let m0 = mass(&traj.real(0).unwrap());
        let e0 = energy(&traj.real(0).unwrap(), &params).unwrap();
        for i in 0..traj.len() {
            let u = traj.real(i).unwrap();
            assert!((mass(&u) - m0).abs() <= 1e-10 * m0);
            assert!((energy(&u, &params).unwrap() - e0).abs() <= 1e-8 * e0.abs());
        }
    }

    #[test]
    fn gevrey_norm_reduces_to_mass_and_scales_single_modes() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let u = to_real(&random_spectrum(&grid, 5, 0.3)).unwrap();
        let n0 = gevrey_norm(&u, &GevreyIndex { sigma: 0.0, s: 0.0 }).unwrap();
        assert!((n0 * n0 - 2.0 * mass(&u)).abs() <= 1e-12 * n0 * n0);

        let mut single = SpectralField::zeros(&grid);
        single.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        single.coeffs_mut()[63] = Complex64::new(1.0, 0.0);
        let base = gevrey_norm_spectral(&single, &GevreyIndex { sigma: 0.0, s: 0.0 }).unwrap();
        let (sigma, s) = (0.4, 1.0);
        let weighted = gevrey_norm_spectral(&single, &GevreyIndex { sigma, s }).unwrap();
        let expect = base * sigma.exp() * 2.0_f64.powf(s);
        assert!((weighted - expect).abs() <= 1e-12 * expect);

        assert!(matches!(
            gevrey_norm_spectral(&single, &GevreyIndex { sigma: 30.0, s: 0.0 }),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn gevrey_norm_matches_continuum_quadrature_for_gaussian() {
        // u = exp(-x^2) has u_hat(xi) = sqrt(pi) exp(-xi^2/4); the squared
        // norm is (1/2pi) \int <xi>^{2s} e^{2 sigma|xi|} |u_hat|^2 d xi.
        // Keep sigma * k_max modest so the FFT noise floor stays unweighted;
        // the |xi| kink at 0 needs a fine lattice for the Riemann sum to
        // track the integral.
        let grid = Grid::new(4096, 640.0).unwrap();
        let u = RealField::from_fn(&grid, |x| (-(x * x)).exp());
        let idx = GevreyIndex { sigma: 0.7, s: -0.5 };
        let norm = gevrey_norm(&u, &idx).unwrap();
        let integrand = |xi: f64| {
            (1.0 + xi.abs()).powf(2.0 * idx.s)
                * (2.0 * idx.sigma * xi.abs()).exp()
                * PI
                * (-xi * xi / 2.0).exp()
        };
        let oracle = (simpson(integrand, -20.0, 20.0, 400_000) / (2.0 * PI)).sqrt();
        assert!(
            (norm - oracle).abs() <= 1e-6 * oracle,
            "norm {norm} vs quadrature {oracle}"
        );
    }

    #[test]
    fn gevrey_norm_monotone_in_indices() {
        let grid = Grid::new(64, 15.0).unwrap();
        let u = to_real(&random_spectrum(&grid, 9, 0.5)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..200 {
            let s1: f64 = rng.gen_range(-2.0..2.0);
            let s2 = s1 + rng.gen_range(0.0..1.0);
            let g1: f64 = rng.gen_range(0.0..0.3);
            let g2 = g1 + rng.gen_range(0.0..0.2);
            let small = gevrey_norm(&u, &GevreyIndex { sigma: g1, s: s1 }).unwrap();
            let big = gevrey_norm(&u, &GevreyIndex { sigma: g2, s: s2 }).unwrap();
            assert!(small <= big * (1.0 + 1e-12));
        }
    }

    #[test]
    fn embedding_check_examples_and_sweep() {
        let grid = Grid::new(64, 15.0).unwrap();
        let u = to_real(&random_spectrum(&grid, 11, 0.4)).unwrap();

        let idx = GevreyIndex { sigma: 0.2, s: 0.5 };
        let same = gevrey_embedding_check(&u, &idx, &idx).unwrap();
        assert!((same.constant - 1.0).abs() < 1e-15);
        assert!(same.holds);
        assert!((same.lhs - same.rhs).abs() <= 1e-12 * same.rhs);

        // s' <= s, sigma' < sigma: constant attains 1 at k = 0 and the norm
        // cannot grow
        let weaker = GevreyIndex { sigma: 0.1, s: 0.0 };
        let chk = gevrey_embedding_check(&u, &idx, &weaker).unwrap();
        assert!(chk.constant <= 1.0 + 1e-15);
        assert!(chk.holds);

        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for seed in 0..100 {
            let v = to_real(&random_spectrum(&grid, 100 + seed, 0.4)).unwrap();
            let sigma: f64 = rng.gen_range(0.05..0.4);
            let sigma_p = rng.gen_range(0.0..sigma);
            let s: f64 = rng.gen_range(-2.0..2.0);
            let s_p: f64 = rng.gen_range(-2.0..2.0);
            let chk = gevrey_embedding_check(
                &v,
                &GevreyIndex { sigma, s },
                &GevreyIndex { sigma: sigma_p, s: s_p },
            )
            .unwrap();
            assert!(chk.holds, "embedding failed for sigma={sigma} s={s} -> {sigma_p} {s_p}");
        }

        assert!(gevrey_embedding_check(&u, &weaker, &idx).is_err());
    }

    #[test]
    fn flux_vanishes_for_sigma_zero_and_single_modes() {
        let grid = Grid::new(128, 40.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let cut = dealias_cutoff(&grid, &params, Dealias::TwoThirds);

        let u = to_real(&random_spectrum(&grid, 13, 0.3)).unwrap();
        let (f, flux) = gevrey_flux(&u, 0.0, &params, cut).unwrap();
        assert_eq!(f.linf_norm(), 0.0);
        assert_eq!(flux, 0.0);

        // u with a single positive-frequency pair: u^2 lives on modes 0 and
        // +-2k, where the two F terms agree, so F vanishes
        let k = 2.0 * PI * 3.0 / grid.length();
        let single = RealField::from_fn(&grid, |x| 1.3 * (k * x).cos() + 0.4 * (k * x).sin());
        let (f, flux) = gevrey_flux(&single, 0.35, &params, cut).unwrap();
        assert!(f.linf_norm() < 1e-12, "single-mode F = {}", f.linf_norm());
        assert!(flux.abs() < 1e-12);

        let p2 = ModelParams::new(0.5, 2).unwrap();
        assert!(gevrey_flux(&u, 0.1, &p2, cut).is_err());
    }

    #[test]
    fn flux_matches_centered_difference_of_gevrey_norm() {
        let grid = Grid::new(256, 40.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let dt = 1e-3;
        let mut cfg = SolverConfig::new(dt, 0.02);
        cfg.snapshot_stride = 1;
        let sigma = 0.25;
        let u0 = RealField::from_fn(&grid, |x| (-(x * x) / 4.0).exp());
        let traj = integrate(&u0, &params, &cfg, &mut []).unwrap();
        let cut = dealias_cutoff(&grid, &params, cfg.dealias);
        let idx = GevreyIndex { sigma, s: 0.0 };

        let g: Vec<f64> = (0..traj.len())
            .map(|i| gevrey_norm_spectral(traj.spectrum(i), &idx).unwrap().powi(2) / 2.0)
            .collect();
        let mut checked = 0;
        for i in 1..traj.len() - 1 {
            let fd = (g[i + 1] - g[i - 1]) / (2.0 * dt);
            let (_, flux) = gevrey_flux(&traj.real(i).unwrap(), sigma, &params, cut).unwrap();
            if flux.abs() > 1e-6 {
                assert!(
                    (fd - flux).abs() <= 1e-5 * flux.abs(),
                    "fd {fd} vs flux {flux} at t = {}",
                    traj.time(i)
                );
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn bourgain_norm_zero_trajectory_and_parseval() {
        let grid = Grid::new(64, 20.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let dt = 0.05;
        let entries: Vec<(f64, SpectralField)> =
            (0..61).map(|i| ((i as f64 - 30.0) * dt, SpectralField::zeros(&grid))).collect();
        let zero_traj = Trajectory::from_snapshots(params, entries).unwrap();
        let win = TimeWindow::new(-0.5, 0.5).unwrap();
        let idx = BourgainIndex { sigma: 0.0, s: 0.0, b: 0.6 };
        assert_eq!(bourgain_norm_window(&zero_traj, &idx, &win, &params).unwrap(), 0.0);

        // b = 0: equals the space-time L^2 norm of psi*u
        let mut cfg = SolverConfig::new(1e-2, 0.0);
        cfg.snapshot_stride = 5;
        let u0 = RealField::from_fn(&grid, |x| (-(x * x) / 4.0).exp());
        let traj = integrate_two_sided(&u0, &params, &cfg, 1.5, 1.5).unwrap();
        let idx0 = BourgainIndex { sigma: 0.0, s: 0.0, b: 0.0 };
        let norm = bourgain_norm_window(&traj, &idx0, &win, &params).unwrap();
        let sdt = traj.snapshot_dt().unwrap();
        let mut direct = 0.0;
        for i in 0..traj.len() {
            let psi = win.eval(traj.time(i));
            if psi == 0.0 {
                continue;
            }
            let u = traj.real(i).unwrap();
            direct += psi * psi * u.values().iter().map(|v| v * v).sum::<f64>() * grid.dx() * sdt;
        }
        let direct = direct.sqrt();
        assert!(
            (norm - direct).abs() <= 1e-10 * direct,
            "bourgain b=0 {norm} vs direct {direct}"
        );
    }

    #[test]
    fn bourgain_norm_of_linear_flow_is_concentrated() {
        // For the pure linear flow the modulated series is psi(t) u0_hat(k),
        // so the X^{0,0,b} norm exceeds the b = 0 norm by at most the
        // leakage width of psi itself.
        let grid = Grid::new(64, 20.0).unwrap();
        let params = ModelParams::new(0.3, 1).unwrap();
        let mut cfg = SolverConfig::new(1e-2, 0.0);
        cfg.snapshot_stride = 2;
        cfg.linear_only = true;
        let u0 = RealField::from_fn(&grid, |x| (-(x * x) / 4.0).exp());
        let traj = integrate_two_sided(&u0, &params, &cfg, 1.5, 1.5).unwrap();
        let win = TimeWindow::new(-0.5, 0.5).unwrap();
        let b = 0.6;
        let n_b = bourgain_norm_window(&traj, &BourgainIndex { sigma: 0.0, s: 0.0, b }, &win, &params).unwrap();
        let n_0 = bourgain_norm_window(&traj, &BourgainIndex { sigma: 0.0, s: 0.0, b: 0.0 }, &win, &params).unwrap();
        assert!(n_b >= n_0 * (1.0 - 1e-12));

        // leakage width of psi on this grid: max lambda with non-negligible
        // psi_hat mass, computed directly from the sampled cutoff
        let sdt = traj.snapshot_dt().unwrap();
        let n_t = traj.len().next_power_of_two() * 4;
        let fft = FftPlanner::new().plan_fft_forward(n_t);
        let mut buf = vec![Complex64::new(0.0, 0.0); n_t];
        for (i, c) in buf.iter_mut().enumerate().take(traj.len()) {
            *c = Complex64::new(win.eval(traj.time(i)), 0.0);
        }
        fft.process(&mut buf);
        let peak = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut lambda_max: f64 = 0.0;
        for (j, c) in buf.iter().enumerate() {
            if c.norm() > 1e-8 * peak {
                let jj = if j <= n_t / 2 { j as f64 } else { j as f64 - n_t as f64 };
                lambda_max = lambda_max.max((2.0 * PI * jj / (n_t as f64 * sdt)).abs());
            }
        }
        let factor = (1.0 + lambda_max).powf(b);
        assert!(
            n_b <= n_0 * factor,
            "b-norm {n_b} exceeds leakage bound {} * {n_0}",
            factor
        );
    }

    #[test]
    fn audit_rows_vanish_for_linear_flow_and_sigma_zero() {
        let grid = Grid::new(64, 20.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let mut cfg = SolverConfig::new(1e-2, 0.0);
        cfg.snapshot_stride = 5;
        cfg.linear_only = true;
        let u0 = RealField::from_fn(&grid, |x| (-(x * x) / 4.0).exp());
        let table =
            almost_conservation_audit(&u0, &params, &cfg, &[0.0, 0.2], 0.4, 0.5, 0.6).unwrap();
        for row in &table.rows {
            assert!(
                row.delta.abs() <= 1e-10 * row.initial_sq,
                "linear flow delta {} at sigma {}",
                row.delta,
                row.sigma
            );
        }

        // nonlinear run: the sigma = 0 row is true mass conservation
        cfg.linear_only = false;
        let table =
            almost_conservation_audit(&u0, &params, &cfg, &[0.0], 0.4, 0.5, 0.6).unwrap();
        assert!(table.rows[0].delta.abs() <= 1e-10 * table.rows[0].initial_sq);
        assert!(table.rows[0].ratio.is_none());
    }

    #[test]
    fn audit_respects_preconditions() {
        let grid = Grid::new(64, 20.0).unwrap();
        let u0 = RealField::from_fn(&grid, |x| (-(x * x)).exp());
        let cfg = SolverConfig::new(1e-2, 0.0);
        let p2 = ModelParams::new(0.5, 2).unwrap();
        assert!(almost_conservation_audit(&u0, &p2, &cfg, &[0.1], 0.4, 0.5, 0.6).is_err());
        let p1 = ModelParams::new(0.5, 1).unwrap();
        assert!(almost_conservation_audit(&u0, &p1, &cfg, &[0.1], 0.4, 0.9, 0.6).is_err());
        assert!(almost_conservation_audit(&u0, &p1, &cfg, &[0.1], 0.4, 0.5, 0.3).is_err());
    }

    #[test]
    fn mollifier_preserves_weighted_norms_along_runs() {
        // mollified nonlinear term with n >= 2 k_max equals the plain one
        let grid = Grid::new(64, 20.0).unwrap();
        let params = ModelParams::new(0.5, 1).unwrap();
        let u = random_spectrum(&grid, 21, 0.4);
        let wide = MollifierSpec::new(2.0 * grid.k_max()).unwrap();
        let cut = dealias_cutoff(&grid, &params, Dealias::TwoThirds);
        let a = crate::solver::nonlinear_term(&u, &params, cut, None).unwrap();
        let b = crate::solver::nonlinear_term(&u, &params, cut, Some(&wide)).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
    }
}
