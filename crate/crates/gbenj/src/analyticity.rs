//! Radius-of-analyticity estimation from Fourier-coefficient decay and the
//! algebraic lower-bound audits on its decay in time.
//!
//! The fit model is the standard singularity-tracking ansatz
//! `|u_hat(k)| ~ C k^{-r} exp(-sigma k)`: the decay rate `sigma` of the
//! upper spectral band estimates the distance from the real axis to the
//! nearest complex singularity.

use crate::error::{Error, Result};
use crate::operators::ModelParams;
use crate::solver::Trajectory;
use crate::spectral::SpectralField;

/// Result of fitting `log|u_hat| = logC - r log k - sigma k` over a band.
#[derive(Clone, Copy, Debug)]
pub struct RadiusFit {
    /// Fitted exponential decay rate (clamped at 0; see `clamped`).
    pub sigma: f64,
    /// Algebraic prefactor exponent.
    pub r: f64,
    pub log_c: f64,
    pub k_window: (f64, f64),
    /// RMS residual of the fit in log space.
    pub rms_residual: f64,
    pub n_points_used: usize,
    /// True when the raw sigma came out negative (under-resolved spectrum)
    /// and was clamped to 0.
    pub clamped: bool,
}

/// Options for [`fit_radius`].
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Fit band; defaults to `[k_max/4, 2 k_max/3]` (capped by dealiasing).
    pub k_lo: Option<f64>,
    pub k_hi: Option<f64>,
    /// Width of the moving-max envelope applied before fitting.
    pub envelope_width: usize,
    /// Points below `noise_floor_rel * max|u_hat|` are discarded.
    pub noise_floor_rel: f64,
    pub min_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            k_lo: None,
            k_hi: None,
            envelope_width: 5,
            noise_floor_rel: 1e-13,
            min_points: 8,
        }
    }
}

/// Solve the 3x3 normal equations of the least-squares problem with design
/// rows `(1, ln k, -k)` against `ln|u_hat|`.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [
        [a[0][0], a[0][1], a[0][2], b[0]],
        [a[1][0], a[1][1], a[1][2], b[1]],
        [a[2][0], a[2][1], a[2][2], b[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Fit the decay-rate model to the upper spectral band of `field`.
///
/// A moving-max envelope (window of `envelope_width` modes, keeping the
/// argmax positions) is taken before fitting, so oscillatory spectra with
/// zeros in `u_hat` do not break the log fit.
pub fn fit_radius(field: &SpectralField, opts: &FitOptions) -> Result<RadiusFit> {
    let grid = field.grid();
    let k_max = grid.k_max();
    let k_lo = opts.k_lo.unwrap_or(k_max / 4.0);
    let k_hi = opts.k_hi.unwrap_or(2.0 * k_max / 3.0);
    if !(k_lo > 0.0 && k_hi > k_lo) {
        return Err(Error::Precondition(format!("bad fit band [{k_lo}, {k_hi}]")));
    }
    let peak = field.max_abs();
    if peak == 0.0 {
        return Err(Error::Precondition("all-zero spectrum".into()));
    }
    let floor = opts.noise_floor_rel * peak;

    // positive-k half of the band, above the noise floor
    let mut band: Vec<(f64, f64)> = Vec::new();
    for (i, &k) in grid.wavenumbers().iter().enumerate() {
        if k >= k_lo && k <= k_hi {
            let v = field.coeff(i).norm();
            if v > floor {
                band.push((k, v));
            }
        }
    }
    band.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if band.len() < opts.min_points {
        return Err(Error::TooFewPoints { have: band.len(), need: opts.min_points });
    }

    // moving-max envelope: keep the argmax sample of each window
    let w = opts.envelope_width.max(1);
    let mut keep = vec![false; band.len()];
    for start in 0..band.len().saturating_sub(w - 1) {
        let mut best = start;
        for j in start..start + w {
            if band[j].1 > band[best].1 {
                best = j;
            }
        }
        keep[best] = true;
    }
    let pts: Vec<(f64, f64)> = band
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    if pts.len() < opts.min_points {
        return Err(Error::TooFewPoints { have: pts.len(), need: opts.min_points });
    }

    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(k, v) in &pts {
        let row = [1.0, k.ln(), -k];
        let y = v.ln();
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let sol = solve3(ata, atb)
        .ok_or_else(|| Error::Precondition("singular normal equations in radius fit".into()))?;
    let (log_c, r, sigma_raw) = (sol[0], -sol[1], sol[2]);

    let mut ss = 0.0;
    for &(k, v) in &pts {
        let model = log_c - r * k.ln() - sigma_raw * k;
        ss += (v.ln() - model).powi(2);
    }
    let rms = (ss / pts.len() as f64).sqrt();

    let clamped = sigma_raw < 0.0;
    Ok(RadiusFit {
        sigma: if clamped { 0.0 } else { sigma_raw },
        r,
        log_c,
        k_window: (k_lo, k_hi),
        rms_residual: rms,
        n_points_used: pts.len(),
        clamped,
    })
}

/// Per-snapshot radius fit; failed rows carry the failure text instead of
/// interpolated values.
#[derive(Clone, Debug)]
pub struct RadiusSample {
    pub t: f64,
    pub fit: Option<RadiusFit>,
    pub flag: Option<String>,
}

/// Options for [`radius_timeseries`].
#[derive(Clone, Copy, Debug, Default)]
pub struct TimeseriesOptions {
    pub fit: FitOptions,
    /// Replace each sigma by the running minimum (nonincreasing envelope).
    pub monotone_envelope: bool,
}

pub fn radius_timeseries(traj: &Trajectory, opts: &TimeseriesOptions) -> Vec<RadiusSample> {
    let mut rows: Vec<RadiusSample> = (0..traj.len())
        .map(|i| match fit_radius(traj.spectrum(i), &opts.fit) {
            Ok(fit) => RadiusSample { t: traj.time(i), fit: Some(fit), flag: None },
            Err(e) => RadiusSample { t: traj.time(i), fit: None, flag: Some(e.to_string()) },
        })
        .collect();
    if opts.monotone_envelope {
        let mut floor = f64::INFINITY;
        for row in rows.iter_mut() {
            if let Some(fit) = row.fit.as_mut() {
                floor = floor.min(fit.sigma);
                fit.sigma = floor;
            }
        }
    }
    rows
}

/// Fitted power law `sigma(t) ~ c * t^{-gamma}`.
#[derive(Clone, Copy, Debug)]
pub struct DecayLawFit {
    pub gamma: f64,
    pub c: f64,
    pub t_window: (f64, f64),
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Outcome of fitting the radius decay law over a time window.
#[derive(Clone, Debug)]
pub enum DecayLaw {
    /// `sigma` never departs from `sigma0`: the `min{sigma0, c t^-gamma}`
    /// bound is inactive.
    Plateau { sigma0: f64, max_rel_departure: f64 },
    PowerLaw(DecayLawFit),
}

/// Fraction below `sigma0` at which a row counts as departed from the
/// plateau.
pub const PLATEAU_DEPARTURE: f64 = 0.05;

/// Minimum departed rows required for a power-law fit.
pub const MIN_DECAY_ROWS: usize = 8;

/// Fit `log sigma` against `log t` over `[t_lo, t_hi]` (with `t_lo >= 1`,
/// the asymptotic regime). Needs at least [`MIN_DECAY_ROWS`] rows departed
/// from `sigma0`; otherwise reports the plateau regime.
pub fn fit_decay_law(
    series: &[RadiusSample],
    t_window: (f64, f64),
    sigma0: Option<f64>,
) -> Result<DecayLaw> {
    let (t_lo, t_hi) = t_window;
    if !(t_lo >= 1.0 && t_hi > t_lo) {
        return Err(Error::Precondition(format!(
            "decay-law window must satisfy 1 <= t_lo < t_hi, got [{t_lo}, {t_hi}]"
        )));
    }
    let valid: Vec<(f64, f64)> = series
        .iter()
        .filter_map(|row| row.fit.as_ref().map(|f| (row.t, f.sigma)))
        .collect();
    if valid.is_empty() {
        return Err(Error::TooFewPoints { have: 0, need: MIN_DECAY_ROWS });
    }
    let sigma0 = match sigma0 {
        Some(s) => s,
        None => valid[0].1,
    };
    if !(sigma0 > 0.0) {
        return Err(Error::Precondition("sigma0 must be positive".into()));
    }

    let in_window: Vec<(f64, f64)> = valid
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo && t <= t_hi)
        .collect();
    if in_window.is_empty() {
        return Err(Error::TooFewPoints { have: 0, need: MIN_DECAY_ROWS });
    }
    let departed: Vec<(f64, f64)> = in_window
        .iter()
        .copied()
        .filter(|&(_, s)| s > 0.0 && s < sigma0 * (1.0 - PLATEAU_DEPARTURE))
        .collect();
    if departed.len() < MIN_DECAY_ROWS {
        let max_rel = in_window
            .iter()
            .map(|&(_, s)| (sigma0 - s).max(0.0) / sigma0)
            .fold(0.0, f64::max);
        return Ok(DecayLaw::Plateau { sigma0, max_rel_departure: max_rel });
    }

    let n = departed.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, s) in &departed {
        let (x, y) = (t.ln(), s.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::Precondition("degenerate time window in decay fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - sx * slope) / n;
    let mut ss = 0.0;
    for &(t, s) in &departed {
        ss += (s.ln() - (intercept + slope * t.ln())).powi(2);
    }
    Ok(DecayLaw::PowerLaw(DecayLawFit {
        gamma: -slope,
        c: intercept.exp(),
        t_window,
        rms_residual: (ss / n).sqrt(),
        n_points: departed.len(),
    }))
}

/// Verdict of the lower-bound audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Plateau regime: sigma stayed at sigma0, consistent with the `min`.
    PassPlateau,
    /// Fitted decay exponent within the theorem bound plus tolerance.
    PassExponent,
    /// Fitted exponent exceeds the proved bound; flagged for investigation.
    Violation,
}

/// Exponent tolerance accepted on top of the theorem bound.
pub const GAMMA_TOL: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct LowerBoundAudit {
    pub verdict: Verdict,
    /// `4/3 + epsilon` for p = 1, `p^2 + 3p + 2` for p >= 2.
    pub gamma_bound: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub decay: DecayLaw,
}

/// Theorem exponent for the algebraic lower bound on `sigma(T)`.
pub fn gamma_bound(params: &ModelParams, epsilon: f64) -> f64 {
    if params.p() == 1 {
        4.0 / 3.0 + epsilon
    } else {
        let p = params.p() as f64;
        p * p + 3.0 * p + 2.0
    }
}

/// Audit the measured radius decay against the theorem exponent: PASS on a
/// plateau, PASS when the fitted gamma is within `gamma_bound + 0.2`, and a
/// flagged VIOLATION otherwise (the bound is proved, so a violation points
/// at the experiment, not the theorem).
pub fn lower_bound_audit(
    series: &[RadiusSample],
    params: &ModelParams,
    epsilon: f64,
    t_window: (f64, f64),
    sigma0: Option<f64>,
) -> Result<LowerBoundAudit> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("epsilon must be > 0, got {epsilon}")));
    }
    let bound = gamma_bound(params, epsilon);
    let decay = fit_decay_law(series, t_window, sigma0)?;
    let verdict = match &decay {
        DecayLaw::Plateau { .. } => Verdict::PassPlateau,
        DecayLaw::PowerLaw(fit) => {
            if fit.gamma <= bound + GAMMA_TOL {
                Verdict::PassExponent
            } else {
                Verdict::Violation
            }
        }
    };
    Ok(LowerBoundAudit { verdict, gamma_bound: bound, epsilon, tolerance: GAMMA_TOL, decay })
}
