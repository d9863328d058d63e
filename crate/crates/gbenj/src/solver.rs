//! Time integration of the generalized Benjamin equation and its mollified
//! variant, plus solitary-wave profile generation.
//!
//! The stiff linear part `i*phi(k)` is treated exactly (integrating-factor
//! RK4 or ETDRK4 on each Fourier mode), so the only step-size restriction
//! comes from the explicit treatment of the nonlinear term. The nonlinearity
//! is evaluated in conservative form `-(1/(p+1)) d/dx (u^{p+1})`, which keeps
//! the discrete mean of `u` constant to the bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{mollify, phase_symbol, ModelParams, MollifierSpec};
use crate::spectral::{to_real, to_spectral, Grid, RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Ifrk4,
    Etdrk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dealias {
    /// Zero all modes with `|k| > 2/(p+2) * k_max` around every product
    /// (the classical 2/3 rule for p = 1, tightened for higher powers).
    TwoThirds,
    None,
}

/// Time-stepping configuration.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub mollifier: Option<MollifierSpec>,
    pub snapshot_stride: usize,
    /// Fraction of the advective step-size cap that `dt` may use.
    pub cfl_guard: f64,
    /// Integrator-specific constant in the cap `dt_cap = c_int / (k_cut * max|u|^p)`.
    pub c_int: f64,
    /// Disable the nonlinear term (pure linear group; no step-size cap).
    pub linear_only: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SolverConfig {
            dt,
            t_end,
            integrator: Integrator::Ifrk4,
            dealias: Dealias::TwoThirds,
            mollifier: None,
            snapshot_stride: 1,
            cfl_guard: 1.0,
            c_int: 1.0,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Precondition(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Precondition(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Precondition("snapshot_stride must be >= 1".into()));
        }
        if !(self.cfl_guard > 0.0 && self.cfl_guard <= 1.0) {
            return Err(Error::Precondition(format!(
                "cfl_guard must lie in (0, 1], got {}",
                self.cfl_guard
            )));
        }
        if !(self.c_int.is_finite() && self.c_int > 0.0) {
            return Err(Error::Precondition(format!("c_int must be > 0, got {}", self.c_int)));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; `t_end` must be an integer multiple
    /// of `dt` so snapshot times are exactly reproducible.
    pub fn n_steps(&self) -> Result<u64> {
        let raw = self.t_end / self.dt;
        let n = raw.round();
        if (raw - n).abs() > 1e-9 * raw.max(1.0) {
            return Err(Error::Precondition(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as u64)
    }
}

/// Dealias cutoff wavenumber for the configured rule, if any.
pub fn dealias_cutoff(grid: &Grid, params: &ModelParams, dealias: Dealias) -> Option<f64> {
    match dealias {
        Dealias::None => None,
        Dealias::TwoThirds => Some(grid.k_max() * 2.0 / (params.p() as f64 + 2.0)),
    }
}

/// Zero every mode with `|k| > cut`, plus the sign-ambiguous Nyquist mode.
pub fn apply_dealias_mask(field: &mut SpectralField, cut: f64) {
    let ks = field.grid().wavenumbers().to_vec();
    let nyq = field.grid().nyquist_index();
    for (i, c) in field.coeffs_mut().iter_mut().enumerate() {
        if ks[i].abs() > cut || i == nyq {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Solver state: spectral coefficients at time `t = step_count * dt` past
/// the state's origin.
#[derive(Clone, Debug)]
pub struct SolverState {
    t: f64,
    t_origin: f64,
    u_hat: SpectralField,
    step_count: u64,
    params: ModelParams,
}

impl SolverState {
    pub fn new(u_hat: SpectralField, params: ModelParams) -> Self {
        SolverState { t: 0.0, t_origin: 0.0, u_hat, step_count: 0, params }
    }

    /// Rebuild a state at a given step count (checkpoint restart). The time
    /// is recomputed as `step_count * dt` on the next step, so restarted
    /// runs reproduce uninterrupted ones bit for bit.
    pub fn resume(u_hat: SpectralField, params: ModelParams, step_count: u64, t: f64) -> Self {
        SolverState { t, t_origin: 0.0, u_hat, step_count, params }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u_hat(&self) -> &SpectralField {
        &self.u_hat
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// Conservative-form nonlinear term `-(1/(p+1)) d/dx (v^{p+1})` in spectral
/// space, where `v` is the (dealiased, optionally mollified) field.
///
/// Products are formed pointwise in physical space after truncation; the
/// output is truncated again and has exactly zero mean mode.
pub fn nonlinear_term(
    u_hat: &SpectralField,
    params: &ModelParams,
    dealias_cut: Option<f64>,
    mollifier: Option<&MollifierSpec>,
) -> Result<SpectralField> {
    let mut v_hat = u_hat.clone();
    if let Some(cut) = dealias_cut {
        apply_dealias_mask(&mut v_hat, cut);
    }
    if let Some(m) = mollifier {
        v_hat = mollify(&v_hat, m);
    }
    let v = to_real(&v_hat)?;
    let q = params.p() as i32 + 1;
    let powered: Vec<f64> = v.values().iter().map(|&x| x.powi(q)).collect();
    let w = RealField::from_values(v.grid(), powered)?;
    let w_hat = to_spectral(&w)?;

    let scale = -1.0 / q as f64;
    let ks = u_hat.grid().wavenumbers().to_vec();
    let nyq = u_hat.grid().nyquist_index();
    let mut out = w_hat;
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= Complex64::new(0.0, scale * ks[i]);
        if i == nyq {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    if let Some(cut) = dealias_cut {
        apply_dealias_mask(&mut out, cut);
    }
    Ok(out)
}

enum Tables {
    Ifrk4 {
        e_full: Vec<Complex64>,
        e_half: Vec<Complex64>,
    },
    Etdrk4 {
        e_full: Vec<Complex64>,
        e_half: Vec<Complex64>,
        q: Vec<Complex64>,
        f1: Vec<Complex64>,
        f2: Vec<Complex64>,
        f3: Vec<Complex64>,
    },
}

/// Precomputed single-step integrator for a fixed grid, model, and step.
pub struct Stepper {
    params: ModelParams,
    h: f64,
    cut: Option<f64>,
    mollifier: Option<MollifierSpec>,
    linear_only: bool,
    tables: Tables,
}

impl Stepper {
    pub fn new(grid: &Grid, params: &ModelParams, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Self::with_step(grid, params, cfg, cfg.dt)
    }

    /// Same as [`Stepper::new`] but with an explicitly signed step
    /// (negative steps integrate backward in time).
    pub fn with_step(grid: &Grid, params: &ModelParams, cfg: &SolverConfig, h: f64) -> Result<Self> {
        let nyq = grid.nyquist_index();
        // The Nyquist phase is sign-ambiguous; freeze that mode (phi := 0).
        let phis: Vec<f64> = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(i, &k)| if i == nyq { 0.0 } else { phase_symbol(params, k) })
            .collect();
        let e_full: Vec<Complex64> =
            phis.iter().map(|&p| Complex64::from_polar(1.0, p * h)).collect();
        let e_half: Vec<Complex64> =
            phis.iter().map(|&p| Complex64::from_polar(1.0, p * h * 0.5)).collect();
        let tables = match cfg.integrator {
            Integrator::Ifrk4 => Tables::Ifrk4 { e_full, e_half },
            Integrator::Etdrk4 => {
                let (q, f1, f2, f3) = etd_tables(&phis, h);
                Tables::Etdrk4 { e_full, e_half, q, f1, f2, f3 }
            }
        };
        Ok(Stepper {
            params: *params,
            h,
            cut: dealias_cutoff(grid, params, cfg.dealias),
            mollifier: cfg.mollifier,
            linear_only: cfg.linear_only,
            tables,
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn dealias_cut(&self) -> Option<f64> {
        self.cut
    }

    fn rhs(&self, v: &SpectralField) -> Result<SpectralField> {
        if self.linear_only {
            Ok(SpectralField::zeros(v.grid()))
        } else {
            nonlinear_term(v, &self.params, self.cut, self.mollifier.as_ref())
        }
    }

    /// Advance the state by one step. On failure the state is untouched, so
    /// the caller keeps the last good state.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let v = &state.u_hat;
        let new = match &self.tables {
            Tables::Ifrk4 { e_full, e_half } => self.step_ifrk4(v, e_full, e_half)?,
            Tables::Etdrk4 { e_full, e_half, q, f1, f2, f3 } => {
                self.step_etdrk4(v, e_full, e_half, q, f1, f2, f3)?
            }
        };
        new.validate("solver step output")
            .map_err(|_| Error::NonFiniteState { step: state.step_count + 1, t: state.t + self.h })?;
        state.u_hat = new;
        state.step_count += 1;
        state.t = state.t_origin + state.step_count as f64 * self.h;
        Ok(())
    }

    fn step_ifrk4(
        &self,
        v: &SpectralField,
        e_full: &[Complex64],
        e_half: &[Complex64],
    ) -> Result<SpectralField> {
        let h = self.h;
        let k1 = self.rhs(v)?;

        let mut stage = v.clone();
        axpy(&mut stage, 0.5 * h, &k1);
        mul_table(&mut stage, e_half);
        let k2 = self.rhs(&stage)?;

        let mut stage = v.clone();
        mul_table(&mut stage, e_half);
        axpy(&mut stage, 0.5 * h, &k2);
        let k3 = self.rhs(&stage)?;

        let mut stage = v.clone();
        mul_table(&mut stage, e_full);
        let mut k3h = k3.clone();
        mul_table(&mut k3h, e_half);
        axpy(&mut stage, h, &k3h);
        let k4 = self.rhs(&stage)?;

        let mut out = v.clone();
        mul_table(&mut out, e_full);
        let mut k1f = k1;
        mul_table(&mut k1f, e_full);
        axpy(&mut out, h / 6.0, &k1f);
        let mut k2h = k2;
        mul_table(&mut k2h, e_half);
        axpy(&mut out, h / 3.0, &k2h);
        axpy(&mut out, h / 3.0, &k3h);
        axpy(&mut out, h / 6.0, &k4);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn step_etdrk4(
        &self,
        v: &SpectralField,
        e_full: &[Complex64],
        e_half: &[Complex64],
        q: &[Complex64],
        f1: &[Complex64],
        f2: &[Complex64],
        f3: &[Complex64],
    ) -> Result<SpectralField> {
        let nv = self.rhs(v)?;

        let mut a = v.clone();
        mul_table(&mut a, e_half);
        let mut qnv = nv.clone();
        mul_table(&mut qnv, q);
        axpy(&mut a, 1.0, &qnv);
        let na = self.rhs(&a)?;

        let mut b = v.clone();
        mul_table(&mut b, e_half);
        let mut qna = na.clone();
        mul_table(&mut qna, q);
        axpy(&mut b, 1.0, &qna);
        let nb = self.rhs(&b)?;

        let mut c = a;
        mul_table(&mut c, e_half);
        let mut corr = nb.clone();
        scale_in_place(&mut corr, 2.0);
        axpy(&mut corr, -1.0, &nv);
        mul_table(&mut corr, q);
        axpy(&mut c, 1.0, &corr);
        let nc = self.rhs(&c)?;

        let mut out = v.clone();
        mul_table(&mut out, e_full);
        let mut t1 = nv;
        mul_table(&mut t1, f1);
        axpy(&mut out, 1.0, &t1);
        let mut t2 = na;
        axpy(&mut t2, 1.0, &nb);
        mul_table(&mut t2, f2);
        axpy(&mut out, 2.0, &t2);
        let mut t3 = nc;
        mul_table(&mut t3, f3);
        axpy(&mut out, 1.0, &t3);
        Ok(out)
    }
}

fn mul_table(field: &mut SpectralField, table: &[Complex64]) {
    for (c, m) in field.coeffs_mut().iter_mut().zip(table) {
        *c *= m;
    }
}

fn scale_in_place(field: &mut SpectralField, s: f64) {
    for c in field.coeffs_mut() {
        *c *= s;
    }
}

fn axpy(dst: &mut SpectralField, a: f64, x: &SpectralField) {
    for (d, s) in dst.coeffs_mut().iter_mut().zip(x.coeffs()) {
        *d += a * s;
    }
}

/// ETDRK4 coefficient functions evaluated by averaging over a unit circle of
/// contour points around each `z0 = i*phi(k)*h`, which sidesteps the
/// removable singularities of the closed forms at small `|z|`.
fn etd_tables(phis: &[f64], h: f64) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    const M: usize = 64;
    let circle: Vec<Complex64> = (0..M)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (2.0 * j as f64 + 1.0) / M as f64))
        .collect();
    let n = phis.len();
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    let mut f1 = q.clone();
    let mut f2 = q.clone();
    let mut f3 = q.clone();
    for (i, &phi) in phis.iter().enumerate() {
        let z0 = Complex64::new(0.0, phi * h);
        let (mut sq, mut s1, mut s2, mut s3) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        for w in &circle {
            let z = z0 + w;
            let ez = z.exp();
            let ez2 = (z * 0.5).exp();
            let z2 = z * z;
            let z3 = z2 * z;
            sq += (ez2 - 1.0) / z;
            s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
            s2 += (2.0 + z + ez * (-2.0 + z)) / z3;
            s3 += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        let hm = h / M as f64;
        q[i] = sq * hm;
        f1[i] = s1 * hm;
        f2[i] = s2 * hm;
        f3[i] = s3 * hm;
    }
    (q, f1, f2, f3)
}

/// Callback invoked on snapshot steps during integration.
pub trait Sink {
    fn record(&mut self, state: &SolverState) -> Result<()>;
}

/// Uniformly spaced spectral snapshots of one solver run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    params: ModelParams,
    times: Vec<f64>,
    snapshots: Vec<SpectralField>,
}

impl Trajectory {
    pub fn from_snapshots(
        params: ModelParams,
        entries: Vec<(f64, SpectralField)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Precondition("trajectory needs at least one snapshot".into()));
        }
        let grid = entries[0].1.grid().clone();
        let mut times = Vec::with_capacity(entries.len());
        let mut snapshots = Vec::with_capacity(entries.len());
        for (t, s) in entries {
            if *s.grid() != grid {
                return Err(Error::Precondition("trajectory snapshots on mixed grids".into()));
            }
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(Error::Precondition("snapshot times must increase".into()));
                }
            }
            times.push(t);
            snapshots.push(s);
        }
        Ok(Trajectory { params, times, snapshots })
    }

    fn empty(params: ModelParams) -> Self {
        Trajectory { params, times: Vec::new(), snapshots: Vec::new() }
    }

    fn push(&mut self, t: f64, s: SpectralField) {
        self.times.push(t);
        self.snapshots.push(s);
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spectrum(&self, i: usize) -> &SpectralField {
        &self.snapshots[i]
    }

    pub fn real(&self, i: usize) -> Result<RealField> {
        to_real(&self.snapshots[i])
    }

    /// Snapshot spacing; errors unless the spacing is uniform.
    pub fn snapshot_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::Precondition("need at least two snapshots".into()));
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::Precondition("snapshot spacing is not uniform".into()));
            }
        }
        Ok(dt)
    }

    pub fn covers(&self, t_lo: f64, t_hi: f64) -> bool {
        if self.times.is_empty() {
            return false;
        }
        let eps = 1e-9 * (t_hi - t_lo).abs().max(1.0);
        self.times[0] <= t_lo + eps && *self.times.last().unwrap() >= t_hi - eps
    }
}

fn advective_cap(cfg: &SolverConfig, k_eff: f64, amp: f64, p: u32) -> f64 {
    let speed = amp.powi(p as i32).max(f64::MIN_POSITIVE);
    cfg.c_int / (k_eff * speed)
}

fn check_cfl(cfg: &SolverConfig, grid: &Grid, params: &ModelParams, amp: f64) -> Result<()> {
    if cfg.linear_only {
        return Ok(());
    }
    let k_eff = dealias_cutoff(grid, params, cfg.dealias).unwrap_or_else(|| grid.k_max());
    let cap = cfg.cfl_guard * advective_cap(cfg, k_eff, amp, params.p());
    if cfg.dt > cap {
        return Err(Error::CflViolation { dt: cfg.dt, cap });
    }
    Ok(())
}

/// Run the solver from real initial data at `t = 0` to `cfg.t_end`,
/// recording a snapshot at step 0 and every `snapshot_stride` steps.
///
/// Deterministic: identical inputs and configuration give bit-identical
/// snapshot series. Step failures return [`Error::SolverAbort`] carrying the
/// partial trajectory.
pub fn integrate(
    u0: &RealField,
    params: &ModelParams,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<Trajectory> {
    cfg.validate()?;
    u0.validate("integrate initial data")?;
    check_cfl(cfg, u0.grid(), params, u0.linf_norm())?;
    let mut u_hat = to_spectral(u0)?;
    if let Some(cut) = dealias_cutoff(u0.grid(), params, cfg.dealias) {
        apply_dealias_mask(&mut u_hat, cut);
    }
    let state = SolverState::new(u_hat, *params);
    drive(state, cfg, sinks, true)
}

/// As [`integrate`], but starting from spectral initial data with no extra
/// transform round-trip: the recorded `t = 0` snapshot is bit-identical to
/// the (masked) input.
pub fn integrate_spectral(
    u0_hat: SpectralField,
    params: &ModelParams,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut u_hat = u0_hat;
    if let Some(cut) = dealias_cutoff(u_hat.grid(), params, cfg.dealias) {
        apply_dealias_mask(&mut u_hat, cut);
    }
    let amp = to_real(&u_hat)?.linf_norm();
    check_cfl(cfg, u_hat.grid(), params, amp)?;
    drive(SolverState::new(u_hat, *params), cfg, sinks, true)
}

/// Continue a run from a restored state up to `cfg.t_end` (measured from the
/// original `t = 0`). The resumed step itself is not re-recorded.
pub fn integrate_from(
    state: SolverState,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
) -> Result<Trajectory> {
    cfg.validate()?;
    let amp = to_real(&state.u_hat)?.linf_norm();
    check_cfl(cfg, state.u_hat.grid(), &state.params, amp)?;
    drive(state, cfg, sinks, false)
}

fn drive(
    mut state: SolverState,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
    record_initial: bool,
) -> Result<Trajectory> {
    let n_steps = cfg.n_steps()?;
    let stepper = Stepper::new(state.u_hat.grid(), &state.params, cfg)?;
    let mut traj = Trajectory::empty(state.params);

    let record = |traj: &mut Trajectory, state: &SolverState, sinks: &mut [&mut dyn Sink]| -> Result<()> {
        traj.push(state.t, state.u_hat.clone());
        for sink in sinks.iter_mut() {
            sink.record(state)?;
        }
        Ok(())
    };

    if record_initial {
        record(&mut traj, &state, sinks)?;
    }
    while state.step_count < n_steps {
        if let Err(e) = stepper.step(&mut state) {
            return Err(Error::SolverAbort {
                step: state.step_count + 1,
                t: state.t + cfg.dt,
                partial: Box::new(traj),
                source: Box::new(e),
            });
        }
        if state.step_count % cfg.snapshot_stride as u64 == 0 {
            record(&mut traj, &state, sinks)?;
        }
    }
    Ok(traj)
}

/// Integrate both backward to `-t_back` and forward to `t_fwd` from the same
/// initial data, merging the snapshots into one uniformly spaced trajectory.
pub fn integrate_two_sided(
    u0: &RealField,
    params: &ModelParams,
    cfg: &SolverConfig,
    t_back: f64,
    t_fwd: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    u0.validate("integrate initial data")?;
    check_cfl(cfg, u0.grid(), params, u0.linf_norm())?;

    let fwd_cfg = SolverConfig { t_end: t_fwd, ..cfg.clone() };
    let fwd = integrate(u0, params, &fwd_cfg, &mut [])?;

    let back_cfg = SolverConfig { t_end: t_back, ..cfg.clone() };
    let n_back = back_cfg.n_steps()?;
    let mut u_hat = to_spectral(u0)?;
    if let Some(cut) = dealias_cutoff(u0.grid(), params, cfg.dealias) {
        apply_dealias_mask(&mut u_hat, cut);
    }
    let stepper = Stepper::with_step(u0.grid(), params, &back_cfg, -cfg.dt)?;
    let mut state = SolverState::new(u_hat, *params);
    let mut backward: Vec<(f64, SpectralField)> = Vec::new();
    while state.step_count < n_back {
        if let Err(e) = stepper.step(&mut state) {
            return Err(Error::SolverAbort {
                step: state.step_count + 1,
                t: state.t - cfg.dt,
                partial: Box::new(fwd),
                source: Box::new(e),
            });
        }
        if state.step_count % cfg.snapshot_stride as u64 == 0 {
            backward.push((state.t, state.u_hat.clone()));
        }
    }

    let mut entries: Vec<(f64, SpectralField)> = Vec::with_capacity(backward.len() + fwd.len());
    for (t, s) in backward.into_iter().rev() {
        entries.push((t, s));
    }
    for i in 0..fwd.len() {
        entries.push((fwd.time(i), fwd.spectrum(i).clone()));
    }
    Trajectory::from_snapshots(*params, entries)
}

/// Converged solitary-wave profile together with its residual history.
#[derive(Clone, Debug)]
pub struct SolitaryWave {
    pub profile: RealField,
    pub speed: f64,
    /// Relative profile-equation residual at convergence.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Relative residual of `u(x,t) = U(x - ct)` in the time-dependent
    /// equation, normalised by `|c| * ||U'||`.
    pub time_residual: f64,
}

/// Petviashvili iteration for the traveling-wave profile `U` of
/// `u(x,t) = U(x - ct)`, which solves
/// `(k^2 - l|k| - c) U_hat = -(1/(p+1)) F[U^{p+1}]` in Fourier space.
///
/// Requires the spectral gap `c < -l^2/4`, so the symbol stays positive on
/// the whole lattice. The stabilising-factor exponent is `(p+1)/p`.
pub fn petviashvili_solitary_wave(
    params: &ModelParams,
    c: f64,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<SolitaryWave> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Precondition(format!("tol must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::Precondition("max_iter must be >= 1".into()));
    }
    let l = params.l();
    let symbol: Vec<f64> = grid.wavenumbers().iter().map(|&k| k * k - l * k.abs() - c).collect();
    let min_symbol = symbol.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_symbol > 0.0) || c >= -l * l / 4.0 {
        return Err(Error::SpectralGap { c, min_symbol });
    }

    let p = params.p();
    let q = p as i32 + 1;
    let gamma = (p as f64 + 1.0) / p as f64;

    // Gaussian seed with the KdV-limit amplitude and width scales; generic
    // enough that the iteration does real work for every admissible (l, c).
    let amp = -((-c) * (p as f64 + 1.0) * (p as f64 + 2.0) / 2.0).powf(1.0 / p as f64);
    let width = p as f64 * (-c).sqrt() / 2.0;
    let seed = RealField::from_fn(grid, |x| amp * (-(width * x).powi(2)).exp());
    let mut u_hat = to_spectral(&seed)?;

    let rhs_hat = |u_hat: &SpectralField| -> Result<SpectralField> {
        let u = to_real(u_hat)?;
        let powered: Vec<f64> = u.values().iter().map(|&x| x.powi(q)).collect();
        let w = RealField::from_values(u.grid(), powered)?;
        let mut m = to_spectral(&w)?;
        let s = -1.0 / q as f64;
        for c in m.coeffs_mut() {
            *c *= s;
        }
        Ok(m)
    };

    let residual_of = |u_hat: &SpectralField, m_hat: &SpectralField| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..symbol.len() {
            num += (symbol[i] * u_hat.coeff(i) - m_hat.coeff(i)).norm_sqr();
            den += u_hat.coeff(i).norm_sqr();
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    };

    let mut history = Vec::new();
    for iter in 1..=max_iter {
        let m_hat = rhs_hat(&u_hat)?;
        let res = residual_of(&u_hat, &m_hat);
        history.push(res);
        if res < tol {
            let profile = to_real(&u_hat)?;
            let time_residual = traveling_wave_time_residual(&u_hat, &m_hat, &symbol, c, grid);
            return Ok(SolitaryWave {
                profile,
                speed: c,
                residual: res,
                iterations: iter - 1,
                residual_history: history,
                time_residual,
            });
        }

        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..symbol.len() {
            num += symbol[i] * u_hat.coeff(i).norm_sqr();
            den += (u_hat.coeff(i).conj() * m_hat.coeff(i)).re;
        }
        if !(den.abs() > 0.0) {
            return Err(Error::NonConvergence { iterations: iter, residual: res });
        }
        let s = num / den;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NonConvergence { iterations: iter, residual: res });
        }
        let factor = s.powf(gamma);
        let mut next = u_hat.clone();
        for (i, c) in next.coeffs_mut().iter_mut().enumerate() {
            *c = factor * m_hat.coeff(i) / symbol[i];
        }
        next.fix_real_modes();
        next.validate("petviashvili iterate")?;
        u_hat = next;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: history.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// `||d/dx (L_c U - M)|| / (|c| * ||U'||)`: the residual of the translated
/// profile in the time-dependent equation, since substituting `U(x - ct)`
/// reduces it to the x-derivative of the profile equation.
fn traveling_wave_time_residual(
    u_hat: &SpectralField,
    m_hat: &SpectralField,
    symbol: &[f64],
    c: f64,
    grid: &Grid,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &k) in grid.wavenumbers().iter().enumerate() {
        num += k * k * (symbol[i] * u_hat.coeff(i) - m_hat.coeff(i)).norm_sqr();
        den += k * k * u_hat.coeff(i).norm_sqr();
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt() / c.abs()
}
