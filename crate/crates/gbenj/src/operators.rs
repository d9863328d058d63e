//! Fourier-multiplier operators: Hilbert transform, derivatives, the linear
//! group of the equation, Gevrey and Sobolev weights, frequency projectors,
//! and the spectral mollifier.
//!
//! All operators here are diagonal in Fourier space and therefore commute
//! pairwise; each maps Hermitian-symmetric spectra to Hermitian-symmetric
//! spectra, so real fields stay real. The sign-ambiguous Nyquist mode is
//! zeroed by every odd-symbol operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Exponent arguments beyond this overflow double precision (`exp(709.78)`).
pub const EXP_GUARD: f64 = 700.0;

/// Equation parameters: Hilbert-term strength `l` and nonlinearity power `p`.
///
/// `l = 0` is admitted as the KdV limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    l: f64,
    p: u32,
}

impl ModelParams {
    pub fn new(l: f64, p: u32) -> Result<Self> {
        if !(l.is_finite() && (0.0..1.0).contains(&l)) {
            return Err(Error::Precondition(format!("require 0 <= l < 1, got l = {l}")));
        }
        if p < 1 {
            return Err(Error::Precondition("require p >= 1".into()));
        }
        Ok(ModelParams { l, p })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn p(&self) -> u32 {
        self.p
    }
}

/// Gevrey weight exponents `(sigma, s)`; `sigma = 0` reduces to Sobolev `H^s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GevreyIndex {
    pub sigma: f64,
    pub s: f64,
}

impl GevreyIndex {
    pub fn new(sigma: f64, s: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0 && s.is_finite()) {
            return Err(Error::Precondition(format!(
                "require finite sigma >= 0 and finite s, got ({sigma}, {s})"
            )));
        }
        Ok(GevreyIndex { sigma, s })
    }
}

/// Ramp shape of the mollifier transfer function on `n <= |k| <= 2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampProfile {
    Linear,
    /// Half-cosine ramp, smooth at both ends.
    Cosine,
}

/// Spectral mollifier `eta_n`: transfer function equal to 1 for `|k| <= n`,
/// 0 for `|k| >= 2n`, monotone in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    pub n: f64,
    pub profile: RampProfile,
}

impl MollifierSpec {
    pub fn new(n: f64) -> Result<Self> {
        Self::with_profile(n, RampProfile::Linear)
    }

    pub fn with_profile(n: f64, profile: RampProfile) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Precondition(format!("mollifier cutoff must be > 0, got {n}")));
        }
        Ok(MollifierSpec { n, profile })
    }

    /// Transfer function value at wavenumber `k`.
    pub fn eta_hat(&self, k: f64) -> f64 {
        let a = k.abs();
        if a <= self.n {
            1.0
        } else if a >= 2.0 * self.n {
            0.0
        } else {
            let x = (a - self.n) / self.n;
            match self.profile {
                RampProfile::Linear => 1.0 - x,
                RampProfile::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * x).cos()),
            }
        }
    }
}

fn map_spectrum(field: &SpectralField, f: impl Fn(f64, Complex64) -> Complex64) -> SpectralField {
    let mut out = field.clone();
    let ks = field.grid().wavenumbers().to_vec();
    for (c, k) in out.coeffs_mut().iter_mut().zip(ks) {
        *c = f(k, *c);
    }
    out
}

/// Hilbert transform: multiplier `-i*sgn(k)` with `sgn(0) = 0`.
///
/// The Nyquist mode is zeroed (odd symbol, sign-ambiguous there).
pub fn hilbert(field: &SpectralField) -> SpectralField {
    let nyq = field.grid().nyquist_index();
    let mut out = map_spectrum(field, |k, c| {
        if k == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -k.signum()) * c
        }
    });
    out.coeffs_mut()[nyq] = Complex64::new(0.0, 0.0);
    out
}

/// Spectral derivative of the given order: multiplier `(ik)^order`.
/// Odd orders zero the Nyquist mode.
pub fn derivative(field: &SpectralField, order: u32) -> SpectralField {
    let mut out = map_spectrum(field, |k, c| {
        Complex64::new(0.0, k).powu(order) * c
    });
    if order % 2 == 1 {
        let nyq = out.grid().nyquist_index();
        out.coeffs_mut()[nyq] = Complex64::new(0.0, 0.0);
    } else {
        out.fix_real_modes();
    }
    out
}

/// Dispersion symbol `phi(k) = l*|k|*k - k^3` of the linear part.
pub fn phase_symbol(params: &ModelParams, k: f64) -> f64 {
    params.l() * k.abs() * k - k * k * k
}

/// Linear group `W(t)`: multiplies each coefficient by `exp(i*phi(k)*t)`.
///
/// Unimodular, so the modulus of every coefficient is preserved and
/// `W(t) o W(-t)` is the identity. The Nyquist mode is left unchanged
/// (its phase is sign-ambiguous; it is zero in all dealiased states).
pub fn linear_propagator(params: &ModelParams, t: f64, field: &SpectralField) -> SpectralField {
    let nyq = field.grid().nyquist_index();
    let saved = field.coeff(nyq);
    let mut out = map_spectrum(field, |k, c| {
        Complex64::from_polar(1.0, phase_symbol(params, k) * t) * c
    });
    out.coeffs_mut()[nyq] = saved;
    out
}

/// Gevrey weight `exp(sigma*|D_x|)`: multiplies coefficients by
/// `exp(sigma*|k|)`. Guards against exponent overflow.
///
/// The weight amplifies high modes by orders of magnitude, so the output is
/// re-projected onto the Hermitian subspace; on exactly symmetric input the
/// projection is a bitwise no-op.
pub fn gevrey_multiplier(sigma: f64, field: &SpectralField) -> Result<SpectralField> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Precondition(format!("require sigma >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(field.clone());
    }
    let worst = sigma * field.grid().k_max();
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }
    let mut out = map_spectrum(field, |k, c| c * (sigma * k.abs()).exp());
    out.symmetrize();
    Ok(out)
}

/// Sobolev weight `<k>^s` with the bracket convention `<k> = 1 + |k|`.
pub fn sobolev_multiplier(s: f64, field: &SpectralField) -> SpectralField {
    map_spectrum(field, |k, c| c * (1.0 + k.abs()).powf(s))
}

/// Which side a frequency projector keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectorSide {
    /// Keep `|k| > a`.
    High,
    /// Keep `|k| <= a` (the boundary mode belongs to the low-pass part).
    Low,
}

/// Frequency projector `P^a` (high) / `P_a` (low); the two sum to the
/// identity exactly.
pub fn project(field: &SpectralField, a: f64, side: ProjectorSide) -> SpectralField {
    map_spectrum(field, |k, c| {
        let low = k.abs() <= a;
        let keep = match side {
            ProjectorSide::Low => low,
            ProjectorSide::High => !low,
        };
        if keep {
            c
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Apply the mollifier transfer function `eta_hat_n(k)`.
pub fn mollify(field: &SpectralField, spec: &MollifierSpec) -> SpectralField {
    map_spectrum(field, |k, c| c * spec.eta_hat(k))
}

/// Evaluation of the two exponential-lemma inequalities at one sample point.
#[derive(Clone, Copy, Debug)]
pub struct ExpLemmaProbe {
    /// `exp(sigma|a|)exp(sigma|b|) - exp(sigma|a+b|)`.
    pub lhs: f64,
    /// `[2 sigma min(|a|,|b|)]^theta * exp(sigma|a|)exp(sigma|b|)`.
    pub rhs: f64,
    /// `lhs <= rhs*(1 + 1e-12)`, evaluated in the overflow-safe ratio form.
    pub holds: bool,
    /// `lhs/rhs` in the common-factor-cancelled form; in `[0, 1]` when the
    /// inequality holds.
    pub slack_ratio: f64,
    /// `min(|a|,|b|) * <a+b> / (<a><b>)` for the companion bound
    /// `min(|a|,|b|) <= <a><b>/<a+b>`.
    pub min_bound_ratio: f64,
    /// Whether the companion bound holds as printed (constant 1).
    pub min_bound_holds: bool,
}

/// Probe both inequalities of the exponential lemma at `(alpha, beta)` for
/// weight `sigma > 0` and interpolation exponent `theta` in `[0, 1]`.
///
/// The first inequality is evaluated as
/// `(1 - exp(-sigma*d)) <= [2 sigma min]^theta` with
/// `d = |a| + |b| - |a+b| >= 0`, which equals the stated form after dividing
/// out the common positive factor `exp(sigma(|a|+|b|))` and avoids both
/// overflow and catastrophic cancellation.
pub fn exp_lemma_probe(alpha: f64, beta: f64, sigma: f64, theta: f64) -> Result<ExpLemmaProbe> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Precondition(format!("require sigma > 0, got {sigma}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Precondition(format!("require theta in [0,1], got {theta}")));
    }
    let a = alpha.abs();
    let b = beta.abs();
    let worst = sigma * a.max(b);
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }

    let min_ab = a.min(b);
    let d = a + b - (alpha + beta).abs();
    let lhs_ratio = -(-sigma * d).exp_m1();
    let rhs_ratio = (2.0 * sigma * min_ab).powf(theta);
    let holds = lhs_ratio <= rhs_ratio * (1.0 + 1e-12);
    let slack_ratio = if rhs_ratio == 0.0 && lhs_ratio == 0.0 {
        0.0
    } else {
        lhs_ratio / rhs_ratio
    };

    let common = (sigma * (a + b)).exp();
    let lhs = lhs_ratio * common;
    let rhs = rhs_ratio * common;

    let bracket = |x: f64| 1.0 + x.abs();
    let min_bound_ratio = min_ab * bracket(alpha + beta) / (bracket(alpha) * bracket(beta));
    let min_bound_holds = min_bound_ratio <= 1.0 + 1e-12;

    Ok(ExpLemmaProbe { lhs, rhs, holds, slack_ratio, min_bound_ratio, min_bound_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_real, to_spectral, Grid, RealField};
    use crate::testutil::random_spectrum;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(64, 2.0 * PI).unwrap()
    }

    fn assert_fields_close(a: &RealField, b: &RealField, tol: f64) {
        let scale = a.linf_norm().max(b.linf_norm()).max(1e-30);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= tol * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn hilbert_maps_cos_to_sin() {
        let g = grid();
        for k in [1.0, 3.0, 7.0] {
            let f = to_spectral(&RealField::from_fn(&g, |x| (k * x).cos())).unwrap();
            let h = to_real(&hilbert(&f)).unwrap();
            let expect = RealField::from_fn(&g, |x| (k * x).sin());
            assert_fields_close(&h, &expect, 1e-13);
        }
    }

    #[test]
    fn hilbert_maps_sin_to_minus_cos() {
        let g = grid();
        let f = to_spectral(&RealField::from_fn(&g, |x| (2.0 * x).sin())).unwrap();
        let h = to_real(&hilbert(&f)).unwrap();
        let expect = RealField::from_fn(&g, |x| -(2.0 * x).cos());
        assert_fields_close(&h, &expect, 1e-13);
    }

    #[test]
    fn hilbert_annihilates_constants_and_squares_to_minus_one() {
        let g = grid();
        let c = to_spectral(&RealField::from_fn(&g, |_| 4.2)).unwrap();
        assert!(hilbert(&c).max_abs() < 1e-14);

        // mean-zero random field: H(H(f)) = -f
        let f = random_spectrum(&g, 11, 0.2);
        let hh = hilbert(&hilbert(&f));
        let scale = f.max_abs();
        for (i, (x, y)) in hh.coeffs().iter().zip(f.coeffs()).enumerate() {
            if i == g.nyquist_index() {
                continue;
            }
            assert!((x + y).norm() <= 1e-14 * scale);
        }
    }

    #[test]
    fn derivative_of_sin() {
        let g = grid();
        let f = to_spectral(&RealField::from_fn(&g, |x| x.sin())).unwrap();
        let d1 = to_real(&derivative(&f, 1)).unwrap();
        assert_fields_close(&d1, &RealField::from_fn(&g, |x| x.cos()), 1e-13);
        // k^3 amplifies transform roundoff at the top of the spectrum
        let d3 = to_real(&derivative(&f, 3)).unwrap();
        assert_fields_close(&d3, &RealField::from_fn(&g, |x| -x.cos()), 1e-10);
    }

    #[test]
    fn product_rule_on_dealiased_field() {
        // f band-limited to the lower third of the spectrum, so f*f is exact.
        let g = Grid::new(96, 2.0 * PI).unwrap();
        let f = RealField::from_fn(&g, |x| x.cos() + 0.5 * (3.0 * x).sin() + 0.2 * (8.0 * x).cos());
        let f_hat = to_spectral(&f).unwrap();
        let fsq = RealField::from_values(
            &g,
            f.values().iter().map(|v| v * v).collect(),
        )
        .unwrap();
        let lhs = to_real(&derivative(&to_spectral(&fsq).unwrap(), 1)).unwrap();
        let fx = to_real(&derivative(&f_hat, 1)).unwrap();
        let rhs = RealField::from_values(
            &g,
            f.values().iter().zip(fx.values()).map(|(a, b)| 2.0 * a * b).collect(),
        )
        .unwrap();
        assert_fields_close(&lhs, &rhs, 1e-10);
    }

    #[test]
    fn phase_symbol_values() {
        let p1 = ModelParams::new(0.5, 1).unwrap();
        assert_eq!(phase_symbol(&p1, 2.0), 0.5 * 4.0 - 8.0);
        assert_eq!(phase_symbol(&p1, 2.0), -6.0);
        let p2 = ModelParams::new(0.3, 1).unwrap();
        assert!((phase_symbol(&p2, -1.0) - 0.7).abs() < 1e-15);
        assert_eq!(phase_symbol(&p2, 0.0), 0.0);
    }

    #[test]
    fn propagator_identity_modulus_and_inverse() {
        let g = grid();
        let params = ModelParams::new(0.4, 1).unwrap();
        let f = random_spectrum(&g, 5, 0.2);
        let same = linear_propagator(&params, 0.0, &f);
        assert_eq!(same.coeffs(), f.coeffs());

        let moved = linear_propagator(&params, 2.3, &f);
        for (a, b) in moved.coeffs().iter().zip(f.coeffs()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-14 * b.norm().max(1e-30));
        }
        assert!((moved.l2_norm() - f.l2_norm()).abs() <= 1e-13 * f.l2_norm());

        let back = linear_propagator(&params, -2.3, &moved);
        let scale = f.max_abs();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn propagator_single_mode_matches_direct_evaluation() {
        // Closed-form oracle: a single cosine mode evolves as
        // cos(k x + phi(k) t) under the linear flow.
        let g = grid();
        let params = ModelParams::new(0.0, 1).unwrap();
        let t = 1.0;
        let f = to_spectral(&RealField::from_fn(&g, |x| x.cos())).unwrap();
        let moved = to_real(&linear_propagator(&params, t, &f)).unwrap();
        let phi = phase_symbol(&params, 1.0);
        assert_eq!(phi, -1.0);
        let expect = RealField::from_fn(&g, |x| (x + phi * t).cos());
        assert_fields_close(&moved, &expect, 1e-13);
    }

    #[test]
    fn gevrey_multiplier_examples_and_composition() {
        let g = grid();
        let f = random_spectrum(&g, 9, 0.3);
        let id = gevrey_multiplier(0.0, &f).unwrap();
        assert_eq!(id.coeffs(), f.coeffs());

        // single mode k = 2, sigma = 0.5 -> factor e
        let mut single = crate::spectral::SpectralField::zeros(&g);
        single.coeffs_mut()[2] = Complex64::new(1.0, 0.0);
        single.coeffs_mut()[62] = Complex64::new(1.0, 0.0);
        let scaled = gevrey_multiplier(0.5, &single).unwrap();
        assert!((scaled.coeff(2).re - 1.0_f64.exp()).abs() < 1e-14);

        let twice = gevrey_multiplier(0.03, &gevrey_multiplier(0.07, &f).unwrap()).unwrap();
        let once = gevrey_multiplier(0.10, &f).unwrap();
        let scale = once.max_abs();
        for (a, b) in twice.coeffs().iter().zip(once.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }

        assert!(matches!(
            gevrey_multiplier(30.0, &f),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn sobolev_multiplier_examples() {
        let g = grid();
        let f = random_spectrum(&g, 13, 0.3);
        assert_eq!(sobolev_multiplier(0.0, &f).coeffs(), f.coeffs());

        let mut single = crate::spectral::SpectralField::zeros(&g);
        single.coeffs_mut()[1] = Complex64::new(1.0, 0.0);
        single.coeffs_mut()[63] = Complex64::new(1.0, 0.0);
        assert!((sobolev_multiplier(2.0, &single).coeff(1).re - 4.0).abs() < 1e-14);

        let round = sobolev_multiplier(-1.3, &sobolev_multiplier(1.3, &f));
        let scale = f.max_abs();
        for (a, b) in round.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn projector_complementarity() {
        let g = grid();
        let f = random_spectrum(&g, 17, 0.1);
        let beyond = g.k_max() + 1.0;
        assert_eq!(project(&f, beyond, ProjectorSide::Low).coeffs(), f.coeffs());
        assert!(project(&f, beyond, ProjectorSide::High).max_abs() == 0.0);

        for a in [0.5, 3.0, 10.0] {
            let hi = project(&f, a, ProjectorSide::High);
            let lo = project(&f, a, ProjectorSide::Low);
            for i in 0..g.n_points() {
                let sum = hi.coeff(i) + lo.coeff(i);
                assert_eq!(sum, f.coeff(i));
            }
        }
    }

    #[test]
    fn mollifier_identity_and_norm_non_increase() {
        let g = grid();
        let f = random_spectrum(&g, 21, 0.1);
        let wide = MollifierSpec::new(2.0 * g.k_max()).unwrap();
        assert_eq!(mollify(&f, &wide).coeffs(), f.coeffs());

        // spectrum supported inside |k| <= n is untouched
        let inner = project(&f, 5.0, ProjectorSide::Low);
        let m = MollifierSpec::new(5.0).unwrap();
        assert_eq!(mollify(&inner, &m).coeffs(), inner.coeffs());

        for profile in [RampProfile::Linear, RampProfile::Cosine] {
            let m = MollifierSpec::with_profile(4.0, profile).unwrap();
            let out = mollify(&f, &m);
            assert!(out.l2_norm() <= f.l2_norm() * (1.0 + 1e-14));
            // weighted norms too: eta_hat is a pointwise contraction
            let wf = gevrey_multiplier(0.1, &f).unwrap();
            let wout = gevrey_multiplier(0.1, &out).unwrap();
            assert!(wout.l2_norm() <= wf.l2_norm() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn multipliers_commute_pairwise() {
        let g = grid();
        let f = random_spectrum(&g, 23, 0.2);
        let params = ModelParams::new(0.5, 1).unwrap();
        let m = MollifierSpec::new(6.0).unwrap();
        let ops: Vec<Box<dyn Fn(&SpectralField) -> SpectralField>> = vec![
            Box::new(hilbert),
            Box::new(|x| derivative(x, 1)),
            Box::new(move |x| linear_propagator(&params, 0.7, x)),
            Box::new(|x| gevrey_multiplier(0.08, x).unwrap()),
            Box::new(|x| sobolev_multiplier(-1.0, x)),
            Box::new(|x| project(x, 7.0, ProjectorSide::Low)),
            Box::new(move |x| mollify(x, &m)),
        ];
        for (i, a) in ops.iter().enumerate() {
            for b in ops.iter().skip(i + 1) {
                let ab = a(&b(&f));
                let ba = b(&a(&f));
                let scale = ab.max_abs().max(1e-30);
                for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
                    assert!((x - y).norm() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn real_to_real_closure() {
        let g = grid();
        let f = random_spectrum(&g, 29, 0.2);
        let params = ModelParams::new(0.2, 1).unwrap();
        for out in [
            hilbert(&f),
            derivative(&f, 3),
            linear_propagator(&params, 1.1, &f),
            gevrey_multiplier(0.05, &f).unwrap(),
            sobolev_multiplier(2.0, &f),
            project(&f, 4.0, ProjectorSide::High),
            mollify(&f, &MollifierSpec::new(3.0).unwrap()),
        ] {
            assert!(out.hermitian_asymmetry() <= 1e-12);
            assert!(to_real(&out).is_ok());
        }
    }

    #[test]
    fn exp_lemma_trivial_cases() {
        let p = exp_lemma_probe(0.0, 3.0, 0.8, 0.6).unwrap();
        assert_eq!(p.lhs, 0.0);
        assert!(p.holds);

        // theta = 0: rhs equals the product, lhs is at most the product
        let p = exp_lemma_probe(-2.0, 5.0, 0.9, 0.0).unwrap();
        assert!(p.holds);
        assert!(p.rhs >= p.lhs);

        assert!(matches!(
            exp_lemma_probe(1e6, 1.0, 1.0, 0.5),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn exp_lemma_random_sweep() {
        let mut rng = ChaCha12Rng::seed_from_u64(1234);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let alpha = rng.gen_range(-50.0..50.0);
            let beta = rng.gen_range(-50.0..50.0);
            let sigma = 1.0 - rng.gen_range(0.0..1.0);
            let theta = rng.gen_range(0.0..=1.0);
            let p = exp_lemma_probe(alpha, beta, sigma, theta).unwrap();
            assert!(p.holds, "violation at alpha={alpha} beta={beta} sigma={sigma} theta={theta}");
            worst = worst.max(p.slack_ratio);
        }
        assert!(worst <= 1.0 + 1e-12);
    }

    #[test]
    fn exp_lemma_min_bound_needs_constant_two() {
        // The companion bound fails with constant 1 for equal same-sign
        // arguments but always holds with constant 2.
        let p = exp_lemma_probe(10.0, 10.0, 0.1, 0.5).unwrap();
        assert!(!p.min_bound_holds);
        assert!(p.min_bound_ratio <= 2.0);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..10_000 {
            let alpha = rng.gen_range(-50.0..50.0);
            let beta = rng.gen_range(-50.0..50.0);
            let p = exp_lemma_probe(alpha, beta, 0.5, 0.5).unwrap();
            assert!(p.min_bound_ratio <= 2.0);
        }
    }
}
