//! Analytic correlation functions, Laplace transforms, initial conditions
//! and asymptotics of the weak-excitation limit — the independent oracle
//! for the numerical engine.
//!
//! Every time-domain form here solves the order-matched weak-excitation
//! system (see [`crate::fluctuations::JacobianMode::OrderMatched`]), so on
//! that system engine traces and these formulas agree to solver precision.
//!
//! Two coefficients are implemented in the form consistent with the
//! Lyapunov solution and the Laplace-domain expressions rather than as
//! sometimes quoted: the ν̃*ν̃* initial value carries (1+2C+ξ) (not
//! (1+2C+2ξ)), and the first transmitted-light component carries an
//! overall factor ξ. Both choices are pinned by the transform-duality and
//! steady-covariance tests.

use crate::basis::VarPair;
use crate::error::{Error, Result};
use crate::fluctuations::{gbar_squared, CorrelationTrace, CovarianceMatrix};
use nalgebra::Matrix5;
use num_complex::Complex64;

/// Operating point inside the oscillatory weak-excitation regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakExcitationContext {
    pub x: f64,
    pub xi: f64,
    pub c: f64,
    /// Ḡ = √(ξ2C − (ξ−1)²/4), real and positive by construction.
    pub gbar: f64,
}

impl WeakExcitationContext {
    /// Requires the oscillatory regime ξ2C > (ξ−1)²/4 strictly; the
    /// critically damped point is rejected rather than patched with a
    /// sinc limit. X must also sit in the weak-excitation window of the
    /// state equation (a factor 10 below the lower turning point).
    pub fn new(x: f64, xi: f64, c: f64) -> Result<Self> {
        if !(x >= 0.0 && xi > 0.0 && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need X >= 0, xi > 0, C > 0; got X = {x}, xi = {xi}, C = {c}"
            )));
        }
        let g2 = gbar_squared(xi, c);
        if g2 <= 0.0 {
            return Err(Error::OscillatoryRegimeRequired { xi, c });
        }
        // turning_points reports squared fold amplitudes; compare in X.
        let threshold = match crate::model::turning_points(c) {
            Some((x_minus, _)) => 0.1 * x_minus.sqrt(),
            None => 0.1,
        };
        if x > threshold {
            return Err(Error::InvalidParameter(format!(
                "X = {x} is outside the weak-excitation window (X <= {threshold:.4})"
            )));
        }
        Ok(Self { x, xi, c, gbar: g2.sqrt() })
    }

    fn envelope(&self, tau: f64) -> f64 {
        (-0.5 * (self.xi + 1.0) * tau).exp()
    }
}

/// The five ν̃*-row initial values (ν̃*z̃, ν̃*z̃*, ν̃*ν̃, ν̃*ν̃*, ν̃*μ)(0).
fn eq_origin(x: f64, xi: f64, c: f64) -> [f64; 5] {
    let two_c = 2.0 * c;
    let d1 = (1.0 + two_c) * (xi + 1.0);
    let d2 = d1 * d1;
    [
        x.powi(4) * xi * two_c * (2.0 + xi + two_c) / d2,
        -x * x * xi * two_c / d1,
        x.powi(4) * (two_c * (2.0 + xi + two_c) + (xi + 1.0) * (xi + 1.0)) / d2,
        -x * x * (1.0 + two_c + xi) / d1,
        x.powi(3) * (two_c + xi + 1.0) / d1,
    ]
}

/// Initial conditions of the correlation vector in the weak-excitation
/// limit. Signs for all valid inputs: (+, −, +, −, +).
pub fn init_conditions(ctx: &WeakExcitationContext) -> [f64; 5] {
    eq_origin(ctx.x, ctx.xi, ctx.c)
}

/// The z̃*-row initial values (z̃*z̃, z̃*z̃*, z̃*ν̃, z̃*ν̃*, z̃*μ)(0) to
/// leading order, as fixed by the steady Lyapunov equation.
pub fn field_conj_row(ctx: &WeakExcitationContext) -> [f64; 5] {
    let [a, q, _, _, _] = init_conditions(ctx);
    let two_c = 2.0 * ctx.c;
    // Both field entries are the matching ν̃* entries amplified by the
    // cooperativity: z̃*z̃ = 2C·ν̃*z̃(0), z̃*z̃* = 2C·ν̃*z̃*(0).
    [two_c * a, two_c * q, a, q, -ctx.x * q]
}

/// Full leading-order steady covariance. Rows/columns follow from the ν̃*
/// and z̃* rows by the symmetry of C∞ and the exchange z̃ ↔ z̃*, ν̃ ↔ ν̃*
/// (real, purely absorptive operation); the inversion variance is 2X².
pub fn weak_covariance(ctx: &WeakExcitationContext) -> CovarianceMatrix {
    let [a, q, c3, d, e] = init_conditions(ctx);
    let [zz, zszs, _, _, zmu] = field_conj_row(ctx);
    let x = ctx.x;
    #[rustfmt::skip]
    let m = Matrix5::new(
        zszs, zz,   q,   a,   zmu,
        zz,   zszs, a,   q,   zmu,
        q,    a,    d,   c3,  e,
        a,    q,    c3,  d,   e,
        zmu,  zmu,  e,   e,   2.0 * x * x,
    );
    CovarianceMatrix { entries: m, tau: 0.0 }
}

fn trace(pair: &str, taus: &[f64], f: impl Fn(f64) -> f64) -> CorrelationTrace {
    let pair: VarPair = pair.parse().expect("static pair token");
    CorrelationTrace {
        pair,
        taus: taus.to_vec(),
        values: taus.iter().map(|&t| f(t)).collect(),
        normalization: pair.normalization(),
    }
}

/// First (Lorentzian) component of C^{ν̃*z̃}(τ̄): the damped Rabi
/// oscillation seeded by the τ̄ = 0 covariance entries.
pub fn cf_nu_star_z_1(taus: &[f64], ctx: &WeakExcitationContext) -> CorrelationTrace {
    let [a, _, c3, _, _] = init_conditions(ctx);
    let (xi, g) = (ctx.xi, ctx.gbar);
    let sin_coeff = (xi * 2.0 * ctx.c * c3 + 0.5 * (1.0 - xi) * a) / g;
    trace("nu*z", taus, |t| {
        ctx.envelope(t) * (a * (g * t).cos() + sin_coeff * (g * t).sin())
    })
}

/// Second (squared-Lorentzian) component of C^{ν̃*z̃}(τ̄); carries the
/// secular τ̄·trig terms and vanishes at τ̄ = 0.
pub fn cf_nu_star_z_2(taus: &[f64], ctx: &WeakExcitationContext) -> CorrelationTrace {
    let (xi, c, g) = (ctx.xi, ctx.c, ctx.gbar);
    let two_c = 2.0 * c;
    let pref = xi * two_c * ctx.x.powi(4) / ((1.0 + two_c) * (xi + 1.0)) / (2.0 * g);
    let alpha = (xi + 1.0) * (xi - 1.0 - two_c) / (2.0 * g);
    let beta = 1.0 + xi + two_c;
    trace("nu*z", taus, |t| {
        let (s, co) = (g * t).sin_cos();
        pref * ctx.envelope(t) * (alpha * (s / g - t * co) + beta * t * s)
    })
}

/// The two components of the transmitted-light correlation C^{z̃*z̃}(τ̄):
/// (Lorentzian, squared-Lorentzian). The first has no published
/// time-domain form and comes from partial-fraction inversion of its
/// Laplace transform; the duality tests pin it against quadrature.
pub fn cf_z_star_z_components(
    taus: &[f64],
    ctx: &WeakExcitationContext,
) -> (CorrelationTrace, CorrelationTrace) {
    let (xi, c, g) = (ctx.xi, ctx.c, ctx.gbar);
    let two_c = 2.0 * c;
    let amp = field_conj_row(ctx)[0];
    let sin_coeff = 0.5 * (xi + 1.0) / g;
    let comp1 = trace("z*z", taus, |t| {
        amp * ctx.envelope(t) * ((g * t).cos() + sin_coeff * (g * t).sin())
    });
    let pref = ctx.x.powi(4) * 4.0 * c * c * xi / ((1.0 + two_c) * (xi + 1.0)) / (2.0 * g);
    let alpha = xi * (xi - 1.0 - 2.0 * two_c) / (2.0 * g);
    let comp2 = trace("z*z", taus, |t| {
        let (s, co) = (g * t).sin_cos();
        pref * ctx.envelope(t) * (alpha * (s / g - t * co) + xi * t * s)
    });
    (comp1, comp2)
}

/// Anomalous correlation C^{ν̃*z̃*}(τ̄) — order X², dominant in the
/// weak-excitation limit.
pub fn cf_nu_star_z_star(taus: &[f64], ctx: &WeakExcitationContext) -> CorrelationTrace {
    let [_, q, _, _, _] = init_conditions(ctx);
    let (xi, g) = (ctx.xi, ctx.gbar);
    let sin_coeff = (4.0 * ctx.c + xi + 3.0) / (2.0 * g);
    trace("nu*z*", taus, |t| {
        q * ctx.envelope(t) * ((g * t).cos() + sin_coeff * (g * t).sin())
    })
}

/// The partner anomalous correlation C^{z̃*ν̃*}(τ̄): same initial value as
/// [`cf_nu_star_z_star`] (C∞ is symmetric) but different evolution.
pub fn cf_z_star_nu_star(taus: &[f64], ctx: &WeakExcitationContext) -> CorrelationTrace {
    let [_, q, _, _, _] = init_conditions(ctx);
    let (xi, g) = (ctx.xi, ctx.gbar);
    let sin_coeff = (xi - 4.0 * ctx.c - 1.0) / (2.0 * g);
    trace("z*nu*", taus, |t| {
        q * ctx.envelope(t) * ((g * t).cos() + sin_coeff * (g * t).sin())
    })
}

/// Denominator (ξ+s̄)(1+s̄)+ξ2C common to every Laplace form.
pub fn denominator(sbar: Complex64, xi: f64, c: f64) -> Complex64 {
    (xi + sbar) * (1.0 + sbar) + xi * 2.0 * c
}

fn check_pole(delta: Complex64, sbar: Complex64, xi: f64, c: f64) -> Result<()> {
    let scale = 1.0 + sbar.norm_sqr() + xi * (1.0 + 2.0 * c);
    if delta.norm() < 1e-12 * scale {
        return Err(Error::PoleAt(sbar));
    }
    Ok(())
}

/// Laplace transform of the first C^{ν̃*z̃} component.
pub fn lt_nu_star_z_1(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let [a, _, c3, _, _] = init_conditions(ctx);
    let delta = denominator(sbar, ctx.xi, ctx.c);
    check_pole(delta, sbar, ctx.xi, ctx.c)?;
    Ok((a * (sbar + 1.0) + ctx.xi * 2.0 * ctx.c * c3) / delta)
}

/// Laplace transform of the second C^{ν̃*z̃} component.
pub fn lt_nu_star_z_2(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let (xi, c) = (ctx.xi, ctx.c);
    let two_c = 2.0 * c;
    let delta = denominator(sbar, xi, c);
    check_pole(delta, sbar, xi, c)?;
    let pref = xi * two_c * ctx.x.powi(4) / ((1.0 + two_c) * (xi + 1.0));
    Ok(pref * ((xi + sbar) * (xi + 1.0) + two_c * sbar) / (delta * delta))
}

/// Laplace transform of the first C^{z̃*z̃} component.
pub fn lt_z_star_z_1(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let delta = denominator(sbar, ctx.xi, ctx.c);
    check_pole(delta, sbar, ctx.xi, ctx.c)?;
    Ok(field_conj_row(ctx)[0] * (sbar + 1.0 + ctx.xi) / delta)
}

/// Laplace transform of the second C^{z̃*z̃} component.
pub fn lt_z_star_z_2(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let (xi, c) = (ctx.xi, ctx.c);
    let two_c = 2.0 * c;
    let delta = denominator(sbar, xi, c);
    check_pole(delta, sbar, xi, c)?;
    let pref = ctx.x.powi(4) * 4.0 * c * c * xi / ((1.0 + two_c) * (xi + 1.0));
    Ok(pref * xi * (sbar + xi - two_c) / (delta * delta))
}

/// Laplace transform of C^{ν̃*z̃*}.
pub fn lt_nu_star_z_star(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let [_, q, _, _, _] = init_conditions(ctx);
    let delta = denominator(sbar, ctx.xi, ctx.c);
    check_pole(delta, sbar, ctx.xi, ctx.c)?;
    Ok(q * (sbar + ctx.xi + 2.0 * (ctx.c + 1.0)) / delta)
}

/// Laplace transform of C^{z̃*ν̃*}.
pub fn lt_z_star_nu_star(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let [_, q, _, _, _] = init_conditions(ctx);
    let delta = denominator(sbar, ctx.xi, ctx.c);
    check_pole(delta, sbar, ctx.xi, ctx.c)?;
    Ok(q * (sbar + ctx.xi - 2.0 * ctx.c) / delta)
}

/// Laplace transform of C^{ν̃*μ}.
pub fn lt_nu_star_mu(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let (xi, c) = (ctx.xi, ctx.c);
    let two_c = 2.0 * c;
    let delta = denominator(sbar, xi, c);
    check_pole(delta, sbar, xi, c)?;
    let pref = ctx.x.powi(3) / ((1.0 + two_c) * (xi + 1.0));
    Ok(pref * ((xi + sbar) * (xi + 1.0) + two_c * sbar) / delta)
}

/// Laplace transform of the atom-atom correlation C^{ν̃*ν̃*}; its real
/// part at s̄ = −iδ is the (unnormalized) spectrum of squeezing.
pub fn lt_nu_star_nu_star(sbar: Complex64, ctx: &WeakExcitationContext) -> Result<Complex64> {
    let (xi, c) = (ctx.xi, ctx.c);
    let two_c = 2.0 * c;
    let delta = denominator(sbar, xi, c);
    check_pole(delta, sbar, xi, c)?;
    let pref = -ctx.x * ctx.x / ((xi + 1.0) * (1.0 + two_c));
    Ok(pref * ((1.0 + xi + two_c) * sbar + xi * (xi + 1.0)) / delta)
}

/// Many-atom strong-coupling asymptotics (ξ → 0, C → ∞ at fixed
/// ξ2C ≫ 1) of the sum and difference of the two anomalous correlators:
/// sum ≈ −2X²ξ e^{−τ̄/2}cos(√(ξ2C)τ̄), difference ≈
/// 2X²√(ξ2C) e^{−τ̄/2}sin(√(ξ2C)τ̄).
pub fn asymptotic_sum_difference(
    taus: &[f64],
    x: f64,
    xi: f64,
    xi2c: f64,
) -> (CorrelationTrace, CorrelationTrace) {
    let w = xi2c.sqrt();
    let sum = trace("nu*z*", taus, |t| {
        -2.0 * x * x * xi * (-0.5 * t).exp() * (w * t).cos()
    });
    let diff = trace("z*nu*", taus, |t| {
        2.0 * x * x * w * (-0.5 * t).exp() * (w * t).sin()
    });
    (sum, diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ctx_raizen() -> WeakExcitationContext {
        WeakExcitationContext::new(0.01, 0.176, 39.6).unwrap()
    }

    fn taus() -> Vec<f64> {
        (0..=120).map(|k| 6.0 * k as f64 / 120.0).collect()
    }

    #[test]
    fn regime_gatekeeping() {
        assert!(WeakExcitationContext::new(0.01, 1.9, 58.0).is_ok(), "Mielke parameters");
        // Critically damped / overdamped: ξ2C ≤ (ξ−1)²/4.
        let err = WeakExcitationContext::new(0.01, 8.0, 0.1);
        assert!(matches!(err, Err(Error::OscillatoryRegimeRequired { .. })));
        // Outside the weak-excitation window (X− ≈ 1.05 at C = 40).
        assert!(WeakExcitationContext::new(0.5, 0.176, 39.6).is_err());
    }

    #[test]
    fn origin_values_and_signs() {
        let ctx = ctx_raizen();
        let ic = init_conditions(&ctx);
        assert!(ic[0] > 0.0 && ic[2] > 0.0 && ic[4] > 0.0);
        assert!(ic[1] < 0.0 && ic[3] < 0.0);
        // ξ = 0 limits of the raw expressions.
        let z = eq_origin(0.3, 0.0, 10.0);
        assert_eq!(z[0], 0.0);
        assert_eq!(z[1], 0.0);
        assert_relative_eq!(z[3], -0.09, max_relative = 1e-15);
        assert_eq!(eq_origin(0.0, 0.4, 10.0), [0.0; 5]);
    }

    #[test]
    fn time_domain_forms_start_at_origin_values() {
        let ctx = ctx_raizen();
        let ic = init_conditions(&ctx);
        let t = [0.0, 1.0];
        assert_relative_eq!(cf_nu_star_z_1(&t, &ctx).values[0], ic[0], max_relative = 1e-12);
        assert_eq!(cf_nu_star_z_2(&t, &ctx).values[0], 0.0);
        assert_relative_eq!(cf_nu_star_z_star(&t, &ctx).values[0], ic[1], max_relative = 1e-12);
        assert_relative_eq!(cf_z_star_nu_star(&t, &ctx).values[0], ic[1], max_relative = 1e-12);
        let (c1, c2) = cf_z_star_z_components(&t, &ctx);
        assert_relative_eq!(c1.values[0], field_conj_row(&ctx)[0], max_relative = 1e-12);
        assert_eq!(c2.values[0], 0.0);
    }

    #[test]
    fn anomalous_pair_shares_origin_but_differs_later() {
        let ctx = ctx_raizen();
        let a = cf_nu_star_z_star(&taus(), &ctx);
        let b = cf_z_star_nu_star(&taus(), &ctx);
        assert_eq!(a.values[0], b.values[0]);
        let max_gap = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(max_gap > 0.1 * a.values[0].abs());
    }

    #[test]
    fn denominator_factorizes_at_normal_mode_roots() {
        let ctx = ctx_raizen();
        let half = Complex64::new(-0.5 * (ctx.xi + 1.0), 0.0);
        for sign in [1.0, -1.0] {
            let rho = half + Complex64::new(0.0, sign * ctx.gbar);
            assert!(denominator(rho, ctx.xi, ctx.c).norm() < 1e-12);
        }
    }

    #[test]
    fn laplace_initial_value_theorem() {
        let ctx = ctx_raizen();
        let s = Complex64::new(1e8, 0.0);
        let ic = init_conditions(&ctx);
        assert_relative_eq!((s * lt_nu_star_z_1(s, &ctx).unwrap()).re, ic[0], max_relative = 1e-6);
        assert_relative_eq!((s * lt_nu_star_mu(s, &ctx).unwrap()).re, ic[4], max_relative = 1e-6);
        assert_relative_eq!((s * lt_nu_star_nu_star(s, &ctx).unwrap()).re, ic[3], max_relative = 1e-6);
        assert_relative_eq!(
            (s * lt_z_star_z_1(s, &ctx).unwrap()).re,
            field_conj_row(&ctx)[0],
            max_relative = 1e-6
        );
    }

    #[test]
    fn pole_rejection() {
        let ctx = ctx_raizen();
        let rho = Complex64::new(-0.5 * (ctx.xi + 1.0), ctx.gbar);
        assert!(matches!(lt_nu_star_mu(rho, &ctx), Err(Error::PoleAt(_))));
    }

    #[test]
    fn order_bookkeeping_in_x() {
        let a = WeakExcitationContext::new(0.005, 0.176, 39.6).unwrap();
        let b = WeakExcitationContext::new(0.01, 0.176, 39.6).unwrap();
        let t = [0.7];
        // X⁴ family scales by 16, X² family by 4 under X → 2X.
        assert_relative_eq!(
            cf_nu_star_z_1(&t, &b).values[0] / cf_nu_star_z_1(&t, &a).values[0],
            16.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cf_nu_star_z_2(&t, &b).values[0] / cf_nu_star_z_2(&t, &a).values[0],
            16.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cf_nu_star_z_star(&t, &b).values[0] / cf_nu_star_z_star(&t, &a).values[0],
            4.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cf_z_star_nu_star(&t, &b).values[0] / cf_z_star_nu_star(&t, &a).values[0],
            4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn squeezing_spectrum_negative_at_resonance() {
        let ctx = ctx_raizen();
        let v = lt_nu_star_nu_star(Complex64::new(0.0, 0.0), &ctx).unwrap();
        assert!(v.re < 0.0);
    }

    #[test]
    fn weak_covariance_is_symmetric() {
        let m = weak_covariance(&ctx_raizen()).entries;
        assert_abs_diff_eq!((m - m.transpose()).amax(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn asymptotic_values_at_origin() {
        let (sum, diff) = asymptotic_sum_difference(&[0.0, 0.4], 0.01, 1e-3, 10.0);
        assert_relative_eq!(sum.values[0], -2.0 * 1e-4 * 1e-3, max_relative = 1e-12);
        assert_eq!(diff.values[0], 0.0);
    }
}
