//! Physical parameters, the bistability state equation and mean-field
//! steady states.
//!
//! Everything here is a pure function; values are immutable after
//! construction and safe to share across threads.

use crate::error::{Error, Result};
use nalgebra::Matrix3;

/// Raw rates and counts defining an experiment. Angular frequencies
/// throughout (rad/s); `kappa` is half the photon loss rate 2κ.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Atom-cavity coupling g.
    pub g: f64,
    /// Cavity field decay κ (photon loss rate is 2κ).
    pub kappa: f64,
    /// Atomic spontaneous-emission rate γ.
    pub gamma: f64,
    /// Number of atoms N.
    pub n_atoms: u32,
    /// Resonance frequency ω₀ — bookkeeping only, all dynamics on resonance.
    pub omega0: f64,
    /// Drive strength, either already scaled or raw.
    pub drive: Drive,
    /// Drive phase convention φ₀; consumed only by the oracle mapping.
    pub phi0: f64,
}

/// Drive amplitude, accepted either as the scaled real Y or as the raw
/// field amplitude |Ē₀| (angular frequency). Stored as given; converted
/// canonically through [`PhysicalParams::drive_y`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    ScaledY(f64),
    RawAmplitude(f64),
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.kappa > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rates must be strictly positive (g = {}, kappa = {}, gamma = {})",
                self.g, self.kappa, self.gamma
            )));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be >= 1".into()));
        }
        let y = match self.drive {
            Drive::ScaledY(y) => y,
            Drive::RawAmplitude(e) => e,
        };
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("drive must be >= 0, got {y}")));
        }
        Ok(())
    }

    /// Saturation photon number n_s = γ²/(8g²).
    pub fn n_sat(&self) -> f64 {
        self.gamma * self.gamma / (8.0 * self.g * self.g)
    }

    /// Scaled drive Y = |Ē₀|/(κ√n_s); exact and invertible.
    pub fn drive_y(&self) -> f64 {
        match self.drive {
            Drive::ScaledY(y) => y,
            Drive::RawAmplitude(e) => e / (self.kappa * self.n_sat().sqrt()),
        }
    }

    /// Raw drive amplitude |Ē₀| = Y·κ√n_s.
    pub fn raw_drive(&self) -> f64 {
        match self.drive {
            Drive::ScaledY(y) => y * self.kappa * self.n_sat().sqrt(),
            Drive::RawAmplitude(e) => e,
        }
    }
}

/// Dimensionless parameter set derived from [`PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    /// Cooperativity C = N g²/(κγ).
    pub c: f64,
    /// Decay ratio ξ = 2κ/γ.
    pub xi: f64,
    /// Saturation photon number n_s = γ²/(8g²).
    pub n_s: f64,
    /// Scaled drive Y.
    pub y: f64,
}

/// Computes (C, ξ, n_s, Y) from the raw rates.
pub fn derive_dimensionless(p: &PhysicalParams) -> Result<DimensionlessParams> {
    p.validate()?;
    Ok(DimensionlessParams {
        c: p.n_atoms as f64 * p.g * p.g / (p.kappa * p.gamma),
        xi: 2.0 * p.kappa / p.gamma,
        n_s: p.n_sat(),
        y: p.drive_y(),
    })
}

/// Branch of the input-output curve a root belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lower,
    Unstable,
    Upper,
    /// C ≤ 4: the state equation is single-valued for every drive.
    Monostable,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Unstable => "unstable",
            Branch::Upper => "upper",
            Branch::Monostable => "monostable",
        }
    }
}

/// A solution X of the state equation with branch metadata and the
/// mean-field atomic averages evaluated at that amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub x: f64,
    pub branch: Branch,
    pub j_minus: f64,
    pub j_plus: f64,
    pub j_z: f64,
    /// X at least a factor 10 below the lower turning point (or below 0.1
    /// in the monostable case), so O(X⁴)-vs-O(X²) drops stay below 1%.
    pub in_weak_excitation: bool,
}

/// State equation: Y = X(1 + 2C/(1+X²)).
pub fn drive_for_amplitude(x: f64, c: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude X must be >= 0, got {x}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("cooperativity C must be > 0, got {c}")));
    }
    Ok(x * (1.0 + 2.0 * c / (1.0 + x * x)))
}

/// Turning points X± = (C−1) ± √(C(C−4)) of the bistable region, when
/// they exist (C ≥ 4). Note these are labels for the *squared* amplitude
/// at the folds: the lower branch is X² < X₋, the upper X² > X₊, and the
/// bistable drive window runs between Y evaluated at √X₊ and at √X₋.
pub fn turning_points(c: f64) -> Option<(f64, f64)> {
    if c < 4.0 {
        return None;
    }
    let s = (c * (c - 4.0)).sqrt();
    Some((c - 1.0 - s, c - 1.0 + s))
}

/// Collective polarization and inversion at amplitude X:
/// j∓ = −X/(1+X²), j_z = −1/(1+X²).
pub fn atomic_means(x: f64) -> (f64, f64, f64) {
    let d = 1.0 + x * x;
    (-x / d, -x / d, -1.0 / d)
}

fn weak_excitation_flag(x: f64, c: f64) -> bool {
    match turning_points(c) {
        Some((x_minus, _)) => x <= 0.1 * x_minus.sqrt(),
        None => x <= 0.1,
    }
}

fn operating_point(x: f64, c: f64) -> OperatingPoint {
    let branch = match turning_points(c) {
        // Attribute the fold amplitudes themselves to the stable branches.
        Some((x_minus, x_plus)) => {
            let x2 = x * x;
            if x2 <= x_minus {
                Branch::Lower
            } else if x2 >= x_plus {
                Branch::Upper
            } else {
                Branch::Unstable
            }
        }
        None => Branch::Monostable,
    };
    let (j_minus, j_plus, j_z) = atomic_means(x);
    OperatingPoint {
        x,
        branch,
        j_minus,
        j_plus,
        j_z,
        in_weak_excitation: weak_excitation_flag(x, c),
    }
}

/// All non-negative real roots of X³ − YX² + (1+2C)X − Y = 0, classified
/// by branch and sorted ascending. Roots come from the eigenvalues of the
/// companion matrix, each polished by Newton iteration — robust against
/// the near-degenerate discriminant at C ≈ 4.
pub fn intracavity_roots(y: f64, c: f64) -> Result<Vec<OperatingPoint>> {
    if !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!("drive Y must be >= 0, got {y}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("cooperativity C must be > 0, got {c}")));
    }
    // x³ + a2 x² + a1 x + a0 with a2 = −Y, a1 = 1+2C, a0 = −Y.
    let (a2, a1, a0) = (-y, 1.0 + 2.0 * c, -y);
    let companion = Matrix3::new(
        0.0, 0.0, -a0, //
        1.0, 0.0, -a1, //
        0.0, 1.0, -a2,
    );
    let eigs = companion.complex_eigenvalues();

    let p = |x: f64| ((x + a2) * x + a1) * x + a0;
    let dp = |x: f64| (3.0 * x + 2.0 * a2) * x + a1;

    let scale = 1.0 + y.abs() + a1;
    let mut roots: Vec<f64> = Vec::new();
    for e in eigs.iter() {
        if e.im.abs() > 1e-8 * (1.0 + e.re.abs()) {
            continue;
        }
        let mut x = e.re;
        for _ in 0..4 {
            let d = dp(x);
            if d.abs() < f64::EPSILON * scale {
                break;
            }
            x -= p(x) / d;
        }
        if x < 0.0 {
            if x > -1e-12 * scale {
                x = 0.0;
            } else {
                continue;
            }
        }
        // Drop duplicates from a polished double root.
        if roots.iter().all(|r| (r - x).abs() > 1e-9 * (1.0 + x)) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots.into_iter().map(|x| operating_point(x, c)).collect())
}

/// Spontaneous- and cavity-emission rates in the weak-excitation limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRates {
    /// R_γ = (γ/2)·N·X².
    pub r_gamma: f64,
    /// R_κ = 2κ·n_s·X².
    pub r_kappa: f64,
    /// R_γ/R_κ = 2C identically.
    pub ratio: f64,
    /// False marks X outside the weak-excitation regime — the ≈ forms
    /// above then carry uncontrolled O(X⁴) corrections.
    pub in_weak_excitation: bool,
}

/// Weak-excitation emission rates at amplitude X.
pub fn emission_rates(x: f64, p: &PhysicalParams) -> Result<EmissionRates> {
    p.validate()?;
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude X must be >= 0, got {x}")));
    }
    let d = derive_dimensionless(p)?;
    let x2 = x * x;
    Ok(EmissionRates {
        r_gamma: 0.5 * p.gamma * p.n_atoms as f64 * x2,
        r_kappa: 2.0 * p.kappa * d.n_s * x2,
        ratio: 2.0 * d.c,
        in_weak_excitation: weak_excitation_flag(x, d.c),
    })
}

/// Steady-state averages carrying the first-order (1/N) fluctuation
/// corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAverages {
    /// ⟨J̄₊ā⟩ ≈ −X²[1 − X²·ξ2C(2+ξ+2C)/(N(1+2C)²(ξ+1)²)].
    pub jp_a: f64,
    /// ⟨J̄₊ā†⟩ ≈ −X²[1 + ξ2C/(N(1+2C)(ξ+1))].
    pub jp_adag: f64,
    /// ⟨ā†ā⟩ = X²[1 + X²·2C·ξ2C(2+ξ+2C)/(N(1+2C)²(ξ+1)²)].
    pub photon_number: f64,
    /// r = |⟨ā†ā⟩/⟨J̄₊ā⟩| ≥ 1, with equality only at X = 0.
    pub ratio_r: f64,
    /// ⟨Δā†Δā⟩/⟨ΔJ̄₊Δā⟩ = 2C exactly.
    pub fluct_ratio_2c: f64,
}

/// Weak-excitation steady-state averages at amplitude X.
pub fn steady_averages(x: f64, xi: f64, c: f64, n_atoms: f64) -> SteadyAverages {
    let x2 = x * x;
    let two_c = 2.0 * c;
    let denom1 = (1.0 + two_c) * (1.0 + two_c) * (xi + 1.0) * (xi + 1.0);
    // Shared kernel ξ2C(2+ξ+2C)/((1+2C)²(ξ+1)²) of the O(X⁴) corrections.
    let k = xi * two_c * (2.0 + xi + two_c) / denom1;
    let jp_a = -x2 * (1.0 - x2 * k / n_atoms);
    let jp_adag = -x2 * (1.0 + xi * two_c / (n_atoms * (1.0 + two_c) * (xi + 1.0)));
    let photon_number = x2 * (1.0 + x2 * two_c * k / n_atoms);
    SteadyAverages {
        jp_a,
        jp_adag,
        photon_number,
        ratio_r: if x == 0.0 { 1.0 } else { (photon_number / jp_a).abs() },
        fluct_ratio_2c: two_c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::TAU;

    fn raizen() -> PhysicalParams {
        PhysicalParams {
            g: TAU * 1.06e6,
            kappa: TAU * 0.88e6,
            gamma: TAU * 10.0e6,
            n_atoms: 310,
            omega0: 0.0,
            drive: Drive::ScaledY(0.0),
            phi0: std::f64::consts::FRAC_PI_2,
        }
    }

    #[test]
    fn dimensionless_pipeline() {
        let d = derive_dimensionless(&raizen()).unwrap();
        // 310·1.06²/(0.88·10) and 2·0.88/10, rates in the same unit.
        assert_relative_eq!(d.c, 39.581363636363636, max_relative = 1e-14);
        assert_relative_eq!(d.xi, 0.176, max_relative = 1e-14);
        assert_relative_eq!(d.n_s, 11.124955500177997, max_relative = 1e-14);

        let mut p = raizen();
        p.kappa = TAU * 0.18e6;
        let d = derive_dimensionless(&p).unwrap();
        assert_relative_eq!(d.c, 193.50888888888892, max_relative = 1e-13);
        assert_relative_eq!(d.xi, 0.036, max_relative = 1e-14);
    }

    #[test]
    fn n_sat_is_one_at_matched_coupling() {
        let mut p = raizen();
        p.g = p.gamma / 8f64.sqrt();
        assert_relative_eq!(derive_dimensionless(&p).unwrap().n_s, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn drive_conversion_round_trips() {
        let mut p = raizen();
        p.drive = Drive::ScaledY(0.81);
        let raw = p.raw_drive();
        p.drive = Drive::RawAmplitude(raw);
        assert_relative_eq!(p.drive_y(), 0.81, max_relative = 1e-15);
    }

    #[test]
    fn state_equation_values() {
        assert_eq!(drive_for_amplitude(0.0, 40.0).unwrap(), 0.0);
        assert_relative_eq!(drive_for_amplitude(1.0, 4.0).unwrap(), 5.0, max_relative = 1e-15);
        assert_relative_eq!(
            drive_for_amplitude(0.01, 40.0).unwrap(),
            0.80992000799920,
            max_relative = 1e-14
        );
        assert!(drive_for_amplitude(-0.1, 40.0).is_err());
    }

    #[test]
    fn turning_points_values() {
        let (lo, hi) = turning_points(4.0).unwrap();
        assert_relative_eq!(lo, 3.0, max_relative = 1e-12);
        assert_relative_eq!(hi, 3.0, max_relative = 1e-12);
        let (lo, hi) = turning_points(40.0).unwrap();
        assert_relative_eq!(lo, 1.0526680779794475, max_relative = 1e-12);
        assert_relative_eq!(hi, 76.94733192202055, max_relative = 1e-13);
        assert!(turning_points(3.99).is_none());
    }

    #[test]
    fn atomic_means_values() {
        assert_eq!(atomic_means(0.0), (0.0, 0.0, -1.0));
        assert_eq!(atomic_means(1.0), (-0.5, -0.5, -0.5));
        let (jm, jp, jz) = atomic_means(0.1);
        assert_relative_eq!(jm, -0.09900990099009901, max_relative = 1e-15);
        assert_eq!(jm, jp);
        assert_relative_eq!(jz, -0.9900990099009901, max_relative = 1e-15);
        // (1 + j_z)(1 + X²) = X² identically.
        for &x in &[0.0, 0.3, 1.7, 42.0] {
            let (_, _, jz) = atomic_means(x);
            assert_abs_diff_eq!((1.0 + jz) * (1.0 + x * x), x * x, epsilon = 1e-12 * (1.0 + x * x));
        }
    }

    #[test]
    fn roots_weak_excitation_line() {
        let roots = intracavity_roots(0.081, 40.0).unwrap();
        assert_eq!(roots.len(), 1);
        let r = &roots[0];
        assert_eq!(r.branch, Branch::Lower);
        assert!(r.in_weak_excitation);
        // Y/(1+2C) with relative correction below 1e−5.
        assert_relative_eq!(r.x, 0.081 / 81.0, max_relative = 1e-5);
        let resid = r.x.powi(3) - 0.081 * r.x * r.x + 81.0 * r.x - 0.081;
        assert!(resid.abs() < 1e-12);
    }

    #[test]
    fn roots_bistable_region() {
        let (x_minus, x_plus) = turning_points(40.0).unwrap();
        // Bistable drive window: Y at the fold amplitudes √X±.
        let y_hi = drive_for_amplitude(x_minus.sqrt(), 40.0).unwrap();
        let y_lo = drive_for_amplitude(x_plus.sqrt(), 40.0).unwrap();
        assert!(y_lo < y_hi);
        let y_mid = 0.5 * (y_lo + y_hi);
        let roots = intracavity_roots(y_mid, 40.0).unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots[0].branch, Branch::Lower);
        assert_eq!(roots[1].branch, Branch::Unstable);
        assert_eq!(roots[2].branch, Branch::Upper);
        for r in &roots {
            assert_relative_eq!(drive_for_amplitude(r.x, 40.0).unwrap(), y_mid, max_relative = 1e-12);
        }
    }

    #[test]
    fn roots_near_degenerate_cooperativity() {
        // C = 4 exactly: turning points coincide at X² = 3, and the cubic
        // at the matching drive Y = 3√3 is (X − √3)³ — a triple root.
        let (lo, hi) = turning_points(4.0).unwrap();
        assert_eq!(lo, 3.0);
        assert_eq!(hi, 3.0);
        let y = 3.0 * 3f64.sqrt();
        let roots = intracavity_roots(y, 4.0).unwrap();
        assert!(roots.iter().any(|r| (r.x - 3f64.sqrt()).abs() < 1e-5));
        for r in &roots {
            assert_relative_eq!(drive_for_amplitude(r.x, 4.0).unwrap(), y, max_relative = 1e-10);
        }
    }

    #[test]
    fn monostable_below_threshold() {
        for &y in &[0.0, 0.5, 3.0, 10.0, 50.0] {
            let roots = intracavity_roots(y, 3.5).unwrap();
            assert_eq!(roots.len(), 1, "C <= 4 must be single-valued at Y = {y}");
            assert_eq!(roots[0].branch, Branch::Monostable);
        }
    }

    #[test]
    fn lower_branch_monotone_in_drive() {
        let mut prev = -1.0;
        for i in 0..200 {
            let y = 1.06 * i as f64 / 199.0; // up to the lower turning point's drive
            let r = &intracavity_roots(y, 40.0).unwrap()[0];
            assert!(r.x > prev);
            prev = r.x;
        }
    }

    #[test]
    fn emission_rate_ratio_is_cooperativity() {
        let p = raizen();
        let d = derive_dimensionless(&p).unwrap();
        let rates = emission_rates(0.01, &p).unwrap();
        assert_relative_eq!(rates.ratio, 2.0 * d.c, max_relative = 1e-15);
        assert_relative_eq!(rates.r_gamma / rates.r_kappa, 2.0 * d.c, max_relative = 1e-12);
        assert_relative_eq!(rates.r_gamma, 0.5 * p.gamma * 310.0 * 1e-4, max_relative = 1e-15);
        assert!(rates.in_weak_excitation);
        let zero = emission_rates(0.0, &p).unwrap();
        assert_eq!((zero.r_gamma, zero.r_kappa), (0.0, 0.0));
    }

    #[test]
    fn steady_average_leading_order() {
        let (x, xi, c, n) = (1e-3, 0.3, 50.0, 1e4);
        let avg = steady_averages(x, xi, c, n);
        assert_relative_eq!(avg.jp_a, -x * x, max_relative = 1e-9);
        let corr = xi * 2.0 * c / (n * (1.0 + 2.0 * c) * (xi + 1.0));
        assert_relative_eq!(avg.jp_adag, -x * x * (1.0 + corr), max_relative = 1e-12);
        assert_relative_eq!(avg.fluct_ratio_2c, 100.0, max_relative = 1e-15);
        assert!(avg.ratio_r >= 1.0);
        assert_eq!(steady_averages(0.0, xi, c, n).ratio_r, 1.0);
    }

    #[test]
    fn ratio_maximizer_near_impedance_matching() {
        // At fixed X with C = N = 100 the deviation r − 1 peaks at
        // ξ = (C+1)/C, a hair above impedance matching.
        let (x, c, n) = (0.1, 100.0, 100.0);
        let mut best = (0.0, f64::MIN);
        let mut xi = 0.005;
        while xi <= 3.0 + 1e-12 {
            let r = steady_averages(x, xi, c, n).ratio_r;
            if r - 1.0 > best.1 {
                best = (xi, r - 1.0);
            }
            xi += 0.005;
        }
        assert_abs_diff_eq!(best.0, (c + 1.0) / c, epsilon = 0.005 + 1e-12);
    }
}
