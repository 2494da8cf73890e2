//! Jacobian/diffusion construction, the steady-state covariance (Lyapunov
//! solve), two-time covariance propagation and Laplace-domain spectra.
//!
//! All dynamics run in the dimensionless time τ̄ = γτ/2; the matrices here
//! are J̄′ = (2/γ)J̄_ss and D̄′ = (2/γ)D̄_ss so that γ drops out entirely.

use crate::basis::VarPair;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix5, Vector5};
use num_complex::Complex64;

/// Approximation level of the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// The exact linearization about the operating point.
    Full,
    /// Weak-excitation substitution 1/(1+X²) → 1, X/(1+X²) → X. This is
    /// the system whose Lyapunov solution reproduces the analytic initial
    /// conditions to O(X²).
    Reduced,
    /// The reduced system with, additionally, the couplings that are
    /// higher order than each row's leading order removed: the X·μ term
    /// of the ν̃* row and the z̃, ν̃ terms of the μ row. This is exactly
    /// the linear system the analytic time-domain forms solve, so traces
    /// agree with them to solver precision rather than to O(X²).
    OrderMatched,
}

impl JacobianMode {
    pub fn label(self) -> &'static str {
        match self {
            JacobianMode::Full => "full",
            JacobianMode::Reduced => "reduced",
            JacobianMode::OrderMatched => "order-matched",
        }
    }
}

/// Dimensionless Jacobian and diffusion for one operating point, plus the
/// derived spectral quantities of the oscillatory regime.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSystem {
    /// J̄′, basis (z, z*, ν, ν*, μ).
    pub jac: Matrix5<f64>,
    /// D̄′ = [2X²/(1+X²)]·diag(0, 0, −1, −1, 4).
    pub diff: Matrix5<f64>,
    pub x: f64,
    pub xi: f64,
    pub c: f64,
    pub mode: JacobianMode,
    /// Ḡ = √(ξ2C − (ξ−1)²/4) when the regime is oscillatory.
    pub gbar: Option<f64>,
    /// ρ̄₊ = −(ξ+1)/2 + iḠ (real pair if overdamped).
    pub rho_plus: Complex64,
    /// ρ̄₋ = −(ξ+1)/2 − iḠ.
    pub rho_minus: Complex64,
}

impl FluctuationSystem {
    /// Eigenvalues of the Jacobian.
    pub fn eigenvalues(&self) -> [Complex64; 5] {
        let e = self.jac.complex_eigenvalues();
        [e[0], e[1], e[2], e[3], e[4]]
    }

    /// True iff every eigenvalue has strictly negative real part.
    pub fn is_stable(&self) -> bool {
        self.eigenvalues().iter().all(|e| e.re < 0.0)
    }
}

/// Vacuum Rabi oscillation frequency squared, Ḡ² = ξ2C − (ξ−1)²/4.
pub fn gbar_squared(xi: f64, c: f64) -> f64 {
    xi * 2.0 * c - 0.25 * (xi - 1.0) * (xi - 1.0)
}

/// D̄′ = [2X²/(1+X²)]·diag(0, 0, −1, −1, 4). Both polarization entries are
/// negative — the sometimes-quoted +1 in the (ν*, ν*) slot breaks the
/// ν ↔ ν* exchange symmetry and cannot reproduce the steady covariance of
/// the weak-excitation limit (see the Lyapunov equivalence tests). The
/// matrix is manifestly nonpositive-definite; it is never altered to force
/// positivity — the linearized moment calculations proceed with it as is.
pub fn build_diffusion(x: f64) -> Matrix5<f64> {
    let s = 2.0 * x * x / (1.0 + x * x);
    Matrix5::from_diagonal(&Vector5::new(0.0, 0.0, -s, -s, 4.0 * s))
}

/// Builds the dimensionless system at amplitude X for the given mode.
pub fn build_jacobian(x: f64, xi: f64, c: f64, mode: JacobianMode) -> Result<FluctuationSystem> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude X must be >= 0, got {x}")));
    }
    if !(xi > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "xi and C must be > 0, got xi = {xi}, C = {c}"
        )));
    }
    let x2c = xi * 2.0 * c;
    // Atom-field coupling entries; the weak-excitation modes replace the
    // saturation factor 1/(1+X²) by 1.
    let (inv_sat, x_sat) = match mode {
        JacobianMode::Full => (1.0 / (1.0 + x * x), x / (1.0 + x * x)),
        _ => (1.0, x),
    };
    #[rustfmt::skip]
    let mut jac = Matrix5::new(
        -xi,      0.0,      x2c,  0.0,  0.0,
         0.0,    -xi,       0.0,  x2c,  0.0,
        -inv_sat, 0.0,     -1.0,  0.0,  x,
         0.0,    -inv_sat,  0.0, -1.0,  x,
         x_sat,   x_sat,   -x,   -x,   -2.0,
    );
    if mode == JacobianMode::OrderMatched {
        jac[(3, 4)] = 0.0; // X·μ in the ν̃* row is O(X³) against O(X²) terms
        jac[(4, 0)] = 0.0; // z̃ and ν̃ in the μ row are O(X⁴) pair partners
        jac[(4, 2)] = 0.0;
    }
    let g2 = gbar_squared(xi, c);
    let half = -0.5 * (xi + 1.0);
    let (gbar, rho_plus, rho_minus) = if g2 > 0.0 {
        let g = g2.sqrt();
        (Some(g), Complex64::new(half, g), Complex64::new(half, -g))
    } else {
        let r = (-g2).sqrt();
        (None, Complex64::new(half + r, 0.0), Complex64::new(half - r, 0.0))
    };
    Ok(FluctuationSystem {
        jac,
        diff: build_diffusion(x),
        x,
        xi,
        c,
        mode,
        gbar,
        rho_plus,
        rho_minus,
    })
}

/// 5×5 real covariance, either C∞ (τ̄ = 0) or one slice of C(τ̄).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub entries: Matrix5<f64>,
    pub tau: f64,
}

/// Solves J̄′C∞ + C∞J̄′ᵀ = −D̄′ through the vectorized 25×25 Kronecker-sum
/// system. The solution is checked for symmetry (defect above 1e−10 is an
/// error) and then symmetrized to scrub solver round-off.
pub fn steady_covariance(sys: &FluctuationSystem) -> Result<CovarianceMatrix> {
    if !sys.is_stable() {
        return Err(Error::DegenerateSystem(
            "Jacobian spectrum is not strictly in the left half-plane".into(),
        ));
    }
    let j = DMatrix::from_iterator(5, 5, sys.jac.iter().copied());
    let eye = DMatrix::<f64>::identity(5, 5);
    // Column-major vec: vec(JC) = (I ⊗ J)vec C, vec(CJᵀ) = (J ⊗ I)vec C.
    let kron = eye.kronecker(&j) + j.kronecker(&eye);
    let rhs = DVector::from_iterator(25, sys.diff.iter().map(|d| -d));
    let lu = kron.lu();
    let v = lu
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateSystem("singular Kronecker sum (eigenvalue pair sums to zero)".into()))?;
    let c = Matrix5::from_iterator(v.iter().copied());

    let residual = (sys.jac * c + c * sys.jac.transpose() + sys.diff).amax();
    if residual > 1e-10 {
        return Err(Error::Diagnostics(format!(
            "Lyapunov residual {residual:.3e} exceeds 1e-10"
        )));
    }
    let asym = (c - c.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::Diagnostics(format!(
            "steady covariance asymmetry {asym:.3e} exceeds 1e-10"
        )));
    }
    Ok(CovarianceMatrix {
        entries: 0.5 * (c + c.transpose()),
        tau: 0.0,
    })
}

/// C(τ̄) = C∞·exp(J̄′ᵀτ̄) on an ascending grid starting at τ̄ = 0. The
/// τ̄ < 0 branch is C(−τ̄)ᵀ and is not integrated separately.
pub fn evolve_covariance(
    c0: &CovarianceMatrix,
    sys: &FluctuationSystem,
    taus: &[f64],
) -> Result<Vec<CovarianceMatrix>> {
    check_grid(taus)?;
    let jt = sys.jac.transpose();
    Ok(taus
        .iter()
        .map(|&tau| CovarianceMatrix {
            entries: if tau == 0.0 { c0.entries } else { c0.entries * (jt * tau).exp() },
            tau,
        })
        .collect())
}

/// Same evolution through an adaptive embedded Runge-Kutta integrator —
/// an independent cross-check on the matrix exponential (the two must
/// agree to 1e−10).
pub fn evolve_covariance_rk(
    c0: &CovarianceMatrix,
    sys: &FluctuationSystem,
    taus: &[f64],
) -> Result<Vec<CovarianceMatrix>> {
    check_grid(taus)?;
    let jt = sys.jac.transpose();
    let f = |c: &Matrix5<f64>| c * jt;
    let scale = sys.jac.amax().max(1.0);
    let mut out = Vec::with_capacity(taus.len());
    let mut state = c0.entries;
    let mut t = 0.0;
    let mut h = (0.1 / scale).min(1e-2);
    for &tau in taus {
        while t < tau {
            h = h.min(tau - t);
            let (next, err) = rk45_step(&f, &state, h);
            let tol = 1e-13 * state.amax().max(1e-300);
            if err <= tol || h <= 1e-12 {
                state = next;
                t += h;
                // Standard 4th-order step-size update with safety factor.
                h *= 0.9 * (tol / err.max(1e-300)).powf(0.2).clamp(0.2, 5.0);
            } else {
                h *= 0.9 * (tol / err).powf(0.25).max(0.1);
            }
            if h < 1e-15 {
                return Err(Error::Integration("step size underflow in covariance propagation".into()));
            }
        }
        out.push(CovarianceMatrix { entries: state, tau });
    }
    Ok(out)
}

/// One Dormand-Prince 5(4) step; returns the 5th-order state and the
/// max-abs embedded error estimate.
fn rk45_step<F>(f: &F, y: &Matrix5<f64>, h: f64) -> (Matrix5<f64>, f64)
where
    F: Fn(&Matrix5<f64>) -> Matrix5<f64>,
{
    let k1 = f(y);
    let k2 = f(&(y + h * (0.2 * k1)));
    let k3 = f(&(y + h * (0.075 * k1 + 0.225 * k2)));
    let k4 = f(&(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3)));
    let k5 = f(&(y
        + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
            - 212.0 / 729.0 * k4)));
    let k6 = f(&(y
        + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
            + 49.0 / 176.0 * k4
            - 5103.0 / 18656.0 * k5)));
    let y5 = y
        + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6);
    let k7 = f(&y5);
    let y4 = y
        + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
            - 92097.0 / 339200.0 * k5
            + 187.0 / 2100.0 * k6
            + 0.025 * k7);
    ((y5), (y5 - y4).amax())
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.is_empty() || taus[0] != 0.0 {
        return Err(Error::InvalidParameter("tau grid must start at 0".into()));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("tau grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Sampled two-time correlation C_ss^{ij}(τ̄) for one ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub pair: VarPair,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    /// Natural leading power of X of this entry (display normalization).
    pub normalization: u8,
}

/// Extracts the (i, j) entry across the evolved covariance: row i of C∞
/// propagated under exp(J̄′τ̄), read at component j. For the ν̃* row this
/// is exactly the correlation-vector equation of motion.
pub fn correlation_trace(
    sys: &FluctuationSystem,
    c_inf: &CovarianceMatrix,
    pair: VarPair,
    taus: &[f64],
) -> Result<CorrelationTrace> {
    check_grid(taus)?;
    let (i, j) = pair.indices();
    let row: Vector5<f64> = c_inf.entries.row(i).transpose();
    let values = taus
        .iter()
        .map(|&tau| ((sys.jac * tau).exp() * row)[j])
        .collect();
    Ok(CorrelationTrace {
        pair,
        taus: taus.to_vec(),
        values,
        normalization: pair.normalization(),
    })
}

/// One-sided Laplace transform of the (i, j) correlation at s̄: entry
/// (i, j) of C∞(s̄I − J̄′ᵀ)⁻¹ through a direct resolvent solve.
pub fn laplace_correlation(
    sys: &FluctuationSystem,
    c_inf: &CovarianceMatrix,
    pair: VarPair,
    sbar: Complex64,
) -> Result<Complex64> {
    let (i, j) = pair.indices();
    let mut m = Matrix5::<Complex64>::zeros();
    for r in 0..5 {
        for c in 0..5 {
            m[(r, c)] = Complex64::new(-sys.jac[(c, r)], 0.0);
        }
        m[(r, r)] += sbar;
    }
    let mut e_j = Vector5::<Complex64>::zeros();
    e_j[j] = Complex64::new(1.0, 0.0);
    let col = m
        .clone()
        .lu()
        .solve(&e_j)
        .ok_or(Error::SingularResolvent(sbar))?;
    let resid = (&m * &col - e_j).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if resid > 1e-12 {
        return Err(Error::SingularResolvent(sbar));
    }
    let mut val = Complex64::new(0.0, 0.0);
    for k in 0..5 {
        val += c_inf.entries[(i, k)] * col[k];
    }
    Ok(val)
}

/// Real part of the Laplace transform along the imaginary axis,
/// s̄ = −i·2(ω−ω₀)/γ, sampled over a detuning grid. Reported
/// unnormalized (the physical spectrum fixes only the proportionality).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub pair: VarPair,
    /// 2(ω−ω₀)/γ grid.
    pub detunings: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn spectrum_trace(
    sys: &FluctuationSystem,
    c_inf: &CovarianceMatrix,
    pair: VarPair,
    detunings: &[f64],
) -> Result<SpectrumTrace> {
    let mut values = Vec::with_capacity(detunings.len());
    for &d in detunings {
        values.push(laplace_correlation(sys, c_inf, pair, Complex64::new(0.0, -d))?.re);
    }
    Ok(SpectrumTrace {
        pair,
        detunings: detunings.to_vec(),
        values,
    })
}
