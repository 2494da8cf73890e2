//! Exact Lindblad master-equation simulator for a handful of atoms and a
//! truncated photon space.
//!
//! The composite basis is |atom bits⟩ ⊗ |Fock n⟩ with index
//! `b·(n_c+1) + n`; bit j set means atom j excited. Atoms carry
//! individual spontaneous-emission channels (they are distinguishable),
//! the cavity a single photon-loss channel at rate 2κ. The frame rotates
//! at the resonance frequency, so no free-evolution terms appear.
//!
//! The drive enters as Ē₀ = i|Ē₀|, which makes the mean field ⟨a⟩ real
//! and positive — the counterpart of the real positive scaled amplitude X.
//! Magnitude-level comparisons are used wherever the phase bookkeeping
//! would otherwise matter.

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

const DIM_GUARD: usize = 2048;
/// Dense vectorized generators square the dimension twice; past this the
/// direct solve stops being a desk-scale operation.
const DENSE_GUARD: usize = 64;

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hilbert-space layout: 1–4 atoms and photon states 0..=n_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    pub n_atoms: usize,
    pub fock_cutoff: usize,
}

impl HilbertConfig {
    pub fn new(n_atoms: usize, fock_cutoff: usize) -> Result<Self> {
        if !(1..=4).contains(&n_atoms) {
            return Err(Error::InvalidParameter(format!(
                "oracle supports 1 to 4 atoms, got {n_atoms}"
            )));
        }
        if fock_cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "fock_cutoff must be >= 2, got {fock_cutoff}"
            )));
        }
        let cfg = Self { n_atoms, fock_cutoff };
        if cfg.dim() > DIM_GUARD {
            return Err(Error::DimensionGuard { dim: cfg.dim(), max: DIM_GUARD });
        }
        Ok(cfg)
    }

    /// Composite dimension 2^N·(n_c+1).
    pub fn dim(&self) -> usize {
        (1 << self.n_atoms) * (self.fock_cutoff + 1)
    }
}

/// Dense operator table over the composite basis.
#[derive(Debug, Clone)]
pub struct Operators {
    pub cfg: HilbertConfig,
    pub a: CMat,
    pub a_dag: CMat,
    pub photon_number: CMat,
    pub j_minus: CMat,
    pub j_plus: CMat,
    pub j_z: CMat,
    pub sigma_minus: Vec<CMat>,
}

pub fn build_operators(cfg: &HilbertConfig) -> Operators {
    let dim = cfg.dim();
    let nc = cfg.fock_cutoff;
    let nb = 1 << cfg.n_atoms;
    let idx = |b: usize, n: usize| b * (nc + 1) + n;
    let one = Complex64::new(1.0, 0.0);

    let mut a = CMat::zeros(dim, dim);
    for b in 0..nb {
        for n in 1..=nc {
            a[(idx(b, n - 1), idx(b, n))] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    let a_dag = a.adjoint();
    let photon_number = &a_dag * &a;

    let mut sigma_minus = Vec::with_capacity(cfg.n_atoms);
    for j in 0..cfg.n_atoms {
        let bit = 1 << j;
        let mut s = CMat::zeros(dim, dim);
        for b in 0..nb {
            if b & bit != 0 {
                for n in 0..=nc {
                    s[(idx(b & !bit, n), idx(b, n))] = one;
                }
            }
        }
        sigma_minus.push(s);
    }
    let j_minus = sigma_minus.iter().fold(CMat::zeros(dim, dim), |acc, s| acc + s);
    let j_plus = j_minus.adjoint();
    let mut j_z = CMat::zeros(dim, dim);
    for b in 0..nb {
        let z = 2.0 * (b.count_ones() as f64) - cfg.n_atoms as f64;
        for n in 0..=nc {
            j_z[(idx(b, n), idx(b, n))] = Complex64::new(z, 0.0);
        }
    }

    Operators {
        cfg: *cfg,
        a,
        a_dag,
        photon_number,
        j_minus,
        j_plus,
        j_z,
        sigma_minus,
    }
}

/// Lindblad generator, kept both as Hamiltonian + collapse operators (for
/// matrix-form propagation) and as the dense vectorized superoperator
/// (for the direct steady-state solve).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub cfg: HilbertConfig,
    pub ops: Operators,
    pub hamiltonian: CMat,
    /// Rate-scaled collapse operators √(2κ)·a and √γ·σ_j−.
    pub collapse: Vec<CMat>,
    /// Vectorized generator over vec(ρ), column-major.
    pub matrix: CMat,
}

pub fn build_liouvillian(cfg: &HilbertConfig, p: &PhysicalParams) -> Result<Liouvillian> {
    p.validate()?;
    if p.n_atoms as usize != cfg.n_atoms {
        return Err(Error::InvalidParameter(format!(
            "params carry N = {} but the Hilbert space holds {} atoms",
            p.n_atoms, cfg.n_atoms
        )));
    }
    let dim = cfg.dim();
    if dim > DENSE_GUARD {
        return Err(Error::DimensionGuard { dim, max: DENSE_GUARD });
    }
    let ops = build_operators(cfg);
    let i = Complex64::new(0.0, 1.0);
    let e0 = i * p.raw_drive();
    // dρ/dt = −i[H, ρ] + dissipators, with the coupling written as the
    // Hermitian generator H = ig(a†J₋ − aJ₊) + Ē₀a† + Ē₀*a.
    let hamiltonian = (&ops.a_dag * &ops.j_minus - &ops.a * &ops.j_plus) * (i * p.g)
        + &ops.a_dag * e0
        + &ops.a * e0.conj();
    let mut collapse = vec![&ops.a * Complex64::new((2.0 * p.kappa).sqrt(), 0.0)];
    for s in &ops.sigma_minus {
        collapse.push(s * Complex64::new(p.gamma.sqrt(), 0.0));
    }

    let eye = CMat::identity(dim, dim);
    // vec(AρB) = (Bᵀ ⊗ A)vec(ρ), column-major.
    let half = Complex64::new(0.5, 0.0);
    let mut matrix =
        (eye.kronecker(&hamiltonian) - hamiltonian.transpose().kronecker(&eye)) * (-i);
    for c in &collapse {
        let cdc = c.adjoint() * c;
        matrix += c.conjugate().kronecker(c)
            - (eye.kronecker(&cdc) + cdc.transpose().kronecker(&eye)) * half;
    }
    Ok(Liouvillian { cfg: *cfg, ops, hamiltonian, collapse, matrix })
}

impl Liouvillian {
    /// Right-hand side in matrix form: −i[H,ρ] + Σ (cρc† − ½{c†c, ρ}).
    pub fn apply(&self, rho: &CMat) -> CMat {
        let i = Complex64::new(0.0, 1.0);
        let half = Complex64::new(0.5, 0.0);
        let mut out = (&self.hamiltonian * rho - rho * &self.hamiltonian) * (-i);
        for c in &self.collapse {
            let cr = c * rho;
            let cdc = c.adjoint() * c;
            out += &cr * c.adjoint() - (&cdc * rho + rho * &cdc) * half;
        }
        out
    }

    /// Coarse spectral scale used to pick propagation steps.
    fn rate_scale(&self) -> f64 {
        let mut s = max_abs(&self.hamiltonian);
        for c in &self.collapse {
            s += max_abs(&(c.adjoint() * c));
        }
        s.max(1e-300)
    }
}

/// Trace-one, Hermitian, positive state over the composite basis.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub matrix: CMat,
}

impl DensityOperator {
    /// Validates trace, Hermiticity and positivity, then stores the
    /// hermitized, exactly normalized matrix.
    pub fn new(matrix: CMat) -> Result<Self> {
        let tr: Complex64 = matrix.diagonal().iter().sum();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Diagnostics(format!("density-operator trace is {tr}")));
        }
        let defect = max_abs(&(&matrix - matrix.adjoint()));
        if defect > 1e-10 {
            return Err(Error::Diagnostics(format!("Hermiticity defect {defect:.3e}")));
        }
        let herm = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = herm
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e));
        if min_eig < -1e-8 {
            return Err(Error::Diagnostics(format!("negative population {min_eig:.3e}")));
        }
        let tr_h: Complex64 = herm.diagonal().iter().sum();
        Ok(Self { matrix: herm / tr_h })
    }

    pub fn expect(&self, op: &CMat) -> Complex64 {
        (op * &self.matrix).diagonal().iter().sum()
    }
}

/// Total population in the highest Fock level — must stay below 1e−8 for
/// the cutoff to count as converged.
pub fn cutoff_population(rho: &DensityOperator, cfg: &HilbertConfig) -> f64 {
    let nc = cfg.fock_cutoff;
    (0..(1 << cfg.n_atoms))
        .map(|b| rho.matrix[(b * (nc + 1) + nc, b * (nc + 1) + nc)].re)
        .sum()
}

/// Steady state through a direct null-space solve: one redundant row of
/// the vectorized generator is replaced by the trace functional and the
/// system solved for trace one.
pub fn steady_state(l: &Liouvillian) -> Result<DensityOperator> {
    let dim = l.cfg.dim();
    let n2 = dim * dim;
    let mut m = l.matrix.clone();
    let mut rhs = DVector::<Complex64>::zeros(n2);
    rhs[0] = Complex64::new(1.0, 0.0);
    for k in 0..n2 {
        m[(0, k)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..dim {
        m[(0, i + dim * i)] = Complex64::new(1.0, 0.0);
    }
    let v = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Diagnostics("ill-conditioned null space for the generator".into()))?;

    let resid = max_abs(&CMat::from_iterator(1, n2, (&l.matrix * &v).iter().copied()));
    let scale = max_abs(&l.matrix).max(1.0);
    if resid > 1e-10 * scale {
        return Err(Error::Diagnostics(format!(
            "steady-state residual {resid:.3e} exceeds tolerance (near-degenerate zero eigenvalue?)"
        )));
    }
    let rho = DensityOperator::new(CMat::from_iterator(dim, dim, v.iter().copied()))?;
    let tail = cutoff_population(&rho, &l.cfg);
    if tail > 1e-8 {
        return Err(Error::Diagnostics(format!(
            "population {tail:.3e} at the Fock cutoff; raise fock_cutoff"
        )));
    }
    Ok(rho)
}

fn rk4_step(l: &Liouvillian, rho: &CMat, h: f64) -> CMat {
    let hc = Complex64::new(h, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let k1 = l.apply(rho);
    let k2 = l.apply(&(rho + &k1 * (hc * 0.5)));
    let k3 = l.apply(&(rho + &k2 * (hc * 0.5)));
    let k4 = l.apply(&(rho + &k3 * hc));
    rho + (k1 + k2 * two + k3 * two + k4) * (hc / 6.0)
}

/// Long-time propagation from the ground state — the independent
/// cross-check on [`steady_state`].
pub fn steady_state_by_propagation(l: &Liouvillian, t_final: f64) -> Result<DensityOperator> {
    let dim = l.cfg.dim();
    let mut rho = CMat::zeros(dim, dim);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    let h = 0.05 / l.rate_scale();
    let steps = (t_final / h).ceil() as usize;
    let h = t_final / steps as f64;
    for _ in 0..steps {
        rho = rk4_step(l, &rho, h);
        if !rho[(0, 0)].re.is_finite() {
            return Err(Error::Integration("steady-state propagation diverged".into()));
        }
    }
    DensityOperator::new(rho)
}

/// Two-time fluctuation correlation ⟨A(0)B(τ)⟩ − ⟨A⟩⟨B⟩ at the steady
/// state, by quantum regression: the deformed state ρ_ss·A is propagated
/// under the generator and traced against B at each requested delay.
/// Delays are in the same physical time unit as the rates are inverse.
pub fn two_time_correlation(
    l: &Liouvillian,
    rho_ss: &DensityOperator,
    op_a: &CMat,
    op_b: &CMat,
    taus: &[f64],
) -> Result<Vec<Complex64>> {
    if taus.is_empty() || taus[0] < 0.0 || taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("tau grid must be ascending and non-negative".into()));
    }
    let mean_a = rho_ss.expect(op_a);
    let mean_b = rho_ss.expect(op_b);
    let mut state = &rho_ss.matrix * op_a;
    let guard = 1e6 * max_abs(&state).max(1e-300);
    let h_target = 0.02 / l.rate_scale();

    let mut out = Vec::with_capacity(taus.len());
    let mut t = 0.0;
    for &tau in taus {
        let span = tau - t;
        if span > 0.0 {
            let steps = (span / h_target).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                state = rk4_step(l, &state, h);
            }
            t = tau;
            if max_abs(&state) > guard || !state[(0, 0)].re.is_finite() {
                return Err(Error::Integration("regression propagation diverged".into()));
            }
        }
        let val: Complex64 = (op_b * &state).diagonal().iter().sum();
        out.push(val - mean_a * mean_b);
    }
    Ok(out)
}

/// Scaled moments matching the phase-space conventions: amplitude
/// |⟨a⟩|/√n_s, polarization √2|⟨J₋⟩|/N, inversion ⟨J_z⟩/N and photon
/// number ⟨a†a⟩/n_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMoments {
    pub amp: f64,
    pub pol: f64,
    pub inv: f64,
    pub photon: f64,
}

pub fn map_to_scaled(rho: &DensityOperator, ops: &Operators, p: &PhysicalParams) -> ScaledMoments {
    let n = p.n_atoms as f64;
    let sqrt_ns = p.n_sat().sqrt();
    ScaledMoments {
        amp: rho.expect(&ops.a).norm() / sqrt_ns,
        pol: 2f64.sqrt() * rho.expect(&ops.j_minus).norm() / n,
        inv: rho.expect(&ops.j_z).re / n,
        photon: rho.expect(&ops.photon_number).re / p.n_sat(),
    }
}

/// N-scaled atom-field correlation, N·⟨ΔJ̄ΔĀ⟩ = (√2/√n_s)·⟨ΔJΔa⟩ up to
/// the phase convention — magnitudes and signs of real parts are what
/// the trend checks compare.
pub fn scale_atom_field_correlation(raw: Complex64, p: &PhysicalParams) -> Complex64 {
    raw * 2f64.sqrt() / p.n_sat().sqrt()
}

/// Dominant oscillation frequency of a correlation trace from the zero
/// crossings of its real part (linear interpolation between samples).
/// Needs at least two crossings.
pub fn dominant_frequency(taus: &[f64], values: &[Complex64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for k in 1..values.len() {
        let (a, b) = (values[k - 1].re, values[k].re);
        if a == 0.0 || a.signum() == b.signum() {
            continue;
        }
        let frac = a / (a - b);
        crossings.push(taus[k - 1] + frac * (taus[k] - taus[k - 1]));
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    Some(std::f64::consts::PI * (crossings.len() - 1) as f64 / span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Drive;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(g: f64, kappa: f64, gamma: f64, n: u32, e0: f64) -> PhysicalParams {
        PhysicalParams {
            g,
            kappa,
            gamma,
            n_atoms: n,
            omega0: 0.0,
            drive: Drive::RawAmplitude(e0),
            phi0: std::f64::consts::FRAC_PI_2,
        }
    }

    #[test]
    fn config_guards() {
        assert!(HilbertConfig::new(0, 4).is_err());
        assert!(HilbertConfig::new(5, 4).is_err());
        assert!(HilbertConfig::new(2, 1).is_err());
        assert!(matches!(
            HilbertConfig::new(4, 200),
            Err(Error::DimensionGuard { .. })
        ));
        assert_eq!(HilbertConfig::new(2, 12).unwrap().dim(), 52);
    }

    #[test]
    fn operator_algebra() {
        let cfg = HilbertConfig::new(2, 4).unwrap();
        let ops = build_operators(&cfg);
        // [a, a†] = 1 away from the cutoff sector.
        let comm = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
        for b in 0..4usize {
            for n in 0..cfg.fock_cutoff {
                let k = b * (cfg.fock_cutoff + 1) + n;
                assert_relative_eq!(comm[(k, k)].re, 1.0, max_relative = 1e-14);
            }
        }
        // [J₊, J₋] = J_z with the ±1 single-atom convention.
        let jj = &ops.j_plus * &ops.j_minus - &ops.j_minus * &ops.j_plus;
        assert!(max_abs(&(jj - &ops.j_z)) < 1e-13);
    }

    #[test]
    fn undriven_uncoupled_steady_state_is_ground_vacuum() {
        let cfg = HilbertConfig::new(1, 2).unwrap();
        let p = params(1e-300, 0.5, 1.0, 1, 0.0);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let rho = steady_state(&l).unwrap();
        assert_relative_eq!(rho.matrix[(0, 0)].re, 1.0, max_relative = 1e-12);
        assert!(max_abs(&(&rho.matrix - {
            let mut m = CMat::zeros(6, 6);
            m[(0, 0)] = Complex64::new(1.0, 0.0);
            m
        })) < 1e-10);
    }

    #[test]
    fn decoupled_driven_cavity_is_coherent() {
        // g → 0: the cavity decouples and settles into a coherent state
        // with |⟨a⟩| = |Ē₀|/κ.
        let (kappa, e0) = (0.7, 0.35);
        let cfg = HilbertConfig::new(1, 8).unwrap();
        let p = params(1e-300, kappa, 1.0, 1, e0);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let rho = steady_state(&l).unwrap();
        let amp = rho.expect(&l.ops.a);
        assert_relative_eq!(amp.norm(), e0 / kappa, max_relative = 1e-8);
        // Our phase convention puts the mean field on the positive real axis.
        assert!(amp.re > 0.0 && amp.im.abs() < 1e-8);
        let n_mean = rho.expect(&l.ops.photon_number).re;
        assert_relative_eq!(n_mean, (e0 / kappa).powi(2), max_relative = 1e-7);
    }

    #[test]
    fn trace_functional_annihilates_generator() {
        let cfg = HilbertConfig::new(2, 3).unwrap();
        let p = params(2.0, 0.5, 1.0, 2, 0.1);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let dim = cfg.dim();
        let mut tr_row = CMat::zeros(1, dim * dim);
        for i in 0..dim {
            tr_row[(0, i + dim * i)] = Complex64::new(1.0, 0.0);
        }
        let scale = max_abs(&l.matrix);
        assert!(max_abs(&(&tr_row * &l.matrix)) < 1e-12 * scale);
    }

    #[test]
    fn jaynes_cummings_coherence_spectrum() {
        // N = 1, no drive: the coherences between the ground state and the
        // one-excitation pair {|g,1⟩, |e,0⟩} evolve under the effective
        // non-Hermitian pair Hamiltonian, giving generator eigenvalues
        // −(κ+γ/2)/2 ± i√(g² − ((κ−γ/2)/2)²).
        let (g, kappa, gamma) = (3.0f64, 0.4, 1.0);
        let cfg = HilbertConfig::new(1, 2).unwrap();
        let l = build_liouvillian(&cfg, &params(g, kappa, gamma, 1, 0.0)).unwrap();
        let (_, t) = l.matrix.clone().schur().unpack();
        let eigs: Vec<Complex64> = t.diagonal().iter().copied().collect();
        let decay = 0.5 * (kappa + 0.5 * gamma);
        let freq = (g * g - (0.5 * (kappa - 0.5 * gamma)).powi(2)).sqrt();
        for sign in [1.0f64, -1.0] {
            let want = Complex64::new(-decay, sign * freq);
            let best = eigs.iter().map(|e| (e - want).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "missing eigenvalue {want}, best distance {best:e}");
        }
        // Exactly one stationary eigenvalue; everything else decays.
        let zero_count = eigs.iter().filter(|e| e.norm() < 1e-10).count();
        assert_eq!(zero_count, 1);
        assert!(eigs.iter().all(|e| e.re < 1e-10));
    }

    #[test]
    fn propagation_agrees_with_direct_solve() {
        let cfg = HilbertConfig::new(1, 4).unwrap();
        let p = params(2.0, 0.6, 1.0, 1, 0.05);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let direct = steady_state(&l).unwrap();
        let propagated = steady_state_by_propagation(&l, 60.0).unwrap();
        assert!(max_abs(&(&direct.matrix - &propagated.matrix)) < 1e-8);
    }

    #[test]
    fn variance_positivity_at_zero_delay() {
        let cfg = HilbertConfig::new(2, 6).unwrap();
        let p = params(2.0, 1.0, 2.0, 2, 0.08);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let rho = steady_state(&l).unwrap();
        let v = two_time_correlation(&l, &rho, &l.ops.a_dag, &l.ops.a, &[0.0]).unwrap()[0];
        assert!(v.re >= -1e-10, "photon-number variance {v}");
        let v2 = two_time_correlation(&l, &rho, &l.ops.j_plus, &l.ops.j_minus, &[0.0]).unwrap()[0];
        assert!(v2.re >= -1e-10);
    }

    #[test]
    fn regression_preserves_steady_state() {
        // Propagating ρ_ss itself (A = 1) keeps every expectation static.
        let cfg = HilbertConfig::new(1, 4).unwrap();
        let p = params(2.0, 0.6, 1.0, 1, 0.05);
        let l = build_liouvillian(&cfg, &p).unwrap();
        let rho = steady_state(&l).unwrap();
        let eye = CMat::identity(cfg.dim(), cfg.dim());
        let taus = [0.0, 1.0, 3.0];
        let vals = two_time_correlation(&l, &rho, &eye, &l.ops.photon_number, &taus).unwrap();
        for v in &vals {
            assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn frequency_fit_recovers_a_sine() {
        let w = 4.2;
        let taus: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
        let vals: Vec<Complex64> = taus
            .iter()
            .map(|&t| Complex64::new((w * t).cos() * (-0.1 * t).exp(), 0.0))
            .collect();
        let f = dominant_frequency(&taus, &vals).unwrap();
        assert_relative_eq!(f, w, max_relative = 1e-3);
    }
}
