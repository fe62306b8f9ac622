//! Single-photon reflection and transmission of 1D atom arrays.
//!
//! Amplitudes are referred to a global frame: with no atoms present r = 0 and
//! t = 1. Two independent routes are provided — 2×2 transfer/scattering
//! matrices and the matrix Green's function of the collective Hamiltonian —
//! together with the closed forms for Dicke and periodic arrays, the EIT
//! window of a three-level array and seeded random-filling ensembles.

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::invalid;
use crate::modes::{effective_hamiltonian, greens_matrix, AtomChain, Coupling, ModeSet};
use crate::{c64, Error, Limit, Result, C64, I};

/// Scattering amplitudes of a two-port element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    /// Reflection of a photon incident from the left (travelling right).
    pub r: C64,
    /// Reflection of a photon incident from the right.
    pub r_right: C64,
    /// Transmission left → right.
    pub t_fwd: C64,
    /// Transmission right → left.
    pub t_bwd: C64,
}

impl Amplitudes {
    /// The empty element: nothing reflected, everything transmitted.
    pub const IDENTITY: Amplitudes =
        Amplitudes { r: C64 { re: 0.0, im: 0.0 }, r_right: C64 { re: 0.0, im: 0.0 }, t_fwd: C64 { re: 1.0, im: 0.0 }, t_bwd: C64 { re: 1.0, im: 0.0 } };

    /// Reflectance |r|² for incidence from the left.
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// Transmittance |t_fwd|².
    pub fn transmittance(&self) -> f64 {
        self.t_fwd.norm_sqr()
    }

    /// Element shifted to sit at optical phase p in the global frame.
    fn placed(self, p: C64) -> Self {
        Amplitudes { r: self.r * (2.0 * I * p).exp(), r_right: self.r_right * (-2.0 * I * p).exp(), ..self }
    }

    /// Cascade `self` (on the left) with `next` (on the right).
    pub fn then(&self, next: &Amplitudes) -> Amplitudes {
        let denom = 1.0 - self.r_right * next.r;
        Amplitudes {
            r: self.r + self.t_fwd * next.r * self.t_bwd / denom,
            r_right: next.r_right + next.t_bwd * self.r_right * next.t_fwd / denom,
            t_fwd: self.t_fwd * next.t_fwd / denom,
            t_bwd: next.t_bwd * self.t_bwd / denom,
        }
    }
}

/// Single atom at the origin: r = 2i√(γ→γ←)/(−ω − i(γ_nr+γ1D)),
/// t→/← = 1 + 2iγ→/←/(−ω − i(γ_nr+γ1D)).
pub fn atom_rt(omega: f64, coupling: &Coupling) -> Amplitudes {
    cluster_rt(omega, coupling, 1)
}

/// m atoms at one point respond linearly as a single scatterer with m-fold
/// waveguide coupling. Treating them as one element avoids the 0/0 that two
/// coincident perfect mirrors produce in the cascade at resonance.
fn cluster_rt(omega: f64, coupling: &Coupling, m: usize) -> Amplitudes {
    let m = m as f64;
    let d = c64(-omega, -(coupling.gamma_nr + m * coupling.gamma1d));
    let r = 2.0 * I * m * (coupling.gamma_right * coupling.gamma_left).sqrt() / d;
    Amplitudes {
        r,
        r_right: r,
        t_fwd: 1.0 + 2.0 * I * m * coupling.gamma_right / d,
        t_bwd: 1.0 + 2.0 * I * m * coupling.gamma_left / d,
    }
}

/// Phase multiplier for photon propagation at detuning ω.
fn propagation_scale(coupling: &Coupling, omega: f64) -> Result<C64> {
    if !coupling.markovian && coupling.gamma_over_omega0 == 0.0 {
        // Retardation requested without an absolute frequency scale.
        return Err(Error::MissingFrequency);
    }
    coupling.phase_scale(Some(c64(omega, 0.0)))
}

fn diag_phase(p: C64) -> Matrix2<C64> {
    Matrix2::new((I * p).exp(), c64(0.0, 0.0), c64(0.0, 0.0), (-I * p).exp())
}

/// Total transfer matrix M mapping (right-going, left-going) amplitudes on
/// the left of the chain to those on its right, in the global frame.
pub fn transfer_chain(chain: &AtomChain, coupling: &Coupling, omega: f64) -> Result<Matrix2<C64>> {
    coupling.validate()?;
    let a = atom_rt(omega, coupling);
    if a.t_bwd.norm() < 1e-300 {
        return Err(Error::SingularTransfer(omega));
    }
    let tb = a.t_bwd;
    let atom = Matrix2::new((a.t_fwd * tb - a.r * a.r) / tb, a.r / tb, -a.r / tb, 1.0 / tb);
    let scale = propagation_scale(coupling, omega)?;
    let mut m = Matrix2::<C64>::identity();
    for &theta in chain.phases() {
        let p = scale * theta;
        m = diag_phase(-p) * atom * diag_phase(p) * m;
    }
    Ok(m)
}

/// Amplitudes read off a transfer matrix.
pub fn amplitudes_from_transfer(m: &Matrix2<C64>) -> Amplitudes {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Amplitudes { r: -m[(1, 0)] / m[(1, 1)], r_right: m[(0, 1)] / m[(1, 1)], t_fwd: det / m[(1, 1)], t_bwd: 1.0 / m[(1, 1)] }
}

/// Reflection and transmission of an arbitrary chain, by cascading
/// scattering matrices (stable in band gaps and at perfectly reflecting
/// atoms, where the transfer matrix does not exist).
pub fn chain_rt(chain: &AtomChain, coupling: &Coupling, omega: f64) -> Result<Amplitudes> {
    coupling.validate()?;
    let scale = propagation_scale(coupling, omega)?;
    let phases = chain.phases();
    let mut acc = Amplitudes::IDENTITY;
    let mut i = 0;
    while i < phases.len() {
        let m = phases[i..].iter().take_while(|&&p| p == phases[i]).count();
        acc = acc.then(&cluster_rt(omega, coupling, m).placed(scale * phases[i]));
        i += m;
    }
    Ok(acc)
}

/// Closed form for N identical, equally spaced, symmetrically coupled atoms
/// with phase step φ: with the Bloch phase cos K = [e^{iφ}(t² − r²) + e^{−iφ}]/(2t),
/// r_N = r sin NK/(sin NK − t e^{iφ} sin(N−1)K) and
/// t_N = e^{−i(N−1)φ} t sin K/(sin NK − t e^{iφ} sin(N−1)K).
pub fn periodic_rt(n: usize, phi: f64, omega: f64, coupling: &Coupling) -> Result<(C64, C64)> {
    coupling.validate()?;
    if !coupling.is_symmetric() {
        return Err(invalid("coupling", "the periodic closed form needs symmetric coupling"));
    }
    if n == 0 {
        return Ok((c64(0.0, 0.0), c64(1.0, 0.0)));
    }
    let a = atom_rt(omega, coupling);
    let (r, t) = (a.r, a.t_fwd);
    let p = propagation_scale(coupling, omega)? * phi;
    if t.norm() < 1e-300 {
        // A perfect mirror: the first atom reflects everything.
        return Ok((r, c64(0.0, 0.0)));
    }
    let cos_k = ((I * p).exp() * (t * t - r * r) + (-I * p).exp()) / (2.0 * t);
    // Chebyshev polynomials of the second kind, U_{N−1} and U_{N−2}.
    let (u1, u2) = chebyshev_u(n, cos_k);
    let tp = t * (I * p).exp();
    let denom = u1 - tp * u2;
    let rn = r * u1 / denom;
    let tn = (-I * p * (n as f64)).exp() * tp / denom;
    Ok((rn, tn))
}

/// (U_{n−1}(x), U_{n−2}(x)) with U_{−1} = 0, via sin(nK)/sin K away from the
/// band edges and by recurrence near them.
fn chebyshev_u(n: usize, x: C64) -> (C64, C64) {
    let k = x.acos();
    let s = k.sin();
    if s.norm() > 1e-6 && k.im.abs() < 700.0 / n as f64 {
        let u = |m: usize| ((m as f64) * k).sin() / s;
        (u(n), u(n - 1))
    } else {
        let (mut a, mut b) = (c64(0.0, 0.0), c64(1.0, 0.0)); // U_{−1}, U_0
        for _ in 1..n {
            let c = 2.0 * x * b - a;
            a = b;
            b = c;
        }
        (b, a)
    }
}

/// Dicke limit (all atoms at one point): r = iNγ1D/(−ω − i(γ_nr + Nγ1D)), t = 1 + r.
pub fn dicke_rt(n: usize, omega: f64, coupling: &Coupling) -> (C64, C64) {
    let ng = n as f64 * coupling.gamma1d;
    let r = I * ng / c64(-omega, -(coupling.gamma_nr + ng));
    (r, 1.0 + r)
}

/// Amplitudes from the Green's function G = (ω − H)⁻¹ of the collective
/// Hamiltonian: r = −2i√(γ→γ←) Σ G_mn e^{i(θm+θn)},
/// t→ = 1 − 2iγ→ Σ e^{−iθm} G_mn e^{iθn}, and mirrored for the other port.
pub fn rt_from_green(chain: &AtomChain, coupling: &Coupling, omega: f64) -> Result<Amplitudes> {
    if chain.is_empty() {
        coupling.validate()?;
        return Ok(Amplitudes::IDENTITY);
    }
    let w = c64(omega, 0.0);
    let h = effective_hamiltonian(chain, coupling, Some(w))?;
    let g = greens_matrix(&h, w)?;
    let scale = propagation_scale(coupling, omega)?;
    let e: Vec<C64> = chain.phases().iter().map(|&th| (I * scale * th).exp()).collect();
    let (mut srr, mut sll, mut sfw, mut sbw) = (c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
    for m in 0..chain.len() {
        for n in 0..chain.len() {
            let gmn = g[(m, n)];
            srr += e[m] * gmn * e[n];
            sll += gmn / (e[m] * e[n]);
            sfw += gmn * e[n] / e[m];
            sbw += gmn * e[m] / e[n];
        }
    }
    let cross = -2.0 * I * (coupling.gamma_right * coupling.gamma_left).sqrt();
    Ok(Amplitudes {
        r: cross * srr,
        r_right: cross * sll,
        t_fwd: 1.0 - 2.0 * I * coupling.gamma_right * sfw,
        t_bwd: 1.0 - 2.0 * I * coupling.gamma_left * sbw,
    })
}

/// Optical depth −ln|t|²; a vanishing transmission is reported as divergent.
pub fn optical_depth(t_resonant: C64) -> Result<Limit<f64>> {
    let t2 = t_resonant.norm_sqr();
    if t2 > 1.0 + 1e-12 || !t2.is_finite() {
        return Err(invalid("t_resonant", format!("|t|² must lie in (0, 1], got {t2}")));
    }
    if t2 == 0.0 {
        return Ok(Limit::Divergent);
    }
    Ok(Limit::Finite(-t2.min(1.0).ln()))
}

/// Which route computes a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Cascaded scattering matrices (any chain).
    Transfer,
    /// Matrix Green's function of the collective Hamiltonian.
    Green,
    /// Closed Dicke form for N atoms at a point.
    Dicke,
}

/// Reflection/transmission sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub grid: Vec<f64>,
    pub r: Vec<C64>,
    pub t_fwd: Vec<C64>,
    pub t_bwd: Vec<C64>,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn reflectance(&self) -> Vec<f64> {
        self.r.iter().map(|x| x.norm_sqr()).collect()
    }

    pub fn transmittance(&self) -> Vec<f64> {
        self.t_fwd.iter().map(|x| x.norm_sqr()).collect()
    }

    /// Probability lost out of the waveguide, 1 − R − T.
    pub fn loss(&self) -> Vec<f64> {
        self.r.iter().zip(&self.t_fwd).map(|(r, t)| 1.0 - r.norm_sqr() - t.norm_sqr()).collect()
    }
}

/// Evaluate a spectrum in parallel over the grid (results in grid order).
pub fn spectrum(chain: &AtomChain, coupling: &Coupling, grid: &[f64], method: Method) -> Result<SpectralResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    coupling.validate()?;
    let rows: Vec<Amplitudes> = grid
        .par_iter()
        .map(|&w| match method {
            Method::Transfer => chain_rt(chain, coupling, w),
            Method::Green => rt_from_green(chain, coupling, w),
            Method::Dicke => {
                let (r, t) = dicke_rt(chain.len(), w, coupling);
                Ok(Amplitudes { r, r_right: r, t_fwd: t, t_bwd: t })
            }
        })
        .collect::<Result<_>>()?;
    Ok(SpectralResult {
        grid: grid.to_vec(),
        r: rows.iter().map(|a| a.r).collect(),
        t_fwd: rows.iter().map(|a| a.t_fwd).collect(),
        t_bwd: rows.iter().map(|a| a.t_bwd).collect(),
    })
}

/// A randomly filled lattice: each of `sites` positions (phase step
/// `phase_step`) holds an atom independently with probability `fill`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub sites: usize,
    pub fill: f64,
    pub trials: usize,
    pub seed: u64,
    pub phase_step: f64,
    pub coupling: Coupling,
}

/// Trial-averaged reflectance with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
}

/// Independent per-trial seed derived from the master seed (splitmix64), so
/// results do not depend on scheduling.
pub(crate) fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Average reflectance of randomly filled lattices (incidence from the left).
pub fn ensemble_bragg_reflectance(spec: &EnsembleSpec, grid: &[f64]) -> Result<EnsembleResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(0.0..=1.0).contains(&spec.fill) {
        return Err(invalid("fill", format!("must lie in [0, 1], got {}", spec.fill)));
    }
    if spec.trials == 0 {
        return Err(invalid("trials", "at least one trial is required"));
    }
    spec.coupling.validate()?;
    let lattice = AtomChain::periodic(spec.sites, spec.phase_step);
    let per_trial: Vec<Vec<f64>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, trial));
            let keep: Vec<bool> = (0..spec.sites).map(|_| rng.random_bool(spec.fill)).collect();
            let chain = lattice.select(&keep);
            grid.iter().map(|&w| chain_rt(&chain, &spec.coupling, w).map(|a| a.reflectance())).collect()
        })
        .collect::<Result<_>>()?;
    // Ordered reduction keeps reruns bit-identical.
    let k = spec.trials as f64;
    let mut mean = vec![0.0; grid.len()];
    let mut sq = vec![0.0; grid.len()];
    for row in &per_trial {
        for (i, &x) in row.iter().enumerate() {
            mean[i] += x;
            sq[i] += x * x;
        }
    }
    let std_err = mean
        .iter_mut()
        .zip(&sq)
        .map(|(m, &s)| {
            *m /= k;
            if spec.trials > 1 {
                ((s / k - *m * *m).max(0.0) * k / (k - 1.0) / k).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(EnsembleResult { grid: grid.to_vec(), mean, std_err })
}

/// Eigenvalues λ_ξ = −ω_ξ of the lossless single-excitation modes.
fn eit_lambdas(modes: &ModeSet) -> impl Iterator<Item = C64> + '_ {
    modes.eigenvalues.iter().map(|w| -w)
}

/// Probe transmission through an array of Λ atoms dressed by a control field
/// of Rabi frequency Ω_c: Π_ξ [Δ(Δ+iγ) − Ω_c²/4]/[Δ(Δ+iγ+λ_ξ) − Ω_c²/4],
/// with λ_ξ taken from the eigenmodes of the lossless chain Hamiltonian.
pub fn eit_transmission(modes: &ModeSet, delta: f64, omega_c: f64, gamma: f64) -> Result<C64> {
    if omega_c < 0.0 {
        return Err(invalid("omega_c", "must be ≥ 0"));
    }
    let d = c64(delta, 0.0);
    let q = 0.25 * omega_c * omega_c;
    let num = d * (d + I * gamma) - q;
    Ok(eit_lambdas(modes).map(|lam| num / (d * (d + I * gamma + lam) - q)).product())
}

/// Effective polariton wavevector per period, K·d, to second order in the
/// probe detuning: −(i/N) Σ_ξ (4λ_ξ/Ω_c²)[Δ + (4Δ²/Ω_c²)(λ_ξ + 2iγ)].
pub fn eit_keff(modes: &ModeSet, delta: f64, omega_c: f64, gamma: f64) -> Result<C64> {
    if omega_c <= 0.0 {
        return Err(invalid("omega_c", "must be > 0"));
    }
    let n = modes.len() as f64;
    let oc2 = omega_c * omega_c;
    let sum: C64 = eit_lambdas(modes)
        .map(|lam| 4.0 * lam / oc2 * (delta + 4.0 * delta * delta / oc2 * (lam + 2.0 * I * gamma)))
        .sum();
    Ok(-I * sum / n)
}

/// Group velocity at the two-photon resonance, Ω_c² d/(4γ1D) (length unit of d per time).
pub fn group_velocity(omega_c: f64, d: f64, gamma1d: f64) -> f64 {
    omega_c * omega_c * d / (4.0 * gamma1d)
}

/// Convenience: lossless modes of a chain for [`eit_transmission`].
pub fn eit_modes(chain: &AtomChain, gamma1d: f64) -> Result<ModeSet> {
    let h: DMatrix<C64> = effective_hamiltonian(chain, &Coupling::symmetric(gamma1d, 0.0), None)?;
    crate::modes::eigenmodes(&h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn resonant_mirror_and_chiral_phase() {
        let a = atom_rt(0.0, &Coupling::symmetric(1.0, 0.0));
        assert!(close(a.r, c64(-1.0, 0.0), 1e-15) && a.t_fwd.norm() < 1e-15);
        let a = atom_rt(0.0, &Coupling::chiral(1.0, 0.0, 0.0));
        assert!(a.r.norm() < 1e-15 && close(a.t_fwd, c64(-1.0, 0.0), 1e-15));
        let a = atom_rt(0.0, &Coupling::symmetric(1.0, 1.0));
        assert!((a.transmittance() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_chain_is_transparent() {
        let a = chain_rt(&AtomChain::periodic(0, 1.0), &Coupling::symmetric(1.0, 0.0), 0.3).unwrap();
        assert_eq!(a, Amplitudes::IDENTITY);
    }

    #[test]
    fn transfer_and_cascade_agree() {
        let chain = AtomChain::new(vec![0.0, 0.4, 1.9, 2.0, 3.3]).unwrap();
        let c = Coupling::chiral(1.0, 0.2, 0.3);
        for &w in &[-2.0, -0.3, 0.1, 1.7] {
            let m = transfer_chain(&chain, &c, w).unwrap();
            let a = amplitudes_from_transfer(&m);
            let b = chain_rt(&chain, &c, w).unwrap();
            assert!(close(a.r, b.r, 1e-12) && close(a.t_fwd, b.t_fwd, 1e-12));
            assert!(close(a.t_bwd, b.t_bwd, 1e-12) && close(a.r_right, b.r_right, 1e-12));
        }
    }

    #[test]
    fn singular_transfer_reported() {
        let r = transfer_chain(&AtomChain::dicke(1), &Coupling::symmetric(1.0, 0.0), 0.0);
        assert_eq!(r, Err(Error::SingularTransfer(0.0)));
    }

    #[test]
    fn bragg_chain_saturates() {
        let c = Coupling::symmetric(1.0, 0.1);
        let a = chain_rt(&AtomChain::periodic(10, PI), &c, 0.0).unwrap();
        assert!((a.transmittance() - (0.1f64 / 10.1).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dicke_transmission_example() {
        let (_, t) = dicke_rt(3, 0.0, &Coupling::symmetric(1.0, 1.0));
        assert!(close(t, c64(0.25, 0.0), 1e-15));
    }

    #[test]
    fn optical_depth_values() {
        assert_eq!(optical_depth(c64(0.0, 0.0)).unwrap(), Limit::Divergent);
        let od = optical_depth(c64((-0.5f64).exp(), 0.0)).unwrap().value();
        assert!((od - 1.0).abs() < 1e-14);
        assert!(optical_depth(c64(1.1, 0.0)).is_err());
    }

    #[test]
    fn eit_dark_resonance() {
        let m = eit_modes(&AtomChain::periodic(5, PI / 2.0), 0.5).unwrap();
        let t = eit_transmission(&m, 0.0, 2.0, 0.0).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(7, 0), sub_seed(7, 1));
        assert_eq!(sub_seed(7, 3), sub_seed(7, 3));
    }
}
