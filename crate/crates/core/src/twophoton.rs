//! Two-photon scattering: kernels, correlation functions, flux bookkeeping
//! and two-excitation eigenstates.
//!
//! A weak coherent drive at frequency ε scatters photon pairs into
//! (ε − ω, ε + ω) with amplitude M(ε − ω, ε + ω ← ε, ε). The coherent part
//! of the output is set by the single-photon amplitudes; M carries all
//! photon–photon correlations:
//!
//!   g²(τ) = |1 + i/(2a²) ∫ dω/2π e^{−iωτ} M(ε − ω, ε + ω ← ε, ε)|²,
//!
//! with a = t(ε) in transmission and a = r(ε) in reflection.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::invalid;
use crate::modes::{effective_hamiltonian, AtomChain, Coupling, ModeSet};
use crate::spectra1d::{dicke_rt, rt_from_green};
use crate::{c64, linalg, quad, Error, Limit, Result, C64, I};

/// Propagation direction of an outgoing photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Along the drive (transmitted).
    Forward,
    /// Against the drive (reflected).
    Backward,
}

/// Detection port for correlation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Transmission,
    Reflection,
}

impl Geometry {
    fn direction(self) -> Direction {
        match self {
            Geometry::Transmission => Direction::Forward,
            Geometry::Reflection => Direction::Backward,
        }
    }
}

fn check_conservation(w1p: f64, w2p: f64, w1: f64, w2: f64) -> Result<()> {
    let scale = [w1p, w2p, w1, w2].iter().fold(1.0f64, |a, x| a.max(x.abs()));
    if (w1p + w2p - w1 - w2).abs() > 1e-12 * scale {
        return Err(invalid("frequencies", "kernel requires ω1′ + ω2′ = ω1 + ω2"));
    }
    Ok(())
}

/// Energy-dependent factor of the Dicke kernel,
/// N(ε + iγ)(ε + i(Nγ1D + γ))/(ε + i(N−1)γ1D + iγ), with the two-photon
/// pole cancelled analytically for N = 1.
fn dicke_pair_factor(eps: C64, n: usize, coupling: &Coupling) -> C64 {
    let (g1, g) = (coupling.gamma1d, coupling.gamma_nr);
    let nf = n as f64;
    let big = eps + I * (nf * g1 + g);
    if n == 1 {
        return big;
    }
    nf * (eps + I * g) * big / (eps + I * ((nf - 1.0) * g1 + g))
}

fn dicke_s(w: C64, n: usize, coupling: &Coupling) -> C64 {
    1.0 / (-w - I * (coupling.gamma_nr + n as f64 * coupling.gamma1d))
}

/// Two-photon kernel of N atoms at one point (two-level atoms):
/// M = 4γ1D² s(ω1)s(ω2)s(ω1′)s(ω2′) N(ε + iγ)(ε + i(Nγ1D + γ))/(ε + i(N−1)γ1D + iγ),
/// s(ω) = 1/(−ω − i(γ + Nγ1D)), ε = (ω1 + ω2)/2.
pub fn kernel_dicke(w1p: f64, w2p: f64, w1: f64, w2: f64, n: usize, coupling: &Coupling) -> Result<C64> {
    check_conservation(w1p, w2p, w1, w2)?;
    coupling.validate()?;
    if n == 0 {
        return Err(invalid("n", "at least one atom is required"));
    }
    Ok(kernel_dicke_c(c64(w1p, 0.0), c64(w2p, 0.0), c64(w1, 0.0), c64(w2, 0.0), n, coupling))
}

fn kernel_dicke_c(w1p: C64, w2p: C64, w1: C64, w2: C64, n: usize, coupling: &Coupling) -> C64 {
    let eps = 0.5 * (w1 + w2);
    let s = |w| dicke_s(w, n, coupling);
    4.0 * coupling.gamma1d.powi(2) * s(w1) * s(w2) * s(w1p) * s(w2p) * dicke_pair_factor(eps, n, coupling)
}

/// Independent closed form from the Bethe-ansatz solution (lossless atoms):
/// M = 4γ1D² s(ω1)s(ω2)s(ω1′)s(ω2′) N ε(ε + iNγ1D)/(ε + i(N−1)γ1D),
/// s(ω) = 1/(ω + iNγ1D).
pub fn bethe_oracle(w1p: f64, w2p: f64, w1: f64, w2: f64, n: usize, gamma1d: f64) -> C64 {
    let ng = n as f64 * gamma1d;
    let s = |w: f64| 1.0 / c64(w, ng);
    let eps = c64(0.5 * (w1 + w2), 0.0);
    let pair = if n == 1 {
        eps + I * ng
    } else {
        n as f64 * eps * (eps + I * ng) / (eps + I * (ng - gamma1d))
    };
    4.0 * gamma1d * gamma1d * s(w1) * s(w2) * s(w1p) * s(w2p) * pair
}

/// Exponentially bound photon pair of N atoms at the origin (c = 1):
/// e^{iε(x1+x2)} e^{−Nγ1D|x1−x2|} × {1, t_k, t_k t_p} for both photons before
/// the atoms, on opposite sides, and both past them. The rapidities are
/// k = ε + iNγ1D, p = ε − iNγ1D and t(ω) = (ω − iNγ1D)/(ω + iNγ1D).
pub fn bound_pair_amplitude(x1: f64, x2: f64, eps: f64, n: usize, gamma1d: f64) -> C64 {
    let ng = n as f64 * gamma1d;
    let t = |w: C64| (w - I * ng) / (w + I * ng);
    let tk = t(c64(eps, ng));
    let tp = t(c64(eps, -ng));
    let region = match (x1 > 0.0, x2 > 0.0) {
        (false, false) => c64(1.0, 0.0),
        (true, true) => tk * tp,
        _ => tk,
    };
    (I * eps * (x1 + x2)).exp() * (-ng * (x1 - x2).abs()).exp() * region
}

/// Σ_mn = i[(H⊗1 + 1⊗H − 2ε)⁻¹]_{(mm),(nn)}, the pair propagator between
/// doubly occupied sites, by Sylvester solves in Schur form.
pub fn sigma_pair(h: &DMatrix<C64>, eps: C64) -> Result<DMatrix<C64>> {
    if h.nrows() != h.ncols() {
        return Err(invalid("H", "matrix must be square"));
    }
    linalg::pair_sigma(h, eps)
}

/// Σ from an eigen-decomposition: i Σ_{νμ} R_mν R_mμ L_nν L_nμ/(ω^ν + ω^μ − 2ε)
/// with left vectors L = (R⁻¹)ᵀ (equal to R for symmetric H).
pub fn sigma_pair_spectral(modes: &ModeSet, eps: C64) -> Result<DMatrix<C64>> {
    let r = &modes.eigenvectors;
    let l = linalg::inverse(r)?.transpose();
    let n = r.nrows();
    let w = &modes.eigenvalues;
    let mut sigma = DMatrix::<C64>::zeros(n, n);
    for nu in 0..n {
        for mu in 0..n {
            let d = w[nu] + w[mu] - 2.0 * eps;
            if d.norm() < 1e-13 * (1.0 + w[nu].norm() + w[mu].norm()) {
                return Err(Error::Singular { omega: 2.0 * eps, pole: w[nu] + w[mu] });
            }
            let f = I / d;
            for m in 0..n {
                let a = r[(m, nu)] * r[(m, mu)] * f;
                for k in 0..n {
                    sigma[(m, k)] += a * l[(k, nu)] * l[(k, mu)];
                }
            }
        }
    }
    Ok(sigma)
}

/// Vertex matrix Q: Σ⁻¹ for two-level atoms, −iU(1 − iUΣ)⁻¹ for a finite
/// on-site interaction U.
pub fn q_matrix(sigma: &DMatrix<C64>, anharmonicity_u: Option<f64>) -> Result<DMatrix<C64>> {
    match anharmonicity_u {
        None => linalg::inverse(sigma),
        Some(u) => {
            let n = sigma.nrows();
            let a = DMatrix::<C64>::identity(n, n) - sigma * (I * u);
            Ok(linalg::inverse(&a)? * (-I * u))
        }
    }
}

/// Two-photon kernel of an arbitrary chain (Markovian phases), prepared for
/// repeated evaluation at one drive frequency ε:
///
///   M_μν(ω1′, ω2′) = −2i · 4γ→√(γ_μγ_ν) Σ_mn o^μ_m(ω1′) o^ν_m(ω2′) Q_mn s_n(ε)²,
///
/// with s_n(ε) = Σ_k G_nk(ε) e^{iθ_k} the excitation by the drive and
/// o^μ_m(ω) = Σ_k e^{∓iθ_k} G_km(ω) the emission into direction μ.
#[derive(Debug, Clone)]
pub struct GeneralKernel {
    h: DMatrix<C64>,
    eps: f64,
    /// q_m = Σ_n Q_mn s_n(ε)².
    q: Vec<C64>,
    w_fwd: Vec<C64>,
    w_bwd: Vec<C64>,
    coupling: Coupling,
}

impl GeneralKernel {
    pub fn new(chain: &AtomChain, coupling: &Coupling, eps: f64) -> Result<Self> {
        if !coupling.markovian {
            return Err(invalid("markovian", "the pair kernel is defined with phases at ω0"));
        }
        let h = effective_hamiltonian(chain, coupling, None)?;
        let ge = linalg::resolvent(&h, c64(eps, 0.0))?;
        let drive: Vec<C64> = chain.phases().iter().map(|&t| (I * t).exp()).collect();
        let s: Vec<C64> = (0..chain.len()).map(|n| (0..chain.len()).map(|k| ge[(n, k)] * drive[k]).sum()).collect();
        let sigma = linalg::pair_sigma(&h, c64(eps, 0.0))?;
        let q = q_matrix(&sigma, coupling.anharmonicity_u)?;
        let q: Vec<C64> = (0..chain.len()).map(|m| (0..chain.len()).map(|n| q[(m, n)] * s[n] * s[n]).sum()).collect();
        Ok(Self {
            h,
            eps,
            q,
            w_fwd: drive.iter().map(|d| d.conj()).collect(),
            w_bwd: drive,
            coupling: coupling.clone(),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn weights(&self, d: Direction) -> &[C64] {
        match d {
            Direction::Forward => &self.w_fwd,
            Direction::Backward => &self.w_bwd,
        }
    }

    fn prefactor(&self, mu: Direction, nu: Direction) -> C64 {
        let rate = |d| match d {
            Direction::Forward => self.coupling.gamma_right,
            Direction::Backward => self.coupling.gamma_left,
        };
        -2.0 * I * 4.0 * self.coupling.gamma_right * (rate(mu) * rate(nu)).sqrt()
    }

    fn emission(&self, w: C64, d: Direction) -> Result<Vec<C64>> {
        let g = linalg::resolvent(&self.h, w)?;
        let wt = self.weights(d);
        let n = wt.len();
        Ok((0..n).map(|m| (0..n).map(|k| wt[k] * g[(k, m)]).sum()).collect())
    }

    /// M_μν(ω1′, 2ε − ω1′) at complex outgoing frequency.
    pub fn eval_c(&self, w1p: C64, mu: Direction, nu: Direction) -> Result<C64> {
        let w2p = 2.0 * self.eps - w1p;
        let a = self.emission(w1p, mu)?;
        let b = self.emission(w2p, nu)?;
        let sum: C64 = a.iter().zip(&b).zip(&self.q).map(|((x, y), q)| x * y * q).sum();
        Ok(self.prefactor(mu, nu) * sum)
    }

    /// M_μν(ω1′, 2ε − ω1′).
    pub fn eval(&self, w1p: f64, mu: Direction, nu: Direction) -> Result<C64> {
        self.eval_c(c64(w1p, 0.0), mu, nu)
    }

    /// ∫ dω/2π e^{−iωτ} M_μμ(ε − ω, ε + ω) by the residue theorem over the
    /// single-excitation poles; `None` when the Hamiltonian is too close to
    /// defective for an eigen-expansion.
    fn correlation_integral_residue(&self, tau: f64, mu: Direction) -> Option<C64> {
        let modes = crate::modes::sorted_modes(&self.h).ok()?;
        let r = &modes.eigenvectors;
        let rinv = linalg::inverse(r).ok()?;
        let cond = r.iter().map(|x| x.norm()).fold(0.0, f64::max) * rinv.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if !cond.is_finite() || cond > 1e8 {
            return None;
        }
        let l = rinv.transpose();
        let n = r.nrows();
        let lam = &modes.eigenvalues;
        let wt = self.weights(mu);
        let beta: Vec<C64> = (0..n).map(|v| (0..n).map(|k| wt[k] * r[(k, v)]).sum()).collect();
        let eps = c64(self.eps, 0.0);
        let tau = tau.abs();
        let mut total = c64(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                let w: C64 = (0..n).map(|m| l[(m, a)] * l[(m, b)] * self.q[m]).sum();
                let phase = (-I * (lam[b] - eps) * tau).exp();
                total += beta[a] * beta[b] * w * (-I) * phase / (2.0 * eps - lam[a] - lam[b]);
            }
        }
        Some(self.prefactor(mu, mu) * total)
    }

    /// Gershgorin bound on |Re| of the single-excitation poles.
    fn pole_extent(&self) -> f64 {
        (0..self.h.nrows()).map(|i| self.h.row(i).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// The scatterer a correlation function refers to.
#[derive(Debug, Clone)]
pub enum Scatterer {
    /// N atoms at one point.
    Dicke { n: usize, coupling: Coupling },
    /// An arbitrary chain.
    Chain { chain: AtomChain, coupling: Coupling },
}

impl Scatterer {
    fn coupling(&self) -> &Coupling {
        match self {
            Scatterer::Dicke { coupling, .. } | Scatterer::Chain { coupling, .. } => coupling,
        }
    }

    fn size(&self) -> usize {
        match self {
            Scatterer::Dicke { n, .. } => *n,
            Scatterer::Chain { chain, .. } => chain.len(),
        }
    }

    /// Coherent single-photon amplitude seen by a detector.
    fn amplitude(&self, eps: f64, geometry: Geometry) -> Result<C64> {
        Ok(match self {
            Scatterer::Dicke { n, coupling } => {
                let (r, t) = dicke_rt(*n, eps, coupling);
                match geometry {
                    Geometry::Transmission => t,
                    Geometry::Reflection => r,
                }
            }
            Scatterer::Chain { chain, coupling } => {
                let a = rt_from_green(chain, coupling, eps)?;
                match geometry {
                    Geometry::Transmission => a.t_fwd,
                    Geometry::Reflection => a.r,
                }
            }
        })
    }
}

/// How the frequency integral in g²(τ) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMethod {
    /// Residues where the pole structure allows it, quadrature otherwise.
    Auto,
    /// Closed-form residue sum (fails for defective Hamiltonians).
    Residue,
    /// Adaptive quadrature on the real axis with rotated tails.
    Quadrature,
}

/// ∫ dω/2π e^{−iωτ} M(ε − ω, ε + ω ← ε, ε) in the requested port.
pub fn correlation_integral(scatterer: &Scatterer, eps: f64, tau: f64, geometry: Geometry, method: IntegralMethod) -> Result<C64> {
    let coupling = scatterer.coupling();
    coupling.validate()?;
    let n = scatterer.size();
    if n == 0 {
        return Err(invalid("n", "at least one atom is required"));
    }
    let tau = tau.abs();
    let e = c64(eps, 0.0);
    match scatterer {
        Scatterer::Dicke { n, coupling } => {
            // Both photons emitted by the same superradiant mode λ.
            if method != IntegralMethod::Quadrature {
                let lam = c64(0.0, -(coupling.gamma_nr + *n as f64 * coupling.gamma1d));
                let pre = 4.0 * coupling.gamma1d.powi(2) * dicke_s(e, *n, coupling).powi(2) * dicke_pair_factor(e, *n, coupling);
                return Ok(pre * (-I) * (-I * (lam - e) * tau).exp() / (2.0 * e - 2.0 * lam));
            }
            let f = |w: C64| kernel_dicke_c(e - w, e + w, e, e, *n, coupling);
            let width = coupling.gamma_nr + *n as f64 * coupling.gamma1d;
            Ok(line_integral(&f, tau, width, eps.abs() + width) / (2.0 * PI))
        }
        Scatterer::Chain { chain, coupling } => {
            let k = GeneralKernel::new(chain, coupling, eps)?;
            let dir = geometry.direction();
            if method != IntegralMethod::Quadrature {
                if let Some(v) = k.correlation_integral_residue(tau, dir) {
                    return Ok(v);
                }
                if method == IntegralMethod::Residue {
                    return Err(invalid("method", "Hamiltonian is (nearly) defective; residues unavailable"));
                }
            }
            let failed = std::cell::Cell::new(None);
            let f = |w: C64| match k.eval_c(e - w, dir, dir) {
                Ok(v) => v,
                Err(err) => {
                    failed.set(Some(err));
                    c64(0.0, 0.0)
                }
            };
            let width = coupling.gamma_nr + n as f64 * coupling.gamma1d;
            let v = line_integral(&f, tau, width, eps.abs() + k.pole_extent());
            if let Some(err) = failed.take() {
                return Err(err);
            }
            Ok(v / (2.0 * PI))
        }
    }
}

/// ∫ f(ω) e^{−iωτ} dω for kernels with pole real parts bounded by `extent`.
fn line_integral<F: Fn(C64) -> C64>(f: &F, tau: f64, width: f64, extent: f64) -> C64 {
    let scale = f(c64(0.0, 0.0)).norm().max(1e-300) * width;
    let (atol, rtol) = (1e-14 * scale, 1e-12);
    if tau == 0.0 {
        quad::integrate_line(&|x: f64| f(c64(x, 0.0)), width, atol, rtol).0
    } else {
        let window = (40.0 * width).max(2.0 * extent + 10.0 * width);
        quad::fourier_line(f, tau, window, atol, rtol).0
    }
}

/// Second-order correlation g²(τ) of the transmitted or reflected light;
/// divergent when the coherent amplitude in that port vanishes.
pub fn g2_tau(scatterer: &Scatterer, eps: f64, tau: f64, geometry: Geometry, method: IntegralMethod) -> Result<Limit<f64>> {
    let a = scatterer.amplitude(eps, geometry)?;
    let integral = correlation_integral(scatterer, eps, tau, geometry, method)?;
    Ok(g2_from_integral(a, integral))
}

fn g2_from_integral(a: C64, integral: C64) -> Limit<f64> {
    let a2 = a * a;
    if a2.norm() < 1e-12 * (1.0 + integral.norm()) {
        return Limit::Divergent;
    }
    Limit::Finite((1.0 + I * integral / (2.0 * a2)).norm_sqr())
}

/// Closed-form g²(0) for N co-located two-level atoms driven on resonance,
/// with Γ1D and Γ the radiative and non-radiative rates (any common unit):
/// reflection ((1 − 1/N)/(1 − Γ1D/(Γ + NΓ1D)))², transmission
/// ((1 − Γ1D/Γ)/(1 − Γ1D/(Γ + NΓ1D)))².
pub fn g2_zero_resonant(n: usize, gamma1d_cap: f64, gamma_cap: f64, geometry: Geometry) -> Result<Limit<f64>> {
    if n == 0 {
        return Err(invalid("n", "at least one atom is required"));
    }
    if gamma1d_cap <= 0.0 || gamma_cap < 0.0 {
        return Err(invalid("rates", "need Γ1D > 0 and Γ ≥ 0"));
    }
    let nf = n as f64;
    let den = 1.0 - gamma1d_cap / (gamma_cap + nf * gamma1d_cap);
    let num = match geometry {
        Geometry::Reflection => 1.0 - 1.0 / nf,
        Geometry::Transmission => {
            if gamma_cap == 0.0 {
                return Ok(Limit::Divergent);
            }
            1.0 - gamma1d_cap / gamma_cap
        }
    };
    if num == 0.0 {
        // The numerator vanishes identically in the other rate, so the
        // Γ → 0 limit of a vanishing denominator is still zero.
        return Ok(Limit::Finite(0.0));
    }
    if den == 0.0 {
        return Ok(Limit::Divergent);
    }
    Ok(Limit::Finite((num / den).powi(2)))
}

/// Coherent transmission and reflection to first order in the drive power,
/// and the incoherently scattered fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentCorrections {
    pub t_coh: f64,
    pub r_coh: f64,
    pub i_incoh: f64,
}

/// T_coh = |t|² − x Im[M t*(t* + r*)], R_coh the same with t ↔ r, and
/// I_incoh = x ∫ dω/2π |M(ε − ω, ε + ω)|², for N co-located atoms and drive
/// strength x = cα²/L.
pub fn coherent_corrections(eps: f64, alpha2_over_l: f64, n: usize, coupling: &Coupling) -> Result<CoherentCorrections> {
    coupling.validate()?;
    if n == 0 {
        return Err(invalid("n", "at least one atom is required"));
    }
    if alpha2_over_l < 0.0 {
        return Err(invalid("alpha2_over_l", "must be ≥ 0"));
    }
    let (r, t) = dicke_rt(n, eps, coupling);
    let e = c64(eps, 0.0);
    let m0 = kernel_dicke_c(e, e, e, e, n, coupling);
    let x = alpha2_over_l;
    let cross = t.conj() + r.conj();
    let t_coh = t.norm_sqr() - x * (m0 * t.conj() * cross).im;
    let r_coh = r.norm_sqr() - x * (m0 * r.conj() * cross).im;
    let width = coupling.gamma_nr + n as f64 * coupling.gamma1d;
    let f = |w: f64| c64(kernel_dicke_c(e - w, e + w, e, e, n, coupling).norm_sqr(), 0.0);
    let (v, _) = quad::integrate_line(&f, width, 1e-15 * m0.norm_sqr() * width, 1e-13);
    Ok(CoherentCorrections { t_coh, r_coh, i_incoh: x * v.re / (2.0 * PI) })
}

/// Kind of two-excitation state, by best-fitting ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    /// Symmetrised product of two standing polariton waves.
    Scattering,
    /// |antisymmetric product| of two standing waves (fermionised pair).
    Fermionized,
    /// Both excitations close to each other.
    Bound,
    /// One excitation pinned to a single site.
    Localized,
    /// No ansatz reaches the overlap threshold.
    Unclassified,
}

/// Classification of a pair state with the fit that supports it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairClass {
    pub kind: PairKind,
    /// Overlap (or weight fraction) achieved by the winning description.
    pub score: f64,
    /// Standing-wave numbers π j/(N+1) of the best product fit.
    pub k: (f64, f64),
}

/// Overlap a class must reach to be claimed.
pub const CLASS_THRESHOLD: f64 = 0.9;

/// A two-excitation eigenstate of the hard-core problem.
#[derive(Debug, Clone)]
pub struct PairState {
    /// Energy per excitation ε (the pair energy is 2ε).
    pub energy: C64,
    /// Symmetric amplitudes ψ_mn with ψ_nn = 0 and Σ ψ_mn² = 1.
    pub amplitude: DMatrix<C64>,
    /// Σ_m |Σ_n ψ_mn e^{ikn}|²/N on [`kmap_grid`].
    pub kmap: Vec<f64>,
    pub class: PairClass,
}

/// Wavenumbers of the pair k-maps: 2N points in (−π, π].
pub fn kmap_grid(n: usize) -> Vec<f64> {
    let m = 2 * n;
    (0..m).map(|j| -PI + 2.0 * PI * (j + 1) as f64 / m as f64).collect()
}

/// All N(N−1)/2 eigenstates of two hard-core excitations, most radiant first.
pub fn pair_eigenstates(h: &DMatrix<C64>) -> Result<Vec<PairState>> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(invalid("H", "matrix must be square"));
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let index = |a: usize, b: usize| {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        // Row-major position of (a, b), a < b.
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    };
    let d = pairs.len();
    let mut big = DMatrix::<C64>::zeros(d, d);
    for (row, &(m, k)) in pairs.iter().enumerate() {
        for j in 0..n {
            if j != m {
                big[(row, index(m, j))] += h[(k, j)];
            }
            if j != k {
                big[(row, index(j, k))] += h[(m, j)];
            }
        }
    }
    let modes = crate::modes::sorted_modes(&big)?;
    let basis = sine_basis(n);
    let grid = kmap_grid(n);
    let states = (0..d)
        .map(|col| {
            let mut psi = DMatrix::<C64>::zeros(n, n);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for (row, &(a, b)) in pairs.iter().enumerate() {
                let v = modes.eigenvectors[(row, col)] * s;
                psi[(a, b)] = v;
                psi[(b, a)] = v;
            }
            let class = classify(&psi, &basis);
            let kmap = kmap_of(&psi, &grid);
            PairState { energy: 0.5 * modes.eigenvalues[col], amplitude: psi, kmap, class }
        })
        .collect();
    Ok(states)
}

fn kmap_of(psi: &DMatrix<C64>, grid: &[f64]) -> Vec<f64> {
    let n = psi.nrows();
    grid.iter()
        .map(|&k| {
            let phases: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, k * j as f64)).collect();
            (0..n).map(|m| (0..n).map(|j| psi[(m, j)] * phases[j]).sum::<C64>().norm_sqr()).sum::<f64>() / n as f64
        })
        .collect()
}

/// Orthonormal standing waves √(2/(N+1)) sin(π j (n+1)/(N+1)), j = 1..N (columns).
fn sine_basis(n: usize) -> DMatrix<f64> {
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    DMatrix::from_fn(n, n, |site, j| norm * (PI * (j + 1) as f64 * (site + 1) as f64 / (n as f64 + 1.0)).sin())
}

/// Fermionised pair ansatz sign(n − m)[f1(m)f2(n) − f2(m)f1(n)] with
/// f(n) = sin(k n), sites n = 0..N−1.
pub fn fermionic_ansatz(n: usize, k1: f64, k2: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| {
        let (x, y) = (a as f64, b as f64);
        let v = (k1 * x).sin() * (k2 * y).sin() - (k2 * x).sin() * (k1 * y).sin();
        match b.cmp(&a) {
            std::cmp::Ordering::Greater => v,
            std::cmp::Ordering::Less => -v,
            std::cmp::Ordering::Equal => 0.0,
        }
    })
}

/// |⟨a|ψ⟩|/(‖a‖‖ψ‖) with the Hermitian inner product.
pub fn overlap(a: &DMatrix<f64>, psi: &DMatrix<C64>) -> f64 {
    let dot: C64 = a.iter().zip(psi.iter()).map(|(x, y)| y * *x).sum();
    let na = a.norm();
    let np = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || np == 0.0 {
        0.0
    } else {
        dot.norm() / (na * np)
    }
}

fn classify(psi: &DMatrix<C64>, basis: &DMatrix<f64>) -> PairClass {
    let n = psi.nrows();
    let total: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    let kj = |j: usize| PI * (j + 1) as f64 / (n as f64 + 1.0);

    // Bound: weight near the diagonal.
    let band = 2usize.max(n / 10);
    let near: f64 = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a.abs_diff(b) <= band)
        .map(|(a, b)| psi[(a, b)].norm_sqr())
        .sum();
    let bound = near / total;

    // Product fits in the standing-wave basis: B = Sᵀ X S.
    let cbasis = basis.map(|x| c64(x, 0.0));
    let sym = cbasis.transpose() * psi * &cbasis;
    let signed = DMatrix::from_fn(n, n, |a, b| match b.cmp(&a) {
        std::cmp::Ordering::Greater => psi[(a, b)],
        std::cmp::Ordering::Less => -psi[(a, b)],
        std::cmp::Ordering::Equal => c64(0.0, 0.0),
    });
    let anti = cbasis.transpose() * signed * &cbasis;
    let norm = total.sqrt();
    let (mut boson, mut fermion) = ((0.0, (0, 0)), (0.0, (0, 0)));
    for a in 0..n {
        for b in a + 1..n {
            let s = (sym[(a, b)] + sym[(b, a)]).norm() / (2f64.sqrt() * norm);
            let f = (anti[(a, b)] - anti[(b, a)]).norm() / (2f64.sqrt() * norm);
            if s > boson.0 {
                boson = (s, (a, b));
            }
            if f > fermion.0 {
                fermion = (f, (a, b));
            }
        }
    }

    // Localised: one site carries (nearly) a full excitation.
    let marginal = (0..n).map(|a| (0..n).map(|b| psi[(a, b)].norm_sqr()).sum::<f64>() / total).fold(0.0, f64::max);
    let localized = marginal / 0.5;

    let best_product = if fermion.0 >= boson.0 { (PairKind::Fermionized, fermion) } else { (PairKind::Scattering, boson) };
    let (kind, score, k) = if bound >= CLASS_THRESHOLD && bound >= best_product.1 .0 {
        (PairKind::Bound, bound, (0.0, 0.0))
    } else if best_product.1 .0 >= CLASS_THRESHOLD {
        let (a, b) = best_product.1 .1;
        (best_product.0, best_product.1 .0, (kj(a), kj(b)))
    } else if localized >= CLASS_THRESHOLD {
        (PairKind::Localized, localized.min(1.0), (0.0, 0.0))
    } else {
        let (a, b) = best_product.1 .1;
        (PairKind::Unclassified, best_product.1 .0, (kj(a), kj(b)))
    };
    PairClass { kind, score, k }
}

/// Smallest-to-largest singular value ratio of Σ(ε); vanishes at pair energies.
pub fn sigma_singularity(h: &DMatrix<C64>, eps: C64) -> Result<f64> {
    let s = sigma_pair(h, eps)?;
    let sv = s.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if max == 0.0 { 0.0 } else { min / max })
}
