//! Collective single-excitation physics of a waveguide-coupled atom chain.
//!
//! The effective Hamiltonian in the single-excitation sector is
//!
//!   H_mm = −i(γ1D + γ_nr),
//!   H_mn = −2iγ→ e^{iθ_mn}  (m > n, photon travelling right),
//!   H_mn = −2iγ← e^{iθ_mn}  (m < n, photon travelling left),
//!
//! with θ_mn = |θ_m − θ_n| and γ→ + γ← = γ1D. For symmetric coupling this
//! is the familiar −iγ1D e^{iφ|m−n|}.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::invalid;
use crate::{c64, linalg, polylog, Error, Limit, Result, C64, I};

/// Relative tolerance for γ→ + γ← = γ1D.
const RATE_SUM_TOL: f64 = 1e-12;

/// Ordered 1D array of atoms, described by their optical phases θ_m = ω0 z_m / c.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomChain {
    phases: Vec<f64>,
}

impl AtomChain {
    /// Chain from explicit phases; they must be finite and non-decreasing.
    /// An empty chain is allowed (it is transparent) but has no Hamiltonian.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("phases", "phases must be finite"));
        }
        if phases.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("phases", "phases must be non-decreasing"));
        }
        Ok(Self { phases })
    }

    /// N atoms with uniform phase step φ = ω0 d / c, starting at zero.
    pub fn periodic(n: usize, phi: f64) -> Self {
        assert!(phi >= 0.0 && phi.is_finite(), "phase step must be finite and ≥ 0");
        Self { phases: (0..n).map(|j| j as f64 * phi).collect() }
    }

    /// N atoms at the same point (the Dicke limit d = 0).
    pub fn dicke(n: usize) -> Self {
        Self { phases: vec![0.0; n] }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Sub-chain keeping only the atoms for which `keep` is true.
    pub fn select(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.len(), "mask length must match the chain");
        Self { phases: self.phases.iter().zip(keep).filter(|(_, &k)| k).map(|(&p, _)| p).collect() }
    }

    fn require_atoms(&self) -> Result<()> {
        if self.is_empty() {
            Err(invalid("chain", "at least one atom is required"))
        } else {
            Ok(())
        }
    }
}

/// Coupling of every atom to the waveguide and to the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// Total emission rate into the guided mode, γ1D = γ→ + γ←.
    pub gamma1d: f64,
    /// Rate of emission into everything else (free space, absorption).
    pub gamma_nr: f64,
    /// Emission rate into the rightward (forward) guided mode.
    pub gamma_right: f64,
    /// Emission rate into the leftward (backward) guided mode.
    pub gamma_left: f64,
    /// On-site photon–photon interaction; `None` is the two-level (U → ∞) limit.
    pub anharmonicity_u: Option<f64>,
    /// Ratio γ1D/ω0, needed only where the absolute frequency enters
    /// (Bragg physics, retarded phases). Zero means "not specified".
    pub gamma_over_omega0: f64,
    /// Use phases at ω0 (true) or at the probe frequency ω (false).
    pub markovian: bool,
}

impl Coupling {
    /// Mirror-symmetric coupling γ→ = γ← = γ1D/2.
    pub fn symmetric(gamma1d: f64, gamma_nr: f64) -> Self {
        Self {
            gamma1d,
            gamma_nr,
            gamma_right: 0.5 * gamma1d,
            gamma_left: 0.5 * gamma1d,
            anharmonicity_u: None,
            gamma_over_omega0: 0.0,
            markovian: true,
        }
    }

    /// Directional coupling with asymmetry ξ = γ←/γ→ and γ→ + γ← = γ1D.
    /// `xi = f64::INFINITY` gives purely leftward emission.
    pub fn chiral(gamma1d: f64, gamma_nr: f64, xi: f64) -> Self {
        let (right, left) =
            if xi.is_infinite() { (0.0, gamma1d) } else { (gamma1d / (1.0 + xi), gamma1d * xi / (1.0 + xi)) };
        Self { gamma_right: right, gamma_left: left, ..Self::symmetric(gamma1d, gamma_nr) }
    }

    /// Coupling from explicit directional rates; γ1D is their sum.
    pub fn directional(gamma_right: f64, gamma_left: f64, gamma_nr: f64) -> Result<Self> {
        let c = Self {
            gamma_right,
            gamma_left,
            ..Self::symmetric(gamma_right + gamma_left, gamma_nr)
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_anharmonicity(mut self, u: f64) -> Self {
        self.anharmonicity_u = Some(u);
        self
    }

    pub fn with_gamma_over_omega0(mut self, ratio: f64) -> Self {
        self.gamma_over_omega0 = ratio;
        self
    }

    pub fn with_markovian(mut self, markovian: bool) -> Self {
        self.markovian = markovian;
        self
    }

    /// Check every documented invariant.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma1d, self.gamma_nr, self.gamma_right, self.gamma_left, self.gamma_over_omega0];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(invalid("coupling", "rates must be finite"));
        }
        if self.gamma1d <= 0.0 {
            return Err(invalid("gamma1d", format!("must be > 0, got {}", self.gamma1d)));
        }
        if self.gamma_nr < 0.0 {
            return Err(invalid("gamma_nr", format!("must be ≥ 0, got {}", self.gamma_nr)));
        }
        if self.gamma_right < 0.0 || self.gamma_left < 0.0 {
            return Err(invalid("gamma_right/gamma_left", "directional rates must be ≥ 0"));
        }
        if (self.gamma_right + self.gamma_left - self.gamma1d).abs() > RATE_SUM_TOL * self.gamma1d {
            return Err(invalid(
                "gamma_right/gamma_left",
                format!("must sum to gamma1d = {}, got {}", self.gamma1d, self.gamma_right + self.gamma_left),
            ));
        }
        if self.gamma_over_omega0 < 0.0 {
            return Err(invalid("gamma_over_omega0", "must be ≥ 0"));
        }
        if let Some(u) = self.anharmonicity_u {
            if !u.is_finite() {
                return Err(invalid("anharmonicity_u", "use None for the two-level limit"));
            }
        }
        Ok(())
    }

    /// Fraction of emission into the waveguide, β = γ1D/(γ1D + γ_nr).
    pub fn beta(&self) -> f64 {
        self.gamma1d / (self.gamma1d + self.gamma_nr)
    }

    /// Directional asymmetry ξ = γ←/γ→ (∞ for purely leftward emission).
    pub fn xi(&self) -> f64 {
        if self.gamma_right == 0.0 {
            f64::INFINITY
        } else {
            self.gamma_left / self.gamma_right
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.gamma_right - self.gamma_left).abs() <= RATE_SUM_TOL * self.gamma1d
    }

    /// Total single-atom decay rate γ1D + γ_nr.
    pub fn total_rate(&self) -> f64 {
        self.gamma1d + self.gamma_nr
    }

    /// Factor multiplying the ω0 phases at detuning ω: 1 in the Markovian
    /// limit, ω/ω0 = 1 + ω (γ1D/ω0)/γ1D otherwise.
    pub(crate) fn phase_scale(&self, omega: Option<C64>) -> Result<C64> {
        if self.markovian {
            return Ok(c64(1.0, 0.0));
        }
        match omega {
            Some(w) if self.gamma_over_omega0 > 0.0 => Ok(1.0 + w * (self.gamma_over_omega0 / self.gamma1d)),
            _ => Err(Error::MissingFrequency),
        }
    }
}

/// Effective non-Hermitian Hamiltonian as a detuning from ω0.
///
/// `omega` is required only when `coupling.markovian` is false, in which
/// case photon phases are evaluated at the probe frequency.
pub fn effective_hamiltonian(chain: &AtomChain, coupling: &Coupling, omega: Option<C64>) -> Result<DMatrix<C64>> {
    chain.require_atoms()?;
    coupling.validate()?;
    let scale = coupling.phase_scale(omega)?;
    let n = chain.len();
    let th = chain.phases();
    let diag = c64(0.0, -coupling.total_rate());
    Ok(DMatrix::from_fn(n, n, |m, k| {
        if m == k {
            return diag;
        }
        let rate = if m > k { coupling.gamma_right } else { coupling.gamma_left };
        let phase = I * scale * (th[m] - th[k]).abs();
        c64(0.0, -2.0 * rate) * phase.exp()
    }))
}

/// Hamiltonian of point dipoles in free space, polarised perpendicular to
/// the chain. Phases are k0 z_m; rates are in units of the single-atom
/// half-linewidth γ0 (diagonal −iγ0).
pub fn freespace_hamiltonian(chain: &AtomChain, gamma0: f64) -> Result<DMatrix<C64>> {
    chain.require_atoms()?;
    if gamma0 <= 0.0 {
        return Err(invalid("gamma0", "must be > 0"));
    }
    if chain.phases().windows(2).any(|w| w[1] == w[0]) {
        return Err(invalid("phases", "free-space dipoles need distinct positions"));
    }
    let th = chain.phases();
    let n = chain.len();
    Ok(DMatrix::from_fn(n, n, |m, k| {
        if m == k {
            return c64(0.0, -gamma0);
        }
        let x = (th[m] - th[k]).abs();
        let g = c64(1.0 / x - 1.0 / (x * x * x), 1.0 / (x * x));
        -1.5 * gamma0 * (I * x).exp() * g
    }))
}

/// Complete eigen-decomposition of a collective Hamiltonian.
#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Complex eigenfrequencies, sorted from the most radiant (largest −Im) down.
    pub eigenvalues: Vec<C64>,
    /// Eigenvectors as columns, normalised by Σ_n P_n² = 1 (no conjugation).
    pub eigenvectors: DMatrix<C64>,
    /// Dominant Bloch wavevector per mode (per-site phase, in (−π, π]).
    pub bloch_k: Vec<f64>,
    /// Groups of mode indices with eigenvalue gaps below 1e−10 (relative).
    pub clusters: Vec<Vec<usize>>,
    /// Set when some eigenvalues are (nearly) degenerate or a mode is
    /// self-orthogonal; orthonormality is then not guaranteed inside clusters.
    pub near_degenerate: bool,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Mode with the smallest decay rate −Im ω.
    pub fn darkest(&self) -> (C64, usize) {
        let idx = self.len() - 1;
        (self.eigenvalues[idx], idx)
    }

    /// max |Σ_n P^ν_n P^μ_n − δ_νμ| over pairs not sharing a cluster.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let mut cluster_of = vec![0; n];
        for (c, g) in self.clusters.iter().enumerate() {
            for &i in g {
                cluster_of[i] = c;
            }
        }
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a != b && cluster_of[a] == cluster_of[b] && self.clusters[cluster_of[a]].len() > 1 {
                    continue;
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[(a, b)] - target).norm());
            }
        }
        worst
    }

    /// Green's function from the eigen-expansion Σ_ν P^ν_m P^ν_n/(ω − ω^ν).
    pub fn spectral_greens(&self, omega: C64) -> DMatrix<C64> {
        let p = &self.eigenvectors;
        let n = p.nrows();
        let mut scaled = p.clone();
        for (nu, w) in self.eigenvalues.iter().enumerate() {
            let f = 1.0 / (omega - w);
            for m in 0..n {
                scaled[(m, nu)] *= f;
            }
        }
        scaled * p.transpose()
    }
}

/// Diagonalise a collective Hamiltonian.
pub fn eigenmodes(h: &DMatrix<C64>) -> Result<ModeSet> {
    let mut modes = sorted_modes(h)?;
    modes.bloch_k = (0..modes.len()).map(|c| dominant_k(modes.eigenvectors.column(c).iter().copied())).collect();
    Ok(modes)
}

/// Sorted eigen-decomposition without the Bloch-wavevector scan (left empty).
pub(crate) fn sorted_modes(h: &DMatrix<C64>) -> Result<ModeSet> {
    if h.nrows() != h.ncols() {
        return Err(invalid("H", "matrix must be square"));
    }
    let e = linalg::eigen(h);
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    // Most radiant first: −Im descending; ties by real part for stability.
    order.sort_by(|&a, &b| {
        let (wa, wb) = (e.values[a], e.values[b]);
        (-wb.im).total_cmp(&-wa.im).then(wa.re.total_cmp(&wb.re))
    });
    let mut pos = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let eigenvalues: Vec<C64> = order.iter().map(|&i| e.values[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| e.vectors[(r, order[c])]);
    let mut clusters: Vec<Vec<usize>> =
        e.clusters.iter().map(|g| { let mut v: Vec<usize> = g.iter().map(|&i| pos[i]).collect(); v.sort_unstable(); v }).collect();
    clusters.sort_by_key(|g| g[0]);
    let near_degenerate = e.self_orthogonal || clusters.iter().any(|g| g.len() > 1);
    Ok(ModeSet { eigenvalues, eigenvectors, bloch_k: Vec::new(), clusters, near_degenerate })
}

/// Per-site wavevector maximising |Σ_n v_n e^{−ikn}|, searched on a grid
/// eight times finer than the natural DFT grid; positive k wins ties.
pub(crate) fn dominant_k(v: impl Iterator<Item = C64>) -> f64 {
    let v: Vec<C64> = v.collect();
    let n = v.len();
    if n <= 1 {
        return 0.0;
    }
    let samples = 8 * n;
    let mut best = (0.0, -1.0);
    for j in 0..samples {
        // k from (−π, π].
        let k = -PI + 2.0 * PI * (j + 1) as f64 / samples as f64;
        let amp: C64 = v.iter().enumerate().map(|(m, x)| x * C64::from_polar(1.0, -k * m as f64)).sum();
        let a = amp.norm();
        let better = a > best.1 * (1.0 + 1e-9);
        let tie_to_positive = a >= best.1 * (1.0 - 1e-9) && k > 0.0 && best.0 <= 0.0;
        if better || tie_to_positive {
            best = (k, a);
        }
    }
    best.0
}

/// Matrix Green's function G = (ω − H)⁻¹.
pub fn greens_matrix(h: &DMatrix<C64>, omega: C64) -> Result<DMatrix<C64>> {
    linalg::resolvent(h, omega)
}

/// Closed-form inverse of H − ω0 for a periodic, lossless, symmetric chain:
/// a tridiagonal matrix (×1/γ1D) with bulk diagonal −cot φ, corners
/// −cot φ/2 + i/2 and off-diagonal 1/(2 sin φ).
pub fn tridiagonal_inverse_oracle(n: usize, phi: f64, gamma1d: f64) -> Result<DMatrix<C64>> {
    if n == 0 {
        return Err(invalid("n", "at least one atom is required"));
    }
    if gamma1d <= 0.0 {
        return Err(invalid("gamma1d", "must be > 0"));
    }
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, c64(0.0, 1.0 / gamma1d)));
    }
    let s = phi.sin();
    if s.abs() < 1e-8 {
        return Err(Error::BraggDegenerate(s.abs()));
    }
    let cot = phi.cos() / s;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = c64(-cot, 0.0);
        if j + 1 < n {
            m[(j, j + 1)] = c64(0.5 / s, 0.0);
            m[(j + 1, j)] = c64(0.5 / s, 0.0);
        }
    }
    m[(0, 0)] = c64(-0.5 * cot, 0.5);
    m[(n - 1, n - 1)] = c64(-0.5 * cot, 0.5);
    Ok(m / c64(gamma1d, 0.0))
}

/// Bloch wavevector K·d of the infinite chain at complex detuning ω, from
/// cos Kd = cos φ + γ1D sin φ/(ω − δω + iγ). The branch has Im Kd ≥ 0 and,
/// for real Kd, Re Kd ∈ [0, π].
pub fn dispersion_guided(omega: C64, phi: f64, gamma1d: f64, delta_omega: f64, gamma: f64) -> C64 {
    let denom = omega - delta_omega + I * gamma;
    let cos_k = if denom == C64::new(0.0, 0.0) {
        return c64(0.0, f64::INFINITY);
    } else {
        phi.cos() + gamma1d * phi.sin() / denom
    };
    let k = cos_k.acos();
    if k.im < 0.0 {
        -k
    } else {
        k
    }
}

/// Inverse of [`dispersion_guided`]: ω(K) = δω − iγ + γ1D sin φ/(cos Kd − cos φ).
pub fn omega_of_k(kd: C64, phi: f64, gamma1d: f64, delta_omega: f64, gamma: f64) -> Limit<C64> {
    let d = kd.cos() - phi.cos();
    if d.norm() < 1e-300 {
        return Limit::Divergent;
    }
    Limit::Finite(c64(delta_omega, -gamma) + gamma1d * phi.sin() / d)
}

/// Real frequency shift ω(K) − ω0, in units of the single-atom half-linewidth
/// γ0, of a perpendicularly polarised infinite dipole chain in free space
/// with period d (given as d/λ0) at Bloch phase K·d.
pub fn dispersion_freespace(kd: f64, d_over_lambda0: f64) -> f64 {
    assert!(d_over_lambda0 > 0.0, "period must be positive");
    let p = 2.0 * PI * d_over_lambda0;
    let mut sum = C64::new(0.0, 0.0);
    for sign in [1.0, -1.0] {
        let theta = p + sign * kd;
        // ln(1 − ξ) = −Li_1(ξ)
        sum += polylog::li3(theta) - I * p * polylog::li2(theta) - p * p * polylog::li(1, theta);
    }
    1.5 / (p * p * p) * sum.re
}

/// Polariton dispersion of a chain with directional coupling, ξ = γ←/γ→:
/// ω(K) = γ1D/(1+ξ) [−cot((Kd−φ)/2) + ξ cot((Kd+φ)/2)].
pub fn dispersion_chiral(kd: f64, xi: f64, phi: f64, gamma1d: f64) -> Limit<f64> {
    assert!(xi >= 0.0, "asymmetry must be ≥ 0");
    let a = 0.5 * (kd - phi);
    let b = 0.5 * (kd + phi);
    let pole = |x: f64| x.sin().abs() < 1e-14;
    if xi.is_infinite() {
        return if pole(b) { Limit::Divergent } else { Limit::Finite(gamma1d / b.tan()) };
    }
    let right = if pole(a) { return Limit::Divergent } else { -1.0 / a.tan() };
    let left = if xi == 0.0 {
        0.0
    } else if pole(b) {
        return Limit::Divergent;
    } else {
        xi / b.tan()
    };
    Limit::Finite(gamma1d / (1.0 + xi) * (right + left))
}

/// Band-gap and Bragg quantities of a periodic chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandInfo {
    /// Polariton gap edges (lower, upper); `None` at φ a multiple of π.
    pub gap: Option<(f64, f64)>,
    /// Half-width of the Bragg gap, √(2γ1D ω0/π), in the units of γ1D.
    pub delta_bragg: Option<f64>,
    /// Array size beyond which the Bragg Lorentzian saturates, (1/m)√(ω0/γ1D).
    pub n_star: Option<f64>,
}

/// Gap edges −γ1D tan(φ/2), −γ1D cot(φ/2) and, when γ1D/ω0 > 0 is given,
/// the Bragg half-width and saturation size for Bragg order m = round(φ/π) (≥ 1).
pub fn band_and_bragg(phi: f64, gamma1d: f64, gamma_over_omega0: f64) -> Result<BandInfo> {
    if gamma1d <= 0.0 {
        return Err(invalid("gamma1d", "must be > 0"));
    }
    if gamma_over_omega0 < 0.0 {
        return Err(invalid("gamma_over_omega0", "must be ≥ 0"));
    }
    let half = 0.5 * phi;
    let gap = if phi.sin().abs() < 1e-12 {
        None
    } else {
        let (e1, e2) = (-gamma1d * half.tan(), -gamma1d / half.tan());
        Some((e1.min(e2), e1.max(e2)))
    };
    let (delta_bragg, n_star) = if gamma_over_omega0 > 0.0 {
        let m = (phi / PI).round().max(1.0);
        (Some(gamma1d * (2.0 / (PI * gamma_over_omega0)).sqrt()), Some((1.0 / gamma_over_omega0).sqrt() / m))
    } else {
        (None, None)
    };
    if gap.is_none() && delta_bragg.is_none() {
        return Err(Error::BraggDegenerate(phi.sin().abs()));
    }
    Ok(BandInfo { gap, delta_bragg, n_star })
}

/// Decay rate of the ν-th darkest mode of a long, dense chain:
/// γ1D π² φ² ν²/(8N³).
pub fn subradiant_estimate(nu: usize, n: usize, phi: f64, gamma1d: f64) -> f64 {
    let nu = nu as f64;
    let n = n as f64;
    gamma1d * PI * PI * phi * phi * nu * nu / (8.0 * n * n * n)
}
