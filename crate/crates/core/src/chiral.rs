//! Chiral (directional) coupling: emission rates from the transition
//! polarisation, one-way transmission and photon correlations of N closely
//! spaced atoms in a fully chiral waveguide.
//!
//! With γ← = 0 photons pass the atoms one by one, so the correlated part of a
//! transmitted pair can be propagated atom by atom. At resonance the
//! single-atom pair kernel is separable, f(ω′)f(ω) with f(ω) = 1/(ω² + Γ²),
//! Γ = γ→ + γ, and the uncorrelated pair picks up y(ω) = t(ω)t(−ω) =
//! 1 − 4γγ→ f(ω) per atom. Every frequency integral then reduces to
//! ∫ dω/2π f^m = C(2m−2, m−1)/(2·4^{m−1}Γ^{2m−1}), so g²(0) follows from a
//! short recursion over rational numbers. The same recursion has a closed
//! generating function, which the contour method evaluates numerically.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::invalid;
use crate::modes::Coupling;
use crate::spectra1d::atom_rt;
use crate::{c64, Error, Limit, Result, C64};

/// Directional rates (γ→, γ←) of a transition with circular-polarisation
/// degree s ∈ [−1, 1]: γ1D(1 ± |s|)²/(2(1 + s²)), summing to γ1D. Positive s
/// favours forward emission, negative s backward.
pub fn directional_rates(s: f64, gamma1d: f64) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(invalid("s", "polarisation degree must lie in [-1, 1]"));
    }
    if !(gamma1d >= 0.0) {
        return Err(invalid("gamma1d", "must be ≥ 0"));
    }
    let a = s.abs();
    let norm = gamma1d / (2.0 * (1.0 + s * s));
    let (strong, weak) = (norm * (1.0 + a).powi(2), norm * (1.0 - a).powi(2));
    Ok(if s >= 0.0 { (strong, weak) } else { (weak, strong) })
}

/// Asymmetry ξ = γ←/γ→ implied by a polarisation degree (for s ≥ 0).
pub fn asymmetry(s: f64) -> f64 {
    let a = s.abs();
    (1.0 - a).powi(2) / (1.0 + a).powi(2)
}

/// Transmission through N fully chiral atoms at one point: t₁^N.
pub fn chiral_chain_t(n: usize, omega: f64, coupling: &Coupling) -> Result<C64> {
    coupling.validate()?;
    if coupling.gamma_left != 0.0 {
        return Err(invalid("gamma_left", "one-way transmission needs γ← = 0"));
    }
    let t1 = atom_rt(omega, coupling).t_fwd;
    Ok(t1.powu(n as u32))
}

/// g²(0) behind one resonantly driven chiral atom:
/// (γ + γ→)²(γ − 3γ→)²/(γ − γ→)⁴, divergent (perfect bunching) at γ = γ→.
pub fn g2_single_chiral(gamma_nr: f64, gamma_right: f64) -> Result<Limit<f64>> {
    check_rates(gamma_nr, gamma_right)?;
    let (g, r) = (gamma_nr, gamma_right);
    let den = (g - r).powi(4);
    if den == 0.0 {
        return Ok(Limit::Divergent);
    }
    Ok(Limit::Finite((g + r).powi(2) * (g - 3.0 * r).powi(2) / den))
}

fn check_rates(gamma_nr: f64, gamma_right: f64) -> Result<()> {
    if !(gamma_right > 0.0) || !gamma_right.is_finite() {
        return Err(invalid("gamma_right", "must be > 0"));
    }
    if !(gamma_nr >= 0.0) || !gamma_nr.is_finite() {
        return Err(invalid("gamma_nr", "must be ≥ 0"));
    }
    Ok(())
}

/// Evaluation route for the N-atom correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChiralMethod {
    /// Exact pair recursion (rational or double arithmetic, see [`Precision`]).
    Residue,
    /// Coefficient extraction from the generating function on a circle.
    Contour,
    /// Single dominant pole, valid for γ ≫ γ→.
    Asymptotic,
}

/// Arithmetic used by the residue route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    /// IEEE double; loses accuracy to cancellation for large N.
    Double,
    /// Exact rational arithmetic.
    #[default]
    Extended,
}

impl Precision {
    /// Parse `double` / `extended`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(invalid("precision", format!("expected double or extended, got `{other}`"))),
        }
    }

    /// Read `WQED_PRECISION`, defaulting to extended when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var("WQED_PRECISION") {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Precision::default()),
        }
    }
}

/// Largest N accepted by the exact residue route.
pub const RESIDUE_MAX_N: usize = 400;

/// Resonant g²(0) request for N fully chiral atoms at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralG2Request {
    pub n_atoms: usize,
    pub gamma_right: f64,
    pub gamma_nr: f64,
    pub method: ChiralMethod,
    pub precision: Precision,
}

impl ChiralG2Request {
    pub fn new(n_atoms: usize, gamma_right: f64, gamma_nr: f64, method: ChiralMethod) -> Self {
        Self { n_atoms, gamma_right, gamma_nr, method, precision: Precision::default() }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    fn validate(&self) -> Result<f64> {
        if self.n_atoms == 0 {
            return Err(invalid("n_atoms", "at least one atom is required"));
        }
        check_rates(self.gamma_nr, self.gamma_right)?;
        Ok(self.gamma_nr / self.gamma_right)
    }
}

/// g²(0) of resonant light transmitted through N fully chiral atoms.
pub fn g2_chain_chiral(req: &ChiralG2Request) -> Result<Limit<f64>> {
    let ratio = req.validate()?;
    Ok(sweep(req.n_atoms, ratio, req.method, req.precision)?.pop().expect("n_atoms ≥ 1"))
}

/// g²(0) for N = 1..=n_max in one pass (the recursion is shared).
pub fn g2_chiral_sweep(n_max: usize, gamma_right: f64, gamma_nr: f64, method: ChiralMethod, precision: Precision) -> Result<Vec<Limit<f64>>> {
    let req = ChiralG2Request { n_atoms: n_max, gamma_right, gamma_nr, method, precision };
    let ratio = req.validate()?;
    sweep(n_max, ratio, method, precision)
}

fn sweep(n_max: usize, ratio: f64, method: ChiralMethod, precision: Precision) -> Result<Vec<Limit<f64>>> {
    if ratio == 1.0 {
        // A single atom already blocks coherent transmission.
        return Ok(vec![Limit::Divergent; n_max]);
    }
    match method {
        ChiralMethod::Asymptotic => {
            if ratio <= 0.0 {
                return Err(invalid("gamma_nr", "the asymptotic form needs γ > 0 (and is meant for γ ≫ γ→)"));
            }
            Ok((1..=n_max).map(|n| Limit::Finite(asymptotic(n, ratio))).collect())
        }
        ChiralMethod::Contour => Ok((1..=n_max).map(|n| Limit::Finite(contour(n, ratio))).collect()),
        ChiralMethod::Residue => {
            if n_max > RESIDUE_MAX_N {
                return Err(Error::ResidueOverflow { n: n_max });
            }
            let values = match precision {
                Precision::Extended => recursion_exact(n_max, ratio),
                Precision::Double => recursion_double(n_max, ratio),
            };
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| if v.is_finite() { Ok(Limit::Finite(v)) } else { Err(Error::ResidueOverflow { n: i + 1 }) })
                .collect()
        }
    }
}

/// (1 − (√2γ→/2γ) e^{4Nγ→/γ})².
fn asymptotic(n: usize, ratio: f64) -> f64 {
    (1.0 - std::f64::consts::SQRT_2 / (2.0 * ratio) * (4.0 * n as f64 / ratio).exp()).powi(2)
}

/// Bunching threshold N*(γ) = (γ/8γ→)(3 ln 2 + 2 ln(γ/γ→)) of the asymptotic form.
pub fn n_star(gamma_nr: f64, gamma_right: f64) -> Result<f64> {
    check_rates(gamma_nr, gamma_right)?;
    let r = gamma_nr / gamma_right;
    if r <= 0.0 {
        return Err(invalid("gamma_nr", "threshold defined for γ > 0"));
    }
    Ok(r / 8.0 * (3.0 * 2f64.ln() + 2.0 * r.ln()))
}

/// First N (1-based) at which a sweep rises back above 1 after dipping below.
pub fn bunching_crossing(values: &[Limit<f64>]) -> Option<usize> {
    let mut dipped = false;
    for (i, v) in values.iter().enumerate() {
        let g = v.value();
        if g < 1.0 {
            dipped = true;
        } else if dipped {
            return Some(i + 1);
        }
    }
    None
}

/// Recursion coefficients, all dimensionless (γ→ = 1, Γ = 1 + γ):
/// t² = ((γ−1)/(γ+1))², w = 4γ/Γ², p = 8/Γ², V_m = C(2m−2, m−1)/(2·4^{m−1}),
/// Ĵ_k = Σ_j C(k,j)(−w)^j V_{j+1}, Î_k = Σ_j C(k,j)(−w)^j V_{j+2},
/// e_j = −p [t^{2(j−1)} + Σ_{i<j} e_i Î_{j−1−i}],
/// g²_N = (1 + t^{−2N} Σ_j e_j Ĵ_{N−j})².
trait Field: Clone + Zero + One + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> + std::ops::Div<Output = Self> + std::ops::Neg<Output = Self> {
    fn from_f64(x: f64) -> Self;
    fn from_u64(x: u64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Field for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_u64(x: u64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Field for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite rate ratio")
    }
    fn from_u64(x: u64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn recursion<T: Field>(n_max: usize, ratio: f64) -> Vec<f64> {
    let g = T::from_f64(ratio);
    let one = T::one();
    let gam = g.clone() + one.clone();
    let t = (g.clone() - one.clone()) / gam.clone();
    let t2 = t.clone() * t;
    let gam2 = gam.clone() * gam;
    let w = T::from_u64(4) * g / gam2.clone();
    let p = T::from_u64(8) / gam2;

    // V_m for m = 1..=n_max+2:
    // C(2m, m)/C(2m−2, m−1) = 2(2m−1)/m, and 4^m/4^{m−1} = 4.
    let mut v = vec![T::zero(); n_max + 3];
    v[1] = T::from_u64(1) / T::from_u64(2);
    for m in 1..n_max + 2 {
        v[m + 1] = v[m].clone() * T::from_u64(2 * (2 * m as u64 - 1)) / (T::from_u64(m as u64) * T::from_u64(4));
    }
    // Powers (−w)^j and binomial rows.
    let mut negw = vec![T::one(); n_max];
    for j in 1..n_max {
        negw[j] = negw[j - 1].clone() * (-w.clone());
    }
    let mut jhat = Vec::with_capacity(n_max);
    let mut ihat = Vec::with_capacity(n_max);
    // Pascal rows C(k, ·) in field arithmetic (they overflow u64 past k ≈ 67).
    let mut binom: Vec<T> = vec![T::one()];
    for k in 0..n_max {
        if k > 0 {
            let mut next = vec![T::one(); k + 1];
            for j in 1..k {
                next[j] = binom[j - 1].clone() + binom[j].clone();
            }
            binom = next;
        }
        let mut sj = T::zero();
        let mut si = T::zero();
        for j in 0..=k {
            let c = binom[j].clone() * negw[j].clone();
            sj = sj + c.clone() * v[j + 1].clone();
            si = si + c * v[j + 2].clone();
        }
        jhat.push(sj);
        ihat.push(si);
    }

    let mut e: Vec<T> = Vec::with_capacity(n_max);
    let mut t2pow = T::one();
    let mut out = Vec::with_capacity(n_max);
    for j in 1..=n_max {
        let mut acc = t2pow.clone();
        for i in 1..j {
            acc = acc + e[i - 1].clone() * ihat[j - 1 - i].clone();
        }
        e.push(-(p.clone() * acc));
        t2pow = t2pow * t2.clone();
        // Now t2pow = t^{2j}; evaluate g² for N = j.
        let mut corr = T::zero();
        for i in 1..=j {
            corr = corr + e[i - 1].clone() * jhat[j - i].clone();
        }
        let amp = one.clone() + corr / t2pow.clone();
        out.push((amp.clone() * amp).to_f64());
    }
    out
}

fn recursion_exact(n_max: usize, ratio: f64) -> Vec<f64> {
    recursion::<BigRational>(n_max, ratio)
}

fn recursion_double(n_max: usize, ratio: f64) -> Vec<f64> {
    recursion::<f64>(n_max, ratio)
}

/// Coefficient extraction from the generating function
/// F(z) = Σ_N z^N Σ_j e_j Ĵ_{N−j}
///      = −p z / ((1 − t²z)(1 + 4z/((1−z)κ̂(1+κ̂)))) · 1/(2(1−z)κ̂),
/// κ̂(z)² = 1 + wz/(1−z), on the circle |z| = 1 − 1/(2N), where F is analytic.
fn contour(n: usize, ratio: f64) -> f64 {
    let gam = 1.0 + ratio;
    let t2 = ((ratio - 1.0) / gam).powi(2);
    let w = 4.0 * ratio / (gam * gam);
    let p = 8.0 / (gam * gam);
    let radius = 1.0 - 0.5 / n as f64;
    let m = (80 * n).max(256);
    let f = |z: C64| {
        let one = c64(1.0, 0.0);
        let k = (one + w * z / (one - z)).sqrt();
        let inner = one + 4.0 * z / (gam * gam * (one - z) * k * (one + k));
        -p * z / ((one - t2 * z) * inner) / (2.0 * (one - z) * k)
    };
    let mut acc = c64(0.0, 0.0);
    for j in 0..m {
        let theta = 2.0 * PI * j as f64 / m as f64;
        let z = C64::from_polar(radius, theta);
        acc += f(z) * C64::from_polar(radius.powi(-(n as i32)), -(n as f64) * theta);
    }
    let coeff = acc / m as f64;
    let amp = 1.0 + coeff / t2.powi(n as i32);
    amp.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_sum_to_total() {
        for &s in &[-1.0, -0.4, 0.0, 0.3, 1.0] {
            let (r, l) = directional_rates(s, 2.0).unwrap();
            assert!((r + l - 2.0).abs() < 1e-14);
        }
        assert_eq!(directional_rates(1.0, 1.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn single_atom_fixed_points() {
        assert_eq!(g2_single_chiral(0.0, 1.0).unwrap(), Limit::Finite(9.0));
        assert_eq!(g2_single_chiral(3.0, 1.0).unwrap(), Limit::Finite(0.0));
        assert!(g2_single_chiral(1.0, 1.0).unwrap().is_divergent());
    }

    #[test]
    fn known_small_chains() {
        let r = |n, g| g2_chain_chiral(&ChiralG2Request::new(n, 1.0, g, ChiralMethod::Residue)).unwrap().value();
        assert!((r(2, 5.0) - 0.140625).abs() < 1e-14);
        assert!((r(2, 3.0) - 4.0).abs() < 1e-13);
        assert!((r(3, 3.0) - 56.25).abs() < 1e-11);
    }

    #[test]
    fn precision_parsing() {
        assert_eq!(Precision::parse("Double").unwrap(), Precision::Double);
        assert!(Precision::parse("quad").is_err());
    }

    #[test]
    fn crossing_detection() {
        let v: Vec<Limit<f64>> = [1.2, 0.5, 0.9, 1.1].iter().map(|&x| Limit::Finite(x)).collect();
        assert_eq!(bunching_crossing(&v), Some(4));
    }
}
