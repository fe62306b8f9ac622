//! Infinite square lattice of dipoles (polarised along x) illuminated at
//! normal incidence: interaction constant, collective linewidth and Lamb
//! shift, and the reflection of the resulting atomic mirror.
//!
//! Lengths are in units of the resonant wavelength λ0, so k0 = 2π. The
//! interaction constant is the field that all other dipoles produce at one
//! site, C = Σ_{R≠0} 4πk² G_xx(R) + 2ik³/3, where the last term is the
//! radiative self-field. With no open diffraction orders Im C = 2πk/a²
//! exactly; the real part is a conditionally convergent lattice sum.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::invalid;
use crate::{c64, Error, Result, C64, I};

/// 4ζ(3/2)β(3/2): Σ_{(m,n)≠0} (m² + n²)^{−3/2}.
pub const LATTICE_SUM_3: f64 = 4.0 * 2.612_375_348_685_488 * 0.864_502_653_461_202;
/// 4ζ(1/2)β(1/2): analytic continuation of Σ_{(m,n)≠0} (m² + n²)^{−1/2}.
pub const LATTICE_SUM_1: f64 = 4.0 * -1.460_354_508_809_586_8 * 0.667_691_457_189_609_1;

/// How the lattice sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeMethod {
    /// Real-space sum with a Gaussian taper, extrapolated in the taper
    /// radius. `radius` is the base radius in units of λ0 (default
    /// max(60a, 10λ0)).
    Direct { radius: Option<f64> },
    /// Reciprocal-lattice sum evaluated slightly off the plane, with the
    /// singular self-field subtracted and the plane limit extrapolated.
    Reciprocal,
    /// Long-wavelength form 2πik/a² + S/2 + 3k²S′/4, accurate to O(k⁴a)
    /// (relative error ≈ 0.3% at a = 0.1λ0, growing quickly beyond).
    ClosedForm,
}

/// Square lattice of identical two-level atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Lattice constant a/λ0, in (0, 1).
    pub spacing_over_lambda: f64,
    /// Free-space decay rate of one atom.
    pub gamma0: f64,
    /// Non-radiative decay rate.
    pub gamma_nr: f64,
    pub method: LatticeMethod,
}

impl LatticeSpec {
    pub fn new(spacing_over_lambda: f64, gamma0: f64, gamma_nr: f64, method: LatticeMethod) -> Self {
        Self { spacing_over_lambda, gamma0, gamma_nr, method }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.spacing_over_lambda;
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid("spacing_over_lambda", "need 0 < a/λ0 < 1 (no open diffraction orders)"));
        }
        if !(self.gamma0 > 0.0) || !self.gamma0.is_finite() {
            return Err(invalid("gamma0", "must be > 0"));
        }
        if !(self.gamma_nr >= 0.0) || !self.gamma_nr.is_finite() {
            return Err(invalid("gamma_nr", "must be ≥ 0"));
        }
        if let LatticeMethod::Direct { radius: Some(r) } = self.method {
            if !(r > 0.0) {
                return Err(invalid("radius", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Static lattice sum S = Σ_{R≠0} 1/R³ = 9.0336…/a³.
pub fn lattice_s(a: f64) -> f64 {
    LATTICE_SUM_3 / a.powi(3)
}

/// Regularised lattice sum S′ = "Σ_{R≠0} 1/R" = −3.9003…/a.
pub fn lattice_s_prime(a: f64) -> f64 {
    LATTICE_SUM_1 / a
}

/// S by explicit summation: Σ_{0<R≤ρ} 1/R³ plus the continuum tail 2π/(a²ρ).
pub fn lattice_s_numeric(a: f64, cutoff_sites: usize) -> f64 {
    let m = cutoff_sites as i64;
    let rho2 = (m * m) as f64;
    let sum: f64 = (-m..=m)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in -m..=m {
                let r2 = (i * i + j * j) as f64;
                if r2 > 0.0 && r2 <= rho2 {
                    row += r2.powf(-1.5);
                }
            }
            row
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    (sum + 2.0 * PI / m as f64) / a.powi(3)
}

/// S′ from the Gaussian-smoothed sum Σ e^{−R²/ρ²}/R − π^{3/2}ρ/a², whose
/// remainder falls off as ρ⁻², extrapolated over ρ and 2ρ.
pub fn lattice_s_prime_numeric(a: f64, rho_sites: f64) -> f64 {
    let smoothed = |rho: f64| {
        let m = (7.0 * rho).ceil() as i64;
        let sum: f64 = (-m..=m)
            .into_par_iter()
            .map(|i| {
                let mut row = 0.0;
                for j in -m..=m {
                    let r2 = (i * i + j * j) as f64;
                    if r2 > 0.0 {
                        row += (-r2 / (rho * rho)).exp() / r2.sqrt();
                    }
                }
                row
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        sum - PI.powf(1.5) * rho
    };
    let (v1, v2) = (smoothed(rho_sites), smoothed(2.0 * rho_sites));
    (4.0 * v2 - v1) / 3.0 / a
}

fn wavenumber(k_over_k0: f64) -> f64 {
    2.0 * PI * k_over_k0
}

/// Interaction constant C at probe wavenumber k = k_over_k0 · 2π/λ0.
pub fn interaction_constant(spec: &LatticeSpec, k_over_k0: f64) -> Result<C64> {
    spec.validate()?;
    if !(k_over_k0 > 0.0) {
        return Err(invalid("k_over_k0", "must be > 0"));
    }
    let a = spec.spacing_over_lambda;
    let k = wavenumber(k_over_k0);
    if k * a >= 2.0 * PI {
        return Err(invalid("k_over_k0", "first diffraction order is open at this frequency"));
    }
    match spec.method {
        LatticeMethod::ClosedForm => Ok(closed_form(a, k)),
        LatticeMethod::Reciprocal => Ok(reciprocal(a, k)),
        LatticeMethod::Direct { radius } => direct(a, k, radius.unwrap_or((60.0 * a).max(10.0))),
    }
}

/// The k² coefficient collects k²(1 − x²/r²)/r from the intermediate zone
/// and the k² terms of e^{ikr} in the near-field parts; on the square lattice
/// these add to (3/4)k²/r, i.e. 3k²S′/4.
fn closed_form(a: f64, k: f64) -> C64 {
    c64(0.5 * lattice_s(a) + 0.75 * k * k * lattice_s_prime(a), 2.0 * PI * k / (a * a))
}

/// 4πk² G_xx at in-plane separation (x, y), r = |(x, y)|.
fn field_xx(x: f64, r: f64, k: f64) -> C64 {
    let (r2, r3) = (r * r, r * r * r);
    let near = c64(k * k / r - 1.0 / r3, k / r2);
    let cross = c64(-k * k / r + 3.0 / r3, -3.0 * k / r2);
    (I * k * r).exp() * (near + cross * (x * x / r2))
}

/// Gaussian-tapered real-space sums at taper radii T, 2T, 4T, 8T (T = R/5)
/// with Richardson elimination of the T⁻², T⁻⁴, T⁻⁶ terms.
fn direct(a: f64, k: f64, radius: f64) -> Result<C64> {
    let tapered = |taper: f64| -> C64 {
        let cutoff = 6.0 * taper;
        let m = (cutoff / a).ceil() as i64;
        let rows: Vec<C64> = (-m..=m)
            .into_par_iter()
            .map(|i| {
                let x = i as f64 * a;
                let mut row = c64(0.0, 0.0);
                for j in -m..=m {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let y = j as f64 * a;
                    let r = (x * x + y * y).sqrt();
                    if r > cutoff {
                        continue;
                    }
                    row += field_xx(x, r, k) * (-(r / taper).powi(2)).exp();
                }
                row
            })
            .collect();
        rows.iter().sum::<C64>() + I * (2.0 * k.powi(3) / 3.0)
    };
    let base = radius / 5.0;
    let mut table: Vec<C64> = (0..4).map(|j| tapered(base * 2f64.powi(j))).collect();
    let mut previous = table[0];
    for factor in [4.0, 16.0, 64.0] {
        previous = *table.last().unwrap();
        table = table.windows(2).map(|w| (w[1] * factor - w[0]) / (factor - 1.0)).collect();
    }
    let value = table[0];
    let change = (value - previous).norm() / value.norm();
    if !value.is_finite() || change > 1e-4 {
        return Err(Error::Convergence { achieved: change, estimate: value });
    }
    Ok(value)
}

/// Σ over reciprocal vectors b = (2π/a)(m, n) of the plane-wave expansion at
/// height z, minus the singular self-field −1/z³ + k²/(2z), at three heights
/// z/a ∈ {0.02, 0.01, 0.005}, extrapolated to z → 0 (error series in z).
fn reciprocal(a: f64, k: f64) -> C64 {
    let at = |z: f64| -> C64 {
        let g = 2.0 * PI / a;
        let nmax = (40.0 / (g * z)).ceil() as i64 + 2;
        let area = a * a;
        let rows: Vec<f64> = (-nmax..=nmax)
            .into_par_iter()
            .map(|m| {
                let bx = m as f64 * g;
                let mut row = 0.0;
                for n in -nmax..=nmax {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let by = n as f64 * g;
                    let kappa = (bx * bx + by * by - k * k).sqrt();
                    row += 2.0 * PI / (kappa * area) * (k * k - bx * bx) * (-kappa * z).exp();
                }
                row
            })
            .collect();
        let evanescent: f64 = rows.iter().sum();
        let propagating = I * (2.0 * PI * k / area) * (I * k * z).exp();
        propagating + evanescent - (-1.0 / z.powi(3) + k * k / (2.0 * z))
    };
    let v: Vec<C64> = [0.02, 0.01, 0.005].iter().map(|&s| at(s * a)).collect();
    let r1 = [v[1] * 2.0 - v[0], v[2] * 2.0 - v[1]];
    let re = (r1[1] * 4.0 - r1[0]) / 3.0;
    // The propagating order fixes Im C exactly; keep it free of extrapolation noise.
    c64(re.re, 2.0 * PI * k / (a * a))
}

/// Collective Lamb shift ω̃0 − ω0 and radiative rate γ2D of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveParams {
    pub lamb_shift: f64,
    pub gamma_2d: f64,
    pub interaction: C64,
}

/// ω̃0 − ω0 = −(3γ0/2k³) Re C and γ2D = (3γ0/2k³) Im C = γ0·3λ0²/(4πa²).
pub fn collective_params(spec: &LatticeSpec) -> Result<CollectiveParams> {
    let c = interaction_constant(spec, 1.0)?;
    let pre = prefactor(spec.gamma0, wavenumber(1.0));
    Ok(CollectiveParams { lamb_shift: -pre * c.re, gamma_2d: pre * c.im, interaction: c })
}

fn prefactor(gamma0: f64, k: f64) -> f64 {
    3.0 * gamma0 / (2.0 * k.powi(3))
}

/// Small-spacing collective rate γ0·3λ0²/(4πa²).
pub fn gamma_2d_small_spacing(spacing_over_lambda: f64, gamma0: f64) -> f64 {
    gamma0 * 3.0 / (4.0 * PI * spacing_over_lambda * spacing_over_lambda)
}

/// Normal-incidence amplitudes of the atomic mirror at detuning ω − ω0:
/// r = iγ2D/(ω̃0 − ω − i(γ_nr + γ2D)), t = 1 + r.
pub fn metasurface_rt(params: &CollectiveParams, gamma_nr: f64, detuning: f64) -> (C64, C64) {
    let r = I * params.gamma_2d / c64(params.lamb_shift - detuning, -(gamma_nr + params.gamma_2d));
    (r, 1.0 + r)
}

/// The same amplitudes from the dressed polarisability α̃ = α/(1 − Cα) with
/// the bare α = (3γ0/2k³)/(ω0 − ω − iγ_nr): r = i Im C · α̃ (C held at ω0).
pub fn metasurface_rt_polarizability(params: &CollectiveParams, gamma0: f64, gamma_nr: f64, detuning: f64) -> (C64, C64) {
    let pre = prefactor(gamma0, wavenumber(1.0));
    let alpha = pre / c64(-detuning, -gamma_nr);
    let dressed = alpha / (1.0 - params.interaction * alpha);
    let r = I * params.interaction.im * dressed;
    (r, 1.0 + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_constants() {
        assert!((LATTICE_SUM_3 - 9.0336).abs() < 1e-4);
        assert!((LATTICE_SUM_1 + 3.9003).abs() < 1e-4);
        assert!((lattice_s_numeric(1.0, 400) - LATTICE_SUM_3).abs() < 1e-4);
        assert!((lattice_s_prime_numeric(1.0, 20.0) - LATTICE_SUM_1).abs() < 1e-3);
    }

    #[test]
    fn closed_form_imaginary_part() {
        let spec = LatticeSpec::new(0.3, 1.0, 0.0, LatticeMethod::ClosedForm);
        let c = interaction_constant(&spec, 1.0).unwrap();
        assert!((c.im - 2.0 * PI * 2.0 * PI / 0.09).abs() < 1e-9);
    }

    #[test]
    fn self_field_expansion() {
        // e^{ikz}(k²/z + ik/z² − 1/z³) → −1/z³ + k²/(2z) + 2ik³/3.
        let (k, z) = (2.0, 1e-3);
        let full = (I * k * z).exp() * c64(k * k / z - 1.0 / z.powi(3), k / (z * z));
        let rem = full - (-1.0 / z.powi(3) + k * k / (2.0 * z));
        assert!((rem - I * (2.0 * k.powi(3) / 3.0)).norm() < 1e-2);
    }

    #[test]
    fn lossless_mirror() {
        let p = CollectiveParams { lamb_shift: 0.3, gamma_2d: 2.0, interaction: c64(0.0, 0.0) };
        let (r, t) = metasurface_rt(&p, 0.0, 0.3);
        assert!((r.norm() - 1.0).abs() < 1e-14);
        assert!(t.norm() < 1e-14);
    }
}
