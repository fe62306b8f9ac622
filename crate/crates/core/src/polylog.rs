//! Polylogarithms Li_s(e^{iθ}) on the unit circle for s = 1, 2, 3.
//!
//! The defining series Σ z^k/k^s converges only algebraically on |z| = 1,
//! so it is accelerated with the Euler transform
//!
//!   Li_s(z) = z/(1−z) Σ_{k≥0} w^k e_k,   w = −z/(1−z),
//!
//! where e_k = Σ_j C(k,j)(−1)^j/(j+1)^s is the k-th forward difference of
//! 1/n^s, evaluated in the cancellation-free form e_k = h_{s−1}(1, 1/2, …,
//! 1/(k+1))/(k+1) with h the complete homogeneous symmetric polynomial.
//! On |z| = 1, |w| = 1/(2 sin(θ/2)) ≤ 1/√2 for |θ| ≥ π/2; smaller angles are
//! folded into that range with the duplication formula
//! Li_s(z) = 2^{1−s} Li_s(z²) − Li_s(−z).

use std::f64::consts::PI;

use crate::{c64, C64};

/// Riemann ζ(2).
pub const ZETA2: f64 = PI * PI / 6.0;
/// Riemann ζ(3) (Apéry's constant).
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

const MAX_TERMS: usize = 400;
const TOL: f64 = 1e-16;

/// Li_s(e^{iθ}) for s ∈ {1, 2, 3}. Li_1 diverges at θ = 0 (returns +∞ real part).
pub fn li(s: u32, theta: f64) -> C64 {
    assert!((1..=3).contains(&s), "polylog order {s} not supported");
    let theta = wrap(theta);
    if s == 1 {
        if theta == 0.0 {
            return c64(f64::INFINITY, 0.0);
        }
        let z = C64::from_polar(1.0, theta);
        return -(C64::new(1.0, 0.0) - z).ln();
    }
    if theta == 0.0 {
        return c64(if s == 2 { ZETA2 } else { ZETA3 }, 0.0);
    }
    if theta.abs() >= PI / 2.0 {
        return euler(s, theta);
    }
    let scale = 2f64.powi(1 - s as i32);
    li(s, 2.0 * theta) * scale - euler(s, wrap(theta + PI))
}

/// Li_2(e^{iθ}).
pub fn li2(theta: f64) -> C64 {
    li(2, theta)
}

/// Li_3(e^{iθ}).
pub fn li3(theta: f64) -> C64 {
    li(3, theta)
}

/// Direct partial sum Σ_{k=1}^{terms} e^{ikθ}/k^s (reference only; converges slowly).
pub fn li_series(s: u32, theta: f64, terms: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    // Sum from the tail so small terms are not swamped.
    for k in (1..=terms).rev() {
        let kf = k as f64;
        acc += C64::from_polar(1.0, kf * theta) / kf.powi(s as i32);
    }
    acc
}

/// Map θ into (−π, π].
fn wrap(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

fn euler(s: u32, theta: f64) -> C64 {
    let z = C64::from_polar(1.0, theta);
    let one = C64::new(1.0, 0.0);
    let pre = z / (one - z);
    let w = -pre;
    let mut wk = one;
    let mut sum = C64::new(0.0, 0.0);
    // Running harmonic sums H_{k+1} and H^{(2)}_{k+1}.
    let (mut h1, mut h2) = (0.0, 0.0);
    for k in 0..MAX_TERMS {
        let n = (k + 1) as f64;
        h1 += 1.0 / n;
        h2 += 1.0 / (n * n);
        let e = match s {
            2 => h1 / n,
            _ => 0.5 * (h1 * h1 + h2) / n,
        };
        let term = wk * e;
        sum += term;
        if term.norm() < TOL * sum.norm() {
            break;
        }
        wk *= w;
    }
    pre * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_at_one() {
        assert!((li2(0.0).re - ZETA2).abs() < 1e-15);
        assert!((li3(0.0).re - ZETA3).abs() < 1e-15);
        // ζ(3) from the alternating value Li_3(−1) = −(3/4) ζ(3).
        assert!((li3(PI).re + 0.75 * ZETA3).abs() < 1e-14);
        assert!((li2(PI).re + 0.5 * ZETA2).abs() < 1e-14);
    }

    #[test]
    fn clausen_closed_forms() {
        for i in 1..200 {
            let t = 2.0 * PI * i as f64 / 200.0;
            let v2 = li2(t);
            let v3 = li3(t);
            let re2 = ZETA2 - t * (2.0 * PI - t) / 4.0;
            let im3 = (t.powi(3) - 3.0 * PI * t * t + 2.0 * PI * PI * t) / 12.0;
            assert!((v2.re - re2).abs() < 1e-12, "Re Li2 at {t}: {} vs {re2}", v2.re);
            assert!((v3.im - im3).abs() < 1e-12, "Im Li3 at {t}: {} vs {im3}", v3.im);
        }
    }

    #[test]
    fn matches_direct_series() {
        for &t in &[0.3, 1.0, 2.0, 3.0, -0.7, 1e-3] {
            for s in 2..=3 {
                let d = li_series(s, t, 100_000);
                // Tail of the series is bounded by ~1/(N^s |1−z|).
                let tail = 1.0 / (1e5f64.powi(s as i32) * (2.0 * (t / 2.0).sin()).abs());
                assert!((li(s, t) - d).norm() < tail + 1e-12, "s={s} θ={t}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        for &t in &[0.1, 0.9, 2.5] {
            for s in 1..=3 {
                assert!((li(s, -t) - li(s, t).conj()).norm() < 1e-14);
            }
        }
    }
}
