//! Adaptive Gauss–Kronrod quadrature for complex integrands.

use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
///
/// The error is capped by width × largest sample, a bound on the panel's
/// whole contribution; this lets rapidly oscillating but small panels (the
/// compressed tails of a mapped infinite range) be accepted.
fn panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut big = fc.norm();
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let (fl, fr) = (f(c - x), f(c + x));
        big = big.max(fl.norm()).max(fr.norm());
        let s = fl + fr;
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm().min(2.0 * h * big))
}

/// ∫_a^b f(x) dx to absolute tolerance `atol` (or relative `rtol` of the
/// running total, whichever is looser). Returns the estimate and its error.
pub(crate) fn integrate<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, atol: f64, rtol: f64) -> (C64, f64) {
    const MAX_PANELS: usize = 20_000;
    let (v, e) = panel(f, a, b);
    // Panels kept as (a, b, value, error); refine the worst one.
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > atol.max(rtol * total.norm()) && panels.len() < MAX_PANELS {
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        if m <= pa || m >= pb {
            // Interval cannot be split further in floating point.
            panels.push((pa, pb, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = panel(f, pa, m);
        let (v2, e2) = panel(f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let total = panels.iter().map(|p| p.2).sum();
    let err = panels.iter().map(|p| p.3).sum();
    (total, err)
}

/// ∫_{−∞}^{∞} f(ω) dω through the map ω = L tan t, with L the characteristic
/// frequency scale of the integrand (pole widths). The integrand must decay
/// at least like 1/ω².
pub(crate) fn integrate_line<F: Fn(f64) -> C64>(f: &F, scale: f64, atol: f64, rtol: f64) -> (C64, f64) {
    let half = std::f64::consts::FRAC_PI_2;
    let g = |t: f64| {
        let c = t.cos();
        f(scale * t.tan()) * (scale / (c * c))
    };
    // Split at the origin so the bulk of the structure sits on panel edges.
    let (a, ea) = integrate(&g, -half, 0.0, 0.5 * atol, rtol);
    let (b, eb) = integrate(&g, 0.0, half, 0.5 * atol, rtol);
    (a + b, ea + eb)
}

/// ∫_{−∞}^{∞} f(ω) e^{−iωτ} dω for τ > 0.
///
/// The window [−W, W] is integrated on the real axis; each tail is rotated
/// onto a vertical line ω = ±W − is (s ≥ 0), where e^{−iωτ} decays like
/// e^{−sτ}. This is exact provided f is analytic for |Re ω| > W, Im ω ≤ 0,
/// and decays at infinity — true for rational kernels once W exceeds the
/// real parts of all poles.
pub(crate) fn fourier_line<F: Fn(C64) -> C64>(f: &F, tau: f64, window: f64, atol: f64, rtol: f64) -> (C64, f64) {
    assert!(tau > 0.0 && window > 0.0);
    let osc = |w: C64| (C64::new(0.0, -tau) * w).exp();
    let (mid, e_mid) = integrate(&|x: f64| f(C64::new(x, 0.0)) * osc(C64::new(x, 0.0)), -window, window, atol / 3.0, rtol);
    // s = σ x/(1 − x) with σ = 1/τ maps s ∈ [0, ∞) onto x ∈ [0, 1).
    let sigma = 1.0 / tau;
    let tail = |edge: f64| {
        move |x: f64| {
            let s = sigma * x / (1.0 - x);
            let jac = sigma / ((1.0 - x) * (1.0 - x));
            let w = C64::new(edge, -s);
            let v = f(w) * osc(w) * jac;
            if v.is_finite() { v } else { C64::new(0.0, 0.0) }
        }
    };
    let (right, e_r) = integrate(&tail(window), 0.0, 1.0, atol / 3.0, rtol);
    let (left, e_l) = integrate(&tail(-window), 0.0, 1.0, atol / 3.0, rtol);
    let i = C64::new(0.0, 1.0);
    (mid - i * right + i * left, e_mid + e_r + e_l)
}
