//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p wqed --test acceptance`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wqed::chiral::{self, ChiralMethod, Precision};
use wqed::lattice2d::{self, LatticeMethod, LatticeSpec};
use wqed::modes::{self, AtomChain, Coupling};
use wqed::protocols::{self, Channel, QubitRegister};
use wqed::spectra1d::{self, EnsembleSpec};
use wqed::twophoton::{self, Geometry, IntegralMethod, PairKind, Scatterer};
use wqed::{Limit, C64};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> AtomChain {
    let mut z = 0.0;
    let phases = (0..n)
        .map(|i| {
            if i > 0 {
                z += rng.random_range(0.05..3.0);
            }
            z
        })
        .collect();
    AtomChain::new(phases).unwrap()
}

/// HWHM of the reflectance by bisection on R(ω) = R(0)/2, ω > 0.
fn hwhm(n: usize) -> f64 {
    let chain = AtomChain::dicke(n);
    let c = Coupling::symmetric(1.0, 0.0);
    let refl = |w: f64| spectra1d::chain_rt(&chain, &c, w).unwrap().reflectance();
    let half = 0.5 * refl(0.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    while refl(hi) > half {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if refl(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c1_dicke_linewidth() -> Check {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [1usize, 2, 5, 10] {
        let w = hwhm(n);
        worst = worst.max((w - n as f64).abs() / n as f64);
        parts.push(format!("N={n}: {w:.6}"));
    }
    ensure(worst < 0.01, format!("{} (worst rel. dev {worst:.2e})", parts.join(", ")))
}

fn c2_trace() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=40);
        let chain = random_chain(&mut rng, n);
        let xi = rng.random_range(0.0..3.0);
        let c = Coupling::chiral(rng.random_range(0.1..2.0), rng.random_range(0.0..1.0), xi);
        let h = modes::effective_hamiltonian(&chain, &c, None).unwrap();
        let m = modes::eigenmodes(&h).unwrap();
        let sum: C64 = m.eigenvalues.iter().sum();
        let expected = C64::new(0.0, -(n as f64) * (c.gamma1d + c.gamma_nr));
        worst = worst.max((sum - expected).norm() / (1e-9 * n as f64));
    }
    ensure(worst <= 1.0, format!("max |Σω − tr H|/(1e−9·N) = {worst:.3e} over 100 arrays"))
}

fn c3_subradiant() -> Check {
    let ns = [20usize, 30, 50, 70, 100, 140, 200];
    let c = Coupling::symmetric(1.0, 0.0);
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let h = modes::effective_hamiltonian(&AtomChain::periodic(n, 0.1), &c, None).unwrap();
            let (w, _) = modes::eigenmodes(&h).unwrap().darkest();
            ((n as f64).ln(), (-w.im).ln())
        })
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure((slope + 3.0).abs() <= 0.1, format!("fitted exponent {slope:.4} for N ∈ [20, 200], φ = 0.1"))
}

fn c4_transfer_vs_green() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let chain = random_chain(&mut rng, n);
        let c = Coupling::symmetric(rng.random_range(0.1..2.0), rng.random_range(0.0..1.0));
        let w = rng.random_range(-5.0..5.0);
        let a = spectra1d::chain_rt(&chain, &c, w).unwrap();
        let b = spectra1d::rt_from_green(&chain, &c, w).unwrap();
        worst = worst.max((a.r - b.r).norm()).max((a.t_fwd - b.t_fwd).norm());
    }
    ensure(worst < 1e-10, format!("max |Δr|, |Δt| = {worst:.3e} over 500 cases"))
}

fn c5_tridiagonal() -> Check {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 3, 5, 10, 20, 35, 50] {
        for phi in [0.3, 1.0, PI / 2.0, 2.5] {
            let h = modes::effective_hamiltonian(&AtomChain::periodic(n, phi), &Coupling::symmetric(1.0, 0.0), None).unwrap();
            let inv = modes::tridiagonal_inverse_oracle(n, phi, 1.0).unwrap();
            let defect = (&h * &inv - DMatrix::<C64>::identity(n, n)).iter().map(|x| x.norm()).fold(0.0, f64::max);
            worst = worst.max(defect);
        }
    }
    ensure(worst < 1e-12, format!("max |H·H̃ − 1| = {worst:.3e} for N ≤ 50"))
}

fn c6_bragg() -> Check {
    let b = modes::band_and_bragg(PI, 1.0, 0.03).map_err(|e| e.to_string())?;
    let delta = b.delta_bragg.unwrap() * 0.03;
    let n_star = modes::band_and_bragg(PI, 1.0, 1e-4).map_err(|e| e.to_string())?.n_star.unwrap();
    ensure(
        (delta - 0.1382).abs() <= 1e-4 && (n_star - 100.0).abs() < 1e-9,
        format!("Δ_Bragg/ω0 = {delta:.6}, N* = {n_star}"),
    )
}

fn c7_flux() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let c = Coupling::symmetric(rng.random_range(0.2..2.0), 0.0);
        let eps = rng.random_range(-3.0..3.0);
        let x = rng.random_range(0.0..0.2);
        let f = twophoton::coherent_corrections(eps, x, n, &c).map_err(|e| e.to_string())?;
        worst = worst.max((f.r_coh + f.t_coh + f.i_incoh - 1.0).abs());
    }
    ensure(worst < 1e-6, format!("max |R_coh + T_coh + I_incoh − 1| = {worst:.3e} over 50 cases"))
}

fn c8_bethe() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let g = rng.random_range(0.2..2.0);
        let (w1, w2, w1p) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let w2p = w1 + w2 - w1p;
        let m = twophoton::kernel_dicke(w1p, w2p, w1, w2, n, &Coupling::symmetric(g, 0.0)).map_err(|e| e.to_string())?;
        let b = twophoton::bethe_oracle(w1p, w2p, w1, w2, n, g);
        worst = worst.max((m - b).norm() / b.norm().max(1.0));
    }
    ensure(worst < 1e-10, format!("max relative |M − M_Bethe| = {worst:.3e} over 100 tuples"))
}

fn c9_g2_fixed_points() -> Check {
    let one = Scatterer::Dicke { n: 1, coupling: Coupling::symmetric(1.0, 0.0) };
    let refl1 = twophoton::g2_tau(&one, 0.0, 0.0, Geometry::Reflection, IntegralMethod::Auto).map_err(|e| e.to_string())?.value();
    let refl1_closed = twophoton::g2_zero_resonant(1, 1.0, 0.0, Geometry::Reflection).map_err(|e| e.to_string())?.value();
    let refl2 = twophoton::g2_zero_resonant(2, 1.0, 1e-9, Geometry::Reflection).map_err(|e| e.to_string())?.value();
    let mut trans: f64 = 0.0;
    for n in 1..=6 {
        trans = trans.max(twophoton::g2_zero_resonant(n, 1.0, 1.0, Geometry::Transmission).map_err(|e| e.to_string())?.value().abs());
    }
    ensure(
        refl1.abs() < 1e-12 && refl1_closed == 0.0 && (refl2 - 1.0).abs() < 1e-6 && trans < 1e-12,
        format!("refl N=1: {refl1:.1e} (closed {refl1_closed}); refl N=2, Γ→0: {refl2:.9}; trans Γ=Γ1D: {trans:.1e}"),
    )
}

fn c10_chiral_fixed_points() -> Check {
    let g0 = chiral::g2_single_chiral(0.0, 1.0).map_err(|e| e.to_string())?.value();
    let g3 = chiral::g2_single_chiral(3.0, 1.0).map_err(|e| e.to_string())?.value();
    let div = chiral::g2_single_chiral(1.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for ratio in [0.0, 0.5, 2.0, 5.0, 20.0, 60.0] {
        let res = chiral::g2_chiral_sweep(30, 1.0, ratio, ChiralMethod::Residue, Precision::Extended).map_err(|e| e.to_string())?;
        let con = chiral::g2_chiral_sweep(30, 1.0, ratio, ChiralMethod::Contour, Precision::Extended).map_err(|e| e.to_string())?;
        for (a, b) in res.iter().zip(&con) {
            worst = worst.max((a.value() - b.value()).abs() / a.value().abs().max(1.0));
        }
    }
    ensure(
        (g0 - 9.0).abs() < 1e-12 && g3.abs() < 1e-12 && div == Limit::Divergent && worst < 1e-8,
        format!("γ=0: {g0}, γ=3γ→: {g3:.1e}, γ=γ→: {div}; residue vs contour (N ≤ 30): {worst:.2e}"),
    )
}

fn c11_chiral_threshold() -> Check {
    let n_star = chiral::n_star(130.0, 1.0).map_err(|e| e.to_string())?;
    let sweep = chiral::g2_chiral_sweep(240, 1.0, 130.0, ChiralMethod::Residue, Precision::Extended).map_err(|e| e.to_string())?;
    let crossing = chiral::bunching_crossing(&sweep);
    let g = |n: usize| sweep[n - 1].value();
    let detail = format!(
        "N* = {n_star:.2}; exact curve crosses 1 at N = {crossing:?} (g²(160) = {:.3}, g²(192) = {:.3e}, g²(200) = {:.3e})",
        g(160),
        g(192),
        g(200)
    );
    let ok = (n_star - 192.0).abs() <= 1.0 && crossing.is_some_and(|c| (c as f64 - n_star).abs() <= 2.0);
    ensure(ok, detail)
}

fn c12_pair_states() -> Check {
    let n = 8;
    let c = Coupling::symmetric(1.0, 0.0);
    let h0 = modes::effective_hamiltonian(&AtomChain::dicke(n), &c, None).unwrap();
    let states = twophoton::pair_eigenstates(&h0).map_err(|e| e.to_string())?;
    let brightest = states.iter().map(|s| s.energy).fold(C64::new(0.0, 0.0), |a, e| if e.im < a.im { e } else { a });
    let super_err = (brightest - C64::new(0.0, -((n - 1) as f64))).norm();

    let h = modes::effective_hamiltonian(&AtomChain::periodic(6, 0.4), &c, None).unwrap();
    let mut pole: f64 = 0.0;
    for s in twophoton::pair_eigenstates(&h).map_err(|e| e.to_string())? {
        pole = pole.max(twophoton::sigma_singularity(&h, s.energy).map_err(|e| e.to_string())?);
    }

    let h51 = modes::effective_hamiltonian(&AtomChain::periodic(51, 0.4), &c, None).unwrap();
    let states51 = twophoton::pair_eigenstates(&h51).map_err(|e| e.to_string())?;
    let darkest = states51.iter().max_by(|a, b| a.energy.im.total_cmp(&b.energy.im)).unwrap();
    let fermion_ok = darkest.class.kind == PairKind::Fermionized && darkest.class.score > 0.95;
    ensure(
        super_err < 1e-9 && pole < 1e-8 && fermion_ok,
        format!(
            "superradiant pair ε − (−i(N−1)γ1D) = {super_err:.2e}; max σmin/σmax of Σ at pair energies {pole:.2e}; darkest N=51 pair: {:?}, overlap {:.4}",
            darkest.class.kind, darkest.class.score
        ),
    )
}

fn c13_lattice() -> Check {
    let s = lattice2d::lattice_s_numeric(1.0, 400);
    let sp = lattice2d::lattice_s_prime_numeric(1.0, 20.0);
    let spec = |a: f64, m: LatticeMethod| LatticeSpec::new(a, 1.0, 0.0, m);
    let gamma = |a: f64| lattice2d::collective_params(&spec(a, LatticeMethod::Reciprocal)).unwrap().gamma_2d;
    let (mut lo, mut hi) = (0.3, 0.7);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gamma(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    let mirror: Vec<f64> = [0.2, 0.8]
        .iter()
        .map(|&a| {
            let p = lattice2d::collective_params(&spec(a, LatticeMethod::Reciprocal)).unwrap();
            lattice2d::metasurface_rt(&p, 0.0, 0.0).0.norm()
        })
        .collect();
    // Exact routes against each other everywhere; the long-wavelength form
    // where it applies.
    let mut re_dev: f64 = 0.0;
    let mut im_dev: f64 = 0.0;
    let rel = |x: C64, y: C64| ((x.re - y.re).abs() / y.re.abs(), (x.im - y.im).abs() / y.im.abs());
    for a in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let r = lattice2d::interaction_constant(&spec(a, LatticeMethod::Reciprocal), 1.0).map_err(|e| e.to_string())?;
        let d = lattice2d::interaction_constant(&spec(a, LatticeMethod::Direct { radius: None }), 1.0).map_err(|e| e.to_string())?;
        let (x, y) = rel(d, r);
        re_dev = re_dev.max(x);
        im_dev = im_dev.max(y);
    }
    for a in [0.02, 0.05, 0.1] {
        let r = lattice2d::interaction_constant(&spec(a, LatticeMethod::Reciprocal), 1.0).map_err(|e| e.to_string())?;
        let c = lattice2d::interaction_constant(&spec(a, LatticeMethod::ClosedForm), 1.0).map_err(|e| e.to_string())?;
        let (x, y) = rel(c, r);
        re_dev = re_dev.max(x);
        im_dev = im_dev.max(y);
    }
    ensure(
        (s - 9.03).abs() <= 0.01
            && (sp + 3.90).abs() <= 0.01
            && (crossing - 0.4886).abs() <= 0.002
            && mirror.iter().all(|m| (m - 1.0).abs() <= 1e-3)
            && re_dev <= 0.01
            && im_dev <= 1e-3,
        format!(
            "S·a³ = {s:.5}, S′·a = {sp:.5}, γ2D = γ0 at a/λ0 = {crossing:.5}, |r(ω0)| = {:.6} (0.2λ0), {:.6} (0.8λ0); method spread Re C {re_dev:.2e}, Im C {im_dev:.2e}",
            mirror[0], mirror[1]
        ),
    )
}

/// Caesium D2 line: γ1D/ω0 for Γ1D/Γ0 = 0.007 (Γ0/ω0 ≈ 1.49e−8).
const GAMMA1D_OVER_OMEGA0: f64 = 0.007 * 1.487e-8;

fn bragg_ensemble(xi: f64, grid: &[f64]) -> spectra1d::EnsembleResult {
    let coupling = Coupling::chiral(1.0, 1.0 / 0.007, xi).with_gamma_over_omega0(GAMMA1D_OVER_OMEGA0).with_markovian(false);
    let spec = EnsembleSpec { sites: 2000, fill: 0.3, trials: 200, seed: 14, phase_step: PI * (1.0 + 0.2 / 852.0), coupling };
    spectra1d::ensemble_bragg_reflectance(&spec, grid).unwrap()
}

fn c14_bragg_ensemble() -> Check {
    let grid: Vec<f64> = (0..=160).map(|i| -200.0 + 5.0 * i as f64).collect();
    let peak = |r: &spectra1d::EnsembleResult| {
        r.mean.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a })
    };
    let chiral_run = bragg_ensemble(1.0 / 12.0, &grid);
    let rerun = bragg_ensemble(1.0 / 12.0, &grid);
    let symmetric = bragg_ensemble(1.0, &grid);
    let identical = chiral_run.mean.iter().zip(&rerun.mean).all(|(a, b)| a.to_bits() == b.to_bits());
    let (ic, rc) = peak(&chiral_run);
    let (is, rs) = peak(&symmetric);
    let blue = grid[ic] > grid[is];
    ensure(
        (rc - 0.7).abs() <= 0.1 && blue && identical,
        format!(
            "peak ⟨R⟩ = {rc:.3} at Δ = {} γ1D (ξ = 1/12) vs {rs:.3} at {} γ1D (ξ = 1); blue-shifted: {blue}; reruns bit-identical: {identical}",
            grid[ic], grid[is]
        ),
    )
}

fn c15_protocols() -> Check {
    let mut worst_ghz: f64 = 0.0;
    for n in 2..=12 {
        for ch in [Channel::Down, Channel::Up] {
            let out = protocols::run_ghz(n, ch).map_err(|e| e.to_string())?;
            let target = QubitRegister::ghz(n, out.sign).map_err(|e| e.to_string())?;
            worst_ghz = worst_ghz.max((target.fidelity(&out.qubits) - 1.0).abs()).max((out.probability - 0.5).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst_transfer: f64 = 0.0;
    for _ in 0..100 {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (cp, cm) = (C64::new(v[0], v[1]) / norm, C64::new(v[2], v[3]) / norm);
        let run = protocols::run_state_transfer(cp, cm).map_err(|e| e.to_string())?;
        for b in &run.branches {
            worst_transfer = worst_transfer.max((b.fidelity(cp, cm) - 1.0).abs());
        }
    }
    ensure(
        worst_ghz < 1e-12 && worst_transfer < 1e-12,
        format!("GHZ N ≤ 12: max |F − 1|, |p − 1/2| = {worst_ghz:.1e}; state transfer, 100 inputs × 4 branches: max |F − 1| = {worst_transfer:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 15] = [
        ("Dicke linewidth", c1_dicke_linewidth),
        ("trace invariance", c2_trace),
        ("subradiant scaling", c3_subradiant),
        ("transfer matrix vs Green's function", c4_transfer_vs_green),
        ("tridiagonal inverse", c5_tridiagonal),
        ("Bragg quantities", c6_bragg),
        ("two-photon flux closure", c7_flux),
        ("Bethe vs diagrammatic kernel", c8_bethe),
        ("g² fixed points", c9_g2_fixed_points),
        ("chiral fixed points", c10_chiral_fixed_points),
        ("chiral bunching threshold", c11_chiral_threshold),
        ("pair eigenstates", c12_pair_states),
        ("2D lattice", c13_lattice),
        ("Bragg ensemble", c14_bragg_ensemble),
        ("protocols", c15_protocols),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
