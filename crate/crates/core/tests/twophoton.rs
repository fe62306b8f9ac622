use proptest::prelude::*;
use wqed::modes::{self, AtomChain, Coupling};
use wqed::twophoton::{self, Direction, GeneralKernel, Geometry, IntegralMethod, PairKind, Scatterer};
use wqed::Limit;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dicke_kernel_matches_bethe(n in 1usize..8, g in 0.1f64..3.0, w1 in -4.0f64..4.0, w2 in -4.0f64..4.0, w1p in -4.0f64..4.0) {
        let w2p = w1 + w2 - w1p;
        let m = twophoton::kernel_dicke(w1p, w2p, w1, w2, n, &Coupling::symmetric(g, 0.0)).unwrap();
        let b = twophoton::bethe_oracle(w1p, w2p, w1, w2, n, g);
        prop_assert!((m - b).norm() <= 1e-10 * b.norm().max(1e-6));
    }

    #[test]
    fn dicke_kernel_is_symmetric(n in 1usize..8, g in 0.1f64..3.0, gnr in 0.0f64..1.0, w1 in -4.0f64..4.0, w2 in -4.0f64..4.0, w1p in -4.0f64..4.0) {
        let c = Coupling::symmetric(g, gnr);
        let w2p = w1 + w2 - w1p;
        let a = twophoton::kernel_dicke(w1p, w2p, w1, w2, n, &c).unwrap();
        let b = twophoton::kernel_dicke(w2p, w1p, w2, w1, n, &c).unwrap();
        let d = twophoton::kernel_dicke(w1, w2, w1p, w2p, n, &c).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12));
        prop_assert!((a - d).norm() <= 1e-12 * a.norm().max(1e-12));
    }

    #[test]
    fn lossless_flux_closes(n in 1usize..5, g in 0.2f64..2.0, eps in -3.0f64..3.0, x in 0.0f64..0.3) {
        let f = twophoton::coherent_corrections(eps, x, n, &Coupling::symmetric(g, 0.0)).unwrap();
        prop_assert!((f.r_coh + f.t_coh + f.i_incoh - 1.0).abs() < 1e-8);
        prop_assert!(f.i_incoh >= 0.0);
    }
}

#[test]
fn correlations_decay_to_uncorrelated() {
    let s = Scatterer::Dicke { n: 3, coupling: Coupling::symmetric(1.0, 0.5) };
    for geometry in [Geometry::Reflection, Geometry::Transmission] {
        let g = twophoton::g2_tau(&s, 0.4, 40.0, geometry, IntegralMethod::Auto).unwrap().value();
        assert!((g - 1.0).abs() < 1e-8, "{geometry:?}: {g}");
    }
}

#[test]
fn chain_route_reproduces_dicke_route() {
    let c = Coupling::symmetric(1.0, 0.3);
    let dicke = Scatterer::Dicke { n: 1, coupling: c.clone() };
    let chain = Scatterer::Chain { chain: AtomChain::dicke(1), coupling: c };
    for tau in [0.0, 0.5, 2.0] {
        for geometry in [Geometry::Reflection, Geometry::Transmission] {
            let a = twophoton::g2_tau(&dicke, 0.2, tau, geometry, IntegralMethod::Auto).unwrap().value();
            let b = twophoton::g2_tau(&chain, 0.2, tau, geometry, IntegralMethod::Auto).unwrap().value();
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "τ={tau} {geometry:?}: {a} vs {b}");
        }
    }
}

#[test]
fn chain_residue_and_quadrature_agree() {
    let s = Scatterer::Chain { chain: AtomChain::periodic(4, 0.9), coupling: Coupling::symmetric(1.0, 0.2) };
    for tau in [0.0, 0.7, 3.0] {
        for geometry in [Geometry::Reflection, Geometry::Transmission] {
            let a = twophoton::correlation_integral(&s, 0.3, tau, geometry, IntegralMethod::Residue).unwrap();
            let b = twophoton::correlation_integral(&s, 0.3, tau, geometry, IntegralMethod::Quadrature).unwrap();
            assert!((a - b).norm() < 1e-7 * a.norm().max(1e-3), "τ={tau} {geometry:?}: {a} vs {b}");
        }
    }
}

#[test]
fn resonant_closed_form_matches_integral() {
    for n in 1..=4 {
        for gnr in [0.3, 1.0, 2.5] {
            let s = Scatterer::Dicke { n, coupling: Coupling::symmetric(1.0, gnr) };
            for geometry in [Geometry::Reflection, Geometry::Transmission] {
                let numeric = twophoton::g2_tau(&s, 0.0, 0.0, geometry, IntegralMethod::Auto).unwrap();
                let closed = twophoton::g2_zero_resonant(n, 1.0, gnr, geometry).unwrap();
                match (numeric, closed) {
                    (Limit::Finite(a), Limit::Finite(b)) => assert!((a - b).abs() < 1e-9 * b.max(1.0), "N={n} γ={gnr} {geometry:?}: {a} vs {b}"),
                    (a, b) => assert_eq!(a.is_divergent(), b.is_divergent(), "N={n} γ={gnr} {geometry:?}"),
                }
            }
        }
    }
}

#[test]
fn pair_energies_are_poles_of_sigma() {
    let h = modes::effective_hamiltonian(&AtomChain::periodic(5, 0.8), &Coupling::symmetric(1.0, 0.0), None).unwrap();
    let states = twophoton::pair_eigenstates(&h).unwrap();
    assert_eq!(states.len(), 10);
    for s in &states {
        assert!(twophoton::sigma_singularity(&h, s.energy).unwrap() < 1e-8);
        assert!(s.kmap.iter().all(|&x| x >= -1e-12));
    }
    let off = twophoton::sigma_singularity(&h, states[0].energy + wqed::C64::new(0.37, 0.0)).unwrap();
    assert!(off > 1e-4);
}

#[test]
fn dense_chain_darkest_pair_is_fermionized() {
    let h = modes::effective_hamiltonian(&AtomChain::periodic(31, 0.3), &Coupling::symmetric(1.0, 0.0), None).unwrap();
    let states = twophoton::pair_eigenstates(&h).unwrap();
    let darkest = states.iter().max_by(|a, b| a.energy.im.total_cmp(&b.energy.im)).unwrap();
    assert_eq!(darkest.class.kind, PairKind::Fermionized);
    assert!(darkest.class.score > 0.9);
}

#[test]
fn correlations_settle_within_twenty_lifetimes() {
    for n in 1..=3 {
        let s = Scatterer::Dicke { n, coupling: Coupling::symmetric(1.0, 0.2) };
        for geometry in [Geometry::Reflection, Geometry::Transmission] {
            for eps in [0.0, 0.7] {
                let g = twophoton::g2_tau(&s, eps, 20.0, geometry, IntegralMethod::Auto).unwrap();
                if let Limit::Finite(g) = g {
                    assert!((g - 1.0).abs() < 1e-3, "N={n} {geometry:?} ε={eps}: {g}");
                }
            }
        }
    }
}

#[test]
fn general_kernel_is_continuous_at_zero_spacing() {
    let c = Coupling::symmetric(1.0, 0.0);
    for n in [2usize, 3] {
        let eps = 0.4;
        let k = GeneralKernel::new(&AtomChain::periodic(n, 1e-4), &c, eps).unwrap();
        for w1p in [-1.3, 0.1, 0.9] {
            let dicke = twophoton::kernel_dicke(w1p, 2.0 * eps - w1p, eps, eps, n, &c).unwrap();
            for (mu, nu) in [(Direction::Forward, Direction::Forward), (Direction::Backward, Direction::Backward), (Direction::Forward, Direction::Backward)] {
                let general = k.eval(w1p, mu, nu).unwrap();
                assert!((general - dicke).norm() < 1e-6 * dicke.norm(), "N={n} ω′={w1p} {mu:?}{nu:?}: {general} vs {dicke}");
            }
        }
    }
}

#[test]
fn general_kernel_approaches_dicke_linearly_in_spacing() {
    let c = Coupling::symmetric(1.0, 0.0);
    let deviation = |n: usize, phi: f64| {
        let k = GeneralKernel::new(&AtomChain::periodic(n, phi), &c, 0.4).unwrap();
        let dicke = twophoton::kernel_dicke(0.1, 0.7, 0.4, 0.4, n, &c).unwrap();
        (k.eval(0.1, Direction::Forward, Direction::Forward).unwrap() - dicke).norm() / dicke.norm()
    };
    for n in [2usize, 3] {
        let (coarse, fine) = (deviation(n, 1e-4), deviation(n, 1e-6));
        let ratio = coarse / fine;
        assert!((ratio - 100.0).abs() < 1.0, "N={n}: deviation ratio {ratio}");
        assert!(deviation(n, 1e-9) < 1e-8, "N={n}");
    }
}
