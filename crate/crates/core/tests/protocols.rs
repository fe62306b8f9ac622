use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use wqed::protocols::{self, Channel, HybridState, QubitRegister, Sign};
use wqed::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_state(n: usize, raw: &[(f64, f64)]) -> HybridState {
    let amps: Vec<C64> = raw.iter().take(2 << n).map(|&(a, b)| c(a, b)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    HybridState::from_amplitudes(n, amps.iter().map(|a| a / norm).collect()).unwrap()
}

fn distance(a: &HybridState, b: &HybridState) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_are_involutions(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16), q in 0usize..3) {
        prop_assume!(raw.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        let s = random_state(3, &raw);
        prop_assert!(distance(&protocols::beamsplitter(&protocols::beamsplitter(&s)), &s) < 1e-14);
        prop_assert!(distance(&protocols::dimer_scatter(&protocols::dimer_scatter(&s, q).unwrap(), q).unwrap(), &s) < 1e-15);
        // With |−⟩ = (|1⟩ − |0⟩)/√2 the basis change squares to σx·σz.
        let hh = s.hadamard(q).unwrap().hadamard(q).unwrap();
        prop_assert!(distance(&hh, &s.pauli_z(q).unwrap().pauli_x(q).unwrap()) < 1e-14);
        prop_assert!(distance(&s.pauli_x(q).unwrap().pauli_x(q).unwrap(), &s) < 1e-15);
    }

    #[test]
    fn norm_survives_long_circuits(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32), gates in prop::collection::vec((0usize..5, 0usize..4), 1000)) {
        prop_assume!(raw.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        let mut s = random_state(4, &raw);
        for (kind, q) in gates {
            s = match kind {
                0 => protocols::beamsplitter(&s),
                1 => protocols::dimer_scatter(&s, q).unwrap(),
                2 => s.hadamard(q).unwrap(),
                3 => s.pauli_x(q).unwrap(),
                _ => s.pauli_z(q).unwrap(),
            };
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_independent_of_scatter_order(order in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), up in any::<bool>()) {
        let ch = if up { Channel::Up } else { Channel::Down };
        let a = protocols::run_ghz(6, ch).unwrap();
        let b = protocols::run_ghz_ordered(6, ch, &order).unwrap();
        prop_assert_eq!(a.sign, b.sign);
        prop_assert!((a.qubits.fidelity(&b.qubits) - 1.0).abs() < 1e-12);
        prop_assert!((a.probability - b.probability).abs() < 1e-15);
    }

    #[test]
    fn transfer_is_faithful(re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0) {
        let norm = (re1 * re1 + im1 * im1 + re2 * re2 + im2 * im2).sqrt();
        prop_assume!(norm > 1e-3);
        let (cp, cm) = (c(re1, im1) / norm, c(re2, im2) / norm);
        let run = protocols::run_state_transfer(cp, cm).unwrap();
        let total: f64 = run.branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for b in &run.branches {
            prop_assert!((b.probability - 0.25).abs() < 1e-12);
            let (p, m) = b.hadamard_components();
            // Exact amplitudes, global phase included.
            prop_assert!((p - cp).norm() < 1e-12 && (m - cm).norm() < 1e-12);
        }
    }
}

#[test]
fn scattering_flips_hadamard_qubits() {
    let reg = QubitRegister::product(&[Sign::Plus.ket()]).unwrap();
    let up = protocols::dimer_scatter(&HybridState::new(&reg, Channel::Up), 0).unwrap();
    let (q, p) = up.measure_photon(Channel::Up);
    assert!((p - 1.0).abs() < 1e-15);
    let minus = QubitRegister::product(&[Sign::Minus.ket()]).unwrap();
    assert!((q.fidelity(&minus) - 1.0).abs() < 1e-15);
    // |0⟩ is an eigenstate: only the photon picks up a sign.
    let zero = QubitRegister::product(&[[c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
    let s = protocols::dimer_scatter(&HybridState::new(&zero, Channel::Up), 0).unwrap();
    assert_eq!(s.amplitudes()[1], c(-1.0, 0.0));
}

#[test]
fn beamsplitter_is_photon_hadamard() {
    let reg = QubitRegister::product(&[Sign::Plus.ket()]).unwrap();
    let d = protocols::beamsplitter(&HybridState::new(&reg, Channel::Down));
    let u = protocols::beamsplitter(&HybridState::new(&reg, Channel::Up));
    let s = FRAC_1_SQRT_2;
    // Index (qubit << 1) | photon, photon 0 = down.
    assert!((d.amplitudes()[0] - c(s * s, 0.0)).norm() < 1e-15 && (d.amplitudes()[1] - c(s * s, 0.0)).norm() < 1e-15);
    assert!((u.amplitudes()[0] - c(s * s, 0.0)).norm() < 1e-15 && (u.amplitudes()[1] + c(s * s, 0.0)).norm() < 1e-15);
}

#[test]
fn ghz_heralding() {
    for n in 2..=12 {
        let down = protocols::run_ghz(n, Channel::Down).unwrap();
        let up = protocols::run_ghz(n, Channel::Up).unwrap();
        assert_eq!(down.sign, Sign::Plus);
        assert_eq!(up.sign, Sign::Minus);
        for out in [down, up] {
            assert!((out.probability - 0.5).abs() < 1e-14);
            let target = QubitRegister::ghz(n, out.sign).unwrap();
            assert!((target.fidelity(&out.qubits) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn transfer_fixed_points() {
    let run = protocols::run_state_transfer(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    for b in &run.branches {
        let plus = Sign::Plus.ket();
        assert!((b.state[0] - plus[0]).norm() < 1e-15 && (b.state[1] - plus[1]).norm() < 1e-15);
    }
    let (cp, cm) = (c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2));
    let run = protocols::run_state_transfer(cp, cm).unwrap();
    let (p, m) = run.primary().hadamard_components();
    assert!((p - cp).norm() < 1e-15 && (m - cm).norm() < 1e-15);
    assert_eq!(run.branch(Channel::Up, Sign::Minus).channel, Channel::Up);
}

#[test]
fn input_validation() {
    assert!(matches!(protocols::run_state_transfer(c(1.0, 0.0), c(1.0, 0.0)), Err(Error::Unnormalized(_))));
    let reg = QubitRegister::product(&[Sign::Plus.ket(); 2]).unwrap();
    let s = HybridState::new(&reg, Channel::Down);
    assert_eq!(protocols::dimer_scatter(&s, 2).unwrap_err(), Error::IndexOutOfRange { index: 2, len: 2 });
    assert!(QubitRegister::ghz(protocols::MAX_QUBITS + 1, Sign::Plus).is_err());
    assert!(HybridState::from_amplitudes(1, vec![c(1.0, 0.0); 4]).is_err());
}
