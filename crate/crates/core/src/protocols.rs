//! State-vector simulation of photon-scattering protocols: GHZ generation and
//! quantum state transfer with stationary qubits dressing waveguide dimers.
//!
//! Conventions: stationary qubits have a ground state |0⟩ and an excited
//! state |1⟩, with Hadamard states |±⟩ = (|1⟩ ± |0⟩)/√2. The flying photon
//! travels in the lower (`Down`, |d⟩) or upper (`Up`, |u⟩) waveguide; the
//! dimers sit on the upper waveguide. A photon passing a dimer applies
//! −σz = |1⟩⟨1| − |0⟩⟨0| to its stationary qubit, which maps |±⟩ → |∓⟩.
//! Beamsplitters are Hadamard gates on the photon: |d⟩ → (|d⟩+|u⟩)/√2,
//! |u⟩ → (|d⟩−|u⟩)/√2.
//!
//! Measurements return the renormalised post-measurement state together
//! with its Born probability; branch selection is left to the caller.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::invalid;
use crate::{c64, Error, Result, C64};

/// Largest register the dense simulation accepts.
pub const MAX_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-12;

/// Waveguide occupied by the flying photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Down,
    Up,
}

impl Channel {
    fn bit(self) -> usize {
        match self {
            Channel::Down => 0,
            Channel::Up => 1,
        }
    }
}

/// Hadamard-basis label |+⟩ or |−⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Computational-basis amplitudes (⟨0|, ⟨1|) of |±⟩.
    pub fn ket(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Sign::Plus => [c64(s, 0.0), c64(s, 0.0)],
            Sign::Minus => [c64(-s, 0.0), c64(s, 0.0)],
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Single-qubit state c₊|+⟩ + c₋|−⟩ in the computational basis.
pub fn hadamard_ket(c_plus: C64, c_minus: C64) -> [C64; 2] {
    let (p, m) = (Sign::Plus.ket(), Sign::Minus.ket());
    [c_plus * p[0] + c_minus * m[0], c_plus * p[1] + c_minus * m[1]]
}

fn check_norm(amps: &[C64]) -> Result<()> {
    let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(n2));
    }
    Ok(())
}

fn check_register(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(invalid("n_qubits", format!("dense simulation is capped at {MAX_QUBITS} qubits")));
    }
    Ok(())
}

/// Stationary-qubit register; amplitude index b has bit q equal to the
/// computational state of qubit q.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    n: usize,
    amps: Vec<C64>,
}

impl QubitRegister {
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_register(n)?;
        if amps.len() != 1 << n {
            return Err(invalid("amplitudes", format!("expected {} amplitudes, got {}", 1usize << n, amps.len())));
        }
        check_norm(&amps)?;
        Ok(Self { n, amps })
    }

    /// Tensor product of single-qubit states (computational amplitudes).
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        check_register(qubits.len())?;
        for q in qubits {
            check_norm(q)?;
        }
        let n = qubits.len();
        let amps = (0..1usize << n)
            .map(|b| qubits.iter().enumerate().map(|(q, k)| k[(b >> q) & 1]).product())
            .collect();
        Ok(Self { n, amps })
    }

    /// (|+⟩^⊗N + s|−⟩^⊗N)/√2.
    pub fn ghz(n: usize, sign: Sign) -> Result<Self> {
        let plus = Self::product(&vec![Sign::Plus.ket(); n])?;
        let minus = Self::product(&vec![Sign::Minus.ket(); n])?;
        let amps = plus
            .amps
            .iter()
            .zip(&minus.amps)
            .map(|(p, m)| (p + m * sign.factor()) * FRAC_1_SQRT_2)
            .collect();
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &QubitRegister) -> f64 {
        inner(&self.amps, &other.amps).norm_sqr()
    }

    /// Project qubit `q` onto |±⟩; returns the remaining register
    /// (qubit removed) and the Born probability.
    pub fn project_qubit(&self, q: usize, outcome: Sign) -> Result<(QubitRegister, f64)> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, len: self.n });
        }
        let bra = outcome.ket();
        let rest = self.n - 1;
        let mut amps = vec![c64(0.0, 0.0); 1 << rest];
        for (b, a) in self.amps.iter().enumerate() {
            let bit = (b >> q) & 1;
            let low = b & ((1 << q) - 1);
            let high = (b >> (q + 1)) << q;
            amps[high | low] += bra[bit].conj() * a;
        }
        let p = renormalise(&mut amps);
        Ok((QubitRegister { n: rest, amps }, p))
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn renormalise(amps: &mut [C64]) -> f64 {
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p > 0.0 {
        let s = 1.0 / p.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
    }
    p
}

/// Joint state of N stationary qubits and one flying photon; amplitude
/// index (b << 1) | c with b the qubit bitstring and c the channel bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    n: usize,
    amps: Vec<C64>,
}

impl HybridState {
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_register(n)?;
        if amps.len() != 2 << n {
            return Err(invalid("amplitudes", format!("expected {} amplitudes, got {}", 2usize << n, amps.len())));
        }
        check_norm(&amps)?;
        Ok(Self { n, amps })
    }

    /// Register ⊗ photon in `channel`.
    pub fn new(register: &QubitRegister, channel: Channel) -> Self {
        let mut amps = vec![c64(0.0, 0.0); 2 << register.n];
        for (b, a) in register.amps.iter().enumerate() {
            amps[(b << 1) | channel.bit()] = *a;
        }
        Self { n: register.n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Project the photon onto a channel; returns the renormalised qubit
    /// register and the Born probability.
    pub fn measure_photon(&self, channel: Channel) -> (QubitRegister, f64) {
        let mut amps: Vec<C64> = self.amps.iter().skip(channel.bit()).step_by(2).copied().collect();
        let p = renormalise(&mut amps);
        (QubitRegister { n: self.n, amps }, p)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, len: self.n });
        }
        Ok(())
    }

    /// Apply a 2×2 gate [[g00, g01], [g10, g11]] to stationary qubit `q`.
    fn qubit_gate(&self, q: usize, g: [[C64; 2]; 2]) -> Result<Self> {
        self.check_qubit(q)?;
        let mut out = self.amps.clone();
        let mask = 1usize << (q + 1);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                out[i] = g[0][0] * a0 + g[0][1] * a1;
                out[j] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
        Ok(Self { n: self.n, amps: out })
    }

    pub fn pauli_z(&self, q: usize) -> Result<Self> {
        let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
        self.qubit_gate(q, [[o, z], [z, -o]])
    }

    pub fn pauli_x(&self, q: usize) -> Result<Self> {
        let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
        self.qubit_gate(q, [[z, o], [o, z]])
    }

    /// Qubit Hadamard |0⟩ → |+⟩, |1⟩ → |−⟩. With |−⟩ = (|1⟩ − |0⟩)/√2 this
    /// squares to σxσz rather than the identity.
    pub fn hadamard(&self, q: usize) -> Result<Self> {
        let (p, m) = (Sign::Plus.ket(), Sign::Minus.ket());
        self.qubit_gate(q, [[p[0], m[0]], [p[1], m[1]]])
    }
}

/// Photon passes the dimer of qubit `q`: −σz on that qubit for the
/// upper-waveguide component, identity for the lower one.
pub fn dimer_scatter(state: &HybridState, q: usize) -> Result<HybridState> {
    state.check_qubit(q)?;
    let mut amps = state.amps.clone();
    for (i, a) in amps.iter_mut().enumerate() {
        if i & 1 == 1 && (i >> (q + 1)) & 1 == 0 {
            *a = -*a;
        }
    }
    Ok(HybridState { n: state.n, amps })
}

/// Hadamard on the photon's waveguide index.
pub fn beamsplitter(state: &HybridState) -> HybridState {
    let mut amps = state.amps.clone();
    for pair in amps.chunks_exact_mut(2) {
        let (d, u) = (pair[0], pair[1]);
        pair[0] = (d + u) * FRAC_1_SQRT_2;
        pair[1] = (d - u) * FRAC_1_SQRT_2;
    }
    HybridState { n: state.n, amps }
}

/// Result of a GHZ run for one photon-detection channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzOutcome {
    pub qubits: QubitRegister,
    pub probability: f64,
    /// Relative sign s of the heralded (|+⟩^⊗N + s|−⟩^⊗N)/√2.
    pub sign: Sign,
}

/// Sign of the GHZ state heralded by a detection in `channel`: the lower
/// port carries the symmetric combination, the upper the antisymmetric one.
pub fn ghz_sign(channel: Channel) -> Sign {
    match channel {
        Channel::Down => Sign::Plus,
        Channel::Up => Sign::Minus,
    }
}

/// |+⟩^⊗N|d⟩ → beamsplitter → every dimer in order → beamsplitter →
/// photon projected onto `channel`.
pub fn run_ghz(n_qubits: usize, channel: Channel) -> Result<GhzOutcome> {
    run_ghz_ordered(n_qubits, channel, &(0..n_qubits).collect::<Vec<_>>())
}

/// As [`run_ghz`] with the dimers visited in the given order.
pub fn run_ghz_ordered(n_qubits: usize, channel: Channel, order: &[usize]) -> Result<GhzOutcome> {
    if n_qubits < 2 {
        return Err(invalid("n_qubits", "GHZ generation needs at least 2 qubits"));
    }
    let register = QubitRegister::product(&vec![Sign::Plus.ket(); n_qubits])?;
    let mut state = beamsplitter(&HybridState::new(&register, Channel::Down));
    for &q in order {
        state = dimer_scatter(&state, q)?;
    }
    let (qubits, probability) = beamsplitter(&state).measure_photon(channel);
    Ok(GhzOutcome { qubits, probability, sign: ghz_sign(channel) })
}

/// Qubit-1 outcome that needs no correction for a given photon channel.
fn channel_parity(channel: Channel) -> Sign {
    match channel {
        Channel::Down => Sign::Minus,
        Channel::Up => Sign::Plus,
    }
}

/// One measurement branch of the state-transfer protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferBranch {
    pub channel: Channel,
    pub qubit1: Sign,
    pub probability: f64,
    /// Corrected state of the second qubit (computational amplitudes).
    pub state: [C64; 2],
}

impl TransferBranch {
    /// Hadamard-basis amplitudes (c₊, c₋) of the corrected second qubit.
    pub fn hadamard_components(&self) -> (C64, C64) {
        let (p, m) = (Sign::Plus.ket(), Sign::Minus.ket());
        (
            p[0].conj() * self.state[0] + p[1].conj() * self.state[1],
            m[0].conj() * self.state[0] + m[1].conj() * self.state[1],
        )
    }

    /// |⟨target|state⟩|² for target c₊|+⟩ + c₋|−⟩.
    pub fn fidelity(&self, c_plus: C64, c_minus: C64) -> f64 {
        inner(&hadamard_ket(c_plus, c_minus), &self.state).norm_sqr()
    }
}

/// Outcome of the state-transfer circuit for every measurement record.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTransfer {
    /// Ordered (d,+), (d,−), (u,+), (u,−).
    pub branches: [TransferBranch; 4],
}

impl StateTransfer {
    /// The branch with the photon in |d⟩ and qubit 1 found in |−⟩, which
    /// needs no correction beyond σz·Hadamard on the second qubit.
    pub fn primary(&self) -> &TransferBranch {
        &self.branches[1]
    }

    pub fn branch(&self, channel: Channel, qubit1: Sign) -> &TransferBranch {
        self.branches.iter().find(|b| b.channel == channel && b.qubit1 == qubit1).expect("all four branches present")
    }
}

/// Moves c₊|+⟩₁ + c₋|−⟩₁ onto the second qubit: photon in |d⟩ with qubit 2
/// in |+⟩, then beamsplitter, dimer 1, beamsplitter, dimer 2, beamsplitter;
/// σz on qubit 1, measurement of the photon channel and of qubit 1 in the
/// |±⟩ basis; finally Hadamard and σz on qubit 2 and a Pauli correction
/// fixed by the record: −σz when the qubit-1 outcome is |+⟩ with the photon
/// in |d⟩ or |−⟩ with the photon in |u⟩, nothing otherwise.
pub fn run_state_transfer(c_plus: C64, c_minus: C64) -> Result<StateTransfer> {
    let n2 = c_plus.norm_sqr() + c_minus.norm_sqr();
    if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(n2));
    }
    let register = QubitRegister::product(&[hadamard_ket(c_plus, c_minus), Sign::Plus.ket()])?;
    let mut state = beamsplitter(&HybridState::new(&register, Channel::Down));
    state = beamsplitter(&dimer_scatter(&state, 0)?);
    state = beamsplitter(&dimer_scatter(&state, 1)?);
    let state = state.pauli_z(0)?;

    let mut branches = Vec::with_capacity(4);
    for channel in [Channel::Down, Channel::Up] {
        let (reg, p_channel) = state.measure_photon(channel);
        for qubit1 in [Sign::Plus, Sign::Minus] {
            let (second, p_qubit) = reg.project_qubit(0, qubit1)?;
            let mut hybrid = HybridState::new(&second, Channel::Down).hadamard(0)?.pauli_z(0)?;
            let mut phase = c64(1.0, 0.0);
            if channel_parity(channel) != qubit1 {
                hybrid = hybrid.pauli_z(0)?;
                phase = c64(-1.0, 0.0);
            }
            let (out, _) = hybrid.measure_photon(Channel::Down);
            let a = out.amplitudes();
            branches.push(TransferBranch {
                channel,
                qubit1,
                probability: p_channel * p_qubit,
                state: [a[0] * phase, a[1] * phase],
            });
        }
    }
    Ok(StateTransfer { branches: branches.try_into().expect("four branches") })
}
