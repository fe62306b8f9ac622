//! Dispatch of a validated configuration to the library.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wqed::chiral::{self, ChiralMethod, Precision};
use wqed::lattice2d::{self, LatticeMethod, LatticeSpec};
use wqed::modes::{self, Coupling};
use wqed::protocols::{self, Channel, QubitRegister, Sign};
use wqed::spectra1d::{self, EnsembleSpec, Method};
use wqed::twophoton::{self, Geometry, IntegralMethod, Scatterer};
use wqed::C64;

use crate::config::*;
use crate::output::{Cell, Table};
use crate::CliError;

/// Everything a command produced besides the main table.
#[derive(Debug, Default)]
pub struct Outcome {
    pub table: Table,
    /// Extra JSON documents to write next to the main output (suffix, body).
    pub attachments: Vec<(String, serde_json::Value)>,
}

/// Run a configuration whose parameters have been validated.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let grid = config.grid_values();
    let seed = config.seed.unwrap_or(0);
    match config.params()? {
        Params::Spectrum(p) => spectrum(&p, &grid, seed).map(Outcome::from),
        Params::Modes(p) => modes(&p),
        Params::Dispersion(p) => dispersion(&p, &grid).map(Outcome::from),
        Params::G2(p) => g2(&p, &grid).map(Outcome::from),
        Params::Pairstates(p) => pairstates(&p).map(Outcome::from),
        Params::Lattice2d(p) => lattice(&p, &grid).map(Outcome::from),
        Params::Protocol(p) => protocol(&p, seed).map(Outcome::from),
    }
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, attachments: Vec::new() }
    }
}

fn rt_row(w: f64, r: C64, t: C64) -> Vec<Cell> {
    let (rr, tt) = (r.norm_sqr(), t.norm_sqr());
    vec![w.into(), r.re.into(), r.im.into(), t.re.into(), t.im.into(), rr.into(), tt.into(), (1.0 - rr - tt).into()]
}

const RT_COLUMNS: [&str; 8] = ["detuning", "re_r", "im_r", "re_t", "im_t", "R", "T", "loss"];

fn spectrum(p: &SpectrumParams, grid: &[f64], seed: u64) -> Result<Table, CliError> {
    let coupling = p.coupling.build()?;
    match p.model {
        SpectrumModel::Chain | SpectrumModel::Dicke => {
            let chain_params = p.chain.as_ref().expect("validated");
            let (chain, method) = if p.model == SpectrumModel::Dicke {
                (modes::AtomChain::dicke(chain_params.len()), Method::Dicke)
            } else {
                let m = match p.method {
                    SpectrumMethod::Transfer => Method::Transfer,
                    SpectrumMethod::Green => Method::Green,
                };
                (chain_params.build()?, m)
            };
            let res = spectra1d::spectrum(&chain, &coupling, grid, method)?;
            let mut table = Table::new(&RT_COLUMNS);
            for i in 0..res.len() {
                table.push(rt_row(res.grid[i], res.r[i], res.t_fwd[i]));
            }
            Ok(table)
        }
        SpectrumModel::Ensemble => {
            let e = p.ensemble.as_ref().expect("validated");
            let spec = EnsembleSpec {
                sites: e.sites,
                fill: e.fill,
                trials: e.trials,
                seed,
                phase_step: e.phase_step,
                coupling,
            };
            let res = spectra1d::ensemble_bragg_reflectance(&spec, grid)?;
            let mut table = Table::new(&["detuning", "mean_R", "std_err"]);
            for i in 0..res.grid.len() {
                table.push(vec![res.grid[i].into(), res.mean[i].into(), res.std_err[i].into()]);
            }
            let (imax, peak) = res.mean.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
            table.note(format!("peak_R: {peak} at detuning {}", res.grid[imax]));
            Ok(table)
        }
        SpectrumModel::Eit => {
            let e = p.eit.as_ref().expect("validated");
            let chain = p.chain.as_ref().expect("validated").build()?;
            let modes = spectra1d::eit_modes(&chain, p.coupling.gamma_1d)?;
            let rows: Vec<C64> = grid
                .par_iter()
                .map(|&d| spectra1d::eit_transmission(&modes, d, e.omega_c, e.gamma))
                .collect::<Result<_, _>>()?;
            let mut table = Table::new(&["detuning", "re_t", "im_t", "T"]);
            for (&d, t) in grid.iter().zip(rows) {
                table.push(vec![d.into(), t.re.into(), t.im.into(), t.norm_sqr().into()]);
            }
            Ok(table)
        }
    }
}

fn modes(p: &ModesParams) -> Result<Outcome, CliError> {
    let chain = p.chain.build()?;
    let coupling = p.coupling.build()?;
    let h = modes::effective_hamiltonian(&chain, &coupling, None)?;
    let set = modes::eigenmodes(&h)?;
    let mut table = Table::new(&["mode", "re_omega", "im_omega", "bloch_k"]);
    for (i, w) in set.eigenvalues.iter().enumerate() {
        table.push(vec![i.into(), w.re.into(), w.im.into(), set.bloch_k[i].into()]);
    }
    let trace: C64 = set.eigenvalues.iter().sum();
    let n = chain.len() as f64;
    table.note(format!("trace: {} {}", trace.re, trace.im));
    table.note(format!("expected_trace: 0 {}", -n * (coupling.gamma1d + coupling.gamma_nr)));
    table.note(format!("near_degenerate: {}", set.near_degenerate));
    let mut out = Outcome::from(table);
    if p.eigenvectors {
        let vecs: Vec<Vec<[f64; 2]>> = (0..set.len())
            .map(|nu| set.eigenvectors.column(nu).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        out.attachments.push(("eigenvectors.json".into(), serde_json::json!({ "eigenvectors": vecs })));
    }
    Ok(out)
}

fn dispersion(p: &DispersionParams, grid: &[f64]) -> Result<Table, CliError> {
    let mut table;
    match p.model {
        DispersionModel::Guided => {
            table = Table::new(&["kd", "re_omega", "im_omega"]);
            for &k in grid {
                let w = modes::omega_of_k(C64::new(k, 0.0), p.phi, p.gamma_1d, p.delta_omega, p.gamma);
                let (re, im) = match w.finite() {
                    Some(z) => (z.re, z.im),
                    None => (f64::INFINITY, f64::INFINITY),
                };
                table.push(vec![k.into(), re.into(), im.into()]);
            }
        }
        DispersionModel::Freespace => {
            let d = p.d_over_lambda0.expect("validated");
            table = Table::new(&["kd", "omega"]);
            let rows: Vec<f64> = grid.par_iter().map(|&k| modes::dispersion_freespace(k, d)).collect();
            for (&k, w) in grid.iter().zip(rows) {
                table.push(vec![k.into(), w.into()]);
            }
        }
        DispersionModel::Chiral => {
            table = Table::new(&["kd", "omega"]);
            for &k in grid {
                table.push(vec![k.into(), modes::dispersion_chiral(k, p.xi, p.phi, p.gamma_1d).into()]);
            }
        }
    }
    Ok(table)
}

fn g2(p: &G2Params, grid: &[f64]) -> Result<Table, CliError> {
    let geometry = match p.geometry {
        GeometryParam::Transmission => Geometry::Transmission,
        GeometryParam::Reflection => Geometry::Reflection,
    };
    match p.model {
        G2Model::Tau => {
            let coupling = p.coupling.build()?;
            let chain = p.chain.as_ref().expect("validated");
            let scatterer = match p.scatterer {
                ScattererKind::Dicke => Scatterer::Dicke { n: chain.len(), coupling },
                ScattererKind::Chain => Scatterer::Chain { chain: chain.build()?, coupling },
            };
            let method = match p.integral {
                IntegralParam::Auto => IntegralMethod::Auto,
                IntegralParam::Residue => IntegralMethod::Residue,
                IntegralParam::Quadrature => IntegralMethod::Quadrature,
            };
            let rows: Vec<wqed::Limit<f64>> = grid
                .par_iter()
                .map(|&tau| twophoton::g2_tau(&scatterer, p.eps, tau, geometry, method))
                .collect::<Result<_, _>>()?;
            let mut table = Table::new(&["tau", "g2"]);
            for (&tau, g) in grid.iter().zip(rows) {
                table.push(vec![tau.into(), g.into()]);
            }
            Ok(table)
        }
        G2Model::Zero => {
            let mut table = Table::new(&["n_atoms", "g2"]);
            for n in 1..=p.n_max {
                table.push(vec![n.into(), twophoton::g2_zero_resonant(n, p.gamma_1d_cap, p.gamma_cap, geometry)?.into()]);
            }
            Ok(table)
        }
        G2Model::ChiralSweep => {
            let method = match p.chiral_method {
                ChiralMethodParam::Residue => ChiralMethod::Residue,
                ChiralMethodParam::Contour => ChiralMethod::Contour,
                ChiralMethodParam::Asymptotic => ChiralMethod::Asymptotic,
            };
            let precision = Precision::from_env()?;
            let values = chiral::g2_chiral_sweep(p.n_max, p.gamma_right, p.gamma_nr, method, precision)?;
            let mut table = Table::new(&["n_atoms", "g2"]);
            for (i, g) in values.iter().enumerate() {
                table.push(vec![(i + 1).into(), (*g).into()]);
            }
            if p.gamma_nr > 0.0 {
                table.note(format!("n_star: {}", chiral::n_star(p.gamma_nr, p.gamma_right)?));
            }
            match chiral::bunching_crossing(&values) {
                Some(n) => table.note(format!("bunching_crossing: {n}")),
                None => table.note("bunching_crossing: none"),
            }
            Ok(table)
        }
    }
}

fn kind_name(k: twophoton::PairKind) -> &'static str {
    use twophoton::PairKind::*;
    match k {
        Scattering => "scattering",
        Fermionized => "fermionized",
        Bound => "bound",
        Localized => "localized",
        Unclassified => "unclassified",
    }
}

fn pairstates(p: &PairstatesParams) -> Result<Table, CliError> {
    let chain = p.chain.build()?;
    let h = modes::effective_hamiltonian(&chain, &Coupling::symmetric(p.gamma_1d, 0.0), None)?;
    let states = twophoton::pair_eigenstates(&h)?;
    let mut table = Table::new(&["state", "re_energy", "im_energy", "kind", "score", "k1", "k2"]);
    for (i, s) in states.iter().enumerate() {
        table.push(vec![
            i.into(),
            s.energy.re.into(),
            s.energy.im.into(),
            kind_name(s.class.kind).into(),
            s.class.score.into(),
            s.class.k.0.into(),
            s.class.k.1.into(),
        ]);
    }
    Ok(table)
}

fn lattice(p: &Lattice2dParams, grid: &[f64]) -> Result<Table, CliError> {
    let method = match p.method {
        LatticeMethodParam::Direct => LatticeMethod::Direct { radius: p.radius },
        LatticeMethodParam::Reciprocal => LatticeMethod::Reciprocal,
        LatticeMethodParam::ClosedForm => LatticeMethod::ClosedForm,
    };
    match p.model {
        LatticeModel::Sweep => {
            let mut table = Table::new(&["spacing_over_lambda", "re_c", "im_c", "lamb_shift", "gamma_2d"]);
            // Each spacing fans out internally; keep the outer loop ordered.
            for &a in grid {
                let c = lattice2d::collective_params(&LatticeSpec::new(a, p.gamma0, p.gamma_nr, method))?;
                table.push(vec![a.into(), c.interaction.re.into(), c.interaction.im.into(), c.lamb_shift.into(), c.gamma_2d.into()]);
            }
            let crossing = grid.windows(2).zip(table.rows.windows(2)).find_map(|(a, rows)| {
                let (Cell::Num(g0), Cell::Num(g1)) = (&rows[0][4], &rows[1][4]) else { return None };
                let (g0, g1) = (g0 / p.gamma0, g1 / p.gamma0);
                ((g0 - 1.0) * (g1 - 1.0) <= 0.0 && g0 != g1).then(|| a[0] + (1.0 - g0) * (a[1] - a[0]) / (g1 - g0))
            });
            if let Some(a) = crossing {
                table.note(format!("gamma_2d_equals_gamma0_at: {a}"));
            }
            Ok(table)
        }
        LatticeModel::Metasurface => {
            let a = p.spacing_over_lambda.expect("validated");
            let c = lattice2d::collective_params(&LatticeSpec::new(a, p.gamma0, p.gamma_nr, method))?;
            let mut table = Table::new(&RT_COLUMNS);
            for &w in grid {
                let (r, t) = lattice2d::metasurface_rt(&c, p.gamma_nr, w);
                table.push(rt_row(w, r, t));
            }
            let (r0, _) = lattice2d::metasurface_rt(&c, p.gamma_nr, 0.0);
            table.note(format!("lamb_shift: {}", c.lamb_shift));
            table.note(format!("gamma_2d: {}", c.gamma_2d));
            table.note(format!("abs_r_at_resonance: {}", r0.norm()));
            Ok(table)
        }
    }
}

/// Draw `shots` outcomes from a discrete distribution (indices into `probs`).
pub fn sample_counts(probs: &[f64], shots: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = i;
                break;
            }
        }
        counts[pick] += 1;
    }
    counts
}

fn channel_name(c: Channel) -> &'static str {
    match c {
        Channel::Down => "down",
        Channel::Up => "up",
    }
}

fn sign_name(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn protocol(p: &ProtocolParams, seed: u64) -> Result<Table, CliError> {
    match p.model {
        ProtocolModel::Ghz => {
            let mut table = Table::new(&["channel", "probability", "ghz_sign", "fidelity", "count"]);
            let outcomes: Vec<_> =
                [Channel::Down, Channel::Up].iter().map(|&c| protocols::run_ghz(p.n_qubits, c).map(|o| (c, o))).collect::<Result<_, _>>()?;
            let counts = sample_counts(&outcomes.iter().map(|(_, o)| o.probability).collect::<Vec<_>>(), p.shots, seed);
            for ((c, o), count) in outcomes.iter().zip(counts) {
                let target = QubitRegister::ghz(p.n_qubits, o.sign)?;
                table.push(vec![
                    channel_name(*c).into(),
                    o.probability.into(),
                    sign_name(o.sign).into(),
                    target.fidelity(&o.qubits).into(),
                    count.into(),
                ]);
            }
            Ok(table)
        }
        ProtocolModel::Transfer => {
            let cp = C64::new(p.c_plus[0], p.c_plus[1]);
            let cm = C64::new(p.c_minus[0], p.c_minus[1]);
            let run = protocols::run_state_transfer(cp, cm)?;
            let counts = sample_counts(&run.branches.iter().map(|b| b.probability).collect::<Vec<_>>(), p.shots, seed);
            let mut table =
                Table::new(&["channel", "qubit1", "probability", "re_c_plus", "im_c_plus", "re_c_minus", "im_c_minus", "fidelity", "count"]);
            for (b, count) in run.branches.iter().zip(counts) {
                let (a, m) = b.hadamard_components();
                table.push(vec![
                    channel_name(b.channel).into(),
                    sign_name(b.qubit1).into(),
                    b.probability.into(),
                    a.re.into(),
                    a.im.into(),
                    m.re.into(),
                    m.im.into(),
                    b.fidelity(cp, cm).into(),
                    count.into(),
                ]);
            }
            Ok(table)
        }
    }
}
