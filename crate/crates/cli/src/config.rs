//! JSON run configurations: parsing, defaults and validation.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Subcommand a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Modes,
    Dispersion,
    G2,
    Pairstates,
    Lattice2d,
    Protocol,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Modes => "modes",
            Command::Dispersion => "dispersion",
            Command::G2 => "g2",
            Command::Pairstates => "pairstates",
            Command::Lattice2d => "lattice2d",
            Command::Protocol => "protocol",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Sampling grid of the swept variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::schema("grid.points", "need at least 2 points"));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            return Err(CliError::schema("grid.min", "need finite min < max"));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(CliError::schema("grid.min", "logarithmic grids need min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let s = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * s).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// A complete run description as read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(format!("config: {e}")))
    }

    /// Typed parameters for the configured command (defaults filled in).
    pub fn params(&self) -> Result<Params, CliError> {
        fn typed<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, CliError> {
            let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
            serde_json::from_value(v).map_err(|e| CliError::Schema(format!("params: {e}")))
        }
        let p = &self.params;
        let params = match self.command {
            Command::Spectrum => Params::Spectrum(typed(p)?),
            Command::Modes => Params::Modes(typed(p)?),
            Command::Dispersion => Params::Dispersion(typed(p)?),
            Command::G2 => Params::G2(typed(p)?),
            Command::Pairstates => Params::Pairstates(typed(p)?),
            Command::Lattice2d => Params::Lattice2d(typed(p)?),
            Command::Protocol => Params::Protocol(typed(p)?),
        };
        params.validate()?;
        if params.needs_grid() {
            self.grid.as_ref().ok_or_else(|| CliError::schema("grid", "this command sweeps a grid; add {min, max, points}"))?.validate()?;
        }
        Ok(params)
    }

    /// The configuration with every default made explicit, as echoed into
    /// output headers.
    pub fn normalised(&self) -> Result<Self, CliError> {
        let params = self.params()?;
        Ok(Self { params: params.to_value(), ..self.clone() })
    }

    pub fn grid_values(&self) -> Vec<f64> {
        self.grid.as_ref().map(Grid::values).unwrap_or_default()
    }
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn two() -> usize {
    2
}

fn positive(name: &'static str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::schema(name, "must be a finite number > 0"))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::schema(name, "must be a finite number ≥ 0"))
    }
}

/// Array geometry: a periodic chain of `n_atoms` with phase step `phi`, or
/// explicit phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    #[serde(default)]
    pub n_atoms: usize,
    #[serde(default)]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

impl ChainParams {
    pub fn build(&self) -> Result<wqed::modes::AtomChain, CliError> {
        match &self.phases {
            Some(p) => wqed::modes::AtomChain::new(p.clone()).map_err(CliError::from),
            None => {
                if !self.phi.is_finite() {
                    return Err(CliError::schema("params.chain.phi", "must be finite"));
                }
                Ok(wqed::modes::AtomChain::periodic(self.n_atoms, self.phi))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.phases.as_ref().map_or(self.n_atoms, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Waveguide coupling; ξ = γ←/γ→ (1 is mirror-symmetric).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingParams {
    #[serde(default = "one")]
    pub gamma_1d: f64,
    #[serde(default)]
    pub gamma_nr: f64,
    #[serde(default = "one")]
    pub xi: f64,
    #[serde(default)]
    pub gamma_over_omega0: f64,
    #[serde(default = "yes")]
    pub markovian: bool,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self { gamma_1d: 1.0, gamma_nr: 0.0, xi: 1.0, gamma_over_omega0: 0.0, markovian: true }
    }
}

impl CouplingParams {
    fn validate(&self) -> Result<(), CliError> {
        non_negative("params.coupling.gamma_1d", self.gamma_1d)?;
        non_negative("params.coupling.gamma_nr", self.gamma_nr)?;
        non_negative("params.coupling.gamma_over_omega0", self.gamma_over_omega0)?;
        if !(self.xi >= 0.0) {
            return Err(CliError::schema("params.coupling.xi", "must be ≥ 0"));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<wqed::modes::Coupling, CliError> {
        let c = wqed::modes::Coupling::chiral(self.gamma_1d, self.gamma_nr, self.xi)
            .with_gamma_over_omega0(self.gamma_over_omega0)
            .with_markovian(self.markovian);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumModel {
    #[default]
    Chain,
    Dicke,
    Ensemble,
    Eit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    #[default]
    Transfer,
    Green,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleParams {
    pub sites: usize,
    pub fill: f64,
    pub trials: usize,
    pub phase_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitParams {
    pub omega_c: f64,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default)]
    pub model: SpectrumModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainParams>,
    #[serde(default)]
    pub coupling: CouplingParams,
    #[serde(default)]
    pub method: SpectrumMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eit: Option<EitParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesParams {
    pub chain: ChainParams,
    #[serde(default)]
    pub coupling: CouplingParams,
    /// Also write the eigenvectors as JSON next to the output file.
    #[serde(default)]
    pub eigenvectors: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionModel {
    #[default]
    Guided,
    Freespace,
    Chiral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    #[serde(default)]
    pub model: DispersionModel,
    #[serde(default)]
    pub phi: f64,
    #[serde(default = "one")]
    pub gamma_1d: f64,
    /// Extra real shift δω of the atomic line (guided model).
    #[serde(default)]
    pub delta_omega: f64,
    /// Extra damping γ of the atomic line (guided model).
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub xi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_over_lambda0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Model {
    /// g²(τ) of a Dicke cluster or chain on a τ grid.
    #[default]
    Tau,
    /// Closed-form resonant g²(0) for N = 1..=n_max co-located atoms.
    Zero,
    /// Exact chiral-chain g²(0) for N = 1..=n_max.
    ChiralSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScattererKind {
    #[default]
    Dicke,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryParam {
    #[default]
    Transmission,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralParam {
    #[default]
    Auto,
    Residue,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiralMethodParam {
    #[default]
    Residue,
    Contour,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Params {
    #[serde(default)]
    pub model: G2Model,
    #[serde(default)]
    pub scatterer: ScattererKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainParams>,
    #[serde(default)]
    pub coupling: CouplingParams,
    /// Probe detuning ε.
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub geometry: GeometryParam,
    #[serde(default)]
    pub integral: IntegralParam,
    #[serde(default = "two")]
    pub n_max: usize,
    /// Γ1D and Γ of the closed resonant form (model "zero").
    #[serde(default = "one")]
    pub gamma_1d_cap: f64,
    #[serde(default)]
    pub gamma_cap: f64,
    /// γ→ and the loss rate γ of the chiral sweep.
    #[serde(default = "one")]
    pub gamma_right: f64,
    #[serde(default)]
    pub gamma_nr: f64,
    #[serde(default)]
    pub chiral_method: ChiralMethodParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairstatesParams {
    pub chain: ChainParams,
    #[serde(default = "one")]
    pub gamma_1d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeModel {
    /// Collective parameters over a grid of a/λ0.
    #[default]
    Sweep,
    /// Mirror r/t over a detuning grid at fixed spacing.
    Metasurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeMethodParam {
    #[default]
    Reciprocal,
    Direct,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice2dParams {
    #[serde(default)]
    pub model: LatticeModel,
    #[serde(default)]
    pub method: LatticeMethodParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default = "one")]
    pub gamma0: f64,
    #[serde(default)]
    pub gamma_nr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_over_lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolModel {
    #[default]
    Ghz,
    Transfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    #[serde(default)]
    pub model: ProtocolModel,
    #[serde(default = "two")]
    pub n_qubits: usize,
    /// (Re, Im) of the |+⟩ amplitude to transfer.
    #[serde(default = "plus_default")]
    pub c_plus: [f64; 2],
    /// (Re, Im) of the |−⟩ amplitude to transfer.
    #[serde(default)]
    pub c_minus: [f64; 2],
    /// Number of sampled measurement records (0: probabilities only).
    #[serde(default)]
    pub shots: usize,
}

fn plus_default() -> [f64; 2] {
    [1.0, 0.0]
}

/// Typed parameter block of each command.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Spectrum(SpectrumParams),
    Modes(ModesParams),
    Dispersion(DispersionParams),
    G2(G2Params),
    Pairstates(PairstatesParams),
    Lattice2d(Lattice2dParams),
    Protocol(ProtocolParams),
}

/// Largest chain the pair-state diagonalisation accepts (N(N−1)/2 states).
pub const PAIRSTATES_MAX_N: usize = 80;

impl Params {
    fn to_value(&self) -> Value {
        let v = match self {
            Params::Spectrum(p) => serde_json::to_value(p),
            Params::Modes(p) => serde_json::to_value(p),
            Params::Dispersion(p) => serde_json::to_value(p),
            Params::G2(p) => serde_json::to_value(p),
            Params::Pairstates(p) => serde_json::to_value(p),
            Params::Lattice2d(p) => serde_json::to_value(p),
            Params::Protocol(p) => serde_json::to_value(p),
        };
        v.expect("parameter blocks serialise")
    }

    fn needs_grid(&self) -> bool {
        match self {
            Params::Spectrum(_) | Params::Dispersion(_) | Params::Lattice2d(_) => true,
            Params::G2(p) => p.model == G2Model::Tau,
            Params::Modes(_) | Params::Pairstates(_) | Params::Protocol(_) => false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        match self {
            Params::Spectrum(p) => {
                p.coupling.validate()?;
                match p.model {
                    SpectrumModel::Chain | SpectrumModel::Dicke => {
                        p.chain.as_ref().ok_or_else(|| CliError::schema("params.chain", "required for this model"))?;
                    }
                    SpectrumModel::Ensemble => {
                        let e = p.ensemble.as_ref().ok_or_else(|| CliError::schema("params.ensemble", "required for the ensemble model"))?;
                        if !(0.0..=1.0).contains(&e.fill) {
                            return Err(CliError::schema("params.ensemble.fill", "must lie in [0, 1]"));
                        }
                        if e.trials == 0 {
                            return Err(CliError::schema("params.ensemble.trials", "must be ≥ 1"));
                        }
                    }
                    SpectrumModel::Eit => {
                        p.chain.as_ref().ok_or_else(|| CliError::schema("params.chain", "required for this model"))?;
                        let e = p.eit.as_ref().ok_or_else(|| CliError::schema("params.eit", "required for the eit model"))?;
                        non_negative("params.eit.omega_c", e.omega_c)?;
                        non_negative("params.eit.gamma", e.gamma)?;
                    }
                }
                if p.model == SpectrumModel::Chain && p.method == SpectrumMethod::Green && p.chain.as_ref().is_some_and(ChainParams::is_empty) {
                    return Err(CliError::schema("params.method", "the Green route needs at least one atom"));
                }
            }
            Params::Modes(p) => {
                p.coupling.validate()?;
                if p.chain.is_empty() {
                    return Err(CliError::schema("params.chain.n_atoms", "need at least one atom"));
                }
            }
            Params::Dispersion(p) => {
                non_negative("params.gamma_1d", p.gamma_1d)?;
                non_negative("params.gamma", p.gamma)?;
                if !(p.xi >= 0.0) {
                    return Err(CliError::schema("params.xi", "must be ≥ 0"));
                }
                if p.model == DispersionModel::Freespace {
                    positive("params.d_over_lambda0", p.d_over_lambda0.unwrap_or(f64::NAN))?;
                }
            }
            Params::G2(p) => {
                p.coupling.validate()?;
                match p.model {
                    G2Model::Tau => {
                        if p.scatterer == ScattererKind::Chain && p.chain.is_none() {
                            return Err(CliError::schema("params.chain", "required for a chain scatterer"));
                        }
                        if p.scatterer == ScattererKind::Dicke && p.chain.as_ref().map_or(true, ChainParams::is_empty) {
                            return Err(CliError::schema("params.chain.n_atoms", "need at least one atom"));
                        }
                    }
                    G2Model::Zero => {
                        if p.n_max == 0 {
                            return Err(CliError::schema("params.n_max", "must be ≥ 1"));
                        }
                        positive("params.gamma_1d_cap", p.gamma_1d_cap)?;
                        non_negative("params.gamma_cap", p.gamma_cap)?;
                    }
                    G2Model::ChiralSweep => {
                        if p.n_max == 0 {
                            return Err(CliError::schema("params.n_max", "must be ≥ 1"));
                        }
                        positive("params.gamma_right", p.gamma_right)?;
                        non_negative("params.gamma_nr", p.gamma_nr)?;
                    }
                }
            }
            Params::Pairstates(p) => {
                positive("params.gamma_1d", p.gamma_1d)?;
                if p.chain.len() < 2 || p.chain.len() > PAIRSTATES_MAX_N {
                    return Err(CliError::schema("params.chain.n_atoms", format!("need 2 ≤ N ≤ {PAIRSTATES_MAX_N}")));
                }
            }
            Params::Lattice2d(p) => {
                positive("params.gamma0", p.gamma0)?;
                non_negative("params.gamma_nr", p.gamma_nr)?;
                if let Some(r) = p.radius {
                    positive("params.radius", r)?;
                }
                if p.model == LatticeModel::Metasurface {
                    let a = p.spacing_over_lambda.ok_or_else(|| CliError::schema("params.spacing_over_lambda", "required for the metasurface model"))?;
                    if !(a > 0.0 && a < 1.0) {
                        return Err(CliError::schema("params.spacing_over_lambda", "must lie in (0, 1)"));
                    }
                }
            }
            Params::Protocol(p) => {
                if p.model == ProtocolModel::Ghz && !(2..=wqed::protocols::MAX_QUBITS).contains(&p.n_qubits) {
                    return Err(CliError::schema("params.n_qubits", format!("need 2 ≤ N ≤ {}", wqed::protocols::MAX_QUBITS)));
                }
                if p.model == ProtocolModel::Transfer {
                    let n2: f64 = p.c_plus.iter().chain(&p.c_minus).map(|x| x * x).sum();
                    if (n2 - 1.0).abs() > 1e-12 {
                        return Err(CliError::schema("params.c_plus", format!("|c₊|² + |c₋|² must be 1, got {n2}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = Grid { min: 0.1, max: 10.0, points: 3, scale: Scale::Log };
        let v = g.values();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 0.1).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-12 && (v[2] - 10.0).abs() < 1e-12);
        let g = Grid { min: -1.0, max: 1.0, points: 5, scale: Scale::Linear };
        assert_eq!(g.values(), [-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Grid { min: 0.0, max: 1.0, points: 4, scale: Scale::Log }.validate().is_err());
        assert!(Grid { min: 1.0, max: 1.0, points: 4, scale: Scale::Linear }.validate().is_err());
    }

    #[test]
    fn unknown_top_level_field_rejected() {
        assert!(RunConfig::from_json(r#"{"command": "modes", "extra": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command": "nonsense"}"#).is_err());
    }
}
