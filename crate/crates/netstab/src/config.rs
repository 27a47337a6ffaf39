//! JSON experiment configuration. Every random draw is tied to an explicit
//! seed in the file; there is no ambient RNG state anywhere.

use std::fs;
use std::path::Path;

use netstab_core::designer::GaConfig;
use netstab_core::dynamics::{ActionMap, AgentParams, DEFAULT_DIVERGENCE_THRESHOLD};
use netstab_core::netgraph::{
    gen_erdos_renyi, gen_ring_lattice, gen_small_world, gen_star, Graph,
};
use netstab_core::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{AppError, AppResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    pub agents: AgentSpec,
    #[serde(default)]
    pub phi: PhiSpec,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub design: DesignSpec,
    #[serde(default)]
    pub ga: GaSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    ErdosRenyi { p: f64, seed: u64 },
    RingLattice { d: usize },
    Star,
    SmallWorld { d: usize, beta: f64, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// Uniform sampling interval for the self-confidence weights c_i.
    pub c: [f64; 2],
    /// Uniform sampling interval for the manipulability weights g_i.
    pub g: [f64; 2],
    /// Uniform sampling interval for the initial opinions.
    #[serde(default = "default_theta0_interval")]
    pub theta0: [f64; 2],
    /// Per-agent g replacements applied after sampling (e.g. a star center).
    #[serde(default)]
    pub g_overrides: Vec<GOverride>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GOverride {
    pub agent: usize,
    pub g: f64,
}

fn default_theta0_interval() -> [f64; 2] {
    [0.0, 10.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    ScaledTanh { scale: f64 },
    Identity,
    Affine { a: f64, b: f64 },
}

impl Default for PhiSpec {
    fn default() -> Self {
        PhiSpec::ScaledTanh { scale: 10.0 }
    }
}

impl PhiSpec {
    pub fn to_action_map(&self) -> AppResult<ActionMap> {
        match *self {
            PhiSpec::ScaledTanh { scale } => {
                if !(scale > 0.0) {
                    return Err(AppError::Config(format!(
                        "phi.scale: {scale} must be > 0"
                    )));
                }
                Ok(ActionMap::ScaledTanh { scale })
            }
            PhiSpec::Identity => Ok(ActionMap::Identity),
            PhiSpec::Affine { a, b } => Ok(ActionMap::Affine { a, b }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_divergence_threshold")]
    pub divergence_threshold: f64,
}

fn default_steps() -> usize {
    100
}

fn default_divergence_threshold() -> f64 {
    DEFAULT_DIVERGENCE_THRESHOLD
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            steps: default_steps(),
            divergence_threshold: default_divergence_threshold(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_rho_margin")]
    pub rho_margin: f64,
    #[serde(default)]
    pub min_edges: Option<usize>,
    #[serde(default)]
    pub frozen_edges: Vec<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

fn default_q() -> f64 {
    0.01
}

fn default_rho_margin() -> f64 {
    1e-6
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            q: default_q(),
            rho_margin: default_rho_margin(),
            min_edges: None,
            frozen_edges: Vec::new(),
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSpec {
    #[serde(default = "default_pop_size")]
    pub pop_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_selection_fraction")]
    pub selection_fraction: f64,
    #[serde(default = "default_min_pop")]
    pub min_pop: usize,
    #[serde(default)]
    pub mutation_rate: Option<f64>,
    #[serde(default = "default_init_flip_rate")]
    pub init_flip_rate: f64,
    #[serde(default)]
    pub init_attempt_budget: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_pop_size() -> usize {
    60
}

fn default_generations() -> usize {
    200
}

fn default_selection_fraction() -> f64 {
    0.5
}

fn default_min_pop() -> usize {
    10
}

fn default_init_flip_rate() -> f64 {
    0.1
}

impl Default for GaSpec {
    fn default() -> Self {
        GaSpec {
            pop_size: default_pop_size(),
            generations: default_generations(),
            selection_fraction: default_selection_fraction(),
            min_pop: default_min_pop(),
            mutation_rate: None,
            init_flip_rate: default_init_flip_rate(),
            init_attempt_budget: None,
            seed: 0,
        }
    }
}

impl GaSpec {
    pub fn to_ga_config(&self) -> GaConfig {
        let mut cfg = GaConfig::new(self.seed);
        cfg.pop_size = self.pop_size;
        cfg.generations = self.generations;
        cfg.selection_fraction = self.selection_fraction;
        cfg.min_pop = self.min_pop;
        cfg.mutation_rate = self.mutation_rate;
        cfg.init_flip_rate = self.init_flip_rate;
        cfg.init_attempt_budget = self.init_attempt_budget;
        cfg
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Negative-control hook: flips one oracle verdict so the suite fails.
    #[serde(default)]
    pub inject_fault: bool,
}

/// Domain tag for agent-parameter sampling streams.
const DOMAIN_AGENTS: u64 = 0x4147;

impl ExperimentConfig {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> AppResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> AppResult<()> {
        if self.n == 0 {
            return Err(AppError::Config("n: must be >= 1".into()));
        }
        for (name, iv) in [
            ("agents.c", &self.agents.c),
            ("agents.g", &self.agents.g),
            ("agents.theta0", &self.agents.theta0),
        ] {
            if !(iv[0].is_finite() && iv[1].is_finite() && iv[0] <= iv[1]) {
                return Err(AppError::Config(format!(
                    "{name}: interval [{}, {}] must have lower <= upper",
                    iv[0], iv[1]
                )));
            }
        }
        if !(self.agents.c[0] > 0.0) {
            return Err(AppError::Config(
                "agents.c: lower bound must be > 0".into(),
            ));
        }
        if self.agents.g[0] < 0.0 {
            return Err(AppError::Config(
                "agents.g: lower bound must be >= 0".into(),
            ));
        }
        for ov in &self.agents.g_overrides {
            if ov.agent >= self.n {
                return Err(AppError::Config(format!(
                    "agents.g_overrides: agent {} out of range (n={})",
                    ov.agent, self.n
                )));
            }
            if !(ov.g >= 0.0) {
                return Err(AppError::Config(format!(
                    "agents.g_overrides: g={} must be >= 0",
                    ov.g
                )));
            }
        }
        if !(self.design.q > 0.0) {
            return Err(AppError::Config("design.q: must be > 0".into()));
        }
        if self.design.rho_margin < 0.0 {
            return Err(AppError::Config("design.rho_margin: must be >= 0".into()));
        }
        self.ga
            .to_ga_config()
            .validate()
            .map_err(|e| AppError::Config(format!("ga: {e}")))?;
        Ok(())
    }

    /// Replaces every seed in the config (graph, agents, GA) with `seed`.
    pub fn override_seeds(&mut self, seed: u64) {
        self.agents.seed = seed;
        self.ga.seed = seed;
        match &mut self.graph {
            Some(GraphSpec::ErdosRenyi { seed: s, .. })
            | Some(GraphSpec::SmallWorld { seed: s, .. }) => *s = seed,
            _ => {}
        }
    }

    /// Builds the graph described by the config's graph spec.
    pub fn build_graph(&self) -> AppResult<Graph> {
        let spec = self
            .graph
            .as_ref()
            .ok_or_else(|| AppError::Config("graph: spec required".into()))?;
        let g = match *spec {
            GraphSpec::ErdosRenyi { p, seed } => gen_erdos_renyi(self.n, p, seed)?,
            GraphSpec::RingLattice { d } => gen_ring_lattice(self.n, d)?,
            GraphSpec::Star => gen_star(self.n)?,
            GraphSpec::SmallWorld { d, beta, seed } => gen_small_world(self.n, d, beta, seed)?,
        };
        Ok(g)
    }

    /// Samples agent parameters: c, g, theta0 drawn uniformly from the config
    /// intervals in that order from one seeded stream, then g overrides.
    pub fn sample_agents(&self) -> AppResult<AgentParams> {
        sample_agents_with_seed(self, self.agents.seed)
    }
}

/// Same sampling as [`ExperimentConfig::sample_agents`] but from an explicit
/// seed, for sweeps over many draws.
pub fn sample_agents_with_seed(cfg: &ExperimentConfig, seed: u64) -> AppResult<AgentParams> {
    fn draw<R: Rng>(r: &mut R, iv: &[f64; 2]) -> f64 {
        if iv[0] == iv[1] {
            iv[0]
        } else {
            r.gen_range(iv[0]..iv[1])
        }
    }
    let n = cfg.n;
    let mut r = rng::stream(seed, DOMAIN_AGENTS, 0);
    let c: Vec<f64> = (0..n).map(|_| draw(&mut r, &cfg.agents.c)).collect();
    let mut g: Vec<f64> = (0..n).map(|_| draw(&mut r, &cfg.agents.g)).collect();
    let theta0: Vec<f64> = (0..n).map(|_| draw(&mut r, &cfg.agents.theta0)).collect();
    for ov in &cfg.agents.g_overrides {
        g[ov.agent] = ov.g;
    }
    let phi = cfg.phi.to_action_map()?;
    Ok(AgentParams::new(c, g, theta0, phi)?)
}
