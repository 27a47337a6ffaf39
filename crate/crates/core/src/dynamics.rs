//! Agent parameterization and exact simulation of the coupled
//! opinion/action dynamics. Opinions follow a conformity (weighted
//! averaging) update; actions are the per-step Nash best responses to the
//! neighbors' last actions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, tanh};

use crate::error::Error;
use crate::netgraph::Graph;
use crate::numerics::SquareMatrix;
use crate::Result;

/// Opinion-to-action map. A small closed enumeration so the Lipschitz bound
/// stays verifiable.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionMap {
    /// scale * tanh(theta / scale); the experiments use scale = 10.
    ScaledTanh { scale: f64 },
    Identity,
    Affine { a: f64, b: f64 },
}

impl ActionMap {
    pub fn apply(&self, theta: f64) -> f64 {
        match *self {
            ActionMap::ScaledTanh { scale } => scale * tanh(theta / scale),
            ActionMap::Identity => theta,
            ActionMap::Affine { a, b } => a * theta + b,
        }
    }

    /// A global Lipschitz constant for the map.
    pub fn lipschitz_bound(&self) -> f64 {
        match *self {
            ActionMap::ScaledTanh { .. } => 1.0,
            ActionMap::Identity => 1.0,
            ActionMap::Affine { a, .. } => fabs(a),
        }
    }
}

/// Per-agent parameters: self-confidence c_i > 0, manipulability g_i >= 0,
/// initial opinions, and the shared opinion-to-action map.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    pub c: Vec<f64>,
    pub g: Vec<f64>,
    pub theta0: Vec<f64>,
    pub phi: ActionMap,
}

impl AgentParams {
    pub fn new(c: Vec<f64>, g: Vec<f64>, theta0: Vec<f64>, phi: ActionMap) -> Result<Self> {
        let n = c.len();
        if g.len() != n || theta0.len() != n || n == 0 {
            return Err(Error::InvalidArgument(
                "c, g, theta0 must have equal nonzero length".into(),
            ));
        }
        if c.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("all c_i must be > 0".into()));
        }
        if g.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidArgument("all g_i must be >= 0".into()));
        }
        if theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("theta0 must be finite".into()));
        }
        Ok(AgentParams { c, g, theta0, phi })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }
}

/// Matrices derived from a (graph, params) pair:
/// A_theta = (D+C)^{-1}(A+C), G_theta and G_u diagonals, A_u = G_u A.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a_theta: SquareMatrix,
    pub g_theta: Vec<f64>,
    pub g_u: Vec<f64>,
    pub a_u: SquareMatrix,
}

pub fn build_system_matrices(graph: &Graph, params: &AgentParams) -> Result<SystemMatrices> {
    let n = graph.n();
    if params.n() != n {
        return Err(Error::InvalidArgument(format!(
            "graph has {n} nodes but params cover {}",
            params.n()
        )));
    }
    let degrees = graph.degrees();
    let mut a_theta = SquareMatrix::zeros(n);
    let mut g_theta = vec![0.0; n];
    let mut g_u = vec![0.0; n];
    let mut a_u = SquareMatrix::zeros(n);
    for i in 0..n {
        let d = degrees[i] as f64;
        let c = params.c[i];
        let g = params.g[i];
        a_theta.set(i, i, c / (d + c));
        for j in graph.neighbors(i) {
            a_theta.set(i, j, 1.0 / (d + c));
        }
        let denom = g + (d + 1.0) * (d + 1.0);
        g_theta[i] = 1.0 + d * g / denom;
        g_u[i] = g / denom;
        for j in graph.neighbors(i) {
            a_u.set(i, j, g_u[i]);
        }
    }
    Ok(SystemMatrices { a_theta, g_theta, g_u, a_u })
}

/// One conformity step: A_theta * theta.
pub fn opinion_step(theta: &[f64], sm: &SystemMatrices) -> Vec<f64> {
    sm.a_theta.mul_vec(theta)
}

/// One best-response step: u = G_theta Phi(theta_next) - A_u u_prev.
pub fn action_step(
    u_prev: &[f64],
    theta_next: &[f64],
    sm: &SystemMatrices,
    phi: &ActionMap,
) -> Vec<f64> {
    let coupling = sm.a_u.mul_vec(u_prev);
    theta_next
        .iter()
        .zip(&sm.g_theta)
        .zip(&coupling)
        .map(|((&t, &gt), &cp)| gt * phi.apply(t) - cp)
        .collect()
}

/// The one-step game cost J_i = (u_i - phi(theta_i))^2 + g_i (u~_i - phi(theta_i))^2
/// with the local average u~_i = (sum of neighbor actions + u_i) / (d_i + 1).
pub fn agent_cost(
    u_i: f64,
    theta_i: f64,
    neighbor_actions: &[f64],
    g_i: f64,
    phi: &ActionMap,
) -> f64 {
    let d = neighbor_actions.len() as f64;
    let desired = phi.apply(theta_i);
    let local_avg = (neighbor_actions.iter().sum::<f64>() + u_i) / (d + 1.0);
    let self_term = u_i - desired;
    let manip_term = local_avg - desired;
    self_term * self_term + g_i * manip_term * manip_term
}

/// Full state history of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// theta[k][i], k = 0..=last recorded step.
    pub theta: Vec<Vec<f64>>,
    /// u[k][i], same indexing.
    pub u: Vec<Vec<f64>>,
    pub diverged: bool,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn final_theta(&self) -> &[f64] {
        self.theta.last().expect("trajectory has the initial row")
    }

    pub fn final_u(&self) -> &[f64] {
        self.u.last().expect("trajectory has the initial row")
    }
}

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e9;

/// Runs the coupled dynamics for `steps` updates after the initial row.
/// Row 0 is (theta0, Phi(theta0)). Divergence (action beyond the threshold
/// or a non-finite value) is recorded, never an error.
pub fn simulate(
    graph: &Graph,
    params: &AgentParams,
    steps: usize,
    divergence_threshold: f64,
) -> Result<Trajectory> {
    if !(divergence_threshold > 0.0) {
        return Err(Error::InvalidArgument("divergence threshold must be > 0".into()));
    }
    let sm = build_system_matrices(graph, params)?;
    let mut theta = params.theta0.clone();
    let mut u: Vec<f64> = theta.iter().map(|&t| params.phi.apply(t)).collect();
    let mut traj = Trajectory {
        theta: vec![theta.clone()],
        u: vec![u.clone()],
        diverged: false,
        diverged_at: None,
    };
    for k in 1..=steps {
        theta = opinion_step(&theta, &sm);
        u = action_step(&u, &theta, &sm, &params.phi);
        traj.theta.push(theta.clone());
        traj.u.push(u.clone());
        if u.iter().any(|&v| !v.is_finite() || fabs(v) > divergence_threshold) {
            traj.diverged = true;
            traj.diverged_at = Some(k);
            break;
        }
    }
    Ok(traj)
}

/// Consensus verdict for one connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentConsensus {
    pub nodes: Vec<usize>,
    /// max - min of the final opinions over the component.
    pub spread: f64,
    /// Mean of the final opinions (the consensus value when spread is small).
    pub value: f64,
    pub achieved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    pub components: Vec<ComponentConsensus>,
    pub all_achieved: bool,
}

/// Per-component spread of the final opinions of a trajectory.
pub fn consensus_check(traj: &Trajectory, graph: &Graph, tol: f64) -> ConsensusReport {
    let theta = traj.final_theta();
    let mut components = Vec::new();
    for nodes in graph.connected_components() {
        let vals: Vec<f64> = nodes.iter().map(|&i| theta[i]).collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max - min;
        components.push(ComponentConsensus {
            value: vals.iter().sum::<f64>() / vals.len() as f64,
            achieved: spread <= tol,
            spread,
            nodes,
        });
    }
    let all_achieved = components.iter().all(|c| c.achieved);
    ConsensusReport { components, all_achieved }
}
