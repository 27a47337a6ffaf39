//! Stability analysis of the action dynamics: spectral tests on A_u,
//! Lyapunov certificates with a margin q, the closed-form per-agent
//! sufficient condition g_i <= d_i + 2, the lattice-degree heuristic, and
//! the feasibility oracle driving the topology designer.

use alloc::format;
use alloc::vec::Vec;

use libm::ceil;

use crate::dynamics::{build_system_matrices, AgentParams};
use crate::error::Error;
use crate::netgraph::{EdgeBitVector, Graph};
use crate::numerics::{
    matrix_norms, p_norm_of_matrix, pd_check, solve_discrete_lyapunov,
    spectral_radius_similar, SquareMatrix,
};
use crate::Result;

/// Parameters of the stability/feasibility oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOracleParams {
    /// Margin of the Lyapunov constraint A_u^T P A_u - P <= -q I.
    pub q: f64,
    /// Spectral slack: rho must stay below 1 - rho_margin to count as
    /// feasible, guarding the numerically ambiguous band around rho = 1.
    pub rho_margin: f64,
}

impl Default for DesignOracleParams {
    fn default() -> Self {
        DesignOracleParams { q: 0.01, rho_margin: 1e-6 }
    }
}

impl DesignOracleParams {
    pub fn new(q: f64, rho_margin: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::InvalidArgument(format!("q={q} must be > 0")));
        }
        if !(rho_margin >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rho_margin={rho_margin} must be >= 0"
            )));
        }
        Ok(DesignOracleParams { q, rho_margin })
    }
}

/// Result of a stability analysis of one (graph, params) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Spectral radius of A_u = G_u A.
    pub rho: f64,
    /// Per-agent truth of g_i <= d_i + 2.
    pub sufficient_ok: Vec<bool>,
    /// Lyapunov certificate P with A_u^T P A_u - P = -q I, when rho < 1.
    pub certificate: Option<SquareMatrix>,
    /// ||A_u||_P for the emitted certificate.
    pub p_norm_a_u: Option<f64>,
    /// Frobenius residual of the certificate equation.
    pub certificate_residual: Option<f64>,
    pub margin_q: f64,
}

impl StabilityReport {
    pub fn feasible(&self) -> bool {
        self.certificate.is_some()
    }
}

/// Full stability analysis: spectral radius, sufficient-condition flags, and
/// (when Schur stable with slack) a verified Lyapunov certificate.
pub fn analyze(graph: &Graph, params: &AgentParams, oracle: &DesignOracleParams) -> Result<StabilityReport> {
    let sm = build_system_matrices(graph, params)?;
    let rho = spectral_radius_similar(&graph.adjacency_matrix(), &sm.g_u)?;
    let (sufficient_ok, _) = sufficient_condition(graph, params)?;

    let mut report = StabilityReport {
        rho,
        sufficient_ok,
        certificate: None,
        p_norm_a_u: None,
        certificate_residual: None,
        margin_q: oracle.q,
    };

    if rho <= 1.0 - oracle.rho_margin {
        let q = SquareMatrix::scaled_identity(graph.n(), oracle.q);
        if let Ok(p) = solve_discrete_lyapunov(&sm.a_u, &q) {
            // verify on emission: PD, residual, Lemma-1 premise
            let residual = sm
                .a_u
                .transpose()
                .matmul(&p)
                .matmul(&sm.a_u)
                .sub(&p)
                .add(&q)
                .frobenius_norm();
            let (pd, _) = pd_check(&p)?;
            let p_norm = p_norm_of_matrix(&sm.a_u, &p)?;
            if pd && residual <= 1e-8 * q.frobenius_norm() && p_norm < 1.0 {
                report.certificate = Some(p);
                report.p_norm_a_u = Some(p_norm);
                report.certificate_residual = Some(residual);
            }
        }
    }
    Ok(report)
}

/// Per-agent sufficient stability condition g_i <= d_i + 2 and the overall
/// conjunction. Overall truth guarantees rho(A_u) < 1.
pub fn sufficient_condition(graph: &Graph, params: &AgentParams) -> Result<(Vec<bool>, bool)> {
    if params.n() != graph.n() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let degrees = graph.degrees();
    let per_agent: Vec<bool> = params
        .g
        .iter()
        .zip(&degrees)
        .map(|(&g, &d)| g <= d as f64 + 2.0)
        .collect();
    let overall = per_agent.iter().all(|&b| b);
    Ok((per_agent, overall))
}

/// Heuristic lattice degree: smallest even integer >= max(g_max - 2, 0).
/// A ring lattice of this degree satisfies the sufficient condition for
/// every agent with g_i <= g_max.
pub fn heuristic_lattice_degree(g_max: f64) -> usize {
    let v = (g_max - 2.0).max(0.0);
    let c = ceil(v) as usize;
    if c % 2 == 0 {
        c
    } else {
        c + 1
    }
}

/// Feasibility oracle over topologies encoded as edge bits: a topology is
/// feasible iff rho(A_u(x)) < 1 - rho_margin.
///
/// For fixed x the constraint "exists P > 0 with A_u^T P A_u - P <= -qI" is
/// exactly Schur stability of A_u (P scales to meet any q), so the spectral
/// test decides feasibility; certificates come from [`analyze`].
pub fn feasibility_oracle(
    bits: &EdgeBitVector,
    params: &AgentParams,
    oracle: &DesignOracleParams,
) -> Result<bool> {
    let graph = bits.to_graph();
    let sm = build_system_matrices(&graph, params)?;
    let rho = spectral_radius_similar(&graph.adjacency_matrix(), &sm.g_u)?;
    Ok(rho <= 1.0 - oracle.rho_margin)
}

/// Proposition-1 change of variables Z = G_u P G_u (entrywise scaling of P
/// by g_u_i g_u_j). Requires all g_i > 0 so the map is a bijection.
pub fn certificate_transform_z(
    p_mat: &SquareMatrix,
    graph: &Graph,
    params: &AgentParams,
) -> Result<SquareMatrix> {
    if p_mat.n() != graph.n() || params.n() != graph.n() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if params.g.iter().any(|&g| g <= 0.0) {
        return Err(Error::InvalidArgument(
            "transform needs all g_i > 0 (G_u invertible)".into(),
        ));
    }
    let sm = build_system_matrices(graph, params)?;
    let n = graph.n();
    let mut z = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            z.set(i, j, sm.g_u[i] * sm.g_u[j] * p_mat.get(i, j));
        }
    }
    Ok(z)
}

/// Diagnostic record of the norm chain behind the sufficient condition:
/// ||A_u|| <= rho(G_u(D+I)) * ||(D+I)^{-1}A|| and ||(D+I)^{-1}A|| <= d_max/(d_max+1).
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundChain {
    /// ||A||_2
    pub a_two_norm: f64,
    pub d_max: usize,
    /// ||(D+I)^{-1} A||_2
    pub averaged_two_norm: f64,
    /// rho(G_u (D+I)) = max_i g_u_i (d_i + 1)
    pub rho_gu_dplus: f64,
    /// ||A_u||_2
    pub a_u_two_norm: f64,
    /// Every inequality link of the chain holds.
    pub chain_holds: bool,
}

pub fn norm_bound_chain(graph: &Graph, params: &AgentParams) -> Result<NormBoundChain> {
    let sm = build_system_matrices(graph, params)?;
    let n = graph.n();
    let degrees = graph.degrees();
    let d_max = degrees.iter().copied().max().unwrap_or(0);
    let a = graph.adjacency_matrix();
    let (_, _, a_two_norm) = matrix_norms(&a);
    let mut averaged = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            averaged.set(i, j, a.get(i, j) / (degrees[i] as f64 + 1.0));
        }
    }
    let (_, _, averaged_two_norm) = matrix_norms(&averaged);
    let rho_gu_dplus = sm
        .g_u
        .iter()
        .zip(&degrees)
        .map(|(&g, &d)| g * (d as f64 + 1.0))
        .fold(0.0_f64, f64::max);
    let (_, _, a_u_two_norm) = matrix_norms(&sm.a_u);
    let d_min = degrees.iter().copied().min().unwrap_or(0);

    // ||(D+I)^{-1}|| = 1/(d_min+1); the d_max/(d_max+1) form of the bound
    // assumes a regular graph.
    let slack = 1e-10;
    let chain_holds = a_two_norm <= d_max as f64 + slack
        && averaged_two_norm <= a_two_norm / (d_min as f64 + 1.0) + slack
        && a_u_two_norm <= rho_gu_dplus * averaged_two_norm + slack;
    Ok(NormBoundChain {
        a_two_norm,
        d_max,
        averaged_two_norm,
        rho_gu_dplus,
        a_u_two_norm,
        chain_holds,
    })
}
