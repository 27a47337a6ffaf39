//! Cross-module property suites behind `netstab verify`. Each suite checks
//! a structural identity of the pipeline against an independent computation
//! (no shared code path with the quantity under test where possible).

use netstab_core::designer::{
    exhaustive_search, fitness, run_ga, DesignProblem, GaConfig,
};
use netstab_core::dynamics::{
    agent_cost, build_system_matrices, simulate, ActionMap, AgentParams,
    DEFAULT_DIVERGENCE_THRESHOLD,
};
use netstab_core::netgraph::{gen_erdos_renyi, EdgeBitVector};
use netstab_core::numerics::{pd_check, SquareMatrix};
use netstab_core::rng;
use netstab_core::stability::{certificate_transform_z, feasibility_oracle, DesignOracleParams};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> SuiteOutcome {
    SuiteOutcome { name: name.into(), passed, detail }
}

fn random_params(n: usize, seed: u64, g_hi: f64) -> AgentParams {
    let mut r = rng::stream(seed, 0x5652, 0);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(10.0..100.0)).collect();
    let g: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..g_hi)).collect();
    let theta0: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..10.0)).collect();
    AgentParams::new(c, g, theta0, ActionMap::ScaledTanh { scale: 10.0 }).unwrap()
}

/// Independent spectral-radius estimate: power iteration on M^2 (squaring
/// merges the +-lambda pairs of the symmetric-similar matrix).
pub fn power_iteration_rho(m: &SquareMatrix, max_iters: usize) -> f64 {
    let n = m.n();
    let m2 = m.matmul(m);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.01).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let s = norm(&x);
    for v in x.iter_mut() {
        *v /= s;
    }
    let mut est = 0.0_f64;
    let mut stable_iters = 0;
    for _ in 0..max_iters {
        let y = m2.mul_vec(&x);
        let ny = norm(&y);
        if ny < 1e-300 {
            return 0.0;
        }
        if (ny - est).abs() <= 1e-14 * ny.max(1.0) {
            stable_iters += 1;
            if stable_iters > 20 {
                est = ny;
                break;
            }
        } else {
            stable_iters = 0;
        }
        est = ny;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    est.sqrt()
}

/// Suite 1: the feasibility oracle agrees with an independently estimated
/// spectral radius outside the ambiguous band around rho = 1.
fn suite_schur_equivalence(inject_fault: bool) -> SuiteOutcome {
    let oracle = DesignOracleParams::default();
    let mut checked = 0;
    for seed in 0..60u64 {
        let n = 4 + (seed as usize % 7);
        let graph = gen_erdos_renyi(n, 0.4, 10_000 + seed).unwrap();
        let params = random_params(n, 10_000 + seed, 20.0);
        let sm = build_system_matrices(&graph, &params).unwrap();
        let a = graph.adjacency_matrix();
        let mut au = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                au.set(i, j, sm.g_u[i] * a.get(i, j));
            }
        }
        let rho = power_iteration_rho(&au, 500_000);
        if (rho - 1.0).abs() < 1e-4 {
            continue;
        }
        let bits = EdgeBitVector::from_graph(&graph);
        let mut feasible = feasibility_oracle(&bits, &params, &oracle).unwrap();
        if inject_fault {
            feasible = !feasible; // negative-control hook
        }
        if feasible != (rho < 1.0) {
            return outcome(
                "schur-equivalence",
                false,
                format!("seed {seed}: oracle {feasible} vs rho {rho}"),
            );
        }
        checked += 1;
    }
    outcome("schur-equivalence", true, format!("{checked} instances agree"))
}

/// Suite 2: along simulated trajectories every action is a stationary point
/// of its agent's cost (finite-difference gradient below 1e-6).
fn suite_stationarity() -> SuiteOutcome {
    let h = 1e-4;
    let mut max_grad = 0.0_f64;
    for seed in 0..10u64 {
        let n = 12;
        let graph = gen_erdos_renyi(n, 0.4, 20_000 + seed).unwrap();
        let params = random_params(n, 20_000 + seed, 10.0);
        let traj = simulate(&graph, &params, 50, DEFAULT_DIVERGENCE_THRESHOLD).unwrap();
        let last = if traj.diverged { traj.u.len() - 1 } else { traj.u.len() };
        for k in 1..last {
            for i in 0..n {
                let nbrs: Vec<f64> =
                    graph.neighbors(i).iter().map(|&j| traj.u[k - 1][j]).collect();
                let up = agent_cost(traj.u[k][i] + h, traj.theta[k][i], &nbrs, params.g[i], &params.phi);
                let dn = agent_cost(traj.u[k][i] - h, traj.theta[k][i], &nbrs, params.g[i], &params.phi);
                max_grad = max_grad.max(((up - dn) / (2.0 * h)).abs());
            }
        }
    }
    outcome(
        "best-response-stationarity",
        max_grad <= 1e-6,
        format!("max |dJ/du| = {max_grad:e}"),
    )
}

/// Suite 3: the change of variables Z = G_u P G_u preserves the sign of the
/// Lyapunov constraint when all g_i > 0.
fn suite_proposition1() -> SuiteOutcome {
    for seed in 0..30u64 {
        let n = 3 + (seed as usize % 7);
        let graph = gen_erdos_renyi(n, 0.5, 30_000 + seed).unwrap();
        let mut r = rng::stream(30_000 + seed, 0x5652, 1);
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(10.0..100.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..20.0)).collect();
        let params =
            AgentParams::new(c, g, vec![0.0; n], ActionMap::Identity).unwrap();
        let sm = build_system_matrices(&graph, &params).unwrap();
        let mut b = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b.set(i, j, r.gen_range(-1.0..1.0));
            }
        }
        let p = b.matmul(&b.transpose()).add(&SquareMatrix::scaled_identity(n, 0.2));
        let z = certificate_transform_z(&p, &graph, &params).unwrap();
        let qi = SquareMatrix::scaled_identity(n, 0.01);
        let a = graph.adjacency_matrix();
        let lhs_p = sm.a_u.transpose().matmul(&p).matmul(&sm.a_u).sub(&p).add(&qi);
        let mut ginv_z_ginv = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                ginv_z_ginv.set(i, j, z.get(i, j) / (sm.g_u[i] * sm.g_u[j]));
            }
        }
        let lhs_z = a.matmul(&z).matmul(&a).sub(&ginv_z_ginv).add(&qi);
        let p_side = pd_check(&lhs_p.scale(-1.0)).unwrap().0;
        let z_side = pd_check(&lhs_z.scale(-1.0)).unwrap().0;
        if p_side != z_side {
            return outcome(
                "proposition-1-transform",
                false,
                format!("seed {seed}: P-side {p_side} vs Z-side {z_side}"),
            );
        }
    }
    outcome("proposition-1-transform", true, "30 instances agree".into())
}

/// Suite 4: on small instances the GA never beats the exhaustive optimum and
/// reaches it on most of them.
fn suite_ga_vs_exhaustive() -> SuiteOutcome {
    let mut matched = 0;
    let mut total = 0;
    let mut seed = 0u64;
    while total < 5 && seed < 200 {
        seed += 1;
        let n = 4 + (seed as usize % 3);
        let graph = gen_erdos_renyi(n, 0.7, 40_000 + seed).unwrap();
        let mut r = rng::stream(40_000 + seed, 0x5652, 2);
        let g: Vec<f64> = (0..n).map(|_| r.gen_range(8.0..16.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(10.0..100.0)).collect();
        let params = AgentParams::new(c, g, vec![0.0; n], ActionMap::Identity).unwrap();
        let x0 = EdgeBitVector::from_graph(&graph);
        let oracle = DesignOracleParams::default();
        if feasibility_oracle(&x0, &params, &oracle).unwrap() {
            continue;
        }
        let prob = DesignProblem::new(x0, params, oracle).unwrap();
        let optimal_x = exhaustive_search(&prob, 20).unwrap().unwrap();
        let optimal = fitness(&prob.x0.xor(&optimal_x).unwrap(), &prob);
        let mut cfg = GaConfig::new(seed);
        cfg.pop_size = 40;
        cfg.generations = 60;
        cfg.init_flip_rate = 0.4;
        let result = run_ga(&prob, &cfg).unwrap();
        if result.best.fitness < optimal - 1e-12 {
            return outcome(
                "ga-vs-exhaustive",
                false,
                format!("seed {seed}: GA {} beat oracle {optimal}", result.best.fitness),
            );
        }
        if (result.best.fitness - optimal).abs() < 1e-12 {
            matched += 1;
        }
        total += 1;
    }
    outcome(
        "ga-vs-exhaustive",
        total == 5 && matched >= 4,
        format!("matched optimum on {matched}/{total}"),
    )
}

pub fn run_suites(inject_fault: bool) -> Vec<SuiteOutcome> {
    vec![
        suite_schur_equivalence(inject_fault),
        suite_stationarity(),
        suite_proposition1(),
        suite_ga_vs_exhaustive(),
    ]
}
