use netstab_core::dynamics::{build_system_matrices, ActionMap, AgentParams};
use netstab_core::netgraph::{gen_erdos_renyi, EdgeBitVector};
use netstab_core::numerics::{p_norm_of_matrix, pd_check, SquareMatrix};
use netstab_core::rng;
use netstab_core::stability::{
    analyze, certificate_transform_z, feasibility_oracle, sufficient_condition,
    DesignOracleParams,
};
use rand::Rng;

fn random_params(n: usize, seed: u64, g_lo: f64, g_hi: f64) -> AgentParams {
    let mut r = rng::stream(seed, 400, 0);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(10.0..100.0)).collect();
    let g: Vec<f64> = (0..n).map(|_| r.gen_range(g_lo..g_hi)).collect();
    let theta0: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..10.0)).collect();
    AgentParams::new(c, g, theta0, ActionMap::ScaledTanh { scale: 10.0 }).unwrap()
}

#[test]
fn oracle_matches_schur_stability() {
    let oracle = DesignOracleParams::default();
    let ps = [0.2, 0.4, 0.6, 0.8];
    let mut checked = 0;
    for seed in 0..200u64 {
        let n = 4 + (seed as usize % 9); // 4..=12
        let p = ps[seed as usize % ps.len()];
        let graph = gen_erdos_renyi(n, p, seed).unwrap();
        let params = random_params(n, seed, 0.0, 20.0);
        let report = analyze(&graph, &params, &oracle).unwrap();
        if (report.rho - 1.0).abs() < 1e-4 {
            continue; // ambiguous band excluded by contract
        }
        let bits = EdgeBitVector::from_graph(&graph);
        let feasible = feasibility_oracle(&bits, &params, &oracle).unwrap();
        assert_eq!(feasible, report.rho < 1.0, "seed {seed}: rho {}", report.rho);
        checked += 1;
    }
    assert!(checked >= 150, "only {checked} instances outside the band");
}

#[test]
fn sufficient_condition_never_contradicted() {
    let mut passes = 0;
    for seed in 0..3000u64 {
        let n = 4 + (seed as usize % 12);
        let graph = gen_erdos_renyi(n, 0.2 + 0.6 * ((seed % 7) as f64 / 6.0), seed).unwrap();
        let degrees = graph.degrees();
        // draw g_i within the condition: g_i <= d_i + 2
        let mut r = rng::stream(seed, 500, 0);
        let g: Vec<f64> = degrees.iter().map(|&d| r.gen_range(0.0..(d as f64 + 2.0))).collect();
        let c: Vec<f64> = (0..n).map(|_| r.gen_range(10.0..100.0)).collect();
        let params = AgentParams::new(c, g, vec![0.0; n], ActionMap::Identity).unwrap();
        let (per_agent, overall) = sufficient_condition(&graph, &params).unwrap();
        assert!(per_agent.iter().all(|&b| b));
        assert!(overall);
        let report = analyze(&graph, &params, &DesignOracleParams::default()).unwrap();
        assert!(report.rho < 1.0, "seed {seed}: counterexample rho {}", report.rho);
        passes += 1;
        if passes >= 1000 {
            break;
        }
    }
    assert!(passes >= 1000);
}

#[test]
fn emitted_certificates_are_valid() {
    let oracle = DesignOracleParams::default();
    for seed in 0..100u64 {
        let n = 4 + (seed as usize % 9);
        let graph = gen_erdos_renyi(n, 0.4, seed).unwrap();
        let params = random_params(n, 7000 + seed, 0.0, 12.0);
        let report = analyze(&graph, &params, &oracle).unwrap();
        if let Some(p) = &report.certificate {
            assert!(pd_check(p).unwrap().0);
            assert!(report.certificate_residual.unwrap() <= 1e-8 * oracle.q * (n as f64).sqrt());
            let sm = build_system_matrices(&graph, &params).unwrap();
            assert!(p_norm_of_matrix(&sm.a_u, p).unwrap() < 1.0);
        } else {
            assert!(report.rho > 1.0 - oracle.rho_margin - 1e-12);
        }
    }
}

#[test]
fn proposition_1_equivalence_with_positive_g() {
    for seed in 0..100u64 {
        let n = 3 + (seed as usize % 8);
        let graph = gen_erdos_renyi(n, 0.5, 900 + seed).unwrap();
        let params = random_params(n, 900 + seed, 0.5, 20.0);
        let sm = build_system_matrices(&graph, &params).unwrap();
        // random SPD trial matrix
        let mut r = rng::stream(seed, 600, 0);
        let mut b = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b.set(i, j, r.gen_range(-1.0..1.0));
            }
        }
        let p = b.matmul(&b.transpose()).add(&SquareMatrix::scaled_identity(n, 0.2));
        let z = certificate_transform_z(&p, &graph, &params).unwrap();
        assert!(pd_check(&z).unwrap().0, "Z inherits PD");

        let q = 0.01;
        let qi = SquareMatrix::scaled_identity(n, q);
        let a = graph.adjacency_matrix();
        // original constraint: A_u^T P A_u - P + qI <= 0
        let lhs_p = sm.a_u.transpose().matmul(&p).matmul(&sm.a_u).sub(&p).add(&qi);
        // transformed: A Z A - G_u^{-1} Z G_u^{-1} + qI <= 0
        let mut ginv_z_ginv = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                ginv_z_ginv.set(i, j, z.get(i, j) / (sm.g_u[i] * sm.g_u[j]));
            }
        }
        let lhs_z = a.matmul(&z).matmul(&a).sub(&ginv_z_ginv).add(&qi);
        let p_side = pd_check(&lhs_p.scale(-1.0)).unwrap().0;
        let z_side = pd_check(&lhs_z.scale(-1.0)).unwrap().0;
        assert_eq!(p_side, z_side, "seed {seed}");
    }
}

#[test]
fn feasibility_is_invariant_in_q() {
    for seed in 0..50u64 {
        let n = 5 + (seed as usize % 8);
        let graph = gen_erdos_renyi(n, 0.4, 40 + seed).unwrap();
        let params = random_params(n, 40 + seed, 0.0, 18.0);
        let bits = EdgeBitVector::from_graph(&graph);
        let verdicts: Vec<bool> = [1e-4, 1e-2, 1.0]
            .iter()
            .map(|&q| {
                let oracle = DesignOracleParams::new(q, 1e-6).unwrap();
                feasibility_oracle(&bits, &params, &oracle).unwrap()
            })
            .collect();
        assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "seed {seed}: {verdicts:?}");
    }
}
