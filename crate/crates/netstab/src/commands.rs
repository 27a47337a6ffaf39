//! Subcommand implementations. Each command takes a parsed config plus the
//! output directory and writes fixed-name artifacts there, so identical
//! configs always produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use netstab_core::designer::{run_ga, DesignProblem, DesignResult};
use netstab_core::dynamics::{simulate, AgentParams, Trajectory};
use netstab_core::netgraph::{gen_ring_lattice, gen_small_world, EdgeBitVector, Graph};
use netstab_core::stability::{
    analyze, heuristic_lattice_degree, DesignOracleParams, StabilityReport,
};

use crate::config::{ExperimentConfig, GraphSpec};
use crate::formats::{
    design_result_json, fmt_f64, stability_report_json, write_edge_list, write_trajectory_csv,
};
use crate::{AppError, AppResult};

fn ensure_out_dir(out: &Path) -> AppResult<()> {
    fs::create_dir_all(out)
        .map_err(|e| AppError::Config(format!("cannot create {}: {e}", out.display())))
}

fn oracle_params(cfg: &ExperimentConfig) -> AppResult<DesignOracleParams> {
    Ok(DesignOracleParams::new(cfg.design.q, cfg.design.rho_margin)?)
}

/// Builds the configured graph and writes it as `graph.txt`.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> AppResult<PathBuf> {
    ensure_out_dir(out)?;
    let graph = cfg.build_graph()?;
    let path = out.join("graph.txt");
    write_edge_list(&path, &graph)?;
    if !quiet {
        let degrees = graph.degrees();
        let dmin = degrees.iter().min().copied().unwrap_or(0);
        let dmax = degrees.iter().max().copied().unwrap_or(0);
        let dsum: usize = degrees.iter().sum();
        println!(
            "generate: n={} edges={} degrees min={} mean={:.3} max={} -> {}",
            graph.n(),
            graph.edge_count(),
            dmin,
            dsum as f64 / graph.n() as f64,
            dmax,
            path.display()
        );
    }
    Ok(path)
}

fn load_or_build_graph(
    cfg: &ExperimentConfig,
    graph_file: Option<&Path>,
) -> AppResult<Graph> {
    let graph = match graph_file {
        Some(p) => crate::formats::read_edge_list(p)?,
        None => cfg.build_graph()?,
    };
    if graph.n() != cfg.n {
        return Err(AppError::Config(format!(
            "graph has n={} but config says n={}",
            graph.n(),
            cfg.n
        )));
    }
    Ok(graph)
}

pub struct SimulateOutput {
    pub trajectory: Trajectory,
    pub report: StabilityReport,
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
}

/// Samples agents, runs the coupled dynamics, and writes `trajectory.csv`
/// plus `stability_report.json`.
pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    graph_file: Option<&Path>,
    out: &Path,
    quiet: bool,
) -> AppResult<SimulateOutput> {
    ensure_out_dir(out)?;
    let graph = load_or_build_graph(cfg, graph_file)?;
    let params = cfg.sample_agents()?;
    let traj = simulate(&graph, &params, cfg.sim.steps, cfg.sim.divergence_threshold)?;
    let report = analyze(&graph, &params, &oracle_params(cfg)?)?;

    let csv_path = out.join("trajectory.csv");
    write_trajectory_csv(&csv_path, &traj)?;
    let report_path = out.join("stability_report.json");
    fs::write(&report_path, stability_report_json(&report))?;
    if !quiet {
        println!(
            "simulate: steps={} diverged={} rho={} feasible={}",
            traj.theta.len() - 1,
            traj.diverged,
            fmt_f64(report.rho),
            report.feasible()
        );
    }
    Ok(SimulateOutput { trajectory: traj, report, csv_path, report_path })
}

pub struct DesignOutput {
    pub result: DesignResult,
    pub before: StabilityReport,
    pub after: StabilityReport,
    pub redesigned: Graph,
}

/// Runs the GA redesign and writes `design_result.json`, `redesigned.txt`,
/// `report_before.json`, and `report_after.json`.
pub fn cmd_design(
    cfg: &ExperimentConfig,
    graph_file: Option<&Path>,
    out: &Path,
    quiet: bool,
) -> AppResult<DesignOutput> {
    ensure_out_dir(out)?;
    let graph = load_or_build_graph(cfg, graph_file)?;
    let params = cfg.sample_agents()?;
    let oracle = oracle_params(cfg)?;
    let before = analyze(&graph, &params, &oracle)?;

    let x0 = EdgeBitVector::from_graph(&graph);
    let mut prob = DesignProblem::new(x0.clone(), params.clone(), oracle.clone())?;
    if let Some(w) = &cfg.design.weights {
        prob = prob.with_weights(w.clone())?;
    }
    if let Some(m) = cfg.design.min_edges {
        prob = prob.with_min_edges(m);
    }
    if !cfg.design.frozen_edges.is_empty() {
        prob = prob.with_frozen_edges(cfg.design.frozen_edges.clone())?;
    }
    let ga_cfg = cfg.ga.to_ga_config();
    let result = run_ga(&prob, &ga_cfg)?;

    let redesigned = result.best.bits.to_graph();
    let after = analyze(&redesigned, &params, &oracle)?;

    fs::write(out.join("design_result.json"), design_result_json(&result, &x0))?;
    write_edge_list(&out.join("redesigned.txt"), &redesigned)?;
    fs::write(out.join("report_before.json"), stability_report_json(&before))?;
    fs::write(out.join("report_after.json"), stability_report_json(&after))?;
    if !quiet {
        println!(
            "design: changes={} fitness={} evaluations={} rho {} -> {}",
            result.change_vector.popcount(),
            fmt_f64(result.best.fitness),
            result.evaluations,
            fmt_f64(before.rho),
            fmt_f64(after.rho)
        );
    }
    Ok(DesignOutput { result, before, after, redesigned })
}

pub struct Table1Row {
    pub structure: String,
    pub rho: f64,
    pub edges: usize,
}

/// Stability comparison of lattice and small-world structures under one
/// shared agent draw. The conservative lattice degree comes from the upper
/// bound of the configured g interval, so its row is stable for every draw
/// from that interval.
pub fn cmd_table1(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> AppResult<Vec<Table1Row>> {
    ensure_out_dir(out)?;
    let params = cfg.sample_agents()?;
    let g_upper = cfg.agents.g[1];
    let d_star = heuristic_lattice_degree(g_upper);
    if d_star > cfg.n - 1 {
        return Err(AppError::Config(format!(
            "heuristic lattice degree {d_star} exceeds n-1={}",
            cfg.n - 1
        )));
    }
    let (sw_beta, sw_seed) = match cfg.graph {
        Some(GraphSpec::SmallWorld { beta, seed, .. }) => (beta, seed),
        _ => (0.3, cfg.agents.seed),
    };
    let oracle = oracle_params(cfg)?;

    let structures: Vec<(String, Graph)> = vec![
        (format!("{d_star}-lattice"), gen_ring_lattice(cfg.n, d_star)?),
        ("8-lattice".into(), gen_ring_lattice(cfg.n, 8)?),
        ("6-lattice".into(), gen_ring_lattice(cfg.n, 6)?),
        (
            "small-world".into(),
            gen_small_world(cfg.n, 6, sw_beta, sw_seed)?,
        ),
    ];
    let mut rows = Vec::new();
    let mut csv = String::from("structure,rho,edges\n");
    for (name, graph) in structures {
        let report = analyze(&graph, &params, &oracle)?;
        csv.push_str(&format!(
            "{name},{},{}\n",
            fmt_f64(report.rho),
            graph.edge_count()
        ));
        if !quiet {
            println!("table1: {name} rho={} edges={}", fmt_f64(report.rho), graph.edge_count());
        }
        rows.push(Table1Row { structure: name, rho: report.rho, edges: graph.edge_count() });
    }
    fs::write(out.join("table1.csv"), csv)?;
    Ok(rows)
}

/// Runs the cross-module property suites; any failure maps to exit code 4.
pub fn cmd_verify(cfg: Option<&ExperimentConfig>, quiet: bool) -> AppResult<()> {
    let inject_fault = cfg.map(|c| c.verify.inject_fault).unwrap_or(false);
    let outcomes = crate::verify::run_suites(inject_fault);
    let mut failed = Vec::new();
    for o in &outcomes {
        if !quiet {
            println!(
                "verify: {} ... {} ({})",
                o.name,
                if o.passed { "pass" } else { "FAIL" },
                o.detail
            );
        }
        if !o.passed {
            failed.push(o.name.clone());
        }
    }
    if !quiet {
        println!(
            "verify: {}/{} suites passed",
            outcomes.iter().filter(|o| o.passed).count(),
            outcomes.len()
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::Verify(format!("suites failed: {}", failed.join(", "))))
    }
}

/// Convenience used by the verify suites and tests: analyze a redesign
/// candidate against explicit params.
pub fn analyze_graph(
    graph: &Graph,
    params: &AgentParams,
    oracle: &DesignOracleParams,
) -> AppResult<StabilityReport> {
    Ok(analyze(graph, params, oracle)?)
}
