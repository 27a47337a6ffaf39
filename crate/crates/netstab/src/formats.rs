//! File formats: edge-list graphs, trajectory CSV, and JSON reports.
//! All floating-point output uses 17 significant digits so that reruns are
//! byte-identical and values round-trip exactly.

use std::fs;
use std::path::Path;

use netstab_core::designer::DesignResult;
use netstab_core::dynamics::Trajectory;
use netstab_core::netgraph::{edge_pair, EdgeBitVector, Graph, SignMap};
use netstab_core::stability::StabilityReport;

use crate::{AppError, AppResult};

/// 17 significant digits, scientific notation. Enough to reconstruct the
/// exact f64 bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a graph as an edge list: header "n <count>", then one sorted
/// "i j" line per edge with i < j.
pub fn write_edge_list(path: &Path, g: &Graph) -> AppResult<()> {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (i, j) in g.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_edge_list(path: &Path) -> AppResult<Graph> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_edge_list(&text).map_err(|m| AppError::Config(format!("{}: {m}", path.display())))
}

fn parse_edge_list(text: &str) -> Result<Graph, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty edge-list file")?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .ok_or("missing n in header")?
        .parse()
        .map_err(|e| format!("bad n in header: {e}"))?;
    let count: usize = parts
        .next()
        .ok_or("missing edge count in header")?
        .parse()
        .map_err(|e| format!("bad edge count in header: {e}"))?;
    if parts.next().is_some() {
        return Err("header must be exactly \"n <count>\"".into());
    }
    let mut g = Graph::empty(n).map_err(|e| e.to_string())?;
    let mut read = 0usize;
    for line in lines {
        let mut p = line.split_whitespace();
        let i: usize = p
            .next()
            .ok_or("missing endpoint")?
            .parse()
            .map_err(|e| format!("bad endpoint: {e}"))?;
        let j: usize = p
            .next()
            .ok_or("missing endpoint")?
            .parse()
            .map_err(|e| format!("bad endpoint: {e}"))?;
        if p.next().is_some() {
            return Err(format!("edge line has extra fields: {line:?}"));
        }
        if i >= j {
            return Err(format!("edge ({i},{j}) violates i < j"));
        }
        if j >= n {
            return Err(format!("edge ({i},{j}) out of range for n={n}"));
        }
        if g.has_edge(i, j) {
            return Err(format!("duplicate edge ({i},{j})"));
        }
        g.add_edge(i, j).map_err(|e| e.to_string())?;
        read += 1;
    }
    if read != count {
        return Err(format!("header claims {count} edges, found {read}"));
    }
    Ok(g)
}

/// Trajectory CSV with header "k,theta_0..theta_{n-1},u_0..u_{n-1}".
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> AppResult<()> {
    let n = traj.theta.first().map(|r| r.len()).unwrap_or(0);
    let mut out = String::from("k");
    for i in 0..n {
        out.push_str(&format!(",theta_{i}"));
    }
    for i in 0..n {
        out.push_str(&format!(",u_{i}"));
    }
    out.push('\n');
    for (k, (th, u)) in traj.theta.iter().zip(&traj.u).enumerate() {
        out.push_str(&k.to_string());
        for v in th.iter().chain(u) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn json_bool_list(v: &[bool]) -> String {
    let items: Vec<&str> = v.iter().map(|&b| if b { "true" } else { "false" }).collect();
    format!("[{}]", items.join(","))
}

/// StabilityReport as JSON: {rho, feasible, q, sufficient_per_agent,
/// certificate_residual}. Emitted by hand so the float formatting is fixed.
pub fn stability_report_json(report: &StabilityReport) -> String {
    let residual = match report.certificate_residual {
        Some(r) => fmt_f64(r),
        None => "null".into(),
    };
    format!(
        "{{\n  \"rho\": {},\n  \"feasible\": {},\n  \"q\": {},\n  \"sufficient_per_agent\": {},\n  \"certificate_residual\": {}\n}}\n",
        fmt_f64(report.rho),
        report.feasible(),
        fmt_f64(report.margin_q),
        json_bool_list(&report.sufficient_ok),
        residual
    )
}

/// DesignResult as JSON: {best_bits, change_indices (tagged add/remove
/// relative to x0), fitness, generations, history[], evaluations}.
pub fn design_result_json(result: &DesignResult, x0: &EdgeBitVector) -> String {
    let sign = SignMap::from_initial(x0);
    let n = x0.n();
    let mut changes = Vec::new();
    for k in 0..result.change_vector.len() {
        if result.change_vector.get(k) == 1 {
            let (i, j) = edge_pair(k, n).expect("index in range");
            let op = if sign.sign(k) < 0 { "remove" } else { "add" };
            changes.push(format!(
                "{{\"index\": {k}, \"i\": {i}, \"j\": {j}, \"op\": \"{op}\"}}"
            ));
        }
    }
    let bits: Vec<String> = result
        .best
        .bits
        .bits()
        .iter()
        .map(|b| b.to_string())
        .collect();
    let history: Vec<String> = result
        .history
        .iter()
        .map(|h| {
            format!(
                "{{\"best_fitness\": {}, \"mean_fitness\": {}, \"feasible_rate\": {}}}",
                fmt_f64(h.best_fitness),
                fmt_f64(h.mean_fitness),
                fmt_f64(h.feasible_rate)
            )
        })
        .collect();
    format!(
        "{{\n  \"best_bits\": [{}],\n  \"change_indices\": [{}],\n  \"fitness\": {},\n  \"generations\": {},\n  \"history\": [{}],\n  \"evaluations\": {}\n}}\n",
        bits.join(","),
        changes.join(", "),
        fmt_f64(result.best.fitness),
        result.history.len(),
        history.join(", "),
        result.evaluations
    )
}
