//! Topology design: minimum-edge-change integer program solved by a genetic
//! algorithm with truncation selection, one-point crossover, per-bit
//! mutation, and death-penalty rejection of infeasible offspring. An
//! exhaustive search over change vectors serves as an optimality oracle on
//! small instances.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::AgentParams;
use crate::error::Error;
use crate::netgraph::EdgeBitVector;
use crate::rng;
use crate::stability::{feasibility_oracle, DesignOracleParams};
use crate::Result;

/// RNG stream domains; generation g uses domain DOMAIN_BREED + g.
const DOMAIN_INIT: u64 = 0;
const DOMAIN_BREED: u64 = 1;

/// A topology-design instance: initial topology, agents, oracle margins,
/// optional per-edge weights and linear constraints.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub x0: EdgeBitVector,
    pub agents: AgentParams,
    pub oracle: DesignOracleParams,
    /// Per-edge change costs; all-ones when absent.
    pub weights: Option<Vec<f64>>,
    /// Lower bound on the total edge count of the designed topology.
    pub min_edges: Option<usize>,
    /// Edge indices that must not change from x0.
    pub frozen_edges: Vec<usize>,
}

impl DesignProblem {
    pub fn new(x0: EdgeBitVector, agents: AgentParams, oracle: DesignOracleParams) -> Result<Self> {
        if agents.n() != x0.n() {
            return Err(Error::InvalidArgument("agents/topology size mismatch".into()));
        }
        Ok(DesignProblem {
            x0,
            agents,
            oracle,
            weights: None,
            min_edges: None,
            frozen_edges: Vec::new(),
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.x0.len() {
            return Err(Error::InvalidArgument(format!(
                "weights length {} != {}",
                weights.len(),
                self.x0.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be >= 0".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_min_edges(mut self, min_edges: usize) -> Self {
        self.min_edges = Some(min_edges);
        self
    }

    pub fn with_frozen_edges(mut self, frozen: Vec<usize>) -> Result<Self> {
        if frozen.iter().any(|&k| k >= self.x0.len()) {
            return Err(Error::InvalidArgument("frozen edge index out of range".into()));
        }
        self.frozen_edges = frozen;
        Ok(self)
    }
}

/// Hyperparameters of the genetic algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub selection_fraction: f64,
    /// Selection is skipped while the population is at or below this bound.
    pub min_pop: usize,
    /// Per-bit flip probability; None means the default 2/(n(n-1)).
    pub mutation_rate: Option<f64>,
    /// Per-bit perturbation probability for initial candidates.
    pub init_flip_rate: f64,
    /// Max candidate draws during initialization; None means 50 * pop_size.
    pub init_attempt_budget: Option<usize>,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(seed: u64) -> Self {
        GaConfig {
            pop_size: 60,
            generations: 200,
            selection_fraction: 0.5,
            min_pop: 10,
            mutation_rate: None,
            init_flip_rate: 0.1,
            init_attempt_budget: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::InvalidArgument("pop_size must be >= 2".into()));
        }
        if !(self.selection_fraction > 0.0 && self.selection_fraction <= 1.0) {
            return Err(Error::InvalidArgument("selection_fraction must be in (0,1]".into()));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::InvalidArgument("mutation_rate must be in [0,1]".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.init_flip_rate) {
            return Err(Error::InvalidArgument("init_flip_rate must be in [0,1]".into()));
        }
        Ok(())
    }

    /// Effective per-bit mutation probability for n nodes.
    pub fn effective_mutation_rate(&self, n: usize) -> f64 {
        self.mutation_rate
            .unwrap_or_else(|| 2.0 / (n as f64 * (n as f64 - 1.0)))
    }

    pub fn effective_init_budget(&self) -> usize {
        self.init_attempt_budget.unwrap_or(50 * self.pop_size)
    }
}

/// A candidate topology with its cached weighted change count.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub bits: EdgeBitVector,
    pub fitness: f64,
}

/// Per-generation progress record.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Accepted offspring / produced offspring this generation.
    pub feasible_rate: f64,
}

/// Outcome of a GA run.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub best: Chromosome,
    /// Change vector x = best XOR x0.
    pub change_vector: EdgeBitVector,
    pub history: Vec<GenerationStats>,
    /// Total feasibility-oracle calls.
    pub evaluations: usize,
}

/// Weighted Hamming distance of a candidate topology to x0.
pub fn fitness(bits: &EdgeBitVector, prob: &DesignProblem) -> f64 {
    match &prob.weights {
        None => bits.hamming(&prob.x0) as f64,
        Some(w) => bits
            .bits()
            .iter()
            .zip(prob.x0.bits())
            .zip(w)
            .map(|((&b, &b0), &wk)| if b != b0 { wk } else { 0.0 })
            .sum(),
    }
}

/// Linear constraints: edge-count lower bound and frozen edges.
pub fn check_linear_constraints(bits: &EdgeBitVector, prob: &DesignProblem) -> bool {
    if let Some(min_edges) = prob.min_edges {
        if bits.popcount() < min_edges {
            return false;
        }
    }
    prob.frozen_edges
        .iter()
        .all(|&k| bits.get(k) == prob.x0.get(k))
}

fn make_chromosome(bits: EdgeBitVector, prob: &DesignProblem) -> Chromosome {
    let fitness = fitness(&bits, prob);
    Chromosome { bits, fitness }
}

/// Draws feasible random perturbations of x0 until `pop_size` are kept or
/// the attempt budget runs out; errors if nothing feasible was found.
pub fn init_population(prob: &DesignProblem, cfg: &GaConfig) -> Result<Vec<Chromosome>> {
    init_population_counted(prob, cfg).map(|(pop, _)| pop)
}

fn init_population_counted(
    prob: &DesignProblem,
    cfg: &GaConfig,
) -> Result<(Vec<Chromosome>, usize)> {
    cfg.validate()?;
    let budget = cfg.effective_init_budget();
    let mut kept = Vec::new();
    let mut evaluations = 0;
    for attempt in 0..budget {
        let mut r = rng::stream(cfg.seed, DOMAIN_INIT, attempt as u64);
        let mut candidate = prob.x0.clone();
        for k in 0..candidate.len() {
            if prob.frozen_edges.contains(&k) {
                continue;
            }
            if r.gen::<f64>() < cfg.init_flip_rate {
                candidate.flip(k);
            }
        }
        if check_linear_constraints(&candidate, prob) {
            evaluations += 1;
            if feasibility_oracle(&candidate, &prob.agents, &prob.oracle)? {
                kept.push(make_chromosome(candidate, prob));
                if kept.len() == cfg.pop_size {
                    break;
                }
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::InitializationFailure { budget });
    }
    Ok((kept, evaluations))
}

/// Truncation selection: keeps the ceil(fraction * |pop|) lowest-fitness
/// chromosomes when the population exceeds `min_pop`, otherwise keeps all.
/// Ties break by lexicographic bit order, then insertion order.
pub fn select_truncation(pop: &[Chromosome], cfg: &GaConfig) -> Result<Vec<Chromosome>> {
    if pop.is_empty() {
        return Err(Error::InvalidState("selection on empty population".into()));
    }
    if pop.len() <= cfg.min_pop {
        return Ok(pop.to_vec());
    }
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        pop[a]
            .fitness
            .partial_cmp(&pop[b].fitness)
            .expect("finite fitness")
            .then_with(|| pop[a].bits.cmp(&pop[b].bits))
            .then_with(|| a.cmp(&b))
    });
    let keep = (libm::ceil(cfg.selection_fraction * pop.len() as f64) as usize).max(1);
    Ok(order[..keep].iter().map(|&i| pop[i].clone()).collect())
}

/// One-point crossover; cut point uniform in 1..L-1.
pub fn crossover(
    a: &EdgeBitVector,
    b: &EdgeBitVector,
    r: &mut ChaCha8Rng,
) -> Result<(EdgeBitVector, EdgeBitVector)> {
    let len = a.len();
    if len != b.len() {
        return Err(Error::InvalidArgument("parent length mismatch".into()));
    }
    if len < 2 {
        return Err(Error::InvalidArgument("crossover needs at least 2 bits".into()));
    }
    let cut = r.gen_range(1..len);
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for k in cut..len {
        c1.set(k, b.get(k));
        c2.set(k, a.get(k));
    }
    Ok((c1, c2))
}

/// Flips each non-frozen bit independently with probability `rate`.
pub fn mutate(
    bits: &EdgeBitVector,
    rate: f64,
    frozen: &[usize],
    r: &mut ChaCha8Rng,
) -> EdgeBitVector {
    let mut out = bits.clone();
    for k in 0..out.len() {
        if frozen.contains(&k) {
            continue;
        }
        if r.gen::<f64>() < rate {
            out.flip(k);
        }
    }
    out
}

/// Runs the genetic algorithm: select, breed, mutate, death-penalty filter,
/// repeat for the configured number of generations. Deterministic given
/// (problem, config, seed); per-offspring RNG streams are derived from
/// (seed, generation, attempt) so evaluation order never matters.
pub fn run_ga(prob: &DesignProblem, cfg: &GaConfig) -> Result<DesignResult> {
    cfg.validate()?;
    let (mut pop, mut evaluations) = init_population_counted(prob, cfg)?;
    let mutation_rate = cfg.effective_mutation_rate(prob.x0.n());
    let mut history = Vec::with_capacity(cfg.generations);
    let mut best = best_of(&pop).clone();

    for gen in 0..cfg.generations {
        let survivors = select_truncation(&pop, cfg)?;
        let mut next = survivors.clone();
        let mut produced = 0usize;
        let mut accepted = 0usize;
        let mut attempt = 0usize;
        let max_attempts = 10 * cfg.pop_size;
        while next.len() < cfg.pop_size && attempt < max_attempts {
            let mut r = rng::stream(cfg.seed, DOMAIN_BREED + gen as u64, attempt as u64);
            let pa = &survivors[r.gen_range(0..survivors.len())];
            let pb = &survivors[r.gen_range(0..survivors.len())];
            let (c1, c2) = if prob.x0.len() >= 2 {
                crossover(&pa.bits, &pb.bits, &mut r)?
            } else {
                (pa.bits.clone(), pb.bits.clone())
            };
            for child in [c1, c2] {
                if next.len() >= cfg.pop_size {
                    break;
                }
                let mutated = mutate(&child, mutation_rate, &prob.frozen_edges, &mut r);
                produced += 1;
                if !check_linear_constraints(&mutated, prob) {
                    continue;
                }
                evaluations += 1;
                if feasibility_oracle(&mutated, &prob.agents, &prob.oracle)? {
                    accepted += 1;
                    next.push(make_chromosome(mutated, prob));
                }
            }
            attempt += 1;
        }
        pop = next; // survivors always carry over, so never empty
        let gen_best = best_of(&pop);
        if gen_best.fitness < best.fitness {
            best = gen_best.clone();
        }
        let mean = pop.iter().map(|c| c.fitness).sum::<f64>() / pop.len() as f64;
        history.push(GenerationStats {
            best_fitness: gen_best.fitness,
            mean_fitness: mean,
            feasible_rate: if produced == 0 {
                0.0
            } else {
                accepted as f64 / produced as f64
            },
        });
    }

    let change_vector = best.bits.xor(&prob.x0)?;
    Ok(DesignResult { best, change_vector, history, evaluations })
}

fn best_of(pop: &[Chromosome]) -> &Chromosome {
    pop.iter()
        .min_by(|a, b| {
            a.fitness
                .partial_cmp(&b.fitness)
                .expect("finite fitness")
                .then_with(|| a.bits.cmp(&b.bits))
        })
        .expect("population never empty")
}

/// Exact optimum by enumerating change vectors in order of increasing
/// weighted fitness. Refuses instances with more than `max_bits` edge slots.
/// Returns the optimal change vector, or None when no candidate passes.
pub fn exhaustive_search(prob: &DesignProblem, max_bits: usize) -> Result<Option<EdgeBitVector>> {
    let len = prob.x0.len();
    if len > max_bits {
        return Err(Error::TooLarge(format!(
            "{len} edge slots exceed the exhaustive-search budget {max_bits}"
        )));
    }
    let frozen_mask: u64 = prob.frozen_edges.iter().fold(0, |m, &k| m | (1u64 << k));
    let unit_weights = prob.weights.is_none();
    let cost_of = |mask: u64| -> f64 {
        match &prob.weights {
            None => mask.count_ones() as f64,
            Some(w) => (0..len)
                .filter(|&k| mask & (1 << k) != 0)
                .map(|k| w[k])
                .sum(),
        }
    };
    let mut masks: Vec<u64> = (0..(1u64 << len))
        .filter(|m| m & frozen_mask == 0)
        .collect();
    if unit_weights {
        masks.sort_by_key(|&m| (m.count_ones(), m));
    } else {
        masks.sort_by(|&a, &b| {
            cost_of(a)
                .partial_cmp(&cost_of(b))
                .expect("finite weights")
                .then_with(|| a.cmp(&b))
        });
    }
    for mask in masks {
        let mut x = EdgeBitVector::zeros(prob.x0.n())?;
        for k in 0..len {
            if mask & (1 << k) != 0 {
                x.set(k, 1);
            }
        }
        let candidate = prob.x0.xor(&x)?;
        if !check_linear_constraints(&candidate, prob) {
            continue;
        }
        if feasibility_oracle(&candidate, &prob.agents, &prob.oracle)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}
