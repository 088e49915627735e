// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Genetic reconstruction of an adjacency matrix from probe data.
//!
//! Each generation is evaluated, sorted by fitness and checked for exact or
//! isomorphic convergence. The fittest `elite_fraction` become parents; the
//! stronger half of them survive untouched, the weaker half and all offspring
//! are mutated. A stalled elite triggers one iteration at an elevated mutation
//! rate; after a fixed number of those the weakest individuals are replaced by
//! fresh random networks.
//!
//! Every random decision draws from a stream keyed by
//! `(seed, phase, iteration, index)`, so reports do not depend on the number
//! of worker threads.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fitness::{
    delta_sum, fitness, sink_data_isomorphisms, FitnessScore, MATCH_TOLERANCE, MAX_RELABELLINGS,
};
use crate::graph::{apply_permutation, generate_erdos_renyi, Network, NodePermutation};
use crate::probing::{KnownEdges, ProbeDataset, ProbePlan};
use crate::rng::stream;
use crate::scalar::Real;

/// Share of the population whose identity is tracked for stall detection.
pub const STALL_FRACTION: f64 = 0.1;

const PHASE_INIT: u64 = 1;
const PHASE_PARTNERS: u64 = 2;
const PHASE_MATE: u64 = 3;
const PHASE_MUTATE: u64 = 4;
const PHASE_INJECT: u64 = 5;

/// GA parameters. Absent JSON keys take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub matings_per_parent: usize,
    /// Mean of the per-individual flip probability; `None` means `1/α` with
    /// `α` the number of free pairs.
    pub mutation_mean: Option<f64>,
    pub stall_window: usize,
    pub extreme_rate: f64,
    pub extreme_budget: usize,
    pub replace_fraction: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            elite_fraction: 0.2,
            matings_per_parent: 4,
            mutation_mean: None,
            stall_window: 20,
            extreme_rate: 0.1,
            extreme_budget: 5,
            replace_fraction: 0.2,
            max_iterations: 500,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_population(population_size: usize, seed: u64) -> Self {
        Self {
            population_size,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if self.population_size < 5 {
            return Err(invalid(format!(
                "population size {} < 5",
                self.population_size
            )));
        }
        if !in_unit(self.elite_fraction) || !in_unit(self.replace_fraction) {
            return Err(invalid("elite and replace fractions must lie in (0,1)"));
        }
        if !(self.extreme_rate > 0.0 && self.extreme_rate <= 1.0) {
            return Err(invalid("extreme mutation rate must lie in (0,1]"));
        }
        if self.parent_count() < 2 {
            return Err(invalid(
                "elite fraction times population size must be at least 2",
            ));
        }
        if self.parent_count() >= self.population_size {
            return Err(invalid("elite must be smaller than the population"));
        }
        if self.matings_per_parent == 0 || self.stall_window == 0 || self.extreme_budget == 0 {
            return Err(invalid("mating, stall and extreme counts must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("iteration limit must be positive"));
        }
        if let Some(m) = self.mutation_mean {
            if !(m > 0.0 && m.is_finite()) {
                return Err(invalid(format!("mutation mean {m} must be positive")));
            }
        }
        Ok(())
    }

    /// `⌈elite_fraction · population_size⌉`.
    pub fn parent_count(&self) -> usize {
        frac_ceil(self.elite_fraction, self.population_size)
    }

    fn mutation_mean_for(&self, known: &KnownEdges) -> f64 {
        self.mutation_mean
            .unwrap_or_else(|| 1.0 / known.free_count().max(1) as f64)
    }
}

fn frac_ceil(f: f64, size: usize) -> usize {
    // Guard against 0.2·100 = 20.000000000000004.
    ((f * size as f64) - 1e-9).ceil().max(0.0) as usize
}

/// A scored candidate. The probe data is cached alongside the score.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Individual<T> {
    pub network: Network,
    pub fitness: FitnessScore<T>,
    #[serde(skip)]
    dataset: Option<Arc<ProbeDataset<T>>>,
}

impl<T: Real> Individual<T> {
    pub fn dataset(&self) -> Option<&ProbeDataset<T>> {
        self.dataset.as_deref()
    }
}

impl<T: PartialEq> PartialEq for Individual<T> {
    fn eq(&self, other: &Self) -> bool {
        self.network == other.network && self.fitness == other.fitness
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Exact,
    Isomorphic,
    IterationLimit,
}

impl Outcome {
    pub fn converged(self) -> bool {
        self != Outcome::IterationLimit
    }
}

/// Result of one reconstruction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GaReport<T> {
    pub outcome: Outcome,
    pub iterations: usize,
    pub best: Individual<T>,
    /// For isomorphic outcomes, `isomorphism[i]` is the target label of node
    /// `i` of `best`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isomorphism: Option<NodePermutation>,
    pub fitness_history: Vec<T>,
    pub extreme_mutation_count: usize,
}

impl<T: Real> GaReport<T> {
    /// `best` expressed in target labels.
    pub fn reconstructed(&self) -> Network {
        match &self.isomorphism {
            Some(p) => {
                apply_permutation(&self.best.network, p).expect("permutation matches network size")
            }
            None => self.best.network.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn random_network<R: Rng + ?Sized>(n: usize, known: &KnownEdges, rng: &mut R) -> Network {
    let p: f64 = rng.random();
    let mut net = generate_erdos_renyi(n, p, rng).expect("p in [0,1]");
    known.apply(&mut net);
    net
}

/// `size` Erdős–Rényi networks, each with its own uniform edge probability,
/// with every known entry overwritten.
pub fn init_population(
    n: usize,
    known: &KnownEdges,
    size: usize,
    seed: u64,
) -> Result<Vec<Network>> {
    if size < 5 {
        return Err(invalid(format!("population size {size} < 5")));
    }
    if known.n() != n {
        return Err(invalid("known-edge constraint has the wrong node count"));
    }
    Ok((0..size)
        .map(|i| random_network(n, known, &mut stream(seed, &[PHASE_INIT, i as u64])))
        .collect())
}

/// The first `⌈elite_fraction · size⌉` individuals of a sorted population.
pub fn select_parents<'a, T>(sorted: &'a [Individual<T>], cfg: &GaConfig) -> &'a [Individual<T>] {
    &sorted[..cfg.parent_count().min(sorted.len())]
}

/// Probability that an offspring inherits a free entry from `a`.
pub fn mating_probability<T: Real>(fa: T, fb: T) -> f64 {
    let sum = fa + fb;
    if sum <= T::zero() {
        0.5
    } else {
        (fb / sum).as_f64()
    }
}

/// Elementwise crossover: every free pair comes from `a` with probability
/// `F_b / (F_a + F_b)`, otherwise from `b`.
pub fn mate<T: Real, R: Rng + ?Sized>(
    a: &Individual<T>,
    b: &Individual<T>,
    known: &KnownEdges,
    rng: &mut R,
) -> Network {
    let p = mating_probability(a.fitness.value(), b.fitness.value());
    let mut child = a.network.clone();
    for (i, j) in known.free_pairs() {
        let from_a = rng.random::<f64>() < p;
        if !from_a {
            child.set_edge(i, j, b.network.has_edge(i, j));
        }
    }
    known.apply(&mut child);
    child
}

/// Flips each free pair with one probability `q ~ Exp(mean)`, clamped to 1.
/// Returns the number of flips.
pub fn mutate<R: Rng + ?Sized>(
    net: &mut Network,
    rate_mean: f64,
    known: &KnownEdges,
    rng: &mut R,
) -> usize {
    assert!(rate_mean > 0.0, "mutation mean must be positive");
    let q = Exp::new(1.0 / rate_mean)
        .expect("positive rate")
        .sample(rng)
        .min(1.0);
    let mut flips = 0;
    for (i, j) in known.free_pairs() {
        if rng.random::<f64>() < q {
            net.flip_edge(i, j);
            flips += 1;
        }
    }
    flips
}

/// Scores networks against the target, reusing cached evaluations.
struct Evaluator<'a, T> {
    target: &'a ProbeDataset<T>,
    plan: &'a ProbePlan<T>,
    cache: HashMap<Network, Individual<T>>,
}

impl<'a, T: Real> Evaluator<'a, T> {
    fn score(&self, net: &Network) -> Result<Individual<T>> {
        let ds = self.plan.probe(net, false)?;
        let fitness = fitness(self.target, &ds)?;
        Ok(Individual {
            network: net.clone(),
            fitness,
            dataset: Some(Arc::new(ds)),
        })
    }

    /// Scores `nets` in parallel, returns them sorted by fitness (stable) and
    /// keeps only these networks in the cache.
    fn evaluate(&mut self, nets: Vec<Network>) -> Result<Vec<Individual<T>>> {
        let fresh: Vec<&Network> = {
            let mut seen = std::collections::HashSet::new();
            nets.iter()
                .filter(|n| !self.cache.contains_key(*n) && seen.insert(*n))
                .collect()
        };
        let scored: Vec<Individual<T>> = fresh
            .par_iter()
            .map(|n| self.score(n))
            .collect::<Result<_>>()?;
        let mut cache: HashMap<Network, Individual<T>> = HashMap::with_capacity(nets.len());
        for ind in scored {
            cache.insert(ind.network.clone(), ind);
        }
        let mut pop = Vec::with_capacity(nets.len());
        for net in nets {
            let ind = match cache.get(&net) {
                Some(i) => i.clone(),
                None => {
                    let i = self.cache[&net].clone();
                    cache.insert(net, i.clone());
                    i
                }
            };
            pop.push(ind);
        }
        self.cache = cache;
        pop.sort_by(|a, b| {
            a.fitness
                .value()
                .partial_cmp(&b.fitness.value())
                .expect("finite fitness")
        });
        Ok(pop)
    }
}

/// First candidate whose probe data matches the target after a sink
/// relabelling, confirmed by re-probing the relabelled network.
fn find_isomorphic<T: Real>(
    pop: &[Individual<T>],
    target: &ProbeDataset<T>,
    plan: &ProbePlan<T>,
    known: &KnownEdges,
) -> Result<Option<(Individual<T>, NodePermutation)>> {
    let tol = T::lit(MATCH_TOLERANCE);
    let mut tried = std::collections::HashSet::new();
    for ind in pop {
        let ds = ind.dataset().expect("evaluated individual");
        if delta_sum(target, ds)?.abs() >= tol || !tried.insert(&ind.network) {
            continue;
        }
        for perm in sink_data_isomorphisms(target, ds, &ind.network, MAX_RELABELLINGS)? {
            let relabelled = apply_permutation(&ind.network, &perm)?;
            if !known.is_satisfied_by(&relabelled) {
                continue;
            }
            if fitness(target, &plan.probe(&relabelled, false)?)?.is_zero() {
                return Ok(Some((ind.clone(), perm)));
            }
        }
    }
    Ok(None)
}

fn elite_signature(pop: &[Individual<impl Real>]) -> Vec<Network> {
    let k = frac_ceil(STALL_FRACTION, pop.len()).max(1);
    let mut sig: Vec<Network> = pop[..k].iter().map(|i| i.network.clone()).collect();
    sig.sort();
    sig
}

/// Runs the GA until the target data is reproduced or the iteration limit
/// is reached. Only probe data enters; the target network never does.
pub fn run_reconstruction<T: Real>(
    target: &ProbeDataset<T>,
    known: &KnownEdges,
    cfg: &GaConfig,
    plan: &ProbePlan<T>,
) -> Result<GaReport<T>> {
    cfg.validate()?;
    plan.check_dataset(target)?;
    let n = target.n;
    if known.n() != n {
        return Err(invalid("known-edge constraint has the wrong node count"));
    }
    let size = cfg.population_size;
    let n_parents = cfg.parent_count();
    let n_strong = n_parents.div_ceil(2);
    let base_rate = cfg.mutation_mean_for(known);
    let replace = frac_ceil(cfg.replace_fraction, size).max(1);
    let seed = cfg.seed;

    let mut eval = Evaluator {
        target,
        plan,
        cache: HashMap::new(),
    };
    let mut nets = init_population(n, known, size, seed)?;
    let mut history = Vec::new();
    let mut extremes_total = 0;
    let mut extremes_since_injection = 0;
    let mut inject_pending = false;
    let mut stall = 0;
    let mut last_signature: Option<Vec<Network>> = None;

    for iter in 1..=cfg.max_iterations {
        let mut pop = eval.evaluate(std::mem::take(&mut nets))?;
        if inject_pending {
            let mut fresh: Vec<Network> = pop[..size - replace]
                .iter()
                .map(|i| i.network.clone())
                .collect();
            fresh.extend((0..replace).map(|k| {
                random_network(
                    n,
                    known,
                    &mut stream(seed, &[PHASE_INJECT, iter as u64, k as u64]),
                )
            }));
            pop = eval.evaluate(fresh)?;
            inject_pending = false;
        }
        debug_assert_eq!(pop.len(), size);
        debug_assert!(pop.iter().all(|i| known.is_satisfied_by(&i.network)));

        let best = pop[0].fitness;
        history.push(best.value());
        log::info!(
            "iter={iter} best={:.6e} extremes={extremes_total}",
            best.value()
        );

        if best.is_zero() {
            return Ok(GaReport {
                outcome: Outcome::Exact,
                iterations: iter,
                best: pop.swap_remove(0),
                isomorphism: None,
                fitness_history: history,
                extreme_mutation_count: extremes_total,
            });
        }
        if let Some((ind, perm)) = find_isomorphic(&pop, target, plan, known)? {
            return Ok(GaReport {
                outcome: Outcome::Isomorphic,
                iterations: iter,
                best: ind,
                isomorphism: Some(perm),
                fitness_history: history,
                extreme_mutation_count: extremes_total,
            });
        }
        if iter == cfg.max_iterations {
            return Ok(GaReport {
                outcome: Outcome::IterationLimit,
                iterations: iter,
                best: pop.swap_remove(0),
                isomorphism: None,
                fitness_history: history,
                extreme_mutation_count: extremes_total,
            });
        }

        let signature = elite_signature(&pop);
        if last_signature.as_ref() == Some(&signature) {
            stall += 1;
        } else {
            stall = 0;
        }
        last_signature = Some(signature);
        let extreme = stall >= cfg.stall_window;
        if extreme {
            stall = 0;
            extremes_total += 1;
            extremes_since_injection += 1;
            log::debug!("iter={iter} extreme mutation at rate {}", cfg.extreme_rate);
            if extremes_since_injection >= cfg.extreme_budget {
                extremes_since_injection = 0;
                inject_pending = true;
            }
        }
        let rate = if extreme { cfg.extreme_rate } else { base_rate };

        let parents = select_parents(&pop, cfg);
        let n_offspring = size - n_parents;
        let mut rng = stream(seed, &[PHASE_PARTNERS, iter as u64]);
        let mut couples = Vec::with_capacity(n_offspring);
        let k = cfg.matings_per_parent.min(n_parents - 1);
        'outer: for a in 0..n_parents {
            for pick in sample(&mut rng, n_parents - 1, k) {
                if couples.len() == n_offspring {
                    break 'outer;
                }
                couples.push((a, if pick >= a { pick + 1 } else { pick }));
            }
        }
        while couples.len() < n_offspring {
            let pair = sample(&mut rng, n_parents, 2);
            couples.push((pair.index(0), pair.index(1)));
        }

        let mut next: Vec<Network> = Vec::with_capacity(size);
        next.extend(parents.iter().map(|p| p.network.clone()));
        next.extend(couples.iter().enumerate().map(|(idx, &(a, b))| {
            mate(
                &parents[a],
                &parents[b],
                known,
                &mut stream(seed, &[PHASE_MATE, iter as u64, idx as u64]),
            )
        }));
        for (idx, net) in next.iter_mut().enumerate().skip(n_strong) {
            mutate(
                net,
                rate,
                known,
                &mut stream(seed, &[PHASE_MUTATE, iter as u64, idx as u64]),
            );
        }
        nets = next;
    }
    unreachable!("the loop returns at the iteration limit")
}
