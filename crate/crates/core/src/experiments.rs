// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded parameter sweeps: fitness-distance correlation over time, peak-time
//! fits, and GA convergence against population size and probe coverage.
//!
//! Targets are shared across the cells of a sweep (common random numbers), so
//! differences between cells reflect the swept parameter rather than target
//! sampling. Cells run in parallel; each draws from its own keyed stream and
//! rows are assembled in grid order.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QnetError, Result};
use crate::fitness::{fdc, PeakTimeFit};
use crate::ga::{run_reconstruction, GaConfig};
use crate::graph::{
    all_pairs, edge_distance, find_isomorphism, generate_erdos_renyi, generate_random_connected,
    is_connected, Network,
};
use crate::probing::{
    infer_known_edges, measurement_schedule, shuffled_pairs, ProbeKey, ProbePlan,
    DEFAULT_TIME_COUNT,
};
use crate::rng::{derive_seed, stream};

const KEY_TARGET: u64 = 11;
const KEY_TRIAL: u64 = 12;
const KEY_GA: u64 = 13;
const KEY_PAIRS: u64 = 14;

const GAMMA: f64 = crate::dynamics::DEFAULT_GAMMA;
const T0: f64 = crate::dynamics::DEFAULT_T0;

/// Tabular sweep output: one row per cell, with replicate counts as columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl SweepResult {
    fn new(experiment: &str, columns: &[&str], seed: u64, config: &impl Serialize) -> Self {
        Self {
            experiment: experiment.to_owned(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Header plus one line per row; values use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Full result including config and seed.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_increasing<T: PartialOrd + Copy>(what: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid(format!("{what} is empty")));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

fn target_network(n: usize, seed: u64, k: usize) -> Network {
    generate_random_connected(n, &mut stream(seed, &[KEY_TARGET, n as u64, k as u64]))
        .expect("n ≥ 2")
}

// ---------------------------------------------------------------------------
// Fitness-distance correlation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdcSweepConfig {
    pub n_values: Vec<usize>,
    pub n_targets: usize,
    pub n_trials: usize,
    /// Uniform grid `t_step, 2·t_step, …, t_max`.
    pub t_step: f64,
    pub t_max: f64,
    /// Trials share the target's excitation row.
    pub constrained: bool,
    pub excitation: usize,
}

impl Default for FdcSweepConfig {
    fn default() -> Self {
        Self {
            n_values: vec![5, 6, 7, 8, 9],
            n_targets: 100,
            n_trials: 200,
            t_step: 0.05,
            t_max: 6.0,
            constrained: true,
            excitation: 0,
        }
    }
}

impl FdcSweepConfig {
    pub fn times(&self) -> Vec<f64> {
        let count = (self.t_max / self.t_step + 1e-9).floor() as usize;
        (1..=count).map(|k| k as f64 * self.t_step).collect()
    }
}

/// Mean fitness-distance correlation per `(n, t)` cell.
///
/// For each target, `n_trials` connected Erdős–Rényi trials are probed once over the whole grid; the single-time fitness
/// at each `t` is correlated with the true edge distance. Targets whose
/// trial set has zero variance at some `t` are excluded from that cell and
/// counted in `excluded`.
pub fn fdc_time_sweep(cfg: &FdcSweepConfig, seed: u64) -> Result<SweepResult> {
    if cfg.n_targets < 2 || cfg.n_trials < 2 {
        return Err(invalid("target and trial counts must be at least 2"));
    }
    if !(cfg.t_step > 0.0 && cfg.t_max >= cfg.t_step) {
        return Err(invalid("time grid must be positive"));
    }
    check_increasing("n values", &cfg.n_values)?;
    if cfg.n_values[0] < 2 || cfg.excitation >= cfg.n_values[0] {
        return Err(invalid(
            "n values must be ≥ 2 and exceed the excitation index",
        ));
    }
    let times = cfg.times();
    let name = if cfg.constrained {
        "fdc"
    } else {
        "fdc_unconstrained"
    };
    let mut result = SweepResult::new(
        name,
        &["n", "t", "mean_fdc", "replicates", "excluded"],
        seed,
        cfg,
    );
    for &n in &cfg.n_values {
        let plan = ProbePlan::fixed_excitation(cfg.excitation, times.clone(), GAMMA, T0);
        let per_target: Vec<Vec<Option<f64>>> = (0..cfg.n_targets)
            .into_par_iter()
            .map(|k| fdc_for_target(cfg, &plan, n, k, seed))
            .collect::<Result<_>>()?;
        for (ti, &t) in times.iter().enumerate() {
            let vals: Vec<f64> = per_target.iter().filter_map(|v| v[ti]).collect();
            let mean = if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            };
            let excluded = cfg.n_targets - vals.len();
            result
                .rows
                .push(vec![n as f64, t, mean, vals.len() as f64, excluded as f64]);
        }
    }
    Ok(result)
}

fn fdc_for_target(
    cfg: &FdcSweepConfig,
    plan: &ProbePlan<f64>,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    let target = target_network(n, seed, k);
    let target_data = plan.probe(&target, false)?;
    let n_times = plan.times.len();
    let mut fit = vec![vec![0.0; cfg.n_trials]; n_times];
    let mut dist = vec![0.0; cfg.n_trials];
    for j in 0..cfg.n_trials {
        let trial = trial_network(
            cfg,
            &target,
            &mut stream(seed, &[KEY_TRIAL, n as u64, k as u64, j as u64]),
        )?;
        dist[j] = edge_distance(&trial, &target)? as f64;
        let data = plan.probe(&trial, false)?;
        for ((_, p), (_, q)) in target_data.records().zip(data.records()) {
            for ti in 0..n_times {
                fit[ti][j] += (p[ti] - q[ti]).abs();
            }
        }
    }
    fit.iter()
        .map(|f| match fdc(f, &dist) {
            Ok(r) => Ok(Some(r)),
            Err(QnetError::UndefinedCorrelation(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Connected Erdős–Rényi trial with a fresh uniform edge probability per
/// draw; in constrained mode the excitation row is copied from the target
/// before the connectivity test.
fn trial_network<R: Rng + ?Sized>(
    cfg: &FdcSweepConfig,
    target: &Network,
    rng: &mut R,
) -> Result<Network> {
    let (n, e) = (target.n(), cfg.excitation);
    loop {
        let p: f64 = rng.random();
        let mut trial = generate_erdos_renyi(n, p, rng)?;
        if cfg.constrained {
            for s in (0..n).filter(|&s| s != e) {
                trial.set_edge(e, s, target.has_edge(e, s));
            }
        }
        if is_connected(&trial) {
            return Ok(trial);
        }
    }
}

/// Location of the FDC maximum for one network size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakPoint {
    pub n: usize,
    pub t_peak: f64,
    pub fdc_peak: f64,
    /// False when the maximum sits on the first or last grid point.
    pub interior: bool,
}

/// Per-n argmax of the mean FDC, refined by a parabola through the maximum
/// and its neighbours.
pub fn peak_times(sweep: &SweepResult) -> Result<Vec<PeakPoint>> {
    let (ns, ts, fs) = match (
        sweep.column("n"),
        sweep.column("t"),
        sweep.column("mean_fdc"),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(invalid("sweep lacks n, t or mean_fdc columns")),
    };
    let mut out = Vec::new();
    let mut start = 0;
    while start < ns.len() {
        let n = ns[start];
        let end = start + ns[start..].iter().take_while(|&&m| m == n).count();
        let (t, f) = (&ts[start..end], &fs[start..end]);
        let (k, &best) = f
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .ok_or_else(|| invalid(format!("no finite FDC values for n={n}")))?;
        let interior = k > 0 && k + 1 < f.len() && f[k - 1].is_finite() && f[k + 1].is_finite();
        let (mut t_peak, mut fdc_peak) = (t[k], best);
        if interior {
            let curv = f[k - 1] - 2.0 * f[k] + f[k + 1];
            if curv < 0.0 {
                let delta = 0.5 * (f[k - 1] - f[k + 1]) / curv;
                t_peak = t[k] + delta * (t[k + 1] - t[k - 1]) / 2.0;
                fdc_peak = f[k] - 0.25 * (f[k - 1] - f[k + 1]) * delta;
            }
        }
        out.push(PeakPoint {
            n: n as usize,
            t_peak,
            fdc_peak,
            interior,
        });
        start = end;
    }
    Ok(out)
}

/// Least-squares `t_peak(n) = a·exp(−b·n) + c` through the interior peaks.
pub fn fit_peak_time(sweep: &SweepResult) -> Result<PeakTimeFit<f64>> {
    let points: Vec<(f64, f64)> = peak_times(sweep)?
        .into_iter()
        .filter(|p| p.interior)
        .map(|p| (p.n as f64, p.t_peak))
        .collect();
    fit_inverse_exponential(&points)
}

/// `a`, `c` by linear least squares for fixed `b`; returns `(sse, a, c)`.
fn linear_part(points: &[(f64, f64)], b: f64) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, t) in points {
        let x = (-b * n).exp();
        sx += x;
        sy += t;
        sxx += x * x;
        sxy += x * t;
    }
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (f64::INFINITY, 0.0, sy / m);
    }
    let a = (m * sxy - sx * sy) / det;
    let c = (sy - a * sx) / m;
    let sse = points
        .iter()
        .map(|&(n, t)| (t - a * (-b * n).exp() - c).powi(2))
        .sum();
    (sse, a, c)
}

pub fn fit_inverse_exponential(points: &[(f64, f64)]) -> Result<PeakTimeFit<f64>> {
    const B_MIN: f64 = 1e-3;
    const B_MAX: f64 = 5.0;
    if points.len() < 3 {
        return Err(QnetError::FitFailure(format!(
            "need at least 3 interior peaks, have {}",
            points.len()
        )));
    }
    let grid: Vec<f64> = (0..=2000)
        .map(|k| B_MIN * (B_MAX / B_MIN).powf(k as f64 / 2000.0))
        .collect();
    let k = (0..grid.len())
        .min_by(|&i, &j| {
            linear_part(points, grid[i])
                .0
                .partial_cmp(&linear_part(points, grid[j]).0)
                .unwrap()
        })
        .unwrap();
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if linear_part(points, x1).0 < linear_part(points, x2).0 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let b = 0.5 * (lo + hi);
    let (_, a, c) = linear_part(points, b);
    if k == 0 || a <= 0.0 {
        return Err(QnetError::FitFailure(format!(
            "peak times do not decay with n (a={a:.3e}, b={b:.3e})"
        )));
    }
    Ok(PeakTimeFit { a, b, c })
}

// ---------------------------------------------------------------------------
// GA convergence

/// Shared settings for sweeps that run the reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionSettings {
    pub ga: GaConfig,
    pub time_count: usize,
    /// Measurement-window model; `None` uses the bundled fit.
    pub peak_time_fit: Option<PeakTimeFit<f64>>,
    pub excitation: usize,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            time_count: DEFAULT_TIME_COUNT,
            peak_time_fit: None,
            excitation: 0,
        }
    }
}

impl ReconstructionSettings {
    pub fn times(&self, n: usize) -> Result<Vec<f64>> {
        let fit = self.peak_time_fit.unwrap_or_else(PeakTimeFit::bundled);
        measurement_schedule(n, self.time_count, &fit)
    }
}

/// Outcome of reconstructing one target, judged against the true network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub iterations: usize,
}

/// Probes `target` with `plan`, infers known edges, runs the GA and checks the
/// result against the target out of band.
///
/// A converged run succeeds when the reconstruction is the target up to node
/// relabelling. Some targets share their probe data with a relabelled copy
/// (two sinks with identical traces, say), and no data-driven search can
/// tell those apart.
pub fn reconstruct_target(
    target: &Network,
    plan: &ProbePlan<f64>,
    ga: &GaConfig,
) -> Result<TrialOutcome> {
    let data = plan.probe(target, true)?;
    let known = infer_known_edges(&data, plan.t0)?;
    let report = run_reconstruction(&data, &known, ga, plan)?;
    let rebuilt = report.reconstructed();
    Ok(TrialOutcome {
        success: report.outcome.converged()
            && (rebuilt == *target || find_isomorphism(&rebuilt, target, None).is_some()),
        iterations: report.iterations,
    })
}

fn ga_for(
    settings: &ReconstructionSettings,
    population: usize,
    seed: u64,
    key: &[u64],
) -> GaConfig {
    GaConfig {
        population_size: population,
        seed: derive_seed(seed, key),
        ..settings.ga.clone()
    }
}

/// Success rate and mean iterations over `outcomes`.
fn summarize(outcomes: &[TrialOutcome]) -> (f64, f64) {
    let m = outcomes.len().max(1) as f64;
    let ok = outcomes.iter().filter(|o| o.success).count() as f64;
    let iters = outcomes.iter().map(|o| o.iterations as f64).sum::<f64>();
    (ok / m, iters / m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSweepConfig {
    pub n: usize,
    pub pop_sizes: Vec<usize>,
    pub n_targets: usize,
    pub settings: ReconstructionSettings,
}

impl Default for PopulationSweepConfig {
    fn default() -> Self {
        Self {
            n: 6,
            pop_sizes: vec![20, 50, 100],
            n_targets: 50,
            settings: ReconstructionSettings::default(),
        }
    }
}

/// Fixed-excitation convergence rate per population size.
pub fn convergence_vs_population(cfg: &PopulationSweepConfig, seed: u64) -> Result<SweepResult> {
    check_increasing("population sizes", &cfg.pop_sizes)?;
    let n = cfg.n;
    let times = cfg.settings.times(n)?;
    let plan = ProbePlan::fixed_excitation(cfg.settings.excitation, times, GAMMA, T0);
    let mut result = SweepResult::new(
        "pop",
        &["n", "population", "rate", "replicates", "mean_iterations"],
        seed,
        cfg,
    );
    for &pop in &cfg.pop_sizes {
        let outcomes: Vec<TrialOutcome> = (0..cfg.n_targets)
            .into_par_iter()
            .map(|k| {
                let ga = ga_for(
                    &cfg.settings,
                    pop,
                    seed,
                    &[KEY_GA, n as u64, pop as u64, k as u64],
                );
                reconstruct_target(&target_network(n, seed, k), &plan, &ga)
            })
            .collect::<Result<_>>()?;
        let (rate, iters) = summarize(&outcomes);
        result.rows.push(vec![
            n as f64,
            pop as f64,
            rate,
            cfg.n_targets as f64,
            iters,
        ]);
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigsSweepConfig {
    pub n: usize,
    pub config_counts: Vec<usize>,
    pub population: usize,
    pub n_targets: usize,
    pub settings: ReconstructionSettings,
}

impl Default for ConfigsSweepConfig {
    fn default() -> Self {
        Self {
            n: 10,
            config_counts: vec![0, 23, 45, 68, 90],
            population: 50,
            n_targets: 30,
            settings: ReconstructionSettings::default(),
        }
    }
}

/// Probe pairs for target `k`: a prefix of its own shuffled pair order, so
/// larger counts extend smaller ones.
fn config_pairs(n: usize, count: usize, seed: u64, k: usize) -> Vec<ProbeKey> {
    let mut pairs = shuffled_pairs(n, derive_seed(seed, &[KEY_PAIRS, n as u64, k as u64]));
    pairs.truncate(count);
    pairs
}

fn configs_outcomes(
    n: usize,
    count: usize,
    population: usize,
    n_targets: usize,
    settings: &ReconstructionSettings,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    let times = settings.times(n)?;
    (0..n_targets)
        .into_par_iter()
        .map(|k| {
            let plan = ProbePlan::pairs(config_pairs(n, count, seed, k), times.clone(), GAMMA, T0);
            let ga = ga_for(
                settings,
                population,
                seed,
                &[KEY_GA, n as u64, population as u64, count as u64, k as u64],
            );
            reconstruct_target(&target_network(n, seed, k), &plan, &ga)
        })
        .collect()
}

/// Multi-injection convergence rate per number of probed ordered pairs.
pub fn convergence_vs_configs(cfg: &ConfigsSweepConfig, seed: u64) -> Result<SweepResult> {
    check_increasing("configuration counts", &cfg.config_counts)?;
    let max = cfg.n * (cfg.n - 1);
    if cfg.config_counts.last().is_some_and(|&c| c > max) {
        return Err(invalid(format!(
            "configuration count exceeds n(n−1) = {max}"
        )));
    }
    let mut result = SweepResult::new(
        "configs",
        &[
            "n",
            "configs",
            "population",
            "rate",
            "replicates",
            "mean_iterations",
        ],
        seed,
        cfg,
    );
    for &count in &cfg.config_counts {
        let outcomes = configs_outcomes(
            cfg.n,
            count,
            cfg.population,
            cfg.n_targets,
            &cfg.settings,
            seed,
        )?;
        let (rate, iters) = summarize(&outcomes);
        result.rows.push(vec![
            cfg.n as f64,
            count as f64,
            cfg.population as f64,
            rate,
            cfg.n_targets as f64,
            iters,
        ]);
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinPopulationConfig {
    pub n: usize,
    pub config_counts: Vec<usize>,
    pub n_targets: usize,
    pub floor: usize,
    pub ceiling: usize,
    /// Success rate that counts as convergence.
    pub threshold: f64,
    /// Bisection stops once the bracket is below this fraction of the estimate.
    pub resolution: f64,
    pub settings: ReconstructionSettings,
}

impl Default for MinPopulationConfig {
    fn default() -> Self {
        Self {
            n: 8,
            config_counts: vec![14, 28, 42, 56],
            n_targets: 20,
            floor: 10,
            ceiling: 2000,
            threshold: 0.9,
            resolution: 0.1,
            settings: ReconstructionSettings::default(),
        }
    }
}

/// Smallest population in `[floor, ceiling]` meeting `passes`, assuming the
/// predicate is monotone. `None` when even the ceiling fails.
fn bisect_population(
    floor: usize,
    ceiling: usize,
    resolution: f64,
    mut passes: impl FnMut(usize) -> Result<bool>,
) -> Result<Option<usize>> {
    if !passes(ceiling)? {
        return Ok(None);
    }
    if passes(floor)? {
        return Ok(Some(floor));
    }
    let (mut lo, mut hi) = (floor, ceiling);
    while hi - lo > 1 && (hi - lo) as f64 > resolution * hi as f64 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Per configuration count, the smallest population reaching `threshold`
/// success over the target set. Unresolved cells report `NaN`.
pub fn min_population_for_convergence(cfg: &MinPopulationConfig, seed: u64) -> Result<SweepResult> {
    check_increasing("configuration counts", &cfg.config_counts)?;
    if cfg.floor < 5 || cfg.floor >= cfg.ceiling {
        return Err(invalid(
            "population bracket must satisfy 5 ≤ floor < ceiling",
        ));
    }
    let mut result = SweepResult::new(
        "minpop",
        &["n", "configs", "min_population", "resolved", "replicates"],
        seed,
        cfg,
    );
    for &count in &cfg.config_counts {
        let found = bisect_population(cfg.floor, cfg.ceiling, cfg.resolution, |pop| {
            let outcomes = configs_outcomes(cfg.n, count, pop, cfg.n_targets, &cfg.settings, seed)?;
            Ok(summarize(&outcomes).0 >= cfg.threshold)
        })?;
        let (value, resolved) = match found {
            Some(p) => (p as f64, 1.0),
            None => (f64::NAN, 0.0),
        };
        result.rows.push(vec![
            cfg.n as f64,
            count as f64,
            value,
            resolved,
            cfg.n_targets as f64,
        ]);
    }
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxUnknownConfig {
    pub n_values: Vec<usize>,
    pub pop_sizes: Vec<usize>,
    pub n_targets: usize,
    pub threshold: f64,
    pub settings: ReconstructionSettings,
}

impl Default for MaxUnknownConfig {
    fn default() -> Self {
        Self {
            n_values: vec![6, 7, 8],
            pop_sizes: vec![20, 50, 100],
            n_targets: 20,
            threshold: 0.9,
            settings: ReconstructionSettings::default(),
        }
    }
}

/// Fixed-excitation pairs plus one extra probe per revealed pair, leaving
/// exactly `unknown` pairs off the excitation row unprobed.
fn pairs_with_unknown(n: usize, e: usize, unknown: usize, seed: u64, k: usize) -> Vec<ProbeKey> {
    let mut rest: Vec<(usize, usize)> = all_pairs(n).filter(|&(i, j)| i != e && j != e).collect();
    rest.shuffle(&mut stream(seed, &[KEY_PAIRS, n as u64, k as u64]));
    let reveal = rest.len() - unknown;
    let mut pairs: Vec<ProbeKey> = (0..n).filter(|&s| s != e).map(|s| (e, s)).collect();
    pairs.extend(rest[..reveal].iter().copied());
    pairs
}

/// For each `(n, population)`, the largest number of unprobed connections at
/// which the success rate stays at or above `threshold`.
pub fn max_unknown_connections(cfg: &MaxUnknownConfig, seed: u64) -> Result<SweepResult> {
    check_increasing("n values", &cfg.n_values)?;
    check_increasing("population sizes", &cfg.pop_sizes)?;
    let e = cfg.settings.excitation;
    let mut result = SweepResult::new(
        "maxconn",
        &[
            "n",
            "population",
            "max_unknown",
            "upper_bound",
            "replicates",
        ],
        seed,
        cfg,
    );
    for &n in &cfg.n_values {
        if e >= n {
            return Err(invalid(format!("excitation {e} out of range for n={n}")));
        }
        let upper = (n - 1) * (n - 2) / 2;
        let times = cfg.settings.times(n)?;
        for &pop in &cfg.pop_sizes {
            let passes = |unknown: usize| -> Result<bool> {
                let outcomes: Vec<TrialOutcome> = (0..cfg.n_targets)
                    .into_par_iter()
                    .map(|k| {
                        let plan = ProbePlan::pairs(
                            pairs_with_unknown(n, e, unknown, seed, k),
                            times.clone(),
                            GAMMA,
                            T0,
                        );
                        let ga = ga_for(
                            &cfg.settings,
                            pop,
                            seed,
                            &[KEY_GA, n as u64, pop as u64, unknown as u64, k as u64],
                        );
                        reconstruct_target(&target_network(n, seed, k), &plan, &ga)
                    })
                    .collect::<Result<_>>()?;
                Ok(summarize(&outcomes).0 >= cfg.threshold)
            };
            // Largest passing count; zero unknowns always pass.
            let (mut lo, mut hi) = (0, upper + 1);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if passes(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            result.rows.push(vec![
                n as f64,
                pop as f64,
                lo as f64,
                upper as f64,
                cfg.n_targets as f64,
            ]);
        }
    }
    Ok(result)
}
