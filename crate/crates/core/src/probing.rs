// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Probe procedures and the datasets they produce.
//!
//! Two procedures are supported: fixed excitation (inject at `e`, move the
//! sink over every other node) and multi-injection (an arbitrary set of
//! ordered `(e, s)` pairs). Both record the sink trace on a shared time grid
//! plus the sink population at a short probe time `t0`, from which direct
//! `e–s` edges are inferred.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    infer_edge, sink_populations_at, sink_traces, validate_times, SinkHamiltonian, SinkTrace,
};
use crate::error::{data, invalid, QnetError, Result};
use crate::fitness::PeakTimeFit;
use crate::graph::Network;
use crate::rng::stream;
use crate::scalar::Real;

/// Ordered (excitation, sink) pair.
pub type ProbeKey = (usize, usize);

/// Default number of measurement times per probe.
pub const DEFAULT_TIME_COUNT: usize = 5;

/// One probe configuration: excitation node, sink node and measurement grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig<T> {
    pub excitation: usize,
    pub sink: usize,
    pub times: Vec<T>,
}

impl<T: Real> ProbeConfig<T> {
    pub fn new(excitation: usize, sink: usize, times: Vec<T>) -> Result<Self> {
        if excitation == sink {
            return Err(invalid("excitation and sink must be distinct nodes"));
        }
        validate_probe_times(&times)?;
        Ok(Self {
            excitation,
            sink,
            times,
        })
    }
}

fn validate_probe_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("measurement time grid is empty"));
    }
    validate_times(times)?;
    if times[0] <= T::zero() {
        return Err(invalid("measurement times must be positive"));
    }
    Ok(())
}

/// Sink traces for a set of probe configurations sharing one time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeDataset<T> {
    pub n: usize,
    pub gamma: T,
    pub t0: T,
    pub times: Vec<T>,
    records: BTreeMap<ProbeKey, Vec<T>>,
    short_time: BTreeMap<ProbeKey, T>,
}

impl<T: Real> ProbeDataset<T> {
    pub fn empty(n: usize, gamma: T, t0: T, times: Vec<T>) -> Self {
        Self {
            n,
            gamma,
            t0,
            times,
            records: BTreeMap::new(),
            short_time: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Probe keys in `(e, s)` order.
    pub fn keys(&self) -> impl Iterator<Item = ProbeKey> + '_ {
        self.records.keys().copied()
    }

    pub fn populations(&self, key: ProbeKey) -> Option<&[T]> {
        self.records.get(&key).map(Vec::as_slice)
    }

    pub fn trace(&self, key: ProbeKey) -> Option<SinkTrace<T>> {
        self.records.get(&key).map(|p| SinkTrace {
            times: self.times.clone(),
            populations: p.clone(),
        })
    }

    pub fn short_time(&self, key: ProbeKey) -> Option<T> {
        self.short_time.get(&key).copied()
    }

    /// `(key, populations)` in key order.
    pub fn records(&self) -> impl Iterator<Item = (ProbeKey, &[T])> + '_ {
        self.records.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// The excitation node if every record shares one.
    pub fn single_excitation(&self) -> Option<usize> {
        let mut es = self.records.keys().map(|k| k.0);
        let first = es.next()?;
        es.all(|e| e == first).then_some(first)
    }

    /// Sum of all recorded populations in key order.
    pub fn total(&self) -> T {
        self.records
            .values()
            .flat_map(|v| v.iter())
            .map(|p| p.abs())
            .sum()
    }

    fn insert(&mut self, key: ProbeKey, populations: Vec<T>, short_time: Option<T>) {
        self.records.insert(key, populations);
        if let Some(p) = short_time {
            self.short_time.insert(key, p);
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&DatasetJson::from(self)).expect("dataset serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DatasetJson<T> = serde_json::from_str(text)?;
        Self::try_from(raw)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RecordJson<T> {
    e: usize,
    s: usize,
    p: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_t0: Option<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct DatasetJson<T> {
    n: usize,
    gamma: T,
    t0: T,
    times: Vec<T>,
    records: Vec<RecordJson<T>>,
}

impl<T: Real> From<&ProbeDataset<T>> for DatasetJson<T> {
    fn from(ds: &ProbeDataset<T>) -> Self {
        Self {
            n: ds.n,
            gamma: ds.gamma,
            t0: ds.t0,
            times: ds.times.clone(),
            records: ds
                .records
                .iter()
                .map(|(&(e, s), p)| RecordJson {
                    e,
                    s,
                    p: p.clone(),
                    p_t0: ds.short_time.get(&(e, s)).copied(),
                })
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<DatasetJson<T>> for ProbeDataset<T> {
    type Error = QnetError;

    fn try_from(raw: DatasetJson<T>) -> Result<Self> {
        if raw.n < 2 {
            return Err(data(format!("dataset node count {} < 2", raw.n)));
        }
        if !(raw.gamma > T::zero()) {
            return Err(data("dataset decay rate must be positive"));
        }
        validate_probe_times(&raw.times).map_err(|e| data(e.to_string()))?;
        let mut ds = ProbeDataset::empty(raw.n, raw.gamma, raw.t0, raw.times);
        for r in raw.records {
            if r.e >= raw.n || r.s >= raw.n || r.e == r.s {
                return Err(data(format!("invalid probe key ({},{})", r.e, r.s)));
            }
            if ds.records.contains_key(&(r.e, r.s)) {
                return Err(data(format!("duplicate probe key ({},{})", r.e, r.s)));
            }
            if r.p.len() != ds.times.len() {
                return Err(data(format!(
                    "record ({},{}) has {} samples for {} times",
                    r.e,
                    r.s,
                    r.p.len(),
                    ds.times.len()
                )));
            }
            ds.insert((r.e, r.s), r.p, r.p_t0);
        }
        Ok(ds)
    }
}

/// Which probe configurations a plan measures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    FixedExcitation(usize),
    Pairs(Vec<ProbeKey>),
}

/// A probing procedure: configurations, grid, decay rate and short probe time.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbePlan<T> {
    pub mode: ProbeMode,
    pub times: Vec<T>,
    pub gamma: T,
    pub t0: T,
}

impl<T: Real> ProbePlan<T> {
    pub fn fixed_excitation(e: usize, times: Vec<T>, gamma: T, t0: T) -> Self {
        Self {
            mode: ProbeMode::FixedExcitation(e),
            times,
            gamma,
            t0,
        }
    }

    pub fn pairs(pairs: Vec<ProbeKey>, times: Vec<T>, gamma: T, t0: T) -> Self {
        Self {
            mode: ProbeMode::Pairs(pairs),
            times,
            gamma,
            t0,
        }
    }

    /// Recovers the plan that produced `ds`.
    pub fn from_dataset(ds: &ProbeDataset<T>) -> Self {
        let keys: Vec<ProbeKey> = ds.keys().collect();
        let mode = match ds.single_excitation() {
            Some(e) if keys.len() == ds.n - 1 => ProbeMode::FixedExcitation(e),
            _ => ProbeMode::Pairs(keys),
        };
        Self {
            mode,
            times: ds.times.clone(),
            gamma: ds.gamma,
            t0: ds.t0,
        }
    }

    /// Probe keys for an `n`-node network, sorted.
    pub fn keys(&self, n: usize) -> Vec<ProbeKey> {
        let mut keys = match &self.mode {
            ProbeMode::FixedExcitation(e) => (0..n).filter(|s| s != e).map(|s| (*e, s)).collect(),
            ProbeMode::Pairs(p) => p.clone(),
        };
        keys.sort_unstable();
        keys
    }

    /// Runs the plan. `with_short_time` also records `P_s(t0)`.
    pub fn probe(&self, net: &Network, with_short_time: bool) -> Result<ProbeDataset<T>> {
        if let ProbeMode::FixedExcitation(e) = self.mode {
            if e >= net.n() {
                return Err(invalid(format!(
                    "excitation {e} out of range for n={}",
                    net.n()
                )));
            }
        }
        probe_keys(
            net,
            &self.keys(net.n()),
            &self.times,
            self.gamma,
            self.t0,
            with_short_time,
        )
    }

    /// Fails unless `ds` was produced by this plan on an `ds.n`-node network.
    pub fn check_dataset(&self, ds: &ProbeDataset<T>) -> Result<()> {
        let contract = |m: String| Err(QnetError::Contract(m));
        if ds.gamma != self.gamma || ds.t0 != self.t0 {
            return contract("decay rate or probe time differs between plan and data".into());
        }
        if ds.times != self.times {
            return contract("time grid differs between plan and data".into());
        }
        if !ds.keys().eq(self.keys(ds.n)) {
            return contract("probe configurations differ between plan and data".into());
        }
        Ok(())
    }
}

fn probe_keys<T: Real>(
    net: &Network,
    keys: &[ProbeKey],
    times: &[T],
    gamma: T,
    t0: T,
    with_short_time: bool,
) -> Result<ProbeDataset<T>> {
    validate_probe_times(times)?;
    if with_short_time && !(t0 > T::zero()) {
        return Err(invalid("short probe time must be positive"));
    }
    let n = net.n();
    let mut by_sink: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for &(e, s) in keys {
        if e >= n || s >= n {
            return Err(invalid(format!(
                "probe pair ({e},{s}) out of range for n={n}"
            )));
        }
        if e == s {
            return Err(invalid(format!(
                "probe pair ({e},{s}) places sink on the excitation node"
            )));
        }
        if !seen.insert((e, s)) {
            return Err(invalid(format!("duplicate probe pair ({e},{s})")));
        }
        by_sink.entry(s).or_default().push(e);
    }
    let mut ds = ProbeDataset::empty(n, gamma, t0, times.to_vec());
    for (s, excitations) in by_sink {
        let h = SinkHamiltonian::new(net, s, gamma)?;
        let traces = sink_traces(&h, &excitations, times)?;
        let short = if with_short_time {
            sink_populations_at(&h, &excitations, t0)?
                .into_iter()
                .map(Some)
                .collect()
        } else {
            vec![None; excitations.len()]
        };
        for ((e, trace), p0) in excitations.into_iter().zip(traces).zip(short) {
            ds.insert((e, s), trace.populations, p0);
        }
    }
    Ok(ds)
}

/// Fixed-excitation procedure: sink at every node other than `e`.
pub fn probe_fixed_excitation<T: Real>(
    net: &Network,
    e: usize,
    times: &[T],
    gamma: T,
    t0: T,
) -> Result<ProbeDataset<T>> {
    ProbePlan::fixed_excitation(e, times.to_vec(), gamma, t0).probe(net, true)
}

/// Multi-injection procedure over an explicit list of ordered pairs.
pub fn probe_pairs<T: Real>(
    net: &Network,
    pairs: &[ProbeKey],
    times: &[T],
    gamma: T,
    t0: T,
) -> Result<ProbeDataset<T>> {
    probe_keys(net, pairs, times, gamma, t0, true)
}

/// All ordered pairs `(e, s)`, `e ≠ s`, in a seed-determined shuffled order.
/// Prefixes of this sequence are the nested subsets used by multi-injection sweeps.
pub fn shuffled_pairs(n: usize, seed: u64) -> Vec<ProbeKey> {
    let mut pairs: Vec<ProbeKey> = (0..n)
        .flat_map(|e| (0..n).filter(move |&s| s != e).map(move |s| (e, s)))
        .collect();
    pairs.shuffle(&mut stream(seed, &[0x5041_4952]));
    pairs
}

/// Adjacency entries fixed by short-time inference, keyed by unordered pair `(i, j)`, `i < j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownEdges {
    n: usize,
    entries: BTreeMap<(usize, usize), bool>,
}

#[inline]
fn unordered(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl KnownEdges {
    pub fn none(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Reveals the true value of `net` on each listed pair.
    pub fn from_network(net: &Network, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut known = Self::none(net.n());
        for (i, j) in pairs {
            known.insert(i, j, net.has_edge(i, j));
        }
        known
    }

    pub fn insert(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j && i < self.n && j < self.n, "invalid pair ({i},{j})");
        self.entries.insert(unordered(i, j), present);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        self.entries.get(&unordered(i, j)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), bool)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Unordered pairs not fixed by the constraint, lexicographic.
    pub fn free_pairs(&self) -> Vec<(usize, usize)> {
        crate::graph::all_pairs(self.n)
            .filter(|k| !self.entries.contains_key(k))
            .collect()
    }

    /// Number of free optimisation parameters.
    pub fn free_count(&self) -> usize {
        self.n * (self.n - 1) / 2 - self.entries.len()
    }

    /// Overwrites every known entry of `net`.
    pub fn apply(&self, net: &mut Network) {
        for (&(i, j), &v) in &self.entries {
            net.set_edge(i, j, v);
        }
    }

    pub fn is_satisfied_by(&self, net: &Network) -> bool {
        self.entries
            .iter()
            .all(|(&(i, j), &v)| net.has_edge(i, j) == v)
    }
}

/// Infers the `e–s` entry for every probed pair from its short-time population.
pub fn infer_known_edges<T: Real>(ds: &ProbeDataset<T>, t0: T) -> Result<KnownEdges> {
    let mut known = KnownEdges::none(ds.n);
    for (e, s) in ds.keys() {
        let p = ds
            .short_time((e, s))
            .ok_or_else(|| data(format!("missing short-time record for ({e},{s})")))?;
        let edge = infer_edge(p, ds.gamma, t0);
        if let Some(prev) = known.get(e, s) {
            if prev != edge {
                return Err(data(format!(
                    "contradictory edge inference for {{{e},{s}}}"
                )));
            }
        }
        known.insert(e, s, edge);
    }
    Ok(known)
}

/// `count` times spread uniformly over `[t_peak/2, 3·t_peak/2]`.
pub fn measurement_schedule<T: Real>(
    n: usize,
    count: usize,
    fit: &PeakTimeFit<T>,
) -> Result<Vec<T>> {
    if count == 0 {
        return Err(invalid("measurement count must be at least 1"));
    }
    let centre = fit.peak_time(n);
    if !(centre > T::zero()) {
        return Err(invalid(format!("peak-time fit is non-positive at n={n}")));
    }
    Ok(uniform_window(centre, count))
}

pub(crate) fn uniform_window<T: Real>(centre: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![centre];
    }
    let half = T::lit(0.5);
    let lo = centre * half;
    let step = centre / T::from_usize_lossy(count - 1);
    (0..count)
        .map(|k| lo + step * T::from_usize_lossy(k))
        .collect()
}
