// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Scoring candidate networks against target probe data.

use std::cmp::Ordering;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{data, invalid, QnetError, Result};
use crate::graph::{Network, NodePermutation};
use crate::probing::ProbeDataset;
use crate::scalar::Real;

/// Separates numerical noise from structural differences in sink data.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Sum of absolute sink-population differences; smaller is fitter.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessScore<T>(pub T);

impl<T: Real> FitnessScore<T> {
    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 < T::lit(MATCH_TOLERANCE)
    }
}

fn check_grid<T: Real>(a: &ProbeDataset<T>, b: &ProbeDataset<T>) -> Result<()> {
    if a.n != b.n {
        return Err(data(format!("node count differs: {} vs {}", a.n, b.n)));
    }
    if a.gamma != b.gamma {
        return Err(data("decay rate differs between datasets"));
    }
    if a.times != b.times {
        return Err(data("time grids differ between datasets"));
    }
    Ok(())
}

/// `Σ_keys Σ_times |P_target − P_candidate|`, accumulated in key order.
pub fn fitness<T: Real>(
    target: &ProbeDataset<T>,
    candidate: &ProbeDataset<T>,
) -> Result<FitnessScore<T>> {
    check_grid(target, candidate)?;
    if !target.keys().eq(candidate.keys()) {
        return Err(data("probe configurations differ between datasets"));
    }
    let total = target
        .records()
        .zip(candidate.records())
        .flat_map(|((_, p), (_, q))| p.iter().zip(q).map(|(x, y)| (*x - *y).abs()))
        .sum();
    Ok(FitnessScore(total))
}

/// Difference of the grand totals of the two datasets; zero for isomorphic
/// networks probed under corresponding labellings.
pub fn delta_sum<T: Real>(target: &ProbeDataset<T>, candidate: &ProbeDataset<T>) -> Result<T> {
    check_grid(target, candidate)?;
    if target.len() != candidate.len() {
        return Err(data("datasets hold different numbers of records"));
    }
    Ok(target.total() - candidate.total())
}

/// Lexicographic order on columns with values within `tol` treated as equal.
fn cmp_columns<T: Real>(a: &[T], b: &[T], tol: T) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (*x - *y).abs() > tol {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

fn sorted_columns<T: Real>(ds: &ProbeDataset<T>, tol: T) -> Vec<(usize, &[T])> {
    let mut cols: Vec<(usize, &[T])> = ds.records().map(|((_, s), p)| (s, p)).collect();
    cols.sort_by(|a, b| cmp_columns(a.1, b.1, tol).then(a.0.cmp(&b.0)));
    cols
}

/// Upper bound on the relabellings [`sink_data_isomorphisms`] enumerates.
pub const MAX_RELABELLINGS: usize = 720;

/// Looks for a sink relabelling that maps the candidate's fixed-excitation
/// data onto the target's.
///
/// Columns (one time series per sink) of both datasets are sorted; if the
/// sorted sequences agree within [`MATCH_TOLERANCE`], the induced relabelling
/// (fixing the excitation node) is returned. `perm[i]` is the target label of
/// candidate node `i`. The result is a candidate isomorphism only; callers
/// confirm it structurally or by re-probing. With tied columns it may fail
/// confirmation where another tie order succeeds; see
/// [`sink_data_isomorphisms`].
///
/// Returns `Ok(None)` for non-matching columns and for datasets that are not
/// fixed-excitation data with a common excitation node. Calling it on a pair
/// that fails the Δ-sum gate is a contract violation.
pub fn sink_data_isomorphism<T: Real>(
    target: &ProbeDataset<T>,
    candidate: &ProbeDataset<T>,
    candidate_net: &Network,
) -> Result<Option<NodePermutation>> {
    Ok(sink_data_isomorphisms(target, candidate, candidate_net, 1)?
        .into_iter()
        .next())
}

/// Every relabelling consistent with the sorted sink columns, up to `limit`.
///
/// Sinks whose target columns agree within [`MATCH_TOLERANCE`] are
/// interchangeable as far as the data can tell, so each tie group is
/// expanded in all orders. Same contract as [`sink_data_isomorphism`].
pub fn sink_data_isomorphisms<T: Real>(
    target: &ProbeDataset<T>,
    candidate: &ProbeDataset<T>,
    candidate_net: &Network,
    limit: usize,
) -> Result<Vec<NodePermutation>> {
    let tol = T::lit(MATCH_TOLERANCE);
    let delta = delta_sum(target, candidate)?;
    if delta.abs() >= tol {
        return Err(QnetError::Contract(format!(
            "isomorphism search requires |Δ| < {MATCH_TOLERANCE}, got {delta}"
        )));
    }
    let n = target.n;
    if candidate_net.n() != n {
        return Err(invalid("candidate network size differs from the dataset"));
    }
    let e = match (target.single_excitation(), candidate.single_excitation()) {
        (Some(a), Some(b)) if a == b && target.len() == n - 1 && candidate.len() == n - 1 => a,
        _ => return Ok(Vec::new()),
    };
    let target_cols = sorted_columns(target, tol);
    let cand_cols = sorted_columns(candidate, tol);
    let columns_match = target_cols
        .iter()
        .zip(&cand_cols)
        .all(|((_, tp), (_, cp))| {
            tp.iter()
                .zip(cp.iter())
                .all(|(x, y)| (*x - *y).abs() <= tol)
        });
    if !columns_match {
        return Ok(Vec::new());
    }
    // Runs of consecutive tied target columns: (target sinks, candidate sinks).
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (k, ((ts, _), (cs, _))) in target_cols.iter().zip(&cand_cols).enumerate() {
        let tied = k > 0 && cmp_columns(target_cols[k - 1].1, target_cols[k].1, tol).is_eq();
        match groups.last_mut() {
            Some((t, c)) if tied => {
                t.push(*ts);
                c.push(*cs);
            }
            _ => groups.push((vec![*ts], vec![*cs])),
        }
    }
    groups
        .iter()
        .map(|(_, c)| c.iter().copied().permutations(c.len()))
        .multi_cartesian_product()
        .take(limit)
        .map(|orders| {
            let mut perm = vec![e; n];
            for ((t, _), order) in groups.iter().zip(&orders) {
                for (&ts, &cs) in t.iter().zip(order) {
                    perm[cs] = ts;
                }
            }
            NodePermutation::new(perm)
        })
        .collect()
}

/// Sample Pearson correlation coefficient.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(invalid("correlation needs at least two samples"));
    }
    let len = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / len;
    let my = ys.iter().copied().sum::<T>() / len;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(QnetError::UndefinedCorrelation(
            "zero variance input".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt()))
        .max(-T::one())
        .min(T::one()))
}

/// Fitness-distance correlation of paired trial samples.
pub fn fdc<T: Real>(fitnesses: &[T], distances: &[T]) -> Result<T> {
    pearson(fitnesses, distances)
}

/// Peak-FDC time model `t_peak(n) = a·exp(−b·n) + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PeakTimeFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

/// Bundled fit of the constrained-mode peak times, produced by the `fdc`
/// experiment (n ∈ 5..=12, seed 2026) and shipped as data;
/// the file records its configuration and per-n peaks.
pub const BUNDLED_PEAK_TIME_FIT: &str = include_str!("../data/peak_time_fit.json");

#[derive(Deserialize)]
struct BundledFit {
    a: f64,
    b: f64,
    c: f64,
}

impl<T: Real> PeakTimeFit<T> {
    #[inline]
    pub fn peak_time(&self, n: usize) -> T {
        self.a * (-self.b * T::from_usize_lossy(n)).exp() + self.c
    }

    pub fn bundled() -> Self {
        let raw: BundledFit =
            serde_json::from_str(BUNDLED_PEAK_TIME_FIT).expect("bundled peak-time fit parses");
        Self {
            a: T::lit(raw.a),
            b: T::lit(raw.b),
            c: T::lit(raw.c),
        }
    }
}
