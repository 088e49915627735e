// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation quantum walk with an absorbing sink.
//!
//! The walker evolves under the effective non-Hermitian generator
//! `H = A − iγ|s⟩⟨s|`. Population that leaves the network is counted as
//! absorbed by the sink, so `P_s(t) = 1 − ‖ψ(t)‖²`.

use std::fmt::Write as _;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{data, invalid, QnetError, Result};
use crate::graph::Network;
use crate::linalg::{expm, CMatrix};
use crate::scalar::Real;

pub const DEFAULT_GAMMA: f64 = 1.0;

/// Short-time probe instant used for edge inference.
pub const DEFAULT_T0: f64 = 0.05;

/// Populations may overshoot `[0, 1]` by at most this much before it is
/// treated as a numerical failure rather than rounding.
pub const POPULATION_TOLERANCE: f64 = 1e-9;

/// `A + ω·I − iγ|s⟩⟨s|` for a network `A`, sink node `s` and decay rate `γ`.
///
/// The on-site energy `ω` is always zero for public constructors: a uniform
/// on-site term only contributes a global phase.
#[derive(Clone, Debug)]
pub struct SinkHamiltonian<T> {
    net: Network,
    sink: usize,
    gamma: T,
    matrix: CMatrix<T>,
}

impl<T: Real> SinkHamiltonian<T> {
    pub fn new(net: &Network, sink: usize, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(invalid(format!("decay rate must be positive, got {gamma}")));
        }
        Self::build(net, sink, gamma, T::zero())
    }

    /// Unvalidated construction admitting `γ = 0` and a non-zero on-site energy.
    pub(crate) fn build(net: &Network, sink: usize, gamma: T, on_site: T) -> Result<Self> {
        let n = net.n();
        if sink >= n {
            return Err(invalid(format!("sink {sink} out of range for n={n}")));
        }
        let mut matrix = CMatrix::zeros(n);
        for i in 0..n {
            matrix[(i, i)] = Complex::new(on_site, T::zero());
            for j in net.neighbours(i) {
                matrix[(i, j)] = Complex::new(T::one(), T::zero());
            }
        }
        matrix[(sink, sink)].im = -gamma;
        Ok(Self {
            net: net.clone(),
            sink,
            gamma,
            matrix,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// `exp(−i·H·t)`.
    pub fn propagator(&self, t: T) -> CMatrix<T> {
        expm(&self.matrix.scaled(Complex::new(T::zero(), -t)))
    }

    fn check_node(&self, e: usize) -> Result<()> {
        if e >= self.n() {
            return Err(invalid(format!(
                "excitation node {e} out of range for n={}",
                self.n()
            )));
        }
        Ok(())
    }
}

/// Amplitudes of the walker over the network nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState<T> {
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> WalkState<T> {
    pub fn basis(n: usize, node: usize) -> Self {
        let mut amplitudes = vec![Complex::zero(); n];
        amplitudes[node] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Cumulative population absorbed by the sink, clamped to `[0, 1]`.
    pub fn absorbed(&self) -> Result<T> {
        clamp_population(T::one() - self.norm_sqr())
    }
}

/// Sink population sampled on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SinkTrace<T> {
    pub times: Vec<T>,
    pub populations: Vec<T>,
}

impl<T: Real> SinkTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,p_sink` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p_sink\n");
        for (t, p) in self.times.iter().zip(&self.populations) {
            writeln!(out, "{t:.16e},{p:.16e}").unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,p_sink") {
            return Err(data("sink trace CSV must start with header `t,p_sink`"));
        }
        let mut times = Vec::new();
        let mut populations = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (t, p) = line
                .split_once(',')
                .ok_or_else(|| data(format!("row {}: expected two columns", k + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| data(format!("row {}: {e}", k + 1)))
            };
            times.push(parse(t)?);
            populations.push(parse(p)?);
        }
        validate_times(&times)?;
        Ok(Self { times, populations })
    }
}

fn clamp_population<T: Real>(p: T) -> Result<T> {
    let tol = T::lit(POPULATION_TOLERANCE);
    if !p.is_finite() || p < -tol || p > T::one() + tol {
        return Err(QnetError::Numerical(format!(
            "sink population {p} outside [0,1] beyond tolerance"
        )));
    }
    Ok(p.max(T::zero()).min(T::one()))
}

/// Times must be finite, non-negative and strictly increasing.
pub(crate) fn validate_times<T: Real>(times: &[T]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| !t.is_finite() || **t < T::zero()) {
        return Err(invalid(format!(
            "time {t} is not a finite non-negative value"
        )));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(invalid(format!(
            "time grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `exp(−i·H·t)|e⟩`.
pub fn evolve<T: Real>(h: &SinkHamiltonian<T>, excitation: usize, t: T) -> Result<WalkState<T>> {
    h.check_node(excitation)?;
    validate_times(&[t])?;
    if t.is_zero() {
        return Ok(WalkState::basis(h.n(), excitation));
    }
    Ok(WalkState {
        amplitudes: h.propagator(t).column(excitation),
    })
}

/// Sink population `1 − ‖ψ(t)‖²` at every grid time.
pub fn sink_population<T: Real>(
    h: &SinkHamiltonian<T>,
    excitation: usize,
    times: &[T],
) -> Result<SinkTrace<T>> {
    Ok(sink_traces(h, &[excitation], times)?
        .pop()
        .expect("one trace per excitation"))
}

/// Sink traces for several excitation nodes sharing one Hamiltonian.
///
/// States are advanced from grid point to grid point; the step propagator is
/// reused while consecutive spacings agree to rounding, so a uniform grid
/// costs two matrix exponentials regardless of its length.
pub fn sink_traces<T: Real>(
    h: &SinkHamiltonian<T>,
    excitations: &[usize],
    times: &[T],
) -> Result<Vec<SinkTrace<T>>> {
    for &e in excitations {
        h.check_node(e)?;
    }
    validate_times(times)?;
    let n = h.n();
    let mut states: Vec<Vec<Complex<T>>> = excitations
        .iter()
        .map(|&e| WalkState::<T>::basis(n, e).amplitudes)
        .collect();
    let mut pops = vec![Vec::with_capacity(times.len()); excitations.len()];
    let mut step: Option<(T, CMatrix<T>)> = None;
    let mut prev = T::zero();
    let eps = T::epsilon() * T::lit(8.0);
    for &t in times {
        let dt = t - prev;
        if dt > T::zero() {
            let reuse =
                matches!(&step, Some((cached, _)) if (*cached - dt).abs() <= eps * t.max(T::one()));
            if !reuse {
                step = Some((dt, h.propagator(dt)));
            }
            let (_, u) = step.as_ref().unwrap();
            for psi in states.iter_mut() {
                *psi = u.mul_vec(psi);
            }
        }
        for (psi, out) in states.iter().zip(pops.iter_mut()) {
            let norm: T = psi.iter().map(|a| a.norm_sqr()).sum();
            out.push(clamp_population(T::one() - norm)?);
        }
        prev = t;
    }
    Ok(pops
        .into_iter()
        .map(|populations| SinkTrace {
            times: times.to_vec(),
            populations,
        })
        .collect())
}

/// Sink population at a single time for several excitation nodes.
pub(crate) fn sink_populations_at<T: Real>(
    h: &SinkHamiltonian<T>,
    excitations: &[usize],
    t: T,
) -> Result<Vec<T>> {
    validate_times(&[t])?;
    let u = h.propagator(t);
    excitations
        .iter()
        .map(|&e| {
            h.check_node(e)?;
            let norm: T = (0..h.n()).map(|i| u[(i, e)].norm_sqr()).sum();
            clamp_population(T::one() - norm)
        })
        .collect()
}

fn check_pair(net: &Network, e: usize, s: usize) -> Result<()> {
    let n = net.n();
    if e >= n || s >= n {
        return Err(invalid(format!(
            "node pair ({e},{s}) out of range for n={n}"
        )));
    }
    if e == s {
        return Err(invalid(
            "short-time expansion requires distinct excitation and sink nodes",
        ));
    }
    Ok(())
}

/// Two-term short-time law
/// `P_s(t) ≈ γ·A_es·t³ − [γ·A_es + Σ_i ⟨i|A²|e⟩²]·t⁴/4`,
/// evaluated exactly as written.
///
/// The exact expansion of `1 − ‖ψ(t)‖²` has leading coefficient `2γ/3`
/// (see [`sink_population_taylor`]), so this law overestimates the exact
/// population by a factor approaching 3/2 as `t → 0`.
pub fn short_time_sink_population<T: Real>(
    net: &Network,
    e: usize,
    s: usize,
    gamma: T,
    t: T,
) -> Result<T> {
    check_pair(net, e, s)?;
    let a_es = T::from_u8(net.entry(e, s)).unwrap();
    // ⟨i|A²|e⟩ is the number of length-2 walks from e to i.
    let walks_sq: usize = (0..net.n())
        .map(|i| {
            let w = net.neighbours(e).filter(|&k| net.has_edge(k, i)).count();
            w * w
        })
        .sum();
    let t3 = t * t * t;
    Ok(gamma * a_es * t3 - (gamma * a_es + T::from_usize_lossy(walks_sq)) * t3 * t / T::lit(4.0))
}

/// Fourth-order Taylor expansion of the exact sink population,
/// `P_s(t) = (2/3)·γ·A_es·t³ − (γ²/2)·A_es·t⁴ + O(t⁵)`,
/// obtained from `dP_s/dt = 2γ·|ψ_s(t)|²` with `ψ_s(t) = −i·A_es·t + O(t²)`.
pub fn sink_population_taylor<T: Real>(
    net: &Network,
    e: usize,
    s: usize,
    gamma: T,
    t: T,
) -> Result<T> {
    check_pair(net, e, s)?;
    let a_es = T::from_u8(net.entry(e, s)).unwrap();
    let t3 = t * t * t;
    Ok(T::lit(2.0 / 3.0) * gamma * a_es * t3 - gamma * gamma * a_es * t3 * t / T::lit(2.0))
}

/// Decides whether `e` and `s` are adjacent from the sink population at a
/// short probe time `t0`, thresholding at `γ·t0³/2`.
pub fn infer_edge<T: Real>(trace_value: T, gamma: T, t0: T) -> bool {
    trace_value > gamma * t0 * t0 * t0 / T::lit(2.0)
}
