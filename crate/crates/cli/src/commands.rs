// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use qnet_core::experiments::{
    convergence_vs_configs, convergence_vs_population, fdc_time_sweep, fit_peak_time,
    max_unknown_connections, min_population_for_convergence, peak_times, ConfigsSweepConfig,
    FdcSweepConfig, MaxUnknownConfig, MinPopulationConfig, PopulationSweepConfig, SweepResult,
};
use qnet_core::fitness::{PeakTimeFit, BUNDLED_PEAK_TIME_FIT};
use qnet_core::ga::{run_reconstruction, GaConfig, Outcome};
use qnet_core::graph::{generate_erdos_renyi, generate_random_connected, is_connected};
use qnet_core::probing::{infer_known_edges, measurement_schedule, shuffled_pairs};
use qnet_core::rng::stream;
use qnet_core::{Network, ProbeDataset64, ProbePlan64, QnetError};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::manifest::{read_file, write_file, RunManifest};
use crate::{ExperimentArgs, ExperimentKind, GenerateArgs, ProbeArgs, ReconstructArgs};

const GENERATE_STREAM: u64 = 0x47454e;
const MAX_CONNECTED_ATTEMPTS: usize = 100_000;

fn parse_input<T>(path: &Path, parse: impl FnOnce(&str) -> qnet_core::Result<T>) -> CliResult<T> {
    let text = read_file(path)?;
    parse(&text).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

fn parse_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        Some(p) => parse_input(p, |s| serde_json::from_str(s).map_err(QnetError::from)),
        None => Ok(T::default()),
    }
}

fn to_value(v: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

pub fn generate(args: &GenerateArgs) -> CliResult<u8> {
    if args.nodes < 2 {
        return Err(CliError::Usage(format!(
            "--nodes must be at least 2, got {}",
            args.nodes
        )));
    }
    let mut rng = stream(args.seed, &[GENERATE_STREAM]);
    let net = match args.edge_prob {
        None => generate_random_connected(args.nodes, &mut rng)?,
        Some(p) if !(0.0..=1.0).contains(&p) => {
            return Err(CliError::Usage(format!("--edge-prob {p} outside [0,1]")));
        }
        Some(p) if args.allow_disconnected => generate_erdos_renyi(args.nodes, p, &mut rng)?,
        Some(p) => (0..MAX_CONNECTED_ATTEMPTS)
            .map(|_| generate_erdos_renyi(args.nodes, p, &mut rng))
            .find(|g| g.as_ref().map_or(true, is_connected))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "no connected graph in {MAX_CONNECTED_ATTEMPTS} draws at p={p}; \
                     pass --allow-disconnected"
                ))
            })??,
    };
    write_file(&args.out, &net.to_json())?;
    let mut m = RunManifest::new(
        "generate",
        Some(args.seed),
        json!({
            "nodes": args.nodes,
            "edge_prob": args.edge_prob,
            "allow_disconnected": args.allow_disconnected,
        }),
    );
    m.output(&args.out)?;
    m.write_beside(&args.out)?;
    Ok(EXIT_OK)
}

pub fn probe(args: &ProbeArgs) -> CliResult<u8> {
    let net = parse_input(&args.network, Network::from_json)?;
    let n = net.n();
    let mut config = json!({ "gamma": args.gamma, "t0": args.t0 });
    let times = match &args.times {
        Some(t) => t.clone(),
        None => {
            let fit = PeakTimeFit::<f64>::bundled();
            config["time_count"] = json!(args.time_count);
            config["peak_time_fit"] =
                serde_json::from_str(BUNDLED_PEAK_TIME_FIT).expect("bundled peak-time fit parses");
            measurement_schedule(n, args.time_count, &fit)?
        }
    };
    let plan = match (&args.excitation, &args.pairs) {
        (Some(e), None) => {
            config["excitation"] = json!(e);
            ProbePlan64::fixed_excitation(*e, times, args.gamma, args.t0)
        }
        (None, Some(arg)) => {
            let total = n * (n - 1);
            let count = match arg.as_str() {
                "all" => total,
                s => s.parse::<usize>().map_err(|_| {
                    CliError::Usage(format!("--pairs expects a count or `all`, got `{s}`"))
                })?,
            };
            if count > total {
                return Err(CliError::Usage(format!(
                    "--pairs {count} exceeds the {total} ordered pairs of a {n}-node network"
                )));
            }
            let mut pairs = shuffled_pairs(n, args.seed);
            pairs.truncate(count);
            config["pairs"] = json!(count);
            ProbePlan64::pairs(pairs, times, args.gamma, args.t0)
        }
        _ => unreachable!("clap enforces exactly one procedure"),
    };
    config["times"] = json!(plan.times);
    let data = plan.probe(&net, true)?;
    write_file(&args.out, &data.to_json())?;
    let mut m = RunManifest::new("probe", Some(args.seed), config);
    m.input(&args.network)?;
    m.output(&args.out)?;
    m.write_beside(&args.out)?;
    Ok(EXIT_OK)
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<u8> {
    let data = parse_input(&args.target_data, ProbeDataset64::from_json)?;
    let mut cfg: GaConfig = parse_config(args.config.as_deref())?;
    cfg.seed = args.seed;
    let known = infer_known_edges(&data, data.t0).map_err(|source| CliError::Input {
        path: args.target_data.clone(),
        source,
    })?;
    let plan = ProbePlan64::from_dataset(&data);
    let report = run_reconstruction(&data, &known, &cfg, &plan)?;
    write_file(&args.out, &report.to_json())?;
    let mut m = RunManifest::new("reconstruct", Some(args.seed), to_value(&cfg));
    m.input(&args.target_data)?;
    if let Some(c) = &args.config {
        m.input(c)?;
    }
    m.output(&args.out)?;
    m.write_beside(&args.out)?;
    log::info!(
        "outcome={:?} iterations={}",
        report.outcome,
        report.iterations
    );
    Ok(match report.outcome {
        Outcome::IterationLimit => EXIT_NOT_CONVERGED,
        _ => EXIT_OK,
    })
}

fn n_label(ns: &[usize]) -> String {
    ns.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

pub fn experiment(args: &ExperimentArgs) -> CliResult<u8> {
    let config = args.config.as_deref();
    let (result, label): (SweepResult, String) = match args.kind {
        ExperimentKind::Fdc => {
            let cfg: FdcSweepConfig = parse_config(config)?;
            (fdc_time_sweep(&cfg, args.seed)?, n_label(&cfg.n_values))
        }
        ExperimentKind::Pop => {
            let cfg: PopulationSweepConfig = parse_config(config)?;
            (
                convergence_vs_population(&cfg, args.seed)?,
                cfg.n.to_string(),
            )
        }
        ExperimentKind::Configs => {
            let cfg: ConfigsSweepConfig = parse_config(config)?;
            (convergence_vs_configs(&cfg, args.seed)?, cfg.n.to_string())
        }
        ExperimentKind::Minpop => {
            let cfg: MinPopulationConfig = parse_config(config)?;
            (
                min_population_for_convergence(&cfg, args.seed)?,
                cfg.n.to_string(),
            )
        }
        ExperimentKind::Maxconn => {
            let cfg: MaxUnknownConfig = parse_config(config)?;
            (
                max_unknown_connections(&cfg, args.seed)?,
                n_label(&cfg.n_values),
            )
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let stem = format!("{}_{}_{}", result.experiment, label, args.seed);
    let csv = args.out_dir.join(format!("{stem}.csv"));
    let sidecar = args.out_dir.join(format!("{stem}.json"));
    write_file(&csv, &result.to_csv())?;
    write_file(&sidecar, &result.to_json())?;

    let mut m = RunManifest::new("experiment", Some(args.seed), result.config.clone());
    if let Some(c) = config {
        m.input(c)?;
    }
    m.output(&csv)?;
    m.output(&sidecar)?;
    if matches!(args.kind, ExperimentKind::Fdc) {
        match fit_peak_time(&result) {
            Ok(fit) => {
                let path = args.out_dir.join(format!("{stem}.fit.json"));
                let doc = json!({
                    "a": fit.a,
                    "b": fit.b,
                    "c": fit.c,
                    "provenance": {
                        "experiment": result.experiment,
                        "seed": args.seed,
                        "config": result.config,
                        "peaks": peak_times(&result)?,
                    },
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("fit serializes");
                text.push('\n');
                write_file(&path, &text)?;
                m.output(&path)?;
            }
            Err(e) => log::warn!("no peak-time fit: {e}"),
        }
    }
    m.write_beside(&args.out_dir.join(&stem))?;
    Ok(EXIT_OK)
}
