//! Empirical rate of random walk and random waypoint interferers against
//! straight-line interferers, UE-dependent service.

use std::fmt::Write as _;

use dronesim_core::monte_carlo::rate_from_sinr;
use dronesim_core::{EmpiricalEstimate, MobilityKind, ServiceModel};
use serde::Serialize;

use super::simulate::engine;
use super::RunOptions;
use crate::config::ExperimentSpec;
use crate::error::CliResult;
use crate::output::{gnuplot_script, OutputDir, Series};

pub const HEADER: &str = "t_s,mobility,rate_nats,ci_half_width,straight_rate_nats,status";

#[derive(Debug, Serialize)]
struct Row {
    t_s: f64,
    mobility: MobilityKind,
    rate: EmpiricalEstimate,
    straight: EmpiricalEstimate,
    /// `rate + 2 CI - straight`; negative values violate the ordering.
    margin: f64,
    ok: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    seed: u64,
    n_trials: usize,
    rows: Vec<Row>,
    passed: bool,
}

pub(super) fn run(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let mut spec = spec.clone();
    spec.mc.model = ServiceModel::UeDependent;
    let times = &spec.sweep.t_s;
    let straight = engine(&spec, MobilityKind::StraightLine)?.sinr_samples(times, spec.mc.n_trials)?;
    let straight: Vec<EmpiricalEstimate> = straight.iter().map(|s| rate_from_sinr(s)).collect();

    let mut rows = Vec::new();
    for &kind in &spec.mc.mobility {
        let estimates = if kind == MobilityKind::StraightLine {
            straight.clone()
        } else {
            let samples = engine(&spec, kind)?.sinr_samples(times, spec.mc.n_trials)?;
            samples.iter().map(|s| rate_from_sinr(s)).collect()
        };
        for (k, &t) in times.iter().enumerate() {
            let (rate, base) = (estimates[k], straight[k]);
            let ci = rate.half_width_95.max(base.half_width_95);
            let margin = rate.mean + 2.0 * ci - base.mean;
            rows.push(Row {
                t_s: t,
                mobility: kind,
                rate,
                straight: base,
                margin,
                ok: margin >= 0.0,
            });
        }
    }

    let mut csv = format!("{}{HEADER}\n", spec.echo());
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.t_s,
            r.mobility.as_str(),
            r.rate.mean,
            r.rate.half_width_95,
            r.straight.mean,
            if r.ok { "ok" } else { "violation" }
        );
    }
    out.save("compare_mobility.csv", csv)?;
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.ok)
        .map(|r| {
            format!(
                "{} at t = {} s: rate {:.4} is below straight-line {:.4} by more than 2 CI",
                r.mobility.as_str(),
                r.t_s,
                r.rate.mean,
                r.straight.mean
            )
        })
        .collect();
    let report = Report {
        seed: spec.mc.seed,
        n_trials: spec.mc.n_trials,
        passed: failures.is_empty(),
        rows,
    };
    out.save("compare_mobility.json", serde_json::to_string_pretty(&report)? + "\n")?;

    if opts.plot {
        let n = times.len();
        let titles: Vec<&str> = spec.mc.mobility.iter().map(|k| k.as_str()).collect();
        let series: Vec<Series> = titles
            .iter()
            .enumerate()
            .map(|(i, title)| Series {
                file: "compare_mobility.csv",
                x: 1,
                y: 3,
                title,
                filter: Some(format!("::{}::{}", i * n, (i + 1) * n - 1)),
            })
            .collect();
        out.save("compare_mobility.gp", gnuplot_script("Rate by interferer mobility", "t (s)", "rate (nats/s/Hz)", &series))?;
    }
    Ok(failures)
}
