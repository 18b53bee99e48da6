//! Monte Carlo coverage and rate for the configured model and mobility kinds.

use std::fmt::Write as _;

use dronesim_core::monte_carlo::{coverage_from_sinr, rate_from_sinr, MonteCarlo, SimulationWindow};
use dronesim_core::params::{db_to_linear, linear_to_db};
use dronesim_core::Method;

use super::RunOptions;
use crate::config::ExperimentSpec;
use crate::error::CliResult;
use crate::output::{gnuplot_script, sweep_csv, OutputDir, Series, SweepRow};

pub const TRIAL_HEADER: &str = "trial,t_s,gamma_db,sinr_db,covered";

/// Monte Carlo engine for `spec` with interferers following `kind`.
pub(super) fn engine(spec: &ExperimentSpec, kind: dronesim_core::MobilityKind) -> CliResult<MonteCarlo> {
    let p = spec.params;
    let t_max = spec.sweep.t_s.iter().copied().fold(0.0, f64::max);
    let window = SimulationWindow::new(spec.mc.eval_radius_m, t_max)?;
    Ok(MonteCarlo::new(p, spec.mc.model, window, spec.mc.seed).with_mobility(spec.mc.mobility_spec(kind, p.speed())))
}

pub(super) fn run(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let echo = spec.echo();
    let times = &spec.sweep.t_s;
    let model = spec.mc.model;
    let mut files = Vec::new();
    for &kind in &spec.mc.mobility {
        let samples = engine(spec, kind)?.sinr_samples(times, spec.mc.n_trials)?;
        let mut rows = Vec::new();
        for (k, &t) in times.iter().enumerate() {
            for &g in &spec.sweep.gamma_db {
                let est = coverage_from_sinr(&samples[k], db_to_linear(g));
                rows.push(SweepRow {
                    t_s: t,
                    gamma_db: Some(g),
                    coverage: Some(est.mean),
                    rate_nats: None,
                    method: Method::MonteCarlo,
                    ci_half_width: Some(est.half_width_95),
                });
            }
            let est = rate_from_sinr(&samples[k]);
            rows.push(SweepRow {
                t_s: t,
                gamma_db: None,
                coverage: None,
                rate_nats: Some(est.mean),
                method: Method::MonteCarlo,
                ci_half_width: Some(est.half_width_95),
            });
        }
        let header = format!("{echo}# mobility = {}\n", kind.as_str());
        let name = format!("simulate_{model}_{}.csv", kind.as_str());
        out.save(&name, sweep_csv(&header, &rows))?;
        files.push((name, kind.as_str()));

        if opts.trial_log {
            let mut log = format!("{header}{TRIAL_HEADER}\n");
            for trial in 0..spec.mc.n_trials {
                for (k, &t) in times.iter().enumerate() {
                    let sinr = samples[k][trial];
                    for &g in &spec.sweep.gamma_db {
                        let covered = u8::from(sinr >= db_to_linear(g));
                        let _ = writeln!(log, "{trial},{t},{g},{},{covered}", linear_to_db(sinr));
                    }
                }
            }
            out.save(&format!("trials_{model}_{}.csv", kind.as_str()), log)?;
        }
    }
    if opts.plot {
        // Rows per time: one per threshold, then the rate row.
        let stride = spec.sweep.gamma_db.len() + 1;
        let series: Vec<Series> = files
            .iter()
            .map(|(file, title)| Series {
                file,
                x: 1,
                y: 4,
                title,
                filter: Some(format!("{stride}::{}", stride - 1)),
            })
            .collect();
        out.save("simulate.gp", gnuplot_script("Empirical rate", "t (s)", "rate (nats/s/Hz)", &series))?;
    }
    Ok(Vec::new())
}
