//! Analytic coverage and rate sweeps for both service models.

use dronesim_core::analytic;
use dronesim_core::params::db_to_linear;
use dronesim_core::{Method, NetworkParams, ServiceModel};

use super::RunOptions;
use crate::config::ExperimentSpec;
use crate::error::CliResult;
use crate::output::{gnuplot_script, sweep_csv, OutputDir, Series, SweepRow};

pub(super) fn coverage_rows(spec: &ExperimentSpec, model: ServiceModel, p: &NetworkParams) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::new();
    // Model 1 does not depend on t.
    let mut model1 = Vec::new();
    if model == ServiceModel::UeIndependent {
        for &g in &spec.sweep.gamma_db {
            model1.push(analytic::coverage(db_to_linear(g), 0.0, model, p)?.value);
        }
    }
    for &t in &spec.sweep.t_s {
        for (i, &g) in spec.sweep.gamma_db.iter().enumerate() {
            let value = match model {
                ServiceModel::UeIndependent => model1[i],
                ServiceModel::UeDependent => analytic::coverage(db_to_linear(g), t, model, p)?.value,
            };
            rows.push(SweepRow {
                t_s: t,
                gamma_db: Some(g),
                coverage: Some(value),
                rate_nats: None,
                method: Method::Analytic,
                ci_half_width: None,
            });
        }
    }
    Ok(rows)
}

pub(super) fn coverage(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let echo = spec.echo();
    let mut files = Vec::new();
    for model in ServiceModel::ALL {
        for (label, p) in spec.noise_variants(spec.params) {
            let rows = coverage_rows(spec, model, &p)?;
            let name = format!("coverage_{model}_{label}.csv");
            out.save(&name, sweep_csv(&format!("{echo}# model = {model}\n# noise = {label}\n"), &rows))?;
            files.push((name, format!("{model} {label}")));
        }
    }
    if opts.plot {
        let n = spec.sweep.gamma_db.len();
        let titles: Vec<Vec<String>> = files
            .iter()
            .map(|(_, base)| spec.sweep.gamma_db.iter().map(|g| format!("{base} {g} dB")).collect())
            .collect();
        let mut series = Vec::new();
        for ((file, _), titles) in files.iter().zip(&titles) {
            for (i, title) in titles.iter().enumerate() {
                series.push(Series { file, x: 1, y: 3, title, filter: Some(format!("{n}::{i}")) });
            }
        }
        out.save("coverage.gp", gnuplot_script("Coverage probability", "t (s)", "P_C", &series))?;
    }
    Ok(Vec::new())
}

pub(super) fn rate(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let echo = spec.echo();
    let mut files = Vec::new();
    for model in ServiceModel::ALL {
        for &h in &spec.sweep.heights_m {
            for &alpha in &spec.sweep.alphas {
                let base = spec.params_for(h, alpha)?;
                for (label, p) in spec.noise_variants(base) {
                    let model1 = match model {
                        ServiceModel::UeIndependent => Some(analytic::rate(0.0, model, &p)?.value),
                        ServiceModel::UeDependent => None,
                    };
                    let rows = spec
                        .sweep
                        .t_s
                        .iter()
                        .map(|&t| {
                            let value = match model1 {
                                Some(v) => v,
                                None => analytic::rate(t, model, &p)?.value,
                            };
                            Ok(SweepRow {
                                t_s: t,
                                gamma_db: None,
                                coverage: None,
                                rate_nats: Some(value),
                                method: Method::Analytic,
                                ci_half_width: None,
                            })
                        })
                        .collect::<CliResult<Vec<_>>>()?;
                    let header = format!(
                        "{echo}# model = {model}\n# h_m = {h}\n# alpha = {alpha}\n# n0_watts = {}\n# noise = {label}\n",
                        p.n0()
                    );
                    let name = format!("rate_{model}_h{h}_a{alpha}_{label}.csv");
                    out.save(&name, sweep_csv(&header, &rows))?;
                    files.push((name, format!("{model} h={h} a={alpha} {label}")));
                }
            }
        }
    }
    if opts.plot {
        let series: Vec<Series> = files
            .iter()
            .map(|(file, title)| Series { file, x: 1, y: 4, title, filter: None })
            .collect();
        out.save("rate.gp", gnuplot_script("Rate", "t (s)", "rate (nats/s/Hz)", &series))?;
    }
    Ok(Vec::new())
}
