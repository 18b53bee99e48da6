//! Interferer density profiles, optionally with a Monte Carlo histogram.

use dronesim_core::monte_carlo::displaced_annulus_histogram;
use dronesim_core::DensityProfile;

use super::RunOptions;
use crate::config::ExperimentSpec;
use crate::error::CliResult;
use crate::output::{gnuplot_script, OutputDir, Series};

const HISTOGRAM_BIN_M: f64 = 10.0;

pub(super) fn run(spec: &ExperimentSpec, opts: &RunOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let p = &spec.params;
    let u0 = spec.sweep.u0_m;
    let echo = spec.echo();
    let mut names = Vec::new();
    for (k, &t) in spec.sweep.t_s.iter().enumerate() {
        let profile = DensityProfile::with_default_extent(u0, t, p.speed(), p.lambda0(), spec.sweep.density_step_m)?;
        let mut buf = format!("{echo}# t_s = {t}\n").into_bytes();
        profile.write_csv(&mut buf)?;
        let name = format!("density_t{t}.csv");
        out.save(&name, buf)?;
        names.push((name, t));

        if spec.mc.histogram_points > 0 {
            let d = p.travel(t);
            let r_max = ((u0 + d + DensityProfile::DEFAULT_MARGIN) / HISTOGRAM_BIN_M).ceil() * HISTOGRAM_BIN_M;
            let h = displaced_annulus_histogram(
                u0,
                d,
                spec.mc.histogram_points,
                HISTOGRAM_BIN_M,
                r_max,
                spec.mc.seed.wrapping_add(k as u64),
            )?;
            let mut buf = format!("{echo}# t_s = {t}\n# bins within 3 sigma = {}\n", h.fraction_within(3.0)).into_bytes();
            h.write_csv(&mut buf)?;
            out.save(&format!("histogram_t{t}.csv"), buf)?;
        }
    }
    if opts.plot {
        let titles: Vec<String> = names.iter().map(|(_, t)| format!("t = {t} s")).collect();
        let series: Vec<Series> = names
            .iter()
            .zip(&titles)
            .map(|((file, _), title)| Series { file, x: 1, y: 2, title, filter: None })
            .collect();
        out.save("density.gp", gnuplot_script("Interferer density", "u_x (m)", "density (1/m^2)", &series))?;
    }
    Ok(Vec::new())
}
