//! TOML configuration, presets and their resolution into an [`ExperimentSpec`].
//!
//! Precedence, lowest first: built-in defaults, preset, config file,
//! command-line flags. Every field of the file is optional.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dronesim_core::params::kmh_to_mps;
use dronesim_core::{MobilityKind, MobilitySpec, NetworkParams, NoiseSetting, ServiceModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    Coverage,
    Rate,
    Simulate,
    Validate,
    CompareMobility,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Density => "density",
            CommandKind::Coverage => "coverage",
            CommandKind::Rate => "rate",
            CommandKind::Simulate => "simulate",
            CommandKind::Validate => "validate",
            CommandKind::CompareMobility => "compare-mobility",
        }
    }

    pub fn uses_monte_carlo(self) -> bool {
        matches!(
            self,
            CommandKind::Simulate | CommandKind::Validate | CommandKind::CompareMobility
        )
    }
}

/// Named parameter sets for the three standard experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Interferer density at several times.
    Fig3,
    /// Coverage over time, both service models.
    Fig4,
    /// Rate over time for several heights and path-loss exponents.
    Fig5,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<Preset>,
    pub lambda0: Option<f64>,
    pub h_m: Option<f64>,
    pub v_mps: Option<f64>,
    pub v_kmh: Option<f64>,
    pub alpha: Option<f64>,
    pub p_tx_db: Option<f64>,
    pub p_edge: Option<f64>,
    pub r_d_m: Option<f64>,
    pub n0_watts: Option<f64>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub mc: McSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub t_s: Option<Vec<f64>>,
    pub gamma_db: Option<Vec<f64>>,
    pub heights_m: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub u0_m: Option<f64>,
    pub density_step_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub mobility: Option<Vec<String>>,
    pub eval_radius_m: Option<f64>,
    pub rw_epoch_s: Option<f64>,
    pub rwp_waypoint_radius_m: Option<f64>,
    pub pause_s: Option<f64>,
    pub histogram_points: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Grid of the sweep commands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub t_s: Vec<f64>,
    pub gamma_db: Vec<f64>,
    pub heights_m: Vec<f64>,
    pub alphas: Vec<f64>,
    pub u0_m: f64,
    pub density_step_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSettings {
    pub n_trials: usize,
    pub seed: u64,
    pub model: ServiceModel,
    pub mobility: Vec<MobilityKind>,
    pub eval_radius_m: f64,
    pub rw_epoch_s: f64,
    pub rwp_waypoint_radius_m: f64,
    pub pause_s: f64,
    /// Displaced points per density histogram; 0 skips the histogram.
    pub histogram_points: u64,
}

impl McSettings {
    pub const MIN_TRIALS: usize = 100;

    pub fn mobility_spec(&self, kind: MobilityKind, v: f64) -> MobilitySpec {
        MobilitySpec {
            kind,
            v,
            rw_epoch: self.rw_epoch_s,
            rwp_waypoint_radius: self.rwp_waypoint_radius_m,
            pause: self.pause_s,
        }
    }
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub no_noise: bool,
}

/// Fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: CommandKind,
    pub preset: Option<Preset>,
    pub params: NetworkParams,
    /// How N0 was chosen; dimensioned noise follows height and exponent sweeps.
    pub noise: NoiseSetting,
    /// Whether a noise-free variant is evaluated next to the noisy one.
    pub include_noise: bool,
    pub sweep: Sweep,
    pub mc: McSettings,
    pub out_dir: PathBuf,
}

fn time_grid(step: f64, end: f64) -> Vec<f64> {
    let n = (end / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn preset_sweep(preset: Option<Preset>) -> Sweep {
    let base = Sweep {
        t_s: vec![0.0, 20.0, 50.0, 200.0],
        gamma_db: vec![-5.0, 0.0, 5.0],
        heights_m: vec![100.0],
        alphas: vec![3.0],
        u0_m: 500.0,
        density_step_m: 1.0,
    };
    match preset {
        None => base,
        Some(Preset::Fig3) => Sweep {
            t_s: vec![20.0, 40.0, 50.0, 200.0],
            ..base
        },
        Some(Preset::Fig4) => Sweep {
            t_s: time_grid(10.0, 200.0),
            ..base
        },
        Some(Preset::Fig5) => Sweep {
            t_s: time_grid(10.0, 200.0),
            heights_m: vec![100.0, 200.0],
            alphas: vec![2.5, 3.0, 3.5],
            ..base
        },
    }
}

fn parse_model(s: &str) -> CliResult<ServiceModel> {
    match s {
        "model1" | "1" | "ue-independent" => Ok(ServiceModel::UeIndependent),
        "model2" | "2" | "ue-dependent" => Ok(ServiceModel::UeDependent),
        other => Err(CliError::Config(format!(
            "mc.model: unknown service model `{other}` (use model1 or model2)"
        ))),
    }
}

fn nonempty(name: &str, values: &[f64]) -> CliResult<()> {
    if values.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("{name} contains non-finite value {bad}")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn resolve(
        command: CommandKind,
        file: ConfigFile,
        overrides: &Overrides,
        out_dir: PathBuf,
    ) -> CliResult<Self> {
        let preset = overrides.preset.or(file.preset);
        let mut builder = NetworkParams::builder();
        if let Some(x) = file.lambda0 {
            builder = builder.lambda0(x);
        }
        if let Some(x) = file.h_m {
            builder = builder.height(x);
        }
        match (file.v_mps, file.v_kmh) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either v_mps or v_kmh, not both".into()))
            }
            (Some(v), None) => builder = builder.speed(v),
            (None, Some(v)) => builder = builder.speed(kmh_to_mps(v)),
            (None, None) => {}
        }
        if let Some(x) = file.alpha {
            builder = builder.alpha(x);
        }
        if let Some(x) = file.p_tx_db {
            builder = builder.p_tx_db(x);
        }
        if let Some(x) = file.p_edge {
            builder = builder.p_edge(x);
        }
        if let Some(x) = file.r_d_m {
            builder = builder.deployment_radius(x);
        }
        let noise = file.n0_watts.map_or(NoiseSetting::Dimensioned, NoiseSetting::Fixed);
        builder = builder.noise(noise);
        let mut params = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
        if overrides.no_noise {
            params = params.without_noise();
        }

        let base = preset_sweep(preset);
        let s = file.sweep;
        let sweep = Sweep {
            t_s: s.t_s.unwrap_or(base.t_s),
            gamma_db: s.gamma_db.unwrap_or(base.gamma_db),
            heights_m: s.heights_m.unwrap_or(base.heights_m),
            alphas: s.alphas.unwrap_or(base.alphas),
            u0_m: s.u0_m.unwrap_or(base.u0_m),
            density_step_m: s.density_step_m.unwrap_or(base.density_step_m),
        };

        let m = file.mc;
        let mobility = match m.mobility {
            None => MobilityKind::ALL.to_vec(),
            Some(list) => list
                .iter()
                .map(|s| s.parse().map_err(|e: String| CliError::Config(format!("mc.mobility: {e}"))))
                .collect::<CliResult<_>>()?,
        };
        let default_histogram = match (command, preset) {
            (CommandKind::Validate, _) | (_, Some(Preset::Fig3)) => 1_000_000,
            _ => 0,
        };
        let mc = McSettings {
            n_trials: overrides.trials.or(m.n_trials).unwrap_or(10_000),
            seed: overrides.seed.or(m.seed).unwrap_or(1),
            model: m.model.as_deref().map(parse_model).transpose()?.unwrap_or(ServiceModel::UeDependent),
            mobility,
            eval_radius_m: m.eval_radius_m.unwrap_or(10_000.0),
            rw_epoch_s: m.rw_epoch_s.unwrap_or(MobilitySpec::DEFAULT_RW_EPOCH),
            rwp_waypoint_radius_m: m.rwp_waypoint_radius_m.unwrap_or(MobilitySpec::DEFAULT_RWP_RADIUS),
            pause_s: m.pause_s.unwrap_or(0.0),
            histogram_points: m.histogram_points.unwrap_or(default_histogram),
        };

        let spec = ExperimentSpec {
            command,
            preset,
            params,
            noise,
            include_noise: !overrides.no_noise,
            sweep,
            mc,
            out_dir,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parameters at another height and path-loss exponent.
    pub fn params_for(&self, h: f64, alpha: f64) -> CliResult<NetworkParams> {
        let p = self
            .params
            .to_builder()
            .height(h)
            .alpha(alpha)
            .noise(self.noise)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(if self.include_noise { p } else { p.without_noise() })
    }

    /// `(label, params)` for each noise variant to evaluate.
    pub fn noise_variants(&self, p: NetworkParams) -> Vec<(&'static str, NetworkParams)> {
        if self.include_noise {
            vec![("noise", p), ("no-noise", p.without_noise())]
        } else {
            vec![("no-noise", p.without_noise())]
        }
    }

    fn validate(&self) -> CliResult<()> {
        let s = &self.sweep;
        nonempty("sweep.t_s", &s.t_s)?;
        if let Some(t) = s.t_s.iter().find(|t| **t < 0.0) {
            return Err(CliError::Config(format!("sweep.t_s: times must be >= 0, got {t}")));
        }
        match self.command {
            CommandKind::Coverage | CommandKind::Simulate | CommandKind::Validate => {
                nonempty("sweep.gamma_db", &s.gamma_db)?
            }
            CommandKind::Rate => {
                nonempty("sweep.heights_m", &s.heights_m)?;
                nonempty("sweep.alphas", &s.alphas)?;
            }
            CommandKind::Density | CommandKind::CompareMobility => {}
        }
        if !(s.u0_m >= 0.0 && s.u0_m.is_finite()) {
            return Err(CliError::Config(format!("sweep.u0_m must be finite and >= 0, got {}", s.u0_m)));
        }
        if !(s.density_step_m > 0.0 && s.density_step_m.is_finite()) {
            return Err(CliError::Config(format!("sweep.density_step_m must be > 0, got {}", s.density_step_m)));
        }
        if self.command == CommandKind::Rate {
            for &h in &s.heights_m {
                for &alpha in &s.alphas {
                    self.params_for(h, alpha)?;
                }
            }
        }
        if self.command.uses_monte_carlo() {
            if self.mc.n_trials < McSettings::MIN_TRIALS {
                return Err(CliError::Config(format!(
                    "mc.n_trials must be >= {}, got {}",
                    McSettings::MIN_TRIALS,
                    self.mc.n_trials
                )));
            }
            if self.mc.mobility.is_empty() {
                return Err(CliError::Config("mc.mobility must not be empty".into()));
            }
            for kind in &self.mc.mobility {
                self.mc
                    .mobility_spec(*kind, self.params.speed())
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            if !(self.mc.eval_radius_m > 0.0 && self.mc.eval_radius_m.is_finite()) {
                return Err(CliError::Config(format!(
                    "mc.eval_radius_m must be finite and > 0, got {}",
                    self.mc.eval_radius_m
                )));
            }
        }
        Ok(())
    }

    /// `# key = value` lines describing the resolved experiment.
    pub fn echo(&self) -> String {
        let p = &self.params;
        let s = &self.sweep;
        let m = &self.mc;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "# {k} = {v}");
        };
        line("command", self.command.as_str().into());
        line(
            "preset",
            self.preset.map_or("none".into(), |p| format!("{p:?}").to_lowercase()),
        );
        line("lambda0", format!("{:?}", p.lambda0()));
        line("h_m", format!("{:?}", p.height()));
        line("v_mps", format!("{:?}", p.speed()));
        line("alpha", format!("{:?}", p.alpha()));
        line("p_tx_w", format!("{:?}", p.p_tx()));
        line("p_edge", format!("{:?}", p.p_edge()));
        line("n0_watts", format!("{:?}", p.n0()));
        line("r_d_m", format!("{:?}", p.deployment_radius()));
        line("sweep.t_s", format!("[{}]", list(&s.t_s)));
        line("sweep.gamma_db", format!("[{}]", list(&s.gamma_db)));
        line("sweep.heights_m", format!("[{}]", list(&s.heights_m)));
        line("sweep.alphas", format!("[{}]", list(&s.alphas)));
        line("sweep.u0_m", format!("{:?}", s.u0_m));
        line("sweep.density_step_m", format!("{:?}", s.density_step_m));
        if self.command.uses_monte_carlo() {
            line("mc.n_trials", m.n_trials.to_string());
            line("mc.seed", m.seed.to_string());
            line("mc.model", m.model.to_string());
            line(
                "mc.mobility",
                format!("[{}]", m.mobility.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")),
            );
            line("mc.eval_radius_m", format!("{:?}", m.eval_radius_m));
            line("mc.rw_epoch_s", format!("{:?}", m.rw_epoch_s));
            line("mc.rwp_waypoint_radius_m", format!("{:?}", m.rwp_waypoint_radius_m));
            line("mc.pause_s", format!("{:?}", m.pause_s));
        }
        line("mc.histogram_points", m.histogram_points.to_string());
        out
    }
}
