use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::clustering::Loss;
use crate::error::{Error, Result};
use crate::model::{KernelFamily, Observation, ScalePrior};
use crate::process::{NggParams, TruncationPolicy};
use crate::sampler::{ModelKind, SamplerConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nggmix",
    version,
    about = "Normalized generalized gamma mixture density estimation"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a mixture to a dataset and write every posterior summary.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Tabulate prior distributions of the number of clusters.
    #[command(allow_negative_numbers = true)]
    Elicit(ElicitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// CSV with a `left,right` header or a single column of exact values.
    pub dataset: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, short)]
    pub out: PathBuf,
    /// File of `key=value` lines using the long flag names; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `semi` (common scale) or `full` (per-component scales).
    #[arg(long, default_value = "semi")]
    pub model: String,
    /// normal, laplace, gamma, lognormal or beta.
    #[arg(long, default_value = "normal")]
    pub kernel: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.4)]
    pub gamma: f64,
    /// Scale prior as `family:p1,p2`, e.g. `gamma:2,4` or `half_cauchy:1`.
    #[arg(long)]
    pub scale_prior: Option<String>,
    #[arg(long, default_value_t = 1500)]
    pub nit: usize,
    /// Defaults to a tenth of `--nit`.
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Chain `i` uses `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
    /// Probabilities of the quantiles to estimate, e.g. `0.05` for HC5.
    #[arg(long, value_delimiter = ',')]
    pub quantiles: Vec<f64>,
    /// none, binder, vi or vi_exact.
    #[arg(long, default_value = "none")]
    pub clustering: String,
    /// Adapt the latent-variable proposal during burn-in.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub adaptive_u: Option<bool>,
    /// Moment-matching error that sets the truncation level.
    #[arg(long, default_value_t = 0.01)]
    pub truncation_ell: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_jumps: usize,
    /// Shape of the gamma proposal for the latent variable.
    #[arg(long, default_value_t = 2.0)]
    pub u_delta: f64,
    /// Level of the pointwise credible bands.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Extra thinning of the kept chain for the QQ and PP tables.
    #[arg(long, default_value_t = 10)]
    pub gof_thin: usize,
    /// Run chains one after another instead of concurrently.
    #[arg(long)]
    pub sequential: bool,
    /// No progress lines on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ElicitArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub gamma: f64,
    /// Directory for the table and summary; without it the table goes to stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

const SWITCHES: [&str; 2] = ["sequential", "quiet"];

/// Tokens for the `key=value` lines of a config file.
fn config_tokens(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "dataset" || key == "config" {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("`{key}` cannot be set from a config file"),
            });
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("`{key}` takes true or false"),
                    })
                }
            }
        } else {
            out.push(format!("--{key}={value}").into());
        }
    }
    Ok(out)
}

/// Splices config-file settings in front of the command-line flags of
/// `run`, so that explicit flags override them.
pub fn merge_config_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(run_pos) = args.iter().position(|a| a == "run") else {
        return Ok(args);
    };
    let mut path = None;
    for (i, a) in args.iter().enumerate().skip(run_pos + 1) {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let given: Vec<String> = args[run_pos + 1..]
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|k| k.split('=').next().unwrap_or(k).to_string())
        })
        .collect();
    let tokens: Vec<OsString> = config_tokens(&path)?
        .into_iter()
        .filter(|t| {
            let key = t.to_string_lossy();
            let key = key
                .trim_start_matches("--")
                .split('=')
                .next()
                .unwrap_or_default()
                .to_string();
            !given.contains(&key)
        })
        .collect();
    let mut merged = args[..=run_pos].to_vec();
    merged.extend(tokens);
    merged.extend_from_slice(&args[run_pos + 1..]);
    Ok(merged)
}

impl RunArgs {
    pub fn clustering_loss(&self) -> Result<Option<Loss>> {
        if self.clustering.eq_ignore_ascii_case("none") {
            Ok(None)
        } else {
            self.clustering.parse().map(Some)
        }
    }

    /// Sampler configuration for `data` after validating every setting.
    pub fn sampler_config(&self, data: &[Observation]) -> Result<SamplerConfig> {
        let model: ModelKind = self.model.parse()?;
        let family: KernelFamily = self.kernel.parse()?;
        let mut cfg = SamplerConfig::for_data(data, model, family)?;
        cfg.ngg = NggParams::new(self.alpha, self.kappa, self.gamma)?;
        cfg.iterations = self.nit;
        cfg.burnin = self.burnin.unwrap_or(self.nit / 10);
        cfg.thinning = self.thin;
        cfg.seed = self.seed;
        cfg.adaptive_u = self.adaptive_u.unwrap_or(false);
        cfg.u_proposal_delta = self.u_delta;
        cfg.truncation = TruncationPolicy::new(
            self.truncation_ell,
            TruncationPolicy::default().num_moments,
            self.max_jumps,
        )?;
        if let Some(spec) = &self.scale_prior {
            cfg.base.scale = ScalePrior::parse(spec)?;
        }
        cfg.validate()?;
        if cfg.kept_iterations() == 0 {
            return Err(Error::invalid(
                "no iterations are kept with this burn-in and thinning",
            ));
        }
        if self.chains == 0 {
            return Err(Error::invalid("at least one chain is required"));
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("credible level must lie in (0, 1)"));
        }
        if let Some(p) = self.quantiles.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::invalid(format!(
                "quantile probability {p} is outside (0, 1)"
            )));
        }
        if self.gof_thin == 0 {
            return Err(Error::invalid("gof thinning must be at least 1"));
        }
        self.clustering_loss()?;
        Ok(cfg)
    }
}
