use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::args::{ElicitArgs, RunArgs};
use super::dataset::parse_dataset;
use crate::clustering::{minimize_loss_trace, GreedyConfig};
use crate::diagnostics::{cdf_overlay, gof_data, psrf, turnbull, ScalarTraceSet};
use crate::error::{Error, Result};
use crate::model::Observation;
use crate::posterior::{cdf_estimate, cpo, default_grid, density_estimate, quantile_estimate};
use crate::priors::{
    dirichlet_expected_clusters, prior_components_table, stable_expected_clusters,
};
use crate::sampler::{
    chain_configs, run_chain_set, run_chain_set_sequential, ChainTrace, SamplerConfig,
};

/// Every file `run` may write; anything else in the output directory is an error.
pub const RUN_OUTPUTS: [&str; 14] = [
    "trace.csv",
    "atoms.csv",
    "density.csv",
    "cdf.csv",
    "quantiles.json",
    "cpo.csv",
    "psrf.json",
    "clustering.csv",
    "gof_pp.csv",
    "gof_qq.csv",
    "gof_cdf.csv",
    "manifest.json",
    "prior_components.csv",
    "prior_summary.json",
];

/// Which stage failed, for the exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(Error),
    Runtime(Error),
}

impl Failure {
    pub fn error(&self) -> &Error {
        match self {
            Failure::Validation(e) | Failure::Runtime(e) => e,
        }
    }
}

fn validation<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Validation)
}

fn runtime<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| {
        if e.is_validation() {
            Failure::Validation(e)
        } else {
            Failure::Runtime(e)
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub sampling_seconds: f64,
    pub postprocessing_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub arguments: RunArgs,
    pub sampler: SamplerConfig,
    pub seeds: Vec<u64>,
    pub observations: usize,
    pub censored: usize,
    pub timings: Timings,
    pub summary: Value,
    pub outputs: Vec<String>,
}

/// `{:?}` prints the shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn prepare(dir: &Path) -> Result<Self> {
        if dir.exists() {
            for entry in fs::read_dir(dir)? {
                let name = entry?.file_name().to_string_lossy().into_owned();
                if !RUN_OUTPUTS.contains(&name.as_str()) {
                    return Err(Error::invalid(format!(
                        "output directory {} contains `{name}`, which this tool did not write",
                        dir.display()
                    )));
                }
            }
            for name in RUN_OUTPUTS {
                let p = dir.join(name);
                if p.exists() {
                    fs::remove_file(p)?;
                }
            }
        } else {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut f = fs::File::create(self.dir.join(name))?;
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn trace_rows(traces: &[ChainTrace]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in traces {
        for r in &t.rows {
            let mut push = |q: &str, v: f64| {
                rows.push(vec![
                    t.chain.to_string(),
                    r.iteration.to_string(),
                    q.to_string(),
                    num(v),
                ]);
            };
            push("n_components", r.n_components as f64);
            if let Some(s) = r.sigma {
                push("sigma", s);
            }
            push("u", r.u);
            push("log_likelihood", r.log_likelihood);
        }
    }
    rows
}

fn atom_rows(traces: &[ChainTrace]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in traces {
        for r in &t.rows {
            for (j, (w, a)) in r.weights.iter().zip(&r.atoms).enumerate() {
                rows.push(vec![
                    t.chain.to_string(),
                    r.iteration.to_string(),
                    j.to_string(),
                    num(*w),
                    num(a.mu),
                    num(a.sigma),
                ]);
            }
        }
    }
    rows
}

/// Samples the chains requested by `args` and writes all outputs.
pub fn run_command(args: &RunArgs) -> std::result::Result<RunManifest, Failure> {
    let start = Instant::now();
    let data = validation(parse_dataset(&args.dataset))?;
    let config = validation(args.sampler_config(&data))?;
    let loss = validation(args.clustering_loss())?;
    let mut out = validation(Outputs::prepare(&args.out))?;
    let configs = chain_configs(&config, args.chains);

    let total = config.iterations;
    let report =
        move |chain: usize, t: usize| eprintln!("chain {chain}: MCMC iteration {t} of {total}");
    let progress: Option<&(dyn Fn(usize, usize) + Sync)> =
        if args.quiet { None } else { Some(&report) };
    let results = if args.sequential {
        run_chain_set_sequential(&data, &configs, progress)
    } else {
        run_chain_set(&data, &configs, progress)
    };
    let traces = runtime(results.into_iter().collect::<Result<Vec<_>>>())?;
    let sampled = start.elapsed().as_secs_f64();

    let summary = runtime(write_products(&mut out, args, &data, &traces, loss))?;
    let post = start.elapsed().as_secs_f64() - sampled;
    let mut outputs = out.written.clone();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        arguments: args.clone(),
        sampler: config,
        seeds: configs.iter().map(|c| c.seed).collect(),
        observations: data.len(),
        censored: data.iter().filter(|o| o.is_censored()).count(),
        timings: Timings {
            sampling_seconds: sampled,
            postprocessing_seconds: post,
            total_seconds: start.elapsed().as_secs_f64(),
        },
        summary,
        outputs,
    };
    runtime(out.json("manifest.json", &manifest))?;
    Ok(manifest)
}

fn write_products(
    out: &mut Outputs,
    args: &RunArgs,
    data: &[Observation],
    traces: &[ChainTrace],
    loss: Option<crate::clustering::Loss>,
) -> Result<Value> {
    out.csv(
        "trace.csv",
        &["chain", "iteration", "quantity", "value"],
        trace_rows(traces),
    )?;
    out.csv(
        "atoms.csv",
        &["chain", "iteration", "atom", "weight", "mu", "sigma"],
        atom_rows(traces),
    )?;

    let pooled = ChainTrace::pooled(traces).expect("at least one chain");
    let grid = default_grid(data, &pooled.kernel, args.grid_points)?;
    let band_rows = |e: &crate::posterior::DensityEstimate| -> Vec<Vec<String>> {
        (0..e.grid.len())
            .map(|i| {
                vec![
                    num(e.grid[i]),
                    num(e.mean[i]),
                    num(e.lower[i]),
                    num(e.upper[i]),
                ]
            })
            .collect()
    };
    let density = density_estimate(&pooled, &grid, args.level)?;
    out.csv(
        "density.csv",
        &["x", "mean", "lower", "upper"],
        band_rows(&density),
    )?;
    let cdf = cdf_estimate(&pooled, &grid, args.level)?;
    out.csv("cdf.csv", &["x", "mean", "lower", "upper"], band_rows(&cdf))?;

    let mut quantiles = Vec::new();
    for &p in &args.quantiles {
        let q = quantile_estimate(&pooled, p, args.level)?;
        quantiles.push(json!({ "p": q.p, "point": q.point, "lower": q.lower, "upper": q.upper }));
    }
    out.json(
        "quantiles.json",
        &json!({ "level": args.level, "quantiles": quantiles }),
    )?;

    let cpo = cpo(&pooled, data)?;
    out.csv(
        "cpo.csv",
        &["index", "cpo"],
        cpo.values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), num(*v)]),
    )?;

    let psrf_value = if traces.len() >= 2 {
        let report = psrf(&ScalarTraceSet::from_traces(traces)?)?;
        let univariate: serde_json::Map<String, Value> = report
            .univariate
            .iter()
            .map(|(name, v)| {
                (
                    name.name().to_string(),
                    json!({ "point": v.point, "upper": v.upper, "degenerate": v.degenerate }),
                )
            })
            .collect();
        json!({
            "available": true,
            "chains": report.chains,
            "iterations": report.iterations,
            "univariate": univariate,
            "multivariate": report.multivariate,
            "multivariate_quantities": report.multivariate_names.iter().map(|n| n.name()).collect::<Vec<_>>(),
        })
    } else {
        json!({ "available": false, "chains": traces.len(), "reason": "PSRF needs at least two chains" })
    };
    out.json("psrf.json", &psrf_value)?;

    let mut clustering_summary = Value::Null;
    if let Some(loss) = loss {
        let est = minimize_loss_trace(&pooled, loss, &GreedyConfig::default())?;
        let empirical = turnbull(data, 1e-10, 10_000)?;
        let labels = est.partition.labels_one_based();
        out.csv(
            "clustering.csv",
            &["index", "value", "ecdf", "cluster"],
            data.iter().enumerate().map(|(i, o)| {
                let x = o.location_summary();
                vec![
                    (i + 1).to_string(),
                    num(x),
                    num(empirical.cdf(x)),
                    labels[i].to_string(),
                ]
            }),
        )?;
        clustering_summary = json!({
            "loss": loss,
            "clusters": est.partition.num_clusters(),
            "expected_loss": est.expected_loss,
            "converged": est.converged,
        });
    }

    let gof = gof_data(&pooled, data, args.gof_thin)?;
    out.csv(
        "gof_pp.csv",
        &["x", "empirical", "model"],
        gof.pp
            .iter()
            .map(|p| vec![num(p.x), num(p.empirical), num(p.model)]),
    )?;
    out.csv(
        "gof_qq.csv",
        &["p", "empirical", "model"],
        gof.qq
            .iter()
            .map(|q| vec![num(q.p), num(q.empirical), num(q.model)]),
    )?;
    let overlay = cdf_overlay(&pooled, data, &grid, args.level)?;
    out.csv(
        "gof_cdf.csv",
        &["x", "empirical", "model", "lower", "upper"],
        overlay.iter().map(|o| {
            vec![
                num(o.x),
                num(o.empirical),
                num(o.model),
                num(o.lower),
                num(o.upper),
            ]
        }),
    )?;

    let ncomp = pooled.n_components();
    Ok(json!({
        "kept_iterations_per_chain": traces.iter().map(|t| t.len()).collect::<Vec<_>>(),
        "mean_components": ncomp.iter().sum::<f64>() / ncomp.len() as f64,
        "cpo_median": cpo.median(),
        "cpo_mean": cpo.mean(),
        "log_pseudo_marginal_likelihood": cpo.log_pseudo_marginal(),
        "u_acceptance": traces.iter().map(|t| t.acceptance.u_rate()).collect::<Vec<_>>(),
        "clustering": clustering_summary,
    }))
}

/// Prior cluster-count tables for a Dirichlet and a stable process.
pub fn elicit_command(args: &ElicitArgs) -> std::result::Result<Value, Failure> {
    let table = validation(prior_components_table(args.n, args.alpha, args.gamma))?;
    let summary = json!({
        "n": args.n,
        "alpha": args.alpha,
        "gamma": args.gamma,
        "dirichlet_expected_clusters": validation(dirichlet_expected_clusters(args.n, args.alpha))?,
        "stable_expected_clusters": validation(stable_expected_clusters(args.n, args.gamma))?,
    });
    let rows = table
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.dirichlet), num(r.stable)]);
    let header = ["k", "dirichlet", "stable"];
    match &args.out {
        Some(dir) => {
            let mut out = runtime(Outputs::prepare(dir))?;
            runtime(out.csv("prior_components.csv", &header, rows))?;
            runtime(out.json("prior_summary.json", &summary))?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let write = || -> Result<()> {
                w.write_record(header)?;
                for r in rows {
                    w.write_record(&r)?;
                }
                w.flush()?;
                Ok(())
            };
            runtime(write())?;
        }
    }
    Ok(summary)
}
