//! Command implementations. Each one builds its parameter set, runs inside a
//! rayon pool of the requested width, and emits a data file plus exactly one
//! `manifest.json` into the output directory.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use super::manifest::RunManifest;
use super::output::{fmt_f64, write_atomic, OutputFormat, Table};
use super::{
    CliError, CommonArgs, CorrArgs, DepthArgs, DprimeArgs, DprimeModeArg, MaximaArgs, MeasureArgs,
    Table1Args, VerifyArgs, TABLE1_GRID,
};
use crate::evt::{self, DprimeMode};
use crate::map::{self, MapParameter};
use crate::measure::MeasureModel;
use crate::Real;

pub const THREADS_ENV: &str = "CHAOTIC_EXTREMES_THREADS";

/// Default size of the Birkhoff model built on the fly for a != 2.
const DEFAULT_MODEL_SAMPLES: usize = 1_000_000;
const DEFAULT_MODEL_BURN_IN: u64 = 1000;

fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(flag)
}

/// Runs `body` inside a pool of the requested width. The outputs are
/// independent of the width by construction (indexed substreams, ordered
/// reduction).
fn with_pool<T>(
    threads: Option<usize>,
    body: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match resolve_threads(threads) {
        None => body(),
        Some(width) => rayon::ThreadPoolBuilder::new()
            .num_threads(width)
            .build()
            .expect("thread pool")
            .install(body),
    }
}

fn build_params(common: &CommonArgs) -> Result<MapParameter<Real>, CliError> {
    let mut params = MapParameter::new(common.a)?
        .with_delta_exp(common.delta_exp)
        .with_alpha(common.alpha);
    if let Some(beta) = common.beta {
        params = params.with_beta(beta);
    }
    if params.delta_gap_violated() {
        eprintln!(
            "warning: delta = {:.3e} is not much larger than 2 - a = {:.3e}; \
             bound-period heuristics are unreliable",
            params.delta(),
            2.0 - params.a()
        );
    }
    Ok(params)
}

/// Analytic model at a = 2, a loaded file when `--model` is given, otherwise
/// a fresh deterministic Birkhoff model.
fn resolve_model(
    common: &CommonArgs,
    params: &MapParameter<Real>,
    seed: u64,
) -> Result<MeasureModel<Real>, CliError> {
    if let Some(path) = &common.model {
        let file = File::open(path)?;
        return Ok(MeasureModel::read_from(BufReader::new(file))?);
    }
    if common.a == 2.0 {
        return Ok(MeasureModel::analytic_a2());
    }
    let model = MeasureModel::build_empirical(params, DEFAULT_MODEL_SAMPLES, DEFAULT_MODEL_BURN_IN, seed)?;
    Ok(model)
}

fn base_manifest(command: &str, common: &CommonArgs, params: &MapParameter<Real>) -> RunManifest {
    let mut m = RunManifest::new(command, params.a(), params.delta_exp(), params.alpha(), params.beta());
    m.format = common.format.as_str().to_string();
    m.model_file = common.model.as_ref().map(|p| p.display().to_string());
    m
}

fn data_file_name(stem: &str, format: OutputFormat) -> String {
    format!("{stem}.{}", format.as_str())
}

fn emit(
    out: &Path,
    stem: &str,
    table: &Table,
    manifest: &mut RunManifest,
    started: Instant,
) -> Result<(), CliError> {
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let format = if manifest.format == "json" { OutputFormat::Json } else { OutputFormat::Csv };
    write_atomic(out, &data_file_name(stem, format), &table.render(format))?;
    write_atomic(out, "manifest.json", &manifest.to_json()?)?;
    Ok(())
}

pub fn cmd_table1(args: &Table1Args) -> Result<(), CliError> {
    let started = Instant::now();
    let mut common = args.common.clone();
    let mut grid = args.grid.clone().unwrap_or_else(|| TABLE1_GRID.to_vec());
    if args.paper_defaults {
        common.a = 2.0;
        common.delta_exp = 5;
        common.alpha = 0.01;
        common.beta = None;
        grid = TABLE1_GRID.to_vec();
    }
    let params = build_params(&common)?;
    let table = with_pool(common.threads, || {
        let model = resolve_model(&common, &params, args.seed)?;
        let exp = evt::sample_maxima(&params, &model, args.n, args.m as usize, args.seed)?;
        let empirical = ecdf_in_grid_order(&exp, &grid)?;
        let mut table = Table::new(&["x", "H", "empirical"]);
        for (&x, &p) in grid.iter().zip(&empirical) {
            table.push(vec![fmt_f64(x), fmt_f64(evt::weibull_h(x)), fmt_f64(p)]);
        }
        Ok(table)
    })?;
    let mut manifest = base_manifest("table1", &common, &params);
    manifest.seed = Some(args.seed);
    manifest.n = Some(args.n);
    manifest.m = Some(args.m);
    manifest.grid = Some(grid);
    emit(&common.out, "table1", &table, &mut manifest, started)
}

/// ECDF of the normalized sample at grid points given in any order.
fn ecdf_in_grid_order(
    exp: &evt::MaximaExperiment<Real>,
    grid: &[f64],
) -> Result<Vec<f64>, CliError> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[i].partial_cmp(&grid[j]).unwrap());
    let sorted_grid: Vec<f64> = order.iter().map(|&i| grid[i]).collect();
    let values = evt::ecdf_at(exp, &sorted_grid)?;
    let mut out = vec![0.0; grid.len()];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = values[pos];
    }
    Ok(out)
}

pub fn cmd_maxima(args: &MaximaArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let table = with_pool(common.threads, || {
        let model = resolve_model(common, &params, args.seed)?;
        let exp = evt::sample_maxima(&params, &model, args.n, args.m as usize, args.seed)?;
        let mut table = Table::new(&["replica", "normalized"]);
        for (i, &v) in exp.normalized.iter().enumerate() {
            table.push(vec![i.to_string(), fmt_f64(v)]);
        }
        Ok(table)
    })?;
    let mut manifest = base_manifest("maxima", common, &params);
    manifest.seed = Some(args.seed);
    manifest.n = Some(args.n);
    manifest.m = Some(args.m);
    emit(&common.out, "maxima", &table, &mut manifest, started)
}

fn dprime_mode(arg: DprimeModeArg) -> DprimeMode {
    match arg {
        DprimeModeArg::Orbit => DprimeMode::Orbit,
        DprimeModeArg::Strict => DprimeMode::Strict,
        DprimeModeArg::Iid => DprimeMode::IidSurrogate,
    }
}

pub fn cmd_dprime(args: &DprimeArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let table = with_pool(common.threads, || {
        let model = resolve_model(common, &params, args.seed)?;
        let mut table = Table::new(&["k", "estimate", "stderr"]);
        for &k in &args.k {
            let est = evt::dprime_estimate(
                &params,
                &model,
                args.n,
                k,
                args.tau,
                args.trials as usize,
                args.seed,
                dprime_mode(args.mode),
            )?;
            table.push(vec![k.to_string(), fmt_f64(est.estimate), fmt_f64(est.std_error)]);
        }
        Ok(table)
    })?;
    let mut manifest = base_manifest("dprime", common, &params);
    manifest.seed = Some(args.seed);
    manifest.n = Some(args.n);
    manifest.tau = Some(args.tau);
    manifest.k = Some(args.k.clone());
    manifest.trials = Some(args.trials);
    manifest.mode = Some(format!("{:?}", args.mode).to_lowercase());
    emit(&common.out, "dprime", &table, &mut manifest, started)
}

pub fn cmd_corr(args: &CorrArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let (table, varsigma_hat) = with_pool(common.threads, || {
        let model = resolve_model(common, &params, args.seed)?;
        let level = model.level(args.n, args.tau, &params)?;
        let points = evt::indicator_correlation(
            &params,
            &model,
            level.u_n,
            args.j_max as usize,
            args.trials as usize,
            args.seed,
        )?;
        let mut table = Table::new(&["j", "p_joint", "p_marginal_sq", "corr", "stderr"]);
        for p in &points {
            table.push(vec![
                p.lag.to_string(),
                fmt_f64(p.p_joint),
                fmt_f64(p.p_marginal_sq),
                fmt_f64(p.corr),
                fmt_f64(p.std_error),
            ]);
        }
        Ok((table, evt::fit_decay_rate(&points)))
    })?;
    let mut manifest = base_manifest("corr", common, &params);
    manifest.seed = Some(args.seed);
    manifest.n = Some(args.n);
    manifest.tau = Some(args.tau);
    manifest.j_max = Some(args.j_max);
    manifest.trials = Some(args.trials);
    match varsigma_hat {
        Some(v) => {
            manifest.varsigma_hat = Some(v);
            manifest.turning_time = Some(evt::turning_time(v, args.n)?);
        }
        None => {
            // No lag rises above 3 sigma: mixing indistinguishable from
            // immediate, so no turning time is reported.
            manifest.varsigma_hat = None;
            manifest.turning_time = None;
        }
    }
    emit(&common.out, "corr", &table, &mut manifest, started)
}

pub fn cmd_depth(args: &DepthArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let table = with_pool(common.threads, || {
        let model = resolve_model(common, &params, args.seed)?;
        let hist = evt::depth_histogram(
            &params,
            &model,
            args.theta_min,
            args.trials as usize,
            args.horizon,
            args.seed,
        )?;
        let mut table = Table::new(&["gamma", "count", "frequency", "analytic_a2"]);
        let max_gamma = hist.counts.keys().max().copied().unwrap_or(args.theta_min);
        for gamma in args.theta_min..=max_gamma {
            let count = *hist.counts.get(&gamma).unwrap_or(&0);
            let analytic = if common.a == 2.0 {
                fmt_f64(evt::analytic_ring_probability_a2(gamma))
            } else {
                String::new()
            };
            table.push(vec![
                gamma.to_string(),
                count.to_string(),
                fmt_f64(hist.frequency(gamma)),
                analytic,
            ]);
        }
        Ok(table)
    })?;
    let mut manifest = base_manifest("depth", common, &params);
    manifest.seed = Some(args.seed);
    manifest.theta_min = Some(args.theta_min);
    manifest.trials = Some(args.trials);
    manifest.horizon = Some(args.horizon);
    emit(&common.out, "depth", &table, &mut manifest, started)
}

pub fn cmd_measure(args: &MeasureArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let model =
        MeasureModel::build_empirical(&params, args.n_samples as usize, args.burn_in, args.seed)?;
    if model.undersampled() {
        eprintln!(
            "warning: model has only {} samples; downstream use expects at least 10000",
            model.sample_count()
        );
    }
    std::fs::create_dir_all(&common.out)?;
    let tmp = common.out.join(".tmp-model.csv");
    {
        let file = File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        model.write_to(&mut w)?;
    }
    std::fs::rename(&tmp, common.out.join("model.csv"))?;

    let mut manifest = base_manifest("measure", common, &params);
    manifest.seed = Some(args.seed);
    manifest.n_samples = Some(args.n_samples);
    manifest.burn_in = Some(args.burn_in);
    if common.a == 2.0 {
        manifest.supdist = Some(model.sup_distance_to_analytic()?);
    }
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    write_atomic(&common.out, "manifest.json", &manifest.to_json()?)?;
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &args.common;
    let params = build_params(common)?;
    let c = args.c.unwrap_or_else(|| 2.0_f64.ln());
    let report = map::verify_growth_conditions(&params, c, args.horizon as usize)?;
    let mut table = Table::new(&["n", "eg_margin", "ba_margin"]);
    for i in 0..report.eg_margins.len() {
        table.push(vec![
            (i + 1).to_string(),
            fmt_f64(report.eg_margins[i]),
            fmt_f64(report.ba_margins[i]),
        ]);
    }
    let mut manifest = base_manifest("verify", common, &params);
    manifest.n = Some(args.horizon);
    manifest.c = Some(c);
    emit(&common.out, "verify", &table, &mut manifest, started)?;

    let describe = |pass: bool, first: Option<usize>| match (pass, first) {
        (true, _) => "pass".to_string(),
        (false, Some(n)) => format!("FAIL (first violation at n = {n})"),
        (false, None) => "FAIL".to_string(),
    };
    println!(
        "EG {} (c={}), BA {} (alpha={})",
        describe(report.eg_pass, report.eg_first_failure),
        fmt_f64(c),
        describe(report.ba_pass, report.ba_first_failure),
        fmt_f64(params.alpha()),
    );
    if report.eg_pass && report.ba_pass {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "EG first violation: {:?}, BA first violation: {:?}",
            report.eg_first_failure, report.ba_first_failure
        )))
    }
}

/// Rebuilds a command invocation from a manifest and runs it into `out`.
pub fn run_from_manifest(manifest: &RunManifest, out: &Path) -> Result<(), CliError> {
    let missing = |field: &str| CliError::BadManifest(format!("missing field {field:?}"));
    let common = CommonArgs {
        a: manifest.a,
        delta_exp: manifest.delta_exp,
        alpha: manifest.alpha,
        beta: Some(manifest.beta),
        out: out.to_path_buf(),
        format: if manifest.format == "json" { OutputFormat::Json } else { OutputFormat::Csv },
        threads: None,
        model: manifest.model_file.clone().map(Into::into),
    };
    match manifest.command.as_str() {
        "table1" => cmd_table1(&Table1Args {
            n: manifest.n.ok_or_else(|| missing("n"))?,
            m: manifest.m.ok_or_else(|| missing("m"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            grid: manifest.grid.clone(),
            paper_defaults: false,
            common,
        }),
        "maxima" => cmd_maxima(&MaximaArgs {
            n: manifest.n.ok_or_else(|| missing("n"))?,
            m: manifest.m.ok_or_else(|| missing("m"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            common,
        }),
        "dprime" => cmd_dprime(&DprimeArgs {
            n: manifest.n.ok_or_else(|| missing("n"))?,
            tau: manifest.tau.ok_or_else(|| missing("tau"))?,
            k: manifest.k.clone().ok_or_else(|| missing("k"))?,
            trials: manifest.trials.ok_or_else(|| missing("trials"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            mode: match manifest.mode.as_deref() {
                Some("strict") => DprimeModeArg::Strict,
                Some("iid") => DprimeModeArg::Iid,
                _ => DprimeModeArg::Orbit,
            },
            common,
        }),
        "corr" => cmd_corr(&CorrArgs {
            n: manifest.n.ok_or_else(|| missing("n"))?,
            tau: manifest.tau.ok_or_else(|| missing("tau"))?,
            j_max: manifest.j_max.ok_or_else(|| missing("j_max"))?,
            trials: manifest.trials.ok_or_else(|| missing("trials"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            common,
        }),
        "depth" => cmd_depth(&DepthArgs {
            theta_min: manifest.theta_min.ok_or_else(|| missing("theta_min"))?,
            trials: manifest.trials.ok_or_else(|| missing("trials"))?,
            horizon: manifest.horizon.ok_or_else(|| missing("horizon"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            common,
        }),
        "measure" => cmd_measure(&MeasureArgs {
            n_samples: manifest.n_samples.ok_or_else(|| missing("n_samples"))?,
            burn_in: manifest.burn_in.ok_or_else(|| missing("burn_in"))?,
            seed: manifest.seed.ok_or_else(|| missing("seed"))?,
            common,
        }),
        "verify" => cmd_verify(&VerifyArgs {
            horizon: manifest.n.ok_or_else(|| missing("n"))?,
            c: manifest.c,
            common,
        }),
        other => Err(CliError::BadManifest(format!("unknown command {other:?}"))),
    }
}
