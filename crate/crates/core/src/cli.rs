//! The `tmax` command line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog::{self, BoundingBox, CatalogFilter, ColumnSchema, MagnitudeSample, DEFAULT_TIE_HALF_WIDTH};
use crate::classical::{self, KsConfig, NPConfig};
use crate::diagnostics;
use crate::endpoint::Estimator;
use crate::error::{Error, Result};
use crate::evt;
use crate::output::{self, format_number, EstimateRow, RunManifest};
use crate::simulation::{self, StudyConfig, TruncatedGRParams};

#[derive(Debug, Parser)]
#[command(name = "tmax", version, about = "Maximum possible magnitude estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter and tie-smooth a catalog, write the magnitude sample.
    Catalog(CatalogCmd),
    /// Endpoint estimates over a k-grid.
    Estimate(EstimateCmd),
    /// Upper confidence bounds at level alpha.
    Bounds(BoundsCmd),
    /// QQ, mean excess, Hill and truncation test output.
    Diagnose(DiagnoseCmd),
    /// Monte Carlo comparison on truncated Gutenberg-Richter samples.
    Simulate(SimulateCmd),
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Event catalog (CSV or semicolon separated).
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    pub input: Option<PathBuf>,
    /// Ready-made sample file with a `magnitude` column (as written by `catalog`).
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// `simple`, `knmi` or `date=COL,lat=COL,lon=COL,mag=COL[,time=COL,format=FMT]`.
    #[arg(long, default_value = "simple")]
    pub schema: String,
    /// LAT1,LON1,LAT2,LON2 or `groningen`.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<String>,
    #[arg(long = "t-min", default_value_t = 1.5)]
    pub t_min: f64,
    /// YYYY-MM-DD..YYYY-MM-DD
    #[arg(long = "date-range")]
    pub date_range: Option<String>,
    /// Tie smoothing seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Half width of the uniform tie jitter.
    #[arg(long = "tie-width", default_value_t = DEFAULT_TIE_HALF_WIDTH)]
    pub tie_width: f64,
    #[arg(long = "out-dir", default_value = "tmax-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CatalogCmd {
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KArgs {
    /// Single k for the EVT and FL/EFL estimators.
    #[arg(long, conflicts_with = "k_grid")]
    pub k: Option<usize>,
    /// `A..B`, `A..B:STEP` or a comma list; default 5..n-1.
    #[arg(long = "k-grid")]
    pub k_grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ClampArgs {
    /// Clamp EVT estimates below at the sample maximum (default).
    #[arg(long, overrides_with = "no_clamp")]
    pub clamp: bool,
    #[arg(long = "no-clamp", overrides_with = "clamp")]
    pub no_clamp: bool,
}

impl ClampArgs {
    fn enabled(&self) -> bool {
        !self.no_clamp
    }
}

#[derive(Debug, Args)]
pub struct EstimateCmd {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub k: KArgs,
    /// Comma list of trgpd,trpareto,npg,npos,fl,efl,rw,rwc,ks; default all.
    #[arg(long)]
    pub estimators: Option<String>,
    #[command(flatten)]
    pub clamp: ClampArgs,
}

#[derive(Debug, Args)]
pub struct BoundsCmd {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[command(flatten)]
    pub clamp: ClampArgs,
}

#[derive(Debug, Args)]
pub struct DiagnoseCmd {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub k: KArgs,
    /// Significance level of the truncation tests.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[arg(long, default_value_t = 5000)]
    pub replicates: usize,
    #[arg(long = "sample-size", default_value_t = 250)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 2.1203)]
    pub beta: f64,
    #[arg(long = "t-min", default_value_t = 1.5)]
    pub t_min: f64,
    /// Comma list of true endpoints.
    #[arg(long = "t-max", default_value = "3.75,4,4.5")]
    pub t_max: String,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Default 10,20,...,n-10,n-1.
    #[arg(long = "k-grid")]
    pub k_grid: Option<String>,
    #[arg(long, default_value_t = 20_170_101)]
    pub seed: u64,
    #[arg(long = "out-dir", default_value = "tmax-out")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub clamp: ClampArgs,
}

/// Parse `A..B`, `A..B:STEP` or `a,b,c`.
pub fn parse_k_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("invalid k grid '{text}'"));
    let text = text.trim();
    let grid: Vec<usize> = if let Some((a, rest)) = text.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (b, s.trim().parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if step == 0 || a > b {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(bad());
    }
    Ok(grid)
}

fn parse_bbox(text: &str) -> Result<BoundingBox> {
    if text.eq_ignore_ascii_case("groningen") {
        return Ok(BoundingBox::groningen());
    }
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("invalid bbox '{text}'")))?;
    match parts[..] {
        [a, b, c, d] => BoundingBox::from_corners(a, b, c, d),
        _ => Err(Error::invalid("bbox needs LAT1,LON1,LAT2,LON2")),
    }
}

fn parse_estimators(text: Option<&str>) -> Result<Vec<Estimator>> {
    match text {
        None => Ok(Estimator::ALL.to_vec()),
        Some(t) => t
            .split(',')
            .map(|id| Estimator::from_id(id).ok_or_else(|| Error::invalid(format!("unknown estimator '{id}'"))))
            .collect(),
    }
}

fn read_input(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))
}

fn load_sample_file(path: &Path, t_min: f64) -> Result<MagnitudeSample> {
    let mut reader = csv::Reader::from_reader(read_input(path)?);
    let col = reader
        .headers()?
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("magnitude"))
        .ok_or_else(|| Error::Schema(format!("{} has no 'magnitude' column", path.display())))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let v: f64 = record
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Row {
                line: i + 2,
                message: "invalid magnitude".into(),
            })?;
        if v >= t_min {
            values.push(v);
        }
    }
    MagnitudeSample::new(values, t_min)
}

/// Build the magnitude sample described by the common arguments.
pub fn load_sample(args: &SampleArgs, manifest: &mut RunManifest) -> Result<MagnitudeSample> {
    manifest.set("t_min", args.t_min);
    if let Some(path) = &args.sample {
        manifest.inputs.push(path.clone());
        manifest.set("sample", path.display());
        return load_sample_file(path, args.t_min);
    }
    let path = args
        .input
        .as_ref()
        .ok_or_else(|| Error::invalid("--input or --sample is required"))?;
    let schema = ColumnSchema::from_spec(&args.schema)?;
    let events = catalog::parse_catalog(read_input(path)?, &schema)?;
    let bbox = match &args.bbox {
        Some(b) => parse_bbox(b)?,
        None => BoundingBox {
            lat_min: -90.0,
            lat_max: 90.0,
            lon_min: -180.0,
            lon_max: 180.0,
        },
    };
    let mut filter = CatalogFilter::new(bbox, args.t_min);
    if let Some(range) = &args.date_range {
        let (a, b) = catalog::parse_date_range(range)?;
        filter = filter.with_date_range(a, b)?;
    }
    let kept = catalog::filter_events(&events, &filter);
    manifest.inputs.push(path.clone());
    manifest.set("input", path.display());
    manifest.set("schema", &args.schema);
    manifest.set(
        "bbox",
        format!("{},{},{},{}", bbox.lat_min, bbox.lon_min, bbox.lat_max, bbox.lon_max),
    );
    manifest.set("date_range", args.date_range.as_deref().unwrap_or(""));
    manifest.set("tie_width", args.tie_width);
    manifest.seeds.push(("smoothing".into(), args.seed));
    catalog::build_sample(&kept, args.t_min, args.tie_width, args.seed)
}

fn resolve_k_grid(k: &KArgs, n: usize) -> Result<Vec<usize>> {
    let grid = match (k.k, &k.k_grid) {
        (Some(k), _) => vec![k],
        (None, Some(text)) => parse_k_grid(text)?,
        (None, None) => (5..n).collect(),
    };
    Ok(grid)
}

fn error_row(estimator: &str, k: Option<usize>, alpha: Option<f64>, e: &Error) -> EstimateRow {
    EstimateRow {
        estimator: estimator.into(),
        k,
        estimate: None,
        raw: None,
        alpha,
        upper_bound: None,
        error: e.to_string(),
    }
}

fn estimate_row(r: &crate::EndpointResult) -> EstimateRow {
    EstimateRow {
        estimator: r.estimator.id().into(),
        k: r.k,
        estimate: Some(r.estimate),
        raw: Some(r.raw),
        alpha: r.upper_bound.map(|b| b.alpha),
        upper_bound: r.upper_bound.map(|b| b.value),
        error: String::new(),
    }
}

/// Estimates for `estimators`; failures become rows with an error message.
pub fn compute_estimates(
    sample: &MagnitudeSample,
    estimators: &[Estimator],
    k_grid: &[usize],
    clamp: bool,
) -> Vec<EstimateRow> {
    let n = sample.n();
    let np = NPConfig::default();
    let energies = sample.energies();
    let mut fl_grid: Vec<usize> = k_grid.to_vec();
    if !fl_grid.contains(&n) {
        fl_grid.push(n);
    }
    let mut rows = Vec::new();
    let mut push = |r: Result<crate::EndpointResult>, e: Estimator, k: Option<usize>| match r {
        Ok(r) => rows.push(estimate_row(&r)),
        Err(err) => rows.push(error_row(e.id(), k, None, &err)),
    };
    for &est in estimators {
        match est {
            Estimator::TruncatedGpd => {
                for &k in k_grid {
                    let r = evt::fit_truncated_gpd(sample, k).map(|f| evt::endpoint_tgpd(&f, sample, clamp));
                    push(r, est, Some(k));
                }
            }
            Estimator::TruncatedPareto => {
                for &k in k_grid {
                    let r = evt::fit_truncated_pareto(&energies, k).map(|f| evt::endpoint_tpareto(&f, sample, clamp));
                    push(r, est, Some(k));
                }
            }
            Estimator::FewLargest => {
                for &k in &fl_grid {
                    push(classical::fl_endpoint(sample, k), est, Some(k));
                }
            }
            Estimator::ExtendedFewLargest => {
                for &k in &fl_grid {
                    push(classical::efl_endpoint(sample, k), est, Some(k));
                }
            }
            Estimator::NonParametricGaussian => {
                push(classical::npg_endpoint(sample, &np).map(|r| r.endpoint), est, Some(n))
            }
            Estimator::NonParametricOrderStatistics => push(classical::npos_endpoint(sample), est, Some(n)),
            Estimator::RobsonWhitlock => push(classical::rw_endpoint(sample), est, Some(2)),
            Estimator::RobsonWhitlockCooke => push(classical::rwc_endpoint(sample, &np), est, Some(2)),
            Estimator::KijkoSellevoll => push(
                classical::ks_endpoint(sample, &KsConfig::default()).map(|r| r.endpoint),
                est,
                Some(n),
            ),
        }
    }
    rows
}

/// The four upper bounds; the Pisarenko bound is reported as `pisarenko`.
pub fn compute_bounds(sample: &MagnitudeSample, k_grid: &[usize], alpha: f64, clamp: bool) -> Result<Vec<EstimateRow>> {
    evt::check_alpha(alpha)?;
    let n = sample.n();
    let energies = sample.energies();
    let np = NPConfig::default();
    let mut rows = Vec::new();
    for &k in k_grid {
        let gpd = evt::fit_truncated_gpd(sample, k).and_then(|f| {
            let est = evt::endpoint_tgpd(&f, sample, clamp);
            let odds = evt::truncation_odds_tgpd(&f, sample);
            Ok(est.with_bound(evt::upper_bound_tgpd(&f, &odds, sample, alpha)?))
        });
        rows.push(gpd.map_or_else(|e| error_row("trgpd", Some(k), Some(alpha), &e), |r| estimate_row(&r)));
        let par = evt::fit_truncated_pareto(&energies, k).and_then(|f| {
            let est = evt::endpoint_tpareto(&f, sample, clamp);
            let odds = evt::truncation_odds_tpareto(&f);
            Ok(est.with_bound(evt::upper_bound_tpareto(&f, &odds, sample, alpha)?))
        });
        rows.push(par.map_or_else(
            |e| error_row("trpareto", Some(k), Some(alpha), &e),
            |r| estimate_row(&r),
        ));
    }
    let npos = classical::npos_endpoint(sample)
        .and_then(|r| Ok(r.with_bound(classical::npos_upper_bound(sample, alpha, &np)?)));
    rows.push(npos.map_or_else(|e| error_row("npos", Some(n), Some(alpha), &e), |r| estimate_row(&r)));
    let pis = classical::ks_endpoint(sample, &KsConfig::default()).and_then(|r| {
        let b = classical::pisarenko_upper_bound(sample, r.beta, alpha)?;
        Ok(r.endpoint.with_bound(b))
    });
    rows.push(pis.map_or_else(
        |e| error_row("pisarenko", Some(n), Some(alpha), &e),
        |r| EstimateRow {
            estimator: "pisarenko".into(),
            ..estimate_row(&r)
        },
    ));
    Ok(rows)
}

#[derive(Serialize)]
struct SampleSummary {
    n: usize,
    t_m: f64,
    min: f64,
    max: f64,
    mean: f64,
    smoothing_seed: Option<u64>,
}

fn summary(sample: &MagnitudeSample) -> SampleSummary {
    SampleSummary {
        n: sample.n(),
        t_m: sample.t_m(),
        min: sample.values()[0],
        max: sample.max(),
        mean: sample.mean(),
        smoothing_seed: sample.smoothing_seed(),
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn finish(mut manifest: RunManifest, dir: &Path) -> Result<()> {
    manifest.write(&dir.join("manifest.txt"))
}

fn write_sample(path: &Path, sample: &MagnitudeSample) -> Result<()> {
    // full precision so the sample can be reloaded without creating ties
    let rows: Vec<Vec<String>> = sample.values().iter().map(|v| vec![format!("{v:?}")]).collect();
    output::write_table_csv(path, &["magnitude"], &rows)
}

fn cmd_catalog(cmd: &CatalogCmd) -> Result<()> {
    let mut manifest = RunManifest::new("catalog");
    let sample = load_sample(&cmd.sample, &mut manifest)?;
    let dir = &cmd.sample.out_dir;
    prepare_out_dir(dir)?;
    let s = summary(&sample);
    println!(
        "n = {}\nt_M = {}\nmin = {}\nmax = {}",
        s.n,
        format_number(s.t_m),
        format_number(s.min),
        format_number(s.max)
    );
    let sample_path = dir.join("sample.csv");
    write_sample(&sample_path, &sample)?;
    let json = dir.join("summary.json");
    output::write_json(&json, &s)?;
    manifest.outputs.extend([sample_path, json]);
    finish(manifest, dir)
}

fn cmd_estimate(cmd: &EstimateCmd) -> Result<()> {
    let mut manifest = RunManifest::new("estimate");
    let estimators = parse_estimators(cmd.estimators.as_deref())?;
    let sample = load_sample(&cmd.sample, &mut manifest)?;
    let grid = resolve_k_grid(&cmd.k, sample.n())?;
    let clamp = cmd.clamp.enabled();
    manifest.set(
        "estimators",
        estimators.iter().map(|e| e.id()).collect::<Vec<_>>().join(","),
    );
    manifest.set(
        "k_grid",
        grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    );
    manifest.set("clamp", clamp);
    let rows = compute_estimates(&sample, &estimators, &grid, clamp);
    let dir = &cmd.sample.out_dir;
    prepare_out_dir(dir)?;
    let csv = dir.join("estimates.csv");
    output::write_estimates_csv(&csv, &rows)?;
    let json = dir.join("summary.json");
    output::write_json(
        &json,
        &serde_json::json!({ "sample": summary(&sample), "estimates": rows }),
    )?;
    manifest.outputs.extend([csv, json]);
    finish(manifest, dir)
}

fn cmd_bounds(cmd: &BoundsCmd) -> Result<()> {
    evt::check_alpha(cmd.alpha)?;
    let mut manifest = RunManifest::new("bounds");
    let sample = load_sample(&cmd.sample, &mut manifest)?;
    let grid = resolve_k_grid(&cmd.k, sample.n())?;
    let clamp = cmd.clamp.enabled();
    manifest.set("alpha", cmd.alpha);
    manifest.set(
        "k_grid",
        grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    );
    manifest.set("clamp", clamp);
    let rows = compute_bounds(&sample, &grid, cmd.alpha, clamp)?;
    for r in rows
        .iter()
        .filter(|r| r.estimator == "npos" || r.estimator == "pisarenko")
    {
        println!("{} = {}", r.estimator, opt(r.upper_bound));
    }
    let dir = &cmd.sample.out_dir;
    prepare_out_dir(dir)?;
    let csv = dir.join("bounds.csv");
    output::write_estimates_csv(&csv, &rows)?;
    let json = dir.join("summary.json");
    output::write_json(
        &json,
        &serde_json::json!({ "sample": summary(&sample), "bounds": rows }),
    )?;
    manifest.outputs.extend([csv, json]);
    finish(manifest, dir)
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_else(|| "NA".into())
}

fn cmd_diagnose(cmd: &DiagnoseCmd) -> Result<()> {
    evt::check_alpha(cmd.alpha)?;
    let mut manifest = RunManifest::new("diagnose");
    let sample = load_sample(&cmd.sample, &mut manifest)?;
    let grid = resolve_k_grid(&cmd.k, sample.n())?;
    manifest.set("alpha", cmd.alpha);
    manifest.set(
        "k_grid",
        grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    );
    let dir = &cmd.sample.out_dir;
    prepare_out_dir(dir)?;

    let qe = dir.join("qq_exponential.csv");
    output::write_qq_csv(&qe, &diagnostics::exponential_qq(&sample)?)?;
    let qp = dir.join("qq_pareto.csv");
    output::write_qq_csv(&qp, &diagnostics::pareto_qq(&sample)?)?;
    let me = dir.join("mean_excess.csv");
    output::write_mean_excess_csv(&me, &diagnostics::mean_excess(&sample)?)?;

    let energies = sample.energies();
    let log_e: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let hill = diagnostics::hill_path(&log_e)?;
    let hill_rows: Vec<Vec<String>> = hill
        .iter()
        .enumerate()
        .map(|(i, h)| vec![(i + 1).to_string(), format_number(*h)])
        .collect();
    let hp = dir.join("hill.csv");
    output::write_table_csv(&hp, &["k", "hill"], &hill_rows)?;

    let mut test_rows = Vec::new();
    for &k in &grid {
        let gpd_xi = evt::fit_truncated_gpd(&sample, k).ok().map(|f| f.xi);
        let par = evt::fit_truncated_pareto(&energies, k).ok();
        let gt = evt::test_truncation_gpd(&sample, k, cmd.alpha).ok();
        let pt = evt::test_truncation_pareto(&energies, k, cmd.alpha).ok();
        test_rows.push(vec![
            k.to_string(),
            opt_cell(gpd_xi),
            opt_cell(par.map(|p| p.xi_plus)),
            opt_cell(gt.map(|t| t.statistic)),
            opt_cell(gt.map(|t| t.p_value)),
            opt_cell(pt.map(|t| t.statistic)),
            opt_cell(pt.map(|t| t.p_value)),
        ]);
    }
    let tp = dir.join("truncation_tests.csv");
    output::write_table_csv(
        &tp,
        &[
            "k",
            "xi_gpd",
            "xi_pareto",
            "gpd_statistic",
            "gpd_p_value",
            "pareto_statistic",
            "pareto_p_value",
        ],
        &test_rows,
    )?;
    let json = dir.join("summary.json");
    output::write_json(&json, &serde_json::json!({ "sample": summary(&sample) }))?;
    manifest.outputs.extend([qe, qp, me, hp, tp, json]);
    finish(manifest, dir)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn cmd_simulate(cmd: &SimulateCmd) -> Result<()> {
    let mut manifest = RunManifest::new("simulate");
    let t_max: Vec<f64> = cmd
        .t_max
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("invalid --t-max '{}'", cmd.t_max)))?;
    let k_grid = match &cmd.k_grid {
        Some(t) => parse_k_grid(t)?,
        None => simulation::default_k_grid(cmd.sample_size),
    };
    let dir = &cmd.out_dir;
    manifest.set("replicates", cmd.replicates);
    manifest.set("sample_size", cmd.sample_size);
    manifest.set("beta", cmd.beta);
    manifest.set("t_min", cmd.t_min);
    manifest.set("t_max", &cmd.t_max);
    manifest.set("alpha", cmd.alpha);
    manifest.set(
        "k_grid",
        k_grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    );
    manifest.set("clamp", cmd.clamp.enabled());
    manifest.seeds.push(("master".into(), cmd.seed));
    let mut reports = Vec::new();
    for &t in &t_max {
        let config = StudyConfig {
            replicates: cmd.replicates,
            sample_size: cmd.sample_size,
            params: TruncatedGRParams::new(cmd.beta, cmd.t_min, t)?,
            alpha: cmd.alpha,
            k_grid: k_grid.clone(),
            master_seed: cmd.seed,
            clamp: cmd.clamp.enabled(),
            np: NPConfig::default(),
            ks: KsConfig::default(),
        };
        config.validate()?;
        reports.push(simulation::run_study(&config)?);
    }
    prepare_out_dir(dir)?;
    for report in &reports {
        manifest.outputs.extend(output::write_simulation_csvs(dir, report)?);
    }
    let json = dir.join("summary.json");
    output::write_json(&json, &reports)?;
    manifest.outputs.push(json);
    finish(manifest, dir)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Catalog(c) => cmd_catalog(c),
        Command::Estimate(c) => cmd_estimate(c),
        Command::Bounds(c) => cmd_bounds(c),
        Command::Diagnose(c) => cmd_diagnose(c),
        Command::Simulate(c) => cmd_simulate(c),
    }
}
