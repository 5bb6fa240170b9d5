//! Experiment driver: executes a parsed configuration, persists plot-ready
//! CSV plus a JSON summary with verdicts and seeds, and replays summaries
//! bit-identically.

use crate::calculus::{function_by_name, taylor_polynomial, variation_smooth};
use crate::checks::{
    check_martingale_bound, check_sup_expectation_limits, check_tail_order,
    fit_exit_bound_constants, BoundForm,
};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::domain::{
    domain_by_name, horizontal_perimeter, perimeter_continuity_scan, PerimeterMethod,
};
use crate::error::{Error, Result};
use crate::group::{by_name as group_by_name, CarnotGroup, Point};
use crate::heat::{
    estimate_q, ratio_curve, verify_lower_bound, verify_mollification_monotonicity, HeatParams,
};
use crate::rng::stream;
use crate::stable::{
    estimate_sup_constant, sample_subordinator, RateFunction, SubordinatorSpec,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.to_string(), pass, detail }
    }
}

/// JSON summary written next to the CSV; embeds everything `replay` needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub workers: usize,
    pub csv_file: String,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    pub wall_seconds: f64,
    pub details: Value,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub pass: bool,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Executes the experiment and writes `<kind>.csv` and `<kind>-summary.json`
/// into `out_dir`. Nothing is written when validation or execution fails.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let (csv, verdicts, details) = execute(cfg)?;
    let pass = verdicts.iter().all(|v| v.pass);
    std::fs::create_dir_all(out_dir)?;
    let csv_file = format!("{}.csv", cfg.kind);
    let csv_path = out_dir.join(&csv_file);
    std::fs::write(&csv_path, &csv)?;
    let summary = RunSummary {
        kind: cfg.kind.to_string(),
        config: cfg.entries.clone(),
        seed: cfg.seed()?,
        workers: cfg.workers()?,
        csv_file,
        verdicts,
        pass,
        wall_seconds: started.elapsed().as_secs_f64(),
        details,
    };
    let summary_path = out_dir.join(format!("{}-summary.json", cfg.kind));
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).map_err(json_err)?)?;
    Ok(RunOutcome { pass, csv_path, summary_path })
}

#[derive(Clone, Debug)]
pub struct ReplayOutcome {
    pub pass: bool,
    /// first divergent CSV cell as (line, column, old, new)
    pub divergence: Option<(usize, usize, String, String)>,
}

/// Re-executes the run recorded in a summary JSON and compares the CSV
/// byte content cell by cell.
pub fn replay(summary_path: &Path, workers: Option<usize>) -> Result<ReplayOutcome> {
    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(summary_path)?)
        .map_err(|e| Error::Parse(format!("bad summary JSON: {e}")))?;
    let mut cfg = ExperimentConfig {
        kind: summary.kind.parse()?,
        entries: summary.config.clone(),
    };
    if let Some(w) = workers {
        cfg.set("workers", w.to_string());
    }
    let old = std::fs::read_to_string(
        summary_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&summary.csv_file),
    )?;
    let (new, _, _) = execute(&cfg)?;
    if old == new {
        return Ok(ReplayOutcome { pass: true, divergence: None });
    }
    for (li, (a, b)) in old.lines().zip(new.lines()).enumerate() {
        if a != b {
            for (ci, (ca, cb)) in a.split(',').zip(b.split(',')).enumerate() {
                if ca != cb {
                    return Ok(ReplayOutcome {
                        pass: false,
                        divergence: Some((li + 1, ci + 1, ca.to_string(), cb.to_string())),
                    });
                }
            }
            return Ok(ReplayOutcome {
                pass: false,
                divergence: Some((li + 1, 0, a.to_string(), b.to_string())),
            });
        }
    }
    Ok(ReplayOutcome {
        pass: false,
        divergence: Some((old.lines().count().min(new.lines().count()) + 1, 0, String::new(), String::new())),
    })
}

/// Computes the CSV body, verdicts and JSON details without touching disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let workers = cfg.workers()?;
    if workers == 0 {
        execute_inner(cfg)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| execute_inner(cfg))
    }
}

fn execute_inner(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    match cfg.kind {
        ExperimentKind::HeatContent => run_heat_content(cfg),
        ExperimentKind::SmoothFunction => run_smooth_function(cfg),
        ExperimentKind::LowerBound => run_lower_bound(cfg),
        ExperimentKind::Perimeter => run_perimeter(cfg),
        ExperimentKind::Subordinator => run_subordinator(cfg),
        ExperimentKind::ExitBounds => run_exit_bounds(cfg),
        ExperimentKind::TailChecks => run_tail_checks(cfg),
        ExperimentKind::Taylor => run_taylor(cfg),
        ExperimentKind::Mollification => run_mollification(cfg),
    }
}

fn group_of(cfg: &ExperimentConfig) -> Result<CarnotGroup> {
    group_by_name(cfg.require("group")?)
}

fn rate_of(cfg: &ExperimentConfig, g_seed: u64) -> Result<RateFunction> {
    let alpha = cfg.get_f64("alpha")?;
    if alpha <= 1.0 {
        return RateFunction::without_constant(alpha);
    }
    let steps = if alpha >= 2.0 { 64 } else { 256 };
    let n = cfg.get_usize_or("kappa-samples", 200_000)?;
    Ok(RateFunction::with_constant(estimate_sup_constant(alpha, n, steps, g_seed)?))
}

fn heat_params(cfg: &ExperimentConfig) -> Result<HeatParams> {
    Ok(HeatParams {
        n: cfg.samples()?,
        grid: cfg.grid()?,
        substeps: cfg.get_usize_or("substeps", 4)?,
        thinning: cfg.get_usize_or("thinning", 1)? != 0,
        bridge: cfg.get_usize_or("bridge", 1)? != 0,
    })
}

fn run_heat_content(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let dom = domain_by_name(&g, cfg.require("domain")?)?;
    let seed = cfg.seed()?;
    let rate = rate_of(cfg, seed.wrapping_add(1))?;
    let params = heat_params(cfg)?;
    let curve = ratio_curve(&g, &dom, &rate, &cfg.t_grid()?, &params, seed)?;
    let mut csv = String::from("t,ratio,ratio_stderr,q_hat,q_stderr,deficit,deficit_stderr,volume\n");
    for (k, est) in curve.estimates.iter().enumerate() {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            est.t, curve.ratios[k], curve.stderrs[k], est.q_hat, est.stderr, est.deficit,
            est.deficit_stderr, est.volume
        )
        .unwrap();
    }
    let mut verdicts = vec![Verdict::new(
        "ratio-curve-finite",
        curve.limit.is_finite() && curve.ratios.iter().all(|r| r.is_finite()),
        format!("extrapolated limit {} +- {}", curve.limit, curve.limit_stderr),
    )];
    if let Some(perim) = cfg.get_f64_opt("perimeter")? {
        let tol = cfg.get_f64_or("tolerance", 0.1)?;
        let ok = (curve.limit - perim).abs() <= tol * perim + 3.0 * curve.limit_stderr;
        verdicts.push(Verdict::new(
            "limit-matches-perimeter",
            ok,
            format!("limit {} vs perimeter {perim} (tolerance {tol})", curve.limit),
        ));
    }
    let details = serde_json::to_value(&curve).map_err(json_err)?;
    Ok((csv, verdicts, details))
}

fn run_smooth_function(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let f = function_by_name(&g, cfg.require("function")?)?;
    let seed = cfg.seed()?;
    let rate = rate_of(cfg, seed.wrapping_add(1))?;
    let alpha = rate.alpha;
    let params = heat_params(cfg)?;
    let mut rng = stream(seed, "variation", 0);
    let variation = variation_smooth(&g, &f, cfg.get_usize_or("variation-samples", 400_000)?, &mut rng)?;
    let mut csv = String::from("t,ratio,ratio_stderr,deficit,deficit_stderr,integral\n");
    let mut last: Option<(f64, f64)> = None;
    for (k, &t) in cfg.t_grid()?.iter().enumerate() {
        let est = crate::heat::estimate_q_f(&g, &f, alpha, t, &params, seed.wrapping_add(k as u64))?;
        let mu = rate.mu(t)?;
        let ratio = est.deficit / mu;
        let se = est.deficit_stderr / mu;
        writeln!(csv, "{},{},{},{},{},{}", t, ratio, se, est.deficit, est.deficit_stderr, est.volume)
            .unwrap();
        last = Some((ratio, se));
    }
    let (ratio, se) = last.unwrap();
    let tol = cfg.get_f64_or("tolerance", 0.1)?;
    let ok = (ratio - variation.value).abs() <= tol * variation.value + 3.0 * (se + variation.stderr);
    let verdicts = vec![Verdict::new(
        "ratio-matches-variation",
        ok,
        format!("ratio {ratio} +- {se} vs horizontal variation {} +- {}", variation.value, variation.stderr),
    )];
    let details = serde_json::json!({
        "variation": variation.value,
        "variation_stderr": variation.stderr,
        "final_ratio": ratio,
        "final_ratio_stderr": se,
    });
    Ok((csv, verdicts, details))
}

fn run_lower_bound(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let dom = domain_by_name(&g, cfg.require("domain")?)?;
    let seed = cfg.seed()?;
    let rate = rate_of(cfg, seed.wrapping_add(1))?;
    let params = heat_params(cfg)?;
    let perim = match cfg.get_f64_opt("perimeter")? {
        Some(p) => p,
        None => {
            horizontal_perimeter(
                &g,
                &dom,
                PerimeterMethod::BoundaryQuadrature { nodes: cfg.get_usize_or("quad-nodes", 512)? },
                seed.wrapping_add(2),
            )?
            .value
        }
    };
    let tol = cfg.get_f64_or("tolerance", 0.1)?;
    let report = verify_lower_bound(&g, &dom, &rate, &cfg.t_grid()?, perim, tol, &params, seed)?;
    let mut csv = String::from("t_min,ratio,ratio_stderr,perimeter,resolved,pass\n");
    writeln!(
        csv,
        "{},{},{},{},{},{}",
        report.t_min, report.ratio, report.ratio_stderr, report.perimeter, report.resolved,
        report.pass
    )
    .unwrap();
    let verdicts = vec![Verdict::new(
        "lower-bound",
        report.pass,
        format!("ratio {} +- {} vs perimeter {}", report.ratio, report.ratio_stderr, perim),
    )];
    let details = serde_json::to_value(&report).map_err(json_err)?;
    Ok((csv, verdicts, details))
}

fn run_perimeter(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let dom = domain_by_name(&g, cfg.require("domain")?)?;
    let seed = cfg.seed()?;
    let samples = cfg.samples()?;
    let eps = cfg.get_f64_or("shell-eps", 0.02)?;
    let mut methods: Vec<PerimeterMethod> = vec![
        PerimeterMethod::ShellCoarea { eps, samples },
        PerimeterMethod::MollifiedVariation {
            eps: cfg.get_f64_or("moll-eps", 0.1)?,
            nodes: cfg.get_usize_or("quad-nodes", 256)?,
            samples,
        },
    ];
    if dom.param.is_some() {
        methods.insert(0, PerimeterMethod::BoundaryQuadrature { nodes: cfg.get_usize_or("quad-nodes", 256)? });
    }
    let mut csv = String::from("method,level,value,stderr\n");
    let mut ests = Vec::new();
    for (k, m) in methods.iter().enumerate() {
        let est = horizontal_perimeter(&g, &dom, *m, seed.wrapping_add(k as u64))?;
        writeln!(csv, "{},0,{},{}", est.method, est.value, est.stderr).unwrap();
        ests.push(est);
    }
    let mut verdicts = Vec::new();
    for pair in ests.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let tol = cfg.get_f64_or("tolerance", 0.05)?;
        let scale = 0.5 * (a.value + b.value);
        let ok = (a.value - b.value).abs() <= tol * scale + 3.0 * (a.stderr + b.stderr);
        verdicts.push(Verdict::new(
            &format!("{}-vs-{}", a.method, b.method),
            ok,
            format!("{} +- {} vs {} +- {}", a.value, a.stderr, b.value, b.stderr),
        ));
    }
    let levels = cfg.get_list_or("levels", &[-0.1, -0.05, -0.02, 0.02, 0.05, 0.1])?;
    let scan = perimeter_continuity_scan(
        &g,
        &dom,
        &levels,
        PerimeterMethod::ShellCoarea { eps, samples },
        seed.wrapping_add(100),
    )?;
    for row in &scan.rows {
        writeln!(csv, "level-scan,{},{},{}", row.level, row.value, row.stderr).unwrap();
    }
    verdicts.push(Verdict::new(
        "level-continuity",
        scan.pass,
        format!("{} levels scanned", scan.rows.len()),
    ));
    let details = serde_json::json!({
        "estimates": ests.iter().map(|e| serde_json::json!({
            "method": e.method, "value": e.value, "stderr": e.stderr
        })).collect::<Vec<_>>(),
        "scan": serde_json::to_value(&scan).map_err(json_err)?,
    });
    Ok((csv, verdicts, details))
}

fn run_subordinator(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let alpha = cfg.get_f64("alpha")?;
    let spec = SubordinatorSpec::new(alpha)?;
    let seed = cfg.seed()?;
    let n = cfg.samples()?;
    let lambdas = cfg.get_list_or("lambda-grid", &[0.5, 1.0, 2.0, 4.0])?;
    let ts = cfg.get_list_or("time-grid", &[0.5, 1.0])?;
    let mut csv = String::from("lambda,t,empirical,exact,stderr,pass\n");
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for (k, &t) in ts.iter().enumerate() {
        let draws: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream(seed, "subordinator", (k * n + i) as u64);
                sample_subordinator(spec, t, &mut rng)
            })
            .collect::<Result<_>>()?;
        for &lambda in &lambdas {
            let vals: Vec<f64> = draws.iter().map(|&s| (-lambda * s).exp()).collect();
            let mean: f64 = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let se = (var / n as f64).sqrt();
            let exact = (-t * lambda.powf(alpha / 2.0)).exp();
            let z = (mean - exact).abs() / se.max(1e-300);
            let ok = (mean - exact).abs() <= 3.0 * se;
            worst = worst.max(z);
            all_ok &= ok;
            writeln!(csv, "{},{},{},{},{},{}", lambda, t, mean, exact, se, ok).unwrap();
        }
    }
    let verdicts = vec![Verdict::new(
        "laplace-transform",
        all_ok,
        format!("worst z-score {worst:.2} over {} cells", ts.len() * lambdas.len()),
    )];
    Ok((csv, verdicts, serde_json::json!({ "worst_z": worst })))
}

fn run_exit_bounds(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let seed = cfg.seed()?;
    let n = cfg.samples()?;
    let r_grid = cfg.get_list_or("r-grid", &[0.5, 1.0, 2.0, 3.0, 4.0])?;
    let t_grid = cfg.get_list_or("time-grid", &[0.01, 0.05, 0.1, 0.5, 1.0])?;
    let beta_grid = cfg.get_list_or("beta-grid", &[0.5, 1.0, 2.0])?;
    let mart = check_martingale_bound(&g, &r_grid, &t_grid, n, seed)?;
    let form = BoundForm::for_step(g.step());
    let fit = fit_exit_bound_constants(&g, &form, &r_grid, &t_grid, &beta_grid, n, seed.wrapping_add(1))?;
    let mut csv = String::from("check,r,t,empirical,bound,margin\n");
    for c in &mart.cells {
        writeln!(csv, "martingale,{},{},{},{},{}", c.r, c.t, c.empirical, c.bound, c.margin).unwrap();
    }
    for c in &fit.cells {
        writeln!(csv, "exit-fit,{},{},{},{},{}", c.r, c.t, c.empirical, c.bound, c.margin).unwrap();
    }
    let verdicts = vec![
        Verdict::new(
            "martingale-bound",
            mart.pass,
            format!("{} violations over {} cells", mart.violations, mart.cells.len()),
        ),
        Verdict::new(
            "exit-bound-domination",
            fit.pass,
            format!("fitted c = {}, beta = {}", fit.c, fit.beta),
        ),
    ];
    let details = serde_json::json!({
        "martingale": serde_json::to_value(&mart).map_err(json_err)?,
        "fit": serde_json::to_value(&fit).map_err(json_err)?,
    });
    Ok((csv, verdicts, details))
}

fn run_tail_checks(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let alpha = cfg.get_f64("alpha")?;
    let seed = cfg.seed()?;
    let n = cfg.samples()?;
    let r = cfg.get_f64_or("radius", 1.0)?;
    let t_grid = cfg.t_grid()?;
    let tail = check_tail_order(&g, alpha, r, &t_grid, n, seed)?;
    let mut csv = String::from("check,t,value,stderr\n");
    for (k, &t) in tail.t_grid.iter().enumerate() {
        writeln!(csv, "tail-probability,{},{},0", t, tail.probabilities[k]).unwrap();
    }
    let mut verdicts = vec![Verdict::new(
        "tail-order",
        tail.pass,
        if tail.resolution_limited {
            "consistent with O(t), resolution-limited".to_string()
        } else {
            format!("slope {:.3}", tail.slope)
        },
    )];
    let mut details = serde_json::json!({ "tail": serde_json::to_value(&tail).map_err(json_err)? });
    if alpha >= 1.0 {
        let rate = rate_of(cfg, seed.wrapping_add(1))?;
        let kappa_exp = cfg.get_f64_or("kappa", 1.0)?;
        let sup_r = cfg.get_f64_or("sup-radius", 10.0)?;
        let sup = check_sup_expectation_limits(&g, &rate, sup_r, kappa_exp, &t_grid, n, seed.wrapping_add(2))?;
        for (k, &t) in sup.t_grid.iter().enumerate() {
            writeln!(
                csv,
                "restricted-ratio,{},{},{}",
                t, sup.restricted_ratios[k], sup.restricted_stderrs[k]
            )
            .unwrap();
            writeln!(csv, "moment-ratio,{},{},0", t, sup.moment_ratios[k]).unwrap();
        }
        verdicts.push(Verdict::new(
            "restricted-sup-limit",
            sup.pass_restricted,
            format!("final ratio {}", sup.restricted_ratios.last().unwrap()),
        ));
        verdicts.push(Verdict::new(
            "moment-ratio-vanishes",
            sup.pass_moment,
            format!("final ratio {}", sup.moment_ratios.last().unwrap()),
        ));
        details["sup"] = serde_json::to_value(&sup).map_err(json_err)?;
    }
    Ok((csv, verdicts, details))
}

fn run_taylor(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let f = function_by_name(&g, cfg.require("function")?)?;
    let order = cfg.get_usize_or("order", 1)?;
    let seed = cfg.seed()?;
    let n = cfg.get_usize_or("samples", 200)?;
    let eps_grid = cfg.get_list_or("eps-grid", &[0.2, 0.1, 0.05, 0.025, 0.0125])?;
    let mut rng = stream(seed, "taylor", 0);
    let mut csv = String::from("eps,mean_remainder\n");
    let mut pts = Vec::new();
    for &eps in &eps_grid {
        let mut acc = 0.0;
        for _ in 0..n {
            let x: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let u: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = g.dilate(eps, &Point(u))?;
            let y = g.multiply(&Point(x.clone()), &h)?;
            let p = taylor_polynomial(&g, &f, &x, &h.0, order)?;
            acc += (f.eval(&y.0) - p).abs();
        }
        let mean = acc / n as f64;
        writeln!(csv, "{},{}", eps, mean).unwrap();
        if mean > 0.0 {
            pts.push((eps.ln(), mean.ln()));
        }
    }
    let slope = if pts.len() < 2 {
        f64::NAN
    } else {
        crate::stable::fit_line(&pts).0
    };
    let min_slope = cfg.get_f64_or("min-slope", order as f64 + 0.85)?;
    let pass = slope.is_finite() && slope >= min_slope;
    let verdicts = vec![Verdict::new(
        "remainder-order",
        pass,
        format!("remainder exponent {slope:.3}, required {min_slope}"),
    )];
    Ok((csv, verdicts, serde_json::json!({ "slope": slope, "order": order })))
}

fn run_mollification(cfg: &ExperimentConfig) -> Result<(String, Vec<Verdict>, Value)> {
    let g = group_of(cfg)?;
    let seed = cfg.seed()?;
    let alpha = cfg.get_f64("alpha")?;
    let t = cfg.get_f64_or("t", 1e-3)?;
    let eps_grid = cfg.get_list_or("eps-grid", &[0.05, 0.1])?;
    let quad_nodes = cfg.get_usize_or("quad-nodes", 128)?;
    let params = heat_params(cfg)?;
    // either a named function or a named domain's indicator
    let f = if let Some(name) = cfg.get("function") {
        function_by_name(&g, name)?
    } else {
        let dom = domain_by_name(&g, cfg.require("domain")?)?;
        let r = dom.dinf_radius(&g);
        dom.indicator(&g).with_support_radius(r)
    };
    let report =
        verify_mollification_monotonicity(&g, &f, &eps_grid, alpha, t, quad_nodes, &params, seed)?;
    let mut csv = String::from("eps,q_f_eps,stderr,pass\n");
    writeln!(csv, "0,{},{},true", report.q_f, report.q_f_stderr).unwrap();
    for row in &report.rows {
        writeln!(csv, "{},{},{},{}", row.eps, row.q_f_eps, row.q_f_eps_stderr, row.pass).unwrap();
    }
    let verdicts = vec![Verdict::new(
        "mollification-monotone",
        report.pass,
        format!("{} scales checked against Q_f = {}", report.rows.len(), report.q_f),
    )];
    let details = serde_json::to_value(&report).map_err(json_err)?;
    Ok((csv, verdicts, details))
}

/// Convenience wrapper for a one-off heat content estimate (used by the CLI's
/// direct-flag mode).
pub fn single_heat_estimate(
    cfg: &ExperimentConfig,
    t: f64,
) -> Result<crate::heat::HeatContentEstimate> {
    let g = group_of(cfg)?;
    let dom = domain_by_name(&g, cfg.require("domain")?)?;
    estimate_q(&g, &dom, cfg.get_f64("alpha")?, t, &heat_params(cfg)?, cfg.seed()?)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("JSON serialization: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("carnot-heat-test-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn subordinator_run_and_replay() {
        let cfg = ExperimentConfig::parse(
            "kind = subordinator\nalpha = 1.5\nsamples = 20000\nseed = 3\n",
        )
        .unwrap();
        let out = tmpdir("subordinator");
        let res = run(&cfg, &out).unwrap();
        assert!(res.pass);
        let csv = std::fs::read_to_string(&res.csv_path).unwrap();
        assert!(csv.starts_with("lambda,t,empirical,exact,stderr,pass\n"));
        assert_eq!(csv.lines().count(), 9);
        // bit-identical replay, also under a different worker count
        let rep = replay(&res.summary_path, None).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = replay(&res.summary_path, Some(3)).unwrap();
        assert!(rep.pass, "{rep:?}");
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn replay_detects_seed_change() {
        let cfg = ExperimentConfig::parse(
            "kind = subordinator\nalpha = 1.2\nsamples = 5000\nseed = 4\n",
        )
        .unwrap();
        let out = tmpdir("replay-seed");
        let res = run(&cfg, &out).unwrap();
        // tamper with the recorded seed
        let text = std::fs::read_to_string(&res.summary_path).unwrap();
        let mut summary: RunSummary = serde_json::from_str(&text).unwrap();
        summary.config.insert("seed".into(), "5".into());
        std::fs::write(&res.summary_path, serde_json::to_string(&summary).unwrap()).unwrap();
        let rep = replay(&res.summary_path, None).unwrap();
        assert!(!rep.pass);
        assert!(rep.divergence.is_some());
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let cfg = ExperimentConfig::parse(
            "kind = heat-content\ngroup = no-such-group\ndomain = interval:0,1\nalpha = 2\n\
             t-start = 1e-2\nt-stop = 1e-3\nt-count = 2\nsamples = 10\n",
        )
        .unwrap();
        let out = tmpdir("invalid");
        assert!(matches!(run(&cfg, &out), Err(Error::UnknownName(_))));
        assert!(!out.exists());
    }

    #[test]
    fn taylor_run_passes() {
        let cfg = ExperimentConfig::parse(
            "kind = taylor\ngroup = heisenberg:1\nfunction = trig\norder = 1\nsamples = 150\nseed = 8\n",
        )
        .unwrap();
        let out = tmpdir("taylor");
        let res = run(&cfg, &out).unwrap();
        assert!(res.pass);
        let summary: RunSummary =
            serde_json::from_str(&std::fs::read_to_string(&res.summary_path).unwrap()).unwrap();
        assert_eq!(summary.kind, "taylor");
        assert!(summary.verdicts[0].pass, "{:?}", summary.verdicts);
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn heat_content_run_on_interval() {
        let cfg = ExperimentConfig::parse(
            "kind = heat-content\ngroup = euclidean:1\ndomain = interval:0,1\nalpha = 2\n\
             t-start = 1e-3\nt-stop = 1e-4\nt-count = 2\nsamples = 20000\ngrid = 128\n\
             kappa-samples = 20000\nperimeter = 2\ntolerance = 0.15\nseed = 9\n",
        )
        .unwrap();
        let out = tmpdir("heat-interval");
        let res = run(&cfg, &out).unwrap();
        assert!(res.pass, "verdicts failed");
        let csv = std::fs::read_to_string(&res.csv_path).unwrap();
        assert_eq!(csv.lines().count(), 3);
        std::fs::remove_dir_all(&out).unwrap();
    }
}
