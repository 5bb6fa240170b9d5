//! End-to-end acceptance criteria. Each test prints one pass/fail line; the
//! assertion carries the same information for the harness.

use carnot_heat::calculus::{function_by_name, variation_smooth};
use carnot_heat::checks::{
    check_martingale_bound, check_sup_expectation_limits, check_tail_order,
    fit_exit_bound_constants, BoundForm,
};
use carnot_heat::config::ExperimentConfig;
use carnot_heat::domain::{
    domain_by_name, euclidean_ball, horizontal_perimeter, perimeter_continuity_scan, interval,
    PerimeterMethod,
};
use carnot_heat::experiment;
use carnot_heat::group::{euclidean, heisenberg};
use carnot_heat::heat::{
    estimate_q_f, ratio_curve, verify_lower_bound, verify_mollification_monotonicity, HeatParams,
};
use carnot_heat::rng::stream;
use carnot_heat::stable::{
    estimate_sup_constant, sample_subordinator, RateFunction, SubordinatorSpec,
};
use std::f64::consts::PI;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {detail}");
}

fn rate_for(alpha: f64, seed: u64) -> RateFunction {
    if alpha <= 1.0 {
        return RateFunction::without_constant(alpha).unwrap();
    }
    let steps = if alpha >= 2.0 { 64 } else { 256 };
    RateFunction::with_constant(estimate_sup_constant(alpha, 200_000, steps, seed).unwrap())
}

#[test]
fn criterion_01_subordinator_laplace_transform() {
    let n = 1_000_000usize;
    let mut worst = 0.0f64;
    for &alpha in &[1.0, 1.2, 1.5, 1.8] {
        let spec = SubordinatorSpec::new(alpha).unwrap();
        for (k, &t) in [0.5, 1.0].iter().enumerate() {
            let draws: Vec<f64> = (0..n)
                .map(|i| {
                    let mut rng = stream(1001, "acc-laplace", (k * n + i) as u64);
                    sample_subordinator(spec, t, &mut rng).unwrap()
                })
                .collect();
            for &lambda in &[0.5f64, 1.0, 2.0, 4.0] {
                let vals: Vec<f64> = draws.iter().map(|&s| (-lambda * s).exp()).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
                let se = (var / n as f64).sqrt();
                let exact = (-t * lambda.powf(alpha / 2.0)).exp();
                worst = worst.max((mean - exact).abs() / se.max(1e-300));
            }
        }
    }
    report(
        "criterion 01 subordinator Laplace transform",
        worst < 3.0,
        &format!("worst z-score {worst:.2} over 32 cells at N = 10^6"),
    );
}

#[test]
fn criterion_02_sup_constant_alpha_two() {
    let c = estimate_sup_constant(2.0, 1_000_000, 64, 1002).unwrap();
    let exact = 2.0 / PI.sqrt();
    let rel = (c.kappa - exact).abs() / exact;
    report(
        "criterion 02 kappa_2 = 2/sqrt(pi)",
        rel < 0.01,
        &format!("estimate {:.5} vs {:.5}, relative error {:.3}%", c.kappa, exact, 100.0 * rel),
    );
}

#[test]
fn criterion_03_interval_ratio_limit() {
    let g = euclidean(1);
    let dom = interval(0.0, 1.0).unwrap();
    let rate = rate_for(2.0, 1003);
    let params = HeatParams { n: 200_000, grid: 512, ..Default::default() };
    let t_grid = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5];
    let curve = ratio_curve(&g, &dom, &rate, &t_grid, &params, 1013).unwrap();
    let rel = (curve.limit - 2.0).abs() / 2.0;
    report(
        "criterion 03 interval alpha=2 limit",
        rel < 0.03,
        &format!("extrapolated {:.4} vs 2, relative error {:.2}%", curve.limit, 100.0 * rel),
    );
}

#[test]
fn criterion_04_disk_ratio_limit() {
    let g = euclidean(2);
    let dom = euclidean_ball(2, 1.0, "disk:1").unwrap();
    let rate = rate_for(1.5, 1004);
    let params = HeatParams { n: 200_000, grid: 512, ..Default::default() };
    let t_grid = [1e-2, 1e-3, 1e-4, 1e-5];
    let curve = ratio_curve(&g, &dom, &rate, &t_grid, &params, 1014).unwrap();
    let rel = (curve.limit - 2.0 * PI).abs() / (2.0 * PI);
    report(
        "criterion 04 disk alpha=1.5 limit",
        rel < 0.1,
        &format!("extrapolated {:.4} vs 2 pi, relative error {:.2}%", curve.limit, 100.0 * rel),
    );
}

#[test]
fn criterion_05_h1_torus_main_theorem() {
    let g = heisenberg(1);
    let dom = domain_by_name(&g, "h1-torus:2,0.5").unwrap();
    let quad = horizontal_perimeter(&g, &dom, PerimeterMethod::BoundaryQuadrature { nodes: 512 }, 1)
        .unwrap();
    let shell = horizontal_perimeter(
        &g,
        &dom,
        PerimeterMethod::ShellCoarea { eps: 0.01, samples: 4_000_000 },
        2,
    )
    .unwrap();
    let agree = (quad.value - shell.value).abs() / quad.value;
    let mut detail = format!(
        "perimeter {:.4} (quadrature) vs {:.4} (shell), methods differ {:.2}%",
        quad.value,
        shell.value,
        100.0 * agree
    );
    let mut pass = agree < 0.01;
    let params = HeatParams { n: 120_000, grid: 256, ..Default::default() };
    let t_grid = [3e-3, 1e-3, 3e-4, 1e-4];
    for &alpha in &[1.5, 2.0] {
        let rate = rate_for(alpha, 1005);
        let curve = ratio_curve(&g, &dom, &rate, &t_grid, &params, 1015).unwrap();
        let rel = (curve.limit - quad.value).abs() / quad.value;
        detail.push_str(&format!("; alpha={alpha}: limit {:.4} off {:.2}%", curve.limit, 100.0 * rel));
        pass &= rel < 0.1;
    }
    report("criterion 05 H1 torus theorem", pass, &detail);
}

#[test]
fn criterion_06_smooth_function_theorem() {
    let alpha = 1.5;
    let t = 1e-4;
    let mut detail = String::new();
    let mut pass = true;
    for (g, label) in [(euclidean(1), "R1"), (heisenberg(1), "H1")] {
        let f = function_by_name(&g, "bump:1").unwrap();
        let rate = rate_for(alpha, 1006);
        let mut rng = stream(1006, "acc-variation", 0);
        let variation = variation_smooth(&g, &f, 2_000_000, &mut rng).unwrap();
        let params = HeatParams { n: 60_000, grid: 256, ..Default::default() };
        let est = estimate_q_f(&g, &f, alpha, t, &params, 1016).unwrap();
        let ratio = est.deficit / rate.mu(t).unwrap();
        let rel = (ratio - variation.value).abs() / variation.value;
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        detail.push_str(&format!(
            "{label}: ratio {:.4} vs variation {:.4}, off {:.2}%",
            ratio,
            variation.value,
            100.0 * rel
        ));
        pass &= rel < 0.1;
    }
    report("criterion 06 smooth-function theorem", pass, &detail);
}

#[test]
fn criterion_07_h1_ball_lower_bound() {
    let g = heisenberg(1);
    let dom = domain_by_name(&g, "h1-ball:1").unwrap();
    // 1-D quadrature oracle for the horizontal perimeter of the unit ball
    let perim = horizontal_perimeter(&g, &dom, PerimeterMethod::BoundaryQuadrature { nodes: 4096 }, 1)
        .unwrap();
    let rate = rate_for(1.5, 1007);
    let params = HeatParams { n: 120_000, grid: 256, ..Default::default() };
    let rep = verify_lower_bound(
        &g,
        &dom,
        &rate,
        &[1e-3, 3e-4, 1e-4],
        perim.value,
        0.1,
        &params,
        1017,
    )
    .unwrap();
    report(
        "criterion 07 H1 ball lower bound",
        rep.pass,
        &format!(
            "R(1e-4) = {:.4} +- {:.4} vs 0.9 x {:.4} = {:.4}",
            rep.ratio,
            rep.ratio_stderr,
            perim.value,
            0.9 * perim.value
        ),
    );
}

#[test]
fn criterion_08_mollification_monotonicity() {
    let g = euclidean(1);
    let f = interval(0.0, 1.0).unwrap().indicator(&g).with_support_radius(1.05);
    let params = HeatParams { n: 30_000, grid: 64, thinning: false, bridge: false, ..Default::default() };
    let rep =
        verify_mollification_monotonicity(&g, &f, &[0.05, 0.1], 1.5, 1e-3, 128, &params, 1008)
            .unwrap();
    let detail = rep
        .rows
        .iter()
        .map(|r| format!("eps={}: Q = {:.5} >= {:.5}", r.eps, r.q_f_eps, rep.q_f))
        .collect::<Vec<_>>()
        .join("; ");
    report("criterion 08 mollification monotonicity", rep.pass, &detail);
}

#[test]
fn criterion_09_martingale_bound() {
    let g = heisenberg(1);
    let rep = check_martingale_bound(
        &g,
        &[0.5, 1.0, 1.5, 2.0, 3.0],
        &[0.05, 0.1, 0.25, 0.5, 1.0],
        100_000,
        1009,
    )
    .unwrap();
    report(
        "criterion 09 martingale bound",
        rep.pass,
        &format!("{} violations over {} grid cells at N = 10^5", rep.violations, rep.cells.len()),
    );
}

#[test]
fn criterion_10_exit_bound_calibration() {
    let g = heisenberg(1);
    let form = BoundForm::for_step(g.step());
    let fit = fit_exit_bound_constants(
        &g,
        &form,
        &[0.5, 1.0, 2.0, 3.0, 4.0],
        &[0.01, 0.05, 0.1, 0.5, 1.0],
        &[0.5, 1.0, 2.0],
        50_000,
        1010,
    )
    .unwrap();
    report(
        "criterion 10 exit-bound calibration",
        fit.pass,
        &format!("dominating constants c = {:.3}, beta = {}", fit.c, fit.beta),
    );
}

#[test]
fn criterion_11_taylor_remainder() {
    let cfg = ExperimentConfig::parse(
        "kind = taylor\ngroup = heisenberg:1\nfunction = trig\norder = 1\nsamples = 400\n\
         min-slope = 1.85\nseed = 1011\n",
    )
    .unwrap();
    let (_, verdicts, details) = experiment::execute(&cfg).unwrap();
    report(
        "criterion 11 Taylor remainder order",
        verdicts.iter().all(|v| v.pass),
        &format!("fitted exponent {:.3} (required 1.85)", details["slope"].as_f64().unwrap()),
    );
}

#[test]
fn criterion_12_tail_lemmas() {
    let g = heisenberg(1);
    let tail = check_tail_order(&g, 1.5, 1.0, &[0.04, 0.02, 0.01, 0.005, 0.0025], 60_000, 1012)
        .unwrap();
    let mut pass = tail.pass;
    let mut detail = format!("tail slope {:.3}", tail.slope);
    for &alpha in &[1.5, 2.0] {
        let rate = rate_for(alpha, 1012);
        let sup = check_sup_expectation_limits(
            &g,
            &rate,
            10.0,
            1.0,
            &[1e-2, 1e-3, 1e-4],
            25_000,
            1022,
        )
        .unwrap();
        detail.push_str(&format!(
            "; alpha={alpha}: restricted ratio {:.3}, moment ratio {:.4}",
            sup.restricted_ratios.last().unwrap(),
            sup.moment_ratios.last().unwrap()
        ));
        pass &= sup.pass;
    }
    report("criterion 12 tail lemmas", pass, &detail);
}

#[test]
fn criterion_13_perimeter_continuity() {
    let g = heisenberg(1);
    let torus = domain_by_name(&g, "h1-torus:2,0.5").unwrap();
    let levels = [-0.1, -0.05, -0.02, 0.02, 0.05, 0.1];
    let scan = perimeter_continuity_scan(
        &g,
        &torus,
        &levels,
        PerimeterMethod::ShellCoarea { eps: 0.02, samples: 500_000 },
        1013,
    )
    .unwrap();
    let mut pass = scan.pass;
    let mut detail = format!("torus scan over {} levels monotone", scan.rows.len());
    // the disk scan has an exact oracle: {phi > r} is the disk of radius
    // sqrt(1 - r) with perimeter 2 pi sqrt(1 - r)
    let g2 = euclidean(2);
    let disk = euclidean_ball(2, 1.0, "disk:1").unwrap();
    let mut worst = 0.0f64;
    for (k, &r) in levels.iter().enumerate() {
        let shifted = disk.shifted(r);
        let exact = 2.0 * PI * (1.0 - r).sqrt();
        let est = horizontal_perimeter(
            &g2,
            &shifted,
            PerimeterMethod::ShellCoarea { eps: 0.01, samples: 8_000_000 },
            1023 + k as u64,
        )
        .unwrap();
        worst = worst.max((est.value - exact).abs() / exact);
    }
    detail.push_str(&format!("; disk levels off 2 pi sqrt(1-r) by at most {:.3}%", 100.0 * worst));
    pass &= worst < 0.005;
    report("criterion 13 perimeter continuity", pass, &detail);
}

#[test]
fn criterion_14_reproducibility() {
    let configs = [
        "kind = subordinator\nalpha = 1.5\nsamples = 30000\nseed = 21\n",
        "kind = taylor\ngroup = heisenberg:1\nfunction = trig\norder = 1\nsamples = 100\nseed = 22\n",
        "kind = heat-content\ngroup = euclidean:1\ndomain = interval:0,1\nalpha = 2\n\
         t-start = 1e-3\nt-stop = 1e-4\nt-count = 2\nsamples = 20000\ngrid = 128\n\
         kappa-samples = 20000\nseed = 23\n",
        "kind = tail-checks\ngroup = heisenberg:1\nalpha = 1.5\nradius = 1\n\
         t-start = 4e-2\nt-stop = 1e-2\nt-count = 2\nsamples = 4000\nkappa-samples = 20000\nseed = 24\n",
        "kind = exit-bounds\ngroup = heisenberg:1\nr-grid = 1,2\ntime-grid = 0.1,0.5\n\
         samples = 10000\nseed = 25\n",
        "kind = mollification\ngroup = euclidean:1\ndomain = interval:0,1\nalpha = 1.5\n\
         t = 1e-3\neps-grid = 0.1\nsamples = 5000\ngrid = 32\nthinning = 0\nbridge = 0\nseed = 26\n",
    ];
    let out = std::env::temp_dir().join(format!("carnot-heat-acc14-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&out);
    let mut detail = String::new();
    let mut pass = true;
    for (k, text) in configs.iter().enumerate() {
        let cfg = ExperimentConfig::parse(text).unwrap();
        let dir = out.join(format!("run-{k}"));
        let res = experiment::run(&cfg, &dir).unwrap();
        let same = experiment::replay(&res.summary_path, None).unwrap();
        let workers = experiment::replay(&res.summary_path, Some(3)).unwrap();
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        detail.push_str(&format!(
            "{}: replay {} / workers {}",
            cfg.kind,
            if same.pass { "identical" } else { "DIVERGED" },
            if workers.pass { "invariant" } else { "DIVERGED" }
        ));
        pass &= same.pass && workers.pass;
    }
    let _ = std::fs::remove_dir_all(&out);
    report("criterion 14 reproducibility", pass, &detail);
}
