//! Sampling of the alpha/2-stable subordinator, the rate function mu_alpha
//! and numerical checks of its tail and exponential-moment estimates.

use crate::error::{Error, Result};
use crate::rng::stream;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Stability parameter of the subordinated process; the subordinator has
/// Laplace exponent lambda^(alpha/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorSpec {
    pub alpha: f64,
}

impl SubordinatorSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0, 2], got {alpha}")));
        }
        Ok(Self { alpha })
    }
}

/// One draw of S^alpha_t.
///
/// Exact one-shot sampling by Kanter's representation of positive
/// rho-stable variables (rho = alpha/2), scaled by self-similarity
/// S_t = t^(2/alpha) S_1. At alpha = 2 the subordinator is deterministic,
/// S_t = t.
pub fn sample_subordinator(spec: SubordinatorSpec, t: f64, rng: &mut impl Rng) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    Ok(t.powf(2.0 / spec.alpha) * sample_unit_positive_stable(spec.alpha / 2.0, rng))
}

/// Positive stable draw with Laplace transform exp(-lambda^rho), rho in (0, 1].
pub fn sample_unit_positive_stable(rho: f64, rng: &mut impl Rng) -> f64 {
    debug_assert!(rho > 0.0 && rho <= 1.0);
    if rho >= 1.0 {
        return 1.0;
    }
    // Kanter (1975): X = (a(U)/W)^((1-rho)/rho), W ~ Exp(1)
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let w: f64 = -rng.gen_range(f64::EPSILON..1.0f64).ln();
    let su = (PI * u).sin();
    let s1 = (rho * PI * u).sin();
    let s2 = ((1.0 - rho) * PI * u).sin();
    let a = s1.powf(rho / (1.0 - rho)) * s2 / su.powf(1.0 / (1.0 - rho));
    (a / w).powf((1.0 - rho) / rho)
}

/// The rate function's supremum constant kappa_alpha with its Monte Carlo
/// metadata (only defined for 1 < alpha <= 2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SupConstant {
    pub alpha: f64,
    pub kappa: f64,
    pub stderr: f64,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Rate function mu_alpha together with the cached supremum constant.
#[derive(Clone, Debug)]
pub struct RateFunction {
    pub alpha: f64,
    pub sup_constant: Option<SupConstant>,
}

impl RateFunction {
    /// Rate function for alpha <= 1, which needs no constant.
    pub fn without_constant(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(
                "rate function without a supremum constant needs alpha <= 1".into(),
            ));
        }
        Ok(Self { alpha, sup_constant: None })
    }

    pub fn with_constant(c: SupConstant) -> Self {
        Self { alpha: c.alpha, sup_constant: Some(c) }
    }

    /// mu_alpha(t): t^(1/alpha) kappa_alpha for 1 < alpha <= 2,
    /// t log(1/t)/pi at alpha = 1, and t below.
    pub fn mu(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("mu_alpha needs t in (0,1), got {t}")));
        }
        let a = self.alpha;
        if a > 1.0 {
            let c = self
                .sup_constant
                .ok_or_else(|| Error::InvalidParameter("kappa_alpha not estimated".into()))?;
            Ok(t.powf(1.0 / a) * c.kappa)
        } else if a == 1.0 {
            Ok(t * (1.0 / t).ln() / PI)
        } else {
            Ok(t)
        }
    }
}

/// Monte Carlo estimate of kappa_alpha = E[sup of the first horizontal
/// coordinate of the subordinated process on [0, 1]].
///
/// The first coordinate between consecutive subordinator times is a Brownian
/// motion with variance 2 per unit of subordinator time. At alpha = 2 the
/// subordinator is continuous, so the segment suprema can be sampled exactly
/// through the Brownian bridge maximum; for alpha < 2 the supremum is taken
/// over the observation grid (jump intervals are not part of the path's
/// closure, so bridge filling would overshoot).
pub fn estimate_sup_constant(
    alpha: f64,
    samples: usize,
    steps: usize,
    seed: u64,
) -> Result<SupConstant> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "the supremum constant is defined for 1 < alpha <= 2, got {alpha}"
        )));
    }
    if samples == 0 || steps == 0 {
        return Err(Error::InvalidParameter("samples and steps must be positive".into()));
    }
    let spec = SubordinatorSpec::new(alpha)?;
    let (sum, sum2) = (0..samples)
        .map(|i| {
            let mut rng = stream(seed, "sup-constant", i as u64);
            let s = sample_sup_b1(spec, 1.0, steps, &mut rng);
            (s, s * s)
        })
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(SupConstant {
        alpha,
        kappa: mean,
        stderr: (var / n).sqrt(),
        steps,
        samples,
        seed,
    })
}

/// One draw of sup_{[0,t]} B^alpha_1 on a grid of `steps` observation times.
pub fn sample_sup_b1(spec: SubordinatorSpec, t: f64, steps: usize, rng: &mut impl Rng) -> f64 {
    let dt = t / steps as f64;
    let mut w = 0.0f64;
    let mut sup = 0.0f64;
    if spec.alpha >= 2.0 {
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let w1 = w + (2.0 * dt).sqrt() * z;
            // exact maximum of the Brownian bridge over the segment
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let m = 0.5 * ((w + w1) + ((w1 - w).powi(2) - 4.0 * dt * u.ln()).sqrt());
            sup = sup.max(m);
            w = w1;
        }
    } else {
        let scale = dt.powf(2.0 / spec.alpha);
        for _ in 0..steps {
            let ds = scale * sample_unit_positive_stable(spec.alpha / 2.0, rng);
            let z: f64 = rng.sample(StandardNormal);
            w += (2.0 * ds).sqrt() * z;
            sup = sup.max(w);
        }
    }
    sup
}

/// Report of the Appendix exponential-moment scan.
#[derive(Clone, Debug, Serialize)]
pub struct ExpMomentReport {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub rows: Vec<ExpMomentRow>,
    /// fitted log-log slope in r over the large-r regime
    pub slope: f64,
    /// fitted log prefactor
    pub prefactor: f64,
    /// theoretical exponent -alpha * theta1 / (2 theta2)
    pub expected_slope: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpMomentRow {
    pub r: f64,
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Estimates E[exp(-r^theta1 / (S_t)^theta2)] over a grid and fits the
/// large-r decay, which Lemma-level theory bounds by C t r^(-alpha
/// theta1/(2 theta2)).
pub fn check_exp_moment(
    alpha: f64,
    theta1: f64,
    theta2: f64,
    r_grid: &[f64],
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ExpMomentReport> {
    if theta1 <= 0.0 || theta2 <= 0.0 {
        return Err(Error::InvalidParameter("theta exponents must be positive".into()));
    }
    let spec = SubordinatorSpec::new(alpha)?;
    if alpha >= 2.0 {
        return Err(Error::InvalidParameter("the moment check needs alpha < 2".into()));
    }
    let mut rows = Vec::new();
    for (ti, &t) in t_grid.iter().enumerate() {
        // one set of subordinator draws per t, shared across the r grid
        let draws: Vec<f64> = (0..samples)
            .map(|i| {
                let mut rng = stream(seed, "exp-moment", (ti * samples + i) as u64);
                sample_subordinator(spec, t, &mut rng).expect("t > 0")
            })
            .collect();
        for &r in r_grid {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for &s in &draws {
                let v = (-(r.powf(theta1)) / s.powf(theta2)).exp();
                sum += v;
                sum2 += v * v;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = (sum2 / n - mean * mean).max(0.0);
            rows.push(ExpMomentRow { r, t, value: mean, stderr: (var / n).sqrt() });
        }
    }
    // fit against r in the decaying regime (value below 1/2) at the largest t
    let t_fit = t_grid[t_grid.len() - 1];
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.t == t_fit && row.value > 0.0 && row.value < 0.5)
        .map(|row| (row.r.ln(), row.value.ln()))
        .collect();
    let (slope, intercept) = fit_line(&pts);
    let expected = -alpha * theta1 / (2.0 * theta2);
    let pass = pts.len() >= 3 && slope <= expected + 0.1;
    Ok(ExpMomentReport {
        alpha,
        theta1,
        theta2,
        rows,
        slope,
        prefactor: intercept.exp(),
        expected_slope: expected,
        pass,
    })
}

/// Report of the Appendix integral-asymptotics check: both integrals must be
/// o(mu_alpha(t)) along a decreasing t grid.
#[derive(Clone, Debug, Serialize)]
pub struct IntegralAsymptoticsReport {
    pub alpha: f64,
    pub t_grid: Vec<f64>,
    pub ratio_a1: Vec<f64>,
    pub ratio_a2: Vec<f64>,
    pub pass: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn check_integral_asymptotics(
    rate: &RateFunction,
    theta1: f64,
    theta2: f64,
    kappa_exponent: f64,
    r_max: f64,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<IntegralAsymptoticsReport> {
    let alpha = rate.alpha;
    if !(1.0 <= alpha && alpha < 2.0) {
        return Err(Error::InvalidParameter("integral asymptotics need 1 <= alpha < 2".into()));
    }
    if 2.0 * theta2 <= theta1 {
        return Err(Error::InvalidParameter("need 2 theta2 > theta1".into()));
    }
    if kappa_exponent <= 0.0 || r_max <= 0.0 {
        return Err(Error::InvalidParameter("kappa and R must be positive".into()));
    }
    let spec = SubordinatorSpec::new(alpha)?;
    let mut ratio_a1 = Vec::new();
    let mut ratio_a2 = Vec::new();
    for (ti, &t) in t_grid.iter().enumerate() {
        // swap expectation and r-integral: the inner integral over r is done
        // exactly per draw, so the boundary layer near r = 0 (width of the
        // order of a typical S_t) is resolved at every t
        let mut int1 = 0.0;
        let mut int2 = 0.0;
        for i in 0..samples {
            let mut rng = stream(seed, "integral-asymp", (ti * samples + i) as u64);
            let s = sample_subordinator(spec, t, &mut rng).expect("t > 0");
            // int_0^R exp(-r^t1/s^t2) dr = s^(t2/t1) int_0^(R/s^(t2/t1)) exp(-x^t1) dx
            let scale1 = s.powf(theta2 / theta1);
            int1 += scale1 * exp_power_integral(theta1, 0.0, r_max / scale1);
            // int_0^R r^k exp(-r^2/s) dr = s^((k+1)/2) int_0^(R/sqrt(s)) x^k exp(-x^2) dx
            let scale2 = s.sqrt();
            int2 += scale2.powf(kappa_exponent + 1.0)
                * exp_power_integral(2.0, kappa_exponent, r_max / scale2);
        }
        int1 /= samples as f64;
        int2 /= samples as f64;
        let mu = rate.mu(t)?;
        ratio_a1.push(int1 / mu);
        ratio_a2.push(int2 / mu);
        // integrand is at most 1, so the first integral is at most R
        debug_assert!(int1 <= r_max * 1.0001);
    }
    let dec = |v: &[f64]| v.last().unwrap() < &(v.first().unwrap() / 10.0);
    let pass = dec(&ratio_a1) && dec(&ratio_a2);
    Ok(IntegralAsymptoticsReport {
        alpha,
        t_grid: t_grid.to_vec(),
        ratio_a1,
        ratio_a2,
        pass,
    })
}

/// int_0^y x^k exp(-x^p) dx by trapezoid, with the upper limit clipped where
/// the integrand is negligible.
fn exp_power_integral(p: f64, k: f64, y: f64) -> f64 {
    let cut = 40.0f64.powf(1.0 / p);
    let top = y.min(cut);
    if top <= 0.0 {
        return 0.0;
    }
    let n = 256usize;
    let h = top / n as f64;
    let f = |x: f64| if k == 0.0 { (-x.powf(p)).exp() } else { x.powf(k) * (-x.powf(p)).exp() };
    let mut acc = 0.5 * (f(0.0) + f(top));
    for q in 1..n {
        acc += f(q as f64 * h);
    }
    acc * h
}

pub(crate) fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Appends a supremum-constant record to the cache file (one record per
/// line: alpha steps samples seed kappa stderr).
pub fn append_sup_constant_cache(path: &Path, c: &SupConstant) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(
        f,
        "{} {} {} {} {:.17e} {:.17e}",
        c.alpha, c.steps, c.samples, c.seed, c.kappa, c.stderr
    )?;
    Ok(())
}

/// Looks up a cached constant matching (alpha, steps, samples, seed).
pub fn lookup_sup_constant_cache(
    path: &Path,
    alpha: f64,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<SupConstant>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    for line in text.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            continue;
        }
        let (a, st, n, sd): (f64, usize, usize, u64) = match (f[0].parse(), f[1].parse(), f[2].parse(), f[3].parse()) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            _ => continue,
        };
        if a == alpha && st == steps && n == samples && sd == seed {
            if let (Ok(kappa), Ok(stderr)) = (f[4].parse(), f[5].parse()) {
                return Ok(Some(SupConstant { alpha, kappa, stderr, steps, samples, seed }));
            }
        }
    }
    Ok(None)
}

/// Cached or freshly computed supremum constant.
pub fn sup_constant_cached(
    cache: Option<&Path>,
    alpha: f64,
    samples: usize,
    steps: usize,
    seed: u64,
) -> Result<SupConstant> {
    if let Some(path) = cache {
        if let Some(c) = lookup_sup_constant_cache(path, alpha, steps, samples, seed)? {
            return Ok(c);
        }
    }
    let c = estimate_sup_constant(alpha, samples, steps, seed)?;
    if let Some(path) = cache {
        append_sup_constant_cache(path, &c)?;
    }
    Ok(c)
}
