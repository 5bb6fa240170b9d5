//! Horizontal Brownian motion on a Carnot group, its stable subordination,
//! and running-supremum / first-exit extraction from sampled paths.

use crate::domain::LevelSetDomain;
use crate::error::{Error, Result};
use crate::group::{CarnotGroup, Point, Workspace};
use crate::stable::{sample_unit_positive_stable, SubordinatorSpec};
use rand::Rng;
use rand_distr::StandardNormal;

/// Sub-increments composed per macro step on groups of step >= 2, so the
/// higher-layer (Levy-area type) coordinates are built from the group law
/// itself.
pub const DEFAULT_SUBSTEPS: usize = 16;

/// A discretely observed path of the (possibly subordinated) process.
#[derive(Clone, Debug)]
pub struct PathSample {
    /// process-time observation grid, uniform, starting at 0
    pub times: Vec<f64>,
    /// internal Brownian clock at each observation; equals `times` for
    /// unsubordinated paths, nondecreasing image of the grid otherwise
    pub clock: Vec<f64>,
    pub points: Vec<Point>,
    pub subordinated: bool,
    pub alpha: f64,
    pub substeps: usize,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// In-place stepper: advances `p` by one increment of the horizontal
/// Brownian motion over internal time `dt`, composing `substeps`
/// first-layer increments with the group law.
pub fn advance(
    g: &CarnotGroup,
    p: &mut [f64],
    dt: f64,
    substeps: usize,
    ws: &mut Workspace,
    inc: &mut [f64],
    out: &mut [f64],
    rng: &mut impl Rng,
) {
    let m = g.horizontal_dim();
    let sd = (2.0 * dt / substeps as f64).sqrt();
    for _ in 0..substeps {
        inc.iter_mut().for_each(|v| *v = 0.0);
        for v in inc.iter_mut().take(m) {
            let z: f64 = rng.sample(StandardNormal);
            *v = sd * z;
        }
        g.multiply_into(p, inc, ws, out);
        p.copy_from_slice(out);
    }
}

fn substeps_for(g: &CarnotGroup) -> usize {
    if g.step() == 1 {
        1
    } else {
        DEFAULT_SUBSTEPS
    }
}

/// Horizontal Brownian motion from `x0` on a uniform grid of step `h` up to
/// `horizon`. Driving increments have per-coordinate variance 2h (generator
/// is the sum of squared horizontal fields).
pub fn simulate_hbm(
    g: &CarnotGroup,
    x0: &Point,
    horizon: f64,
    h: f64,
    rng: &mut impl Rng,
) -> Result<PathSample> {
    simulate_hbm_with(g, x0, horizon, h, substeps_for(g), rng)
}

/// [`simulate_hbm`] with an explicit substep count. Substeps refine only the
/// conditional law of the higher-layer coordinates within a macro step;
/// callers that observe a dense grid anyway (sup statistics) can pass 1.
pub fn simulate_hbm_with(
    g: &CarnotGroup,
    x0: &Point,
    horizon: f64,
    h: f64,
    substeps: usize,
    rng: &mut impl Rng,
) -> Result<PathSample> {
    if h <= 0.0 {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if horizon < h {
        return Err(Error::InvalidParameter("horizon must be at least one step".into()));
    }
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: x0.dim() });
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be positive".into()));
    }
    let steps = (horizon / h).round().max(1.0) as usize;
    let mut ws = Workspace::new(g.dim());
    let mut inc = vec![0.0; g.dim()];
    let mut out = vec![0.0; g.dim()];
    let mut p = x0.coords().to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(x0.clone());
    for j in 1..=steps {
        advance(g, &mut p, h, substeps, &mut ws, &mut inc, &mut out, rng);
        times.push(j as f64 * h);
        points.push(Point(p.clone()));
    }
    Ok(PathSample {
        clock: times.clone(),
        times,
        points,
        subordinated: false,
        alpha: 2.0,
        substeps,
    })
}

/// Subordinated process B(S^alpha_t) observed on a uniform grid of `grid`
/// process times up to `horizon`: subordinator increments are drawn from the
/// stationary law of S, and the Brownian motion is stepped between
/// consecutive subordinated times.
pub fn simulate_subordinated(
    g: &CarnotGroup,
    spec: SubordinatorSpec,
    x0: &Point,
    horizon: f64,
    grid: usize,
    rng: &mut impl Rng,
) -> Result<PathSample> {
    simulate_subordinated_with(g, spec, x0, horizon, grid, substeps_for(g), rng)
}

/// [`simulate_subordinated`] with an explicit substep count.
pub fn simulate_subordinated_with(
    g: &CarnotGroup,
    spec: SubordinatorSpec,
    x0: &Point,
    horizon: f64,
    grid: usize,
    substeps: usize,
    rng: &mut impl Rng,
) -> Result<PathSample> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be positive".into()));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter("grid must have at least 2 steps".into()));
    }
    if horizon <= 0.0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: x0.dim() });
    }
    let dt = horizon / grid as f64;
    let scale = dt.powf(2.0 / spec.alpha);
    let mut ws = Workspace::new(g.dim());
    let mut inc = vec![0.0; g.dim()];
    let mut out = vec![0.0; g.dim()];
    let mut p = x0.coords().to_vec();
    let mut times = Vec::with_capacity(grid + 1);
    let mut clock = Vec::with_capacity(grid + 1);
    let mut points = Vec::with_capacity(grid + 1);
    times.push(0.0);
    clock.push(0.0);
    points.push(x0.clone());
    let mut s = 0.0;
    for j in 1..=grid {
        let ds = if spec.alpha >= 2.0 {
            dt
        } else {
            scale * sample_unit_positive_stable(spec.alpha / 2.0, rng)
        };
        s += ds;
        advance(g, &mut p, ds, substeps, &mut ws, &mut inc, &mut out, rng);
        times.push(j as f64 * dt);
        clock.push(s);
        points.push(Point(p.clone()));
    }
    Ok(PathSample {
        times,
        clock,
        points,
        subordinated: true,
        alpha: spec.alpha,
        substeps,
    })
}

/// Largest homogeneous distance from the start reached on the grid.
pub fn running_sup_distance(g: &CarnotGroup, path: &PathSample) -> f64 {
    let start = &path.points[0];
    path.points
        .iter()
        .map(|p| g.dinf_distance(start, p))
        .fold(0.0, f64::max)
}

/// Index of the first grid point outside Omega, if the discrete path exits.
pub fn first_exit_index(path: &PathSample, dom: &LevelSetDomain) -> Option<usize> {
    path.points.iter().position(|p| !dom.contains(p.coords()))
}

/// Monte Carlo survival probability u_alpha(x0, t): the fraction of
/// subordinated paths observed on `grid` process times that never leave
/// Omega. Deterministic given (seed, n, grid); sample i always consumes
/// stream (seed, "survival", i) regardless of the worker count.
pub fn survival_probability(
    g: &CarnotGroup,
    dom: &LevelSetDomain,
    spec: SubordinatorSpec,
    x0: &Point,
    t: f64,
    grid: usize,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    use rayon::prelude::*;
    let hits: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::stream(seed, "survival", i as u64);
            let path = simulate_subordinated(g, spec, x0, t, grid, &mut rng).expect("checked");
            usize::from(first_exit_index(&path, dom).is_none())
        })
        .sum();
    let p = hits as f64 / n as f64;
    Ok((p, (p * (1.0 - p) / n as f64).sqrt()))
}
