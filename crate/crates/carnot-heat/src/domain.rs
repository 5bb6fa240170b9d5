//! Level-set domains, characteristic-point detection and the horizontal
//! perimeter by three independent estimators.

use crate::calculus::{
    horizontal_gradient_from, integrate_box, mollify, norm2, variation_smooth,
    SmoothFunction, Smoothness,
};
use crate::error::{Error, Result};
use crate::group::{CarnotGroup, Point};
use crate::rng::stream;
use rand::Rng;
use serde::Serialize;
use std::sync::Arc;

/// Parametrization of the boundary by a rectangle, for quadrature.
#[derive(Clone)]
pub struct BoundaryParam {
    pub ranges: Vec<(f64, f64)>,
    pub map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// surface-measure density pulled back to the rectangle
    pub jacobian: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

/// Open set Omega = {phi > 0} inside an axis-aligned bounding box.
#[derive(Clone)]
pub struct LevelSetDomain {
    pub name: String,
    pub phi: SmoothFunction,
    pub bbox: Vec<(f64, f64)>,
    pub param: Option<BoundaryParam>,
}

impl LevelSetDomain {
    pub fn new(name: &str, phi: SmoothFunction, bbox: Vec<(f64, f64)>) -> Self {
        Self { name: name.to_string(), phi, bbox, param: None }
    }

    pub fn with_param(mut self, param: BoundaryParam) -> Self {
        self.param = Some(param);
        self
    }

    /// Membership: phi(x) > 0 (the boundary itself is outside).
    pub fn contains(&self, x: &[f64]) -> bool {
        self.phi.eval(x) > 0.0
    }

    pub fn dim(&self) -> usize {
        self.bbox.len()
    }

    pub fn box_volume(&self) -> f64 {
        self.bbox.iter().map(|(a, b)| b - a).product()
    }

    /// Same domain with the level shifted: {phi > r}. The parametrization is
    /// dropped since it describes the r = 0 boundary.
    pub fn shifted(&self, r: f64) -> Self {
        let base = self.phi.clone();
        let sm = base.smoothness();
        let phi = if base.has_analytic_gradient() {
            let b2 = base.clone();
            SmoothFunction::new(move |x| base.eval(x) - r, sm).with_gradient(move |x| b2.gradient(x))
        } else {
            SmoothFunction::new(move |x| base.eval(x) - r, sm)
        };
        Self {
            name: format!("{}@{r}", self.name),
            phi,
            bbox: self.bbox.clone(),
            param: None,
        }
    }

    /// d-infinity radius of a ball containing the bounding box, used as the
    /// support radius of the indicator.
    pub fn dinf_radius(&self, g: &CarnotGroup) -> f64 {
        let mut r = 0.0f64;
        for (i, (a, b)) in self.bbox.iter().enumerate() {
            let j = g.layer(i);
            let m = a.abs().max(b.abs());
            r = r.max(g.eps()[j - 1] * m.powf(1.0 / j as f64));
        }
        r
    }

    /// Indicator of Omega as a (discontinuous) function with the support
    /// radius needed by the variation machinery.
    pub fn indicator(&self, g: &CarnotGroup) -> SmoothFunction {
        let phi = self.phi.clone();
        SmoothFunction::new(move |x| if phi.eval(x) > 0.0 { 1.0 } else { 0.0 }, Smoothness::C0)
            .with_support_radius(self.dinf_radius(g))
    }

    /// C^1 ramp approximation of the indicator with width `delta` in the
    /// gradient-normalized level function. Mollifying the raw indicator
    /// gives a function that is piecewise constant in the quadrature nodes,
    /// whose finite-difference gradient is shot noise; the ramp keeps every
    /// quadrature term differentiable.
    pub fn smoothed_indicator(&self, g: &CarnotGroup, delta: f64) -> SmoothFunction {
        let phi = self.phi.clone();
        SmoothFunction::new(
            move |x| {
                let v = phi.eval(x);
                let ng = norm2(&phi.gradient(x)).max(1e-12);
                let u = 0.5 * ((v / (ng * delta)).clamp(-1.0, 1.0) + 1.0);
                u * u * (3.0 - 2.0 * u)
            },
            Smoothness::C1,
        )
        .with_support_radius(self.dinf_radius(g))
    }

    /// A point of the boundary on the segment between an inside and an
    /// outside point, by bisection.
    pub fn bisect_boundary(&self, inside: &[f64], outside: &[f64]) -> Vec<f64> {
        let mut lo = inside.to_vec();
        let mut hi = outside.to_vec();
        let mut mid = vec![0.0; lo.len()];
        for _ in 0..60 {
            for i in 0..mid.len() {
                mid[i] = 0.5 * (lo[i] + hi[i]);
            }
            if self.phi.eval(&mid) > 0.0 {
                lo.copy_from_slice(&mid);
            } else {
                hi.copy_from_slice(&mid);
            }
        }
        mid
    }
}

/// Horizontal perimeter estimate with its method tag.
#[derive(Clone, Debug, Serialize)]
pub struct PerimeterEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: String,
}

/// The three perimeter estimators.
#[derive(Clone, Copy, Debug)]
pub enum PerimeterMethod {
    /// tensor-grid quadrature on the boundary parametrization
    BoundaryQuadrature { nodes: usize },
    /// Monte Carlo over the shell {|phi|/|grad phi| < eps}
    ShellCoarea { eps: f64, samples: usize },
    /// horizontal variation of the mollified indicator, extrapolated in eps
    MollifiedVariation { eps: f64, nodes: usize, samples: usize },
}

/// sqrt(sum_i <X_i, nu>^2) at a boundary point, with nu the Euclidean unit
/// normal grad phi / |grad phi|. On regular level sets this equals
/// |grad_H phi| / |grad phi|.
fn normal_horizontal_length(g: &CarnotGroup, dom: &LevelSetDomain, x: &[f64]) -> f64 {
    let grad = dom.phi.gradient(x);
    let gh = horizontal_gradient_from(g, x, &grad);
    norm2(&gh) / norm2(&grad)
}

pub fn horizontal_perimeter(
    g: &CarnotGroup,
    dom: &LevelSetDomain,
    method: PerimeterMethod,
    seed: u64,
) -> Result<PerimeterEstimate> {
    if dom.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: dom.dim() });
    }
    match method {
        PerimeterMethod::BoundaryQuadrature { nodes } => {
            let coarse = boundary_quadrature(g, dom, nodes / 2)?;
            let fine = boundary_quadrature(g, dom, nodes)?;
            Ok(PerimeterEstimate {
                value: fine,
                stderr: (fine - coarse).abs(),
                method: "boundary-quadrature".into(),
            })
        }
        PerimeterMethod::ShellCoarea { eps, samples } => {
            if eps <= 0.0 {
                return Err(Error::InvalidParameter("shell width must be positive".into()));
            }
            let mut rng = stream(seed, "shell-coarea", 0);
            let q = integrate_box(
                &dom.bbox,
                |x| {
                    let grad = dom.phi.gradient(x);
                    let ng = norm2(&grad);
                    if ng == 0.0 || (dom.phi.eval(x) / ng).abs() >= eps {
                        return 0.0;
                    }
                    // |grad_H phi| / |grad phi| on the normalized shell
                    norm2(&horizontal_gradient_from(g, x, &grad)) / ng
                },
                samples,
                &mut rng,
            );
            Ok(PerimeterEstimate {
                value: q.value / (2.0 * eps),
                stderr: q.stderr / (2.0 * eps),
                method: "shell-coarea".into(),
            })
        }
        PerimeterMethod::MollifiedVariation { eps, nodes, samples } => {
            if eps <= 0.0 {
                return Err(Error::InvalidParameter("mollifier scale must be positive".into()));
            }
            let est = |e: f64, idx: u64| -> Result<(f64, f64)> {
                let ind = dom.smoothed_indicator(g, e / 6.0);
                let f = mollify(g, &ind, e, nodes)?;
                let mut rng = stream(seed, "mollified-variation", idx);
                let q = variation_smooth(g, &f, samples, &mut rng)?;
                Ok((q.value, q.stderr))
            };
            // linear extrapolation of Var_H(1_Omega * rho_eps) to eps -> 0
            let (v1, s1) = est(eps, 0)?;
            let (v2, s2) = est(eps / 2.0, 1)?;
            Ok(PerimeterEstimate {
                value: 2.0 * v2 - v1,
                stderr: (4.0 * s2 * s2 + s1 * s1).sqrt(),
                method: "mollified-variation".into(),
            })
        }
    }
}

fn boundary_quadrature(g: &CarnotGroup, dom: &LevelSetDomain, nodes: usize) -> Result<f64> {
    let param = dom
        .param
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("boundary quadrature needs a parametrization".into()))?;
    let nodes = nodes.max(2);
    // midpoint tensor rule over the parameter rectangle
    let d = param.ranges.len();
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    let weight: f64 = param.ranges.iter().map(|(a, b)| (b - a) / nodes as f64).product();
    loop {
        let u: Vec<f64> = idx
            .iter()
            .zip(&param.ranges)
            .map(|(&k, (a, b))| a + (k as f64 + 0.5) * (b - a) / nodes as f64)
            .collect();
        let x = (param.map)(&u);
        acc += normal_horizontal_length(g, dom, &x) * (param.jacobian)(&u) * weight;
        // advance the tensor index
        let mut carry = 0;
        while carry < d {
            idx[carry] += 1;
            if idx[carry] < nodes {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == d {
            break;
        }
    }
    Ok(acc)
}

/// Boundary points where the horizontal projection of the unit normal is
/// shorter than `tol`, found by bisection along random box chords.
pub fn detect_characteristic_points(
    g: &CarnotGroup,
    dom: &LevelSetDomain,
    tol: f64,
    probes: usize,
    seed: u64,
) -> Result<Vec<(Point, f64)>> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let mut rng = stream(seed, "char-points", 0);
    let sample_sign = |rng: &mut rand_chacha::ChaCha8Rng, sign: f64| -> Option<Vec<f64>> {
        for _ in 0..10_000 {
            let x: Vec<f64> = dom.bbox.iter().map(|(a, b)| rng.gen_range(*a..*b)).collect();
            if sign * dom.phi.eval(&x) > 0.0 {
                return Some(x);
            }
        }
        None
    };
    let first_in = sample_sign(&mut rng, 1.0)
        .ok_or_else(|| Error::InvalidParameter("no interior point found in the box".into()))?;
    let first_out = sample_sign(&mut rng, -1.0)
        .ok_or_else(|| Error::InvalidParameter("no exterior point found in the box".into()))?;
    let mut found = Vec::new();
    for p in 0..probes {
        let (a, b) = if p == 0 {
            (first_in.clone(), first_out.clone())
        } else {
            match (sample_sign(&mut rng, 1.0), sample_sign(&mut rng, -1.0)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            }
        };
        let x = dom.bisect_boundary(&a, &b);
        let ratio = normal_horizontal_length(g, dom, &x);
        if ratio < tol {
            found.push((Point(x), ratio));
        }
    }
    Ok(found)
}

/// One row of the level-scan table.
#[derive(Clone, Debug, Serialize)]
pub struct LevelScanRow {
    pub level: f64,
    pub value: f64,
    pub stderr: f64,
    pub empty: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelScanReport {
    pub rows: Vec<LevelScanRow>,
    pub pass: bool,
}

/// Perimeter of {phi > r} along a grid of levels straddling 0; the
/// deviation from the r = 0 value must shrink as |r| does, up to noise.
pub fn perimeter_continuity_scan(
    g: &CarnotGroup,
    dom: &LevelSetDomain,
    levels: &[f64],
    method: PerimeterMethod,
    seed: u64,
) -> Result<LevelScanReport> {
    let mut rows = Vec::new();
    let mut rng = stream(seed, "level-probe", 0);
    for (i, &r) in levels.iter().enumerate() {
        let shifted = dom.shifted(r);
        let nonempty = (0..20_000).any(|_| {
            let x: Vec<f64> = shifted.bbox.iter().map(|(a, b)| rng.gen_range(*a..*b)).collect();
            shifted.contains(&x)
        });
        if !nonempty {
            rows.push(LevelScanRow { level: r, value: f64::NAN, stderr: 0.0, empty: true });
            continue;
        }
        let est = horizontal_perimeter(g, &shifted, method, seed.wrapping_add(i as u64))?;
        rows.push(LevelScanRow { level: r, value: est.value, stderr: est.stderr, empty: false });
    }
    let base = horizontal_perimeter(g, dom, method, seed.wrapping_add(levels.len() as u64))?;
    // sort the valid rows by |r| and ask the deviation to be nonincreasing
    // within two joint standard errors
    let mut dev: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|row| !row.empty)
        .map(|row| (row.level.abs(), (row.value - base.value).abs(), row.stderr + base.stderr))
        .collect();
    dev.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let pass = dev
        .windows(2)
        .all(|w| w[0].1 <= w[1].1 + 2.0 * (w[0].2 + w[1].2));
    Ok(LevelScanReport { rows, pass })
}

/// Euclidean ball of radius r in R^n coordinates, phi = r^2 - |x|^2.
pub fn euclidean_ball(n: usize, r: f64, name: &str) -> Result<LevelSetDomain> {
    if r <= 0.0 {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let phi = SmoothFunction::new(
        move |x: &[f64]| r * r - x.iter().map(|v| v * v).sum::<f64>(),
        Smoothness::CInf,
    )
    .with_gradient(
        |x: &[f64]| x.iter().map(|v| -2.0 * v).collect(),
    );
    let bbox = vec![(-(r + 0.25), r + 0.25); n];
    let mut dom = LevelSetDomain::new(name, phi, bbox);
    if n == 2 {
        dom = dom.with_param(BoundaryParam {
            ranges: vec![(0.0, std::f64::consts::TAU)],
            map: Arc::new(move |u: &[f64]| vec![r * u[0].cos(), r * u[0].sin()]),
            jacobian: Arc::new(move |_: &[f64]| r),
        });
    } else if n == 3 {
        dom = dom.with_param(BoundaryParam {
            ranges: vec![(0.0, std::f64::consts::TAU), (0.0, std::f64::consts::PI)],
            map: Arc::new(move |u: &[f64]| {
                let (th, ps) = (u[0], u[1]);
                vec![r * ps.sin() * th.cos(), r * ps.sin() * th.sin(), r * ps.cos()]
            }),
            jacobian: Arc::new(move |u: &[f64]| r * r * u[1].sin()),
        });
    }
    Ok(dom)
}

/// Box with smoothed corners: phi = 1 - sum (x_i/a)^4.
pub fn smooth_box(n: usize, a: f64) -> Result<LevelSetDomain> {
    if a <= 0.0 {
        return Err(Error::InvalidParameter("half-width must be positive".into()));
    }
    let phi = SmoothFunction::new(
        move |x: &[f64]| 1.0 - x.iter().map(|v| (v / a).powi(4)).sum::<f64>(),
        Smoothness::CInf,
    )
    .with_gradient(
        move |x: &[f64]| x.iter().map(|v| -4.0 * v.powi(3) / a.powi(4)).collect(),
    );
    let bbox = vec![(-(a + 0.25), a + 0.25); n];
    Ok(LevelSetDomain::new(&format!("smoothbox:{a}"), phi, bbox))
}

/// Solid torus around the vertical centre: with rho the Euclidean length of
/// the first-layer coordinates and w the remaining coordinates,
/// phi = r^2 - (rho - R)^2 - |w|^2. Non-characteristic for 0 < r < R.
pub fn torus(g: &CarnotGroup, big_r: f64, r: f64, name: &str) -> Result<LevelSetDomain> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::InvalidParameter("torus needs 0 < r < R".into()));
    }
    let m = g.horizontal_dim();
    let n = g.dim();
    if m < 2 {
        return Err(Error::InvalidParameter("torus needs at least 2 horizontal coordinates".into()));
    }
    let phi = SmoothFunction::new(
        move |x: &[f64]| {
            let rho = x[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
            let w2 = x[m..].iter().map(|v| v * v).sum::<f64>();
            r * r - (rho - big_r).powi(2) - w2
        },
        Smoothness::CInf,
    )
    .with_gradient(
        move |x: &[f64]| {
            let rho = x[..m].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let mut grad = vec![0.0; x.len()];
            for i in 0..m {
                grad[i] = -2.0 * (rho - big_r) * x[i] / rho;
            }
            for i in m..x.len() {
                grad[i] = -2.0 * x[i];
            }
            grad
        },
    );
    let mut bbox = vec![(-(big_r + r + 0.25), big_r + r + 0.25); m];
    bbox.extend(std::iter::repeat((-(r + 0.25), r + 0.25)).take(n - m));
    let mut dom = LevelSetDomain::new(name, phi, bbox);
    if m == 2 && n == 3 {
        dom = dom.with_param(BoundaryParam {
            ranges: vec![(0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)],
            map: Arc::new(move |u: &[f64]| {
                let (th, ps) = (u[0], u[1]);
                let rho = big_r + r * ps.cos();
                vec![rho * th.cos(), rho * th.sin(), r * ps.sin()]
            }),
            jacobian: Arc::new(move |u: &[f64]| r * (big_r + r * u[1].cos())),
        });
    }
    Ok(dom)
}

/// Interval (a, b) in R^1, phi = (x-a)(b-x).
pub fn interval(a: f64, b: f64) -> Result<LevelSetDomain> {
    if a >= b {
        return Err(Error::InvalidParameter("interval needs a < b".into()));
    }
    let phi = SmoothFunction::new(
        move |x: &[f64]| (x[0] - a) * (b - x[0]),
        Smoothness::CInf,
    )
    .with_gradient(
        move |x: &[f64]| vec![a + b - 2.0 * x[0]],
    );
    Ok(LevelSetDomain::new(&format!("interval:{a},{b}"), phi, vec![(a - 0.25, b + 0.25)]))
}

/// Named domains for the experiment configs: "disk:r", "ball:r",
/// "smoothbox:a", "interval:a,b", "h1-ball:r", "h1-torus:R,r" and the
/// general "torus:R,r" on any group with at least two horizontal
/// coordinates.
pub fn domain_by_name(g: &CarnotGroup, name: &str) -> Result<LevelSetDomain> {
    let (kind, args) = name.split_once(':').unwrap_or((name, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{name}: {e}"))))
            .collect::<Result<_>>()?
    };
    let need = |k: usize| -> Result<()> {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::Parse(format!("{kind} takes {k} parameter(s)")))
        }
    };
    let dom = match kind {
        "disk" => {
            need(1)?;
            if g.dim() != 2 {
                return Err(Error::InvalidParameter("disk lives in 2 coordinates".into()));
            }
            euclidean_ball(2, nums[0], name)?
        }
        "ball" => {
            need(1)?;
            euclidean_ball(g.dim(), nums[0], name)?
        }
        "h1-ball" => {
            need(1)?;
            if g.dim() != 3 {
                return Err(Error::InvalidParameter("h1-ball lives in 3 coordinates".into()));
            }
            euclidean_ball(3, nums[0], name)?
        }
        "h1-torus" => {
            need(2)?;
            if g.dim() != 3 || g.horizontal_dim() != 2 {
                return Err(Error::InvalidParameter("h1-torus needs the Heisenberg layout".into()));
            }
            torus(g, nums[0], nums[1], name)?
        }
        "torus" => {
            need(2)?;
            torus(g, nums[0], nums[1], name)?
        }
        "smoothbox" => {
            need(1)?;
            smooth_box(g.dim(), nums[0])?
        }
        "interval" => {
            need(2)?;
            if g.dim() != 1 {
                return Err(Error::InvalidParameter("interval lives in 1 coordinate".into()));
            }
            interval(nums[0], nums[1])?
        }
        _ => return Err(Error::UnknownName(name.into())),
    };
    if dom.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: dom.dim() });
    }
    Ok(dom)
}
