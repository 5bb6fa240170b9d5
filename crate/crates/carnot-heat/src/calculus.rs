//! Differential calculus along the left-invariant frame: nested vector-field
//! derivatives, the stratified Taylor polynomial, group mollification and the
//! horizontal variation of smooth functions.

use crate::error::{Error, Result};
use crate::group::{CarnotGroup, Workspace};
use crate::rng::Halton;
use std::sync::Arc;

/// Smoothness tag carried by a test function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    C0,
    C1,
    C2,
    CInf,
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A scalar function on the group, with an optional analytic Euclidean
/// gradient and an optional compact-support radius in the homogeneous norm.
#[derive(Clone)]
pub struct SmoothFunction {
    eval: EvalFn,
    grad: Option<GradFn>,
    smoothness: Smoothness,
    support_radius: Option<f64>,
}

impl SmoothFunction {
    pub fn new(eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, smoothness: Smoothness) -> Self {
        Self { eval: Arc::new(eval), grad: None, smoothness, support_radius: None }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, Smoothness::CInf)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// Euclidean gradient: analytic when supplied, else central differences.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-5 * (1.0 + norm);
        let mut out = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let fp = self.eval(&probe);
            probe[i] = x[i] - h;
            let fm = self.eval(&probe);
            probe[i] = x[i];
            out[i] = (fp - fm) / (2.0 * h);
        }
        out
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }
}

/// Nested left-invariant derivative X_{i1}...X_{ir} f(x), indices 0-based.
pub fn apply_vector_fields(
    g: &CarnotGroup,
    f: &SmoothFunction,
    x: &[f64],
    multi_index: &[usize],
) -> Result<f64> {
    if multi_index.is_empty() || multi_index.len() > 3 {
        return Err(Error::UnsupportedOrder(multi_index.len()));
    }
    for &i in multi_index {
        if i >= g.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), got: i + 1 });
        }
    }
    Ok(nested_derivative(g, f, x, multi_index))
}

fn nested_derivative(g: &CarnotGroup, f: &SmoothFunction, x: &[f64], idx: &[usize]) -> f64 {
    let (&i, rest) = idx.split_first().expect("nonempty");
    let mut ws = Workspace::new(g.dim());
    let mut col = vec![0.0; g.dim()];
    g.frame_column(x, i, &mut ws, &mut col);
    if rest.is_empty() {
        // first order: directional derivative along the frame column
        if f.has_analytic_gradient() {
            let grad = f.gradient(x);
            return col.iter().zip(&grad).map(|(a, b)| a * b).sum();
        }
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-5 * (1.0 + norm);
        let xp: Vec<f64> = x.iter().zip(&col).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&col).map(|(a, b)| a - h * b).collect();
        (f.eval(&xp) - f.eval(&xm)) / (2.0 * h)
    } else {
        // nested orders use a wider step against cancellation noise
        let h = 1e-4;
        let xp: Vec<f64> = x.iter().zip(&col).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&col).map(|(a, b)| a - h * b).collect();
        (nested_derivative(g, f, &xp, rest) - nested_derivative(g, f, &xm, rest)) / (2.0 * h)
    }
}

/// Horizontal gradient (X_1 f, ..., X_m f) at x.
pub fn horizontal_gradient(g: &CarnotGroup, f: &SmoothFunction, x: &[f64]) -> Vec<f64> {
    let m = g.horizontal_dim();
    let grad = f.gradient(x);
    let mut ws = Workspace::new(g.dim());
    let mut col = vec![0.0; g.dim()];
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        g.frame_column(x, i, &mut ws, &mut col);
        out.push(col.iter().zip(&grad).map(|(a, b)| a * b).sum());
    }
    out
}

/// Horizontal gradient from a precomputed Euclidean gradient.
pub fn horizontal_gradient_from(g: &CarnotGroup, x: &[f64], grad: &[f64]) -> Vec<f64> {
    let m = g.horizontal_dim();
    let mut ws = Workspace::new(g.dim());
    let mut col = vec![0.0; g.dim()];
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        g.frame_column(x, i, &mut ws, &mut col);
        out.push(col.iter().zip(grad).map(|(a, b)| a * b).sum());
    }
    out
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Stratified Taylor polynomial of order n (n = 1 or 2) of phi at x,
/// evaluated on the increment h: phi(x) + sum over multi-indices of
/// h_{i1}..h_{ir}/r! X_{i1}..X_{ir} phi(x).
pub fn taylor_polynomial(
    g: &CarnotGroup,
    phi: &SmoothFunction,
    x: &[f64],
    h: &[f64],
    order: usize,
) -> Result<f64> {
    if order == 0 || order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = g.dim();
    let mut acc = phi.eval(x);
    for i in 0..n {
        if h[i] != 0.0 {
            acc += h[i] * apply_vector_fields(g, phi, x, &[i])?;
        }
    }
    if order >= 2 {
        for i in 0..n {
            for j in 0..n {
                let w = h[i] * h[j];
                if w != 0.0 {
                    acc += w / 2.0 * apply_vector_fields(g, phi, x, &[i, j])?;
                }
            }
        }
    }
    Ok(acc)
}

/// Group mollification f * rho_eps with a polynomial bump supported in the
/// d-infinity ball of radius eps, evaluated by fixed Halton quadrature.
pub fn mollify(g: &CarnotGroup, f: &SmoothFunction, eps: f64, nodes: usize) -> Result<SmoothFunction> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("mollifier radius must be positive, got {eps}")));
    }
    let n = g.dim();
    // the d-infinity ball factors through per-layer Euclidean balls; enclose
    // each coordinate of layer j in [-r_j, r_j] with r_j = (eps/eps_j)^j
    let mut radii = vec![0.0; n];
    for i in 0..n {
        let j = g.layer(i);
        radii[i] = (eps / g.eps()[j - 1]).powi(j as i32);
    }
    let vol: f64 = radii.iter().map(|r| 2.0 * r).product();
    let mut halton = Halton::new(n);
    let mut u = vec![0.0; n];
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(nodes);
    let mut weights: Vec<f64> = Vec::with_capacity(nodes);
    let mut mass = 0.0;
    for _ in 0..nodes {
        halton.fill(&mut u);
        let y: Vec<f64> = u.iter().zip(&radii).map(|(a, r)| (2.0 * a - 1.0) * r).collect();
        let nrm = g.dinf_norm_coords(&y);
        if nrm < eps {
            let s = nrm / eps;
            let w = (1.0 - s * s).powi(3);
            mass += w;
            pts.push(y);
            weights.push(w);
        }
    }
    if mass <= 0.0 {
        return Err(Error::InvalidParameter("mollifier quadrature degenerate".into()));
    }
    // normalize so the discrete mollifier has unit mass; vol cancels
    for w in &mut weights {
        *w /= mass;
    }
    let _ = vol;
    let group = g.clone();
    let inner = f.clone();
    let support = f.support_radius().map(|r| r + eps);
    let mut out = SmoothFunction::new(
        move |x: &[f64]| {
            let mut ws = Workspace::new(group.dim());
            let mut z = vec![0.0; group.dim()];
            let mut acc = 0.0;
            let mut y_inv = vec![0.0; group.dim()];
            for (y, w) in pts.iter().zip(&weights) {
                for (yi, v) in y_inv.iter_mut().zip(y) {
                    *yi = -v;
                }
                group.multiply_into(&y_inv, x, &mut ws, &mut z);
                acc += w * inner.eval(&z);
            }
            acc
        },
        Smoothness::C2,
    );
    if let Some(r) = support {
        out = out.with_support_radius(r);
    }
    Ok(out)
}

/// Estimate of an integral with its Monte Carlo standard error.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Axis-aligned box covering the d-infinity ball of radius r.
pub fn support_box(g: &CarnotGroup, r: f64) -> Vec<(f64, f64)> {
    (0..g.dim())
        .map(|i| {
            let j = g.layer(i);
            let rj = (r / g.eps()[j - 1]).powi(j as i32);
            (-rj, rj)
        })
        .collect()
}

/// Monte Carlo integral of `h` over a box.
pub fn integrate_box(
    bbox: &[(f64, f64)],
    h: impl Fn(&[f64]) -> f64 + Sync,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> QuadratureEstimate {
    let vol: f64 = bbox.iter().map(|(a, b)| b - a).product();
    let mut x = vec![0.0; bbox.len()];
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        for (xi, (a, b)) in x.iter_mut().zip(bbox) {
            *xi = rng.gen_range(*a..*b);
        }
        let v = h(&x);
        sum += v;
        sum2 += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    QuadratureEstimate {
        value: vol * mean,
        stderr: vol * (var / n).sqrt(),
        samples,
    }
}

/// Horizontal variation of a compactly supported C^1 function:
/// integral of |grad_H f| over the support, Monte Carlo.
pub fn variation_smooth(
    g: &CarnotGroup,
    f: &SmoothFunction,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<QuadratureEstimate> {
    let r = f
        .support_radius()
        .ok_or_else(|| Error::InvalidParameter("variation needs a compact support radius".into()))?;
    let bbox = support_box(g, r);
    Ok(integrate_box(
        &bbox,
        |x| norm2(&horizontal_gradient(g, f, x)),
        samples,
        rng,
    ))
}

/// Named test functions for the experiment configs.
///
/// * `bump:r` — C^2 polynomial bump `(1 - (|x|_inf/r)^2)^3` supported in the
///   d-infinity ball of radius r;
/// * `trig` — sin(x_1)cos(x_N) (unbounded support);
/// * `poly:d` — (x_1)^d (unbounded support).
pub fn function_by_name(g: &CarnotGroup, name: &str) -> Result<SmoothFunction> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (name, None),
    };
    match kind {
        "bump" => {
            let r: f64 = arg.unwrap_or("1").parse().map_err(|_| Error::Parse(format!("bad bump radius in {name:?}")))?;
            if r <= 0.0 {
                return Err(Error::InvalidParameter("bump radius must be positive".into()));
            }
            let group = g.clone();
            Ok(SmoothFunction::new(
                move |x| {
                    let s = group.dinf_norm_coords(x) / r;
                    if s >= 1.0 {
                        0.0
                    } else {
                        (1.0 - s * s).powi(3)
                    }
                },
                Smoothness::C2,
            )
            .with_support_radius(r))
        }
        "trig" => {
            let n = g.dim();
            Ok(SmoothFunction::new(
                move |x| x[0].sin() * x[n - 1].cos(),
                Smoothness::CInf,
            ))
        }
        "poly" => {
            let d: i32 = arg.unwrap_or("2").parse().map_err(|_| Error::Parse(format!("bad degree in {name:?}")))?;
            Ok(SmoothFunction::new(move |x| x[0].powi(d), Smoothness::CInf))
        }
        _ => Err(Error::UnknownName(name.into())),
    }
}
