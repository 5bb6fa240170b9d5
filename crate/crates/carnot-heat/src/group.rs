//! Exponential-coordinate arithmetic of Carnot groups.
//!
//! A group is described by its stratification and the Lie bracket structure
//! constants of an adapted basis. In exponential coordinates the identity is
//! the zero vector, inversion is negation, and the product is the (finite)
//! Baker-Campbell-Hausdorff series, which terminates at the nilpotency step.

use crate::error::{Error, Result};
use rand::Rng;
use std::fmt;
use std::path::Path;

/// A point of the group in exponential coordinates adapted to the strata.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn zero(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Sparse bracket table entry: `[X_i, X_j] ∋ c · X_l` (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketTerm {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub c: f64,
}

/// Stratified nilpotent group data: strata dimensions, structure constants
/// and the layer weights of the homogeneous norm.
#[derive(Clone)]
pub struct CarnotGroup {
    name: String,
    strata: Vec<usize>,
    offsets: Vec<usize>, // n_0..n_k, offsets[j] = m_1 + ... + m_j
    dim: usize,
    homogeneous_dim: usize,
    layer_of: Vec<usize>, // 1-based layer index per coordinate
    // canonical triples (i < j) plus their antisymmetric mirrors
    terms: Vec<BracketTerm>,
    eps: Vec<f64>,
}

impl fmt::Debug for CarnotGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CarnotGroup")
            .field("name", &self.name)
            .field("strata", &self.strata)
            .field("eps", &self.eps)
            .finish()
    }
}

impl CarnotGroup {
    /// Builds a group from strata dimensions and canonical structure-constant
    /// triples `(i, j, l, c)` with `i < j`, all 0-based. Validates the grading
    /// and the Jacobi identity.
    pub fn new(
        name: impl Into<String>,
        strata: Vec<usize>,
        triples: Vec<BracketTerm>,
        eps: Vec<f64>,
    ) -> Result<Self> {
        let step = strata.len();
        if step == 0 || strata.iter().any(|&m| m == 0) {
            return Err(Error::InvalidGroup("empty stratum".into()));
        }
        if step > 4 {
            return Err(Error::UnsupportedStep(step));
        }
        let dim: usize = strata.iter().sum();
        let homogeneous_dim: usize = strata.iter().enumerate().map(|(i, &m)| (i + 1) * m).sum();
        let mut offsets = vec![0usize];
        for &m in &strata {
            offsets.push(offsets.last().unwrap() + m);
        }
        let mut layer_of = vec![0usize; dim];
        for j in 1..=step {
            for idx in offsets[j - 1]..offsets[j] {
                layer_of[idx] = j;
            }
        }
        if eps.len() != step {
            return Err(Error::InvalidGroup("eps weights must have one entry per layer".into()));
        }
        if (eps[0] - 1.0).abs() > 1e-12 || eps.iter().any(|&e| !(0.0 < e && e <= 1.0)) {
            return Err(Error::InvalidGroup("eps_1 must be 1 and eps_j in (0,1]".into()));
        }

        let mut terms = Vec::with_capacity(2 * triples.len());
        for t in &triples {
            if t.i >= dim || t.j >= dim || t.l >= dim {
                return Err(Error::InvalidGroup("structure constant index out of range".into()));
            }
            if t.i >= t.j {
                return Err(Error::InvalidGroup("canonical triples require i < j".into()));
            }
            if t.c != 0.0 && layer_of[t.l] != layer_of[t.i] + layer_of[t.j] {
                return Err(Error::InvalidGroup(format!(
                    "bracket [X_{}, X_{}] -> X_{} violates the grading",
                    t.i + 1,
                    t.j + 1,
                    t.l + 1
                )));
            }
            terms.push(*t);
            terms.push(BracketTerm { i: t.j, j: t.i, l: t.l, c: -t.c });
        }

        let g = Self {
            name: name.into(),
            strata,
            offsets,
            dim,
            homogeneous_dim,
            layer_of,
            terms,
            eps,
        };
        g.check_jacobi()?;
        Ok(g)
    }

    fn check_jacobi(&self) -> Result<()> {
        let n = self.dim;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut t1 = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    a.fill(0.0);
                    b.fill(0.0);
                    c.fill(0.0);
                    a[i] = 1.0;
                    b[j] = 1.0;
                    c[l] = 1.0;
                    acc.fill(0.0);
                    self.bracket(&b, &c, &mut t1);
                    let t2 = t1.clone();
                    self.bracket(&a, &t2, &mut t1);
                    for (s, v) in acc.iter_mut().zip(&t1) {
                        *s += v;
                    }
                    self.bracket(&c, &a, &mut t1);
                    let t2 = t1.clone();
                    self.bracket(&b, &t2, &mut t1);
                    for (s, v) in acc.iter_mut().zip(&t1) {
                        *s += v;
                    }
                    self.bracket(&a, &b, &mut t1);
                    let t2 = t1.clone();
                    self.bracket(&c, &t2, &mut t1);
                    for (s, v) in acc.iter_mut().zip(&t1) {
                        *s += v;
                    }
                    if acc.iter().any(|v| v.abs() > 1e-10) {
                        return Err(Error::InvalidGroup(format!(
                            "Jacobi identity fails on basis triple ({i}, {j}, {l})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Nilpotency step k.
    pub fn step(&self) -> usize {
        self.strata.len()
    }

    /// Strata dimensions m_1..m_k.
    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    /// Dimension of the first (horizontal) layer.
    pub fn horizontal_dim(&self) -> usize {
        self.strata[0]
    }

    /// Topological dimension N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Homogeneous dimension Q = sum of i * m_i.
    pub fn homogeneous_dim(&self) -> usize {
        self.homogeneous_dim
    }

    /// 1-based layer of coordinate `idx`.
    pub fn layer(&self, idx: usize) -> usize {
        self.layer_of[idx]
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn set_eps(&mut self, eps: Vec<f64>) -> Result<()> {
        if eps.len() != self.step() || (eps[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("bad eps vector".into()));
        }
        self.eps = eps;
        Ok(())
    }

    /// Lie bracket of coordinate vectors, written into `out`.
    pub fn bracket(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.terms {
            let v = t.c * a[t.i] * b[t.j];
            if v != 0.0 {
                out[t.l] += v;
            }
        }
    }

    /// Group product by the BCH series, truncated exactly at the step.
    pub fn multiply(&self, x: &Point, y: &Point) -> Result<Point> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.dim() });
        }
        let mut ws = Workspace::new(self.dim);
        let mut out = vec![0.0; self.dim];
        self.multiply_into(x.coords(), y.coords(), &mut ws, &mut out);
        Ok(Point(out))
    }

    /// Allocation-free product for hot loops.
    pub fn multiply_into(&self, x: &[f64], y: &[f64], ws: &mut Workspace, out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = x[i] + y[i];
        }
        if self.step() < 2 {
            return;
        }
        // [x, y]
        let Workspace { t1, t2, t3 } = ws;
        self.bracket(x, y, t1);
        for i in 0..self.dim {
            out[i] += 0.5 * t1[i];
        }
        if self.step() < 3 {
            return;
        }
        // [x, [x, y]] and [y, [y, x]] = [y, [x, y]] negated
        self.bracket(x, t1, t2);
        self.bracket(y, t1, t3);
        for i in 0..self.dim {
            out[i] += (t2[i] - t3[i]) / 12.0;
        }
        if self.step() < 4 {
            return;
        }
        // -1/24 [y, [x, [x, y]]]
        self.bracket(y, t2, t3);
        for i in 0..self.dim {
            out[i] -= t3[i] / 24.0;
        }
    }

    /// Inverse: coordinate negation in exponential coordinates.
    pub fn inverse(&self, x: &Point) -> Point {
        Point(x.0.iter().map(|v| -v).collect())
    }

    /// Grading dilation: layer-j block scaled by lambda^j.
    pub fn dilate(&self, lambda: f64, x: &Point) -> Result<Point> {
        if lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!("dilation factor must be positive, got {lambda}")));
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        let mut out = x.0.clone();
        for (i, v) in out.iter_mut().enumerate() {
            *v *= lambda.powi(self.layer_of[i] as i32);
        }
        Ok(Point(out))
    }

    /// Homogeneous norm: max over layers of eps_j * |xi_j|^(1/j).
    pub fn dinf_norm(&self, x: &Point) -> f64 {
        self.dinf_norm_coords(x.coords())
    }

    pub fn dinf_norm_coords(&self, x: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for j in 1..=self.step() {
            let block = &x[self.offsets[j - 1]..self.offsets[j]];
            let norm: f64 = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            let v = self.eps[j - 1] * norm.powf(1.0 / j as f64);
            best = best.max(v);
        }
        best
    }

    /// Homogeneous distance d(x, y) = ||y^{-1} * x||.
    pub fn dinf_distance(&self, x: &Point, y: &Point) -> f64 {
        let d = self.multiply(&self.inverse(y), x).expect("dimension checked");
        self.dinf_norm(&d)
    }

    /// Left-invariant frame at `x`: column i holds the coordinates of X_i.
    ///
    /// Columns are the y-derivative of x * y at y = 0, which for a nilpotent
    /// algebra of step <= 4 is `id + ad_x/2 + ad_x^2/12` (the odd Bernoulli
    /// coefficient of ad_x^3 vanishes).
    pub fn left_invariant_frame(&self, x: &Point) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        let mut t1 = vec![0.0; n];
        let mut t2 = vec![0.0; n];
        for i in 0..n {
            e.fill(0.0);
            e[i] = 1.0;
            let mut col = e.clone();
            if self.step() >= 2 {
                self.bracket(x.coords(), &e, &mut t1);
                for (c, v) in col.iter_mut().zip(&t1) {
                    *c += 0.5 * v;
                }
                if self.step() >= 3 {
                    self.bracket(x.coords(), &t1, &mut t2);
                    for (c, v) in col.iter_mut().zip(&t2) {
                        *c += v / 12.0;
                    }
                }
            }
            cols.push(col.clone());
        }
        cols
    }

    /// Single frame column, written into `out`.
    pub fn frame_column(&self, x: &[f64], i: usize, ws: &mut Workspace, out: &mut [f64]) {
        out.fill(0.0);
        out[i] = 1.0;
        if self.step() >= 2 {
            let Workspace { t1, t2, .. } = ws;
            self.bracket(x, out, t1);
            if self.step() >= 3 {
                self.bracket(x, t1, t2);
                for k in 0..self.dim {
                    out[k] += 0.5 * t1[k] + t2[k] / 12.0;
                }
            } else {
                for k in 0..self.dim {
                    out[k] += 0.5 * t1[k];
                }
            }
        }
    }

    /// Shrinks the higher-layer norm weights until the plain triangle
    /// inequality holds on `trials` random triples.
    pub fn calibrate_eps(&mut self, trials: usize, rng: &mut impl Rng) {
        if self.step() == 1 {
            return;
        }
        loop {
            if self.triangle_holds(trials, rng) {
                return;
            }
            for j in 1..self.step() {
                self.eps[j] *= 0.9;
            }
        }
    }

    fn triangle_holds(&self, trials: usize, rng: &mut impl Rng) -> bool {
        let n = self.dim;
        let sample = |rng: &mut dyn rand::RngCore| {
            Point((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>())
        };
        for _ in 0..trials {
            let x = sample(rng);
            let y = sample(rng);
            let z = sample(rng);
            let lhs = self.dinf_distance(&x, &z);
            let rhs = self.dinf_distance(&x, &y) + self.dinf_distance(&y, &z);
            if lhs > rhs * (1.0 + 1e-12) {
                return false;
            }
        }
        true
    }
}

/// Scratch buffers for allocation-free group arithmetic.
pub struct Workspace {
    t1: Vec<f64>,
    t2: Vec<f64>,
    t3: Vec<f64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self { t1: vec![0.0; dim], t2: vec![0.0; dim], t3: vec![0.0; dim] }
    }
}

/// Euclidean R^n as the step-1 group.
pub fn euclidean(n: usize) -> CarnotGroup {
    CarnotGroup::new(format!("euclidean:{n}"), vec![n], vec![], vec![1.0]).expect("valid")
}

/// Heisenberg group H^n: 2n horizontal generators and one vertical direction,
/// with [X_i, X_{n+i}] = X_{2n+1}.
pub fn heisenberg(n: usize) -> CarnotGroup {
    let mut triples = Vec::new();
    for i in 0..n {
        triples.push(BracketTerm { i, j: n + i, l: 2 * n, c: 1.0 });
    }
    CarnotGroup::new(format!("heisenberg:{n}"), vec![2 * n, 1], triples, vec![1.0, 1.0])
        .expect("valid")
}

/// Free step-2 group on m generators; the second layer collects all brackets
/// [X_i, X_j], i < j. The norm weights are calibrated at construction.
pub fn free_step2(m: usize, rng: &mut impl Rng) -> CarnotGroup {
    let m2 = m * (m - 1) / 2;
    let mut triples = Vec::new();
    let mut l = m;
    for i in 0..m {
        for j in (i + 1)..m {
            triples.push(BracketTerm { i, j, l, c: 1.0 });
            l += 1;
        }
    }
    let mut g = CarnotGroup::new(format!("free2:{m}"), vec![m, m2], triples, vec![1.0, 1.0])
        .expect("valid");
    g.calibrate_eps(100_000, rng);
    g
}

/// Resolves a built-in group name: `euclidean:n`, `heisenberg:n`, `free2:m`.
pub fn by_name(name: &str) -> Result<CarnotGroup> {
    let (kind, arg) = name
        .split_once(':')
        .ok_or_else(|| Error::UnknownName(name.into()))?;
    let n: usize = arg
        .parse()
        .map_err(|_| Error::Parse(format!("bad group parameter in {name:?}")))?;
    if n == 0 {
        return Err(Error::InvalidParameter(format!("group parameter must be positive in {name:?}")));
    }
    match kind {
        "euclidean" => Ok(euclidean(n)),
        "heisenberg" => Ok(heisenberg(n)),
        "free2" => {
            if n < 2 {
                return Err(Error::InvalidParameter("free2 needs at least 2 generators".into()));
            }
            let mut rng = crate::rng::stream(0xCA11B8, "eps-calibration", n as u64);
            Ok(free_step2(n, &mut rng))
        }
        _ => Err(Error::UnknownName(name.into())),
    }
}

/// Loads a group definition from a structured text file.
///
/// Format, one directive per line (`#` comments allowed):
/// ```text
/// name my-group
/// strata 2 1
/// bracket 1 2 3 1.0      # [X_1, X_2] = 1.0 * X_3 (1-based)
/// eps 1.0 0.9
/// ```
pub fn load_from_file(path: &Path) -> Result<CarnotGroup> {
    let text = std::fs::read_to_string(path)?;
    let mut name = path.display().to_string();
    let mut strata: Option<Vec<usize>> = None;
    let mut triples = Vec::new();
    let mut eps: Option<Vec<f64>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let rest: Vec<&str> = it.collect();
        let err = |msg: &str| Error::Parse(format!("{}:{}: {}", path.display(), lineno + 1, msg));
        match key {
            "name" => name = rest.join(" "),
            "strata" => {
                let v: std::result::Result<Vec<usize>, _> =
                    rest.iter().map(|s| s.parse()).collect();
                strata = Some(v.map_err(|_| err("bad strata"))?);
            }
            "bracket" => {
                if rest.len() != 4 {
                    return Err(err("bracket needs: i j l value"));
                }
                let i: usize = rest[0].parse().map_err(|_| err("bad index"))?;
                let j: usize = rest[1].parse().map_err(|_| err("bad index"))?;
                let l: usize = rest[2].parse().map_err(|_| err("bad index"))?;
                let c: f64 = rest[3].parse().map_err(|_| err("bad value"))?;
                if i == 0 || j == 0 || l == 0 {
                    return Err(err("bracket indices are 1-based"));
                }
                triples.push(BracketTerm { i: i - 1, j: j - 1, l: l - 1, c });
            }
            "eps" => {
                let v: std::result::Result<Vec<f64>, _> = rest.iter().map(|s| s.parse()).collect();
                eps = Some(v.map_err(|_| err("bad eps"))?);
            }
            _ => return Err(err(&format!("unknown directive {key:?}"))),
        }
    }
    let strata = strata.ok_or_else(|| Error::Parse("missing strata directive".into()))?;
    let eps = eps.unwrap_or_else(|| vec![1.0; strata.len()]);
    CarnotGroup::new(name, strata, triples, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Closed-form H^1 product, the hand oracle for the BCH engine:
    /// (x,y,z)*(x',y',z') = (x+x', y+y', z+z'+(xy'-yx')/2).
    fn h1_product(a: &[f64], b: &[f64]) -> Vec<f64> {
        vec![
            a[0] + b[0],
            a[1] + b[1],
            a[2] + b[2] + 0.5 * (a[0] * b[1] - a[1] * b[0]),
        ]
    }

    fn rand_point(g: &CarnotGroup, rng: &mut impl Rng) -> Point {
        Point((0..g.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())
    }

    #[test]
    fn euclidean_product_is_addition() {
        let g = euclidean(2);
        let p = g
            .multiply(&Point(vec![1.0, 2.0]), &Point(vec![3.0, 4.0]))
            .unwrap();
        assert_eq!(p, Point(vec![4.0, 6.0]));
    }

    #[test]
    fn heisenberg_product_matches_closed_form() {
        let g = heisenberg(1);
        let p = g
            .multiply(&Point(vec![1.0, 0.0, 0.0]), &Point(vec![0.0, 1.0, 0.0]))
            .unwrap();
        assert_eq!(p, Point(vec![1.0, 1.0, 0.5]));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = rand_point(&g, &mut rng);
            let b = rand_point(&g, &mut rng);
            let p = g.multiply(&a, &b).unwrap();
            let q = h1_product(a.coords(), b.coords());
            for (u, v) in p.coords().iter().zip(&q) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_cancels() {
        let g = heisenberg(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = rand_point(&g, &mut rng);
        let p = g.multiply(&x, &g.inverse(&x)).unwrap();
        assert!(p.coords().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn associativity_on_builtins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let groups = vec![euclidean(3), heisenberg(1), heisenberg(2), free_step2(3, &mut rng)];
        for g in &groups {
            for _ in 0..1000 {
                let x = rand_point(g, &mut rng);
                let y = rand_point(g, &mut rng);
                let z = rand_point(g, &mut rng);
                let a = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
                let b = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
                let err: f64 = a
                    .coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(u, v)| (u - v).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "associativity violated on {} by {err}", g.name());
            }
        }
    }

    #[test]
    fn dilation_examples() {
        let h = heisenberg(1);
        let p = h.dilate(2.0, &Point(vec![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(p, Point(vec![2.0, 2.0, 4.0]));

        let e = euclidean(3);
        let p = e.dilate(3.0, &Point(vec![1.0, 1.0, 1.0])).unwrap();
        assert_eq!(p, Point(vec![3.0, 3.0, 3.0]));

        let x = Point(vec![0.3, -0.4, 0.9]);
        assert_eq!(h.dilate(1.0, &x).unwrap(), x);
        assert!(h.dilate(0.0, &x).is_err());
        assert!(h.dilate(-1.0, &x).is_err());
    }

    #[test]
    fn dilation_is_automorphism_and_norm_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let groups = vec![euclidean(2), heisenberg(1), free_step2(3, &mut rng)];
        for g in &groups {
            for _ in 0..1000 {
                let lambda = rng.gen_range(0.1..10.0);
                let x = rand_point(g, &mut rng);
                let y = rand_point(g, &mut rng);
                let lhs = g.dilate(lambda, &g.multiply(&x, &y).unwrap()).unwrap();
                let rhs = g
                    .multiply(&g.dilate(lambda, &x).unwrap(), &g.dilate(lambda, &y).unwrap())
                    .unwrap();
                let err: f64 = lhs
                    .coords()
                    .iter()
                    .zip(rhs.coords())
                    .map(|(u, v)| (u - v).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10);
                let nh = g.dinf_norm(&g.dilate(lambda, &x).unwrap());
                assert!((nh - lambda * g.dinf_norm(&x)).abs() < 1e-10 * (1.0 + nh));
            }
        }
    }

    #[test]
    fn dinf_norm_examples() {
        let e = euclidean(2);
        assert!((e.dinf_norm(&Point(vec![3.0, 4.0])) - 5.0).abs() < 1e-15);

        let h = heisenberg(1);
        assert!((h.dinf_norm(&Point(vec![0.0, 0.0, 4.0])) - 2.0).abs() < 1e-15);

        let mut h2 = heisenberg(1);
        h2.set_eps(vec![1.0, 0.5]).unwrap();
        assert!((h2.dinf_norm(&Point(vec![0.0, 0.0, 4.0])) - 1.0).abs() < 1e-15);

        assert_eq!(h.dinf_norm(&Point::zero(3)), 0.0);
    }

    #[test]
    fn quasi_triangle_with_unit_constant() {
        // with the calibrated eps the plain triangle inequality must hold
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let groups = vec![euclidean(2), heisenberg(1), heisenberg(2), free_step2(3, &mut rng)];
        for g in &groups {
            assert!(g.triangle_holds(100_000, &mut rng), "triangle fails on {}", g.name());
        }
    }

    #[test]
    fn frame_closed_form_h1() {
        let g = heisenberg(1);
        let (x, y) = (0.7, -1.3);
        let f = g.left_invariant_frame(&Point(vec![x, y, 0.4]));
        let expect = [
            vec![1.0, 0.0, -y / 2.0],
            vec![0.0, 1.0, x / 2.0],
            vec![0.0, 0.0, 1.0],
        ];
        for (col, exp) in f.iter().zip(&expect) {
            for (u, v) in col.iter().zip(exp) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_is_identity_at_origin_and_for_euclidean() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for g in [euclidean(3), heisenberg(2)] {
            let f = g.left_invariant_frame(&Point::zero(g.dim()));
            for (i, col) in f.iter().enumerate() {
                for (j, v) in col.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-14);
                }
            }
        }
        let e = euclidean(3);
        let x = rand_point(&e, &mut rng);
        let f = e.left_invariant_frame(&x);
        for (i, col) in f.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn frame_matches_finite_difference_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let groups = vec![heisenberg(1), heisenberg(2), free_step2(3, &mut rng)];
        let h = 1e-6;
        for g in &groups {
            for _ in 0..50 {
                let x = rand_point(g, &mut rng);
                let frame = g.left_invariant_frame(&x);
                for i in 0..g.dim() {
                    let mut ep = Point::zero(g.dim());
                    ep.0[i] = h;
                    let mut em = Point::zero(g.dim());
                    em.0[i] = -h;
                    let p = g.multiply(&x, &ep).unwrap();
                    let q = g.multiply(&x, &em).unwrap();
                    for j in 0..g.dim() {
                        let fd = (p.coords()[j] - q.coords()[j]) / (2.0 * h);
                        let anal = frame[i][j];
                        let scale = 1.0 + anal.abs();
                        assert!(
                            (fd - anal).abs() / scale < 1e-6,
                            "frame mismatch on {} col {i} row {j}: fd={fd} anal={anal}",
                            g.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn grading_violation_rejected() {
        // [X_1, X_2] = X_1 breaks the grading
        let r = CarnotGroup::new(
            "bad",
            vec![2, 1],
            vec![BracketTerm { i: 0, j: 1, l: 0, c: 1.0 }],
            vec![1.0, 1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let g = heisenberg(1);
        assert!(g.multiply(&Point(vec![1.0, 2.0]), &Point(vec![0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn by_name_resolves_builtins() {
        assert_eq!(by_name("euclidean:3").unwrap().dim(), 3);
        assert_eq!(by_name("heisenberg:2").unwrap().dim(), 5);
        let f = by_name("free2:3").unwrap();
        assert_eq!(f.dim(), 6);
        assert_eq!(f.homogeneous_dim(), 9);
        assert!(by_name("nilpotent:9").is_err());
        assert!(by_name("euclidean:0").is_err());
    }

    #[test]
    fn homogeneous_dimension() {
        assert_eq!(euclidean(3).homogeneous_dim(), 3);
        assert_eq!(heisenberg(1).homogeneous_dim(), 4);
        assert!(heisenberg(1).homogeneous_dim() > heisenberg(1).dim());
        assert_eq!(euclidean(3).homogeneous_dim(), euclidean(3).dim());
    }

    #[test]
    fn group_file_roundtrip() {
        let dir = std::env::temp_dir().join("carnot-heat-test-group");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h1.group");
        std::fs::write(
            &path,
            "# Heisenberg H^1\nname h1-from-file\nstrata 2 1\nbracket 1 2 3 1.0\neps 1.0 1.0\n",
        )
        .unwrap();
        let g = load_from_file(&path).unwrap();
        assert_eq!(g.name(), "h1-from-file");
        let p = g
            .multiply(&Point(vec![1.0, 0.0, 0.0]), &Point(vec![0.0, 1.0, 0.0]))
            .unwrap();
        assert_eq!(p, Point(vec![1.0, 1.0, 0.5]));
    }
}
