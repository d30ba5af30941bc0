//! Cubature over origin-centred balls and spheres.
//!
//! Two schemes: a tensor product in polar/spherical coordinates (Gauss-Legendre
//! in the radius and polar cosine, uniform in the azimuth) for `n <= 3`, and
//! seeded Monte Carlo for any dimension. Integrand values are computed in
//! parallel, then reduced by fixed-order pairwise summation, so a given
//! [`QuadratureSpec`] always produces the same bits.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TensorPolar,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Nodes per axis (tensor-polar) or sample count (Monte Carlo).
    pub resolution: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn tensor_polar(resolution: usize) -> Self {
        QuadratureSpec {
            scheme: Scheme::TensorPolar,
            resolution,
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            scheme: Scheme::MonteCarlo,
            resolution: samples,
            seed,
        }
    }

    /// Tensor-polar where available, Monte Carlo above three dimensions.
    pub fn default_for(n: usize) -> Self {
        match n {
            1 | 2 => QuadratureSpec::tensor_polar(256),
            3 => QuadratureSpec::tensor_polar(64),
            _ => QuadratureSpec::monte_carlo(200_000, 0),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.resolution < 8 {
            return Err(Error::InvalidParameter(format!(
                "quadrature resolution must be at least 8, got {}",
                self.resolution
            )));
        }
        if self.scheme == Scheme::TensorPolar && !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "tensor-polar quadrature supports n <= 3, got n = {n}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallDomain {
    pub n: usize,
    pub radius: f64,
}

impl BallDomain {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(BallDomain { n, radius })
    }
}

/// Integral value with a heuristic error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Volume of the unit `n`-ball and area of the unit `(n-1)`-sphere.
pub fn unit_ball_constants(n: usize) -> Result<(f64, f64)> {
    if !(1..=10).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "unit ball constants are tabulated for 1 <= n <= 10, got {n}"
        )));
    }
    // V_0 = 1, V_1 = 2, V_k = (2 pi / k) V_{k-2}
    let mut v = [1.0, 2.0];
    for k in 2..=n {
        v[k % 2] *= 2.0 * PI / k as f64;
    }
    let vol = v[n % 2];
    Ok((vol, n as f64 * vol))
}

/// Sum in a fixed binary tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// Evaluate every node in parallel and return the first error in node order.
fn evaluate_ordered<F>(count: usize, eval: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    // borrowing `eval` keeps the bound at Sync; moving it in would need Send
    #[allow(clippy::redundant_closure)]
    let raw: Vec<Result<f64>> = (0..count).into_par_iter().map(|i| eval(i)).collect();
    raw.into_iter().collect()
}

/// Weighted tensor-polar nodes for the ball, as (point, weight) generator.
struct BallRule {
    n: usize,
    m: usize,
    r_nodes: Vec<f64>,
    r_weights: Vec<f64>,
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
}

impl BallRule {
    fn new(n: usize, radius: f64, m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        let (r_nodes, r_weights) = if n == 1 {
            (x.iter().map(|t| radius * t).collect(), w.iter().map(|v| radius * v).collect())
        } else {
            (
                x.iter().map(|t| 0.5 * radius * (t + 1.0)).collect(),
                w.iter().map(|v| 0.5 * radius * v).collect(),
            )
        };
        BallRule {
            n,
            m,
            r_nodes,
            r_weights,
            t_nodes: x,
            t_weights: w,
        }
    }

    fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    fn node(&self, idx: usize, point: &mut [f64]) -> f64 {
        let m = self.m;
        match self.n {
            1 => {
                point[0] = self.r_nodes[idx];
                self.r_weights[idx]
            }
            2 => {
                let (ir, ia) = (idx / m, idx % m);
                let r = self.r_nodes[ir];
                let phi = 2.0 * PI * (ia as f64 + 0.5) / m as f64;
                point[0] = r * phi.cos();
                point[1] = r * phi.sin();
                self.r_weights[ir] * r * 2.0 * PI / m as f64
            }
            _ => {
                let (ir, rest) = (idx / (m * m), idx % (m * m));
                let (it, ia) = (rest / m, rest % m);
                let r = self.r_nodes[ir];
                let t = self.t_nodes[it];
                let s = (1.0 - t * t).sqrt();
                let phi = 2.0 * PI * (ia as f64 + 0.5) / m as f64;
                point[0] = r * s * phi.cos();
                point[1] = r * s * phi.sin();
                point[2] = r * t;
                self.r_weights[ir] * r * r * self.t_weights[it] * 2.0 * PI / m as f64
            }
        }
    }
}

fn tensor_ball<F>(f: &F, ball: BallDomain, m: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let rule = BallRule::new(ball.n, ball.radius, m);
    let vals = evaluate_ordered(rule.len(), |idx| {
        let mut p = [0.0; 3];
        let w = rule.node(idx, &mut p[..ball.n]);
        Ok(w * f(&p[..ball.n])?)
    })?;
    Ok(pairwise_sum(&vals))
}

/// Unit-sphere rule: (point on the unit sphere, weight) for `n <= 3`.
fn sphere_rule(n: usize, m: usize) -> Vec<([f64; 3], f64)> {
    match n {
        1 => vec![([-1.0, 0.0, 0.0], 1.0), ([1.0, 0.0, 0.0], 1.0)],
        2 => (0..m)
            .map(|j| {
                let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                ([phi.cos(), phi.sin(), 0.0], 2.0 * PI / m as f64)
            })
            .collect(),
        _ => {
            let (t, w) = gauss_legendre(m);
            let mut out = Vec::with_capacity(m * m);
            for (ti, wi) in t.iter().zip(&w) {
                let s = (1.0 - ti * ti).sqrt();
                for j in 0..m {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                    out.push(([s * phi.cos(), s * phi.sin(), *ti], wi * 2.0 * PI / m as f64));
                }
            }
            out
        }
    }
}

fn tensor_sphere<F>(f: &F, n: usize, radius: f64, m: usize) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    let rule = sphere_rule(n, m);
    let area_scale = radius.powi(n as i32 - 1);
    let vals = evaluate_ordered(rule.len(), |idx| {
        let (dir, w) = &rule[idx];
        let normal = &dir[..n];
        let mut p = [0.0; 3];
        for (pi, di) in p.iter_mut().zip(normal) {
            *pi = radius * di;
        }
        Ok(w * area_scale * f(&p[..n], normal)?)
    })?;
    Ok(pairwise_sum(&vals))
}

/// Gaussian directions; the same seed gives the same directions in every run.
fn random_directions(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * count);
    let mut dir = vec![0.0; n];
    for _ in 0..count {
        loop {
            for d in dir.iter_mut() {
                *d = StandardNormal.sample(rng);
            }
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm > 1e-12 {
                out.extend(dir.iter().map(|d| d / norm));
                break;
            }
        }
    }
    out
}

fn mean_and_error(vals: &[f64], measure: f64) -> Estimate {
    let count = vals.len() as f64;
    let mean = pairwise_sum(vals) / count;
    let centred: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&centred) / (count - 1.0);
    Estimate {
        value: measure * mean,
        error: 3.0 * measure * (var / count).sqrt(),
    }
}

/// Integral of `f` over the closed ball.
///
/// Tensor-polar error is the difference against the half-resolution rule;
/// Monte Carlo error is three standard errors.
pub fn integrate_ball<F>(f: F, ball: BallDomain, q: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    q.validate(ball.n)?;
    match q.scheme {
        Scheme::TensorPolar => {
            let fine = tensor_ball(&f, ball, q.resolution)?;
            let coarse = tensor_ball(&f, ball, q.resolution / 2)?;
            Ok(Estimate {
                value: fine,
                error: (fine - coarse).abs(),
            })
        }
        Scheme::MonteCarlo => {
            let n = ball.n;
            let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
            let dirs = random_directions(n, q.resolution, &mut rng);
            let unit = Uniform::new(0.0f64, 1.0);
            let radii: Vec<f64> = (0..q.resolution)
                .map(|_| ball.radius * unit.sample(&mut rng).powf(1.0 / n as f64))
                .collect();
            let vals = evaluate_ordered(q.resolution, |i| {
                let p: Vec<f64> = dirs[i * n..(i + 1) * n].iter().map(|d| radii[i] * d).collect();
                f(&p)
            })?;
            let (vol, _) = unit_ball_constants(n)?;
            Ok(mean_and_error(&vals, vol * ball.radius.powi(n as i32)))
        }
    }
}

/// Surface integral over the sphere of radius `radius`; `f` receives the point
/// and the outward unit normal.
pub fn integrate_sphere<F>(f: F, n: usize, radius: f64, q: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    BallDomain::new(n, radius)?;
    q.validate(n)?;
    match q.scheme {
        Scheme::TensorPolar => {
            let fine = tensor_sphere(&f, n, radius, q.resolution)?;
            let coarse = tensor_sphere(&f, n, radius, q.resolution / 2)?;
            Ok(Estimate {
                value: fine,
                error: (fine - coarse).abs(),
            })
        }
        Scheme::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(q.seed ^ 0x5eed_5f1e);
            let dirs = random_directions(n, q.resolution, &mut rng);
            let vals = evaluate_ordered(q.resolution, |i| {
                let normal = &dirs[i * n..(i + 1) * n];
                let p: Vec<f64> = normal.iter().map(|d| radius * d).collect();
                f(&p, normal)
            })?;
            let (_, area) = unit_ball_constants(n)?;
            Ok(mean_and_error(&vals, area * radius.powi(n as i32 - 1)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_small_dimensions() {
        let (v1, a0) = unit_ball_constants(1).unwrap();
        assert_eq!((v1, a0), (2.0, 2.0));
        let (v2, a1) = unit_ball_constants(2).unwrap();
        assert!((v2 - PI).abs() < 1e-15 && (a1 - 2.0 * PI).abs() < 1e-15);
        let (v3, a2) = unit_ball_constants(3).unwrap();
        assert!((v3 - 4.0 * PI / 3.0).abs() < 1e-15 && (a2 - 4.0 * PI).abs() < 1e-14);
        assert!(unit_ball_constants(0).is_err());
        assert!(unit_ball_constants(11).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for m in [1, 2, 5, 8, 33, 256] {
            let (x, w) = gauss_legendre(m);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "m = {m}");
            // x^(2m-2) integrates to 2/(2m-1)
            let deg = 2 * m as i32 - 2;
            let val: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            assert!((val - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn ball_volumes() {
        let one = |_: &[f64]| Ok(1.0);
        let q = QuadratureSpec::tensor_polar(32);
        let e = integrate_ball(one, BallDomain::new(2, 1.0).unwrap(), &q).unwrap();
        assert!((e.value - PI).abs() < 1e-13);
        let e = integrate_ball(one, BallDomain::new(3, 2.0).unwrap(), &q).unwrap();
        assert!((e.value - 32.0 * PI / 3.0).abs() < 1e-12);
        let e = integrate_ball(one, BallDomain::new(1, 1.5).unwrap(), &q).unwrap();
        assert!((e.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_mean_curvature_integrand() {
        // n H = 2 over the unit disk
        let q = QuadratureSpec::tensor_polar(64);
        let e = integrate_ball(|_: &[f64]| Ok(2.0), BallDomain::new(2, 1.0).unwrap(), &q).unwrap();
        assert!((e.value - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        let q = QuadratureSpec::tensor_polar(16);
        let e = integrate_sphere(|_: &[f64], _: &[f64]| Ok(1.0), 3, 2.0, &q).unwrap();
        assert!((e.value - 16.0 * PI).abs() < 1e-12);
        let e = integrate_sphere(|_: &[f64], _: &[f64]| Ok(1.0), 1, 7.0, &q).unwrap();
        assert_eq!(e.value, 2.0);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let q = QuadratureSpec::monte_carlo(1000, 42);
        let ball = BallDomain::new(3, 1.0).unwrap();
        let f = |p: &[f64]| Ok(p[0] * p[0]);
        let a = integrate_ball(f, ball, &q).unwrap();
        let b = integrate_ball(f, ball, &q).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = integrate_ball(f, ball, &QuadratureSpec::monte_carlo(1000, 43)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn tensor_rule_rejects_high_dimension_and_low_resolution() {
        let ball = BallDomain::new(4, 1.0).unwrap();
        assert!(integrate_ball(|_: &[f64]| Ok(1.0), ball, &QuadratureSpec::tensor_polar(16)).is_err());
        let ball = BallDomain::new(2, 1.0).unwrap();
        assert!(integrate_ball(|_: &[f64]| Ok(1.0), ball, &QuadratureSpec::tensor_polar(4)).is_err());
        assert!(BallDomain::new(2, 0.0).is_err());
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let s = pairwise_sum(&xs);
        let naive: f64 = xs.iter().sum();
        assert!((s - naive).abs() < 1e-12);
        assert_eq!(s.to_bits(), pairwise_sum(&xs).to_bits());
    }
}
