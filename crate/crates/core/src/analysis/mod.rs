//! Numerical verification of the Heinz-type estimate and its companions on
//! origin-centred balls.
//!
//! Every check returns a [`CheckReport`] recording both sides, so a report can be
//! audited without rerunning it. Suprema and infima are taken over a
//! deterministic lattice (interior Cartesian nodes plus cube-surface nodes
//! projected onto the boundary sphere) followed by one local refinement pass;
//! they are certified at the nodes only.

pub mod probes;
pub mod quadrature;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

pub use probes::{bernstein_probe, dong_condition_probe, BernsteinProbe, DongProbe, Verdict};
pub use quadrature::{
    integrate_ball, integrate_sphere, unit_ball_constants, BallDomain, Estimate, QuadratureSpec,
    Scheme,
};

use crate::error::{Error, Result};
use crate::geometry::{
    mean_curvature_of_jet, tilt_of_grad_norm, CausalType, HeightField,
    DEFAULT_LIGHTLIKE_TOLERANCE,
};

/// Absolute tolerance added to every check.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Relative slack when verifying a gradient bound at a node.
pub const HYPOTHESIS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampling {
    /// Lattice points per axis; always odd so the origin is a node.
    pub per_axis: usize,
    pub refine: bool,
}

impl Sampling {
    pub fn new(per_axis: usize) -> Self {
        let per_axis = per_axis.max(3);
        Sampling {
            per_axis: per_axis | 1,
            refine: true,
        }
    }

    pub fn default_for(n: usize) -> Self {
        Sampling::new(match n {
            1 => 2001,
            2 => 129,
            3 => 33,
            4 => 15,
            5 => 9,
            _ => 5,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tolerance: f64,
    pub tau: f64,
    pub sampling: Option<Sampling>,
    pub quadrature: Option<QuadratureSpec>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tolerance: DEFAULT_TOLERANCE,
            tau: DEFAULT_LIGHTLIKE_TOLERANCE,
            sampling: None,
            quadrature: None,
        }
    }
}

impl CheckOptions {
    pub fn sampling_for(&self, n: usize) -> Sampling {
        self.sampling.unwrap_or_else(|| Sampling::default_for(n))
    }

    pub fn quadrature_for(&self, n: usize) -> QuadratureSpec {
        self.quadrature.unwrap_or_else(|| QuadratureSpec::default_for(n))
    }
}

/// Outcome of one numerical check with both sides recorded.
///
/// `residual` is `|lhs - rhs|` for identities and `lhs - rhs` for inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub quadrature_error: f64,
    pub passed: bool,
    pub metadata: BTreeMap<String, f64>,
}

impl CheckReport {
    fn identity(check: &str, lhs: f64, rhs: f64, tolerance: f64, quadrature_error: f64) -> Self {
        let residual = (lhs - rhs).abs();
        CheckReport {
            check: check.to_string(),
            lhs,
            rhs,
            residual,
            tolerance,
            quadrature_error,
            passed: residual <= tolerance + quadrature_error,
            metadata: BTreeMap::new(),
        }
    }

    fn inequality(check: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        CheckReport {
            check: check.to_string(),
            lhs,
            rhs,
            residual: lhs - rhs,
            tolerance,
            quadrature_error: 0.0,
            passed: lhs <= rhs + tolerance,
            metadata: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Sample points of a closed ball, stored flat with stride `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub radius: f64,
    pub spacing: f64,
    coords: Vec<f64>,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n)
    }
}

/// Cartesian nodes inside the closed ball, plus the cube-surface nodes
/// projected radially onto the boundary sphere.
pub fn ball_lattice(n: usize, radius: f64, per_axis: usize) -> Lattice {
    let m = per_axis.max(2);
    let spacing = 2.0 * radius / (m - 1) as f64;
    let total = m.pow(n as u32);
    let mut coords = Vec::new();
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    for flat in 0..total {
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        let on_cube_surface = idx.iter().any(|&i| i == 0 || i == m - 1);
        for (x, &i) in p.iter_mut().zip(&idx) {
            // the middle index maps to exactly zero
            *x = if 2 * i + 1 == m { 0.0 } else { -radius + spacing * i as f64 };
        }
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if on_cube_surface {
            coords.extend(p.iter().map(|x| x * radius / r));
        } else if r <= radius {
            coords.extend_from_slice(&p);
        }
    }
    Lattice {
        n,
        radius,
        spacing,
        coords,
    }
}

/// Local lattice around `center` at a quarter of the spacing, kept in the ball.
fn refinement_points(center: &[f64], spacing: f64, radius: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let h = spacing / 4.0;
    let count = 5usize.pow(n as u32);
    let mut out = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rest = flat;
        let mut p = center.to_vec();
        for x in p.iter_mut() {
            *x += h * ((rest % 5) as f64 - 2.0);
            rest /= 5;
        }
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > radius {
            p.iter_mut().for_each(|x| *x *= radius / r);
        }
        out.push(p);
    }
    out
}

/// Point-wise quantities needed by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSample {
    pub grad_norm: f64,
    pub causal: CausalType,
    pub tilt: Option<f64>,
    pub mean_curvature: Option<f64>,
}

pub fn sample_node<S: HeightField + ?Sized>(s: &S, p: &[f64], tau: f64) -> Result<NodeSample> {
    let jet = s.jet(p)?;
    let causal = CausalType::from_grad_norm_sq(jet.grad_norm_sq(), tau);
    let grad_norm = jet.grad_norm();
    Ok(NodeSample {
        grad_norm,
        causal,
        tilt: (causal != CausalType::LightLike).then(|| tilt_of_grad_norm(grad_norm)),
        mean_curvature: mean_curvature_of_jet(&jet, tau),
    })
}

fn sample_points<'a, S, I>(s: &S, points: I, tau: f64) -> Result<Vec<NodeSample>>
where
    S: HeightField + ?Sized,
    I: IndexedParallelIterator<Item = &'a [f64]>,
{
    let raw: Vec<Result<NodeSample>> = points.map(|p| sample_node(s, p, tau)).collect();
    raw.into_iter().collect()
}

pub fn sample_lattice<S: HeightField + ?Sized>(
    s: &S,
    lattice: &Lattice,
    tau: f64,
) -> Result<Vec<NodeSample>> {
    sample_points(s, lattice.coords.par_chunks_exact(lattice.n), tau)
}

/// The single causal type shared by all samples.
pub fn uniform_causal(lattice: &Lattice, samples: &[NodeSample]) -> Result<CausalType> {
    let mut expected = None;
    for (i, sample) in samples.iter().enumerate() {
        if sample.causal == CausalType::LightLike {
            return Err(Error::LightLike {
                quantity: "uniform causal type",
                point: lattice.point(i).to_vec(),
            });
        }
        match expected {
            None => expected = Some(sample.causal),
            Some(t) if t != sample.causal => {
                return Err(Error::MixedCausalType {
                    expected: t,
                    found: sample.causal,
                    point: lattice.point(i).to_vec(),
                })
            }
            _ => {}
        }
    }
    expected.ok_or_else(|| Error::InvalidParameter("empty sample lattice".into()))
}

/// Index of the best sample under `key` (first one wins ties).
fn extremum<F>(samples: &[NodeSample], mut key: F, maximize: bool) -> Option<(usize, f64)>
where
    F: FnMut(usize, &NodeSample) -> Option<f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, sample) in samples.iter().enumerate() {
        if let Some(v) = key(i, sample) {
            let better = match best {
                None => true,
                Some((_, b)) => (maximize && v > b) || (!maximize && v < b),
            };
            if better {
                best = Some((i, v));
            }
        }
    }
    best
}

/// Refine an extremum of `key` around `center`.
fn refine<S, F>(
    s: &S,
    center: &[f64],
    lattice: &Lattice,
    tau: f64,
    key: F,
    maximize: bool,
    current: f64,
) -> Result<f64>
where
    S: HeightField + ?Sized,
    F: Fn(&[f64], &NodeSample) -> Option<f64>,
{
    let pts = refinement_points(center, lattice.spacing, lattice.radius);
    let mut best = current;
    for p in &pts {
        let sample = sample_node(s, p, tau)?;
        if let Some(v) = key(p, &sample) {
            if (maximize && v > best) || (!maximize && v < best) {
                best = v;
            }
        }
    }
    Ok(best)
}

fn norm_sq(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    Ok(())
}

/// Fitted constants of the gradient bound `tilt <= M |u|^{2k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundFit {
    #[serde(rename = "M")]
    pub m: f64,
    pub k: f64,
    pub valid: bool,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lattice_spacing: f64,
    pub argmax: Vec<f64>,
}

/// Smallest `M` with `tilt(u) <= M (|u|^2)^k` at every lattice node. The origin
/// is skipped when `k > 0`, where the ratio is `0/0`. `M` is floored at the
/// smallest positive double.
pub fn fit_gradient_bound<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    k: f64,
    opts: &CheckOptions,
) -> Result<BoundFit> {
    check_radius(radius)?;
    let n = s.dim();
    let origin = vec![0.0; n];
    if k > 0.0 {
        let at_origin = sample_node(s, &origin, opts.tau)?;
        match at_origin.tilt {
            None => {
                return Err(Error::LightLike {
                    quantity: "tilt",
                    point: origin,
                })
            }
            Some(t) if t > HYPOTHESIS_SLACK => {
                return Err(Error::UnboundedFit(format!(
                    "k = {k} > 0 but the tilt at the origin is {t}"
                )))
            }
            _ => {}
        }
    }
    let lattice = ball_lattice(n, radius, opts.sampling_for(n).per_axis);
    let samples = sample_lattice(s, &lattice, opts.tau)?;
    let ratio = |p: &[f64], sample: &NodeSample| -> Option<f64> {
        let r2 = norm_sq(p);
        if r2 == 0.0 && k > 0.0 {
            return None;
        }
        sample.tilt.map(|t| t / r2.powf(k))
    };
    for (i, sample) in samples.iter().enumerate() {
        if sample.causal == CausalType::LightLike {
            return Err(Error::LightLike {
                quantity: "tilt",
                point: lattice.point(i).to_vec(),
            });
        }
    }
    let (arg, mut sup) = extremum(&samples, |i, smp| ratio(lattice.point(i), smp), true)
        .unwrap_or((0, 0.0));
    if opts.sampling_for(n).refine {
        sup = refine(s, lattice.point(arg), &lattice, opts.tau, ratio, true, sup)?;
    }
    Ok(BoundFit {
        m: sup.max(f64::MIN_POSITIVE),
        k,
        valid: sup.is_finite(),
        radius,
        lattice_spacing: lattice.spacing,
        argmax: lattice.point(arg).to_vec(),
    })
}

/// Flux of `grad psi / sqrt|1 - |grad psi|^2|` through the sphere of radius `radius`.
pub fn integrate_sphere_flux<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    q: &QuadratureSpec,
    tau: f64,
) -> Result<Estimate> {
    integrate_sphere(
        |p, normal| {
            let jet = s.jet(p)?;
            let g2 = jet.grad_norm_sq();
            if CausalType::from_grad_norm_sq(g2, tau) == CausalType::LightLike {
                return Err(Error::LightLike {
                    quantity: "boundary flux",
                    point: p.to_vec(),
                });
            }
            let w = (1.0 - g2).abs().sqrt();
            let dot: f64 = jet.gradient.iter().zip(normal).map(|(g, nv)| g * nv).sum();
            Ok(dot / w)
        },
        s.dim(),
        radius,
        q,
    )
}

/// Integral of `n H` over the ball, requiring every node to have causal type `expected`.
fn integrate_mean_curvature<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    q: &QuadratureSpec,
    tau: f64,
    expected: CausalType,
) -> Result<Estimate> {
    let n = s.dim();
    integrate_ball(
        |p| {
            let sample = sample_node(s, p, tau)?;
            if sample.causal != expected {
                return Err(Error::MixedCausalType {
                    expected,
                    found: sample.causal,
                    point: p.to_vec(),
                });
            }
            Ok(n as f64 * sample.mean_curvature.unwrap_or_default())
        },
        BallDomain::new(n, radius)?,
        q,
    )
}

/// `int_B n H = int_{dB} omega` on the ball of radius `radius`.
pub fn stokes_check<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_radius(radius)?;
    let n = s.dim();
    let lattice = ball_lattice(n, radius, opts.sampling_for(n).per_axis);
    let causal = uniform_causal(&lattice, &sample_lattice(s, &lattice, opts.tau)?)?;
    let q = opts.quadrature_for(n);
    let lhs = integrate_mean_curvature(s, radius, &q, opts.tau, causal)?;
    let rhs = integrate_sphere_flux(s, radius, &q, opts.tau)?;
    Ok(
        CheckReport::identity("stokes", lhs.value, rhs.value, opts.tolerance, lhs.error + rhs.error)
            .with("R", radius)
            .with("n", n as f64)
            .with("resolution", q.resolution as f64)
            .with("lhs_error", lhs.error)
            .with("rhs_error", rhs.error),
    )
}

/// Heinz-type estimate `alpha <= M R^{2k-1}` with `alpha = inf |H|` over the ball.
///
/// The gradient bound is verified at every lattice node first; a violation is a
/// hypothesis failure.
pub fn heinz_check<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    m: f64,
    k: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_radius(radius)?;
    if !(m > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need M > 0 and finite k, got M = {m}, k = {k}"
        )));
    }
    let n = s.dim();
    let sampling = opts.sampling_for(n);
    let lattice = ball_lattice(n, radius, sampling.per_axis);
    let samples = sample_lattice(s, &lattice, opts.tau)?;
    uniform_causal(&lattice, &samples)?;
    for (i, sample) in samples.iter().enumerate() {
        let p = lattice.point(i);
        let tilt = sample.tilt.unwrap_or(f64::INFINITY);
        let bound = m * norm_sq(p).powf(k);
        if tilt > bound * (1.0 + HYPOTHESIS_SLACK) + HYPOTHESIS_SLACK {
            return Err(Error::Hypothesis {
                point: p.to_vec(),
                detail: format!("tilt {tilt} exceeds M |u|^(2k) = {bound}"),
            });
        }
    }
    let abs_h = |_: &[f64], smp: &NodeSample| smp.mean_curvature.map(f64::abs);
    let (arg, mut alpha) = extremum(&samples, |i, smp| abs_h(lattice.point(i), smp), false)
        .unwrap_or((0, 0.0));
    if sampling.refine {
        alpha = refine(s, lattice.point(arg), &lattice, opts.tau, abs_h, false, alpha)?;
    }
    let rhs = m * radius.powf(2.0 * k - 1.0);
    Ok(CheckReport::inequality("heinz", alpha, rhs, opts.tolerance)
        .with("alpha", alpha)
        .with("M", m)
        .with("k", k)
        .with("R", radius)
        .with("n", n as f64)
        .with("lattice_spacing", lattice.spacing))
}

/// `min |H| <= (1/n) m_D / sqrt|1 - m_D^2| * A(dB) / V(B)` on the ball.
pub fn salavessa_check<S: HeightField + ?Sized>(
    s: &S,
    radius: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    check_radius(radius)?;
    let n = s.dim();
    let sampling = opts.sampling_for(n);
    let lattice = ball_lattice(n, radius, sampling.per_axis);
    let samples = sample_lattice(s, &lattice, opts.tau)?;
    let causal = uniform_causal(&lattice, &samples)?;
    let space_like = causal == CausalType::SpaceLike;

    let grad = |_: &[f64], smp: &NodeSample| Some(smp.grad_norm);
    let (garg, mut m_d) = extremum(&samples, |i, smp| grad(lattice.point(i), smp), space_like)
        .unwrap_or((0, 0.0));
    let abs_h = |_: &[f64], smp: &NodeSample| smp.mean_curvature.map(f64::abs);
    let (harg, mut min_h) = extremum(&samples, |i, smp| abs_h(lattice.point(i), smp), false)
        .unwrap_or((0, 0.0));
    if sampling.refine {
        m_d = refine(s, lattice.point(garg), &lattice, opts.tau, grad, space_like, m_d)?;
        min_h = refine(s, lattice.point(harg), &lattice, opts.tau, abs_h, false, min_h)?;
    }
    if (1.0 - m_d * m_d).abs() <= opts.tau {
        return Err(Error::LightLike {
            quantity: "m_D",
            point: lattice.point(garg).to_vec(),
        });
    }
    let (vol, area) = unit_ball_constants(n)?;
    let ratio = (area * radius.powi(n as i32 - 1)) / (vol * radius.powi(n as i32));
    let rhs = tilt_of_grad_norm(m_d) * ratio / n as f64;
    Ok(CheckReport::inequality("salavessa", min_h, rhs, opts.tolerance)
        .with("m_D", m_d)
        .with("R", radius)
        .with("n", n as f64)
        .with("V_n", vol)
        .with("A_{n-1}", area)
        .with("lattice_spacing", lattice.spacing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Catalog, GraphSurface};

    fn hyperboloid(n: usize, h: f64) -> GraphSurface {
        Catalog::Hyperboloid { n, h }.build().unwrap()
    }

    fn plane(a: Vec<f64>) -> GraphSurface {
        let n = a.len();
        Catalog::Hyperplane { n, a, b: 1.0 }.build().unwrap()
    }

    #[test]
    fn lattice_contains_origin_and_boundary() {
        let l = ball_lattice(2, 3.0, 9);
        assert!(l.points().any(|p| p == [0.0, 0.0]));
        let max_r = l.points().map(|p| norm_sq(p).sqrt()).fold(0.0, f64::max);
        assert!((max_r - 3.0).abs() < 1e-12);
        assert!(l.points().all(|p| norm_sq(p).sqrt() <= 3.0 + 1e-12));
    }

    #[test]
    fn fit_examples() {
        let opts = CheckOptions::default();
        for (n, h) in [(2, 1.0), (3, 2.0)] {
            let fit = fit_gradient_bound(&hyperboloid(n, h), 4.0, 0.5, &opts).unwrap();
            assert!((fit.m - h).abs() < 1e-12, "{}", fit.m);
            assert!(fit.valid);
        }
        let fit = fit_gradient_bound(&plane(vec![0.6, 0.0]), 2.0, 0.0, &opts).unwrap();
        assert!((fit.m - 0.75).abs() < 1e-14);
        let tl = GraphSurface::parse("u1 + u2", 2).unwrap();
        let fit = fit_gradient_bound(&tl, 2.0, 0.0, &opts).unwrap();
        assert!((fit.m - 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            fit_gradient_bound(&plane(vec![0.6, 0.0]), 2.0, 0.5, &opts),
            Err(Error::UnboundedFit(_))
        ));
    }

    #[test]
    fn heinz_examples() {
        let opts = CheckOptions::default();
        let r = heinz_check(&hyperboloid(2, 1.0), 3.0, 1.0, 0.5, &opts).unwrap();
        assert!(r.passed && (r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-15);

        let p = plane(vec![0.6, 0.0]);
        let fit = fit_gradient_bound(&p, 5.0, 0.0, &opts).unwrap();
        let r = heinz_check(&p, 5.0, fit.m, 0.0, &opts).unwrap();
        assert!(r.passed && r.lhs == 0.0 && (r.rhs - 0.15).abs() < 1e-14);

        let r = heinz_check(&hyperboloid(3, 2.0), 10.0, 2.0, 0.5, &opts).unwrap();
        assert!(r.passed && (r.lhs - 2.0).abs() < 1e-10);

        // M too small: hypothesis violated at some node
        let err = heinz_check(&hyperboloid(2, 1.0), 3.0, 0.5, 0.5, &opts).unwrap_err();
        assert!(err.is_hypothesis_failure());
    }

    #[test]
    fn salavessa_examples() {
        let opts = CheckOptions::default();
        let r = salavessa_check(&hyperboloid(2, 1.0), 1.0, &opts).unwrap();
        assert!((r.metadata["m_D"] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.rhs - 1.0).abs() < 1e-12 && (r.lhs - 1.0).abs() < 1e-12 && r.passed);
        for radius in [0.3, 2.0, 7.0] {
            let r = salavessa_check(&hyperboloid(3, 0.5), radius, &opts).unwrap();
            assert!((r.rhs - 0.5).abs() < 1e-10 && r.passed);
        }
        let r = salavessa_check(&plane(vec![0.6, 0.0]), 3.0, &opts).unwrap();
        assert!(r.lhs == 0.0 && (r.rhs - 0.25).abs() < 1e-14 && r.passed);
    }

    #[test]
    fn stokes_examples() {
        let opts = CheckOptions::default();
        let r = stokes_check(&hyperboloid(2, 1.0), 1.0, &opts).unwrap();
        assert!((r.lhs - 2.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!((r.rhs - 2.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(r.passed);
        let r = stokes_check(&plane(vec![0.2, 0.1, -0.3]), 2.0, &opts).unwrap();
        assert!(r.lhs == 0.0 && r.rhs.abs() < 1e-12 && r.passed);
        let tr = Catalog::Translation { n: 2, h: "exp(u1)".into() }.build().unwrap();
        let r = stokes_check(&tr, 1.0, &opts).unwrap();
        assert!(r.lhs.abs() < 1e-9 && r.rhs.abs() < 1e-12 && r.passed);
    }

    #[test]
    fn mixed_domains_are_rejected() {
        let opts = CheckOptions::default();
        let mixed = GraphSurface::parse("u1^2", 1).unwrap();
        assert!(matches!(
            stokes_check(&mixed, 2.0, &opts),
            Err(Error::MixedCausalType { .. }) | Err(Error::LightLike { .. })
        ));
        let ll = Catalog::LightlikePlane { n: 2 }.build().unwrap();
        assert!(matches!(salavessa_check(&ll, 1.0, &opts), Err(Error::LightLike { .. })));
    }

    #[test]
    fn flux_of_hyperboloid_disk() {
        let q = QuadratureSpec::tensor_polar(64);
        let e = integrate_sphere_flux(&hyperboloid(2, 1.0), 1.0, &q, 1e-9).unwrap();
        assert!((e.value - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let e = integrate_sphere_flux(&plane(vec![0.3, 0.4]), 3.0, &q, 1e-9).unwrap();
        assert!(e.value.abs() < 1e-12);
    }
}
