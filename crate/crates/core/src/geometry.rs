//! Point-wise geometry of a graph `Gamma_psi = {(u, psi(u))}` in Lorentz-Minkowski
//! space `R^{n+1}_1` with metric `x1 y1 + ... + xn yn - x_{n+1} y_{n+1}`.
//!
//! Everything here is derived from the second-order jet of `psi`. The normal is
//! oriented with positive last component; at time-like points the sign of the
//! mean curvature follows the divergence of `grad psi / sqrt(|grad psi|^2 - 1)`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, Func, Jet, Node};

/// Width of the light-like band on `|1 - |grad psi|^2|`.
pub const DEFAULT_LIGHTLIKE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalType {
    SpaceLike,
    TimeLike,
    LightLike,
}

impl fmt::Display for CausalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CausalType::SpaceLike => "space-like",
            CausalType::TimeLike => "time-like",
            CausalType::LightLike => "light-like",
        })
    }
}

impl CausalType {
    /// Classify from `|grad psi|^2`.
    pub fn from_grad_norm_sq(grad_norm_sq: f64, tau: f64) -> CausalType {
        if grad_norm_sq < 1.0 - tau {
            CausalType::SpaceLike
        } else if grad_norm_sq > 1.0 + tau {
            CausalType::TimeLike
        } else {
            CausalType::LightLike
        }
    }
}

/// Anything that can produce a height jet at a point of `R^n`.
///
/// Implemented by [`GraphSurface`] and by interpolated solver output, so the
/// verification routines apply to both.
pub trait HeightField: Sync {
    fn dim(&self) -> usize;
    fn jet(&self, point: &[f64]) -> Result<Jet>;
}

/// Exact values recorded for catalog surfaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub name: String,
    pub mean_curvature: Option<f64>,
    pub causal: CausalType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSurface {
    psi: Expression,
    reference: Option<Reference>,
}

impl GraphSurface {
    pub fn new(psi: Expression) -> Self {
        GraphSurface {
            psi,
            reference: None,
        }
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Ok(GraphSurface::new(Expression::parse(text, n)?))
    }

    pub fn n(&self) -> usize {
        self.psi.arity()
    }

    pub fn psi(&self) -> &Expression {
        &self.psi
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    /// The graph of `-psi`.
    pub fn negated(&self) -> GraphSurface {
        let root = Node::Neg(Box::new(self.psi.root().clone()));
        GraphSurface::new(Expression::from_node(root, self.n()).expect("same arity"))
    }
}

impl HeightField for GraphSurface {
    fn dim(&self) -> usize {
        self.n()
    }

    fn jet(&self, point: &[f64]) -> Result<Jet> {
        self.psi.evaluate_jet(point)
    }
}

/// Tilt `t / sqrt(|1 - t^2|)` as a function of the gradient norm `t`.
pub fn tilt_of_grad_norm(t: f64) -> f64 {
    t / (1.0 - t * t).abs().sqrt()
}

/// Mean curvature from a jet, `None` when the point is light-like.
///
/// Space-like: `[(1-|g|^2) lap + g^T Hess g] / [n (1-|g|^2)^{3/2}]`.
/// Time-like: `[(|g|^2-1) lap - g^T Hess g] / [n (|g|^2-1)^{3/2}]`.
pub fn mean_curvature_of_jet(jet: &Jet, tau: f64) -> Option<f64> {
    let n = jet.dim() as f64;
    let g2 = jet.grad_norm_sq();
    let lap = jet.laplacian();
    let quad = jet.hessian_quadratic_form();
    match CausalType::from_grad_norm_sq(g2, tau) {
        CausalType::SpaceLike => {
            let w2 = 1.0 - g2;
            Some((w2 * lap + quad) / (n * w2 * w2.sqrt()))
        }
        CausalType::TimeLike => {
            let w2 = g2 - 1.0;
            Some((w2 * lap - quad) / (n * w2 * w2.sqrt()))
        }
        CausalType::LightLike => None,
    }
}

pub fn classify_point<S: HeightField + ?Sized>(s: &S, p: &[f64], tau: f64) -> Result<CausalType> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "light-like tolerance must be positive, got {tau}"
        )));
    }
    Ok(CausalType::from_grad_norm_sq(s.jet(p)?.grad_norm_sq(), tau))
}

pub fn tilt<S: HeightField + ?Sized>(s: &S, p: &[f64]) -> Result<f64> {
    let jet = s.jet(p)?;
    match CausalType::from_grad_norm_sq(jet.grad_norm_sq(), DEFAULT_LIGHTLIKE_TOLERANCE) {
        CausalType::LightLike => Err(Error::LightLike {
            quantity: "tilt",
            point: p.to_vec(),
        }),
        _ => Ok(tilt_of_grad_norm(jet.grad_norm())),
    }
}

fn space_like_jet<S: HeightField + ?Sized>(s: &S, p: &[f64], quantity: &'static str) -> Result<Jet> {
    let jet = s.jet(p)?;
    match CausalType::from_grad_norm_sq(jet.grad_norm_sq(), DEFAULT_LIGHTLIKE_TOLERANCE) {
        CausalType::SpaceLike => Ok(jet),
        causal => Err(Error::NotSpaceLike {
            quantity,
            point: p.to_vec(),
            causal,
        }),
    }
}

/// Hyperbolic angle between the unit normal and `e_{n+1}`.
pub fn hyperbolic_angle<S: HeightField + ?Sized>(s: &S, p: &[f64]) -> Result<f64> {
    let jet = space_like_jet(s, p, "hyperbolic angle")?;
    Ok(tilt_of_grad_norm(jet.grad_norm()).asinh())
}

/// Future-pointing time-like unit normal `(grad psi, 1) / sqrt(1 - |grad psi|^2)`.
pub fn unit_normal<S: HeightField + ?Sized>(s: &S, p: &[f64]) -> Result<Vec<f64>> {
    let jet = space_like_jet(s, p, "unit normal")?;
    let w = (1.0 - jet.grad_norm_sq()).sqrt();
    let mut nu: Vec<f64> = jet.gradient.iter().map(|g| g / w).collect();
    nu.push(1.0 / w);
    Ok(nu)
}

/// Lorentzian inner product on `R^{n+1}_1`; the last coordinate is time.
pub fn lorentz_inner(x: &[f64], y: &[f64]) -> f64 {
    let (last, head) = (x.len() - 1, x.len() - 1);
    let space: f64 = x[..head].iter().zip(&y[..head]).map(|(a, b)| a * b).sum();
    space - x[last] * y[last]
}

pub fn mean_curvature<S: HeightField + ?Sized>(s: &S, p: &[f64]) -> Result<f64> {
    let jet = s.jet(p)?;
    mean_curvature_of_jet(&jet, DEFAULT_LIGHTLIKE_TOLERANCE).ok_or_else(|| Error::LightLike {
        quantity: "mean curvature",
        point: p.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricData {
    /// `g_ij = delta_ij - psi_i psi_j`.
    pub g: Vec<Vec<f64>>,
    pub det: f64,
}

impl MetricData {
    pub fn causal(&self, tau: f64) -> CausalType {
        if self.det.abs() <= tau {
            CausalType::LightLike
        } else if self.det > 0.0 {
            CausalType::SpaceLike
        } else {
            CausalType::TimeLike
        }
    }
}

pub fn induced_metric<S: HeightField + ?Sized>(s: &S, p: &[f64]) -> Result<MetricData> {
    let jet = s.jet(p)?;
    let n = jet.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - jet.gradient[i] * jet.gradient[j]
    });
    let det = m.clone().lu().determinant();
    let g = (0..n).map(|i| m.row(i).iter().copied().collect()).collect();
    Ok(MetricData { g, det })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub grad_norm: f64,
    pub causal: CausalType,
    pub tilt: Option<f64>,
    pub sinh_theta: Option<f64>,
    pub mean_curvature: Option<f64>,
}

pub fn point_report<S: HeightField + ?Sized>(s: &S, p: &[f64], tau: f64) -> Result<PointReport> {
    let jet = s.jet(p)?;
    let causal = CausalType::from_grad_norm_sq(jet.grad_norm_sq(), tau);
    let grad_norm = jet.grad_norm();
    let tilt = (causal != CausalType::LightLike).then(|| tilt_of_grad_norm(grad_norm));
    Ok(PointReport {
        point: p.to_vec(),
        grad_norm,
        causal,
        tilt,
        sinh_theta: if causal == CausalType::SpaceLike { tilt } else { None },
        mean_curvature: mean_curvature_of_jet(&jet, tau),
    })
}

/// Closed-form surfaces with known mean curvature and causal type.
#[derive(Debug, Clone, PartialEq)]
pub enum Catalog {
    /// `sqrt(|u|^2 + 1/H^2)`, space-like with constant mean curvature `H`.
    Hyperboloid { n: usize, h: f64 },
    /// `a . u + b`.
    Hyperplane { n: usize, a: Vec<f64>, b: f64 },
    /// `u_n + h(u1)` with `h' > 0`; time-like and minimal.
    Translation { n: usize, h: String },
    /// `u1`.
    LightlikePlane { n: usize },
}

fn sum_nodes(mut terms: Vec<Node>) -> Node {
    let first = terms.remove(0);
    terms
        .into_iter()
        .fold(first, |acc, t| Node::Add(Box::new(acc), Box::new(t)))
}

impl Catalog {
    pub fn names() -> &'static [&'static str] {
        &["hyperboloid", "hyperplane", "translation", "lightlike_plane"]
    }

    pub fn build(&self) -> Result<GraphSurface> {
        match self {
            Catalog::Hyperboloid { n, h } => {
                check_dim(*n)?;
                if !(*h > 0.0) || !h.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "hyperboloid needs H > 0, got {h}"
                    )));
                }
                let mut terms: Vec<Node> = (0..*n)
                    .map(|i| Node::Pow(Box::new(Node::Var(i)), 2.0))
                    .collect();
                terms.push(Node::Const(1.0 / (h * h)));
                let root = Node::Call(Func::Sqrt, Box::new(sum_nodes(terms)));
                Ok(with_reference(root, *n, "hyperboloid", Some(*h), CausalType::SpaceLike))
            }
            Catalog::Hyperplane { n, a, b } => {
                check_dim(*n)?;
                if a.len() != *n {
                    return Err(Error::InvalidParameter(format!(
                        "hyperplane slope has {} components, expected {n}",
                        a.len()
                    )));
                }
                let norm_sq: f64 = a.iter().map(|x| x * x).sum();
                let causal = CausalType::from_grad_norm_sq(norm_sq, DEFAULT_LIGHTLIKE_TOLERANCE);
                if causal == CausalType::LightLike {
                    return Err(Error::InvalidParameter(
                        "hyperplane with |a| = 1 is light-like; use lightlike_plane".into(),
                    ));
                }
                let mut terms: Vec<Node> = a
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, c)| Node::Mul(Box::new(Node::Const(*c)), Box::new(Node::Var(i))))
                    .collect();
                terms.push(Node::Const(*b));
                Ok(with_reference(sum_nodes(terms), *n, "hyperplane", Some(0.0), causal))
            }
            Catalog::Translation { n, h } => {
                if *n < 2 {
                    return Err(Error::InvalidParameter(
                        "translation surface needs n >= 2".into(),
                    ));
                }
                let profile = Expression::parse(h, 1)?;
                // h' > 0 on a probe window; entire-ness is the caller's responsibility
                for i in 0..=200 {
                    let t = -10.0 + 0.1 * i as f64;
                    let slope = profile.evaluate_jet(&[t])?.gradient[0];
                    if !(slope > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "translation profile needs h' > 0, h'({t}) = {slope}"
                        )));
                    }
                }
                let root = Node::Add(Box::new(Node::Var(n - 1)), Box::new(profile.root().clone()));
                Ok(with_reference(root, *n, "translation", Some(0.0), CausalType::TimeLike))
            }
            Catalog::LightlikePlane { n } => {
                check_dim(*n)?;
                Ok(with_reference(
                    Node::Var(0),
                    *n,
                    "lightlike_plane",
                    None,
                    CausalType::LightLike,
                ))
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

fn with_reference(
    root: Node,
    n: usize,
    name: &str,
    mean_curvature: Option<f64>,
    causal: CausalType,
) -> GraphSurface {
    GraphSurface {
        psi: Expression::from_node(root, n).expect("catalog trees respect arity"),
        reference: Some(Reference {
            name: name.to_string(),
            mean_curvature,
            causal,
        }),
    }
}
