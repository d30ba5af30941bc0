//! Growth probes over increasing radii for the vanishing criteria.
//!
//! A probe can only collect evidence: it tabulates the relevant constants per
//! radius and classifies the trend. It never claims sharpness.

use serde::Serialize;

use super::{
    ball_lattice, fit_gradient_bound, sample_lattice, uniform_causal, CheckOptions, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::geometry::{CausalType, HeightField};

/// Relative growth of `M_R` over the last radius step beyond which the
/// gradient bound is treated as not holding globally.
pub const STABILITY_TOLERANCE: f64 = 1e-3;

/// Growth exponent of `sup 1/sqrt(1 - |grad psi|^2)` over the last radius step
/// that still counts as evidence for `o(r)`.
pub const SUBLINEAR_EXPONENT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithVanishing,
    HypothesisFails,
    TheoremViolation,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithVanishing => "consistent-with-vanishing",
            Verdict::HypothesisFails => "hypothesis-fails",
            Verdict::TheoremViolation => "theorem-violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinRow {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "M_R")]
    pub m: f64,
    #[serde(rename = "alpha_R")]
    pub alpha: f64,
    /// `M_R R^{-2 eps}`.
    pub ceiling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinProbe {
    pub check: String,
    pub eps: f64,
    pub k: f64,
    pub rows: Vec<BernsteinRow>,
    pub verdict: Verdict,
    pub reason: String,
    pub ceiling_decreasing: bool,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("radius list is empty".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(format!(
            "radii must be positive and strictly increasing, got {radii:?}"
        )));
    }
    Ok(())
}

fn abs_h_range(samples: &[super::NodeSample]) -> (f64, f64, f64, f64) {
    let mut min_abs = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for h in samples.iter().filter_map(|s| s.mean_curvature) {
        min_abs = min_abs.min(h.abs());
        max_abs = max_abs.max(h.abs());
        lo = lo.min(h);
        hi = hi.max(h);
    }
    (min_abs, max_abs, lo, hi)
}

/// Tabulate `M_R` (with `k = 1/2 - eps`), `alpha_R = inf |H|` and the Heinz
/// ceiling `M_R R^{-2 eps}` over `radii`.
pub fn bernstein_probe<S: HeightField + ?Sized>(
    s: &S,
    eps: f64,
    radii: &[f64],
    opts: &CheckOptions,
) -> Result<BernsteinProbe> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    check_radii(radii)?;
    let n = s.dim();
    let k = 0.5 - eps;
    let per_axis = opts.sampling_for(n).per_axis;
    let largest = ball_lattice(n, radii[radii.len() - 1], per_axis);
    uniform_causal(&largest, &sample_lattice(s, &largest, opts.tau)?)?;

    let mut probe = BernsteinProbe {
        check: "bernstein".into(),
        eps,
        k,
        rows: Vec::new(),
        verdict: Verdict::ConsistentWithVanishing,
        reason: String::new(),
        ceiling_decreasing: true,
    };
    for &radius in radii {
        let fit = match fit_gradient_bound(s, radius, k, opts) {
            Ok(fit) => fit,
            Err(e) if e.is_hypothesis_failure() => {
                probe.verdict = Verdict::HypothesisFails;
                probe.reason = format!("at R = {radius}: {e}");
                return Ok(probe);
            }
            Err(e) => return Err(e),
        };
        let lattice = ball_lattice(n, radius, per_axis);
        let samples = sample_lattice(s, &lattice, opts.tau)?;
        let (alpha, ..) = abs_h_range(&samples);
        probe.rows.push(BernsteinRow {
            radius,
            m: fit.m,
            alpha,
            ceiling: fit.m * radius.powf(-2.0 * eps),
        });
    }
    let rows = &probe.rows;
    probe.ceiling_decreasing = rows.windows(2).all(|w| w[1].ceiling <= w[0].ceiling);
    if let [.., prev, last] = rows.as_slice() {
        if last.m > prev.m * (1.0 + STABILITY_TOLERANCE) + f64::MIN_POSITIVE {
            probe.verdict = Verdict::HypothesisFails;
            probe.reason = format!(
                "M_R keeps growing ({} at R = {} to {} at R = {})",
                prev.m, prev.radius, last.m, last.radius
            );
            return Ok(probe);
        }
    }
    if let Some(row) = rows.iter().find(|r| r.alpha > r.ceiling + opts.tolerance) {
        probe.verdict = Verdict::TheoremViolation;
        probe.reason = format!(
            "alpha_R = {} exceeds the ceiling {} at R = {}",
            row.alpha, row.ceiling, row.radius
        );
        return Ok(probe);
    }
    probe.reason = "alpha_R stays below a ceiling that decays like R^(-2 eps)".into();
    Ok(probe)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DongRow {
    #[serde(rename = "R")]
    pub radius: f64,
    /// `sup 1/sqrt(1 - |grad psi|^2)` over the ball.
    pub sup_inv_width: f64,
    /// `sup_inv_width / R`.
    pub ratio: f64,
    pub max_abs_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DongProbe {
    pub check: String,
    pub rows: Vec<DongRow>,
    pub ratio_decays: bool,
    /// Growth exponent of `sup_inv_width` over the last radius step.
    pub growth_exponent: f64,
    pub mean_curvature_vanishes: bool,
    pub constant_mean_curvature: bool,
    pub verdict: Verdict,
    pub reason: String,
}

/// Evidence for `1/sqrt(1 - |grad psi|^2) = o(r)` and for `H = 0` on a
/// space-like graph.
pub fn dong_condition_probe<S: HeightField + ?Sized>(
    s: &S,
    radii: &[f64],
    opts: &CheckOptions,
) -> Result<DongProbe> {
    check_radii(radii)?;
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("the decay probe needs at least two radii".into()));
    }
    let n = s.dim();
    let per_axis = opts.sampling_for(n).per_axis;
    let tol = if opts.tolerance > 0.0 { opts.tolerance } else { DEFAULT_TOLERANCE };
    let mut rows = Vec::new();
    let (mut lo, mut hi, mut max_abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &radius in radii {
        let lattice = ball_lattice(n, radius, per_axis);
        let samples = sample_lattice(s, &lattice, opts.tau)?;
        for (i, smp) in samples.iter().enumerate() {
            if smp.causal != CausalType::SpaceLike {
                return Err(Error::NotSpaceLike {
                    quantity: "decay probe",
                    point: lattice.point(i).to_vec(),
                    causal: smp.causal,
                });
            }
        }
        let sup = samples
            .iter()
            .map(|smp| 1.0 / (1.0 - smp.grad_norm * smp.grad_norm).sqrt())
            .fold(0.0, f64::max);
        let (_, r_max, r_lo, r_hi) = abs_h_range(&samples);
        lo = lo.min(r_lo);
        hi = hi.max(r_hi);
        max_abs = max_abs.max(r_max);
        rows.push(DongRow {
            radius,
            sup_inv_width: sup,
            ratio: sup / radius,
            max_abs_h: r_max,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let (prev, last) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let growth_exponent =
        (last.sup_inv_width / prev.sup_inv_width).ln() / (last.radius / prev.radius).ln();
    let ratio_decays = decreasing && growth_exponent <= SUBLINEAR_EXPONENT;
    let vanishes = max_abs <= tol;
    let constant = hi - lo <= tol;
    let (verdict, reason) = if !ratio_decays {
        (
            Verdict::HypothesisFails,
            format!("sup/R does not decay (growth exponent {growth_exponent:.4})"),
        )
    } else if !constant {
        (
            Verdict::HypothesisFails,
            "mean curvature is not constant on the sampled balls".to_string(),
        )
    } else if !vanishes {
        (
            Verdict::TheoremViolation,
            format!("o(r) evidence but constant |H| = {max_abs}"),
        )
    } else {
        (
            Verdict::ConsistentWithVanishing,
            "sup/R decays and H vanishes".to_string(),
        )
    };
    Ok(DongProbe {
        check: "dong".into(),
        rows,
        ratio_decays,
        growth_exponent,
        mean_curvature_vanishes: vanishes,
        constant_mean_curvature: constant,
        verdict,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Catalog, GraphSurface};

    fn opts() -> CheckOptions {
        CheckOptions {
            sampling: Some(super::super::Sampling::new(41)),
            ..CheckOptions::default()
        }
    }

    #[test]
    fn bernstein_bounded_space_like_plane() {
        let plane = Catalog::Hyperplane { n: 2, a: vec![0.6, 0.0], b: 0.0 }.build().unwrap();
        let p = bernstein_probe(&plane, 0.5, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::ConsistentWithVanishing);
        for row in &p.rows {
            assert!((row.m - 0.75).abs() < 1e-14);
            assert_eq!(row.alpha, 0.0);
            assert!((row.ceiling - 0.75 / row.radius).abs() < 1e-14);
        }
        assert!(p.ceiling_decreasing);
    }

    #[test]
    fn bernstein_hyperboloid_breaks_hypothesis() {
        let hb = Catalog::Hyperboloid { n: 2, h: 1.0 }.build().unwrap();
        let p = bernstein_probe(&hb, 0.25, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::HypothesisFails);
    }

    #[test]
    fn bernstein_time_like_plane() {
        let tl = Catalog::Translation { n: 2, h: "u1".into() }.build().unwrap();
        let p = bernstein_probe(&tl, 0.5, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::ConsistentWithVanishing);
        assert!(p.rows.iter().all(|r| (r.m - 2f64.sqrt()).abs() < 1e-14 && r.alpha == 0.0));
    }

    #[test]
    fn bernstein_rejects_bad_inputs() {
        let plane = GraphSurface::parse("0.1*u1", 1).unwrap();
        assert!(bernstein_probe(&plane, 0.0, &[1.0], &opts()).is_err());
        assert!(bernstein_probe(&plane, 0.5, &[2.0, 1.0], &opts()).is_err());
    }

    #[test]
    fn dong_examples() {
        let plane = Catalog::Hyperplane { n: 2, a: vec![0.6, 0.0], b: 0.0 }.build().unwrap();
        let p = dong_condition_probe(&plane, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::ConsistentWithVanishing);
        assert!((p.rows[1].ratio - 0.125).abs() < 1e-14);

        let hb = Catalog::Hyperboloid { n: 2, h: 1.0 }.build().unwrap();
        let p = dong_condition_probe(&hb, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::HypothesisFails);
        assert!((p.rows[2].sup_inv_width - (1.0f64 + 1e4).sqrt()).abs() < 1e-9);

        let flat = GraphSurface::parse("3", 2).unwrap();
        let p = dong_condition_probe(&flat, &[1.0, 10.0, 100.0], &opts()).unwrap();
        assert_eq!(p.verdict, Verdict::ConsistentWithVanishing);
        assert_eq!(p.rows[2].ratio, 0.01);

        let tl = GraphSurface::parse("2*u1", 2).unwrap();
        assert!(matches!(
            dong_condition_probe(&tl, &[1.0, 2.0], &opts()),
            Err(Error::NotSpaceLike { .. })
        ));
    }
}
