use serde::Serialize;
use smallvec::smallvec;

use super::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::expr::Jet;
use crate::geometry::HeightField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    /// Iterates keep `|grad psi| <= 1 - delta_guard` at every unknown node.
    pub delta_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_iters: 50,
            max_halvings: 20,
            delta_guard: 1e-3,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) || self.max_iters == 0 || !(self.delta_guard > 0.0 && self.delta_guard < 1.0)
        {
            return Err(Error::InvalidParameter(format!("invalid solver configuration {self:?}")));
        }
        Ok(())
    }
}

/// Numerical constant-mean-curvature graph over the disk of radius `radius`,
/// stored on the `(2m+1) x (2m+1)` lattice covering `[-R, R]^2`.
///
/// Nodes strictly inside the disk are unknowns; the rest carry the boundary
/// field and act as Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub h_target: f64,
    pub radius: f64,
    pub m: usize,
    pub spacing: f64,
    /// Row-major by `u2`, then `u1`.
    pub values: Vec<f64>,
    pub unknown: Vec<bool>,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridHeader {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub m: usize,
    pub iterations: usize,
    pub final_residual: f64,
}

impl GridSolution {
    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.m as f64) * self.spacing
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.side() + i]
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            h: self.h_target,
            radius: self.radius,
            m: self.m,
            iterations: self.iterations,
            final_residual: self.final_residual,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u1", "u2", "psi"])?;
        let side = self.side();
        for j in 0..side {
            for i in 0..side {
                w.write_record(&[
                    self.coord(i).to_string(),
                    self.coord(j).to_string(),
                    self.value(i, j).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Largest `|psi - reference|` over the unknown nodes.
    pub fn max_error_against<S: HeightField + ?Sized>(&self, reference: &S) -> Result<f64> {
        let side = self.side();
        let mut err: f64 = 0.0;
        for j in 0..side {
            for i in 0..side {
                if self.unknown[j * side + i] {
                    let exact = reference.jet(&[self.coord(i), self.coord(j)])?.value;
                    err = err.max((self.value(i, j) - exact).abs());
                }
            }
        }
        Ok(err)
    }

    /// C^1 bicubic Hermite interpolant of the nodal values.
    pub fn interpolant(&self) -> GridSurface {
        GridSurface::new(self)
    }
}

/// Discrete first and second derivatives at an unknown node.
struct Stencil {
    a: f64,
    b: f64,
    xx: f64,
    yy: f64,
    xy: f64,
}

impl Stencil {
    fn at(values: &[f64], side: usize, k: usize, h: f64) -> Self {
        let c = values[k];
        let (e, w, n, s) = (values[k + 1], values[k - 1], values[k + side], values[k - side]);
        let (ne, nw) = (values[k + side + 1], values[k + side - 1]);
        let (se, sw) = (values[k - side + 1], values[k - side - 1]);
        Stencil {
            a: (e - w) / (2.0 * h),
            b: (n - s) / (2.0 * h),
            xx: (e - 2.0 * c + w) / (h * h),
            yy: (n - 2.0 * c + s) / (h * h),
            xy: (ne - nw - se + sw) / (4.0 * h * h),
        }
    }

    fn grad_norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// `(1-b^2) psi_xx + 2ab psi_xy + (1-a^2) psi_yy - 2H (1-a^2-b^2)^{3/2}`.
    fn operator(&self, h_target: f64) -> f64 {
        let s = (1.0 - self.a * self.a - self.b * self.b).max(0.0);
        (1.0 - self.b * self.b) * self.xx + 2.0 * self.a * self.b * self.xy + (1.0 - self.a * self.a) * self.yy
            - 2.0 * h_target * s * s.sqrt()
    }
}

/// Damped Newton iteration for the Dirichlet problem; exposes single steps.
pub struct DirichletSolver {
    sol: GridSolution,
    config: SolverConfig,
}

impl DirichletSolver {
    /// Set up the grid, the Dirichlet data and the clipped harmonic initial guess.
    pub fn new<F>(h_target: f64, radius: f64, boundary: F, m: usize, config: SolverConfig) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        config.validate()?;
        if m < 16 {
            return Err(Error::InvalidParameter(format!("need m >= 16, got {m}")));
        }
        if !(radius > 0.0) || !radius.is_finite() || !h_target.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need R > 0 and finite H, got R = {radius}, H = {h_target}"
            )));
        }
        let side = 2 * m + 1;
        let spacing = radius / m as f64;
        let mut sol = GridSolution {
            h_target,
            radius,
            m,
            spacing,
            values: vec![0.0; side * side],
            unknown: vec![false; side * side],
            iterations: 0,
            final_residual: f64::NAN,
            residual_history: Vec::new(),
        };
        for j in 0..side {
            for i in 0..side {
                let (x, y) = (sol.coord(i), sol.coord(j));
                let k = j * side + i;
                if x * x + y * y < radius * radius {
                    sol.unknown[k] = true;
                } else {
                    sol.values[k] = boundary(x, y)?;
                }
            }
        }
        let mut solver = DirichletSolver { sol, config };
        solver.harmonic_guess()?;
        solver.clip_to_guard()?;
        let res = solver.residual_sup(&solver.sol.values);
        solver.sol.final_residual = res;
        solver.sol.residual_history.push(res);
        Ok(solver)
    }

    fn side(&self) -> usize {
        self.sol.side()
    }

    fn harmonic_guess(&mut self) -> Result<()> {
        let side = self.side();
        let total = side * side;
        let mut a = BandMatrix::zeros(total, side + 1, side + 1);
        let mut rhs = vec![0.0; total];
        for k in 0..total {
            if self.sol.unknown[k] {
                a.add(k, k, -4.0);
                for nb in [k + 1, k - 1, k + side, k - side] {
                    a.add(k, nb, 1.0);
                }
            } else {
                a.add(k, k, 1.0);
                rhs[k] = self.sol.values[k];
            }
        }
        self.sol.values = a.solve(&rhs)?;
        Ok(())
    }

    fn first_guard_violation(&self, values: &[f64]) -> Option<usize> {
        let (side, h) = (self.side(), self.sol.spacing);
        let limit = 1.0 - self.config.delta_guard;
        (0..values.len()).find(|&k| self.sol.unknown[k] && !(Stencil::at(values, side, k, h).grad_norm() <= limit))
    }

    /// Replace violating nodes by the mean of their neighbours, at most 50 sweeps.
    fn clip_to_guard(&mut self) -> Result<()> {
        let side = self.side();
        let h = self.sol.spacing;
        let limit = 1.0 - self.config.delta_guard;
        for _ in 0..50 {
            if self.first_guard_violation(&self.sol.values).is_none() {
                return Ok(());
            }
            for k in 0..self.sol.values.len() {
                if self.sol.unknown[k] && Stencil::at(&self.sol.values, side, k, h).grad_norm() > limit {
                    let v = &self.sol.values;
                    self.sol.values[k] = 0.25 * (v[k + 1] + v[k - 1] + v[k + side] + v[k - side]);
                }
            }
        }
        match self.first_guard_violation(&self.sol.values) {
            None => Ok(()),
            Some(k) => Err(Error::CausalBreakdown { i: k % side, j: k / side }),
        }
    }

    fn residual_sup(&self, values: &[f64]) -> f64 {
        operator_sup(&self.sol, values)
    }

    pub fn solution(&self) -> &GridSolution {
        &self.sol
    }

    pub fn into_solution(self) -> GridSolution {
        self.sol
    }

    pub fn current_residual(&self) -> f64 {
        self.sol.final_residual
    }

    /// One damped Newton step.
    pub fn step(&mut self) -> Result<f64> {
        let side = self.side();
        let total = side * side;
        let h = self.sol.spacing;
        let ht = self.sol.h_target;
        let (h2, q) = (1.0 / (h * h), 1.0 / (4.0 * h * h));
        let mut jac = BandMatrix::zeros(total, side + 1, side + 1);
        let mut rhs = vec![0.0; total];
        for k in 0..total {
            if !self.sol.unknown[k] {
                jac.add(k, k, 1.0);
                continue;
            }
            let st = Stencil::at(&self.sol.values, side, k, h);
            let (a, b) = (st.a, st.b);
            let root = (1.0 - a * a - b * b).max(0.0).sqrt();
            let fa = 2.0 * b * st.xy - 2.0 * a * st.yy + 6.0 * ht * a * root;
            let fb = 2.0 * a * st.xy - 2.0 * b * st.xx + 6.0 * ht * b * root;
            let (cx, cy) = (1.0 - b * b, 1.0 - a * a);
            rhs[k] = -st.operator(ht);
            jac.add(k, k, -2.0 * (cx + cy) * h2);
            jac.add(k, k + 1, cx * h2 + fa / (2.0 * h));
            jac.add(k, k - 1, cx * h2 - fa / (2.0 * h));
            jac.add(k, k + side, cy * h2 + fb / (2.0 * h));
            jac.add(k, k - side, cy * h2 - fb / (2.0 * h));
            jac.add(k, k + side + 1, 2.0 * a * b * q);
            jac.add(k, k - side - 1, 2.0 * a * b * q);
            jac.add(k, k + side - 1, -2.0 * a * b * q);
            jac.add(k, k - side + 1, -2.0 * a * b * q);
        }
        let delta = jac.solve(&rhs)?;
        let old = self.sol.final_residual;
        let mut lambda = 1.0;
        let mut breakdown = None;
        for _ in 0..=self.config.max_halvings {
            let trial: Vec<f64> = self.sol.values.iter().zip(&delta).map(|(v, d)| v + lambda * d).collect();
            match self.first_guard_violation(&trial) {
                Some(k) => breakdown = Some(k),
                None => {
                    breakdown = None;
                    let res = self.residual_sup(&trial);
                    if res <= self.config.newton_tol || res <= (1.0 - 1e-4 * lambda) * old {
                        self.sol.values = trial;
                        self.sol.iterations += 1;
                        self.sol.final_residual = res;
                        self.sol.residual_history.push(res);
                        return Ok(res);
                    }
                }
            }
            lambda *= 0.5;
        }
        match breakdown {
            Some(k) => Err(Error::CausalBreakdown { i: k % side, j: k / side }),
            None => Err(Error::NonConvergence {
                history: self.sol.residual_history.clone(),
            }),
        }
    }

    /// Iterate until the residual drops below the tolerance, taking at least one step.
    pub fn run(mut self) -> Result<GridSolution> {
        loop {
            if self.sol.iterations > 0 && self.sol.final_residual <= self.config.newton_tol {
                return Ok(self.sol);
            }
            if self.sol.iterations >= self.config.max_iters {
                return Err(Error::NonConvergence {
                    history: self.sol.residual_history,
                });
            }
            self.step()?;
        }
    }
}

fn operator_sup(sol: &GridSolution, values: &[f64]) -> f64 {
    let side = sol.side();
    (0..values.len())
        .filter(|&k| sol.unknown[k])
        .map(|k| Stencil::at(values, side, k, sol.spacing).operator(sol.h_target).abs())
        .fold(0.0, f64::max)
}

/// Solve the expanded mean curvature equation with `n = 2` on the disk of
/// radius `radius`, with Dirichlet data `boundary(u1, u2)` on the grid nodes
/// outside the open disk.
pub fn solve_dirichlet_cmc<F>(h_target: f64, radius: f64, boundary: F, m: usize, config: SolverConfig) -> Result<GridSolution>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    DirichletSolver::new(h_target, radius, boundary, m, config)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub pde_residual: f64,
    pub reference_error: Option<f64>,
}

/// Recompute the discrete operator at all unknown nodes, and the nodal error
/// against `reference` when given.
pub fn residual(sol: &GridSolution, reference: Option<&dyn HeightField>) -> Result<ResidualReport> {
    Ok(ResidualReport {
        pde_residual: operator_sup(sol, &sol.values),
        reference_error: reference.map(|r| sol.max_error_against(r)).transpose()?,
    })
}

/// Bicubic Hermite interpolant of a [`GridSolution`] over `[-R, R]^2`.
///
/// Nodal slopes and cross derivatives come from fourth-order differences.
#[derive(Debug, Clone)]
pub struct GridSurface {
    side: usize,
    radius: f64,
    spacing: f64,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

/// Fourth-order first differences along one axis, shifted near the edges.
///
/// Second derivatives of the interpolant inherit the slope error divided by
/// the spacing, so second-order slopes would cap the curvature at first order.
fn difference(values: &[f64], side: usize, h: f64, along_x: bool) -> Vec<f64> {
    const EDGE: [[f64; 5]; 2] = [[-25.0, 48.0, -36.0, 16.0, -3.0], [-3.0, -10.0, 18.0, -6.0, 1.0]];
    const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    let stride = if along_x { 1 } else { side };
    let mut out = vec![0.0; values.len()];
    for j in 0..side {
        for i in 0..side {
            let k = j * side + i;
            let pos = if along_x { i } else { j };
            // stencil weights, first node offset and direction
            let (w, first, sign) = match pos {
                0 | 1 => (&EDGE[pos], k - pos * stride, 1.0),
                p if p + 2 >= side => (&EDGE[side - 1 - p], k + (side - 1 - p) * stride, -1.0),
                _ => (&CENTRAL, k - 2 * stride, 1.0),
            };
            let acc: f64 = (0..5)
                .map(|q| {
                    let node = if sign > 0.0 { first + q * stride } else { first - q * stride };
                    w[q] * values[node]
                })
                .sum();
            out[k] = sign * acc / (12.0 * h);
        }
    }
    out
}

/// Cubic Hermite basis: value, first and second derivative in `t`.
fn hermite(t: f64) -> [[f64; 3]; 4] {
    let (t2, t3) = (t * t, t * t * t);
    [
        [2.0 * t3 - 3.0 * t2 + 1.0, 6.0 * t2 - 6.0 * t, 12.0 * t - 6.0],
        [t3 - 2.0 * t2 + t, 3.0 * t2 - 4.0 * t + 1.0, 6.0 * t - 4.0],
        [-2.0 * t3 + 3.0 * t2, -6.0 * t2 + 6.0 * t, -12.0 * t + 6.0],
        [t3 - t2, 3.0 * t2 - 2.0 * t, 6.0 * t - 2.0],
    ]
}

impl GridSurface {
    pub fn new(sol: &GridSolution) -> Self {
        let side = sol.side();
        let h = sol.spacing;
        let fx = difference(&sol.values, side, h, true);
        let fy = difference(&sol.values, side, h, false);
        let fxy = difference(&fy, side, h, true);
        GridSurface {
            side,
            radius: sol.radius,
            spacing: h,
            f: sol.values.clone(),
            fx,
            fy,
            fxy,
        }
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let s = (x + self.radius) / self.spacing;
        let c = (s.floor().max(0.0) as usize).min(self.side - 2);
        (c, s - c as f64)
    }
}

impl HeightField for GridSurface {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, point: &[f64]) -> Result<Jet> {
        if point.len() != 2 {
            return Err(Error::Arity { expected: 2, got: point.len() });
        }
        let limit = self.radius * (1.0 + 1e-12);
        if !(point[0].abs() <= limit && point[1].abs() <= limit) {
            return Err(Error::domain(
                format!("({}, {})", point[0], point[1]),
                "outside the solution grid",
            ));
        }
        let h = self.spacing;
        let (ci, t) = self.cell(point[0]);
        let (cj, s) = self.cell(point[1]);
        let (bx, by) = (hermite(t), hermite(s));
        // (value, d/dt, d/ds, d2/dt2, d2/dtds, d2/ds2) in cell coordinates
        let mut acc = [0.0; 6];
        for (di, dj) in [(0usize, 0usize), (1, 0), (0, 1), (1, 1)] {
            let k = (cj + dj) * self.side + ci + di;
            let coeffs = [
                (self.f[k], 2 * di, 2 * dj),
                (h * self.fx[k], 2 * di + 1, 2 * dj),
                (h * self.fy[k], 2 * di, 2 * dj + 1),
                (h * h * self.fxy[k], 2 * di + 1, 2 * dj + 1),
            ];
            for (c, ix, iy) in coeffs {
                let (px, py) = (bx[ix], by[iy]);
                acc[0] += c * px[0] * py[0];
                acc[1] += c * px[1] * py[0];
                acc[2] += c * px[0] * py[1];
                acc[3] += c * px[2] * py[0];
                acc[4] += c * px[1] * py[1];
                acc[5] += c * px[0] * py[2];
            }
        }
        let (g, hh) = (1.0 / h, 1.0 / (h * h));
        Ok(Jet {
            value: acc[0],
            gradient: smallvec![acc[1] * g, acc[2] * g],
            hessian: smallvec![acc[3] * hh, acc[4] * hh, acc[4] * hh, acc[5] * hh],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mean_curvature, Catalog};

    fn hyperboloid_boundary(x: f64, y: f64) -> Result<f64> {
        Ok((x * x + y * y + 1.0).sqrt())
    }

    #[test]
    fn constant_and_plane_data_are_reproduced() {
        let cfg = SolverConfig::default();
        let sol = solve_dirichlet_cmc(0.0, 1.0, |_, _| Ok(3.0), 16, cfg).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.values.iter().all(|v| (v - 3.0).abs() < 1e-12));

        let sol = solve_dirichlet_cmc(0.0, 2.0, |x, _| Ok(0.3 * x + 2.0), 16, cfg).unwrap();
        let plane = crate::geometry::GraphSurface::parse("0.3*u1 + 2", 2).unwrap();
        let r = residual(&sol, Some(&plane)).unwrap();
        assert!(r.pde_residual <= 1e-10 && r.reference_error.unwrap() <= 1e-10);
    }

    #[test]
    fn hyperboloid_at_m32() {
        let sol = solve_dirichlet_cmc(1.0, 1.0, hyperboloid_boundary, 32, SolverConfig::default()).unwrap();
        let hb = Catalog::Hyperboloid { n: 2, h: 1.0 }.build().unwrap();
        let r = residual(&sol, Some(&hb)).unwrap();
        assert!(r.pde_residual <= 1e-10);
        assert!(r.reference_error.unwrap() <= 5e-3, "{:?}", r);
        assert!(sol.iterations <= 15);
        assert_eq!(r.pde_residual, sol.final_residual);
    }

    #[test]
    fn unconverged_bookkeeping() {
        let mut solver =
            DirichletSolver::new(1.0, 1.0, hyperboloid_boundary, 16, SolverConfig::default()).unwrap();
        solver.step().unwrap();
        let sol = solver.solution();
        assert!(sol.final_residual > 1e-10);
        assert_eq!(residual(sol, None).unwrap().pde_residual, sol.final_residual);
    }

    #[test]
    fn failures_are_reported() {
        let cfg = SolverConfig { max_iters: 1, ..SolverConfig::default() };
        assert!(matches!(
            solve_dirichlet_cmc(1.0, 1.0, hyperboloid_boundary, 16, cfg),
            Err(Error::NonConvergence { history }) if history.len() == 2
        ));
        // steep boundary data cannot be made space-like
        assert!(matches!(
            solve_dirichlet_cmc(0.0, 1.0, |x, _| Ok(if x > 0.0 { 5.0 } else { -5.0 }), 16, SolverConfig::default()),
            Err(Error::CausalBreakdown { .. })
        ));
        assert!(solve_dirichlet_cmc(0.0, 1.0, |_, _| Ok(0.0), 8, SolverConfig::default()).is_err());
    }

    #[test]
    fn interpolant_is_exact_on_quadratics() {
        let sol = solve_dirichlet_cmc(0.0, 1.0, |_, _| Ok(0.0), 16, SolverConfig::default()).unwrap();
        let mut sol = sol;
        let side = sol.side();
        for j in 0..side {
            for i in 0..side {
                let (x, y) = (sol.coord(i), sol.coord(j));
                sol.values[j * side + i] = 0.1 * x * x + 0.2 * x * y - 0.05 * y * y + 0.3 * x;
            }
        }
        let surf = sol.interpolant();
        let jet = surf.jet(&[0.123, -0.456]).unwrap();
        let (x, y) = (0.123, -0.456);
        assert!((jet.value - (0.1 * x * x + 0.2 * x * y - 0.05 * y * y + 0.3 * x)).abs() < 1e-12);
        assert!((jet.gradient[0] - (0.2 * x + 0.2 * y + 0.3)).abs() < 1e-12);
        assert!((jet.hess(0, 1) - 0.2).abs() < 1e-10);
        assert!((jet.hess(1, 1) + 0.1).abs() < 1e-10);
        assert!(surf.jet(&[1.5, 0.0]).is_err());
        let _ = mean_curvature(&surf, &[0.0, 0.0]).unwrap();
    }
}
