//! Conic programs over real variables and their solvers.
//!
//! A [`ConicProblem`] maximizes an affine objective subject to cone blocks,
//! each block being a tuple of affine expressions required to lie in a cone.
//! [`InteriorPointSolver`] hands the program to Clarabel; [`BarrierSolver`] is a
//! small dense log-barrier method used as an independent cross-check.

use std::ops::{Add, Mul, Neg, Sub};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(i: usize) -> Self {
        Self { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn term(i: usize, coef: f64) -> Self {
        Self { terms: vec![(i, coef)], constant: 0.0 }
    }

    pub fn push(&mut self, i: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((i, coef));
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn canonical(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        Self { terms: out, constant: self.constant }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;
    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
        self
    }
}

impl Add<f64> for AffineExpr {
    type Output = AffineExpr;
    fn add(mut self, rhs: f64) -> AffineExpr {
        self.constant += rhs;
        self
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self + (-rhs)
    }
}

impl Sub<f64> for AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: f64) -> AffineExpr {
        self + (-rhs)
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;
    fn neg(self) -> AffineExpr {
        self * -1.0
    }
}

impl Mul<f64> for AffineExpr {
    type Output = AffineExpr;
    fn mul(mut self, rhs: f64) -> AffineExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// Every row equals zero.
    Zero,
    /// Every row is non-negative.
    Nonneg,
    /// `rows[0] ≥ ‖rows[1..]‖`.
    Soc,
    /// `rows[0]·rows[1] ≥ ‖rows[2..]‖²`, `rows[0], rows[1] ≥ 0`.
    RotatedSoc,
    /// `(x, y, z)` with `y e^{x/y} ≤ z`, `y > 0`.
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub rows: Vec<AffineExpr>,
    pub label: &'static str,
}

impl ConeBlock {
    pub fn nonneg(e: AffineExpr, label: &'static str) -> Self {
        Self { kind: ConeKind::Nonneg, rows: vec![e], label }
    }

    pub fn zero(e: AffineExpr, label: &'static str) -> Self {
        Self { kind: ConeKind::Zero, rows: vec![e], label }
    }

    pub fn soc(t: AffineExpr, w: Vec<AffineExpr>, label: &'static str) -> Self {
        let mut rows = vec![t];
        rows.extend(w);
        Self { kind: ConeKind::Soc, rows, label }
    }

    pub fn rotated_soc(u: AffineExpr, v: AffineExpr, w: Vec<AffineExpr>, label: &'static str) -> Self {
        let mut rows = vec![u, v];
        rows.extend(w);
        Self { kind: ConeKind::RotatedSoc, rows, label }
    }

    pub fn exp(x: AffineExpr, y: AffineExpr, z: AffineExpr, label: &'static str) -> Self {
        Self { kind: ConeKind::Exp, rows: vec![x, y, z], label }
    }

    /// Rows in a form where a rotated cone is rewritten as a standard one:
    /// `uv ≥ ‖w‖²` iff `u + v ≥ ‖(u - v, 2w)‖`.
    fn standard_rows(&self) -> (ConeKind, Vec<AffineExpr>) {
        match self.kind {
            ConeKind::RotatedSoc => {
                let u = self.rows[0].clone();
                let v = self.rows[1].clone();
                let mut rows = vec![u.clone() + v.clone(), u - v];
                rows.extend(self.rows[2..].iter().map(|w| w.clone() * 2.0));
                (ConeKind::Soc, rows)
            }
            kind => (kind, self.rows.clone()),
        }
    }

    /// Distance-like violation of the block at `x` (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let (kind, rows) = self.standard_rows();
        let v: Vec<f64> = rows.iter().map(|r| r.eval(x)).collect();
        match kind {
            ConeKind::Zero => v.iter().map(|a| a.abs()).fold(0.0, f64::max),
            ConeKind::Nonneg => v.iter().map(|a| (-a).max(0.0)).fold(0.0, f64::max),
            ConeKind::Soc | ConeKind::RotatedSoc => {
                let norm = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
                (norm - v[0]).max(0.0)
            }
            ConeKind::Exp => {
                let (a, y, z) = (v[0], v[1], v[2]);
                if y > 0.0 {
                    // Compare in log space to avoid overflow: x ≤ y ln(z/y).
                    if z <= 0.0 {
                        (a.max(0.0) + y + (-z)).max(f64::MIN_POSITIVE)
                    } else {
                        (a - y * (z / y).ln()).max(0.0)
                    }
                } else {
                    // Closure: y = 0 requires x ≤ 0, z ≥ 0.
                    (-y).max(0.0) + a.max(0.0) + (-z).max(0.0)
                }
            }
        }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProblem {
    pub num_vars: usize,
    /// Maximized.
    pub objective: AffineExpr,
    pub blocks: Vec<ConeBlock>,
}

impl ConicProblem {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, ..Default::default() }
    }

    pub fn new_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn push(&mut self, block: ConeBlock) {
        self.blocks.push(block);
    }

    pub fn num_rows(&self) -> usize {
        self.blocks.iter().map(ConeBlock::dim).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |e: &AffineExpr| -> Result<()> {
            if let Some(i) = e.max_var() {
                if i >= self.num_vars {
                    return Err(Error::Dimension(format!(
                        "variable {i} referenced but only {} declared",
                        self.num_vars
                    )));
                }
            }
            if !e.constant.is_finite() || e.terms.iter().any(|t| !t.1.is_finite()) {
                return Err(Error::Solver("non-finite coefficient".into()));
            }
            Ok(())
        };
        check(&self.objective)?;
        for b in &self.blocks {
            let ok = match b.kind {
                ConeKind::Zero | ConeKind::Nonneg => !b.rows.is_empty(),
                ConeKind::Soc => !b.rows.is_empty(),
                ConeKind::RotatedSoc => b.rows.len() >= 2,
                ConeKind::Exp => b.rows.len() == 3,
            };
            if !ok {
                return Err(Error::Dimension(format!(
                    "{:?} block '{}' has {} rows",
                    b.kind,
                    b.label,
                    b.rows.len()
                )));
            }
            b.rows.iter().try_for_each(check)?;
        }
        Ok(())
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.blocks.iter().map(|b| b.violation(x)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    /// Solved to reduced accuracy.
    AlmostOptimal,
    Infeasible,
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

impl ConicStatus {
    pub fn is_solved(&self) -> bool {
        matches!(self, ConicStatus::Optimal | ConicStatus::AlmostOptimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub x: Vec<f64>,
    /// Objective value at `x` (maximization sense).
    pub objective: f64,
    pub iterations: u32,
    pub max_violation: f64,
}

pub trait ConicSolver {
    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution>;
}

/// Primal-dual interior-point method (Clarabel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPointSolver {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for InteriorPointSolver {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 200 }
    }
}

impl ConicSolver for InteriorPointSolver {
    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution> {
        problem.validate()?;
        let n = problem.num_vars;
        let mut q = vec![0.0; n];
        for &(i, c) in &problem.objective.canonical().terms {
            q[i] = -c;
        }
        let (mut ri, mut ci, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        let mut b = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        for block in &problem.blocks {
            let (kind, rows) = block.standard_rows();
            for row in rows {
                let row = row.canonical();
                let r = b.len();
                for (j, c) in row.terms {
                    ri.push(r);
                    ci.push(j);
                    vals.push(-c);
                }
                b.push(row.constant);
            }
            let d = block.dim();
            let cone = match kind {
                ConeKind::Zero => SupportedConeT::ZeroConeT(d),
                ConeKind::Nonneg => SupportedConeT::NonnegativeConeT(d),
                ConeKind::Soc | ConeKind::RotatedSoc => SupportedConeT::SecondOrderConeT(d),
                ConeKind::Exp => SupportedConeT::ExponentialConeT(),
            };
            match (cones.last_mut(), &cone) {
                (Some(SupportedConeT::NonnegativeConeT(m)), SupportedConeT::NonnegativeConeT(k)) => *m += k,
                (Some(SupportedConeT::ZeroConeT(m)), SupportedConeT::ZeroConeT(k)) => *m += k,
                _ => cones.push(cone),
            }
        }
        let a = CscMatrix::new_from_triplets(b.len(), n, ri, ci, vals);
        let p = CscMatrix::zeros((n, n));
        let run = |tol: f64| -> Result<(ConicStatus, Vec<f64>, u32)> {
            let settings = DefaultSettings {
                verbose: false,
                max_iter: self.max_iter,
                tol_gap_abs: tol,
                tol_gap_rel: tol,
                tol_feas: tol,
                ..DefaultSettings::default()
            };
            let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
                .map_err(|e| Error::Solver(format!("{e:?}")))?;
            solver.solve();
            let sol = &solver.solution;
            let status = match sol.status {
                SolverStatus::Solved => ConicStatus::Optimal,
                SolverStatus::AlmostSolved => ConicStatus::AlmostOptimal,
                SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConicStatus::Infeasible,
                SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConicStatus::Unbounded,
                SolverStatus::MaxIterations | SolverStatus::MaxTime => ConicStatus::MaxIterations,
                _ => ConicStatus::NumericalFailure,
            };
            Ok((status, sol.x.clone(), sol.iterations))
        };
        let (mut status, mut x, mut iterations) = run(self.tol)?;
        // Degenerate optima (several cones active at their apex) can stall the
        // factorization close to the solution; one retry at a looser tolerance
        // usually finishes, and is reported as reduced accuracy.
        if matches!(status, ConicStatus::NumericalFailure | ConicStatus::MaxIterations) {
            let (s2, x2, it2) = run(self.tol * 10.0)?;
            iterations += it2;
            if s2.is_solved() {
                (status, x) = (ConicStatus::AlmostOptimal, x2);
            }
        }
        Ok(ConicSolution {
            status,
            objective: problem.objective.eval(&x),
            max_violation: problem.max_violation(&x),
            iterations,
            x,
        })
    }
}

/// Solves with the default interior-point backend.
pub fn solve_conic(problem: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    InteriorPointSolver { tol, ..Default::default() }.solve(problem)
}

/// Dense primal log-barrier method with a phase-I feasibility search.
///
/// Far slower than [`InteriorPointSolver`] and without infeasibility
/// certificates; meant for cross-checking small instances. Zero cones are not
/// supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSolver {
    /// Target duality-gap bound `ν / t`.
    pub gap: f64,
    pub max_newton: usize,
}

impl Default for BarrierSolver {
    fn default() -> Self {
        Self { gap: 1e-9, max_newton: 200 }
    }
}

/// Cone rows as a dense affine map `v = A x + c`, standard cones only.
struct DenseBlocks {
    blocks: Vec<(ConeKind, DMatrix<f64>, DVector<f64>)>,
    nu: f64,
}

impl DenseBlocks {
    fn new(problem: &ConicProblem, extra_vars: usize) -> Result<Self> {
        let n = problem.num_vars + extra_vars;
        let mut blocks = Vec::new();
        let mut nu = 0.0;
        for b in &problem.blocks {
            let (kind, rows) = b.standard_rows();
            let mut a = DMatrix::zeros(rows.len(), n);
            let mut c = DVector::zeros(rows.len());
            for (r, row) in rows.iter().enumerate() {
                for &(j, v) in &row.terms {
                    a[(r, j)] += v;
                }
                c[r] = row.constant;
            }
            nu += match kind {
                ConeKind::Nonneg => rows.len() as f64,
                ConeKind::Soc | ConeKind::RotatedSoc => 2.0,
                ConeKind::Exp => 3.0,
                ConeKind::Zero => return Err(Error::Solver("barrier solver has no zero cones".into())),
            };
            if kind == ConeKind::Nonneg {
                for r in 0..rows.len() {
                    blocks.push((kind, a.rows(r, 1).into_owned(), DVector::from_element(1, c[r])));
                }
            } else {
                blocks.push((kind, a, c));
            }
        }
        Ok(Self { blocks, nu })
    }

    /// Barrier value, gradient and Hessian at `x`; `None` outside the interior.
    fn barrier(&self, x: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let n = x.len();
        let mut f = 0.0;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (kind, a, c) in &self.blocks {
            let v = a * x + c;
            let (fv, gv, hv) = cone_barrier(*kind, &v)?;
            f += fv;
            g += a.transpose() * gv;
            h += a.transpose() * hv * a;
        }
        Some((f, g, h))
    }

    fn interior_direction(&self) -> DVector<f64> {
        let mut e = Vec::new();
        for (kind, a, _) in &self.blocks {
            match kind {
                ConeKind::Nonneg => e.push(1.0),
                ConeKind::Exp => e.extend([-1.0, 1.0, 1.0]),
                _ => {
                    e.push(1.0);
                    e.extend(std::iter::repeat_n(0.0, a.nrows() - 1));
                }
            }
        }
        DVector::from_vec(e)
    }
}

fn cone_barrier(kind: ConeKind, v: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
    match kind {
        ConeKind::Nonneg => {
            let s = v[0];
            (s > 0.0).then(|| {
                (-s.ln(), DVector::from_element(1, -1.0 / s), DMatrix::from_element(1, 1, 1.0 / (s * s)))
            })
        }
        ConeKind::Soc | ConeKind::RotatedSoc => {
            let t = v[0];
            let w2: f64 = v.rows(1, v.len() - 1).norm_squared();
            let d = t * t - w2;
            if !(t > 0.0 && d > 0.0) {
                return None;
            }
            let mut grad_d = v * -2.0;
            grad_d[0] = 2.0 * t;
            let mut hess_d = DMatrix::from_diagonal_element(v.len(), v.len(), -2.0);
            hess_d[(0, 0)] = 2.0;
            let g = &grad_d * (-1.0 / d);
            let h = &grad_d * grad_d.transpose() / (d * d) - hess_d / d;
            Some((-d.ln(), g, h))
        }
        ConeKind::Exp => {
            let (x, y, z) = (v[0], v[1], v[2]);
            if !(y > 0.0 && z > 0.0) {
                return None;
            }
            let l = (z / y).ln();
            let psi = y * l - x;
            if !(psi > 0.0) {
                return None;
            }
            let dpsi = DVector::from_vec(vec![-1.0, l - 1.0, y / z]);
            let mut hpsi = DMatrix::zeros(3, 3);
            hpsi[(1, 1)] = -1.0 / y;
            hpsi[(1, 2)] = 1.0 / z;
            hpsi[(2, 1)] = 1.0 / z;
            hpsi[(2, 2)] = -y / (z * z);
            let f = -psi.ln() - y.ln() - z.ln();
            let g = &dpsi * (-1.0 / psi) - DVector::from_vec(vec![0.0, 1.0 / y, 1.0 / z]);
            let mut h = &dpsi * dpsi.transpose() / (psi * psi) - hpsi / psi;
            h[(1, 1)] += 1.0 / (y * y);
            h[(2, 2)] += 1.0 / (z * z);
            Some((f, g, h))
        }
        ConeKind::Zero => None,
    }
}

impl BarrierSolver {
    /// Maximizes `cᵀx` over the interior by centering at increasing `t`.
    /// `stop` ends the search early (used by phase I).
    fn path_follow(
        &self,
        blocks: &DenseBlocks,
        c: &DVector<f64>,
        mut x: DVector<f64>,
        stop: impl Fn(&DVector<f64>) -> bool,
    ) -> (DVector<f64>, u32, bool) {
        let mut t = 1.0;
        let mut iters = 0u32;
        let n = x.len();
        loop {
            for _ in 0..self.max_newton {
                iters += 1;
                let Some((f, g, h)) = blocks.barrier(&x) else { break };
                // Minimize φ = -t cᵀx + barrier.
                let grad = &g - c * t;
                let reg = 1e-12 * (1.0 + h.diagonal().amax());
                let hreg = &h + DMatrix::identity(n, n) * reg;
                let Some(chol) = hreg.clone().cholesky() else { break };
                let dx = -chol.solve(&grad);
                let decrement = -grad.dot(&dx);
                if decrement / 2.0 < 1e-12 {
                    break;
                }
                let phi0 = -t * c.dot(&x) + f;
                let mut step = 1.0;
                let mut moved = false;
                while step > 1e-14 {
                    let trial = &x + &dx * step;
                    if let Some((ft, _, _)) = blocks.barrier(&trial) {
                        if -t * c.dot(&trial) + ft <= phi0 - 0.25 * step * decrement {
                            x = trial;
                            moved = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !moved || stop(&x) {
                    break;
                }
            }
            if stop(&x) {
                return (x, iters, true);
            }
            if blocks.nu / t < self.gap {
                return (x, iters, false);
            }
            t *= 8.0;
        }
    }
}

impl ConicSolver for BarrierSolver {
    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution> {
        problem.validate()?;
        let n = problem.num_vars;
        // Phase I over (x, s): rows v(x) + s e interior, minimize s, s ≥ -1.
        let mut phase1 = problem.clone();
        let s_idx = n;
        phase1.num_vars = n + 1;
        let base = DenseBlocks::new(problem, 0)?;
        let e = base.interior_direction();
        let mut offset = 0;
        for block in &mut phase1.blocks {
            if block.kind == ConeKind::RotatedSoc {
                // Shift along (1, 1, 0...), which maps to (2, 0, 0...) in the SOC form.
                block.rows[0].push(s_idx, 1.0);
                block.rows[1].push(s_idx, 1.0);
            } else {
                for (r, row) in block.rows.iter_mut().enumerate() {
                    row.push(s_idx, e[offset + r]);
                }
            }
            offset += block.dim();
        }
        phase1.push(ConeBlock::nonneg(AffineExpr::var(s_idx) + 1.0, "phase1 floor"));
        let blocks1 = DenseBlocks::new(&phase1, 0)?;
        let mut x0 = DVector::zeros(n + 1);
        let mut s0 = 1.0;
        loop {
            x0[s_idx] = s0;
            if blocks1.barrier(&x0).is_some() {
                break;
            }
            s0 *= 2.0;
            if s0 > 1e12 {
                return Err(Error::Solver("no phase-I start found".into()));
            }
        }
        let mut c1 = DVector::zeros(n + 1);
        c1[s_idx] = -1.0;
        let (x1, it1, found) = self.path_follow(&blocks1, &c1, x0, |x| x[s_idx] < -1e-6);
        if !found {
            return Ok(ConicSolution {
                status: ConicStatus::Infeasible,
                objective: f64::NAN,
                max_violation: problem.max_violation(&x1.as_slice()[..n]),
                iterations: it1,
                x: x1.as_slice()[..n].to_vec(),
            });
        }
        let start = x1.rows(0, n).into_owned();
        let mut c = DVector::zeros(n);
        for &(i, v) in &problem.objective.canonical().terms {
            c[i] = v;
        }
        let (x, it2, _) = self.path_follow(&base, &c, start, |_| false);
        let x = x.as_slice().to_vec();
        Ok(ConicSolution {
            status: ConicStatus::Optimal,
            objective: problem.objective.eval(&x),
            max_violation: problem.max_violation(&x),
            iterations: it1 + it2,
            x,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(c: &[f64]) -> ConicProblem {
        let mut p = ConicProblem::new(c.len());
        p.objective = c.iter().enumerate().fold(AffineExpr::zero(), |e, (i, &ci)| e + AffineExpr::term(i, ci));
        p.push(ConeBlock::soc(
            AffineExpr::constant(1.0),
            (0..c.len()).map(AffineExpr::var).collect(),
            "ball",
        ));
        p
    }

    #[test]
    fn soc_ball_maximizer_is_normalized_direction() {
        let c = [3.0, -4.0, 12.0];
        for solver in [&InteriorPointSolver::default() as &dyn ConicSolver, &BarrierSolver::default()] {
            let s = solver.solve(&ball(&c)).unwrap();
            assert!(s.status.is_solved());
            for i in 0..3 {
                assert!((s.x[i] - c[i] / 13.0).abs() < 1e-6, "{:?}", s.x);
            }
            assert!((s.objective - 13.0).abs() < 1e-6);
        }
    }

    #[test]
    fn exp_cone_gives_log() {
        // max t s.t. (t, 1, 5) ∈ K_exp, i.e. e^t ≤ 5.
        let mut p = ConicProblem::new(1);
        p.objective = AffineExpr::var(0);
        p.push(ConeBlock::exp(AffineExpr::var(0), AffineExpr::constant(1.0), AffineExpr::constant(5.0), "exp"));
        for solver in [&InteriorPointSolver::default() as &dyn ConicSolver, &BarrierSolver::default()] {
            let s = solver.solve(&p).unwrap();
            assert!(s.status.is_solved());
            assert!((s.x[0] - 5f64.ln()).abs() < 1e-6, "{}", s.x[0]);
        }
    }

    #[test]
    fn rotated_cone_bounds_product() {
        // max w s.t. 2 · 8 ≥ w², w ≤ 10.
        let mut p = ConicProblem::new(1);
        p.objective = AffineExpr::var(0);
        p.push(ConeBlock::rotated_soc(
            AffineExpr::constant(2.0),
            AffineExpr::constant(8.0),
            vec![AffineExpr::var(0)],
            "rsoc",
        ));
        p.push(ConeBlock::nonneg(AffineExpr::constant(10.0) - AffineExpr::var(0), "cap"));
        for solver in [&InteriorPointSolver::default() as &dyn ConicSolver, &BarrierSolver::default()] {
            let s = solver.solve(&p).unwrap();
            assert!((s.x[0] - 4.0).abs() < 1e-6, "{}", s.x[0]);
        }
    }

    #[test]
    fn infeasible_program_is_reported() {
        let mut p = ConicProblem::new(1);
        p.objective = AffineExpr::var(0);
        p.push(ConeBlock::nonneg(AffineExpr::var(0) - 2.0, "lo"));
        p.push(ConeBlock::nonneg(AffineExpr::constant(1.0) - AffineExpr::var(0), "hi"));
        assert_eq!(solve_conic(&p, 1e-7).unwrap().status, ConicStatus::Infeasible);
        assert_eq!(BarrierSolver::default().solve(&p).unwrap().status, ConicStatus::Infeasible);
    }

    #[test]
    fn unknown_variable_is_rejected() {
        let mut p = ConicProblem::new(1);
        p.objective = AffineExpr::var(3);
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
    }

    #[test]
    fn violations() {
        let b = ConeBlock::soc(AffineExpr::var(0), vec![AffineExpr::var(1)], "s");
        assert_eq!(b.violation(&[1.0, 0.5]), 0.0);
        assert!((b.violation(&[1.0, 3.0]) - 2.0).abs() < 1e-15);
        let e = ConeBlock::exp(AffineExpr::var(0), AffineExpr::constant(1.0), AffineExpr::constant(1.0), "e");
        assert_eq!(e.violation(&[-0.1]), 0.0);
        assert!((e.violation(&[0.3]) - 0.3).abs() < 1e-15);
        let expr = (AffineExpr::var(0) + AffineExpr::term(0, 2.0) - AffineExpr::var(1)).canonical();
        assert_eq!(expr.terms, vec![(0, 3.0), (1, -1.0)]);
    }
}
