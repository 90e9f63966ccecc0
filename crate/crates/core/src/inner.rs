//! The fully digital subproblem: for fixed analog/digital blocks, improve `P`
//! by successive convex approximation.
//!
//! Each pass fixes WMMSE equalizers and weights (lower-bounding legitimate
//! rates), quadratic-transform vectors (lower-bounding the negative
//! eavesdropping rates) and first-order expansions of the CRB constraints, then
//! solves the resulting conic program.
//!
//! Everything here runs in normalized units: `P' = P / √P_th` (so the budget is
//! `‖P'‖_F² ≤ 1`), channels scaled so every noise power is 1, and CRB rows scaled
//! so every threshold is 1. [`NormalizedSystem`] holds these quantities.

use std::f64::consts::LN_2;

use nalgebra::SymmetricEigen;

use crate::conic::{AffineExpr, ConeBlock, ConicProblem, ConicSolver, ConicStatus, InteriorPointSolver};
use crate::crb::{hermitian_split, CrbParameter, HermitianSplit};
use crate::geometry::{ChannelSet, Scenario, SensingModel};
use crate::linalg::frobenius_inner;
use crate::rates::{best_common_split, compute_rates, received_powers};
use crate::{CMatrix, CVector, Error, Result, C64};

/// `1/ln2 + log2(ln2)`: the constant in `R = τ - min WMSE`.
pub const TAU_WMMSE: f64 = 1.0 / LN_2 - 0.528_766_372_944_897_7;

/// Equalizers and weights for one user's common and private streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserWmmse {
    pub omega_c: C64,
    pub omega_p: C64,
    pub eta_c: f64,
    pub eta_p: f64,
}

/// MMSE equalizer `ω = conj(hᴴp)/T`, weight `η = T / (I ln2)` for one stream.
fn mmse(signal: C64, total: f64, interference: f64) -> (C64, f64) {
    (signal.conj() / total, total / (interference * LN_2))
}

/// Optimal equalizers and weights at `P` (noise powers in the same units as `P`).
pub fn update_wmmse(p: &CMatrix, users: &[CVector], noise: &[f64]) -> Vec<UserWmmse> {
    let k = users.len();
    users
        .iter()
        .zip(noise)
        .enumerate()
        .map(|(idx, (h, &sigma2))| {
            let y: Vec<C64> = (0..=k).map(|i| h.dotc(&p.column(i))).collect();
            let private_total: f64 = y[1..].iter().map(|v| v.norm_sqr()).sum::<f64>() + sigma2;
            let common_total = private_total + y[0].norm_sqr();
            let own = y[idx + 1];
            let (omega_c, eta_c) = mmse(y[0], common_total, private_total);
            let (omega_p, eta_p) = mmse(own, private_total, private_total - own.norm_sqr());
            UserWmmse { omega_c, omega_p, eta_c, eta_p }
        })
        .collect()
}

/// Weighted MSE `η ε - log2 η` for a stream with equalizer `ω`.
pub fn weighted_mse(omega: C64, eta: f64, signal: C64, total: f64) -> f64 {
    let eps = omega.norm_sqr() * total - 2.0 * (omega * signal).re + 1.0;
    eta * eps - eta.log2()
}

/// Quadratic-transform vectors for the eavesdropper (length `K+1` each).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAux {
    pub x_common: CVector,
    pub x_private: Vec<CVector>,
}

/// `T_j`: the columns of `P` with column `j` replaced by `(σ/‖g‖²) g`, so that
/// `‖gᴴ T_j‖² = Σ_{i≠j} |gᴴ p_i|² + σ²`.
pub fn eve_matrix(p: &CMatrix, eve: &CVector, noise: f64, j: usize) -> CMatrix {
    let mut t = p.clone();
    let col = eve * C64::new(noise.sqrt() / eve.norm_squared(), 0.0);
    t.set_column(j, &col);
    t
}

pub fn update_quadratic_aux(p: &CMatrix, eve: &CVector, noise: f64) -> Result<QuadraticAux> {
    if eve.norm_squared() == 0.0 {
        return Err(Error::Domain("eavesdropper channel is zero".into()));
    }
    let total: f64 = (0..p.ncols()).map(|i| eve.dotc(&p.column(i)).norm_sqr()).sum::<f64>() + noise;
    let x = |j| eve_matrix(p, eve, noise, j).adjoint() * eve / C64::new(total, 0.0);
    Ok(QuadraticAux {
        x_common: x(0),
        x_private: (1..p.ncols()).map(x).collect(),
    })
}

/// `log2(2 Re(xᴴ T_jᴴ g) - ‖x‖² T_e)`, a lower bound on `log2(‖gᴴT_j‖² / T_e)`
/// that is tight at the optimal `x`.
pub fn quadratic_transform_value(x: &CVector, p: &CMatrix, eve: &CVector, noise: f64, j: usize) -> f64 {
    let t = eve_matrix(p, eve, noise, j);
    let total: f64 = (0..p.ncols()).map(|i| eve.dotc(&p.column(i)).norm_sqr()).sum::<f64>() + noise;
    let arg = 2.0 * x.dotc(&(t.adjoint() * eve)).re - x.norm_squared() * total;
    arg.log2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySet {
    pub wmmse: Vec<UserWmmse>,
    pub quadratic: QuadraticAux,
}

/// CRB quantities that do not depend on the expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbStatic {
    pub param: CrbParameter,
    /// Scaled derivative matrix `Ġ_s / √Γ̃_s` (threshold becomes 1).
    pub g_dot: CMatrix,
    /// Splits of the Hermitian parts of `A₁ = Ġ_sᴴ G̃` and `A₂ = -j A₁`.
    pub splits: [HermitianSplit; 2],
    /// Low-rank factors with `M = Σ u uᴴ`, indexed `[x][plus=0 / minus=1]`.
    factors: [[Vec<CVector>; 2]; 2],
}

fn psd_factors(m: &CMatrix) -> Vec<CVector> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 1e-12 * max && d > 0.0)
        .map(|(i, &d)| eig.eigenvectors.column(i) * C64::new(d.sqrt(), 0.0))
        .collect()
}

/// Channels, sensing matrices and constants in normalized units.
#[derive(Debug, Clone)]
pub struct NormalizedSystem {
    pub channels: ChannelSet,
    pub g_tilde: CMatrix,
    pub crb: Vec<CrbStatic>,
    /// `√P_th`: `P = scale · P'`.
    pub scale: f64,
    pub common: bool,
}

impl NormalizedSystem {
    /// `crb` selects whether the sensing constraints are imposed; `common`
    /// whether the common stream exists.
    pub fn new(
        scenario: &Scenario,
        channels: &ChannelSet,
        sensing: &SensingModel,
        crb: bool,
        common: bool,
    ) -> Result<Self> {
        scenario.validate()?;
        let scale = scenario.power_budget.sqrt();
        let user_channels = channels
            .user_channels
            .iter()
            .zip(&scenario.noise_user)
            .map(|(h, n)| h * C64::new(scale / n.sqrt(), 0.0))
            .collect();
        let eve_scale = scale / scenario.noise_eve.sqrt();
        let normalized = ChannelSet {
            user_channels,
            user_gains: channels.user_gains.clone(),
            eve_channel: &channels.eve_channel * C64::new(eve_scale, 0.0),
            eve_gain: channels.eve_gain * eve_scale,
        };
        let (m, n) = sensing.g_tilde.shape();
        let g_tilde = &sensing.g_tilde / C64::new(((m * n) as f64).sqrt(), 0.0);
        let mut crb_static = Vec::new();
        if crb {
            let b2 = sensing.gain.norm_sqr();
            for (param, limit) in [
                (CrbParameter::Angle, scenario.crb_angle_max),
                (CrbParameter::Range, scenario.crb_range_max),
            ] {
                if limit.is_infinite() {
                    continue;
                }
                let gamma = scenario.noise_eve / (2.0 * scenario.slots as f64 * b2 * scenario.power_budget * limit);
                let g_dot = param.derivative(sensing) / C64::new(gamma.sqrt(), 0.0);
                let a1 = g_dot.adjoint() * &g_tilde;
                let a2 = &a1 * C64::new(0.0, -1.0);
                let splits = [hermitian_split(&a1), hermitian_split(&a2)];
                let factors = [
                    [psd_factors(&splits[0].m_plus), psd_factors(&splits[0].m_minus)],
                    [psd_factors(&splits[1].m_plus), psd_factors(&splits[1].m_minus)],
                ];
                crb_static.push(CrbStatic { param, g_dot, splits, factors });
            }
        }
        Ok(Self {
            channels: normalized,
            g_tilde,
            crb: crb_static,
            scale,
            common,
        })
    }

    pub fn num_users(&self) -> usize {
        self.channels.num_users()
    }

    pub fn n_tx(&self) -> usize {
        self.channels.n_tx()
    }

    /// Columns of `P` that carry a stream.
    pub fn active_columns(&self) -> Vec<usize> {
        let first = if self.common { 0 } else { 1 };
        (first..=self.num_users()).collect()
    }

    pub fn normalize(&self, p: &CMatrix) -> CMatrix {
        p / C64::new(self.scale, 0.0)
    }

    pub fn denormalize(&self, p: &CMatrix) -> CMatrix {
        p * C64::new(self.scale, 0.0)
    }

    pub fn auxiliaries(&self, p: &CMatrix) -> Result<AuxiliarySet> {
        let k = self.num_users();
        Ok(AuxiliarySet {
            wmmse: update_wmmse(p, &self.channels.user_channels, &vec![1.0; k]),
            quadratic: update_quadratic_aux(p, &self.channels.eve_channel, 1.0)?,
        })
    }

    /// Max–min secrecy rate of `P'` with unclamped private secrecy rates and
    /// the best split of the common secrecy rate; `-∞` if the eavesdropper
    /// decodes the common stream better than some user.
    pub fn secrecy_objective(&self, p: &CMatrix) -> f64 {
        let k = self.num_users();
        let Ok(pd) = received_powers(p, &self.channels, &vec![1.0; k], 1.0) else {
            return f64::NEG_INFINITY;
        };
        let Ok(r) = compute_rates(&pd, &vec![0.0; k]) else {
            return f64::NEG_INFINITY;
        };
        if !self.common {
            return r.secrecy_private_raw.iter().cloned().fold(f64::INFINITY, f64::min);
        }
        if r.secrecy_common_raw < 0.0 {
            return f64::NEG_INFINITY;
        }
        best_common_split(r.secrecy_common_raw, &r.secrecy_private_raw).1
    }

    /// Secrecy objective minus `‖P' - target‖² / ρ`.
    pub fn objective(&self, p: &CMatrix, penalty: Option<&Penalty>) -> f64 {
        let base = self.secrecy_objective(p);
        match penalty {
            Some(pen) => base - (p - &pen.target).norm_squared() / pen.rho,
            None => base,
        }
    }

    /// Closed-form CRB constraint margins `L_s - |tr(G̃,Ġ_s)|²/tr(G̃,G̃) - 1` in
    /// normalized units (≥ 0 iff the constraint holds).
    pub fn crb_margins(&self, p: &CMatrix) -> Vec<f64> {
        let gp = &self.g_tilde * p;
        let gg = gp.norm_squared();
        self.crb
            .iter()
            .map(|c| {
                let dp = &c.g_dot * p;
                if gg == 0.0 {
                    return f64::NEG_INFINITY;
                }
                dp.norm_squared() - frobenius_inner(&gp, &dp).norm_sqr() / gg - 1.0
            })
            .collect()
    }
}

/// Penalty `‖P' - target‖² / ρ` pulling `P'` toward the hybrid product.
#[derive(Debug, Clone, PartialEq)]
pub struct Penalty {
    pub rho: f64,
    pub target: CMatrix,
}

/// First-order CRB surrogates around the expansion point `P̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub expansion: CMatrix,
    pub terms: Vec<CrbSurrogate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbSurrogate {
    pub param: CrbParameter,
    /// `Ḡ p̃_i` and `G̈_s p̃_i` per column.
    pub g_bar_p: Vec<CVector>,
    pub g_ddot_p: Vec<CVector>,
    pub g_bar_const: f64,
    pub g_ddot_const: f64,
    /// `M₊ p̃_i`, `M₋ p̃_i` per component x and column.
    pub m_plus_p: [Vec<CVector>; 2],
    pub m_minus_p: [Vec<CVector>; 2],
    pub m_plus_const: [f64; 2],
    pub m_minus_const: [f64; 2],
}

fn quad_form(m: &CMatrix, p: &CMatrix) -> f64 {
    (0..p.ncols()).map(|i| p.column(i).dotc(&(m * p.column(i))).re).sum()
}

impl CrbSurrogate {
    /// Exact `g_x(p) = Σ_i Re(p_iᴴ A_x p_i)`, `x ∈ {0, 1}`.
    pub fn exact(stat: &CrbStatic, x: usize, p: &CMatrix) -> f64 {
        quad_form(&stat.splits[x].m_plus, p) - quad_form(&stat.splits[x].m_minus, p)
    }

    fn linear(vs: &[CVector], p: &CMatrix) -> f64 {
        vs.iter().enumerate().map(|(i, v)| v.dotc(&p.column(i)).re).sum()
    }

    /// `ĝ_x(p; p̃) ≥ g_x(p)`: the concave part linearized.
    pub fn upper(&self, stat: &CrbStatic, x: usize, p: &CMatrix) -> f64 {
        quad_form(&stat.splits[x].m_plus, p) - 2.0 * Self::linear(&self.m_minus_p[x], p) + self.m_minus_const[x]
    }

    /// `ǧ_x(p; p̃) ≥ -g_x(p)`.
    pub fn upper_negated(&self, stat: &CrbStatic, x: usize, p: &CMatrix) -> f64 {
        quad_form(&stat.splits[x].m_minus, p) - 2.0 * Self::linear(&self.m_plus_p[x], p) + self.m_plus_const[x]
    }

    /// Linear minorant of `tr(G̃ R G̃ᴴ)`.
    pub fn trace_lower(&self, p: &CMatrix) -> f64 {
        2.0 * Self::linear(&self.g_bar_p, p) - self.g_bar_const
    }

    /// Linear minorant of `tr(Ġ_s R Ġ_sᴴ)`.
    pub fn derivative_lower(&self, p: &CMatrix) -> f64 {
        2.0 * Self::linear(&self.g_ddot_p, p) - self.g_ddot_const
    }
}

pub fn build_crb_surrogates(p_tilde: &CMatrix, sys: &NormalizedSystem) -> SurrogateModel {
    let cols = p_tilde.ncols();
    let gbar = sys.g_tilde.adjoint() * &sys.g_tilde;
    let terms = sys
        .crb
        .iter()
        .map(|stat| {
            let gddot = stat.g_dot.adjoint() * &stat.g_dot;
            let per_col = |m: &CMatrix| -> Vec<CVector> { (0..cols).map(|i| m * p_tilde.column(i)).collect() };
            let mp = [per_col(&stat.splits[0].m_plus), per_col(&stat.splits[1].m_plus)];
            let mm = [per_col(&stat.splits[0].m_minus), per_col(&stat.splits[1].m_minus)];
            CrbSurrogate {
                param: stat.param,
                g_bar_p: per_col(&gbar),
                g_ddot_p: per_col(&gddot),
                g_bar_const: quad_form(&gbar, p_tilde),
                g_ddot_const: quad_form(&gddot, p_tilde),
                m_plus_const: [quad_form(&stat.splits[0].m_plus, p_tilde), quad_form(&stat.splits[1].m_plus, p_tilde)],
                m_minus_const: [quad_form(&stat.splits[0].m_minus, p_tilde), quad_form(&stat.splits[1].m_minus, p_tilde)],
                m_plus_p: mp,
                m_minus_p: mm,
            }
        })
        .collect();
    SurrogateModel { expansion: p_tilde.clone(), terms }
}

/// Variable indices of an assembled subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerLayout {
    pub n_tx: usize,
    pub columns: Vec<usize>,
    pub secrecy: usize,
    pub common: Vec<usize>,
    pub private: Vec<usize>,
    /// Log-epigraph variables `t_j` and their arguments `z_j`, `j = 0..=K`
    /// (`j = 0` only with a common stream).
    pub t: Vec<Option<usize>>,
    pub z: Vec<Option<usize>>,
    /// `(μ_s, α_s)` per active CRB constraint.
    pub crb: Vec<(usize, usize)>,
    pub penalty: Option<usize>,
    pub num_vars: usize,
}

impl InnerLayout {
    /// `(Re, Im)` indices of `P[(n, col)]`, if that column is a variable.
    pub fn p_index(&self, col: usize, n: usize) -> Option<(usize, usize)> {
        let slot = self.columns.iter().position(|&c| c == col)?;
        let base = 2 * (slot * self.n_tx + n);
        Some((base, base + 1))
    }

    pub fn num_p_vars(&self) -> usize {
        2 * self.n_tx * self.columns.len()
    }

    pub fn extract_p(&self, x: &[f64], k: usize) -> CMatrix {
        let mut p = CMatrix::zeros(self.n_tx, k + 1);
        for &col in &self.columns {
            for n in 0..self.n_tx {
                let (re, im) = self.p_index(col, n).expect("active column");
                p[(n, col)] = C64::new(x[re], x[im]);
            }
        }
        p
    }
}

/// Affine builder for expressions in the entries of `P`.
struct PExpr<'a> {
    layout: &'a InnerLayout,
}

impl PExpr<'_> {
    /// `Re(cᴴ p_col)`.
    fn re_inner(&self, c: &CVector, col: usize) -> AffineExpr {
        let mut e = AffineExpr::zero();
        for (n, cn) in c.iter().enumerate() {
            if let Some((re, im)) = self.layout.p_index(col, n) {
                e.push(re, cn.re);
                e.push(im, cn.im);
            }
        }
        e
    }

    /// `Im(cᴴ p_col)`.
    fn im_inner(&self, c: &CVector, col: usize) -> AffineExpr {
        let mut e = AffineExpr::zero();
        for (n, cn) in c.iter().enumerate() {
            if let Some((re, im)) = self.layout.p_index(col, n) {
                e.push(im, cn.re);
                e.push(re, -cn.im);
            }
        }
        e
    }

    /// Rows whose squared norm is `Σ_{col ∈ cols} |cᴴ p_col|²`, scaled by `w`.
    fn projection_rows(&self, c: &CVector, cols: &[usize], w: f64) -> Vec<AffineExpr> {
        cols.iter()
            .flat_map(|&col| [self.re_inner(c, col) * w, self.im_inner(c, col) * w])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub max_iter: usize,
    /// Stop once the objective increases by less than this (bits/s/Hz).
    pub epsilon: f64,
    pub solver_tol: f64,
    /// Try longer steps along each accepted update (see [`extrapolate`]).
    pub extrapolate: bool,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { max_iter: 50, epsilon: 1e-4, solver_tol: 1e-7, extrapolate: true }
    }
}

/// Step-doubling search along `p_new - p_old`, keeping the best point that
/// stays within the power budget and the exact CRB constraints.
///
/// At high SNR the WMMSE bound has far more curvature than the rate along the
/// power direction, so plain passes creep toward the budget in tiny steps. The
/// search only ever accepts improvements of the true objective, so fixed points
/// and monotonicity are unchanged.
pub fn extrapolate(
    sys: &NormalizedSystem,
    p_old: &CMatrix,
    p_new: CMatrix,
    value: f64,
    penalty: Option<&Penalty>,
) -> (CMatrix, f64) {
    let dir = &p_new - p_old;
    let (mut best, mut best_value) = (p_new, value);
    let mut step = 2.0;
    while step <= 1024.0 {
        let Some((cand, v)) = admissible(sys, p_old + &dir * C64::new(step, 0.0), penalty) else { break };
        if !(v > best_value) {
            break;
        }
        best = cand;
        best_value = v;
        step *= 2.0;
    }
    (best, best_value)
}

/// Projects an extrapolated point onto the power ball and, if the eavesdropper
/// now out-decodes the common stream, removes just enough of the common
/// column's component along the eavesdropper channel. `None` if the result
/// violates an exact CRB constraint or stays infeasible.
fn admissible(sys: &NormalizedSystem, mut cand: CMatrix, penalty: Option<&Penalty>) -> Option<(CMatrix, f64)> {
    let norm = cand.norm();
    if norm > 1.0 {
        cand /= C64::new(norm, 0.0);
    }
    let mut v = sys.objective(&cand, penalty);
    if v == f64::NEG_INFINITY && sys.common {
        let g = &sys.channels.eve_channel;
        let p0 = cand.column(0).clone_owned();
        let along = g * (g.dotc(&p0) / C64::new(g.norm_squared(), 0.0));
        let with = |lambda: f64| {
            let mut c = cand.clone();
            c.set_column(0, &(&p0 - &along * C64::new(lambda, 0.0)));
            c
        };
        let full = with(1.0);
        if sys.objective(&full, penalty) == f64::NEG_INFINITY {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if sys.objective(&with(mid), penalty) == f64::NEG_INFINITY {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cand = with(hi);
        v = sys.objective(&cand, penalty);
    }
    if !v.is_finite() || sys.crb_margins(&cand).iter().any(|&m| m < 0.0) {
        return None;
    }
    Some((cand, v))
}

/// Squared extrapolation (SQUAREM) through three successive iterates, with
/// the step length backtracked toward the plain iterate. Accepts only true
/// objective gains that keep the exact CRB margins nonnegative.
pub fn squarem(
    sys: &NormalizedSystem,
    p0: &CMatrix,
    p1: &CMatrix,
    p2: CMatrix,
    value: f64,
    penalty: Option<&Penalty>,
) -> (CMatrix, f64) {
    let r = p1 - p0;
    let v = &p2 - p1 - &r;
    let (rn, vn) = (r.norm(), v.norm());
    if !(vn > 0.0) {
        return (p2, value);
    }
    let mut alpha = -rn / vn;
    while alpha < -1.0 {
        let cand = p0 - &r * C64::new(2.0 * alpha, 0.0) + &v * C64::new(alpha * alpha, 0.0);
        if let Some((cand, cv)) = admissible(sys, cand, penalty) {
            if cv > value {
                return (cand, cv);
            }
        }
        alpha = (alpha - 1.0) / 2.0;
        if alpha > -1.0 - 1e-3 {
            break;
        }
    }
    (p2, value)
}

/// Builds the convex subproblem around `P̃` for fixed auxiliaries.
pub fn assemble_inner_problem(
    sys: &NormalizedSystem,
    aux: &AuxiliarySet,
    surrogates: &SurrogateModel,
    penalty: Option<&Penalty>,
) -> (ConicProblem, InnerLayout) {
    let k = sys.num_users();
    let n_tx = sys.n_tx();
    let columns = sys.active_columns();
    let mut num = 2 * n_tx * columns.len();
    let mut next = || {
        num += 1;
        num - 1
    };
    let secrecy = next();
    let common: Vec<usize> = if sys.common { (0..k).map(|_| next()).collect() } else { Vec::new() };
    let private: Vec<usize> = (0..k).map(|_| next()).collect();
    let mut t = vec![None; k + 1];
    let mut z = vec![None; k + 1];
    for j in 0..=k {
        if j > 0 || sys.common {
            t[j] = Some(next());
            z[j] = Some(next());
        }
    }
    let crb: Vec<(usize, usize)> = surrogates.terms.iter().map(|_| (next(), next())).collect();
    let v: Vec<[usize; 2]> = surrogates.terms.iter().map(|_| [next(), next()]).collect();
    let q = penalty.map(|_| next());
    let layout = InnerLayout {
        n_tx,
        columns: columns.clone(),
        secrecy,
        common,
        private,
        t,
        z,
        crb,
        penalty: q,
        num_vars: num,
    };
    let px = PExpr { layout: &layout };
    let mut prob = ConicProblem::new(layout.num_vars);

    // Power budget.
    let p_vars: Vec<AffineExpr> = (0..layout.num_p_vars()).map(AffineExpr::var).collect();
    prob.push(ConeBlock::soc(AffineExpr::constant(1.0), p_vars, "power"));

    let h = &sys.channels.user_channels;
    let private_cols: Vec<usize> = (1..=k).collect();
    let inv_ln2 = 1.0 / LN_2;
    for (u, wm) in aux.wmmse.iter().enumerate() {
        let t_priv = AffineExpr::term(layout.t[u + 1].expect("private epigraph"), inv_ln2);
        // s_k ≤ τ + log2 η - η ε_kp + t_ek / ln2, quadratic part on the right.
        let rhs = AffineExpr::constant(TAU_WMMSE + wm.eta_p.log2() - wm.eta_p * wm.omega_p.norm_sqr() - wm.eta_p)
            + t_priv
            - AffineExpr::var(layout.private[u])
            + px.re_inner(&(h[u].clone() * wm.omega_p.conj()), u + 1) * (2.0 * wm.eta_p);
        let w = (wm.eta_p).sqrt() * wm.omega_p.norm();
        prob.push(ConeBlock::rotated_soc(
            rhs,
            AffineExpr::constant(1.0),
            px.projection_rows(&h[u], &private_cols, w),
            "private rate",
        ));
        if sys.common {
            let alloc = layout.common.iter().fold(AffineExpr::zero(), |e, &c| e + AffineExpr::var(c));
            let t_c = AffineExpr::term(layout.t[0].expect("common epigraph"), inv_ln2);
            let rhs = AffineExpr::constant(TAU_WMMSE + wm.eta_c.log2() - wm.eta_c * wm.omega_c.norm_sqr() - wm.eta_c)
                + t_c
                - alloc
                + px.re_inner(&(h[u].clone() * wm.omega_c.conj()), 0) * (2.0 * wm.eta_c);
            let w = (wm.eta_c).sqrt() * wm.omega_c.norm();
            prob.push(ConeBlock::rotated_soc(
                rhs,
                AffineExpr::constant(1.0),
                px.projection_rows(&h[u], &columns, w),
                "common rate",
            ));
        }
    }

    // Eavesdropper log epigraphs: t_j ≤ ln z_j, z_j ≤ 2 Re(xᴴ T_jᴴ g) - ‖x‖² T_e.
    let g = &sys.channels.eve_channel;
    for j in 0..=k {
        let (Some(tj), Some(zj)) = (layout.t[j], layout.z[j]) else { continue };
        let x = if j == 0 { &aux.quadratic.x_common } else { &aux.quadratic.x_private[j - 1] };
        let xn2 = x.norm_squared();
        let mut rhs = AffineExpr::constant(2.0 * x[j].re - xn2) - AffineExpr::var(zj);
        for &i in &columns {
            if i != j {
                rhs = rhs + px.re_inner(&(g * x[i].conj()), i) * 2.0;
            }
        }
        prob.push(ConeBlock::rotated_soc(
            rhs,
            AffineExpr::constant(1.0),
            px.projection_rows(g, &columns, xn2.sqrt()),
            "eve epigraph",
        ));
        prob.push(ConeBlock::exp(AffineExpr::var(tj), AffineExpr::constant(1.0), AffineExpr::var(zj), "eve log"));
    }

    // Max-min link.
    for u in 0..k {
        let mut e = AffineExpr::var(layout.private[u]) - AffineExpr::var(secrecy);
        if sys.common {
            e = e + AffineExpr::var(layout.common[u]);
            prob.push(ConeBlock::nonneg(AffineExpr::var(layout.common[u]), "allocation sign"));
        }
        prob.push(ConeBlock::nonneg(e, "max-min"));
    }

    // CRB surrogates.
    for ((term, stat), (&(mu, alpha), vx)) in surrogates
        .terms
        .iter()
        .zip(&sys.crb)
        .zip(layout.crb.iter().zip(&v))
    {
        let lin = |vs: &[CVector]| {
            columns
                .iter()
                .fold(AffineExpr::zero(), |e, &i| e + px.re_inner(&vs[i], i))
        };
        let trace_lower = lin(&term.g_bar_p) * 2.0 - term.g_bar_const;
        prob.push(ConeBlock::nonneg(trace_lower - AffineExpr::var(alpha), "crb alpha"));
        let deriv_lower = lin(&term.g_ddot_p) * 2.0 - term.g_ddot_const;
        prob.push(ConeBlock::rotated_soc(
            AffineExpr::var(alpha),
            deriv_lower - 1.0,
            vec![AffineExpr::var(mu)],
            "crb schur",
        ));
        prob.push(ConeBlock::soc(
            AffineExpr::var(mu),
            vec![AffineExpr::var(vx[0]), AffineExpr::var(vx[1])],
            "crb modulus",
        ));
        for x in 0..2 {
            // v_x ≥ Σ pᴴM₊p - 2Re(p̃ᴴM₋p) + p̃ᴴM₋p̃ and the mirrored bound.
            for (quad, lin_vs, lin_const) in [
                (&stat.factors[x][0], &term.m_minus_p[x], term.m_minus_const[x]),
                (&stat.factors[x][1], &term.m_plus_p[x], term.m_plus_const[x]),
            ] {
                let lhs = AffineExpr::var(vx[x]) + lin(lin_vs) * 2.0 - lin_const;
                let rows: Vec<AffineExpr> = quad
                    .iter()
                    .flat_map(|u| px.projection_rows(u, &columns, 1.0))
                    .collect();
                if rows.is_empty() {
                    prob.push(ConeBlock::nonneg(lhs, "crb component"));
                } else {
                    prob.push(ConeBlock::rotated_soc(lhs, AffineExpr::constant(1.0), rows, "crb component"));
                }
            }
        }
    }

    // Penalty ‖P' - T‖² = q - 2Re⟨T, P'⟩ + ‖T‖² with q ≥ ‖P'‖². Expanding keeps the
    // cone away from its apex when P' approaches T.
    let mut objective = AffineExpr::var(secrecy);
    if let (Some(pen), Some(q)) = (penalty, layout.penalty) {
        let mut rows = Vec::new();
        let mut penalty_expr = AffineExpr::var(q) + pen.target.norm_squared();
        for col in 0..=k {
            for n in 0..n_tx {
                if let Some((re, im)) = layout.p_index(col, n) {
                    let t = pen.target[(n, col)];
                    rows.push(AffineExpr::var(re));
                    rows.push(AffineExpr::var(im));
                    penalty_expr.push(re, -2.0 * t.re);
                    penalty_expr.push(im, -2.0 * t.im);
                }
            }
        }
        prob.push(ConeBlock::rotated_soc(AffineExpr::var(q), AffineExpr::constant(1.0), rows, "penalty"));
        objective = objective - penalty_expr * (1.0 / pen.rho);
    }
    prob.objective = objective;
    (prob, layout)
}

/// Result of one inner SCA run.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// Final normalized beamfocuser.
    pub p: CMatrix,
    /// Objective at the start followed by the value after each accepted pass.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Conic solves performed.
    pub solves: usize,
    /// Passes whose solution lowered the objective beyond solver tolerance and
    /// was therefore discarded.
    pub rejected: usize,
    pub last_status: ConicStatus,
}

/// Successive convex approximation on `P'` from `p_init` (normalized units).
pub fn sca_solve(
    sys: &NormalizedSystem,
    p_init: &CMatrix,
    penalty: Option<&Penalty>,
    opts: &InnerOptions,
) -> Result<InnerOutcome> {
    sca_solve_with(sys, p_init, penalty, opts, &InteriorPointSolver { tol: opts.solver_tol, ..Default::default() })
}

pub fn sca_solve_with(
    sys: &NormalizedSystem,
    p_init: &CMatrix,
    penalty: Option<&Penalty>,
    opts: &InnerOptions,
    solver: &dyn ConicSolver,
) -> Result<InnerOutcome> {
    let k = sys.num_users();
    let mut p = p_init.clone();
    if !sys.common {
        p.column_mut(0).fill(C64::new(0.0, 0.0));
    }
    let mut prev = sys.objective(&p, penalty);
    let mut trace = vec![prev];
    let mut converged = false;
    let mut rejected = 0;
    let mut last_status = ConicStatus::Optimal;
    let mut solves = 0;
    let mut p_older: Option<CMatrix> = None;
    // Accept objective decreases up to this amount as solver noise.
    let slack = 1e-7;
    for _ in 0..opts.max_iter {
        let aux = sys.auxiliaries(&p)?;
        let surrogates = build_crb_surrogates(&p, sys);
        let (problem, layout) = assemble_inner_problem(sys, &aux, &surrogates, penalty);
        let sol = solver.solve(&problem)?;
        solves += 1;
        last_status = sol.status;
        // A stalled solve may still carry a usable point; it is kept only if it
        // passes the exact CRB and objective checks below.
        let stalled = matches!(sol.status, ConicStatus::MaxIterations | ConicStatus::NumericalFailure)
            && sol.x.iter().all(|v| v.is_finite());
        if !sol.status.is_solved() && !stalled {
            if solves == 1 && sol.status == ConicStatus::Infeasible {
                return Err(Error::Infeasible);
            }
            break;
        }
        let mut next = layout.extract_p(&sol.x, k);
        let norm = next.norm();
        if norm > 1.0 {
            next /= C64::new(norm, 0.0);
        }
        let mut value = sys.objective(&next, penalty);
        if stalled && (sys.crb_margins(&next).iter().any(|&m| m < 0.0) || !(value > prev)) {
            break;
        }
        if opts.extrapolate && value > prev {
            (next, value) = extrapolate(sys, &p, next, value, penalty);
            // The max-min objective makes consecutive steps zig-zag between
            // users; a squared extrapolation over the last two steps follows
            // the curved path.
            if let Some(older) = &p_older {
                (next, value) = squarem(sys, older, &p, next, value, penalty);
            }
        }
        if !(value >= prev - slack) && prev.is_finite() {
            // Solver inaccuracy near active cones can cost more than the step
            // gains; the update is still an ascent direction, so backtrack.
            let mut t = 0.5;
            while t >= 1.0 / 64.0 {
                let cand = &p + (&next - &p) * C64::new(t, 0.0);
                if let Some((cand, v)) = admissible(sys, cand, penalty) {
                    if v > prev {
                        (next, value) = (cand, v);
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if !(value >= prev - slack) && prev.is_finite() {
            rejected += 1;
            converged = true;
            break;
        }
        let gain = value - prev;
        p_older = Some(std::mem::replace(&mut p, next));
        trace.push(value);
        prev = value;
        if gain.abs() < opts.epsilon {
            converged = true;
            break;
        }
    }
    Ok(InnerOutcome { p, trace, converged, solves, rejected, last_status })
}
