//! Penalty-based block coordinate descent over `(P, F, W)`.
//!
//! The outer loop shrinks the penalty factor `ρ` on `‖P - FW‖_F²`; each inner
//! round runs the SCA subproblem on `P` and then the closed-form analog and
//! digital updates. Reported rates and CRBs always come from the hybrid
//! product `FW`.

use std::time::Instant;

use crate::crb::{crb_closed_form, CrbParameter};
use crate::geometry::{tx_array_response, ChannelSet, Scenario, SensingModel, SystemGeometry};
use crate::inner::{sca_solve, InnerOptions, InnerOutcome, NormalizedSystem, Penalty};
use crate::linalg::{pinv, real_condition_number};
use crate::rates::{check_feasibility, evaluate, max_min_secrecy, BeamState, FeasibilityReport, FeasibilityTolerances};
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub rho0: f64,
    pub shrink: f64,
    /// Threshold on `‖P - FW‖_F² / P_th`.
    pub eps_penalty: f64,
    pub max_outer: usize,
    /// BCD rounds per penalty value.
    pub max_inner: usize,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self { rho0: 100.0, shrink: 0.5, eps_penalty: 1e-4, max_outer: 30, max_inner: 20 }
    }
}

impl PenaltySchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0) || !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.eps_penalty > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid penalty schedule {self:?}")));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidParameter("iteration caps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolveStatus {
    Converged,
    NotConverged,
    Infeasible,
    Failed,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::NotConverged => "not_converged",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub init_s: f64,
    pub inner_s: f64,
    pub analog_s: f64,
    pub digital_s: f64,
    pub total_s: f64,
}

/// One outer (penalty) iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub rho: f64,
    /// `‖P - FW‖_F² / P_th` after the last round.
    pub residual: f64,
    /// Max–min secrecy from `P` and from `FW` (clamped rates, best split).
    pub secrecy_p: f64,
    pub secrecy_fw: f64,
    /// Multiplier applied to the CRB thresholds during this iteration.
    pub crb_relaxation: f64,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub state: BeamState,
    /// Max–min secrecy rate of `FW`, bits/s/Hz.
    pub secrecy: f64,
    pub crb_angle: f64,
    pub crb_range: f64,
    /// `‖P - FW‖_F²` in Watts.
    pub penalty_residual: f64,
    pub outer: Vec<OuterRecord>,
    /// Objective trace of every inner SCA call, in call order.
    pub inner_traces: Vec<Vec<f64>>,
    pub feasibility: FeasibilityReport,
    pub status: SolveStatus,
    /// Outer iterations (penalty loop) or SCA passes when there is no penalty loop.
    pub iterations: usize,
    pub conic_solves: usize,
    pub timings: StageTimings,
}

/// One Gauss–Seidel sweep over the entries of `F`, row by row, each entry set to
/// the unit-modulus minimizer of `‖P - FW‖_F²` with the others fixed.
pub fn analog_update(f_prev: &CMatrix, p: &CMatrix, w: &CMatrix) -> CMatrix {
    let y = w * w.adjoint();
    let z = p * w.adjoint();
    let mut f = f_prev.clone();
    let l = f.ncols();
    for n in 0..f.nrows() {
        for m in 0..l {
            let mut fy = C64::new(0.0, 0.0);
            for j in 0..l {
                fy += f[(n, j)] * y[(j, m)];
            }
            let chi = z[(n, m)] - fy + f[(n, m)] * y[(m, m)];
            if chi.norm() > 0.0 {
                f[(n, m)] = C64::from_polar(1.0, chi.arg());
            }
        }
    }
    f
}

/// Least-squares `W = (FᴴF)⁻¹FᴴP`, minimum-norm when `F` is rank deficient.
pub fn digital_update(f: &CMatrix, p: &CMatrix) -> CMatrix {
    let gram = f.adjoint() * f;
    let gram_re = nalgebra::DMatrix::from_fn(2 * gram.nrows(), 2 * gram.ncols(), |i, j| {
        let (a, b) = (i % gram.nrows(), j % gram.ncols());
        let z = gram[(a, b)];
        match (i < gram.nrows(), j < gram.ncols()) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    if real_condition_number(&gram_re) < 1e12 {
        if let Some(chol) = gram.clone().cholesky() {
            return chol.solve(&(f.adjoint() * p));
        }
    }
    pinv(f, 1e-12) * p
}

/// Matched codebook and matched-filter start, see [`initial_digital`].
pub fn initialize(
    geom: &SystemGeometry,
    scenario: &Scenario,
    channels: &ChannelSet,
    common: bool,
) -> Result<BeamState> {
    let k = scenario.num_users();
    let mut points = vec![scenario.target];
    points.extend(scenario.users.iter().copied());
    let mut f = CMatrix::zeros(geom.n_tx, geom.n_rf);
    for l in 0..geom.n_rf {
        let a = tx_array_response(geom, &points[l % (k + 1)])?;
        for n in 0..geom.n_tx {
            f[(n, l)] = C64::from_polar(1.0, a[n].arg());
        }
    }
    let p0 = initial_digital(scenario, channels, common);
    let mut w = digital_update(&f, &p0);
    if common {
        let fw = &f * &w;
        let r = evaluate(&fw, channels, scenario, &vec![0.0; k])?;
        if r.r_common < r.r_ec {
            // Null the common stream at the eavesdropper: gᴴ F w₀ = 0.
            let v = f.adjoint() * &channels.eve_channel;
            let w0 = w.column(0).clone_owned();
            let proj = &v * (v.dotc(&w0) / C64::new(v.norm_squared(), 0.0));
            w.set_column(0, &(w0 - proj));
        }
    }
    let power = (&f * &w).norm_squared();
    if power > scenario.power_budget {
        w *= C64::new((scenario.power_budget / power).sqrt(), 0.0);
    }
    let digital_full = &f * &w;
    Ok(BeamState { digital_full, analog: f, digital: w, common_alloc: vec![0.0; k] })
}

/// Matched-filter beamfocuser: `p_k ∝ h_k`, `p_0 ∝ Σ h_k + g_e` (zero without a
/// common stream), equal power per active column, `‖P‖_F² = P_th`.
pub fn initial_digital(scenario: &Scenario, channels: &ChannelSet, common: bool) -> CMatrix {
    let k = scenario.num_users();
    let n = channels.n_tx();
    let active = if common { k + 1 } else { k };
    let col_norm = (scenario.power_budget / active as f64).sqrt();
    let mut p = CMatrix::zeros(n, k + 1);
    for (u, h) in channels.user_channels.iter().enumerate() {
        p.set_column(u + 1, &(h * C64::new(col_norm / h.norm(), 0.0)));
    }
    if common {
        let mut c = channels.eve_channel.clone();
        for h in &channels.user_channels {
            c += h;
        }
        let norm = c.norm();
        if norm > 0.0 {
            p.set_column(0, &(c * C64::new(col_norm / norm, 0.0)));
        }
    }
    p
}

/// Report for a final hybrid design.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finish_report(
    mut state: BeamState,
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
    outer: Vec<OuterRecord>,
    inner_traces: Vec<Vec<f64>>,
    mut status: SolveStatus,
    iterations: usize,
    conic_solves: usize,
    timings: StageTimings,
) -> Result<SolveReport> {
    let fw = state.hybrid();
    let (secrecy, split) = max_min_secrecy(&fw, channels, scenario)?;
    state.common_alloc = split;
    let feasibility = check_feasibility(&state, scenario, channels, sensing)?;
    let crb = |which| crb_closed_form(&fw, sensing, scenario.noise_eve, scenario.slots, which).unwrap_or(f64::INFINITY);
    if status == SolveStatus::Converged && !feasibility.satisfies(&FeasibilityTolerances::default()) {
        status = SolveStatus::NotConverged;
    }
    Ok(SolveReport {
        secrecy,
        crb_angle: crb(CrbParameter::Angle),
        crb_range: crb(CrbParameter::Range),
        penalty_residual: state.penalty_residual_sq(),
        state,
        outer,
        inner_traces,
        feasibility,
        status,
        iterations,
        conic_solves,
        timings,
    })
}

/// Options shared by all schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverOptions {
    pub schedule: PenaltySchedule,
    pub inner: InnerOptions,
    /// Impose the CRB constraints.
    pub crb: bool,
    /// Use the common stream.
    pub common: bool,
    /// Largest factor by which CRB thresholds may be relaxed to regain feasibility.
    pub max_relaxation: f64,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self {
            schedule: PenaltySchedule::default(),
            inner: InnerOptions::default(),
            crb: true,
            common: true,
            max_relaxation: 1e8,
        }
    }
}

/// Builds the normalized system with CRB thresholds multiplied by `relax`.
pub(crate) fn relaxed_system(
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
    opts: &DriverOptions,
    relax: f64,
) -> Result<NormalizedSystem> {
    let s = scenario
        .clone()
        .with_crb_thresholds(scenario.crb_angle_max * relax, scenario.crb_range_max * relax);
    NormalizedSystem::new(&s, channels, sensing, opts.crb, opts.common)
}

/// Runs the inner SCA loop, relaxing the CRB thresholds by 10x per infeasible attempt.
#[allow(clippy::too_many_arguments)]
pub(crate) fn inner_with_relaxation(
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
    opts: &DriverOptions,
    relax: &mut f64,
    sys: &mut NormalizedSystem,
    p: &CMatrix,
    penalty: Option<&Penalty>,
) -> Result<InnerOutcome> {
    loop {
        match sca_solve(sys, p, penalty, &opts.inner) {
            Err(Error::Infeasible) if opts.crb && *relax * 10.0 <= opts.max_relaxation => {
                *relax *= 10.0;
                *sys = relaxed_system(scenario, channels, sensing, opts, *relax)?;
            }
            other => return other,
        }
    }
}

/// Feasibility of the hybrid design `FW` under its best common split.
fn hybrid_feasibility(
    f: &CMatrix,
    w: &CMatrix,
    p: &CMatrix,
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
) -> Result<FeasibilityReport> {
    let (_, split) = max_min_secrecy(&(f * w), channels, scenario)?;
    let state = BeamState { digital_full: p.clone(), analog: f.clone(), digital: w.clone(), common_alloc: split };
    check_feasibility(&state, scenario, channels, sensing)
}

/// Restores `min_k R_kc >= R_ec` on `FW` by removing the smallest fraction of
/// the common column's component along the eavesdropper (`v = F^H g`). The
/// ordering does not depend on the common column's norm, so an over-budget
/// result is rescaled in that column only. `None` when no repair is needed or
/// the repaired design breaks another constraint.
fn repair_common_ordering(
    f: &CMatrix,
    w: &CMatrix,
    p: &CMatrix,
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
) -> Result<Option<CMatrix>> {
    let tol = FeasibilityTolerances::default();
    let before = hybrid_feasibility(f, w, p, scenario, channels, sensing)?;
    if before.common_ordering <= tol.rate {
        return Ok(None);
    }
    let v = f.adjoint() * &channels.eve_channel;
    let vv = v.norm_squared();
    if vv == 0.0 {
        return Ok(None);
    }
    let w0 = w.column(0).into_owned();
    let along = &v * (v.dotc(&w0) / vv);
    let k = scenario.num_users();
    let candidate = |t: f64| {
        let mut c = w.clone();
        c.set_column(0, &(&w0 - &along * C64::new(t, 0.0)));
        let total = (f * &c).norm_squared();
        if total > scenario.power_budget {
            let private = (f * c.columns(1, k)).norm_squared();
            let common = (f * c.column(0)).norm_squared();
            if common > 0.0 {
                let s = ((scenario.power_budget - private).max(0.0) / common).sqrt();
                c.column_mut(0).scale_mut(s);
            }
        }
        c
    };
    let ordering = |c: &CMatrix| -> Result<f64> {
        let e = evaluate(&(f * c), channels, scenario, &vec![0.0; k])?;
        Ok(e.r_ec - e.r_common)
    };
    // t = 1 nulls the common stream at the eavesdropper.
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if ordering(&candidate(mid))? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let repaired = candidate(hi);
    let after = hybrid_feasibility(f, &repaired, p, scenario, channels, sensing)?;
    Ok(after.satisfies(&tol).then_some(repaired))
}

/// Penalty-based BCD from `init` (hybrid state in Watts).
pub fn penalty_bcd(
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
    init: BeamState,
    opts: &DriverOptions,
) -> Result<SolveReport> {
    opts.schedule.validate()?;
    let start = Instant::now();
    let mut timings = StageTimings::default();
    let mut relax = 1.0;
    let mut sys = relaxed_system(scenario, channels, sensing, opts, relax)?;
    let scale = C64::new(sys.scale, 0.0);
    let mut f = init.analog.clone();
    let mut w = &init.digital / scale;
    let mut p = sys.normalize(&init.hybrid());
    let mut rho = opts.schedule.rho0;
    let mut outer = Vec::new();
    let mut inner_traces = Vec::new();
    let mut conic_solves = 0;
    let mut status = SolveStatus::NotConverged;
    'outer: for _ in 0..opts.schedule.max_outer {
        let mut prev = f64::NEG_INFINITY;
        let mut rounds = 0;
        let mut residual = f64::INFINITY;
        for _ in 0..opts.schedule.max_inner {
            rounds += 1;
            let penalty = Penalty { rho, target: &f * &w };
            let t = Instant::now();
            let out = match inner_with_relaxation(scenario, channels, sensing, opts, &mut relax, &mut sys, &p, Some(&penalty)) {
                Ok(out) => out,
                Err(Error::Infeasible) => {
                    status = SolveStatus::Infeasible;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            timings.inner_s += t.elapsed().as_secs_f64();
            conic_solves += out.solves;
            inner_traces.push(out.trace);
            p = out.p;
            let t = Instant::now();
            f = analog_update(&f, &p, &w);
            timings.analog_s += t.elapsed().as_secs_f64();
            let t = Instant::now();
            w = digital_update(&f, &p);
            timings.digital_s += t.elapsed().as_secs_f64();
            let fw = &f * &w;
            residual = (&p - &fw).norm_squared();
            let value = sys.objective(&p, Some(&Penalty { rho, target: fw }));
            if residual <= opts.schedule.eps_penalty || (value - prev).abs() < opts.inner.epsilon {
                break;
            }
            prev = value;
        }
        let fw_watts = &f * &w * scale;
        let secrecy = |m: &CMatrix| max_min_secrecy(m, channels, scenario).map(|r| r.0).unwrap_or(f64::NAN);
        outer.push(OuterRecord {
            rho,
            residual,
            secrecy_p: secrecy(&sys.denormalize(&p)),
            secrecy_fw: secrecy(&fw_watts),
            crb_relaxation: relax,
            rounds,
        });
        if residual <= opts.schedule.eps_penalty && relax == 1.0 {
            // Converged only once FW itself is feasible, possibly after repair.
            let p_watts = sys.denormalize(&p);
            let w_watts = &w * scale;
            let report = hybrid_feasibility(&f, &w_watts, &p_watts, scenario, channels, sensing)?;
            if report.satisfies(&FeasibilityTolerances::default()) {
                status = SolveStatus::Converged;
                break;
            }
            if let Some(fixed) = repair_common_ordering(&f, &w_watts, &p_watts, scenario, channels, sensing)? {
                let fixed = &fixed / scale;
                if (&p - &f * &fixed).norm_squared() <= opts.schedule.eps_penalty {
                    w = fixed;
                    status = SolveStatus::Converged;
                    break;
                }
            }
        }
        rho *= opts.schedule.shrink;
        if relax > 1.0 {
            relax /= 10.0;
            sys = relaxed_system(scenario, channels, sensing, opts, relax)?;
        }
    }
    let iterations = outer.len();
    let state = BeamState {
        digital_full: sys.denormalize(&p),
        analog: f,
        digital: &w * scale,
        common_alloc: vec![0.0; scenario.num_users()],
    };
    timings.total_s = start.elapsed().as_secs_f64();
    finish_report(state, scenario, channels, sensing, outer, inner_traces, status, iterations, conic_solves, timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::linalg::{dft_matrix, random_cmatrix, random_phases};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_chain_analog_update_matches_phase_of_pw() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f0 = random_phases(&mut rng, 6, 1);
        let p = random_cmatrix(&mut rng, 6, 3);
        let w = random_cmatrix(&mut rng, 1, 3);
        let f = analog_update(&f0, &p, &w);
        let z = &p * w.adjoint();
        for n in 0..6 {
            // χ = Z - F‖w‖² + F‖w‖² = Z.
            assert!((f[(n, 0)] - C64::from_polar(1.0, z[(n, 0)].arg())).norm() < 1e-12);
        }
    }

    #[test]
    fn analog_update_never_increases_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (n, l, k) = (rng.gen_range(4..12), rng.gen_range(1..4), rng.gen_range(1..4));
            let f0 = random_phases(&mut rng, n, l);
            let p = random_cmatrix(&mut rng, n, k);
            let w = random_cmatrix(&mut rng, l, k);
            let before = (&p - &f0 * &w).norm_squared();
            let f = analog_update(&f0, &p, &w);
            let after = (&p - &f * &w).norm_squared();
            assert!(after <= before + 1e-10 * before.max(1.0));
            assert!(f.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn analog_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f0 = random_phases(&mut rng, 8, 3);
        let w = random_cmatrix(&mut rng, 3, 3);
        let p = &f0 * &w;
        let f = analog_update(&f0, &p, &w);
        assert!((f - f0).norm() < 1e-10);
    }

    #[test]
    fn digital_update_solves_least_squares() {
        let f = dft_matrix(8).columns(0, 3).into_owned();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_cmatrix(&mut rng, 8, 2);
        let w = digital_update(&f, &p);
        assert!((&w - f.adjoint() * &p / C64::new(8.0, 0.0)).norm() < 1e-12);

        let f = random_phases(&mut rng, 10, 4);
        let w = digital_update(&f, &p.clone().resize(10, 2, C64::new(0.5, 0.0)));
        let p10 = p.clone().resize(10, 2, C64::new(0.5, 0.0));
        assert!((f.adjoint() * (&p10 - &f * &w)).norm() < 1e-10);
        // Column-by-column least squares via the SVD.
        for c in 0..2 {
            let col = f.clone().svd(true, true).solve(&p10.column(c).into_owned(), 1e-14).unwrap();
            assert!((col - w.column(c)).norm() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_analog_falls_back_to_pinv() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut f = random_phases(&mut rng, 6, 3);
        let c0 = f.column(0).into_owned();
        f.set_column(2, &c0);
        let p = random_cmatrix(&mut rng, 6, 2);
        let w = digital_update(&f, &p);
        assert!((f.adjoint() * (&p - &f * &w)).norm() < 1e-10);
    }

    fn desk(seed: u64) -> (SystemGeometry, Scenario, ChannelSet, SensingModel) {
        let g = SystemGeometry::half_wavelength(16, 8, 4, 30e9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pt = || PolarPoint::new(rng.gen_range(10.0..20.0), rng.gen_range(0.0..std::f64::consts::FRAC_PI_2));
        let users = vec![pt(), pt()];
        let target = pt();
        let s = Scenario::new(&g, users, target, 10f64.powf(-11.4), 0.1, f64::INFINITY, f64::INFINITY, 64).unwrap();
        let ch = build_channels(&g, &s).unwrap();
        let sm = build_sensing_model(&g, &s).unwrap();
        (g, s, ch, sm)
    }

    #[test]
    fn initialization_is_feasible_and_deterministic() {
        for seed in 0..10 {
            let (g, s, ch, _) = desk(seed);
            let a = initialize(&g, &s, &ch, true).unwrap();
            let b = initialize(&g, &s, &ch, true).unwrap();
            assert_eq!(a, b);
            assert!(a.unit_modulus_error() < 1e-15);
            assert!(a.hybrid().norm_squared() <= s.power_budget * (1.0 + 1e-12));
            let r = evaluate(&a.hybrid(), &ch, &s, &[0.0, 0.0]).unwrap();
            for (kp, kc) in r.r_kp.iter().zip(&r.r_kc) {
                assert!(*kp > 0.0 && *kc >= 0.0);
            }
            assert!(r.r_common >= r.r_ec - 1e-9);
        }
    }

    #[test]
    fn huge_penalty_threshold_stops_after_one_round() {
        let (g, s, ch, sm) = desk(1);
        let init = initialize(&g, &s, &ch, true).unwrap();
        let mut opts = DriverOptions { crb: false, ..Default::default() };
        opts.schedule.eps_penalty = 1e6;
        let rep = penalty_bcd(&s, &ch, &sm, init, &opts).unwrap();
        assert_eq!(rep.outer.len(), 1);
        assert_eq!(rep.outer[0].rounds, 1);
        assert_eq!(rep.inner_traces.len(), 1);
        assert_eq!(rep.status, SolveStatus::Converged);
    }
}
