//! Independent numerical oracles for the closed-form pieces of the design.
//!
//! Each check recomputes a quantity by a different route (finite differences,
//! the signal-level Fisher information, a pseudo-inverse, brute-force rate
//! formulas) and reports the worst discrepancy over random instances.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crb::{crb_closed_form, crb_joint_pinv, fim, hermitian_split, CrbParameter};
use crate::geometry::{build_channels, build_sensing_model, PolarPoint, Scenario, SensingModel, SystemGeometry};
use crate::inner::{update_quadratic_aux, update_wmmse, quadratic_transform_value, weighted_mse, TAU_WMMSE};
use crate::linalg::{dft_matrix, random_cmatrix, random_psd};
use crate::rates::{compute_rates, received_powers};
use crate::{CMatrix, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: max error {:.3e} (tol {:.0e}, {} instances)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_error,
            self.tolerance,
            self.instances
        )
    }
}

fn desk_geometry() -> SystemGeometry {
    SystemGeometry::half_wavelength(16, 8, 4, 30e9).expect("static geometry")
}

fn random_point(rng: &mut ChaCha8Rng) -> PolarPoint {
    PolarPoint::new(rng.gen_range(10.0..20.0), rng.gen_range(0.0..FRAC_PI_2))
}

fn random_scenario(geom: &SystemGeometry, rng: &mut ChaCha8Rng, users: usize, slots: usize) -> Result<Scenario> {
    let u = (0..users).map(|_| random_point(rng)).collect();
    let target = random_point(rng);
    Scenario::new(geom, u, target, 10f64.powf(-11.4), 0.1, f64::INFINITY, f64::INFINITY, slots)
}

/// Closed-form per-parameter CRB against the pseudo-inverse of the full FIM
/// with the other location derivative zeroed.
pub fn crb_equivalence(instances: usize, seed: u64) -> Result<OracleResult> {
    let geom = desk_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let s = random_scenario(&geom, &mut rng, 2, 64)?;
        let sm = build_sensing_model(&geom, &s)?;
        let p = random_cmatrix(&mut rng, geom.n_tx, 3) * C64::new(0.1, 0.0);
        for (which, reduced, idx) in [
            (CrbParameter::Angle, sm.without_range_derivative(), 0),
            (CrbParameter::Range, sm.without_angle_derivative(), 1),
        ] {
            let closed = crb_closed_form(&p, &sm, s.noise_eve, s.slots, which)?;
            let joint = crb_joint_pinv(&fim(&p, &reduced, s.noise_eve, s.slots)?);
            worst = worst.max((closed - joint[(idx, idx)]).abs() / closed);
        }
    }
    Ok(OracleResult { name: "crb closed form vs joint", instances, max_error: worst, tolerance: 1e-8 })
}

/// Fisher information built from the noiseless echo `u = vec(β G̃ X)` over
/// `T` slots with `X = P S`, `S Sᴴ = T I`:
/// `J_ij = (2/σ²) Re(∂uᴴ/∂ξ_i ∂u/∂ξ_j)`.
pub fn signal_level_fim(p: &CMatrix, sensing: &SensingModel, noise: f64, slots: usize) -> Matrix4<f64> {
    assert!(p.ncols() <= slots, "need at least as many slots as streams");
    // Rows of a scaled DFT are orthogonal with squared norm T.
    let dft = dft_matrix(slots);
    let s = dft.rows(0, p.ncols()).into_owned();
    let x = p * s;
    let beta = sensing.gain;
    let partials = [
        &sensing.g_dtheta * &x * beta,
        &sensing.g_drange * &x * beta,
        &sensing.g_tilde * &x,
        &sensing.g_tilde * &x * C64::new(0.0, 1.0),
    ];
    Matrix4::from_fn(|i, j| 2.0 / noise * partials[i].dotc(&partials[j]).re)
}

/// `fim` against [`signal_level_fim`] at `T = 3`. Entries are compared
/// relative to `max(|J_ij|, 1e-12 sqrt(J_ii J_jj))`, since off-diagonal
/// entries can vanish while the diagonal spans many orders of magnitude.
pub fn fim_signal_level(instances: usize, seed: u64) -> Result<OracleResult> {
    let geom = desk_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let s = random_scenario(&geom, &mut rng, 2, 3)?;
        let sm = build_sensing_model(&geom, &s)?;
        let p = random_cmatrix(&mut rng, geom.n_tx, 3) * C64::new(0.1, 0.0);
        let fast = fim(&p, &sm, s.noise_eve, 3)?.j;
        let direct = signal_level_fim(&p, &sm, s.noise_eve, 3);
        for i in 0..4 {
            for j in 0..4 {
                let floor = 1e-12 * (direct[(i, i)] * direct[(j, j)]).sqrt();
                let err = (fast[(i, j)] - direct[(i, j)]).abs() / direct[(i, j)].abs().max(floor);
                worst = worst.max(err);
            }
        }
    }
    Ok(OracleResult { name: "fim vs signal-level construction", instances, max_error: worst, tolerance: 1e-9 })
}

/// `τ - min_{ω,η} (η ε - log2 η) = log2(1 + SINR)` for both streams of every
/// user at the closed-form equalizers and weights.
pub fn wmmse_identity(instances: usize, seed: u64) -> Result<OracleResult> {
    let geom = desk_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let s = random_scenario(&geom, &mut rng, 2, 64)?;
        let ch = build_channels(&geom, &s)?;
        let scale = rng.gen_range(1e-3..1.0) * s.power_budget.sqrt();
        let p = random_cmatrix(&mut rng, geom.n_tx, 3) * C64::new(scale / 4.0, 0.0);
        let w = update_wmmse(&p, &ch.user_channels, &s.noise_user);
        let pd = received_powers(&p, &ch, &s.noise_user, s.noise_eve)?;
        let r = compute_rates(&pd, &[0.0, 0.0])?;
        for (k, wm) in w.iter().enumerate() {
            let h = &ch.user_channels[k];
            let y0 = h.dotc(&p.column(0));
            let yk = h.dotc(&p.column(k + 1));
            let tp = pd.users[k].i_c;
            let tc = pd.users[k].total();
            let bc = TAU_WMMSE - weighted_mse(wm.omega_c, wm.eta_c, y0, tc);
            let bp = TAU_WMMSE - weighted_mse(wm.omega_p, wm.eta_p, yk, tp);
            worst = worst.max((bc - r.r_kc[k]).abs()).max((bp - r.r_kp[k]).abs());
        }
    }
    Ok(OracleResult { name: "rate-WMMSE identity", instances, max_error: worst, tolerance: 1e-9 })
}

/// The quadratic-transform lower bound on `-R_e` equals it at the optimal
/// auxiliary vector, for the common and every private stream.
pub fn quadratic_transform_tightness(instances: usize, seed: u64) -> Result<OracleResult> {
    let geom = desk_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let s = random_scenario(&geom, &mut rng, 2, 64)?;
        let ch = build_channels(&geom, &s)?;
        let scale = rng.gen_range(1e-3..1.0) * s.power_budget.sqrt();
        let p = random_cmatrix(&mut rng, geom.n_tx, 3) * C64::new(scale / 4.0, 0.0);
        let g = &ch.eve_channel;
        let aux = update_quadratic_aux(&p, g, s.noise_eve)?;
        let pd = received_powers(&p, &ch, &s.noise_user, s.noise_eve)?;
        let r = compute_rates(&pd, &[0.0, 0.0])?;
        let fc = quadratic_transform_value(&aux.x_common, &p, g, s.noise_eve, 0);
        worst = worst.max((fc + r.r_ec).abs());
        for k in 0..2 {
            let fk = quadratic_transform_value(&aux.x_private[k], &p, g, s.noise_eve, k + 1);
            worst = worst.max((fk + r.r_ek[k]).abs());
        }
    }
    Ok(OracleResult { name: "quadratic transform tightness", instances, max_error: worst, tolerance: 1e-9 })
}

/// `Re Tr(AX) = Tr(M₊X) - Tr(M₋X)` for random complex `A` and PSD `X`, `N ≤ 16`.
pub fn hermitian_split_identity(instances: usize, seed: u64) -> Result<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range(1..=16);
        let a = random_cmatrix(&mut rng, n, n);
        let rank = rng.gen_range(1..=n);
        let x = random_psd(&mut rng, n, rank) / C64::new(n as f64, 0.0);
        let s = hermitian_split(&a);
        let lhs = (&a * &x).trace().re;
        let rhs = (&s.m_plus * &x).trace().re - (&s.m_minus * &x).trace().re;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(OracleResult { name: "hermitian split identity", instances, max_error: worst, tolerance: 1e-10 })
}

/// Analytic `Ġ_θ`, `Ġ_r` against central differences of `G̃`.
pub fn derivative_check(instances: usize, seed: u64) -> Result<OracleResult> {
    let geom = desk_geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let s = random_scenario(&geom, &mut rng, 1, 64)?;
        let sm = build_sensing_model(&geom, &s)?;
        let at = |theta: f64, r: f64| -> Result<CMatrix> {
            let mut moved = s.clone();
            moved.target = PolarPoint::new(r, theta);
            Ok(build_sensing_model(&geom, &moved)?.g_tilde)
        };
        let (theta, r) = (s.target.angle_rad, s.target.range_m);
        // Fourth-order central stencil. The range derivative carries cos²θ and
        // vanishes toward endfire, so its step is relatively large.
        let central = |f: &dyn Fn(f64) -> Result<CMatrix>, h: f64| -> Result<CMatrix> {
            let num = (f(-2.0 * h)? - f(2.0 * h)?) + (f(h)? - f(-h)?) * C64::new(8.0, 0.0);
            Ok(num / C64::new(12.0 * h, 0.0))
        };
        let dt = central(&|d| at(theta + d, r), 1e-4)?;
        let dr = central(&|d| at(theta, r + d), 1e-2 * r)?;
        worst = worst
            .max((&dt - &sm.g_dtheta).norm() / sm.g_dtheta.norm())
            .max((&dr - &sm.g_drange).norm() / sm.g_drange.norm());
    }
    Ok(OracleResult { name: "steering derivatives vs central differences", instances, max_error: worst, tolerance: 1e-5 })
}

/// Every oracle at its default instance count.
pub fn run_all(seed: u64) -> Result<Vec<OracleResult>> {
    Ok(vec![
        crb_equivalence(50, seed)?,
        fim_signal_level(20, seed)?,
        wmmse_identity(1000, seed)?,
        quadratic_transform_tightness(1000, seed)?,
        hermitian_split_identity(1000, seed)?,
        derivative_check(20, seed)?,
    ])
}
