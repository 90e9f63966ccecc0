//! Received powers, achievable rates and secrecy rates for a given beamfocuser.
//!
//! Column 0 of a fully digital beamfocuser `P` carries the common stream, column
//! `k` the private stream of user `k`. All rates are in bits/s/Hz.

use crate::crb::{crb_closed_form, CrbParameter};
use crate::geometry::{ChannelSet, Scenario, SensingModel};
use crate::{CMatrix, Error, Result};

/// Decision variables of the hybrid design.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamState {
    /// Fully digital auxiliary beamfocuser `P`, `N × (K+1)`.
    pub digital_full: CMatrix,
    /// Analog phase network `F`, `N × L`, unit modulus.
    pub analog: CMatrix,
    /// Baseband precoder `W`, `L × (K+1)`.
    pub digital: CMatrix,
    /// Common secrecy rate allotted to each user.
    pub common_alloc: Vec<f64>,
}

impl BeamState {
    pub fn hybrid(&self) -> CMatrix {
        &self.analog * &self.digital
    }

    /// `‖P - FW‖_F²`.
    pub fn penalty_residual_sq(&self) -> f64 {
        (&self.digital_full - self.hybrid()).norm_squared()
    }

    pub fn unit_modulus_error(&self) -> f64 {
        self.analog.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPowers {
    /// `|h_kᴴ p_0|²`
    pub s_c: f64,
    /// `|h_kᴴ p_k|²`
    pub s_p: f64,
    /// Private-stream interference plus noise.
    pub i_p: f64,
    /// Common-stream interference plus noise, `s_p + i_p`.
    pub i_c: f64,
}

impl UserPowers {
    pub fn total(&self) -> f64 {
        self.s_c + self.i_c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvePowers {
    pub s_c: f64,
    /// `|g_eᴴ p_k|²` per user.
    pub s_k: Vec<f64>,
    /// `Σ_{i≥1, i≠k} |g_eᴴ p_i|² + σ_e²` per user.
    pub i_k: Vec<f64>,
    /// `Σ_{i≥1} |g_eᴴ p_i|² + σ_e²`.
    pub i_c: f64,
}

impl EvePowers {
    pub fn total(&self) -> f64 {
        self.s_c + self.i_c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDecomposition {
    pub users: Vec<UserPowers>,
    pub eve: EvePowers,
}

pub fn received_powers(
    p: &CMatrix,
    channels: &ChannelSet,
    noise_user: &[f64],
    noise_eve: f64,
) -> Result<PowerDecomposition> {
    let k = channels.num_users();
    if p.ncols() != k + 1 || p.nrows() != channels.n_tx() {
        return Err(Error::Dimension(format!(
            "beamfocuser is {}x{}, expected {}x{}",
            p.nrows(),
            p.ncols(),
            channels.n_tx(),
            k + 1
        )));
    }
    if noise_user.len() != k {
        return Err(Error::Dimension(format!("{} noise powers for {k} users", noise_user.len())));
    }
    let gains = |h: &crate::CVector| -> Vec<f64> {
        (0..=k).map(|i| h.dotc(&p.column(i)).norm_sqr()).collect()
    };
    let users = channels
        .user_channels
        .iter()
        .zip(noise_user)
        .enumerate()
        .map(|(idx, (h, &noise))| {
            let g = gains(h);
            let user = idx + 1;
            let others: f64 = (1..=k).filter(|&i| i != user).map(|i| g[i]).sum();
            let i_p = others + noise;
            UserPowers {
                s_c: g[0],
                s_p: g[user],
                i_p,
                i_c: g[user] + i_p,
            }
        })
        .collect();
    let g = gains(&channels.eve_channel);
    let private_sum: f64 = g[1..].iter().sum();
    let eve = EvePowers {
        s_c: g[0],
        s_k: g[1..].to_vec(),
        i_k: g[1..].iter().map(|s| private_sum - s + noise_eve).collect(),
        i_c: private_sum + noise_eve,
    };
    Ok(PowerDecomposition { users, eve })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub r_kc: Vec<f64>,
    pub r_kp: Vec<f64>,
    /// `min_k r_kc`, the decodable common rate.
    pub r_common: f64,
    pub r_ec: f64,
    pub r_ek: Vec<f64>,
    /// `r_common - r_ec` before clamping.
    pub secrecy_common_raw: f64,
    /// `r_kp - r_ek` before clamping.
    pub secrecy_private_raw: Vec<f64>,
    pub secrecy_common: f64,
    pub secrecy_private: Vec<f64>,
    pub secrecy_total: Vec<f64>,
}

impl RateReport {
    pub fn min_secrecy(&self) -> f64 {
        self.secrecy_total.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn rate(signal: f64, interference: f64) -> f64 {
    (signal / interference).ln_1p() / std::f64::consts::LN_2
}

pub fn compute_rates(pd: &PowerDecomposition, alloc: &[f64]) -> Result<RateReport> {
    let k = pd.users.len();
    if alloc.len() != k || pd.eve.s_k.len() != k || pd.eve.i_k.len() != k {
        return Err(Error::Dimension(format!("allocation has {} entries for {k} users", alloc.len())));
    }
    let negative = pd
        .users
        .iter()
        .flat_map(|u| [u.s_c, u.s_p, u.i_p, u.i_c])
        .chain([pd.eve.s_c, pd.eve.i_c])
        .chain(pd.eve.s_k.iter().copied())
        .chain(pd.eve.i_k.iter().copied())
        .any(|v| v < 0.0 || !v.is_finite());
    if negative {
        return Err(Error::InvalidParameter("received powers must be finite and non-negative".into()));
    }
    let r_kc: Vec<f64> = pd.users.iter().map(|u| rate(u.s_c, u.i_c)).collect();
    let r_kp: Vec<f64> = pd.users.iter().map(|u| rate(u.s_p, u.i_p)).collect();
    let r_common = r_kc.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_ec = rate(pd.eve.s_c, pd.eve.i_c);
    // The common stream acts as artificial noise on private-stream eavesdropping.
    let r_ek: Vec<f64> = (0..k)
        .map(|i| rate(pd.eve.s_k[i], pd.eve.i_k[i] + pd.eve.s_c))
        .collect();
    let secrecy_common_raw = r_common - r_ec;
    let secrecy_private_raw: Vec<f64> = r_kp.iter().zip(&r_ek).map(|(a, b)| a - b).collect();
    let secrecy_private: Vec<f64> = secrecy_private_raw.iter().map(|v| v.max(0.0)).collect();
    let secrecy_total = alloc.iter().zip(&secrecy_private).map(|(a, b)| a + b).collect();
    Ok(RateReport {
        r_kc,
        r_kp,
        r_common,
        r_ec,
        r_ek,
        secrecy_common_raw,
        secrecy_private_raw,
        secrecy_common: secrecy_common_raw.max(0.0),
        secrecy_private,
        secrecy_total,
    })
}

/// Splits a common budget over users to maximize `min_k (c_k + base_k)` with
/// `c_k ≥ 0`, `Σ c_k ≤ budget` (water-filling). Returns `(split, min value)`.
pub fn best_common_split(budget: f64, base: &[f64]) -> (Vec<f64>, f64) {
    let budget = budget.max(0.0);
    let mut sorted: Vec<f64> = base.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut level = f64::NEG_INFINITY;
    let mut used = 0.0;
    for i in 0..sorted.len() {
        // Raise the lowest i+1 entries together.
        let next = sorted.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let width = (i + 1) as f64;
        let prefix: f64 = sorted[..=i].iter().sum();
        let cost_to_next = width * next - prefix;
        if cost_to_next >= budget || !next.is_finite() {
            level = (budget + prefix) / width;
            used = budget;
            break;
        }
    }
    if sorted.is_empty() {
        return (Vec::new(), f64::INFINITY);
    }
    let split: Vec<f64> = base.iter().map(|b| (level - b).max(0.0)).collect();
    debug_assert!(split.iter().sum::<f64>() <= used + 1e-9 * (1.0 + used));
    let value = base
        .iter()
        .zip(&split)
        .map(|(b, c)| b + c)
        .fold(f64::INFINITY, f64::min);
    (split, value)
}

/// Convenience: powers plus rates for a beamfocuser and allocation.
pub fn evaluate(
    p: &CMatrix,
    channels: &ChannelSet,
    scenario: &Scenario,
    alloc: &[f64],
) -> Result<RateReport> {
    let pd = received_powers(p, channels, &scenario.noise_user, scenario.noise_eve)?;
    compute_rates(&pd, alloc)
}

/// Max–min secrecy rate of a beamfocuser under the best common split (clamped rates).
pub fn max_min_secrecy(p: &CMatrix, channels: &ChannelSet, scenario: &Scenario) -> Result<(f64, Vec<f64>)> {
    let k = channels.num_users();
    let report = evaluate(p, channels, scenario, &vec![0.0; k])?;
    let (split, value) = best_common_split(report.secrecy_common, &report.secrecy_private);
    Ok((value, split))
}

/// Constraint violations of a hybrid design, evaluated on `FW`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// `max(‖FW‖² / P_th - 1, 0)`.
    pub power: f64,
    pub unit_modulus: f64,
    pub crb_angle: f64,
    pub crb_range: f64,
    /// Relative CRB violations `max(CRB/Γ - 1, 0)`; ∞ for a degenerate beam.
    pub crb_angle_violation: f64,
    pub crb_range_violation: f64,
    /// `max(Σ_k alloc_k - R^s_c, 0)`.
    pub allocation: f64,
    /// `max(R_ec - min_k R_kc, 0)`: the common stream must be decodable by
    /// every user at least as well as by the eavesdropper.
    pub common_ordering: f64,
    pub negative_alloc: f64,
    /// `‖P - FW‖_F`.
    pub penalty_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityTolerances {
    pub power: f64,
    pub unit_modulus: f64,
    pub crb: f64,
    pub rate: f64,
}

impl Default for FeasibilityTolerances {
    fn default() -> Self {
        Self {
            power: 1e-9,
            unit_modulus: 1e-12,
            crb: 1e-2,
            rate: 1e-6,
        }
    }
}

impl FeasibilityReport {
    pub fn satisfies(&self, tol: &FeasibilityTolerances) -> bool {
        self.power <= tol.power
            && self.unit_modulus <= tol.unit_modulus
            && self.crb_angle_violation <= tol.crb
            && self.crb_range_violation <= tol.crb
            && self.allocation <= tol.rate
            && self.common_ordering <= tol.rate
            && self.negative_alloc <= tol.rate
    }
}

fn crb_violation(value: f64, limit: f64) -> f64 {
    if limit.is_infinite() {
        0.0
    } else if value.is_finite() {
        (value / limit - 1.0).max(0.0)
    } else {
        f64::INFINITY
    }
}

pub fn check_feasibility(
    state: &BeamState,
    scenario: &Scenario,
    channels: &ChannelSet,
    sensing: &SensingModel,
) -> Result<FeasibilityReport> {
    let fw = state.hybrid();
    let report = evaluate(&fw, channels, scenario, &state.common_alloc)?;
    let crb = |which| {
        crb_closed_form(&fw, sensing, scenario.noise_eve, scenario.slots, which).unwrap_or(f64::INFINITY)
    };
    let crb_angle = crb(CrbParameter::Angle);
    let crb_range = crb(CrbParameter::Range);
    let alloc_sum: f64 = state.common_alloc.iter().sum();
    let min_alloc = state.common_alloc.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FeasibilityReport {
        power: (fw.norm_squared() / scenario.power_budget - 1.0).max(0.0),
        unit_modulus: state.unit_modulus_error(),
        crb_angle,
        crb_range,
        crb_angle_violation: crb_violation(crb_angle, scenario.crb_angle_max),
        crb_range_violation: crb_violation(crb_range, scenario.crb_range_max),
        allocation: (alloc_sum - report.secrecy_common).max(0.0),
        common_ordering: (report.r_ec - report.r_common).max(0.0),
        negative_alloc: (-min_alloc).max(0.0),
        penalty_residual: state.penalty_residual_sq().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::linalg::{random_cmatrix, random_cvector};
    use crate::{CVector, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> ChannelSet {
        ChannelSet {
            user_channels: (0..k).map(|_| random_cvector(rng, n)).collect(),
            user_gains: vec![C64::new(1.0, 0.0); k],
            eve_channel: random_cvector(rng, n),
            eve_gain: C64::new(1.0, 0.0),
        }
    }

    /// Brute-force evaluator: double loop over users and streams, no shared code.
    fn brute_force(p: &CMatrix, ch: &ChannelSet, noise: &[f64], noise_e: f64) -> (Vec<[f64; 4]>, f64, Vec<f64>, Vec<f64>, f64) {
        let k = ch.num_users();
        let n = p.nrows();
        let inner = |h: &CVector, i: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for row in 0..n {
                acc += h[row].conj() * p[(row, i)];
            }
            acc.norm_sqr()
        };
        let mut users = Vec::new();
        for u in 0..k {
            let mut i_p = noise[u];
            for i in 1..=k {
                if i != u + 1 {
                    i_p += inner(&ch.user_channels[u], i);
                }
            }
            let s_p = inner(&ch.user_channels[u], u + 1);
            users.push([inner(&ch.user_channels[u], 0), s_p, i_p, s_p + i_p]);
        }
        let s_ec = inner(&ch.eve_channel, 0);
        let s_ek: Vec<f64> = (1..=k).map(|i| inner(&ch.eve_channel, i)).collect();
        let mut i_ek = Vec::new();
        for u in 0..k {
            let mut acc = noise_e;
            for i in 1..=k {
                if i != u + 1 {
                    acc += inner(&ch.eve_channel, i);
                }
            }
            i_ek.push(acc);
        }
        let i_ec = s_ek.iter().sum::<f64>() + noise_e;
        (users, s_ec, s_ek, i_ek, i_ec)
    }

    #[test]
    fn zero_beam_gives_noise_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = random_channels(&mut rng, 8, 3);
        let pd = received_powers(&CMatrix::zeros(8, 4), &ch, &[0.5, 0.7, 0.9], 0.3).unwrap();
        for (u, noise) in pd.users.iter().zip([0.5, 0.7, 0.9]) {
            assert_eq!((u.s_c, u.s_p), (0.0, 0.0));
            assert_eq!((u.i_p, u.i_c), (noise, noise));
        }
        assert_eq!(pd.eve.s_c, 0.0);
        assert_eq!(pd.eve.i_c, 0.3);
        assert!(pd.eve.i_k.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn orthogonal_common_beam_gives_zero_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = random_channels(&mut rng, 4, 1);
        let h = &ch.user_channels[0];
        let mut p = random_cmatrix(&mut rng, 4, 2);
        let p0 = p.column(0).clone_owned();
        let proj = h * (h.dotc(&p0) / h.dotc(h));
        p.set_column(0, &(p0 - proj));
        let pd = received_powers(&p, &ch, &[1.0], 1.0).unwrap();
        assert!(pd.users[0].s_c < 1e-28);
    }

    #[test]
    fn powers_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let ch = random_channels(&mut rng, 8, 2);
            let p = random_cmatrix(&mut rng, 8, 3);
            let noise = [rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)];
            let pd = received_powers(&p, &ch, &noise, 0.4).unwrap();
            let (users, s_ec, s_ek, i_ek, i_ec) = brute_force(&p, &ch, &noise, 0.4);
            for (got, want) in pd.users.iter().zip(&users) {
                for (a, b) in [got.s_c, got.s_p, got.i_p, got.i_c].iter().zip(want) {
                    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
            assert!((pd.eve.s_c - s_ec).abs() < 1e-12 * s_ec.max(1.0));
            assert!((pd.eve.i_c - i_ec).abs() < 1e-12 * i_ec);
            for i in 0..2 {
                assert!((pd.eve.s_k[i] - s_ek[i]).abs() < 1e-12 * s_ek[i].max(1.0));
                assert!((pd.eve.i_k[i] - i_ek[i]).abs() < 1e-12 * i_ek[i]);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = random_channels(&mut rng, 8, 2);
        assert!(matches!(
            received_powers(&CMatrix::zeros(8, 2), &ch, &[1.0, 1.0], 1.0),
            Err(Error::Dimension(_))
        ));
    }

    fn powers(s_c: f64, s_p: f64, i_p: f64) -> UserPowers {
        UserPowers { s_c, s_p, i_p, i_c: s_p + i_p }
    }

    #[test]
    fn unit_sinr_gives_one_bit() {
        let pd = PowerDecomposition {
            users: vec![powers(3.0, 1.0, 2.0)],
            eve: EvePowers { s_c: 0.0, s_k: vec![0.0], i_k: vec![1.0], i_c: 1.0 },
        };
        let r = compute_rates(&pd, &[0.0]).unwrap();
        assert!((r.r_kc[0] - 1.0).abs() < 1e-15);
        assert!((r.r_kp[0] - 0.5f64.ln_1p() / std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn identical_sinrs_give_zero_secrecy() {
        // Eavesdropper sees exactly what the user sees, including common-stream jamming.
        let pd = PowerDecomposition {
            users: vec![powers(2.0, 1.0, 1.0)],
            eve: EvePowers { s_c: 2.0, s_k: vec![1.0], i_k: vec![1.0], i_c: 2.0 },
        };
        let r = compute_rates(&pd, &[0.0]).unwrap();
        assert_eq!(r.secrecy_common, 0.0);
        assert!(r.secrecy_private[0] >= 0.0);
        assert!(r.secrecy_private_raw[0] > 0.0, "SIC gives the user a jamming-free private stream");

        let pd = PowerDecomposition {
            users: vec![powers(0.0, 1.0, 1.0)],
            eve: EvePowers { s_c: 0.0, s_k: vec![1.0], i_k: vec![1.0], i_c: 2.0 },
        };
        let r = compute_rates(&pd, &[0.0]).unwrap();
        assert_eq!(r.secrecy_common, 0.0);
        assert_eq!(r.secrecy_private[0], 0.0);
    }

    #[test]
    fn three_user_secrecy_matches_scalar_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = random_channels(&mut rng, 6, 3);
        let p = random_cmatrix(&mut rng, 6, 4);
        let pd = received_powers(&p, &ch, &[1.0, 1.5, 0.5], 2.0).unwrap();
        let r = compute_rates(&pd, &[0.1, 0.0, 0.2]).unwrap();
        let (users, s_ec, _, _, i_ec) = brute_force(&p, &ch, &[1.0, 1.5, 0.5], 2.0);
        let mut rmin = f64::INFINITY;
        for u in &users {
            rmin = rmin.min((1.0 + u[0] / u[3]).log2());
        }
        let rec = (1.0 + s_ec / i_ec).log2();
        assert!((r.secrecy_common_raw - (rmin - rec)).abs() < 1e-12);
        assert!((r.secrecy_common - (rmin - rec).max(0.0)).abs() < 1e-12);
        for i in 0..3 {
            assert!((r.secrecy_total[i] - ([0.1, 0.0, 0.2][i] + r.secrecy_private[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_power_is_a_contract_error() {
        let pd = PowerDecomposition {
            users: vec![powers(-1.0, 1.0, 1.0)],
            eve: EvePowers { s_c: 0.0, s_k: vec![0.0], i_k: vec![1.0], i_c: 1.0 },
        };
        assert!(compute_rates(&pd, &[0.0]).is_err());
    }

    #[test]
    fn water_filling_split() {
        let (split, v) = best_common_split(1.0, &[0.5, 0.0, 2.0]);
        // Level 0.75: 0.25 + 0.75 = 1.0.
        assert!((v - 0.75).abs() < 1e-12);
        assert!((split[0] - 0.25).abs() < 1e-12 && (split[1] - 0.75).abs() < 1e-12 && split[2] == 0.0);
        let (split, v) = best_common_split(0.0, &[0.3, 0.1]);
        assert_eq!(split, vec![0.0, 0.0]);
        assert!((v - 0.1).abs() < 1e-15);
        let (split, v) = best_common_split(3.0, &[1.0, 1.0]);
        assert!((v - 2.5).abs() < 1e-12 && (split.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    fn desk() -> (SystemGeometry, Scenario, ChannelSet, SensingModel) {
        let g = SystemGeometry::half_wavelength(16, 8, 4, 30e9).unwrap();
        let s = Scenario::new(
            &g,
            vec![PolarPoint::new(11.0, 0.3), PolarPoint::new(16.0, 1.2)],
            PolarPoint::new(13.0, 0.7),
            10f64.powf(-11.4),
            0.1,
            1e3,
            1e9,
            64,
        )
        .unwrap();
        let ch = build_channels(&g, &s).unwrap();
        let sm = build_sensing_model(&g, &s).unwrap();
        (g, s, ch, sm)
    }

    #[test]
    fn zero_beam_violates_crb_but_not_power() {
        let (_, s, ch, sm) = desk();
        let state = BeamState {
            digital_full: CMatrix::zeros(16, 3),
            analog: CMatrix::from_element(16, 4, C64::new(1.0, 0.0)),
            digital: CMatrix::zeros(4, 3),
            common_alloc: vec![0.0, 0.0],
        };
        let f = check_feasibility(&state, &s, &ch, &sm).unwrap();
        assert_eq!(f.power, 0.0);
        assert!(f.crb_angle_violation.is_infinite() && f.crb_range_violation.is_infinite());
        assert_eq!(f.unit_modulus, 0.0);
    }

    #[test]
    fn allocation_overshoot_is_measured() {
        let (_, s, ch, sm) = desk();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f_mat = crate::linalg::random_phases(&mut rng, 16, 4);
        let w = random_cmatrix(&mut rng, 4, 3) * C64::new(0.01, 0.0);
        let fw = &f_mat * &w;
        let r = evaluate(&fw, &ch, &s, &[0.0, 0.0]).unwrap();
        let half = r.secrecy_common / 2.0;
        let state = BeamState {
            digital_full: fw.clone(),
            analog: f_mat,
            digital: w,
            common_alloc: vec![half + 0.05, half + 0.05],
        };
        let f = check_feasibility(&state, &s, &ch, &sm).unwrap();
        assert!((f.allocation - 0.1).abs() < 1e-12, "{}", f.allocation);
        assert!(f.penalty_residual < 1e-15);
    }

    #[test]
    fn eavesdropper_noise_never_hurts_secrecy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ch = random_channels(&mut rng, 6, 2);
            let p = random_cmatrix(&mut rng, 6, 3);
            let noise = rng.gen_range(0.1..3.0);
            let bump = noise * rng.gen_range(1.0..5.0);
            let a = compute_rates(&received_powers(&p, &ch, &[1.0, 1.0], noise).unwrap(), &[0.0, 0.0]).unwrap();
            let b = compute_rates(&received_powers(&p, &ch, &[1.0, 1.0], bump).unwrap(), &[0.0, 0.0]).unwrap();
            for i in 0..2 {
                assert!(b.secrecy_private[i] >= a.secrecy_private[i] - 1e-12);
            }
            assert!(b.secrecy_common >= a.secrecy_common - 1e-12);
        }
    }

    #[test]
    fn scaled_beam_sinrs_match_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = random_channels(&mut rng, 6, 2);
        let p = random_cmatrix(&mut rng, 6, 3);
        let c: f64 = 3.7;
        let scaled = &p * C64::new(c.sqrt(), 0.0);
        let a = received_powers(&p, &ch, &[1.0, 1.0], 1.0).unwrap();
        let b = received_powers(&scaled, &ch, &[1.0, 1.0], 1.0).unwrap();
        for (ua, ub) in a.users.iter().zip(&b.users) {
            assert!((ub.s_c - c * ua.s_c).abs() < 1e-12 * ub.s_c.max(1.0));
            assert!((ub.i_p - (c * (ua.i_p - 1.0) + 1.0)).abs() < 1e-12 * ub.i_p);
        }
    }
}
