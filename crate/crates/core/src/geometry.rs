//! Array geometry and spherical-wavefront channel synthesis.
//!
//! Transmit antennas sit at `(0, n d)` for `n = 1..=N`, receive antennas at
//! `(0, -m d)` for `m = 1..=M`. Positions of users and the target are polar
//! coordinates about the origin. Steering vectors use the second-order
//! (Fresnel) expansion of the element-to-point distance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemGeometry {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_rf: usize,
    /// Inter-antenna spacing in meters.
    pub spacing: f64,
    pub carrier_hz: f64,
    pub wavelength: f64,
}

impl SystemGeometry {
    pub fn new(n_tx: usize, n_rx: usize, n_rf: usize, spacing: f64, carrier_hz: f64) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 || n_rf == 0 {
            return Err(Error::InvalidParameter("antenna and RF-chain counts must be >= 1".into()));
        }
        if n_rf > n_tx {
            return Err(Error::InvalidParameter(format!(
                "n_rf ({n_rf}) must not exceed n_tx ({n_tx})"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing must be > 0, got {spacing}")));
        }
        if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
            return Err(Error::InvalidParameter(format!("carrier must be > 0, got {carrier_hz}")));
        }
        Ok(Self {
            n_tx,
            n_rx,
            n_rf,
            spacing,
            carrier_hz,
            wavelength: SPEED_OF_LIGHT / carrier_hz,
        })
    }

    /// Geometry with half-wavelength spacing.
    pub fn half_wavelength(n_tx: usize, n_rx: usize, n_rf: usize, carrier_hz: f64) -> Result<Self> {
        let spacing = SPEED_OF_LIGHT / carrier_hz / 2.0;
        Self::new(n_tx, n_rx, n_rf, spacing, carrier_hz)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn aperture(&self) -> f64 {
        self.n_tx as f64 * self.spacing
    }

    /// Rayleigh distance `2 D^2 / λ` of the transmit aperture.
    pub fn rayleigh_distance(&self) -> f64 {
        2.0 * self.aperture().powi(2) / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub range_m: f64,
    pub angle_rad: f64,
}

impl PolarPoint {
    pub fn new(range_m: f64, angle_rad: f64) -> Self {
        Self { range_m, angle_rad }
    }

    fn check(&self) -> Result<()> {
        if !(self.range_m > 0.0) || !self.range_m.is_finite() {
            return Err(Error::Domain(format!("range must be > 0, got {}", self.range_m)));
        }
        if !self.angle_rad.is_finite() {
            return Err(Error::Domain("angle must be finite".into()));
        }
        Ok(())
    }
}

/// One problem instance: positions, noise, power budget and sensing requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: Vec<PolarPoint>,
    pub target: PolarPoint,
    /// Per-user noise power in Watts.
    pub noise_user: Vec<f64>,
    /// Noise power at the eavesdropper and at the sensing receiver, Watts.
    pub noise_eve: f64,
    pub power_budget: f64,
    /// Maximum angle CRB, rad². `f64::INFINITY` disables the constraint.
    pub crb_angle_max: f64,
    /// Maximum range CRB, m². `f64::INFINITY` disables the constraint.
    pub crb_range_max: f64,
    pub slots: usize,
    pub sensing_gain: C64,
}

impl Scenario {
    /// Builds a scenario with equal user noise and the two-way Fresnel
    /// round-trip gain toward the target.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        geom: &SystemGeometry,
        users: Vec<PolarPoint>,
        target: PolarPoint,
        noise: f64,
        power_budget: f64,
        crb_angle_max: f64,
        crb_range_max: f64,
        slots: usize,
    ) -> Result<Self> {
        target.check()?;
        let sensing_gain = default_sensing_gain(geom, target.range_m)?;
        let s = Self {
            noise_user: vec![noise; users.len()],
            users,
            target,
            noise_eve: noise,
            power_budget,
            crb_angle_max,
            crb_range_max,
            slots,
            sensing_gain,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::InvalidParameter("at least one user is required".into()));
        }
        if self.noise_user.len() != self.users.len() {
            return Err(Error::Dimension(format!(
                "{} noise powers for {} users",
                self.noise_user.len(),
                self.users.len()
            )));
        }
        for p in self.users.iter().chain(std::iter::once(&self.target)) {
            p.check()?;
        }
        if self.noise_user.iter().any(|&n| !(n > 0.0)) || !(self.noise_eve > 0.0) {
            return Err(Error::InvalidParameter("noise powers must be > 0".into()));
        }
        if !(self.power_budget > 0.0) {
            return Err(Error::InvalidParameter("power budget must be > 0".into()));
        }
        if !(self.crb_angle_max > 0.0) || !(self.crb_range_max > 0.0) {
            return Err(Error::InvalidParameter("CRB thresholds must be > 0".into()));
        }
        if self.slots == 0 {
            return Err(Error::InvalidParameter("slots must be >= 1".into()));
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn with_crb_thresholds(mut self, angle: f64, range: f64) -> Self {
        self.crb_angle_max = angle;
        self.crb_range_max = range;
        self
    }
}

/// `β̃ = (c / 4πf r)² e^{-j4πr/λ}`: two-way path loss and phase.
pub fn default_sensing_gain(geom: &SystemGeometry, range: f64) -> Result<C64> {
    let one_way = complex_gain(geom, range)?;
    Ok(one_way * one_way)
}

/// Channels of the users and the eavesdropping target.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub user_channels: Vec<CVector>,
    pub user_gains: Vec<C64>,
    pub eve_channel: CVector,
    pub eve_gain: C64,
}

impl ChannelSet {
    pub fn num_users(&self) -> usize {
        self.user_channels.len()
    }

    pub fn n_tx(&self) -> usize {
        self.eve_channel.len()
    }
}

/// Round-trip sensing channel `G = β̃ G̃` and its derivatives with respect to
/// the target angle and range.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingModel {
    pub g_tilde: CMatrix,
    pub g_dtheta: CMatrix,
    pub g_drange: CMatrix,
    pub gain: C64,
}

impl SensingModel {
    /// Copy with `Ġ_r = 0`, i.e. the range treated as known.
    pub fn without_range_derivative(&self) -> Self {
        let mut s = self.clone();
        s.g_drange.fill(C64::new(0.0, 0.0));
        s
    }

    /// Copy with `Ġ_θ = 0`, i.e. the angle treated as known.
    pub fn without_angle_derivative(&self) -> Self {
        let mut s = self.clone();
        s.g_dtheta.fill(C64::new(0.0, 0.0));
        s
    }
}

/// Phase exponent and its θ/r derivatives for an element at signed offset `x`
/// along the array axis. The exponent is `-x sinθ + x² cos²θ / 2r`.
fn fresnel_phase(x: f64, p: &PolarPoint) -> (f64, f64, f64) {
    let (s, c) = p.angle_rad.sin_cos();
    let r = p.range_m;
    let phase = -x * s + x * x * c * c / (2.0 * r);
    let d_theta = -x * c - x * x * s * c / r;
    let d_range = -x * x * c * c / (2.0 * r * r);
    (phase, d_theta, d_range)
}

/// Steering vector with analytic derivatives. `sign = +1` for the transmit
/// array (elements at `+n d`), `-1` for the receive array.
fn steering(
    geom: &SystemGeometry,
    count: usize,
    sign: f64,
    p: &PolarPoint,
) -> Result<(CVector, CVector, CVector)> {
    p.check()?;
    let k = geom.wavenumber();
    let mut v = CVector::zeros(count);
    let mut dt = CVector::zeros(count);
    let mut dr = CVector::zeros(count);
    for i in 0..count {
        let x = sign * (i + 1) as f64 * geom.spacing;
        let (phase, d_theta, d_range) = fresnel_phase(x, p);
        let e = C64::from_polar(1.0, -k * phase);
        // d/dξ e^{-jkφ} = -jk φ' e^{-jkφ}
        let jk = C64::new(0.0, -k);
        v[i] = e;
        dt[i] = jk * d_theta * e;
        dr[i] = jk * d_range * e;
    }
    Ok((v, dt, dr))
}

/// Near-field transmit response `a(r, θ)`, length `N`.
pub fn tx_array_response(geom: &SystemGeometry, p: &PolarPoint) -> Result<CVector> {
    Ok(steering(geom, geom.n_tx, 1.0, p)?.0)
}

/// Near-field receive response `b(r, θ)`, length `M`.
pub fn rx_array_response(geom: &SystemGeometry, p: &PolarPoint) -> Result<CVector> {
    Ok(steering(geom, geom.n_rx, -1.0, p)?.0)
}

/// Plane-wave response `e^{+j 2π n d sinθ / λ}`, used by the far-field benchmark.
pub fn far_field_response(geom: &SystemGeometry, angle_rad: f64) -> CVector {
    let k = geom.wavenumber();
    let s = angle_rad.sin();
    CVector::from_iterator(
        geom.n_tx,
        (1..=geom.n_tx).map(|n| C64::from_polar(1.0, k * n as f64 * geom.spacing * s)),
    )
}

/// Free-space gain `(c / 4πf r) e^{-j2πr/λ}`.
pub fn complex_gain(geom: &SystemGeometry, range: f64) -> Result<C64> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::Domain(format!("range must be > 0, got {range}")));
    }
    let mag = SPEED_OF_LIGHT / (4.0 * PI * geom.carrier_hz * range);
    Ok(C64::from_polar(mag, -geom.wavenumber() * range))
}

/// `gain · response`, the common-gain channel model.
pub fn focused_channel(gain: C64, response: &CVector) -> CVector {
    response * gain
}

pub fn build_channels(geom: &SystemGeometry, scenario: &Scenario) -> Result<ChannelSet> {
    let mut user_channels = Vec::with_capacity(scenario.num_users());
    let mut user_gains = Vec::with_capacity(scenario.num_users());
    for u in &scenario.users {
        let gain = complex_gain(geom, u.range_m)?;
        user_channels.push(focused_channel(gain, &tx_array_response(geom, u)?));
        user_gains.push(gain);
    }
    let eve_gain = complex_gain(geom, scenario.target.range_m)?;
    let eve_channel = focused_channel(eve_gain, &tx_array_response(geom, &scenario.target)?);
    Ok(ChannelSet {
        user_channels,
        user_gains,
        eve_channel,
        eve_gain,
    })
}

/// Channels under the plane-wave model: same path gains, far-field responses.
pub fn build_far_field_channels(geom: &SystemGeometry, scenario: &Scenario) -> Result<ChannelSet> {
    let mut user_channels = Vec::with_capacity(scenario.num_users());
    let mut user_gains = Vec::with_capacity(scenario.num_users());
    for u in &scenario.users {
        let gain = complex_gain(geom, u.range_m)?;
        user_channels.push(focused_channel(gain, &far_field_response(geom, u.angle_rad)));
        user_gains.push(gain);
    }
    let eve_gain = complex_gain(geom, scenario.target.range_m)?;
    let eve_channel = focused_channel(eve_gain, &far_field_response(geom, scenario.target.angle_rad));
    Ok(ChannelSet {
        user_channels,
        user_gains,
        eve_channel,
        eve_gain,
    })
}

pub fn build_sensing_model(geom: &SystemGeometry, scenario: &Scenario) -> Result<SensingModel> {
    let (a, a_dt, a_dr) = steering(geom, geom.n_tx, 1.0, &scenario.target)?;
    let (b, b_dt, b_dr) = steering(geom, geom.n_rx, -1.0, &scenario.target)?;
    let at = a.transpose();
    Ok(SensingModel {
        g_tilde: &b * &at,
        g_dtheta: &b_dt * &at + &b * a_dt.transpose(),
        g_drange: &b_dr * &at + &b * a_dr.transpose(),
        gain: scenario.sensing_gain,
    })
}
