//! Scenario sampling, parameter sweeps and CSV output.
//!
//! A sweep is the product (axis value × scheme × seed). Every cell draws its
//! positions from a generator keyed only by the seed, so all schemes and axis
//! values at one seed see the same users and target.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{initialize, DriverOptions, PenaltySchedule, SolveReport};
use crate::crb::{crb_closed_form, CrbParameter};
use crate::geometry::{build_channels, build_sensing_model, ChannelSet, PolarPoint, Scenario, SensingModel, SystemGeometry};
use crate::inner::InnerOptions;
use crate::schemes::{run_scheme, SchemeId};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 9] =
    ["axis", "scheme", "seed", "secrecy_bps_hz", "crb_theta_rad2", "crb_range_m2", "status", "iters", "seconds"];

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_rf: usize,
    /// Element spacing in meters; half a wavelength when absent.
    pub spacing_m: Option<f64>,
    pub carrier_hz: f64,
}

/// How `crb_angle` / `crb_range` are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrbMode {
    /// Thresholds in rad² and m².
    Absolute,
    /// Multiples of the CRBs achieved by the hybrid matched-filter start.
    Relative,
    /// No sensing constraints.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub users: usize,
    pub range_min_m: f64,
    pub range_max_m: f64,
    pub angle_min_rad: f64,
    pub angle_max_rad: f64,
    pub slots: usize,
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub crb_mode: CrbMode,
    pub crb_angle: f64,
    pub crb_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Power,
    Users,
    TxAntennas,
    CrbRange,
    CrbAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub rho0: f64,
    pub shrink: f64,
    /// Stop the inner SCA loop once the objective gains less than this.
    pub eps_inner: f64,
    /// Penalty residual target, relative to the power budget.
    pub eps_penalty: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = PenaltySchedule::default();
        Self {
            rho0: s.rho0,
            shrink: s.shrink,
            eps_inner: InnerOptions::default().epsilon,
            eps_penalty: s.eps_penalty,
            max_outer: s.max_outer,
            max_inner: s.max_inner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    pub schemes: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// N=16, M=8, L=4, K=2, T=64 over seeds 0..20, power sweep {10, 15, 20} dBm.
    pub fn desk() -> Self {
        Self {
            geometry: GeometryConfig { n_tx: 16, n_rx: 8, n_rf: 4, spacing_m: None, carrier_hz: 30e9 },
            scenario: ScenarioConfig {
                users: 2,
                range_min_m: 10.0,
                range_max_m: 20.0,
                angle_min_rad: 0.0,
                angle_max_rad: FRAC_PI_2,
                slots: 64,
                power_dbm: 20.0,
                noise_dbm: -84.0,
                crb_mode: CrbMode::Relative,
                crb_angle: 10.0,
                crb_range: 10.0,
            },
            sweep: SweepConfig { axis: SweepAxis::Power, values: vec![10.0, 15.0, 20.0] },
            schemes: SchemeId::ALL.iter().map(|s| s.name().to_string()).collect(),
            seeds: (0..20).collect(),
            schedule: ScheduleConfig::default(),
            output: None,
        }
    }

    /// N=128, M=64, L=8, K=4, T=1000 over 100 seeds.
    pub fn paper() -> Self {
        let mut c = Self::desk();
        c.apply_scale(Scale::Paper);
        c
    }

    pub fn preset(scale: Scale) -> Self {
        match scale {
            Scale::Desk => Self::desk(),
            Scale::Paper => Self::paper(),
        }
    }

    /// Overrides array sizes, user count, slots and seeds.
    pub fn apply_scale(&mut self, scale: Scale) {
        let (n, m, l, k, t, seeds) = match scale {
            Scale::Desk => (16, 8, 4, 2, 64, 20),
            Scale::Paper => (128, 64, 8, 4, 1000, 100),
        };
        self.geometry.n_tx = n;
        self.geometry.n_rx = m;
        self.geometry.n_rf = l;
        self.scenario.users = k;
        self.scenario.slots = t;
        self.seeds = (0..seeds).collect();
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn scheme_ids(&self) -> Result<Vec<SchemeId>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn driver_options(&self) -> DriverOptions {
        let s = &self.schedule;
        let d = DriverOptions::default();
        DriverOptions {
            schedule: PenaltySchedule {
                rho0: s.rho0,
                shrink: s.shrink,
                eps_penalty: s.eps_penalty,
                max_outer: s.max_outer,
                max_inner: s.max_inner,
            },
            inner: InnerOptions { epsilon: s.eps_inner, ..d.inner },
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sweep.values.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.seeds.is_empty() {
            return bad("no seeds".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes".into());
        }
        self.scheme_ids()?;
        let sc = &self.scenario;
        if !(sc.range_min_m > 0.0 && sc.range_max_m > sc.range_min_m) {
            return bad(format!("invalid range interval [{}, {}]", sc.range_min_m, sc.range_max_m));
        }
        if !(sc.angle_max_rad > sc.angle_min_rad) {
            return bad(format!("invalid angle interval [{}, {}]", sc.angle_min_rad, sc.angle_max_rad));
        }
        if sc.crb_mode != CrbMode::Off && !(sc.crb_angle > 0.0 && sc.crb_range > 0.0) {
            return bad("CRB thresholds must be > 0".into());
        }
        self.driver_options().schedule.validate()?;
        // Every grid point must describe a valid system.
        for &v in &self.sweep.values {
            let (g, s) = self.resolved(v);
            if s.users == 0 || s.users + 1 > g.n_rf {
                return bad(format!("need 1 <= K and K + 1 <= L, got K={} L={}", s.users, g.n_rf));
            }
            self.system_geometry(&g)?;
        }
        Ok(())
    }

    /// Geometry and scenario blocks with the sweep axis set to `value`.
    pub fn resolved(&self, value: f64) -> (GeometryConfig, ScenarioConfig) {
        let mut g = self.geometry;
        let mut s = self.scenario;
        match self.sweep.axis {
            SweepAxis::Power => s.power_dbm = value,
            SweepAxis::Users => s.users = value as usize,
            SweepAxis::TxAntennas => g.n_tx = value as usize,
            SweepAxis::CrbRange => s.crb_range = value,
            SweepAxis::CrbAngle => s.crb_angle = value,
        }
        (g, s)
    }

    fn system_geometry(&self, g: &GeometryConfig) -> Result<SystemGeometry> {
        match g.spacing_m {
            Some(d) => SystemGeometry::new(g.n_tx, g.n_rx, g.n_rf, d, g.carrier_hz),
            None => SystemGeometry::half_wavelength(g.n_tx, g.n_rx, g.n_rf, g.carrier_hz),
        }
    }
}

/// Everything a scheme needs for one cell.
#[derive(Debug, Clone)]
pub struct Instance {
    pub geometry: SystemGeometry,
    pub scenario: Scenario,
    pub channels: ChannelSet,
    pub sensing: SensingModel,
}

/// Draws the target and then `K` users uniformly over the configured range and
/// angle intervals, at sweep value `value`. Relative CRB thresholds are scaled
/// by the CRBs of the hybrid matched-filter start.
pub fn sample_scenario(config: &ExperimentConfig, value: f64, seed: u64) -> Result<Instance> {
    let (g, s) = config.resolved(value);
    let geometry = config.system_geometry(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        PolarPoint::new(
            rng.gen_range(s.range_min_m..s.range_max_m),
            rng.gen_range(s.angle_min_rad..s.angle_max_rad),
        )
    };
    let target = draw();
    let users: Vec<PolarPoint> = (0..s.users).map(|_| draw()).collect();
    let (ca, cr) = match s.crb_mode {
        CrbMode::Absolute => (s.crb_angle, s.crb_range),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    let mut scenario = Scenario::new(
        &geometry,
        users,
        target,
        dbm_to_watts(s.noise_dbm),
        dbm_to_watts(s.power_dbm),
        ca,
        cr,
        s.slots,
    )?;
    let channels = build_channels(&geometry, &scenario)?;
    let sensing = build_sensing_model(&geometry, &scenario)?;
    if s.crb_mode == CrbMode::Relative {
        let fw = initialize(&geometry, &scenario, &channels, true)?.hybrid();
        let a = crb_closed_form(&fw, &sensing, scenario.noise_eve, s.slots, CrbParameter::Angle)?;
        let r = crb_closed_form(&fw, &sensing, scenario.noise_eve, s.slots, CrbParameter::Range)?;
        scenario = scenario.with_crb_thresholds(s.crb_angle * a, s.crb_range * r);
    }
    Ok(Instance { geometry, scenario, channels, sensing })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub scheme: SchemeId,
    pub seed: u64,
    pub secrecy: f64,
    pub crb_theta: f64,
    pub crb_range: f64,
    pub status: String,
    pub iters: usize,
    pub seconds: f64,
}

impl SweepRow {
    fn from_report(axis: f64, scheme: SchemeId, seed: u64, r: &SolveReport, seconds: f64) -> Self {
        Self {
            axis,
            scheme,
            seed,
            secrecy: r.secrecy,
            crb_theta: r.crb_angle,
            crb_range: r.crb_range,
            status: r.status.as_str().to_string(),
            iters: r.iterations,
            seconds,
        }
    }

    fn failed(axis: f64, scheme: SchemeId, seed: u64, e: &Error, seconds: f64) -> Self {
        let status = match e {
            Error::Infeasible => "infeasible",
            _ => "failed",
        };
        Self {
            axis,
            scheme,
            seed,
            secrecy: f64::NAN,
            crb_theta: f64::NAN,
            crb_range: f64::NAN,
            status: status.to_string(),
            iters: 0,
            seconds,
        }
    }

    /// Converged or declared infeasible.
    pub fn is_clean(&self) -> bool {
        self.status == "converged" || self.status == "infeasible"
    }
}

/// Solves one cell; errors become status rows.
pub fn run_cell(config: &ExperimentConfig, value: f64, scheme: SchemeId, seed: u64) -> SweepRow {
    let start = Instant::now();
    let out = sample_scenario(config, value, seed).and_then(|inst| {
        run_scheme(scheme, &inst.geometry, &inst.scenario, &inst.channels, &inst.sensing, &config.driver_options())
    });
    let secs = start.elapsed().as_secs_f64();
    match out {
        Ok(r) => SweepRow::from_report(value, scheme, seed, &r, secs),
        Err(e) => SweepRow::failed(value, scheme, seed, &e, secs),
    }
}

/// Runs every cell on the rayon pool, calling `on_row` as cells finish, and
/// returns the rows sorted by (axis, scheme, seed).
pub fn run_sweep_with<F>(config: &ExperimentConfig, on_row: F) -> Result<Vec<SweepRow>>
where
    F: Fn(&SweepRow) + Sync,
{
    config.validate()?;
    let schemes = config.scheme_ids()?;
    let cells: Vec<(f64, SchemeId, u64)> = config
        .sweep
        .values
        .iter()
        .flat_map(|&v| schemes.iter().flat_map(move |&s| config.seeds.iter().map(move |&seed| (v, s, seed))))
        .collect();
    let mut rows: Vec<SweepRow> = cells
        .into_par_iter()
        .map(|(v, s, seed)| {
            let row = run_cell(config, v, s, seed);
            on_row(&row);
            row
        })
        .collect();
    rows.sort_by(|a, b| {
        a.axis.total_cmp(&b.axis).then(a.scheme.cmp(&b.scheme)).then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(config, |_| {})
}

/// Mean secrecy per (axis value, scheme) over rows with finite secrecy.
pub fn scheme_means(rows: &[SweepRow]) -> Vec<(f64, SchemeId, f64, usize)> {
    let mut out: Vec<(f64, SchemeId, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.secrecy.is_finite()) {
        match out.iter_mut().find(|(a, s, _, _)| *a == r.axis && *s == r.scheme) {
            Some(e) => {
                e.2 += r.secrecy;
                e.3 += 1;
            }
            None => out.push((r.axis, r.scheme, r.secrecy, 1)),
        }
    }
    for e in &mut out {
        e.2 /= e.3 as f64;
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// `x` with 9 significant digits, shortest form (like C's `%.9g`).
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_sig9(r.axis),
            r.scheme.name().to_string(),
            r.seed.to_string(),
            format_sig9(r.secrecy),
            format_sig9(r.crb_theta),
            format_sig9(r.crb_range),
            r.status.clone(),
            r.iters.to_string(),
            format_sig9(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_csv(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    let num = |s: &str| -> Result<f64> {
        match s {
            "NaN" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => s.parse().map_err(|_| Error::Config(format!("bad number '{s}'"))),
        }
    };
    let int = |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Config(format!("bad integer '{s}'"))) };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!("row has {} fields", rec.len())));
        }
        rows.push(SweepRow {
            axis: num(&rec[0])?,
            scheme: rec[1].parse()?,
            seed: int(&rec[2])?,
            secrecy: num(&rec[3])?,
            crb_theta: num(&rec[4])?,
            crb_range: num(&rec[5])?,
            status: rec[6].to_string(),
            iters: int(&rec[7])? as usize,
            seconds: num(&rec[8])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            axis: 15.0,
            scheme: SchemeId::RsmaHb,
            seed: 3,
            secrecy: 7.123456789012,
            crb_theta: 1.23456789e-7,
            crb_range: 0.000123456789,
            status: "converged".into(),
            iters: 12,
            seconds: 1.5,
        }
    }

    #[test]
    fn dbm_conversion() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-16);
        assert!((dbm_to_watts(-84.0) - 10f64.powf(-11.4)).abs() < 1e-27);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(7.123456789012), "7.12345679");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(15.0), "15");
        assert_eq!(format_sig9(1.23456789e-7), "1.23456789e-07");
        assert_eq!(format_sig9(123456789012.0), "1.23456789e+11");
        assert_eq!(format_sig9(-0.5), "-0.5");
        assert_eq!(format_sig9(9.999999999), "10");
        assert_eq!(format_sig9(0.0001), "0.0001");
        assert_eq!(format_sig9(0.0000992910457), "9.92910457e-05");
        assert_eq!(format_sig9(f64::NAN), "NaN");
    }

    #[test]
    fn golden_row() {
        let mut buf = Vec::new();
        write_csv(&[row()], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "axis,scheme,seed,secrecy_bps_hz,crb_theta_rad2,crb_range_m2,status,iters,seconds\n\
             15,RSMA_HB,3,7.12345679,1.23456789e-07,0.000123456789,converged,12,1.5\n"
        );
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(buf, format!("{}\n", CSV_HEADER.join(",")).into_bytes());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let mut failed = row();
        failed.status = "needs,quoting".into();
        failed.secrecy = f64::NAN;
        emit_csv(&[row(), failed.clone()], &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-9 * b.abs();
        assert!(close(back[0].secrecy, row().secrecy));
        assert!(close(back[0].crb_theta, row().crb_theta));
        assert_eq!(back[1].status, "needs,quoting");
        assert!(back[1].secrecy.is_nan());
    }

    #[test]
    fn sampling_is_deterministic_and_matched_across_axis_values() {
        let c = ExperimentConfig::desk();
        let a = sample_scenario(&c, 10.0, 7).unwrap();
        let b = sample_scenario(&c, 10.0, 7).unwrap();
        assert_eq!(a.scenario, b.scenario);
        assert_eq!(a.channels, b.channels);
        let hi = sample_scenario(&c, 20.0, 7).unwrap();
        assert_eq!(a.scenario.users, hi.scenario.users);
        assert!((hi.scenario.power_budget - 0.1).abs() < 1e-15);
        assert!(sample_scenario(&c, 10.0, 8).unwrap().scenario.target != a.scenario.target);
    }

    #[test]
    fn uniform_range_mean() {
        let c = ExperimentConfig::desk();
        let s = &c.scenario;
        let mut sum = 0.0;
        let n = 10_000;
        for seed in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sum += rng.gen_range(s.range_min_m..s.range_max_m);
        }
        let mean = sum / n as f64;
        assert!((mean - 15.0).abs() < 0.15, "{mean}");
    }

    #[test]
    fn relative_thresholds_scale_the_start() {
        let c = ExperimentConfig::desk();
        let inst = sample_scenario(&c, 20.0, 1).unwrap();
        let fw = initialize(&inst.geometry, &inst.scenario, &inst.channels, true).unwrap().hybrid();
        let a = crb_closed_form(&fw, &inst.sensing, inst.scenario.noise_eve, 64, CrbParameter::Angle).unwrap();
        assert!((inst.scenario.crb_angle_max / a - 10.0).abs() < 1e-9);
    }

    #[test]
    fn config_toml_round_trip_and_validation() {
        let c = ExperimentConfig::desk();
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);

        let mut bad = c.clone();
        bad.seeds = vec![1, 1];
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.sweep.values.clear();
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.sweep = SweepConfig { axis: SweepAxis::Users, values: vec![4.0] };
        assert!(bad.validate().is_err(), "K + 1 > L");
        assert!(ExperimentConfig::from_toml_str("[geometry]\nn_tx = 4\n").is_err());
    }

    #[test]
    fn shipped_config_parses() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/near_field.toml");
        let c = ExperimentConfig::load(&path).unwrap();
        assert_eq!(c.schedule, ScheduleConfig::default());
        assert_eq!(c.scheme_ids().unwrap().len(), 3);
        assert!(c.scenario.range_max_m < 1.28);
    }

    #[test]
    fn paper_preset() {
        let p = ExperimentConfig::paper();
        assert_eq!((p.geometry.n_tx, p.geometry.n_rx, p.geometry.n_rf), (128, 64, 8));
        assert_eq!((p.scenario.users, p.scenario.slots, p.seeds.len()), (4, 1000, 100));
        let g = p.system_geometry(&p.geometry).unwrap();
        assert!(g.rayleigh_distance() > 20.0);
        // At desk scale the [10, 20] m ranges are beyond the Rayleigh distance.
        let d = ExperimentConfig::desk();
        assert!(d.system_geometry(&d.geometry).unwrap().rayleigh_distance() < 10.0);
    }

    #[test]
    fn sweep_counts_rows_and_records_failures() {
        let mut c = ExperimentConfig::desk();
        c.sweep.values = vec![10.0, 20.0];
        c.schemes = vec!["SDMA_HB".into()];
        c.seeds = vec![0, 1];
        c.schedule.max_outer = 2;
        c.schedule.max_inner = 2;
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| (w[0].axis, w[0].seed) <= (w[1].axis, w[1].seed)));

        // An absurd CRB demand either relaxes into a non-converged run or is
        // reported, never aborting the sweep.
        c.scenario.crb_mode = CrbMode::Absolute;
        c.scenario.crb_angle = 1e-30;
        c.scenario.crb_range = 1e-30;
        c.sweep.values = vec![20.0];
        c.seeds = vec![0];
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(!rows[0].is_clean() || rows[0].status == "infeasible");
    }
}
