//! C ABI over the `nfisac` design library.
//!
//! Scenarios and solve reports are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every entry point returns an
//! [`NfisacStatus`]; on failure a message is kept per thread and can be read
//! with [`nfisac_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use nfisac::bcd::{SolveReport, SolveStatus};
use nfisac::harness::{sample_scenario, ExperimentConfig, Instance};
use nfisac::schemes::{run_scheme, SchemeId};
use nfisac::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfisacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The design problem has no feasible point for the requested thresholds.
    Infeasible = 3,
    /// Singular geometry, degenerate beam or solver breakdown.
    Numerical = 4,
    Io = 5,
    /// Output buffer too small; the required length is reported.
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfisacScheme {
    RsmaHb = 0,
    RsmaFd = 1,
    RsmaSc = 2,
    SdmaHb = 3,
    RsmaFar = 4,
}

impl From<NfisacScheme> for SchemeId {
    fn from(s: NfisacScheme) -> Self {
        match s {
            NfisacScheme::RsmaHb => SchemeId::RsmaHb,
            NfisacScheme::RsmaFd => SchemeId::RsmaFd,
            NfisacScheme::RsmaSc => SchemeId::RsmaSc,
            NfisacScheme::SdmaHb => SchemeId::SdmaHb,
            NfisacScheme::RsmaFar => SchemeId::RsmaFar,
        }
    }
}

/// Solver outcome, mirrors the `status` CSV column.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfisacSolveStatus {
    Converged = 0,
    NotConverged = 1,
    Infeasible = 2,
    Failed = 3,
}

/// One sampled problem instance: geometry, positions, channels and sensing model.
pub struct NfisacScenario {
    config: ExperimentConfig,
    inst: Instance,
}

/// Result of one scheme run.
pub struct NfisacReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NfisacStatus {
    match e {
        Error::Infeasible => NfisacStatus::Infeasible,
        Error::SingularGeometry(_) | Error::DegenerateBeam(_) | Error::Solver(_) => NfisacStatus::Numerical,
        Error::Io(_) | Error::Csv(_) => NfisacStatus::Io,
        Error::Domain(_) | Error::Dimension(_) | Error::InvalidParameter(_) | Error::Config(_) => {
            NfisacStatus::InvalidArgument
        }
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (NfisacStatus, String)>) -> NfisacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NfisacStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NfisacStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (NfisacStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NfisacStatus, String) {
    (NfisacStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NfisacStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nfisac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nfisac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn sample(config: ExperimentConfig, axis_value: f64, seed: u64, out: *mut *mut NfisacScenario) -> NfisacStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        let inst = sample_scenario(&config, axis_value, seed).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NfisacScenario { config, inst }));
        Ok(())
    })
}

/// Samples the desk-scale instance for `seed` (N=16, M=8, L=4, K=2, 20 dBm,
/// CRB thresholds 10x those of the matched-filter start).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nfisac_scenario_desk(seed: u64, out: *mut *mut NfisacScenario) -> NfisacStatus {
    let mut c = ExperimentConfig::desk();
    c.sweep.values = vec![20.0];
    sample(c, 20.0, seed, out)
}

/// Samples an instance from a TOML experiment config at sweep value `axis_value`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` as in [`nfisac_scenario_desk`].
#[no_mangle]
pub unsafe extern "C" fn nfisac_scenario_from_config(
    path: *const c_char,
    axis_value: f64,
    seed: u64,
    out: *mut *mut NfisacScenario,
) -> NfisacStatus {
    let mut config = None;
    let status = guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (NfisacStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        config = Some(ExperimentConfig::load(&PathBuf::from(p)).map_err(lib_err)?);
        Ok(())
    });
    match config {
        Some(c) => sample(c, axis_value, seed, out),
        None => status,
    }
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nfisac_scenario_free(scenario: *mut NfisacScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of users, transmit antennas and RF chains of the instance.
///
/// # Safety
/// `scenario` must be a live handle; the outputs must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn nfisac_scenario_dims(
    scenario: *const NfisacScenario,
    users: *mut usize,
    n_tx: *mut usize,
    n_rf: *mut usize,
) -> NfisacStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let g = &s.inst.geometry;
        for (p, v) in [(users, s.inst.scenario.num_users()), (n_tx, g.n_tx), (n_rf, g.n_rf)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Runs one scheme on the instance with the config's schedule.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nfisac_solve(
    scenario: *const NfisacScenario,
    scheme: NfisacScheme,
    out: *mut *mut NfisacReport,
) -> NfisacStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out_ptr(out, "out")?;
        let i = &s.inst;
        let r = run_scheme(scheme.into(), &i.geometry, &i.scenario, &i.channels, &i.sensing, &s.config.driver_options())
            .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NfisacReport(r)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nfisac_report_free(report: *mut NfisacReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Max–min secrecy rate (bits/s/Hz) and the achieved angle (rad²) and range
/// (m²) CRBs of the hybrid beamfocuser. Null outputs are skipped.
///
/// # Safety
/// `report` must be a live handle; the outputs must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn nfisac_report_metrics(
    report: *const NfisacReport,
    secrecy: *mut f64,
    crb_angle: *mut f64,
    crb_range: *mut f64,
) -> NfisacStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        for (p, v) in [(secrecy, r.secrecy), (crb_angle, r.crb_angle), (crb_range, r.crb_range)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Solver outcome and iteration count.
///
/// # Safety
/// `report` must be a live handle; the outputs must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn nfisac_report_status(
    report: *const NfisacReport,
    status: *mut NfisacSolveStatus,
    iterations: *mut usize,
) -> NfisacStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        if let Some(p) = status.as_mut() {
            *p = match r.status {
                SolveStatus::Converged => NfisacSolveStatus::Converged,
                SolveStatus::NotConverged => NfisacSolveStatus::NotConverged,
                SolveStatus::Infeasible => NfisacSolveStatus::Infeasible,
                SolveStatus::Failed => NfisacSolveStatus::Failed,
            };
        }
        if let Some(p) = iterations.as_mut() {
            *p = r.iterations;
        }
        Ok(())
    })
}

/// Copies the hybrid beamfocuser `FW` (N × (K+1), column-major, Watts^½)
/// into `re` / `im`. `len` is the capacity of each buffer; `needed` receives
/// `N (K+1)`. Returns `BufferTooSmall` without writing when `len` is short.
///
/// # Safety
/// `report` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nfisac_report_beamformer(
    report: *const NfisacReport,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    needed: *mut usize,
) -> NfisacStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.0;
        let fw = r.state.hybrid();
        if let Some(p) = needed.as_mut() {
            *p = fw.len();
        }
        if len < fw.len() {
            return Err((NfisacStatus::BufferTooSmall, format!("need {} entries, got {len}", fw.len())));
        }
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let re = std::slice::from_raw_parts_mut(re, fw.len());
        let im = std::slice::from_raw_parts_mut(im, fw.len());
        for (i, v) in fw.iter().enumerate() {
            re[i] = v.re;
            im[i] = v.im;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, NfisacStatus::Panic);
        let msg = unsafe { CStr::from_ptr(nfisac_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn error_mapping() {
        assert_eq!(status_of(&Error::Infeasible), NfisacStatus::Infeasible);
        assert_eq!(status_of(&Error::SingularGeometry(1e13)), NfisacStatus::Numerical);
        assert_eq!(status_of(&Error::Config("x".into())), NfisacStatus::InvalidArgument);
    }

    #[test]
    fn scheme_mapping_is_complete() {
        let all = [NfisacScheme::RsmaHb, NfisacScheme::RsmaFd, NfisacScheme::RsmaSc, NfisacScheme::SdmaHb, NfisacScheme::RsmaFar];
        let ids: Vec<SchemeId> = all.iter().map(|&s| s.into()).collect();
        assert_eq!(ids, SchemeId::ALL);
    }
}
