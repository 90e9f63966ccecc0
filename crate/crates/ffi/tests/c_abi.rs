use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use nfisac_ffi::*;

fn last_error() -> String {
    let p = nfisac_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn desk_solve_round_trip() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(nfisac_scenario_desk(2, &mut sc), NfisacStatus::Ok);
        let (mut k, mut n, mut l) = (0, 0, 0);
        assert_eq!(nfisac_scenario_dims(sc, &mut k, &mut n, &mut l), NfisacStatus::Ok);
        assert_eq!((k, n, l), (2, 16, 4));

        let mut rep = ptr::null_mut();
        assert_eq!(nfisac_solve(sc, NfisacScheme::SdmaHb, &mut rep), NfisacStatus::Ok);
        let (mut secrecy, mut ca, mut cr) = (0.0, 0.0, 0.0);
        assert_eq!(nfisac_report_metrics(rep, &mut secrecy, &mut ca, &mut cr), NfisacStatus::Ok);
        assert!(secrecy > 0.0 && ca > 0.0 && cr > 0.0);
        let mut st = NfisacSolveStatus::Failed;
        let mut iters = 0;
        assert_eq!(nfisac_report_status(rep, &mut st, &mut iters), NfisacStatus::Ok);
        assert_eq!(st, NfisacSolveStatus::Converged);

        // Size query, then copy.
        let mut needed = 0;
        let s = nfisac_report_beamformer(rep, ptr::null_mut(), ptr::null_mut(), 0, &mut needed);
        assert_eq!(s, NfisacStatus::BufferTooSmall);
        assert_eq!(needed, 16 * 3);
        let mut re = vec![0.0; needed];
        let mut im = vec![0.0; needed];
        let s = nfisac_report_beamformer(rep, re.as_mut_ptr(), im.as_mut_ptr(), needed, ptr::null_mut());
        assert_eq!(s, NfisacStatus::Ok);
        // SDMA: the common column (first 16 entries) is zero, power within budget.
        assert!(re[..16].iter().chain(&im[..16]).all(|&v| v == 0.0));
        let power: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
        assert!(power <= 0.1 * (1.0 + 1e-9));

        nfisac_report_free(rep);
        nfisac_scenario_free(sc);
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        assert_eq!(nfisac_scenario_desk(0, ptr::null_mut()), NfisacStatus::NullPointer);
        assert_eq!(last_error(), "out is null");
        let mut rep = ptr::null_mut();
        assert_eq!(nfisac_solve(ptr::null(), NfisacScheme::RsmaHb, &mut rep), NfisacStatus::NullPointer);
        assert!(rep.is_null());
        assert_eq!(nfisac_report_metrics(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), NfisacStatus::NullPointer);
        nfisac_scenario_free(ptr::null_mut());
        nfisac_report_free(ptr::null_mut());
    }
}

#[test]
fn bad_config_is_an_invalid_argument() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seeds = [1, 1]\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut sc = ptr::null_mut();
    let s = unsafe { nfisac_scenario_from_config(c.as_ptr(), 20.0, 0, &mut sc) };
    assert_eq!(s, NfisacStatus::InvalidArgument);
    assert!(last_error().starts_with("config error"));
    assert!(sc.is_null());

    let missing = CString::new(dir.path().join("none.toml").to_str().unwrap()).unwrap();
    let s = unsafe { nfisac_scenario_from_config(missing.as_ptr(), 20.0, 0, &mut sc) };
    assert_eq!(s, NfisacStatus::Io);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nfisac_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/nfisac.h")).unwrap();
    for name in [
        "nfisac_scenario_desk",
        "nfisac_scenario_from_config",
        "nfisac_solve",
        "nfisac_report_beamformer",
        "nfisac_last_error",
        "typedef struct NfisacScenario NfisacScenario",
        "NFISAC_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    // Syntax-check the header with the system C compiler when there is one.
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"nfisac.h\"\n\
         int main(void) {\n\
           NfisacScenario *s = 0;\n\
           NfisacStatus st = nfisac_scenario_desk(1, &s);\n\
           nfisac_scenario_free(s);\n\
           return st == NFISAC_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
