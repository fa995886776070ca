use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use kgbounds_ffi::*;

fn take_string(p: *mut c_char) -> Option<String> {
    if p.is_null() {
        return None;
    }
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { kgb_string_free(p) };
    Some(s)
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { kgb_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn hexagon_facet() {
    let name = CString::new("hexagon").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_configuration_generate(name.as_ptr(), &mut c) },
        KgbStatus::Ok
    );
    assert_eq!(unsafe { kgb_configuration_dim(c) }, 2);
    assert_eq!(unsafe { kgb_configuration_size(c) }, 3);
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_facet_run(c, c, 1, true, 0, &mut f) },
        KgbStatus::Ok
    );
    assert_eq!(unsafe { kgb_facet_status(f) }, KgbFacetStatus::Facet);
    assert_eq!(
        take_string(unsafe { kgb_facet_ratio_string(f) }).as_deref(),
        Some("5/4")
    );
    assert_eq!(
        take_string(unsafe { kgb_facet_lambda_string(f) }).as_deref(),
        Some("2/3")
    );
    let mut normal = [0i64; 9];
    assert_eq!(
        unsafe { kgb_facet_normal(f, normal.as_mut_ptr(), 9) },
        KgbStatus::Ok
    );
    assert_eq!(
        unsafe { kgb_facet_normal(f, normal.as_mut_ptr(), 4) },
        KgbStatus::InvalidArgument
    );
    assert!(take_string(unsafe { kgb_facet_to_json(f) })
        .unwrap()
        .contains("\"status\""));
    unsafe {
        kgb_facet_free(f);
        kgb_configuration_free(c);
    }
}

#[test]
fn exact_and_heuristic_solves() {
    let data = [1i64, 1, 1, -1];
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_matrix_from_ints(2, 2, data.as_ptr(), &mut m) },
        KgbStatus::Ok
    );
    assert_eq!(unsafe { (kgb_matrix_rows(m), kgb_matrix_cols(m)) }, (2, 2));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { kgb_solve_exact(m, 0, &mut r) }, KgbStatus::Ok);
    assert_eq!(unsafe { kgb_solve_result_value(r) }, 2.0);
    assert!(unsafe { kgb_solve_result_optimal(r) });
    assert_eq!(
        take_string(unsafe { kgb_solve_result_value_string(r) }).as_deref(),
        Some("2")
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { kgb_solve_heuristic(m, 2, 20, 1, &mut v) },
        KgbStatus::Ok
    );
    assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    let mut buf = [0.0; 4];
    assert_eq!(
        unsafe { kgb_matrix_to_f64(m, buf.as_mut_ptr(), 4) },
        KgbStatus::Ok
    );
    assert_eq!(buf, [1.0, 1.0, 1.0, -1.0]);
    unsafe {
        kgb_solve_result_free(r);
        kgb_matrix_free(m);
    }
}

#[test]
fn errors_are_reported() {
    let name = CString::new("no-such-thing").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_configuration_generate(name.as_ptr(), &mut c) },
        KgbStatus::UnknownName
    );
    assert!(c.is_null());
    assert!(last_error().contains("no-such-thing"));
    assert_eq!(
        unsafe { kgb_configuration_generate(ptr::null(), &mut c) },
        KgbStatus::NullPointer
    );
    let bad = [f64::NAN];
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_matrix_from_f64(1, 1, bad.as_ptr(), &mut m) },
        KgbStatus::InvalidArgument
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { kgb_shrinking_upper(0.8, 0.0, 1.5, 1.0, &mut v) },
        KgbStatus::Domain
    );
    // Freeing null handles is a no-op.
    unsafe {
        kgb_matrix_free(ptr::null_mut());
        kgb_string_free(ptr::null_mut());
    }
}

#[test]
fn closed_forms() {
    let mut v = 0.0;
    let mut l = 0.0;
    assert_eq!(unsafe { kgb_gamma_ratio(4, 2, &mut v) }, KgbStatus::Ok);
    assert!((v - 1.125).abs() < 1e-12);
    assert_eq!(unsafe { kgb_davie_bound(&mut v, &mut l) }, KgbStatus::Ok);
    assert!((v - 1.676956674).abs() < 1e-6 && (l - 0.255730213).abs() < 1e-6);
    assert_eq!(
        unsafe { kgb_shrinking_upper(0.8, 0.0, 0.9, 0.9, &mut v) },
        KgbStatus::Ok
    );
    assert!((v - 1.54321).abs() < 1e-5);
    let name = CString::new("icosahedron").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { kgb_configuration_generate(name.as_ptr(), &mut c) },
        KgbStatus::Ok
    );
    assert_eq!(unsafe { kgb_shrinking_factor(c, &mut v) }, KgbStatus::Ok);
    assert!((v - 0.79465).abs() < 1e-5);
    unsafe { kgb_configuration_free(c) };
    let ver = unsafe { CStr::from_ptr(kgb_version()) }.to_str().unwrap();
    assert_eq!(ver, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kgbounds.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "kgb_last_error_message",
        "kgb_facet_run",
        "KGB_STATUS_OK",
        "typedef struct KgbMatrix KgbMatrix",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
