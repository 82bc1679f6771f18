use std::ffi::CStr;
use std::ptr;

use qedpec_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { qedpec_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn compile_query_and_free() {
    let opts = qedpec_options_default(10, 1);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qedpec_compile(&opts, &mut h) }, QedpecStatus::Ok);
    assert!(!h.is_null());
    let mut nb = 0usize;
    assert_eq!(unsafe { qedpec_num_blocks(h, &mut nb) }, QedpecStatus::Ok);
    assert_eq!(nb, 7);
    let mut gamma = 0.0;
    let mut ps = 0.0;
    unsafe {
        assert_eq!(qedpec_block_gamma(h, 0, &mut gamma), QedpecStatus::Ok);
        assert_eq!(qedpec_block_p_success(h, 0, &mut ps), QedpecStatus::Ok);
    }
    assert!(gamma > 1.0 && gamma < 1.01);
    assert!(ps > 0.9 && ps < 1.0);

    let mut count = 0usize;
    assert_eq!(unsafe { qedpec_block_num_entries(h, 0, &mut count) }, QedpecStatus::Ok);
    let mut text = [0 as std::ffi::c_char; 16];
    let (mut q, mut s) = (0.0, 0i8);
    let mut total = 0.0;
    for i in 0..count {
        let st = unsafe { qedpec_block_entry(h, 0, i, text.as_mut_ptr(), text.len(), &mut q, &mut s) };
        assert_eq!(st, QedpecStatus::Ok);
        assert_eq!(unsafe { CStr::from_ptr(text.as_ptr()) }.to_bytes().len(), 10);
        assert!(s == 1 || s == -1);
        total += q;
    }
    assert!((total - 1.0).abs() < 1e-12);
    let st = unsafe { qedpec_block_entry(h, 0, 0, text.as_mut_ptr(), 5, &mut q, &mut s) };
    assert_eq!(st, QedpecStatus::BufferTooSmall);
    assert_eq!(unsafe { qedpec_block_gamma(h, 99, &mut gamma) }, QedpecStatus::OutOfRange);
    assert!(last_error().contains("out of range"));

    let mut cost = QedpecCost::default();
    assert_eq!(unsafe { qedpec_total_cost(h, &mut cost) }, QedpecStatus::Ok);
    assert!((cost.total - cost.postselect * cost.gamma2).abs() < 1e-12 * cost.total);

    let mut r = QedpecRunResult::default();
    assert_eq!(unsafe { qedpec_run(h, 20_000, 1, &mut r) }, QedpecStatus::Ok);
    assert!(r.estimate > 0.99 && r.stderr > 0.0);
    unsafe { qedpec_protocol_free(h) };
    unsafe { qedpec_protocol_free(ptr::null_mut()) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qedpec_compile(ptr::null(), &mut h) }, QedpecStatus::NullPointer);
    let mut opts = qedpec_options_default(7, 1);
    assert_eq!(unsafe { qedpec_compile(&opts, &mut h) }, QedpecStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("even"), "{}", last_error());
    opts = qedpec_options_default(200, 40);
    assert_eq!(unsafe { qedpec_compile(&opts, &mut h) }, QedpecStatus::Validity);
    let mut x = 0.0;
    assert_eq!(unsafe { qedpec_pure_pec_cost(100, 1e-4, 1e-3, ptr::null_mut()) }, QedpecStatus::NullPointer);
    assert_eq!(unsafe { qedpec_pure_pec_cost(100, 2.0, 1e-3, &mut x) }, QedpecStatus::InvalidArgument);
    let msg = unsafe { CStr::from_ptr(qedpec_status_str(QedpecStatus::Validity)) };
    assert!(msg.to_str().unwrap().contains("validity"));
}

#[test]
fn analytics_entry_points() {
    let mut x = 0.0;
    assert_eq!(unsafe { qedpec_pure_pec_cost(100, 1e-4, 1e-3, &mut x) }, QedpecStatus::Ok);
    assert!((x - 58.55).abs() < 0.05);
    assert_eq!(unsafe { qedpec_perturbative_bound_b1(30, 1, 1e-4, 1e-3, &mut x) }, QedpecStatus::Ok);
    assert!((x - 2.29e-3).abs() < 5e-6);
    assert!((qedpec_toy_b_single_shot(1.0) - 12.798).abs() < 1e-3);
    assert_eq!(qedpec_zeno_separation(16.0, 1.0), 0.75);
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qedpec.h")).unwrap();
    for sym in [
        "qedpec_compile",
        "qedpec_protocol_free",
        "qedpec_block_entry",
        "qedpec_run",
        "qedpec_last_error",
        "typedef struct QedpecProtocol QedpecProtocol",
        "QEDPEC_STATUS_OK",
    ] {
        assert!(h.contains(sym), "{sym} missing from header");
    }
    // compile the header as C when a compiler is around
    if let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            use std::io::Write;
            c.stdin.take().unwrap().write_all(h.as_bytes())?;
            c.wait_with_output()
        })
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
