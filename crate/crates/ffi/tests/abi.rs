use std::ffi::{c_char, CStr, CString};
use std::ptr;

use signalmarket_ffi::*;

fn last_error() -> String {
    let p = sm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn model_functions_at_default_params() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sm_params_default(&mut p), SmStatus::Ok);
        let mut v = 0.0;
        // symmetric prior: at h = A/2 the two likelihoods tie
        assert_eq!(sm_access_posterior(p, 0.5, &mut v), SmStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(sm_expected_productivity(p, 0.5, &mut v), SmStatus::Ok);
        assert!((v - 0.0).abs() < 1e-14);
        assert_eq!(sm_expected_productivity_slope(p, 0.5, &mut v), SmStatus::Ok);
        assert!((v - 0.5 * (1.0 - 0.5 * 0.25)).abs() < 1e-14);
        assert_eq!(sm_hire_prob_binary(p, 0.5, &mut v), SmStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);

        let h = [0.5, 0.5, 0.5];
        let mut probs = [0.0; 3];
        assert_eq!(sm_hire_prob_conditional(p, h.as_ptr(), 3, probs.as_mut_ptr()), SmStatus::Ok);
        for x in probs {
            assert!((x - 0.25).abs() < 1e-14);
        }
        assert_eq!(sm_hire_prob_conditional(p, h.as_ptr(), 2, probs.as_mut_ptr()), SmStatus::Input);
        assert!(last_error().contains("expected 3"));
        sm_params_free(p);
    }
}

#[test]
fn custom_params_are_validated() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sm_params_new(0.0, -1.0, 1.0, 0.5, 1.0, 3, &mut p), SmStatus::Input);
        assert!(p.is_null());
        assert!(last_error().contains("tau2"));
        assert_eq!(sm_params_new(0.0, 1.0, 1.0, 0.5, 0.0, 1, &mut p), SmStatus::Ok);
        let mut v = 0.0;
        sm_hire_prob_binary(p, 1.3, &mut v);
        assert!((v - logistic(0.65)).abs() < 1e-14);
        sm_params_free(p);
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(sm_access_posterior(ptr::null(), 0.0, &mut v), SmStatus::InvalidArgument);
        assert!(last_error().contains("null"));
        let mut p = ptr::null_mut();
        sm_params_default(&mut p);
        assert_eq!(sm_access_posterior(p, 0.0, ptr::null_mut()), SmStatus::InvalidArgument);
        assert_eq!(sm_params_default(ptr::null_mut()), SmStatus::InvalidArgument);
        sm_params_free(p);
        sm_params_free(ptr::null_mut());
        sm_corpus_free(ptr::null_mut());
        sm_dataset_free(ptr::null_mut());
        assert_eq!(sm_dataset_n_bids(ptr::null()), 0);
    }
}

#[test]
fn tailoring_through_the_corpus() {
    let texts: Vec<CString> = [
        "build a python scraper for product prices",
        "design a logo for a coffee shop",
        "I will build your python scraper quickly",
        "translate a legal contract into spanish",
        "write blog posts about gardening",
        "edit a wedding video with music",
        "bookkeeping for a small bakery",
    ]
    .iter()
    .map(|t| CString::new(*t).unwrap())
    .collect();
    let ptrs: Vec<*const c_char> = texts.iter().map(|c| c.as_ptr()).collect();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(sm_corpus_new(ptrs.as_ptr(), ptrs.len(), &mut c), SmStatus::Ok);
        let mut own = 0.0;
        assert_eq!(sm_corpus_tailoring(c, ptrs[0], ptrs[0], &mut own), SmStatus::Ok);
        assert!((own - 1.0).abs() < 1e-12);
        let (mut near, mut far) = (0.0, 0.0);
        sm_corpus_tailoring(c, ptrs[0], ptrs[2], &mut near);
        sm_corpus_tailoring(c, ptrs[1], ptrs[2], &mut far);
        assert!(near > 0.0 && far == 0.0, "{near} {far}");
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(sm_corpus_tailoring(c, bad.as_ptr().cast(), ptrs[0], &mut far), SmStatus::InvalidArgument);
        assert!(last_error().contains("UTF-8"));
        sm_corpus_free(c);

        assert_eq!(sm_corpus_new(ptrs.as_ptr(), 0, &mut c), SmStatus::Input);
    }
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = CString::new("default").unwrap();
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(sm_dataset_generate(scenario.as_ptr(), 5, 200, 600, &mut a), SmStatus::Ok);
        assert_eq!(sm_dataset_generate(scenario.as_ptr(), 5, 200, 600, &mut b), SmStatus::Ok);
        assert!(sm_dataset_n_bids(a) > 0);
        let pa = CString::new(dir.path().join("a.csv").to_str().unwrap()).unwrap();
        let pb = CString::new(dir.path().join("b.csv").to_str().unwrap()).unwrap();
        assert_eq!(sm_dataset_write_bids(a, pa.as_ptr()), SmStatus::Ok);
        assert_eq!(sm_dataset_write_bids(b, pb.as_ptr()), SmStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(text, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
        assert!(text.starts_with("bid_id,worker_id,job_id,period"));

        let (mut coef, mut se) = (0.0, 0.0);
        assert_eq!(sm_dataset_itt(a, &mut coef, &mut se), SmStatus::Ok);
        assert!(coef.is_finite() && se > 0.0);
        sm_dataset_free(a);
        sm_dataset_free(b);

        let unknown = CString::new("no-such-scenario").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(sm_dataset_generate(unknown.as_ptr(), 1, 0, 0, &mut c), SmStatus::Input);
        assert!(c.is_null());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(sm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/signalmarket.h")).unwrap();
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("SM_STATUS_NUMERICAL = 3"));
}

#[test]
fn c_example_links_and_runs() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // the test binary lives in target/<profile>/deps; the static library one level up
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libsignalmarket_ffi.a");
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let Ok(status) = std::process::Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("examples/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success(), "compiling the C example against {} failed", lib.display());
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("g(0.5) = 0.500000"), "{text}");
}
