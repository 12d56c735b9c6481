use std::ptr;

use normconst_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { nc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn halton_handle_round_trip() {
    let mut ps: *mut NcPointSet = ptr::null_mut();
    assert_eq!(unsafe { nc_halton_new(4, 2, 0, &mut ps) }, NcStatus::Ok);
    assert_eq!(unsafe { nc_point_set_m(ps) }, 4);
    assert_eq!(unsafe { nc_point_set_p(ps) }, 2);
    let mut buf = [0.0; 8];
    assert_eq!(unsafe { nc_point_set_copy(ps, buf.as_mut_ptr(), buf.len()) }, NcStatus::Ok);
    assert_eq!(buf, [0.0, 0.0, 0.5, 1.0 / 3.0, 0.25, 2.0 / 3.0, 0.75, 1.0 / 9.0]);

    let mut small = [0.0; 3];
    assert_eq!(unsafe { nc_point_set_copy(ps, small.as_mut_ptr(), small.len()) }, NcStatus::DimensionMismatch);
    unsafe { nc_point_set_free(ps) };
}

#[test]
fn errors_set_status_and_message() {
    let mut ps: *mut NcPointSet = ptr::null_mut();
    assert_eq!(unsafe { nc_halton_new(4, 0, 0, &mut ps) }, NcStatus::InvalidArgument);
    assert!(ps.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { nc_halton_new(4, 1, 0, ptr::null_mut()) }, NcStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut out = 0.0;
    assert_eq!(unsafe { nc_halton_bound(4, 2, &mut out) }, NcStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn message_truncation_reports_full_length() {
    let mut ps: *mut NcPointSet = ptr::null_mut();
    unsafe { nc_halton_new(0, 1, 0, &mut ps) };
    let full = unsafe { nc_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [1 as std::ffi::c_char; 5];
    let n = unsafe { nc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full);
    assert_eq!(buf[4], 0);
}

#[test]
fn discrepancy_budget_refusal() {
    let mut ps: *mut NcPointSet = ptr::null_mut();
    unsafe { nc_halton_new(100, 3, 0, &mut ps) };
    let mut d = 0.0;
    assert_eq!(unsafe { nc_star_discrepancy(ps, 1e3, &mut d) }, NcStatus::BudgetExceeded);
    unsafe { nc_point_set_free(ps) };

    let coords = [0.1, 0.6];
    let mut ps: *mut NcPointSet = ptr::null_mut();
    assert_eq!(unsafe { nc_point_set_from_coords(coords.as_ptr(), 2, 1, &mut ps) }, NcStatus::Ok);
    assert_eq!(unsafe { nc_star_discrepancy(ps, 0.0, &mut d) }, NcStatus::Ok);
    // max over sorted x: max(1/2 - 0.1, 0.1, 1 - 0.6, 0.6 - 1/2)
    assert!((d - 0.4).abs() < 1e-15);
    unsafe { nc_point_set_free(ps) };
}

#[test]
fn gaussian_estimate_matches_library() {
    let mut model: *mut NcGaussianModel = ptr::null_mut();
    assert_eq!(unsafe { nc_gaussian_simulate(8, 1, 1.0, 1.0, 3, &mut model) }, NcStatus::Ok);
    let mut ps: *mut NcPointSet = ptr::null_mut();
    unsafe { nc_halton_new(3200, 1, 1, &mut ps) };
    let (mut log, mut rel) = (0.0, 0.0);
    let st = unsafe { nc_gaussian_estimate(model, ps, NcPolicy::HighDim, NcTKind::Log, 0.0, true, &mut log, &mut rel) };
    assert_eq!(st, NcStatus::Ok);
    assert!((rel - (-0.126138)).abs() < 1e-6, "{rel}");

    let mut oracle = 0.0;
    unsafe { nc_gaussian_oracle_log(model, &mut oracle) };
    assert!(((log - oracle).exp_m1() - rel).abs() < 1e-15);

    let st = unsafe {
        nc_gaussian_estimate(model, ps, NcPolicy::HighDim, NcTKind::Log, 0.0, true, &mut log, ptr::null_mut())
    };
    assert_eq!(st, NcStatus::Ok);
    unsafe {
        nc_point_set_free(ps);
        nc_gaussian_free(model);
    }
}

#[test]
fn dimension_mismatch_between_handles() {
    let mut model: *mut NcGaussianModel = ptr::null_mut();
    let data = [0.1, 0.2, -0.3, 0.4];
    assert_eq!(unsafe { nc_gaussian_from_data(data.as_ptr(), 2, 2, 1.0, 1.0, &mut model) }, NcStatus::Ok);
    let mut ps: *mut NcPointSet = ptr::null_mut();
    unsafe { nc_halton_new(16, 3, 0, &mut ps) };
    let mut log = 0.0;
    let st = unsafe {
        nc_gaussian_estimate(model, ps, NcPolicy::FixedP, NcTKind::Fixed, 2.0, false, &mut log, ptr::null_mut())
    };
    assert_eq!(st, NcStatus::DimensionMismatch);
    unsafe {
        nc_point_set_free(ps);
        nc_gaussian_free(model);
    }
}

#[test]
fn scalar_helpers() {
    let mut b = 0u64;
    assert_eq!(unsafe { nc_bell_number(10, &mut b) }, NcStatus::Ok);
    assert_eq!(b, 115_975);
    assert_eq!(unsafe { nc_bell_number(26, &mut b) }, NcStatus::InvalidArgument);

    let (mut ratio, mut wins) = (0.0, false);
    assert_eq!(unsafe { nc_crossover(10, 55, 1, NcRegime::Classical, 1.0, &mut ratio, &mut wins) }, NcStatus::Ok);
    assert!(wins);
    assert!((ratio - 55f64.ln() / 55f64.sqrt()).abs() < 1e-14);

    let (mut approx, mut exact) = (0.0, 0.0);
    let st = unsafe { nc_lmm_log_marginal(5, 6, 1.0, 0.5, 0.0, 1, 0.1, 1024, &mut approx, &mut exact) };
    assert_eq!(st, NcStatus::Ok);
    assert!((approx - exact).abs() < 1e-3);
}

#[test]
fn free_accepts_null() {
    unsafe {
        nc_point_set_free(ptr::null_mut());
        nc_gaussian_free(ptr::null_mut());
    }
    assert_eq!(unsafe { nc_point_set_m(ptr::null()) }, 0);
}
