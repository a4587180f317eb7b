use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use beamqubo_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bq_last_error_message()) }.to_string_lossy().into_owned()
}

/// 0-1-2 path plus isolated user 3, W = 2, one beam per user.
fn path_instance() -> *mut BqInstance {
    let edges = [0u32, 1, 1, 2];
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { bq_instance_new(4, edges.as_ptr(), 2, 0, 2, &mut inst) }, BqStatus::Ok);
    assert!(!inst.is_null());
    inst
}

#[test]
fn qubit_count_matches_the_layout() {
    assert_eq!(bq_qubit_count(12, 12, 5), 216);
    assert_eq!(bq_qubit_count(10, 10, 5), 160);
}

#[test]
fn qubo_energy_of_a_feasible_placement_counts_beams() {
    let inst = path_instance();
    let mut q = ptr::null_mut();
    unsafe {
        assert_eq!(bq_qubo_build(inst, 0.0, &mut q), BqStatus::Ok);
        assert_eq!(bq_qubo_size(q), 28);
        // Beams 0 = {0,1}, 1 = {2}, 2 = {3}. a(i,b) = b*4 + i, z(b) = 16 + b,
        // s(b,w) = 20 + 2b + w - 1.
        let mut x = [0u8; 28];
        for idx in [0, 1, 4 + 2, 8 + 3, 16, 17, 18] {
            x[idx] = 1;
        }
        x[20 + 2 + 1 - 1] = 1; // beam 1 has room 1
        x[20 + 4 + 1 - 1] = 1; // beam 2 has room 1
        x[20 + 6 + 2 - 1] = 1; // beam 3 is empty: room 2
        let mut e = f64::NAN;
        assert_eq!(bq_qubo_energy(q, x.as_ptr(), 28, &mut e), BqStatus::Ok);
        assert!((e - 3.0).abs() < 1e-9, "{e}");

        assert_eq!(bq_qubo_energy(q, x.as_ptr(), 27, &mut e), BqStatus::InvalidArgument);
        x[0] = 2;
        assert_eq!(bq_qubo_energy(q, x.as_ptr(), 28, &mut e), BqStatus::InvalidArgument);
        assert!(last_error().contains("bits[0]"));

        let mut text = ptr::null_mut();
        assert_eq!(bq_qubo_to_text(q, &mut text), BqStatus::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        bq_string_free(text);
        let header: Vec<f64> = s.lines().next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(header[0], 28.0);
        assert_eq!(header[1], bq_qubo_offset(q));

        bq_qubo_free(q);
        bq_instance_free(inst);
    }
}

#[test]
fn presolve_best_fit_and_solve_agree_on_the_optimum() {
    let inst = path_instance();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(bq_presolve(inst, false, &mut p), BqStatus::Ok);
        let (mut lp, mut active, mut unassigned, mut free) = (0.0, 0, 0, 0);
        assert_eq!(
            bq_presolve_summary(p, &mut lp, &mut active, &mut unassigned, &mut free),
            BqStatus::Ok
        );
        assert!(lp <= 3.0 + 1e-6);
        assert!(active >= 2);
        let mut report = ptr::null_mut();
        assert_eq!(bq_presolve_report(p, &mut report), BqStatus::Ok);
        let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        bq_string_free(report);
        assert_eq!(json["users"], 4);
        assert_eq!(json["unassigned_users"], unassigned);

        let mut rq = ptr::null_mut();
        let status = bq_presolve_reduced_qubo(p, &mut rq);
        if unassigned == 0 {
            assert_eq!(status, BqStatus::InvalidArgument);
            assert!(rq.is_null());
        } else {
            assert_eq!(status, BqStatus::Ok);
            assert_eq!(bq_qubo_size(rq), free);
            bq_qubo_free(rq);
        }
        bq_presolve_free(p);

        let mut bf = 0;
        let mut bf_beam = [0u32; 4];
        assert_eq!(bq_best_fit(inst, &mut bf, bf_beam.as_mut_ptr()), BqStatus::Ok);
        assert_eq!(bf, 3);
        assert_eq!(bf_beam, [0, 0, 1, 2]);

        for backend in [BQ_BACKEND_EXACT, BQ_BACKEND_ANNEALING] {
            let (mut obj, mut feasible) = (0, false);
            let mut beams = [BQ_NO_BEAM; 4];
            let s = bq_solve(inst, backend, 200, 20, 5, false, &mut obj, &mut feasible, beams.as_mut_ptr());
            assert_eq!(s, BqStatus::Ok, "{}", last_error());
            assert!(feasible);
            assert_eq!(obj, 3);
            assert!(beams.iter().all(|&b| b != BQ_NO_BEAM));
            assert_ne!(beams[0], beams[2]);
        }
        let (mut obj, mut feasible) = (0, false);
        assert_eq!(
            bq_solve(inst, 9, 0, 0, 0, false, &mut obj, &mut feasible, ptr::null_mut()),
            BqStatus::InvalidArgument
        );
        bq_instance_free(inst);
    }
}

#[test]
fn positions_build_a_proximity_graph() {
    // Two users close together, a third far away.
    let lat = [25.0, 25.05, 29.0];
    let lon = [-90.0, -90.05, -82.0];
    let mut inst = ptr::null_mut();
    unsafe {
        let s = bq_instance_from_positions(
            3, lat.as_ptr(), lon.as_ptr(), 26.8, -85.4, 1110.0, 5.0, 0, 20, &mut inst,
        );
        assert_eq!(s, BqStatus::Ok, "{}", last_error());
        let (mut n, mut e, mut b, mut w) = (0, 0, 0, 0);
        assert_eq!(bq_instance_shape(inst, &mut n, &mut e, &mut b, &mut w), BqStatus::Ok);
        assert_eq!((n, e, b, w), (3, 1, 3, 20));
        bq_instance_free(inst);

        let bad_lat = [95.0];
        let s = bq_instance_from_positions(
            1, bad_lat.as_ptr(), lon.as_ptr(), 26.8, -85.4, 1110.0, 5.0, 0, 20, &mut inst,
        );
        assert_eq!(s, BqStatus::InvalidArgument);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut out = ptr::null_mut();
        let edges = [0u32, 5];
        assert_eq!(bq_instance_new(3, edges.as_ptr(), 1, 0, 2, &mut out), BqStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert!(out.is_null());

        assert_eq!(bq_instance_new(3, ptr::null(), 1, 0, 2, &mut out), BqStatus::NullPointer);
        assert!(last_error().contains("edges"));
        assert_eq!(bq_instance_new(3, ptr::null(), 0, 0, 2, ptr::null_mut()), BqStatus::NullPointer);
        assert_eq!(bq_instance_new(3, ptr::null(), usize::MAX, 0, 2, &mut out), BqStatus::InvalidArgument);

        // Capacity zero is rejected by the instance constructor.
        assert_eq!(bq_instance_new(3, ptr::null(), 0, 0, 0, &mut out), BqStatus::InvalidArgument);

        // Two users that must be apart, one beam.
        assert_eq!(bq_instance_new(2, ptr::null(), 0, 1, 2, &mut out), BqStatus::Ok);
        let mut bf = 0;
        assert_eq!(bq_best_fit(out, &mut bf, ptr::null_mut()), BqStatus::Capacity);
        bq_instance_free(out);

        let mut q = ptr::null_mut();
        assert_eq!(bq_qubo_build(ptr::null(), 0.0, &mut q), BqStatus::NullPointer);
        assert_eq!(bq_qubo_size(ptr::null()), 0);
        assert_eq!(bq_qubo_offset(ptr::null()), 0.0);

        let inst = path_instance();
        assert!(last_error().is_empty());
        bq_instance_free(inst);
        bq_instance_free(ptr::null_mut());
        bq_qubo_free(ptr::null_mut());
        bq_presolve_free(ptr::null_mut());
        bq_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/beamqubo.h")).unwrap();
    for name in [
        "BQ_STATUS_OK",
        "BQ_STATUS_PANIC",
        "typedef struct BqInstance BqInstance",
        "typedef struct BqQubo BqQubo",
        "typedef struct BqPresolve BqPresolve",
        "bq_instance_new",
        "bq_instance_from_positions",
        "bq_qubo_build",
        "bq_qubo_energy",
        "bq_presolve_reduced_qubo",
        "bq_best_fit",
        "bq_solve",
        "bq_last_error_message",
        "bq_string_free",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles `tests/c/smoke.c` against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbeamqubo_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let out = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("qubits=28 size=28 header=28 "), "{text}");
    assert!(text.contains(" bf=3 obj=3 feasible=1 bad=2 msg=set"), "{text}");
}
