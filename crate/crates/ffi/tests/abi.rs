use metivier_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn grid1() -> MtvGrid {
    MtvGrid {
        n: 1,
        r_max: 12.0,
        radial: [64, 0],
        angular: [128, 0],
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mtv_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn quaternionic_spectrum() {
    let name = CString::new("quaternionic").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(mtv_structure_new(name.as_ptr(), &mut s), MtvStatus::Ok);
        let (mut n, mut m) = (0, 0);
        assert_eq!(mtv_structure_dims(s, &mut n, &mut m), MtvStatus::Ok);
        assert_eq!((n, m), (2, 3));
        let lambda = [0.0, 0.0, 2.0];
        let mut mu = [0.0; 2];
        let mut a = [0.0; 16];
        assert_eq!(mtv_symplectic_spectrum(s, lambda.as_ptr(), 3, mu.as_mut_ptr(), a.as_mut_ptr()), MtvStatus::Ok);
        assert!(mu.iter().all(|v| (v - 2.0).abs() < 1e-10));
        // A is orthogonal
        for i in 0..4 {
            let norm: f64 = (0..4).map(|j| a[i * 4 + j] * a[i * 4 + j]).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
        assert_eq!(mtv_symplectic_spectrum(s, lambda.as_ptr(), 2, mu.as_mut_ptr(), a.as_mut_ptr()), MtvStatus::DimensionMismatch);
        mtv_structure_free(s);
    }
}

#[test]
fn singular_pencil_and_errors() {
    let name = CString::new("product-counterexample").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(mtv_structure_new(name.as_ptr(), &mut s), MtvStatus::Ok);
        let lambda = [1.0, 0.0];
        let mut mu = [0.0; 2];
        let mut a = [0.0; 16];
        assert_eq!(mtv_symplectic_spectrum(s, lambda.as_ptr(), 2, mu.as_mut_ptr(), a.as_mut_ptr()), MtvStatus::SingularPencil);
        assert!(last_error().contains("singular"));
        mtv_structure_free(s);
        let bad = CString::new("no-such-structure").unwrap();
        assert_ne!(mtv_structure_new(bad.as_ptr(), &mut s), MtvStatus::Ok);
        assert_eq!(mtv_structure_new(ptr::null(), &mut s), MtvStatus::NullPointer);
    }
}

#[test]
fn theta_and_radii() {
    let lp = [1.0];
    let z = [std::f64::consts::SQRT_2, 0.0];
    let mut v = 1.0;
    let mut adm = -1;
    unsafe {
        assert_eq!(mtv_theta(1, lp.as_ptr(), 1, z.as_ptr(), &mut v), MtvStatus::Ok);
        assert!(v.abs() < 1e-15);
        assert_eq!(mtv_two_radii_check(1.0, 2.0, 1, lp.as_ptr(), 40, 40, 1e-9, &mut adm), MtvStatus::Ok);
        assert_eq!(adm, 1);
        assert_eq!(
            mtv_two_radii_check(2.404825557695773, 5.520078110286311, 1, lp.as_ptr(), 40, 40, 1e-9, &mut adm),
            MtvStatus::Ok
        );
        assert_eq!(adm, 0);
        assert_eq!(mtv_two_radii_check(1.0, 0.0, 1, lp.as_ptr(), 40, 40, 1e-9, &mut adm), MtvStatus::InvalidArgument);
    }
}

#[test]
fn mean_reconstruct_round_trip() {
    let g = grid1();
    let lp = [1.0];
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(mtv_field_theta(&g, 2, lp.as_ptr(), &mut f), MtvStatus::Ok);
        let len = mtv_field_len(f);
        assert_eq!(len, 64 * 128);
        let mut mean = ptr::null_mut();
        assert_eq!(mtv_twisted_mean(f, lp.as_ptr(), 1.0, 64, &mut mean), MtvStatus::Ok);
        let (radii, weights) = ([1.0], [1.0]);
        let mut rec = ptr::null_mut();
        let mut bad = usize::MAX;
        assert_eq!(mtv_reconstruct(mean, radii.as_ptr(), weights.as_ptr(), 1, lp.as_ptr(), 6, &mut rec, &mut bad), MtvStatus::Ok);
        assert_eq!(bad, 0);
        let mut a = vec![0.0; 2 * len];
        let mut b = vec![0.0; 2 * len];
        assert_eq!(mtv_field_values(f, a.as_mut_ptr(), a.len()), MtvStatus::Ok);
        assert_eq!(mtv_field_values(rec, b.as_mut_ptr(), b.len()), MtvStatus::Ok);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
        assert_eq!(mtv_field_values(f, a.as_mut_ptr(), 3), MtvStatus::BufferTooSmall);

        let dir = std::env::temp_dir().join(format!("mtv-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = CString::new(dir.join("theta.field").to_str().unwrap()).unwrap();
        assert_eq!(mtv_field_write(f, path.as_ptr(), true), MtvStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(mtv_field_read(path.as_ptr(), &mut back), MtvStatus::Ok);
        assert_eq!(mtv_field_values(back, b.as_mut_ptr(), b.len()), MtvStatus::Ok);
        assert_eq!(a, b);
        let _ = std::fs::remove_dir_all(&dir);

        let mut copy = ptr::null_mut();
        assert_eq!(mtv_field_from_values(&g, a.as_ptr(), len, &mut copy), MtvStatus::Ok);
        assert_eq!(mtv_field_from_values(&g, a.as_ptr(), len - 1, &mut copy), MtvStatus::DimensionMismatch);
        for h in [f, mean, rec, back, copy] {
            mtv_field_free(h);
        }
    }
}

#[test]
fn counterexample_through_abi() {
    let g = grid1();
    let lp = [1.0];
    let (mut r, mut res) = (0.0, 1.0);
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(mtv_counterexample(1, &g, lp.as_ptr(), &mut f, &mut r, &mut res), MtvStatus::Ok);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(res < 1e-8);
        mtv_field_free(f);
        assert_eq!(mtv_counterexample(0, &g, lp.as_ptr(), &mut f, &mut r, &mut res), MtvStatus::InvalidArgument);
        let bad = MtvGrid { n: 3, ..g };
        assert_eq!(mtv_counterexample(1, &bad, lp.as_ptr(), &mut f, &mut r, &mut res), MtvStatus::UnsupportedDimension);
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/metivier.h")).unwrap();
    for sym in ["mtv_structure_new", "mtv_twisted_mean", "mtv_reconstruct", "mtv_last_error", "MTV_STATUS_OK"] {
        assert!(h.contains(sym), "{sym}");
    }
}
