//! Property tests for the frame-rotation algebra.

use num_complex::Complex64;
use proptest::prelude::*;
use zshift_core::frames::{
    dq_to_pn, pn_to_dq, rotate_dq, rotate_pn, ReferenceAngle,
};
use zshift_core::freqresp::{Domain, Frame, FrequencyGrid, FrequencyResponse, Kind, Mat2};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid() -> FrequencyGrid {
    FrequencyGrid::new(vec![1.0, 10.0, 100.0]).unwrap()
}

fn local(values: Vec<Mat2>, domain: Domain) -> FrequencyResponse {
    FrequencyResponse::new(grid(), values, domain, Frame::Local("x".into()), Kind::Impedance)
        .unwrap()
}

prop_compose! {
    fn arb_mat()(e in prop::array::uniform8(-1.0f64..1.0)) -> Mat2 {
        Mat2::new(c(e[0], e[1]), c(e[2], e[3]), c(e[4], e[5]), c(e[6], e[7]))
    }
}

prop_compose! {
    fn arb_resp(domain: Domain)(ms in prop::collection::vec(arb_mat(), 3)) -> FrequencyResponse {
        local(ms, domain)
    }
}

fn relocalize(r: &FrequencyResponse) -> FrequencyResponse {
    r.clone().with_frame(Frame::Local("x".into()))
}

fn close(a: &FrequencyResponse, b: &FrequencyResponse, tol: f64) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| (*x - *y).frobenius_norm() <= tol * y.frobenius_norm().max(1.0))
}

proptest! {
    #[test]
    fn dq_rotation_group_law(z in arb_resp(Domain::Dq), t1 in -3.1f64..3.1, t2 in -3.1f64..3.1) {
        let a1 = ReferenceAngle::new(t1).unwrap();
        let a2 = ReferenceAngle::new(t2).unwrap();
        let once = rotate_dq(&relocalize(&rotate_dq(&z, a1).unwrap()), a2).unwrap();
        let direct = rotate_dq(&z, ReferenceAngle::new(t1 + t2).unwrap()).unwrap();
        prop_assert!(close(&once, &direct, 1e-12));
    }

    #[test]
    fn pn_rotation_group_law(z in arb_resp(Domain::Pn), t1 in -3.1f64..3.1, t2 in -3.1f64..3.1) {
        let a1 = ReferenceAngle::new(t1).unwrap();
        let a2 = ReferenceAngle::new(t2).unwrap();
        let once = rotate_pn(&relocalize(&rotate_pn(&z, a1).unwrap()), a2).unwrap();
        let direct = rotate_pn(&z, ReferenceAngle::new(t1 + t2).unwrap()).unwrap();
        prop_assert!(close(&once, &direct, 1e-12));
    }

    #[test]
    fn rotation_inverse(z in arb_resp(Domain::Dq), t in -3.1f64..3.1) {
        let a = ReferenceAngle::new(t).unwrap();
        let back = rotate_dq(&relocalize(&rotate_dq(&z, a).unwrap()), -a).unwrap();
        prop_assert!(close(&back, &z, 1e-12));
    }

    #[test]
    fn basis_change_commutes_with_rotation(z in arb_resp(Domain::Dq), t in -3.1f64..3.1) {
        let a = ReferenceAngle::new(t).unwrap();
        let via_dq = dq_to_pn(&rotate_dq(&z, a).unwrap()).unwrap();
        let via_pn = rotate_pn(&dq_to_pn(&z).unwrap(), a).unwrap();
        prop_assert!(close(&via_dq, &via_pn, 1e-12));
    }

    #[test]
    fn rotation_preserves_spectral_data(z in arb_resp(Domain::Dq), t in -3.1f64..3.1) {
        let a = ReferenceAngle::new(t).unwrap();
        let rot = rotate_dq(&z, a).unwrap();
        for (m, r) in z.values().iter().zip(rot.values()) {
            prop_assert!((m.det() - r.det()).norm() < 1e-12 * m.det().norm().max(1.0));
            prop_assert!((m.trace() - r.trace()).norm() < 1e-12 * m.trace().norm().max(1.0));
            let (e1, e2) = m.eigenvalues();
            let (f1, f2) = r.eigenvalues();
            let direct = (e1 - f1).norm() + (e2 - f2).norm();
            let crossed = (e1 - f2).norm() + (e2 - f1).norm();
            prop_assert!(direct.min(crossed) < 1e-10);
        }
    }

    #[test]
    fn mfd_matrices_are_rotation_invariant(e in prop::array::uniform4(-1.0f64..1.0), t in -3.1f64..3.1) {
        // [[a, b], [−b, a]] with complex a, b.
        let m = Mat2::new(c(e[0], e[1]), c(e[2], e[3]), -c(e[2], e[3]), c(e[0], e[1]));
        let z = local(vec![m; 3], Domain::Dq);
        prop_assert!(zshift_core::frames::is_mfd(&z, 1e-12));
        let rot = rotate_dq(&z, ReferenceAngle::new(t).unwrap()).unwrap();
        prop_assert!(close(&rot, &z.clone().with_frame(Frame::Global), 1e-12));
    }

    #[test]
    fn pn_rotation_keeps_diagonals_bit_exact(z in arb_resp(Domain::Pn), t in -3.1f64..3.1) {
        let rot = rotate_pn(&z, ReferenceAngle::new(t).unwrap()).unwrap();
        for (m, r) in z.values().iter().zip(rot.values()) {
            prop_assert!(m.m11 == r.m11 && m.m22 == r.m22);
        }
    }

    #[test]
    fn dq_rotation_moves_every_entry_of_coupled_models(z in arb_resp(Domain::Dq)) {
        // Guard against degenerate draws: require visible asymmetry.
        let m = z.values()[0];
        prop_assume!((m.m11 - m.m22).norm() > 0.1 && (m.m12 + m.m21).norm() > 0.1);
        let rot = rotate_dq(&z, ReferenceAngle::new(std::f64::consts::FRAC_PI_4).unwrap()).unwrap();
        let r = rot.values()[0];
        prop_assert!((m.m11 - r.m11).norm() > 1e-6);
        prop_assert!((m.m12 - r.m12).norm() > 1e-6);
        prop_assert!((m.m21 - r.m21).norm() > 1e-6);
        prop_assert!((m.m22 - r.m22).norm() > 1e-6);
    }

    #[test]
    fn pn_round_trip(z in arb_resp(Domain::Dq)) {
        let back = pn_to_dq(&dq_to_pn(&z).unwrap()).unwrap();
        prop_assert!(close(&back, &z, 1e-13));
    }

    #[test]
    fn series_commutes_bitwise(a in arb_resp(Domain::Dq), b in prop::collection::vec(arb_mat(), 3)) {
        let b = FrequencyResponse::new(grid(), b, Domain::Dq, Frame::Local("x".into()), Kind::Impedance).unwrap();
        let ab = a.series(&b).unwrap();
        let ba = b.series(&a).unwrap();
        prop_assert!(ab.values() == ba.values());
    }
}
