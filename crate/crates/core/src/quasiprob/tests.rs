use super::*;
use crate::lattice::TorusSpec;
use crate::linalg::pauli;
use crate::rules::{cellwise, compose, global_apply, identity_rule, phase_gate, right_shift, LocalOperator};
use std::f64::consts::{FRAC_PI_2, PI};

#[test]
fn wigner_operators() {
    let f = wigner_operator(1.0, 1.0);
    let want = CMat::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.25, -0.25), c(0.25, 0.25), c(0.0, 0.0)],
    );
    assert!(frobenius(&(f - want)) < 1e-15);
    let w = OperatorFrame::wigner();
    for (k, e) in w.elements.iter().enumerate() {
        assert!((e.trace() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(frobenius(&(e - e.adjoint())) < 1e-15);
        for (j, d) in w.dual.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            assert!(((d * e).trace() - c(want, 0.0)).norm() < 1e-12);
        }
    }
    assert!((w.sum_constant().unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    let unit = OperatorFrame::unit_sum_wigner();
    assert!((unit.sum_constant().unwrap() - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn identity_rule_gives_delta() {
    let m = quasi_probs(&identity_rule(2)).unwrap();
    assert_eq!(m.region, Region::line([0]));
    for eta in 0..4 {
        for xi in 0..4 {
            let want = if eta == xi { 1.0 } else { 0.0 };
            assert!((m.get(eta, &[xi]) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn phase_gate_tensors() {
    let m = quasi_probs(&phase_gate(PI)).unwrap();
    assert_eq!(m.region, Region::interval(-1, 1));
    assert!(m.is_deterministic(1e-12));
    assert!(m.reconstruction_residual < 1e-12);
    assert!(m.imag_residual < 1e-12);
    let m = quasi_probs(&phase_gate(FRAC_PI_2)).unwrap();
    assert!(m.min_entry() < -1e-3);
    assert!(!m.is_deterministic(1e-6));
    // the literal frame gives the same tensor up to the factor 2^{1-|N|}
    let lit = quasi_probs_in(&OperatorFrame::wigner(), &phase_gate(PI)).unwrap();
    let det = quasi_probs(&phase_gate(PI)).unwrap();
    for (a, b) in lit.entries.iter().flatten().zip(det.entries.iter().flatten()) {
        assert!((a - 0.25 * b).abs() < 1e-12);
    }
}

#[test]
fn expansion_round_trip() {
    let frame = OperatorFrame::unit_sum_wigner();
    let mut r = rng(90);
    for n in 1..=3 {
        let coeffs: Vec<C64> = (0..4usize.pow(n as u32))
            .map(|_| c(rand::Rng::gen_range(&mut r, -1.0..1.0), 0.0))
            .collect();
        let back = frame.coefficients(&frame.synthesize(&coeffs, n), n);
        let err = coeffs.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

#[test]
fn products_of_frame_elements() {
    assert!(OperatorFrame::wigner().idempotence_residual() > 0.1);
    assert!(OperatorFrame::unit_sum_wigner().idempotence_residual() > 0.1);
    assert!(OperatorFrame::classical(2).idempotence_residual() < 1e-15);
}

#[test]
fn classical_frame_makes_both_constructions_agree() {
    let rule = compose(&cellwise(&pauli('x')), &right_shift(2)).unwrap();
    let frame = OperatorFrame::classical(2);
    let maps = TwoSiteMaps::new(frame.clone(), &rule).unwrap();
    assert!(maps.tensor.is_deterministic(1e-12));
    for e1 in 0..2 {
        for e2 in 0..2 {
            let rep = compare_with(&maps, &frame, e1, e2, &[]).unwrap();
            assert!(rep.max_difference < 1e-12);
        }
    }
    // the Wigner frame does not have this property, even for the same rule
    let wig = TwoSiteMaps::new(OperatorFrame::unit_sum_wigner(), &phase_gate(FRAC_PI_2)).unwrap();
    let rep = compare_with(&wig, &OperatorFrame::wigner(), 0, 0, &[]).unwrap();
    assert!(rep.max_difference > 0.05);
}

#[test]
fn two_site_comparisons() {
    for e1 in 0..4 {
        for e2 in 0..4 {
            let rep = compare_two_site(&identity_rule(2), e1, e2).unwrap();
            assert!(rep.max_difference < 1e-12);
            let rep = compare_two_site(&phase_gate(FRAC_PI_2), e1, e2).unwrap();
            assert!(rep.max_difference > 0.05, "{e1} {e2}: {}", rep.max_difference);
        }
    }
    let rep = compare_two_site(&phase_gate(PI), 0, 0).unwrap();
    assert!(rep.min_eigenvalue < -1e-6);
    assert!(rep.witness.is_some());
    assert_eq!(rep.wigner_sum_constant, 2.0);
    assert!(compare_two_site(&right_shift(2), 0, 0).unwrap().min_eigenvalue > -1e-9);
}

#[test]
fn homomorphic_map_matches_global_evolution() {
    let ring = TorusSpec::ring(5);
    let lit = OperatorFrame::wigner();
    for phi in [PI, FRAC_PI_2, 0.3] {
        let rule = phase_gate(phi);
        let maps = TwoSiteMaps::new(OperatorFrame::unit_sum_wigner(), &rule).unwrap();
        for e1 in 0..4 {
            for e2 in 0..4 {
                let a = kron(&lit.elements[e1], &lit.elements[e2]);
                let op = LocalOperator::new(Region::line([1, 2]), a.clone(), 2).unwrap();
                let global = global_apply(&rule, &op, &ring).unwrap();
                let mine = LocalOperator::new(Region::interval(0, 3), maps.apply_hom(&a), 2).unwrap();
                assert!(global.distance(&mine) < 1e-10);
            }
        }
    }
}

#[test]
fn errors() {
    assert!(matches!(quasi_probs(&identity_rule(3)), Err(QuasiError::NonQubit(3))));
    let wide = compose(&right_shift(2), &right_shift(2)).unwrap();
    assert!(matches!(compare_two_site(&wide, 0, 0), Err(QuasiError::Scheme(_))));
    assert!(matches!(compare_two_site(&identity_rule(2), 4, 0), Err(QuasiError::BadIndex(4))));
}
