use ggkdv::model::{
    diagonalize, mat_mul, validate_params, x_inner, DiagonalForm, SpaceTimeGrid, StatePair, SystemParams,
};
use ggkdv::GgError;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams<f64>> {
    (-3.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64, -1.0..4.0f64, -1.0..4.0f64, -1.0..4.0f64)
        .prop_map(|(a, a1, a2, b, c, r)| SystemParams { a, a1, a2, b, c, r })
}

proptest! {
    #[test]
    fn validation_accepts_exactly_the_admissible_region(p in params()) {
        let admissible = p.b > 0.0 && p.c > 0.0 && p.r > 0.0 && 1.0 - p.a * p.a * p.b > 0.0;
        match validate_params(&p) {
            Ok(v) => {
                prop_assert!(admissible);
                prop_assert_eq!(*v.get(), p);
            }
            Err(GgError::CoefficientViolation { violations }) => {
                prop_assert!(!admissible);
                prop_assert!(!violations.is_empty());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn diagonalisation_round_trips(a in 0.05..0.95f64, b in 0.1..1.0f64, c in 0.2..3.0f64, r in 0.1..3.0f64) {
        prop_assume!(1.0 - a * a * b > 0.05);
        let p = validate_params(&SystemParams { a, a1: 1.0, a2: 1.0, b, c, r }).unwrap();
        let d = diagonalize(&p).unwrap();
        let id = mat_mul(&d.to_diag, &d.from_diag);
        for (i, row) in id.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x - expect).abs() <= 1e-12, "T·T⁻¹ = {id:?}");
            }
        }
        let m = d.conjugate(&DiagonalForm::dispersive_matrix(&p));
        prop_assert!(m[0][1].abs() <= 1e-12 && m[1][0].abs() <= 1e-12, "not diagonal: {m:?}");
        prop_assert!((m[0][0] - d.eig_plus).abs() <= 1e-12 && (m[1][1] - d.eig_minus).abs() <= 1e-12);
    }

    #[test]
    fn energy_product_is_nonnegative(
        vals in proptest::collection::vec(-10.0..10.0f64, 42),
        b in 0.1..2.0f64,
        c in 0.1..2.0f64,
    ) {
        let p = validate_params(&SystemParams { a: 0.1, a1: 1.0, a2: 1.0, b, c, r: 1.0 }).unwrap();
        let g = SpaceTimeGrid::new(2.0, 1.0, 20, 10).unwrap();
        let s = StatePair { u: vals[..21].to_vec(), v: vals[21..].to_vec() };
        prop_assert!(x_inner(&s, &s, &p, &g).unwrap() >= 0.0);
    }
}
