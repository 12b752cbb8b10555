use std::f64::consts::PI;

use ggkdv::critical::{
    alpha_matrix_oracle, alpha_quadratic, enumerate_critical_lengths, generator_length, is_critical,
    root_sharing_oracle, AlphaForm, GeneratorTuple,
};
use ggkdv::model::SystemParams;
use ggkdv::Params;
use num_complex::Complex64;
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = Params> {
    (0.0..0.9f64, 0.2..2.0f64, 0.2..2.0f64, 0.2..1.5f64)
        .prop_filter("1 - a²b > 0.3", |(a, b, _, _)| 1.0 - a * a * b > 0.3)
        .prop_map(|(a, b, c, r)| SystemParams { a, a1: 1.0, a2: 1.0, b, c, r })
}

fn indices() -> impl Strategy<Value = [u32; 5]> {
    proptest::array::uniform5(1u32..8)
}

#[test]
fn reference_set_at_default_parameters() {
    let p = Params::default();
    let set = enumerate_critical_lengths(&p, 20.0);
    let v = set.values();
    assert!((v[0] - 2.0 * PI * 0.75f64.sqrt()).abs() < 1e-12);
    assert!(set.lengths[0].generators.contains(&GeneratorTuple::F1 { k: 1 }));
    let f2 = PI * 26f64.sqrt();
    let hit = set.lengths.iter().find(|c| (c.value - f2).abs() < 1e-9 * f2).expect("π√26 enumerated");
    assert!(hit.generators.contains(&GeneratorTuple::F2 { indices: [1, 1, 1, 1, 1] }));
    assert!(v.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(alpha_matrix_oracle([1, 1, 1, 1, 1]), 104);
}

#[test]
fn first_family_lengths_share_roots_and_shifted_lengths_do_not() {
    let p = Params::default();
    let zero = Complex64::new(0.0, 0.0);
    for k in 1..=3u32 {
        let l = generator_length(&p, GeneratorTuple::F1 { k }, AlphaForm::Stated);
        assert!(root_sharing_oracle(&p, zero, l, 1e-6).unwrap().shared);
        assert!(!root_sharing_oracle(&p, zero, 1.001 * l, 1e-6).unwrap().shared);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerated_lengths_are_recognised(p in admissible(), lmax in 5.0..18.0f64) {
        let set = enumerate_critical_lengths(&p, lmax);
        for c in &set.lengths {
            prop_assert!(c.value <= lmax * (1.0 + 1e-9));
            let gen = is_critical(&p, c.value, 1e-9);
            prop_assert!(gen.is_some_and(|g| c.generators.contains(&g)), "{} not recognised", c.value);
        }
    }

    #[test]
    fn lengths_between_critical_values_are_not_flagged(p in admissible(), t in 0.01..0.99f64) {
        let set = enumerate_critical_lengths(&p, 18.0);
        let v = set.values();
        prop_assume!(v.len() >= 2);
        let (lo, hi) = (v[0], v[1]);
        let l = lo + t * (hi - lo);
        prop_assume!((l - lo).abs() > 1e-6 * l && (hi - l).abs() > 1e-6 * l);
        prop_assert!(is_critical(&p, l, 1e-9).is_none());
        prop_assert!(is_critical(&p, 0.5 * lo, 1e-9).is_none());
    }

    #[test]
    fn alpha_increases_in_every_index(idx in indices(), slot in 0usize..5) {
        let mut up = idx;
        up[slot] += 1;
        prop_assert!(alpha_quadratic(up) > alpha_quadratic(idx));
        prop_assert!(AlphaForm::RootSpacing.eval(up) > AlphaForm::RootSpacing.eval(idx));
        let p = Params::default();
        let gen = |i| GeneratorTuple::F2 { indices: i };
        prop_assert!(generator_length(&p, gen(up), AlphaForm::Stated) > generator_length(&p, gen(idx), AlphaForm::Stated));
    }

    #[test]
    fn matrix_oracle_agrees_with_the_quadratic_form(idx in indices()) {
        prop_assert_eq!(alpha_matrix_oracle(idx), alpha_quadratic(idx));
    }
}
