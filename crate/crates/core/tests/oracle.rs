mod common;

use common::{corpus, oracle, roots};
use mvc2gen_core::io::diff_psm;
use mvc2gen_core::pim::{crud_chain, validate_pim};
use mvc2gen_core::synth::random_crud_forest;
use mvc2gen_core::{transform, validate_psm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_reproduces_the_chain() {
    let m = crud_chain("p", &["Ci", "Cj", "Ck"]);
    assert_eq!(oracle(&m), transform(&m).unwrap());
}

#[test]
fn corpus_agrees_with_oracle() {
    for (i, m) in corpus().iter().enumerate() {
        let out = transform(m).unwrap();
        let d = diff_psm(&oracle(m), &out);
        assert!(d.is_empty(), "forest {i}:\n{d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn counting_law(seed in any::<u64>(), max in 1usize..=12) {
        let m = random_crud_forest(&mut ChaCha8Rng::seed_from_u64(seed), max);
        prop_assert!(validate_pim(&m).is_empty());
        let n = m.package.classifiers.len();
        let out = transform(&m).unwrap();
        prop_assert_eq!(out.views.views.len(), 3 * n);
        prop_assert_eq!(out.actions.actions.len(), 4 * n);
        prop_assert_eq!(out.forms.forms.len(), 6 * n - roots(&m));
        prop_assert!(validate_psm(&out).is_empty());
        for a in &out.actions.actions {
            prop_assert_eq!(a.forwards.len(), 1);
            prop_assert!(out.forward_page(&a.forwards[0]).is_some());
        }
    }

    #[test]
    fn matches_oracle(seed in any::<u64>()) {
        let m = random_crud_forest(&mut ChaCha8Rng::seed_from_u64(seed), 10);
        prop_assert_eq!(transform(&m).unwrap(), oracle(&m));
    }
}
