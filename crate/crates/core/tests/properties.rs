use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;

use symdyn::blockcodes::{apply_orbit, compose, BlockMap};
use symdyn::measures::{atomic_measure, pushforward};
use symdyn::sft::{PeriodicOrbit, SftSpec};
use symdyn::words::{cyclic_occurrences, minimalize, Alphabet, ForbiddenSet, Word};

fn binary_word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 1..=max).prop_map(Word::new)
}

/// A range-1 binary block map given by its 8 table entries.
fn range_one_map() -> impl Strategy<Value = BlockMap> {
    prop::collection::vec(0u8..2, 8).prop_map(|t| {
        let b = Alphabet::binary();
        BlockMap::total(1, b.clone(), b, move |w| t[(w[0] * 4 + w[1] * 2 + w[2]) as usize]).unwrap()
    })
}

proptest! {
    #[test]
    fn composition_is_applied_in_sequence(phi in range_one_map(), psi in range_one_map(), w in binary_word(14)) {
        prop_assume!(w.len() >= 5);
        let c = compose(&psi, &phi, None).unwrap();
        let direct = psi.apply_word(&phi.apply_word(&w).unwrap()).unwrap();
        prop_assert_eq!(c.apply_word(&w).unwrap(), direct);
    }

    #[test]
    fn cyclic_image_matches_unrolled_word(phi in range_one_map(), w in binary_word(10)) {
        let p = w.len();
        // w^3 covers every window of the middle copy
        let unrolled = phi.apply_word(&w.repeat(3)).unwrap();
        prop_assert_eq!(&phi.apply_cyclic(&w).unwrap()[..], &unrolled[p - 1..2 * p - 1]);
    }

    #[test]
    fn orbit_image_is_rotation_invariant(phi in range_one_map(), w in binary_word(10), k in 0usize..10) {
        let a = apply_orbit(&phi, &PeriodicOrbit::of(&w).unwrap()).unwrap();
        let b = apply_orbit(&phi, &PeriodicOrbit::of(&w.rotate(k % w.len())).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn blockmap_text_round_trips(phi in range_one_map()) {
        prop_assert_eq!(BlockMap::from_text(&phi.to_text()).unwrap(), phi);
    }

    #[test]
    fn orbit_representative_is_canonical(w in binary_word(12), k in 0usize..12) {
        let o = PeriodicOrbit::of(&w).unwrap();
        prop_assert_eq!(&o, &PeriodicOrbit::of(&w.rotate(k % w.len())).unwrap());
        prop_assert_eq!(&o, &PeriodicOrbit::of(&w.repeat(2)).unwrap());
        prop_assert!(o.period_word().is_primitive());
        prop_assert_eq!(w.len() % o.period(), 0);
    }

    #[test]
    fn minimalizing_keeps_the_shift(words in prop::collection::vec(binary_word(4), 1..4)) {
        let b = Alphabet::binary();
        let raw = ForbiddenSet::new(&b, words.clone()).unwrap();
        let min = minimalize(&b, words).unwrap();
        let (a, m) = (SftSpec::new(raw), SftSpec::new(min));
        for n in 1..=7 {
            let la: BTreeSet<Word> = a.language_slice(n, 1 << 10).unwrap().into_iter().collect();
            let lm: BTreeSet<Word> = m.language_slice(n, 1 << 10).unwrap().into_iter().collect();
            prop_assert_eq!(la, lm);
        }
    }
}

#[test]
fn atomic_cylinders_form_a_measure() {
    let v = SftSpec::from_words(&Alphabet::binary(), &["11"]).unwrap().vertex_shift().unwrap();
    for p in 1..=8 {
        let mu = atomic_measure(v.enumerate_min_periodic(p, 1 << 12).unwrap()).unwrap();
        for n in 0..=4 {
            let total: Ratio<u64> = Alphabet::binary().all_words(n).map(|w| mu.cylinder(&w)).sum();
            assert_eq!(total, Ratio::from_integer(1), "p = {p}, n = {n}");
            for w in Alphabet::binary().all_words(n) {
                let left: Ratio<u64> = (0..2).map(|a| mu.cylinder(&Word::new(vec![a]).concat(&w))).sum();
                assert_eq!(left, mu.cylinder(&w));
            }
        }
    }
}

#[test]
fn cyclic_occurrences_count_wraparound() {
    assert_eq!(cyclic_occurrences(&[1, 0], &[0, 1]).unwrap(), 1);
    assert_eq!(cyclic_occurrences(&[0, 0], &[0]).unwrap(), 1);
    assert_eq!(cyclic_occurrences(&[0, 1, 0], &[0, 1]).unwrap(), 1);
}

#[test]
fn non_injective_map_fails_pushforward() {
    let b = Alphabet::binary();
    // kills every 1
    let zero = BlockMap::total(0, b.clone(), b, |_| 0).unwrap();
    let v = SftSpec::full(&Alphabet::binary()).vertex_shift().unwrap();
    let mu = atomic_measure(v.enumerate_min_periodic(1, 16).unwrap()).unwrap();
    let pf = pushforward(&zero, &mu).unwrap();
    assert!(!pf.permutation);
    assert!(!pf.invariant());
}
