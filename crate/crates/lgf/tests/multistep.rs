use num_bigint::BigUint;

use lgf::guess::{multi_step_pipeline, MultistepOptions};
use lgf::lattice::Lattice;
use lgf::util::binomial;
use lgf::walkcount::{count_excursions, CountOptions};
use lgf::Error;

#[test]
fn three_dimensions_one_coordinate_at_a_time() {
    let l = Lattice::fcc(3).unwrap();
    let r = multi_step_pipeline(&l, &[1, 1, 1], 40, &MultistepOptions::default()).unwrap();
    assert_eq!(r.values, count_excursions(&l, 40, &CountOptions::default()).unwrap());
    assert_eq!(r.stages.len(), 2);
    assert!(r.cross_checked > 0);
}

#[test]
fn two_dimensions_closed_form() {
    let l = Lattice::fcc(2).unwrap();
    // seed with fewer levels than requested so that the recurrences do the work
    let opts = MultistepOptions { count_depth: Some(24), ..Default::default() };
    let r = multi_step_pipeline(&l, &[1, 1], 30, &opts).unwrap();
    for (n, v) in r.values.iter().enumerate() {
        let want = if n % 2 == 0 { binomial(n as u64, n as u64 / 2).pow(2) } else { BigUint::from(0u32) };
        assert_eq!(*v, want, "n = {n}");
    }
}

#[test]
fn four_dimensions_by_two_schedules() {
    let l = Lattice::fcc(4).unwrap();
    let a = multi_step_pipeline(&l, &[2, 2], 45, &MultistepOptions::default()).unwrap();
    let b = multi_step_pipeline(&l, &[1, 1, 2], 45, &MultistepOptions { threads: 4, ..Default::default() }).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.values[..=20], count_excursions(&l, 20, &CountOptions::default()).unwrap()[..]);
}

#[test]
fn schedules_must_reach_the_origin() {
    let l = Lattice::fcc(4).unwrap();
    let o = MultistepOptions::default();
    for bad in [&[4][..], &[1, 2], &[2, 0, 2], &[3, 2]] {
        assert!(matches!(multi_step_pipeline(&l, bad, 20, &o), Err(Error::Validation(_))), "{bad:?}");
    }
}

#[test]
fn too_little_data_is_reported() {
    let l = Lattice::fcc(3).unwrap();
    let opts = MultistepOptions { count_depth: Some(4), ..Default::default() };
    assert!(matches!(multi_step_pipeline(&l, &[1, 1, 1], 30, &opts), Err(Error::InsufficientData(_))));
}
