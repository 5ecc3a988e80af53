use lanehash::field::{self, WideProduct};
use lanehash::vecbackend::{LaneWidth, MulMode, OpCounters, VectorBatch, VectorUnit};
use lanehash::{Goldilocks, P};
use proptest::prelude::*;

fn words(n: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(
        prop_oneof![6 => 0..P, 1 => Just(P - 1), 1 => Just(0u64), 1 => Just(1u64 << 32)],
        n,
    )
}

fn g(x: u64) -> Goldilocks {
    Goldilocks::from_canonical(x)
}

fn prefix(w: LaneWidth, xs: &[u64]) -> VectorBatch {
    VectorBatch::new(&xs[..w.lanes()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn every_lane_matches_the_scalar_op(a in words(8), b in words(8), k in prop::collection::vec(0u64..256, 8)) {
        for w in LaneWidth::ALL {
            let (x, y, s) = (prefix(w, &a), prefix(w, &b), VectorBatch::from_words(&k[..w.lanes()]).unwrap());
            let mut unit = VectorUnit::new(w);
            let add = unit.vadd(&x, &y).unwrap();
            let sub = unit.vsub(&x, &y).unwrap();
            let mul = unit.vmul(&x, &y).unwrap();
            let sq = unit.vsquare(&x).unwrap();
            let m8 = unit.vmul_u8(&x, &s).unwrap();
            let p7 = unit.vpow7(&x).unwrap();
            let (hi, lo) = unit.vmul_wide(&x, &y, MulMode::Direct).unwrap();
            let red = unit.vreduce_128(&hi, &lo).unwrap();
            for i in 0..w.lanes() {
                let (ai, bi) = (g(a[i]), g(b[i]));
                prop_assert_eq!(add.words()[i], field::add(ai, bi).value());
                prop_assert_eq!(sub.words()[i], field::sub(ai, bi).value());
                prop_assert_eq!(mul.words()[i], field::mul(ai, bi).value());
                prop_assert_eq!(sq.words()[i], field::square(ai).value());
                prop_assert_eq!(m8.words()[i], field::mult_72(ai, k[i] as u8).value());
                prop_assert_eq!(p7.words()[i], field::pow7(ai).value());
                prop_assert_eq!(WideProduct::new(hi.words()[i], lo.words()[i]), field::mul_wide_direct(ai, bi));
                prop_assert_eq!(red.words()[i], field::reduce_128(field::mul_wide_direct(ai, bi)).value());
            }
        }
    }

    #[test]
    fn widening_modes_agree_lane_wise(a in words(8), b in words(8)) {
        for w in LaneWidth::ALL {
            let (x, y) = (prefix(w, &a), prefix(w, &b));
            let mut unit = VectorUnit::new(w);
            let direct = unit.vmul_wide(&x, &y, MulMode::Direct).unwrap();
            let split = unit.vmul_wide(&x, &y, MulMode::Split32).unwrap();
            prop_assert_eq!(direct, split);
            let mut split_unit = VectorUnit::new(w).with_mul_mode(MulMode::Split32);
            prop_assert_eq!(split_unit.vmul(&x, &y).unwrap(), unit.vmul(&x, &y).unwrap());
        }
    }

    #[test]
    fn reduce_accepts_any_wide_words(hi in prop::collection::vec(any::<u64>(), 8), lo in prop::collection::vec(any::<u64>(), 8)) {
        for w in LaneWidth::ALL {
            let n = w.lanes();
            let mut unit = VectorUnit::new(w);
            let r = unit
                .vreduce_128(&VectorBatch::from_words(&hi[..n]).unwrap(), &VectorBatch::from_words(&lo[..n]).unwrap())
                .unwrap();
            for i in 0..n {
                prop_assert_eq!(r.words()[i], field::reduce_128(WideProduct::new(hi[i], lo[i])).value());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn transpose_moves_lanes_and_is_an_involution(m in words(64)) {
        for w in LaneWidth::ALL {
            let n = w.lanes();
            let rows: Vec<VectorBatch> = (0..n).map(|r| VectorBatch::new(&m[r * 8..r * 8 + n]).unwrap()).collect();
            let mut unit = VectorUnit::new(w);
            let t = unit.transpose_block(&rows).unwrap();
            for (i, col) in t.iter().enumerate() {
                for (j, row) in rows.iter().enumerate() {
                    prop_assert_eq!(col.words()[j], row.words()[i]);
                }
            }
            prop_assert_eq!(unit.transpose_block(&t).unwrap(), rows);
        }
    }

    #[test]
    fn counts_do_not_depend_on_values(a in words(8), b in words(8), c in words(8), d in words(8)) {
        for w in LaneWidth::ALL {
            let run = |x: &[u64], y: &[u64]| -> OpCounters {
                let mut unit = VectorUnit::counting(w);
                let (x, y) = (prefix(w, x), prefix(w, y));
                let m = unit.vmul(&x, &y).unwrap();
                let s = unit.vadd(&m, &x).unwrap();
                let s = unit.vsub(&s, &y).unwrap();
                unit.vpow7(&s).unwrap();
                unit.counters().unwrap()
            };
            prop_assert_eq!(run(&a, &b), run(&c, &d));
        }
    }
}

#[test]
fn counters_only_grow() {
    let mut unit = VectorUnit::counting(LaneWidth::W4);
    let x = VectorBatch::splat(LaneWidth::W4, Goldilocks::from_canonical(12345));
    let mut last = 0;
    for _ in 0..20 {
        unit.vmul(&x, &x).unwrap();
        let now = unit.counters().unwrap().total();
        assert!(now > last);
        last = now;
    }
    unit.reset_counters();
    assert_eq!(unit.counters().unwrap().total(), 0);
    assert_eq!(VectorUnit::new(LaneWidth::W4).counters(), None);
}

#[test]
fn width_mismatch_and_bad_factors_are_rejected() {
    let mut unit = VectorUnit::new(LaneWidth::W4);
    let two = VectorBatch::new(&[1, 2]).unwrap();
    let four = VectorBatch::new(&[1, 2, 3, 4]).unwrap();
    assert!(unit.vadd(&two, &four).is_err());
    assert!(unit
        .vmul_u8(&four, &VectorBatch::new(&[1, 2, 3, 256]).unwrap())
        .is_err());
    assert!(VectorBatch::new(&[P, 0]).is_err());
    assert!(VectorBatch::new(&[1, 2, 3]).is_err());
}
