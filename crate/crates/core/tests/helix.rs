use harmonia_core::helix::{
    decode, encode, eval_and, eval_or, helix_add, helix_mul, helix_sub, predicate_score, HelixPoint,
    PredicateScore, Strand, Turn,
};
use proptest::prelude::*;

const R: i64 = 50;

#[test]
fn exhaustive_small_range_matches_integers() {
    let mut cases = [0u32; 3];
    for x in -R..=R {
        for y in -R..=R {
            assert_eq!(decode(helix_add(encode(x), y).unwrap()).unwrap(), x + y, "{x} + {y}");
            assert_eq!(decode(helix_sub(encode(x), y).unwrap()).unwrap(), x - y, "{x} - {y}");
            assert_eq!(decode(helix_mul(x, y).unwrap()).unwrap(), x * y, "{x} * {y}");
            cases.iter_mut().for_each(|c| *c += 1);
        }
    }
    assert_eq!(cases, [10_201; 3]);
}

#[test]
fn both_zeros_decode_to_zero() {
    assert_eq!(decode(HelixPoint::POSITIVE_ZERO).unwrap(), 0);
    assert_eq!(decode(HelixPoint::NEGATIVE_ZERO).unwrap(), 0);
    assert_eq!(encode(0), HelixPoint::POSITIVE_ZERO);
    for y in -5..=5 {
        assert_eq!(decode(helix_add(HelixPoint::NEGATIVE_ZERO, y).unwrap()).unwrap(), y);
        assert_eq!(decode(helix_sub(HelixPoint::NEGATIVE_ZERO, y).unwrap()).unwrap(), -y);
    }
}

#[test]
fn stepping_across_zero_switches_strand() {
    let p = encode(1).step(Turn::Ccw).unwrap();
    assert!(p.is_zero());
    let q = p.step(Turn::Ccw).unwrap();
    assert_eq!(q, HelixPoint::new(Strand::Negative, 1));
}

#[test]
fn overflow_is_reported() {
    // the helix itself carries u64 magnitudes; leaving i64 fails on decode
    assert!(helix_mul(i64::MAX, 2).and_then(decode).is_err());
    assert!(helix_mul(i64::MAX, i64::MAX).is_err());
    assert!(helix_add(encode(i64::MAX), 1).and_then(decode).is_err());
    assert_eq!(decode(encode(i64::MIN)).unwrap(), i64::MIN);
}

proptest! {
    #[test]
    fn encode_decode_round_trip(z in any::<i64>()) {
        prop_assert_eq!(decode(encode(z)).unwrap(), z);
    }

    #[test]
    fn add_then_sub_returns(x in -1_000_000i64..1_000_000, y in -1_000_000i64..1_000_000) {
        let there = helix_add(encode(x), y).unwrap();
        prop_assert_eq!(decode(helix_sub(there, y).unwrap()).unwrap(), x);
    }

    #[test]
    fn mul_commutes(x in -3000i64..3000, y in -3000i64..3000) {
        prop_assert_eq!(decode(helix_mul(x, y).unwrap()).unwrap(), decode(helix_mul(y, x).unwrap()).unwrap());
    }

    #[test]
    fn and_is_min_plus_injection(scores in prop::collection::vec(-1.0f64..=1.0, 1..6), inject in 0.0f64..3.0) {
        let ops: Vec<PredicateScore> = scores.iter().map(|s| PredicateScore::from_harmonic_value(*s)).collect();
        let out = eval_and(&ops, inject).unwrap();
        let expected = scores.iter().cloned().fold(f64::INFINITY, f64::min) + inject;
        prop_assert_eq!(out.outcome, expected);
        prop_assert_eq!(out.expanded, expected > 0.0);
    }

    #[test]
    fn or_is_max(scores in prop::collection::vec(-1.0f64..=1.0, 1..6)) {
        let ops: Vec<PredicateScore> = scores.iter().map(|s| PredicateScore::from_harmonic_value(*s)).collect();
        let out = eval_or(&ops).unwrap();
        prop_assert_eq!(out.outcome, scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
}

fn bit(b: bool) -> PredicateScore {
    PredicateScore::from_harmonic_value(if b { 1.0 } else { -1.0 })
}

#[test]
fn classical_truth_tables() {
    for a in [false, true] {
        for b in [false, true] {
            assert_eq!(eval_and(&[bit(a), bit(b)], 0.0).unwrap().expanded, a && b, "{a} and {b}");
            assert_eq!(eval_or(&[bit(a), bit(b)]).unwrap().expanded, a || b, "{a} or {b}");
        }
    }
}

#[test]
fn forced_expansion_needs_more_than_one() {
    let ops = [bit(true), bit(false)];
    assert!(!eval_and(&ops, 1.0).unwrap().expanded);
    assert_eq!(eval_and(&ops, 1.0).unwrap().outcome, 0.0);
    assert!(!eval_and(&ops, 0.5).unwrap().expanded);
    assert!(eval_and(&ops, 1.0 + 1e-9).unwrap().expanded);
}

#[test]
fn absent_operand_is_false() {
    let absent = PredicateScore::absent();
    assert!(!absent.is_true());
    assert!(!eval_and(&[bit(true), absent], 0.0).unwrap().expanded);
    assert!(eval_or(&[bit(true), absent]).unwrap().expanded);
}

#[test]
fn predicate_boundary_at_right_angle() {
    let p = predicate_score(std::f64::consts::FRAC_PI_2, true).unwrap();
    assert_eq!(p.score, 0.0);
    assert!(!p.is_true());
    assert!(predicate_score(-0.1, true).is_err());
    assert_eq!(predicate_score(0.0, false).unwrap().score, -1.0);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(eval_and(&[], 0.0).is_err());
    assert!(eval_or(&[]).is_err());
    assert!(eval_and(&[bit(true)], -0.1).is_err());
    assert!(eval_and(&[bit(true)], f64::NAN).is_err());
}
