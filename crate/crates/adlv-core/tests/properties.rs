//! Property tests for the exact combinatorics.

use adlv_core::{d_formula, preceq_int, Coweight, ExtendedSemiModule, SemiModule, Slope};
use proptest::prelude::*;

fn coprime_slope() -> impl Strategy<Value = Slope> {
    (1i64..=6, 1i64..=13).prop_filter_map("coprime", |(h, m)| Slope::new(m, h).ok())
}

/// A valid type for the slope: a composition of `m` respecting the prefix
/// bound, one ranked choice per entry.
fn valid_type(slope: Slope) -> impl Strategy<Value = Coweight> {
    let (m, h) = (slope.m(), slope.h());
    proptest::collection::vec(any::<u32>(), h as usize).prop_map(move |picks| {
        let mut entries = Vec::with_capacity(h as usize);
        let mut sum = 0i64;
        for i in 0..h {
            if i == h - 1 {
                entries.push(m - sum);
                break;
            }
            let hi = (i + 1) * m / h - sum;
            let v = picks[i as usize] as i64 % (hi + 1);
            entries.push(v);
            sum += v;
        }
        Coweight::new(entries)
    })
}

fn slope_and_type() -> impl Strategy<Value = (Slope, Coweight)> {
    coprime_slope().prop_flat_map(|s| valid_type(s).prop_map(move |t| (s, t)))
}

fn int_vector_pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (1usize..7).prop_flat_map(|len| {
        (
            proptest::collection::vec(-4i64..5, len),
            proptest::collection::vec(-4i64..5, len),
        )
    })
}

proptest! {
    #[test]
    fn preceq_is_reflexive(xs in proptest::collection::vec(-5i64..6, 1..8)) {
        prop_assert!(preceq_int(&xs, &xs).unwrap());
    }

    #[test]
    fn preceq_is_antisymmetric((xs, mut ys) in int_vector_pair()) {
        // align the totals so comparability is possible
        let dx: i64 = xs.iter().sum();
        let dy: i64 = ys.iter().sum();
        let last = ys.len() - 1;
        ys[last] += dx - dy;
        if preceq_int(&xs, &ys).unwrap() && preceq_int(&ys, &xs).unwrap() {
            prop_assert_eq!(&xs, &ys);
        }
    }

    #[test]
    fn preceq_is_transitive(
        (xs, mut ys) in int_vector_pair(),
        mut zs in proptest::collection::vec(-4i64..5, 1..7),
    ) {
        zs.resize(xs.len(), 0);
        let dx: i64 = xs.iter().sum();
        let dy: i64 = ys.iter().sum();
        let dz: i64 = zs.iter().sum();
        let last = ys.len() - 1;
        ys[last] += dx - dy;
        zs[last] += dx - dz;
        if preceq_int(&xs, &ys).unwrap() && preceq_int(&ys, &zs).unwrap() {
            prop_assert!(preceq_int(&xs, &zs).unwrap());
        }
    }

    #[test]
    fn from_type_type_of_roundtrip((slope, ty) in slope_and_type()) {
        let a = SemiModule::from_type(slope, &ty).unwrap();
        prop_assert_eq!(a.type_of(), ty);
        prop_assert_eq!(SemiModule::normalize(slope, a.gens()).unwrap(), a.clone());
        // conductor marks the start of the full ray
        let f = a.conductor();
        for v in f..f + 2 * slope.h() {
            prop_assert!(a.contains(v));
        }
        prop_assert!(!a.contains(f - 1));
    }

    #[test]
    fn cyclic_esm_is_valid_and_bounded((slope, ty) in slope_and_type()) {
        let a = SemiModule::from_type(slope, &ty).unwrap();
        let esm = ExtendedSemiModule::cyclic_of(a);
        prop_assert!(esm.check().is_valid());
        let d = d_formula(slope, esm.mu()).unwrap();
        prop_assert!((esm.v_set().len() as i64) <= d);
        prop_assert_eq!(&esm.decomposition().start_values(), esm.mu());
    }
}
