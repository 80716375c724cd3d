use std::collections::BTreeMap;

use proptest::prelude::*;

use h1count::arith::primes_up_to;
use h1count::conditions::{ConditionFamily, BUILTIN_FAMILIES};
use h1count::cyclotomic::CyclotomicScalar;
use h1count::euler::{EulerProductSpec, FrobenianFactor, LocalPoly};
use h1count::global::{reciprocity_defect, Component, GlobalCharacter, GlobalKummerClass};
use h1count::group::{annihilator, FiniteAbelianGroup};
use h1count::local::{LocalKummerClass, Place};
use h1count::ordering::OrderingSpec;
use h1count::poisson::{dominated, greenberg_wiles_check, local_fourier, SelmerBox};

const SMALL_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn scalar(n: u64) -> impl Strategy<Value = CyclotomicScalar> {
    proptest::collection::vec((-5i64..=5, 1i64..=4), 1..6).prop_map(move |cs| {
        let mut s = CyclotomicScalar::zero(n);
        for (k, (num, den)) in cs.into_iter().enumerate() {
            s += &(&CyclotomicScalar::zeta_pow(n, k as u64) * &CyclotomicScalar::from_ratio(n, num, den));
        }
        s
    })
}

fn character(n: u64) -> impl Strategy<Value = GlobalCharacter> {
    proptest::sample::subsequence(SMALL_PRIMES.to_vec(), 0..4)
        .prop_flat_map(move |ps| {
            let len = ps.len();
            (Just(ps), proptest::collection::vec((0u64..64, 0u64..64), len))
        })
        .prop_map(move |(ps, tw)| {
            let comps = ps.into_iter().zip(tw).map(|(p, (tame, wild))| Component { p, tame, wild }).collect();
            GlobalCharacter::new(n, comps, &OrderingSpec::radical(n)).unwrap()
        })
}

fn kummer(n: u64) -> impl Strategy<Value = GlobalKummerClass> {
    (any::<bool>(), proptest::collection::vec((0usize..SMALL_PRIMES.len(), 0u64..64), 0..4)).prop_map(move |(neg, fs)| {
        let mut by_p = BTreeMap::new();
        for (i, e) in fs {
            by_p.insert(SMALL_PRIMES[i], e % n);
        }
        let fs: Vec<(u64, u64)> = by_p.into_iter().collect();
        GlobalKummerClass::new(n, neg, &fs).unwrap()
    })
}

proptest! {
    #[test]
    fn cyclotomic_ring_axioms(a in scalar(12), b in scalar(12), c in scalar(12)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &CyclotomicScalar::one(12), a.clone());
    }

    #[test]
    fn annihilator_order(factors in proptest::collection::vec(1u64..=6, 1..4), gens in proptest::collection::vec(proptest::collection::vec(0u64..6, 3), 0..3)) {
        let g = FiniteAbelianGroup::new(factors.clone()).unwrap();
        let gens: Vec<Vec<u64>> = gens.into_iter().map(|x| g.reduce(&x[..factors.len()])).collect();
        let sub = h1count::group::Subgroup::generated_by(&g, &gens).unwrap();
        let ann = annihilator(&gens, &g).unwrap();
        prop_assert_eq!(sub.order() * ann.order(), g.order());
        let back: Vec<Vec<u64>> = ann.elements().cloned().collect();
        prop_assert_eq!(annihilator(&back, &g).unwrap().order(), sub.order());
    }

    #[test]
    fn reciprocity((f, a) in (2u64..=6).prop_flat_map(|n| (character(n), kummer(n)))) {
        prop_assert!(reciprocity_defect(&f, &a).is_zero());
    }

    #[test]
    fn expand_is_multiplicative(
        x in proptest::collection::vec((0i64..3, 1i64..3), 1..4),
        y in proptest::collection::vec((0i64..3, 1i64..3), 1..4),
        e2 in proptest::collection::vec((-2i64..3, 1i64..3), 1..3),
    ) {
        let mk = |c: &[(i64, i64)]| {
            let mut c = c.to_vec();
            c[0] = (1, 1);
            LocalPoly::from_ratios(2, &c)
        };
        let a = EulerProductSpec::frobenian(2, FrobenianFactor::uniform(mk(&x))).with_exceptional(2, mk(&e2));
        let b = EulerProductSpec::frobenian(2, FrobenianFactor::uniform(mk(&y)));
        let lhs = a.mul(&b).expand(300, 1_000).unwrap();
        let rhs = a.expand(300, 1_000).unwrap().convolve(&b.expand(300, 1_000).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn domination(fam in 0usize..BUILTIN_FAMILIES.len(), n in 2u64..=6, pi in 0usize..15, radical in any::<bool>(), coords in proptest::array::uniform3(0u64..64)) {
        let Ok(family) = ConditionFamily::builtin(BUILTIN_FAMILIES[fam], n) else { return Ok(()); };
        let ordering = if radical { OrderingSpec::radical(n) } else { OrderingSpec::disc_regular(n) };
        let primes = primes_up_to(50);
        let v = if pi == 0 { Place::Infinite } else { Place::Finite(primes[pi - 1]) };
        let g = LocalKummerClass::new(v, n, coords);
        let at_g = local_fourier(v, &family, &ordering, &g).unwrap().poly;
        let at_0 = local_fourier(v, &family, &ordering, &LocalKummerClass::identity(v, n)).unwrap().poly;
        prop_assert!(dominated(&at_g, &at_0));
    }

    #[test]
    fn greenberg_wiles_random_boxes(n in 2u64..=4, mask in 0u32..32, gens in proptest::collection::vec(proptest::array::uniform3(0u64..64), 10)) {
        let places = [Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7), Place::Infinite];
        let mut conds = BTreeMap::new();
        for (i, &v) in places.iter().enumerate() {
            if mask & (1 << i) != 0 {
                conds.insert(v, vec![gens[2 * i], gens[2 * i + 1]]);
            }
        }
        let b = SelmerBox::from_generators(n, &conds).unwrap();
        let r = greenberg_wiles_check(&b).unwrap();
        prop_assert!(r.holds(), "{}", r);
    }
}
