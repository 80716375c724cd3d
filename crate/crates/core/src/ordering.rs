//! Admissible orderings: the local exponents `nu_p(inv(f))`.
//!
//! Three kinds are provided. `DiscRegular` is the discriminant of the
//! regular representation, `sum_{k=1}^{n-1} c_p(k f)` by the
//! conductor-discriminant formula. `Radical` charges exponent 1 to every
//! ramified class. `Custom` reads the exponent from a table keyed by
//! `(p mod m, order of the inertia image)`; at `2`, at primes dividing
//! `n` and at primes dividing `m` it falls back to the discriminant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::arith::{divisors, factorize, gcd};
use crate::local::{local_group, LocalClass, LocalShape, Place, Side};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("custom ordering modulus must be positive")]
    ZeroModulus,
    #[error("custom ordering has no entry for p = {class} mod {modulus} with inertia order {inertia_order}")]
    MissingEntry { class: u64, modulus: u64, inertia_order: u64 },
    #[error("custom ordering entry for class {class} is not a unit mod {modulus}")]
    ClassNotUnit { class: u64, modulus: u64 },
    #[error("custom ordering entry with inertia order {0} does not divide n")]
    BadInertiaOrder(u64),
    #[error("custom ordering gives ramified classes of inertia order {0} exponent 0")]
    ZeroOnRamified(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingKind {
    DiscRegular,
    Radical,
    /// `(class mod m, inertia order) -> exponent`.
    Custom(BTreeMap<(u64, u64), u32>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingSpec {
    n: u64,
    kind: OrderingKind,
    modulus: u64,
}

impl OrderingSpec {
    pub fn disc_regular(n: u64) -> Self {
        OrderingSpec { n, kind: OrderingKind::DiscRegular, modulus: 1 }
    }

    pub fn radical(n: u64) -> Self {
        OrderingSpec { n, kind: OrderingKind::Radical, modulus: 1 }
    }

    /// Checks the admissibility contract on construction: classes are units
    /// mod `modulus`, inertia orders are nontrivial divisors of `n`, and
    /// every exponent is positive.
    pub fn custom(n: u64, modulus: u64, table: BTreeMap<(u64, u64), u32>) -> Result<Self, OrderingError> {
        if modulus == 0 {
            return Err(OrderingError::ZeroModulus);
        }
        let mut normalized = BTreeMap::new();
        for (&(class, order), &e) in &table {
            if gcd(class % modulus, modulus) != 1 {
                return Err(OrderingError::ClassNotUnit { class, modulus });
            }
            if order <= 1 || n % order != 0 {
                return Err(OrderingError::BadInertiaOrder(order));
            }
            if e == 0 {
                return Err(OrderingError::ZeroOnRamified(order));
            }
            normalized.insert((class % modulus, order), e);
        }
        Ok(OrderingSpec { n, kind: OrderingKind::Custom(normalized), modulus })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn kind(&self) -> &OrderingKind {
        &self.kind
    }

    /// Modulus of Frobenian dependence.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OrderingKind::DiscRegular => "disc",
            OrderingKind::Radical => "radical",
            OrderingKind::Custom(_) => "custom",
        }
    }

    /// Primes where the generic recipe does not apply.
    pub fn exceptional_primes(&self) -> BTreeSet<u64> {
        match self.kind {
            OrderingKind::Radical => BTreeSet::new(),
            OrderingKind::DiscRegular => std::iter::once(2).chain(factorize(self.n).into_iter().map(|(p, _)| p)).collect(),
            OrderingKind::Custom(_) => std::iter::once(2)
                .chain(factorize(self.n).into_iter().map(|(p, _)| p))
                .chain(factorize(self.modulus).into_iter().map(|(p, _)| p))
                .collect(),
        }
    }

    /// Exponent of a class with inertia coordinates `(tame, wild)` at `place`.
    pub fn exponent_of(&self, place: Place, tame: u64, wild: u64) -> Result<u32, OrderingError> {
        let p = match place {
            Place::Infinite => return Ok(0),
            Place::Finite(p) => p,
        };
        let shape = LocalShape::new(place, self.n);
        if tame % shape.tame_order == 0 && wild % shape.wild_order == 0 {
            return Ok(0);
        }
        match &self.kind {
            OrderingKind::Radical => Ok(1),
            OrderingKind::DiscRegular => Ok(disc_exponent(&shape, tame, wild)),
            OrderingKind::Custom(table) => {
                if self.exceptional_primes().contains(&p) {
                    return Ok(disc_exponent(&shape, tame, wild));
                }
                let order = shape.inertia_order(tame, wild);
                let class = p % self.modulus;
                table
                    .get(&(class, order))
                    .copied()
                    .ok_or(OrderingError::MissingEntry { class, modulus: self.modulus, inertia_order: order })
            }
        }
    }

    /// `nu_p(inv(f))`.
    pub fn exponent(&self, f: &LocalClass) -> Result<u32, OrderingError> {
        self.exponent_of(f.place, f.tame(), f.wild())
    }

    /// Whether classes generating the same inertia image get the same
    /// exponent at `place`. Diagnostic only; nothing requires it.
    pub fn is_constant_on_divisions(&self, place: Place) -> Result<bool, OrderingError> {
        let group = local_group(place, self.n, Side::Coefficients).expect("ordering modulus is at least 2");
        let mut seen: BTreeMap<u64, u32> = BTreeMap::new();
        for f in group.classes() {
            let e = self.exponent(&f)?;
            if *seen.entry(f.inertia_order()).or_insert(e) != e {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Custom table entries needed for a full table: every unit class mod
    /// `m` paired with every nontrivial divisor of `n`.
    pub fn required_custom_keys(n: u64, modulus: u64) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for c in 0..modulus {
            if gcd(c, modulus) != 1 {
                continue;
            }
            for d in divisors(n) {
                if d > 1 {
                    out.push((c, d));
                }
            }
        }
        out
    }
}

impl fmt::Display for OrderingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

fn disc_exponent(shape: &LocalShape, tame: u64, wild: u64) -> u32 {
    (1..shape.n).map(|k| shape.conductor_exponent(k * tame, k * wild)).sum()
}

/// `nu_p(inv(f))` for the given ordering.
pub fn inv_exponent(f: &LocalClass, ordering: &OrderingSpec) -> Result<u32, OrderingError> {
    ordering.exponent(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_regular_examples() {
        let o = OrderingSpec::disc_regular(2);
        let unr = LocalClass::new(Place::Finite(7), 2, [1, 0, 0]);
        assert_eq!(inv_exponent(&unr, &o), Ok(0));
        let tame = LocalClass::new(Place::Finite(7), 2, [0, 1, 0]);
        assert_eq!(inv_exponent(&tame, &o), Ok(1));
        let o3 = OrderingSpec::disc_regular(3);
        let tame3 = LocalClass::new(Place::Finite(7), 3, [0, 1, 0]);
        assert_eq!(inv_exponent(&tame3, &o3), Ok(2));
        // wild cubic at 3: two characters of conductor 9
        let wild3 = LocalClass::new(Place::Finite(3), 3, [0, 0, 1]);
        assert_eq!(inv_exponent(&wild3, &o3), Ok(4));
        // n = 4 at p = 5: order-4 tame classes weigh 3, order-2 classes 2
        let o4 = OrderingSpec::disc_regular(4);
        assert_eq!(o4.exponent_of(Place::Finite(5), 1, 0), Ok(3));
        assert_eq!(o4.exponent_of(Place::Finite(5), 2, 0), Ok(2));
        assert_eq!(o4.exponent_of(Place::Infinite, 1, 0), Ok(0));
    }

    #[test]
    fn radical_and_custom() {
        let r = OrderingSpec::radical(4);
        assert_eq!(r.exponent_of(Place::Finite(2), 0, 3), Ok(1));
        assert_eq!(r.exponent_of(Place::Finite(2), 0, 0), Ok(0));

        let mut table = BTreeMap::new();
        table.insert((1, 2), 1);
        table.insert((3, 2), 2);
        let c = OrderingSpec::custom(2, 4, table.clone()).unwrap();
        assert_eq!(c.exponent_of(Place::Finite(5), 1, 0), Ok(1));
        assert_eq!(c.exponent_of(Place::Finite(7), 1, 0), Ok(2));
        // falls back to the discriminant at 2
        assert_eq!(c.exponent_of(Place::Finite(2), 0, 1), Ok(3));

        let c3 = OrderingSpec::custom(4, 4, table).unwrap();
        assert_eq!(
            c3.exponent_of(Place::Finite(5), 1, 0),
            Err(OrderingError::MissingEntry { class: 1, modulus: 4, inertia_order: 4 })
        );
        let mut bad = BTreeMap::new();
        bad.insert((2, 2), 1);
        assert!(matches!(OrderingSpec::custom(2, 4, bad), Err(OrderingError::ClassNotUnit { .. })));
        let mut zero = BTreeMap::new();
        zero.insert((1, 2), 0);
        assert_eq!(OrderingSpec::custom(2, 4, zero), Err(OrderingError::ZeroOnRamified(2)));
        assert_eq!(OrderingSpec::required_custom_keys(4, 4), vec![(1, 2), (1, 4), (3, 2), (3, 4)]);
    }

    #[test]
    fn divisions_diagnostic() {
        let d2 = OrderingSpec::disc_regular(2);
        assert_eq!(d2.is_constant_on_divisions(Place::Finite(2)), Ok(false));
        assert_eq!(d2.is_constant_on_divisions(Place::Finite(5)), Ok(true));
        assert_eq!(OrderingSpec::radical(2).is_constant_on_divisions(Place::Finite(2)), Ok(true));
    }
}
