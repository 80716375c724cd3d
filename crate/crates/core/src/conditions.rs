//! Frobenian families of local conditions `L = (L_p)` and their invariants.
//!
//! A family is a generic rule keyed by `p mod m`, plus a table of finitely
//! many exceptional places. The places `2`, `inf` and the primes dividing
//! `n` are always exceptional, as are primes dividing `m`; when the caller
//! does not list them they get `All` (or the rule's default subset for
//! primes dividing `m`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::arith::{euler_phi, factorize, gcd, lcm, next_prime_in_class};
use crate::local::{local_group, LocalClass, Place, Side};
use crate::ordering::{OrderingError, OrderingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionsError {
    #[error("n must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("rule modulus must be positive")]
    ZeroRuleModulus,
    #[error("family must contain identity (fails at {0})")]
    MissingIdentity(String),
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {name:?} is only defined for n = {expected}")]
    WrongN { name: String, expected: u64 },
    #[error("no ramified classes allowed generically")]
    NoRamifiedClasses,
    #[error(transparent)]
    Ordering(#[from] OrderingError),
}

/// A subset of `H^1(Q_v, Z/n)` given by a coordinate predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subset {
    All,
    /// `H^1_ur`; at infinity this is `{0}`.
    Unramified,
    Zero,
    /// Classes whose inertia image has order dividing the given number.
    InertiaOrderDivides(u64),
    /// Explicit `[frobenius, tame, wild]` coordinates.
    Explicit(BTreeSet<[u64; 3]>),
}

impl Subset {
    pub fn contains(&self, f: &LocalClass) -> bool {
        match self {
            Subset::All => true,
            Subset::Unramified => f.is_unramified(),
            Subset::Zero => f.is_zero(),
            Subset::InertiaOrderDivides(d) => d % f.inertia_order() == 0,
            Subset::Explicit(set) => set.contains(&f.coords),
        }
    }

    pub fn instantiate(&self, place: Place, n: u64) -> Vec<LocalClass> {
        let g = local_group(place, n, Side::Coefficients).expect("validated modulus");
        g.classes().into_iter().filter(|f| self.contains(f)).collect()
    }

    fn normalized(self, place: Place, n: u64) -> Self {
        match self {
            Subset::Explicit(set) => {
                Subset::Explicit(set.into_iter().map(|c| LocalClass::new(place, n, c).coords).collect())
            }
            other => other,
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::All => write!(f, "all"),
            Subset::Unramified => write!(f, "unramified"),
            Subset::Zero => write!(f, "zero"),
            Subset::InertiaOrderDivides(d) => write!(f, "inertia-divides:{d}"),
            Subset::Explicit(set) => {
                let parts: Vec<String> = set.iter().map(|c| format!("{}:{}:{}", c[0], c[1], c[2])).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

/// Subsets depending on `p` only through `p mod modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobenianRule {
    pub modulus: u64,
    pub default: Subset,
    pub overrides: BTreeMap<u64, Subset>,
}

impl FrobenianRule {
    pub fn constant(subset: Subset) -> Self {
        FrobenianRule { modulus: 1, default: subset, overrides: BTreeMap::new() }
    }

    pub fn subset_for(&self, p: u64) -> &Subset {
        self.overrides.get(&(p % self.modulus)).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyClass {
    /// Generic `L_p` is a union of `H^1_ur`-cosets containing the zero coset.
    Both,
    /// Generic `L_p` contains `H^1_ur` but is not a union of its cosets.
    Nonperiodic,
    Neither,
}

impl FamilyClass {
    pub fn is_periodic(self) -> bool {
        self == FamilyClass::Both
    }

    pub fn is_nonperiodic_eligible(self) -> bool {
        self != FamilyClass::Neither
    }
}

impl fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyClass::Both => "both",
            FamilyClass::Nonperiodic => "nonperiodic-eligible",
            FamilyClass::Neither => "neither",
        };
        f.write_str(s)
    }
}

pub const BUILTIN_FAMILIES: &[&str] = &[
    "full",
    "unramified",
    "real",
    "unramified-at-2",
    "split-at-3",
    "box3",
    "box5",
    "ramified-1mod4",
    "order2-ramification",
    "d1mod4",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionFamily {
    name: String,
    n: u64,
    generic: FrobenianRule,
    exceptional: BTreeMap<Place, Subset>,
}

impl ConditionFamily {
    pub fn new(
        name: impl Into<String>,
        n: u64,
        generic: FrobenianRule,
        exceptional: BTreeMap<Place, Subset>,
    ) -> Result<Self, ConditionsError> {
        if n < 2 {
            return Err(ConditionsError::BadModulus(n));
        }
        if generic.modulus == 0 {
            return Err(ConditionsError::ZeroRuleModulus);
        }
        let mut exceptional: BTreeMap<Place, Subset> =
            exceptional.into_iter().map(|(v, s)| (v, s.normalized(v, n))).collect();
        for v in std::iter::once(Place::Finite(2))
            .chain(std::iter::once(Place::Infinite))
            .chain(factorize(n).into_iter().map(|(p, _)| Place::Finite(p)))
        {
            exceptional.entry(v).or_insert(Subset::All);
        }
        for (p, _) in factorize(generic.modulus) {
            exceptional.entry(Place::Finite(p)).or_insert_with(|| generic.default.clone());
        }
        let family = ConditionFamily { name: name.into(), n, generic, exceptional };
        family.check_identity()?;
        Ok(family)
    }

    fn check_identity(&self) -> Result<(), ConditionsError> {
        for (&v, s) in &self.exceptional {
            if !s.contains(&LocalClass::zero(v, self.n)) {
                return Err(ConditionsError::MissingIdentity(v.to_string()));
            }
        }
        for (class, p) in self.representative_primes(1) {
            let s = self.generic.subset_for(p);
            if !s.contains(&LocalClass::zero(Place::Finite(p), self.n)) {
                return Err(ConditionsError::MissingIdentity(format!("p = {class} mod {}", self.modulus())));
            }
        }
        Ok(())
    }

    /// A built-in family by name.
    pub fn builtin(name: &str, n: u64) -> Result<Self, ConditionsError> {
        let unr = |v: Place| (v, Subset::Unramified);
        let n_primes: Vec<Place> = factorize(n).into_iter().map(|(p, _)| Place::Finite(p)).collect();
        let (generic, exceptional): (FrobenianRule, Vec<(Place, Subset)>) = match name {
            "full" => (FrobenianRule::constant(Subset::All), vec![]),
            "unramified" => {
                let mut ex: Vec<_> = n_primes.iter().map(|&v| unr(v)).collect();
                ex.push(unr(Place::Finite(2)));
                (FrobenianRule::constant(Subset::Unramified), ex)
            }
            "real" => (FrobenianRule::constant(Subset::All), vec![(Place::Infinite, Subset::Zero)]),
            "unramified-at-2" => (FrobenianRule::constant(Subset::All), vec![unr(Place::Finite(2))]),
            "split-at-3" => (FrobenianRule::constant(Subset::All), vec![(Place::Finite(3), Subset::Zero)]),
            "box3" | "box5" => {
                let q = if name == "box3" { 3 } else { 5 };
                let mut ex: Vec<_> = n_primes.iter().map(|&v| unr(v)).collect();
                ex.push(unr(Place::Finite(2)));
                ex.retain(|(v, _)| *v != Place::Finite(q));
                ex.push((Place::Finite(q), Subset::All));
                (FrobenianRule::constant(Subset::Unramified), ex)
            }
            "ramified-1mod4" => {
                let mut overrides = BTreeMap::new();
                overrides.insert(1, Subset::All);
                (FrobenianRule { modulus: 4, default: Subset::Unramified, overrides }, vec![])
            }
            "order2-ramification" => {
                let s = Subset::InertiaOrderDivides(2);
                let mut ex: Vec<_> = n_primes.iter().map(|&v| (v, s.clone())).collect();
                ex.push((Place::Finite(2), s.clone()));
                (FrobenianRule::constant(s), ex)
            }
            "d1mod4" => {
                if n != 2 {
                    return Err(ConditionsError::WrongN { name: name.into(), expected: 2 });
                }
                let mut overrides = BTreeMap::new();
                overrides.insert(1, Subset::Explicit([[0, 0, 0], [1, 0, 0], [0, 1, 0]].into_iter().collect()));
                overrides.insert(3, Subset::Explicit([[0, 0, 0], [1, 0, 0], [1, 1, 0]].into_iter().collect()));
                (
                    FrobenianRule { modulus: 4, default: Subset::Unramified, overrides },
                    vec![unr(Place::Finite(2)), (Place::Infinite, Subset::All)],
                )
            }
            other => return Err(ConditionsError::UnknownFamily(other.into())),
        };
        ConditionFamily::new(name, n, generic, exceptional.into_iter().collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn generic(&self) -> &FrobenianRule {
        &self.generic
    }

    pub fn exceptional(&self) -> &BTreeMap<Place, Subset> {
        &self.exceptional
    }

    /// Modulus of Frobenian dependence of the instantiated `L_p`, including
    /// the dependence of the local group on `p mod n`.
    pub fn modulus(&self) -> u64 {
        lcm(self.generic.modulus, self.n)
    }

    /// The irregular set `S`: all exceptional places.
    pub fn irregular_places(&self) -> BTreeSet<Place> {
        self.exceptional.keys().copied().collect()
    }

    pub fn exceptional_primes(&self) -> BTreeSet<u64> {
        self.exceptional.keys().filter_map(Place::as_prime).collect()
    }

    pub fn subset_at(&self, place: Place) -> &Subset {
        if let Some(s) = self.exceptional.get(&place) {
            return s;
        }
        match place {
            Place::Finite(p) => self.generic.subset_for(p),
            Place::Infinite => unreachable!("infinity is always exceptional"),
        }
    }

    /// `res_p(f) in L_p`.
    pub fn contains(&self, f: &LocalClass) -> bool {
        f.n == self.n && self.subset_at(f.place).contains(f)
    }

    /// The instantiated `L_v`.
    pub fn instantiate(&self, place: Place) -> Vec<LocalClass> {
        self.subset_at(place).instantiate(place, self.n)
    }

    /// One prime per unit class mod `lcm(modulus, extra)`, each larger than
    /// every exceptional prime of the family and of `extra`.
    pub fn representative_primes(&self, extra: u64) -> Vec<(u64, u64)> {
        let m = lcm(self.modulus(), extra.max(1));
        let floor = self.exceptional_primes().into_iter().max().unwrap_or(2).max(m);
        (0..m)
            .filter(|&c| gcd(c, m) == 1)
            .map(|c| (c, next_prime_in_class(floor, c, m)))
            .collect()
    }

    pub fn classify(&self) -> FamilyClass {
        let mut periodic = true;
        let mut contains_ur = true;
        for (_, p) in self.representative_primes(1) {
            let place = Place::Finite(p);
            let s = self.generic.subset_for(p);
            let members = s.instantiate(place, self.n);
            let ur = LocalClass::new(place, self.n, [1, 0, 0]);
            if !members.iter().all(|f| s.contains(&f.add(&ur))) {
                periodic = false;
            }
            if !s.contains(&LocalClass::zero(place, self.n)) {
                periodic = false;
            }
            if !(0..self.n).all(|k| s.contains(&ur.scale(k))) {
                contains_ur = false;
            }
        }
        match (periodic, contains_ur) {
            (true, _) => FamilyClass::Both,
            (false, true) => FamilyClass::Nonperiodic,
            (false, false) => FamilyClass::Neither,
        }
    }

    /// `L_p^{[m]}`.
    pub fn slice(&self, place: Place, m: u32, ordering: &OrderingSpec) -> Result<Vec<LocalClass>, ConditionsError> {
        let mut out = Vec::new();
        for f in self.instantiate(place) {
            if ordering.exponent(&f)? == m {
                out.push(f);
            }
        }
        Ok(out)
    }

    fn generic_slices(&self, ordering: &OrderingSpec) -> Result<Vec<(u64, BTreeMap<u32, Vec<LocalClass>>)>, ConditionsError> {
        let ord_ex = ordering.exceptional_primes();
        let floor_extra = ord_ex.iter().copied().max().unwrap_or(1);
        let m = lcm(self.modulus(), ordering.modulus());
        let floor = self.exceptional_primes().into_iter().max().unwrap_or(2).max(floor_extra).max(m);
        let mut out = Vec::new();
        for c in (0..m).filter(|&c| gcd(c, m) == 1) {
            let p = next_prime_in_class(floor, c, m);
            let mut by_weight: BTreeMap<u32, Vec<LocalClass>> = BTreeMap::new();
            for f in self.generic.subset_for(p).instantiate(Place::Finite(p), self.n) {
                by_weight.entry(ordering.exponent(&f)?).or_default().push(f);
            }
            out.push((c, by_weight));
        }
        Ok(out)
    }

    /// `a(L)`: the least nonzero exponent met generically.
    pub fn a_invariant(&self, ordering: &OrderingSpec) -> Result<u32, ConditionsError> {
        self.generic_slices(ordering)?
            .iter()
            .filter_map(|(_, s)| s.keys().copied().find(|&e| e > 0))
            .min()
            .ok_or(ConditionsError::NoRamifiedClasses)
    }

    /// `b(L)`: the Chebotarev average of `|L_p^{[a]}| / n`.
    pub fn b_invariant(&self, ordering: &OrderingSpec) -> Result<BigRational, ConditionsError> {
        let a = self.a_invariant(ordering)?;
        let slices = self.generic_slices(ordering)?;
        let phi = euler_phi(lcm(self.modulus(), ordering.modulus()));
        let mut total = BigRational::zero();
        for (_, s) in &slices {
            let k = s.get(&a).map_or(0, Vec::len) as i64;
            total += BigRational::new(BigInt::from(k), BigInt::from(phi * self.n));
        }
        Ok(total)
    }

    /// Order of `T'`, the subgroup of `Z/n` generated by inertia images of
    /// the generic minimal-weight classes.
    pub fn minimal_inertia_subgroup(&self, ordering: &OrderingSpec) -> Result<u64, ConditionsError> {
        let a = self.a_invariant(ordering)?;
        let mut order = 1;
        for (_, s) in self.generic_slices(ordering)? {
            for f in s.get(&a).into_iter().flatten() {
                order = lcm(order, f.inertia_order());
            }
        }
        Ok(order)
    }

    /// Order of the subgroup generated by inertia images of every generic
    /// class, whatever its weight.
    pub fn generic_inertia_subgroup(&self, ordering: &OrderingSpec) -> Result<u64, ConditionsError> {
        let mut order = 1;
        for (_, s) in self.generic_slices(ordering)? {
            for f in s.values().flatten() {
                order = lcm(order, f.inertia_order());
            }
        }
        Ok(order)
    }

    /// Minimal nonzero exponent over every allowed class at every place
    /// where ramification is permitted. A lower bound for enumeration.
    pub fn min_positive_exponent(&self, ordering: &OrderingSpec) -> Result<Option<u32>, ConditionsError> {
        let mut best: Option<u32> = None;
        let mut consider = |e: u32| {
            if e > 0 {
                best = Some(best.map_or(e, |b| b.min(e)));
            }
        };
        for (_, s) in self.generic_slices(ordering)? {
            for &e in s.keys() {
                consider(e);
            }
        }
        for &v in self.exceptional.keys() {
            for f in self.instantiate(v) {
                consider(ordering.exponent(&f)?);
            }
        }
        Ok(best)
    }
}

/// The invariants reported by the `invariants` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyInvariants {
    pub a: u32,
    pub b: BigRational,
    pub t_prime: u64,
    pub class: FamilyClass,
}

impl FamilyInvariants {
    pub fn compute(family: &ConditionFamily, ordering: &OrderingSpec) -> Result<Self, ConditionsError> {
        Ok(FamilyInvariants {
            a: family.a_invariant(ordering)?,
            b: family.b_invariant(ordering)?,
            t_prime: family.minimal_inertia_subgroup(ordering)?,
            class: family.classify(),
        })
    }
}
