//! Global classes: `H^1(Q, Z/n)` as Dirichlet characters and
//! `H^1(Q, mu_n) = Q^*/(Q^*)^n` via Kummer theory.
//!
//! A character is stored as its components `psi_q` at the primes of its
//! conductor. Each component is a character of `Z_q^*` written in the
//! same `(tame, wild)` unit coordinates as the local groups, so
//! `psi_q(u) = (n/d) t dlog(u) + (n/q^v) w log(u)`.
//!
//! Restriction to a decomposition group follows the idelic convention that
//! makes global reciprocity hold: at a prime `p` outside the conductor the
//! Frobenius coordinate is `sum_q psi_q(p)`; at a prime `p` of the
//! conductor it is `sum_{q != p} psi_q(p)` and the unit coordinates are
//! those of `psi_p^{-1}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{divisors, gcd, is_prime, lcm, mobius, mul_mod, primes_up_to};
use crate::conditions::{ConditionFamily, ConditionsError, Subset};
use crate::group::UnitRootExponent;
use crate::local::{
    local_tate_pair, LocalClass, LocalKummerClass, LocalShape, Place, UnitCoordinates,
};
use crate::ordering::{OrderingError, OrderingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlobalError {
    #[error("n must be between 2 and 64, got {0}")]
    BadModulus(u64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {0} appears twice")]
    DuplicatePrime(u64),
    #[error("weight overflows 64 bits")]
    WeightOverflow,
    #[error("counts are missing divisor {0}")]
    MissingDivisor(u64),
    #[error("enumeration needs every generic L_p to contain the unramified classes ({0})")]
    UnsupportedFamily(String),
    #[error("family and ordering disagree on n")]
    MismatchedN,
    #[error("value table has the wrong length for modulus {0}")]
    BadValueTable(u64),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error(transparent)]
    Conditions(#[from] ConditionsError),
}

/// The component `psi_p` of a character at a prime of its conductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub p: u64,
    pub tame: u64,
    pub wild: u64,
}

/// A class in `H^1(Q, Z/n)`, stored primitively.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalCharacter {
    n: u64,
    components: Vec<Component>,
    weight: u64,
}

impl GlobalCharacter {
    pub fn trivial(n: u64) -> Self {
        GlobalCharacter { n, components: Vec::new(), weight: 1 }
    }

    /// Builds a character from components; zero components are dropped so
    /// the stored presentation is primitive.
    pub fn new(n: u64, components: Vec<Component>, ordering: &OrderingSpec) -> Result<Self, GlobalError> {
        if !(2..=64).contains(&n) {
            return Err(GlobalError::BadModulus(n));
        }
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for c in components {
            if !is_prime(c.p) {
                return Err(GlobalError::NotPrime(c.p));
            }
            if !seen.insert(c.p) {
                return Err(GlobalError::DuplicatePrime(c.p));
            }
            let shape = LocalShape::new(Place::Finite(c.p), n);
            let (tame, wild) = (c.tame % shape.tame_order, c.wild % shape.wild_order);
            if tame != 0 || wild != 0 {
                comps.push(Component { p: c.p, tame, wild });
            }
        }
        comps.sort();
        let mut weight = 1u64;
        for c in &comps {
            let e = ordering.exponent_of(Place::Finite(c.p), c.tame, c.wild)?;
            weight = c.p.checked_pow(e).and_then(|w| weight.checked_mul(w)).ok_or(GlobalError::WeightOverflow)?;
        }
        Ok(GlobalCharacter { n, components: comps, weight })
    }

    /// Inverse of [`GlobalCharacter::value_table`].
    pub fn from_value_table(
        n: u64,
        primes: &[u64],
        values: &[u64],
        ordering: &OrderingSpec,
    ) -> Result<Self, GlobalError> {
        if values.len() != 2 * primes.len() {
            return Err(GlobalError::BadValueTable(primes.len() as u64));
        }
        let mut comps = Vec::new();
        for (i, &p) in primes.iter().enumerate() {
            if !is_prime(p) {
                return Err(GlobalError::NotPrime(p));
            }
            let (at_gen, at_one_unit) = (values[2 * i] % n, values[2 * i + 1] % n);
            let shape = LocalShape::new(Place::Finite(p), n);
            let (ts, ws) = (n / shape.tame_order, n / shape.wild_order);
            if at_one_unit % ws != 0 {
                return Err(GlobalError::BadValueTable(p));
            }
            let wild = at_one_unit / ws;
            let uc = UnitCoordinates::new(p, n);
            let gen = tame_generator_integer(p);
            let rest = (at_gen + n - uc.evaluate(0, wild, gen as i128)) % n;
            if rest % ts != 0 {
                return Err(GlobalError::BadValueTable(p));
            }
            // the generator has tame coordinate 1
            let tame = (rest / ts) % shape.tame_order;
            comps.push(Component { p, tame, wild });
        }
        GlobalCharacter::new(n, comps, ordering)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `N(inv(f))` under the ordering used at construction.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn is_trivial(&self) -> bool {
        self.components.is_empty()
    }

    /// The conductor.
    pub fn modulus(&self) -> u64 {
        self.components
            .iter()
            .map(|c| {
                let s = LocalShape::new(Place::Finite(c.p), self.n);
                c.p.pow(s.conductor_exponent(c.tame, c.wild))
            })
            .product()
    }

    /// Order in `H^1(Q, Z/n)`.
    pub fn order(&self) -> u64 {
        self.components.iter().fold(1, |acc, c| {
            lcm(acc, LocalShape::new(Place::Finite(c.p), self.n).inertia_order(c.tame, c.wild))
        })
    }

    /// Whether the values generate `Z/n`.
    pub fn is_surjective(&self) -> bool {
        self.order() == self.n
    }

    /// `chi(u)` for an integer `u` prime to the conductor.
    pub fn evaluate(&self, u: i128) -> u64 {
        self.components
            .iter()
            .map(|c| UnitCoordinates::new(c.p, self.n).evaluate(c.tame, c.wild, u))
            .sum::<u64>()
            % self.n
    }

    /// Values of each component on the generators of `(Z/q^k)^*`: the
    /// least primitive root and `1+q` for odd `q`, `-1` and `5` for `q = 2`.
    pub fn value_table(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for c in &self.components {
            let uc = UnitCoordinates::new(c.p, self.n);
            let (g, h) = if c.p == 2 { (-1i128, 5i128) } else { (tame_generator_integer(c.p) as i128, 1 + c.p as i128) };
            out.push(uc.evaluate(c.tame, c.wild, g));
            out.push(uc.evaluate(c.tame, c.wild, h));
        }
        out
    }

    /// `weight,modulus,valuetable`.
    pub fn to_record(&self) -> String {
        let table: Vec<String> = self.value_table().iter().map(u64::to_string).collect();
        format!("{},{},{}", self.weight, self.modulus(), table.join(":"))
    }

    /// The local class `res_v(f)`.
    pub fn restrict(&self, place: Place) -> LocalClass {
        let n = self.n;
        match place {
            Place::Infinite => {
                let v = self.evaluate(-1);
                let sign = if n % 2 == 0 { v / (n / 2) } else { 0 };
                LocalClass::new(place, n, [0, sign, 0])
            }
            Place::Finite(p) => {
                let mut frob = 0;
                let mut unit = (0, 0);
                for c in &self.components {
                    if c.p == p {
                        unit = (c.tame, c.wild);
                    } else {
                        frob += UnitCoordinates::new(c.p, n).evaluate(c.tame, c.wild, p as i128);
                    }
                }
                let s = LocalShape::new(place, n);
                LocalClass::new(
                    place,
                    n,
                    [frob % n, (s.tame_order - unit.0) % s.tame_order, (s.wild_order - unit.1) % s.wild_order],
                )
            }
        }
    }
}

impl fmt::Display for GlobalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

/// The integer whose tame coordinate is 1: the least primitive root at odd
/// `p`, and `-1` at 2.
fn tame_generator_integer(p: u64) -> i64 {
    if p == 2 {
        -1
    } else {
        crate::arith::primitive_root(p) as i64
    }
}

/// `res_v(f)`.
pub fn restrict_character(f: &GlobalCharacter, v: Place) -> LocalClass {
    f.restrict(v)
}

pub fn is_surjective(f: &GlobalCharacter) -> bool {
    f.is_surjective()
}

/// Möbius inversion over the divisor lattice: the number of surjective
/// classes from the counts of classes with image in each subgroup.
pub fn surjective_count(n: u64, counts_by_divisor: &BTreeMap<u64, u64>) -> Result<i64, GlobalError> {
    let mut total = 0i64;
    for d in divisors(n) {
        let c = *counts_by_divisor.get(&d).ok_or(GlobalError::MissingDivisor(d))?;
        total += mobius(n / d) * c as i64;
    }
    Ok(total)
}

/// A class in `Q^*/(Q^*)^n`, canonically `+-prod p^{e_p}` with `0 < e_p < n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalKummerClass {
    n: u64,
    negative: bool,
    factors: Vec<(u64, u64)>,
}

impl GlobalKummerClass {
    pub fn identity(n: u64) -> Self {
        GlobalKummerClass { n, negative: false, factors: Vec::new() }
    }

    /// Normalizes exponents mod `n`. For odd `n` the sign is dropped since
    /// `-1` is an `n`-th power.
    pub fn new(n: u64, negative: bool, factors: &[(u64, u64)]) -> Result<Self, GlobalError> {
        if n < 2 {
            return Err(GlobalError::BadModulus(n));
        }
        let mut map: BTreeMap<u64, u64> = BTreeMap::new();
        for &(p, e) in factors {
            if !is_prime(p) {
                return Err(GlobalError::NotPrime(p));
            }
            *map.entry(p).or_default() += e;
        }
        let factors = map.into_iter().map(|(p, e)| (p, e % n)).filter(|&(_, e)| e != 0).collect();
        Ok(GlobalKummerClass { n, negative: negative && n % 2 == 0, factors })
    }

    pub fn from_integer(n: u64, a: i64) -> Result<Self, GlobalError> {
        assert!(a != 0, "zero has no Kummer class");
        let f = crate::arith::factorize(a.unsigned_abs());
        let factors: Vec<(u64, u64)> = f.into_iter().map(|(p, e)| (p, e as u64)).collect();
        Self::new(n, a < 0, &factors)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn factors(&self) -> &[(u64, u64)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        !self.negative && self.factors.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// The canonical representative as an integer, if it fits.
    pub fn representative(&self) -> Option<i128> {
        let mut v: i128 = 1;
        for &(p, e) in &self.factors {
            v = v.checked_mul((p as i128).checked_pow(e as u32)?)?;
        }
        Some(if self.negative { -v } else { v })
    }

    /// Product of the support primes.
    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Self::new(self.n, self.negative != other.negative, &f).expect("factors are primes")
    }

    /// `res_v(a)` in `Q_v^*/(Q_v^*)^n`.
    pub fn restrict(&self, place: Place) -> LocalKummerClass {
        let n = self.n;
        match place {
            Place::Infinite => {
                LocalKummerClass::new(place, n, [0, u64::from(self.negative && n % 2 == 0), 0])
            }
            Place::Finite(p) => {
                let uc = UnitCoordinates::new(p, n);
                let m = uc.precision();
                let mut val = 0;
                let mut unit = 1u64;
                for &(q, e) in &self.factors {
                    if q == p {
                        val = e;
                    } else {
                        for _ in 0..e {
                            unit = mul_mod(unit, q % m, m);
                        }
                    }
                }
                let u = if self.negative { -(unit as i128) } else { unit as i128 };
                let (t, w) = uc.coords(u);
                LocalKummerClass::new(place, n, [val, t, w])
            }
        }
    }

    pub fn to_rational(&self) -> Option<Ratio<i64>> {
        self.representative().and_then(|v| i64::try_from(v).ok()).map(Ratio::from_integer)
    }
}

impl fmt::Display for GlobalKummerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// `sum_v <res_v f, res_v a>`; zero by global reciprocity.
pub fn reciprocity_defect(f: &GlobalCharacter, a: &GlobalKummerClass) -> UnitRootExponent {
    assert_eq!(f.n(), a.n(), "classes for different n");
    let mut places: BTreeSet<Place> = f.components().iter().map(|c| Place::Finite(c.p)).collect();
    places.extend(a.support().map(Place::Finite));
    places.insert(Place::Infinite);
    places
        .into_iter()
        .map(|v| local_tate_pair(&f.restrict(v), &a.restrict(v)).expect("same place and n"))
        .sum()
}

/// Receives the classes found by [`Enumeration::run`].
pub trait Sink: Send {
    fn accept(&mut self, weight: u64, order: u64, components: &[Component]);
    fn merge(&mut self, other: Self);
}

/// Collects full characters.
#[derive(Debug, Default)]
pub struct Collector {
    pub n: u64,
    pub characters: Vec<GlobalCharacter>,
}

impl Sink for Collector {
    fn accept(&mut self, weight: u64, _order: u64, components: &[Component]) {
        self.characters.push(GlobalCharacter { n: self.n, components: components.to_vec(), weight });
    }

    fn merge(&mut self, mut other: Self) {
        self.characters.append(&mut other.characters);
    }
}

/// Number of classes of each exact weight `<= max_weight`.
#[derive(Debug, Clone)]
pub struct WeightCounts {
    pub counts: Vec<u64>,
}

impl WeightCounts {
    pub fn new(max_weight: u64) -> Self {
        WeightCounts { counts: vec![0; max_weight as usize + 1] }
    }
}

impl Sink for WeightCounts {
    fn accept(&mut self, weight: u64, _order: u64, _components: &[Component]) {
        if let Some(c) = self.counts.get_mut(weight as usize) {
            *c += 1;
        }
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

/// Cumulative counts on a grid of bounds, split by character order, plus
/// counts of classes whose image lies in each subgroup `(n/d) Z/n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCounts {
    pub n: u64,
    pub grid: Vec<u64>,
    /// `by_order[o][i]`: classes of order `o` in bucket `i` (not cumulative).
    by_order: BTreeMap<u64, Vec<u64>>,
    /// `contained[d][i]`: classes with order dividing `d` in bucket `i`.
    contained: BTreeMap<u64, Vec<u64>>,
}

impl GridCounts {
    pub fn new(n: u64, grid: Vec<u64>) -> Self {
        let zeros = vec![0; grid.len()];
        let ds = divisors(n);
        GridCounts {
            n,
            by_order: ds.iter().map(|&d| (d, zeros.clone())).collect(),
            contained: ds.iter().map(|&d| (d, zeros.clone())).collect(),
            grid,
        }
    }

    fn cumulative(v: &[u64]) -> Vec<u64> {
        v.iter()
            .scan(0u64, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// `N(X_i)` for each grid point.
    pub fn totals(&self) -> Vec<u64> {
        let mut total = vec![0; self.grid.len()];
        for v in self.by_order.values() {
            for (t, x) in total.iter_mut().zip(Self::cumulative(v)) {
                *t += x;
            }
        }
        total
    }

    /// Cumulative counts of classes of exact order `o`.
    pub fn of_order(&self, o: u64) -> Vec<u64> {
        self.by_order.get(&o).map(|v| Self::cumulative(v)).unwrap_or_else(|| vec![0; self.grid.len()])
    }

    /// Cumulative counts of classes with image inside the subgroup of order `d`.
    pub fn inside(&self, d: u64) -> Vec<u64> {
        self.contained.get(&d).map(|v| Self::cumulative(v)).unwrap_or_else(|| vec![0; self.grid.len()])
    }
}

impl Sink for GridCounts {
    fn accept(&mut self, weight: u64, order: u64, _components: &[Component]) {
        let i = self.grid.partition_point(|&x| x <= weight);
        if i == self.grid.len() {
            return;
        }
        self.by_order.get_mut(&order).expect("order divides n")[i] += 1;
        for (d, v) in self.contained.iter_mut() {
            if d % order == 0 {
                v[i] += 1;
            }
        }
    }

    fn merge(&mut self, other: Self) {
        for (k, v) in other.by_order {
            for (a, b) in self.by_order.get_mut(&k).expect("same shape").iter_mut().zip(v) {
                *a += b;
            }
        }
        for (k, v) in other.contained {
            for (a, b) in self.contained.get_mut(&k).expect("same shape").iter_mut().zip(v) {
                *a += b;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct OptionTemplate {
    tame: u64,
    wild: u64,
    exponent: u32,
    order: u64,
    /// Allowed Frobenius values of the restriction, as a bitmask over `Z/n`.
    frob_mask: u64,
}

#[derive(Debug)]
struct Candidate {
    p: u64,
    options: usize,
    unit: OnceLock<UnitCoordinates>,
}

/// A depth-first enumeration of `H^1_L(Q, Z/n; X)` over conductors.
pub struct Enumeration {
    n: u64,
    bound: u64,
    min_exponent: u32,
    full_mask: u64,
    templates: Vec<Vec<OptionTemplate>>,
    candidates: Vec<Candidate>,
    /// Unramified places with a proper Frobenius constraint.
    checks: Vec<(u64, u64)>,
    infinity_mask: u64,
    needs_checks: bool,
}

fn frob_mask(subset: &Subset, place: Place, n: u64, tame: u64, wild: u64) -> u64 {
    let mut mask = 0;
    for frob in 0..n {
        if subset.contains(&LocalClass::new(place, n, [frob, tame, wild])) {
            mask |= 1 << frob;
        }
    }
    mask
}

impl Enumeration {
    /// Prepares the enumeration of classes with weight `< bound`.
    pub fn new(family: &ConditionFamily, ordering: &OrderingSpec, bound: u64) -> Result<Self, GlobalError> {
        let n = family.n();
        if !(2..=64).contains(&n) {
            return Err(GlobalError::BadModulus(n));
        }
        if ordering.n() != n {
            return Err(GlobalError::MismatchedN);
        }
        let full_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if !family.classify().is_nonperiodic_eligible() {
            return Err(GlobalError::UnsupportedFamily(family.name().to_string()));
        }
        let options_at = |p: u64| -> Result<Vec<OptionTemplate>, GlobalError> {
            let place = Place::Finite(p);
            let shape = LocalShape::new(place, n);
            let subset = family.subset_at(place);
            let mut out = Vec::new();
            for tame in 0..shape.tame_order {
                for wild in 0..shape.wild_order {
                    if tame == 0 && wild == 0 {
                        continue;
                    }
                    // restriction has the inverse unit coordinates
                    let (lt, lw) = ((shape.tame_order - tame) % shape.tame_order, (shape.wild_order - wild) % shape.wild_order);
                    let mask = frob_mask(subset, place, n, lt, lw);
                    if mask == 0 {
                        continue;
                    }
                    out.push(OptionTemplate {
                        tame,
                        wild,
                        exponent: ordering.exponent_of(place, tame, wild)?,
                        order: shape.inertia_order(tame, wild),
                        frob_mask: mask,
                    });
                }
            }
            Ok(out)
        };

        let modulus = lcm(family.modulus(), ordering.modulus());
        let exceptional = family.exceptional_primes();
        let mut templates: Vec<Vec<OptionTemplate>> = Vec::new();
        let mut by_class: BTreeMap<u64, usize> = BTreeMap::new();
        let mut min_exponent = u32::MAX;

        let mut prime_options = Vec::new();
        // exponent >= 1, so every conductor prime is below the bound
        let limit = bound.saturating_sub(1);
        for p in primes_up_to(limit) {
            let generic = gcd(p, modulus) == 1 && !exceptional.contains(&p) && !ordering.exceptional_primes().contains(&p);
            let idx = if generic {
                let class = p % modulus;
                match by_class.get(&class) {
                    Some(&i) => i,
                    None => {
                        templates.push(options_at(p)?);
                        by_class.insert(class, templates.len() - 1);
                        templates.len() - 1
                    }
                }
            } else {
                templates.push(options_at(p)?);
                templates.len() - 1
            };
            let t = &templates[idx];
            if t.is_empty() {
                continue;
            }
            let e = t.iter().map(|o| o.exponent).min().expect("nonempty");
            min_exponent = min_exponent.min(e);
            prime_options.push((p, idx, e));
        }
        // drop primes whose lightest option already exceeds the bound
        let candidates = prime_options
            .into_iter()
            .filter(|&(p, _, e)| p.checked_pow(e).is_some_and(|w| w < bound))
            .map(|(p, options, _)| Candidate { p, options, unit: OnceLock::new() })
            .collect();

        let mut checks = Vec::new();
        for (&v, subset) in family.exceptional() {
            if let Place::Finite(p) = v {
                let mask = frob_mask(subset, v, n, 0, 0);
                if mask != full_mask {
                    checks.push((p, mask));
                }
            }
        }
        let inf_subset = family.subset_at(Place::Infinite);
        let mut infinity_mask = 0;
        for s in 0..gcd(n, 2) {
            if inf_subset.contains(&LocalClass::new(Place::Infinite, n, [0, s, 0])) {
                infinity_mask |= 1 << s;
            }
        }
        let inf_full = (1u64 << gcd(n, 2)) - 1;
        let templates_constrained = templates.iter().flatten().any(|o| o.frob_mask != full_mask);
        let needs_checks = templates_constrained || !checks.is_empty() || infinity_mask != inf_full;
        Ok(Enumeration {
            n,
            bound,
            min_exponent: if min_exponent == u32::MAX { 1 } else { min_exponent },
            full_mask,
            templates,
            candidates,
            checks,
            infinity_mask,
            needs_checks,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    fn unit(&self, i: usize) -> &UnitCoordinates {
        let c = &self.candidates[i];
        c.unit.get_or_init(|| UnitCoordinates::new(c.p, self.n))
    }

    /// Walks all classes and feeds them to sinks made by `make`.
    pub fn run<S: Sink>(&self, make: &(dyn Fn() -> S + Sync)) -> S {
        let mut root = make();
        let state = State::new(self);
        if state.accepts(self) {
            root.accept(1, 1, &[]);
        }
        let merged = (0..self.candidates.len())
            .into_par_iter()
            .map(|i| {
                let mut sink = make();
                let p = self.candidates[i].p;
                if p.checked_pow(self.min_exponent).is_none_or(|w| w >= self.bound) {
                    return sink;
                }
                let mut st = State::new(self);
                self.branch(i, 1, &mut st, &mut sink);
                sink
            })
            .reduce(make, |mut a, b| {
                a.merge(b);
                a
            });
        root.merge(merged);
        root
    }

    /// Tries every option at candidate `i` on top of the current state.
    fn branch<S: Sink>(&self, i: usize, weight: u64, st: &mut State, sink: &mut S) {
        let cand = &self.candidates[i];
        for (k, opt) in self.templates[cand.options].iter().enumerate() {
            let Some(w) = cand.p.checked_pow(opt.exponent).and_then(|x| x.checked_mul(weight)) else {
                continue;
            };
            if w >= self.bound {
                continue;
            }
            st.push(self, i, k);
            if st.accepts(self) {
                sink.accept(w, st.order(), &st.components);
            }
            self.walk(i + 1, w, st, sink);
            st.pop(self);
        }
    }

    fn walk<S: Sink>(&self, start: usize, weight: u64, st: &mut State, sink: &mut S) {
        for j in start..self.candidates.len() {
            let p = self.candidates[j].p;
            match p.checked_pow(self.min_exponent).and_then(|x| x.checked_mul(weight)) {
                Some(w) if w < self.bound => {}
                _ => break,
            }
            self.branch(j, weight, st, sink);
        }
    }

    /// All classes, sorted by weight, conductor and value table.
    pub fn collect(&self) -> Vec<GlobalCharacter> {
        let n = self.n;
        let mut out = self.run(&|| Collector { n, characters: Vec::new() }).characters;
        out.sort_by_cached_key(|f| (f.weight(), f.modulus(), f.value_table()));
        out
    }
}

/// Incremental leaf-check data along the current DFS path.
struct State {
    components: Vec<Component>,
    index: Vec<(usize, usize)>,
    orders: Vec<u64>,
    /// Frobenius value at each component prime from the other components.
    frob: Vec<u64>,
    /// Running `sum psi_q(v)` at each check place.
    check_acc: Vec<u64>,
    infinity_acc: Vec<u64>,
}

impl State {
    fn new(e: &Enumeration) -> Self {
        State {
            components: Vec::new(),
            index: Vec::new(),
            orders: vec![1],
            frob: Vec::new(),
            check_acc: vec![0; e.checks.len()],
            infinity_acc: vec![0],
        }
    }

    fn push(&mut self, e: &Enumeration, i: usize, k: usize) {
        let cand = &e.candidates[i];
        let opt = &e.templates[cand.options][k];
        let n = e.n;
        self.orders.push(lcm(*self.orders.last().expect("root"), opt.order));
        if e.needs_checks {
            let uc = e.unit(i);
            let mut own = 0;
            for &(j, l) in &self.index {
                let other = &e.templates[e.candidates[j].options][l];
                own += e.unit(j).evaluate(other.tame, other.wild, cand.p as i128);
            }
            for (f, c) in self.frob.iter_mut().zip(&self.components) {
                *f = (*f + uc.evaluate(opt.tame, opt.wild, c.p as i128)) % n;
            }
            self.frob.push(own % n);
            for (acc, &(v, _)) in self.check_acc.iter_mut().zip(&e.checks) {
                if v != cand.p {
                    *acc = (*acc + uc.evaluate(opt.tame, opt.wild, v as i128)) % n;
                }
            }
            let last = *self.infinity_acc.last().expect("root");
            self.infinity_acc.push((last + uc.evaluate(opt.tame, opt.wild, -1)) % n);
        }
        self.components.push(Component { p: cand.p, tame: opt.tame, wild: opt.wild });
        self.index.push((i, k));
    }

    fn pop(&mut self, e: &Enumeration) {
        let (i, k) = self.index.pop().expect("nonempty path");
        let c = self.components.pop().expect("nonempty path");
        self.orders.pop();
        if e.needs_checks {
            let n = e.n;
            let uc = e.unit(i);
            let opt = &e.templates[e.candidates[i].options][k];
            self.frob.pop();
            for (f, other) in self.frob.iter_mut().zip(&self.components) {
                *f = (*f + n - uc.evaluate(opt.tame, opt.wild, other.p as i128)) % n;
            }
            for (acc, &(v, _)) in self.check_acc.iter_mut().zip(&e.checks) {
                if v != c.p {
                    *acc = (*acc + n - uc.evaluate(opt.tame, opt.wild, v as i128)) % n;
                }
            }
            self.infinity_acc.pop();
        }
    }

    fn order(&self) -> u64 {
        *self.orders.last().expect("root")
    }

    fn accepts(&self, e: &Enumeration) -> bool {
        if !e.needs_checks {
            return true;
        }
        for (f, &(i, k)) in self.frob.iter().zip(&self.index) {
            let mask = e.templates[e.candidates[i].options][k].frob_mask;
            if mask != e.full_mask && mask & (1 << f) == 0 {
                return false;
            }
        }
        for (acc, &(v, mask)) in self.check_acc.iter().zip(&e.checks) {
            if self.components.iter().any(|c| c.p == v) {
                continue;
            }
            if mask & (1 << acc) == 0 {
                return false;
            }
        }
        let inf = *self.infinity_acc.last().expect("root");
        let sign = if e.n % 2 == 0 { inf / (e.n / 2) } else { 0 };
        e.infinity_mask & (1 << sign) != 0
    }
}

/// The classes of weight `< bound` whose restrictions lie in the family,
/// sorted deterministically.
pub fn enumerate_characters(
    n: u64,
    bound: u64,
    ordering: &OrderingSpec,
    family: &ConditionFamily,
) -> Result<Vec<GlobalCharacter>, GlobalError> {
    if family.n() != n {
        return Err(GlobalError::MismatchedN);
    }
    Ok(Enumeration::new(family, ordering, bound)?.collect())
}
