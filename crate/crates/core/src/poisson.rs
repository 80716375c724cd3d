//! Local Fourier transforms and both sides of the Poisson identity
//!
//! ```text
//! sum_f w(f) = (|H^0(Q,T)| / |H^0(Q,T*)|) sum_g w^(g),
//! w^(g) = prod_v (1/|H^0(Q_v,T)|) sum_{f in L_v} <f, g_v> x^{nu_v(f)},
//! ```
//!
//! with `|H^0(Q_v, Z/n)| = n` at every place, infinity included, and
//! global ratio `n / gcd(n, 2)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{gcd, lcm, primes_up_to};
use crate::conditions::{ConditionFamily, ConditionsError};
use crate::cyclotomic::CyclotomicScalar;
use crate::euler::{
    CoefficientSeries, EulerError, EulerProductSpec, FrobenianFactor, GenericFactor, LocalPoly, Singularity,
};
use crate::global::{Component, Enumeration, GlobalCharacter, GlobalError, GlobalKummerClass, WeightCounts};
use crate::group::{annihilator, Subgroup};
use crate::local::{local_group, local_tate_pair, LocalClass, LocalKummerClass, Place, Side};
use crate::ordering::{OrderingError, OrderingSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoissonError {
    #[error("family {0:?} is not periodic-eligible")]
    NotPeriodic(String),
    #[error("family {0:?} is neither periodic- nor nonperiodic-eligible")]
    NotEligible(String),
    #[error("condition at {0} is not a subgroup")]
    NotSubgroup(Place),
    #[error("family and ordering disagree on n")]
    MismatchedN,
    #[error(transparent)]
    Conditions(#[from] ConditionsError),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error(transparent)]
    Global(#[from] GlobalError),
    #[error(transparent)]
    Euler(#[from] EulerError),
}

/// `w^_v(g_v)` as a polynomial in `x = p^{-s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFourierFactor {
    pub place: Place,
    pub poly: LocalPoly,
}

fn zeta_powers(n: u64) -> Vec<CyclotomicScalar> {
    (0..n).map(|k| CyclotomicScalar::zeta_pow(n, k)).collect()
}

fn fourier_with(
    place: Place,
    classes: &[LocalClass],
    ordering: &OrderingSpec,
    g: &LocalKummerClass,
    zetas: &[CyclotomicScalar],
) -> Result<LocalPoly, PoissonError> {
    let n = g.n;
    let mut coeffs: Vec<CyclotomicScalar> = Vec::new();
    for f in classes {
        let e = ordering.exponent(f)? as usize;
        if coeffs.len() <= e {
            coeffs.resize(e + 1, CyclotomicScalar::zero(n));
        }
        let k = local_tate_pair(f, g).expect("same place").residue(n).expect("pairing lands in (1/n)Z/Z");
        coeffs[e] += &zetas[k as usize];
    }
    let inv_h0 = BigRational::new(BigInt::one(), BigInt::from(n));
    let _ = place;
    Ok(LocalPoly::new(n, coeffs.into_iter().map(|c| c.scale(&inv_h0)).collect()))
}

/// `(1/n) sum_{f in L_v} zeta_n^{<f, g_v>} x^{nu_v(f)}`.
pub fn local_fourier(
    place: Place,
    family: &ConditionFamily,
    ordering: &OrderingSpec,
    g: &LocalKummerClass,
) -> Result<LocalFourierFactor, PoissonError> {
    if family.n() != ordering.n() || g.n != family.n() {
        return Err(PoissonError::MismatchedN);
    }
    let classes = family.instantiate(place);
    let poly = fourier_with(place, &classes, ordering, g, &zeta_powers(family.n()))?;
    Ok(LocalFourierFactor { place, poly })
}

/// Classes `+-prod_{p in S} p^{e_p}` with `0 <= e_p < n`: the part of
/// `H^1(Q, mu_n)` that can pair nontrivially with a periodic family.
pub fn dual_support(family: &ConditionFamily, places: &BTreeSet<Place>) -> Result<Vec<GlobalKummerClass>, PoissonError> {
    if !family.classify().is_periodic() {
        return Err(PoissonError::NotPeriodic(family.name().to_string()));
    }
    Ok(kummer_classes_on(family.n(), places))
}

fn kummer_classes_on(n: u64, places: &BTreeSet<Place>) -> Vec<GlobalKummerClass> {
    let primes: Vec<u64> = places.iter().filter_map(Place::as_prime).collect();
    let signs: &[bool] = if n % 2 == 0 { &[false, true] } else { &[false] };
    let mut out = Vec::new();
    let total = (n as usize).pow(primes.len() as u32);
    for &neg in signs {
        for idx in 0..total {
            let mut rest = idx;
            let mut factors = Vec::new();
            for &p in &primes {
                factors.push((p, (rest % n as usize) as u64));
                rest /= n as usize;
            }
            out.push(GlobalKummerClass::new(n, neg, &factors).expect("primes"));
        }
    }
    out.sort();
    out
}

/// Primes at which `w^(g)` must be tabulated explicitly.
fn special_primes(family: &ConditionFamily, ordering: &OrderingSpec, g: &GlobalKummerClass) -> BTreeSet<u64> {
    let mut s = family.exceptional_primes();
    s.extend(ordering.exceptional_primes());
    s.extend(g.support());
    s
}

/// `w^(0)`'s generic factor keyed by `p mod lcm(family, ordering)`.
fn trivial_twist_generic(family: &ConditionFamily, ordering: &OrderingSpec) -> Result<FrobenianFactor, PoissonError> {
    let n = family.n();
    let m = lcm(family.modulus(), ordering.modulus());
    let floor = family
        .exceptional_primes()
        .into_iter()
        .chain(ordering.exceptional_primes())
        .max()
        .unwrap_or(2)
        .max(m);
    let zetas = zeta_powers(n);
    let mut classes = BTreeMap::new();
    for c in (0..m).filter(|&c| gcd(c, m) == 1) {
        let p = crate::arith::next_prime_in_class(floor, c, m);
        let place = Place::Finite(p);
        let poly = fourier_with(place, &family.instantiate(place), ordering, &LocalKummerClass::identity(place, n), &zetas)?;
        classes.insert(c, poly);
    }
    Ok(FrobenianFactor { modulus: m, classes })
}

/// The Euler product `w^(g)`.
pub fn dual_series(
    family: &ConditionFamily,
    ordering: &OrderingSpec,
    g: &GlobalKummerClass,
) -> Result<EulerProductSpec, PoissonError> {
    let n = family.n();
    if ordering.n() != n || g.n() != n {
        return Err(PoissonError::MismatchedN);
    }
    let zetas = zeta_powers(n);
    let majorant = trivial_twist_generic(family, ordering)?;
    let mut exceptional = BTreeMap::new();
    for p in special_primes(family, ordering, g) {
        let place = Place::Finite(p);
        let poly = fourier_with(place, &family.instantiate(place), ordering, &g.restrict(place), &zetas)?;
        exceptional.insert(p, poly);
    }
    let inf = fourier_with(Place::Infinite, &family.instantiate(Place::Infinite), ordering, &g.restrict(Place::Infinite), &zetas)?;
    let generic = if g.is_identity() {
        GenericFactor::Frobenian(majorant)
    } else {
        let (fam, ord, g) = (family.clone(), ordering.clone(), g.clone());
        GenericFactor::PerPrime {
            rule: Arc::new(move |p| {
                let place = Place::Finite(p);
                fourier_with(place, &fam.instantiate(place), &ord, &g.restrict(place), &zeta_powers(fam.n()))
                    .expect("ordering validated on the majorant")
            }),
            majorant,
        }
    };
    Ok(EulerProductSpec { n, generic, exceptional, prefactor: inf.coeff(0) })
}

/// `w^(0)` with its singularity data.
pub fn mb_main_term(family: &ConditionFamily, ordering: &OrderingSpec) -> Result<(EulerProductSpec, Singularity), PoissonError> {
    let spec = dual_series(family, ordering, &GlobalKummerClass::identity(family.n()))?;
    let sing = spec.singularity()?;
    Ok((spec, sing))
}

/// `|H^0(Q, Z/n)| / |H^0(Q, mu_n)|`.
pub fn global_ratio(n: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(gcd(n, 2)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonReport {
    pub n: u64,
    pub truncation: u64,
    pub direct: CoefficientSeries,
    pub dual: CoefficientSeries,
    pub ratio: BigRational,
    /// Indices `k` with differing coefficients.
    pub mismatches: Vec<u64>,
    /// Number of dual classes `g` summed.
    pub dual_terms: usize,
}

impl PoissonReport {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Lines `k,direct,dual,match`.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for k in 1..=self.truncation {
            let (a, b) = (self.direct.get(k), self.dual.get(k));
            s.push_str(&format!("{k},{a},{b},{}\n", a == b));
        }
        s
    }
}

impl fmt::Display for PoissonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

/// Direct coefficients: the number of classes of each weight `<= terms`.
pub fn direct_series(family: &ConditionFamily, ordering: &OrderingSpec, terms: u64) -> Result<CoefficientSeries, PoissonError> {
    let e = Enumeration::new(family, ordering, terms + 1)?;
    let counts = e.run(&|| WeightCounts::new(terms));
    Ok(CoefficientSeries::from_counts(family.n(), &counts.counts))
}

/// Dual classes contributing to coefficients `<= terms`.
///
/// For periodic families this is the dual support on the irregular set.
/// Otherwise each `g` is an `S`-part times `prod q^{e_q}` over primes
/// `q` outside `S`; its coefficient at `k` vanishes unless every such `q`
/// divides `k`, so `prod q <= terms`.
pub fn contributing_dual_classes(family: &ConditionFamily, ordering: &OrderingSpec, terms: u64) -> Result<Vec<GlobalKummerClass>, PoissonError> {
    let mut places = family.irregular_places();
    places.extend(ordering.exceptional_primes().into_iter().map(Place::Finite));
    match family.classify() {
        c if c.is_periodic() => dual_support(family, &places),
        c if c.is_nonperiodic_eligible() => {
            let n = family.n();
            let base = kummer_classes_on(n, &places);
            let s_primes: BTreeSet<u64> = places.iter().filter_map(Place::as_prime).collect();
            let outside: Vec<u64> = primes_up_to(terms).into_iter().filter(|p| !s_primes.contains(p)).collect();
            let mut radicals: Vec<Vec<(u64, u64)>> = vec![Vec::new()];
            squarefree_parts(&outside, 0, 1, terms, n, &mut Vec::new(), &mut radicals);
            let mut out = Vec::with_capacity(base.len() * radicals.len());
            for b in &base {
                for r in &radicals {
                    out.push(b.mul(&GlobalKummerClass::new(n, false, r).expect("primes")));
                }
            }
            out.sort();
            Ok(out)
        }
        _ => Err(PoissonError::NotEligible(family.name().to_string())),
    }
}

fn squarefree_parts(
    primes: &[u64],
    start: usize,
    product: u64,
    limit: u64,
    n: u64,
    stack: &mut Vec<(u64, u64)>,
    out: &mut Vec<Vec<(u64, u64)>>,
) {
    for i in start..primes.len() {
        let p = primes[i];
        if product * p > limit {
            break;
        }
        for e in 1..n {
            stack.push((p, e));
            out.push(stack.clone());
            squarefree_parts(primes, i + 1, product * p, limit, n, stack, out);
            stack.pop();
        }
    }
}

/// Compares both sides of the Poisson identity coefficientwise up to `terms`.
pub fn poisson_check(family: &ConditionFamily, ordering: &OrderingSpec, terms: u64, cap: u64) -> Result<PoissonReport, PoissonError> {
    if family.n() != ordering.n() {
        return Err(PoissonError::MismatchedN);
    }
    if terms > cap {
        return Err(EulerError::TooLarge { requested: terms, cap }.into());
    }
    let n = family.n();
    let gs = contributing_dual_classes(family, ordering, terms)?;
    let direct = direct_series(family, ordering, terms)?;
    let partials: Result<Vec<CoefficientSeries>, PoissonError> = gs
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = CoefficientSeries::zero(n, terms);
            for g in chunk {
                acc.add_assign(&dual_series(family, ordering, g)?.expand(terms, cap)?);
            }
            Ok(acc)
        })
        .collect();
    let mut dual = CoefficientSeries::zero(n, terms);
    for p in partials? {
        dual.add_assign(&p);
    }
    let ratio = global_ratio(n);
    dual.scale(&CyclotomicScalar::from_rational(n, ratio.clone()));
    let mismatches = (1..=terms).filter(|&k| direct.get(k) != dual.get(k)).collect();
    Ok(PoissonReport { n, truncation: terms, direct, dual, ratio, mismatches, dual_terms: gs.len() })
}

/// Subgroup conditions `L_v` at finitely many places, `H^1_ur` elsewhere
/// (which is `{0}` at infinity).
#[derive(Debug, Clone)]
pub struct SelmerBox {
    n: u64,
    conditions: BTreeMap<Place, Subgroup>,
}

impl SelmerBox {
    /// Each condition is given by generators in local coordinates.
    pub fn from_generators(n: u64, conditions: &BTreeMap<Place, Vec<[u64; 3]>>) -> Result<Self, PoissonError> {
        let mut out = BTreeMap::new();
        for (&v, gens) in conditions {
            let g = local_group(v, n, Side::Coefficients).map_err(|_| PoissonError::NotSubgroup(v))?;
            let gens: Vec<Vec<u64>> = gens.iter().map(|c| LocalClass::new(v, n, *c).coords.to_vec()).collect();
            out.insert(v, Subgroup::generated_by(g.carrier(), &gens).map_err(|_| PoissonError::NotSubgroup(v))?);
        }
        Ok(SelmerBox { n, conditions: out })
    }

    /// Each condition is given as its full element list, which must be a subgroup.
    pub fn from_elements(n: u64, conditions: &BTreeMap<Place, Vec<[u64; 3]>>) -> Result<Self, PoissonError> {
        let b = Self::from_generators(n, conditions)?;
        for (v, elems) in conditions {
            let set: BTreeSet<[u64; 3]> = elems.iter().map(|c| LocalClass::new(*v, n, *c).coords).collect();
            if set.len() as u64 != b.conditions[v].order() {
                return Err(PoissonError::NotSubgroup(*v));
            }
        }
        Ok(b)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn condition(&self, v: Place) -> Subgroup {
        if let Some(s) = self.conditions.get(&v) {
            return s.clone();
        }
        let g = local_group(v, self.n, Side::Coefficients).expect("valid place");
        g.unramified().clone()
    }

    fn places(&self) -> BTreeSet<Place> {
        let mut s: BTreeSet<Place> = self.conditions.keys().copied().collect();
        s.insert(Place::Infinite);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreenbergWilesReport {
    pub selmer: u64,
    pub dual_selmer: u64,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl GreenbergWilesReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

impl fmt::Display for GreenbergWilesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selmer = {}", self.selmer)?;
        writeln!(f, "dual_selmer = {}", self.dual_selmer)?;
        writeln!(f, "lhs = {}", self.lhs)?;
        writeln!(f, "rhs = {}", self.rhs)?;
        writeln!(f, "equal = {}", self.holds())
    }
}

/// Enumerates `H^1_L(Q, T)` and `H^1_{L*}(Q, T*)` and compares
/// `|H^1_L| / |H^1_{L*}|` with `(n / gcd(n,2)) prod_v |L_v| / n`.
pub fn greenberg_wiles_check(b: &SelmerBox) -> Result<GreenbergWilesReport, PoissonError> {
    let n = b.n;
    let places = b.places();
    let primes: Vec<u64> = places.iter().filter_map(Place::as_prime).collect();
    let ordering = OrderingSpec::radical(n);

    // characters ramified only inside S
    let mut choices: Vec<Vec<Component>> = Vec::new();
    for &p in &primes {
        let shape = crate::local::LocalShape::new(Place::Finite(p), n);
        let mut opts = Vec::new();
        for tame in 0..shape.tame_order {
            for wild in 0..shape.wild_order {
                opts.push(Component { p, tame, wild });
            }
        }
        choices.push(opts);
    }
    let conditions: BTreeMap<Place, Subgroup> = places.iter().map(|&v| (v, b.condition(v))).collect();
    let mut selmer = 0u64;
    let mut idx = vec![0usize; choices.len()];
    loop {
        let comps: Vec<Component> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let f = GlobalCharacter::new(n, comps, &ordering)?;
        if conditions.iter().all(|(&v, l)| l.contains(&f.restrict(v).coords)) {
            selmer += 1;
        }
        if !advance(&mut idx, &choices.iter().map(Vec::len).collect::<Vec<_>>()) {
            break;
        }
    }

    // Kummer classes supported on S with res_v in the annihilator of L_v
    let mut duals = BTreeMap::new();
    for (&v, l) in &conditions {
        let g = local_group(v, n, Side::Coefficients).expect("valid place");
        let gens: Vec<Vec<u64>> = l.elements().cloned().collect();
        duals.insert(v, annihilator(&gens, g.carrier()).expect("shapes agree"));
    }
    let dual_selmer = kummer_classes_on(n, &places)
        .into_iter()
        .filter(|a| duals.iter().all(|(&v, ann)| ann.contains(&a.restrict(v).coords)))
        .count() as u64;

    let mut rhs = global_ratio(n);
    for l in conditions.values() {
        rhs *= BigRational::new(BigInt::from(l.order()), BigInt::from(n));
    }
    let lhs = BigRational::new(BigInt::from(selmer), BigInt::from(dual_selmer));
    Ok(GreenbergWilesReport { selmer, dual_selmer, lhs, rhs })
}

fn advance(idx: &mut [usize], sizes: &[usize]) -> bool {
    for (i, &s) in idx.iter_mut().zip(sizes) {
        *i += 1;
        if *i < s {
            return true;
        }
        *i = 0;
    }
    false
}

/// Coefficientwise domination `|w^_v(g)| <= w^_v(0)`.
pub fn dominated(g_factor: &LocalPoly, zero_factor: &LocalPoly) -> bool {
    (0..=g_factor.degree().max(zero_factor.degree())).all(|e| {
        let bound = zero_factor.coeff(e).to_rational().unwrap_or_else(BigRational::zero);
        let bound = num_traits::ToPrimitive::to_f64(&bound).unwrap_or(0.0);
        g_factor.coeff(e).abs() <= bound + 1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: u64, c: &[(i64, i64)]) -> LocalPoly {
        LocalPoly::from_ratios(n, c)
    }

    #[test]
    fn local_fourier_examples() {
        let d = OrderingSpec::disc_regular(2);
        let full = ConditionFamily::builtin("full", 2).unwrap();
        let v = Place::Finite(7);
        let id = LocalKummerClass::identity(v, 2);
        assert_eq!(local_fourier(v, &full, &d, &id).unwrap().poly, poly(2, &[(1, 1), (1, 1)]));
        let ex = ConditionFamily::builtin("d1mod4", 2).unwrap();
        assert_eq!(local_fourier(v, &ex, &d, &id).unwrap().poly, poly(2, &[(1, 1), (1, 2)]));
        // g ramified at p: the unramified terms cancel
        let g = GlobalKummerClass::from_integer(2, 7).unwrap().restrict(v);
        let r = local_fourier(v, &ex, &d, &g).unwrap().poly;
        assert!(r.coeff(0).is_zero());
        assert_eq!(r.coeff(1).to_rational().unwrap().numer().magnitude().to_string(), "1");
        assert_eq!(r.coeff(1).abs(), 0.5);
    }

    #[test]
    fn dual_support_examples() {
        let full = ConditionFamily::builtin("full", 2).unwrap();
        let s = |v: &[Place]| v.iter().copied().collect::<BTreeSet<_>>();
        let show = |v: Vec<GlobalKummerClass>| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        assert_eq!(show(dual_support(&full, &s(&[Place::Infinite])).unwrap()), ["1", "-1"]);
        assert_eq!(dual_support(&full, &s(&[Place::Finite(2), Place::Infinite])).unwrap().len(), 4);
        let three = dual_support(&full, &s(&[Place::Finite(2), Place::Finite(3), Place::Infinite])).unwrap();
        assert_eq!(show(three), ["1", "2", "2*3", "3", "-1", "-2", "-2*3", "-3"]);
        let ex = ConditionFamily::builtin("d1mod4", 2).unwrap();
        assert!(matches!(dual_support(&ex, &s(&[])), Err(PoissonError::NotPeriodic(_))));
    }

    #[test]
    fn dual_series_examples() {
        let d = OrderingSpec::disc_regular(2);
        let full = ConditionFamily::builtin("full", 2).unwrap();
        let (spec, sing) = mb_main_term(&full, &d).unwrap();
        assert_eq!(spec.factor_at(101), poly(2, &[(1, 1), (1, 1)]));
        assert_eq!(sing.abscissa, BigRational::one());
        assert_eq!(sing.order, BigRational::one());
        let ex = ConditionFamily::builtin("d1mod4", 2).unwrap();
        let (spec, sing) = mb_main_term(&ex, &d).unwrap();
        assert_eq!(spec.factor_at(101), poly(2, &[(1, 1), (1, 2)]));
        assert_eq!(sing.order, BigRational::new(1.into(), 2.into()));
        let d3 = OrderingSpec::disc_regular(3);
        let (_, sing) = mb_main_term(&ConditionFamily::builtin("full", 3).unwrap(), &d3).unwrap();
        assert_eq!((sing.abscissa, sing.order), (BigRational::new(1.into(), 2.into()), BigRational::one()));
        // twisted: prefactor 2^{-omega} |g|^{-s} up to sign
        let g = GlobalKummerClass::from_integer(2, 21).unwrap();
        let spec = dual_series(&ex, &d, &g).unwrap();
        let series = spec.expand(21, 100).unwrap();
        assert_eq!(series.get(21).abs(), 0.25);
        assert!((1..21).all(|k| series.get(k).is_zero()));
    }

    #[test]
    fn gw_examples() {
        let m = |v: Vec<(Place, Vec<[u64; 3]>)>| v.into_iter().collect::<BTreeMap<_, _>>();
        let box1 = SelmerBox::from_generators(
            2,
            &m(vec![(Place::Finite(3), vec![[1, 0, 0], [0, 1, 0]]), (Place::Infinite, vec![[0, 1, 0]])]),
        )
        .unwrap();
        let r = greenberg_wiles_check(&box1).unwrap();
        assert_eq!((r.selmer, r.dual_selmer), (2, 1));
        assert!(r.holds());
        assert_eq!(r.rhs, BigRational::from_integer(2.into()));

        let box2 = SelmerBox::from_generators(2, &BTreeMap::new()).unwrap();
        let r = greenberg_wiles_check(&box2).unwrap();
        assert_eq!((r.selmer, r.dual_selmer), (1, 2));
        assert_eq!(r.lhs, BigRational::new(1.into(), 2.into()));
        assert!(r.holds());

        let box3 = SelmerBox::from_generators(
            2,
            &m(vec![(Place::Finite(5), vec![[1, 0, 0], [0, 1, 0]]), (Place::Infinite, vec![[0, 1, 0]])]),
        )
        .unwrap();
        let r = greenberg_wiles_check(&box3).unwrap();
        assert_eq!((r.selmer, r.dual_selmer), (2, 1));
        assert!(r.holds());

        let bad = m(vec![(Place::Finite(5), vec![[0, 1, 0]])]);
        assert_eq!(SelmerBox::from_elements(2, &bad).unwrap_err(), PoissonError::NotSubgroup(Place::Finite(5)));
    }

    #[test]
    fn small_poisson_checks() {
        let d = OrderingSpec::disc_regular(2);
        for name in ["box3", "unramified", "full", "d1mod4"] {
            let fam = ConditionFamily::builtin(name, 2).unwrap();
            let r = poisson_check(&fam, &d, 200, 1_000_000).unwrap();
            assert!(r.is_exact(), "{name}: {:?}", r.mismatches);
        }
        let box3 = ConditionFamily::builtin("box3", 2).unwrap();
        let r = poisson_check(&box3, &d, 20, 100).unwrap();
        let nonzero: Vec<u64> = (1..=20).filter(|&k| !r.direct.get(k).is_zero()).collect();
        assert_eq!(nonzero, [1, 3]);
    }
}
