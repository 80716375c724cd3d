//! Frobenian Euler products over `Q(zeta_n)` and their Dirichlet series.
//!
//! A spec is `prefactor * prod_p F_p(p^{-s})`. The local factor `F_p` comes
//! from the exceptional table when `p` is listed there; otherwise from the
//! generic rule, which is either keyed by `p mod m` or computed per prime.
//! Generic factors at primes dividing `m` are 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{euler_phi, gcd, lcm, primes_up_to};
use crate::cyclotomic::CyclotomicScalar;

/// Default cap on the number of expanded coefficients.
pub const DEFAULT_MAX_TERMS: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EulerError {
    #[error("truncation {requested} exceeds the cap {cap}")]
    TooLarge { requested: u64, cap: u64 },
    #[error("s = {s} is not right of the abscissa {abscissa}")]
    LeftOfAbscissa { s: String, abscissa: String },
    #[error("generic factor at {0} has constant term different from 1")]
    NonUnitConstant(u64),
    #[error("minimal-term coefficients are not rational")]
    NonRational,
}

/// A polynomial in `x = p^{-s}` with cyclotomic coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPoly {
    n: u64,
    coeffs: Vec<CyclotomicScalar>,
}

impl LocalPoly {
    pub fn new(n: u64, mut coeffs: Vec<CyclotomicScalar>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(CyclotomicScalar::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(CyclotomicScalar::zero(n));
        }
        LocalPoly { n, coeffs }
    }

    pub fn one(n: u64) -> Self {
        LocalPoly { n, coeffs: vec![CyclotomicScalar::one(n)] }
    }

    /// From rational coefficients `(num, den)` of `1, x, x^2, ...`.
    pub fn from_ratios(n: u64, coeffs: &[(i64, i64)]) -> Self {
        Self::new(n, coeffs.iter().map(|&(a, b)| CyclotomicScalar::from_ratio(n, a, b)).collect())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CyclotomicScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, e: usize) -> CyclotomicScalar {
        self.coeffs.get(e).cloned().unwrap_or_else(|| CyclotomicScalar::zero(self.n))
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == CyclotomicScalar::one(self.n)
    }

    /// Least `e >= 1` with a nonzero coefficient.
    pub fn min_positive_exponent(&self) -> Option<usize> {
        (1..self.coeffs.len()).find(|&e| !self.coeffs[e].is_zero())
    }

    pub fn mul(&self, other: &LocalPoly) -> LocalPoly {
        let mut out = vec![CyclotomicScalar::zero(self.n); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        LocalPoly::new(self.n, out)
    }

    /// Value at a real `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        let mut xe = 1.0;
        for c in &self.coeffs {
            let (a, b) = c.to_complex();
            re += a * xe;
            im += b * xe;
            xe *= x;
        }
        (re, im)
    }
}

impl fmt::Display for LocalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = if c.is_rational() { c.to_string() } else { format!("({c})") };
            parts.push(match e {
                0 => c,
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{e}"),
            });
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Local factors keyed by `p mod modulus`; missing classes mean factor 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobenianFactor {
    pub modulus: u64,
    pub classes: BTreeMap<u64, LocalPoly>,
}

impl FrobenianFactor {
    pub fn uniform(poly: LocalPoly) -> Self {
        FrobenianFactor { modulus: 1, classes: [(0, poly)].into_iter().collect() }
    }

    pub fn at(&self, p: u64) -> Option<&LocalPoly> {
        if self.modulus > 1 && gcd(p, self.modulus) != 1 {
            return None;
        }
        self.classes.get(&(p % self.modulus))
    }

    fn unit_classes(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.modulus).filter(|&c| gcd(c, self.modulus) == 1)
    }
}

pub type PrimeRule = Arc<dyn Fn(u64) -> LocalPoly + Send + Sync>;

#[derive(Clone)]
pub enum GenericFactor {
    Frobenian(FrobenianFactor),
    /// Computed per prime. `majorant` dominates the factors coefficientwise
    /// and is used for singularity bounds and tail estimates.
    PerPrime { rule: PrimeRule, majorant: FrobenianFactor },
}

impl fmt::Debug for GenericFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenericFactor::Frobenian(fr) => f.debug_tuple("Frobenian").field(fr).finish(),
            GenericFactor::PerPrime { majorant, .. } => f.debug_struct("PerPrime").field("majorant", majorant).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EulerProductSpec {
    pub n: u64,
    pub generic: GenericFactor,
    pub exceptional: BTreeMap<u64, LocalPoly>,
    pub prefactor: CyclotomicScalar,
}

/// Singularity data `(1/a, b)`. The sentinel `(0, 0)` means every factor
/// is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Singularity {
    pub abscissa: BigRational,
    pub order: BigRational,
    /// The order is only an upper bound (per-prime generic factor).
    pub bound_only: bool,
}

impl fmt::Display for Singularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.abscissa, self.order)?;
        if self.bound_only {
            f.write_str(" upper bound")?;
        }
        Ok(())
    }
}

/// An approximate value with a rigorous error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
}

impl EulerProductSpec {
    /// The empty product with the given prefactor.
    pub fn constant(n: u64, prefactor: CyclotomicScalar) -> Self {
        EulerProductSpec {
            n,
            generic: GenericFactor::Frobenian(FrobenianFactor { modulus: 1, classes: BTreeMap::new() }),
            exceptional: BTreeMap::new(),
            prefactor,
        }
    }

    pub fn frobenian(n: u64, generic: FrobenianFactor) -> Self {
        EulerProductSpec {
            n,
            generic: GenericFactor::Frobenian(generic),
            exceptional: BTreeMap::new(),
            prefactor: CyclotomicScalar::one(n),
        }
    }

    pub fn with_exceptional(mut self, p: u64, poly: LocalPoly) -> Self {
        self.exceptional.insert(p, poly);
        self
    }

    pub fn with_prefactor(mut self, c: CyclotomicScalar) -> Self {
        self.prefactor = c;
        self
    }

    /// The local factor at `p`.
    pub fn factor_at(&self, p: u64) -> LocalPoly {
        if let Some(f) = self.exceptional.get(&p) {
            return f.clone();
        }
        match &self.generic {
            GenericFactor::Frobenian(fr) => fr.at(p).cloned().unwrap_or_else(|| LocalPoly::one(self.n)),
            GenericFactor::PerPrime { rule, .. } => rule(p),
        }
    }

    fn dominating(&self) -> (&FrobenianFactor, bool) {
        match &self.generic {
            GenericFactor::Frobenian(fr) => (fr, false),
            GenericFactor::PerPrime { majorant, .. } => (majorant, true),
        }
    }

    /// The product of two specs over the same field.
    pub fn mul(&self, other: &EulerProductSpec) -> EulerProductSpec {
        assert_eq!(self.n, other.n, "specs over different fields");
        let n = self.n;
        let generic = match (&self.generic, &other.generic) {
            (GenericFactor::Frobenian(a), GenericFactor::Frobenian(b)) => {
                GenericFactor::Frobenian(multiply_frobenian(a, b))
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                let (ma, _) = self.dominating();
                let (mb, _) = other.dominating();
                GenericFactor::PerPrime {
                    rule: Arc::new(move |p| generic_at(&a, p).mul(&generic_at(&b, p))),
                    majorant: multiply_frobenian(ma, mb),
                }
            }
        };
        let mut exceptional = BTreeMap::new();
        for &p in self.exceptional.keys().chain(other.exceptional.keys()) {
            exceptional.insert(p, self.factor_at(p).mul(&other.factor_at(p)));
        }
        EulerProductSpec { n, generic, exceptional, prefactor: &self.prefactor * &other.prefactor }
    }

    /// Combinatorial singularity data from the minimal exponent and its
    /// Chebotarev-averaged coefficient.
    pub fn singularity(&self) -> Result<Singularity, EulerError> {
        let (fr, bound_only) = self.dominating();
        let e_min = fr.unit_classes().filter_map(|c| fr.classes.get(&c)?.min_positive_exponent()).min();
        let Some(e_min) = e_min else {
            return Ok(Singularity { abscissa: BigRational::zero(), order: BigRational::zero(), bound_only });
        };
        let phi = BigRational::from_integer(BigInt::from(euler_phi(fr.modulus)));
        let mut order = BigRational::zero();
        for c in fr.unit_classes() {
            if let Some(poly) = fr.classes.get(&c) {
                order += poly.coeff(e_min).to_rational().ok_or(EulerError::NonRational)? / &phi;
            }
        }
        Ok(Singularity {
            abscissa: BigRational::new(BigInt::from(1), BigInt::from(e_min as u64)),
            order,
            bound_only,
        })
    }

    /// Exact Dirichlet coefficients `a_1..a_N`.
    pub fn expand(&self, terms: u64, cap: u64) -> Result<CoefficientSeries, EulerError> {
        if terms > cap {
            return Err(EulerError::TooLarge { requested: terms, cap });
        }
        let n = self.n;
        let big = terms as usize;
        let mut out = vec![CyclotomicScalar::zero(n); big];
        if big == 0 {
            return Ok(CoefficientSeries { n, coeffs: out });
        }
        // constant contribution of exceptional primes beyond the range
        let mut base = self.prefactor.clone();
        let mut small_exc: Vec<(u64, CyclotomicScalar)> = Vec::new();
        let mut required = 1u64;
        for (&p, poly) in &self.exceptional {
            let c0 = poly.coeff(0);
            if p > terms {
                base *= &c0;
            } else if c0.is_zero() {
                required = required.saturating_mul(p);
            } else {
                small_exc.push((p, c0));
            }
        }
        if base.is_zero() || required > terms {
            return Ok(CoefficientSeries { n, coeffs: out });
        }
        let spf = smallest_prime_factors(terms);
        let mut cache: HashMap<u64, LocalPoly> = HashMap::new();
        let mut k = required;
        while k <= terms {
            let mut acc = base.clone();
            let mut m = k;
            while m > 1 && !acc.is_zero() {
                let p = spf[m as usize] as u64;
                let mut e = 0usize;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                if !cache.contains_key(&p) {
                    let poly = self.factor_at(p);
                    if !self.exceptional.contains_key(&p) && poly.coeff(0) != CyclotomicScalar::one(n) {
                        return Err(EulerError::NonUnitConstant(p));
                    }
                    cache.insert(p, poly);
                }
                let poly = &cache[&p];
                if e >= poly.coeffs.len() {
                    acc = CyclotomicScalar::zero(n);
                } else {
                    acc *= &poly.coeffs[e];
                }
            }
            if !acc.is_zero() {
                for (p, c0) in &small_exc {
                    if k % p != 0 {
                        acc *= c0;
                    }
                }
            }
            out[(k - 1) as usize] = acc;
            k += required;
        }
        Ok(CoefficientSeries { n, coeffs: out })
    }

    /// Partial product over `p <= cutoff` with a rigorous bound on the tail
    /// (absolutely convergent regime).
    pub fn evaluate(&self, s: f64, cutoff: u64) -> Result<Evaluation, EulerError> {
        let sing = self.singularity()?;
        let abscissa = sing.abscissa.to_f64().unwrap_or(0.0);
        if !sing.abscissa.is_zero() && s <= abscissa {
            return Err(EulerError::LeftOfAbscissa { s: s.to_string(), abscissa: sing.abscissa.to_string() });
        }
        let (mut re, mut im) = self.prefactor.to_complex();
        let mul = |re: &mut f64, im: &mut f64, (a, b): (f64, f64)| {
            let r = *re * a - *im * b;
            *im = *re * b + *im * a;
            *re = r;
        };
        for p in primes_up_to(cutoff) {
            let x = (p as f64).powf(-s);
            mul(&mut re, &mut im, self.factor_at(p).eval(x));
        }
        for (&p, poly) in self.exceptional.range(cutoff + 1..) {
            mul(&mut re, &mut im, poly.eval((p as f64).powf(-s)));
        }
        // tail: prod over generic p > cutoff
        let (fr, _) = self.dominating();
        let mut c_max: f64 = 0.0;
        let mut e_min = usize::MAX;
        for poly in fr.classes.values() {
            for (e, c) in poly.coeffs.iter().enumerate().skip(1) {
                if !c.is_zero() {
                    c_max = c_max.max(c.abs());
                    e_min = e_min.min(e);
                }
            }
        }
        let error_bound = if e_min == usize::MAX {
            0.0
        } else {
            let alpha = s * e_min as f64;
            let p = cutoff.max(2) as f64;
            let u = p.powf(-s);
            let z_max = c_max * u.powi(e_min as i32) / (1.0 - u);
            if alpha <= 1.0 || z_max >= 1.0 {
                f64::INFINITY
            } else {
                let delta = c_max / (1.0 - u) * p.powf(1.0 - alpha) / (alpha - 1.0) / (1.0 - z_max);
                re.hypot(im) * delta.exp_m1()
            }
        };
        Ok(Evaluation { re, im, error_bound })
    }

    /// Partial sums `sum_{k <= K} a_k k^{-s}` at each checkpoint `K`.
    pub fn partial_sums(&self, s: f64, checkpoints: &[u64], cap: u64) -> Result<Vec<(u64, f64, f64)>, EulerError> {
        let top = checkpoints.iter().copied().max().unwrap_or(0);
        let series = self.expand(top, cap)?;
        let mut sorted = checkpoints.to_vec();
        sorted.sort_unstable();
        let mut out = Vec::new();
        let (mut re, mut im) = (0.0, 0.0);
        let mut k = 0u64;
        for &cp in &sorted {
            while k < cp {
                k += 1;
                let c = series.get(k);
                if !c.is_zero() {
                    let (a, b) = c.to_complex();
                    let w = (k as f64).powf(-s);
                    re += a * w;
                    im += b * w;
                }
            }
            out.push((cp, re, im));
        }
        Ok(out)
    }
}

fn generic_at(spec: &EulerProductSpec, p: u64) -> LocalPoly {
    match &spec.generic {
        GenericFactor::Frobenian(fr) => fr.at(p).cloned().unwrap_or_else(|| LocalPoly::one(spec.n)),
        GenericFactor::PerPrime { rule, .. } => rule(p),
    }
}

fn multiply_frobenian(a: &FrobenianFactor, b: &FrobenianFactor) -> FrobenianFactor {
    let m = lcm(a.modulus, b.modulus);
    let mut classes = BTreeMap::new();
    for c in (0..m).filter(|&c| gcd(c, m) == 1) {
        let pa = a.classes.get(&(c % a.modulus));
        let pb = b.classes.get(&(c % b.modulus));
        let poly = match (pa, pb) {
            (Some(x), Some(y)) => x.mul(y),
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => continue,
        };
        classes.insert(c, poly);
    }
    FrobenianFactor { modulus: m, classes }
}

fn smallest_prime_factors(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Truncated Dirichlet series `sum_{k <= N} a_k k^{-s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientSeries {
    n: u64,
    coeffs: Vec<CyclotomicScalar>,
}

impl CoefficientSeries {
    pub fn zero(n: u64, terms: u64) -> Self {
        CoefficientSeries { n, coeffs: vec![CyclotomicScalar::zero(n); terms as usize] }
    }

    /// From integer counts `counts[k]` for `k = 1..=N` (index 0 ignored).
    pub fn from_counts(n: u64, counts: &[u64]) -> Self {
        let coeffs = counts.iter().skip(1).map(|&c| CyclotomicScalar::from_integer(n, c as i64)).collect();
        CoefficientSeries { n, coeffs }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.coeffs.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `a_k`, 1-based.
    pub fn get(&self, k: u64) -> &CyclotomicScalar {
        &self.coeffs[(k - 1) as usize]
    }

    pub fn coeffs(&self) -> &[CyclotomicScalar] {
        &self.coeffs
    }

    pub fn add_assign(&mut self, other: &CoefficientSeries) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, c: &CyclotomicScalar) {
        for a in &mut self.coeffs {
            if !a.is_zero() {
                *a *= c;
            }
        }
    }

    /// Dirichlet convolution, truncated to the shorter length.
    pub fn convolve(&self, other: &CoefficientSeries) -> CoefficientSeries {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![CyclotomicScalar::zero(self.n); len];
        for i in 1..=len {
            let a = &self.coeffs[i - 1];
            if a.is_zero() {
                continue;
            }
            let mut j = 1;
            while i * j <= len {
                let b = &other.coeffs[j - 1];
                if !b.is_zero() {
                    out[i * j - 1] += &(a * b);
                }
                j += 1;
            }
        }
        CoefficientSeries { n: self.n, coeffs: out }
    }

    /// Lines `k,value`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, c));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn ints(series: &CoefficientSeries) -> Vec<i64> {
        series.coeffs().iter().map(|c| c.to_rational().unwrap().to_integer().try_into().unwrap()).collect()
    }

    #[test]
    fn squarefree_indicator() {
        let spec = EulerProductSpec::frobenian(2, FrobenianFactor::uniform(LocalPoly::from_ratios(2, &[(1, 1), (1, 1)])));
        let s = spec.expand(10, DEFAULT_MAX_TERMS).unwrap();
        assert_eq!(ints(&s), vec![1, 1, 1, 0, 1, 1, 1, 0, 0, 1]);
        assert_eq!(spec.singularity().unwrap(), Singularity { abscissa: rat(1, 1), order: rat(1, 1), bound_only: false });
    }

    #[test]
    fn empty_product() {
        let spec = EulerProductSpec::constant(3, CyclotomicScalar::one(3));
        let s = spec.expand(5, DEFAULT_MAX_TERMS).unwrap();
        assert_eq!(ints(&s), vec![1, 0, 0, 0, 0]);
        let v = spec.evaluate(0.7, 100).unwrap();
        assert_eq!((v.re, v.im, v.error_bound), (1.0, 0.0, 0.0));
        assert_eq!(spec.singularity().unwrap().order, rat(0, 1));
    }

    #[test]
    fn one_mod_four() {
        let mut classes = BTreeMap::new();
        classes.insert(1, LocalPoly::from_ratios(2, &[(1, 1), (1, 1)]));
        let spec = EulerProductSpec::frobenian(2, FrobenianFactor { modulus: 4, classes });
        let s = spec.expand(30, DEFAULT_MAX_TERMS).unwrap();
        let support: Vec<u64> = (1..=30).filter(|&k| !s.get(k).is_zero()).collect();
        assert_eq!(support, vec![1, 5, 13, 17, 29]);
        assert_eq!(spec.singularity().unwrap().order, rat(1, 2));
    }

    #[test]
    fn doubled_exponent() {
        let spec = EulerProductSpec::frobenian(2, FrobenianFactor::uniform(LocalPoly::from_ratios(2, &[(1, 1), (0, 1), (1, 1)])));
        let sing = spec.singularity().unwrap();
        assert_eq!((sing.abscissa, sing.order), (rat(1, 2), rat(1, 1)));
        assert!(spec.evaluate(0.5, 100).is_err());
        let v = spec.evaluate(1.0, 1_000_000).unwrap();
        let target = 15.0 / std::f64::consts::PI.powi(2);
        assert!((v.re - target).abs() < 1e-6);
        assert!((v.re - target).abs() <= v.error_bound);
    }

    #[test]
    fn too_large() {
        let spec = EulerProductSpec::constant(2, CyclotomicScalar::one(2));
        assert_eq!(spec.expand(11, 10), Err(EulerError::TooLarge { requested: 11, cap: 10 }));
    }

    #[test]
    fn dump_format() {
        let spec = EulerProductSpec::frobenian(4, FrobenianFactor::uniform(LocalPoly::new(
            4,
            vec![CyclotomicScalar::one(4), CyclotomicScalar::zeta_pow(4, 1)],
        )))
        .with_exceptional(2, LocalPoly::from_ratios(4, &[(1, 2)]));
        assert_eq!(spec.expand(4, 100).unwrap().dump(), "1,1/2\n2,0\n3,0:1/2\n4,0\n");
    }
}
