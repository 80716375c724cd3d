//! Exact elements of `Q(zeta_n)`.
//!
//! A scalar is stored in the power basis `1, zeta, ..., zeta^(phi(n)-1)`,
//! i.e. as a rational polynomial already reduced modulo the `n`-th
//! cyclotomic polynomial. Equality is therefore coefficient equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::divisors;

/// Coefficients of `Phi_n` (low degree first, monic).
pub fn cyclotomic_polynomial(n: u64) -> Arc<[i64]> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<[i64]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().expect("cache poisoned").get(&n) {
        return p.clone();
    }
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut num: Vec<i64> = vec![0; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        num = exact_div_monic(&num, &cyclotomic_polynomial(d));
    }
    let poly: Arc<[i64]> = num.into();
    cache.write().expect("cache poisoned").insert(n, poly.clone());
    poly
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = rem.len() - dd;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &b) in den.iter().enumerate() {
                rem[i + j] -= c * b;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

/// An element of `Q(zeta_n)` in reduced power-basis form.
#[derive(Clone)]
pub struct CyclotomicScalar {
    n: u64,
    modulus: Arc<[i64]>,
    coeffs: Vec<BigRational>,
}

impl PartialEq for CyclotomicScalar {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.coeffs == other.coeffs
    }
}

impl Eq for CyclotomicScalar {}

impl fmt::Debug for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclotomicScalar(n={}, {})", self.n, self)
    }
}

impl CyclotomicScalar {
    pub fn zero(n: u64) -> Self {
        let modulus = cyclotomic_polynomial(n);
        let phi = modulus.len() - 1;
        CyclotomicScalar { n, modulus, coeffs: vec![BigRational::zero(); phi] }
    }

    pub fn one(n: u64) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_rational(n: u64, q: BigRational) -> Self {
        let mut s = Self::zero(n);
        s.coeffs[0] = q;
        s
    }

    pub fn from_integer(n: u64, k: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(BigInt::from(k)))
    }

    pub fn from_ratio(n: u64, num: i64, den: i64) -> Self {
        Self::from_rational(n, BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `zeta_n^k`.
    pub fn zeta_pow(n: u64, k: u64) -> Self {
        let mut s = Self::zero(n);
        let k = (k % n) as usize;
        let mut raw = vec![BigRational::zero(); k.max(s.coeffs.len()) + 1];
        raw[k] = BigRational::one();
        s.coeffs = reduce(raw, &s.modulus);
        s
    }

    /// Builds a scalar from an arbitrary-length coefficient vector in powers of zeta.
    pub fn from_power_coeffs(n: u64, raw: Vec<BigRational>) -> Self {
        let mut s = Self::zero(n);
        let mut raw = raw;
        if raw.len() < s.coeffs.len() {
            raw.resize(s.coeffs.len(), BigRational::zero());
        }
        s.coeffs = reduce(raw, &s.modulus);
        s
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    /// Complex embedding with `zeta = exp(2 pi i / n)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c.to_f64().unwrap_or(f64::NAN);
            let angle = 2.0 * std::f64::consts::PI * k as f64 / self.n as f64;
            re += c * angle.cos();
            im += c * angle.sin();
        }
        (re, im)
    }

    pub fn abs(&self) -> f64 {
        let (re, im) = self.to_complex();
        re.hypot(im)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut s = self.clone();
        for c in &mut s.coeffs {
            *c *= q;
        }
        s
    }

    fn same_field(&self, other: &Self) {
        assert_eq!(self.n, other.n, "cyclotomic scalars from different fields");
    }
}

fn reduce(mut raw: Vec<BigRational>, modulus: &[i64]) -> Vec<BigRational> {
    let phi = modulus.len() - 1;
    for i in (phi..raw.len()).rev() {
        if raw[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut raw[i], BigRational::zero());
        for (j, &m) in modulus[..phi].iter().enumerate() {
            if m != 0 {
                raw[i - phi + j] -= &c * BigRational::from_integer(BigInt::from(m));
            }
        }
    }
    raw.truncate(phi);
    raw
}

impl fmt::Display for CyclotomicScalar {
    /// Rationals render as `p/q` (or `p`), everything else as a colon tuple
    /// of power-basis coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_rational() {
            Some(q) => write!(f, "{q}"),
            None => {
                let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "{}", parts.join(":"))
            }
        }
    }
}

impl<'a> Add<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn add(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn add(mut self, rhs: CyclotomicScalar) -> CyclotomicScalar {
        self += &rhs;
        self
    }
}

impl AddAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn add_assign(&mut self, rhs: &CyclotomicScalar) {
        self.same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn sub_assign(&mut self, rhs: &CyclotomicScalar) {
        self.same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl<'a> Sub<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn sub(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn sub(mut self, rhs: CyclotomicScalar) -> CyclotomicScalar {
        self -= &rhs;
        self
    }
}

impl Neg for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn neg(mut self) -> CyclotomicScalar {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }
}

impl<'a> Mul<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn mul(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        self.same_field(rhs);
        let phi = self.coeffs.len();
        if phi == 1 {
            return CyclotomicScalar {
                n: self.n,
                modulus: self.modulus.clone(),
                coeffs: vec![&self.coeffs[0] * &rhs.coeffs[0]],
            };
        }
        let mut raw = vec![BigRational::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        CyclotomicScalar { n: self.n, modulus: self.modulus.clone(), coeffs: reduce(raw, &self.modulus) }
    }
}

impl Mul for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn mul(self, rhs: CyclotomicScalar) -> CyclotomicScalar {
        &self * &rhs
    }
}

impl MulAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn mul_assign(&mut self, rhs: &CyclotomicScalar) {
        *self = &*self * rhs;
    }
}
