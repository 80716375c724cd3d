//! Finite abelian groups, their character duals, and the divisor lattice of
//! a cyclic target `Z/n`.
//!
//! A [`FiniteAbelianGroup`] is a product of cyclic factors; its dual is
//! identified with a group of the same shape through the pairing
//! `<chi, x> = sum chi_i * x_i / d_i  (mod 1)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::arith::{divisors, gcd, lcm, mobius};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("cyclic target must have order at least 2, got {0}")]
    TargetTooSmall(u64),
    #[error("cyclic factor of order 0")]
    ZeroFactor,
    #[error("element has {got} coordinates, group has {expected} factors")]
    ShapeMismatch { expected: usize, got: usize },
}

/// The coefficient module `T = Z/n` with trivial Galois action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicTarget {
    n: u64,
}

impl CyclicTarget {
    pub fn new(n: u64) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::TargetTooSmall(n));
        }
        Ok(CyclicTarget { n })
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    /// Order of `|H^0(Q, mu_n)|`: the roots of unity of `Q` are `±1`.
    pub fn dual_invariants_order(&self) -> u64 {
        gcd(self.n, 2)
    }
}

impl fmt::Display for CyclicTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}", self.n)
    }
}

/// An element of `Q/Z` with denominator recorded in lowest terms.
///
/// Values of the local Tate pairing and of abstract character pairings live
/// here; `from_residue(a, n)` is `a/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitRootExponent {
    num: u64,
    den: u64,
}

impl UnitRootExponent {
    pub const ZERO: UnitRootExponent = UnitRootExponent { num: 0, den: 1 };

    pub fn from_residue(a: u64, n: u64) -> Self {
        assert!(n > 0, "denominator must be positive");
        let a = a % n;
        let g = gcd(a, n);
        if a == 0 {
            return Self::ZERO;
        }
        UnitRootExponent { num: a / g, den: n / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// The residue `a` with `self = a/n`, if the denominator divides `n`.
    pub fn residue(&self, n: u64) -> Option<u64> {
        if n % self.den == 0 {
            Some(self.num * (n / self.den))
        } else {
            None
        }
    }
}

impl std::ops::Add for UnitRootExponent {
    type Output = UnitRootExponent;
    fn add(self, rhs: Self) -> Self {
        let d = lcm(self.den, rhs.den);
        let a = (self.num * (d / self.den) + rhs.num * (d / rhs.den)) % d;
        UnitRootExponent::from_residue(a, d)
    }
}

impl std::ops::Neg for UnitRootExponent {
    type Output = UnitRootExponent;
    fn neg(self) -> Self {
        UnitRootExponent::from_residue(self.den - self.num, self.den)
    }
}

impl std::iter::Sum for UnitRootExponent {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for UnitRootExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `Z/d_1 x Z/d_2 x ...`. Factors need not be in invariant-factor order and
/// may be trivial; elements are coordinate vectors reduced factor-wise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self, GroupError> {
        if factors.contains(&0) {
            return Err(GroupError::ZeroFactor);
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    /// Least common multiple of the factors.
    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &d| lcm(acc, d))
    }

    pub fn identity(&self) -> Vec<u64> {
        vec![0; self.factors.len()]
    }

    pub fn check(&self, x: &[u64]) -> Result<(), GroupError> {
        if x.len() != self.factors.len() {
            return Err(GroupError::ShapeMismatch { expected: self.factors.len(), got: x.len() });
        }
        Ok(())
    }

    pub fn reduce(&self, x: &[u64]) -> Vec<u64> {
        x.iter().zip(&self.factors).map(|(&a, &d)| a % d).collect()
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(y)
            .zip(&self.factors)
            .map(|((&a, &b), &d)| (a + b) % d)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        x.iter().zip(&self.factors).map(|(&a, &d)| (d - a % d) % d).collect()
    }

    pub fn scale(&self, k: u64, x: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(&self.factors)
            .map(|(&a, &d)| ((k % d) * (a % d)) % d)
            .collect()
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        x.iter()
            .zip(&self.factors)
            .fold(1, |acc, (&a, &d)| lcm(acc, d / gcd(a % d, d)))
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::with_capacity(self.factors.len())];
        for &d in &self.factors {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |a| {
                        let mut v = prefix.clone();
                        v.push(a);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// A subgroup given by generators, with its elements enumerated once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    generators: Vec<Vec<u64>>,
    elements: BTreeSet<Vec<u64>>,
}

impl Subgroup {
    pub fn generated_by(group: &FiniteAbelianGroup, generators: &[Vec<u64>]) -> Result<Self, GroupError> {
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            group.check(g)?;
            gens.push(group.reduce(g));
        }
        let mut elements = BTreeSet::new();
        let mut queue = VecDeque::from([group.identity()]);
        elements.insert(group.identity());
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = group.add(&x, g);
                if elements.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        Ok(Subgroup { generators: gens, elements })
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Subgroup { generators: Vec::new(), elements: BTreeSet::from([group.identity()]) }
    }

    pub fn whole(group: &FiniteAbelianGroup) -> Self {
        let gens: Vec<Vec<u64>> = (0..group.factors().len())
            .map(|i| {
                let mut e = group.identity();
                e[i] = 1 % group.factors()[i];
                e
            })
            .collect();
        Subgroup::generated_by(group, &gens).expect("unit vectors match the shape")
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.elements.contains(x)
    }

    pub fn elements(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.elements.iter()
    }
}

/// `sum chi_i * x_i / d_i` in `Q/Z`.
pub fn character_pairing(
    chi: &[u64],
    x: &[u64],
    group: &FiniteAbelianGroup,
) -> Result<UnitRootExponent, GroupError> {
    group.check(chi)?;
    group.check(x)?;
    let e = group.exponent();
    let total = chi
        .iter()
        .zip(x)
        .zip(group.factors())
        .fold(0u128, |acc, ((&c, &a), &d)| {
            let term = ((c % d) as u128 * (a % d) as u128) % d as u128 * (e / d) as u128;
            (acc + term) % e as u128
        });
    Ok(UnitRootExponent::from_residue(total as u64, e))
}

/// The characters of `group` vanishing on the subgroup generated by `generators`.
pub fn annihilator(generators: &[Vec<u64>], group: &FiniteAbelianGroup) -> Result<Subgroup, GroupError> {
    for h in generators {
        group.check(h)?;
    }
    let mut kernel = Vec::new();
    for chi in group.elements() {
        let mut ok = true;
        for h in generators {
            if !character_pairing(&chi, h, group)?.is_zero() {
                ok = false;
                break;
            }
        }
        if ok {
            kernel.push(chi);
        }
    }
    Subgroup::generated_by(group, &kernel)
}

/// Orbits of `Z/n` under multiplication by units; blocks sorted by least element.
pub fn divisions(n: u64) -> Vec<Vec<u64>> {
    let units: Vec<u64> = (1..=n).filter(|&u| gcd(u, n) == 1).map(|u| u % n).collect();
    let mut seen = vec![false; n as usize];
    let mut out = Vec::new();
    for a in 0..n {
        if seen[a as usize] {
            continue;
        }
        let mut block: Vec<u64> = units.iter().map(|&u| (u * a) % n).collect();
        block.sort_unstable();
        block.dedup();
        for &b in &block {
            seen[b as usize] = true;
        }
        out.push(block);
    }
    out
}

/// Coefficients `mu(d -> n)` for counting surjections onto `Z/n`:
/// `#surjective = sum_{d | n} mu(n/d) * N(Z/d)`, where `N(Z/d)` counts classes
/// with image inside the subgroup of order `d`.
pub fn mobius_divisor_lattice(n: u64) -> BTreeMap<u64, i64> {
    divisors(n).into_iter().map(|d| (d, mobius(n / d))).collect()
}
