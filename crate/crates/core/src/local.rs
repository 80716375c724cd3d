//! Explicit local cohomology of `Z/n` and `mu_n` at the places of `Q`.
//!
//! Both sides share the coordinate carrier `Z/a x Z/d x Z/w`:
//!
//! * side `T`: `H^1(Q_p, Z/n) = Hom(Q_p^*, Z/n)`, with coordinates
//!   `(chi(p), tame, wild)`. At odd `p` the tame coordinate `t` means
//!   `chi(omega(r)) = t * n/d` for the least primitive root `r` mod `p`
//!   (`d = gcd(n, p-1)`), and the wild coordinate `w` means
//!   `chi(1+p) = w * n/p^v` with `p^v || n`. At `p = 2` the tame part is the
//!   value on `-1` and the wild part the value on `5`.
//! * side `T*`: `Q_p^*/(Q_p^*)^n`, with coordinates
//!   `(valuation mod n, discrete log of the Teichmüller part mod d,
//!   1-unit logarithm mod p^v)`.
//!
//! The infinite place uses the carrier `Z/1 x Z/gcd(n,2) x Z/1`, the middle
//! coordinate being the sign. With these conventions the local Tate pairing
//! is the plain character pairing of the carrier, i.e. evaluation of the
//! character `f` on the class `a`.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::arith::{gcd, inv_mod, is_prime, jacobi, mul_mod, pow_mod, primitive_root, valuation};
use crate::group::{character_pairing, FiniteAbelianGroup, Subgroup, UnitRootExponent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("coefficient modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("classes live at different places or moduli")]
    Mismatch,
    #[error("cannot restrict the zero rational")]
    ZeroRational,
}

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinite,
}

impl Place {
    pub fn prime(p: u64) -> Result<Self, LocalError> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(LocalError::NotPrime(p))
        }
    }

    pub fn as_prime(&self) -> Option<u64> {
        match self {
            Place::Finite(p) => Some(*p),
            Place::Infinite => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `H^1(Q_v, Z/n)`
    Coefficients,
    /// `H^1(Q_v, mu_n)`
    Dual,
}

/// Orders of the three coordinate factors at a place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalShape {
    pub place: Place,
    pub n: u64,
    /// Order of the Frobenius / valuation factor (`n`, or 1 at infinity).
    pub unramified_order: u64,
    /// `gcd(n, p-1)`, `gcd(n, 2)` at 2 and infinity.
    pub tame_order: u64,
    /// `p^{v_p(n)}` (1 at infinity).
    pub wild_order: u64,
}

impl LocalShape {
    pub fn new(place: Place, n: u64) -> Self {
        match place {
            Place::Infinite => LocalShape { place, n, unramified_order: 1, tame_order: gcd(n, 2), wild_order: 1 },
            Place::Finite(p) => {
                let tame_order = if p == 2 { gcd(n, 2) } else { gcd(n, p - 1) };
                let wild_order = p.pow(valuation(n, p));
                LocalShape { place, n, unramified_order: n, tame_order, wild_order }
            }
        }
    }

    pub fn carrier(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![self.unramified_order, self.tame_order, self.wild_order])
            .expect("local factors are positive")
    }

    pub fn order(&self) -> u64 {
        self.unramified_order * self.tame_order * self.wild_order
    }

    /// Order of the subgroup of `Z/n` generated by the inertia image of a
    /// class with the given tame and wild coordinates.
    pub fn inertia_order(&self, tame: u64, wild: u64) -> u64 {
        let t = self.tame_order / gcd(tame % self.tame_order, self.tame_order);
        let w = self.wild_order / gcd(wild % self.wild_order, self.wild_order);
        t * w / gcd(t, w)
    }

    /// Artin conductor exponent of a character with the given inertia coordinates.
    pub fn conductor_exponent(&self, tame: u64, wild: u64) -> u32 {
        let p = match self.place {
            Place::Infinite => return 0,
            Place::Finite(p) => p,
        };
        let tame = tame % self.tame_order;
        let wild = wild % self.wild_order;
        if wild != 0 {
            let order = self.wild_order / gcd(wild, self.wild_order);
            let j = valuation(order, p);
            if p == 2 {
                j + 2
            } else {
                j + 1
            }
        } else if tame != 0 {
            if p == 2 {
                2
            } else {
                1
            }
        } else {
            0
        }
    }
}

/// `|H^0(Q_v, T)|` or `|H^0(Q_v, T*)|`.
///
/// On side `T` this is `n` at every place, including infinity.
pub fn h0_order(place: Place, n: u64, side: Side) -> u64 {
    match side {
        Side::Coefficients => n,
        Side::Dual => LocalShape::new(place, n).tame_order,
    }
}

/// An explicit model of `H^1(Q_v, T)` or `H^1(Q_v, T*)`.
#[derive(Debug, Clone)]
pub struct LocalCohomologyGroup {
    shape: LocalShape,
    side: Side,
    carrier: FiniteAbelianGroup,
    unramified: Subgroup,
}

impl LocalCohomologyGroup {
    pub fn place(&self) -> Place {
        self.shape.place
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn shape(&self) -> &LocalShape {
        &self.shape
    }

    pub fn carrier(&self) -> &FiniteAbelianGroup {
        &self.carrier
    }

    pub fn unramified(&self) -> &Subgroup {
        &self.unramified
    }

    pub fn order(&self) -> u64 {
        self.carrier.order()
    }

    pub fn classes(&self) -> Vec<LocalClass> {
        self.carrier
            .elements()
            .into_iter()
            .map(|c| LocalClass { place: self.shape.place, n: self.shape.n, coords: [c[0], c[1], c[2]] })
            .collect()
    }

    pub fn kummer_classes(&self) -> Vec<LocalKummerClass> {
        self.carrier
            .elements()
            .into_iter()
            .map(|c| LocalKummerClass { place: self.shape.place, n: self.shape.n, coords: [c[0], c[1], c[2]] })
            .collect()
    }
}

/// Builds `H^1(Q_v, Z/n)` (side `Coefficients`) or `H^1(Q_v, mu_n)` (side `Dual`).
pub fn local_group(place: Place, n: u64, side: Side) -> Result<LocalCohomologyGroup, LocalError> {
    if n < 2 {
        return Err(LocalError::BadModulus(n));
    }
    if let Place::Finite(p) = place {
        if !is_prime(p) {
            return Err(LocalError::NotPrime(p));
        }
    }
    let shape = LocalShape::new(place, n);
    let carrier = shape.carrier();
    let unramified = match (place, side) {
        (Place::Infinite, _) => Ok(Subgroup::trivial(&carrier)),
        (_, Side::Coefficients) => Subgroup::generated_by(&carrier, &[vec![1, 0, 0]]),
        (_, Side::Dual) => Subgroup::generated_by(&carrier, &[vec![0, 1, 0], vec![0, 0, 1]]),
    }
    .expect("generators match the carrier");
    Ok(LocalCohomologyGroup { shape, side, carrier, unramified })
}

/// A class in `H^1(Q_v, Z/n)`: `[frobenius, tame, wild]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalClass {
    pub place: Place,
    pub n: u64,
    pub coords: [u64; 3],
}

impl LocalClass {
    pub fn new(place: Place, n: u64, coords: [u64; 3]) -> Self {
        let shape = LocalShape::new(place, n);
        LocalClass {
            place,
            n,
            coords: [coords[0] % shape.unramified_order, coords[1] % shape.tame_order, coords[2] % shape.wild_order],
        }
    }

    pub fn zero(place: Place, n: u64) -> Self {
        LocalClass { place, n, coords: [0, 0, 0] }
    }

    pub fn shape(&self) -> LocalShape {
        LocalShape::new(self.place, self.n)
    }

    pub fn frobenius(&self) -> u64 {
        self.coords[0]
    }

    pub fn tame(&self) -> u64 {
        self.coords[1]
    }

    pub fn wild(&self) -> u64 {
        self.coords[2]
    }

    pub fn is_zero(&self) -> bool {
        self.coords == [0, 0, 0]
    }

    /// Trivial on inertia. At infinity only the zero class is unramified.
    pub fn is_unramified(&self) -> bool {
        self.coords[1] == 0 && self.coords[2] == 0
    }

    pub fn inertia_order(&self) -> u64 {
        self.shape().inertia_order(self.coords[1], self.coords[2])
    }

    pub fn scale(&self, k: u64) -> Self {
        LocalClass::new(self.place, self.n, [k * self.coords[0], k * self.coords[1], k * self.coords[2]])
    }

    pub fn add(&self, other: &Self) -> Self {
        LocalClass::new(
            self.place,
            self.n,
            [
                self.coords[0] + other.coords[0],
                self.coords[1] + other.coords[1],
                self.coords[2] + other.coords[2],
            ],
        )
    }

    /// The value of this character on a unit root of `Z/n`: the image of
    /// the inertia generator(s) as residues mod `n`.
    pub fn inertia_values(&self) -> [u64; 2] {
        let s = self.shape();
        [
            self.coords[1] * (self.n / s.tame_order) % self.n,
            self.coords[2] * (self.n / s.wild_order) % self.n,
        ]
    }
}

/// Artin conductor exponent of `f` (0 at infinity).
pub fn conductor_exponent(f: &LocalClass) -> u32 {
    f.shape().conductor_exponent(f.tame(), f.wild())
}

/// A class in `H^1(Q_v, mu_n) = Q_v^*/(Q_v^*)^n`: `[valuation, tame unit, wild unit]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalKummerClass {
    pub place: Place,
    pub n: u64,
    pub coords: [u64; 3],
}

impl LocalKummerClass {
    pub fn new(place: Place, n: u64, coords: [u64; 3]) -> Self {
        let s = LocalShape::new(place, n);
        LocalKummerClass {
            place,
            n,
            coords: [coords[0] % s.unramified_order, coords[1] % s.tame_order, coords[2] % s.wild_order],
        }
    }

    pub fn identity(place: Place, n: u64) -> Self {
        LocalKummerClass { place, n, coords: [0, 0, 0] }
    }

    pub fn valuation(&self) -> u64 {
        self.coords[0]
    }

    pub fn is_identity(&self) -> bool {
        self.coords == [0, 0, 0]
    }
}

/// Local Tate pairing `<f, a> = f(a)` in `(1/n)Z/Z`.
pub fn local_tate_pair(f: &LocalClass, a: &LocalKummerClass) -> Result<UnitRootExponent, LocalError> {
    if f.place != a.place || f.n != a.n {
        return Err(LocalError::Mismatch);
    }
    let carrier = f.shape().carrier();
    Ok(character_pairing(&f.coords, &a.coords, &carrier).expect("carrier shapes agree"))
}

/// Coordinates of `Z_p^*/(Z_p^*)^n` for a fixed prime and modulus.
///
/// Built once per `(p, n)` and reused; the discrete-log tables are tiny.
#[derive(Debug, Clone)]
pub struct UnitCoordinates {
    p: u64,
    n: u64,
    tame_order: u64,
    wild_order: u64,
    precision: u64,
    tame_base: u64,
    tame_table: Vec<u64>,
}

impl UnitCoordinates {
    pub fn new(p: u64, n: u64) -> Self {
        let shape = LocalShape::new(Place::Finite(p), n);
        let v = valuation(n, p);
        let precision = if p == 2 { 1u64 << (v + 2) } else { p.pow(v + 1) };
        let mut tame_table = Vec::new();
        let mut tame_base = 1;
        if p != 2 && shape.tame_order == 2 {
            tame_base = p - 1;
        } else if p != 2 && shape.tame_order > 2 {
            let h = pow_mod(primitive_root(p), (p - 1) / shape.tame_order, p);
            tame_base = h;
            let mut x = 1;
            for _ in 0..shape.tame_order {
                tame_table.push(x);
                x = mul_mod(x, h, p);
            }
        }
        UnitCoordinates {
            p,
            n,
            tame_order: shape.tame_order,
            wild_order: shape.wild_order,
            precision,
            tame_base,
            tame_table,
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Residues modulo this value determine the coordinates.
    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn tame_order(&self) -> u64 {
        self.tame_order
    }

    pub fn wild_order(&self) -> u64 {
        self.wild_order
    }

    /// `(tame, wild)` coordinates of a `p`-adic unit given by an integer
    /// prime to `p`.
    pub fn coords(&self, u: i128) -> (u64, u64) {
        let m = self.precision as i128;
        let u = u.rem_euclid(m) as u64;
        debug_assert!(u % self.p != 0, "not a unit");
        if self.p == 2 {
            let negative = u % 4 == 3;
            let tame = if self.tame_order == 2 && negative { 1 } else { 0 };
            let one_unit = if negative { self.precision - u } else { u };
            let wild = self.one_unit_log(one_unit, 5);
            return (tame, wild);
        }
        let tame = if self.tame_order == 2 {
            u64::from(jacobi(u % self.p, self.p) == -1)
        } else if self.tame_order > 1 {
            let val = pow_mod(u % self.p, (self.p - 1) / self.tame_order, self.p);
            self.tame_table
                .iter()
                .position(|&x| x == val)
                .expect("tame table covers the quotient") as u64
        } else {
            0
        };
        let wild = if self.wild_order > 1 {
            let e = self.one_unit_log(pow_mod(u, self.p - 1, self.precision), 1 + self.p);
            let inv = inv_mod((self.p - 1) % self.wild_order, self.wild_order).expect("p-1 is prime to p");
            e * inv % self.wild_order
        } else {
            0
        };
        (tame, wild)
    }

    /// Exponent `e mod wild_order` with `base^e = x` in the 1-units modulo precision.
    fn one_unit_log(&self, x: u64, base: u64) -> u64 {
        if self.wild_order == 1 {
            return 0;
        }
        let mut acc = 1u64;
        for e in 0..self.wild_order {
            if acc == x % self.precision {
                return e;
            }
            acc = mul_mod(acc, base, self.precision);
        }
        unreachable!("{x} is not a 1-unit modulo {}", self.precision)
    }

    /// Value in `Z/n` of the character with unit coordinates `(tame, wild)`
    /// on the unit `u`.
    pub fn evaluate(&self, tame: u64, wild: u64, u: i128) -> u64 {
        let (a, b) = self.coords(u);
        let n = self.n;
        let t = (tame % self.tame_order) * a % self.tame_order * (n / self.tame_order);
        let w = (wild % self.wild_order) * b % self.wild_order * (n / self.wild_order);
        (t + w) % n
    }

    /// The element of order `tame_order` mod `p` whose discrete log is 1.
    pub fn tame_generator(&self) -> u64 {
        self.tame_base
    }
}

/// The class of a nonzero rational in `Q_v^*/(Q_v^*)^n`.
pub fn restrict_rational(a: Ratio<i64>, place: Place, n: u64) -> Result<LocalKummerClass, LocalError> {
    if n < 2 {
        return Err(LocalError::BadModulus(n));
    }
    if *a.numer() == 0 {
        return Err(LocalError::ZeroRational);
    }
    let (num, den) = (*a.numer() as i128, *a.denom() as i128);
    match place {
        Place::Infinite => {
            let negative = (num < 0) != (den < 0);
            let sign = if negative && n % 2 == 0 { 1 } else { 0 };
            Ok(LocalKummerClass::new(place, n, [0, sign, 0]))
        }
        Place::Finite(p) => {
            let (vn, un) = split_valuation(num, p);
            let (vd, ud) = split_valuation(den, p);
            let v = (vn as i64 - vd as i64).rem_euclid(n as i64) as u64;
            let uc = UnitCoordinates::new(p, n);
            let m = uc.precision() as i128;
            let ud_inv = inv_mod(ud.rem_euclid(m) as u64, m as u64).expect("unit") as i128;
            let unit = (un.rem_euclid(m) * ud_inv) % m;
            let (t, w) = uc.coords(unit);
            Ok(LocalKummerClass::new(place, n, [v, t, w]))
        }
    }
}

fn split_valuation(mut x: i128, p: u64) -> (u32, i128) {
    let p = p as i128;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    (v, x)
}
