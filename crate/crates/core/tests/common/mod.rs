//! Independent counting oracles. None of these call into the library.

#![allow(dead_code)]

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let (mut r, mut b) = (1u128, b as u128 % m);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

/// Smallest prime factor of every integer below `limit`.
pub fn spf_sieve(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit];
    for i in 2..limit {
        if spf[i] == 0 {
            let mut j = i;
            while j < limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn squarefree_sieve(limit: usize) -> Vec<bool> {
    let mut sf = vec![true; limit];
    let mut d = 2;
    while d * d < limit {
        let mut j = d * d;
        while j < limit {
            sf[j] = false;
            j += d * d;
        }
        d += 1;
    }
    sf
}

/// Cumulative counts of `|D| < X` over a sorted list of absolute values.
fn cumulative(mut values: Vec<u64>, grid: &[u64]) -> Vec<u64> {
    values.sort_unstable();
    grid.iter().map(|&x| values.partition_point(|&v| v < x) as u64).collect()
}

/// `#{D fundamental or D = 1 : |D| < X}`.
pub fn fundamental_discriminants(grid: &[u64]) -> Vec<u64> {
    let top = *grid.last().unwrap() as usize;
    let sf = squarefree_sieve(top);
    let mut abs = Vec::new();
    for m in 1..top {
        if !sf[m] {
            continue;
        }
        for d in [m as i64, -(m as i64)] {
            let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
            if disc.unsigned_abs() < top as u64 {
                abs.push(disc.unsigned_abs());
            }
        }
    }
    cumulative(abs, grid)
}

/// Cubic characters ordered by the square of the conductor. Conductors are
/// `9^e q_1 ... q_r` with `e in {0,1}` and distinct `q_i = 1 mod 3`; each
/// carries `2^{e + r}` characters.
pub fn cyclic_cubic_characters(grid: &[u64]) -> Vec<u64> {
    let top = *grid.last().unwrap();
    let fmax = (1..).take_while(|f: &u64| f * f < top).last().unwrap_or(0) as usize + 1;
    let spf = spf_sieve(fmax.max(2));
    let mut weights = vec![1u64];
    for f in 2..fmax {
        let mut m = f;
        let mut chars = 1u64;
        let mut ok = true;
        while m > 1 {
            let p = spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            match (p, e) {
                (3, 2) => chars *= 2,
                (q, 1) if q % 3 == 1 => chars *= 2,
                _ => ok = false,
            }
        }
        if ok {
            weights.extend(std::iter::repeat_n((f * f) as u64, chars as usize));
        }
    }
    cumulative(weights, grid)
}

/// Odd squarefree `m` with `D = +-m = 1 mod 4` such that `D/p` is a square
/// mod `p` for every `p | m`, plus `m = 1`.
pub fn d1mod4_counts(grid: &[u64]) -> Vec<u64> {
    let top = *grid.last().unwrap() as usize;
    let spf = spf_sieve(top.max(2));
    let mut found = vec![1u64];
    'm: for m in (3..top).step_by(2) {
        let d: i64 = if m % 4 == 1 { m as i64 } else { -(m as i64) };
        let mut rest = m;
        while rest > 1 {
            let p = spf[rest] as usize;
            rest /= p;
            if rest % p == 0 {
                continue 'm;
            }
            let cof = (d / p as i64).rem_euclid(p as i64) as u64;
            if pow_mod(cof, (p as u64 - 1) / 2, p as u64) != 1 {
                continue 'm;
            }
        }
        found.push(m as u64);
    }
    cumulative(found, grid)
}

/// `|(Z/p^k)^* / n-th powers|` by listing the image of `x -> x^n`.
pub fn unit_power_classes(p: u64, n: u64) -> u64 {
    let v = {
        let (mut v, mut m) = (0, n);
        while m % p == 0 {
            m /= p;
            v += 1;
        }
        v
    };
    let k = if v == 0 { 2 } else { 2 * v + 3 };
    let modulus = p.pow(k);
    let mut image = std::collections::HashSet::new();
    let mut units = 0;
    for x in 1..modulus {
        if x % p != 0 {
            units += 1;
            image.insert(pow_mod(x, n, modulus));
        }
    }
    units / image.len() as u64
}

/// `|mu_n(Q_p)|`. For odd `p` the roots of unity in `Z_p` are the
/// Teichmüller lifts, counted mod `p`; `Q_2` only has `+-1`.
pub fn local_roots_of_unity(p: u64, n: u64) -> u64 {
    if p == 2 {
        return if n % 2 == 0 { 2 } else { 1 };
    }
    (1..p).filter(|&x| pow_mod(x, n, p) == 1).count() as u64
}
