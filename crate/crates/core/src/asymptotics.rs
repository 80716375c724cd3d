//! Counting functions, log-power fits and surjectivity proportions.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::arith::divisors;
use crate::conditions::{ConditionFamily, ConditionsError};
use crate::global::{surjective_count, Enumeration, GlobalError, GridCounts};
use crate::ordering::OrderingSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsymptoticsError {
    #[error("grid must be nonempty and strictly ascending")]
    BadGrid,
    #[error("grid bound {requested} exceeds the cap {cap}")]
    TooLarge { requested: u64, cap: u64 },
    #[error("fit needs at least 8 grid points spanning 3 decades")]
    TooFewPoints,
    #[error("sample is degenerate: N is constant or zero")]
    Degenerate,
    #[error(transparent)]
    Global(#[from] GlobalError),
    #[error(transparent)]
    Conditions(#[from] ConditionsError),
}

/// `N(X)`, the number of classes with weight `< X`, on a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSample {
    pub family: String,
    pub ordering: String,
    pub n: u64,
    pub grid: Vec<u64>,
    pub counts: Vec<u64>,
}

impl CountSample {
    /// Lines `X,N` under a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("X,N\n");
        for (x, c) in self.grid.iter().zip(&self.counts) {
            s.push_str(&format!("{x},{c}\n"));
        }
        s
    }

    pub fn from_csv(family: &str, ordering: &str, n: u64, text: &str) -> Option<Self> {
        let mut grid = Vec::new();
        let mut counts = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && *l != "X,N") {
            let (x, c) = line.split_once(',')?;
            grid.push(x.trim().parse().ok()?);
            counts.push(c.trim().parse().ok()?);
        }
        Some(CountSample { family: family.into(), ordering: ordering.into(), n, grid, counts })
    }
}

/// `points` integers spaced geometrically from `start` to `end` inclusive,
/// deduplicated.
pub fn geometric_grid(start: u64, end: u64, points: usize) -> Vec<u64> {
    if points <= 1 || end <= start {
        return vec![end.max(start)];
    }
    let (a, b) = ((start as f64).ln(), (end as f64).ln());
    let mut g: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    g[points - 1] = end;
    g.dedup();
    g
}

/// `per_decade` geometric steps per factor of ten from `start` to `end`.
pub fn decade_grid(start: u64, end: u64, per_decade: usize) -> Vec<u64> {
    let decades = (end as f64 / start as f64).log10();
    geometric_grid(start, end, 1 + (decades * per_decade as f64).round() as usize)
}

fn check_grid(grid: &[u64], cap: u64) -> Result<(), AsymptoticsError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AsymptoticsError::BadGrid);
    }
    let top = *grid.last().expect("nonempty");
    if top > cap {
        return Err(AsymptoticsError::TooLarge { requested: top, cap });
    }
    Ok(())
}

fn grid_counts(family: &ConditionFamily, ordering: &OrderingSpec, grid: &[u64], cap: u64) -> Result<GridCounts, AsymptoticsError> {
    check_grid(grid, cap)?;
    let e = Enumeration::new(family, ordering, *grid.last().expect("nonempty"))?;
    let n = family.n();
    Ok(e.run(&|| GridCounts::new(n, grid.to_vec())))
}

pub fn counting_function(
    family: &ConditionFamily,
    ordering: &OrderingSpec,
    grid: &[u64],
    cap: u64,
) -> Result<CountSample, AsymptoticsError> {
    let counts = grid_counts(family, ordering, grid, cap)?;
    Ok(CountSample {
        family: family.name().to_string(),
        ordering: ordering.name().to_string(),
        n: family.n(),
        grid: grid.to_vec(),
        counts: counts.totals(),
    })
}

/// `log N ~ log c + alpha log X + beta log log X`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLogFit {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    /// Root mean square of the residuals in `log N`.
    pub residual: f64,
    pub points: usize,
}

impl fmt::Display for PowerLogFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha = {:.6}", self.alpha)?;
        writeln!(f, "beta = {:.6}", self.beta)?;
        writeln!(f, "c = {:.6}", self.c)?;
        writeln!(f, "residual = {:.3e}", self.residual)?;
        writeln!(f, "points = {}", self.points)
    }
}

/// Least squares on the top 60% of the grid.
pub fn fit_power_log(sample: &CountSample) -> Result<PowerLogFit, AsymptoticsError> {
    let len = sample.grid.len().min(sample.counts.len());
    if len < 8 || (sample.grid[len - 1] as f64) < 1000.0 * sample.grid[0] as f64 {
        return Err(AsymptoticsError::TooFewPoints);
    }
    if sample.counts[..len].contains(&0) || sample.counts[..len].iter().all(|&c| c == sample.counts[0]) {
        return Err(AsymptoticsError::Degenerate);
    }
    let keep = (len * 3).div_ceil(5);
    let rows: Vec<(f64, f64)> = (len - keep..len).map(|i| (sample.grid[i] as f64, sample.counts[i] as f64)).collect();
    let a = DMatrix::from_fn(keep, 3, |i, j| match j {
        0 => 1.0,
        1 => rows[i].0.ln(),
        _ => rows[i].0.ln().ln(),
    });
    let y = DVector::from_iterator(keep, rows.iter().map(|r| r.1.ln()));
    let coef = a.clone().svd(true, true).solve(&y, 1e-12).map_err(|_| AsymptoticsError::Degenerate)?;
    let resid = &a * &coef - &y;
    Ok(PowerLogFit {
        alpha: coef[1],
        beta: coef[2],
        c: coef[0].exp(),
        residual: (resid.norm_squared() / keep as f64).sqrt(),
        points: keep,
    })
}

/// Qualitative limit of the surjective proportion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictedLimit {
    /// Minimal-weight inertia images generate `Z/n`.
    One,
    /// All generic inertia images generate `Z/n`.
    Positive,
    Undetermined,
}

impl fmt::Display for PredictedLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictedLimit::One => "one",
            PredictedLimit::Positive => "positive",
            PredictedLimit::Undetermined => "undetermined",
        })
    }
}

pub fn predicted_limit(family: &ConditionFamily, ordering: &OrderingSpec) -> Result<PredictedLimit, AsymptoticsError> {
    let n = family.n();
    Ok(if family.minimal_inertia_subgroup(ordering)? == n {
        PredictedLimit::One
    } else if family.generic_inertia_subgroup(ordering)? == n {
        PredictedLimit::Positive
    } else {
        PredictedLimit::Undetermined
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectiveProportion {
    pub grid: Vec<u64>,
    pub totals: Vec<u64>,
    /// Surjective classes found by filtering on the order.
    pub direct: Vec<u64>,
    /// Surjective classes by Möbius inversion over subgroup counts.
    pub mobius: Vec<i64>,
    pub predicted: PredictedLimit,
    pub t_prime: u64,
}

impl SurjectiveProportion {
    pub fn direct_ratios(&self) -> Vec<BigRational> {
        self.direct.iter().zip(&self.totals).map(|(&a, &b)| ratio(a as i64, b)).collect()
    }

    pub fn mobius_ratios(&self) -> Vec<BigRational> {
        self.mobius.iter().zip(&self.totals).map(|(&a, &b)| ratio(a, b)).collect()
    }

    pub fn agree(&self) -> bool {
        self.direct_ratios() == self.mobius_ratios()
    }

    /// The ratio at the last grid point.
    pub fn ratio(&self) -> Option<BigRational> {
        self.direct_ratios().pop()
    }
}

fn ratio(a: i64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b.max(1)))
}

pub fn surjective_proportion(
    family: &ConditionFamily,
    ordering: &OrderingSpec,
    grid: &[u64],
    cap: u64,
) -> Result<SurjectiveProportion, AsymptoticsError> {
    let n = family.n();
    let counts = grid_counts(family, ordering, grid, cap)?;
    let inside: BTreeMap<u64, Vec<u64>> = divisors(n).into_iter().map(|d| (d, counts.inside(d))).collect();
    let mut mobius = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let at: BTreeMap<u64, u64> = inside.iter().map(|(&d, v)| (d, v[i])).collect();
        mobius.push(surjective_count(n, &at)?);
    }
    Ok(SurjectiveProportion {
        grid: grid.to_vec(),
        totals: counts.totals(),
        direct: counts.of_order(n),
        mobius,
        predicted: predicted_limit(family, ordering)?,
        t_prime: family.minimal_inertia_subgroup(ordering)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let d = OrderingSpec::disc_regular(2);
        let full = ConditionFamily::builtin("full", 2).unwrap();
        let s = counting_function(&full, &d, &[2, 11], 100).unwrap();
        assert_eq!(s.counts, [1, 7]);
        assert_eq!(s.to_csv(), "X,N\n2,1\n11,7\n");
        assert_eq!(CountSample::from_csv("full", "disc", 2, &s.to_csv()).unwrap(), s);
        let unr = ConditionFamily::builtin("unramified", 2).unwrap();
        assert_eq!(counting_function(&unr, &d, &[2, 1000], 10_000).unwrap().counts, [1, 1]);
        assert_eq!(counting_function(&full, &d, &[11, 2], 100), Err(AsymptoticsError::BadGrid));
        assert!(matches!(counting_function(&full, &d, &[2, 1000], 100), Err(AsymptoticsError::TooLarge { .. })));
    }

    #[test]
    fn grid_shape() {
        let g = geometric_grid(10, 10_000, 4);
        assert_eq!(g, [10, 100, 1000, 10_000]);
        assert_eq!(decade_grid(10, 10_000, 1), g);
        assert_eq!(decade_grid(1000, 10_000_000, 10).len(), 41);
    }

    #[test]
    fn fit_recovers_synthetic_law() {
        let grid = geometric_grid(1000, 10_000_000, 20);
        let counts = grid.iter().map(|&x| (3.0 * (x as f64).powf(0.5) * (x as f64).ln().powf(-0.5)).round() as u64).collect();
        let s = CountSample { family: "x".into(), ordering: "disc".into(), n: 2, grid, counts };
        let f = fit_power_log(&s).unwrap();
        assert!((f.alpha - 0.5).abs() < 0.01, "{f}");
        assert!((f.beta + 0.5).abs() < 0.1, "{f}");
        let flat = CountSample { counts: vec![1; s.grid.len()], ..s.clone() };
        assert_eq!(fit_power_log(&flat), Err(AsymptoticsError::Degenerate));
        let short = CountSample { grid: s.grid[..5].to_vec(), counts: s.counts[..5].to_vec(), ..s };
        assert_eq!(fit_power_log(&short), Err(AsymptoticsError::TooFewPoints));
    }

    #[test]
    fn surjective_examples() {
        let full2 = ConditionFamily::builtin("full", 2).unwrap();
        let p = surjective_proportion(&full2, &OrderingSpec::disc_regular(2), &[11, 1000], 10_000).unwrap();
        assert!(p.agree());
        assert_eq!(p.direct[0], 6);
        assert_eq!(p.predicted, PredictedLimit::One);

        let full4 = ConditionFamily::builtin("full", 4).unwrap();
        let d4 = OrderingSpec::disc_regular(4);
        let p = surjective_proportion(&full4, &d4, &[1000, 100_000], 1_000_000).unwrap();
        assert!(p.agree());
        assert_eq!(p.t_prime, 2);
        assert_eq!(p.predicted, PredictedLimit::Positive);
        let r = OrderingSpec::radical(4);
        assert_eq!(predicted_limit(&full4, &r), Ok(PredictedLimit::One));

        let o2 = ConditionFamily::builtin("order2-ramification", 4).unwrap();
        assert_eq!(predicted_limit(&o2, &r), Ok(PredictedLimit::Undetermined));
    }
}
