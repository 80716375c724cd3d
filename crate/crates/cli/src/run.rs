//! Command dispatch. Every command renders to a `String` so output is
//! identical whether it goes to stdout or a file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use h1count::asymptotics::{counting_function, fit_power_log, predicted_limit, AsymptoticsError, CountSample};
use h1count::conditions::{ConditionFamily, ConditionsError};
use h1count::euler::EulerError;
use h1count::local::Place;
use h1count::ordering::OrderingSpec;
use h1count::poisson::{greenberg_wiles_check, poisson_check, PoissonError, SelmerBox};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{BoxMode, BoxSpec, Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("resource cap: {0}")]
    Cap(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Cap(_) => EXIT_CAP,
        }
    }
}

impl From<crate::config::ConfigError> for RunError {
    fn from(e: crate::config::ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<AsymptoticsError> for RunError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::TooLarge { .. } => RunError::Cap(e.to_string()),
            e => RunError::Config(e.to_string()),
        }
    }
}

impl From<PoissonError> for RunError {
    fn from(e: PoissonError) -> Self {
        match e {
            PoissonError::Euler(EulerError::TooLarge { .. }) => RunError::Cap(e.to_string()),
            e => RunError::Config(e.to_string()),
        }
    }
}

impl From<ConditionsError> for RunError {
    fn from(e: ConditionsError) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Rendered output plus the exit code it should produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { code: EXIT_OK, output }
    }

    fn checked(passed: bool, output: String) -> Self {
        Outcome { code: if passed { EXIT_OK } else { EXIT_MISMATCH }, output }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let family = cfg.family()?;
    let ordering = cfg.ordering()?;
    match cfg.command {
        Command::Count => Ok(Outcome::ok(count(cfg, &family, &ordering)?.to_csv())),
        Command::Fit => {
            let sample = count(cfg, &family, &ordering)?;
            Ok(Outcome::ok(fit_text(&sample, &family, &ordering)?))
        }
        Command::Invariants => Ok(Outcome::ok(invariants_text(&family, &ordering)?)),
        Command::PoissonCheck => {
            let (exact, text) = poisson_text(cfg, &family, &ordering)?;
            Ok(Outcome::checked(exact, text))
        }
        Command::GwCheck => gw(cfg),
        Command::ExampleD1mod4 => example(cfg),
    }
}

fn count(cfg: &RunConfig, family: &ConditionFamily, ordering: &OrderingSpec) -> Result<CountSample, RunError> {
    let grid = cfg.grid().ok_or_else(|| RunError::Config("missing key `X`".into()))?;
    Ok(counting_function(family, ordering, &grid, cfg.max_x)?)
}

fn fit_text(sample: &CountSample, family: &ConditionFamily, ordering: &OrderingSpec) -> Result<String, RunError> {
    let fit = fit_power_log(sample)?;
    let mut s = String::new();
    writeln!(s, "family = {}", sample.family).unwrap();
    writeln!(s, "ordering = {}", sample.ordering).unwrap();
    writeln!(s, "n = {}", sample.n).unwrap();
    write!(s, "{fit}").unwrap();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    match (family.a_invariant(ordering), family.b_invariant(ordering)) {
        (Ok(a), Ok(b)) => {
            let beta = b - num_rational::BigRational::from_integer(1.into());
            let alpha = if a == 1 { "1".to_string() } else { format!("1/{a}") };
            writeln!(s, "predicted_alpha = {alpha}").unwrap();
            writeln!(s, "predicted_beta = {beta} ({:.4})", beta.to_f64().unwrap_or(f64::NAN)).unwrap();
        }
        _ => writeln!(s, "predicted_alpha = none").unwrap(),
    }
    Ok(s)
}

fn invariants_text(family: &ConditionFamily, ordering: &OrderingSpec) -> Result<String, RunError> {
    let mut s = String::new();
    writeln!(s, "family = {}", family.name()).unwrap();
    writeln!(s, "ordering = {}", ordering.name()).unwrap();
    writeln!(s, "n = {}", family.n()).unwrap();
    match family.a_invariant(ordering) {
        Ok(a) => {
            writeln!(s, "a = {a}").unwrap();
            writeln!(s, "b = {}", family.b_invariant(ordering)?).unwrap();
            writeln!(s, "t_prime = Z/{}", family.minimal_inertia_subgroup(ordering)?).unwrap();
            writeln!(s, "surjective_limit = {}", predicted_limit(family, ordering)?).unwrap();
        }
        Err(ConditionsError::NoRamifiedClasses) => writeln!(s, "a = none").unwrap(),
        Err(e) => return Err(e.into()),
    }
    writeln!(s, "class = {}", family.classify()).unwrap();
    Ok(s)
}

fn poisson_text(cfg: &RunConfig, family: &ConditionFamily, ordering: &OrderingSpec) -> Result<(bool, String), RunError> {
    let report = poisson_check(family, ordering, cfg.truncation, cfg.max_n)?;
    let mut s = String::new();
    writeln!(s, "# truncation = {}", report.truncation).unwrap();
    writeln!(s, "# dual_terms = {}", report.dual_terms).unwrap();
    writeln!(s, "# ratio = {}", report.ratio).unwrap();
    writeln!(s, "# mismatches = {}", report.mismatches.len()).unwrap();
    s.push_str("k,direct,dual,match\n");
    s.push_str(&report.to_table());
    Ok((report.is_exact(), s))
}

fn box_text(b: &BoxSpec) -> String {
    let parts: Vec<String> = b
        .conditions
        .iter()
        .map(|(v, gens)| {
            let g: Vec<String> = gens.iter().map(|c| format!("{}.{}.{}", c[0], c[1], c[2])).collect();
            format!("{v}:{}", g.join("+"))
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn check_box(n: u64, b: &BoxSpec) -> Result<h1count::poisson::GreenbergWilesReport, RunError> {
    let selmer = match b.mode {
        BoxMode::Generators => SelmerBox::from_generators(n, &b.conditions)?,
        BoxMode::Elements => SelmerBox::from_elements(n, &b.conditions)?,
    };
    Ok(greenberg_wiles_check(&selmer)?)
}

/// Boxes on `{2, 3, 5, 7, inf}` with two random generators at a random subset of places.
pub fn random_boxes(n: u64, count: u64, seed: u64) -> Vec<BoxSpec> {
    let places = [Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7), Place::Infinite];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut conditions = BTreeMap::new();
            for &v in &places {
                if rng.gen_bool(0.5) {
                    let mut gen = || [rng.gen_range(0..n), rng.gen_range(0..n * n), rng.gen_range(0..n * n)];
                    conditions.insert(v, vec![gen(), gen()]);
                }
            }
            BoxSpec { mode: BoxMode::Generators, conditions }
        })
        .collect()
}

fn gw(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut s = String::new();
    let mut all = true;
    if let Some(b) = &cfg.gw_box {
        let r = check_box(cfg.n, b)?;
        all &= r.holds();
        writeln!(s, "box = {}", box_text(b)).unwrap();
        write!(s, "{r}").unwrap();
    }
    if let Some(k) = cfg.random_boxes {
        if k > cfg.max_n {
            return Err(RunError::Cap(format!("random_boxes {k} exceeds max_N {}", cfg.max_n)));
        }
        let mut failures = 0;
        for b in random_boxes(cfg.n, k, cfg.seed) {
            let r = check_box(cfg.n, &b)?;
            if !r.holds() {
                failures += 1;
                writeln!(s, "failed box = {}", box_text(&b)).unwrap();
                write!(s, "{r}").unwrap();
            }
        }
        all &= failures == 0;
        writeln!(s, "random_boxes = {k}").unwrap();
        writeln!(s, "seed = {}", cfg.seed).unwrap();
        writeln!(s, "failures = {failures}").unwrap();
    }
    Ok(Outcome::checked(all, s))
}

fn example(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let family = ConditionFamily::builtin("d1mod4", 2)?;
    let ordering = OrderingSpec::disc_regular(2);
    let mut cfg = cfg.clone();
    cfg.x.get_or_insert(1_000_000);
    let sample = count(&cfg, &family, &ordering)?;
    let (exact, table) = poisson_text(&cfg, &family, &ordering)?;
    let mut s = String::new();
    s.push_str("# invariants\n");
    s.push_str(&invariants_text(&family, &ordering)?);
    s.push_str("\n# count\n");
    s.push_str(&sample.to_csv());
    s.push_str("\n# coefficients\n");
    for line in table.lines().take_while(|l| l.starts_with('#')) {
        writeln!(s, "{}", line.trim_start_matches("# ")).unwrap();
    }
    writeln!(s, "exact = {exact}").unwrap();
    s.push_str("\n# fit\n");
    match fit_text(&sample, &family, &ordering) {
        Ok(t) => s.push_str(&t),
        Err(e) => writeln!(s, "skipped = {e}").unwrap(),
    }
    Ok(Outcome::checked(exact, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn invariants_of_d1mod4() {
        let cfg = parse_config("n = 2 family = d1mod4 command = invariants").unwrap();
        let out = run(&cfg).unwrap();
        assert_eq!(out.code, 0);
        for line in ["a = 1\n", "b = 1/2\n", "t_prime = Z/2\n", "class = nonperiodic-eligible\n"] {
            assert!(out.output.contains(line), "{}", out.output);
        }
    }

    #[test]
    fn caps_map_to_exit_four() {
        let cfg = parse_config("n = 2 family = full command = count X = 1e6 max_X = 1000").unwrap();
        assert_eq!(run(&cfg).unwrap_err().exit_code(), EXIT_CAP);
        let cfg = parse_config("n = 2 family = full command = poisson-check N = 500 max_N = 100").unwrap();
        assert_eq!(run(&cfg).unwrap_err().exit_code(), EXIT_CAP);
    }

    #[test]
    fn random_boxes_are_seeded() {
        assert_eq!(random_boxes(3, 5, 9), random_boxes(3, 5, 9));
        let cfg = parse_config("n = 3 family = full command = gw-check random_boxes = 20 seed = 4").unwrap();
        let out = run(&cfg).unwrap();
        assert_eq!(out.code, 0, "{}", out.output);
        assert!(out.output.ends_with("failures = 0\n"));
    }

    #[test]
    fn count_csv() {
        let cfg = parse_config("n = 2 family = full command = count grid = [2, 11]").unwrap();
        assert_eq!(run(&cfg).unwrap().output, "X,N\n2,1\n11,7\n");
    }
}
