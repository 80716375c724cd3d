//! The run configuration and its text grammar.
//!
//! ```text
//! # comment
//! n = 2  family = full  ordering = disc   # several pairs per line
//! command = count  X = 1e6  grid = [10, 100, 1000]
//!
//! [family]                     # inline family instead of a built-in
//! name = mine  modulus = 4  default = unramified
//! override = [1:all]  exceptional = [2:unramified, inf:all]
//!
//! [ordering]                   # with ordering = custom
//! modulus = 4  entry = [1:2:1, 3:2:2]
//!
//! [box]                        # gw-check conditions
//! mode = generators  at = [3:1.0.0+0.1.0, inf:0.1.0]
//! ```
//!
//! Integers accept `1e6` and `_` separators. Subsets are `all`,
//! `unramified`, `zero`, `inertia-divides-D` or explicit coordinates
//! `f.t.w;f.t.w`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use h1count::asymptotics::decade_grid;
use h1count::conditions::{ConditionFamily, FrobenianRule, Subset};
use h1count::local::Place;
use h1count::ordering::OrderingSpec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 0 when the problem is a missing key rather than a specific line.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Count,
    PoissonCheck,
    GwCheck,
    Invariants,
    ExampleD1mod4,
    Fit,
}

impl Command {
    const ALL: [(Command, &'static str); 6] = [
        (Command::Count, "count"),
        (Command::PoissonCheck, "poisson-check"),
        (Command::GwCheck, "gw-check"),
        (Command::Invariants, "invariants"),
        (Command::ExampleD1mod4, "example-d1mod4"),
        (Command::Fit, "fit"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(c, _)| *c == self).map(|(_, s)| *s).expect("listed")
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, name)| *name == s).map(|(c, _)| *c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingChoice {
    Disc,
    Radical,
    Custom { modulus: u64, entries: BTreeMap<(u64, u64), u32> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlineFamily {
    pub name: String,
    pub modulus: u64,
    pub default: Subset,
    pub overrides: BTreeMap<u64, Subset>,
    pub exceptional: BTreeMap<Place, Subset>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyChoice {
    Builtin(String),
    Inline(InlineFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxMode {
    Generators,
    Elements,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSpec {
    pub mode: BoxMode,
    pub conditions: BTreeMap<Place, Vec<[u64; 3]>>,
}

pub const DEFAULT_MAX_N: u64 = 100_000;
pub const DEFAULT_MAX_X: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub n: u64,
    pub family: FamilyChoice,
    pub ordering: OrderingChoice,
    pub command: Command,
    /// Largest counting bound.
    pub x: Option<u64>,
    /// Explicit grid; otherwise a decade grid up to `x`.
    pub grid: Option<Vec<u64>>,
    pub grid_start: u64,
    pub per_decade: usize,
    /// Dirichlet coefficient truncation.
    pub truncation: u64,
    pub seed: u64,
    pub random_boxes: Option<u64>,
    pub gw_box: Option<BoxSpec>,
    pub max_n: u64,
    pub max_x: u64,
}

impl RunConfig {
    pub fn family(&self) -> Result<ConditionFamily, ConfigError> {
        build_family(self.n, &self.family).or_else(|m| err(0, m))
    }

    pub fn ordering(&self) -> Result<OrderingSpec, ConfigError> {
        build_ordering(self.n, &self.ordering).or_else(|m| err(0, m))
    }

    /// The counting grid: explicit, or ten-per-decade style from `grid_start` to `X`.
    pub fn grid(&self) -> Option<Vec<u64>> {
        if let Some(g) = &self.grid {
            return Some(g.clone());
        }
        let x = self.x?;
        Some(if x <= self.grid_start { vec![x] } else { decade_grid(self.grid_start, x, self.per_decade) })
    }

    /// Canonical text; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut top = vec![format!("n = {}", self.n)];
        if let FamilyChoice::Builtin(name) = &self.family {
            top.push(format!("family = {name}"));
        }
        top.push(format!(
            "ordering = {}",
            match self.ordering {
                OrderingChoice::Disc => "disc",
                OrderingChoice::Radical => "radical",
                OrderingChoice::Custom { .. } => "custom",
            }
        ));
        top.push(format!("command = {}", self.command.name()));
        if let Some(x) = self.x {
            top.push(format!("X = {x}"));
        }
        if let Some(g) = &self.grid {
            top.push(format!("grid = {}", list(g.iter().map(u64::to_string))));
        }
        top.push(format!("grid_start = {}", self.grid_start));
        top.push(format!("per_decade = {}", self.per_decade));
        top.push(format!("N = {}", self.truncation));
        top.push(format!("seed = {}", self.seed));
        if let Some(k) = self.random_boxes {
            top.push(format!("random_boxes = {k}"));
        }
        top.push(format!("max_N = {}", self.max_n));
        top.push(format!("max_X = {}", self.max_x));
        let mut out = top.join("\n") + "\n";
        if let FamilyChoice::Inline(f) = &self.family {
            out.push_str("\n[family]\n");
            out.push_str(&format!("name = {}\nmodulus = {}\ndefault = {}\n", f.name, f.modulus, subset_text(&f.default)));
            out.push_str(&format!(
                "override = {}\n",
                list(f.overrides.iter().map(|(c, s)| format!("{c}:{}", subset_text(s))))
            ));
            out.push_str(&format!(
                "exceptional = {}\n",
                list(f.exceptional.iter().map(|(v, s)| format!("{v}:{}", subset_text(s))))
            ));
        }
        if let OrderingChoice::Custom { modulus, entries } = &self.ordering {
            out.push_str("\n[ordering]\n");
            out.push_str(&format!("modulus = {modulus}\n"));
            out.push_str(&format!("entry = {}\n", list(entries.iter().map(|((c, o), e)| format!("{c}:{o}:{e}")))));
        }
        if let Some(b) = &self.gw_box {
            out.push_str("\n[box]\n");
            out.push_str(&format!("mode = {}\n", if b.mode == BoxMode::Generators { "generators" } else { "elements" }));
            out.push_str(&format!(
                "at = {}\n",
                list(b.conditions.iter().map(|(v, gens)| {
                    let gens: Vec<String> = gens.iter().map(coord_text).collect();
                    format!("{v}:{}", gens.join("+"))
                }))
            ));
        }
        out
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn list(items: impl Iterator<Item = String>) -> String {
    format!("[{}]", items.collect::<Vec<_>>().join(", "))
}

fn coord_text(c: &[u64; 3]) -> String {
    format!("{}.{}.{}", c[0], c[1], c[2])
}

pub fn subset_text(s: &Subset) -> String {
    match s {
        Subset::All => "all".into(),
        Subset::Unramified => "unramified".into(),
        Subset::Zero => "zero".into(),
        Subset::InertiaOrderDivides(d) => format!("inertia-divides-{d}"),
        Subset::Explicit(set) => set.iter().map(coord_text).collect::<Vec<_>>().join(";"),
    }
}

fn build_family(n: u64, choice: &FamilyChoice) -> Result<ConditionFamily, String> {
    match choice {
        FamilyChoice::Builtin(name) => ConditionFamily::builtin(name, n).map_err(|e| e.to_string()),
        FamilyChoice::Inline(f) => {
            let rule = FrobenianRule { modulus: f.modulus, default: f.default.clone(), overrides: f.overrides.clone() };
            ConditionFamily::new(f.name.clone(), n, rule, f.exceptional.clone()).map_err(|e| e.to_string())
        }
    }
}

fn build_ordering(n: u64, choice: &OrderingChoice) -> Result<OrderingSpec, String> {
    match choice {
        OrderingChoice::Disc => Ok(OrderingSpec::disc_regular(n)),
        OrderingChoice::Radical => Ok(OrderingSpec::radical(n)),
        OrderingChoice::Custom { modulus, entries } => {
            OrderingSpec::custom(n, *modulus, entries.clone()).map_err(|e| e.to_string())
        }
    }
}

fn parse_int(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().ok()?;
        let e: u32 = e.parse().ok()?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m));
    }
    s.parse().ok()
}

fn parse_list(s: &str) -> Option<Vec<String>> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    Some(inner.split([',', ' ']).map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect())
}

fn parse_place(s: &str) -> Option<Place> {
    if s == "inf" {
        return Some(Place::Infinite);
    }
    Place::prime(parse_int(s)?).ok()
}

fn parse_coord(s: &str) -> Option<[u64; 3]> {
    let parts: Vec<u64> = s.split('.').map(parse_int).collect::<Option<_>>()?;
    parts.try_into().ok()
}

pub fn parse_subset(s: &str) -> Option<Subset> {
    Some(match s {
        "all" => Subset::All,
        "unramified" => Subset::Unramified,
        "zero" => Subset::Zero,
        _ => {
            if let Some(d) = s.strip_prefix("inertia-divides-") {
                Subset::InertiaOrderDivides(parse_int(d).filter(|&d| d > 0)?)
            } else {
                let set: BTreeSet<[u64; 3]> = s.split(';').map(parse_coord).collect::<Option<_>>()?;
                Subset::Explicit(set)
            }
        }
    })
}

/// Splits a line into `key = value` pairs; values may be bracketed lists.
fn pairs(line: &str) -> Result<Vec<(String, String)>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i == chars.len() {
            return Ok(out);
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '=' {
            i += 1;
        }
        let key: String = chars[start..i].iter().collect();
        skip_ws(&mut i);
        if i == chars.len() || chars[i] != '=' {
            return Err(format!("expected `=` after `{key}`"));
        }
        i += 1;
        skip_ws(&mut i);
        let start = i;
        if i < chars.len() && chars[i] == '[' {
            while i < chars.len() && chars[i] != ']' {
                i += 1;
            }
            if i == chars.len() {
                return Err(format!("unterminated list for `{key}`"));
            }
            i += 1;
        } else {
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
        }
        let value: String = chars[start..i].iter().collect();
        if key.is_empty() || value.is_empty() {
            return Err("empty key or value".into());
        }
        out.push((key, value));
    }
}

const TOP_KEYS: &[&str] = &[
    "n", "family", "ordering", "command", "X", "grid", "grid_start", "per_decade", "N", "seed", "random_boxes", "max_N",
    "max_X",
];
const SECTION_KEYS: &[(&str, &[&str])] = &[
    ("family", &["name", "modulus", "default", "override", "exceptional"]),
    ("ordering", &["modulus", "entry"]),
    ("box", &["mode", "at"]),
];

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    // (section, key) -> (line, value)
    let mut entries: BTreeMap<(String, String), (usize, String)> = BTreeMap::new();
    let mut sections: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTION_KEYS.iter().any(|(s, _)| *s == name) {
                return err(line_no, format!("unknown section [{name}]"));
            }
            if sections.insert(name.clone(), line_no).is_some() {
                return err(line_no, format!("duplicate section [{name}]"));
            }
            section = name;
            continue;
        }
        for (key, value) in pairs(line).or_else(|m| err(line_no, m))? {
            let allowed = if section.is_empty() {
                TOP_KEYS
            } else {
                SECTION_KEYS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).expect("checked")
            };
            if !allowed.contains(&key.as_str()) {
                let place = if section.is_empty() { String::new() } else { format!(" in [{section}]") };
                return err(line_no, format!("unknown key `{key}`{place}"));
            }
            if entries.insert((section.clone(), key.clone()), (line_no, value)).is_some() {
                return err(line_no, format!("duplicate key `{key}`"));
            }
        }
    }
    let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string())).cloned();
    let int = |sec: &str, key: &str| -> Result<Option<(usize, u64)>, ConfigError> {
        match get(sec, key) {
            None => Ok(None),
            Some((l, v)) => parse_int(&v).map(|x| Some((l, x))).ok_or(ConfigError {
                line: l,
                message: format!("`{key}` must be an integer, got `{v}`"),
            }),
        }
    };
    let required = |key: &str| ConfigError { line: 0, message: format!("missing key `{key}`") };

    let (n_line, n) = int("", "n")?.ok_or_else(|| required("n"))?;
    if !(2..=64).contains(&n) {
        return err(n_line, format!("n must be in 2..=64, got {n}"));
    }

    let (cmd_line, cmd) = get("", "command").ok_or_else(|| required("command"))?;
    let command = Command::parse(&cmd).ok_or(ConfigError { line: cmd_line, message: format!("unknown command `{cmd}`") })?;

    let family = if let Some(&sec_line) = sections.get("family") {
        if let Some((l, _)) = get("", "family") {
            return err(l, "`family` conflicts with the [family] section");
        }
        let name = get("family", "name").map_or("inline".to_string(), |(_, v)| v);
        let modulus = int("family", "modulus")?.map_or(1, |(_, m)| m);
        let (dl, dv) = get("family", "default").ok_or(ConfigError { line: sec_line, message: "[family] needs `default`".into() })?;
        let default = parse_subset(&dv).ok_or(ConfigError { line: dl, message: format!("bad subset `{dv}`") })?;
        let mut overrides = BTreeMap::new();
        if let Some((l, v)) = get("family", "override") {
            for item in parse_list(&v).ok_or(ConfigError { line: l, message: "`override` must be a list".into() })? {
                let bad = || ConfigError { line: l, message: format!("bad override `{item}`") };
                let (c, s) = item.split_once(':').ok_or_else(bad)?;
                overrides.insert(parse_int(c).ok_or_else(bad)?, parse_subset(s).ok_or_else(bad)?);
            }
        }
        let mut exceptional = BTreeMap::new();
        if let Some((l, v)) = get("family", "exceptional") {
            for item in parse_list(&v).ok_or(ConfigError { line: l, message: "`exceptional` must be a list".into() })? {
                let bad = || ConfigError { line: l, message: format!("bad exceptional entry `{item}`") };
                let (p, s) = item.split_once(':').ok_or_else(bad)?;
                exceptional.insert(parse_place(p).ok_or_else(bad)?, parse_subset(s).ok_or_else(bad)?);
            }
        }
        let f = FamilyChoice::Inline(InlineFamily { name, modulus, default, overrides, exceptional });
        build_family(n, &f).or_else(|m| err(sec_line, m))?;
        f
    } else {
        let (l, name) = get("", "family").ok_or_else(|| required("family"))?;
        let f = FamilyChoice::Builtin(name);
        build_family(n, &f).or_else(|m| err(l, m))?;
        f
    };

    let (ord_line, ord) = get("", "ordering").unwrap_or((0, "disc".into()));
    let ordering = match ord.as_str() {
        "disc" => OrderingChoice::Disc,
        "radical" => OrderingChoice::Radical,
        "custom" => {
            let sec_line = *sections.get("ordering").ok_or(ConfigError {
                line: ord_line,
                message: "ordering = custom needs an [ordering] section".into(),
            })?;
            let modulus = int("ordering", "modulus")?.map_or(1, |(_, m)| m);
            let mut table = BTreeMap::new();
            if let Some((l, v)) = get("ordering", "entry") {
                for item in parse_list(&v).ok_or(ConfigError { line: l, message: "`entry` must be a list".into() })? {
                    let parts: Option<Vec<u64>> = item.split(':').map(parse_int).collect();
                    match parts.as_deref() {
                        Some(&[c, o, e]) if e <= u32::MAX as u64 => {
                            table.insert((c, o), e as u32);
                        }
                        _ => return err(l, format!("bad entry `{item}`, expected class:order:exponent")),
                    }
                }
            }
            let o = OrderingChoice::Custom { modulus, entries: table };
            build_ordering(n, &o).or_else(|m| err(sec_line, m))?;
            o
        }
        other => return err(ord_line, format!("unknown ordering `{other}`")),
    };
    if !matches!(ordering, OrderingChoice::Custom { .. }) {
        if let Some(&l) = sections.get("ordering") {
            return err(l, "[ordering] section requires ordering = custom");
        }
    }

    let grid = match get("", "grid") {
        None => None,
        Some((l, v)) => {
            let items = parse_list(&v).ok_or(ConfigError { line: l, message: "`grid` must be a list".into() })?;
            let g: Vec<u64> = items
                .iter()
                .map(|s| parse_int(s))
                .collect::<Option<_>>()
                .ok_or(ConfigError { line: l, message: "grid entries must be integers".into() })?;
            if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) {
                return err(l, "grid must be nonempty and strictly ascending");
            }
            Some(g)
        }
    };

    let gw_box = match sections.get("box") {
        None => None,
        Some(_) => {
            let mode = match get("box", "mode") {
                None => BoxMode::Generators,
                Some((_, v)) if v == "generators" => BoxMode::Generators,
                Some((_, v)) if v == "elements" => BoxMode::Elements,
                Some((l, v)) => return err(l, format!("unknown box mode `{v}`")),
            };
            let mut conditions = BTreeMap::new();
            if let Some((l, v)) = get("box", "at") {
                for item in parse_list(&v).ok_or(ConfigError { line: l, message: "`at` must be a list".into() })? {
                    let bad = || ConfigError { line: l, message: format!("bad box entry `{item}`") };
                    let (p, gens) = item.split_once(':').ok_or_else(bad)?;
                    let gens: Vec<[u64; 3]> = gens.split('+').map(parse_coord).collect::<Option<_>>().ok_or_else(bad)?;
                    conditions.insert(parse_place(p).ok_or_else(bad)?, gens);
                }
            }
            Some(BoxSpec { mode, conditions })
        }
    };

    let x = int("", "X")?.map(|(_, x)| x);
    let per_decade = int("", "per_decade")?.map_or(10, |(_, x)| x as usize);
    if per_decade == 0 {
        return err(int("", "per_decade")?.map_or(0, |(l, _)| l), "per_decade must be positive");
    }
    let cfg = RunConfig {
        n,
        family,
        ordering,
        command,
        x,
        grid,
        grid_start: int("", "grid_start")?.map_or(1000, |(_, x)| x.max(2)),
        per_decade,
        truncation: int("", "N")?.map_or(1000, |(_, x)| x),
        seed: int("", "seed")?.map_or(0, |(_, x)| x),
        random_boxes: int("", "random_boxes")?.map(|(_, x)| x),
        gw_box,
        max_n: int("", "max_N")?.map_or(DEFAULT_MAX_N, |(_, x)| x),
        max_x: int("", "max_X")?.map_or(DEFAULT_MAX_X, |(_, x)| x),
    };
    match command {
        Command::Count | Command::Fit if cfg.grid().is_none() => Err(required("X")),
        Command::GwCheck if cfg.gw_box.is_none() && cfg.random_boxes.is_none() => {
            err(cmd_line, "gw-check needs a [box] section or `random_boxes`")
        }
        Command::ExampleD1mod4 if n != 2 => err(n_line, "example-d1mod4 needs n = 2"),
        _ => Ok(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse_config("n=2 family=full ordering=disc command=count X=1e6").unwrap();
        assert_eq!((c.n, c.command, c.x), (2, Command::Count, Some(1_000_000)));
        assert_eq!(c.family, FamilyChoice::Builtin("full".into()));
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejections() {
        let e = parse_config("n=1 family=full command=count X=10").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_config("n = 2\nfamily = full\ncommand = count\ncolour = 3\n").unwrap_err();
        assert_eq!((e.line, e.message.as_str()), (4, "unknown key `colour`"));
        let text = "n = 2\ncommand = invariants\n[family]\ndefault = unramified\noverride = [1:1.1.0]\nmodulus = 4\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("family must contain identity"), "{e}");
        assert_eq!(parse_config("n=2 family=full command=count").unwrap_err().message, "missing key `X`");
        assert_eq!(parse_config("n=2 family=full command=count X=10 X=20").unwrap_err().line, 1);
        assert!(parse_config("n=2 family=full command=count grid=[1, 3").is_err());
    }

    #[test]
    fn structured_sections_round_trip() {
        let text = "\
n = 2 ordering = custom command = gw-check random_boxes = 3 seed = 7
[family]
name = odd  modulus = 4  default = unramified
override = [1:all, 3:0.0.0;1.0.0;1.1.0]  exceptional = [2:unramified, inf:all]
[ordering]
modulus = 4  entry = [1:2:1, 3:2:2]
[box]
at = [3:1.0.0+0.1.0, inf:0.1.0]
";
        let c = parse_config(text).unwrap();
        assert!(matches!(&c.family, FamilyChoice::Inline(f) if f.overrides.len() == 2));
        assert!(matches!(&c.ordering, OrderingChoice::Custom { entries, .. } if entries.len() == 2));
        assert_eq!(c.gw_box.as_ref().unwrap().conditions.len(), 2);
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn subsets() {
        for s in ["all", "unramified", "zero", "inertia-divides-2", "0.0.0;1.1.0"] {
            assert_eq!(subset_text(&parse_subset(s).unwrap()), s);
        }
        assert_eq!(parse_int("1e6"), Some(1_000_000));
        assert_eq!(parse_int("10_000"), Some(10_000));
        assert_eq!(parse_int("1e30"), None);
    }
}
