use proptest::prelude::*;

use h1count_cli::parse_config;

const FAMILIES: [&str; 4] = ["full", "unramified", "real", "box3"];
const COMMANDS: [&str; 4] = ["count", "fit", "poisson-check", "invariants"];
const SUBSETS: [&str; 5] = ["all", "unramified", "zero", "inertia-divides-2", "0.0.0;1.0.0"];

proptest! {
    #[test]
    fn canonical_text_parses_back(
        n in 2u64..=6,
        fam in 0usize..FAMILIES.len(),
        cmd in 0usize..COMMANDS.len(),
        radical in any::<bool>(),
        x in 1_000u64..10_000_000,
        seed in any::<u64>(),
        inline in any::<bool>(),
        sub in 0usize..SUBSETS.len(),
    ) {
        let family = if inline {
            format!("\n[family]\nname = f  modulus = 3  default = unramified  override = [1:{}]\n", SUBSETS[sub])
        } else {
            format!("family = {}", FAMILIES[fam])
        };
        let ordering = if radical { "radical" } else { "disc" };
        let text = format!("n = {n} ordering = {ordering} command = {} X = {x} seed = {seed}\n{family}", COMMANDS[cmd]);
        let cfg = match parse_config(&text) {
            Ok(c) => c,
            // some subsets lack the identity or n does not fit the subset
            Err(_) => return Ok(()),
        };
        prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn garbage_never_panics(text in "[a-z_=\\[\\]0-9 \n#:.;+-]{0,80}") {
        let _ = parse_config(&text);
    }
}
