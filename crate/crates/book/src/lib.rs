// mdbook cannot run snippets that depend on workspace crates, so every
// chapter is included here as a module doc and checked by `cargo test --doc`.
// A module per chapter keeps failures traceable to a file.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/local.md")]
pub mod local {}
#[doc = include_str!("../../../book/src/orderings.md")]
pub mod orderings {}
#[doc = include_str!("../../../book/src/families.md")]
pub mod families {}
#[doc = include_str!("../../../book/src/enumeration.md")]
pub mod enumeration {}
#[doc = include_str!("../../../book/src/euler.md")]
pub mod euler {}
#[doc = include_str!("../../../book/src/poisson.md")]
pub mod poisson {}
#[doc = include_str!("../../../book/src/selmer.md")]
pub mod selmer {}
#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
