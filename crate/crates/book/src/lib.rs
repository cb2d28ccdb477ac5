//! The guide's chapters, compiled so `cargo test` runs every code block.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/mapping.md")]
pub mod mapping {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/ground_states.md")]
pub mod ground_states {}
#[doc = include_str!("../../../book/src/noise.md")]
pub mod noise {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
