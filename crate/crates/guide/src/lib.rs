//! The book under `book/` is the narrative guide to the simulator; this
//! crate exists so that `cargo test` compiles and runs every code block in
//! it as a doc-test. mdbook's own `test` command cannot resolve external
//! crate dependencies, so the chapters are attached here as module docs
//! instead — same markdown, real compiler.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/world.md")]
pub mod world {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/aoi.md")]
pub mod aoi {}

#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}

#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}

#[doc = include_str!("../../../book/src/schemes.md")]
pub mod schemes {}

#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
