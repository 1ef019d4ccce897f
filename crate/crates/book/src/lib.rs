//! Guide chapters, compiled so that their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/domains.md")]
pub mod domains {}

#[doc = include_str!("../../../book/src/disk.md")]
pub mod disk {}

#[doc = include_str!("../../../book/src/torsion.md")]
pub mod torsion {}

#[doc = include_str!("../../../book/src/auxiliary.md")]
pub mod auxiliary {}

#[doc = include_str!("../../../book/src/steklov.md")]
pub mod steklov {}

#[doc = include_str!("../../../book/src/exterior.md")]
pub mod exterior {}

#[doc = include_str!("../../../book/src/campaigns.md")]
pub mod campaigns {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
