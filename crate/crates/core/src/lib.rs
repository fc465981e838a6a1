pub mod eikonal1d;
pub mod error;
pub mod hodograph;
pub mod nlse2d;
pub mod nonlinearity;
pub mod numerics;
pub mod profile;
pub mod validation;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/media.md")]
    mod media {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/approximate.md")]
    mod approximate {}
    #[doc = include_str!("../../../book/src/round.md")]
    mod round {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
