pub mod arith;
pub mod ball;
pub mod gfun;
pub mod isogeny;
pub mod linalg;
pub mod padic;
pub mod period;
pub mod place;
pub mod poly;
pub mod qexp;
pub mod quad;
pub mod relation;
pub mod report;
pub mod series;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/qexp.md")]
    mod qexp {}
    #[doc = include_str!("../../../book/src/places.md")]
    mod places {}
    #[doc = include_str!("../../../book/src/gfun.md")]
    mod gfun {}
    #[doc = include_str!("../../../book/src/periods.md")]
    mod periods {}
    #[doc = include_str!("../../../book/src/isogeny.md")]
    mod isogeny {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
