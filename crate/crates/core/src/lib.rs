pub mod algebra;
pub mod arrangement;
pub mod cone;
pub mod config;
pub mod convolution;
pub mod corpus;
pub mod current;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod polytope;
pub mod rational;
pub mod selftest;
pub mod spherical;
pub mod volume;

// README and guide code blocks run as doctests, one module per file.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/exterior.md")]
    mod exterior {}
    #[doc = include_str!("../../../book/src/spherical.md")]
    mod spherical {}
    #[doc = include_str!("../../../book/src/representations.md")]
    mod representations {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/convolution.md")]
    mod convolution {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
