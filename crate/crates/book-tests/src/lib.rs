//! Doc-test host for the guide in `book/`: every fenced Rust block in the
//! chapters runs under `cargo test --doc -p bessel-szego-book-tests`, so
//! the book cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/special-functions.md")]
pub mod special_functions {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/symbols.md")]
pub mod symbols {}

#[doc = include_str!("../../../book/src/bessel-operator.md")]
pub mod bessel_operator {}

#[doc = include_str!("../../../book/src/wiener-hopf.md")]
pub mod wiener_hopf {}

#[doc = include_str!("../../../book/src/determinants.md")]
pub mod determinants {}

#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
