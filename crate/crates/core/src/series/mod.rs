//! Exact scalars, truncated germs and polynomial families.

pub mod gauss;
pub mod germ;
pub mod parse;
pub mod poly;
pub mod rat;

pub use gauss::GaussRat;
pub use germ::{Germ, GermError, Order};
pub use parse::ParseError;
pub use poly::{Monomial, PolyError, PolyFamily};
pub use rat::{ParseRatError, Rat};
