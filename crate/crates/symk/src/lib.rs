//! Exact symbol calculus over small finite fields: places and valuations on
//! curves, tame symbols and Weil reciprocity, and finitely presented symbol
//! K-groups computed through integer linear algebra.

pub mod abelian;
pub mod curve;
pub mod embed;
pub mod error;
pub mod field;
pub mod intmat;
pub mod milnor;
pub mod num;
pub mod poly;
pub mod rewrite;

pub use abelian::FinAbGroup;
pub use curve::{Curve, Divisor, EllPoint, Place, RatFn};
pub use error::{Error, Result};
pub use field::{Fq, Fx};
pub use poly::Poly;
