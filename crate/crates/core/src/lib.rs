//! A numerical laboratory for interval maps whose periodic orbits all share
//! one mean value: the replicator family `f_{a,b}`, its conjugate `g_{a,b}`,
//! hyperbolicity certificates, the golden-mean subshift, and finite-basis
//! experiments on shift functions and coboundaries.

pub mod certify;
pub mod dynamics;
pub mod error;
pub mod map;
pub mod orbit;
pub mod output;
pub mod periodic;
pub mod roots;
pub mod shiftlab;
pub mod symbolic;

pub use error::{Error, Result};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use dynamics::{Conjugate, Dynamics, Generated, ReferenceMap, Replicator};
pub use map::{MapKind, MapParams};
