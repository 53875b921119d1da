pub mod eos;
pub mod error;
pub mod interp;
pub mod numeric;
pub mod observables;
pub mod oracle;
pub mod solver;
pub mod validation;
pub mod zeta;

pub use error::{Error, LastState, Result};
pub use interp::{InterpolationModel, MuFamily};
pub use zeta::{ZetaCache, ZetaModel};
