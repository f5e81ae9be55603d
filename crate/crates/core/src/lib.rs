//! Point counting and local densities for systems of bihomogeneous forms.

pub mod arith;
pub mod counting;
pub mod densities;
pub mod expsums;
pub mod forms;
pub mod hyperbola;
pub mod linalg;
pub mod manin;
pub mod output;
pub mod parser;
pub mod stats;

pub use forms::{BihomogeneousForm, FormError, FormSystem, HomogeneousForm, Monomial};
pub use parser::{parse_form, parse_system, JobConfig, ParseError, ParseErrorKind};
